//! Pointwise critical envelopes from Monte Carlo simulations under a fitted
//! Poisson null model.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{grid_points, LinearNetwork, NetworkLocation, PointPattern};
use crate::intensity::{fit_intensity, rho_bar, Bandwidth, IntensitySurface, DEFAULT_FLOOR_EPS};
use crate::metric::{global_r_max, RegularMetric};
use crate::simulate::{poisson_homogeneous, poisson_inhomogeneous, replicate_rng};
use crate::summaries::{
    default_r_grid, estimate_statistic, IntensityMode, SummaryKind, DEFAULT_NR, DEFAULT_RMAX_FRAC,
};

/// Safety factor applied to the grid maximum of the fitted intensity when it
/// is used as the dominating intensity for simulation.
const DOMINATING_SAFETY: f64 = 1.2;

/// Envelope test configuration.
#[derive(Debug, Clone)]
pub struct EnvelopeConfig {
    pub stat: SummaryKind,
    pub mode: IntensityMode,
    pub nsim: usize,
    pub rank: usize,
    /// Re-estimate the intensity for every simulated pattern (rather than
    /// reusing the intensity fitted to the observed pattern).
    pub refit: bool,
    pub seed: u64,
    pub bandwidth: Bandwidth,
    /// Spacing of the fixed grid I; defaults to |L| / 200.
    pub grid_spacing: Option<f64>,
    pub rmax_frac: f64,
    pub nr: usize,
    pub floor_eps: f64,
}

impl EnvelopeConfig {
    pub fn new(stat: SummaryKind, seed: u64) -> Self {
        Self {
            stat,
            mode: IntensityMode::Inhomogeneous,
            nsim: 99,
            rank: 1,
            refit: true,
            seed,
            bandwidth: Bandwidth::Scott,
            grid_spacing: None,
            rmax_frac: DEFAULT_RMAX_FRAC,
            nr: DEFAULT_NR,
            floor_eps: DEFAULT_FLOOR_EPS,
        }
    }
}

/// Envelope test output: observed curve, order-statistic bounds, and the
/// per-r count of defined simulated values.
#[derive(Debug, Clone)]
pub struct EnvelopeResult {
    pub r: Vec<f64>,
    pub observed: Vec<Option<f64>>,
    pub lo: Vec<Option<f64>>,
    pub hi: Vec<Option<f64>>,
    pub sim_mean: Vec<Option<f64>>,
    pub nsim: usize,
    pub rank: usize,
    pub defined_count: Vec<usize>,
    pub null_model: String,
    pub seed: u64,
    pub mode: IntensityMode,
    pub refit: bool,
    /// Replicates whose statistic could not be computed, with the reason.
    pub failures: Vec<(usize, String)>,
}

fn fit_for(
    net: &LinearNetwork,
    pattern: &PointPattern,
    cfg: &EnvelopeConfig,
    grid: &[NetworkLocation],
) -> Result<(IntensitySurface, f64)> {
    match cfg.mode {
        IntensityMode::Homogeneous => {
            let surface = IntensitySurface::constant(net, pattern.len());
            let level = pattern.len() as f64 / net.total_length();
            Ok((surface, level))
        }
        IntensityMode::Inhomogeneous => {
            let surface = fit_intensity(net, pattern, cfg.bandwidth)?;
            let rb = rho_bar(net, &surface, grid, cfg.floor_eps)?;
            Ok((surface, rb.value))
        }
    }
}

/// Simulate nsim Poisson patterns from the intensity fitted to the observed
/// pattern, estimate the chosen statistic for each, and form pointwise
/// rank-k envelopes from the defined values at every r.
pub fn pointwise_envelope<M: RegularMetric>(
    net: &LinearNetwork,
    metric: &M,
    observed: &PointPattern,
    cfg: &EnvelopeConfig,
) -> Result<EnvelopeResult> {
    if observed.is_empty() {
        return Err(Error::EmptySurface);
    }
    if cfg.nsim < 2 * cfg.rank - 1 {
        return Err(Error::Format(format!(
            "nsim = {} too small for rank {}",
            cfg.nsim, cfg.rank
        )));
    }
    let spacing = cfg
        .grid_spacing
        .unwrap_or(net.total_length() / 200.0);
    let grid = grid_points(net, spacing)?;
    let r_bound = global_r_max(net, metric, &grid);
    let r_grid = default_r_grid(r_bound, cfg.rmax_frac, cfg.nr);

    let (obs_surface, obs_rho_bar) = fit_for(net, observed, cfg, &grid)?;
    let observed_curve = estimate_statistic(
        net,
        metric,
        observed,
        &obs_surface,
        obs_rho_bar,
        &grid,
        &r_grid,
        r_bound,
        cfg.mode,
        cfg.stat,
    )?;

    // Dominating intensity for thinning-based simulation from the fitted
    // surface: grid and data maxima with a safety margin.
    let rho_max = {
        let mut m = observed
            .points()
            .iter()
            .chain(grid.iter())
            .map(|&u| obs_surface.eval(net, u))
            .fold(0.0f64, f64::max);
        m *= DOMINATING_SAFETY;
        m
    };

    let curves: Vec<std::result::Result<Vec<Option<f64>>, String>> = (1..=cfg.nsim as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(cfg.seed, i);
            let sim = match cfg.mode {
                IntensityMode::Homogeneous => {
                    poisson_homogeneous(net, observed.len() as f64 / net.total_length(), &mut rng)
                }
                IntensityMode::Inhomogeneous => poisson_inhomogeneous(
                    net,
                    |n, u| obs_surface.eval(n, u).min(rho_max),
                    rho_max,
                    &mut rng,
                )
                .map_err(|e| e.to_string())?,
            };
            let (surface, rb) = if cfg.refit {
                fit_for(net, &sim, cfg, &grid).map_err(|e| e.to_string())?
            } else {
                (obs_surface.clone(), obs_rho_bar)
            };
            estimate_statistic(
                net, metric, &sim, &surface, rb, &grid, &r_grid, r_bound, cfg.mode, cfg.stat,
            )
            .map(|e| e.value)
            .map_err(|e| e.to_string())
        })
        .collect();

    let mut failures = Vec::new();
    let mut sim_values: Vec<Vec<Option<f64>>> = Vec::with_capacity(cfg.nsim);
    for (i, c) in curves.into_iter().enumerate() {
        match c {
            Ok(v) => sim_values.push(v),
            Err(msg) => {
                failures.push((i + 1, msg));
                sim_values.push(vec![None; r_grid.len()]);
            }
        }
    }

    let mut lo = Vec::with_capacity(r_grid.len());
    let mut hi = Vec::with_capacity(r_grid.len());
    let mut sim_mean = Vec::with_capacity(r_grid.len());
    let mut defined_count = Vec::with_capacity(r_grid.len());
    for ri in 0..r_grid.len() {
        let mut vals: Vec<f64> = sim_values.iter().filter_map(|c| c[ri]).collect();
        vals.sort_by(f64::total_cmp);
        defined_count.push(vals.len());
        if vals.is_empty() {
            lo.push(None);
            hi.push(None);
            sim_mean.push(None);
        } else {
            let k = cfg.rank.min(vals.len());
            lo.push(Some(vals[k - 1]));
            hi.push(Some(vals[vals.len() - k]));
            sim_mean.push(Some(vals.iter().sum::<f64>() / vals.len() as f64));
        }
    }

    let null_model = match cfg.mode {
        IntensityMode::Homogeneous => "poisson-homogeneous-fitted".to_string(),
        IntensityMode::Inhomogeneous => "poisson-inhomogeneous-fitted".to_string(),
    };
    Ok(EnvelopeResult {
        r: r_grid,
        observed: observed_curve.value,
        lo,
        hi,
        sim_mean,
        nsim: cfg.nsim,
        rank: cfg.rank,
        defined_count,
        null_model,
        seed: cfg.seed,
        mode: cfg.mode,
        refit: cfg.refit,
        failures,
    })
}

/// Verdict summary: fractions of the r grid where the observed curve leaves
/// the envelope on either side.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeVerdict {
    /// Fraction of comparable r with observed < lo (clustering signal for J).
    pub frac_below: f64,
    /// Fraction of comparable r with observed > hi (inhibition signal for J).
    pub frac_above: f64,
    /// Number of r values where both the observed curve and the envelope
    /// were defined.
    pub compared: usize,
}

pub fn envelope_verdict(result: &EnvelopeResult) -> EnvelopeVerdict {
    let mut below = 0usize;
    let mut above = 0usize;
    let mut compared = 0usize;
    for i in 0..result.r.len() {
        if let (Some(obs), Some(lo), Some(hi)) = (result.observed[i], result.lo[i], result.hi[i]) {
            compared += 1;
            if obs < lo {
                below += 1;
            }
            if obs > hi {
                above += 1;
            }
        }
    }
    let denom = compared.max(1) as f64;
    EnvelopeVerdict {
        frac_below: below as f64 / denom,
        frac_above: above as f64 / denom,
        compared,
    }
}

impl std::fmt::Display for EnvelopeVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "obs<lo at {:.1}% of r (clustering signal), obs>hi at {:.1}% of r (inhibition signal), {} r values compared",
            100.0 * self.frac_below,
            100.0 * self.frac_above,
            self.compared
        )
    }
}
