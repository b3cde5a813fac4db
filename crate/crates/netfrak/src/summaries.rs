//! Geometrically corrected summary statistics for point patterns on linear
//! networks: the empty-space function F, the nearest-neighbour distance
//! distribution H, their ratio J, and the corrected K-function, in
//! inhomogeneous and homogeneous variants.
//!
//! Estimation centers are restricted to the r-erosion of the network (minus
//! sampling), which makes F unbiased and H ratio-unbiased. Each ball
//! membership contributes a factor 1 - (rho_bar / rho(x)) w(u, d(u, x)),
//! where w is the geodesic-ball boundary weight of the metric.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{LinearNetwork, NetworkLocation, PointPattern};
use crate::intensity::IntensitySurface;
use crate::metric::{DistanceField, RegularMetric};

/// Default number of r-grid values.
pub const DEFAULT_NR: usize = 513;

/// Default fraction of R used as the r-grid maximum.
pub const DEFAULT_RMAX_FRAC: f64 = 0.45;

/// Which summary statistic an estimate describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryKind {
    F,
    H,
    J,
    K,
}

impl SummaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            SummaryKind::F => "F",
            SummaryKind::H => "H",
            SummaryKind::J => "J",
            SummaryKind::K => "K",
        }
    }
}

/// Whether the intensity ratios rho_bar / rho(x) enter the products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntensityMode {
    Inhomogeneous,
    Homogeneous,
}

/// Estimate metadata carried alongside the curve.
#[derive(Debug, Clone)]
pub struct SummaryMeta {
    pub n_points: usize,
    pub total_length: f64,
    /// Valid range bound R used to build the r grid (when known).
    pub r_bound: f64,
    pub grid_spacing: Option<f64>,
    pub mode: IntensityMode,
    pub rho_bar: Option<f64>,
    /// N(I intersect L_erode(r)) per r (grid centers surviving erosion).
    pub n_grid: Vec<usize>,
    /// N(X intersect L_erode(r)) per r.
    pub n_data: Vec<usize>,
    /// Set when a product factor left [0, 1]; only possible when the
    /// rho-bar floor engaged.
    pub factor_bound_violated: bool,
}

/// An r-grid curve with explicit undefined markers.
#[derive(Debug, Clone)]
pub struct SummaryEstimate {
    pub kind: SummaryKind,
    pub r: Vec<f64>,
    pub value: Vec<Option<f64>>,
    pub meta: SummaryMeta,
}

/// Equally spaced r grid on [0, frac * r_bound] with `nr` values.
pub fn default_r_grid(r_bound: f64, frac: f64, nr: usize) -> Vec<f64> {
    let rmax = frac * r_bound;
    (0..nr)
        .map(|i| rmax * i as f64 / (nr - 1) as f64)
        .collect()
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.c
    }
}

/// Per-center precomputation: erosion depth and the sorted (distance,
/// product factor) list over the data points within the r range.
struct CenterData {
    boundary_dist: f64,
    factors: Vec<(f64, f64)>,
    factor_bound_violated: bool,
}

#[allow(clippy::too_many_arguments)]
fn survey_centers<M: RegularMetric>(
    net: &LinearNetwork,
    metric: &M,
    centers: &[NetworkLocation],
    exclude_self: bool,
    data: &[NetworkLocation],
    ratios: &[f64],
    r_max: f64,
    boundary: &DistanceField,
) -> Vec<CenterData> {
    let tol = net.simplicity_tolerance();
    centers
        .par_iter()
        .enumerate()
        .map(|(ci, &u)| {
            let boundary_dist = boundary.eval(u);
            let field = metric.field(net, u);
            let mut factors = Vec::new();
            let mut violated = false;
            for (j, &x) in data.iter().enumerate() {
                if exclude_self && j == ci {
                    continue;
                }
                let d = field.eval(x);
                if d <= tol || d > r_max {
                    continue;
                }
                let w = metric
                    .weight_from_field(&field, d)
                    .expect("distance within range has a nonempty ball boundary");
                let factor = 1.0 - ratios[j] * w;
                if !(-1e-12..=1.0 + 1e-12).contains(&factor) {
                    violated = true;
                }
                factors.push((d, factor));
            }
            factors.sort_by(|a, b| a.0.total_cmp(&b.0));
            CenterData {
                boundary_dist,
                factors,
                factor_bound_violated: violated,
            }
        })
        .collect()
}

fn intensity_ratios(
    net: &LinearNetwork,
    data: &[NetworkLocation],
    surface: &IntensitySurface,
    rho_bar: f64,
    mode: IntensityMode,
) -> Result<Vec<f64>> {
    match mode {
        IntensityMode::Homogeneous => Ok(vec![1.0; data.len()]),
        IntensityMode::Inhomogeneous => data
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let rho = surface.eval(net, x);
                if !(rho > 0.0) {
                    Err(Error::NonPositiveIntensityAtDataPoint(i))
                } else {
                    Ok(rho_bar / rho)
                }
            })
            .collect(),
    }
}

fn erosion_counts(r_grid: &[f64], boundary_dists: &[f64]) -> Vec<usize> {
    r_grid
        .iter()
        .map(|&r| boundary_dists.iter().filter(|&&b| b >= r).count())
        .collect()
}

/// Mean-of-products sweep over the r grid; `None` where no center survives
/// erosion.
fn sweep(r_grid: &[f64], centers: &mut [(CenterData, usize, f64)]) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let mut sum = Kahan::default();
        let mut count = 0usize;
        for (cd, ptr, prod) in centers.iter_mut() {
            while *ptr < cd.factors.len() && cd.factors[*ptr].0 <= r {
                *prod *= cd.factors[*ptr].1;
                *ptr += 1;
            }
            if cd.boundary_dist >= r {
                sum.add(*prod);
                count += 1;
            }
        }
        if count == 0 {
            out.push(None);
        } else {
            out.push(Some(1.0 - sum.total() / count as f64));
        }
    }
    out
}

/// Empty-space function estimate over a fixed grid of centers I.
#[allow(clippy::too_many_arguments)]
pub fn estimate_f<M: RegularMetric>(
    net: &LinearNetwork,
    metric: &M,
    pattern: &PointPattern,
    surface: &IntensitySurface,
    rho_bar: f64,
    grid: &[NetworkLocation],
    r_grid: &[f64],
    mode: IntensityMode,
) -> Result<SummaryEstimate> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let data = pattern.points();
    let ratios = intensity_ratios(net, data, surface, rho_bar, mode)?;
    let r_max = r_grid.last().copied().unwrap_or(0.0);
    let boundary = metric.boundary_field(net);
    let centers = survey_centers(net, metric, grid, false, data, &ratios, r_max, &boundary);

    let violated = centers.iter().any(|c| c.factor_bound_violated);
    let grid_bd: Vec<f64> = centers.iter().map(|c| c.boundary_dist).collect();
    let data_bd: Vec<f64> = data.iter().map(|&x| boundary.eval(x)).collect();
    let mut state: Vec<(CenterData, usize, f64)> =
        centers.into_iter().map(|c| (c, 0usize, 1.0f64)).collect();
    let value = sweep(r_grid, &mut state);

    Ok(SummaryEstimate {
        kind: SummaryKind::F,
        r: r_grid.to_vec(),
        value,
        meta: SummaryMeta {
            n_points: data.len(),
            total_length: net.total_length(),
            r_bound: r_max,
            grid_spacing: None,
            mode,
            rho_bar: Some(rho_bar),
            n_grid: erosion_counts(r_grid, &grid_bd),
            n_data: erosion_counts(r_grid, &data_bd),
            factor_bound_violated: violated,
        },
    })
}

/// Nearest-neighbour distance distribution estimate; centers are the data
/// points themselves, each excluded from its own product.
pub fn estimate_h<M: RegularMetric>(
    net: &LinearNetwork,
    metric: &M,
    pattern: &PointPattern,
    surface: &IntensitySurface,
    rho_bar: f64,
    r_grid: &[f64],
    mode: IntensityMode,
) -> Result<SummaryEstimate> {
    let data = pattern.points();
    let ratios = intensity_ratios(net, data, surface, rho_bar, mode)?;
    let r_max = r_grid.last().copied().unwrap_or(0.0);
    let boundary = metric.boundary_field(net);
    let centers = survey_centers(net, metric, data, true, data, &ratios, r_max, &boundary);

    let violated = centers.iter().any(|c| c.factor_bound_violated);
    let data_bd: Vec<f64> = centers.iter().map(|c| c.boundary_dist).collect();
    let mut state: Vec<(CenterData, usize, f64)> =
        centers.into_iter().map(|c| (c, 0usize, 1.0f64)).collect();
    let value = sweep(r_grid, &mut state);

    Ok(SummaryEstimate {
        kind: SummaryKind::H,
        r: r_grid.to_vec(),
        value,
        meta: SummaryMeta {
            n_points: data.len(),
            total_length: net.total_length(),
            r_bound: r_max,
            grid_spacing: None,
            mode,
            rho_bar: Some(rho_bar),
            n_grid: vec![0; r_grid.len()],
            n_data: erosion_counts(r_grid, &data_bd),
            factor_bound_violated: violated,
        },
    })
}

/// J = (1 - H) / (1 - F) on matching r grids; undefined where F = 1 or
/// either input is undefined.
pub fn estimate_j(f: &SummaryEstimate, h: &SummaryEstimate) -> Result<SummaryEstimate> {
    if f.r != h.r {
        return Err(Error::GridMismatch);
    }
    let value: Vec<Option<f64>> = f
        .value
        .iter()
        .zip(&h.value)
        .map(|(fv, hv)| match (fv, hv) {
            (Some(fv), Some(hv)) => {
                let denom = 1.0 - fv;
                if denom == 0.0 {
                    None
                } else {
                    Some((1.0 - hv) / denom)
                }
            }
            _ => None,
        })
        .collect();
    Ok(SummaryEstimate {
        kind: SummaryKind::J,
        r: f.r.clone(),
        value,
        meta: SummaryMeta {
            n_points: h.meta.n_points,
            total_length: f.meta.total_length,
            r_bound: f.meta.r_bound,
            grid_spacing: f.meta.grid_spacing,
            mode: f.meta.mode,
            rho_bar: f.meta.rho_bar,
            n_grid: f.meta.n_grid.clone(),
            n_data: h.meta.n_data.clone(),
            factor_bound_violated: f.meta.factor_bound_violated || h.meta.factor_bound_violated,
        },
    })
}

/// Geometrically corrected inhomogeneous K-function estimate.
pub fn estimate_k<M: RegularMetric>(
    net: &LinearNetwork,
    metric: &M,
    pattern: &PointPattern,
    surface: &IntensitySurface,
    r_grid: &[f64],
    r_bound: f64,
    mode: IntensityMode,
) -> Result<SummaryEstimate> {
    let r_max = r_grid.last().copied().unwrap_or(0.0);
    if r_max >= r_bound {
        return Err(Error::RMaxExceedsR {
            rmax: r_max,
            r_bound,
        });
    }
    let data = pattern.points();
    let tol = net.simplicity_tolerance();
    let rho: Vec<f64> = match mode {
        IntensityMode::Homogeneous => {
            let level = data.len() as f64 / net.total_length();
            vec![level; data.len()]
        }
        IntensityMode::Inhomogeneous => {
            let mut v = Vec::with_capacity(data.len());
            for (i, &x) in data.iter().enumerate() {
                let r = surface.eval(net, x);
                if !(r > 0.0) {
                    return Err(Error::NonPositiveIntensityAtDataPoint(i));
                }
                v.push(r);
            }
            v
        }
    };

    // Ordered-pair contributions, gathered per source point in parallel and
    // then merged in deterministic order.
    let per_source: Vec<Vec<(f64, f64)>> = data
        .par_iter()
        .enumerate()
        .map(|(i, &x1)| {
            let field = metric.field(net, x1);
            let mut out = Vec::new();
            for (j, &x2) in data.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = field.eval(x2);
                if d <= tol || d > r_max {
                    continue;
                }
                let w = metric
                    .weight_from_field(&field, d)
                    .expect("distance within range has a nonempty ball boundary");
                out.push((d, w / (rho[i] * rho[j])));
            }
            out
        })
        .collect();

    let mut contributions: Vec<(f64, usize, f64)> = Vec::new();
    for (idx, v) in per_source.into_iter().enumerate() {
        for (d, c) in v {
            contributions.push((d, idx, c));
        }
    }
    contributions.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let total_len = net.total_length();
    let mut value = Vec::with_capacity(r_grid.len());
    let mut sum = Kahan::default();
    let mut ptr = 0usize;
    for &r in r_grid {
        while ptr < contributions.len() && contributions[ptr].0 <= r {
            sum.add(contributions[ptr].2);
            ptr += 1;
        }
        value.push(Some(sum.total() / total_len));
    }

    let boundary = metric.boundary_field(net);
    let data_bd: Vec<f64> = data.iter().map(|&x| boundary.eval(x)).collect();
    Ok(SummaryEstimate {
        kind: SummaryKind::K,
        r: r_grid.to_vec(),
        value,
        meta: SummaryMeta {
            n_points: data.len(),
            total_length: total_len,
            r_bound,
            grid_spacing: None,
            mode,
            rho_bar: None,
            n_grid: vec![0; r_grid.len()],
            n_data: erosion_counts(r_grid, &data_bd),
            factor_bound_violated: false,
        },
    })
}

/// Compute one named statistic; J is assembled from F and H internally.
#[allow(clippy::too_many_arguments)]
pub fn estimate_statistic<M: RegularMetric>(
    net: &LinearNetwork,
    metric: &M,
    pattern: &PointPattern,
    surface: &IntensitySurface,
    rho_bar: f64,
    grid: &[NetworkLocation],
    r_grid: &[f64],
    r_bound: f64,
    mode: IntensityMode,
    kind: SummaryKind,
) -> Result<SummaryEstimate> {
    match kind {
        SummaryKind::F => estimate_f(net, metric, pattern, surface, rho_bar, grid, r_grid, mode),
        SummaryKind::H => estimate_h(net, metric, pattern, surface, rho_bar, r_grid, mode),
        SummaryKind::J => {
            let f = estimate_f(net, metric, pattern, surface, rho_bar, grid, r_grid, mode)?;
            let h = estimate_h(net, metric, pattern, surface, rho_bar, r_grid, mode)?;
            estimate_j(&f, &h)
        }
        SummaryKind::K => estimate_k(net, metric, pattern, surface, r_grid, r_bound, mode),
    }
}
