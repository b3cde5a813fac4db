//! Generative point process models on linear networks: homogeneous and
//! inhomogeneous Poisson, simple sequential inhibition with independent
//! thinning, and log-Gaussian Cox processes.
//!
//! All randomness flows from a 64-bit master seed; replicate substreams are
//! independent ChaCha streams, so batch runs reproduce bit-identically
//! regardless of parallelism.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{LinearNetwork, NetworkLocation, PointPattern};
use crate::metric::RegularMetric;

/// Dense-factorization bound on the LGCP cell count.
pub const MAX_FIELD_CELLS: usize = 20_000;

/// RNG for replicate `index` of a batch with the given master seed.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn poisson_count(mean: f64, rng: &mut impl Rng) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as usize
}

/// Uniform location on the network: length-weighted segment choice, then a
/// uniform offset.
fn uniform_location(net: &LinearNetwork, rng: &mut impl Rng) -> NetworkLocation {
    let target = rng.gen_range(0.0..net.total_length());
    let mut acc = 0.0;
    for seg in 0..net.segments().len() {
        let len = net.segment_length(seg);
        if target < acc + len || seg == net.segments().len() - 1 {
            let offset = rng.gen_range(0.0..len);
            return NetworkLocation::new(seg, offset);
        }
        acc += len;
    }
    unreachable!("network has at least one segment")
}

/// Push a point, redrawing (via `draw`) on the measure-zero event that it
/// collides with an accepted point within the simplicity tolerance.
fn push_simple(
    net: &LinearNetwork,
    accepted: &mut Vec<NetworkLocation>,
    xy: &mut Vec<[f64; 2]>,
    mut draw: impl FnMut() -> NetworkLocation,
) {
    let tol = net.simplicity_tolerance();
    loop {
        let cand = draw();
        let cxy = cand.to_xy(net);
        let close: Vec<usize> = (0..accepted.len())
            .filter(|&i| crate::geometry::dist2(xy[i], cxy) < tol)
            .collect();
        let dup = close
            .iter()
            .any(|&i| crate::metric::shortest_path_distance(net, accepted[i], cand) < tol);
        if !dup {
            accepted.push(cand);
            xy.push(cxy);
            return;
        }
    }
}

/// Homogeneous Poisson process with constant intensity `rho` per unit
/// length.
pub fn poisson_homogeneous(
    net: &LinearNetwork,
    rho: f64,
    rng: &mut impl Rng,
) -> PointPattern {
    let n = poisson_count(rho * net.total_length(), rng);
    let mut pts = Vec::with_capacity(n);
    let mut xy = Vec::with_capacity(n);
    for _ in 0..n {
        push_simple(net, &mut pts, &mut xy, || uniform_location(net, rng));
    }
    PointPattern::new(net, pts).expect("simplicity enforced during placement")
}

/// Inhomogeneous Poisson process by thinning a dominating homogeneous one.
/// `rho_fn` must be bounded by `rho_max` on the whole network.
pub fn poisson_inhomogeneous(
    net: &LinearNetwork,
    rho_fn: impl Fn(&LinearNetwork, NetworkLocation) -> f64,
    rho_max: f64,
    rng: &mut impl Rng,
) -> Result<PointPattern> {
    let n = poisson_count(rho_max * net.total_length(), rng);
    let mut pts = Vec::new();
    let mut xy = Vec::new();
    for _ in 0..n {
        let u = uniform_location(net, rng);
        let rho = rho_fn(net, u);
        if rho > rho_max {
            let p = u.to_xy(net);
            return Err(Error::BadDominating {
                rho,
                rho_max,
                x: p[0],
                y: p[1],
            });
        }
        let keep = rng.gen_range(0.0..1.0) < rho / rho_max;
        if keep {
            let tol = net.simplicity_tolerance();
            let cxy = u.to_xy(net);
            let dup = (0..pts.len()).any(|i| {
                crate::geometry::dist2(xy[i], cxy) < tol
                    && crate::metric::shortest_path_distance(net, pts[i], u) < tol
            });
            if !dup {
                pts.push(u);
                xy.push(cxy);
            }
        }
    }
    Ok(PointPattern::new(net, pts).expect("simplicity enforced during placement"))
}

/// Outcome of a simple sequential inhibition run.
#[derive(Debug, Clone)]
pub struct SsiOutcome {
    pub pattern: PointPattern,
    /// False when the attempt budget ran out before reaching the target
    /// count; the pattern is a valid partial packing either way.
    pub complete: bool,
}

/// Simple sequential inhibition: uniform proposals, accepted only when the
/// shortest-path distance to every accepted point exceeds `delta`.
pub fn ssi<M: RegularMetric>(
    net: &LinearNetwork,
    metric: &M,
    n: usize,
    delta: f64,
    max_attempts: usize,
    rng: &mut impl Rng,
) -> SsiOutcome {
    let mut pts: Vec<NetworkLocation> = Vec::with_capacity(n);
    let mut xy: Vec<[f64; 2]> = Vec::with_capacity(n);
    let mut rejections = 0usize;
    while pts.len() < n && rejections < max_attempts {
        let cand = uniform_location(net, rng);
        let cxy = cand.to_xy(net);
        // Network distance dominates the planar distance, so only points
        // within delta in the plane need an exact check.
        let close: Vec<usize> = (0..pts.len())
            .filter(|&i| crate::geometry::dist2(xy[i], cxy) <= delta)
            .collect();
        let ok = if close.is_empty() {
            true
        } else {
            let field = metric.field(net, cand);
            close.iter().all(|&i| field.eval(pts[i]) > delta)
        };
        if ok {
            pts.push(cand);
            xy.push(cxy);
            rejections = 0;
        } else {
            rejections += 1;
        }
    }
    let complete = pts.len() == n;
    SsiOutcome {
        pattern: PointPattern::new(net, pts).expect("hard core implies simplicity"),
        complete,
    }
}

/// Independent thinning with a location-dependent retention probability.
pub fn thin(
    net: &LinearNetwork,
    pattern: &PointPattern,
    p_fn: impl Fn(&LinearNetwork, NetworkLocation) -> f64,
    rng: &mut impl Rng,
) -> PointPattern {
    let kept: Vec<NetworkLocation> = pattern
        .points()
        .iter()
        .copied()
        .filter(|&x| rng.gen_range(0.0..1.0) < p_fn(net, x))
        .collect();
    PointPattern::new(net, kept).expect("subset of a simple pattern is simple")
}

/// Specification of a Gaussian random field evaluated at network cell
/// midpoints (planar coordinates).
pub struct GaussianFieldSpec {
    /// Mean of the log-intensity at a planar location.
    pub mean: Box<dyn Fn(f64, f64) -> f64 + Sync>,
    /// Covariance of the log-intensity between two planar locations.
    pub cov: Box<dyn Fn([f64; 2], [f64; 2]) -> f64 + Sync>,
    /// Target cell length for the discretization of the network.
    pub spacing: f64,
}

/// A simulated log-Gaussian Cox pattern together with the realized field.
#[derive(Debug, Clone)]
pub struct LgcpRealization {
    pub pattern: PointPattern,
    /// Cell midpoints, aligned with `log_intensity`.
    pub cells: Vec<NetworkLocation>,
    pub cell_lengths: Vec<f64>,
    pub log_intensity: Vec<f64>,
}

/// Log-Gaussian Cox process: sample the field at cell midpoints from the
/// dense multivariate normal, then an inhomogeneous Poisson count per cell.
pub fn lgcp(
    net: &LinearNetwork,
    spec: &GaussianFieldSpec,
    rng: &mut impl Rng,
) -> Result<LgcpRealization> {
    let cells = crate::intensity::quadrature_cells(net, spec.spacing);
    let m = cells.len();
    if m > MAX_FIELD_CELLS {
        return Err(Error::FieldTooLarge(m, MAX_FIELD_CELLS));
    }
    let mids: Vec<[f64; 2]> = cells.iter().map(|&(u, _)| u.to_xy(net)).collect();
    let mu: Vec<f64> = mids.iter().map(|p| (spec.mean)(p[0], p[1])).collect();

    let c0 = mids
        .iter()
        .map(|&p| (spec.cov)(p, p))
        .fold(0.0f64, f64::max);
    let mut z = mu.clone();
    if c0 > 0.0 {
        let mut cov = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = (spec.cov)(mids[i], mids[j]);
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        // Exponential-type covariances go numerically singular at fine
        // spacings; escalate diagonal jitter before giving up.
        let mut chol = None;
        let mut jitter = 1e-8 * c0;
        while jitter <= 1e-4 * c0 {
            let mut cj = cov.clone();
            for i in 0..m {
                cj[(i, i)] += jitter;
            }
            if let Some(c) = cj.cholesky() {
                chol = Some(c);
                break;
            }
            jitter *= 10.0;
        }
        let chol = chol.ok_or(Error::CovarianceNotPD)?;
        let eps: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        let l = chol.l();
        for i in 0..m {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += l[(i, j)] * eps[j];
            }
            z[i] += acc;
        }
    }

    let mut pts = Vec::new();
    let mut xy = Vec::new();
    for (k, &(mid, w)) in cells.iter().enumerate() {
        let count = poisson_count(z[k].exp() * w, rng);
        let lo = mid.offset - w / 2.0;
        for _ in 0..count {
            push_simple(net, &mut pts, &mut xy, || {
                NetworkLocation::new(mid.segment, lo + rng.gen_range(0.0..w))
            });
        }
    }

    Ok(LgcpRealization {
        pattern: PointPattern::new(net, pts).expect("simplicity enforced during placement"),
        cells: cells.iter().map(|&(u, _)| u).collect(),
        cell_lengths: cells.iter().map(|&(_, w)| w).collect(),
        log_intensity: z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{seg1, star3, star3_scaled};
    use crate::metric::ShortestPathMetric;

    #[test]
    fn zero_intensity_gives_empty_pattern() {
        let net = star3();
        let mut rng = replicate_rng(1, 0);
        assert!(poisson_homogeneous(&net, 0.0, &mut rng).is_empty());
        let p = poisson_inhomogeneous(&net, |_, _| 0.0, 1.0, &mut rng).unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn poisson_count_mean() {
        let net = star3();
        let mut mean = 0.0;
        let reps = 1000;
        for i in 0..reps {
            let mut rng = replicate_rng(42, i);
            mean += poisson_homogeneous(&net, 10.0, &mut rng).len() as f64;
        }
        mean /= reps as f64;
        // Poisson(30): sd of the mean is sqrt(30/1000).
        assert!((mean - 30.0).abs() < 3.0 * (30.0f64 / reps as f64).sqrt());
    }

    #[test]
    fn poisson_segment_shares_proportional_to_length() {
        // Arms of a star scaled to unequal lengths via an asymmetric net.
        let net = crate::geometry::build_network(
            vec![[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]],
            vec![(0, 1), (0, 2)],
        )
        .unwrap();
        let mut counts = [0usize; 2];
        let mut total = 0usize;
        for i in 0..400 {
            let mut rng = replicate_rng(7, i);
            let p = poisson_homogeneous(&net, 5.0, &mut rng);
            for q in p.points() {
                counts[q.segment] += 1;
                total += 1;
            }
        }
        // Expected shares 2/3 and 1/3; chi-square with 1 dof, p > 0.001
        // corresponds to a statistic below 10.83.
        let e = [total as f64 * 2.0 / 3.0, total as f64 / 3.0];
        let chi2: f64 = (0..2)
            .map(|i| (counts[i] as f64 - e[i]).powi(2) / e[i])
            .sum();
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }

    #[test]
    fn uniform_offsets_within_segments() {
        // KS test of offsets against Uniform(0, len), aggregated over seeds.
        let net = seg1();
        let mut offs: Vec<f64> = Vec::new();
        for i in 0..200 {
            let mut rng = replicate_rng(9, i);
            for p in poisson_homogeneous(&net, 3.0, &mut rng).points() {
                offs.push(p.offset);
            }
        }
        offs.sort_by(f64::total_cmp);
        let n = offs.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in offs.iter().enumerate() {
            let f = x / 1.0;
            d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
        }
        // alpha = 0.001 critical value: sqrt(ln(2/alpha) / (2n)).
        let crit = ((2.0f64 / 0.001).ln() / (2.0 * n)).sqrt();
        assert!(d < crit, "KS statistic {d} above {crit}");
    }

    #[test]
    fn inhomogeneous_with_constant_rho_matches_homogeneous_counts() {
        let net = star3();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for i in 0..1000 {
            let mut rng = replicate_rng(5, i);
            a.push(poisson_homogeneous(&net, 8.0, &mut rng).len() as f64);
            let mut rng = replicate_rng(6, i);
            b.push(
                poisson_inhomogeneous(&net, |_, _| 8.0, 8.0, &mut rng)
                    .unwrap()
                    .len() as f64,
            );
        }
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        // Two-sample KS at alpha = 0.001.
        let (n, m) = (a.len() as f64, b.len() as f64);
        let mut d: f64 = 0.0;
        let (mut i, mut j) = (0usize, 0usize);
        while i < a.len() && j < b.len() {
            // Counts are heavily tied; step past the whole tie block on both
            // sides before comparing the empirical CDFs.
            let t = a[i].min(b[j]);
            while i < a.len() && a[i] <= t {
                i += 1;
            }
            while j < b.len() && b[j] <= t {
                j += 1;
            }
            d = d.max((i as f64 / n - j as f64 / m).abs());
        }
        let crit = ((2.0f64 / 0.001).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt();
        assert!(d < crit, "KS statistic {d} above {crit}");
    }

    #[test]
    fn dominating_violation_is_reported() {
        let net = seg1();
        let mut rng = replicate_rng(3, 0);
        let r = poisson_inhomogeneous(&net, |_, _| 2.0, 1.0, &mut rng);
        assert!(matches!(r, Err(Error::BadDominating { .. })));
    }

    #[test]
    fn ssi_hard_core_holds() {
        let m = ShortestPathMetric;
        let net = star3_scaled(10.0);
        let mut rng = replicate_rng(11, 0);
        let out = ssi(&net, &m, 40, 0.3, 10_000, &mut rng);
        assert!(out.complete);
        let pts = out.pattern.points();
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d = crate::metric::shortest_path_distance(&net, pts[i], pts[j]);
                assert!(d > 0.3, "pair at distance {d}");
            }
        }
    }

    #[test]
    fn ssi_two_points_on_unit_segment() {
        let net = seg1();
        let m = ShortestPathMetric;
        let mut rng = replicate_rng(13, 0);
        let out = ssi(&net, &m, 2, 0.8, 100_000, &mut rng);
        assert!(out.complete);
        let t: Vec<f64> = out.pattern.points().iter().map(|p| p.offset).collect();
        assert!((t[0] - t[1]).abs() > 0.8);
    }

    #[test]
    fn ssi_impossible_packing_flagged_partial() {
        let net = seg1();
        let m = ShortestPathMetric;
        let mut rng = replicate_rng(17, 0);
        let out = ssi(&net, &m, 3, 0.6, 2_000, &mut rng);
        assert!(!out.complete);
        assert!(out.pattern.len() < 3);
    }

    #[test]
    fn thinning_identity_and_annihilation() {
        let net = star3();
        let mut rng = replicate_rng(19, 0);
        let p = poisson_homogeneous(&net, 20.0, &mut rng);
        let kept = thin(&net, &p, |_, _| 1.0, &mut rng);
        assert_eq!(kept.len(), p.len());
        let none = thin(&net, &p, |_, _| 0.0, &mut rng);
        assert!(none.is_empty());
    }

    #[test]
    fn thinning_binomial_mean() {
        let net = star3_scaled(5.0);
        let m = ShortestPathMetric;
        let mut mean = 0.0;
        let reps = 1000;
        for i in 0..reps {
            let mut rng = replicate_rng(23, i);
            let out = ssi(&net, &m, 300, 0.001 * net.total_length(), 100_000, &mut rng);
            assert!(out.complete);
            mean += thin(&net, &out.pattern, |_, _| 0.3, &mut rng).len() as f64;
        }
        mean /= reps as f64;
        // Binomial(300, 0.3): mean 90, var 63.
        assert!((mean - 90.0).abs() < 3.0 * (63.0f64 / reps as f64).sqrt());
    }

    #[test]
    fn lgcp_degenerate_field_is_poisson() {
        let net = star3();
        let spec = GaussianFieldSpec {
            mean: Box::new(|_, _| (5.0f64).ln()),
            cov: Box::new(|_, _| 0.0),
            spacing: 0.1,
        };
        let mut mean = 0.0;
        let mut var = 0.0;
        let reps = 1000;
        let mut counts = Vec::new();
        for i in 0..reps {
            let mut rng = replicate_rng(29, i);
            let out = lgcp(&net, &spec, &mut rng).unwrap();
            counts.push(out.pattern.len() as f64);
        }
        for &c in &counts {
            mean += c;
        }
        mean /= reps as f64;
        for &c in &counts {
            var += (c - mean).powi(2);
        }
        var /= reps as f64 - 1.0;
        // Poisson(15): mean 15, variance 15.
        assert!((mean - 15.0).abs() < 3.0 * (15.0f64 / reps as f64).sqrt());
        assert!(var / mean < 1.5, "overdispersed: var {var} mean {mean}");
    }

    #[test]
    fn lgcp_overdispersion_with_long_range_covariance() {
        let net = star3();
        let spec = GaussianFieldSpec {
            mean: Box::new(|_, _| (5.0f64).ln()),
            cov: Box::new(|p, q| {
                let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                (-d / 100.0).exp()
            }),
            spacing: 0.1,
        };
        let reps = 400;
        let mut counts = Vec::new();
        for i in 0..reps {
            let mut rng = replicate_rng(31, i);
            counts.push(lgcp(&net, &spec, &mut rng).unwrap().pattern.len() as f64);
        }
        let mean: f64 = counts.iter().sum::<f64>() / reps as f64;
        let var: f64 =
            counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
        assert!(var > 2.0 * mean, "expected overdispersion: var {var} mean {mean}");
    }

    #[test]
    fn lgcp_mean_count_matches_lognormal_identity() {
        let net = star3();
        let mu = (2.0f64).ln();
        let spec = GaussianFieldSpec {
            mean: Box::new(move |_, _| mu),
            cov: Box::new(|p, q| {
                let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                0.25 * (-d).exp()
            }),
            spacing: 0.05,
        };
        let reps = 600;
        let mut mean = 0.0;
        for i in 0..reps {
            let mut rng = replicate_rng(37, i);
            mean += lgcp(&net, &spec, &mut rng).unwrap().pattern.len() as f64;
        }
        mean /= reps as f64;
        // E N = |L| exp(mu + C(0)/2).
        let expect = net.total_length() * (mu + 0.125).exp();
        let sd_guess = (expect * 3.0 / reps as f64).sqrt().max(0.3);
        assert!(
            (mean - expect).abs() < 4.0 * sd_guess,
            "mean {mean} vs {expect}"
        );
    }

    #[test]
    fn lgcp_rejects_oversized_fields() {
        let net = star3();
        let spec = GaussianFieldSpec {
            mean: Box::new(|_, _| 0.0),
            cov: Box::new(|_, _| 0.0),
            spacing: 1e-5,
        };
        let mut rng = replicate_rng(41, 0);
        assert!(matches!(
            lgcp(&net, &spec, &mut rng),
            Err(Error::FieldTooLarge(_, _))
        ));
    }

    #[test]
    fn reproducibility_same_seed_same_pattern() {
        let net = star3();
        let a = poisson_homogeneous(&net, 12.0, &mut replicate_rng(99, 4));
        let b = poisson_homogeneous(&net, 12.0, &mut replicate_rng(99, 4));
        assert_eq!(a.points().len(), b.points().len());
        for (p, q) in a.points().iter().zip(b.points()) {
            assert_eq!(p.segment, q.segment);
            assert_eq!(p.offset, q.offset);
        }
        let c = poisson_homogeneous(&net, 12.0, &mut replicate_rng(99, 5));
        assert!(a.points().len() != c.points().len() || a.points() != c.points());
    }
}
