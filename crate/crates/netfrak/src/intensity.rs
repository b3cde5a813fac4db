//! Kernel intensity estimation on the network.
//!
//! The estimator places an isotropic planar Gaussian kernel at every data
//! point and divides each kernel by its own integral over the network, so
//! the fitted surface integrates exactly to the point count. The infimum
//! intensity needed by the inhomogeneous estimators is taken over an
//! evaluation grid with a small positive floor.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{self, LinearNetwork, NetworkLocation, PointPattern};

/// Kernel evaluations beyond this many bandwidths are dropped; the relative
/// truncation error is below 1e-4.
const KERNEL_CUTOFF_SIGMAS: f64 = 4.0;

/// Default quadrature spacing is bandwidth / QUAD_DIVISOR.
pub const QUAD_DIVISOR: f64 = 10.0;

/// Bandwidth selection for the kernel estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Scott,
    Fixed(f64),
}

/// Fitted intensity surface, evaluable anywhere on the network.
#[derive(Debug, Clone)]
pub struct IntensitySurface {
    kind: SurfaceKind,
    n: usize,
}

#[derive(Debug, Clone)]
enum SurfaceKind {
    Constant(f64),
    Kernel {
        points_xy: Vec<[f64; 2]>,
        sigma: f64,
        /// Per-data-point network integral of the kernel, C_L(x_i).
        normalizers: Vec<f64>,
    },
}

impl IntensitySurface {
    /// Constant surface rho = n / |L|.
    pub fn constant(net: &LinearNetwork, n: usize) -> Self {
        Self {
            kind: SurfaceKind::Constant(n as f64 / net.total_length()),
            n,
        }
    }

    /// Constant surface at an explicit level (e.g. a known true intensity).
    pub fn constant_level(level: f64, n: usize) -> Self {
        Self {
            kind: SurfaceKind::Constant(level),
            n,
        }
    }

    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> Option<f64> {
        match &self.kind {
            SurfaceKind::Constant(_) => None,
            SurfaceKind::Kernel { sigma, .. } => Some(*sigma),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, SurfaceKind::Constant(_))
    }

    pub fn eval_xy(&self, xy: [f64; 2]) -> f64 {
        match &self.kind {
            SurfaceKind::Constant(c) => *c,
            SurfaceKind::Kernel {
                points_xy,
                sigma,
                normalizers,
            } => {
                let cutoff = KERNEL_CUTOFF_SIGMAS * sigma;
                let mut rho = 0.0;
                for (p, c) in points_xy.iter().zip(normalizers) {
                    let d = geometry::dist2(xy, *p);
                    if d <= cutoff {
                        rho += gauss2(d, *sigma) / c;
                    }
                }
                rho
            }
        }
    }

    pub fn eval(&self, net: &LinearNetwork, u: NetworkLocation) -> f64 {
        self.eval_xy(u.to_xy(net))
    }
}

fn gauss2(d: f64, sigma: f64) -> f64 {
    let z = d / sigma;
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI * sigma * sigma)
}

/// Scott's rule of thumb over the pattern's planar coordinates:
/// sigma = n^(-1/6) * sqrt((var_x + var_y) / 2), sample variances.
pub fn scott_bandwidth(net: &LinearNetwork, pattern: &PointPattern) -> Result<f64> {
    let n = pattern.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let xy = pattern.to_xy(net);
    let nf = n as f64;
    let mean = xy.iter().fold([0.0, 0.0], |m, p| [m[0] + p[0], m[1] + p[1]]);
    let mean = [mean[0] / nf, mean[1] / nf];
    let mut var = [0.0, 0.0];
    for p in &xy {
        var[0] += (p[0] - mean[0]).powi(2);
        var[1] += (p[1] - mean[1]).powi(2);
    }
    var[0] /= nf - 1.0;
    var[1] /= nf - 1.0;
    Ok(nf.powf(-1.0 / 6.0) * ((var[0] + var[1]) / 2.0).sqrt())
}

/// Per-segment midpoint quadrature cells (midpoint location, cell length).
pub(crate) fn quadrature_cells(
    net: &LinearNetwork,
    spacing: f64,
) -> Vec<(NetworkLocation, f64)> {
    let mut cells = Vec::new();
    for seg in 0..net.segments().len() {
        let len = net.segment_length(seg);
        let m = (len / spacing).ceil().max(1.0) as usize;
        let w = len / m as f64;
        for k in 0..m {
            cells.push((NetworkLocation::new(seg, (k as f64 + 0.5) * w), w));
        }
    }
    cells
}

/// Fit the kernel intensity surface. `quad_spacing` controls the midpoint
/// quadrature used for the per-point normalizers C_L(x_i).
pub fn kernel_intensity(
    net: &LinearNetwork,
    pattern: &PointPattern,
    sigma: f64,
    quad_spacing: f64,
) -> Result<IntensitySurface> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::BadBandwidth(sigma));
    }
    if !(quad_spacing.is_finite() && quad_spacing > 0.0) {
        return Err(Error::BadSpacing(quad_spacing));
    }
    let points_xy = pattern.to_xy(net);
    let cutoff = KERNEL_CUTOFF_SIGMAS * sigma;

    // Precompute quadrature midpoints grouped by segment so whole segments
    // beyond the kernel cutoff can be skipped.
    let mut seg_cells: Vec<Vec<([f64; 2], f64)>> = Vec::with_capacity(net.segments().len());
    for seg in 0..net.segments().len() {
        let len = net.segment_length(seg);
        let m = (len / quad_spacing).ceil().max(1.0) as usize;
        let w = len / m as f64;
        let cells = (0..m)
            .map(|k| {
                let loc = NetworkLocation::new(seg, (k as f64 + 0.5) * w);
                (loc.to_xy(net), w)
            })
            .collect();
        seg_cells.push(cells);
    }

    let normalizers: Vec<f64> = points_xy
        .par_iter()
        .map(|&p| {
            let mut c = 0.0;
            for (seg, &(a, b)) in net.segments().iter().enumerate() {
                let (dmin, _) = geometry::point_segment(p, net.vertices()[a], net.vertices()[b]);
                if dmin > cutoff {
                    continue;
                }
                for &(xy, w) in &seg_cells[seg] {
                    let d = geometry::dist2(p, xy);
                    if d <= cutoff {
                        c += gauss2(d, sigma) * w;
                    }
                }
            }
            c
        })
        .collect();

    if normalizers.iter().any(|&c| !(c > 0.0)) {
        // A data point so isolated that its kernel mass on the network
        // vanished numerically; the bandwidth is unusable.
        return Err(Error::BadBandwidth(sigma));
    }

    Ok(IntensitySurface {
        kind: SurfaceKind::Kernel {
            points_xy,
            sigma,
            normalizers,
        },
        n: pattern.len(),
    })
}

/// Fit with either Scott's rule or a fixed bandwidth; quadrature spacing
/// defaults to sigma / 10.
pub fn fit_intensity(
    net: &LinearNetwork,
    pattern: &PointPattern,
    bandwidth: Bandwidth,
) -> Result<IntensitySurface> {
    let sigma = match bandwidth {
        Bandwidth::Scott => scott_bandwidth(net, pattern)?,
        Bandwidth::Fixed(s) => s,
    };
    kernel_intensity(net, pattern, sigma, sigma / QUAD_DIVISOR)
}

/// Infimum intensity estimate with provenance.
#[derive(Debug, Clone, Copy)]
pub struct RhoBar {
    pub value: f64,
    /// True when the positivity floor engaged.
    pub floored: bool,
}

/// Default positivity floor factor for rho-bar.
pub const DEFAULT_FLOOR_EPS: f64 = 1e-3;

/// Grid minimum of the surface, floored at floor_eps * n / |L| to keep the
/// estimator weights finite.
pub fn rho_bar(
    net: &LinearNetwork,
    surface: &IntensitySurface,
    grid: &[NetworkLocation],
    floor_eps: f64,
) -> Result<RhoBar> {
    if surface.point_count() == 0 {
        return Err(Error::EmptySurface);
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let min = grid
        .iter()
        .map(|&u| surface.eval(net, u))
        .fold(f64::INFINITY, f64::min);
    let floor = floor_eps * surface.point_count() as f64 / net.total_length();
    if min < floor {
        Ok(RhoBar {
            value: floor,
            floored: true,
        })
    } else {
        Ok(RhoBar {
            value: min,
            floored: false,
        })
    }
}
