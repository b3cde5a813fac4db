//! Fit a kernel intensity surface to a point pattern and inspect it.
//!
//!     cargo run --example intensity_surface

use netfrak::fixtures::grid_network;
use netfrak::geometry::grid_points;
use netfrak::intensity::{fit_intensity, rho_bar, scott_bandwidth, Bandwidth, DEFAULT_FLOOR_EPS};
use netfrak::simulate::{poisson_inhomogeneous, replicate_rng};
use netfrak::Result;

fn main() -> Result<()> {
    let net = grid_network(4, 4, 1.0);
    let mut rng = replicate_rng(42, 0);

    // An inhomogeneous Poisson pattern, denser on the right of the window.
    let rho_max = 8.0;
    let pattern = poisson_inhomogeneous(
        &net,
        |net, u| rho_max * u.to_xy(net)[0] / 3.0,
        rho_max,
        &mut rng,
    )?;
    println!("simulated {} points", pattern.len());

    let sigma = scott_bandwidth(&net, &pattern)?;
    println!("Scott's rule bandwidth: {sigma:.4}");

    let surface = fit_intensity(&net, &pattern, Bandwidth::Scott)?;

    // The fitted surface recovers the left-to-right trend.
    let grid = grid_points(&net, 0.25)?;
    let (mut left, mut right) = ((0.0, 0usize), (0.0, 0usize));
    for &u in &grid {
        let x = u.to_xy(&net)[0];
        let v = surface.eval(&net, u);
        if x < 1.5 {
            left = (left.0 + v, left.1 + 1);
        } else if x > 1.5 {
            right = (right.0 + v, right.1 + 1);
        }
    }
    println!(
        "mean fitted intensity: left half {:.3}, right half {:.3}",
        left.0 / left.1 as f64,
        right.0 / right.1 as f64
    );

    // The reference level used by the inhomogeneous summary statistics.
    let rb = rho_bar(&net, &surface, &grid, DEFAULT_FLOOR_EPS)?;
    println!("rho_bar = {:.4} (floored: {})", rb.value, rb.floored);

    // Mass preservation: the surface integrates back to the point count.
    let mass: f64 = grid
        .iter()
        .map(|&u| surface.eval(&net, u) * net.total_length() / grid.len() as f64)
        .sum();
    println!("integral of the surface ~= {mass:.2} (n = {})", pattern.len());
    Ok(())
}
