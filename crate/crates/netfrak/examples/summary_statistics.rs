//! Estimate the geometrically corrected F, H, J and K statistics for a
//! simulated pattern and compare them with their Poisson benchmarks.
//!
//!     cargo run --example summary_statistics

use netfrak::fixtures::grid_network;
use netfrak::geometry::grid_points;
use netfrak::intensity::IntensitySurface;
use netfrak::metric::{global_r_max, ShortestPathMetric};
use netfrak::simulate::{poisson_homogeneous, replicate_rng};
use netfrak::summaries::{
    default_r_grid, estimate_statistic, IntensityMode, SummaryKind,
};
use netfrak::Result;

fn main() -> Result<()> {
    let net = grid_network(5, 5, 1.0);
    let metric = ShortestPathMetric;
    let rho = 2.5;
    let mut rng = replicate_rng(11, 0);
    let pattern = poisson_homogeneous(&net, rho, &mut rng);
    println!("{} points on a network of length {}", pattern.len(), net.total_length());

    let grid = grid_points(&net, 0.2)?;
    let r_bound = global_r_max(&net, &metric, &grid);
    let r_grid = default_r_grid(r_bound, 0.45, 9);
    let surface = IntensitySurface::constant(&net, pattern.len());
    let rho_hat = pattern.len() as f64 / net.total_length();

    println!("\n     r      F       H       J       K    | Poisson: 1-exp(-rho r), J=1, K=r");
    let mut curves = Vec::new();
    for kind in [SummaryKind::F, SummaryKind::H, SummaryKind::J, SummaryKind::K] {
        curves.push(estimate_statistic(
            &net,
            &metric,
            &pattern,
            &surface,
            rho_hat,
            &grid,
            &r_grid,
            r_bound,
            IntensityMode::Homogeneous,
            kind,
        )?);
    }
    for (i, &r) in r_grid.iter().enumerate() {
        let cell = |v: Option<f64>| match v {
            Some(v) => format!("{v:7.4}"),
            None => "      -".to_string(),
        };
        println!(
            "{r:6.3} {} {} {} {} | {:.4}",
            cell(curves[0].value[i]),
            cell(curves[1].value[i]),
            cell(curves[2].value[i]),
            cell(curves[3].value[i]),
            1.0 - (-rho * r).exp()
        );
    }
    Ok(())
}
