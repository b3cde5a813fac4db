//! The four generative models: homogeneous and inhomogeneous Poisson,
//! thinned simple sequential inhibition, and a log-Gaussian Cox process.
//!
//!     cargo run --example simulate_models

use netfrak::fixtures::grid_network;
use netfrak::metric::ShortestPathMetric;
use netfrak::simulate::{
    lgcp, poisson_homogeneous, poisson_inhomogeneous, replicate_rng, ssi, thin, GaussianFieldSpec,
};
use netfrak::Result;

fn main() -> Result<()> {
    let net = grid_network(5, 5, 1.0); // |L| = 40
    let metric = ShortestPathMetric;
    let mut rng = replicate_rng(7, 0);

    let hom = poisson_homogeneous(&net, 2.5, &mut rng);
    println!("homogeneous Poisson (rho = 2.5): {} points", hom.len());

    // Intensity proportional to |sin x|, thinned from a dominating constant.
    let inhom = poisson_inhomogeneous(
        &net,
        |net, u| 5.0 * u.to_xy(net)[0].sin().abs(),
        5.0,
        &mut rng,
    )?;
    println!("inhomogeneous Poisson (rho = 5 |sin x|): {} points", inhom.len());

    // Hard-core packing: 300 points, none closer than 0.001 |L|, then an
    // independent p = 0.3 thinning.
    let delta = 0.001 * net.total_length();
    let packed = ssi(&net, &metric, 300, delta, 300_000, &mut rng);
    let thinned = thin(&net, &packed.pattern, |_, _| 0.3, &mut rng);
    println!(
        "thinned SSI: {} of {} packed points kept (complete: {})",
        thinned.len(),
        packed.pattern.len(),
        packed.complete
    );

    // Doubly stochastic: a log-Gaussian random intensity drives a Poisson
    // process, which produces clustered patterns.
    let spec = GaussianFieldSpec {
        mean: Box::new(|_, _| 2.0f64.ln()),
        cov: Box::new(|p, q| {
            let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            (-d / 0.2).exp()
        }),
        spacing: 0.1,
    };
    let real = lgcp(&net, &spec, &mut rng)?;
    println!(
        "LGCP: {} points from a field discretised over {} cells",
        real.pattern.len(),
        real.cells.len()
    );
    Ok(())
}
