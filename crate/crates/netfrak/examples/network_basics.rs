//! Build a small linear network, inspect it, and snap planar points onto it.
//!
//!     cargo run --example network_basics

use netfrak::geometry::{build_network, grid_points, snap_to_network, NetworkLocation};
use netfrak::metric::{DistanceField, ShortestPathMetric};
use netfrak::{erosion_contains, Result};

fn main() -> Result<()> {
    // A T-shaped street layout: three segments, four nodes.
    let net = build_network(
        vec![[0.0, 0.0], [2.0, 0.0], [4.0, 0.0], [2.0, 1.5]],
        vec![(0, 1), (1, 2), (1, 3)],
    )?;
    println!(
        "{} segments, {} nodes, total length {}",
        net.segments().len(),
        net.vertices().len(),
        net.total_length()
    );
    println!("boundary (degree-1) nodes: {:?}", net.boundary_vertices());

    // Snap an off-network observation onto the nearest segment.
    let snapped = snap_to_network(&net, [1.0, 0.2], 0.5)?;
    println!(
        "snapped (1.0, 0.2) to segment {} at offset {:.3} -> {:?}",
        snapped.segment,
        snapped.offset,
        snapped.to_xy(&net)
    );

    // Equally spaced survey locations along every segment.
    let grid = grid_points(&net, 0.5)?;
    println!("{} grid points at spacing 0.5", grid.len());

    // The r-interior of the network: locations at least r from the boundary.
    let metric = ShortestPathMetric;
    let u = NetworkLocation::new(0, 1.7);
    let bdist = DistanceField::from_boundary(&net).eval(u);
    println!("boundary distance of the snapped survey point: {bdist:.2}");
    for r in [0.1, 0.5, 1.0] {
        println!(
            "  inside the {r}-eroded network: {}",
            erosion_contains(&net, &metric, r, u)
        );
    }
    Ok(())
}
