//! Shortest-path distances, geodesic ball boundaries, and the Jacobian
//! weights that make the summary statistics unbiased.
//!
//!     cargo run --example geodesic_distances

use netfrak::fixtures::star3;
use netfrak::geometry::NetworkLocation;
use netfrak::metric::{global_r_max, DistanceField, RegularMetric, ShortestPathMetric};
use netfrak::shortest_path_distance;

fn main() {
    let net = star3();
    let metric = ShortestPathMetric;

    let u = NetworkLocation::new(0, 0.25); // a quarter along the first arm
    let v = NetworkLocation::new(1, 0.50); // halfway along the second arm
    println!(
        "d(u, v) = {} (through the centre)",
        shortest_path_distance(&net, u, v)
    );

    // One Dijkstra sweep answers every distance-from-u query.
    let field = DistanceField::from_source(&net, u);
    println!("farthest point of the network from u: D(u) = {}", field.farthest());

    // c_L(u, r): how many points of the network lie at distance exactly r.
    // The weight 1 / c_L compensates for geodesic balls that are smaller
    // than they would be on the line.
    for r in [0.1, 0.5, 1.0, 1.5] {
        let c = field.boundary_count(r);
        let w = metric.weight_from_field(&field, r);
        println!("r = {r:4}: ball boundary has {c} points, weight = {w:?}");
    }

    // The valid range for K: r must stay below R = min_u D(u).
    let r_bound = global_r_max(&net, &metric, &[]);
    println!("R = {r_bound} for this network");
}
