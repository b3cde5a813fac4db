//! Point processes on linear networks: simulation, kernel intensity
//! estimation, and geometrically corrected summary statistics (F, H, J, K)
//! under the shortest-path distance, with Monte Carlo envelope tests.
//!
//! See the `examples/` directory for one runnable walkthrough per
//! capability.

pub mod envelope;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod intensity;
pub mod io;
pub mod metric;
pub mod simulate;
pub mod summaries;
pub mod svg;

pub use error::{Error, Result};
pub use geometry::{
    build_network, erosion_contains, grid_points, snap_to_network, LinearNetwork, NetworkLocation,
    PointPattern,
};
pub use metric::{
    global_r_max, shortest_path_distance, DistanceField, RegularMetric, ShortestPathMetric,
};
