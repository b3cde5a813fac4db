//! Small reference networks used by tests and examples.

use crate::geometry::{build_network, LinearNetwork};

/// A single unit segment from (0,0) to (1,0).
pub fn seg1() -> LinearNetwork {
    build_network(vec![[0.0, 0.0], [1.0, 0.0]], vec![(0, 1)]).unwrap()
}

/// Three unit arms meeting at the origin.
pub fn star3() -> LinearNetwork {
    build_network(
        vec![[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]],
        vec![(0, 1), (0, 2), (0, 3)],
    )
    .unwrap()
}

/// Unit square traversed as a closed loop (no boundary vertices).
pub fn square_loop() -> LinearNetwork {
    build_network(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        vec![(0, 1), (1, 2), (2, 3), (3, 0)],
    )
    .unwrap()
}

/// An `nx` by `ny` planar grid graph with cell side `h`. Every vertex has
/// degree at least two, so the network has no topological boundary.
pub fn grid_network(nx: usize, ny: usize, h: f64) -> LinearNetwork {
    assert!(nx >= 2 && ny >= 2);
    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let idx = |i: usize, j: usize| j * nx + i;
    let mut segments = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if i + 1 < nx {
                segments.push((idx(i, j), idx(i + 1, j)));
            }
            if j + 1 < ny {
                segments.push((idx(i, j), idx(i, j + 1)));
            }
        }
    }
    build_network(vertices, segments).unwrap()
}

/// `star3` with every coordinate scaled by `s`.
pub fn star3_scaled(s: f64) -> LinearNetwork {
    build_network(
        vec![[0.0, 0.0], [s, 0.0], [-s, 0.0], [0.0, s]],
        vec![(0, 1), (0, 2), (0, 3)],
    )
    .unwrap()
}
