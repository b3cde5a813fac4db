//! Shortest-path regular distance metric on a linear network.
//!
//! Point-to-point distances are computed by Dijkstra over the vertex graph
//! with source and target spliced into their segments. A [`DistanceField`]
//! solves the single-source problem once and is then evaluable at any
//! network location in O(1).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{LinearNetwork, NetworkLocation};

/// Single-source (or multi-source) shortest-path solution.
#[derive(Debug, Clone)]
pub struct DistanceField<'a> {
    net: &'a LinearNetwork,
    /// Present for point sources; multi-source boundary fields have none.
    source: Option<NetworkLocation>,
    vertex_dist: Vec<f64>,
}

struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.vertex == other.vertex
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

fn dijkstra(net: &LinearNetwork, seeds: &[(usize, f64)]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; net.vertices().len()];
    let mut heap = BinaryHeap::new();
    for &(v, d) in seeds {
        if d < dist[v] {
            dist[v] = d;
            heap.push(HeapEntry { dist: d, vertex: v });
        }
    }
    while let Some(HeapEntry { dist: d, vertex: v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(seg, w) in net.incident(v) {
            let nd = d + net.segment_length(seg);
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(HeapEntry { dist: nd, vertex: w });
            }
        }
    }
    dist
}

impl<'a> DistanceField<'a> {
    /// Field of distances to a point source.
    pub fn from_source(net: &'a LinearNetwork, source: NetworkLocation) -> Self {
        let (a, b) = net.segments()[source.segment];
        let len = net.segment_length(source.segment);
        let seeds = [(a, source.offset), (b, len - source.offset)];
        let vertex_dist = dijkstra(net, &seeds);
        Self {
            net,
            source: Some(source),
            vertex_dist,
        }
    }

    /// Field of distances to the topological boundary (degree-1 vertices).
    /// All distances are infinite on a boundaryless network.
    pub fn from_boundary(net: &'a LinearNetwork) -> Self {
        let seeds: Vec<(usize, f64)> = net.boundary_vertices().iter().map(|&v| (v, 0.0)).collect();
        let vertex_dist = dijkstra(net, &seeds);
        Self {
            net,
            source: None,
            vertex_dist,
        }
    }

    pub fn network(&self) -> &'a LinearNetwork {
        self.net
    }

    pub fn vertex_distance(&self, vertex: usize) -> f64 {
        self.vertex_dist[vertex]
    }

    /// Shortest-path distance from the source set to `v`.
    pub fn eval(&self, v: NetworkLocation) -> f64 {
        let (a, b) = self.net.segments()[v.segment];
        let len = self.net.segment_length(v.segment);
        let mut d = (self.vertex_dist[a] + v.offset).min(self.vertex_dist[b] + len - v.offset);
        if let Some(src) = self.source {
            if src.segment == v.segment {
                d = d.min((v.offset - src.offset).abs());
            }
        }
        d
    }

    /// Piecewise-linear distance profiles per segment, with the source's own
    /// segment split at the source into two pseudo-segments. Each entry is
    /// (distance at start, distance at end, length).
    fn pseudo_segments(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.net.segments().len() + 1);
        for (i, &(a, b)) in self.net.segments().iter().enumerate() {
            let len = self.net.segment_length(i);
            let (da, db) = (self.vertex_dist[a], self.vertex_dist[b]);
            match self.source {
                Some(src) if src.segment == i && src.offset > 0.0 && src.offset < len => {
                    out.push((da, 0.0, src.offset));
                    out.push((0.0, db, len - src.offset));
                }
                _ => out.push((da, db, len)),
            }
        }
        out
    }

    /// Number of network points at distance exactly `r` from the source,
    /// c_L(u, r). Crossings landing exactly on a vertex are counted once.
    pub fn boundary_count(&self, r: f64) -> usize {
        if !(r > 0.0) {
            return 0;
        }
        let mut count = 0usize;
        for &d in &self.vertex_dist {
            if d == r {
                count += 1;
            }
        }
        let eps = 1e-12 * (1.0 + r);
        for (da, db, len) in self.pseudo_segments() {
            if len <= 0.0 {
                continue;
            }
            // Offset of the profile maximum; at (or within rounding of) an
            // endpoint the profile is monotone and can only be crossed
            // transversally, so the tangency case applies to interior peaks
            // only.
            let t_star = 0.5 * (db + len - da);
            if t_star <= eps {
                // Descending from da to db.
                if r > db && r < da {
                    count += 1;
                }
            } else if t_star >= len - eps {
                // Ascending from da to db.
                if r > da && r < db {
                    count += 1;
                }
            } else {
                let peak = 0.5 * (da + db + len);
                if (r - peak).abs() <= eps {
                    count += 1;
                } else if r < peak {
                    if r > da {
                        count += 1;
                    }
                    if r > db {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    /// Farthest reachable distance D(u), from the closed-form per-segment
    /// maxima of the distance profile.
    pub fn farthest(&self) -> f64 {
        let mut m: f64 = self
            .vertex_dist
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        for (da, db, len) in self.pseudo_segments() {
            if len <= 0.0 {
                continue;
            }
            let seg_max = if (da - db).abs() <= len {
                0.5 * (da + db + len)
            } else {
                da.max(db)
            };
            m = m.max(seg_max);
        }
        m
    }
}

/// Interface bundle for a regular distance metric: distances, distance
/// fields, geodesic-ball boundary counts, Jacobian weights, and the farthest
/// reachable distance. Only the shortest-path metric ships; its Jacobian is
/// identically one, so the weight reduces to 1 / c_L(u, r).
pub trait RegularMetric: Sync {
    fn field<'a>(&self, net: &'a LinearNetwork, u: NetworkLocation) -> DistanceField<'a>;

    fn boundary_field<'a>(&self, net: &'a LinearNetwork) -> DistanceField<'a>;

    fn distance(&self, net: &LinearNetwork, u: NetworkLocation, v: NetworkLocation) -> f64 {
        self.field(net, u).eval(v)
    }

    fn boundary_count(&self, net: &LinearNetwork, u: NetworkLocation, r: f64) -> usize {
        self.field(net, u).boundary_count(r)
    }

    /// Weight w(u, r) for a field previously computed from u.
    fn weight_from_field(&self, field: &DistanceField, r: f64) -> Result<f64>;

    fn weight(&self, net: &LinearNetwork, u: NetworkLocation, r: f64) -> Result<f64> {
        self.weight_from_field(&self.field(net, u), r)
    }

    fn farthest(&self, net: &LinearNetwork, u: NetworkLocation) -> f64 {
        self.field(net, u).farthest()
    }
}

/// The shortest-path distance metric.
#[derive(Debug, Clone, Copy, Default)]
pub struct ShortestPathMetric;

impl RegularMetric for ShortestPathMetric {
    fn field<'a>(&self, net: &'a LinearNetwork, u: NetworkLocation) -> DistanceField<'a> {
        DistanceField::from_source(net, u)
    }

    fn boundary_field<'a>(&self, net: &'a LinearNetwork) -> DistanceField<'a> {
        DistanceField::from_boundary(net)
    }

    fn weight_from_field(&self, field: &DistanceField, r: f64) -> Result<f64> {
        let c = field.boundary_count(r);
        if c == 0 {
            Err(Error::EmptyBallBoundary(r))
        } else {
            Ok(1.0 / c as f64)
        }
    }
}

/// Exact geodesic distance between two network locations.
pub fn shortest_path_distance(
    net: &LinearNetwork,
    u: NetworkLocation,
    v: NetworkLocation,
) -> f64 {
    DistanceField::from_source(net, u).eval(v)
}

/// Grid approximation of R = min over u of D(u): the minimum of the farthest
/// reachable distance over the supplied grid and all vertices. An upper bound
/// of R that tightens as the grid spacing shrinks.
pub fn global_r_max(
    net: &LinearNetwork,
    metric: &impl RegularMetric,
    grid: &[NetworkLocation],
) -> f64 {
    let mut r = f64::INFINITY;
    for v in 0..net.vertices().len() {
        r = r.min(metric.farthest(net, net.vertex_location(v)));
    }
    for &u in grid {
        r = r.min(metric.farthest(net, u));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{grid_network, seg1, square_loop, star3};
    use crate::geometry::grid_points;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn loc(seg: usize, t: f64) -> NetworkLocation {
        NetworkLocation::new(seg, t)
    }

    #[test]
    fn point_to_point_distances() {
        let star = star3();
        let d = shortest_path_distance(&star, loc(0, 1.0), loc(2, 1.0));
        assert!((d - 2.0).abs() < 1e-12);

        let seg = seg1();
        let d = shortest_path_distance(&seg, loc(0, 0.2), loc(0, 0.9));
        assert!((d - 0.7).abs() < 1e-12);

        let sq = square_loop();
        let d = shortest_path_distance(&sq, loc(0, 0.5), loc(2, 0.5));
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn field_vertex_distances() {
        let star = star3();
        let f = DistanceField::from_source(&star, loc(0, 0.0));
        assert_eq!(f.vertex_distance(0), 0.0);
        for v in 1..4 {
            assert!((f.vertex_distance(v) - 1.0).abs() < 1e-12);
        }

        let seg = seg1();
        let f = DistanceField::from_source(&seg, loc(0, 0.3));
        assert!((f.vertex_distance(0) - 0.3).abs() < 1e-12);
        assert!((f.vertex_distance(1) - 0.7).abs() < 1e-12);

        let sq = square_loop();
        let f = DistanceField::from_source(&sq, loc(0, 0.0));
        assert!((f.vertex_distance(2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn field_triangle_inequality_across_edges() {
        let net = grid_network(4, 3, 1.0);
        let f = DistanceField::from_source(&net, loc(5, 0.37));
        for (i, &(a, b)) in net.segments().iter().enumerate() {
            let gap = (f.vertex_distance(a) - f.vertex_distance(b)).abs();
            assert!(gap <= net.segment_length(i) + 1e-12);
        }
    }

    #[test]
    fn boundary_counts() {
        let seg = seg1();
        assert_eq!(
            DistanceField::from_source(&seg, loc(0, 0.5)).boundary_count(0.3),
            2
        );
        assert_eq!(
            DistanceField::from_source(&seg, loc(0, 0.0)).boundary_count(0.3),
            1
        );
        let star = star3();
        assert_eq!(
            DistanceField::from_source(&star, loc(0, 0.0)).boundary_count(0.5),
            3
        );
        // Crossings exactly at the tips: counted once each.
        assert_eq!(
            DistanceField::from_source(&star, loc(0, 0.0)).boundary_count(1.0),
            3
        );
        // Beyond D(u): empty boundary.
        assert_eq!(
            DistanceField::from_source(&star, loc(0, 0.0)).boundary_count(1.5),
            0
        );
    }

    #[test]
    fn boundary_count_even_on_boundaryless_network() {
        let net = square_loop();
        let f = DistanceField::from_source(&net, loc(0, 0.3));
        for k in 1..40 {
            let r = k as f64 * 0.047;
            if r < f.farthest() {
                assert_eq!(f.boundary_count(r) % 2, 0, "odd count at r = {r}");
            }
        }
    }

    #[test]
    fn weights() {
        let m = ShortestPathMetric;
        let star = star3();
        assert!((m.weight(&star, loc(0, 0.0), 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let seg = seg1();
        assert!((m.weight(&seg, loc(0, 0.5), 0.3).unwrap() - 0.5).abs() < 1e-15);
        assert!((m.weight(&seg, loc(0, 0.0), 0.3).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            m.weight(&seg, loc(0, 0.5), 2.0),
            Err(Error::EmptyBallBoundary(_))
        ));
    }

    #[test]
    fn farthest_distances() {
        let m = ShortestPathMetric;
        let star = star3();
        assert!((m.farthest(&star, loc(0, 0.0)) - 1.0).abs() < 1e-12);
        assert!((m.farthest(&star, loc(0, 1.0)) - 2.0).abs() < 1e-12);
        let seg = seg1();
        assert!((m.farthest(&seg, loc(0, 0.3)) - 0.7).abs() < 1e-12);
        let sq = square_loop();
        assert!((m.farthest(&sq, loc(1, 0.23)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn global_r_max_values() {
        let m = ShortestPathMetric;
        let seg = seg1();
        let grid = grid_points(&seg, 0.01).unwrap();
        assert!((global_r_max(&seg, &m, &grid) - 0.5).abs() < 0.01);

        let star = star3();
        let grid = grid_points(&star, 0.01).unwrap();
        assert!((global_r_max(&star, &m, &grid) - 1.0).abs() < 1e-9);

        let sq = square_loop();
        let grid = grid_points(&sq, 0.01).unwrap();
        assert!((global_r_max(&sq, &m, &grid) - 2.0).abs() < 1e-9);
    }

    fn random_location(net: &LinearNetwork, rng: &mut impl Rng) -> NetworkLocation {
        let seg = rng.gen_range(0..net.segments().len());
        loc(seg, rng.gen_range(0.0..net.segment_length(seg)))
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for net in [seg1(), star3(), square_loop(), grid_network(3, 3, 1.0)] {
            for _ in 0..1000 {
                let u = random_location(&net, &mut rng);
                let v = random_location(&net, &mut rng);
                let w = random_location(&net, &mut rng);
                let duv = shortest_path_distance(&net, u, v);
                let dvu = shortest_path_distance(&net, v, u);
                // Opposite sweep directions sum edge lengths in different
                // orders, so allow rounding at the last couple of ulps.
                assert!((duv - dvu).abs() <= 1e-12 * (1.0 + duv), "symmetry");
                assert_eq!(shortest_path_distance(&net, u, u), 0.0);
                let duw = shortest_path_distance(&net, u, w);
                let dwv = shortest_path_distance(&net, w, v);
                assert!(duv <= duw + dwv + 1e-9, "triangle inequality");
            }
        }
    }

    #[test]
    fn field_matches_pairwise_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = grid_network(4, 4, 0.8);
        for _ in 0..1000 {
            let u = random_location(&net, &mut rng);
            let v = random_location(&net, &mut rng);
            let f = DistanceField::from_source(&net, u);
            assert_eq!(f.eval(v), shortest_path_distance(&net, u, v));
        }
    }

    #[test]
    fn farthest_matches_brute_force_grid() {
        let m = ShortestPathMetric;
        for net in [seg1(), star3(), square_loop()] {
            let grid = grid_points(&net, 1e-3).unwrap();
            for u in [loc(0, 0.21), loc(0, 0.77)] {
                let f = m.field(&net, u);
                let brute = grid
                    .iter()
                    .map(|&v| f.eval(v))
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!((f.farthest() - brute).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn change_of_variables_identity() {
        // Sum of w(u, d(u,v_j)) over a fine discretization of the ball of
        // radius r approximates min(r, D(u)).
        let m = ShortestPathMetric;
        for net in [seg1(), star3(), square_loop()] {
            let h = net.total_length() / 1e4;
            let grid = grid_points(&net, h).unwrap();
            let u = loc(0, 0.37 * net.segment_length(0));
            let f = m.field(&net, u);
            let du = f.farthest();
            for r in [0.1 * du, 0.5 * du, 0.9 * du, 1.5 * du] {
                let mut sum = 0.0;
                for &v in &grid {
                    let d = f.eval(v);
                    if d > 0.0 && d <= r {
                        sum += m.weight_from_field(&f, d).unwrap() * h;
                    }
                }
                let expect = r.min(du);
                assert!(
                    (sum - expect).abs() <= 2.0 * h,
                    "sum {sum} vs {expect} at r = {r}"
                );
            }
        }
    }
}
