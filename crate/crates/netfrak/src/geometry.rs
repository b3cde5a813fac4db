//! Linear networks, locations on them, and point patterns.
//!
//! A linear network is a finite union of straight line segments that meet
//! only at shared vertices. It carries the arc-length measure; all distances
//! downstream are measured along the network.

use crate::error::{Error, Result};

/// Relative tolerance (times the bounding-box diameter) for geometric
/// coincidence checks during validation and vertex deduplication.
pub const GEOM_REL_TOL: f64 = 1e-9;

/// Relative tolerance (times total length) below which two pattern points
/// are considered duplicates.
pub const SIMPLICITY_REL_TOL: f64 = 1e-9;

/// A planar graph of line segments with arc-length measure.
#[derive(Debug, Clone)]
pub struct LinearNetwork {
    vertices: Vec<[f64; 2]>,
    segments: Vec<(usize, usize)>,
    seg_len: Vec<f64>,
    total_len: f64,
    /// Per vertex: (segment id, vertex id at the other end).
    adjacency: Vec<Vec<(usize, usize)>>,
    degree: Vec<usize>,
    boundary: Vec<usize>,
    diameter: f64,
}

/// A point on the network as (segment, arc-length offset from endpoint `a`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkLocation {
    pub segment: usize,
    pub offset: f64,
}

impl NetworkLocation {
    pub fn new(segment: usize, offset: f64) -> Self {
        Self { segment, offset }
    }

    /// Planar coordinates of this location.
    pub fn to_xy(&self, net: &LinearNetwork) -> [f64; 2] {
        let (a, b) = net.segments[self.segment];
        let pa = net.vertices[a];
        let pb = net.vertices[b];
        let len = net.seg_len[self.segment];
        let s = if len > 0.0 { self.offset / len } else { 0.0 };
        [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]
    }

    /// If the location sits on a vertex (within `tol` arc length), that
    /// vertex index; otherwise `None`.
    pub fn vertex(&self, net: &LinearNetwork, tol: f64) -> Option<usize> {
        let (a, b) = net.segments[self.segment];
        if self.offset.abs() <= tol {
            Some(a)
        } else if (net.seg_len[self.segment] - self.offset).abs() <= tol {
            Some(b)
        } else {
            None
        }
    }

    /// Canonical representation: locations on a shared vertex are mapped to
    /// the lowest-indexed incident segment, so that two representations of
    /// the same vertex compare equal.
    pub fn canonical(&self, net: &LinearNetwork) -> NetworkLocation {
        let tol = GEOM_REL_TOL * net.diameter;
        match self.vertex(net, tol) {
            Some(v) => {
                let &(seg, _) = net.adjacency[v]
                    .iter()
                    .min_by_key(|&&(seg, _)| seg)
                    .expect("vertex with no incident segment");
                let (a, _) = net.segments[seg];
                let offset = if a == v { 0.0 } else { net.seg_len[seg] };
                NetworkLocation::new(seg, offset)
            }
            None => *self,
        }
    }

    /// Whether two locations denote the same network point.
    pub fn same_location(&self, net: &LinearNetwork, other: &NetworkLocation) -> bool {
        self.canonical(net) == other.canonical(net)
    }
}

impl LinearNetwork {
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn segments(&self) -> &[(usize, usize)] {
        &self.segments
    }

    pub fn segment_length(&self, seg: usize) -> f64 {
        self.seg_len[seg]
    }

    pub fn segment_lengths(&self) -> &[f64] {
        &self.seg_len
    }

    /// Total arc length |L|.
    pub fn total_length(&self) -> f64 {
        self.total_len
    }

    /// (segment, other-endpoint) pairs incident to a vertex.
    pub fn incident(&self, vertex: usize) -> &[(usize, usize)] {
        &self.adjacency[vertex]
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.degree[vertex]
    }

    /// Vertices of degree one (the topological boundary of the network).
    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary
    }

    /// Bounding-box diagonal.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Arc-length tolerance under which two points coincide.
    pub fn simplicity_tolerance(&self) -> f64 {
        SIMPLICITY_REL_TOL * self.total_len
    }

    /// Location of a vertex, in canonical form.
    pub fn vertex_location(&self, vertex: usize) -> NetworkLocation {
        let &(seg, _) = self.adjacency[vertex]
            .iter()
            .min_by_key(|&&(seg, _)| seg)
            .expect("vertex with no incident segment");
        let (a, _) = self.segments[seg];
        let offset = if a == vertex { 0.0 } else { self.seg_len[seg] };
        NetworkLocation::new(seg, offset)
    }

    pub fn check_location(&self, loc: &NetworkLocation) -> Result<()> {
        if loc.segment >= self.segments.len() {
            return Err(Error::SegmentOutOfRange(loc.segment));
        }
        let len = self.seg_len[loc.segment];
        if !loc.offset.is_finite() || loc.offset < 0.0 || loc.offset > len {
            return Err(Error::OffsetOutOfRange {
                segment: loc.segment,
                offset: loc.offset,
                length: len,
            });
        }
        Ok(())
    }
}

/// Build and validate a linear network from vertex coordinates and
/// (vertex, vertex) segment index pairs.
pub fn build_network(
    vertices: Vec<[f64; 2]>,
    segments: Vec<(usize, usize)>,
) -> Result<LinearNetwork> {
    if segments.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let nv = vertices.len();
    for &(a, b) in &segments {
        if a >= nv {
            return Err(Error::VertexOutOfRange(a));
        }
        if b >= nv {
            return Err(Error::VertexOutOfRange(b));
        }
    }

    let diameter = bbox_diameter(&vertices);
    let tol = GEOM_REL_TOL * diameter;

    let mut seg_len = Vec::with_capacity(segments.len());
    for (i, &(a, b)) in segments.iter().enumerate() {
        let len = dist2(vertices[a], vertices[b]);
        if !(len.is_finite() && len > tol && len > 0.0) {
            return Err(Error::ZeroLengthSegment(i));
        }
        seg_len.push(len);
    }

    // Duplicate segments: unordered endpoint pairs must be unique.
    let mut seen = std::collections::HashSet::new();
    for &(a, b) in &segments {
        let key = (a.min(b), a.max(b));
        if !seen.insert(key) {
            return Err(Error::DuplicateSegment(key.0, key.1));
        }
    }

    // Segments may only intersect at shared vertices.
    for i in 0..segments.len() {
        for j in (i + 1)..segments.len() {
            let (a1, b1) = segments[i];
            let (a2, b2) = segments[j];
            let shared = shared_vertex(segments[i], segments[j]);
            if let Some(v) = shared {
                // Only collinear overlap can add intersection points.
                let o1 = if a1 == v { b1 } else { a1 };
                let o2 = if a2 == v { b2 } else { a2 };
                let d1 = sub(vertices[o1], vertices[v]);
                let d2 = sub(vertices[o2], vertices[v]);
                let cross = d1[0] * d2[1] - d1[1] * d2[0];
                let dot = d1[0] * d2[0] + d1[1] * d2[1];
                if cross.abs() <= tol * seg_len[i].max(seg_len[j]) && dot > 0.0 {
                    return Err(Error::CrossingSegments(i, j));
                }
            } else {
                let d = segment_segment_distance(
                    vertices[a1],
                    vertices[b1],
                    vertices[a2],
                    vertices[b2],
                );
                if d <= tol {
                    return Err(Error::CrossingSegments(i, j));
                }
            }
        }
    }

    let mut adjacency = vec![Vec::new(); nv];
    let mut degree = vec![0usize; nv];
    for (i, &(a, b)) in segments.iter().enumerate() {
        adjacency[a].push((i, b));
        adjacency[b].push((i, a));
        degree[a] += 1;
        degree[b] += 1;
    }

    // Connectivity over all vertices (isolated vertices count as disconnected).
    let mut visited = vec![false; nv];
    let mut stack = vec![segments[0].0];
    visited[segments[0].0] = true;
    while let Some(v) = stack.pop() {
        for &(_, w) in &adjacency[v] {
            if !visited[w] {
                visited[w] = true;
                stack.push(w);
            }
        }
    }
    if visited.iter().any(|&v| !v) {
        return Err(Error::Disconnected);
    }

    let boundary: Vec<usize> = (0..nv).filter(|&v| degree[v] == 1).collect();
    let total_len = seg_len.iter().sum();

    Ok(LinearNetwork {
        vertices,
        segments,
        seg_len,
        total_len,
        adjacency,
        degree,
        boundary,
        diameter,
    })
}

/// Nearest Euclidean projection of a planar point onto the network.
pub fn snap_to_network(net: &LinearNetwork, xy: [f64; 2], tol: f64) -> Result<NetworkLocation> {
    let mut best: Option<(f64, NetworkLocation)> = None;
    for (i, &(a, b)) in net.segments.iter().enumerate() {
        let (d, t) = point_segment(xy, net.vertices[a], net.vertices[b]);
        let loc = NetworkLocation::new(i, t * net.seg_len[i]);
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, loc));
        }
    }
    let (d, loc) = best.expect("validated network has segments");
    if d > tol {
        return Err(Error::TooFarFromNetwork(xy[0], xy[1], tol));
    }
    Ok(loc)
}

/// Deterministic cell-midpoint grid: per segment, offsets
/// spacing/2, 3 spacing/2, ... below the segment length.
pub fn grid_points(net: &LinearNetwork, spacing: f64) -> Result<Vec<NetworkLocation>> {
    if !(spacing.is_finite() && spacing > 0.0 && spacing < net.total_length()) {
        return Err(Error::BadSpacing(spacing));
    }
    let mut out = Vec::new();
    for seg in 0..net.segments.len() {
        let len = net.seg_len[seg];
        let mut t = spacing / 2.0;
        while t < len {
            out.push(NetworkLocation::new(seg, t));
            t += spacing;
        }
    }
    Ok(out)
}

/// An ordered collection of simple points on a network.
#[derive(Debug, Clone)]
pub struct PointPattern {
    points: Vec<NetworkLocation>,
}

impl PointPattern {
    /// Validate locations and simplicity against the referenced network.
    pub fn new(net: &LinearNetwork, points: Vec<NetworkLocation>) -> Result<Self> {
        for p in &points {
            net.check_location(p)?;
        }
        let tol = net.simplicity_tolerance();
        let xy: Vec<[f64; 2]> = points.iter().map(|p| p.to_xy(net)).collect();
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                // Network distance dominates Euclidean distance, so most
                // pairs are cleared by the planar check alone.
                if dist2(xy[i], xy[j]) >= tol {
                    continue;
                }
                let d = crate::metric::shortest_path_distance(net, points[i], points[j]);
                if d < tol {
                    return Err(Error::NotSimple(i, j));
                }
            }
        }
        Ok(Self { points })
    }

    pub fn empty() -> Self {
        Self { points: Vec::new() }
    }

    pub fn points(&self) -> &[NetworkLocation] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_xy(&self, net: &LinearNetwork) -> Vec<[f64; 2]> {
        self.points.iter().map(|p| p.to_xy(net)).collect()
    }
}

/// Whether `u` lies in the r-erosion of the network: shortest-path distance
/// to every degree-1 vertex is at least `r`. Boundaryless networks erode to
/// themselves for every r.
pub fn erosion_contains(
    net: &LinearNetwork,
    metric: &impl crate::metric::RegularMetric,
    r: f64,
    u: NetworkLocation,
) -> bool {
    metric.boundary_field(net).eval(u) >= r
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn bbox_diameter(vertices: &[[f64; 2]]) -> f64 {
    if vertices.is_empty() {
        return 0.0;
    }
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vertices {
        xmin = xmin.min(v[0]);
        xmax = xmax.max(v[0]);
        ymin = ymin.min(v[1]);
        ymax = ymax.max(v[1]);
    }
    ((xmax - xmin).powi(2) + (ymax - ymin).powi(2)).sqrt()
}

fn shared_vertex(s1: (usize, usize), s2: (usize, usize)) -> Option<usize> {
    if s1.0 == s2.0 || s1.0 == s2.1 {
        Some(s1.0)
    } else if s1.1 == s2.0 || s1.1 == s2.1 {
        Some(s1.1)
    } else {
        None
    }
}

/// Distance from a point to a closed segment, plus the relative projection
/// parameter in [0, 1].
pub(crate) fn point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> (f64, f64) {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    (dist2(p, q), t)
}

fn segment_segment_distance(a1: [f64; 2], b1: [f64; 2], a2: [f64; 2], b2: [f64; 2]) -> f64 {
    if segments_properly_intersect(a1, b1, a2, b2) {
        return 0.0;
    }
    let (d1, _) = point_segment(a1, a2, b2);
    let (d2, _) = point_segment(b1, a2, b2);
    let (d3, _) = point_segment(a2, a1, b1);
    let (d4, _) = point_segment(b2, a1, b1);
    d1.min(d2).min(d3).min(d4)
}

fn segments_properly_intersect(a1: [f64; 2], b1: [f64; 2], a2: [f64; 2], b2: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| -> f64 {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let o1 = orient(a1, b1, a2);
    let o2 = orient(a1, b1, b2);
    let o3 = orient(a2, b2, a1);
    let o4 = orient(a2, b2, b1);
    (o1 * o2 < 0.0) && (o3 * o4 < 0.0)
}
