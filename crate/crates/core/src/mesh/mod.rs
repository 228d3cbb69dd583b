//! Conforming triangulations of a rectangle with optional periodic identification.
//!
//! Triangles are stored counterclockwise. Local edge `k` of a triangle runs from
//! its vertex `k` to vertex `(k + 1) % 3`; an interior edge is therefore
//! traversed in opposite directions by its two triangles.

mod connectivity;
mod io;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use connectivity::{build_connectivity, Connectivity, Neighbor};
pub use io::{read_mesh, write_mesh};

/// Axis-aligned domain bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    /// The square `[lo, hi]²`.
    pub fn square(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, lo, hi)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    /// Largest side length, used to scale geometric tolerances.
    pub fn size(&self) -> f64 {
        self.width().max(self.height())
    }

    fn of_points(points: &[[f64; 2]]) -> Self {
        let mut b = Self::new(f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            b.x_min = b.x_min.min(p[0]);
            b.x_max = b.x_max.max(p[0]);
            b.y_min = b.y_min.min(p[1]);
            b.y_max = b.y_max.max(p[1]);
        }
        b
    }
}

/// What lies on the other side of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeTag {
    Interior,
    Boundary,
    /// Boundary edge identified with the given edge by a domain period.
    Periodic(usize),
}

#[derive(Clone, Debug)]
pub struct Edge {
    /// Endpoints in the traversal order of `triangles[0]`.
    pub vertices: [usize; 2],
    /// Adjacent triangles with their local edge index; the second slot is empty
    /// on the boundary.
    pub triangles: [(usize, usize); 2],
    pub n_triangles: usize,
    pub tag: EdgeTag,
}

impl Edge {
    pub fn length(&self, mesh: &SimplexMesh) -> f64 {
        let a = mesh.vertices[self.vertices[0]];
        let b = mesh.vertices[self.vertices[1]];
        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
    }

    fn midpoint(&self, mesh: &SimplexMesh) -> [f64; 2] {
        let a = mesh.vertices[self.vertices[0]];
        let b = mesh.vertices[self.vertices[1]];
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }
}

/// A conforming 2D triangulation.
#[derive(Clone, Debug)]
pub struct SimplexMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    pub bbox: BoundingBox,
    /// Periodicity in x and y.
    pub periodic: [bool; 2],
    /// For each triangle, the global edge index of each local edge.
    pub triangle_edges: Vec<[usize; 3]>,
    /// Canonical representative of each vertex after periodic identification.
    pub vertex_class: Vec<usize>,
}

/// Element size statistics. `h` is the longest edge of a triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshQuality {
    pub h_min: f64,
    pub h_max: f64,
    /// Smallest inscribed-circle diameter over all triangles.
    pub inscribed_min: f64,
    pub n_e: usize,
    pub n_v: usize,
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

impl SimplexMesh {
    /// Builds a mesh from raw vertex and triangle lists, fixing clockwise triangles
    /// and checking conformity.
    pub fn new(vertices: Vec<[f64; 2]>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n_v = vertices.len();
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= n_v) {
                return Err(Error::Invalid(format!("triangle {t} references a missing vertex")));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            let scale = dist(vertices[tri[0]], vertices[tri[1]]).max(1e-300);
            if area.abs() <= 1e-14 * scale * scale {
                return Err(Error::DegenerateTriangle(t, area));
            }
            if area < 0.0 {
                log::warn!("triangle {t} is clockwise; reordering its vertices");
                tri.swap(1, 2);
            }
        }
        let bbox = BoundingBox::of_points(&vertices);
        let (edges, triangle_edges) = build_edges(&triangles)?;
        let vertex_class = (0..n_v).collect();
        Ok(Self { vertices, triangles, edges, bbox, periodic: [false; 2], triangle_edges, vertex_class })
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        signed_area(a, b, c)
    }

    /// Longest edge of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn is_fully_periodic(&self) -> bool {
        self.periodic[0] && self.periodic[1]
    }

    /// Domain period along each axis (zero if not periodic).
    pub fn periods(&self) -> [f64; 2] {
        [
            if self.periodic[0] { self.bbox.width() } else { 0.0 },
            if self.periodic[1] { self.bbox.height() } else { 0.0 },
        ]
    }

    /// Pairs boundary edges on opposite sides of the bounding box. Edges are
    /// matched geometrically with tolerance `1e-12 · domain size`.
    pub fn make_periodic(&mut self, x: bool, y: bool) -> Result<()> {
        let tol = 1e-12 * self.bbox.size();
        let b = self.bbox;
        let boundary: Vec<usize> =
            (0..self.edges.len()).filter(|&e| self.edges[e].n_triangles == 1).collect();
        for axis in [0, 1] {
            let on = if axis == 0 { x } else { y };
            if !on {
                continue;
            }
            let (lo, hi) = if axis == 0 { (b.x_min, b.x_max) } else { (b.y_min, b.y_max) };
            let period = hi - lo;
            let on_side = |e: &Edge, v: f64| {
                let p = &self.vertices;
                (p[e.vertices[0]][axis] - v).abs() <= tol && (p[e.vertices[1]][axis] - v).abs() <= tol
            };
            let low: Vec<usize> = boundary.iter().copied().filter(|&e| on_side(&self.edges[e], lo)).collect();
            let high: Vec<usize> = boundary.iter().copied().filter(|&e| on_side(&self.edges[e], hi)).collect();
            if low.len() != high.len() {
                return Err(Error::Periodic(format!(
                    "{} edges on the low side of axis {axis} but {} on the high side",
                    low.len(),
                    high.len()
                )));
            }
            // Sort the high side by the tangential midpoint coordinate and search it.
            let other = 1 - axis;
            let mut high_sorted: Vec<(f64, usize)> =
                high.iter().map(|&e| (self.edges[e].midpoint(self)[other], e)).collect();
            high_sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            for &el in &low {
                let m = self.edges[el].midpoint(self);
                let i = high_sorted.partition_point(|(c, _)| *c < m[other] - tol);
                let partner = high_sorted[i..]
                    .iter()
                    .take_while(|(c, _)| *c <= m[other] + tol)
                    .map(|&(_, e)| e)
                    .find(|&e| {
                        let mh = self.edges[e].midpoint(self);
                        (mh[axis] - m[axis] - period).abs() <= tol
                    })
                    .ok_or_else(|| {
                        let [a, bb] = self.edges[el].vertices;
                        Error::DanglingBoundary(a, bb)
                    })?;
                let (la, lb) = (self.edges[el].length(self), self.edges[partner].length(self));
                if (la - lb).abs() > tol {
                    return Err(Error::Periodic(format!("paired edges {el} and {partner} differ in length")));
                }
                if self.edges[partner].tag != EdgeTag::Boundary {
                    return Err(Error::Periodic(format!("edge {partner} paired twice")));
                }
                self.edges[el].tag = EdgeTag::Periodic(partner);
                self.edges[partner].tag = EdgeTag::Periodic(el);
            }
        }
        self.periodic = [self.periodic[0] || x, self.periodic[1] || y];
        self.identify_vertices();
        Ok(())
    }

    /// Union of vertices across periodic edge pairs. Paired edges are traversed in
    /// opposite directions, so vertex 0 of one matches vertex 1 of the other.
    fn identify_vertices(&mut self) {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for e in &self.edges {
            if let EdgeTag::Periodic(o) = e.tag {
                let oe = &self.edges[o];
                for (a, b) in [(e.vertices[0], oe.vertices[1]), (e.vertices[1], oe.vertices[0])] {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        self.vertex_class = (0..self.vertices.len()).map(|i| find(&mut parent, i)).collect();
    }

    pub fn quality(&self) -> MeshQuality {
        let mut h_min = f64::INFINITY;
        let mut h_max: f64 = 0.0;
        let mut inscribed_min = f64::INFINITY;
        for t in 0..self.n_triangles() {
            let [a, b, c] = self.triangle_coords(t);
            let (la, lb, lc) = (dist(b, c), dist(c, a), dist(a, b));
            let h = la.max(lb).max(lc);
            h_min = h_min.min(h);
            h_max = h_max.max(h);
            let area = signed_area(a, b, c).abs();
            inscribed_min = inscribed_min.min(4.0 * area / (la + lb + lc));
        }
        MeshQuality { h_min, h_max, inscribed_min, n_e: self.n_triangles(), n_v: self.n_vertices() }
    }

    /// Structured triangulation of `bbox` with `nx × ny` cells, each split along
    /// one diagonal. The diagonal direction alternates in a checkerboard pattern.
    pub fn generate_structured(nx: usize, ny: usize, bbox: BoundingBox, periodic: bool) -> Result<Self> {
        Self::generate_grid(nx, ny, bbox, periodic, None)
    }

    /// Like [`generate_structured`](Self::generate_structured) but with randomly
    /// displaced vertices and randomly chosen cell diagonals, giving an irregular
    /// mesh. `jitter` is the maximum displacement as a fraction of the cell size
    /// and must stay below 0.25. Boundary vertices move only along the boundary,
    /// and identically on opposite sides, so the result remains periodic.
    pub fn generate_jittered(
        nx: usize,
        ny: usize,
        bbox: BoundingBox,
        periodic: bool,
        jitter: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0..0.25).contains(&jitter) {
            return Err(Error::Invalid(format!("jitter {jitter} outside [0, 0.25)")));
        }
        Self::generate_grid(nx, ny, bbox, periodic, Some((jitter, seed)))
    }

    fn generate_grid(
        nx: usize,
        ny: usize,
        bbox: BoundingBox,
        periodic: bool,
        jitter: Option<(f64, u64)>,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Invalid("grid needs at least one cell in each direction".into()));
        }
        let hx = bbox.width() / nx as f64;
        let hy = bbox.height() / ny as f64;
        let mut rng = jitter.map(|(_, s)| ChaCha8Rng::seed_from_u64(s));
        let amp = jitter.map_or(0.0, |(j, _)| j);
        let draw = |rng: &mut Option<ChaCha8Rng>| match rng {
            Some(r) => r.gen_range(-1.0..=1.0) * amp,
            None => 0.0,
        };
        // Displacements of boundary rows/columns are shared between opposite sides.
        let col_shift: Vec<f64> =
            (0..=nx).map(|i| if i == 0 || i == nx { 0.0 } else { draw(&mut rng) * hx }).collect();
        let row_shift: Vec<f64> =
            (0..=ny).map(|j| if j == 0 || j == ny { 0.0 } else { draw(&mut rng) * hy }).collect();
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                let mut x = bbox.x_min + i as f64 * hx;
                let mut y = bbox.y_min + j as f64 * hy;
                let (bx, by) = (i == 0 || i == nx, j == 0 || j == ny);
                match (bx, by) {
                    (true, true) => {}
                    (true, false) => y += row_shift[j],
                    (false, true) => x += col_shift[i],
                    (false, false) => {
                        x += draw(&mut rng) * hx;
                        y += draw(&mut rng) * hy;
                    }
                }
                if i == nx {
                    x = bbox.x_max;
                }
                if j == ny {
                    y = bbox.y_max;
                }
                vertices.push([x, y]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                let flip = match rng.as_mut() {
                    Some(r) => r.gen_bool(0.5),
                    None => (i + j) % 2 == 1,
                };
                if flip {
                    triangles.push([a, b, d]);
                    triangles.push([b, c, d]);
                } else {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                }
            }
        }
        let mut mesh = Self::new(vertices, triangles)?;
        mesh.bbox = bbox;
        if periodic {
            mesh.make_periodic(true, true)?;
        }
        Ok(mesh)
    }
}

type EdgeTables = (Vec<Edge>, Vec<[usize; 3]>);

fn build_edges(triangles: &[[usize; 3]]) -> Result<EdgeTables> {
    let mut index: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
    let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 2);
    let mut triangle_edges = vec![[0usize; 3]; triangles.len()];
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            match index.get(&key) {
                None => {
                    index.insert(key, edges.len());
                    triangle_edges[t][k] = edges.len();
                    edges.push(Edge {
                        vertices: [a, b],
                        triangles: [(t, k), (usize::MAX, usize::MAX)],
                        n_triangles: 1,
                        tag: EdgeTag::Boundary,
                    });
                }
                Some(&e) => {
                    let edge = &mut edges[e];
                    if edge.n_triangles == 2 {
                        return Err(Error::Conformity(key.0, key.1, "shared by more than two triangles".into()));
                    }
                    if edge.vertices != [b, a] {
                        return Err(Error::Conformity(
                            key.0,
                            key.1,
                            "traversed in the same direction by both neighbors".into(),
                        ));
                    }
                    edge.triangles[1] = (t, k);
                    edge.n_triangles = 2;
                    edge.tag = EdgeTag::Interior;
                    triangle_edges[t][k] = e;
                }
            }
        }
    }
    Ok((edges, triangle_edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> BoundingBox {
        BoundingBox::square(0.0, 1.0)
    }

    #[test]
    fn single_cell() {
        let m = SimplexMesh::generate_structured(1, 1, unit(), false).unwrap();
        assert_eq!((m.n_triangles(), m.n_vertices(), m.edges.len()), (2, 4, 5));
        let q = m.quality();
        assert!((q.h_max - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn periodic_two_by_two_pairs_every_boundary_edge() {
        let m = SimplexMesh::generate_structured(2, 2, unit(), true).unwrap();
        assert_eq!(m.n_triangles(), 8);
        let boundary: Vec<_> = m.edges.iter().filter(|e| e.n_triangles == 1).collect();
        assert_eq!(boundary.len(), 8);
        for (i, e) in m.edges.iter().enumerate() {
            if e.n_triangles == 1 {
                let EdgeTag::Periodic(o) = e.tag else { panic!("unpaired boundary edge {i}") };
                assert_eq!(m.edges[o].tag, EdgeTag::Periodic(i));
            }
        }
        // all four corners collapse to one class
        let corners = [0, 2, 6, 8];
        assert!(corners.iter().all(|&c| m.vertex_class[c] == m.vertex_class[0]));
    }

    #[test]
    fn structured_twenty_passes_edge_scan() {
        let m = SimplexMesh::generate_structured(20, 20, BoundingBox::square(-0.5, 0.5), true).unwrap();
        assert_eq!(m.n_triangles(), 800);
        // brute-force incidence count over all triangles
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &m.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let interior = m.edges.iter().filter(|e| e.n_triangles == 2).count();
        let boundary = m.edges.iter().filter(|e| e.n_triangles == 1).count();
        assert_eq!(count.values().sum::<usize>(), 2 * interior + boundary);
        assert!(count.values().all(|&c| c <= 2));
        assert!((0..m.n_triangles()).all(|t| m.area(t) > 0.0));
        let q = m.quality();
        assert!((q.h_max - 2f64.sqrt() / 20.0).abs() < 1e-14);
    }

    #[test]
    fn structured_ten_h_max() {
        let m = SimplexMesh::generate_structured(10, 10, unit(), false).unwrap();
        assert!((m.quality().h_max - 2f64.sqrt() / 10.0).abs() < 1e-15);
    }

    #[test]
    fn unit_right_triangle_diameter() {
        let m = SimplexMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        assert!((m.diameter(0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn clockwise_triangle_is_reoriented() {
        let m = SimplexMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 2, 1]]).unwrap();
        assert!(m.area(0) > 0.0);
    }

    #[test]
    fn duplicated_triangle_is_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let err = SimplexMesh::new(v, vec![[0, 1, 2], [0, 2, 3], [0, 1, 2]]).unwrap_err();
        assert!(matches!(err, Error::Conformity(..)), "{err}");
    }

    #[test]
    fn pairing_is_an_involution_on_jittered_mesh() {
        let m = SimplexMesh::generate_jittered(7, 5, BoundingBox::new(0.0, 2.0, -1.0, 0.0), true, 0.2, 9).unwrap();
        for (i, e) in m.edges.iter().enumerate() {
            if let EdgeTag::Periodic(o) = e.tag {
                assert_eq!(m.edges[o].tag, EdgeTag::Periodic(i));
                assert!((e.length(&m) - m.edges[o].length(&m)).abs() < 1e-12);
            } else {
                assert_eq!(e.n_triangles, 2);
            }
        }
        assert!((0..m.n_triangles()).all(|t| m.area(t) > 0.0));
        let q = m.quality();
        assert!(q.h_min > 0.0 && q.h_min <= q.h_max);
    }
}
