//! Degree-of-freedom layout for the broken space `U_h^N` and the continuous,
//! periodic-identified space `W_h^{N+1}`, plus field containers.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mesh::{EdgeTag, SimplexMesh};
use crate::refelem::{AffineMap, ReferenceElement};

fn element_maps(mesh: &SimplexMesh) -> Result<Vec<AffineMap>> {
    (0..mesh.n_triangles())
        .map(|t| {
            AffineMap::from_triangle(&mesh.triangle_coords(t)).map_err(|_| Error::DegenerateTriangle(t, mesh.area(t)))
        })
        .collect()
}

/// Discontinuous elementwise polynomials of degree `N`.
#[derive(Clone, Debug)]
pub struct DgSpace {
    pub degree: usize,
    pub refel: ReferenceElement,
    pub maps: Vec<AffineMap>,
}

impl DgSpace {
    pub fn new(mesh: &SimplexMesh, degree: usize) -> Result<Self> {
        Ok(Self { degree, refel: ReferenceElement::new(degree)?, maps: element_maps(mesh)? })
    }

    pub fn n_loc(&self) -> usize {
        self.refel.n_basis()
    }

    pub fn n_elements(&self) -> usize {
        self.maps.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_elements() * self.n_loc()
    }

    /// Offset of element `e`'s block in a scalar DOF vector.
    pub fn offset(&self, e: usize) -> usize {
        e * self.n_loc()
    }

    pub fn zeros(&self, m: usize) -> FieldDg {
        FieldDg { m, n_loc: self.n_loc(), values: vec![0.0; self.n_dofs() * m] }
    }

    /// Nodal interpolation of `f`.
    pub fn interpolate<const M: usize>(&self, f: impl Fn([f64; 2]) -> [f64; M]) -> FieldDg {
        let mut u = self.zeros(M);
        for (e, map) in self.maps.iter().enumerate() {
            for (c, &node) in self.refel.nodes.iter().enumerate() {
                let v = f(map.map(node));
                u.node_mut(e, c).copy_from_slice(&v);
            }
        }
        u
    }

    /// Evaluates `u` on element `e` at reference point `r`.
    pub fn eval(&self, u: &FieldDg, e: usize, r: [f64; 2]) -> Vec<f64> {
        let phi = self.refel.basis_at(r);
        let mut out = vec![0.0; u.m];
        for (c, w) in phi.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(u.node(e, c)) {
                *o += w * v;
            }
        }
        out
    }
}

/// Continuous Lagrange elements of degree `M ≥ 1` with periodic identification.
#[derive(Clone, Debug)]
pub struct FemSpace {
    pub degree: usize,
    pub refel: ReferenceElement,
    pub maps: Vec<AffineMap>,
    /// Element-to-global map, `n_loc` entries per element.
    pub l2g: Vec<usize>,
    /// Physical location of each global DOF (from its first occurrence).
    pub coords: Vec<[f64; 2]>,
}

impl FemSpace {
    /// Global DOFs are found by matching node coordinates, after wrapping into the
    /// periodic cell, with tolerance `1e-12 · domain size`.
    pub fn new(mesh: &SimplexMesh, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::UnsupportedDegree(0, crate::refelem::MAX_DEGREE));
        }
        let refel = ReferenceElement::new(degree)?;
        let maps = element_maps(mesh)?;
        let n_loc = refel.n_basis();
        let b = mesh.bbox;
        let tol = 1e-12 * b.size();
        let periods = mesh.periods();
        let origin = [b.x_min, b.y_min];
        let wrap = |mut x: [f64; 2]| {
            for k in 0..2 {
                let l = periods[k];
                if l > 0.0 {
                    x[k] = origin[k] + (x[k] - origin[k]).rem_euclid(l);
                    if x[k] > origin[k] + l - tol {
                        x[k] -= l;
                    }
                }
            }
            x
        };
        // Bucket size well above the matching tolerance and well below node spacing.
        let cell = 1e3 * tol;
        let key = |x: [f64; 2]| ((x[0] / cell).floor() as i64, (x[1] / cell).floor() as i64);
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut wrapped: Vec<[f64; 2]> = Vec::new();
        let mut coords = Vec::new();
        let mut l2g = Vec::with_capacity(maps.len() * n_loc);
        for map in &maps {
            for &node in &refel.nodes {
                let x = map.map(node);
                let w = wrap(x);
                let (kx, ky) = key(w);
                let mut found = None;
                'search: for dx in -1..=1 {
                    for dy in -1..=1 {
                        if let Some(ids) = buckets.get(&(kx + dx, ky + dy)) {
                            for &id in ids {
                                let o = wrapped[id];
                                if (o[0] - w[0]).abs() <= tol && (o[1] - w[1]).abs() <= tol {
                                    found = Some(id);
                                    break 'search;
                                }
                            }
                        }
                    }
                }
                let id = found.unwrap_or_else(|| {
                    let id = coords.len();
                    coords.push(x);
                    wrapped.push(w);
                    buckets.entry((kx, ky)).or_default().push(id);
                    id
                });
                l2g.push(id);
            }
        }
        let expected = topological_dof_count(mesh, degree);
        if coords.len() != expected {
            return Err(Error::Periodic(format!(
                "geometric matching found {} FEM nodes but the mesh topology implies {expected}",
                coords.len()
            )));
        }
        Ok(Self { degree, refel, maps, l2g, coords })
    }

    pub fn n_loc(&self) -> usize {
        self.refel.n_basis()
    }

    pub fn n_dofs(&self) -> usize {
        self.coords.len()
    }

    pub fn n_elements(&self) -> usize {
        self.maps.len()
    }

    /// Global DOF indices of element `e`.
    pub fn dofs(&self, e: usize) -> &[usize] {
        let n = self.n_loc();
        &self.l2g[e * n..(e + 1) * n]
    }

    pub fn zeros(&self, m: usize) -> FieldFem {
        FieldFem { m, values: vec![0.0; self.n_dofs() * m] }
    }

    /// Nodal interpolation of `f`.
    pub fn interpolate<const M: usize>(&self, f: impl Fn([f64; 2]) -> [f64; M]) -> FieldFem {
        let mut u = self.zeros(M);
        for (p, &x) in self.coords.iter().enumerate() {
            u.node_mut(p).copy_from_slice(&f(x));
        }
        u
    }

    pub fn eval(&self, u: &FieldFem, e: usize, r: [f64; 2]) -> Vec<f64> {
        let psi = self.refel.basis_at(r);
        let mut out = vec![0.0; u.m];
        for (&p, w) in self.dofs(e).iter().zip(&psi) {
            for (o, v) in out.iter_mut().zip(u.node(p)) {
                *o += w * v;
            }
        }
        out
    }
}

/// Vertex classes + interior edge nodes + interior element nodes, counted on
/// the identified topology.
fn topological_dof_count(mesh: &SimplexMesh, degree: usize) -> usize {
    let classes = &mesh.vertex_class;
    // vertices not used by any triangle carry no DOF
    let mut used = vec![false; mesh.n_vertices()];
    for t in &mesh.triangles {
        for &v in t {
            used[v] = true;
        }
    }
    let mut seen = vec![false; mesh.n_vertices()];
    let mut n_vertices = 0;
    for v in 0..mesh.n_vertices() {
        if used[v] && !seen[classes[v]] {
            seen[classes[v]] = true;
            n_vertices += 1;
        }
    }
    let n_edges = mesh
        .edges
        .iter()
        .enumerate()
        .filter(|(i, e)| !matches!(e.tag, EdgeTag::Periodic(o) if o < *i))
        .count();
    let interior = if degree >= 3 { (degree - 1) * (degree - 2) / 2 } else { 0 };
    n_vertices + (degree - 1) * n_edges + interior * mesh.n_triangles()
}

/// Elementwise coefficients with `m` components per node, laid out
/// element-major: `values[(e · n_loc + c) · m + k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDg {
    pub m: usize,
    pub n_loc: usize,
    pub values: Vec<f64>,
}

impl FieldDg {
    pub fn node(&self, e: usize, c: usize) -> &[f64] {
        let i = (e * self.n_loc + c) * self.m;
        &self.values[i..i + self.m]
    }

    pub fn node_mut(&mut self, e: usize, c: usize) -> &mut [f64] {
        let i = (e * self.n_loc + c) * self.m;
        &mut self.values[i..i + self.m]
    }

    pub fn element(&self, e: usize) -> &[f64] {
        let s = self.n_loc * self.m;
        &self.values[e * s..(e + 1) * s]
    }

    pub fn element_mut(&mut self, e: usize) -> &mut [f64] {
        let s = self.n_loc * self.m;
        &mut self.values[e * s..(e + 1) * s]
    }

    pub fn n_elements(&self) -> usize {
        self.values.len() / (self.n_loc * self.m)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Component `k` as a scalar field.
    pub fn component(&self, k: usize) -> FieldDg {
        FieldDg { m: 1, n_loc: self.n_loc, values: self.values.iter().skip(k).step_by(self.m).copied().collect() }
    }
}

/// Global nodal values with `m` components per node: `values[p · m + k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFem {
    pub m: usize,
    pub values: Vec<f64>,
}

impl FieldFem {
    pub fn node(&self, p: usize) -> &[f64] {
        &self.values[p * self.m..(p + 1) * self.m]
    }

    pub fn node_mut(&mut self, p: usize) -> &mut [f64] {
        &mut self.values[p * self.m..(p + 1) * self.m]
    }

    pub fn n_nodes(&self) -> usize {
        self.values.len() / self.m
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn component(&self, k: usize) -> FieldFem {
        FieldFem { m: 1, values: self.values.iter().skip(k).step_by(self.m).copied().collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundingBox;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(n: usize, periodic: bool) -> SimplexMesh {
        SimplexMesh::generate_structured(n, n, BoundingBox::square(0.0, 1.0), periodic).unwrap()
    }

    #[test]
    fn p1_counts() {
        assert_eq!(FemSpace::new(&unit(1, false), 1).unwrap().n_dofs(), 4);
        assert_eq!(FemSpace::new(&unit(1, true), 1).unwrap().n_dofs(), 1);
    }

    /// O(n²) dedup of wrapped node coordinates, no hashing.
    fn brute_force_count(mesh: &SimplexMesh, degree: usize) -> usize {
        let r = ReferenceElement::new(degree).unwrap();
        let mut pts: Vec<[f64; 2]> = Vec::new();
        for t in 0..mesh.n_triangles() {
            let a = AffineMap::from_triangle(&mesh.triangle_coords(t)).unwrap();
            for &n in &r.nodes {
                let x = a.map(n);
                let w = [x[0].rem_euclid(1.0), x[1].rem_euclid(1.0)];
                let w = w.map(|c| if c > 1.0 - 1e-12 { c - 1.0 } else { c });
                if !pts.iter().any(|p| (p[0] - w[0]).abs() < 1e-12 && (p[1] - w[1]).abs() < 1e-12) {
                    pts.push(w);
                }
            }
        }
        pts.len()
    }

    #[test]
    fn periodic_count_matches_brute_force() {
        let m = unit(4, true);
        for deg in 1..=4 {
            let s = FemSpace::new(&m, deg).unwrap();
            assert_eq!(s.n_dofs(), brute_force_count(&m, deg));
        }
        // torus: (M·4)² nodes
        assert_eq!(FemSpace::new(&m, 2).unwrap().n_dofs(), 64);
    }

    #[test]
    fn constant_and_linear_evaluation() {
        let m = unit(3, true);
        let fem = FemSpace::new(&m, 2).unwrap();
        let one = fem.interpolate(|_| [1.0]);
        assert!(one.values.iter().all(|&v| v == 1.0));
        assert!((fem.eval(&one, 4, [0.2, 0.3])[0] - 1.0).abs() < 1e-14);

        let dg = DgSpace::new(&m, 1).unwrap();
        let u = dg.interpolate(|x| [x[0] + x[1]]);
        for e in 0..m.n_triangles() {
            let x = dg.maps[e].map([0.1, 0.6]);
            assert!((dg.eval(&u, e, [0.1, 0.6])[0] - x[0] - x[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolant_reproduces_cubic() {
        let m = SimplexMesh::generate_jittered(4, 4, BoundingBox::square(0.0, 1.0), false, 0.2, 2).unwrap();
        let fem = FemSpace::new(&m, 3).unwrap();
        let f = |x: [f64; 2]| x[0] * x[0] * x[1];
        let u = fem.interpolate(|x| [f(x)]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let e = rng.gen_range(0..m.n_triangles());
            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
            let r = if a + b > 1.0 { [1.0 - a, 1.0 - b] } else { [a, b] };
            assert!((fem.eval(&u, e, r)[0] - f(fem.maps[e].map(r))).abs() < 1e-12);
        }
    }

    #[test]
    fn fem_trace_continuity() {
        let m = SimplexMesh::generate_jittered(5, 5, BoundingBox::square(0.0, 1.0), true, 0.2, 4).unwrap();
        let conn = crate::mesh::build_connectivity(&m, true).unwrap();
        let fem = FemSpace::new(&m, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut u = fem.zeros(1);
        u.values.iter_mut().for_each(|v| *v = rng.gen());
        let rule = crate::refelem::trace_points(0, 6);
        for t in 0..m.n_triangles() {
            for k in 0..3 {
                let n = conn.neighbors[t][k].unwrap();
                for &s in &rule.params {
                    let a = fem.eval(&u, t, crate::refelem::edge_point(k, s))[0];
                    let b = fem.eval(&u, n.triangle, crate::refelem::edge_point(n.local_edge, 1.0 - s))[0];
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dg_blocks_are_independent() {
        let m = unit(2, true);
        let dg = DgSpace::new(&m, 2).unwrap();
        let mut u = dg.zeros(1);
        u.element_mut(3).iter_mut().for_each(|v| *v = 1.0);
        for e in 0..m.n_triangles() {
            let want = if e == 3 { 1.0 } else { 0.0 };
            assert!((dg.eval(&u, e, [0.3, 0.3])[0] - want).abs() < 1e-14);
        }
    }
}
