//! Nodal Lagrange bases on the reference triangle.

mod affine;
mod quadrature;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use affine::AffineMap;
pub use quadrature::{
    edge_point, gauss_legendre, gauss_legendre_unit, quadrature, trace_points, EdgeRule, QuadratureRule,
    MAX_EXACTNESS, REF_VERTICES,
};

/// Highest supported basis degree.
pub const MAX_DEGREE: usize = 6;

/// Number of nodes of the degree-`n` Lagrange basis.
pub const fn n_basis(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

/// Equispaced lattice nodes of degree `n`, row by row in η. Degree 0 has the centroid.
pub fn lattice_nodes(n: usize) -> Vec<[f64; 2]> {
    if n == 0 {
        return vec![[1.0 / 3.0; 2]];
    }
    let mut nodes = Vec::with_capacity(n_basis(n));
    for j in 0..=n {
        for i in 0..=n - j {
            nodes.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    nodes
}

/// Silvester's factor `S_k(λ) = Π_{a<k} (nλ − a)/(a + 1)` and its derivative in `λ`.
fn silvester(n: usize, k: usize, lambda: f64) -> (f64, f64) {
    let nl = n as f64 * lambda;
    let mut val = 1.0;
    let mut der = 0.0;
    for a in 0..k {
        let f = (nl - a as f64) / (a + 1) as f64;
        der = der * f + val * n as f64 / (a + 1) as f64;
        val *= f;
    }
    (val, der)
}

/// Lagrange basis of a fixed degree on the reference triangle, evaluated in
/// product form over barycentric coordinates `(1 − ξ − η, ξ, η)`.
#[derive(Clone, Debug)]
pub struct ReferenceElement {
    pub degree: usize,
    pub nodes: Vec<[f64; 2]>,
    /// Barycentric multi-index of each node.
    index: Vec<[usize; 3]>,
}

impl ReferenceElement {
    pub fn new(degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree(degree, MAX_DEGREE));
        }
        let nodes = lattice_nodes(degree);
        let index = if degree == 0 {
            vec![[0; 3]]
        } else {
            (0..=degree).flat_map(|j| (0..=degree - j).map(move |i| [degree - i - j, i, j])).collect()
        };
        Ok(Self { degree, nodes, index })
    }

    pub fn n_basis(&self) -> usize {
        self.nodes.len()
    }

    fn factors(&self, p: [f64; 2]) -> [Vec<(f64, f64)>; 3] {
        let n = self.degree;
        let l = [1.0 - p[0] - p[1], p[0], p[1]];
        l.map(|l| (0..=n).map(|k| silvester(n, k, l)).collect())
    }

    /// Values of all basis functions at `p`.
    pub fn basis_at(&self, p: [f64; 2]) -> Vec<f64> {
        let f = self.factors(p);
        self.index.iter().map(|ix| f[0][ix[0]].0 * f[1][ix[1]].0 * f[2][ix[2]].0).collect()
    }

    /// Reference gradients of all basis functions at `p`.
    pub fn grad_basis_at(&self, p: [f64; 2]) -> Vec<[f64; 2]> {
        let f = self.factors(p);
        self.index
            .iter()
            .map(|ix| {
                let (a, da) = f[0][ix[0]];
                let (b, db) = f[1][ix[1]];
                let (c, dc) = f[2][ix[2]];
                // ∂λ₀/∂ξ = ∂λ₀/∂η = −1
                [db * a * c - da * b * c, dc * a * b - da * b * c]
            })
            .collect()
    }

    /// Basis values (`n_points × n_basis`) and reference gradients at many points.
    pub fn tabulate(&self, points: &[[f64; 2]]) -> Tabulation {
        let nb = self.n_basis();
        let mut values = DMatrix::zeros(points.len(), nb);
        let mut dxi = DMatrix::zeros(points.len(), nb);
        let mut deta = DMatrix::zeros(points.len(), nb);
        for (q, &p) in points.iter().enumerate() {
            for (i, (v, g)) in self.basis_at(p).into_iter().zip(self.grad_basis_at(p)).enumerate() {
                values[(q, i)] = v;
                dxi[(q, i)] = g[0];
                deta[(q, i)] = g[1];
            }
        }
        Tabulation { values, dxi, deta }
    }
}

/// Basis tables at a fixed point set; rows are points, columns basis functions.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub values: DMatrix<f64>,
    pub dxi: DMatrix<f64>,
    pub deta: DMatrix<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degree_zero() {
        let r = ReferenceElement::new(0).unwrap();
        assert_eq!(r.n_basis(), 1);
        assert!((r.basis_at([0.1, 0.7])[0] - 1.0).abs() < 1e-15);
        assert_eq!(r.grad_basis_at([0.1, 0.7])[0], [0.0, 0.0]);
    }

    #[test]
    fn degree_one_gradients() {
        let r = ReferenceElement::new(1).unwrap();
        let g = r.grad_basis_at([0.2, 0.2]);
        let want = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        for (g, w) in g.iter().zip(want) {
            assert!((g[0] - w[0]).abs() < 1e-14 && (g[1] - w[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn lagrange_property_all_degrees() {
        for n in 0..=MAX_DEGREE {
            let r = ReferenceElement::new(n).unwrap();
            assert_eq!(r.n_basis(), n_basis(n));
            for (j, &node) in r.nodes.iter().enumerate() {
                for (i, v) in r.basis_at(node).into_iter().enumerate() {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    assert!((v - delta).abs() < 1e-12, "degree {n}: φ_{i}(x_{j}) = {v}");
                }
            }
        }
        assert!(ReferenceElement::new(MAX_DEGREE + 1).is_err());
    }

    #[test]
    fn cubic_reproduces_xi2_eta() {
        use rand::{Rng, SeedableRng};
        let r = ReferenceElement::new(3).unwrap();
        let f = |p: [f64; 2]| p[0] * p[0] * p[1];
        let coef: Vec<f64> = r.nodes.iter().map(|&p| f(p)).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
            let p = if a + b > 1.0 { [1.0 - a, 1.0 - b] } else { [a, b] };
            let v: f64 = r.basis_at(p).iter().zip(&coef).map(|(b, c)| b * c).sum();
            assert!((v - f(p)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity_and_reproduction(n in 0usize..=MAX_DEGREE, a in 0.0f64..1.0, b in 0.0f64..1.0,
                                               ea in 0usize..7, eb in 0usize..7) {
            let r = ReferenceElement::new(n).unwrap();
            let p = if a + b > 1.0 { [1.0 - a, 1.0 - b] } else { [a, b] };
            let phi = r.basis_at(p);
            let grad = r.grad_basis_at(p);
            prop_assert!((phi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(grad.iter().map(|g| g[0]).sum::<f64>().abs() < 1e-12);
            prop_assert!(grad.iter().map(|g| g[1]).sum::<f64>().abs() < 1e-12);
            if ea + eb <= n {
                let f = |p: [f64; 2]| p[0].powi(ea as i32) * p[1].powi(eb as i32);
                let v: f64 = r.nodes.iter().zip(&phi).map(|(&x, w)| w * f(x)).sum();
                prop_assert!((v - f(p)).abs() < 1e-12);
            }
        }
    }
}
