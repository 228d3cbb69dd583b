//! Primary (FEM → DG) and dual (DG → FEM) nabla operators.
//!
//! All of them factor through the stiffness action `J = K z`, which holds
//! `∫ φ_c ∂_d z_k` for each DG node `c`, FEM component `k` and direction `d`
//! at index `2k + d`. Derivatives along z vanish.

use super::CompatibleOperators;
use crate::spaces::{FieldDg, FieldFem};

/// A first-order differential operator in the plane, seen as a pointwise linear
/// map from the derivative array `J` to the output components.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nabla {
    /// Scalar → `(∂x, ∂y)`.
    Grad,
    /// 3-vector → `(∂y A_z, −∂x A_z, ∂x A_y − ∂y A_x)`.
    Curl,
    /// 3-vector → `∂x A_x + ∂y A_y`.
    Div,
}

impl Nabla {
    pub fn in_m(self) -> usize {
        match self {
            Nabla::Grad => 1,
            Nabla::Curl | Nabla::Div => 3,
        }
    }

    pub fn out_m(self) -> usize {
        match self {
            Nabla::Grad => 2,
            Nabla::Curl => 3,
            Nabla::Div => 1,
        }
    }

    #[inline]
    pub(crate) fn forward(self, j: &[f64], w: &mut [f64]) {
        match self {
            Nabla::Grad => w.copy_from_slice(&j[..2]),
            Nabla::Curl => {
                w[0] = j[5];
                w[1] = -j[4];
                w[2] = j[2] - j[1];
            }
            Nabla::Div => w[0] = j[0] + j[3],
        }
    }

    /// Adjoint of [`forward`](Self::forward); overwrites `j`.
    #[inline]
    pub(crate) fn transpose(self, w: &[f64], j: &mut [f64]) {
        j.fill(0.0);
        match self {
            Nabla::Grad => j[..2].copy_from_slice(&w[..2]),
            Nabla::Curl => {
                j[5] = w[0];
                j[4] = -w[1];
                j[2] = w[2];
                j[1] = -w[2];
            }
            Nabla::Div => {
                j[0] = w[0];
                j[3] = w[0];
            }
        }
    }
}

impl CompatibleOperators {
    #[inline]
    pub(crate) fn gather(&self, e: usize, z: &[f64], m: usize, out: &mut [f64]) {
        for (i, &p) in self.fem.dofs(e).iter().enumerate() {
            out[i * m..(i + 1) * m].copy_from_slice(&z[p * m..(p + 1) * m]);
        }
    }

    #[inline]
    pub(crate) fn scatter_add(&self, e: usize, local: &[f64], m: usize, z: &mut [f64]) {
        for (i, &p) in self.fem.dofs(e).iter().enumerate() {
            for k in 0..m {
                z[p * m + k] += local[i * m + k];
            }
        }
    }

    /// `j[c][2k + d] = Σ_p K[e][d][c][p] z[p][k]`.
    #[inline]
    pub(crate) fn k_local(&self, e: usize, zloc: &[f64], m: usize, j: &mut [f64]) {
        match m {
            1 => self.k_local_m::<1>(e, zloc, j),
            3 => self.k_local_m::<3>(e, zloc, j),
            _ => self.k_local_any(e, zloc, m, j),
        }
    }

    fn k_local_m<const M: usize>(&self, e: usize, zloc: &[f64], j: &mut [f64]) {
        let (nl, nf) = (self.n_loc(), self.n_fem_loc());
        let (k0, k1) = (self.k_slice(e, 0), self.k_slice(e, 1));
        let zloc = &zloc[..nf * M];
        for c in 0..nl {
            let (r0, r1) = (&k0[c * nf..(c + 1) * nf], &k1[c * nf..(c + 1) * nf]);
            let mut acc = [[0.0; 2]; M];
            for ((a, b), z) in r0.iter().zip(r1).zip(zloc.chunks_exact(M)) {
                for k in 0..M {
                    acc[k][0] += a * z[k];
                    acc[k][1] += b * z[k];
                }
            }
            j[c * 2 * M..(c + 1) * 2 * M].copy_from_slice(acc.as_flattened());
        }
    }

    fn k_local_any(&self, e: usize, zloc: &[f64], m: usize, j: &mut [f64]) {
        let (nl, nf) = (self.n_loc(), self.n_fem_loc());
        j[..nl * 2 * m].fill(0.0);
        for d in 0..2 {
            let kd = self.k_slice(e, d);
            for c in 0..nl {
                let row = &kd[c * nf..(c + 1) * nf];
                let out = &mut j[c * 2 * m..(c + 1) * 2 * m];
                for (p, &kv) in row.iter().enumerate() {
                    for k in 0..m {
                        out[2 * k + d] += kv * zloc[p * m + k];
                    }
                }
            }
        }
    }

    /// Transpose of [`k_local`](Self::k_local); overwrites `zloc`.
    #[inline]
    pub(crate) fn kt_local(&self, e: usize, j: &[f64], m: usize, zloc: &mut [f64]) {
        match m {
            1 => self.kt_local_m::<1>(e, j, zloc),
            3 => self.kt_local_m::<3>(e, j, zloc),
            _ => self.kt_local_any(e, j, m, zloc),
        }
    }

    fn kt_local_m<const M: usize>(&self, e: usize, j: &[f64], zloc: &mut [f64]) {
        let (nl, nf) = (self.n_loc(), self.n_fem_loc());
        let (k0, k1) = (self.k_slice(e, 0), self.k_slice(e, 1));
        let zloc = &mut zloc[..nf * M];
        zloc.fill(0.0);
        for c in 0..nl {
            let (r0, r1) = (&k0[c * nf..(c + 1) * nf], &k1[c * nf..(c + 1) * nf]);
            let jc = &j[c * 2 * M..(c + 1) * 2 * M];
            for ((a, b), z) in r0.iter().zip(r1).zip(zloc.chunks_exact_mut(M)) {
                for k in 0..M {
                    z[k] += a * jc[2 * k] + b * jc[2 * k + 1];
                }
            }
        }
    }

    fn kt_local_any(&self, e: usize, j: &[f64], m: usize, zloc: &mut [f64]) {
        let (nl, nf) = (self.n_loc(), self.n_fem_loc());
        zloc[..nf * m].fill(0.0);
        for d in 0..2 {
            let kd = self.k_slice(e, d);
            for c in 0..nl {
                let row = &kd[c * nf..(c + 1) * nf];
                let jc = &j[c * 2 * m..(c + 1) * 2 * m];
                for (p, &kv) in row.iter().enumerate() {
                    for k in 0..m {
                        zloc[p * m + k] += kv * jc[2 * k + d];
                    }
                }
            }
        }
    }

    /// `∫ φ_c ∂_d z_k` for every component and direction, without the `D⁻¹` solve.
    pub fn stiffness(&self, z: &FieldFem) -> FieldDg {
        let (nl, nf, m) = (self.n_loc(), self.n_fem_loc(), z.m);
        let mut out = self.dg.zeros(2 * m);
        let mut zloc = vec![0.0; nf * m];
        for e in 0..self.n_elements() {
            self.gather(e, &z.values, m, &mut zloc);
            self.k_local(e, &zloc, m, &mut out.values[e * nl * 2 * m..(e + 1) * nl * 2 * m]);
        }
        out
    }

    /// `∫ φ_c (∇ z)_h` without the mass solve: the DG right-hand side of the operator.
    pub fn weak(&self, op: Nabla, z: &FieldFem) -> FieldDg {
        assert_eq!(z.m, op.in_m(), "{op:?} expects {} FEM components", op.in_m());
        let (nl, nf, m) = (self.n_loc(), self.n_fem_loc(), z.m);
        let mut out = self.dg.zeros(op.out_m());
        let mut zloc = vec![0.0; nf * m];
        let mut j = vec![0.0; nl * 2 * m];
        for e in 0..self.n_elements() {
            self.gather(e, &z.values, m, &mut zloc);
            self.k_local(e, &zloc, m, &mut j);
            let w = out.element_mut(e);
            for c in 0..nl {
                op.forward(&j[c * 2 * m..(c + 1) * 2 * m], &mut w[c * op.out_m()..(c + 1) * op.out_m()]);
            }
        }
        out
    }

    /// Primary operator `D⁻¹ K z`: the exact elementwise derivative of the FEM field.
    pub fn primary(&self, op: Nabla, z: &FieldFem) -> FieldDg {
        let mut out = self.weak(op, z);
        self.solve_d_inplace(&mut out);
        out
    }

    /// Dual right-hand side, the transpose of [`weak`](Self::weak): for `Grad`
    /// this is `∫ ∇ψ_p · w`, for `Curl` it is `−∫ ∇ψ_p × w`, for `Div` `∫ ∇ψ_p w`
    /// in the in-plane components.
    pub fn dual(&self, op: Nabla, w: &FieldDg) -> FieldFem {
        assert_eq!(w.m, op.out_m(), "dual {op:?} expects {} DG components", op.out_m());
        let (nl, nf, m) = (self.n_loc(), self.n_fem_loc(), op.in_m());
        let mut out = self.fem.zeros(m);
        let mut j = vec![0.0; nl * 2 * m];
        let mut zloc = vec![0.0; nf * m];
        for e in 0..self.n_elements() {
            let we = w.element(e);
            for c in 0..nl {
                op.transpose(&we[c * op.out_m()..(c + 1) * op.out_m()], &mut j[c * 2 * m..(c + 1) * 2 * m]);
            }
            self.kt_local(e, &j, m, &mut zloc);
            self.scatter_add(e, &zloc, m, &mut out.values);
        }
        out
    }

    pub fn primary_grad(&self, z: &FieldFem) -> FieldDg {
        self.primary(Nabla::Grad, z)
    }

    pub fn primary_curl(&self, a: &FieldFem) -> FieldDg {
        self.primary(Nabla::Curl, a)
    }

    pub fn primary_div(&self, a: &FieldFem) -> FieldDg {
        self.primary(Nabla::Div, a)
    }

    /// `r_p = ∫ ∇ψ_p · w` for a 2-component DG field. Accepts `m = 3` and ignores
    /// the out-of-plane component.
    pub fn dual_div_rhs(&self, w: &FieldDg) -> FieldFem {
        self.dual(Nabla::Grad, &in_plane(w))
    }

    /// `r_p = −∫ ∇ψ_p × w` for a 3-component DG field; 2-component fields are
    /// embedded with a zero z-component.
    pub fn dual_curl_rhs(&self, w: &FieldDg) -> FieldFem {
        self.dual(Nabla::Curl, &embed3(w))
    }
}

/// First two components of a vector field.
pub fn in_plane(w: &FieldDg) -> FieldDg {
    if w.m == 2 {
        return w.clone();
    }
    assert!(w.m >= 2, "need at least two components");
    let values = w.values.chunks_exact(w.m).flat_map(|c| [c[0], c[1]]).collect();
    FieldDg { m: 2, n_loc: w.n_loc, values }
}

/// A 2-component field padded with a zero z-component.
pub fn embed3(w: &FieldDg) -> FieldDg {
    match w.m {
        3 => w.clone(),
        2 => {
            let values = w.values.chunks_exact(2).flat_map(|c| [c[0], c[1], 0.0]).collect();
            FieldDg { m: 3, n_loc: w.n_loc, values }
        }
        m => panic!("cannot embed a {m}-component field in 3D"),
    }
}

#[cfg(test)]
mod tests {
    use super::super::dot;
    use super::*;
    use crate::mesh::{BoundingBox, SimplexMesh};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ops(n: usize, degree: usize) -> CompatibleOperators {
        let mesh = SimplexMesh::generate_jittered(n, n, BoundingBox::square(-0.5, 0.5), true, 0.2, 42).unwrap();
        CompatibleOperators::assemble(mesh, degree).unwrap()
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    #[test]
    fn gradient_of_linear_is_constant() {
        let mesh = SimplexMesh::generate_structured(3, 3, BoundingBox::square(0.0, 1.0), false).unwrap();
        let ops = CompatibleOperators::assemble(mesh, 1).unwrap();
        let z = ops.fem.interpolate(|x| [x[0]]);
        let v = ops.primary_grad(&z);
        for c in v.values.chunks_exact(2) {
            assert!((c[0] - 1.0).abs() < 1e-13 && c[1].abs() < 1e-13);
        }
    }

    #[test]
    fn gradient_of_quadratic_is_pointwise_exact() {
        let mesh = SimplexMesh::generate_jittered(3, 3, BoundingBox::square(0.0, 1.0), false, 0.2, 1).unwrap();
        let ops = CompatibleOperators::assemble(mesh, 1).unwrap();
        let z = ops.fem.interpolate(|x| [x[0] * x[0] + x[1] * x[1]]);
        let v = ops.primary_grad(&z);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for e in 0..ops.n_elements() {
            for _ in 0..50 {
                let (a, b): (f64, f64) = (rng.gen(), rng.gen());
                let r = if a + b > 1.0 { [1.0 - a, 1.0 - b] } else { [a, b] };
                let x = ops.dg.maps[e].map(r);
                let g = ops.dg.eval(&v, e, r);
                assert!((g[0] - 2.0 * x[0]).abs() < 1e-12 && (g[1] - 2.0 * x[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn curl_of_linear_potentials() {
        let mesh = SimplexMesh::generate_structured(2, 2, BoundingBox::square(0.0, 1.0), false).unwrap();
        let ops = CompatibleOperators::assemble(mesh, 0).unwrap();
        let b = ops.primary_curl(&ops.fem.interpolate(|x| [0.0, 0.0, x[0]]));
        for c in b.values.chunks_exact(3) {
            assert!(c[0].abs() < 1e-13 && (c[1] + 1.0).abs() < 1e-13 && c[2].abs() < 1e-13);
        }
        let b = ops.primary_curl(&ops.fem.interpolate(|x| [x[1], 0.0, 0.0]));
        for c in b.values.chunks_exact(3) {
            assert!(c[0].abs() < 1e-13 && c[1].abs() < 1e-13 && (c[2] + 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn dual_is_adjoint_of_weak() {
        let ops = ops(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for op in [Nabla::Grad, Nabla::Curl, Nabla::Div] {
            let mut z = ops.fem.zeros(op.in_m());
            z.values.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
            let mut w = ops.dg.zeros(op.out_m());
            w.values.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
            let lhs = dot(&w.values, &ops.weak(op, &z).values);
            let rhs = dot(&z.values, &ops.dual(op, &w).values);
            assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "{op:?}");
        }
    }

    #[test]
    fn dual_curl_matches_cross_product_integral() {
        // −∫ ∇ψ_p × w with w = (1, 2, 3) constant per element, evaluated directly from K rows
        let ops = ops(2, 1);
        let mut w = ops.dg.zeros(3);
        w.values.chunks_exact_mut(3).for_each(|c| c.copy_from_slice(&[1.0, 2.0, 3.0]));
        let r = ops.dual_curl_rhs(&w);
        let mut want = ops.fem.zeros(3);
        for e in 0..ops.n_elements() {
            let (kx, ky) = (ops.k_block(e, 0), ops.k_block(e, 1));
            for (i, &p) in ops.fem.dofs(e).iter().enumerate() {
                let gx: f64 = kx.column(i).sum();
                let gy: f64 = ky.column(i).sum();
                // ∇ψ × w = (gy·3, −gx·3, gx·2 − gy·1)
                let cross = [gy * 3.0, -gx * 3.0, gx * 2.0 - gy];
                for k in 0..3 {
                    want.node_mut(p)[k] -= cross[k];
                }
            }
        }
        let err = r.values.iter().zip(&want.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-14);
        // periodic mesh: constant fields are in the kernel
        assert!(max_abs(&r.values) < 1e-14);
    }

    #[test]
    fn dual_of_gradient_matches_weak_laplacian() {
        let ops = ops(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut z = ops.fem.zeros(1);
        z.values.iter_mut().for_each(|v| *v = rng.gen());
        let a = ops.dual_div_rhs(&ops.primary_grad(&z));
        let b = ops.schur_part(Nabla::Grad, &z);
        let err = a.values.iter().zip(&b.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-13 * max_abs(&a.values).max(1.0), "{err}");
    }
}
