//! The DG mass `D`, FEM mass `M` and mixed stiffness tensor `K[c][p][m] = ∫ φ_c ∂_m ψ_p`,
//! with the compatible nabla operators built on top of them.
//!
//! Every operator is an element loop over dense per-element blocks; `M` is the
//! only globally coupled object and is kept in CSR form.

mod dump;
mod nabla;
mod properties;
mod schur;

use nalgebra::DMatrix;
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::error::{Error, Result};
use crate::mesh::{build_connectivity, Connectivity, SimplexMesh};
use crate::refelem::{quadrature, QuadratureRule};
use crate::spaces::{DgSpace, FemSpace, FieldDg, FieldFem};

pub use dump::{write_d_blocks, write_k_slice, write_mass_triplets};
pub use nabla::{embed3, in_plane, Nabla};
pub use schur::SchurOperator;

/// Assembled operators for DG degree `N` and FEM degree `N + 1` on one mesh.
#[derive(Clone, Debug)]
pub struct CompatibleOperators {
    pub mesh: SimplexMesh,
    pub conn: Connectivity,
    pub dg: DgSpace,
    pub fem: FemSpace,
    /// Rule used for all mass and stiffness integrals; exact to degree `2(N+1)`.
    pub quad: QuadratureRule,
    /// `K` blocks laid out `[e][m][c][p]`.
    k: Vec<f64>,
    /// Cholesky factors of the `D` blocks, full `n_loc × n_loc` row-major lower triangles.
    d_chol: Vec<f64>,
    /// `D` blocks, same layout as `d_chol`.
    d: Vec<f64>,
    pub mass: CsrMatrix<f64>,
}

impl CompatibleOperators {
    /// Builds both spaces on `mesh` and assembles `D`, `M` and `K`. Periodic
    /// meshes must be fully paired.
    pub fn assemble(mesh: SimplexMesh, degree: usize) -> Result<Self> {
        let conn = build_connectivity(&mesh, mesh.is_fully_periodic())?;
        let dg = DgSpace::new(&mesh, degree)?;
        let fem = FemSpace::new(&mesh, degree + 1)?;
        let quad = quadrature(2 * (degree + 1))?;
        let (nl, nf) = (dg.n_loc(), fem.n_loc());

        // Reference integrals; affine elements only rescale them.
        let tab_dg = dg.refel.tabulate(&quad.points);
        let tab_fem = fem.refel.tabulate(&quad.points);
        let mut d_ref = DMatrix::<f64>::zeros(nl, nl);
        let mut m_ref = DMatrix::<f64>::zeros(nf, nf);
        let mut k_ref = [DMatrix::<f64>::zeros(nl, nf), DMatrix::<f64>::zeros(nl, nf)];
        for (q, &w) in quad.weights.iter().enumerate() {
            for c in 0..nl {
                let pc = tab_dg.values[(q, c)];
                for j in 0..nl {
                    d_ref[(c, j)] += w * pc * tab_dg.values[(q, j)];
                }
                for p in 0..nf {
                    k_ref[0][(c, p)] += w * pc * tab_fem.dxi[(q, p)];
                    k_ref[1][(c, p)] += w * pc * tab_fem.deta[(q, p)];
                }
            }
            for p in 0..nf {
                for r in 0..nf {
                    m_ref[(p, r)] += w * tab_fem.values[(q, p)] * tab_fem.values[(q, r)];
                }
            }
        }

        let n_e = mesh.n_triangles();
        let mut k = vec![0.0; n_e * 2 * nl * nf];
        let mut d = vec![0.0; n_e * nl * nl];
        let mut d_chol = vec![0.0; n_e * nl * nl];
        let mut coo = CooMatrix::new(fem.n_dofs(), fem.n_dofs());
        for e in 0..n_e {
            let map = &dg.maps[e];
            let det = map.abs_det();
            let inv = &map.inverse;
            for m in 0..2 {
                let block = &mut k[(e * 2 + m) * nl * nf..(e * 2 + m + 1) * nl * nf];
                for c in 0..nl {
                    for p in 0..nf {
                        block[c * nf + p] =
                            det * (inv[(0, m)] * k_ref[0][(c, p)] + inv[(1, m)] * k_ref[1][(c, p)]);
                    }
                }
            }
            let de = &d_ref * det;
            let chol = de.clone().cholesky().ok_or(Error::SingularMassBlock(e))?;
            let l = chol.l();
            for i in 0..nl {
                for j in 0..nl {
                    d[e * nl * nl + i * nl + j] = de[(i, j)];
                    d_chol[e * nl * nl + i * nl + j] = l[(i, j)];
                }
            }
            let dofs = fem.dofs(e);
            for p in 0..nf {
                for r in 0..nf {
                    coo.push(dofs[p], dofs[r], det * m_ref[(p, r)]);
                }
            }
        }
        let mass = CsrMatrix::from(&coo);
        log::debug!(
            "assembled N={degree}: {n_e} elements, {} DG and {} FEM dofs, {} nonzeros in M",
            dg.n_dofs(),
            fem.n_dofs(),
            mass.nnz()
        );
        Ok(Self { mesh, conn, dg, fem, quad, k, d_chol, d, mass })
    }

    pub fn degree(&self) -> usize {
        self.dg.degree
    }

    pub fn n_loc(&self) -> usize {
        self.dg.n_loc()
    }

    pub fn n_fem_loc(&self) -> usize {
        self.fem.n_loc()
    }

    pub fn n_elements(&self) -> usize {
        self.dg.n_elements()
    }

    /// `K[e][m]` as an `n_loc × n_fem_loc` slice, row-major.
    #[inline]
    pub(crate) fn k_slice(&self, e: usize, m: usize) -> &[f64] {
        let s = self.n_loc() * self.n_fem_loc();
        &self.k[(e * 2 + m) * s..(e * 2 + m + 1) * s]
    }

    pub fn k_block(&self, e: usize, m: usize) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n_loc(), self.n_fem_loc(), self.k_slice(e, m))
    }

    pub fn d_block(&self, e: usize) -> DMatrix<f64> {
        let n = self.n_loc();
        DMatrix::from_row_slice(n, n, &self.d[e * n * n..(e + 1) * n * n])
    }

    /// Overwrites the interleaved `m`-component block `b` of element `e` with `D_e⁻¹ b`.
    #[inline]
    pub(crate) fn d_solve_block(&self, e: usize, b: &mut [f64], m: usize) {
        match m {
            1 => self.d_solve_block_m::<1>(e, b),
            2 => self.d_solve_block_m::<2>(e, b),
            3 => self.d_solve_block_m::<3>(e, b),
            6 => self.d_solve_block_m::<6>(e, b),
            _ => {
                // strided scalar solves
                let n = self.n_loc();
                let mut col = vec![0.0; n];
                for k in 0..m {
                    col.iter_mut().enumerate().for_each(|(i, v)| *v = b[i * m + k]);
                    self.d_solve_block_m::<1>(e, &mut col);
                    col.iter().enumerate().for_each(|(i, v)| b[i * m + k] = *v);
                }
            }
        }
    }

    fn d_solve_block_m<const M: usize>(&self, e: usize, b: &mut [f64]) {
        let n = self.n_loc();
        let l = &self.d_chol[e * n * n..(e + 1) * n * n];
        let b: &mut [[f64; M]] = b[..n * M].as_chunks_mut::<M>().0;
        for i in 0..n {
            let row = &l[i * n..i * n + i + 1];
            let mut acc = b[i];
            for (lij, bj) in row[..i].iter().zip(&b[..i]) {
                for k in 0..M {
                    acc[k] -= lij * bj[k];
                }
            }
            let inv = 1.0 / row[i];
            b[i] = acc.map(|v| v * inv);
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..n {
                let lji = l[j * n + i];
                for k in 0..M {
                    acc[k] -= lji * b[j][k];
                }
            }
            let inv = 1.0 / l[i * n + i];
            b[i] = acc.map(|v| v * inv);
        }
    }

    /// `D⁻¹ u`.
    pub fn solve_d(&self, u: &FieldDg) -> FieldDg {
        let mut out = u.clone();
        self.solve_d_inplace(&mut out);
        out
    }

    pub fn solve_d_inplace(&self, u: &mut FieldDg) {
        let m = u.m;
        for e in 0..self.n_elements() {
            self.d_solve_block(e, u.element_mut(e), m);
        }
    }

    /// `D u`.
    pub fn apply_d(&self, u: &FieldDg) -> FieldDg {
        let n = self.n_loc();
        let m = u.m;
        let mut out = u.clone();
        for e in 0..self.n_elements() {
            let de = &self.d[e * n * n..(e + 1) * n * n];
            let src = u.element(e);
            let dst = out.element_mut(e);
            for i in 0..n {
                for k in 0..m {
                    dst[i * m + k] = (0..n).map(|j| de[i * n + j] * src[j * m + k]).sum();
                }
            }
        }
        out
    }

    /// `M x` on a flat interleaved vector with `m` components per node.
    pub fn apply_m_raw(&self, x: &[f64], y: &mut [f64], m: usize) {
        match m {
            1 => self.apply_m_m::<1>(x, y),
            2 => self.apply_m_m::<2>(x, y),
            3 => self.apply_m_m::<3>(x, y),
            _ => self.apply_m_any(x, y, m),
        }
    }

    fn apply_m_m<const M: usize>(&self, x: &[f64], y: &mut [f64]) {
        let offsets = self.mass.row_offsets();
        let cols = self.mass.col_indices();
        let vals = self.mass.values();
        let x: &[[f64; M]] = x.as_chunks::<M>().0;
        for (row, out) in y.as_chunks_mut::<M>().0.iter_mut().enumerate() {
            let range = offsets[row]..offsets[row + 1];
            let mut acc = [0.0; M];
            for (&c, &v) in cols[range.clone()].iter().zip(&vals[range]) {
                for k in 0..M {
                    acc[k] += v * x[c][k];
                }
            }
            *out = acc;
        }
    }

    fn apply_m_any(&self, x: &[f64], y: &mut [f64], m: usize) {
        let offsets = self.mass.row_offsets();
        let cols = self.mass.col_indices();
        let vals = self.mass.values();
        for row in 0..self.mass.nrows() {
            let acc = &mut y[row * m..(row + 1) * m];
            acc.fill(0.0);
            for idx in offsets[row]..offsets[row + 1] {
                let (c, v) = (cols[idx], vals[idx]);
                for k in 0..m {
                    acc[k] += v * x[c * m + k];
                }
            }
        }
    }

    pub fn apply_m(&self, u: &FieldFem) -> FieldFem {
        let mut out = u.clone();
        self.apply_m_raw(&u.values, &mut out.values, u.m);
        out
    }

    pub fn mass_diagonal(&self) -> Vec<f64> {
        self.mass.diagonal_as_csr().values().to_vec()
    }

    /// `½ uᵀ D u` summed over components.
    pub fn dg_energy(&self, u: &FieldDg) -> f64 {
        0.5 * dot(&u.values, &self.apply_d(u).values)
    }

    /// `½ uᵀ M u` summed over components.
    pub fn fem_energy(&self, u: &FieldFem) -> f64 {
        0.5 * dot(&u.values, &self.apply_m(u).values)
    }

    /// Solves `M x = r` by CG, for turning dual right-hand sides into nodal fields.
    pub fn solve_m(&self, r: &FieldFem, rel_tol: f64) -> Result<FieldFem> {
        let m = r.m;
        let diag: Vec<f64> = self.mass_diagonal().iter().flat_map(|&d| std::iter::repeat_n(d, m)).collect();
        let mut x = r.clone();
        x.values.iter_mut().zip(&diag).for_each(|(v, d)| *v /= d);
        let cfg = crate::solvers::CgConfig { rel_tol, ..Default::default() };
        let rep = crate::solvers::cg_solve(|a, b| self.apply_m_raw(a, b, m), &r.values, &mut x.values, Some(&diag), &cfg)?;
        if !rep.converged {
            return Err(Error::NotConverged { iterations: rep.iterations, residual: rep.residual });
        }
        Ok(x)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundingBox;

    fn single(degree: usize) -> CompatibleOperators {
        let mesh = SimplexMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        CompatibleOperators::assemble(mesh, degree).unwrap()
    }

    #[test]
    fn single_triangle_n0() {
        let ops = single(0);
        assert!((ops.d_block(0)[(0, 0)] - 0.5).abs() < 1e-15);
        // ∫ ∂_m ψ_p over the triangle with constant P1 gradients
        let want = [[-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for m in 0..2 {
            let k = ops.k_block(0, m);
            let nodes = &ops.fem.refel.nodes;
            for p in 0..3 {
                let vertex = nodes[p];
                let idx = if vertex == [0.0, 0.0] { 0 } else if vertex == [1.0, 0.0] { 1 } else { 2 };
                assert!((k[(0, p)] - want[m][idx]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn p1_mass_matrix() {
        let ops = single(0);
        let m = DMatrix::<f64>::from(&ops.mass);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 } else { 1.0 } / 24.0;
                assert!((m[(i, j)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn k_rows_sum_to_zero_and_masses_are_spd() {
        for degree in 0..=3 {
            let mesh = SimplexMesh::generate_jittered(4, 3, BoundingBox::square(0.0, 1.0), true, 0.2, 8).unwrap();
            let ops = CompatibleOperators::assemble(mesh, degree).unwrap();
            for e in 0..ops.n_elements() {
                for m in 0..2 {
                    let k = ops.k_block(e, m);
                    for c in 0..ops.n_loc() {
                        assert!(k.row(c).sum().abs() < 1e-13);
                    }
                }
            }
            let m = DMatrix::<f64>::from(&ops.mass);
            assert!((&m - m.transpose()).amax() < 1e-16);
            assert!(m.cholesky().is_some());
        }
    }

    #[test]
    fn d_solve_inverts_apply_d() {
        let mesh = SimplexMesh::generate_structured(2, 2, BoundingBox::square(0.0, 1.0), true).unwrap();
        let ops = CompatibleOperators::assemble(mesh, 3).unwrap();
        let mut u = ops.dg.zeros(3);
        u.values.iter_mut().enumerate().for_each(|(i, v)| *v = (i as f64 * 0.37).sin());
        let back = ops.solve_d(&ops.apply_d(&u));
        let err = back.values.iter().zip(&u.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }
}
