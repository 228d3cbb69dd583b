//! Schur complements `M + (dt²/4) Σ Lᵀ D⁻¹ L` that remain after eliminating the
//! DG unknowns from a Crank–Nicolson step. Applied matrix-free, element by element.

use super::{CompatibleOperators, Nabla};
use crate::spaces::FieldFem;

impl CompatibleOperators {
    /// `y += Lᵀ D⁻¹ L x` for the weak operator `L` of `op`, on flat interleaved vectors.
    pub(crate) fn schur_part_add(&self, op: Nabla, x: &[f64], y: &mut [f64]) {
        let (nl, nf, m, mo) = (self.n_loc(), self.n_fem_loc(), op.in_m(), op.out_m());
        let mut zloc = vec![0.0; nf * m];
        let mut j = vec![0.0; nl * 2 * m];
        let mut w = vec![0.0; nl * mo];
        for e in 0..self.n_elements() {
            self.gather(e, x, m, &mut zloc);
            self.k_local(e, &zloc, m, &mut j);
            for c in 0..nl {
                op.forward(&j[c * 2 * m..(c + 1) * 2 * m], &mut w[c * mo..(c + 1) * mo]);
            }
            self.d_solve_block(e, &mut w, mo);
            for c in 0..nl {
                op.transpose(&w[c * mo..(c + 1) * mo], &mut j[c * 2 * m..(c + 1) * 2 * m]);
            }
            self.kt_local(e, &j, m, &mut zloc);
            self.scatter_add(e, &zloc, m, y);
        }
    }

    /// `Lᵀ D⁻¹ L z`; for `Grad` this is the weak Laplacian.
    pub fn schur_part(&self, op: Nabla, z: &FieldFem) -> FieldFem {
        let mut out = self.fem.zeros(op.in_m());
        self.schur_part_add(op, &z.values, &mut out.values);
        out
    }

    /// Diagonal of `Lᵀ D⁻¹ L`, interleaved by component.
    pub fn schur_part_diagonal(&self, op: Nabla) -> Vec<f64> {
        let (nl, nf, m, mo) = (self.n_loc(), self.n_fem_loc(), op.in_m(), op.out_m());
        let mut diag = vec![0.0; self.fem.n_dofs() * m];
        let mut zloc = vec![0.0; nf * m];
        let mut j = vec![0.0; nl * 2 * m];
        let mut w = vec![0.0; nl * mo];
        for e in 0..self.n_elements() {
            let dofs = self.fem.dofs(e);
            for i in 0..nf * m {
                zloc.fill(0.0);
                zloc[i] = 1.0;
                self.k_local(e, &zloc, m, &mut j);
                for c in 0..nl {
                    op.forward(&j[c * 2 * m..(c + 1) * 2 * m], &mut w[c * mo..(c + 1) * mo]);
                }
                let before: Vec<f64> = w.clone();
                self.d_solve_block(e, &mut w, mo);
                diag[dofs[i / m] * m + i % m] += before.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        diag
    }

    /// `(M + dt²/4 · Gᵀ D⁻¹ G) p` for the scalar wave systems.
    pub fn schur_apply_scalar(&self, p: &FieldFem, dt: f64) -> FieldFem {
        SchurOperator::new(self, &[Nabla::Grad], dt).apply_field(self, p)
    }

    /// `(M + dt²/4 · Cᵀ D⁻¹ C) E`, plus `dt²/4 · Hᵀ D⁻¹ H E` with `glm` set.
    pub fn schur_apply_vector(&self, e: &FieldFem, dt: f64, glm: bool) -> FieldFem {
        let terms: &[Nabla] = if glm { &[Nabla::Curl, Nabla::Div] } else { &[Nabla::Curl] };
        SchurOperator::new(self, terms, dt).apply_field(self, e)
    }
}

/// A concrete Schur complement with its Jacobi diagonal.
#[derive(Clone, Debug)]
pub struct SchurOperator {
    pub terms: Vec<Nabla>,
    pub dt: f64,
    pub m: usize,
    pub diagonal: Vec<f64>,
}

impl SchurOperator {
    pub fn new(ops: &CompatibleOperators, terms: &[Nabla], dt: f64) -> Self {
        let m = terms[0].in_m();
        assert!(terms.iter().all(|t| t.in_m() == m), "mixed component counts in Schur terms");
        let c = 0.25 * dt * dt;
        let mut diagonal: Vec<f64> =
            ops.mass_diagonal().iter().flat_map(|&d| std::iter::repeat_n(d, m)).collect();
        for &t in terms {
            for (d, s) in diagonal.iter_mut().zip(ops.schur_part_diagonal(t)) {
                *d += c * s;
            }
        }
        Self { terms: terms.to_vec(), dt, m, diagonal }
    }

    /// `y = (M + dt²/4 Σ Lᵀ D⁻¹ L) x`.
    pub fn apply(&self, ops: &CompatibleOperators, x: &[f64], y: &mut [f64]) {
        self.apply_scaled(ops, x, y, 1.0, 0.25 * self.dt * self.dt);
    }

    /// `y = a M x + b Σ Lᵀ D⁻¹ L x`.
    pub fn apply_scaled(&self, ops: &CompatibleOperators, x: &[f64], y: &mut [f64], a: f64, b: f64) {
        ops.apply_m_raw(x, y, self.m);
        if a != 1.0 {
            y.iter_mut().for_each(|v| *v *= a);
        }
        if b == 0.0 {
            return;
        }
        let mut s = vec![0.0; x.len()];
        for &t in &self.terms {
            ops.schur_part_add(t, x, &mut s);
        }
        y.iter_mut().zip(&s).for_each(|(y, s)| *y += b * s);
    }

    pub fn apply_field(&self, ops: &CompatibleOperators, x: &FieldFem) -> FieldFem {
        let mut out = x.clone();
        self.apply(ops, &x.values, &mut out.values);
        out
    }
}
