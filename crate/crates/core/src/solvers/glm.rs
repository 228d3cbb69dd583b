//! Maxwell with divergence cleaning:
//!
//! ```text
//! B_t + ∇×E + ∇p = 0      p_t + ∇·B = 0
//! E_t − ∇×B + ∇q = 0      q_t + ∇·E = 0
//! ```
//!
//! `B` and `q` live in the DG space, `E` and `p` in the FEM space. Because
//! `GᵀD⁻¹C` and `CᵀD⁻¹G` vanish identically, eliminating `B` and `q` leaves two
//! independent SPD systems: a scalar wave equation for `p` and a vector wave
//! equation for `E`.

use super::{axpy, ImplicitSystem, StepReport, TimeStepper, Timer};
use crate::error::Result;
use crate::operators::{embed3, in_plane, CompatibleOperators, Nabla};
use crate::solvers::CgConfig;
use crate::spaces::{FieldDg, FieldFem};

#[derive(Clone, Debug, PartialEq)]
pub struct GlmState {
    pub b: FieldDg,
    pub q: FieldDg,
    pub e: FieldFem,
    pub p: FieldFem,
}

pub struct GlmSolver<'a> {
    pub ops: &'a CompatibleOperators,
    pub dt: f64,
    scalar: ImplicitSystem,
    vector: ImplicitSystem,
}

impl<'a> GlmSolver<'a> {
    pub fn new(ops: &'a CompatibleOperators, dt: f64, cg: CgConfig) -> Self {
        Self {
            ops,
            dt,
            scalar: ImplicitSystem::new(ops, &[Nabla::Grad], dt, cg.clone()),
            vector: ImplicitSystem::new(ops, &[Nabla::Curl, Nabla::Div], dt, cg),
        }
    }
}

fn midpoint(a: &FieldFem, b: &FieldFem) -> FieldFem {
    let mut h = a.clone();
    h.values.iter_mut().zip(&b.values).for_each(|(x, y)| *x = 0.5 * (*x + y));
    h
}

impl TimeStepper for GlmSolver<'_> {
    type State = GlmState;

    /// `p` system: `(M + dt²/4 GᵀD⁻¹G) p⁺ = M p + dt GᵀB − dt²/4 GᵀD⁻¹G p`;
    /// `E` system: `(M + dt²/4 (CᵀD⁻¹C + HᵀD⁻¹H)) E⁺ = M E + dt (CᵀB + Hᵀq) − dt²/4 (…) E`;
    /// then `B⁺ = B − dt D⁻¹(C E½ + G p½)` and `q⁺ = q − dt D⁻¹H E½`.
    fn step(&mut self, s: &mut GlmState) -> Result<StepReport> {
        let timer = Timer::start();
        let ops = self.ops;
        let dt = self.dt;
        let energy_before = self.energy(s);

        let mut rhs_p = self.scalar.explicit_part(ops, &s.p);
        axpy(&mut rhs_p.values, dt, &ops.dual(Nabla::Grad, &in_plane(&s.b)).values);
        let mut p_new = s.p.clone();
        let rep_p = self.scalar.solve(ops, &rhs_p, &mut p_new)?;

        let mut rhs_e = self.vector.explicit_part(ops, &s.e);
        axpy(&mut rhs_e.values, dt, &ops.dual(Nabla::Curl, &s.b).values);
        axpy(&mut rhs_e.values, dt, &ops.dual(Nabla::Div, &s.q).values);
        let mut e_new = s.e.clone();
        let rep_e = self.vector.solve(ops, &rhs_e, &mut e_new)?;

        let e_half = midpoint(&s.e, &e_new);
        let p_half = midpoint(&s.p, &p_new);
        let mut db = ops.weak(Nabla::Curl, &e_half);
        axpy(&mut db.values, 1.0, &embed3(&ops.weak(Nabla::Grad, &p_half)).values);
        ops.solve_d_inplace(&mut db);
        axpy(&mut s.b.values, -dt, &db.values);
        axpy(&mut s.q.values, -dt, &ops.primary(Nabla::Div, &e_half).values);
        s.e = e_new;
        s.p = p_new;
        Ok(StepReport {
            cg_iterations: rep_p.iterations + rep_e.iterations,
            residual: rep_p.residual.max(rep_e.residual),
            energy_before,
            energy_after: self.energy(s),
            wall_time: timer.seconds(),
        })
    }

    /// `½ (BᵀDB + qᵀDq + EᵀME + pᵀMp)`.
    fn energy(&self, s: &GlmState) -> f64 {
        let o = self.ops;
        o.dg_energy(&s.b) + o.dg_energy(&s.q) + o.fem_energy(&s.e) + o.fem_energy(&s.p)
    }
}
