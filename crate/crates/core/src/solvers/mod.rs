//! Matrix-free CG and the Crank–Nicolson / projection time steppers.
//!
//! Each linear stepper eliminates its DG unknowns through the block-diagonal
//! `D`, solves the remaining SPD system for the FEM unknowns by CG and then
//! updates the DG unknowns explicitly.

mod acoustics;
mod cg;
mod euler;
mod glm;
mod maxwell;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::operators::{CompatibleOperators, Nabla, SchurOperator};
use crate::spaces::FieldFem;

pub use acoustics::{AcousticsSolver, AcousticsState};
pub use cg::{cg_solve, CgConfig, CgReport, Preconditioner};
pub use euler::{EulerSolver, EulerState};
pub use glm::{GlmSolver, GlmState};
pub use maxwell::{MaxwellSolver, MaxwellState};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    /// CG iterations summed over all implicit solves of the step.
    pub cg_iterations: usize,
    /// Largest final relative residual among the solves.
    pub residual: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    pub wall_time: f64,
}

/// One-step time integrator with its conserved (or dissipated) energy.
pub trait TimeStepper {
    type State;
    fn step(&mut self, state: &mut Self::State) -> Result<StepReport>;
    fn energy(&self, state: &Self::State) -> f64;
}

/// An SPD Schur system with its CG settings.
#[derive(Clone, Debug)]
pub(crate) struct ImplicitSystem {
    pub schur: SchurOperator,
    pub cg: CgConfig,
}

impl ImplicitSystem {
    pub fn new(ops: &CompatibleOperators, terms: &[Nabla], dt: f64, cg: CgConfig) -> Self {
        Self { schur: SchurOperator::new(ops, terms, dt), cg }
    }

    /// `M x − dt²/4 Σ Lᵀ D⁻¹ L x`, the explicit half of the Crank–Nicolson system.
    pub fn explicit_part(&self, ops: &CompatibleOperators, x: &FieldFem) -> FieldFem {
        let mut out = x.clone();
        let c = 0.25 * self.schur.dt * self.schur.dt;
        self.schur.apply_scaled(ops, &x.values, &mut out.values, 1.0, -c);
        out
    }

    /// Solves in place, using `x` as the warm start.
    pub fn solve(&self, ops: &CompatibleOperators, b: &FieldFem, x: &mut FieldFem) -> Result<CgReport> {
        let rep = cg_solve(
            |a, y| self.schur.apply(ops, a, y),
            &b.values,
            &mut x.values,
            Some(&self.schur.diagonal),
            &self.cg,
        )?;
        if !rep.converged {
            return Err(Error::NotConverged { iterations: rep.iterations, residual: rep.residual });
        }
        Ok(rep)
    }
}

pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

pub(crate) struct Timer(Instant);

impl Timer {
    pub fn start() -> Self {
        Self(Instant::now())
    }

    pub fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
