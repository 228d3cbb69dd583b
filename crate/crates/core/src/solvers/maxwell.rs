//! Vacuum Maxwell `B_t + ∇×E = 0`, `E_t − ∇×B = 0` in the plane, with `B` in
//! the DG space and `E` in the FEM space, all three components kept.

use super::{axpy, ImplicitSystem, StepReport, TimeStepper, Timer};
use crate::error::Result;
use crate::operators::{CompatibleOperators, Nabla};
use crate::solvers::CgConfig;
use crate::spaces::{FieldDg, FieldFem};

#[derive(Clone, Debug, PartialEq)]
pub struct MaxwellState {
    pub b: FieldDg,
    pub e: FieldFem,
}

pub struct MaxwellSolver<'a> {
    pub ops: &'a CompatibleOperators,
    pub dt: f64,
    system: ImplicitSystem,
}

impl<'a> MaxwellSolver<'a> {
    pub fn new(ops: &'a CompatibleOperators, dt: f64, cg: CgConfig) -> Self {
        Self { ops, dt, system: ImplicitSystem::new(ops, &[Nabla::Curl], dt, cg) }
    }
}

impl TimeStepper for MaxwellSolver<'_> {
    type State = MaxwellState;

    /// Solves `(M + dt²/4 CᵀD⁻¹C) E⁺ = M E + dt CᵀB − dt²/4 CᵀD⁻¹C E`, then
    /// `B⁺ = B − dt D⁻¹C (E + E⁺)/2`. Here `CᵀB = −∫ ∇ψ × B`.
    fn step(&mut self, s: &mut MaxwellState) -> Result<StepReport> {
        let timer = Timer::start();
        let ops = self.ops;
        let dt = self.dt;
        let energy_before = self.energy(s);
        let mut rhs = self.system.explicit_part(ops, &s.e);
        axpy(&mut rhs.values, dt, &ops.dual(Nabla::Curl, &s.b).values);
        let mut e_new = s.e.clone();
        let rep = self.system.solve(ops, &rhs, &mut e_new)?;
        let mut e_half = s.e.clone();
        e_half.values.iter_mut().zip(&e_new.values).for_each(|(a, b)| *a = 0.5 * (*a + b));
        axpy(&mut s.b.values, -dt, &ops.primary(Nabla::Curl, &e_half).values);
        s.e = e_new;
        Ok(StepReport {
            cg_iterations: rep.iterations,
            residual: rep.residual,
            energy_before,
            energy_after: self.energy(s),
            wall_time: timer.seconds(),
        })
    }

    /// `½ BᵀDB + ½ EᵀME`.
    fn energy(&self, s: &MaxwellState) -> f64 {
        self.ops.dg_energy(&s.b) + self.ops.fem_energy(&s.e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundingBox, SimplexMesh};

    #[test]
    fn zero_state_stays_zero_and_gaussian_conserves_energy() {
        let mesh = SimplexMesh::generate_structured(6, 6, BoundingBox::square(-0.5, 0.5), true).unwrap();
        let ops = CompatibleOperators::assemble(mesh, 2).unwrap();
        let mut solver = MaxwellSolver::new(&ops, 0.02, CgConfig::default());
        let mut s = MaxwellState { b: ops.dg.zeros(3), e: ops.fem.zeros(3) };
        solver.step(&mut s).unwrap();
        assert!(s.b.values.iter().chain(&s.e.values).all(|&v| v == 0.0));

        s.e = ops.fem.interpolate(|x| [0.0, 0.0, (-0.5 * (x[0] * x[0] + x[1] * x[1]) / 0.01).exp()]);
        for _ in 0..5 {
            let r = solver.step(&mut s).unwrap();
            assert!(((r.energy_after - r.energy_before) / r.energy_before).abs() < 1e-12);
        }
        let eps_d = ops.dual_div_rhs(&s.b).values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(eps_d < 1e-12, "{eps_d}");
    }
}
