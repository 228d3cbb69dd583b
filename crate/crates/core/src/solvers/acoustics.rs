//! Linear acoustics `v_t + ∇p = 0`, `p_t + ∇·v = 0` with `v` in the DG space
//! and `p` in the FEM space.

use super::{axpy, ImplicitSystem, StepReport, TimeStepper, Timer};
use crate::error::Result;
use crate::operators::{CompatibleOperators, Nabla};
use crate::solvers::CgConfig;
use crate::spaces::{FieldDg, FieldFem};

#[derive(Clone, Debug, PartialEq)]
pub struct AcousticsState {
    /// Velocity, two components.
    pub v: FieldDg,
    pub p: FieldFem,
}

pub struct AcousticsSolver<'a> {
    pub ops: &'a CompatibleOperators,
    pub dt: f64,
    system: ImplicitSystem,
}

impl<'a> AcousticsSolver<'a> {
    pub fn new(ops: &'a CompatibleOperators, dt: f64, cg: CgConfig) -> Self {
        Self { ops, dt, system: ImplicitSystem::new(ops, &[Nabla::Grad], dt, cg) }
    }
}

impl TimeStepper for AcousticsSolver<'_> {
    type State = AcousticsState;

    /// Solves `(M + dt²/4 GᵀD⁻¹G) p⁺ = M p + dt Gᵀv − dt²/4 GᵀD⁻¹G p`, then
    /// `v⁺ = v − dt D⁻¹G (p + p⁺)/2`.
    fn step(&mut self, s: &mut AcousticsState) -> Result<StepReport> {
        let timer = Timer::start();
        let ops = self.ops;
        let dt = self.dt;
        let energy_before = self.energy(s);
        let mut rhs = self.system.explicit_part(ops, &s.p);
        axpy(&mut rhs.values, dt, &ops.dual(Nabla::Grad, &s.v).values);
        let mut p_new = s.p.clone();
        let rep = self.system.solve(ops, &rhs, &mut p_new)?;
        let mut p_half = s.p.clone();
        p_half.values.iter_mut().zip(&p_new.values).for_each(|(a, b)| *a = 0.5 * (*a + b));
        axpy(&mut s.v.values, -dt, &ops.primary(Nabla::Grad, &p_half).values);
        s.p = p_new;
        Ok(StepReport {
            cg_iterations: rep.iterations,
            residual: rep.residual,
            energy_before,
            energy_after: self.energy(s),
            wall_time: timer.seconds(),
        })
    }

    /// `½ vᵀDv + ½ pᵀMp`.
    fn energy(&self, s: &AcousticsState) -> f64 {
        self.ops.dg_energy(&s.v) + self.ops.fem_energy(&s.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundingBox, SimplexMesh};

    fn ops() -> CompatibleOperators {
        let mesh = SimplexMesh::generate_structured(6, 6, BoundingBox::square(-0.5, 0.5), true).unwrap();
        CompatibleOperators::assemble(mesh, 2).unwrap()
    }

    #[test]
    fn constant_pressure_is_steady() {
        let ops = ops();
        let mut s = AcousticsState { v: ops.dg.zeros(2), p: ops.fem.interpolate(|_| [1.0]) };
        let before = s.clone();
        AcousticsSolver::new(&ops, 0.01, CgConfig::default()).step(&mut s).unwrap();
        let dv = s.v.values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let dp = s.p.values.iter().zip(&before.p.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(dv < 1e-13 && dp < 1e-13);
    }

    #[test]
    fn gaussian_step_conserves_energy() {
        let ops = ops();
        let p = ops.fem.interpolate(|x| [(-0.5 * (x[0] * x[0] + x[1] * x[1]) / 0.01).exp()]);
        let mut s = AcousticsState { v: ops.dg.zeros(2), p };
        let mut solver = AcousticsSolver::new(&ops, 0.02, CgConfig::default());
        for _ in 0..5 {
            let r = solver.step(&mut s).unwrap();
            assert!(((r.energy_after - r.energy_before) / r.energy_before).abs() < 1e-12);
        }
    }
}
