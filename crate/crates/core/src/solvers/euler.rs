//! Incompressible Euler `ρ(v_t + ∇·(v⊗v)) + ∇p = 0`, `∇·v = 0` with constant
//! density, by a projection method:
//!
//! 1. explicit DG predictor for the convective term with a Ducros-type flux,
//! 2. pressure Poisson equation `GᵀD⁻¹G p = (ρ/dt) Gᵀv*` in the FEM space, with
//!    one pressure DOF pinned to zero,
//! 3. correction `v⁺ = v* − (dt/ρ) D⁻¹G p`, which makes `Gᵀv⁺` vanish.

use super::{axpy, cg_solve, CgConfig, StepReport, TimeStepper, Timer};
use crate::error::{Error, Result};
use crate::operators::{CompatibleOperators, Nabla};
use crate::refelem::{edge_point, gauss_legendre_unit, quadrature, QuadratureRule, Tabulation};
use crate::spaces::{FieldDg, FieldFem};

#[derive(Clone, Debug, PartialEq)]
pub struct EulerState {
    pub v: FieldDg,
    pub p: FieldFem,
}

struct EdgeTables {
    weights: Vec<f64>,
    /// DG basis on each local edge at the Gauss parameters, `[edge]`.
    forward: Vec<Tabulation>,
    /// Same at the reversed parameters `1 − s`.
    reversed: Vec<Tabulation>,
}

pub struct EulerSolver<'a> {
    pub ops: &'a CompatibleOperators,
    pub dt: f64,
    pub rho: f64,
    pub cg: CgConfig,
    /// FEM DOF where the pressure is held at zero.
    pub pin: usize,
    /// Kinetic energy of the last predictor `v*`.
    pub last_predictor_energy: f64,
    vol: QuadratureRule,
    vol_tab: Tabulation,
    edges: EdgeTables,
    laplace_diag: Vec<f64>,
    inscribed_min: f64,
}

impl<'a> EulerSolver<'a> {
    /// `x0` selects the pinned pressure DOF (the nearest node, periodically).
    pub fn new(ops: &'a CompatibleOperators, dt: f64, rho: f64, x0: [f64; 2], cg: CgConfig) -> Result<Self> {
        if rho <= 0.0 {
            return Err(Error::Config(format!("density must be positive, got {rho}")));
        }
        let n = ops.degree();
        let vol = quadrature(3 * (n + 1))?;
        let vol_tab = ops.dg.refel.tabulate(&vol.points);
        let (params, weights) = gauss_legendre_unit((3 * n + 3).div_ceil(2));
        let tab = |rev: bool| -> Vec<Tabulation> {
            (0..3)
                .map(|k| {
                    let pts: Vec<[f64; 2]> =
                        params.iter().map(|&s| edge_point(k, if rev { 1.0 - s } else { s })).collect();
                    ops.dg.refel.tabulate(&pts)
                })
                .collect()
        };
        let edges = EdgeTables { weights, forward: tab(false), reversed: tab(true) };
        let pin = nearest_dof(ops, x0);
        let mut laplace_diag = ops.schur_part_diagonal(Nabla::Grad);
        laplace_diag[pin] = 1.0;
        let inscribed_min = ops.mesh.quality().inscribed_min;
        Ok(Self { ops, dt, rho, cg, pin, last_predictor_energy: 0.0, vol, vol_tab, edges, laplace_diag, inscribed_min })
    }

    /// DG right-hand side of the convective term per unit density:
    /// `∫ ∇φ · (v ⊗ v) − ∮ φ f̂·n`.
    pub fn convective_residual(&self, v: &FieldDg) -> FieldDg {
        let ops = self.ops;
        let nl = ops.n_loc();
        let mut r = ops.dg.zeros(2);
        let nq = self.vol.len();
        let mut ref_grads = vec![[0.0; 2]; nl];
        for e in 0..ops.n_elements() {
            let map = &ops.dg.maps[e];
            let det = map.abs_det();
            let ve = v.element(e);
            let re = r.element_mut(e);
            for q in 0..nq {
                let (mut u0, mut u1) = (0.0, 0.0);
                for c in 0..nl {
                    let phi = self.vol_tab.values[(q, c)];
                    u0 += phi * ve[2 * c];
                    u1 += phi * ve[2 * c + 1];
                    ref_grads[c] = [self.vol_tab.dxi[(q, c)], self.vol_tab.deta[(q, c)]];
                }
                let w = self.vol.weights[q] * det;
                for c in 0..nl {
                    let g = map.grad(ref_grads[c]);
                    let gv = g[0] * u0 + g[1] * u1;
                    re[2 * c] += w * gv * u0;
                    re[2 * c + 1] += w * gv * u1;
                }
            }
        }
        let mesh = &ops.mesh;
        let ng = self.edges.weights.len();
        for t in 0..ops.n_elements() {
            for k in 0..3 {
                let Some(nb) = ops.conn.neighbors[t][k] else { continue };
                if (nb.triangle, nb.local_edge) < (t, k) {
                    continue;
                }
                let tri = mesh.triangles[t];
                let a = mesh.vertices[tri[k]];
                let b = mesh.vertices[tri[(k + 1) % 3]];
                let d = [b[0] - a[0], b[1] - a[1]];
                let len = d[0].hypot(d[1]);
                let n = [d[1] / len, -d[0] / len];
                let tin = &self.edges.forward[k];
                let tout = &self.edges.reversed[nb.local_edge];
                for i in 0..ng {
                    let (mut vi, mut vo) = ([0.0; 2], [0.0; 2]);
                    for c in 0..nl {
                        let (pi, po) = (tin.values[(i, c)], tout.values[(i, c)]);
                        let (a, b) = (v.node(t, c), v.node(nb.triangle, c));
                        vi[0] += pi * a[0];
                        vi[1] += pi * a[1];
                        vo[0] += po * b[0];
                        vo[1] += po * b[1];
                    }
                    let avg = [0.5 * (vi[0] + vo[0]), 0.5 * (vi[1] + vo[1])];
                    let vn = avg[0] * n[0] + avg[1] * n[1];
                    let f = [
                        vn * avg[0] - 0.5 * vn.abs() * (vo[0] - vi[0]),
                        vn * avg[1] - 0.5 * vn.abs() * (vo[1] - vi[1]),
                    ];
                    let w = self.edges.weights[i] * len;
                    for c in 0..nl {
                        let (pi, po) = (w * tin.values[(i, c)], w * tout.values[(i, c)]);
                        let ri = r.node_mut(t, c);
                        ri[0] -= pi * f[0];
                        ri[1] -= pi * f[1];
                        let ro = r.node_mut(nb.triangle, c);
                        ro[0] += po * f[0];
                        ro[1] += po * f[1];
                    }
                }
            }
        }
        r
    }

    /// Solves `GᵀD⁻¹G p = b` with the pinned DOF eliminated. The previous `p`
    /// enters through the correction form `A δ = b − A p`, so the tolerance
    /// applies to the change of pressure over the step.
    fn pressure_solve(&self, b: &mut FieldFem, p: &mut FieldFem) -> Result<super::CgReport> {
        let pin = self.pin;
        b.values[pin] = 0.0;
        p.values[pin] = 0.0;
        let ops = self.ops;
        let mut masked = vec![0.0; p.values.len()];
        let mut apply = |x: &[f64], y: &mut [f64]| {
            masked.copy_from_slice(x);
            masked[pin] = 0.0;
            y.fill(0.0);
            ops.schur_part_add(Nabla::Grad, &masked, y);
            y[pin] = x[pin];
        };
        let mut defect = vec![0.0; p.values.len()];
        apply(&p.values, &mut defect);
        defect.iter_mut().zip(&b.values).for_each(|(d, b)| *d = b - *d);
        let mut delta = vec![0.0; defect.len()];
        let rep = cg_solve(apply, &defect, &mut delta, Some(&self.laplace_diag), &self.cg)?;
        if !rep.converged {
            return Err(Error::NotConverged { iterations: rep.iterations, residual: rep.residual });
        }
        axpy(&mut p.values, 1.0, &delta);
        Ok(rep)
    }

    /// `½ ρ vᵀDv`.
    pub fn kinetic_energy(&self, v: &FieldDg) -> f64 {
        self.rho * self.ops.dg_energy(v)
    }
}

fn nearest_dof(ops: &CompatibleOperators, x0: [f64; 2]) -> usize {
    let periods = ops.mesh.periods();
    let dist = |x: [f64; 2]| {
        (0..2)
            .map(|k| {
                let mut d = (x[k] - x0[k]).abs();
                if periods[k] > 0.0 {
                    d = d.rem_euclid(periods[k]);
                    d = d.min(periods[k] - d);
                }
                d * d
            })
            .sum::<f64>()
    };
    (0..ops.fem.n_dofs()).min_by(|&a, &b| dist(ops.fem.coords[a]).total_cmp(&dist(ops.fem.coords[b]))).unwrap_or(0)
}

impl TimeStepper for EulerSolver<'_> {
    type State = EulerState;

    fn step(&mut self, s: &mut EulerState) -> Result<StepReport> {
        let timer = Timer::start();
        let ops = self.ops;
        let (dt, rho) = (self.dt, self.rho);
        let energy_before = self.energy(s);

        let vmax = s.v.values.chunks_exact(2).map(|c| c[0].hypot(c[1])).fold(0.0, f64::max);
        let limit = self.inscribed_min / (vmax * (2 * ops.degree() + 1) as f64);
        if dt > limit {
            log::warn!("dt = {dt:e} exceeds the convective limit {limit:e}");
        }

        let mut dv = self.convective_residual(&s.v);
        ops.solve_d_inplace(&mut dv);
        let mut v_star = s.v.clone();
        axpy(&mut v_star.values, dt, &dv.values);
        self.last_predictor_energy = self.kinetic_energy(&v_star);

        let mut b = ops.dual(Nabla::Grad, &v_star);
        b.values.iter_mut().for_each(|x| *x *= rho / dt);
        let rep = self.pressure_solve(&mut b, &mut s.p)?;

        axpy(&mut v_star.values, -dt / rho, &ops.primary(Nabla::Grad, &s.p).values);
        s.v = v_star;
        Ok(StepReport {
            cg_iterations: rep.iterations,
            residual: rep.residual,
            energy_before,
            energy_after: self.energy(s),
            wall_time: timer.seconds(),
        })
    }

    fn energy(&self, s: &EulerState) -> f64 {
        self.kinetic_energy(&s.v)
    }
}
