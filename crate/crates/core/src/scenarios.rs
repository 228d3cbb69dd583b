//! Initial data, exact solutions and error functionals.
//!
//! DG initial data that must satisfy an involution is built as the primary
//! gradient or curl of an interpolated potential, never by elementwise
//! projection, so the discrete constraint holds to roundoff from the start.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{embed3, CompatibleOperators, Nabla};
use crate::refelem::quadrature;
use crate::solvers::{AcousticsState, EulerState, GlmState, MaxwellState};
use crate::spaces::{FieldDg, FieldFem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Acoustics,
    Maxwell,
    MaxwellGlm,
    Euler,
}

impl System {
    pub fn name(self) -> &'static str {
        match self {
            System::Acoustics => "acoustics",
            System::Maxwell => "maxwell",
            System::MaxwellGlm => "maxwellglm",
            System::Euler => "euler",
        }
    }
}

impl std::str::FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "acoustics" => Ok(System::Acoustics),
            "maxwell" => Ok(System::Maxwell),
            "maxwellglm" => Ok(System::MaxwellGlm),
            "euler" => Ok(System::Euler),
            _ => Err(Error::Config(format!("unknown system `{s}`"))),
        }
    }
}

/// The unknowns of any of the four systems.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Acoustics(AcousticsState),
    Maxwell(MaxwellState),
    Glm(GlmState),
    Euler(EulerState),
}

impl State {
    pub fn system(&self) -> System {
        match self {
            State::Acoustics(_) => System::Acoustics,
            State::Maxwell(_) => System::Maxwell,
            State::Glm(_) => System::MaxwellGlm,
            State::Euler(_) => System::Euler,
        }
    }

    /// The DG vector field whose involution is tracked: `v` or `B`.
    pub fn involution_field(&self) -> &FieldDg {
        match self {
            State::Acoustics(s) => &s.v,
            State::Maxwell(s) => &s.b,
            State::Glm(s) => &s.b,
            State::Euler(s) => &s.v,
        }
    }

    /// All fields by name, DG first.
    pub fn fields(&self) -> (Vec<(&'static str, &FieldDg)>, Vec<(&'static str, &FieldFem)>) {
        match self {
            State::Acoustics(s) => (vec![("v", &s.v)], vec![("p", &s.p)]),
            State::Maxwell(s) => (vec![("B", &s.b)], vec![("E", &s.e)]),
            State::Glm(s) => (vec![("B", &s.b), ("q", &s.q)], vec![("E", &s.e), ("p", &s.p)]),
            State::Euler(s) => (vec![("v", &s.v)], vec![("p", &s.p)]),
        }
    }

    pub fn fields_mut(&mut self) -> (Vec<(&'static str, &mut FieldDg)>, Vec<(&'static str, &mut FieldFem)>) {
        match self {
            State::Acoustics(s) => (vec![("v", &mut s.v)], vec![("p", &mut s.p)]),
            State::Maxwell(s) => (vec![("B", &mut s.b)], vec![("E", &mut s.e)]),
            State::Glm(s) => (vec![("B", &mut s.b), ("q", &mut s.q)], vec![("E", &mut s.e), ("p", &mut s.p)]),
            State::Euler(s) => (vec![("v", &mut s.v)], vec![("p", &mut s.p)]),
        }
    }
}

/// `v = primary_grad(I_h Z)`, two components.
pub fn init_compatible_grad(ops: &CompatibleOperators, z: impl Fn([f64; 2]) -> f64) -> FieldDg {
    ops.primary(Nabla::Grad, &ops.fem.interpolate(|x| [z(x)]))
}

/// `B = primary_curl(I_h A)`, three components.
pub fn init_compatible_curl(ops: &CompatibleOperators, a: impl Fn([f64; 2]) -> [f64; 3]) -> FieldDg {
    ops.primary(Nabla::Curl, &ops.fem.interpolate(a))
}

/// `(ε_c, ε_d) = (max_p |∫ ∇ψ_p × w|, max_p |∫ ∇ψ_p · w|)`, maxima taken over
/// FEM rows and components. Two-component fields get a zero z-component.
pub fn involution_errors(ops: &CompatibleOperators, w: &FieldDg) -> (f64, f64) {
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let eps_c = max_abs(&ops.dual(Nabla::Curl, &embed3(w)).values);
    let eps_d = max_abs(&ops.dual_div_rhs(w).values);
    (eps_c, eps_d)
}

/// Total energy: `½∫` of the squared fields (`½ρ∫v²` for Euler), integrated exactly.
pub fn energy(ops: &CompatibleOperators, state: &State, rho: f64) -> f64 {
    match state {
        State::Acoustics(s) => ops.dg_energy(&s.v) + ops.fem_energy(&s.p),
        State::Maxwell(s) => ops.dg_energy(&s.b) + ops.fem_energy(&s.e),
        State::Glm(s) => ops.dg_energy(&s.b) + ops.dg_energy(&s.q) + ops.fem_energy(&s.e) + ops.fem_energy(&s.p),
        State::Euler(s) => rho * ops.dg_energy(&s.v),
    }
}

/// Per-component `L²` error of a DG field, quadrature exact to degree `2(N+2)`.
pub fn l2_error_dg(ops: &CompatibleOperators, u: &FieldDg, exact: impl Fn([f64; 2]) -> Vec<f64>) -> Vec<f64> {
    let q = quadrature(2 * (ops.degree() + 2)).expect("degree within quadrature table");
    let tab = ops.dg.refel.tabulate(&q.points);
    let mut err = vec![0.0; u.m];
    for e in 0..ops.n_elements() {
        let map = &ops.dg.maps[e];
        for (i, &r) in q.points.iter().enumerate() {
            let ex = exact(map.map(r));
            for k in 0..u.m {
                let uh: f64 = (0..ops.n_loc()).map(|c| tab.values[(i, c)] * u.node(e, c)[k]).sum();
                err[k] += q.weights[i] * map.abs_det() * (uh - ex[k]).powi(2);
            }
        }
    }
    err.into_iter().map(f64::sqrt).collect()
}

/// Per-component `L²` error of a FEM field.
pub fn l2_error_fem(ops: &CompatibleOperators, u: &FieldFem, exact: impl Fn([f64; 2]) -> Vec<f64>) -> Vec<f64> {
    let q = quadrature(2 * (ops.degree() + 2)).expect("degree within quadrature table");
    let tab = ops.fem.refel.tabulate(&q.points);
    let mut err = vec![0.0; u.m];
    for e in 0..ops.n_elements() {
        let map = &ops.fem.maps[e];
        let dofs = ops.fem.dofs(e);
        for (i, &r) in q.points.iter().enumerate() {
            let ex = exact(map.map(r));
            for k in 0..u.m {
                let uh: f64 = dofs.iter().enumerate().map(|(c, &p)| tab.values[(i, c)] * u.node(p)[k]).sum();
                err[k] += q.weights[i] * map.abs_det() * (uh - ex[k]).powi(2);
            }
        }
    }
    err.into_iter().map(f64::sqrt).collect()
}

pub fn gaussian(x: [f64; 2], sigma: f64) -> f64 {
    (-0.5 * (x[0] * x[0] + x[1] * x[1]) / (sigma * sigma)).exp()
}

/// Pressure pulse `p = p₀ exp(−½|x|²/σ²)` at rest.
pub fn acoustics_gaussian(ops: &CompatibleOperators, p0: f64, sigma: f64) -> State {
    State::Acoustics(AcousticsState { v: ops.dg.zeros(2), p: ops.fem.interpolate(|x| [p0 * gaussian(x, sigma)]) })
}

/// Gaussian `B` and `E` profiles; `B` is nodally interpolated.
pub fn maxwell_gaussian(ops: &CompatibleOperators, b0: [f64; 3], e0: [f64; 3], sigma: f64) -> State {
    State::Maxwell(MaxwellState {
        b: ops.dg.interpolate(|x| b0.map(|c| c * gaussian(x, sigma))),
        e: ops.fem.interpolate(|x| e0.map(|c| c * gaussian(x, sigma))),
    })
}

/// Gaussian profiles for all four GLM fields.
pub fn glm_gaussian(ops: &CompatibleOperators, b0: [f64; 3], e0: [f64; 3], p0: f64, q0: f64, sigma: f64) -> State {
    State::Glm(GlmState {
        b: ops.dg.interpolate(|x| b0.map(|c| c * gaussian(x, sigma))),
        q: ops.dg.interpolate(|x| [q0 * gaussian(x, sigma)]),
        e: ops.fem.interpolate(|x| e0.map(|c| c * gaussian(x, sigma))),
        p: ops.fem.interpolate(|x| [p0 * gaussian(x, sigma)]),
    })
}

const B: f64 = SQRT_2 / 2.0;
const MM_B0: [f64; 3] = [0.25 * B, -0.25 * B, 1.0];
const MM_E0: [f64; 3] = [1.5 * B, 0.5 * B, 0.0];
const MM_P0: f64 = 0.25;
const MM_Q0: f64 = 0.5;

/// Named exact solutions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExactSolution {
    /// Stationary Taylor–Green vortex on `[0, 2π]²`.
    Tgv2d,
    /// Maxwell-GLM plane wave along `(1, −1)` with unit speed and period √2.
    MmPlaneWave,
    /// Right-moving acoustic wave `p = v₁ = sin(2π(x − t)/λ)`.
    AcousticPlaneWave { lambda: f64 },
}

impl ExactSolution {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "tgv2d" => Ok(Self::Tgv2d),
            "mm_planewave" => Ok(Self::MmPlaneWave),
            "acoustic_planewave" => Ok(Self::AcousticPlaneWave { lambda: 0.25 }),
            _ => Err(Error::UnknownSolution(name.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Tgv2d => "tgv2d",
            Self::MmPlaneWave => "mm_planewave",
            Self::AcousticPlaneWave { .. } => "acoustic_planewave",
        }
    }

    pub fn system(&self) -> System {
        match self {
            Self::Tgv2d => System::Euler,
            Self::MmPlaneWave => System::MaxwellGlm,
            Self::AcousticPlaneWave { .. } => System::Acoustics,
        }
    }

    fn mm_phase(x: [f64; 2], t: f64) -> f64 {
        PI * (x[0] - x[1]) - PI * SQRT_2 * t
    }

    /// Value of the named field (`v`, `p`, `B`, `E`, `q`) at `(x, t)`.
    pub fn eval(&self, field: &str, x: [f64; 2], t: f64) -> Result<Vec<f64>> {
        let unknown = || Error::Invalid(format!("{} has no field `{field}`", self.name()));
        Ok(match self {
            Self::Tgv2d => match field {
                "v" => vec![x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin()],
                "p" => vec![-0.5 + 0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos())],
                _ => return Err(unknown()),
            },
            Self::MmPlaneWave => {
                let s = Self::mm_phase(x, t).sin();
                match field {
                    "B" => MM_B0.iter().map(|c| c * s).collect(),
                    "E" => MM_E0.iter().map(|c| c * s).collect(),
                    "p" => vec![MM_P0 * s],
                    "q" => vec![MM_Q0 * s],
                    _ => return Err(unknown()),
                }
            }
            Self::AcousticPlaneWave { lambda } => {
                let s = (2.0 * PI * (x[0] - t) / lambda).sin();
                match field {
                    "v" => vec![s, 0.0],
                    "p" => vec![s],
                    _ => return Err(unknown()),
                }
            }
        })
    }

    /// Compatible discrete initial state.
    pub fn initial_state(&self, ops: &CompatibleOperators) -> State {
        match *self {
            Self::Tgv2d => {
                let b = init_compatible_curl(ops, |x| [0.0, 0.0, x[0].sin() * x[1].sin()]);
                let v = crate::operators::in_plane(&b);
                let p = ops.fem.interpolate(|x| [-0.5 + 0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos())]);
                State::Euler(EulerState { v, p })
            }
            Self::MmPlaneWave => {
                // B = ∇Z + ∇×A with Z = −(B0₁/π) cos θ and A = −(1/2π)(cos θ, cos θ, 0)
                let th = |x: [f64; 2]| Self::mm_phase(x, 0.0);
                let grad = init_compatible_grad(ops, |x| -MM_B0[0] / PI * th(x).cos());
                let mut b = init_compatible_curl(ops, |x| {
                    let c = -th(x).cos() / (2.0 * PI);
                    [c, c, 0.0]
                });
                for (bb, g) in b.values.chunks_exact_mut(3).zip(grad.values.chunks_exact(2)) {
                    bb[0] += g[0];
                    bb[1] += g[1];
                }
                let s = |x: [f64; 2]| th(x).sin();
                State::Glm(GlmState {
                    b,
                    q: ops.dg.interpolate(|x| [MM_Q0 * s(x)]),
                    e: ops.fem.interpolate(|x| MM_E0.map(|c| c * s(x))),
                    p: ops.fem.interpolate(|x| [MM_P0 * s(x)]),
                })
            }
            Self::AcousticPlaneWave { lambda } => {
                let k = 2.0 * PI / lambda;
                let v = init_compatible_grad(ops, |x| -(k * x[0]).cos() / k);
                State::Acoustics(AcousticsState { v, p: ops.fem.interpolate(|x| [(k * x[0]).sin()]) })
            }
        }
    }

    /// `L²` errors per scalar component, labelled like `B1`, `E2`, `p`.
    pub fn errors(&self, ops: &CompatibleOperators, state: &State, t: f64) -> Result<Vec<(String, f64)>> {
        if state.system() != self.system() {
            return Err(Error::Invalid(format!("{} needs a {} state", self.name(), self.system().name())));
        }
        let (dg, fem) = state.fields();
        let mut out = Vec::new();
        let label = |name: &str, m: usize, k: usize| if m == 1 { name.to_string() } else { format!("{name}{}", k + 1) };
        for (name, u) in dg {
            let errs = l2_error_dg(ops, u, |x| self.eval(name, x, t).expect("field of this solution"));
            out.extend(errs.into_iter().enumerate().map(|(k, e)| (label(name, u.m, k), e)));
        }
        for (name, u) in fem {
            let errs = l2_error_fem(ops, u, |x| self.eval(name, x, t).expect("field of this solution"));
            out.extend(errs.into_iter().enumerate().map(|(k, e)| (label(name, u.m, k), e)));
        }
        Ok(out)
    }
}

/// Time history of the scalar diagnostics of one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticSeries {
    pub time: Vec<f64>,
    pub energy: Vec<f64>,
    pub eps_c: Vec<f64>,
    pub eps_d: Vec<f64>,
    pub final_errors: Vec<(String, f64)>,
}

impl DiagnosticSeries {
    pub fn push(&mut self, t: f64, energy: f64, eps_c: f64, eps_d: f64) {
        debug_assert!(self.time.last().is_none_or(|&l| t > l), "time must increase");
        self.time.push(t);
        self.energy.push(energy);
        self.eps_c.push(eps_c);
        self.eps_d.push(eps_d);
    }

    /// `max_n |E_n − E_0| / E_0`.
    pub fn relative_energy_drift(&self) -> f64 {
        let Some(&e0) = self.energy.first() else { return 0.0 };
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0.abs().max(f64::MIN_POSITIVE)
    }
}
