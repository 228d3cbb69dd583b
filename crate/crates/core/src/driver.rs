//! Run driver behind the `cdg` subcommands: configured runs, the operator
//! property suite and convergence sweeps.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{steps_to, RunConfig, ScenarioSpec, TimePolicy};
use crate::error::{Error, Result};
use crate::io::{convergence_table, export_vtk, write_coefficients, ConvergenceRun, ConvergenceTable, SeriesRow, SeriesWriter};
use crate::mesh::{BoundingBox, SimplexMesh};
use crate::operators::CompatibleOperators;
use crate::scenarios::{
    acoustics_gaussian, glm_gaussian, involution_errors, maxwell_gaussian, DiagnosticSeries, ExactSolution, State, System,
};
use crate::solvers::{
    AcousticsSolver, CgConfig, EulerSolver, GlmSolver, MaxwellSolver, StepReport, TimeStepper,
};

/// Physical parameters that only some systems use.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub cg: CgConfig,
    /// Euler density.
    pub rho: f64,
    /// Euler pressure pin location.
    pub pin: [f64; 2],
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { cg: CgConfig::default(), rho: 1.0, pin: [0.0, 0.0] }
    }
}

enum Stepper<'a> {
    Acoustics(AcousticsSolver<'a>),
    Maxwell(MaxwellSolver<'a>),
    Glm(GlmSolver<'a>),
    Euler(EulerSolver<'a>),
}

/// A state marching in time with the stepper of its system.
pub struct Simulation<'a> {
    pub ops: &'a CompatibleOperators,
    pub dt: f64,
    pub steps_taken: usize,
    state: State,
    stepper: Stepper<'a>,
}

impl<'a> Simulation<'a> {
    pub fn new(ops: &'a CompatibleOperators, state: State, dt: f64, settings: &SolverSettings) -> Result<Self> {
        let cg = settings.cg.clone();
        let stepper = match state.system() {
            System::Acoustics => Stepper::Acoustics(AcousticsSolver::new(ops, dt, cg)),
            System::Maxwell => Stepper::Maxwell(MaxwellSolver::new(ops, dt, cg)),
            System::MaxwellGlm => Stepper::Glm(GlmSolver::new(ops, dt, cg)),
            System::Euler => Stepper::Euler(EulerSolver::new(ops, dt, settings.rho, settings.pin, cg)?),
        };
        Ok(Self { ops, dt, steps_taken: 0, state, stepper })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn into_state(self) -> State {
        self.state
    }

    pub fn time(&self) -> f64 {
        self.steps_taken as f64 * self.dt
    }

    pub fn advance(&mut self) -> Result<StepReport> {
        let rep = match (&mut self.stepper, &mut self.state) {
            (Stepper::Acoustics(x), State::Acoustics(s)) => x.step(s),
            (Stepper::Maxwell(x), State::Maxwell(s)) => x.step(s),
            (Stepper::Glm(x), State::Glm(s)) => x.step(s),
            (Stepper::Euler(x), State::Euler(s)) => x.step(s),
            _ => unreachable!("stepper is built from the state"),
        }?;
        self.steps_taken += 1;
        Ok(rep)
    }

    /// Energy as conserved (or dissipated, for Euler) by the stepper.
    pub fn energy(&self) -> f64 {
        match (&self.stepper, &self.state) {
            (Stepper::Acoustics(x), State::Acoustics(s)) => x.energy(s),
            (Stepper::Maxwell(x), State::Maxwell(s)) => x.energy(s),
            (Stepper::Glm(x), State::Glm(s)) => x.energy(s),
            (Stepper::Euler(x), State::Euler(s)) => x.energy(s),
            _ => unreachable!("stepper is built from the state"),
        }
    }

    /// `(ε_c, ε_d)` of the tracked vector field.
    pub fn involution_errors(&self) -> (f64, f64) {
        involution_errors(self.ops, self.state.involution_field())
    }
}

/// Largest nodal speed of the velocity of an Euler state, `None` for other systems.
fn max_speed(state: &State) -> Option<f64> {
    match state {
        State::Euler(s) => Some(s.v.values.chunks_exact(2).map(|c| c[0].hypot(c[1])).fold(0.0, f64::max)),
        _ => None,
    }
}

fn exact_solution(name: &str, lambda: Option<f64>) -> Result<ExactSolution> {
    match (ExactSolution::from_name(name)?, lambda) {
        (ExactSolution::AcousticPlaneWave { .. }, Some(lambda)) => Ok(ExactSolution::AcousticPlaneWave { lambda }),
        (sol, _) => Ok(sol),
    }
}

/// Initial state of a configured run, with the exact solution when there is one.
pub fn initial_state(cfg: &RunConfig, ops: &CompatibleOperators) -> Result<(State, Option<ExactSolution>)> {
    Ok(match &cfg.scenario {
        ScenarioSpec::Gaussian { sigma, p0, q0, b0, e0 } => {
            let s = match cfg.system {
                System::Acoustics => acoustics_gaussian(ops, *p0, *sigma),
                System::Maxwell => maxwell_gaussian(ops, *b0, *e0, *sigma),
                System::MaxwellGlm => glm_gaussian(ops, *b0, *e0, *p0, *q0, *sigma),
                System::Euler => return Err(Error::Config("euler runs need an exact scenario".into())),
            };
            (s, None)
        }
        ScenarioSpec::Exact { name, lambda, .. } => {
            let sol = exact_solution(name, *lambda)?;
            (sol.initial_state(ops), Some(sol))
        }
    })
}

/// Machine-readable record of a finished run, written as `summary.toml`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub system: String,
    pub degree: usize,
    pub n_elements: usize,
    pub dg_dofs: usize,
    pub fem_dofs: usize,
    pub steps: usize,
    pub dt: f64,
    pub final_time: f64,
    pub total_cg_iterations: usize,
    pub max_residual: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub relative_energy_drift: f64,
    pub max_eps_c: f64,
    pub max_eps_d: f64,
    pub final_errors: BTreeMap<String, f64>,
    /// Absent for deterministic runs.
    pub wall_time: Option<f64>,
}

/// Everything a run produced besides the files.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub summary: RunSummary,
    /// Logged rows only.
    pub series: DiagnosticSeries,
    pub output_dir: PathBuf,
}

/// Executes a configured run and writes `series.csv`, `summary.toml` and the
/// field dumps (VTK plus a coefficient CSV per dump) into `out_dir`. Relative mesh paths resolve against `base`.
///
/// A series row is logged at step 0 and then every `series_every` steps plus
/// the last step; `cg_iters` and `residual` cover the steps since the previous
/// row.
pub fn run(cfg: &RunConfig, base: &Path, out_dir: &Path) -> Result<RunReport> {
    cfg.validate()?;
    let timer = std::time::Instant::now();
    let mesh = cfg.mesh.build(base)?;
    let inscribed = mesh.quality().inscribed_min;
    let ops = CompatibleOperators::assemble(mesh, cfg.degree)?;
    let (state, exact) = initial_state(cfg, &ops)?;
    let (steps, dt) = steps_to(cfg.final_time, cfg.time.nominal_dt(inscribed, cfg.degree, max_speed(&state)));
    let settings = match &cfg.scenario {
        ScenarioSpec::Exact { rho, pin, .. } => SolverSettings {
            cg: cfg.cg.clone(),
            rho: rho.unwrap_or(1.0),
            pin: pin.unwrap_or([0.0, 0.0]),
        },
        _ => SolverSettings { cg: cfg.cg.clone(), ..Default::default() },
    };
    log::info!(
        "{} N={} on {} triangles: {steps} steps of dt = {dt:e}",
        cfg.system.name(),
        cfg.degree,
        ops.n_elements()
    );

    std::fs::create_dir_all(out_dir)?;
    let vtk_dir = out_dir.join("vtk");
    if cfg.output.vtk {
        std::fs::create_dir_all(&vtk_dir)?;
    }
    let dump = |sim: &Simulation| -> Result<()> {
        let path = vtk_dir.join(format!("fields_{:06}.vtk", sim.steps_taken));
        export_vtk(&ops.dg, &ops.fem, sim.state(), &path)?;
        write_coefficients(sim.state(), &path.with_extension("csv"))
    };

    let mut sim = Simulation::new(&ops, state, dt, &settings)?;
    let mut writer = SeriesWriter::create(&out_dir.join("series.csv"), cfg.output.flush_every)?;
    let mut series = DiagnosticSeries::default();
    let mut log_row = |sim: &Simulation, cg_iters: usize, residual: f64, series: &mut DiagnosticSeries| -> Result<()> {
        let (eps_c, eps_d) = sim.involution_errors();
        let (t, energy) = (sim.time(), sim.energy());
        series.push(t, energy, eps_c, eps_d);
        writer.log_step(&SeriesRow { step: sim.steps_taken, t, energy, eps_c, eps_d, cg_iters, residual })
    };

    log_row(&sim, 0, 0.0, &mut series)?;
    if cfg.output.vtk {
        dump(&sim)?;
    }
    let (mut total_iters, mut max_residual) = (0, 0.0f64);
    let (mut pending_iters, mut pending_res) = (0, 0.0f64);
    for step in 1..=steps {
        let rep = sim.advance()?;
        total_iters += rep.cg_iterations;
        max_residual = max_residual.max(rep.residual);
        pending_iters += rep.cg_iterations;
        pending_res = pending_res.max(rep.residual);
        if step % cfg.output.series_every.max(1) == 0 || step == steps {
            log_row(&sim, pending_iters, pending_res, &mut series)?;
            (pending_iters, pending_res) = (0, 0.0);
        }
        let vtk_due = cfg.output.vtk_every > 0 && step % cfg.output.vtk_every == 0;
        if cfg.output.vtk && (vtk_due || step == steps) {
            dump(&sim)?;
        }
    }
    drop(log_row);
    writer.finish()?;

    let final_time = sim.time();
    let state = sim.into_state();
    if let Some(sol) = exact {
        series.final_errors = sol.errors(&ops, &state, final_time)?;
    }
    let fold = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let summary = RunSummary {
        system: cfg.system.name().to_string(),
        degree: cfg.degree,
        n_elements: ops.n_elements(),
        dg_dofs: ops.dg.n_dofs(),
        fem_dofs: ops.fem.n_dofs(),
        steps,
        dt,
        final_time,
        total_cg_iterations: total_iters,
        max_residual,
        initial_energy: series.energy[0],
        final_energy: *series.energy.last().expect("step 0 is logged"),
        relative_energy_drift: series.relative_energy_drift(),
        max_eps_c: fold(&series.eps_c),
        max_eps_d: fold(&series.eps_d),
        final_errors: series.final_errors.iter().cloned().collect(),
        wall_time: (!cfg.deterministic).then(|| timer.elapsed().as_secs_f64()),
    };
    let text = toml::to_string(&summary).map_err(|e| Error::Invalid(format!("summary serialization: {e}")))?;
    std::fs::write(out_dir.join("summary.toml"), text)?;
    Ok(RunReport { summary, series, output_dir: out_dir.to_path_buf() })
}

/// Settings of the operator property suite.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub nx: usize,
    pub ny: usize,
    pub degree: usize,
    pub seed: u64,
    /// Random scalar and vector inputs per property.
    pub samples: usize,
    /// Amplitude of the uniform nodal data, drawn from `[0, amplitude)`.
    pub amplitude: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { nx: 20, ny: 20, degree: 3, seed: 1709, samples: 1, amplitude: 1e-3 }
    }
}

/// Threshold every property must meet.
pub const VERIFY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    /// `(property, worst value over all samples)`.
    pub rows: Vec<(&'static str, f64)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn failures(&self) -> impl Iterator<Item = &(&'static str, f64)> {
        self.rows.iter().filter(|(_, v)| !(*v <= VERIFY_TOLERANCE))
    }
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:<26} {:>23}  status", "property", "max error")?;
        for (name, v) in &self.rows {
            let status = if *v <= VERIFY_TOLERANCE { "ok" } else { "FAIL" };
            writeln!(f, "{name:<26} {v:>23.16e}  {status}")?;
        }
        Ok(())
    }
}

/// Property suite on a structured periodic mesh of the unit square.
pub fn verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mesh = SimplexMesh::generate_structured(opts.nx, opts.ny, BoundingBox::square(0.0, 1.0), true)?;
    verify_mesh(mesh, opts)
}

/// Property suite on an arbitrary periodic mesh; `nx`/`ny` in `opts` are ignored.
pub fn verify_mesh(mesh: SimplexMesh, opts: &VerifyOptions) -> Result<VerifyReport> {
    let ops = CompatibleOperators::assemble(mesh, opts.degree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = [0.0f64; 5];
    for _ in 0..opts.samples.max(1) {
        let mut z = ops.fem.zeros(1);
        z.values.iter_mut().for_each(|v| *v = rng.gen_range(0.0..opts.amplitude));
        let mut a = ops.fem.zeros(3);
        a.values.iter_mut().for_each(|v| *v = rng.gen_range(0.0..opts.amplitude));
        let vals = [
            ops.tangential_grad_jump(&z),
            ops.normal_curl_jump(&a),
            ops.schwarz_commutator(&z),
            ops.curl_grad_residual(&z),
            ops.div_curl_residual(&a),
        ];
        for (w, v) in worst.iter_mut().zip(vals) {
            *w = if v.is_nan() { f64::NAN } else { w.max(v) };
        }
    }
    let names = [
        "tangential jump of grad",
        "normal jump of curl",
        "Schwarz commutator",
        "curl(grad) functional",
        "div(curl) functional",
    ];
    Ok(VerifyReport { rows: names.into_iter().zip(worst).collect() })
}

/// Time-step rule of a convergence sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CflSpec {
    Value(f64),
    /// CFL number equal to the grid spacing, so `dt ∝ h²`.
    MeshSize,
}

impl std::str::FromStr for CflSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "h" {
            return Ok(CflSpec::MeshSize);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(CflSpec::Value(v)),
            _ => Err(Error::Config(format!("cfl must be a positive number or `h`, got `{s}`"))),
        }
    }
}

/// Test problem of a system's convergence sweep: solution, domain, final time
/// and the variables whose order is judged.
pub fn convergence_problem(system: System) -> Result<(ExactSolution, BoundingBox, f64, Vec<&'static str>)> {
    Ok(match system {
        System::MaxwellGlm => (
            ExactSolution::MmPlaneWave,
            BoundingBox::square(-1.0, 1.0),
            2f64.sqrt(),
            vec!["B1", "B2", "p", "E1", "E2", "q"],
        ),
        System::Euler => (ExactSolution::Tgv2d, BoundingBox::square(0.0, 2.0 * PI), 0.25, vec!["v1", "v2", "p"]),
        System::Acoustics => {
            let lambda = 0.25;
            (ExactSolution::AcousticPlaneWave { lambda }, BoundingBox::square(-0.5, 0.5), lambda, vec!["v1", "p"])
        }
        System::Maxwell => {
            return Err(Error::Config("no exact solution for the pure Maxwell system; use maxwellglm".into()))
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergeOptions {
    pub system: System,
    pub degree: usize,
    pub levels: Vec<usize>,
    pub cfl: CflSpec,
    pub cg: CgConfig,
}

#[derive(Clone, Debug)]
pub struct ConvergeReport {
    pub table: ConvergenceTable,
    pub required_order: f64,
}

impl ConvergeReport {
    /// Variables whose finest-pair order falls short, with that order.
    pub fn shortfalls(&self) -> Vec<(String, f64)> {
        self.table
            .variables
            .iter()
            .enumerate()
            .filter_map(|(i, v)| {
                let o = self.table.finest_order(i)?;
                (!(o >= self.required_order)).then(|| (v.clone(), o))
            })
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.table.runs.len() >= 2 && self.shortfalls().is_empty()
    }
}

/// Final errors of one structured-mesh run of the system's convergence problem.
pub fn convergence_run(system: System, degree: usize, nx: usize, cfl: CflSpec, cg: &CgConfig) -> Result<ConvergenceRun> {
    let (sol, bbox, t_end, vars) = convergence_problem(system)?;
    let mesh = SimplexMesh::generate_structured(nx, nx, bbox, true)?;
    let inscribed = mesh.quality().inscribed_min;
    let h = bbox.width() / nx as f64;
    let ops = CompatibleOperators::assemble(mesh, degree)?;
    let state = sol.initial_state(&ops);
    let cfl = match cfl {
        CflSpec::Value(c) => c,
        CflSpec::MeshSize => h,
    };
    let (steps, dt) = steps_to(t_end, TimePolicy::Cfl { cfl }.nominal_dt(inscribed, degree, max_speed(&state)));
    let settings = SolverSettings { cg: cg.clone(), ..Default::default() };
    let mut sim = Simulation::new(&ops, state, dt, &settings)?;
    for _ in 0..steps {
        sim.advance()?;
    }
    let errs: BTreeMap<String, f64> = sol.errors(&ops, sim.state(), t_end)?.into_iter().collect();
    log::info!("{} N={degree} nx={nx}: {steps} steps, {errs:?}", system.name());
    let errors = vars.iter().map(|v| errs[*v]).collect();
    Ok(ConvergenceRun { nx, h, errors })
}

/// Runs the refinement sweep and tabulates observed orders.
pub fn converge(opts: &ConvergeOptions) -> Result<ConvergeReport> {
    let (_, _, _, vars) = convergence_problem(opts.system)?;
    let mut levels = opts.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    let runs = levels
        .iter()
        .map(|&nx| convergence_run(opts.system, opts.degree, nx, opts.cfl, &opts.cg))
        .collect::<Result<Vec<_>>>()?;
    let table = convergence_table(vars.into_iter().map(String::from).collect(), runs)?;
    Ok(ConvergeReport { table, required_order: opts.degree as f64 + 1.0 - 0.3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{MeshSpec, OutputSpec};
    use crate::io::read_series;

    fn gaussian_config(system: System) -> RunConfig {
        RunConfig {
            system,
            degree: 1,
            final_time: 0.05,
            mesh: MeshSpec::Structured { nx: 6, ny: 6, bbox: [-0.5, 0.5, -0.5, 0.5], periodic: true },
            time: TimePolicy::Fixed { dt: 0.01 },
            scenario: ScenarioSpec::Gaussian { sigma: 0.1, p0: 1.0, q0: 0.0, b0: [0.0; 3], e0: [0.0, 0.0, 1.0] },
            output: OutputSpec { series_every: 2, vtk_every: 2, ..Default::default() },
            cg: CgConfig::default(),
            deterministic: true,
            output_dir: "out".into(),
        }
    }

    #[test]
    fn run_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let rep = run(&gaussian_config(System::MaxwellGlm), dir.path(), dir.path()).unwrap();
        assert_eq!(rep.summary.steps, 5);
        let rows = read_series(&std::fs::read_to_string(dir.path().join("series.csv")).unwrap()).unwrap();
        // steps 0, 2, 4 and the last
        assert_eq!(rows.iter().map(|r| r.step).collect::<Vec<_>>(), [0, 2, 4, 5]);
        assert_eq!(rows.iter().map(|r| r.cg_iters).sum::<usize>(), rep.summary.total_cg_iterations);
        let vtk = dir.path().join("vtk");
        let count = |ext: &str| {
            std::fs::read_dir(&vtk).unwrap().filter(|e| e.as_ref().unwrap().path().extension().unwrap() == ext).count()
        };
        assert_eq!((count("vtk"), count("csv")), (4, 4));
        let cfg = gaussian_config(System::MaxwellGlm);
        let ops = CompatibleOperators::assemble(cfg.mesh.build(dir.path()).unwrap(), cfg.degree).unwrap();
        let (initial, _) = initial_state(&cfg, &ops).unwrap();
        let dumped = std::fs::read_to_string(vtk.join("fields_000000.csv")).unwrap();
        assert_eq!(crate::io::read_coefficients(&dumped, &initial).unwrap(), initial);
        assert!(rep.summary.wall_time.is_none());
        assert!(rep.summary.relative_energy_drift < 1e-12);
        let summary = std::fs::read_to_string(dir.path().join("summary.toml")).unwrap();
        assert!(summary.contains("system = \"maxwellglm\""));
    }

    #[test]
    fn zero_final_time_logs_initial_state_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = gaussian_config(System::Acoustics);
        cfg.final_time = 0.0;
        let rep = run(&cfg, dir.path(), dir.path()).unwrap();
        assert_eq!(rep.summary.steps, 0);
        assert_eq!(rep.series.time, [0.0]);
    }

    #[test]
    fn exact_scenario_reports_errors() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = gaussian_config(System::Acoustics);
        cfg.scenario = ScenarioSpec::Exact { name: "acoustic_planewave".into(), lambda: Some(0.5), rho: None, pin: None };
        cfg.output.vtk = false;
        let rep = run(&cfg, dir.path(), dir.path()).unwrap();
        assert!(rep.summary.final_errors["p"] < 0.1);
        assert!(!dir.path().join("vtk").exists());
    }

    #[test]
    fn verify_passes_for_low_degrees() {
        for degree in 0..=2 {
            let rep = verify(&VerifyOptions { nx: 4, ny: 4, degree, ..Default::default() }).unwrap();
            assert!(rep.passed(), "{rep}");
        }
    }

    #[test]
    fn cfl_spec_parsing() {
        assert_eq!("h".parse::<CflSpec>().unwrap(), CflSpec::MeshSize);
        assert_eq!("0.5".parse::<CflSpec>().unwrap(), CflSpec::Value(0.5));
        assert!("-1".parse::<CflSpec>().is_err());
    }

    #[test]
    fn acoustic_sweep_degree_zero() {
        let rep = converge(&ConvergeOptions {
            system: System::Acoustics,
            degree: 0,
            levels: vec![16, 32],
            cfl: CflSpec::Value(0.5),
            cg: CgConfig::default(),
        })
        .unwrap();
        assert!(rep.passed(), "{}", rep.table);
    }
}
