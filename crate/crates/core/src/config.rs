//! Run configuration, read from TOML.
//!
//! ```toml
//! system = "acoustics"
//! degree = 3
//! final_time = 1.0
//!
//! [mesh]
//! kind = "structured"
//! nx = 30
//! ny = 30
//! bbox = [-0.5, 0.5, -0.5, 0.5]
//!
//! [time]
//! policy = "fixed"
//! dt = 0.01
//!
//! [scenario]
//! kind = "gaussian"
//! sigma = 0.05
//! p0 = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{read_mesh, BoundingBox, SimplexMesh};
use crate::scenarios::System;
use crate::solvers::CgConfig;

/// Environment variable that relocates relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "CDG_OUTPUT_ROOT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: System,
    pub degree: usize,
    pub final_time: f64,
    pub mesh: MeshSpec,
    pub time: TimePolicy,
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub cg: CgConfig,
    #[serde(default = "yes")]
    pub deterministic: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn yes() -> bool {
    true
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

fn periodic_default() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeshSpec {
    Structured {
        nx: usize,
        ny: usize,
        /// `[x_min, x_max, y_min, y_max]`.
        bbox: [f64; 4],
        #[serde(default = "periodic_default")]
        periodic: bool,
    },
    Jittered {
        nx: usize,
        ny: usize,
        bbox: [f64; 4],
        jitter: f64,
        seed: u64,
        #[serde(default = "periodic_default")]
        periodic: bool,
    },
    File {
        path: PathBuf,
        #[serde(default = "periodic_default")]
        periodic: bool,
    },
}

impl MeshSpec {
    /// Builds the mesh; relative file paths are resolved against `base`.
    pub fn build(&self, base: &Path) -> Result<SimplexMesh> {
        let bb = |b: &[f64; 4]| BoundingBox::new(b[0], b[1], b[2], b[3]);
        match self {
            MeshSpec::Structured { nx, ny, bbox, periodic } => SimplexMesh::generate_structured(*nx, *ny, bb(bbox), *periodic),
            MeshSpec::Jittered { nx, ny, bbox, jitter, seed, periodic } => {
                SimplexMesh::generate_jittered(*nx, *ny, bb(bbox), *periodic, *jitter, *seed)
            }
            MeshSpec::File { path, periodic } => {
                let mut mesh = read_mesh(&base.join(path))?;
                if *periodic {
                    mesh.make_periodic(true, true)?;
                }
                Ok(mesh)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase", deny_unknown_fields)]
pub enum TimePolicy {
    Fixed { dt: f64 },
    Cfl { cfl: f64 },
}

impl TimePolicy {
    /// Nominal step: `CFL · d_in / (2N + 1)`, divided by `max|v|` when given.
    pub fn nominal_dt(&self, inscribed_min: f64, degree: usize, vmax: Option<f64>) -> f64 {
        match *self {
            TimePolicy::Fixed { dt } => dt,
            TimePolicy::Cfl { cfl } => {
                let dt = cfl * inscribed_min / (2 * degree + 1) as f64;
                match vmax {
                    Some(v) if v > 0.0 => dt / v,
                    _ => dt,
                }
            }
        }
    }
}

/// Step count and step size that land exactly on `t_end`.
pub fn steps_to(t_end: f64, nominal_dt: f64) -> (usize, f64) {
    if t_end == 0.0 {
        return (0, nominal_dt);
    }
    let n = (t_end / nominal_dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (n, t_end / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScenarioSpec {
    /// Gaussian pulses of half width `sigma` centred at the origin.
    Gaussian {
        sigma: f64,
        #[serde(default)]
        p0: f64,
        #[serde(default)]
        q0: f64,
        #[serde(default)]
        b0: [f64; 3],
        #[serde(default)]
        e0: [f64; 3],
    },
    /// A named exact solution used as initial data and for final errors.
    Exact {
        name: String,
        /// Wavelength of `acoustic_planewave`.
        #[serde(default)]
        lambda: Option<f64>,
        /// Density and pressure pin location for `euler`.
        #[serde(default)]
        rho: Option<f64>,
        #[serde(default)]
        pin: Option<[f64; 2]>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Log a series row every this many steps (the last step is always logged).
    pub series_every: usize,
    /// VTK dump cadence in steps; 0 writes only the initial and final states.
    pub vtk_every: usize,
    pub vtk: bool,
    pub flush_every: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { series_every: 1, vtk_every: 0, vtk: true, flush_every: 100 }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            msg: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return bad(format!("final_time must be finite and non-negative, got {}", self.final_time));
        }
        match self.time {
            TimePolicy::Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => return bad(format!("dt must be positive, got {dt}")),
            TimePolicy::Cfl { cfl } if !(cfl > 0.0 && cfl.is_finite()) => return bad(format!("cfl must be positive, got {cfl}")),
            _ => {}
        }
        if let ScenarioSpec::Gaussian { sigma, .. } = self.scenario {
            if !(sigma > 0.0) {
                return bad(format!("sigma must be positive, got {sigma}"));
            }
            if self.system == System::Euler {
                return bad("euler runs need an exact scenario".into());
            }
        }
        if let ScenarioSpec::Exact { name, .. } = &self.scenario {
            let sol = crate::scenarios::ExactSolution::from_name(name)?;
            if sol.system() != self.system {
                return bad(format!("solution `{name}` belongs to system `{}`", sol.system().name()));
            }
        }
        Ok(())
    }

    /// Output directory, placed under `$CDG_OUTPUT_ROOT` when relative and the variable is set.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if self.output_dir.is_relative() => PathBuf::from(root).join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
system = "acoustics"
degree = 3
final_time = 1.0

[mesh]
kind = "structured"
nx = 30
ny = 30
bbox = [-0.5, 0.5, -0.5, 0.5]

[time]
policy = "fixed"
dt = 0.01

[scenario]
kind = "gaussian"
sigma = 0.05
p0 = 1.0
"#;

    #[test]
    fn parses_minimal_config() {
        let c = RunConfig::parse(EXAMPLE, Path::new("x.toml")).unwrap();
        assert_eq!(c.system, System::Acoustics);
        assert_eq!(c.time, TimePolicy::Fixed { dt: 0.01 });
        assert!(c.deterministic);
        assert_eq!(c.output, OutputSpec::default());
        assert_eq!(c.cg, CgConfig::default());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = EXAMPLE.replace("dt = 0.01", "dt = \"fast\"");
        match RunConfig::parse(&text, Path::new("x.toml")) {
            // internally tagged tables report the table header
            Err(Error::Parse { line, .. }) => assert_eq!(line, 12),
            other => panic!("{other:?}"),
        }
        let text = EXAMPLE.replace("degree = 3", "degree = 3\ncolour = 1");
        assert!(matches!(RunConfig::parse(&text, Path::new("x.toml")), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn semantic_checks() {
        let neg = EXAMPLE.replace("final_time = 1.0", "final_time = -1.0");
        assert!(matches!(RunConfig::parse(&neg, Path::new("x")), Err(Error::Config(_))));
        let sigma = EXAMPLE.replace("sigma = 0.05", "sigma = 0.0");
        assert!(matches!(RunConfig::parse(&sigma, Path::new("x")), Err(Error::Config(_))));
        let wrong = EXAMPLE.replace("kind = \"gaussian\"\nsigma = 0.05\np0 = 1.0", "kind = \"exact\"\nname = \"tgv2d\"");
        assert!(matches!(RunConfig::parse(&wrong, Path::new("x")), Err(Error::Config(_))));
    }

    #[test]
    fn steps_land_on_final_time() {
        assert_eq!(steps_to(1.0, 0.01), (100, 0.01));
        let (n, dt) = steps_to(2f64.sqrt(), 0.1);
        assert_eq!(n, 15);
        assert!((n as f64 * dt - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(steps_to(0.0, 0.1).0, 0);
    }

    #[test]
    fn cfl_policy() {
        let p = TimePolicy::Cfl { cfl: 0.5 };
        assert!((p.nominal_dt(0.3, 1, None) - 0.05).abs() < 1e-16);
        assert!((p.nominal_dt(0.3, 1, Some(2.0)) - 0.025).abs() < 1e-16);
    }
}
