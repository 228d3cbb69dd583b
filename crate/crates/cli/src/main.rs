//! `cdg`: configured runs, the operator property suite and convergence sweeps.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use compat_dg::config::{RunConfig, OUTPUT_ROOT_ENV};
use compat_dg::driver::{self, CflSpec, ConvergeOptions, VerifyOptions};
use compat_dg::mesh::read_mesh;
use compat_dg::scenarios::System;
use compat_dg::solvers::CgConfig;
use compat_dg::Error;

#[derive(Parser)]
#[command(name = "cdg", version, about = "Compatible DG/FEM solvers on periodic triangle meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` (and the output-root variable) from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the discrete vector calculus identities on random nodal data.
    Verify {
        #[arg(long, default_value_t = 20)]
        nx: usize,
        #[arg(long, default_value_t = 20)]
        ny: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 1709)]
        seed: u64,
        /// Random inputs per property.
        #[arg(long, default_value_t = 1)]
        samples: usize,
        /// Use this mesh file (made periodic) instead of the structured grid.
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
    /// Refinement study against an exact solution.
    Converge {
        /// acoustics, maxwellglm or euler.
        system: System,
        #[arg(long)]
        degree: usize,
        /// Elements per side, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [10, 20, 40])]
        levels: Vec<usize>,
        /// CFL number, or `h` for a CFL number equal to the grid spacing.
        #[arg(long, default_value = "0.5")]
        cfl: CflSpec,
        /// Directory for the CSV table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status for an error: 2 configuration, 3 solver, 4 IO, 1 anything else.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Config(_) | Error::UnknownSolution(_) | Error::UnsupportedDegree(..) => 2,
        Error::NotConverged { .. } | Error::NonFinite(_) => 3,
        Error::Io(_) => 4,
        _ => 1,
    }
}

fn output_root(dir: PathBuf) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if dir.is_relative() => PathBuf::from(root).join(dir),
        _ => dir,
    }
}

fn cmd_run(config: &Path, out: Option<PathBuf>) -> Result<u8, Error> {
    let cfg = RunConfig::load(config)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let out_dir = out.unwrap_or_else(|| cfg.resolved_output_dir());
    let rep = driver::run(&cfg, base, &out_dir)?;
    let s = &rep.summary;
    println!("steps                 {}", s.steps);
    println!("dt                    {:e}", s.dt);
    println!("relative energy drift {:e}", s.relative_energy_drift);
    println!("max eps_c             {:e}", s.max_eps_c);
    println!("max eps_d             {:e}", s.max_eps_d);
    println!("cg iterations         {}", s.total_cg_iterations);
    for (k, v) in &s.final_errors {
        println!("L2({k}){:pad$} {v:e}", "", pad = 17usize.saturating_sub(k.len() + 4));
    }
    println!("artifacts in {}", out_dir.display());
    Ok(0)
}

fn cmd_verify(opts: VerifyOptions, mesh: Option<PathBuf>) -> Result<u8, Error> {
    let rep = match mesh {
        Some(path) => {
            let mut m = read_mesh(&path)?;
            m.make_periodic(true, true)?;
            driver::verify_mesh(m, &opts)?
        }
        None => driver::verify(&opts)?,
    };
    print!("{rep}");
    if rep.passed() {
        return Ok(0);
    }
    for (name, v) in rep.failures() {
        eprintln!("property failed: {name} = {v:e} > {:e}", driver::VERIFY_TOLERANCE);
    }
    Ok(1)
}

fn cmd_converge(opts: ConvergeOptions, out: Option<PathBuf>) -> Result<u8, Error> {
    let rep = driver::converge(&opts)?;
    print!("{}", rep.table);
    let dir = output_root(out.unwrap_or_else(|| PathBuf::from("output")));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(format!("converge_{}_N{}.csv", opts.system.name(), opts.degree));
    std::fs::write(&path, rep.table.to_csv())?;
    println!("table written to {}", path.display());
    if rep.passed() {
        return Ok(0);
    }
    if rep.table.runs.len() < 2 {
        eprintln!("a convergence order needs at least two levels");
    }
    for (v, o) in rep.shortfalls() {
        eprintln!("order shortfall: O({v}) = {o:.3} < {:.1}", rep.required_order);
    }
    Ok(1)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out),
        Command::Verify { nx, ny, degree, seed, samples, mesh } => {
            cmd_verify(VerifyOptions { nx, ny, degree, seed, samples, ..Default::default() }, mesh)
        }
        Command::Converge { system, degree, levels, cfl, out } => {
            cmd_converge(ConvergeOptions { system, degree, levels, cfl, cg: CgConfig::default() }, out)
        }
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
