use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use splinewave::config::{parse_bc, parse_meshes, Experiment, ExperimentConfig, Scale};
use splinewave::experiments::{self, max_drift, ENERGY_DRIFT_TOL};
use splinewave::output;
use splinewave::selftest::{format_report, run_selftest, SelftestOptions};

#[derive(Parser)]
#[command(name = "splinewave", version, about = "Energy-conserving spline discretization of the acoustic wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant checks
    Selftest {
        /// Perturb one dual functional weight (negative control)
        #[arg(long, hide = true)]
        perturb_dual_weight: Option<f64>,
    },
    /// Refine the mesh at fixed time step
    ConvergeSpace(Options),
    /// Refine mesh and time step together
    ConvergeTime(Options),
    /// Long run recording the discrete energy
    Energy(Options),
    /// Projection errors and commutation residuals of smooth fields
    ProjectDemo(Options),
}

#[derive(Args, Clone, Default)]
struct Options {
    /// key = value configuration file, applied before the other flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// square or annulus
    #[arg(long)]
    geometry: Option<String>,
    /// dirichlet or mixed
    #[arg(long)]
    bc: Option<String>,
    /// spline degree, 2 or 3
    #[arg(long)]
    degree: Option<usize>,
    /// comma-separated element counts or widths, e.g. 8,16,32 or 1/8,1/16
    #[arg(long)]
    meshes: Option<String>,
    /// time step (comma-separated list for energy runs)
    #[arg(long)]
    dt: Option<String>,
    /// use k = h on every mesh
    #[arg(long)]
    dt_equals_h: bool,
    /// final time
    #[arg(long = "T")]
    t_final: Option<f64>,
    /// qi, galerkin or both
    #[arg(long)]
    method: Option<String>,
    /// CSV output path (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// full-size study settings (annulus, long runs)
    #[arg(long, conflicts_with = "fast")]
    paper: bool,
    /// small settings for quick checks
    #[arg(long)]
    fast: bool,
    /// write the assembled matrices of the first mesh into this directory
    #[arg(long)]
    dump_matrices: Option<PathBuf>,
}

impl Options {
    fn config(&self, experiment: Experiment) -> Result<ExperimentConfig> {
        let scale = if self.paper {
            Scale::Paper
        } else if self.fast {
            Scale::Fast
        } else {
            Scale::Default
        };
        let mut cfg = ExperimentConfig::defaults(experiment, scale);
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(g) = &self.geometry {
            cfg.geometry = g.parse()?;
        }
        if let Some(bc) = &self.bc {
            cfg.bc = parse_bc(bc)?;
        }
        if let Some(p) = self.degree {
            cfg.degree = p;
        }
        if let Some(m) = &self.meshes {
            cfg.meshes = parse_meshes(m)?;
        }
        if let Some(dt) = &self.dt {
            cfg.set("dt", dt)?;
        }
        if self.dt_equals_h {
            cfg.dt_equals_h = true;
        }
        if let Some(t) = self.t_final {
            cfg.t_final = t;
        }
        if let Some(m) = &self.method {
            cfg.method = m.parse()?;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(d) = &self.dump_matrices {
            cfg.dump_matrices = Some(d.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(cfg: &ExperimentConfig, text: &str, plot: impl Fn(&std::path::Path) -> String) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            let script = output::write_with_plot(path, text, plot).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {} and {}", path.display(), script.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn dump(cfg: &ExperimentConfig) -> Result<()> {
    if let Some(dir) = &cfg.dump_matrices {
        let sys = experiments::build_system(cfg, cfg.meshes[0])?;
        sys.dump(dir).with_context(|| format!("writing matrices to {}", dir.display()))?;
        eprintln!("wrote matrices of the {}-element mesh to {}", cfg.meshes[0], dir.display());
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Selftest { perturb_dual_weight } => {
            let checks = run_selftest(SelftestOptions { dual_weight_perturbation: perturb_dual_weight })?;
            print!("{}", format_report(&checks));
            Ok(checks.iter().all(|c| c.passed()))
        }
        Command::ConvergeSpace(o) => {
            let cfg = o.config(Experiment::ConvergeSpace)?;
            dump(&cfg)?;
            let rows = experiments::run_converge_space(&cfg)?;
            emit(&cfg, &output::results_csv(&rows), output::convergence_plot)?;
            Ok(true)
        }
        Command::ConvergeTime(o) => {
            let cfg = o.config(Experiment::ConvergeTime)?;
            dump(&cfg)?;
            let rows = experiments::run_converge_time(&cfg)?;
            emit(&cfg, &output::results_csv(&rows), output::convergence_plot)?;
            Ok(true)
        }
        Command::Energy(o) => {
            let cfg = o.config(Experiment::Energy)?;
            dump(&cfg)?;
            let (rows, checkpoints) = experiments::run_energy(&cfg)?;
            emit(&cfg, &output::energy_csv(&rows), output::energy_plot)?;
            if let Some(out) = &cfg.out {
                for c in &checkpoints {
                    let name = format!("{}_{}_k{}_t{}.csv", out.file_stem().unwrap_or_default().to_string_lossy(), c.method.name(), c.k, c.t);
                    let path = out.with_file_name(name);
                    std::fs::write(&path, output::checkpoint_csv(c))?;
                }
            }
            let drift = max_drift(&rows);
            eprintln!("max relative energy drift {drift:.3e} (limit {ENERGY_DRIFT_TOL:.0e})");
            Ok(drift <= ENERGY_DRIFT_TOL)
        }
        Command::ProjectDemo(o) => {
            let cfg = o.config(Experiment::ProjectDemo)?;
            dump(&cfg)?;
            let rows = experiments::run_project_demo(&cfg)?;
            emit(&cfg, &output::projection_csv(&rows), output::projection_plot)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
