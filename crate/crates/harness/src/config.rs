use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use splinewave_core::derham2d::BoundaryCondition;
use splinewave_core::geometry::{quarter_annulus, unit_square, Coefficient, GeometryMap};
use splinewave_core::solver::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Selftest,
    ConvergeSpace,
    ConvergeTime,
    Energy,
    ProjectDemo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Square,
    Annulus,
}

impl Geometry {
    pub fn map(&self) -> GeometryMap {
        match self {
            Geometry::Square => unit_square(),
            Geometry::Annulus => quarter_annulus(1.0, 2.0).expect("valid radii"),
        }
    }

    /// `c ≡ 1` on the square, `sin(2πx₁) sin(2πx₂) + 2` on the annulus.
    pub fn coefficient(&self) -> Coefficient {
        match self {
            Geometry::Square => Coefficient::Constant(1.0),
            Geometry::Annulus => Coefficient::SineProduct,
        }
    }
}

impl FromStr for Geometry {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(Geometry::Square),
            "annulus" => Ok(Geometry::Annulus),
            _ => bail!("unknown geometry '{s}' (expected square or annulus)"),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Square => "square",
            Geometry::Annulus => "annulus",
        })
    }
}

pub fn parse_bc(s: &str) -> Result<BoundaryCondition> {
    match s {
        "dirichlet" => Ok(BoundaryCondition::Dirichlet),
        "mixed" | "mixed-periodic" => Ok(BoundaryCondition::MixedPeriodic),
        _ => bail!("unknown boundary condition '{s}' (expected dirichlet or mixed)"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Qi,
    Galerkin,
    Both,
}

impl MethodChoice {
    pub fn methods(&self) -> Vec<Method> {
        match self {
            MethodChoice::Qi => vec![Method::QuasiInterpolation],
            MethodChoice::Galerkin => vec![Method::Galerkin],
            MethodChoice::Both => vec![Method::QuasiInterpolation, Method::Galerkin],
        }
    }
}

impl FromStr for MethodChoice {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qi" => Ok(MethodChoice::Qi),
            "galerkin" => Ok(MethodChoice::Galerkin),
            "both" => Ok(MethodChoice::Both),
            _ => bail!("unknown method '{s}' (expected qi, galerkin or both)"),
        }
    }
}

/// Size of the default settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Default,
    /// small meshes and short runs for CI
    Fast,
    /// full-size study settings
    Paper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub geometry: Geometry,
    pub bc: BoundaryCondition,
    pub degree: usize,
    /// elements per direction, strictly increasing
    pub meshes: Vec<usize>,
    /// time steps; convergence runs use the first one
    pub dt: Vec<f64>,
    pub dt_equals_h: bool,
    pub t_final: f64,
    pub method: MethodChoice,
    pub out: Option<PathBuf>,
    /// times at which the energy run also stores the full state
    pub checkpoints: Vec<f64>,
    pub dump_matrices: Option<PathBuf>,
    pub scale: Scale,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment, scale: Scale) -> Self {
        let mut cfg = Self {
            experiment,
            geometry: Geometry::Square,
            bc: BoundaryCondition::Dirichlet,
            degree: 3,
            meshes: vec![8, 16, 32, 64],
            dt: vec![5e-4],
            dt_equals_h: false,
            t_final: 0.25,
            method: MethodChoice::Both,
            out: None,
            checkpoints: Vec::new(),
            dump_matrices: None,
            scale,
        };
        match (experiment, scale) {
            (Experiment::ConvergeSpace, Scale::Fast) => {
                cfg.meshes = vec![4, 8, 16];
                cfg.dt = vec![1e-3];
                cfg.t_final = 0.05;
            }
            (Experiment::ConvergeSpace, Scale::Paper) => {
                cfg.geometry = Geometry::Annulus;
                cfg.t_final = 1.0;
            }
            (Experiment::ConvergeTime, _) => {
                cfg.dt_equals_h = true;
                cfg.dt = Vec::new();
                cfg.t_final = 1.0;
                match scale {
                    Scale::Fast => {
                        cfg.meshes = vec![4, 8, 16];
                        cfg.t_final = 0.5;
                    }
                    Scale::Paper => cfg.geometry = Geometry::Annulus,
                    Scale::Default => {}
                }
            }
            (Experiment::Energy, _) => {
                cfg.geometry = Geometry::Annulus;
                cfg.bc = BoundaryCondition::MixedPeriodic;
                cfg.meshes = vec![32];
                cfg.dt = vec![0.2, 0.01];
                cfg.t_final = if scale == Scale::Fast { 30.0 } else { 300.0 };
                cfg.method = MethodChoice::Qi;
            }
            (Experiment::ProjectDemo, _) => {
                cfg.geometry = Geometry::Annulus;
                cfg.bc = BoundaryCondition::MixedPeriodic;
                cfg.meshes = if scale == Scale::Fast { vec![4, 8, 16] } else { vec![4, 8, 16, 32] };
            }
            _ => {}
        }
        cfg
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "geometry" => self.geometry = value.parse()?,
            "bc" => self.bc = parse_bc(value)?,
            "degree" => self.degree = parse_num(key, value)?,
            "meshes" => self.meshes = parse_meshes(value)?,
            "dt" => {
                self.dt = parse_list(value, |s| parse_num("dt", s))?;
                self.dt_equals_h = false;
            }
            "dt_equals_h" | "dt-equals-h" => self.dt_equals_h = parse_bool(value)?,
            "T" | "t_final" => self.t_final = parse_num(key, value)?,
            "method" => self.method = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "checkpoints" => self.checkpoints = parse_list(value, |s| parse_num("checkpoints", s))?,
            "dump_matrices" | "dump-matrices" => self.dump_matrices = Some(PathBuf::from(value)),
            other => bail!("unknown configuration key '{other}'"),
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_str(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
            self.set(key, value).with_context(|| format!("line {}", n + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.degree) {
            bail!("degree must be 2 or 3, got {}", self.degree);
        }
        if self.meshes.is_empty() {
            bail!("mesh list is empty");
        }
        if self.meshes.windows(2).any(|w| w[1] <= w[0]) {
            bail!("mesh list must be strictly refining, got {:?}", self.meshes);
        }
        if let Some(&e) = self.meshes.iter().find(|&&e| e < self.degree) {
            bail!("a mesh with {e} elements is coarser than degree {}", self.degree);
        }
        if !self.dt_equals_h && self.experiment != Experiment::ProjectDemo {
            if self.dt.is_empty() {
                bail!("no time step given");
            }
            if let Some(k) = self.dt.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
                bail!("time step must be positive, got {k}");
            }
        }
        let t_ok = if self.experiment == Experiment::Energy { self.t_final >= 0.0 } else { self.t_final > 0.0 };
        if !(t_ok && self.t_final.is_finite()) {
            bail!("final time must be positive, got {}", self.t_final);
        }
        Ok(())
    }

    /// `k` of a run on `e` elements.
    pub fn time_step(&self, e: usize) -> f64 {
        if self.dt_equals_h {
            1.0 / e as f64
        } else {
            self.dt[0]
        }
    }
}

fn parse_num<T: FromStr>(key: &str, s: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| anyhow!("invalid value '{s}' for {key}: {e}"))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => bail!("invalid boolean '{s}'"),
    }
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(f).collect()
}

/// Mesh lists accept element counts (`8`) or widths (`1/8`).
pub fn parse_meshes(s: &str) -> Result<Vec<usize>> {
    parse_list(s, |item| {
        if let Some(den) = item.strip_prefix("1/") {
            parse_num("meshes", den)
        } else if item.contains('.') {
            let h: f64 = parse_num("meshes", item)?;
            let e = (1.0 / h).round();
            if h <= 0.0 || (e * h - 1.0).abs() > 1e-9 {
                bail!("mesh width {item} does not divide the unit interval");
            }
            Ok(e as usize)
        } else {
            parse_num("meshes", item)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mesh_lists() {
        assert_eq!(parse_meshes("8,16, 32").unwrap(), vec![8, 16, 32]);
        assert_eq!(parse_meshes("1/8,1/16").unwrap(), vec![8, 16]);
        assert_eq!(parse_meshes("0.125,0.0625").unwrap(), vec![8, 16]);
        assert!(parse_meshes("0.3").is_err());
    }

    #[test]
    fn config_file_overrides() {
        let mut cfg = ExperimentConfig::defaults(Experiment::ConvergeSpace, Scale::Default);
        cfg.apply_str("# comment\ngeometry = annulus\nmeshes = 4,8\ndt = 0.01\nT = 0.5\nmethod = qi\n").unwrap();
        assert_eq!(cfg.geometry, Geometry::Annulus);
        assert_eq!(cfg.meshes, vec![4, 8]);
        assert_eq!(cfg.dt, vec![0.01]);
        assert_eq!(cfg.t_final, 0.5);
        assert_eq!(cfg.method, MethodChoice::Qi);
        cfg.validate().unwrap();
        assert!(cfg.apply_str("colour = red").is_err());
        assert!(cfg.apply_str("just words").is_err());
    }

    #[test]
    fn validation_errors() {
        let base = ExperimentConfig::defaults(Experiment::ConvergeSpace, Scale::Default);
        let mut c = base.clone();
        c.meshes = vec![16, 8];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.dt = vec![-1.0];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.t_final = 0.0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.degree = 4;
        assert!(c.validate().is_err());
        let mut e = ExperimentConfig::defaults(Experiment::Energy, Scale::Default);
        e.t_final = 0.0;
        e.validate().unwrap();
    }
}
