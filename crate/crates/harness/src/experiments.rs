use std::f64::consts::PI;
use std::time::Instant;

use anyhow::{bail, Result};
use splinewave_core::assembly::{QuadratureRule, SystemMatrices};
use splinewave_core::derham2d::{BoundaryCondition, DeRhamPair};
use splinewave_core::geometry::Point;
use splinewave_core::reference::{analytic_mode, discrete_eigen_reference, StandingWave};
use splinewave_core::solver::{energy, run, Method, RunOptions, SolverState, Stepper};

use crate::config::{ExperimentConfig, Geometry};

/// Eigenfunction index of the reference standing wave.
pub const REFERENCE_EIGEN_INDEX: usize = 4;
/// Degree and mesh of the spline eigenreference used for error measurements.
pub const REFERENCE_DEGREE: (usize, usize) = (4, 4);
pub const REFERENCE_ELEMENTS: (usize, usize) = (64, 64);
/// Coarser eigenreference for energy runs, where only the initial data matters.
pub const ENERGY_REFERENCE_ELEMENTS: (usize, usize) = (32, 32);
/// Gauss points per direction in the error quadrature.
pub const ERROR_QUADRATURE: usize = 6;
/// Largest relative energy drift an energy run accepts.
pub const ENERGY_DRIFT_TOL: f64 = 1e-10;

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub h: f64,
    pub k: f64,
    pub err_v_inf2: f64,
    pub err_phi_inf2: f64,
    pub err_v_22: f64,
    pub err_phi_22: f64,
    /// `sup_n` of the combined energy-norm error, used for the order column
    pub err_energy_inf: f64,
    /// pairwise `log₂` rate against the previous row of the same method
    pub order: Option<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyRow {
    pub method: Method,
    pub k: f64,
    pub t: f64,
    pub energy: f64,
    pub rel_drift: f64,
}

/// Full coefficient state stored at a requested time of an energy run.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub method: Method,
    pub k: f64,
    pub t: f64,
    pub state: SolverState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRow {
    pub h: f64,
    pub err_v: f64,
    pub err_phi: f64,
    /// `max |D Π¹(ĉf) − Π²(div(ĉf))|` over coefficients
    pub commutation: f64,
    pub order_v: Option<f64>,
    pub order_phi: Option<f64>,
}

pub fn build_system(cfg: &ExperimentConfig, e: usize) -> Result<SystemMatrices> {
    let pair = DeRhamPair::new((cfg.degree, cfg.degree), (e, e), cfg.bc)?;
    Ok(SystemMatrices::new(pair, cfg.geometry.map(), cfg.geometry.coefficient())?)
}

/// Mode (1,1) on the square, the fourth eigenfunction on the annulus.
pub fn build_reference(cfg: &ExperimentConfig, elements: (usize, usize)) -> Result<StandingWave> {
    match cfg.geometry {
        Geometry::Square => {
            if cfg.bc != BoundaryCondition::Dirichlet {
                bail!("the analytic reference on the square needs Dirichlet conditions");
            }
            Ok(analytic_mode(1, 1)?)
        }
        Geometry::Annulus => Ok(discrete_eigen_reference(
            cfg.geometry.map(),
            cfg.geometry.coefficient(),
            cfg.bc,
            REFERENCE_EIGEN_INDEX,
            REFERENCE_DEGREE,
            elements,
        )?),
    }
}

/// Number of steps of size `k` that reach `t` exactly.
pub fn step_count(t: f64, k: f64) -> Result<usize> {
    let n = (t / k).round();
    if (n * k - t).abs() > 1e-9 * t.max(k) {
        bail!("final time {t} is not a multiple of the time step {k}");
    }
    Ok(n as usize)
}

/// Fixed-`k` refinement study with an analytic or eigenfunction reference.
pub fn run_converge_space(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let reference = build_reference(cfg, REFERENCE_ELEMENTS)?;
    run_convergence(cfg, &reference)
}

/// Refinement study with `k = h` unless a fixed step is configured.
pub fn run_converge_time(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let reference = build_reference(cfg, REFERENCE_ELEMENTS)?;
    run_convergence(cfg, &reference)
}

/// Runs every configured method on every mesh against `reference`.
pub fn run_convergence(cfg: &ExperimentConfig, reference: &StandingWave) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for &e in &cfg.meshes {
        let sys = build_system(cfg, e)?;
        let k = cfg.time_step(e);
        let steps = step_count(cfg.t_final, k)?;
        for method in cfg.method.methods() {
            let start = Instant::now();
            let initial = reference.initial_state(&sys);
            let opts = RunOptions { k, steps, energy_stride: 0, error_quadrature: ERROR_QUADRATURE };
            let out = run(&sys, method, initial, Some(reference), opts)?;
            let err = out.errors.expect("errors tracked with a reference");
            rows.push(ResultRow {
                method,
                h: 1.0 / e as f64,
                k,
                err_v_inf2: err.v_inf2,
                err_phi_inf2: err.phi_inf2,
                err_v_22: err.v_22,
                err_phi_22: err.phi_22,
                err_energy_inf: err.energy_inf,
                order: None,
                wall_time_s: start.elapsed().as_secs_f64(),
            });
        }
    }
    sort_and_fill_orders(&mut rows);
    Ok(rows)
}

/// Sorts by method then from coarse to fine, and fills the pairwise orders.
pub fn sort_and_fill_orders(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| a.method.cmp(&b.method).then(b.h.total_cmp(&a.h)));
    for i in 0..rows.len() {
        rows[i].order = None;
        if i > 0 && rows[i - 1].method == rows[i].method {
            rows[i].order = Some(observed_order(
                rows[i - 1].err_energy_inf,
                rows[i].err_energy_inf,
                rows[i - 1].h / rows[i].h,
            ));
        }
    }
}

/// `log(e_coarse / e_fine) / log(ratio)`.
pub fn observed_order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

/// Long energy runs; the energy is recorded at every whole time unit.
pub fn run_energy(cfg: &ExperimentConfig) -> Result<(Vec<EnergyRow>, Vec<Checkpoint>)> {
    cfg.validate()?;
    let reference = build_reference(cfg, ENERGY_REFERENCE_ELEMENTS)?;
    let e = *cfg.meshes.last().expect("validated");
    let sys = build_system(cfg, e)?;
    let mut rows = Vec::new();
    let mut checkpoints = Vec::new();
    let steps_list: Vec<f64> = if cfg.dt_equals_h { vec![1.0 / e as f64] } else { cfg.dt.clone() };
    for method in cfg.method.methods() {
        for &k in &steps_list {
            let steps = step_count(cfg.t_final, k)?;
            let stride = ((1.0 / k).round() as usize).max(1);
            let stepper = Stepper::new(&sys, method, k)?;
            let mut state = reference.initial_state(&sys);
            let e0 = energy(&sys, &state);
            let record = |state: &SolverState, rows: &mut Vec<EnergyRow>| {
                let en = energy(&sys, state);
                let drift = if e0 == 0.0 { 0.0 } else { ((en - e0) / e0).abs() };
                rows.push(EnergyRow { method, k, t: state.time(k), energy: en, rel_drift: drift });
            };
            record(&state, &mut rows);
            let targets: Vec<usize> = cfg.checkpoints.iter().map(|t| (t / k).round() as usize).collect();
            if targets.contains(&0) {
                checkpoints.push(Checkpoint { method, k, t: 0.0, state: state.clone() });
            }
            for n in 1..=steps {
                stepper.step(&mut state)?;
                if n % stride == 0 || n == steps {
                    record(&state, &mut rows);
                }
                if targets.contains(&n) {
                    checkpoints.push(Checkpoint { method, k, t: state.time(k), state: state.clone() });
                }
            }
        }
    }
    Ok((rows, checkpoints))
}

/// Largest relative drift per `(method, k)` series.
pub fn max_drift(rows: &[EnergyRow]) -> f64 {
    rows.iter().map(|r| r.rel_drift).fold(0.0, f64::max)
}

/// Smooth parametric test fields, periodic in the second direction.
pub fn demo_velocity(xi: Point) -> Point {
    [
        (PI * xi[0]).sin() * (2.0 * PI * xi[1]).cos() + xi[0] * xi[0],
        (PI * xi[0]).cos() * (2.0 * PI * xi[1]).sin(),
    ]
}

pub fn demo_pressure(xi: Point) -> f64 {
    (xi[0] * 1.3).exp() * (2.0 * PI * xi[1]).cos()
}

/// Projection errors and commutation residuals of the parametric test fields.
pub fn run_project_demo(cfg: &ExperimentConfig) -> Result<Vec<ProjectionRow>> {
    cfg.validate()?;
    let map = cfg.geometry.map();
    let c = cfg.geometry.coefficient();
    let mut rows: Vec<ProjectionRow> = Vec::new();
    for &e in &cfg.meshes {
        let pair = DeRhamPair::new((cfg.degree, cfg.degree), (e, e), cfg.bc)?;
        let v = pair.project_pi1(demo_velocity);
        let p = pair.project_pi2(demo_pressure);
        let (mut ev, mut ep) = (0.0, 0.0);
        for (xi, w) in QuadratureRule::new(ERROR_QUADRATURE).mesh_points((e, e)) {
            let a = pair.eval_x1(&v.coeffs, xi);
            let b = demo_velocity(xi);
            ev += w * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2));
            ep += w * (pair.eval_x2(&p.coeffs, xi) - demo_pressure(xi)).powi(2);
        }
        let weighted = |xi: Point| {
            let f = demo_velocity(xi);
            let ch = c.parametric_value(&map, xi);
            [ch * f[0], ch * f[1]]
        };
        let divergence = |xi: Point| {
            let f = demo_velocity(xi);
            let ch = c.parametric_value(&map, xi);
            let g = c.parametric_gradient(&map, xi);
            let div_f = PI * (PI * xi[0]).cos() * (2.0 * PI * xi[1]).cos()
                + 2.0 * xi[0]
                + 2.0 * PI * (PI * xi[0]).cos() * (2.0 * PI * xi[1]).cos();
            g[0] * f[0] + g[1] * f[1] + ch * div_f
        };
        let lhs = pair.divergence_matrix().mul_vec(&pair.project_pi1(weighted).coeffs);
        let rhs = pair.project_pi2(divergence).coeffs;
        let commutation = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let (err_v, err_phi) = (ev.sqrt(), ep.sqrt());
        let h = 1.0 / e as f64;
        let prev = rows.last();
        rows.push(ProjectionRow {
            h,
            err_v,
            err_phi,
            commutation,
            order_v: prev.map(|r| observed_order(r.err_v, err_v, r.h / h)),
            order_phi: prev.map(|r| observed_order(r.err_phi, err_phi, r.h / h)),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Experiment, Scale};

    #[test]
    fn step_counts() {
        assert_eq!(step_count(1.0, 5e-4).unwrap(), 2000);
        assert_eq!(step_count(300.0, 0.01).unwrap(), 30000);
        assert_eq!(step_count(0.0, 0.2).unwrap(), 0);
        assert!(step_count(1.0, 0.3).is_err());
    }

    #[test]
    fn single_mesh_has_no_order() {
        let mut cfg = ExperimentConfig::defaults(Experiment::ConvergeSpace, Scale::Fast);
        cfg.meshes = vec![4];
        cfg.t_final = 0.01;
        cfg.dt = vec![5e-3];
        let rows = run_converge_space(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.order.is_none()));
    }

    #[test]
    fn orders_follow_each_method() {
        let row = |method, h: f64, err: f64| ResultRow {
            method,
            h,
            k: 0.1,
            err_v_inf2: 0.0,
            err_phi_inf2: 0.0,
            err_v_22: 0.0,
            err_phi_22: 0.0,
            err_energy_inf: err,
            order: None,
            wall_time_s: 0.0,
        };
        let mut rows = vec![
            row(Method::Galerkin, 0.25, 1.0),
            row(Method::QuasiInterpolation, 0.125, 0.125),
            row(Method::Galerkin, 0.5, 8.0),
            row(Method::QuasiInterpolation, 0.25, 1.0),
        ];
        sort_and_fill_orders(&mut rows);
        assert_eq!(rows[0].method, Method::QuasiInterpolation);
        assert_eq!(rows[0].order, None);
        assert!((rows[1].order.unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(rows[2].order, None);
        assert!((rows[3].order.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_length_energy_run() {
        let mut cfg = ExperimentConfig::defaults(Experiment::Energy, Scale::Fast);
        cfg.meshes = vec![4];
        cfg.t_final = 0.0;
        cfg.dt = vec![0.2];
        let (rows, _) = run_energy(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].rel_drift, 0.0);
    }
}
