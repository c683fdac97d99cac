//! Invariant checks run by `splinewave selftest`.
//!
//! The measurement functions are public so the acceptance suite can reuse them.

use std::f64::consts::PI;
use std::fmt;

use anyhow::Result;
use splinewave_core::assembly::{
    assemble_coupling, assemble_divergence_stiffness, assemble_pressure_mass, assemble_theta_by_projection,
    QuadratureRule, SystemMatrices,
};
use splinewave_core::derham2d::{BoundaryCondition, DeRhamPair};
use splinewave_core::geometry::{quarter_annulus, unit_square, Coefficient, GeometryMap, Point};
use splinewave_core::linalg::SparseMatrix;
use splinewave_core::quasi_interp::QuasiInterpolant1D;
use splinewave_core::reference::smallest_eigenvalues;
use splinewave_core::solver::{energy, Method, SolverState, Stepper};
use splinewave_core::splines1d::{KnotKind, SplineSpace1D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), measured, tolerance, bound: Bound::AtMost }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), measured, tolerance, bound: Bound::AtLeast }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.measured <= self.tolerance,
            Bound::AtLeast => self.measured >= self.tolerance,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.bound == Bound::AtMost { "<=" } else { ">=" };
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {:<52} {:>12.4e} {op} {:.1e}", self.name, self.measured, self.tolerance)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SelftestOptions {
    /// Added to the largest weight of one dual functional (negative control).
    pub dual_weight_perturbation: Option<f64>,
}

fn kind_name(kind: KnotKind) -> &'static str {
    match kind {
        KnotKind::Open => "open",
        KnotKind::Periodic => "periodic",
    }
}

/// `max |λᵢ(Bⱼ) − δᵢⱼ|`, optionally with one perturbed dual functional.
pub fn duality_error(p: usize, kind: KnotKind, e: usize, perturbation: Option<f64>) -> Result<f64> {
    let space = SplineSpace1D::uniform(p, e, kind)?;
    let mut qi = QuasiInterpolant1D::new(&space)?;
    if let Some(delta) = perturbation {
        qi = qi.with_weight_perturbation(space.dim() / 2, delta);
    }
    let grid = qi.grid();
    let mut table = vec![vec![0.0; grid.eta_len()]; space.dim()];
    for (j, x) in grid.eta_nodes().into_iter().enumerate() {
        for (i, v) in space.eval_basis(x)? {
            table[i][j] += v;
        }
    }
    let mut worst = 0.0f64;
    for i in 0..space.dim() {
        for (j, samples) in table.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((qi.dual_functional(i, samples) - target).abs());
        }
    }
    Ok(worst)
}

/// Largest coefficient error of projecting a fixed spline back onto its own space.
pub fn reproduction_error(p: usize, kind: KnotKind, e: usize) -> Result<f64> {
    let space = SplineSpace1D::uniform(p, e, kind)?;
    let qi = QuasiInterpolant1D::new(&space)?;
    let coeffs: Vec<f64> = (0..space.dim()).map(|i| (1.7 * i as f64 + 0.3).sin() + 0.1 * i as f64).collect();
    let projected = qi.project(|x| space.eval(&coeffs, x));
    Ok(coeffs.iter().zip(&projected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// A piecewise-cubic function in one direction with its derivative.
struct Cubic {
    space: Option<(SplineSpace1D, Vec<f64>)>,
    poly: [f64; 4],
}

impl Cubic {
    fn new(periodic: bool, e: usize, seed: f64) -> Result<Self> {
        let poly = [0.5 + seed, -1.0, 0.7 * seed, 1.3];
        let space = if periodic {
            let s = SplineSpace1D::uniform(3, e, KnotKind::Periodic)?;
            let c = (0..s.dim()).map(|i| (seed + 2.1 * i as f64).cos()).collect();
            Some((s, c))
        } else {
            None
        };
        Ok(Self { space, poly })
    }

    fn value(&self, x: f64) -> f64 {
        match &self.space {
            Some((s, c)) => s.eval(c, x),
            None => self.poly[0] + x * (self.poly[1] + x * (self.poly[2] + x * self.poly[3])),
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match &self.space {
            Some((s, c)) => s.eval_derivative(c, x),
            None => self.poly[1] + x * (2.0 * self.poly[2] + 3.0 * x * self.poly[3]),
        }
    }
}

/// `‖D Π¹(ĉf) − Π²(div(ĉf))‖_∞` over coefficients for `ĉ = 2 + ξ₁` and a piecewise-cubic `ĉf`.
pub fn commutation_residual_cubic(p: usize, e: usize, bc: BoundaryCondition) -> Result<f64> {
    let pair = DeRhamPair::new((p, p), (e, e), bc)?;
    let periodic = bc.periodic_second_direction();
    let s = Cubic::new(periodic, e, 0.4)?;
    let t = Cubic::new(periodic, e, 1.1)?;
    // f = (a(ξ₁) s(ξ₂), b(ξ₁) t(ξ₂)) with quadratics a, b, so ĉf is cubic in ξ₁
    let a = |x: f64| 1.0 - x + 0.5 * x * x;
    let da = |x: f64| -1.0 + x;
    let b = |x: f64| 0.3 + 2.0 * x * x;
    let g = |xi: Point| {
        let c = 2.0 + xi[0];
        [c * a(xi[0]) * s.value(xi[1]), c * b(xi[0]) * t.value(xi[1])]
    };
    let div = |xi: Point| {
        let c = 2.0 + xi[0];
        (a(xi[0]) + c * da(xi[0])) * s.value(xi[1]) + c * b(xi[0]) * t.derivative(xi[1])
    };
    let lhs = pair.divergence_matrix().mul_vec(&pair.project_pi1(g).coeffs);
    let rhs = pair.project_pi2(div).coeffs;
    Ok(lhs.iter().zip(&rhs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Smooth coefficient and field used by [`commutation_mismatch_smooth`].
fn smooth_inputs(map: &GeometryMap) -> (impl Fn(Point) -> Point + '_, impl Fn(Point) -> f64 + '_) {
    let c = Coefficient::SineProduct;
    let f = |xi: Point| [(PI * xi[0]).sin() * (2.0 * PI * xi[1]).cos() + xi[0], (1.5 * xi[0]).exp() * (2.0 * PI * xi[1]).sin()];
    let g = move |xi: Point| {
        let ch = c.parametric_value(map, xi);
        let v = f(xi);
        [ch * v[0], ch * v[1]]
    };
    let div = move |xi: Point| {
        let ch = c.parametric_value(map, xi);
        let gr = c.parametric_gradient(map, xi);
        let v = f(xi);
        let dv = PI * (PI * xi[0]).cos() * (2.0 * PI * xi[1]).cos()
            + 1.0
            + 2.0 * PI * (1.5 * xi[0]).exp() * (2.0 * PI * xi[1]).cos();
        gr[0] * v[0] + gr[1] * v[1] + ch * dv
    };
    (g, div)
}

/// Parametric `L²` norm of `D Π¹(ĉf) − Π²(div(ĉf))` for smooth `ĉ` and `f` on the annulus.
pub fn commutation_mismatch_smooth(p: usize, e: usize, bc: BoundaryCondition) -> Result<f64> {
    let map = quarter_annulus(1.0, 2.0)?;
    let pair = DeRhamPair::new((p, p), (e, e), bc)?;
    let (g, div) = smooth_inputs(&map);
    let lhs = pair.divergence_matrix().mul_vec(&pair.project_pi1(g).coeffs);
    let rhs = pair.project_pi2(div).coeffs;
    let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(x, y)| x - y).collect();
    let m2 = assemble_pressure_mass(&pair, &unit_square(), &QuadratureRule::for_pair(&pair));
    Ok(m2.quadratic_form(&diff).max(0.0).sqrt())
}

/// Direct quadrature of `A` and `B` against `DᵀM₂D` and `DᵀM₂`.
pub fn structural_identity_errors(p: (usize, usize), e: (usize, usize), map: GeometryMap) -> Result<(f64, f64)> {
    let pair = DeRhamPair::new(p, e, BoundaryCondition::Dirichlet)?;
    let sys = SystemMatrices::new(pair, map, Coefficient::Constant(1.0))?;
    let a = assemble_divergence_stiffness(&sys.pair, &map, &sys.rule);
    let b = assemble_coupling(&sys.pair, &map, &Coefficient::Constant(1.0), &sys.rule);
    Ok((sys.a().add_scaled(1.0, &a, -1.0).max_abs(), sys.b().add_scaled(1.0, &b, -1.0).max_abs()))
}

/// `max |Θ − I|` when `c ≡ 1`, with Θ from the projection sweep.
pub fn theta_identity_error(p: usize, e: usize, bc: BoundaryCondition, map: GeometryMap) -> Result<f64> {
    let pair = DeRhamPair::new((p, p), (e, e), bc)?;
    let theta = assemble_theta_by_projection(&pair, &map, &Coefficient::Constant(1.0));
    Ok(theta.add_scaled(1.0, &SparseMatrix::identity(pair.x1_dim()), -1.0).max_abs())
}

fn seeded_state(sys: &SystemMatrices) -> SolverState {
    let mut s = SolverState::zeros(sys);
    for (i, x) in s.v.iter_mut().enumerate() {
        *x = (0.37 * i as f64).sin();
    }
    for (i, x) in s.phi.iter_mut().enumerate() {
        *x = (0.91 * i as f64 + 0.2).cos();
    }
    s
}

/// Largest coefficient difference between the two schemes on the unit square with `c ≡ 1`.
pub fn scheme_equivalence_error(e: usize, k: f64, steps: usize) -> Result<f64> {
    let pair = DeRhamPair::new((3, 3), (e, e), BoundaryCondition::Dirichlet)?;
    let sys = SystemMatrices::new(pair, unit_square(), Coefficient::Constant(1.0))?;
    let qi = Stepper::new(&sys, Method::QuasiInterpolation, k)?;
    let ga = Stepper::new(&sys, Method::Galerkin, k)?;
    let mut a = seeded_state(&sys);
    let mut b = a.clone();
    let mut worst = 0.0f64;
    for _ in 0..steps {
        qi.step(&mut a)?;
        ga.step(&mut b)?;
        let d = a.v.iter().zip(&b.v).chain(a.phi.iter().zip(&b.phi)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Largest per-step relative energy change of `method` on the annulus with variable `c`.
pub fn per_step_energy_change(method: Method, bc: BoundaryCondition, e: usize, k: f64, steps: usize) -> Result<f64> {
    let pair = DeRhamPair::new((3, 3), (e, e), bc)?;
    let sys = SystemMatrices::new(pair, quarter_annulus(1.0, 2.0)?, Coefficient::SineProduct)?;
    let stepper = Stepper::new(&sys, method, k)?;
    let mut s = seeded_state(&sys);
    let e0 = energy(&sys, &s);
    let mut prev = e0;
    let mut worst = 0.0f64;
    for _ in 0..steps {
        stepper.step(&mut s)?;
        let en = energy(&sys, &s);
        worst = worst.max((en - prev).abs() / e0);
        prev = en;
    }
    Ok(worst)
}

/// Runs every invariant check.
pub fn run_selftest(opts: SelftestOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for p in [2, 3] {
        for kind in [KnotKind::Open, KnotKind::Periodic] {
            for e in [8, 16, 32] {
                let tag = format!("p={p} {} e={e}", kind_name(kind));
                checks.push(Check::at_most(
                    format!("dual functional duality {tag}"),
                    duality_error(p, kind, e, opts.dual_weight_perturbation)?,
                    1e-11,
                ));
                checks.push(Check::at_most(format!("spline reproduction {tag}"), reproduction_error(p, kind, e)?, 1e-11));
            }
        }
    }
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::MixedPeriodic] {
        let bcn = if bc == BoundaryCondition::Dirichlet { "dirichlet" } else { "mixed" };
        for e in [4, 8, 16] {
            checks.push(Check::at_most(
                format!("commutation residual cubic p=3 {bcn} e={e}"),
                commutation_residual_cubic(3, e, bc)?,
                1e-9,
            ));
        }
        let m: Vec<f64> = [4, 8, 16, 32].iter().map(|&e| commutation_mismatch_smooth(3, e, bc)).collect::<Result<_>>()?;
        for (i, w) in m.windows(2).enumerate() {
            checks.push(Check::at_least(format!("commutation decay order {bcn} e={}", 8 << i), (w[0] / w[1]).log2(), 3.5));
        }
    }
    let (ea, eb) = structural_identity_errors((2, 2), (3, 3), quarter_annulus(1.0, 2.0)?)?;
    checks.push(Check::at_most("A = DᵀM₂D against quadrature", ea, 1e-10));
    checks.push(Check::at_most("B = DᵀM₂ against quadrature", eb, 1e-10));
    checks.push(Check::at_most(
        "Θ = I for unit coefficient",
        theta_identity_error(3, 6, BoundaryCondition::MixedPeriodic, quarter_annulus(1.0, 2.0)?)?,
        1e-12,
    ));
    checks.push(Check::at_most("QI and Galerkin agree for Θ = I", scheme_equivalence_error(6, 0.01, 50)?, 1e-10));
    for method in [Method::QuasiInterpolation, Method::Galerkin] {
        checks.push(Check::at_most(
            format!("per-step energy change {}", method.name()),
            per_step_energy_change(method, BoundaryCondition::MixedPeriodic, 6, 0.05, 200)?,
            1e-11,
        ));
    }
    let lam = smallest_eigenvalues(&unit_square(), &Coefficient::Constant(1.0), BoundaryCondition::Dirichlet, 4, (3, 3), (16, 16))?;
    let exact = 8.0 * PI * PI;
    checks.push(Check::at_most("fourth eigenvalue on the unit square", (lam[3] - exact).abs() / exact, 1e-3));
    Ok(checks)
}

pub fn format_report(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        s.push_str(&c.to_string());
        s.push('\n');
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    s.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    s
}
