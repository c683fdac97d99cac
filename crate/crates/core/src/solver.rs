//! Crank–Nicolson time stepping for the quasi-interpolation scheme and the Galerkin baseline,
//! plus the energy and error functionals.

use crate::assembly::{QuadratureRule, SystemMatrices};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg::{axpy, norm2, SkylineLdl, SparseMatrix, SpdSolver};

/// Which semi-discrete scheme to advance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Weak velocity equation, collocated pressure update `φ_t = Π²(div(c v))`.
    QuasiInterpolation,
    /// Standard mixed Galerkin discretization.
    Galerkin,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::QuasiInterpolation => "qi",
            Method::Galerkin => "galerkin",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qi" => Ok(Method::QuasiInterpolation),
            "galerkin" => Ok(Method::Galerkin),
            _ => Err(Error::InvalidArgument(format!("unknown method '{s}'"))),
        }
    }
}

/// Velocity and pressure coefficients at step `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub v: Vec<f64>,
    pub phi: Vec<f64>,
    pub step: usize,
}

impl SolverState {
    pub fn zeros(sys: &SystemMatrices) -> Self {
        Self { v: vec![0.0; sys.pair.x1_dim()], phi: vec![0.0; sys.pair.x2_dim()], step: 0 }
    }

    pub fn time(&self, k: f64) -> f64 {
        self.step as f64 * k
    }
}

/// `½(vᵀMv + φᵀM₂φ)`.
pub fn energy(sys: &SystemMatrices, state: &SolverState) -> f64 {
    0.5 * (sys.m.quadratic_form(&state.v) + sys.m2.quadratic_form(&state.phi))
}

#[derive(Debug)]
enum Scheme {
    Qi {
        /// `G = DΘ`
        g: SparseMatrix,
        /// `Gᵀ M₂`
        gt_m2: SparseMatrix,
        system: SpdSolver,
    },
    Galerkin {
        coupling: SparseMatrix,
        /// `[M, k/2 C; k/2 Cᵀ, −M₂]`
        matrix: SparseMatrix,
        factor: SkylineLdl,
    },
}

/// A time stepper with its system factorized once.
#[derive(Debug)]
pub struct Stepper<'a> {
    sys: &'a SystemMatrices,
    method: Method,
    k: f64,
    scheme: Scheme,
}

impl<'a> Stepper<'a> {
    /// Builds and factorizes the step operator. `k` may be negative to step backwards.
    pub fn new(sys: &'a SystemMatrices, method: Method, k: f64) -> Result<Self> {
        if !(k.is_finite() && k != 0.0) {
            return Err(Error::InvalidArgument(format!("time step {k} must be finite and non-zero")));
        }
        let scheme = match method {
            Method::QuasiInterpolation => {
                let g = sys.d.matmul(sys.theta());
                let gt_m2 = g.transpose().matmul(&sys.m2);
                let s = sys.m.add_scaled(1.0, &gt_m2.matmul(&g), 0.25 * k * k);
                Scheme::Qi { g, gt_m2, system: SpdSolver::new(s)? }
            }
            Method::Galerkin => {
                let coupling = sys.coupling().clone();
                let half = coupling.scaled(0.5 * k);
                let half_t = half.transpose();
                let neg_m2 = sys.m2.scaled(-1.0);
                let matrix = SparseMatrix::block(&[
                    vec![Some(&sys.m), Some(&half)],
                    vec![Some(&half_t), Some(&neg_m2)],
                ]);
                let factor = SkylineLdl::factor(&matrix, false)?;
                Scheme::Galerkin { coupling, matrix, factor }
            }
        };
        Ok(Self { sys, method, k, scheme })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn time_step(&self) -> f64 {
        self.k
    }

    /// Advances `state` by one step.
    pub fn step(&self, state: &mut SolverState) -> Result<()> {
        let k = self.k;
        match &self.scheme {
            Scheme::Qi { g, gt_m2, system } => {
                // (M + k²/4 GᵀM₂G) v' = M v − k GᵀM₂ (φ + k/4 G v)
                let gv = g.mul_vec(&state.v);
                let mut w = state.phi.clone();
                axpy(0.25 * k, &gv, &mut w);
                let mut rhs = self.sys.m.mul_vec(&state.v);
                axpy(-k, &gt_m2.mul_vec(&w), &mut rhs);
                let v_new = system.solve(&rhs)?;
                // collocated update, no mass solve
                let gv_new = g.mul_vec(&v_new);
                for ((p, a), b) in state.phi.iter_mut().zip(&gv).zip(&gv_new) {
                    *p += 0.5 * k * (a + b);
                }
                state.v = v_new;
            }
            Scheme::Galerkin { coupling, matrix, factor } => {
                let n = state.v.len();
                let mut rhs = self.sys.m.mul_vec(&state.v);
                axpy(-0.5 * k, &coupling.mul_vec(&state.phi), &mut rhs);
                let mut lower = self.sys.m2.mul_vec(&state.phi);
                lower.iter_mut().for_each(|x| *x = -*x);
                axpy(-0.5 * k, &coupling.transpose_mul_vec(&state.v), &mut lower);
                rhs.extend(lower);
                let x = refined_solve(matrix, factor, &rhs)?;
                state.v.copy_from_slice(&x[..n]);
                state.phi.copy_from_slice(&x[n..]);
            }
        }
        state.step += 1;
        Ok(())
    }
}

/// Direct solve with one step of iterative refinement and the usual residual contract.
fn refined_solve(a: &SparseMatrix, factor: &SkylineLdl, b: &[f64]) -> Result<Vec<f64>> {
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; b.len()]);
    }
    let mut x = factor.solve(b);
    let residual = |x: &[f64]| -> Vec<f64> { b.iter().zip(a.mul_vec(x)).map(|(bi, ai)| bi - ai).collect() };
    let r = residual(&x);
    axpy(1.0, &factor.solve(&r), &mut x);
    let rel = norm2(&residual(&x)) / bnorm;
    if rel > crate::linalg::SOLVE_RESIDUAL_TOL {
        return Err(Error::SolveResidual { residual: rel, tolerance: crate::linalg::SOLVE_RESIDUAL_TOL });
    }
    Ok(x)
}

/// Physical velocity and pressure fields at a fixed set of quadrature points.
#[derive(Debug, Clone)]
pub struct FieldEvaluator {
    /// parametric points
    pub points: Vec<Point>,
    /// quadrature weight times `det DF`
    pub weights: Vec<f64>,
    velocity: [SparseMatrix; 2],
    pressure: SparseMatrix,
}

impl FieldEvaluator {
    /// Tabulates the push-forwards `DF v̂ / J` and `φ̂ / J` on a Gauss rule with `q` points per direction.
    pub fn new(sys: &SystemMatrices, q: usize) -> Self {
        let rule = QuadratureRule::new(q);
        let pts = rule.mesh_points(sys.pair.elements());
        let mut vt: [Vec<(usize, usize, f64)>; 2] = Default::default();
        let mut pt = Vec::new();
        let mut points = Vec::with_capacity(pts.len());
        let mut weights = Vec::with_capacity(pts.len());
        for (row, &(xi, w)) in pts.iter().enumerate() {
            let jac = sys.map.jacobian(xi);
            let det = crate::geometry::det(&jac);
            for c in 0..2 {
                let off = sys.pair.x1_offset(c);
                for (idx, b) in sys.pair.x1_component(c).basis_at(xi) {
                    for (r, t) in vt.iter_mut().enumerate() {
                        let val = jac[r][c] * b / det;
                        if val != 0.0 {
                            t.push((row, off + idx, val));
                        }
                    }
                }
            }
            for (idx, b) in sys.pair.x2_space().basis_at(xi) {
                pt.push((row, idx, b / det));
            }
            points.push(xi);
            weights.push(w * det);
        }
        let n = pts.len();
        let velocity = [
            SparseMatrix::from_triplets(n, sys.pair.x1_dim(), &vt[0]),
            SparseMatrix::from_triplets(n, sys.pair.x1_dim(), &vt[1]),
        ];
        let pressure = SparseMatrix::from_triplets(n, sys.pair.x2_dim(), &pt);
        Self { points, weights, velocity, pressure }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn velocity(&self, v: &[f64]) -> Vec<Point> {
        let a = self.velocity[0].mul_vec(v);
        let b = self.velocity[1].mul_vec(v);
        a.into_iter().zip(b).map(|(x, y)| [x, y]).collect()
    }

    pub fn pressure(&self, phi: &[f64]) -> Vec<f64> {
        self.pressure.mul_vec(phi)
    }

    /// `(‖v_h − v‖_{L²}, ‖φ_h − φ‖_{L²})` against exact values at the points.
    pub fn l2_errors(&self, state: &SolverState, exact_v: &[Point], exact_phi: &[f64]) -> (f64, f64) {
        let vh = self.velocity(&state.v);
        let ph = self.pressure(&state.phi);
        let (mut ev, mut ep) = (0.0, 0.0);
        for i in 0..self.len() {
            let w = self.weights[i];
            let dx = vh[i][0] - exact_v[i][0];
            let dy = vh[i][1] - exact_v[i][1];
            ev += w * (dx * dx + dy * dy);
            let d = ph[i] - exact_phi[i];
            ep += w * d * d;
        }
        (ev.sqrt(), ep.sqrt())
    }
}

/// Space-time error norms of one run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErrorNorms {
    /// `sup_n ‖v − v_h‖_{L²}`
    pub v_inf2: f64,
    pub phi_inf2: f64,
    /// trapezoidal `L²`-in-time of `‖v − v_h‖_{L²}`
    pub v_22: f64,
    pub phi_22: f64,
    /// `sup_n (‖v − v_h‖² + ‖φ − φ_h‖²)^{1/2}`
    pub energy_inf: f64,
}

/// Accumulates the error norms from per-step `L²` errors.
#[derive(Debug, Clone)]
pub struct ErrorAccumulator {
    k: f64,
    norms: ErrorNorms,
    sum_v: f64,
    sum_phi: f64,
    previous: Option<(f64, f64)>,
}

impl ErrorAccumulator {
    pub fn new(k: f64) -> Self {
        Self { k: k.abs(), norms: ErrorNorms::default(), sum_v: 0.0, sum_phi: 0.0, previous: None }
    }

    /// Records the errors at the next time level.
    pub fn push(&mut self, ev: f64, ep: f64) {
        let n = &mut self.norms;
        n.v_inf2 = n.v_inf2.max(ev);
        n.phi_inf2 = n.phi_inf2.max(ep);
        n.energy_inf = n.energy_inf.max((ev * ev + ep * ep).sqrt());
        if let Some((pv, pp)) = self.previous {
            self.sum_v += pv * pv + ev * ev;
            self.sum_phi += pp * pp + ep * ep;
        }
        self.previous = Some((ev, ep));
    }

    pub fn finish(&self) -> ErrorNorms {
        let mut n = self.norms;
        n.v_22 = (0.5 * self.k * self.sum_v).sqrt();
        n.phi_22 = (0.5 * self.k * self.sum_phi).sqrt();
        n
    }
}

/// Separable exact solution sampled at fixed points: `v(t) = a(t) V`, `φ(t) = b(t) Φ`.
pub trait ExactSolution {
    /// Time factors `(a(t), b(t))`.
    fn time_factors(&self, t: f64) -> (f64, f64);
    /// Spatial profiles at parametric points.
    fn profiles(&self, points: &[Point]) -> (Vec<Point>, Vec<f64>);
}

/// Outcome of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: SolverState,
    pub errors: Option<ErrorNorms>,
    /// `(t, E)` recorded every `energy_stride` steps and at the final step
    pub energy: Vec<(f64, f64)>,
}

/// Options of [`run`].
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub k: f64,
    pub steps: usize,
    /// record the energy every this many steps (0: only at the ends)
    pub energy_stride: usize,
    /// Gauss points per direction for error quadrature
    pub error_quadrature: usize,
}

/// Advances `initial` for `steps` steps, tracking energy and, with an exact solution, the error norms.
pub fn run(
    sys: &SystemMatrices,
    method: Method,
    initial: SolverState,
    exact: Option<&dyn ExactSolution>,
    opts: RunOptions,
) -> Result<RunOutput> {
    let stepper = Stepper::new(sys, method, opts.k)?;
    let mut state = initial;
    let tracker = exact.map(|ex| {
        let eval = FieldEvaluator::new(sys, opts.error_quadrature);
        let (vp, pp) = ex.profiles(&eval.points);
        (ex, eval, vp, pp)
    });
    let mut acc = ErrorAccumulator::new(opts.k);
    let record = |state: &SolverState, acc: &mut ErrorAccumulator| {
        if let Some((ex, eval, vp, pp)) = &tracker {
            let (a, b) = ex.time_factors(state.time(opts.k));
            let v: Vec<Point> = vp.iter().map(|p| [a * p[0], a * p[1]]).collect();
            let phi: Vec<f64> = pp.iter().map(|p| b * p).collect();
            let (ev, ep) = eval.l2_errors(state, &v, &phi);
            acc.push(ev, ep);
        }
    };
    let mut energies = vec![(state.time(opts.k), energy(sys, &state))];
    record(&state, &mut acc);
    for n in 1..=opts.steps {
        stepper.step(&mut state)?;
        record(&state, &mut acc);
        if n == opts.steps || (opts.energy_stride > 0 && n % opts.energy_stride == 0) {
            energies.push((state.time(opts.k), energy(sys, &state)));
        }
    }
    Ok(RunOutput { state, errors: tracker.map(|_| acc.finish()), energy: energies })
}

/// `max_n |E_n − E_0| / |E_0|` of an energy history.
pub fn max_relative_drift(energy: &[(f64, f64)]) -> f64 {
    let Some(&(_, e0)) = energy.first() else { return 0.0 };
    if e0 == 0.0 {
        return 0.0;
    }
    energy.iter().map(|&(_, e)| ((e - e0) / e0).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derham2d::{build_spaces, BoundaryCondition};
    use crate::geometry::{quarter_annulus, unit_square, Coefficient, GeometryMap};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn system(map: GeometryMap, c: Coefficient, bc: BoundaryCondition, e: usize) -> SystemMatrices {
        SystemMatrices::new(build_spaces((3, 3), (e, e), bc).unwrap(), map, c).unwrap()
    }

    fn random_state(sys: &SystemMatrices, seed: u64) -> SolverState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = SolverState::zeros(sys);
        s.v.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
        s.phi.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
        s
    }

    #[test]
    fn zero_data_stays_zero() {
        let sys = system(unit_square(), Coefficient::Constant(1.0), BoundaryCondition::Dirichlet, 4);
        for method in [Method::QuasiInterpolation, Method::Galerkin] {
            let st = Stepper::new(&sys, method, 0.1).unwrap();
            let mut s = SolverState::zeros(&sys);
            for _ in 0..5 {
                st.step(&mut s).unwrap();
            }
            assert!(s.v.iter().chain(&s.phi).all(|x| *x == 0.0));
        }
    }

    #[test]
    fn unit_pressure_energy_is_half() {
        let sys = system(unit_square(), Coefficient::Constant(1.0), BoundaryCondition::Dirichlet, 5);
        let mut s = SolverState::zeros(&sys);
        s.phi = sys.pair.project_pi2(|_| 1.0).coeffs;
        assert!((energy(&sys, &s) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn per_step_energy_identity() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::MixedPeriodic] {
            let sys = system(quarter_annulus(1.0, 2.0).unwrap(), Coefficient::SineProduct, bc, 5);
            for method in [Method::QuasiInterpolation, Method::Galerkin] {
                let st = Stepper::new(&sys, method, 0.05).unwrap();
                let mut s = random_state(&sys, 3);
                let e0 = energy(&sys, &s);
                let mut prev = e0;
                for _ in 0..200 {
                    st.step(&mut s).unwrap();
                    let e = energy(&sys, &s);
                    assert!((e - prev).abs() / e0 <= 1e-12, "{method:?} {bc:?}");
                    prev = e;
                }
            }
        }
    }

    #[test]
    fn time_reversal() {
        let sys = system(quarter_annulus(1.0, 2.0).unwrap(), Coefficient::SineProduct, BoundaryCondition::Dirichlet, 4);
        for method in [Method::QuasiInterpolation, Method::Galerkin] {
            let fwd = Stepper::new(&sys, method, 0.02).unwrap();
            let bwd = Stepper::new(&sys, method, -0.02).unwrap();
            let s0 = random_state(&sys, 9);
            let mut s = s0.clone();
            fwd.step(&mut s).unwrap();
            bwd.step(&mut s).unwrap();
            let diff = s.v.iter().zip(&s0.v).chain(s.phi.iter().zip(&s0.phi)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff <= 1e-10, "{method:?}: {diff}");
        }
    }

    #[test]
    fn qi_system_operator_is_positive() {
        let sys = system(quarter_annulus(1.0, 2.0).unwrap(), Coefficient::SineProduct, BoundaryCondition::MixedPeriodic, 4);
        let g = sys.d.matmul(sys.theta());
        let s = sys.m.add_scaled(1.0, &g.transpose().matmul(&sys.m2).matmul(&g), 0.25 * 0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x: Vec<f64> = (0..s.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(s.quadratic_form(&x) > 0.0);
        }
    }

    #[test]
    fn schemes_coincide_for_identity_theta() {
        let sys = system(unit_square(), Coefficient::Constant(1.0), BoundaryCondition::Dirichlet, 6);
        let qi = Stepper::new(&sys, Method::QuasiInterpolation, 0.01).unwrap();
        let ga = Stepper::new(&sys, Method::Galerkin, 0.01).unwrap();
        let mut a = random_state(&sys, 5);
        let mut b = a.clone();
        for _ in 0..50 {
            qi.step(&mut a).unwrap();
            ga.step(&mut b).unwrap();
        }
        let diff = a.v.iter().zip(&b.v).chain(a.phi.iter().zip(&b.phi)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-10, "{diff}");
    }

    #[test]
    fn constant_error_norms() {
        let mut acc = ErrorAccumulator::new(0.1);
        for _ in 0..=20 {
            acc.push(3.0, 4.0);
        }
        let n = acc.finish();
        assert!((n.v_22 - 2f64.sqrt() * 3.0).abs() < 1e-12);
        assert!((n.phi_22 - 2f64.sqrt() * 4.0).abs() < 1e-12);
        assert_eq!(n.energy_inf, 5.0);
    }

    #[test]
    fn evaluator_reproduces_projected_fields() {
        let map = quarter_annulus(1.0, 2.0).unwrap();
        let sys = system(map, Coefficient::Constant(1.0), BoundaryCondition::Dirichlet, 4);
        // the Piola pull-back of a field with parametric coefficients in X¹ is reproduced exactly
        let vhat = |xi: Point| [xi[0] * xi[1], 1.0 - xi[1] * xi[1]];
        let mut s = SolverState::zeros(&sys);
        s.v = sys.pair.project_pi1(vhat).coeffs;
        let eval = FieldEvaluator::new(&sys, 5);
        let vh = eval.velocity(&s.v);
        for (p, v) in eval.points.iter().zip(&vh) {
            let ex = map.push_forward_vector(*p, vhat(*p));
            assert!((v[0] - ex[0]).abs() < 1e-12 && (v[1] - ex[1]).abs() < 1e-12);
        }
        let area: f64 = eval.weights.iter().sum();
        assert!((area - 0.75 * std::f64::consts::PI).abs() < 1e-12);
    }
}
