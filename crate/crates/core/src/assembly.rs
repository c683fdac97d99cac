//! Gauss quadrature on the mapped geometry and assembly of the system matrices.
//!
//! All integrals are computed on the parametric square. With the pull-backs
//! `v = DF v̂ / J` and `φ = φ̂ / J` the physical `L²` products become
//!
//! - velocity mass: `∫ v̂ᵢᵀ (DFᵀ DF / J) v̂ⱼ dξ`,
//! - pressure mass: `∫ φ̂ᵢ φ̂ⱼ / J dξ`,
//! - Galerkin coupling: `∫ div̂(ĉ v̂ᵢ) φ̂ⱼ / J dξ`.

use std::sync::OnceLock;

use crate::derham2d::{DeRhamPair, TensorSpace2D};
use crate::error::Result;
use crate::geometry::{Coefficient, GeometryMap, Point};
use crate::linalg::{SkylineLdl, SparseMatrix};
use crate::splines1d::{KnotKind, SplineSpace1D, BUF};

/// Magnitude below which Θ entries are discarded.
pub const THETA_DROP_TOL: f64 = 1e-14;

/// Gauss–Legendre nodes and weights on `[0, 1]` with `q` points.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q > 0);
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q {
        // Newton iteration on P_q from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(q, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(q, x);
        nodes[q - 1 - i] = 0.5 * (x + 1.0);
        weights[q - 1 - i] = 1.0 / ((1.0 - x * x) * d * d);
    }
    (nodes, weights)
}

/// `(P_q(x), P_q'(x))` by the three-term recurrence.
fn legendre(q: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=q {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, q as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Per-element Gauss–Legendre rule, `q` points in each direction.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub q: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(q: usize) -> Self {
        let (nodes, weights) = gauss_legendre(q);
        Self { q, nodes, weights }
    }

    /// `q = p + 2` for the largest degree `p` of the pair.
    pub fn for_pair(pair: &DeRhamPair) -> Self {
        let (p1, p2) = pair.degrees();
        Self::new(p1.max(p2) + 2)
    }

    /// All quadrature points of an `e₁ × e₂` mesh as `(ξ, weight)`, element by element.
    pub fn mesh_points(&self, e: (usize, usize)) -> Vec<(Point, f64)> {
        let mut out = Vec::with_capacity(e.0 * e.1 * self.q * self.q);
        let (h1, h2) = (1.0 / e.0 as f64, 1.0 / e.1 as f64);
        for a in 0..e.0 {
            for b in 0..e.1 {
                for (x, wx) in self.nodes.iter().zip(&self.weights) {
                    for (y, wy) in self.nodes.iter().zip(&self.weights) {
                        out.push(([(a as f64 + x) * h1, (b as f64 + y) * h2], wx * wy * h1 * h2));
                    }
                }
            }
        }
        out
    }
}

/// Univariate basis values and derivatives at every quadrature point of every element.
#[derive(Debug, Clone)]
pub(crate) struct Tabulation {
    q: usize,
    degree: usize,
    first: Vec<usize>,
    vals: Vec<[f64; BUF]>,
    ders: Vec<[f64; BUF]>,
}

impl Tabulation {
    pub(crate) fn new(space: &SplineSpace1D, rule: &QuadratureRule) -> Self {
        let e = space.elements();
        let q = rule.q;
        let mut first = Vec::with_capacity(e * q);
        let mut vals = Vec::with_capacity(e * q);
        let mut ders = Vec::with_capacity(e * q);
        for el in 0..e {
            for x in &rule.nodes {
                let mut v = [0.0; BUF];
                let mut d = [0.0; BUF];
                let f = space.raw_values_and_derivatives((el as f64 + x) / e as f64, &mut v, &mut d);
                first.push(space.wrap(f));
                vals.push(v);
                ders.push(d);
            }
        }
        Self { q, degree: space.degree(), first, vals, ders }
    }

    #[inline]
    fn at(&self, el: usize, qp: usize) -> (&[f64; BUF], &[f64; BUF]) {
        let k = el * self.q + qp;
        (&self.vals[k], &self.ders[k])
    }
}

/// Local basis of one tensor space on one element.
struct LocalTensor<'a> {
    space: &'a TensorSpace2D,
    t1: &'a Tabulation,
    t2: &'a Tabulation,
}

impl LocalTensor<'_> {
    /// Global indices of the `(p₁+1)(p₂+1)` functions active on element `(a, b)`.
    fn indices(&self, a: usize, b: usize, offset: usize) -> Vec<usize> {
        let (s1, s2) = (&self.space.s1, &self.space.s2);
        let f1 = self.t1.first[a * self.t1.q];
        let f2 = self.t2.first[b * self.t2.q];
        let mut out = Vec::with_capacity((self.t1.degree + 1) * (self.t2.degree + 1));
        for r1 in 0..=self.t1.degree {
            let i1 = s1.wrap(f1 + r1);
            for r2 in 0..=self.t2.degree {
                out.push(offset + self.space.index(i1, s2.wrap(f2 + r2)));
            }
        }
        out
    }

    /// Values, `∂₁` and `∂₂` of the active functions at quadrature point `(q1, q2)`.
    fn eval(&self, a: usize, b: usize, q1: usize, q2: usize, val: &mut Vec<f64>, d1: &mut Vec<f64>, d2: &mut Vec<f64>) {
        val.clear();
        d1.clear();
        d2.clear();
        let (v1, g1) = self.t1.at(a, q1);
        let (v2, g2) = self.t2.at(b, q2);
        for r1 in 0..=self.t1.degree {
            for r2 in 0..=self.t2.degree {
                val.push(v1[r1] * v2[r2]);
                d1.push(g1[r1] * v2[r2]);
                d2.push(v1[r1] * g2[r2]);
            }
        }
    }
}

/// Per-pair tabulations of all univariate factors.
struct PairTables {
    rule: QuadratureRule,
    /// velocity components, then pressure
    tabs: [(Tabulation, Tabulation); 3],
}

impl PairTables {
    fn new(pair: &DeRhamPair, rule: &QuadratureRule) -> Self {
        let t = |s: &TensorSpace2D| (Tabulation::new(&s.s1, rule), Tabulation::new(&s.s2, rule));
        Self {
            rule: rule.clone(),
            tabs: [t(pair.x1_component(0)), t(pair.x1_component(1)), t(pair.x2_space())],
        }
    }

    fn local<'a>(&'a self, pair: &'a DeRhamPair, which: usize) -> LocalTensor<'a> {
        let space = if which < 2 { pair.x1_component(which) } else { pair.x2_space() };
        LocalTensor { space, t1: &self.tabs[which].0, t2: &self.tabs[which].1 }
    }
}

/// Geometric factors at one quadrature point.
struct PointGeometry {
    xi: Point,
    weight: f64,
    jac: [[f64; 2]; 2],
    det: f64,
}

fn element_points(rule: &QuadratureRule, e: (usize, usize), a: usize, b: usize, map: &GeometryMap) -> Vec<(usize, usize, PointGeometry)> {
    let (h1, h2) = (1.0 / e.0 as f64, 1.0 / e.1 as f64);
    let mut out = Vec::with_capacity(rule.q * rule.q);
    for q1 in 0..rule.q {
        for q2 in 0..rule.q {
            let xi = [(a as f64 + rule.nodes[q1]) * h1, (b as f64 + rule.nodes[q2]) * h2];
            let jac = map.jacobian(xi);
            let det = crate::geometry::det(&jac);
            out.push((q1, q2, PointGeometry { xi, weight: rule.weights[q1] * rule.weights[q2] * h1 * h2, jac, det }));
        }
    }
    out
}

/// Velocity basis on one element: indices and per-point values `(v̂₁, v̂₂, div̂)`.
struct VelocityLocal {
    idx: Vec<usize>,
    n0: usize,
}

fn velocity_local(pair: &DeRhamPair, tables: &PairTables, a: usize, b: usize) -> VelocityLocal {
    let l0 = tables.local(pair, 0).indices(a, b, 0);
    let l1 = tables.local(pair, 1).indices(a, b, pair.x1_offset(1));
    let n0 = l0.len();
    let mut idx = l0;
    idx.extend(l1);
    VelocityLocal { idx, n0 }
}

/// Fills `(v̂₁, v̂₂, div̂ v̂)` of the element's velocity functions at one point.
fn velocity_values(
    pair: &DeRhamPair,
    tables: &PairTables,
    loc: &VelocityLocal,
    a: usize,
    b: usize,
    q1: usize,
    q2: usize,
    out: &mut [Vec<f64>; 3],
) {
    let (mut v, mut d1, mut d2) = (Vec::new(), Vec::new(), Vec::new());
    for o in out.iter_mut() {
        o.clear();
    }
    tables.local(pair, 0).eval(a, b, q1, q2, &mut v, &mut d1, &mut d2);
    for k in 0..loc.n0 {
        out[0].push(v[k]);
        out[1].push(0.0);
        out[2].push(d1[k]);
    }
    tables.local(pair, 1).eval(a, b, q1, q2, &mut v, &mut d1, &mut d2);
    for k in 0..loc.idx.len() - loc.n0 {
        out[0].push(0.0);
        out[1].push(v[k]);
        out[2].push(d2[k]);
    }
}

fn push_local(triplets: &mut Vec<(usize, usize, f64)>, rows: &[usize], cols: &[usize], local: &[f64]) {
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            let v = local[r * cols.len() + c];
            if v != 0.0 {
                triplets.push((i, j, v));
            }
        }
    }
}

/// Velocity mass matrix `M`.
pub fn assemble_velocity_mass(pair: &DeRhamPair, map: &GeometryMap, rule: &QuadratureRule) -> SparseMatrix {
    let tables = PairTables::new(pair, rule);
    let e = pair.elements();
    let mut triplets = Vec::new();
    let mut vals: [Vec<f64>; 3] = Default::default();
    for a in 0..e.0 {
        for b in 0..e.1 {
            let loc = velocity_local(pair, &tables, a, b);
            let n = loc.idx.len();
            let mut local = vec![0.0; n * n];
            for (q1, q2, g) in element_points(&tables.rule, e, a, b, map) {
                velocity_values(pair, &tables, &loc, a, b, q1, q2, &mut vals);
                let m = g.jac;
                // G = DFᵀ DF / J, scaled by the weight
                let s = g.weight / g.det;
                let g00 = s * (m[0][0] * m[0][0] + m[1][0] * m[1][0]);
                let g01 = s * (m[0][0] * m[0][1] + m[1][0] * m[1][1]);
                let g11 = s * (m[0][1] * m[0][1] + m[1][1] * m[1][1]);
                for r in 0..n {
                    let (x0, x1) = (vals[0][r], vals[1][r]);
                    let (gx0, gx1) = (g00 * x0 + g01 * x1, g01 * x0 + g11 * x1);
                    for c in 0..n {
                        local[r * n + c] += gx0 * vals[0][c] + gx1 * vals[1][c];
                    }
                }
            }
            push_local(&mut triplets, &loc.idx, &loc.idx, &local);
        }
    }
    let n = pair.x1_dim();
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// Pressure mass matrix `M₂`.
pub fn assemble_pressure_mass(pair: &DeRhamPair, map: &GeometryMap, rule: &QuadratureRule) -> SparseMatrix {
    let tables = PairTables::new(pair, rule);
    let e = pair.elements();
    let lt = tables.local(pair, 2);
    let mut triplets = Vec::new();
    let (mut v, mut d1, mut d2) = (Vec::new(), Vec::new(), Vec::new());
    for a in 0..e.0 {
        for b in 0..e.1 {
            let idx = lt.indices(a, b, 0);
            let n = idx.len();
            let mut local = vec![0.0; n * n];
            for (q1, q2, g) in element_points(&tables.rule, e, a, b, map) {
                lt.eval(a, b, q1, q2, &mut v, &mut d1, &mut d2);
                let s = g.weight / g.det;
                for r in 0..n {
                    for c in 0..n {
                        local[r * n + c] += s * v[r] * v[c];
                    }
                }
            }
            push_local(&mut triplets, &idx, &idx, &local);
        }
    }
    let m = pair.x2_dim();
    SparseMatrix::from_triplets(m, m, &triplets)
}

/// Mass matrix of either space of the pair.
pub fn assemble_mass(pair: &DeRhamPair, velocity: bool, map: &GeometryMap, rule: &QuadratureRule) -> SparseMatrix {
    if velocity {
        assemble_velocity_mass(pair, map, rule)
    } else {
        assemble_pressure_mass(pair, map, rule)
    }
}

/// `C_{ij} = ∫ div(c bᵢ) ψⱼ`, the `N × M` coupling of the Galerkin scheme.
///
/// With `c ≡ 1` this is the directly integrated `B`.
pub fn assemble_coupling(pair: &DeRhamPair, map: &GeometryMap, c: &Coefficient, rule: &QuadratureRule) -> SparseMatrix {
    let tables = PairTables::new(pair, rule);
    let e = pair.elements();
    let lt = tables.local(pair, 2);
    let mut triplets = Vec::new();
    let mut vals: [Vec<f64>; 3] = Default::default();
    let (mut v, mut d1, mut d2) = (Vec::new(), Vec::new(), Vec::new());
    for a in 0..e.0 {
        for b in 0..e.1 {
            let loc = velocity_local(pair, &tables, a, b);
            let cols = lt.indices(a, b, 0);
            let (n, m) = (loc.idx.len(), cols.len());
            let mut local = vec![0.0; n * m];
            for (q1, q2, g) in element_points(&tables.rule, e, a, b, map) {
                velocity_values(pair, &tables, &loc, a, b, q1, q2, &mut vals);
                lt.eval(a, b, q1, q2, &mut v, &mut d1, &mut d2);
                let chat = c.parametric_value(map, g.xi);
                let grad = c.parametric_gradient(map, g.xi);
                let s = g.weight / g.det;
                for r in 0..n {
                    let div = chat * vals[2][r] + grad[0] * vals[0][r] + grad[1] * vals[1][r];
                    for k in 0..m {
                        local[r * m + k] += s * div * v[k];
                    }
                }
            }
            push_local(&mut triplets, &loc.idx, &cols, &local);
        }
    }
    SparseMatrix::from_triplets(pair.x1_dim(), pair.x2_dim(), &triplets)
}

/// `∫ div̂ b̂ₗ div̂ b̂ₘ / J`, integrated directly (used only to check `A = DᵀM₂D`).
pub fn assemble_divergence_stiffness(pair: &DeRhamPair, map: &GeometryMap, rule: &QuadratureRule) -> SparseMatrix {
    let tables = PairTables::new(pair, rule);
    let e = pair.elements();
    let mut triplets = Vec::new();
    let mut vals: [Vec<f64>; 3] = Default::default();
    for a in 0..e.0 {
        for b in 0..e.1 {
            let loc = velocity_local(pair, &tables, a, b);
            let n = loc.idx.len();
            let mut local = vec![0.0; n * n];
            for (q1, q2, g) in element_points(&tables.rule, e, a, b, map) {
                velocity_values(pair, &tables, &loc, a, b, q1, q2, &mut vals);
                let s = g.weight / g.det;
                for r in 0..n {
                    for c in 0..n {
                        local[r * n + c] += s * vals[2][r] * vals[2][c];
                    }
                }
            }
            push_local(&mut triplets, &loc.idx, &loc.idx, &local);
        }
    }
    let n = pair.x1_dim();
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// Θ: column `i` holds the coefficients of `Π̂¹(ĉ b̂ᵢ)`.
pub fn assemble_theta(pair: &DeRhamPair, map: &GeometryMap, c: &Coefficient) -> SparseMatrix {
    if let Some(value) = c.constant_value() {
        if value == 1.0 {
            // the projector preserves splines: skip the sweep but keep the same drop rule
            return SparseMatrix::identity(pair.x1_dim());
        }
    }
    let chat = pair.sample_scalar(|xi| c.parametric_value(map, xi));
    pair.projection_columns(&chat, THETA_DROP_TOL)
}

/// Θ computed by the projection sweep even when `c ≡ 1`.
pub fn assemble_theta_by_projection(pair: &DeRhamPair, map: &GeometryMap, c: &Coefficient) -> SparseMatrix {
    let chat = pair.sample_scalar(|xi| c.parametric_value(map, xi));
    pair.projection_columns(&chat, THETA_DROP_TOL)
}

/// Factorizes `a` as SPD, reporting the failing pivot otherwise.
pub fn verify_spd(a: &SparseMatrix) -> Result<()> {
    SkylineLdl::factor(a, true).map(|_| ())
}

/// Every time-independent matrix of one discretization, with lazily built derived operators.
#[derive(Debug)]
pub struct SystemMatrices {
    pub pair: DeRhamPair,
    pub map: GeometryMap,
    pub coefficient: Coefficient,
    pub rule: QuadratureRule,
    /// velocity mass `M`
    pub m: SparseMatrix,
    /// pressure mass `M₂`
    pub m2: SparseMatrix,
    /// parametric divergence `D`
    pub d: SparseMatrix,
    theta: OnceLock<SparseMatrix>,
    a: OnceLock<SparseMatrix>,
    b: OnceLock<SparseMatrix>,
    coupling: OnceLock<SparseMatrix>,
}

impl SystemMatrices {
    pub fn new(pair: DeRhamPair, map: GeometryMap, coefficient: Coefficient) -> Result<Self> {
        map.validate(50)?;
        coefficient.validate(&map, pair.bc().periodic_second_direction(), 50)?;
        let rule = QuadratureRule::for_pair(&pair);
        let m = assemble_velocity_mass(&pair, &map, &rule);
        let m2 = assemble_pressure_mass(&pair, &map, &rule);
        let d = pair.divergence_matrix();
        Ok(Self {
            pair,
            map,
            coefficient,
            rule,
            m,
            m2,
            d,
            theta: OnceLock::new(),
            a: OnceLock::new(),
            b: OnceLock::new(),
            coupling: OnceLock::new(),
        })
    }

    /// Θ, assembled on first use and cached afterwards.
    pub fn theta(&self) -> &SparseMatrix {
        self.theta.get_or_init(|| assemble_theta(&self.pair, &self.map, &self.coefficient))
    }

    /// `A = Dᵀ M₂ D`.
    pub fn a(&self) -> &SparseMatrix {
        self.a.get_or_init(|| self.d.transpose().matmul(&self.m2).matmul(&self.d))
    }

    /// `B = Dᵀ M₂`.
    pub fn b(&self) -> &SparseMatrix {
        self.b.get_or_init(|| self.d.transpose().matmul(&self.m2))
    }

    /// Galerkin coupling `∫ div(c bᵢ) ψⱼ`.
    pub fn coupling(&self) -> &SparseMatrix {
        self.coupling
            .get_or_init(|| assemble_coupling(&self.pair, &self.map, &self.coefficient, &self.rule))
    }

    /// Writes the assembled matrices in coordinate format into `dir`.
    pub fn dump(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.m.write_coordinate(dir.join("mass_velocity.txt"))?;
        self.m2.write_coordinate(dir.join("mass_pressure.txt"))?;
        self.d.write_coordinate(dir.join("divergence.txt"))?;
        self.theta().write_coordinate(dir.join("theta.txt"))?;
        self.a().write_coordinate(dir.join("a.txt"))?;
        self.b().write_coordinate(dir.join("b.txt"))?;
        Ok(())
    }
}

/// Scalar `H¹` pencil for the reference eigenproblem.
#[derive(Debug, Clone)]
pub struct H1System {
    pub space: TensorSpace2D,
    /// stiffness `∫ c² ∇Nᵢ·∇Nⱼ` before boundary elimination
    pub k_full: SparseMatrix,
    /// mass `∫ Nᵢ Nⱼ` before boundary elimination
    pub m_full: SparseMatrix,
    /// indices of the degrees of freedom kept after eliminating Dirichlet ones
    pub free: Vec<usize>,
    pub k: SparseMatrix,
    pub m: SparseMatrix,
}

impl H1System {
    /// Expands a vector on the free degrees of freedom to the full space.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.space.dim()];
        for (&i, &v) in self.free.iter().zip(reduced) {
            out[i] = v;
        }
        out
    }
}

/// Assembles `K = ∫ c² ∇N·∇N` and `M = ∫ N N` on `S_{p} ⊗ S_{p}` and eliminates Dirichlet dofs.
pub fn assemble_h1(
    p: (usize, usize),
    e: (usize, usize),
    map: &GeometryMap,
    c: &Coefficient,
    periodic_second: bool,
) -> Result<H1System> {
    let s1 = SplineSpace1D::uniform(p.0, e.0, KnotKind::Open)?;
    let kind2 = if periodic_second { KnotKind::Periodic } else { KnotKind::Open };
    let s2 = SplineSpace1D::uniform(p.1, e.1, kind2)?;
    let space = TensorSpace2D::new(s1, s2);
    let rule = QuadratureRule::new(p.0.max(p.1) + 2);
    let t1 = Tabulation::new(&space.s1, &rule);
    let t2 = Tabulation::new(&space.s2, &rule);
    let lt = LocalTensor { space: &space, t1: &t1, t2: &t2 };
    let mut kt = Vec::new();
    let mut mt = Vec::new();
    let (mut v, mut d1, mut d2) = (Vec::new(), Vec::new(), Vec::new());
    for a in 0..e.0 {
        for b in 0..e.1 {
            let idx = lt.indices(a, b, 0);
            let n = idx.len();
            let mut kl = vec![0.0; n * n];
            let mut ml = vec![0.0; n * n];
            for (q1, q2, g) in element_points(&rule, e, a, b, map) {
                lt.eval(a, b, q1, q2, &mut v, &mut d1, &mut d2);
                let cv = c.parametric_value(map, g.xi);
                let wk = g.weight * g.det * cv * cv;
                let wm = g.weight * g.det;
                let grads: Vec<Point> = (0..n).map(|r| map.physical_gradient(g.xi, [d1[r], d2[r]])).collect();
                for r in 0..n {
                    for s in 0..n {
                        kl[r * n + s] += wk * (grads[r][0] * grads[s][0] + grads[r][1] * grads[s][1]);
                        ml[r * n + s] += wm * v[r] * v[s];
                    }
                }
            }
            push_local(&mut kt, &idx, &idx, &kl);
            push_local(&mut mt, &idx, &idx, &ml);
        }
    }
    let n = space.dim();
    let k_full = SparseMatrix::from_triplets(n, n, &kt);
    let m_full = SparseMatrix::from_triplets(n, n, &mt);
    let n1 = space.s1.dim();
    let n2 = space.s2.dim();
    let free: Vec<usize> = (0..n)
        .filter(|&idx| {
            let (i1, i2) = space.split(idx);
            let boundary1 = i1 == 0 || i1 == n1 - 1;
            let boundary2 = !periodic_second && (i2 == 0 || i2 == n2 - 1);
            !(boundary1 || boundary2)
        })
        .collect();
    let k = restrict(&k_full, &free);
    let m = restrict(&m_full, &free);
    Ok(H1System { space, k_full, m_full, free, k, m })
}

fn restrict(a: &SparseMatrix, keep: &[usize]) -> SparseMatrix {
    let mut map = vec![usize::MAX; a.nrows()];
    for (new, &old) in keep.iter().enumerate() {
        map[old] = new;
    }
    let t: Vec<(usize, usize, f64)> = a
        .triplets()
        .filter(|&(i, j, _)| map[i] != usize::MAX && map[j] != usize::MAX)
        .map(|(i, j, v)| (map[i], map[j], v))
        .collect();
    SparseMatrix::from_triplets(keep.len(), keep.len(), &t)
}
