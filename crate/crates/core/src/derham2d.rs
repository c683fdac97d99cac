//! Tensor-product velocity and pressure spaces on the parametric square.
//!
//! The velocity space `X̂¹` has components in `S_{p₁} ⊗ D_{p₂−1}` and
//! `D_{p₁−1} ⊗ S_{p₂}`, the pressure space `X̂²` is `D_{p₁−1} ⊗ D_{p₂−1}`, where
//! `D` denotes the Curry–Schoenberg derivative space. With mixed boundary
//! conditions every univariate factor in the second direction is periodic.
//!
//! Coefficients are stored lexicographically, `i₁ · dim₂ + i₂`, with the first
//! velocity component before the second.
//!
//! The multivariate projectors are tensor products of univariate ones, applied
//! as a two-pass sweep over samples on the fine grid (breakpoints, midpoints and
//! Simpson midpoints in each direction): every sample line in one direction is
//! projected first, then every resulting coefficient line in the other.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg::SparseMatrix;
use crate::quasi_interp::{CommutativeProjector1D, EvalGrid, QuasiInterpolant1D};
use crate::splines1d::{KnotKind, SplineSpace1D, BUF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// Homogeneous Dirichlet on the pressure over the whole boundary.
    Dirichlet,
    /// Dirichlet on the faces `ξ₁ ∈ {0, 1}`, periodic identification of `ξ₂ = 0` and `ξ₂ = 1`.
    MixedPeriodic,
}

impl BoundaryCondition {
    pub fn periodic_second_direction(&self) -> bool {
        matches!(self, BoundaryCondition::MixedPeriodic)
    }
}

/// Order of the two passes of a tensor-product projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    /// Project along `ξ₂` for every fine `ξ₁` node, then along `ξ₁`.
    SecondThenFirst,
    FirstThenSecond,
}

/// `S₁ ⊗ S₂` with index `i₁ · dim₂ + i₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSpace2D {
    pub s1: SplineSpace1D,
    pub s2: SplineSpace1D,
}

impl TensorSpace2D {
    pub fn new(s1: SplineSpace1D, s2: SplineSpace1D) -> Self {
        Self { s1, s2 }
    }

    pub fn dim(&self) -> usize {
        self.s1.dim() * self.s2.dim()
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.s2.dim() + i2
    }

    #[inline]
    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx / self.s2.dim(), idx % self.s2.dim())
    }

    pub fn eval(&self, coeffs: &[f64], xi: Point) -> f64 {
        let mut v1 = [0.0; BUF];
        let mut v2 = [0.0; BUF];
        let f1 = self.s1.raw_values(xi[0], &mut v1);
        let f2 = self.s2.raw_values(xi[1], &mut v2);
        let mut acc = 0.0;
        for a in 0..=self.s1.degree() {
            let i1 = self.s1.wrap(f1 + a);
            for b in 0..=self.s2.degree() {
                acc += coeffs[self.index(i1, self.s2.wrap(f2 + b))] * v1[a] * v2[b];
            }
        }
        acc
    }

    /// Value and parametric gradient.
    pub fn eval_with_gradient(&self, coeffs: &[f64], xi: Point) -> (f64, Point) {
        let (mut v1, mut d1, mut v2, mut d2) = ([0.0; BUF], [0.0; BUF], [0.0; BUF], [0.0; BUF]);
        let f1 = self.s1.raw_values_and_derivatives(xi[0], &mut v1, &mut d1);
        let f2 = self.s2.raw_values_and_derivatives(xi[1], &mut v2, &mut d2);
        let (mut v, mut g0, mut g1) = (0.0, 0.0, 0.0);
        for a in 0..=self.s1.degree() {
            let i1 = self.s1.wrap(f1 + a);
            for b in 0..=self.s2.degree() {
                let c = coeffs[self.index(i1, self.s2.wrap(f2 + b))];
                v += c * v1[a] * v2[b];
                g0 += c * d1[a] * v2[b];
                g1 += c * v1[a] * d2[b];
            }
        }
        (v, [g0, g1])
    }

    /// Nonzero `(index, value)` pairs of the basis at `xi`.
    pub fn basis_at(&self, xi: Point) -> Vec<(usize, f64)> {
        let mut v1 = [0.0; BUF];
        let mut v2 = [0.0; BUF];
        let f1 = self.s1.raw_values(xi[0], &mut v1);
        let f2 = self.s2.raw_values(xi[1], &mut v2);
        let mut out = Vec::with_capacity((self.s1.degree() + 1) * (self.s2.degree() + 1));
        for a in 0..=self.s1.degree() {
            let i1 = self.s1.wrap(f1 + a);
            for b in 0..=self.s2.degree() {
                out.push((self.index(i1, self.s2.wrap(f2 + b)), v1[a] * v2[b]));
            }
        }
        out
    }
}

/// Univariate ingredients of one parametric direction.
#[derive(Debug, Clone)]
pub struct DirectionData {
    pub space: SplineSpace1D,
    pub derived: SplineSpace1D,
    pub qi: QuasiInterpolant1D,
    pub cp: CommutativeProjector1D,
    pub deriv: SparseMatrix,
    pub grid: EvalGrid,
    qi_op: SparseMatrix,
    cp_op: SparseMatrix,
    qi_op_t: SparseMatrix,
    cp_op_t: SparseMatrix,
}

impl DirectionData {
    fn new(p: usize, e: usize, kind: KnotKind) -> Result<Self> {
        let space = SplineSpace1D::uniform(p, e, kind)?;
        let qi = QuasiInterpolant1D::new(&space)?;
        let cp = CommutativeProjector1D::from_quasi_interpolant(qi.clone());
        let qi_op = qi.fine_operator();
        let cp_op = cp.fine_operator();
        Ok(Self {
            derived: cp.target().clone(),
            deriv: space.derivative_matrix(),
            grid: *qi.grid(),
            qi_op_t: qi_op.transpose(),
            cp_op_t: cp_op.transpose(),
            space,
            qi,
            cp,
            qi_op,
            cp_op,
        })
    }

    fn op(&self, commutative: bool) -> (&SparseMatrix, &SparseMatrix) {
        if commutative {
            (&self.cp_op, &self.cp_op_t)
        } else {
            (&self.qi_op, &self.qi_op_t)
        }
    }

    fn factor(&self, commutative: bool) -> &SplineSpace1D {
        if commutative {
            &self.derived
        } else {
            &self.space
        }
    }
}

/// Which space a coefficient vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    X1,
    X2,
    H1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    pub kind: FieldKind,
    pub coeffs: Vec<f64>,
}

/// Samples of a scalar field on the fine tensor grid, row-major in `ξ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct FineSamples {
    pub n1: usize,
    pub n2: usize,
    pub values: Vec<f64>,
}

impl FineSamples {
    #[inline]
    pub fn at(&self, k1: usize, k2: usize) -> f64 {
        self.values[k1 * self.n2 + k2]
    }
}

/// The discrete velocity/pressure pair and its projectors.
#[derive(Debug, Clone)]
pub struct DeRhamPair {
    degrees: (usize, usize),
    elements: (usize, usize),
    bc: BoundaryCondition,
    dirs: [DirectionData; 2],
    x1: [TensorSpace2D; 2],
    x2: TensorSpace2D,
}

pub fn build_spaces(p: (usize, usize), e: (usize, usize), bc: BoundaryCondition) -> Result<DeRhamPair> {
    DeRhamPair::new(p, e, bc)
}

impl DeRhamPair {
    pub fn new(p: (usize, usize), e: (usize, usize), bc: BoundaryCondition) -> Result<Self> {
        for (pi, ei) in [(p.0, e.0), (p.1, e.1)] {
            if !(2..=3).contains(&pi) {
                return Err(Error::UnsupportedDegree(pi));
            }
            if ei < pi {
                return Err(Error::InvalidArgument(format!(
                    "{ei} elements is fewer than the degree {pi}"
                )));
            }
        }
        let kind2 = if bc.periodic_second_direction() { KnotKind::Periodic } else { KnotKind::Open };
        let d1 = DirectionData::new(p.0, e.0, KnotKind::Open)?;
        let d2 = DirectionData::new(p.1, e.1, kind2)?;
        let x1 = [
            TensorSpace2D::new(d1.space.clone(), d2.derived.clone()),
            TensorSpace2D::new(d1.derived.clone(), d2.space.clone()),
        ];
        let x2 = TensorSpace2D::new(d1.derived.clone(), d2.derived.clone());
        Ok(Self { degrees: p, elements: e, bc, dirs: [d1, d2], x1, x2 })
    }

    pub fn degrees(&self) -> (usize, usize) {
        self.degrees
    }

    pub fn elements(&self) -> (usize, usize) {
        self.elements
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn direction(&self, d: usize) -> &DirectionData {
        &self.dirs[d]
    }

    /// Component `c ∈ {0, 1}` of the velocity space.
    pub fn x1_component(&self, c: usize) -> &TensorSpace2D {
        &self.x1[c]
    }

    pub fn x2_space(&self) -> &TensorSpace2D {
        &self.x2
    }

    /// `N`, the velocity dimension.
    pub fn x1_dim(&self) -> usize {
        self.x1[0].dim() + self.x1[1].dim()
    }

    /// `M`, the pressure dimension.
    pub fn x2_dim(&self) -> usize {
        self.x2.dim()
    }

    /// Offset of component `c` within a velocity coefficient vector.
    pub fn x1_offset(&self, c: usize) -> usize {
        if c == 0 {
            0
        } else {
            self.x1[0].dim()
        }
    }

    /// Parametric divergence `M × N`, exact on splines.
    pub fn divergence_matrix(&self) -> SparseMatrix {
        let [d1, d2] = &self.dirs;
        let a = d1.deriv.kron(&SparseMatrix::identity(d2.derived.dim()));
        let b = SparseMatrix::identity(d1.derived.dim()).kron(&d2.deriv);
        SparseMatrix::block(&[vec![Some(&a), Some(&b)]])
    }

    pub fn fine_shape(&self) -> (usize, usize) {
        (self.dirs[0].grid.fine_len(), self.dirs[1].grid.fine_len())
    }

    pub fn fine_node(&self, k1: usize, k2: usize) -> Point {
        [self.dirs[0].grid.fine_node(k1), self.dirs[1].grid.fine_node(k2)]
    }

    pub fn sample_scalar(&self, f: impl Fn(Point) -> f64) -> FineSamples {
        let (n1, n2) = self.fine_shape();
        let mut values = Vec::with_capacity(n1 * n2);
        for k1 in 0..n1 {
            for k2 in 0..n2 {
                values.push(f(self.fine_node(k1, k2)));
            }
        }
        FineSamples { n1, n2, values }
    }

    pub fn sample_vector(&self, f: impl Fn(Point) -> Point) -> [FineSamples; 2] {
        let (n1, n2) = self.fine_shape();
        let mut a = Vec::with_capacity(n1 * n2);
        let mut b = Vec::with_capacity(n1 * n2);
        for k1 in 0..n1 {
            for k2 in 0..n2 {
                let v = f(self.fine_node(k1, k2));
                a.push(v[0]);
                b.push(v[1]);
            }
        }
        [FineSamples { n1, n2, values: a }, FineSamples { n1, n2, values: b }]
    }

    /// Which univariate projector acts in each direction for velocity component `c`
    /// (`true` for the commutative one).
    fn x1_kinds(c: usize) -> (bool, bool) {
        if c == 0 {
            (false, true)
        } else {
            (true, false)
        }
    }

    pub fn project_pi1_samples(&self, samples: &[FineSamples; 2], order: SweepOrder) -> DiscreteField {
        let mut coeffs = Vec::with_capacity(self.x1_dim());
        for (c, s) in samples.iter().enumerate() {
            let (k1, k2) = Self::x1_kinds(c);
            coeffs.extend(tensor_project(self.dirs[0].op(k1).0, self.dirs[1].op(k2).0, s, order));
        }
        DiscreteField { kind: FieldKind::X1, coeffs }
    }

    pub fn project_pi2_samples(&self, samples: &FineSamples, order: SweepOrder) -> DiscreteField {
        let coeffs = tensor_project(self.dirs[0].op(true).0, self.dirs[1].op(true).0, samples, order);
        DiscreteField { kind: FieldKind::X2, coeffs }
    }

    /// `Π̂¹ f` for a parametric vector field.
    pub fn project_pi1(&self, f: impl Fn(Point) -> Point) -> DiscreteField {
        self.project_pi1_samples(&self.sample_vector(f), SweepOrder::SecondThenFirst)
    }

    /// `Π̂² g` for a parametric scalar field.
    pub fn project_pi2(&self, g: impl Fn(Point) -> f64) -> DiscreteField {
        self.project_pi2_samples(&self.sample_scalar(g), SweepOrder::SecondThenFirst)
    }

    /// Parametric velocity `(v̂₁, v̂₂)` at `xi`.
    pub fn eval_x1(&self, coeffs: &[f64], xi: Point) -> Point {
        let n0 = self.x1[0].dim();
        [self.x1[0].eval(&coeffs[..n0], xi), self.x1[1].eval(&coeffs[n0..], xi)]
    }

    pub fn eval_x2(&self, coeffs: &[f64], xi: Point) -> f64 {
        self.x2.eval(coeffs, xi)
    }

    /// Values of every basis function of `space` at every fine node of direction `d`,
    /// as a dense `dim × fine_len` table.
    fn fine_table(&self, d: usize, commutative: bool) -> Vec<Vec<f64>> {
        let dir = &self.dirs[d];
        let s = dir.factor(commutative);
        let mut t = vec![vec![0.0; dir.grid.fine_len()]; s.dim()];
        for k in 0..dir.grid.fine_len() {
            for (i, v) in s.eval_basis(dir.grid.fine_node(k)).expect("fine nodes lie in [0, 1]") {
                t[i][k] += v;
            }
        }
        t
    }

    /// Fine-grid indices where basis function `i` of the chosen factor may be nonzero.
    fn support_window(&self, d: usize, commutative: bool, i: usize) -> Vec<usize> {
        let dir = &self.dirs[d];
        let s = dir.factor(commutative);
        let q = s.degree() as isize;
        let e = s.elements() as isize;
        if !s.is_periodic() {
            let lo = 4 * (i as isize - q).clamp(0, e);
            let hi = 4 * (i as isize + 1).clamp(0, e);
            return (lo as usize..=hi as usize).collect();
        }
        let period = 4 * e;
        let mut ks: Vec<usize> = (4 * (i as isize - q)..=4 * (i as isize + 1))
            .map(|k| k.rem_euclid(period) as usize)
            .collect();
        if ks.contains(&0) {
            ks.push(period as usize);
        }
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// Coefficients of `Π̂¹(ĉ b̂ᵢ)` for every velocity basis function, as the columns of Θ.
    ///
    /// `chat` holds `ĉ` on the fine grid. Each column only touches the samples on
    /// the support of `b̂ᵢ`, so the sweep is restricted to that window.
    pub fn projection_columns(&self, chat: &FineSamples, drop_tol: f64) -> SparseMatrix {
        let n = self.x1_dim();
        let mut triplets = Vec::new();
        for c in 0..2 {
            let (k1, k2) = Self::x1_kinds(c);
            let t1 = self.fine_table(0, k1);
            let t2 = self.fine_table(1, k2);
            let op1_t = self.dirs[0].op(k1).1;
            let op2_t = self.dirs[1].op(k2).1;
            let space = &self.x1[c];
            let off = self.x1_offset(c);
            for i1 in 0..space.s1.dim() {
                let w1 = self.support_window(0, k1, i1);
                for i2 in 0..space.s2.dim() {
                    let w2 = self.support_window(1, k2, i2);
                    let col = off + space.index(i1, i2);
                    let value = |k1: usize, k2: usize| chat.at(k1, k2) * t1[i1][k1] * t2[i2][k2];
                    for (j1, j2, v) in local_tensor_project(op1_t, op2_t, &w1, &w2, value) {
                        if v.abs() >= drop_tol {
                            triplets.push((off + space.index(j1, j2), col, v));
                        }
                    }
                }
            }
        }
        SparseMatrix::from_triplets(n, n, &triplets)
    }
}

/// Applies `op1 ⊗ op2` to fine samples. `op_d` maps fine samples to coefficients.
pub fn tensor_project(op1: &SparseMatrix, op2: &SparseMatrix, s: &FineSamples, order: SweepOrder) -> Vec<f64> {
    let (m1, m2) = (op1.nrows(), op2.nrows());
    assert_eq!((op1.ncols(), op2.ncols()), (s.n1, s.n2), "sample grid does not match the operators");
    let used = |op: &SparseMatrix| {
        let mut u = vec![false; op.ncols()];
        for (_, k, _) in op.triplets() {
            u[k] = true;
        }
        u
    };
    let mut out = vec![0.0; m1 * m2];
    match order {
        SweepOrder::SecondThenFirst => {
            let need = used(op1);
            // tmp[k1][j2]
            let mut tmp = vec![0.0; s.n1 * m2];
            let mut line = vec![0.0; m2];
            for k1 in (0..s.n1).filter(|&k| need[k]) {
                op2.mul_vec_into(&s.values[k1 * s.n2..(k1 + 1) * s.n2], &mut line);
                tmp[k1 * m2..(k1 + 1) * m2].copy_from_slice(&line);
            }
            for j1 in 0..m1 {
                let (cols, vals) = op1.row(j1);
                for (&k1, &w) in cols.iter().zip(vals) {
                    for j2 in 0..m2 {
                        out[j1 * m2 + j2] += w * tmp[k1 * m2 + j2];
                    }
                }
            }
        }
        SweepOrder::FirstThenSecond => {
            let need = used(op2);
            // tmp[j1][k2]
            let mut tmp = vec![0.0; m1 * s.n2];
            let mut col = vec![0.0; s.n1];
            let mut line = vec![0.0; m1];
            for k2 in (0..s.n2).filter(|&k| need[k]) {
                for (k1, c) in col.iter_mut().enumerate() {
                    *c = s.at(k1, k2);
                }
                op1.mul_vec_into(&col, &mut line);
                for j1 in 0..m1 {
                    tmp[j1 * s.n2 + k2] = line[j1];
                }
            }
            for j1 in 0..m1 {
                let row = &tmp[j1 * s.n2..(j1 + 1) * s.n2];
                for j2 in 0..m2 {
                    let (cols, vals) = op2.row(j2);
                    out[j1 * m2 + j2] = cols.iter().zip(vals).map(|(&k2, &w)| w * row[k2]).sum();
                }
            }
        }
    }
    out
}

/// `op1 ⊗ op2` applied to a field supported on `w1 × w2`; returns nonzero `(j1, j2, value)`.
fn local_tensor_project(
    op1_t: &SparseMatrix,
    op2_t: &SparseMatrix,
    w1: &[usize],
    w2: &[usize],
    value: impl Fn(usize, usize) -> f64,
) -> Vec<(usize, usize, f64)> {
    let mut rows2: Vec<usize> = w2.iter().flat_map(|&k| op2_t.row(k).0.iter().copied()).collect();
    rows2.sort_unstable();
    rows2.dedup();
    let mut rows1: Vec<usize> = w1.iter().flat_map(|&k| op1_t.row(k).0.iter().copied()).collect();
    rows1.sort_unstable();
    rows1.dedup();
    let pos2 = |j: usize| rows2.binary_search(&j).unwrap();
    let pos1 = |j: usize| rows1.binary_search(&j).unwrap();

    // first pass along ξ₂ for every ξ₁ node of the window
    let mut tmp = vec![0.0; w1.len() * rows2.len()];
    for (a, &k1) in w1.iter().enumerate() {
        if op1_t.row(k1).0.is_empty() {
            continue;
        }
        for &k2 in w2 {
            let g = value(k1, k2);
            if g == 0.0 {
                continue;
            }
            let (js, ws) = op2_t.row(k2);
            for (&j2, &w) in js.iter().zip(ws) {
                tmp[a * rows2.len() + pos2(j2)] += w * g;
            }
        }
    }
    let mut out = vec![0.0; rows1.len() * rows2.len()];
    for (a, &k1) in w1.iter().enumerate() {
        let (js, ws) = op1_t.row(k1);
        for (&j1, &w) in js.iter().zip(ws) {
            let r = pos1(j1);
            for b in 0..rows2.len() {
                out[r * rows2.len() + b] += w * tmp[a * rows2.len() + b];
            }
        }
    }
    let mut res = Vec::new();
    for (r, &j1) in rows1.iter().enumerate() {
        for (b, &j2) in rows2.iter().enumerate() {
            let v = out[r * rows2.len() + b];
            if v != 0.0 {
                res.push((j1, j2, v));
            }
        }
    }
    res
}
