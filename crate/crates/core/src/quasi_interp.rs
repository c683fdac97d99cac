//! Quasi-interpolant projectors of degree 2 and 3 and their commuting companions.
//!
//! A [`QuasiInterpolant1D`] computes each spline coefficient as a weighted
//! combination of point values at breakpoints and element midpoints. The
//! [`CommutativeProjector1D`] projects a function `g` onto the derivative space
//! by integrating `g` with composite Simpson quadrature, quasi-interpolating
//! the antiderivative and differentiating the result, so that projecting `∂f`
//! agrees with differentiating the projection of `f`.
//!
//! Samples are always taken on the fine grid `x_k = k h / 4`, `k = 0..=4e`.
//! Its even nodes are the breakpoints and midpoints `η`; the odd nodes are the
//! extra midpoints needed by Simpson's rule.

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::splines1d::SplineSpace1D;

/// Breakpoints, midpoints and quadrature midpoints of a uniform partition of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalGrid {
    elements: usize,
}

impl EvalGrid {
    pub fn new(elements: usize) -> Self {
        assert!(elements > 0);
        Self { elements }
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    /// Number of breakpoints and midpoints, `2z − 1`.
    pub fn eta_len(&self) -> usize {
        2 * self.elements + 1
    }

    pub fn eta(&self, j: usize) -> f64 {
        j as f64 / (2 * self.elements) as f64
    }

    pub fn eta_nodes(&self) -> Vec<f64> {
        (0..self.eta_len()).map(|j| self.eta(j)).collect()
    }

    /// Number of fine nodes (η plus Simpson midpoints).
    pub fn fine_len(&self) -> usize {
        4 * self.elements + 1
    }

    pub fn fine_node(&self, k: usize) -> f64 {
        k as f64 / (4 * self.elements) as f64
    }

    pub fn fine_nodes(&self) -> Vec<f64> {
        (0..self.fine_len()).map(|k| self.fine_node(k)).collect()
    }

    pub fn sample_fine(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.fine_len()).map(|k| f(self.fine_node(k))).collect()
    }

    pub fn sample_eta(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.eta_len()).map(|j| f(self.eta(j))).collect()
    }

    /// Simpson weights of the panel `[η_t, η_{t+1}]` for fine nodes `2t, 2t+1, 2t+2`.
    fn panel_weights(&self) -> [f64; 3] {
        let w = 1.0 / (2 * self.elements) as f64 / 6.0;
        [w, 4.0 * w, w]
    }
}

/// Neumaier's compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `F(η_j) = ∫₀^{η_j} f` by composite Simpson quadrature, from samples on the fine grid.
pub fn simpson_antiderivative_samples(grid: &EvalGrid, fine: &[f64]) -> Vec<f64> {
    assert_eq!(fine.len(), grid.fine_len(), "samples must cover the fine grid");
    let [w0, w1, w2] = grid.panel_weights();
    let mut acc = CompensatedSum::default();
    let mut out = Vec::with_capacity(grid.eta_len());
    out.push(0.0);
    for t in 0..grid.eta_len() - 1 {
        acc.add(w0 * fine[2 * t] + w1 * fine[2 * t + 1] + w2 * fine[2 * t + 2]);
        out.push(acc.value());
    }
    out
}

/// `F(η_j) = ∫₀^{η_j} f` by composite Simpson quadrature.
pub fn simpson_antiderivative(grid: &EvalGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    simpson_antiderivative_samples(grid, &grid.sample_fine(f))
}

/// A dual functional: weights applied to values at η nodes.
///
/// Node positions are unwrapped; periodic spaces reduce them modulo `2e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub nodes: Vec<isize>,
    pub weights: Vec<f64>,
}

impl Stencil {
    fn at(base: isize, weights: &[f64]) -> Self {
        Self {
            nodes: (0..weights.len() as isize).map(|o| base + o).collect(),
            weights: weights.to_vec(),
        }
    }
}

const QUADRATIC: [f64; 3] = [-0.5, 2.0, -0.5];
const CUBIC: [f64; 5] = [1.0 / 6.0, -4.0 / 3.0, 10.0 / 3.0, -4.0 / 3.0, 1.0 / 6.0];
const CUBIC_NEAR_BOUNDARY: [f64; 5] = [-5.0 / 18.0, 20.0 / 9.0, -4.0 / 3.0, 4.0 / 9.0, -1.0 / 18.0];

/// Quasi-interpolant onto a degree 2 or 3 spline space.
#[derive(Debug, Clone)]
pub struct QuasiInterpolant1D {
    space: SplineSpace1D,
    grid: EvalGrid,
    rows: Vec<Stencil>,
}

impl QuasiInterpolant1D {
    pub fn new(space: &SplineSpace1D) -> Result<Self> {
        let p = space.degree();
        if !(2..=3).contains(&p) {
            return Err(Error::UnsupportedDegree(p));
        }
        if space.is_curry_schoenberg() {
            return Err(Error::InvalidArgument("quasi-interpolants target unscaled B-spline spaces".into()));
        }
        let e = space.elements();
        if !space.is_periodic() && p == 3 && e < 2 {
            return Err(Error::InvalidArgument("the cubic boundary functionals need at least two elements".into()));
        }
        let rows = (0..space.dim()).map(|i| Self::row_stencil(space, i as isize)).collect();
        Ok(Self { space: space.clone(), grid: EvalGrid::new(e), rows })
    }

    /// Functional of row `i`. For periodic spaces `i` may run past the dimension;
    /// the stencil is then shifted by whole periods.
    fn row_stencil(space: &SplineSpace1D, i: isize) -> Stencil {
        let p = space.degree() as isize;
        let e = space.elements() as isize;
        let interior: &[f64] = if p == 2 { &QUADRATIC } else { &CUBIC };
        if space.is_periodic() {
            // η position of ξ_{i+1} on the closed vector ξ_k = (k − p) h
            return Stencil::at(2 * (i + 1 - p), interior);
        }
        let n = space.dim() as isize;
        if i == 0 {
            return Stencil::at(0, &[1.0]);
        }
        if i == n - 1 {
            return Stencil::at(2 * e, &[1.0]);
        }
        if p == 3 && i == 1 {
            return Stencil::at(0, &CUBIC_NEAR_BOUNDARY);
        }
        if p == 3 && i == n - 2 {
            let mut w = CUBIC_NEAR_BOUNDARY;
            w.reverse();
            return Stencil::at(2 * e - 4, &w);
        }
        // η position of ξ_{i+1} on the open vector ξ_k = clamp(k − p, 0, e) h
        Stencil::at(2 * (i + 1 - p), interior)
    }

    pub fn space(&self) -> &SplineSpace1D {
        &self.space
    }

    pub fn grid(&self) -> &EvalGrid {
        &self.grid
    }

    pub fn rows(&self) -> &[Stencil] {
        &self.rows
    }

    /// Copy with the largest-magnitude weight of row `row` changed by `delta`.
    ///
    /// Used as a negative control: a perturbed functional must break duality.
    pub fn with_weight_perturbation(&self, row: usize, delta: f64) -> Self {
        let mut out = self.clone();
        let st = &mut out.rows[row];
        let k = (0..st.weights.len())
            .max_by(|&a, &b| st.weights[a].abs().partial_cmp(&st.weights[b].abs()).unwrap())
            .unwrap();
        st.weights[k] += delta;
        out
    }

    #[inline]
    fn eta_index(&self, node: isize) -> usize {
        let m = 2 * self.grid.elements() as isize;
        if self.space.is_periodic() {
            node.rem_euclid(m) as usize
        } else {
            debug_assert!((0..=m).contains(&node));
            node as usize
        }
    }

    /// `λ_i(f)` from values of `f` on the η nodes.
    pub fn dual_functional(&self, i: usize, eta_samples: &[f64]) -> f64 {
        assert_eq!(eta_samples.len(), self.grid.eta_len(), "samples must cover the η nodes");
        let st = &self.rows[i];
        st.nodes
            .iter()
            .zip(&st.weights)
            .map(|(&n, &w)| w * eta_samples[self.eta_index(n)])
            .sum()
    }

    /// All coefficients `λ_i(f)` from values on the η nodes.
    pub fn project_eta(&self, eta_samples: &[f64]) -> Vec<f64> {
        (0..self.rows.len()).map(|i| self.dual_functional(i, eta_samples)).collect()
    }

    pub fn project(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.project_eta(&self.grid.sample_eta(f))
    }

    /// The projector as a matrix acting on samples over the fine grid.
    pub fn fine_operator(&self) -> SparseMatrix {
        let mut t = Vec::new();
        for (i, st) in self.rows.iter().enumerate() {
            for (&n, &w) in st.nodes.iter().zip(&st.weights) {
                t.push((i, 2 * self.eta_index(n), w));
            }
        }
        SparseMatrix::from_triplets(self.rows.len(), self.grid.fine_len(), &t)
    }
}

/// Projector onto the Curry–Schoenberg space of degree `p − 1` that commutes with differentiation.
#[derive(Debug, Clone)]
pub struct CommutativeProjector1D {
    qi: QuasiInterpolant1D,
    target: SplineSpace1D,
    deriv: SparseMatrix,
}

impl CommutativeProjector1D {
    /// Builds the projector from the degree-`p` space whose derivatives it receives.
    pub fn new(space: &SplineSpace1D) -> Result<Self> {
        let qi = QuasiInterpolant1D::new(space)?;
        Ok(Self::from_quasi_interpolant(qi))
    }

    pub fn from_quasi_interpolant(qi: QuasiInterpolant1D) -> Self {
        let target = qi.space.curry_schoenberg();
        let deriv = qi.space.derivative_matrix();
        Self { qi, target, deriv }
    }

    pub fn quasi_interpolant(&self) -> &QuasiInterpolant1D {
        &self.qi
    }

    pub fn target(&self) -> &SplineSpace1D {
        &self.target
    }

    pub fn grid(&self) -> &EvalGrid {
        &self.qi.grid
    }

    pub fn is_periodic(&self) -> bool {
        self.target.is_periodic()
    }

    /// `∂ π_p ∫₀ˣ g`, from samples of `g` on the fine grid.
    pub fn project_commutative_samples(&self, fine: &[f64]) -> Vec<f64> {
        let big_f = simpson_antiderivative_samples(self.grid(), fine);
        let c = self.qi.project_eta(&big_f);
        self.deriv.mul_vec(&c)
    }

    /// Periodic variant: the mean `ḡ` is split off, the zero-mean part is projected
    /// through its (periodic) antiderivative and `ḡ` is added back as a constant.
    pub fn project_commutative_periodic_samples(&self, fine: &[f64]) -> Vec<f64> {
        let grid = self.grid();
        let big_f = simpson_antiderivative_samples(grid, fine);
        let mean = big_f[grid.eta_len() - 1];
        let tilde: Vec<f64> = big_f.iter().enumerate().map(|(j, f)| f - mean * grid.eta(j)).collect();
        let c = self.qi.project_eta(&tilde);
        let mut out = self.deriv.mul_vec(&c);
        for (o, k) in out.iter_mut().zip(self.target.constant_coefficients()) {
            *o += mean * k;
        }
        out
    }

    /// Projects from fine-grid samples, choosing the periodic variant when appropriate.
    pub fn project_samples(&self, fine: &[f64]) -> Vec<f64> {
        if self.is_periodic() {
            self.project_commutative_periodic_samples(fine)
        } else {
            self.project_commutative_samples(fine)
        }
    }

    pub fn project(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        self.project_samples(&self.grid().sample_fine(g))
    }

    /// The projector as a sparse matrix acting on fine-grid samples.
    ///
    /// Row `j` is `(λ_{j+1} − λ_j)` applied to the Simpson antiderivative. Because
    /// the two functionals have equal weight sums, only the panels between their
    /// nodes contribute, which makes the row local. In the periodic case the
    /// antiderivative is continued across the seam as `F(x + 1) = F(x) + ḡ`,
    /// which is exactly what the mean-splitting construction computes.
    pub fn fine_operator(&self) -> SparseMatrix {
        let grid = self.grid();
        let eta_period = 2 * grid.elements() as isize;
        let [w0, w1, w2] = grid.panel_weights();
        let periodic = self.is_periodic();
        let mut t = Vec::new();
        for j in 0..self.target.dim() {
            let lo_row = &self.qi.rows[j];
            let hi_row = if periodic {
                QuasiInterpolant1D::row_stencil(&self.qi.space, j as isize + 1)
            } else {
                self.qi.rows[j + 1].clone()
            };
            // a = λ_{j+1} − λ_j over unwrapped η positions
            let mut a: Vec<(isize, f64)> = Vec::new();
            for (&n, &w) in hi_row.nodes.iter().zip(&hi_row.weights) {
                a.push((n, w));
            }
            for (&n, &w) in lo_row.nodes.iter().zip(&lo_row.weights) {
                a.push((n, -w));
            }
            let lo = a.iter().map(|x| x.0).min().unwrap();
            let hi = a.iter().map(|x| x.0).max().unwrap();
            for panel in lo..hi {
                let suffix: f64 = a.iter().filter(|x| x.0 > panel).map(|x| x.1).sum();
                if suffix == 0.0 {
                    continue;
                }
                let panel = if periodic { panel.rem_euclid(eta_period) } else { panel };
                for (o, w) in [w0, w1, w2].into_iter().enumerate() {
                    t.push((j, (2 * panel) as usize + o, suffix * w));
                }
            }
        }
        SparseMatrix::from_triplets(self.target.dim(), grid.fine_len(), &t)
    }
}

/// `λ_i(f)` of a quasi-interpolant from values on its η nodes.
pub fn dual_functional(qi: &QuasiInterpolant1D, i: usize, eta_samples: &[f64]) -> f64 {
    qi.dual_functional(i, eta_samples)
}

/// Quasi-interpolant coefficients of `f`.
pub fn project(qi: &QuasiInterpolant1D, f: impl Fn(f64) -> f64) -> Vec<f64> {
    qi.project(f)
}

/// Curry–Schoenberg coefficients of `∂ π_p ∫₀ˣ g` on an open space.
pub fn project_commutative(cp: &CommutativeProjector1D, g: impl Fn(f64) -> f64) -> Vec<f64> {
    cp.project_commutative_samples(&cp.grid().sample_fine(g))
}

/// Curry–Schoenberg coefficients of the mean-split commutative projection on a periodic space.
pub fn project_commutative_periodic(cp: &CommutativeProjector1D, g: impl Fn(f64) -> f64) -> Vec<f64> {
    cp.project_commutative_periodic_samples(&cp.grid().sample_fine(g))
}
