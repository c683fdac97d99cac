//! Univariate B-spline spaces on uniform breakpoint grids.
//!
//! Two kinds of knot vectors are supported: open vectors (boundary knots
//! repeated `p + 1` times, simple interior knots) and uniformly spaced closed
//! vectors whose first and last `p` basis functions are glued together to form
//! a periodic basis. Periodic identification is done through an index wrap:
//! raw basis function `r` contributes to periodic function `r mod e`.
//!
//! A space can also carry Curry–Schoenberg scaling, in which case basis
//! function `j` is `p / (ξ_{j+p+1} − ξ_{j+1}) · B_{j+1,p−1}`; such spaces are
//! produced by [`SplineSpace1D::curry_schoenberg`] and are the targets of
//! [`SplineSpace1D::derivative_matrix`].

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

/// Largest degree handled by the fixed-size evaluation buffers.
pub const MAX_DEGREE: usize = 9;
pub(crate) const BUF: usize = MAX_DEGREE + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KnotKind {
    Open,
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    kind: KnotKind,
    elements: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    fn uniform_unchecked(degree: usize, elements: usize, kind: KnotKind) -> Self {
        let h = 1.0 / elements as f64;
        let knots = match kind {
            KnotKind::Open => {
                let mut k = vec![0.0; degree + 1];
                k.extend((1..elements).map(|i| i as f64 * h));
                k.extend(std::iter::repeat_n(1.0, degree + 1));
                k
            }
            KnotKind::Periodic => (0..=elements + 2 * degree)
                .map(|j| (j as f64 - degree as f64) * h)
                .collect(),
        };
        Self { degree, kind, elements, knots }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn kind(&self) -> KnotKind {
        self.kind
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Distinct knot values with their multiplicities.
    pub fn breakpoints(&self) -> (Vec<f64>, Vec<usize>) {
        let mut z: Vec<f64> = Vec::new();
        let mut m: Vec<usize> = Vec::new();
        for &k in &self.knots {
            match z.last() {
                Some(&last) if last == k => *m.last_mut().unwrap() += 1,
                _ => {
                    z.push(k);
                    m.push(1);
                }
            }
        }
        (z, m)
    }

    /// Number of raw (unidentified) B-splines, `n` in `ξ₁ … ξ_{n+p+1}`.
    pub fn raw_count(&self) -> usize {
        self.knots.len() - self.degree - 1
    }
}

/// A univariate spline space with uniform breakpoints on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSpace1D {
    knots: KnotVector,
    dim: usize,
    /// Curry–Schoenberg factors per raw index, if this is a derivative space.
    scale: Option<Vec<f64>>,
}

/// Builds a uniform open or periodic spline space of degree `p` with `num_elements` cells.
pub fn make_uniform_space(p: usize, num_elements: usize, kind: KnotKind) -> Result<SplineSpace1D> {
    SplineSpace1D::uniform(p, num_elements, kind)
}

impl SplineSpace1D {
    pub fn uniform(p: usize, elements: usize, kind: KnotKind) -> Result<Self> {
        if p == 0 || p > MAX_DEGREE {
            return Err(Error::InvalidArgument(format!("degree must lie in 1..={MAX_DEGREE}, got {p}")));
        }
        if elements == 0 {
            return Err(Error::InvalidArgument("a spline space needs at least one element".into()));
        }
        if kind == KnotKind::Periodic && elements < p {
            return Err(Error::InvalidArgument(format!(
                "a periodic space of degree {p} needs at least {p} elements, got {elements}"
            )));
        }
        Ok(Self::uniform_unchecked(p, elements, kind))
    }

    fn uniform_unchecked(p: usize, elements: usize, kind: KnotKind) -> Self {
        let knots = KnotVector::uniform_unchecked(p, elements, kind);
        let dim = match kind {
            KnotKind::Open => knots.raw_count(),
            KnotKind::Periodic => elements,
        };
        Self { knots, dim, scale: None }
    }

    pub fn degree(&self) -> usize {
        self.knots.degree
    }

    pub fn elements(&self) -> usize {
        self.knots.elements
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> KnotKind {
        self.knots.kind
    }

    pub fn is_periodic(&self) -> bool {
        self.knots.kind == KnotKind::Periodic
    }

    pub fn is_curry_schoenberg(&self) -> bool {
        self.scale.is_some()
    }

    pub fn knot_vector(&self) -> &KnotVector {
        &self.knots
    }

    pub fn element_width(&self) -> f64 {
        1.0 / self.elements() as f64
    }

    /// Breakpoints `ζ₁ … ζ_z` of the parametric interval.
    pub fn breakpoints(&self) -> Vec<f64> {
        let e = self.elements();
        (0..=e).map(|i| i as f64 / e as f64).collect()
    }

    /// Maps a raw B-spline index onto the space's basis index.
    #[inline]
    pub fn wrap(&self, raw: usize) -> usize {
        if self.is_periodic() {
            raw % self.elements()
        } else {
            raw
        }
    }

    #[inline]
    fn raw_scale(&self, raw: usize) -> f64 {
        self.scale.as_ref().map_or(1.0, |s| s[raw])
    }

    /// Knot span `μ` with `ξ_μ ≤ x < ξ_{μ+1}` restricted to `[0, 1]`; `x = 1` uses the last span.
    #[inline]
    fn span(&self, x: f64) -> usize {
        let p = self.degree();
        let e = self.elements();
        let t = &self.knots.knots;
        let mut s = ((x * e as f64).floor().max(0.0) as usize).min(e - 1);
        while s > 0 && x < t[p + s] {
            s -= 1;
        }
        while s + 1 < e && x >= t[p + s + 1] {
            s += 1;
        }
        p + s
    }

    /// Nonzero raw basis values at `x`; returns the first raw index. `x` is clamped to `[0, 1]`.
    #[inline]
    pub(crate) fn raw_values(&self, x: f64, out: &mut [f64; BUF]) -> usize {
        let x = x.clamp(0.0, 1.0);
        let p = self.degree();
        let span = self.span(x);
        cox_de_boor(span, x, p, &self.knots.knots, out);
        let first = span - p;
        if self.scale.is_some() {
            for (r, v) in out.iter_mut().take(p + 1).enumerate() {
                *v *= self.raw_scale(first + r);
            }
        }
        first
    }

    /// Nonzero raw basis values and first derivatives at `x`; returns the first raw index.
    pub(crate) fn raw_values_and_derivatives(&self, x: f64, vals: &mut [f64; BUF], ders: &mut [f64; BUF]) -> usize {
        let x = x.clamp(0.0, 1.0);
        let p = self.degree();
        let t = &self.knots.knots;
        let span = self.span(x);
        cox_de_boor(span, x, p, t, vals);
        let first = span - p;
        ders.iter_mut().for_each(|d| *d = 0.0);
        if p > 0 {
            let mut low = [0.0; BUF];
            cox_de_boor(span, x, p - 1, t, &mut low);
            // low[r] is N_{span-p+1+r, p-1}
            let pf = p as f64;
            for r in 0..=p {
                let j = first + r;
                let mut d = 0.0;
                if r >= 1 {
                    let den = t[j + p] - t[j];
                    if den > 0.0 {
                        d += pf / den * low[r - 1];
                    }
                }
                if r < p {
                    let den = t[j + p + 1] - t[j + 1];
                    if den > 0.0 {
                        d -= pf / den * low[r];
                    }
                }
                ders[r] = d;
            }
        }
        if self.scale.is_some() {
            for r in 0..=p {
                let s = self.raw_scale(first + r);
                vals[r] *= s;
                ders[r] *= s;
            }
        }
        first
    }

    /// The ≤ p+1 nonzero basis values at `x`, as `(index, value)` pairs.
    pub fn eval_basis(&self, x: f64) -> Result<Vec<(usize, f64)>> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain { x });
        }
        let mut vals = [0.0; BUF];
        let first = self.raw_values(x, &mut vals);
        Ok(self.collect_wrapped(first, &vals))
    }

    /// Nonzero basis values and derivatives at `x`, as `(index, value, derivative)`.
    pub fn eval_basis_with_derivatives(&self, x: f64) -> Result<Vec<(usize, f64, f64)>> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain { x });
        }
        let mut vals = [0.0; BUF];
        let mut ders = [0.0; BUF];
        let first = self.raw_values_and_derivatives(x, &mut vals, &mut ders);
        let mut out: Vec<(usize, f64, f64)> = Vec::with_capacity(self.degree() + 1);
        for r in 0..=self.degree() {
            let idx = self.wrap(first + r);
            match out.iter_mut().find(|(i, _, _)| *i == idx) {
                Some(entry) => {
                    entry.1 += vals[r];
                    entry.2 += ders[r];
                }
                None => out.push((idx, vals[r], ders[r])),
            }
        }
        Ok(out)
    }

    fn collect_wrapped(&self, first: usize, vals: &[f64; BUF]) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.degree() + 1);
        for (r, &v) in vals.iter().take(self.degree() + 1).enumerate() {
            let idx = self.wrap(first + r);
            match out.iter_mut().find(|(i, _)| *i == idx) {
                Some(entry) => entry.1 += v,
                None => out.push((idx, v)),
            }
        }
        out
    }

    /// Value of basis function `i` at `x`.
    pub fn basis_value(&self, i: usize, x: f64) -> Result<f64> {
        Ok(self
            .eval_basis(x)?
            .into_iter()
            .filter(|&(j, _)| j == i)
            .map(|(_, v)| v)
            .sum())
    }

    /// Evaluates `Σ cᵢ Bᵢ(x)`.
    pub fn eval(&self, coeffs: &[f64], x: f64) -> f64 {
        debug_assert_eq!(coeffs.len(), self.dim);
        let mut vals = [0.0; BUF];
        let first = self.raw_values(x, &mut vals);
        (0..=self.degree()).map(|r| coeffs[self.wrap(first + r)] * vals[r]).sum()
    }

    /// Evaluates `d/dx Σ cᵢ Bᵢ(x)`.
    pub fn eval_derivative(&self, coeffs: &[f64], x: f64) -> f64 {
        let mut vals = [0.0; BUF];
        let mut ders = [0.0; BUF];
        let first = self.raw_values_and_derivatives(x, &mut vals, &mut ders);
        (0..=self.degree()).map(|r| coeffs[self.wrap(first + r)] * ders[r]).sum()
    }

    /// The Curry–Schoenberg space of degree `p − 1` that receives derivatives of this space.
    pub fn curry_schoenberg(&self) -> SplineSpace1D {
        assert!(self.scale.is_none(), "Curry–Schoenberg space of an already scaled space");
        let p = self.degree();
        let e = self.elements();
        let mut target = Self::uniform_unchecked(p - 1, e, self.kind());
        let t = &self.knots.knots;
        let raw = target.knots.raw_count();
        let scale = (0..raw)
            .map(|j| {
                let den = t[j + p + 1] - t[j + 1];
                assert!(den > 0.0, "zero-length Curry–Schoenberg support");
                p as f64 / den
            })
            .collect();
        target.scale = Some(scale);
        target
    }

    /// `D_{i,p−1}(x)` for basis index `i` of this (unscaled) space's derivative space.
    pub fn curry_schoenberg_value(&self, i: usize, x: f64) -> Result<f64> {
        let target = self.curry_schoenberg();
        if i >= target.dim() {
            return Err(Error::InvalidArgument(format!(
                "Curry–Schoenberg index {i} outside 0..{}",
                target.dim()
            )));
        }
        target.basis_value(i, x)
    }

    /// Matrix mapping coefficients of this space onto Curry–Schoenberg coefficients of the derivative.
    pub fn derivative_matrix(&self) -> SparseMatrix {
        assert!(self.scale.is_none(), "derivative of a scaled space is not supported");
        let n = self.dim;
        let mut t = Vec::with_capacity(2 * n);
        match self.kind() {
            KnotKind::Open => {
                for j in 0..n - 1 {
                    t.push((j, j, -1.0));
                    t.push((j, j + 1, 1.0));
                }
                SparseMatrix::from_triplets(n - 1, n, &t)
            }
            KnotKind::Periodic => {
                for j in 0..n {
                    t.push((j, j, -1.0));
                    t.push((j, (j + 1) % n, 1.0));
                }
                SparseMatrix::from_triplets(n, n, &t)
            }
        }
    }

    /// Coefficients representing the constant function 1.
    pub fn constant_coefficients(&self) -> Vec<f64> {
        match &self.scale {
            None => vec![1.0; self.dim],
            Some(s) => (0..self.dim).map(|j| 1.0 / s[j]).collect(),
        }
    }

    /// `∫₀¹ Bᵢ` for every basis function.
    pub fn integrals(&self) -> Vec<f64> {
        let p = self.degree();
        let t = &self.knots.knots;
        let mut out = vec![0.0; self.dim];
        for raw in 0..self.knots.raw_count() {
            let lo = t[raw].max(0.0);
            let hi = t[raw + p + 1].min(1.0);
            if hi <= lo {
                continue;
            }
            // full-support integral when the support lies inside [0, 1]; periodic raw
            // functions sticking out are completed by their wrapped partner
            let full = (t[raw + p + 1] - t[raw]) / (p as f64 + 1.0);
            let inside = if t[raw] >= 0.0 && t[raw + p + 1] <= 1.0 {
                full
            } else {
                partial_integral(self, raw, lo, hi)
            };
            out[self.wrap(raw)] += inside * self.raw_scale(raw);
        }
        out
    }
}

/// Integral of raw function `raw` over `[lo, hi]` by per-element Gauss–Legendre quadrature.
fn partial_integral(space: &SplineSpace1D, raw: usize, lo: f64, hi: f64) -> f64 {
    let (nodes, weights) = crate::assembly::gauss_legendre(space.degree() + 1);
    let e = space.elements();
    let h = 1.0 / e as f64;
    let mut total = 0.0;
    let mut vals = [0.0; BUF];
    for el in 0..e {
        let (a, b) = (el as f64 * h, (el + 1) as f64 * h);
        if b <= lo || a >= hi {
            continue;
        }
        for (xq, wq) in nodes.iter().zip(&weights) {
            let x = a + h * xq;
            let first = space.span(x) - space.degree();
            cox_de_boor(space.span(x), x, space.degree(), &space.knots.knots, &mut vals);
            if raw >= first && raw <= first + space.degree() {
                total += wq * h * vals[raw - first];
            }
        }
    }
    total
}

/// Cox–de Boor triangle: `out[r] = N_{span−p+r, p}(x)` for `r = 0..=p`.
#[inline]
pub(crate) fn cox_de_boor(span: usize, x: f64, p: usize, t: &[f64], out: &mut [f64; BUF]) {
    let mut left = [0.0; BUF];
    let mut right = [0.0; BUF];
    out[0] = 1.0;
    for j in 1..=p {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn open_quadratic_knots() {
        let s = make_uniform_space(2, 5, KnotKind::Open).unwrap();
        let expect = [0.0, 0.0, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.0, 1.0];
        for (a, b) in s.knot_vector().knots().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(s.dim(), 7);
        let (z, m) = s.knot_vector().breakpoints();
        assert_eq!(z.len(), 6);
        assert_eq!(m.iter().sum::<usize>(), 10);
    }

    #[test]
    fn linear_single_element() {
        let s = make_uniform_space(1, 1, KnotKind::Open).unwrap();
        assert_eq!(s.knot_vector().knots(), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(s.dim(), 2);
        let b = s.eval_basis(0.5).unwrap();
        assert_eq!(b, vec![(0, 0.5), (1, 0.5)]);
    }

    #[test]
    fn periodic_cubic_dimension() {
        let s = make_uniform_space(3, 8, KnotKind::Periodic).unwrap();
        assert_eq!(s.knot_vector().raw_count() - 3, 8);
        assert_eq!(s.dim(), 8);
    }

    #[test]
    fn periodic_needs_enough_elements() {
        assert!(make_uniform_space(3, 2, KnotKind::Periodic).is_err());
        assert!(make_uniform_space(0, 4, KnotKind::Open).is_err());
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let s = make_uniform_space(2, 4, KnotKind::Open).unwrap();
        assert!(matches!(s.eval_basis(1.5), Err(Error::OutOfDomain { .. })));
        assert!(s.eval_basis(-0.1).is_err());
    }

    #[test]
    fn quadratic_at_interior_breakpoint() {
        let s = make_uniform_space(2, 5, KnotKind::Open).unwrap();
        let b = s.eval_basis(0.4).unwrap();
        let nz: Vec<_> = b.iter().filter(|(_, v)| v.abs() > 1e-14).collect();
        assert_eq!(nz.len(), 2);
        for (_, v) in nz {
            assert!((v - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn last_function_is_one_at_right_end() {
        let s = make_uniform_space(3, 6, KnotKind::Open).unwrap();
        let b = s.eval_basis(1.0).unwrap();
        let last = b.iter().find(|(i, _)| *i == s.dim() - 1).unwrap();
        assert!((last.1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn curry_schoenberg_uniform_scale_and_unit_integral() {
        let s = make_uniform_space(3, 10, KnotKind::Open).unwrap();
        let d = s.curry_schoenberg();
        let h = 0.1;
        // interior function: p / (p h) = 1 / h
        let x = 0.45;
        let i = 5;
        let raw = make_uniform_space(2, 10, KnotKind::Open).unwrap();
        let ratio = s.curry_schoenberg_value(i, x).unwrap() / raw.basis_value(i, x).unwrap();
        assert!((ratio - 1.0 / h).abs() < 1e-12);
        // brute-force midpoint integration of every D_i
        let m = 20000;
        for j in 0..d.dim() {
            let mut acc = 0.0;
            for q in 0..m {
                let x = (q as f64 + 0.5) / m as f64;
                acc += d.basis_value(j, x).unwrap() / m as f64;
            }
            assert!((acc - 1.0).abs() < 1e-6, "∫D_{j} = {acc}");
        }
        let ints = d.integrals();
        for v in ints {
            assert!((v - 1.0).abs() < 1e-13);
        }
        assert!(s.curry_schoenberg_value(d.dim(), 0.5).is_err());
    }

    #[test]
    fn derivative_matrix_structure() {
        let s = make_uniform_space(2, 6, KnotKind::Open).unwrap();
        let d = s.derivative_matrix();
        assert_eq!(d.shape(), (s.dim() - 1, s.dim()));
        for j in 0..d.nrows() {
            assert_eq!(d.get(j, j), -1.0);
            assert_eq!(d.get(j, j + 1), 1.0);
        }
        let ones = vec![1.0; s.dim()];
        assert!(d.mul_vec(&ones).iter().all(|v| *v == 0.0));

        let p = make_uniform_space(3, 7, KnotKind::Periodic).unwrap();
        let dp = p.derivative_matrix();
        assert_eq!(dp.shape(), (7, 7));
        assert_eq!(dp.get(6, 0), 1.0);
        assert!(dp.mul_vec(&[1.0; 7]).iter().all(|v| *v == 0.0));
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / ((1u64 << 53) as f64)
    }

    #[test]
    fn derivative_matrix_matches_finite_differences() {
        for kind in [KnotKind::Open, KnotKind::Periodic] {
            for p in 1..=4 {
                let s = make_uniform_space(p, 9, kind).unwrap();
                let target = s.curry_schoenberg();
                let dm = s.derivative_matrix();
                let mut seed = 17 + p as u64;
                let c: Vec<f64> = (0..s.dim()).map(|_| 2.0 * lcg(&mut seed) - 1.0).collect();
                let dc = dm.mul_vec(&c);
                let step = 1e-6;
                for k in 0..50 {
                    let x = 0.01 + 0.98 * (k as f64 + 0.5) / 50.0;
                    let fd = (s.eval(&c, x + step) - s.eval(&c, x - step)) / (2.0 * step);
                    let exact = target.eval(&dc, x);
                    assert!((fd - exact).abs() <= 1e-5, "p={p} {kind:?} x={x}: {fd} vs {exact}");
                    let analytic = s.eval_derivative(&c, x);
                    assert!((analytic - exact).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn periodic_smoothness_across_seam() {
        for p in 1..=4 {
            let s = make_uniform_space(p, 7, KnotKind::Periodic).unwrap();
            let mut seed = 99;
            let c: Vec<f64> = (0..s.dim()).map(|_| lcg(&mut seed)).collect();
            // successive derivative spaces: value and derivatives up to order p-1 match
            let mut space = s.clone();
            let mut coeffs = c.clone();
            for order in 0..p {
                let left = space.eval(&coeffs, 1.0 - 1e-12);
                let right = space.eval(&coeffs, 0.0);
                let scale = coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
                assert!((left - right).abs() <= 1e-9 * scale, "p={p} order={order}");
                if order + 1 < p {
                    let dm = space.derivative_matrix();
                    coeffs = dm.mul_vec(&coeffs);
                    let cs = space.curry_schoenberg();
                    // re-express as plain periodic space of one degree lower
                    let h = cs.element_width();
                    coeffs.iter_mut().for_each(|v| *v /= h);
                    space = SplineSpace1D::uniform_unchecked(cs.degree(), cs.elements(), KnotKind::Periodic);
                }
            }
        }
    }

    #[test]
    fn periodic_seam_finite_differences() {
        let s = make_uniform_space(3, 8, KnotKind::Periodic).unwrap();
        let mut seed = 5;
        let c: Vec<f64> = (0..8).map(|_| lcg(&mut seed)).collect();
        let step = 1e-4;
        let left = (s.eval(&c, 1.0) - s.eval(&c, 1.0 - step)) / step;
        let right = (s.eval(&c, step) - s.eval(&c, 0.0)) / step;
        assert!((left - right).abs() < 1e-2);
        assert!((s.eval_derivative(&c, 1.0) - s.eval_derivative(&c, 0.0)).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn partition_of_unity_and_nonnegativity(
            x in 0.0f64..=1.0,
            p in 1usize..=5,
            e in 5usize..=20,
            periodic in any::<bool>(),
        ) {
            let kind = if periodic { KnotKind::Periodic } else { KnotKind::Open };
            let s = make_uniform_space(p, e, kind).unwrap();
            let b = s.eval_basis(x).unwrap();
            prop_assert!(b.len() <= p + 1);
            let sum: f64 = b.iter().map(|(_, v)| v).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-13);
            prop_assert!(b.iter().all(|(_, v)| *v >= -1e-14));
        }
    }
}
