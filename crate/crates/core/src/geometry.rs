//! Parameterizations of the physical domain and the pull-backs of scalar and vector fields.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

pub type Point = [f64; 2];
/// `m[i][j] = ∂F_i / ∂ξ_j`.
pub type Jacobian = [[f64; 2]; 2];

/// A smooth map `F: [0, 1]² → Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryMap {
    UnitSquare,
    /// `F(ξ) = r(ξ₁) (cos(πξ₂/2), sin(πξ₂/2))` with `r` affine from `r_in` to `r_out`.
    QuarterAnnulus { r_in: f64, r_out: f64 },
}

pub fn unit_square() -> GeometryMap {
    GeometryMap::UnitSquare
}

pub fn quarter_annulus(r_in: f64, r_out: f64) -> Result<GeometryMap> {
    if !(r_in > 0.0 && r_out > r_in) {
        return Err(Error::InvalidArgument(format!(
            "quarter annulus needs 0 < r_in < r_out, got ({r_in}, {r_out})"
        )));
    }
    Ok(GeometryMap::QuarterAnnulus { r_in, r_out })
}

impl GeometryMap {
    pub fn is_identity(&self) -> bool {
        matches!(self, GeometryMap::UnitSquare)
    }

    /// Both maps may be used with periodic identification in the second direction.
    pub fn supports_periodic_second_direction(&self) -> bool {
        true
    }

    pub fn map(&self, xi: Point) -> Point {
        match *self {
            GeometryMap::UnitSquare => xi,
            GeometryMap::QuarterAnnulus { r_in, r_out } => {
                let r = r_in + (r_out - r_in) * xi[0];
                let (s, c) = (FRAC_PI_2 * xi[1]).sin_cos();
                [r * c, r * s]
            }
        }
    }

    pub fn jacobian(&self, xi: Point) -> Jacobian {
        match *self {
            GeometryMap::UnitSquare => [[1.0, 0.0], [0.0, 1.0]],
            GeometryMap::QuarterAnnulus { r_in, r_out } => {
                let dr = r_out - r_in;
                let r = r_in + dr * xi[0];
                let (s, c) = (FRAC_PI_2 * xi[1]).sin_cos();
                [[dr * c, -FRAC_PI_2 * r * s], [dr * s, FRAC_PI_2 * r * c]]
            }
        }
    }

    pub fn det(&self, xi: Point) -> f64 {
        det(&self.jacobian(xi))
    }

    /// `ι²(f)(ξ) = det DF(ξ) · f(F(ξ))`.
    pub fn pullback_scalar<'a>(&'a self, f: impl Fn(Point) -> f64 + 'a) -> impl Fn(Point) -> f64 + 'a {
        move |xi| self.det(xi) * f(self.map(xi))
    }

    /// Piola pull-back `ι¹(v)(ξ) = det DF(ξ) · DF(ξ)⁻¹ · v(F(ξ))`.
    pub fn pullback_vector<'a>(&'a self, v: impl Fn(Point) -> Point + 'a) -> impl Fn(Point) -> Point + 'a {
        move |xi| self.piola_pullback_at(xi, v(self.map(xi)))
    }

    /// `det DF · DF⁻¹ · v` at one point, i.e. the adjugate of DF applied to `v`.
    pub fn piola_pullback_at(&self, xi: Point, v: Point) -> Point {
        let m = self.jacobian(xi);
        [m[1][1] * v[0] - m[0][1] * v[1], -m[1][0] * v[0] + m[0][0] * v[1]]
    }

    /// Inverse Piola map `DF · v̂ / det DF`.
    pub fn push_forward_vector(&self, xi: Point, v: Point) -> Point {
        let m = self.jacobian(xi);
        let j = det(&m);
        [(m[0][0] * v[0] + m[0][1] * v[1]) / j, (m[1][0] * v[0] + m[1][1] * v[1]) / j]
    }

    /// Physical gradient `DF⁻ᵀ ∇̂f̂` of a scalar pulled back by composition.
    pub fn physical_gradient(&self, xi: Point, grad_hat: Point) -> Point {
        let m = self.jacobian(xi);
        let j = det(&m);
        [
            (m[1][1] * grad_hat[0] - m[1][0] * grad_hat[1]) / j,
            (-m[0][1] * grad_hat[0] + m[0][0] * grad_hat[1]) / j,
        ]
    }

    /// Checks `det DF > 0` on an `n × n` sample grid.
    pub fn validate(&self, n: usize) -> Result<()> {
        for a in 0..n {
            for b in 0..n {
                let xi = [a as f64 / (n - 1) as f64, b as f64 / (n - 1) as f64];
                let d = self.det(xi);
                if !(d > 0.0) {
                    return Err(Error::SingularMap(xi[0], xi[1]));
                }
            }
        }
        Ok(())
    }
}

pub fn det(m: &Jacobian) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// The wave speed `c` on the physical domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    /// `sin(2πx₁) sin(2πx₂) + 2`.
    SineProduct,
}

impl Coefficient {
    pub fn value(&self, x: Point) -> f64 {
        match *self {
            Coefficient::Constant(c) => c,
            Coefficient::SineProduct => {
                let tau = 2.0 * std::f64::consts::PI;
                (tau * x[0]).sin() * (tau * x[1]).sin() + 2.0
            }
        }
    }

    pub fn gradient(&self, x: Point) -> Point {
        match *self {
            Coefficient::Constant(_) => [0.0, 0.0],
            Coefficient::SineProduct => {
                let tau = 2.0 * std::f64::consts::PI;
                let (s0, c0) = (tau * x[0]).sin_cos();
                let (s1, c1) = (tau * x[1]).sin_cos();
                [tau * c0 * s1, tau * s0 * c1]
            }
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match *self {
            Coefficient::Constant(c) => Some(c),
            Coefficient::SineProduct => None,
        }
    }

    /// `ĉ(ξ) = c(F(ξ))`.
    pub fn parametric_value(&self, map: &GeometryMap, xi: Point) -> f64 {
        self.value(map.map(xi))
    }

    /// `∇̂ĉ = DFᵀ ∇c`.
    pub fn parametric_gradient(&self, map: &GeometryMap, xi: Point) -> Point {
        let g = self.gradient(map.map(xi));
        let m = map.jacobian(xi);
        [m[0][0] * g[0] + m[1][0] * g[1], m[0][1] * g[0] + m[1][1] * g[1]]
    }

    /// Checks positivity on an `n × n` sample grid and, when requested, that `ĉ`
    /// takes equal values on the faces `ξ₂ = 0` and `ξ₂ = 1`.
    pub fn validate(&self, map: &GeometryMap, periodic: bool, n: usize) -> Result<()> {
        for a in 0..n {
            let s = a as f64 / (n - 1) as f64;
            for b in 0..n {
                let t = b as f64 / (n - 1) as f64;
                let c = self.parametric_value(map, [s, t]);
                if !(c > 0.0) {
                    return Err(Error::InvalidArgument(format!("coefficient not positive at ({s}, {t})")));
                }
            }
            if periodic {
                let gap = (self.parametric_value(map, [s, 0.0]) - self.parametric_value(map, [s, 1.0])).abs();
                if gap > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "coefficient is not periodic across the seam at ξ₁ = {s} (gap {gap:e})"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn annulus() -> GeometryMap {
        quarter_annulus(1.0, 2.0).unwrap()
    }

    #[test]
    fn identity_map() {
        let m = unit_square();
        assert_eq!(m.map([0.3, 0.7]), [0.3, 0.7]);
        assert_eq!(m.det([0.2, 0.9]), 1.0);
        let v = m.pullback_vector(|x| [x[0] + 1.0, -x[1]]);
        assert_eq!(v([0.25, 0.5]), [1.25, -0.5]);
        let f = m.pullback_scalar(|x| x[0] * x[1]);
        assert_eq!(f([0.5, 0.5]), 0.25);
        let constant = m.pullback_vector(|_| [2.0, 3.0]);
        assert_eq!(constant([0.1, 0.4]), [2.0, 3.0]);
    }

    #[test]
    fn annulus_corners_and_determinant() {
        let m = annulus();
        let a = m.map([0.0, 0.0]);
        let b = m.map([1.0, 1.0]);
        assert!((a[0] - 1.0).abs() < 1e-15 && a[1].abs() < 1e-15);
        assert!(b[0].abs() < 1e-15 && (b[1] - 2.0).abs() < 1e-15);
        assert!((m.det([0.0, 0.3]) - PI / 2.0).abs() < 1e-14);
        for i in 0..=10 {
            for j in 0..=10 {
                let x = m.map([i as f64 / 10.0, j as f64 / 10.0]);
                let r = x[0].hypot(x[1]);
                assert!((1.0 - 1e-14..=2.0 + 1e-14).contains(&r));
            }
        }
        m.validate(100).unwrap();
        assert!(quarter_annulus(0.0, 1.0).is_err());
        assert!(quarter_annulus(2.0, 1.0).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = annulus();
        let h = 1e-6;
        for i in 0..=8 {
            for j in 0..=8 {
                let xi = [0.05 + 0.9 * i as f64 / 8.0, 0.05 + 0.9 * j as f64 / 8.0];
                let jac = m.jacobian(xi);
                for d in 0..2 {
                    let mut a = xi;
                    let mut b = xi;
                    a[d] += h;
                    b[d] -= h;
                    let (fa, fb) = (m.map(a), m.map(b));
                    for r in 0..2 {
                        assert!(((fa[r] - fb[r]) / (2.0 * h) - jac[r][d]).abs() < 1e-7);
                    }
                }
            }
        }
    }

    #[test]
    fn area_by_quadrature() {
        let m = annulus();
        let f = m.pullback_scalar(|_| 1.0);
        let (nodes, weights) = crate::assembly::gauss_legendre(6);
        let e = 8;
        let mut area = 0.0;
        for a in 0..e {
            for b in 0..e {
                for (x, wx) in nodes.iter().zip(&weights) {
                    for (y, wy) in nodes.iter().zip(&weights) {
                        let xi = [(a as f64 + x) / e as f64, (b as f64 + y) / e as f64];
                        area += wx * wy * f(xi) / (e * e) as f64;
                    }
                }
            }
        }
        assert!((area - 3.0 * PI / 4.0).abs() < 1e-10);
    }

    #[test]
    fn piola_commutes_with_divergence() {
        let v = |x: Point| [(x[0] * x[1]).sin() + x[0] * x[0], (x[1] - 0.3 * x[0]).cos() * x[1]];
        let div_v = |x: Point| x[1] * (x[0] * x[1]).cos() + 2.0 * x[0] - (x[1] - 0.3 * x[0]).sin() * x[1] + (x[1] - 0.3 * x[0]).cos();
        for m in [unit_square(), annulus()] {
            let vh = m.pullback_vector(v);
            let dh = m.pullback_scalar(div_v);
            let h = 1e-5;
            for i in 1..8 {
                for j in 1..8 {
                    let xi = [i as f64 / 8.0, j as f64 / 8.0];
                    let d1 = (vh([xi[0] + h, xi[1]])[0] - vh([xi[0] - h, xi[1]])[0]) / (2.0 * h);
                    let d2 = (vh([xi[0], xi[1] + h])[1] - vh([xi[0], xi[1] - h])[1]) / (2.0 * h);
                    assert!((d1 + d2 - dh(xi)).abs() < 1e-8, "{m:?} at {xi:?}");
                }
            }
        }
    }

    #[test]
    fn push_forward_inverts_pullback() {
        let m = annulus();
        let xi = [0.3, 0.8];
        let v = [0.7, -1.2];
        let back = m.push_forward_vector(xi, m.piola_pullback_at(xi, v));
        assert!((back[0] - v[0]).abs() < 1e-14 && (back[1] - v[1]).abs() < 1e-14);
    }

    #[test]
    fn coefficient_properties() {
        let c = Coefficient::SineProduct;
        c.validate(&annulus(), true, 100).unwrap();
        c.validate(&unit_square(), false, 50).unwrap();
        let x = [0.3, 1.4];
        let h = 1e-6;
        let g = c.gradient(x);
        let fd0 = (c.value([x[0] + h, x[1]]) - c.value([x[0] - h, x[1]])) / (2.0 * h);
        let fd1 = (c.value([x[0], x[1] + h]) - c.value([x[0], x[1] - h])) / (2.0 * h);
        assert!((g[0] - fd0).abs() < 1e-7 && (g[1] - fd1).abs() < 1e-7);
        // parametric gradient by the chain rule
        let m = annulus();
        let xi = [0.4, 0.35];
        let gh = c.parametric_gradient(&m, xi);
        let fd = (c.parametric_value(&m, [xi[0], xi[1] + h]) - c.parametric_value(&m, [xi[0], xi[1] - h])) / (2.0 * h);
        assert!((gh[1] - fd).abs() < 1e-6);
    }
}
