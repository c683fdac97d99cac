use super::sparse::{axpy, dot, norm2, SparseMatrix};
use crate::error::{Error, Result};

/// Jacobi-preconditioned conjugate gradients.
#[derive(Debug, Clone, Copy)]
pub struct CgConfig {
    pub rel_tol: f64,
    /// Iteration cap as a multiple of the system dimension.
    pub max_iter_factor: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-13, max_iter_factor: 10 }
    }
}

pub fn conjugate_gradient(a: &SparseMatrix, b: &[f64], x0: Option<&[f64]>, cfg: CgConfig) -> Result<Vec<f64>> {
    a.check_square()?;
    let n = a.nrows();
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut r: Vec<f64> = b.iter().zip(a.mul_vec(&x)).map(|(bi, ax)| bi - ax).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let max_iter = cfg.max_iter_factor * n.max(1);
    for _ in 0..max_iter {
        if norm2(&r) <= cfg.rel_tol * bnorm {
            return Ok(x);
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: 0, value: pap });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        for ((zi, ri), di) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri * di;
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    let res = norm2(&r) / bnorm;
    if res <= cfg.rel_tol {
        Ok(x)
    } else {
        Err(Error::CgNotConverged { iterations: max_iter, residual: res })
    }
}
