//! Shift-invert block inverse iteration for `K x = λ M x`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::skyline::SkylineLdl;
use super::sparse::{norm2, SparseMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// M-normalized eigenvector.
    pub vector: Vec<f64>,
    /// `‖K x − λ M x‖₂ / ‖x‖_M`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Extra subspace vectors beyond the requested count.
    pub guard_vectors: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 500, guard_vectors: 6, seed: 0x5eed }
    }
}

/// The `count` eigenpairs of `K x = λ M x` nearest to `shift`, sorted ascending by eigenvalue.
pub fn generalized_eig_near(
    k: &SparseMatrix,
    m: &SparseMatrix,
    shift: f64,
    count: usize,
    opts: EigenOptions,
) -> Result<Vec<EigenPair>> {
    k.check_square()?;
    if m.shape() != k.shape() {
        return Err(Error::DimensionMismatch { expected: k.nrows(), found: m.nrows() });
    }
    let n = k.nrows();
    if count == 0 || count > n {
        return Err(Error::InvalidArgument(format!("cannot extract {count} eigenpairs of a {n}-dimensional problem")));
    }
    let block = (count + opts.guard_vectors).min(n);
    let shifted = k.add_scaled(1.0, m, -shift);
    let factor = SkylineLdl::factor(&shifted, false)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = DMatrix::<f64>::from_fn(n, block, |_, _| rng.gen_range(-1.0..1.0));
    let mut worst = f64::INFINITY;

    for _ in 0..opts.max_iterations {
        let mut y = DMatrix::<f64>::zeros(n, block);
        for j in 0..block {
            let col: Vec<f64> = x.column(j).iter().copied().collect();
            let rhs = m.mul_vec(&col);
            let sol = factor.solve(&rhs);
            y.column_mut(j).copy_from_slice(&sol);
        }
        let q = y.qr().q();
        let (values, vectors) = rayleigh_ritz(k, m, &q)?;

        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&a, &b| {
            (values[a] - shift)
                .abs()
                .partial_cmp(&(values[b] - shift).abs())
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut next = DMatrix::<f64>::zeros(n, block);
        for (dst, &src) in order.iter().enumerate() {
            next.set_column(dst, &vectors.column(src));
        }
        x = next;

        let mut pairs = Vec::with_capacity(count);
        worst = 0.0f64;
        for (j, &src) in order.iter().take(count).enumerate() {
            let v: Vec<f64> = x.column(j).iter().copied().collect();
            let lam = values[src];
            let kv = k.mul_vec(&v);
            let mv = m.mul_vec(&v);
            let r: Vec<f64> = kv.iter().zip(&mv).map(|(a, b)| a - lam * b).collect();
            let mnorm = super::sparse::dot(&v, &mv).sqrt();
            let res = norm2(&r) / mnorm;
            worst = worst.max(res);
            pairs.push(EigenPair { value: lam, vector: v, residual: res });
        }
        if worst <= opts.tolerance {
            pairs.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
            return Ok(pairs);
        }
    }
    Err(Error::EigenNotConverged { iterations: opts.max_iterations, residual: worst })
}

/// Ritz pairs of the pencil projected onto the orthonormal basis `q`; vectors are M-orthonormal.
fn rayleigh_ritz(k: &SparseMatrix, m: &SparseMatrix, q: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let b = q.ncols();
    let cols: Vec<Vec<f64>> = (0..b).map(|j| q.column(j).iter().copied().collect()).collect();
    let kq: Vec<Vec<f64>> = cols.iter().map(|c| k.mul_vec(c)).collect();
    let mq: Vec<Vec<f64>> = cols.iter().map(|c| m.mul_vec(c)).collect();
    let kr = DMatrix::from_fn(b, b, |i, j| 0.5 * (dot(&cols[i], &kq[j]) + dot(&cols[j], &kq[i])));
    let mr = DMatrix::from_fn(b, b, |i, j| 0.5 * (dot(&cols[i], &mq[j]) + dot(&cols[j], &mq[i])));
    let chol = mr
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { pivot: 0, value: f64::NAN })?;
    let l = chol.l();
    // C = L⁻¹ Kr L⁻ᵀ
    let linv_kr = l.solve_lower_triangular(&kr).expect("triangular solve");
    let c = l
        .solve_lower_triangular(&linv_kr.transpose())
        .expect("triangular solve")
        .transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let w = l.transpose().solve_upper_triangular(&eig.eigenvectors).expect("triangular solve");
    let vectors = q * w;
    Ok((eig.eigenvalues.iter().copied().collect(), vectors))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    super::sparse::dot(a, b)
}
