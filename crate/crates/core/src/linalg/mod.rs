//! Sparse storage, symmetric solvers and a generalized eigensolver.

mod cg;
mod eigen;
mod skyline;
mod sparse;

pub use cg::{conjugate_gradient, CgConfig};
pub use eigen::{generalized_eig_near, EigenOptions, EigenPair};
pub use skyline::{reverse_cuthill_mckee, SkylineLdl};
pub use sparse::{axpy, dot, norm2, SparseMatrix};

use crate::error::{Error, Result};

/// Accepted relative residual of every SPD solve.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-12;

/// Envelope entries above which the direct factorization is skipped in favour of CG.
const MAX_ENVELOPE: usize = 150_000_000;

#[derive(Debug, Clone)]
enum Backend {
    Direct(SkylineLdl),
    Iterative(CgConfig),
}

/// A reusable solver for one symmetric positive definite operator.
#[derive(Debug, Clone)]
pub struct SpdSolver {
    matrix: SparseMatrix,
    backend: Backend,
}

impl SpdSolver {
    pub fn new(matrix: SparseMatrix) -> Result<Self> {
        matrix.check_square()?;
        let perm = reverse_cuthill_mckee(&matrix);
        let backend = if envelope_estimate(&matrix, &perm) <= MAX_ENVELOPE {
            match SkylineLdl::factor_with_permutation(&matrix, perm, true) {
                Ok(f) => Backend::Direct(f),
                Err(Error::NotPositiveDefinite { pivot, value }) => {
                    return Err(Error::NotPositiveDefinite { pivot, value })
                }
                Err(_) => Backend::Iterative(CgConfig::default()),
            }
        } else {
            Backend::Iterative(CgConfig::default())
        };
        Ok(Self { matrix, backend })
    }

    pub fn iterative(matrix: SparseMatrix, cfg: CgConfig) -> Result<Self> {
        matrix.check_square()?;
        Ok(Self { matrix, backend: Backend::Iterative(cfg) })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.backend, Backend::Direct(_))
    }

    /// Solves `A x = b`, refining once if needed; errors if the residual contract fails.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok(vec![0.0; b.len()]);
        }
        let mut x = match &self.backend {
            Backend::Direct(f) => f.solve(b),
            Backend::Iterative(cfg) => conjugate_gradient(&self.matrix, b, None, *cfg)?,
        };
        let mut res = self.residual(&x, b);
        if norm2(&res) > SOLVE_RESIDUAL_TOL * bnorm {
            let dx = match &self.backend {
                Backend::Direct(f) => f.solve(&res),
                Backend::Iterative(cfg) => conjugate_gradient(&self.matrix, &res, None, *cfg)?,
            };
            axpy(1.0, &dx, &mut x);
            res = self.residual(&x, b);
        }
        let rel = norm2(&res) / bnorm;
        if rel > SOLVE_RESIDUAL_TOL {
            return Err(Error::SolveResidual { residual: rel, tolerance: SOLVE_RESIDUAL_TOL });
        }
        Ok(x)
    }

    fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let ax = self.matrix.mul_vec(x);
        b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
    }
}

fn envelope_estimate(a: &SparseMatrix, perm: &[usize]) -> usize {
    let n = a.nrows();
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut first: Vec<usize> = (0..n).collect();
    for (i, j, _) in a.triplets() {
        let (pi, pj) = (inv[i], inv[j]);
        let (r, c) = if pi >= pj { (pi, pj) } else { (pj, pi) };
        first[r] = first[r].min(c);
    }
    first.iter().enumerate().map(|(i, f)| i - f).sum()
}

/// One-shot SPD solve with the residual contract.
pub fn solve_spd(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    SpdSolver::new(a.clone())?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let b = vec![1.0, -2.0, 3.5];
        let x = solve_spd(&SparseMatrix::identity(3), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn two_by_two_hand_solution() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let x = solve_spd(&a, &[1.0, 1.0]).unwrap();
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    fn random_spd(n: usize, seed: u64) -> SparseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (0..n).map(|k| b[k][i] * b[k][j]).sum::<f64>();
            }
            a[i][i] += 1.0;
        }
        SparseMatrix::from_dense(&a)
    }

    #[test]
    fn random_spd_residual_contract() {
        let a = random_spd(50, 3);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).cos()).collect();
        let x = solve_spd(&a, &b).unwrap();
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(u, v)| u - v).collect();
        assert!(norm2(&r) / norm2(&b) <= 1e-12);

        let cg = SpdSolver::iterative(a.clone(), CgConfig::default()).unwrap();
        let y = cg.solve(&b).unwrap();
        let r: Vec<f64> = a.mul_vec(&y).iter().zip(&b).map(|(u, v)| u - v).collect();
        assert!(norm2(&r) / norm2(&b) <= 1e-12);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(SpdSolver::new(a), Err(Error::NotPositiveDefinite { .. })));
    }
}
