//! Direct sparse complex LU solve with fill-reducing ordering, backed by
//! `faer`. Factorization and solve run single threaded so results are
//! bitwise reproducible.

use crate::assembly::SystemMatrix;
use crate::{Cplx, Error, Result};
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

/// Relative residual contract of `solve`.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// An LU factorization of a sparse complex system.
pub struct Factorization {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, c64>,
}

impl Factorization {
    pub fn new(matrix: &SystemMatrix) -> Result<Factorization> {
        let mut trips = Vec::with_capacity(matrix.nnz());
        for r in 0..matrix.n {
            for k in matrix.row_ptr[r]..matrix.row_ptr[r + 1] {
                trips.push(Triplet::new(r, matrix.col_idx[k], matrix.values[k]));
            }
        }
        let m = SparseColMat::<usize, c64>::try_new_from_triplets(matrix.n, matrix.n, &trips)
            .map_err(|e| Error::Singular(format!("matrix construction failed: {e:?}")))?;
        let lu = m
            .sp_lu()
            .map_err(|e| Error::Singular(format!("LU factorization failed: {e:?}")))?;
        Ok(Factorization { n: matrix.n, lu })
    }

    pub fn solve_vec(&self, rhs: &[Cplx]) -> Result<Vec<Cplx>> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: rhs.len() });
        }
        let b = Mat::<c64>::from_fn(self.n, 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        let out: Vec<Cplx> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("factorization produced non-finite values".into()));
        }
        Ok(out)
    }
}

/// Solves M x = b with the relative residual contract
/// ||Mx - b||_2 <= 1e-10 ||b||_2; returns x = 0 for b = 0.
pub fn solve(matrix: &SystemMatrix, rhs: &[Cplx]) -> Result<Vec<Cplx>> {
    if rhs.len() != matrix.n {
        return Err(Error::DimensionMismatch { expected: matrix.n, got: rhs.len() });
    }
    let rhs_norm = norm2(rhs);
    if rhs_norm == 0.0 {
        return Ok(vec![Cplx::new(0.0, 0.0); matrix.n]);
    }
    let fact = Factorization::new(matrix)?;
    let x = fact.solve_vec(rhs)?;
    let mx = matrix.matvec(&x);
    let res: f64 = norm2(&mx.iter().zip(rhs).map(|(a, b)| a - b).collect::<Vec<_>>());
    if res > RESIDUAL_TOL * rhs_norm {
        return Err(Error::Singular(format!(
            "relative residual {:.3e} exceeds {RESIDUAL_TOL:.1e}",
            res / rhs_norm
        )));
    }
    Ok(x)
}

fn norm2(v: &[Cplx]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_from(n: usize, entries: &[(usize, usize, Cplx)]) -> SystemMatrix {
        SystemMatrix::from_triplets(n, entries.to_vec())
    }

    #[test]
    fn identity_returns_rhs() {
        let m = matrix_from(
            3,
            &[
                (0, 0, Cplx::new(1.0, 0.0)),
                (1, 1, Cplx::new(1.0, 0.0)),
                (2, 2, Cplx::new(1.0, 0.0)),
            ],
        );
        let rhs = vec![Cplx::new(2.0, -1.0), Cplx::new(0.0, 3.0), Cplx::new(-5.0, 0.25)];
        let x = solve(&m, &rhs).unwrap();
        for (a, b) in x.iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn two_by_two_complex() {
        // [[2, i], [i, 1]] x = [1, 0], det = 3, x = [1/3, -i/3]
        let m = matrix_from(
            2,
            &[
                (0, 0, Cplx::new(2.0, 0.0)),
                (0, 1, Cplx::new(0.0, 1.0)),
                (1, 0, Cplx::new(0.0, 1.0)),
                (1, 1, Cplx::new(1.0, 0.0)),
            ],
        );
        let x = solve(&m, &[Cplx::new(1.0, 0.0), Cplx::new(0.0, 0.0)]).unwrap();
        assert!((x[0] - Cplx::new(1.0 / 3.0, 0.0)).norm() < 1e-14);
        assert!((x[1] - Cplx::new(0.0, -1.0 / 3.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_rhs_shortcut() {
        let m = matrix_from(2, &[(0, 0, Cplx::new(1.0, 0.0)), (1, 1, Cplx::new(3.0, 0.0))]);
        let x = solve(&m, &[Cplx::new(0.0, 0.0), Cplx::new(0.0, 0.0)]).unwrap();
        assert!(x.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn structurally_singular_zero_row() {
        let m = matrix_from(2, &[(0, 0, Cplx::new(1.0, 0.0))]);
        let err = solve(&m, &[Cplx::new(1.0, 0.0), Cplx::new(1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Singular(_)), "got {err}");
    }

    #[test]
    fn dimension_mismatch() {
        let m = matrix_from(2, &[(0, 0, Cplx::new(1.0, 0.0)), (1, 1, Cplx::new(1.0, 0.0))]);
        assert!(matches!(
            solve(&m, &[Cplx::new(1.0, 0.0)]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn deterministic_repeat() {
        let m = matrix_from(
            3,
            &[
                (0, 0, Cplx::new(4.0, 1.0)),
                (0, 2, Cplx::new(-1.0, 0.5)),
                (1, 1, Cplx::new(2.0, -3.0)),
                (1, 0, Cplx::new(0.1, 0.0)),
                (2, 2, Cplx::new(1.5, 2.0)),
                (2, 1, Cplx::new(0.0, -0.7)),
            ],
        );
        let rhs = vec![Cplx::new(1.0, 2.0), Cplx::new(-0.5, 0.0), Cplx::new(0.25, -4.0)];
        let x1 = solve(&m, &rhs).unwrap();
        let x2 = solve(&m, &rhs).unwrap();
        for (a, b) in x1.iter().zip(&x2) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
}
