//! Spectral gap of reversible chains via symmetrization and a cyclic
//! Jacobi eigensolver.

use crate::error::{Error, Result};
use crate::exact::matrix::{ChainMatrix, DenseMatrix};
use crate::scalar::Real;

/// Eigenvalues (descending) and the two-sided spectral gap
/// `1 - max(xi_1, |xi_min|)` of a reversible chain.
#[derive(Debug, Clone)]
pub struct SpectrumResult<F> {
    pub eigenvalues: Vec<F>,
    pub gap: F,
}

/// Maximum cyclic sweeps before the eigensolver reports non-convergence.
const MAX_SWEEPS: usize = 100;

fn off_diagonal_frobenius<F: Real>(a: &DenseMatrix<F>) -> F {
    let n = a.rows();
    let mut sum = F::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            sum = sum + a.at(i, j) * a.at(i, j);
        }
    }
    (sum + sum).sqrt()
}

/// Convergence threshold on the off-diagonal Frobenius norm:
/// `dim * max(1e-12, 4000 * machine epsilon)` (the second term lets f32
/// instantiations converge; in f64 the 1e-12 term governs).
fn convergence_threshold<F: Real>(dim: usize) -> F {
    F::of_usize(dim) * F::of(1e-12).max(F::epsilon() * F::of(4000.0))
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues in descending order and the matching
/// eigenvectors as matrix columns.
pub fn jacobi_symmetric<F: Real>(
    mut a: DenseMatrix<F>,
) -> Result<(Vec<F>, DenseMatrix<F>)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::InvalidInput("eigensolver needs a square matrix".into()));
    }
    let mut vecs = DenseMatrix::identity(n);
    if n <= 1 {
        let vals = (0..n).map(|i| a.at(i, i)).collect();
        return Ok((vals, vecs));
    }

    let threshold = convergence_threshold::<F>(n);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_frobenius(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a.at(p, q);
                if apq == F::zero() {
                    continue;
                }
                let app = a.at(p, p);
                let aqq = a.at(q, q);
                let tau = (aqq - app) / (F::of(2.0) * apq);
                let t = if tau >= F::zero() {
                    F::one() / (tau + (F::one() + tau * tau).sqrt())
                } else {
                    -F::one() / (-tau + (F::one() + tau * tau).sqrt())
                };
                let c = F::one() / (F::one() + t * t).sqrt();
                let s = t * c;

                // Rotate rows/columns p and q of the symmetric matrix.
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a.at(k, p);
                    let akq = a.at(k, q);
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    *a.at_mut(k, p) = new_kp;
                    *a.at_mut(p, k) = new_kp;
                    *a.at_mut(k, q) = new_kq;
                    *a.at_mut(q, k) = new_kq;
                }
                let two = F::of(2.0);
                *a.at_mut(p, p) = c * c * app - two * s * c * apq + s * s * aqq;
                *a.at_mut(q, q) = s * s * app + two * s * c * apq + c * c * aqq;
                *a.at_mut(p, q) = F::zero();
                *a.at_mut(q, p) = F::zero();

                for k in 0..n {
                    let vkp = vecs.at(k, p);
                    let vkq = vecs.at(k, q);
                    *vecs.at_mut(k, p) = c * vkp - s * vkq;
                    *vecs.at_mut(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && off_diagonal_frobenius(&a) > threshold {
        return Err(Error::Numerical(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.at(j, j)
            .partial_cmp(&a.at(i, i))
            .expect("eigenvalues are finite")
    });
    let values: Vec<F> = order.iter().map(|&i| a.at(i, i)).collect();
    let vectors = vecs.permute_cols(&order);
    Ok((values, vectors))
}

/// Symmetrization `S(i,j) = sqrt(pi_i / pi_j) * P(i,j)`, which shares the
/// spectrum of `P` when `P` is reversible with respect to `pi`. Requires
/// strictly positive stationary entries. The result is symmetrized
/// exactly by averaging to absorb rounding.
pub fn symmetrized<F: Real>(chain: &ChainMatrix<F>) -> Result<DenseMatrix<F>> {
    let n = chain.dim();
    let pi = chain.stationary();
    if pi.iter().any(|&w| w <= F::zero()) {
        return Err(Error::Numerical(
            "symmetrization needs strictly positive stationary entries".into(),
        ));
    }
    let sqrt_pi: Vec<F> = pi.iter().map(|&w| w.sqrt()).collect();
    let mut s = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            *s.at_mut(i, j) = sqrt_pi[i] * chain.entry(i, j) / sqrt_pi[j];
        }
    }
    let half = F::of(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = half * (s.at(i, j) + s.at(j, i));
            *s.at_mut(i, j) = avg;
            *s.at_mut(j, i) = avg;
        }
    }
    Ok(s)
}

/// Tolerance for the reversibility precondition of [`spectral_gap`].
fn reversibility_tolerance<F: Real>() -> F {
    F::of(1e-9).max(F::epsilon() * F::of(100.0))
}

/// Spectral gap of a reversible chain: symmetrize, eigensolve, and apply
/// the two-sided definition `1 - max(xi_1, |xi_min|)`.
pub fn spectral_gap<F: Real>(chain: &ChainMatrix<F>) -> Result<SpectrumResult<F>> {
    let rev = chain.max_reversibility_error();
    let tol = reversibility_tolerance::<F>();
    if rev > tol {
        return Err(Error::Numerical(format!(
            "chain is not reversible within tolerance: error {rev:e} > {tol:e}"
        )));
    }
    let (eigenvalues, _) = jacobi_symmetric(symmetrized(chain)?)?;
    let n = eigenvalues.len();

    let guard = F::of(1e-8).max(F::epsilon() * F::of(1e4));
    if (eigenvalues[0] - F::one()).abs() > guard {
        return Err(Error::Numerical(format!(
            "leading eigenvalue {} is not 1",
            eigenvalues[0]
        )));
    }
    if eigenvalues.iter().any(|&xi| xi.abs() > F::one() + guard) {
        return Err(Error::Numerical("eigenvalue outside [-1, 1]".into()));
    }

    let gap = if n == 1 {
        F::one()
    } else {
        let second = eigenvalues[1];
        let smallest = eigenvalues[n - 1];
        (F::one() - second.max(smallest.abs())).max(F::zero()).min(F::one())
    };
    Ok(SpectrumResult { eigenvalues, gap })
}
