//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use num_complex::Complex;

use super::cmatrix::CMatrix;
use crate::scalar::Real;

/// Eigendecomposition H = U diag(lambda) U^dagger.
///
/// Eigenvalues sorted ascending; `vectors` holds the paired eigenvectors
/// as columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> SpectralDecomposition<T> {
    /// U diag(f(lambda)) U^dagger.
    pub fn apply_fn(&self, mut f: impl FnMut(T) -> T) -> CMatrix<T> {
        let n = self.values.len();
        let d: Vec<T> = self.values.iter().map(|&l| f(l)).collect();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] = scaled[(i, j)].scale(d[j]);
            }
        }
        scaled.matmul(&self.vectors.adjoint()).hermitian_part()
    }

    pub fn min_value(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max_value(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }
}

fn off_diag_norm<T: Real>(h: &CMatrix<T>) -> T {
    let n = h.rows;
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += h[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Jacobi sweeps over all (p, q) pairs until the off-diagonal mass is
/// negligible relative to the matrix scale.
pub fn eig_hermitian<T: Real>(h: &CMatrix<T>) -> SpectralDecomposition<T> {
    assert!(h.is_square());
    let n = h.rows;
    let mut a = h.hermitian_part();
    let mut u = CMatrix::<T>::identity(n);

    let scale = {
        let fro: T = a.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if fro > T::zero() {
            fro
        } else {
            T::one()
        }
    };
    let stop = scale * T::epsilon() * T::of(n as f64);
    let max_sweeps = 60;

    for _ in 0..max_sweeps {
        if off_diag_norm(&a) <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = a[(p, q)];
                let abs_z = z.norm();
                if abs_z <= stop * T::of(1e-3) / T::of(n as f64) {
                    continue;
                }
                let w = z.unscale(abs_z); // unit phase of a_pq
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let t = if app == aqq {
                    T::one()
                } else {
                    let tau = (app - aqq) / (abs_z + abs_z);
                    let sgn = if tau >= T::zero() { T::one() } else { -T::one() };
                    sgn / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;

                // Unitary: U_pp = c, U_pq = -s*w, U_qp = s*conj(w), U_qq = c.
                let upq = w.scale(-s);
                let uqp = w.conj().scale(s);
                let cc = Complex::new(c, T::zero());

                // Columns: M <- M U on columns p, q.
                for k in 0..n {
                    let mkp = a[(k, p)];
                    let mkq = a[(k, q)];
                    a[(k, p)] = mkp * cc + mkq * uqp;
                    a[(k, q)] = mkp * upq + mkq * cc;
                }
                for k in 0..n {
                    let ukp = u[(k, p)];
                    let ukq = u[(k, q)];
                    u[(k, p)] = ukp * cc + ukq * uqp;
                    u[(k, q)] = ukp * upq + ukq * cc;
                }
                // Rows: M <- U^dagger M on rows p, q.
                for k in 0..n {
                    let mpk = a[(p, k)];
                    let mqk = a[(q, k)];
                    a[(p, k)] = mpk * cc + mqk * uqp.conj();
                    a[(q, k)] = mpk * upq.conj() + mqk * cc;
                }
                a[(p, q)] = Complex::new(T::zero(), T::zero());
                a[(q, p)] = Complex::new(T::zero(), T::zero());
                a[(p, p)].im = T::zero();
                a[(q, q)].im = T::zero();
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());

    let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    SpectralDecomposition { values, vectors }
}
