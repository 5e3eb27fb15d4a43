//! Dense real symmetric kernels for the interior-point solver:
//! matrix arithmetic, cyclic Jacobi eigendecomposition, Cholesky.

use crate::scalar::Real;

/// Dense real matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix<T> {
    pub n: usize,
    pub m: usize,
    pub data: Vec<T>,
}

impl<T: Real> RMatrix<T> {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            data: vec![T::zero(); n * m],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = T::one();
        }
        a
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.m + j]
    }

    pub fn scale_mut(&mut self, s: T) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: T) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (v, w) in self.data.iter_mut().zip(&other.data) {
            *v += *w * s;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.n);
        let mut out = Self::zeros(self.n, other.m);
        for i in 0..self.n {
            for k in 0..self.m {
                let a = self.at(i, k);
                if a == T::zero() {
                    continue;
                }
                let row = k * other.m;
                let orow = i * other.m;
                for j in 0..other.m {
                    out.data[orow + j] += a * other.data[row + j];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.m, self.n);
        for i in 0..self.n {
            for j in 0..self.m {
                out[(j, i)] = self.at(i, j);
            }
        }
        out
    }

    pub fn symmetrize(&mut self) {
        debug_assert_eq!(self.n, self.m);
        let half = T::of(0.5);
        for i in 0..self.n {
            for j in (i + 1)..self.m {
                let v = (self.at(i, j) + self.at(j, i)) * half;
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    pub fn fro_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|v| v.abs())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.at(i, i)).sum()
    }

    /// <A, B> = tr(A^T B).
    pub fn inner(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b)
            .sum()
    }
}

impl<T> std::ops::Index<(usize, usize)> for RMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.m + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for RMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.m + j]
    }
}

/// Jacobi eigendecomposition of a symmetric matrix; returns ascending
/// eigenvalues and the orthogonal matrix of eigenvectors as columns.
pub fn eig_sym<T: Real>(a_in: &RMatrix<T>) -> (Vec<T>, RMatrix<T>) {
    let n = a_in.n;
    let mut a = a_in.clone();
    a.symmetrize();
    let mut u = RMatrix::<T>::identity(n);
    let scale = {
        let f = a.fro_norm();
        if f > T::zero() {
            f
        } else {
            T::one()
        }
    };
    let stop = scale * T::epsilon() * T::of(n as f64);

    for _ in 0..60 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += a.at(i, j) * a.at(i, j);
            }
        }
        if (off + off).sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.at(p, q);
                if apq.abs() <= stop * T::of(1e-3) / T::of(n as f64) {
                    continue;
                }
                let app = a.at(p, p);
                let aqq = a.at(q, q);
                let t = if app == aqq {
                    T::one()
                } else {
                    let tau = (app - aqq) / (apq + apq);
                    let sgn = if tau >= T::zero() { T::one() } else { -T::one() };
                    sgn / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.at(k, p);
                    let akq = a.at(k, q);
                    a[(k, p)] = c * akp + s * akq;
                    a[(k, q)] = -s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a.at(p, k);
                    let aqk = a.at(q, k);
                    a[(p, k)] = c * apk + s * aqk;
                    a[(q, k)] = -s * apk + c * aqk;
                }
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for k in 0..n {
                    let ukp = u.at(k, p);
                    let ukq = u.at(k, q);
                    u[(k, p)] = c * ukp + s * ukq;
                    u[(k, q)] = -s * ukp + c * ukq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a.at(i, i)).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = RMatrix::zeros(n, n);
    for (jn, &jo) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, jn)] = u.at(i, jo);
        }
    }
    (values, vectors)
}

/// U diag(f(lambda)) U^T from an eigendecomposition.
pub fn sym_fn<T: Real>(values: &[T], vectors: &RMatrix<T>, mut f: impl FnMut(T) -> T) -> RMatrix<T> {
    let n = values.len();
    let mut scaled = vectors.clone();
    for j in 0..n {
        let d = f(values[j]);
        for i in 0..n {
            scaled[(i, j)] *= d;
        }
    }
    let mut out = scaled.matmul(&vectors.transpose());
    out.symmetrize();
    out
}

/// Lower-triangular Cholesky factor; None when not positive definite.
pub fn cholesky<T: Real>(a: &RMatrix<T>) -> Option<RMatrix<T>> {
    let n = a.n;
    let mut l = RMatrix::<T>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k);
            }
            if i == j {
                if s <= T::zero() {
                    return None;
                }
                l[(i, j)] = s.sqrt();
            } else {
                l[(i, j)] = s / l.at(j, j);
            }
        }
    }
    Some(l)
}

/// Solve L L^T x = b in place.
pub fn chol_solve<T: Real>(l: &RMatrix<T>, b: &[T]) -> Vec<T> {
    let n = l.n;
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l.at(i, k) * y[k];
        }
        y[i] = s / l.at(i, i);
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l.at(k, i) * y[k];
        }
        y[i] = s / l.at(i, i);
    }
    y
}

/// M <- L^{-1} M for lower-triangular L (forward substitution per column).
pub fn tri_solve_left<T: Real>(l: &RMatrix<T>, m: &RMatrix<T>) -> RMatrix<T> {
    let n = l.n;
    let cols = m.m;
    let mut x = m.clone();
    for j in 0..cols {
        for i in 0..n {
            let mut s = x.at(i, j);
            for k in 0..i {
                s -= l.at(i, k) * x.at(k, j);
            }
            x[(i, j)] = s / l.at(i, i);
        }
    }
    x
}
