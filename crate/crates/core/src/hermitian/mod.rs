//! Dense complex Hermitian linear algebra.
//!
//! [`HermitianOperator`] is the universal numeric carrier: states, Choi
//! matrices, program data and solver witnesses are all instances of it.
//! Matrices are symmetrized at construction so downstream code may assume
//! exact hermiticity.

pub mod cmatrix;
pub mod eig;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use cmatrix::CMatrix;
pub use eig::{eig_hermitian, SpectralDecomposition};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default hermiticity tolerance at construction.
pub const DEFAULT_HERM_TOL: f64 = 1e-12;
/// Default relative rank cutoff shared by generalized inverses and
/// support tests; one knob keeps support judgments consistent.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Complex Hermitian matrix, symmetrized at construction.
#[derive(Clone, Debug)]
pub struct HermitianOperator<T> {
    pub dim: usize,
    pub mat: CMatrix<T>,
    pub herm_tol: T,
}

impl<T: Real> HermitianOperator<T> {
    /// Symmetrize and validate. Fails when the symmetrization residual
    /// exceeds 100x the tolerance.
    pub fn new(mat: CMatrix<T>) -> Result<Self> {
        Self::with_tol(mat, T::of(DEFAULT_HERM_TOL))
    }

    pub fn with_tol(mat: CMatrix<T>, herm_tol: T) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not square",
                mat.rows, mat.cols
            )));
        }
        let sym = mat.hermitian_part();
        let residual = mat.sub(&sym).max_abs();
        let limit = T::of(100.0) * herm_tol * (T::one() + mat.max_abs());
        if residual > limit {
            return Err(Error::NonHermitian {
                residual: residual.to_f64(),
                limit: limit.to_f64(),
            });
        }
        Ok(Self {
            dim: sym.rows,
            mat: sym,
            herm_tol,
        })
    }

    /// Construction from data known to be Hermitian (internal results);
    /// still symmetrizes to wash out roundoff.
    pub fn from_parts(mat: CMatrix<T>) -> Self {
        let sym = mat.hermitian_part();
        Self {
            dim: sym.rows,
            mat: sym,
            herm_tol: T::of(DEFAULT_HERM_TOL),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            mat: CMatrix::zeros(dim, dim),
            herm_tol: T::of(DEFAULT_HERM_TOL),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            mat: CMatrix::identity(dim),
            herm_tol: T::of(DEFAULT_HERM_TOL),
        }
    }

    pub fn diag(d: &[T]) -> Self {
        Self {
            dim: d.len(),
            mat: CMatrix::diag(d),
            herm_tol: T::of(DEFAULT_HERM_TOL),
        }
    }

    pub fn eig(&self) -> SpectralDecomposition<T> {
        eig_hermitian(&self.mat)
    }

    pub fn trace(&self) -> T {
        self.mat.trace().re
    }

    pub fn op_norm(&self) -> T {
        let d = self.eig();
        d.values
            .iter()
            .map(|l| l.abs())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn min_eig(&self) -> T {
        self.eig().min_value()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_parts(self.mat.add(&other.mat))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_parts(self.mat.sub(&other.mat))
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_parts(self.mat.scale_re(s))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::from_parts(self.mat.kron(&other.mat))
    }

    /// U diag(lambda_i^p) U^dagger with eigenvalues below the relative
    /// rank cutoff clamped to 0 and the convention 0^p := 0 for all p
    /// (generalized inverse on the support).
    pub fn matrix_power(&self, p: T, rank_tol: T) -> Result<Self> {
        let d = self.eig();
        let max = d.max_value().abs();
        let eps = T::of(1e-10) * max;
        if d.min_value() < -T::of(100.0) * eps {
            return Err(Error::NotPSD {
                min_eig: d.min_value().to_f64(),
            });
        }
        let cutoff = rank_tol * max;
        Ok(Self::from_parts(d.apply_fn(|l| {
            if l <= cutoff {
                T::zero()
            } else {
                l.powf(p)
            }
        })))
    }

    /// Sum of eigenprojectors with eigenvalue above the relative cutoff.
    pub fn support_projector(&self, rank_tol: T) -> Self {
        let d = self.eig();
        let max = d.max_value().abs();
        let cutoff = rank_tol * max;
        Self::from_parts(d.apply_fn(|l| if l > cutoff { T::one() } else { T::zero() }))
    }

    /// Rank under the relative cutoff.
    pub fn support_rank(&self, rank_tol: T) -> usize {
        let d = self.eig();
        let cutoff = rank_tol * d.max_value().abs();
        d.values.iter().filter(|&&l| l > cutoff).count()
    }

    /// Isometry V (dim x rank) whose columns span the support; V^dagger H V
    /// is the compression of H onto its support.
    pub fn support_isometry(&self, rank_tol: T) -> CMatrix<T> {
        let d = self.eig();
        let cutoff = rank_tol * d.max_value().abs();
        let cols: Vec<usize> = (0..self.dim).filter(|&i| d.values[i] > cutoff).collect();
        CMatrix::from_fn(self.dim, cols.len(), |i, j| d.vectors[(i, cols[j])])
    }

    /// supp(A) subset of supp(B): true iff the compression of A onto
    /// ker(B) is negligible relative to ||A||.
    pub fn subset_check(a: &Self, b: &Self, rank_tol: T) -> bool {
        let pb = b.support_projector(rank_tol);
        let ib = HermitianOperator::identity(a.dim).sub(&pb);
        let proj = ib.mat.conjugate_by(&a.mat);
        let norm_a = a.op_norm();
        if norm_a == T::zero() {
            return true;
        }
        HermitianOperator::from_parts(proj).op_norm() <= rank_tol * norm_a
    }
}

/// Shared repo-wide JSON matrix schema: row-major [re, im] pairs.
#[derive(Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn to_cmatrix<T: Real>(&self) -> Result<CMatrix<T>> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::Parse(format!(
                "matrix with dim {} requires {} entries, found {}",
                self.dim,
                self.dim * self.dim,
                self.entries.len()
            )));
        }
        for (k, e) in self.entries.iter().enumerate() {
            if !e[0].is_finite() || !e[1].is_finite() {
                return Err(Error::Parse(format!("non-finite entry at index {}", k)));
            }
        }
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (k, e) in self.entries.iter().enumerate() {
            m.data[k] = Complex::new(T::of(e[0]), T::of(e[1]));
        }
        Ok(m)
    }

    pub fn from_cmatrix<T: Real>(m: &CMatrix<T>) -> Self {
        Self {
            dim: m.rows,
            entries: m
                .data
                .iter()
                .map(|z| [z.re.to_f64(), z.im.to_f64()])
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type H = HermitianOperator<f64>;

    #[test]
    fn eig_diagonal() {
        let h = H::diag(&[1.0, 2.0]);
        let d = h.eig();
        assert_eq!(d.values, vec![1.0, 2.0]);
    }

    #[test]
    fn matrix_power_sqrt() {
        let h = H::diag(&[4.0, 9.0]);
        let r = h.matrix_power(0.5, DEFAULT_RANK_TOL).unwrap();
        assert!((r.mat[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((r.mat[(1, 1)].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_power_generalized_inverse() {
        let h = H::diag(&[2.0, 0.0]);
        let r = h.matrix_power(-1.0, DEFAULT_RANK_TOL).unwrap();
        assert!((r.mat[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!(r.mat[(1, 1)].re.abs() < 1e-12);
    }

    #[test]
    fn matrix_power_cube_root_roundtrip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let g = CMatrix::from_fn(4, 4, |_, _| {
                Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let psd = H::from_parts(g.matmul(&g.adjoint()));
            let third = psd.matrix_power(1.0 / 3.0, DEFAULT_RANK_TOL).unwrap();
            let cubed = H::from_parts(third.mat.matmul(&third.mat).matmul(&third.mat));
            assert!(cubed.sub(&psd).op_norm() < 1e-9 * (1.0 + psd.op_norm()));
        }
    }

    #[test]
    fn op_norm_signed() {
        assert!((H::diag(&[-3.0, 2.0]).op_norm() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn kron_diag() {
        let k = H::diag(&[1.0, 2.0]).kron(&H::diag(&[3.0, 4.0]));
        let got: Vec<f64> = (0..4).map(|i| k.mat[(i, i)].re).collect();
        assert_eq!(got, vec![3.0, 4.0, 6.0, 8.0]);
        // trace multiplicativity
        assert!((k.trace() - 3.0 * 7.0).abs() < 1e-10);
    }

    #[test]
    fn support_projector_cuts_small() {
        let p = H::diag(&[1.0, 1e-14, 0.0]).support_projector(DEFAULT_RANK_TOL);
        assert!((p.mat[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(p.mat[(1, 1)].re.abs() < 1e-12);
        assert!(p.mat[(2, 2)].re.abs() < 1e-12);
    }

    #[test]
    fn subset_checks() {
        let rank_tol = DEFAULT_RANK_TOL;
        assert!(H::subset_check(
            &H::diag(&[1.0, 0.0]),
            &H::diag(&[2.0, 3.0]),
            rank_tol
        ));
        assert!(!H::subset_check(
            &H::diag(&[0.0, 1.0]),
            &H::diag(&[1.0, 0.0]),
            rank_tol
        ));
        // |+><+| vs diag(1,0): overlap with the kernel is 1/2.
        let plus = H::from_parts(CMatrix::from_fn(2, 2, |_, _| Complex::new(0.5, 0.0)));
        assert!(!H::subset_check(&plus, &H::diag(&[1.0, 0.0]), rank_tol));
        // reflexivity
        assert!(H::subset_check(&plus, &plus, rank_tol));
    }

    #[test]
    fn power_composition() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = CMatrix::from_fn(5, 5, |_, _| {
            Complex::new(rng.gen::<f64>() + 0.1, rng.gen::<f64>() - 0.5)
        });
        let psd = H::from_parts(g.matmul(&g.adjoint()));
        let a = psd
            .matrix_power(0.5, DEFAULT_RANK_TOL)
            .unwrap()
            .matrix_power(0.6, DEFAULT_RANK_TOL)
            .unwrap();
        let b = psd.matrix_power(0.3, DEFAULT_RANK_TOL).unwrap();
        assert!(a.sub(&b).op_norm() < 1e-9 * (1.0 + psd.op_norm()));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = CMatrix::<f64>::zeros(2, 2);
        m[(0, 1)] = Complex::new(1.0, 0.0);
        assert!(matches!(
            H::new(m),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let h = H::diag(&[1.5, -0.25]);
        let j = MatrixJson::from_cmatrix(&h.mat);
        let s = serde_json::to_string(&j).unwrap();
        let back: MatrixJson = serde_json::from_str(&s).unwrap();
        let m: CMatrix<f64> = back.to_cmatrix().unwrap();
        assert!(m.sub(&h.mat).max_abs() < 1e-15);

        let bad = MatrixJson {
            dim: 2,
            entries: vec![[1.0, 0.0]; 3],
        };
        assert!(bad.to_cmatrix::<f64>().is_err());
        let nan = MatrixJson {
            dim: 1,
            entries: vec![[f64::NAN, 0.0]],
        };
        assert!(nan.to_cmatrix::<f64>().is_err());
    }
}
