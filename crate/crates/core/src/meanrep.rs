//! Weighted matrix geometric means: closed-form evaluation (the test
//! oracle) and the semidefinite representation of T <= A #_beta B for
//! dyadic beta (the program building block).
//!
//! The representation uses the 2x2-block characterization of the
//! midpoint mean — Z Hermitian with [[A, Z],[Z, B]] >= 0 iff
//! Z <= A #_{1/2} B — composed along the binary expansion of beta via
//! A #_{(s+t)/2} B = (A #_s B) #_{1/2} (A #_t B), one auxiliary operator
//! and one doubled PSD block per digit. Digits are processed
//! most-significant-first so programs are reproducible bit for bit.

use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, HermitianOperator, DEFAULT_RANK_TOL};
use crate::scalar::Real;
use crate::sdp::{HVar, LmiBuilder};

/// Dyadic weight numerator / 2^level in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicWeight {
    pub numerator: u64,
    pub level: u32,
}

impl DyadicWeight {
    pub fn new(mut numerator: u64, mut level: u32) -> Result<Self> {
        if numerator > 1u64 << level {
            return Err(Error::NotDyadic(format!(
                "{}/2^{} exceeds 1",
                numerator, level
            )));
        }
        while level > 0 && numerator % 2 == 0 {
            numerator /= 2;
            level -= 1;
        }
        Ok(Self { numerator, level })
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / (1u64 << self.level) as f64
    }

    /// Binary digits after the point, most significant first; empty for
    /// the endpoints 0 and 1.
    pub fn digits(&self) -> Vec<u8> {
        if self.numerator == 0 || (self.level == 0 && self.numerator == 1) {
            return Vec::new();
        }
        (1..=self.level)
            .map(|k| ((self.numerator >> (self.level - k)) & 1) as u8)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    pub fn is_one(&self) -> bool {
        self.level == 0 && self.numerator == 1
    }
}

/// Bracket beta between the two nearest dyadics at the given level.
/// Exact dyadic input returns lo = hi.
pub fn dyadic_approx(beta: f64, level: u32) -> Result<(DyadicWeight, DyadicWeight)> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::OutOfRange(format!("beta {} outside [0,1]", beta)));
    }
    let scale = (1u64 << level) as f64;
    let lo = (beta * scale).floor() as u64;
    let hi = (beta * scale).ceil() as u64;
    Ok((DyadicWeight::new(lo, level)?, DyadicWeight::new(hi, level)?))
}

/// A #_beta B = A^{1/2} (A^{-1/2} B A^{-1/2})^beta A^{1/2} with
/// generalized inverses; negative eigenvalues of the middle factor are
/// clamped at 0 before powering. Requires B << A when A is singular.
pub fn mean_eval<T: Real>(
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
    beta: T,
) -> Result<HermitianOperator<T>> {
    let rank_tol = T::of(DEFAULT_RANK_TOL);
    let full_rank = a.support_rank(rank_tol) == a.dim;
    if !full_rank && !HermitianOperator::subset_check(b, a, T::of(1e-7)) {
        return Err(Error::SupportViolation(
            "second mean operand not supported inside the first".into(),
        ));
    }
    let a_half = a.matrix_power(T::of(0.5), rank_tol)?;
    let a_ihalf = a.matrix_power(T::of(-0.5), rank_tol)?;
    let mid = HermitianOperator::from_parts(a_ihalf.mat.conjugate_by(&b.mat));
    let d = mid.eig();
    let powered = d.apply_fn(|l| if l <= T::zero() { T::zero() } else { l.powf(beta) });
    Ok(HermitianOperator::from_parts(
        a_half.mat.conjugate_by(&powered),
    ))
}

/// mean_eval(A + eps I, B, beta); monotonically decreasing in eps.
pub fn mean_eval_regularized<T: Real>(
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
    beta: T,
    eps: T,
) -> Result<HermitianOperator<T>> {
    let reg = a.add(&HermitianOperator::identity(a.dim).scale(eps));
    mean_eval(&reg, b, beta)
}

/// Operand handle: a constant matrix or a declared Hermitian variable.
#[derive(Clone, Copy)]
pub enum Operand<'a, T> {
    Const(&'a CMatrix<T>),
    Var(HVar),
}

impl<'a, T: Real> Operand<'a, T> {
    fn place(&self, b: &mut LmiBuilder<T>, block: usize, r0: usize, c0: usize, coeff: T) {
        match self {
            Operand::Const(m) => {
                let scaled = m.scale_re(coeff);
                b.set_const(block, r0, c0, &scaled);
            }
            Operand::Var(v) => b.add_matrix_term(block, r0, c0, v, coeff),
        }
    }
}

/// SDP encoding of one constraint T <= A #_beta B: auxiliary Hermitian
/// operators (one per binary digit) plus doubled PSD blocks, with
/// corner couplings emitted into the builder.
pub struct MeanConstraintBlock {
    pub level: u32,
    pub block_dims: Vec<usize>,
    pub block_ids: Vec<usize>,
    pub aux: Vec<HVar>,
}

/// Emit the constraint T <= A #_beta B into the builder.
///
/// For the binary digits b_1..b_L of beta (in lowest terms) the chain is
///   Z_1 - T >= 0,
///   [[C_k, Z_k],[Z_k, Z_{k+1}]] >= 0   with C_k = A if b_k = 0 else B,
///   [[C_L, Z_L],[Z_L, A]] >= 0,
/// which is exact: the maximal feasible T in PSD order is A #_beta B.
/// Degenerate weights emit a single plain PSD constraint.
pub fn build_mean_constraint<T: Real>(
    builder: &mut LmiBuilder<T>,
    a_op: Operand<T>,
    b_op: Operand<T>,
    t_op: Operand<T>,
    beta: DyadicWeight,
    dim: usize,
) -> MeanConstraintBlock {
    let mut out = MeanConstraintBlock {
        level: beta.level,
        block_dims: Vec::new(),
        block_ids: Vec::new(),
        aux: Vec::new(),
    };
    let one = T::one();

    if beta.is_zero() || beta.is_one() {
        let blk = builder.add_block(dim);
        let top = if beta.is_zero() { a_op } else { b_op };
        top.place(builder, blk, 0, 0, one);
        t_op.place(builder, blk, 0, 0, -one);
        out.block_ids.push(blk);
        out.block_dims.push(dim);
        return out;
    }

    let digits = beta.digits();
    let zs: Vec<HVar> = digits.iter().map(|_| builder.hermitian_var(dim)).collect();

    let slack = builder.add_block(dim);
    builder.add_matrix_term(slack, 0, 0, &zs[0], one);
    t_op.place(builder, slack, 0, 0, -one);
    out.block_ids.push(slack);
    out.block_dims.push(dim);

    for (k, &digit) in digits.iter().enumerate() {
        let blk = builder.add_block(2 * dim);
        let c_op = if digit == 0 { a_op } else { b_op };
        c_op.place(builder, blk, 0, 0, one);
        builder.add_matrix_term(blk, 0, dim, &zs[k], one);
        if k + 1 < digits.len() {
            builder.add_matrix_term(blk, dim, dim, &zs[k + 1], one);
        } else {
            a_op.place(builder, blk, dim, dim, one);
        }
        out.block_ids.push(blk);
        out.block_dims.push(2 * dim);
    }
    out.aux = zs;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{Mode, SolveOpts, SolveStatus};
    use num_complex::Complex;
    use rand::{Rng, SeedableRng};

    type H = HermitianOperator<f64>;

    fn random_psd(rng: &mut impl Rng, n: usize) -> H {
        let g = CMatrix::from_fn(n, n, |_, _| {
            Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        H::from_parts(g.matmul(&g.adjoint()))
    }

    fn random_pd(rng: &mut impl Rng, n: usize) -> H {
        random_psd(rng, n).add(&H::identity(n).scale(0.2))
    }

    #[test]
    fn dyadic_arithmetic() {
        let (lo, hi) = dyadic_approx(0.5, 8).unwrap();
        assert_eq!(lo, hi);
        assert_eq!((lo.numerator, lo.level), (1, 1));

        let (lo, hi) = dyadic_approx(2.0 / 3.0, 8).unwrap();
        assert_eq!((lo.numerator, lo.level), (85, 7)); // 170/256 reduced
        assert_eq!((hi.numerator, hi.level), (171, 8));
        assert!(hi.value() - lo.value() <= 1.0 / 256.0 + 1e-15);

        let (lo, hi) = dyadic_approx(1.0 / 1.1, 10).unwrap();
        assert!(hi.value() - lo.value() <= 2f64.powi(-10) + 1e-15);

        assert!(DyadicWeight::new(5, 2).is_err());
        assert_eq!(DyadicWeight::new(3, 3).unwrap().digits(), vec![0, 1, 1]);
    }

    #[test]
    fn mean_eval_identity_first_operand() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        let b = random_psd(&mut rng, 4);
        let got = mean_eval(&H::identity(4), &b, 0.37).unwrap();
        let expect = b.matrix_power(0.37, 1e-9).unwrap();
        assert!(got.sub(&expect).op_norm() < 1e-9);
    }

    #[test]
    fn mean_eval_commuting_diagonal() {
        let a = H::diag(&[1.0, 4.0, 2.0]);
        let b = H::diag(&[3.0, 2.0, 5.0]);
        let beta = 0.25;
        let got = mean_eval(&a, &b, beta).unwrap();
        for i in 0..3 {
            let ai = a.mat[(i, i)].re;
            let bi = b.mat[(i, i)].re;
            let expect = ai.powf(1.0 - beta) * bi.powf(beta);
            assert!((got.mat[(i, i)].re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_inversion_identity() {
        // sigma #_{1/alpha} (sigma #_alpha rho) = rho
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(62);
        for alpha in [1.5, 2.0, 3.0] {
            let sigma = random_pd(&mut rng, 4);
            let rho = random_psd(&mut rng, 4);
            let inner = mean_eval(&sigma, &rho, alpha).unwrap();
            let back = mean_eval(&sigma, &inner, 1.0 / alpha).unwrap();
            assert!(back.sub(&rho).op_norm() < 1e-8 * (1.0 + rho.op_norm()));
        }
    }

    #[test]
    fn mean_eval_support_violation() {
        let a = H::diag(&[1.0, 0.0]);
        let b = H::diag(&[1.0, 1.0]);
        assert!(matches!(
            mean_eval(&a, &b, 0.5),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn regularized_decreasing_in_eps() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(63);
        for _ in 0..5 {
            let mut a = random_psd(&mut rng, 3);
            // make a singular
            let p = H::diag(&[1.0, 1.0, 0.0]);
            a = H::from_parts(p.mat.conjugate_by(&a.mat));
            let b = random_psd(&mut rng, 3);
            let beta = 0.5;
            let mut prev: Option<H> = None;
            for eps in [1e-2, 1e-4, 1e-6] {
                let m = mean_eval_regularized(&a, &b, beta, eps).unwrap();
                if let Some(p) = prev {
                    assert!(p.sub(&m).min_eig() > -1e-9 * (1.0 + p.op_norm()));
                }
                prev = Some(m);
            }
        }
        // invertible A: independent of eps up to O(eps)
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(64);
        let a = random_pd(&mut rng, 3);
        let b = random_psd(&mut rng, 3);
        let m0 = mean_eval(&a, &b, 0.3).unwrap();
        let m1 = mean_eval_regularized(&a, &b, 0.3, 1e-8).unwrap();
        assert!(m0.sub(&m1).op_norm() < 1e-6 * (1.0 + b.op_norm()));
        // A = 0, B = I, beta = 1/2 -> sqrt(eps) I
        let zero = H::zeros(2);
        let id = H::identity(2);
        let m = mean_eval_regularized(&zero, &id, 0.5, 1e-4).unwrap();
        assert!((m.mat[(0, 0)].re - 1e-2).abs() < 1e-10);
    }

    #[test]
    fn transformer_equality() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(65);
        for _ in 0..5 {
            let a = random_pd(&mut rng, 3);
            let b = random_pd(&mut rng, 3);
            let m = CMatrix::from_fn(3, 3, |_, _| {
                Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            })
            .add(&CMatrix::identity(3).scale_re(1.5));
            let beta = 0.375;
            let lhs = H::from_parts(m.conjugate_by(&mean_eval(&a, &b, beta).unwrap().mat));
            let rhs = mean_eval(
                &H::from_parts(m.conjugate_by(&a.mat)),
                &H::from_parts(m.conjugate_by(&b.mat)),
                beta,
            )
            .unwrap();
            assert!(lhs.sub(&rhs).op_norm() < 1e-8 * (1.0 + lhs.op_norm()));
        }
    }

    #[test]
    fn tensor_factorization() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(66);
        let a1 = random_pd(&mut rng, 2);
        let b1 = random_pd(&mut rng, 2);
        let a2 = random_pd(&mut rng, 3);
        let b2 = random_pd(&mut rng, 3);
        let beta = 0.3;
        let lhs = mean_eval(&a1.kron(&a2), &b1.kron(&b2), beta).unwrap();
        let rhs = mean_eval(&a1, &b1, beta)
            .unwrap()
            .kron(&mean_eval(&a2, &b2, beta).unwrap());
        assert!(lhs.sub(&rhs).op_norm() < 1e-8 * (1.0 + lhs.op_norm()));
    }

    #[test]
    fn homogeneity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(67);
        let a = random_pd(&mut rng, 3);
        let b = random_pd(&mut rng, 3);
        let (sa, sb, beta) = (2.5, 0.7, 0.625);
        let lhs = mean_eval(&a.scale(sa), &b.scale(sb), beta).unwrap();
        let rhs = mean_eval(&a, &b, beta)
            .unwrap()
            .scale(sa.powf(1.0 - beta) * sb.powf(beta));
        assert!(lhs.sub(&rhs).op_norm() < 1e-8 * (1.0 + lhs.op_norm()));
    }

    #[test]
    fn joint_concavity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(68);
        for _ in 0..5 {
            let parts: Vec<(H, H)> = (0..3)
                .map(|_| (random_pd(&mut rng, 3), random_pd(&mut rng, 3)))
                .collect();
            let beta = 0.5;
            let asum = parts
                .iter()
                .fold(H::zeros(3), |acc, (a, _)| acc.add(a));
            let bsum = parts
                .iter()
                .fold(H::zeros(3), |acc, (_, b)| acc.add(b));
            let whole = mean_eval(&asum, &bsum, beta).unwrap();
            let sum_of_means = parts
                .iter()
                .fold(H::zeros(3), |acc, (a, b)| acc.add(&mean_eval(a, b, beta).unwrap()));
            assert!(whole.sub(&sum_of_means).min_eig() > -1e-8 * (1.0 + whole.op_norm()));
        }
    }

    #[test]
    fn cp_map_monotone() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(69);
        for _ in 0..5 {
            let kraus: Vec<CMatrix<f64>> = (0..2)
                .map(|_| {
                    CMatrix::from_fn(2, 3, |_, _| {
                        Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                    })
                })
                .collect();
            let phi = |x: &H| -> H {
                let mut out = CMatrix::zeros(2, 2);
                for k in &kraus {
                    out = out.add(&k.conjugate_by(&x.mat));
                }
                H::from_parts(out)
            };
            let a = random_pd(&mut rng, 3);
            let b = random_pd(&mut rng, 3);
            let beta = 0.75;
            let lhs = phi(&mean_eval(&a, &b, beta).unwrap());
            let rhs = mean_eval_regularized(&phi(&a), &phi(&b), beta, 1e-10).unwrap();
            assert!(rhs.sub(&lhs).min_eig() > -1e-8 * (1.0 + rhs.op_norm()));
        }
    }

    /// Maximal trace of T with T <= A #_beta B matches the closed-form
    /// oracle through the SDP encoding.
    fn max_trace_t(a: &H, b: &H, beta: DyadicWeight) -> f64 {
        let mut builder = LmiBuilder::new(Mode::Complex);
        let t = builder.hermitian_var(a.dim);
        build_mean_constraint(
            &mut builder,
            Operand::Const(&a.mat),
            Operand::Const(&b.mat),
            Operand::Var(t),
            beta,
            a.dim,
        );
        builder.trace_objective(&t, -1.0);
        let sol = builder.solve(SolveOpts::default());
        assert_eq!(sol.status, SolveStatus::Optimal, "solver: {:?}", sol.status);
        -sol.pobj
    }

    #[test]
    fn mean_constraint_half_identity() {
        let id = H::identity(3);
        let beta = DyadicWeight::new(1, 1).unwrap();
        let got = max_trace_t(&id, &id, beta);
        assert!((got - 3.0).abs() < 1e-6);
    }

    #[test]
    fn mean_constraint_quarter_commuting() {
        let a = H::diag(&[1.0, 2.0, 3.0]);
        let b = H::diag(&[2.0, 1.0, 0.5]);
        let beta = DyadicWeight::new(1, 2).unwrap();
        let got = max_trace_t(&a, &b, beta);
        let expect: f64 = (0..3)
            .map(|i| a.mat[(i, i)].re.powf(0.75) * b.mat[(i, i)].re.powf(0.25))
            .sum();
        assert!((got - expect).abs() < 1e-6, "got {} want {}", got, expect);
    }

    #[test]
    fn mean_constraint_three_eighths_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(70);
        let a = random_pd(&mut rng, 3);
        let b = random_pd(&mut rng, 3);
        let beta = DyadicWeight::new(3, 3).unwrap();
        let got = max_trace_t(&a, &b, beta);
        let expect = mean_eval(&a, &b, 0.375).unwrap().trace();
        assert!((got - expect).abs() < 1e-6, "got {} want {}", got, expect);
    }

    #[test]
    fn mean_constraint_degenerate_weights() {
        let a = H::diag(&[2.0, 1.0]);
        let b = H::diag(&[5.0, 4.0]);
        let zero = DyadicWeight::new(0, 0).unwrap();
        assert!((max_trace_t(&a, &b, zero) - 3.0).abs() < 1e-6);
        let one = DyadicWeight::new(1, 0).unwrap();
        assert!((max_trace_t(&a, &b, one) - 9.0).abs() < 1e-6);
    }
}
