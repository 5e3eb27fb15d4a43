//! State-level divergences: closed forms (classical, sandwiched,
//! geometric, max, binary) and the convex program defining the
//! sharp Renyi divergence, plus the bounds that sandwich it.
//!
//! All logarithms are base 2. Support violations yield +infinity as a
//! value, never an error.

use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, HermitianOperator, DEFAULT_RANK_TOL};
use crate::meanrep::{build_mean_constraint, dyadic_approx, mean_eval, DyadicWeight, Operand};
use crate::quantum::{pinch, QState, DEFAULT_SPEC_TOL};
use crate::scalar::Real;
use crate::sdp::{all_real, LmiBuilder, LmiSolution, Mode, SolveOpts, SolveStatus};

/// Options for the sharp-divergence programs.
#[derive(Clone, Copy, Debug)]
pub struct SharpOpts<T> {
    /// Dyadic approximation level for 1/alpha (default 8, max 14).
    pub bits: u32,
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for SharpOpts<T> {
    fn default() -> Self {
        Self {
            bits: 8,
            tol: T::of(1e-8),
            max_iter: 200,
        }
    }
}

/// Condensed solver diagnostics attached to divergence results.
#[derive(Clone, Copy, Debug)]
pub struct SolverSummary<T> {
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_res: T,
    pub dual_res: T,
    pub gap: T,
}

impl<T: Real> SolverSummary<T> {
    pub fn from_solution(s: &LmiSolution<T>) -> Self {
        Self {
            status: s.status,
            iterations: s.iterations,
            primal_res: s.primal_res,
            dual_res: s.dual_res,
            gap: s.gap,
        }
    }
}

/// Result of a sharp-divergence solve.
#[derive(Clone, Debug)]
pub struct DivergenceResult<T> {
    /// Headline divergence in bits; +infinity on support violation.
    pub value_d: T,
    /// The optimal trace value Q behind value_d.
    pub value_q: T,
    pub alpha: T,
    /// Dyadic bracket (lo, hi) of 1/alpha actually used.
    pub beta_lo: DyadicWeight,
    pub beta_hi: DyadicWeight,
    /// D values from the two brackets; value_d is d_hi by convention.
    pub d_lo: T,
    pub d_hi: T,
    /// Optimizer witness on the original (uncompressed) space.
    pub witness_a: Option<HermitianOperator<T>>,
    /// Rank retained by the support projection of sigma.
    pub support_rank: usize,
    pub solver: Option<SolverSummary<T>>,
}

impl<T: Real> DivergenceResult<T> {
    fn infinite(alpha: T, bits: u32) -> Self {
        let (lo, hi) = dyadic_approx((T::one() / alpha).to_f64(), bits).expect("beta in range");
        Self {
            value_d: T::infinity(),
            value_q: T::infinity(),
            alpha,
            beta_lo: lo,
            beta_hi: hi,
            d_lo: T::infinity(),
            d_hi: T::infinity(),
            witness_a: None,
            support_rank: 0,
            solver: None,
        }
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha <= T::one() + T::of(1e-6) {
        return Err(Error::OutOfRange(format!(
            "alpha must exceed 1, got {}",
            alpha.to_f64()
        )));
    }
    Ok(())
}

/// Classical Renyi divergence of nonnegative vectors, with the usual
/// 0-term conventions; +infinity unless P << Q elementwise.
pub fn d_classical<T: Real>(p: &[T], q: &[T], alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    let mut s = T::zero();
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == T::zero() {
            continue;
        }
        if qi == T::zero() {
            return Ok(T::infinity());
        }
        s += pi.powf(alpha) * qi.powf(T::one() - alpha);
    }
    Ok(s.log2() / (alpha - T::one()))
}

fn supports_ok<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> bool {
    HermitianOperator::subset_check(rho, sigma, T::of(1e-7))
}

/// Sandwiched Renyi divergence, generalized inverses on supp(sigma).
pub fn d_sandwiched<T: Real>(
    rho: &HermitianOperator<T>,
    sigma: &HermitianOperator<T>,
    alpha: T,
) -> Result<T> {
    check_alpha(alpha)?;
    if !supports_ok(rho, sigma) {
        return Ok(T::infinity());
    }
    let rank_tol = T::of(DEFAULT_RANK_TOL);
    let exp = (T::one() - alpha) / (alpha + alpha);
    let s_pow = sigma.matrix_power(exp, rank_tol)?;
    let inner = HermitianOperator::from_parts(s_pow.mat.conjugate_by(&rho.mat));
    let d = inner.eig();
    let q: T = d
        .values
        .iter()
        .filter(|&&l| l > T::zero())
        .map(|&l| l.powf(alpha))
        .sum();
    Ok(q.log2() / (alpha - T::one()))
}

/// Geometric (maximal) Renyi divergence.
pub fn d_geometric<T: Real>(
    rho: &HermitianOperator<T>,
    sigma: &HermitianOperator<T>,
    alpha: T,
) -> Result<T> {
    check_alpha(alpha)?;
    if !supports_ok(rho, sigma) {
        return Ok(T::infinity());
    }
    let q = mean_eval(sigma, rho, alpha)?.trace();
    Ok(q.log2() / (alpha - T::one()))
}

/// Max-relative entropy log2 inf {lambda : rho <= lambda sigma}.
pub fn d_max<T: Real>(rho: &HermitianOperator<T>, sigma: &HermitianOperator<T>) -> Result<T> {
    if !supports_ok(rho, sigma) {
        return Ok(T::infinity());
    }
    let rank_tol = T::of(DEFAULT_RANK_TOL);
    let s_ihalf = sigma.matrix_power(T::of(-0.5), rank_tol)?;
    let inner = HermitianOperator::from_parts(s_ihalf.mat.conjugate_by(&rho.mat));
    Ok(inner.op_norm().log2())
}

/// Binary classical Renyi divergence between Bernoulli(p), Bernoulli(q).
pub fn d_binary<T: Real>(p: T, q: T, alpha: T) -> Result<T> {
    d_classical(&[p, T::one() - p], &[q, T::one() - q], alpha)
}

/// Classical divergence after pinching by sigma; a measured lower bound
/// surrogate (the full measurement optimization is out of scope).
pub fn d_pinched<T: Real>(
    rho: &HermitianOperator<T>,
    sigma: &HermitianOperator<T>,
    alpha: T,
) -> Result<T> {
    let pinched = pinch(rho, sigma, T::of(DEFAULT_SPEC_TOL));
    d_sandwiched(&pinched, sigma, alpha)
}

struct SharpSolve<T> {
    q: T,
    witness: CMatrix<T>,
    summary: SolverSummary<T>,
}

/// min tr(W A) s.t. rho <= I #_beta A, A >= 0. Callers precondition the
/// original pair (rho, sigma) by congruence with sigma^{-1/2}, which
/// turns the sigma operand into the identity (the mean transforms
/// covariantly) and the objective into tr(sigma A'); without this the
/// interior-point iteration stalls whenever sigma is badly conditioned.
fn solve_sharp_state<T: Real>(
    rho_c: &CMatrix<T>,
    weight: &CMatrix<T>,
    beta: DyadicWeight,
    opts: &SharpOpts<T>,
) -> Result<SharpSolve<T>> {
    let dim = rho_c.rows;
    let eye = CMatrix::identity(dim);
    // The preconditioned rho can have a large norm when sigma is nearly
    // singular. The mean is homogeneous of degree beta in its second
    // operand, so normalize rho to unit norm here and undo the scaling
    // on the optimal value and witness by s^{1/beta}.
    let s = HermitianOperator::from_parts(rho_c.clone()).op_norm();
    let s = if s > T::zero() { s } else { T::one() };
    let rho_n = rho_c.scale_re(T::one() / s);
    let undo = s.powf(T::one() / T::of(beta.value()));
    let mode = if all_real(&[rho_c, weight]) {
        Mode::Real
    } else {
        Mode::Complex
    };
    let mut b = LmiBuilder::new(mode);
    let a = b.hermitian_var(dim);
    let psd = b.add_block(dim);
    b.add_matrix_term(psd, 0, 0, &a, T::one());
    build_mean_constraint(
        &mut b,
        Operand::Const(&eye),
        Operand::Var(a),
        Operand::Const(&rho_n),
        beta,
        dim,
    );
    b.weighted_trace_objective(&a, weight);
    let sol = b.solve(SolveOpts {
        tol: opts.tol,
        max_iter: opts.max_iter,
    });
    let usable = sol.status == SolveStatus::Optimal
        || (sol.status == SolveStatus::MaxIter
            && sol.primal_res <= T::of(1e-6)
            && sol.dual_res <= T::of(1e-6)
            && sol.gap <= T::of(1e-6));
    if !usable {
        return Err(Error::SolverFailure(format!(
            "sharp state program: status {:?}, residuals ({:e}, {:e}, {:e}) after {} iterations",
            sol.status,
            sol.primal_res.to_f64(),
            sol.dual_res.to_f64(),
            sol.gap.to_f64(),
            sol.iterations
        )));
    }
    Ok(SharpSolve {
        q: sol.pobj * undo,
        witness: a.value(&sol.x).scale_re(undo),
        summary: SolverSummary::from_solution(&sol),
    })
}

/// Sharp Renyi divergence of states via its defining convex program.
///
/// 1/alpha is bracketed by dyadics at `opts.bits`. Both bracket solves
/// are reported (they enclose the exact value: the optimal trace is
/// decreasing in beta, so d_lo >= D# >= d_hi); the headline linearly
/// interpolates them at the true 1/alpha, whose bracketing error is
/// second order in the bracket width. The optimizer witness is
/// re-verified against the closed-form mean before being returned.
pub fn d_sharp_state<T: Real>(
    rho: &QState<T>,
    sigma: &QState<T>,
    alpha: T,
    opts: &SharpOpts<T>,
) -> Result<DivergenceResult<T>> {
    check_alpha(alpha)?;
    if rho.op.dim != sigma.op.dim {
        return Err(Error::DimensionMismatch(format!(
            "state dims {} vs {}",
            rho.op.dim, sigma.op.dim
        )));
    }
    if !supports_ok(&rho.op, &sigma.op) {
        return Ok(DivergenceResult::infinite(alpha, opts.bits));
    }

    let rank_tol = T::of(DEFAULT_RANK_TOL);
    let v = sigma.op.support_isometry(rank_tol);
    let rank = v.cols;
    let vd = v.adjoint();
    let rho_c = vd.matmul(&rho.op.mat).matmul(&v).hermitian_part();
    let sigma_c = vd.matmul(&sigma.op.mat).matmul(&v).hermitian_part();

    let sig_h = HermitianOperator::from_parts(sigma_c.clone());
    let s_half = sig_h.matrix_power(T::of(0.5), rank_tol)?;
    let s_inv_half = sig_h.matrix_power(T::of(-0.5), rank_tol)?;
    let rho_p = s_inv_half
        .mat
        .matmul(&rho_c)
        .matmul(&s_inv_half.mat)
        .hermitian_part();

    let beta = T::one() / alpha;
    let (lo, hi) = dyadic_approx(beta.to_f64(), opts.bits)?;

    let hi_solve = solve_sharp_state(&rho_p, &sigma_c, hi, opts)?;
    let lo_solve = if lo == hi {
        None
    } else {
        Some(solve_sharp_state(&rho_p, &sigma_c, lo, opts)?)
    };

    let to_d = |q: T| q.log2() / (alpha - T::one());
    let d_hi = to_d(hi_solve.q);
    let d_lo = lo_solve.as_ref().map(|s| to_d(s.q)).unwrap_or(d_hi);
    let value_d = interpolate_brackets(beta, lo, hi, d_lo, d_hi);
    let value_q = (value_d * (alpha - T::one())).exp2();

    // Witness re-verification outside the solver, back in the original
    // (unpreconditioned) frame.
    let a_c = HermitianOperator::from_parts(
        s_half
            .mat
            .matmul(&hi_solve.witness)
            .matmul(&s_half.mat)
            .hermitian_part(),
    );
    let mean = mean_eval_regularized_for_check(&sig_h, &a_c, T::of(hi.value()))?;
    let viol = mean
        .sub(&HermitianOperator::from_parts(rho_c.clone()))
        .min_eig();
    let scale = T::one() + a_c.op_norm();
    if viol < -T::of(1e-6) * scale {
        return Err(Error::SolverFailure(format!(
            "witness violates the mean constraint by {:e}",
            viol.to_f64()
        )));
    }
    let tr_gap = (a_c.trace() - hi_solve.q).abs();
    if tr_gap > T::of(1e-6) * (T::one() + hi_solve.q) {
        return Err(Error::SolverFailure(format!(
            "witness trace off by {:e}",
            tr_gap.to_f64()
        )));
    }
    let witness_full = HermitianOperator::from_parts(v.matmul(&a_c.mat).matmul(&vd));

    Ok(DivergenceResult {
        value_d,
        value_q,
        alpha,
        beta_lo: lo,
        beta_hi: hi,
        d_lo,
        d_hi,
        witness_a: Some(witness_full),
        support_rank: rank,
        solver: Some(hi_solve.summary),
    })
}

/// Linear interpolation of the two bracket solves at the exact weight.
pub(crate) fn interpolate_brackets<T: Real>(
    beta: T,
    lo: DyadicWeight,
    hi: DyadicWeight,
    d_lo: T,
    d_hi: T,
) -> T {
    if lo == hi {
        return d_hi;
    }
    let (bl, bh) = (T::of(lo.value()), T::of(hi.value()));
    d_lo + (d_hi - d_lo) * (beta - bl) / (bh - bl)
}

/// Mean evaluation with a small ridge on the first operand so that the
/// verification of near-singular optimizers is well conditioned.
fn mean_eval_regularized_for_check<T: Real>(
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
    beta: T,
) -> Result<HermitianOperator<T>> {
    let eps = T::of(1e-12) * (T::one() + a.op_norm());
    let reg = a.add(&HermitianOperator::identity(a.dim).scale(eps));
    mean_eval(&reg, b, beta)
}

/// Closed-form bounds sandwiching the sharp divergence: the sandwiched
/// divergence from below; from above the tighter of the geometric
/// divergence and the trivially feasible D_max + log2(tr rho)/(alpha-1).
pub fn d_sharp_bounds<T: Real>(
    rho: &QState<T>,
    sigma: &QState<T>,
    alpha: T,
) -> Result<(T, T)> {
    check_alpha(alpha)?;
    let lower = d_sandwiched(&rho.op, &sigma.op, alpha)?;
    let geo = d_geometric(&rho.op, &sigma.op, alpha)?;
    let trivial = d_max(&rho.op, &sigma.op)?
        + rho.op.trace().log2() / (alpha - T::one());
    let upper = if geo < trivial { geo } else { trivial };
    Ok((lower, upper))
}
