//! Channel-level sharp divergence and everything derived from it: the
//! tensor-power hierarchy bounding the regularized sandwiched channel
//! divergence, the capacity-bound SDP over the diamond-norm-constrained
//! comparison set, and strong-converse / two-way rate bound formulas.
//!
//! Infinity-norm objectives are uniformly realized as scalar epigraphs
//! t I - H >= 0.

use rayon::prelude::*;

use crate::divergence::SolverSummary;
use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, HermitianOperator, DEFAULT_RANK_TOL};
use crate::meanrep::{
    build_mean_constraint, dyadic_approx, mean_eval_regularized, DyadicWeight, Operand,
};
use crate::quantum::{partial_trace, partial_transpose, tensor_power, QChannel};
use crate::scalar::Real;
use crate::sdp::{all_real, LmiBuilder, Mode, SolveOpts, SolveStatus};

/// Default cap on the Choi dimension of tensor-power constructions;
/// admits qubit channels up to m = 2 (dimension 16). Larger powers must
/// be requested explicitly.
pub const DEFAULT_SIZE_BUDGET: usize = 32;

/// Options for the channel-level programs.
#[derive(Clone, Copy, Debug)]
pub struct ChannelOpts<T> {
    /// Dyadic approximation level for 1/alpha.
    pub bits: u32,
    pub tol: T,
    pub max_iter: usize,
    /// Cap on the Choi dimension of tensor powers.
    pub size_budget: usize,
}

impl<T: Real> Default for ChannelOpts<T> {
    fn default() -> Self {
        Self {
            bits: 8,
            tol: T::of(1e-8),
            max_iter: 200,
            size_budget: DEFAULT_SIZE_BUDGET,
        }
    }
}

impl<T: Real> ChannelOpts<T> {
    fn solve_opts(&self) -> SolveOpts<T> {
        SolveOpts {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

/// Result of a channel-divergence solve.
#[derive(Clone, Debug)]
pub struct ChannelDivResult<T> {
    /// Headline divergence in bits; +infinity on support violation.
    pub value_d: T,
    /// Optimal epigraph value (the infinity norm of tr_Y A).
    pub value_q: T,
    pub alpha: T,
    /// Tensor-power order of the channels this was computed on.
    pub m: usize,
    pub beta_lo: DyadicWeight,
    pub beta_hi: DyadicWeight,
    pub d_lo: T,
    pub d_hi: T,
    /// Optimizer A on the full input-output space.
    pub witness_a: Option<HermitianOperator<T>>,
    pub epigraph_t: T,
    pub solver: Option<SolverSummary<T>>,
}

impl<T: Real> ChannelDivResult<T> {
    fn infinite(alpha: T, bits: u32) -> Self {
        let (lo, hi) = dyadic_approx((T::one() / alpha).to_f64(), bits).expect("beta in range");
        Self {
            value_d: T::infinity(),
            value_q: T::infinity(),
            alpha,
            m: 1,
            beta_lo: lo,
            beta_hi: hi,
            d_lo: T::infinity(),
            d_hi: T::infinity(),
            witness_a: None,
            epigraph_t: T::infinity(),
            solver: None,
        }
    }
}

/// Tensor-power sandwich on the regularized sandwiched channel
/// divergence: upper = (1/m) of the sharp divergence of m-fold powers,
/// lower = upper minus the dimensional correction term.
#[derive(Clone, Debug)]
pub struct HierarchyBound<T> {
    pub m: usize,
    pub upper: T,
    pub lower: T,
    /// dim_in * dim_out of the base channel pair.
    pub d: usize,
    /// The subtracted correction (1/m)(alpha/(alpha-1))(d^2+d)log2(m+d).
    pub correction: T,
    pub detail: ChannelDivResult<T>,
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

fn check_dims<T: Real>(n: &QChannel<T>, m: &QChannel<T>) -> Result<()> {
    if n.dim_in != m.dim_in || n.dim_out != m.dim_out {
        return Err(Error::DimensionMismatch(format!(
            "channel dims ({}, {}) vs ({}, {})",
            n.dim_in, n.dim_out, m.dim_in, m.dim_out
        )));
    }
    Ok(())
}

fn usable<T: Real>(sol: &crate::sdp::LmiSolution<T>) -> bool {
    sol.status == SolveStatus::Optimal
        || (sol.status == SolveStatus::MaxIter
            && sol.primal_res <= T::of(1e-6)
            && sol.dual_res <= T::of(1e-6)
            && sol.gap <= T::of(1e-6))
}

fn solver_error<T: Real>(what: &str, sol: &crate::sdp::LmiSolution<T>) -> Error {
    Error::SolverFailure(format!(
        "{}: status {:?}, residuals ({:e}, {:e}, {:e}) after {} iterations",
        what,
        sol.status,
        sol.primal_res.to_f64(),
        sol.dual_res.to_f64(),
        sol.gap.to_f64(),
        sol.iterations
    ))
}

struct ChannelSolve<T> {
    t: T,
    witness: CMatrix<T>,
    summary: SolverSummary<T>,
}

/// min ||tr_Y A||_inf s.t. J^N <= J^M #_beta A, A >= 0, with A
/// compressed onto supp(J^M) through the isometry v. The caller passes
/// the pair preconditioned by congruence with (J^M)^{-1/2} (jn_p is the
/// transformed J^N, s_half = (J^M)^{1/2}): the mean operand becomes the
/// identity, which keeps the interior-point iteration well conditioned
/// even for nearly singular comparison channels. The returned witness
/// is transformed back to the compressed original frame.
fn solve_sharp_channel<T: Real>(
    jn_p: &CMatrix<T>,
    s_half: &CMatrix<T>,
    v: &CMatrix<T>,
    dims: (usize, usize),
    beta: DyadicWeight,
    opts: &ChannelOpts<T>,
) -> Result<ChannelSolve<T>> {
    let (dx, dy) = dims;
    let r = jn_p.rows;
    let eye = CMatrix::identity(r);
    // Normalize the preconditioned Choi operator: the mean is
    // homogeneous of degree beta in A, so a unit-norm right-hand side
    // costs only a factor s^{1/beta} on the optimum, and it keeps the
    // iteration data O(1) for nearly singular comparison channels.
    let s = HermitianOperator::from_parts(jn_p.clone()).op_norm();
    let s = if s > T::zero() { s } else { T::one() };
    let jn_n = jn_p.scale_re(T::one() / s);
    let undo = s.powf(T::one() / T::of(beta.value()));
    let mode = if all_real(&[jn_p, s_half, v]) {
        Mode::Real
    } else {
        Mode::Complex
    };
    let vs = v.matmul(s_half);
    let vsd = vs.adjoint();

    let mut b = LmiBuilder::new(mode);
    let a = b.hermitian_var(r);
    let t = b.scalar_var();

    let psd = b.add_block(r);
    b.add_matrix_term(psd, 0, 0, &a, T::one());
    build_mean_constraint(
        &mut b,
        Operand::Const(&eye),
        Operand::Var(a),
        Operand::Const(&jn_n),
        beta,
        r,
    );
    // epigraph t I_X - tr_Y(V S A' S V^dagger) >= 0
    let epi = b.add_block(dx);
    b.add_scalar_term(epi, t, &CMatrix::identity(dx));
    b.add_mapped_term(epi, &a, |basis| {
        let full = HermitianOperator::from_parts(vs.matmul(basis).matmul(&vsd));
        partial_trace(&full, &[dx, dy], &[true, false])
            .expect("dims consistent")
            .mat
            .scale_re(-T::one())
    });
    b.add_objective(t, T::one());

    let sol = b.solve(opts.solve_opts());
    if !usable(&sol) {
        return Err(solver_error("sharp channel program", &sol));
    }
    let back = s_half
        .matmul(&a.value(&sol.x))
        .matmul(s_half)
        .hermitian_part();
    Ok(ChannelSolve {
        t: sol.x[t] * undo,
        witness: back.scale_re(undo),
        summary: SolverSummary::from_solution(&sol),
    })
}

/// Sharp Renyi divergence between channels: the infimum of
/// ||tr_Y A||_inf over A >= 0 with J^N <= J^M #_{1/alpha} A. Dyadic
/// bracketing and the interpolated headline follow the state-level
/// convention.
pub fn d_sharp_channel<T: Real>(
    n: &QChannel<T>,
    m: &QChannel<T>,
    alpha: T,
    opts: &ChannelOpts<T>,
) -> Result<ChannelDivResult<T>> {
    check_alpha(alpha)?;
    check_dims(n, m)?;
    if !HermitianOperator::subset_check(&n.choi, &m.choi, T::of(1e-7)) {
        return Ok(ChannelDivResult::infinite(alpha, opts.bits));
    }

    let rank_tol = T::of(DEFAULT_RANK_TOL);
    let v = m.choi.support_isometry(rank_tol);
    let vd = v.adjoint();
    let jn_c = vd.matmul(&n.choi.mat).matmul(&v).hermitian_part();
    let jm_c = vd.matmul(&m.choi.mat).matmul(&v).hermitian_part();
    let jm_h = HermitianOperator::from_parts(jm_c.clone());
    let s_half = jm_h.matrix_power(T::of(0.5), rank_tol)?;
    let s_inv_half = jm_h.matrix_power(T::of(-0.5), rank_tol)?;
    let jn_p = s_inv_half
        .mat
        .matmul(&jn_c)
        .matmul(&s_inv_half.mat)
        .hermitian_part();
    let dims = (n.dim_in, n.dim_out);

    let (lo, hi) = dyadic_approx((T::one() / alpha).to_f64(), opts.bits)?;
    let hi_solve = solve_sharp_channel(&jn_p, &s_half.mat, &v, dims, hi, opts)?;
    let lo_solve = if lo == hi {
        None
    } else {
        Some(solve_sharp_channel(&jn_p, &s_half.mat, &v, dims, lo, opts)?)
    };

    let to_d = |q: T| q.log2() / (alpha - T::one());
    let d_hi = to_d(hi_solve.t);
    let d_lo = lo_solve.as_ref().map(|s| to_d(s.t)).unwrap_or(d_hi);
    let value_d = crate::divergence::interpolate_brackets(T::one() / alpha, lo, hi, d_lo, d_hi);
    let value_q = (value_d * (alpha - T::one())).exp2();

    // Witness re-verification outside the solver.
    let a_full = HermitianOperator::from_parts(v.matmul(&hi_solve.witness).matmul(&vd));
    let scale = T::one() + a_full.op_norm();
    let eps = T::of(1e-12) * (T::one() + m.choi.op_norm());
    let mean = mean_eval_regularized(&m.choi, &a_full, T::of(hi.value()), eps)?;
    let viol = mean.sub(&n.choi).min_eig();
    if viol < -T::of(1e-6) * scale {
        return Err(Error::SolverFailure(format!(
            "channel witness violates the mean constraint by {:e}",
            viol.to_f64()
        )));
    }
    let marg = partial_trace(&a_full, &[n.dim_in, n.dim_out], &[true, false])?;
    let lam = marg.eig().max_value();
    if lam > hi_solve.t + T::of(1e-6) * (T::one() + hi_solve.t.abs()) {
        return Err(Error::SolverFailure(format!(
            "channel witness marginal exceeds the epigraph by {:e}",
            (lam - hi_solve.t).to_f64()
        )));
    }

    Ok(ChannelDivResult {
        value_d,
        value_q,
        alpha,
        m: 1,
        beta_lo: lo,
        beta_hi: hi,
        d_lo,
        d_hi,
        witness_a: Some(a_full),
        epigraph_t: value_q,
        solver: Some(hi_solve.summary),
    })
}

/// Sandwich bounds on the regularized sandwiched channel divergence from
/// the m-fold tensor power. The lower member can be vacuous (very
/// negative) at small m; it is reported but never used as a certified
/// bound on derived quantities.
pub fn hierarchy_bound<T: Real>(
    n: &QChannel<T>,
    m_ch: &QChannel<T>,
    alpha: T,
    m: usize,
    opts: &ChannelOpts<T>,
) -> Result<HierarchyBound<T>> {
    check_alpha(alpha)?;
    check_dims(n, m_ch)?;
    let nm = tensor_power(n, m, opts.size_budget)?;
    let mm = tensor_power(m_ch, m, opts.size_budget)?;
    let mut detail = d_sharp_channel(&nm, &mm, alpha, opts)?;
    detail.m = m;

    let mf = T::of(m as f64);
    let upper = detail.value_d / mf;
    let d = n.dim_in * n.dim_out;
    let df = T::of(d as f64);
    let correction = (alpha / (alpha - T::one())) * (df * df + df)
        * T::of((m as f64 + d as f64).log2())
        / mf;
    Ok(HierarchyBound {
        m,
        upper,
        lower: upper - correction,
        d,
        correction,
        detail,
    })
}

/// Capacity-style bound and its comparison-channel witness.
#[derive(Clone, Debug)]
pub struct CapacityBound<T> {
    pub value: T,
    pub alpha: T,
    /// Optimal epigraph value (Q behind value).
    pub epigraph_t: T,
    pub minimizer_choi: HermitianOperator<T>,
    pub witness_a: HermitianOperator<T>,
    pub solver: SolverSummary<T>,
}

/// min over CP maps M with ||Theta_Y o M||_diamond <= 1 of the sharp
/// channel divergence from N, as one joint SDP: variables J^M >= 0,
/// A >= 0, Y0, Y1, scalars t, s0, s1; mean-tower J^N <= J^M #_beta A,
/// epigraph t I >= tr_Y A, diamond block on the Y-partial-transpose of
/// J^M with (s0 + s1)/2 <= 1. Uses the lo dyadic bracket of 1/alpha:
/// the optimal trace value is decreasing in beta, so rounding down
/// over-estimates and keeps the result a valid capacity upper bound.
pub fn capacity_bound<T: Real>(
    n: &QChannel<T>,
    alpha: T,
    opts: &ChannelOpts<T>,
) -> Result<CapacityBound<T>> {
    check_alpha(alpha)?;
    let (dx, dy) = (n.dim_in, n.dim_out);
    let dxy = dx * dy;
    let (beta, _) = dyadic_approx((T::one() / alpha).to_f64(), opts.bits)?;
    let mode = if all_real(&[&n.choi.mat]) {
        Mode::Real
    } else {
        Mode::Complex
    };

    let mut b = LmiBuilder::new(mode);
    let jm = b.hermitian_var(dxy);
    let a = b.hermitian_var(dxy);
    let y0 = b.hermitian_var(dxy);
    let y1 = b.hermitian_var(dxy);
    let t = b.scalar_var();
    let s0 = b.scalar_var();
    let s1 = b.scalar_var();

    for var in [&jm, &a] {
        let blk = b.add_block(dxy);
        b.add_matrix_term(blk, 0, 0, var, T::one());
    }
    build_mean_constraint(
        &mut b,
        Operand::Var(jm),
        Operand::Var(a),
        Operand::Const(&n.choi.mat),
        beta,
        dxy,
    );
    // t I_X - tr_Y A >= 0
    let epi = b.add_block(dx);
    b.add_scalar_term(epi, t, &CMatrix::identity(dx));
    b.add_mapped_term(epi, &a, |basis| {
        partial_trace(&HermitianOperator::from_parts(basis.clone()), &[dx, dy], &[true, false])
            .expect("dims consistent")
            .mat
            .scale_re(-T::one())
    });
    // [[Y0, -(J^M)^{T_Y}], [-(J^M)^{T_Y}, Y1]] >= 0
    let dia = b.add_block(2 * dxy);
    b.add_matrix_term(dia, 0, 0, &y0, T::one());
    b.add_matrix_term(dia, dxy, dxy, &y1, T::one());
    b.add_mapped_term(dia, &jm, |basis| {
        let pt = partial_transpose(
            &HermitianOperator::from_parts(basis.clone()),
            &[dx, dy],
            &[false, true],
        )
        .expect("dims consistent");
        let mut out = CMatrix::zeros(2 * dxy, 2 * dxy);
        out.set_submatrix(0, dxy, &pt.mat.scale_re(-T::one()));
        out.set_submatrix(dxy, 0, &pt.mat.adjoint().scale_re(-T::one()));
        out
    });
    // s0 I_X - tr_Y Y0 >= 0, s1 I_X - tr_Y Y1 >= 0
    for (s, y) in [(s0, &y0), (s1, &y1)] {
        let blk = b.add_block(dx);
        b.add_scalar_term(blk, s, &CMatrix::identity(dx));
        b.add_mapped_term(blk, y, |basis| {
            partial_trace(&HermitianOperator::from_parts(basis.clone()), &[dx, dy], &[true, false])
                .expect("dims consistent")
                .mat
                .scale_re(-T::one())
        });
    }
    // 2 - s0 - s1 >= 0
    let cap = b.add_block(1);
    b.set_const(cap, 0, 0, &CMatrix::identity(1).scale_re(T::of(2.0)));
    let neg1 = CMatrix::identity(1).scale_re(-T::one());
    b.add_scalar_term(cap, s0, &neg1);
    b.add_scalar_term(cap, s1, &neg1);

    b.add_objective(t, T::one());
    let sol = b.solve(opts.solve_opts());
    if !usable(&sol) {
        return Err(solver_error("capacity program", &sol));
    }

    let t_star = sol.x[t];
    let minimizer = HermitianOperator::from_parts(jm.value(&sol.x));
    let witness = HermitianOperator::from_parts(a.value(&sol.x));
    Ok(CapacityBound {
        value: t_star.log2() / (alpha - T::one()),
        alpha,
        epigraph_t: t_star,
        minimizer_choi: minimizer,
        witness_a: witness,
        solver: SolverSummary::from_solution(&sol),
    })
}

/// Diamond norm of the Hermitian-preserving map with the given Choi
/// matrix, by its own SDP; used to re-verify capacity witnesses.
pub fn diamond_norm<T: Real>(
    j: &HermitianOperator<T>,
    dim_in: usize,
    dim_out: usize,
) -> Result<T> {
    if j.dim != dim_in * dim_out {
        return Err(Error::DimensionMismatch(format!(
            "Choi dim {} != {}*{}",
            j.dim, dim_in, dim_out
        )));
    }
    let dxy = j.dim;
    let mode = if all_real(&[&j.mat]) {
        Mode::Real
    } else {
        Mode::Complex
    };
    let mut b = LmiBuilder::new(mode);
    let y0 = b.hermitian_var(dxy);
    let y1 = b.hermitian_var(dxy);
    let s0 = b.scalar_var();
    let s1 = b.scalar_var();
    let dia = b.add_block(2 * dxy);
    b.add_matrix_term(dia, 0, 0, &y0, T::one());
    b.add_matrix_term(dia, dxy, dxy, &y1, T::one());
    b.set_const(dia, 0, dxy, &j.mat.scale_re(-T::one()));
    for (s, y) in [(s0, &y0), (s1, &y1)] {
        let blk = b.add_block(dim_in);
        b.add_scalar_term(blk, s, &CMatrix::identity(dim_in));
        b.add_mapped_term(blk, y, |basis| {
            partial_trace(
                &HermitianOperator::from_parts(basis.clone()),
                &[dim_in, dim_out],
                &[true, false],
            )
            .expect("dims consistent")
            .mat
            .scale_re(-T::one())
        });
    }
    b.add_objective(s0, T::of(0.5));
    b.add_objective(s1, T::of(0.5));
    let sol = b.solve(SolveOpts::default());
    if !usable(&sol) {
        return Err(solver_error("diamond norm program", &sol));
    }
    Ok(sol.pobj)
}

/// One row of a capacity sweep.
#[derive(Clone, Debug)]
pub struct CapacityRow<T> {
    pub gamma: T,
    pub best_alpha: T,
    pub value: T,
    /// Set when some cell of this row failed; the value is then the
    /// minimum over the cells that did solve (or infinity if none did).
    pub error: Option<String>,
}

/// Per-gamma minimum of capacity_bound over the alpha grid for a
/// one-parameter channel family. Cells solve independently in parallel;
/// failures degrade the row instead of aborting the sweep.
pub fn capacity_curve<T, F>(
    channel_for: F,
    gammas: &[T],
    alphas: &[T],
    opts: &ChannelOpts<T>,
) -> Vec<CapacityRow<T>>
where
    T: Real,
    F: Fn(T) -> Result<QChannel<T>> + Sync,
{
    gammas
        .par_iter()
        .map(|&gamma| {
            let ch = match channel_for(gamma) {
                Ok(c) => c,
                Err(e) => {
                    return CapacityRow {
                        gamma,
                        best_alpha: T::nan(),
                        value: T::infinity(),
                        error: Some(e.to_string()),
                    }
                }
            };
            let cells: Vec<(T, Result<CapacityBound<T>>)> = alphas
                .par_iter()
                .map(|&alpha| (alpha, capacity_bound(&ch, alpha, opts)))
                .collect();
            let mut best: Option<(T, T)> = None;
            let mut error = None;
            for (alpha, res) in cells {
                match res {
                    Ok(cb) => {
                        if best.map(|(_, v)| cb.value < v).unwrap_or(true) {
                            best = Some((alpha, cb.value));
                        }
                    }
                    Err(e) => error = Some(format!("alpha {}: {}", alpha.to_f64(), e)),
                }
            }
            match best {
                Some((alpha, value)) => CapacityRow {
                    gamma,
                    best_alpha: alpha,
                    value,
                    error,
                },
                None => CapacityRow {
                    gamma,
                    best_alpha: T::nan(),
                    value: T::infinity(),
                    error,
                },
            }
        })
        .collect()
}

/// One row of the strong-converse exponent curve.
#[derive(Clone, Debug)]
pub struct ExponentRow<T> {
    pub r: T,
    pub exponent: T,
}

/// Certified lower bound on the strong-converse exponent at rate r:
/// max over the alpha grid of (alpha-1)/alpha (r - U_alpha), where
/// U_alpha is the hierarchy upper bound on the regularized sandwiched
/// divergence; clamped at 0.
pub fn strong_converse_curve<T: Real>(
    n: &QChannel<T>,
    m_ch: &QChannel<T>,
    r_values: &[T],
    alphas: &[T],
    m: usize,
    opts: &ChannelOpts<T>,
) -> Result<Vec<ExponentRow<T>>> {
    let uppers: Vec<(T, T)> = alphas
        .par_iter()
        .map(|&alpha| hierarchy_bound(n, m_ch, alpha, m, opts).map(|h| (alpha, h.upper)))
        .collect::<Result<_>>()?;
    Ok(r_values
        .iter()
        .map(|&r| {
            let mut best = T::zero();
            for &(alpha, u) in &uppers {
                let term = (alpha - T::one()) / alpha * (r - u);
                if term > best {
                    best = term;
                }
            }
            ExponentRow { r, exponent: best }
        })
        .collect())
}

/// Upper bound on the two-way assisted rate at error epsilon and block
/// length n_uses: min over the alpha grid of the capacity bound plus the
/// finite-length correction -(alpha/(n(alpha-1))) log2(1-eps).
pub fn two_way_rate_bound<T: Real>(
    n: &QChannel<T>,
    alphas: &[T],
    epsilon: T,
    n_uses: usize,
    opts: &ChannelOpts<T>,
) -> Result<T> {
    if epsilon < T::zero() || epsilon >= T::one() {
        return Err(Error::OutOfRange(format!(
            "epsilon {} outside [0, 1)",
            epsilon.to_f64()
        )));
    }
    if n_uses < 1 {
        return Err(Error::OutOfRange("block length must be >= 1".into()));
    }
    let cells: Vec<T> = alphas
        .par_iter()
        .map(|&alpha| {
            capacity_bound(n, alpha, opts).map(|cb| {
                let corr = -(alpha / (T::of(n_uses as f64) * (alpha - T::one())))
                    * (T::one() - epsilon).log2();
                cb.value + corr
            })
        })
        .collect::<Result<_>>()?;
    cells
        .into_iter()
        .reduce(|a, b| if b < a { b } else { a })
        .ok_or_else(|| Error::OutOfRange("empty alpha grid".into()))
}
