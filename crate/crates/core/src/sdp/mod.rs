//! Conic optimization over products of Hermitian PSD cones.
//!
//! Two surfaces share one interior-point kernel:
//! * [`ConicProgram`] — trace-pairing standard form (minimize a linear
//!   functional of PSD blocks subject to affine equalities), solved by
//!   dualizing into the LMI form;
//! * [`LmiBuilder`] — the LMI form used directly by the divergence
//!   programs, where variables are the free parameters and constraints
//!   are PSD-valued affine expressions.

pub mod ipm;
pub mod model;
pub mod rsym;

pub use ipm::{LmiSolution, SolveOpts, SolveStatus, SparseSym};
pub use model::{all_real, HVar, LmiBuilder, Mode};
pub use rsym::RMatrix;

use num_complex::Complex;

use crate::hermitian::{eig_hermitian, CMatrix};
use crate::scalar::Real;

/// One affine equality sum_b Re<F_b, X_b> = rhs.
#[derive(Clone, Debug)]
pub struct Equality<T> {
    pub terms: Vec<(usize, CMatrix<T>)>,
    pub rhs: T,
}

/// Standard-form program: minimize sum_b Re<C_b, X_b> over PSD blocks
/// X_b subject to trace-pairing equalities.
#[derive(Clone, Debug)]
pub struct ConicProgram<T> {
    pub blocks: Vec<(String, usize)>,
    pub equalities: Vec<Equality<T>>,
    pub objective: Vec<(usize, CMatrix<T>)>,
}

#[derive(Clone, Debug)]
pub struct ConicSolution<T> {
    pub status: SolveStatus,
    pub primal_blocks: Vec<CMatrix<T>>,
    pub dual: Vec<T>,
    pub primal_obj: T,
    pub dual_obj: T,
    pub primal_res: T,
    pub dual_res: T,
    pub gap: T,
    pub iterations: usize,
}

impl<T: Real> ConicProgram<T> {
    pub fn new() -> Self {
        Self {
            blocks: Vec::new(),
            equalities: Vec::new(),
            objective: Vec::new(),
        }
    }

    pub fn add_block(&mut self, name: &str, dim: usize) -> usize {
        self.blocks.push((name.to_string(), dim));
        self.blocks.len() - 1
    }

    pub fn add_equality(&mut self, terms: Vec<(usize, CMatrix<T>)>, rhs: T) {
        self.equalities.push(Equality { terms, rhs });
    }

    pub fn set_objective(&mut self, block: usize, c: CMatrix<T>) {
        self.objective.push((block, c));
    }

    /// Solve via the Lagrange dual LMI: variables y_i per equality,
    /// blocks S_b = C_b - sum_i y_i F_{i,b} >= 0, maximize b^T y. The
    /// LMI solver's dual blocks are the primal X_b.
    pub fn solve(&self, opts: SolveOpts<T>) -> ConicSolution<T> {
        let mut mats: Vec<&CMatrix<T>> = Vec::new();
        for (_, c) in &self.objective {
            mats.push(c);
        }
        for eq in &self.equalities {
            for (_, f) in &eq.terms {
                mats.push(f);
            }
        }
        let mode = if all_real(&mats) { Mode::Real } else { Mode::Complex };

        let mut builder = LmiBuilder::new(mode);
        let ys: Vec<usize> = (0..self.equalities.len())
            .map(|_| builder.scalar_var())
            .collect();
        let blk_ids: Vec<usize> = self
            .blocks
            .iter()
            .map(|(_, dim)| builder.add_block(*dim))
            .collect();
        for (b, c) in &self.objective {
            builder.set_const(blk_ids[*b], 0, 0, c);
        }
        for (i, eq) in self.equalities.iter().enumerate() {
            // minimize (-b)^T y realizes maximize b^T y
            builder.add_objective(ys[i], -eq.rhs);
            for (b, f) in &eq.terms {
                builder.add_scalar_term(blk_ids[*b], ys[i], &f.scale_re(-T::one()));
            }
        }

        let sol = builder.solve(opts);
        let status = match sol.status {
            SolveStatus::Unbounded => SolveStatus::Infeasible,
            SolveStatus::Infeasible => SolveStatus::Unbounded,
            s => s,
        };

        // Recover primal blocks from LMI duals, projecting small
        // negative eigenvalues to zero.
        let mut primal_blocks = Vec::with_capacity(self.blocks.len());
        for (bi, _) in blk_ids.iter().enumerate() {
            let x = builder.dual_block(&sol, bi);
            let d = eig_hermitian(&x);
            let floor = -T::of(10.0) * opts.tol * (T::one() + d.max_value().abs());
            let proj = if d.min_value() >= floor {
                d.apply_fn(|l| if l > T::zero() { l } else { T::zero() })
            } else {
                x
            };
            primal_blocks.push(proj);
        }

        let primal_obj: T = self
            .objective
            .iter()
            .map(|(b, c)| re_inner(c, &primal_blocks[*b]))
            .sum();
        let dual_obj: T = self
            .equalities
            .iter()
            .zip(&sol.x)
            .map(|(eq, &y)| eq.rhs * y)
            .sum();
        let mut primal_res = T::zero();
        for eq in &self.equalities {
            let got: T = eq
                .terms
                .iter()
                .map(|(b, f)| re_inner(f, &primal_blocks[*b]))
                .sum();
            let r = (got - eq.rhs).abs() / (T::one() + eq.rhs.abs());
            if r > primal_res {
                primal_res = r;
            }
        }

        ConicSolution {
            status,
            primal_blocks,
            dual: sol.x.clone(),
            primal_obj,
            dual_obj,
            // the LMI primal residual is dual feasibility here and vice
            // versa; report the recomputed equality violation as primal
            primal_res,
            dual_res: sol.primal_res,
            gap: sol.gap,
            iterations: sol.iterations,
        }
    }
}

impl<T: Real> Default for ConicProgram<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Re tr(A^dagger B).
pub fn re_inner<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let mut s = T::zero();
    for (x, y) in a.data.iter().zip(&b.data) {
        s += x.re * y.re + x.im * y.im;
    }
    s
}

/// Hermitian basis of dimension n: e_ii, then (e_ij + e_ji) and
/// i(e_ij - e_ji) for i < j. Used to expand operator equalities into
/// trace pairings.
pub fn hermitian_basis<T: Real>(n: usize) -> Vec<CMatrix<T>> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut m = CMatrix::zeros(n, n);
        m[(i, i)] = Complex::new(T::one(), T::zero());
        out.push(m);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(i, j)] = Complex::new(T::one(), T::zero());
            m[(j, i)] = Complex::new(T::one(), T::zero());
            out.push(m);
            let mut m = CMatrix::zeros(n, n);
            m[(i, j)] = Complex::new(T::zero(), T::one());
            m[(j, i)] = Complex::new(T::zero(), -T::one());
            out.push(m);
        }
    }
    out
}
