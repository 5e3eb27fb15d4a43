//! Complex-level modeling layer over the real LMI solver.
//!
//! Variables are real scalars; a Hermitian matrix variable is a batch of
//! scalars (diagonal, then re/im per off-diagonal entry). Constraint
//! blocks are complex Hermitian-valued affine expressions
//! D + sum_i x_i E_i required PSD. At build time blocks are either used
//! directly (all-real data) or embedded as real symmetric matrices of
//! twice the dimension via H = P + iQ -> [[P, -Q],[Q, P]], which doubles
//! eigenvalue multiplicities and preserves the feasible set exactly.

use std::collections::BTreeMap;

use num_complex::Complex;

use super::ipm::{solve_lmi, LmiSolution, RealBlock, RealLmi, SolveOpts, SparseSym};
use super::rsym::RMatrix;
use crate::hermitian::CMatrix;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// All data real: Hermitian variables are real symmetric
    /// (n(n+1)/2 scalars), blocks solved at native dimension.
    Real,
    /// General case: n^2 scalars per variable, blocks realified to 2n.
    Complex,
}

/// Handle for a Hermitian matrix variable.
#[derive(Clone, Copy, Debug)]
pub struct HVar {
    pub start: usize,
    pub dim: usize,
    pub complex: bool,
}

impl HVar {
    pub fn num_scalars(&self) -> usize {
        let n = self.dim;
        if self.complex {
            n * n
        } else {
            n * (n + 1) / 2
        }
    }

    /// Scalar layout: diagonal entries first, then (re, [im]) for each
    /// off-diagonal i < j in row-major order.
    pub fn basis_matrix<T: Real>(&self, s: usize) -> CMatrix<T> {
        let n = self.dim;
        let mut m = CMatrix::zeros(n, n);
        if s < n {
            m[(s, s)] = Complex::new(T::one(), T::zero());
            return m;
        }
        let per = if self.complex { 2 } else { 1 };
        let k = (s - n) / per;
        let part = (s - n) % per;
        // k-th off-diagonal pair (i, j), i < j, row-major
        let (mut i, mut rem) = (0usize, k);
        loop {
            let row_len = n - 1 - i;
            if rem < row_len {
                break;
            }
            rem -= row_len;
            i += 1;
        }
        let j = i + 1 + rem;
        if part == 0 {
            m[(i, j)] = Complex::new(T::one(), T::zero());
            m[(j, i)] = Complex::new(T::one(), T::zero());
        } else {
            m[(i, j)] = Complex::new(T::zero(), T::one());
            m[(j, i)] = Complex::new(T::zero(), -T::one());
        }
        m
    }

    /// Reconstruct the matrix value from a solution vector.
    pub fn value<T: Real>(&self, x: &[T]) -> CMatrix<T> {
        let n = self.dim;
        let mut m = CMatrix::zeros(n, n);
        let mut s = self.start;
        for i in 0..n {
            m[(i, i)] = Complex::new(x[s], T::zero());
            s += 1;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let re = x[s];
                s += 1;
                let im = if self.complex {
                    let v = x[s];
                    s += 1;
                    v
                } else {
                    T::zero()
                };
                m[(i, j)] = Complex::new(re, im);
                m[(j, i)] = Complex::new(re, -im);
            }
        }
        m
    }
}

struct CBlock<T> {
    dim: usize,
    d: CMatrix<T>,
    terms: BTreeMap<usize, CMatrix<T>>,
}

/// Builder for min c^T x s.t. complex Hermitian LMI blocks PSD.
pub struct LmiBuilder<T> {
    pub mode: Mode,
    nvars: usize,
    objective: Vec<(usize, T)>,
    blocks: Vec<CBlock<T>>,
}

impl<T: Real> LmiBuilder<T> {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            nvars: 0,
            objective: Vec::new(),
            blocks: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.nvars
    }

    /// Total realified row count across blocks (size-budget metric).
    pub fn realified_rows(&self) -> usize {
        let f = if self.mode == Mode::Complex { 2 } else { 1 };
        self.blocks.iter().map(|b| f * b.dim).sum()
    }

    pub fn hermitian_var(&mut self, dim: usize) -> HVar {
        let v = HVar {
            start: self.nvars,
            dim,
            complex: self.mode == Mode::Complex,
        };
        self.nvars += v.num_scalars();
        v
    }

    pub fn scalar_var(&mut self) -> usize {
        let i = self.nvars;
        self.nvars += 1;
        i
    }

    pub fn add_block(&mut self, dim: usize) -> usize {
        self.blocks.push(CBlock {
            dim,
            d: CMatrix::zeros(dim, dim),
            terms: BTreeMap::new(),
        });
        self.blocks.len() - 1
    }

    /// Add constant M at sub-position (r0, c0); off-diagonal placements
    /// mirror the adjoint automatically.
    pub fn set_const(&mut self, block: usize, r0: usize, c0: usize, m: &CMatrix<T>) {
        let b = &mut self.blocks[block];
        for i in 0..m.rows {
            for j in 0..m.cols {
                b.d[(r0 + i, c0 + j)] = b.d[(r0 + i, c0 + j)] + m[(i, j)];
                if r0 != c0 {
                    b.d[(c0 + j, r0 + i)] = b.d[(c0 + j, r0 + i)] + m[(i, j)].conj();
                }
            }
        }
    }

    fn term_entry(&mut self, block: usize, var: usize) -> &mut CMatrix<T> {
        let dim = self.blocks[block].dim;
        self.blocks[block]
            .terms
            .entry(var)
            .or_insert_with(|| CMatrix::zeros(dim, dim))
    }

    /// Place coeff * H at sub-position (r0, c0) (adjoint mirrored when
    /// off-diagonal).
    pub fn add_matrix_term(&mut self, block: usize, r0: usize, c0: usize, var: &HVar, coeff: T) {
        for s in 0..var.num_scalars() {
            let basis: CMatrix<T> = var.basis_matrix(s);
            let e = self.term_entry(block, var.start + s);
            for i in 0..basis.rows {
                for j in 0..basis.cols {
                    let v = basis[(i, j)].scale(coeff);
                    if v.re == T::zero() && v.im == T::zero() {
                        continue;
                    }
                    e[(r0 + i, c0 + j)] = e[(r0 + i, c0 + j)] + v;
                    if r0 != c0 {
                        e[(c0 + j, r0 + i)] = e[(c0 + j, r0 + i)] + v.conj();
                    }
                }
            }
        }
    }

    /// Add f(H) over the whole block for a linear map f taking n x n
    /// Hermitian input to block-sized Hermitian output; f is evaluated
    /// on each basis matrix of the variable.
    pub fn add_mapped_term(
        &mut self,
        block: usize,
        var: &HVar,
        f: impl Fn(&CMatrix<T>) -> CMatrix<T>,
    ) {
        for s in 0..var.num_scalars() {
            let img = f(&var.basis_matrix(s));
            let e = self.term_entry(block, var.start + s);
            debug_assert_eq!(img.rows, e.rows);
            for k in 0..img.data.len() {
                e.data[k] = e.data[k] + img.data[k];
            }
        }
    }

    /// Add coeff * M for a scalar variable over the whole block.
    pub fn add_scalar_term(&mut self, block: usize, var: usize, m: &CMatrix<T>) {
        let e = self.term_entry(block, var);
        for k in 0..m.data.len() {
            e.data[k] = e.data[k] + m.data[k];
        }
    }

    pub fn add_objective(&mut self, var: usize, coeff: T) {
        self.objective.push((var, coeff));
    }

    /// Add coeff * tr(H) to the objective.
    pub fn trace_objective(&mut self, var: &HVar, coeff: T) {
        for i in 0..var.dim {
            self.objective.push((var.start + i, coeff));
        }
    }

    /// Add Re tr(W H) to the objective for a Hermitian weight W.
    pub fn weighted_trace_objective(&mut self, var: &HVar, w: &CMatrix<T>) {
        for s in 0..var.num_scalars() {
            let coeff = super::re_inner(&var.basis_matrix(s), w);
            if coeff != T::zero() {
                self.objective.push((var.start + s, coeff));
            }
        }
    }

    fn realify_entries(m: &CMatrix<T>, complex: bool) -> Vec<(usize, usize, T)> {
        let n = m.rows;
        let mut out = Vec::new();
        if !complex {
            for i in 0..n {
                for j in i..n {
                    let v = m[(i, j)].re;
                    if v != T::zero() {
                        out.push((i, j, v));
                    }
                }
            }
            return out;
        }
        for i in 0..n {
            for j in i..n {
                let v = m[(i, j)].re;
                if v != T::zero() {
                    out.push((i, j, v));
                    out.push((i + n, j + n, v));
                }
            }
        }
        // -Q at (i, j+n) for every (i, j); Q antisymmetric so each pair
        // produces two independent upper-triangle entries.
        for i in 0..n {
            for j in 0..n {
                let q = m[(i, j)].im;
                if q != T::zero() {
                    out.push((i, j + n, -q));
                }
            }
        }
        out
    }

    pub fn build(&self) -> RealLmi<T> {
        let complex = self.mode == Mode::Complex;
        let mut c = vec![T::zero(); self.nvars];
        for &(i, v) in &self.objective {
            c[i] += v;
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let rdim = if complex { 2 * b.dim } else { b.dim };
                let mut d = RMatrix::zeros(rdim, rdim);
                for (i, j, v) in Self::realify_entries(&b.d, complex) {
                    d[(i, j)] += v;
                    if i != j {
                        d[(j, i)] += v;
                    }
                }
                let terms = b
                    .terms
                    .iter()
                    .filter_map(|(&var, e)| {
                        let entries = Self::realify_entries(e, complex);
                        if entries.is_empty() {
                            None
                        } else {
                            Some((var, SparseSym { dim: rdim, entries }))
                        }
                    })
                    .collect();
                RealBlock { dim: rdim, d, terms }
            })
            .collect();
        RealLmi {
            nvars: self.nvars,
            c,
            blocks,
        }
    }

    pub fn solve(&self, opts: SolveOpts<T>) -> LmiSolution<T> {
        solve_lmi(&self.build(), opts)
    }

    /// Recover the complex dual block for constraint `block` from a
    /// solution; pairings satisfy Re<E_i, X> summed over blocks = c_i.
    pub fn dual_block(&self, sol: &LmiSolution<T>, block: usize) -> CMatrix<T> {
        let w = &sol.w[block];
        let n = self.blocks[block].dim;
        if self.mode == Mode::Real {
            return CMatrix::from_fn(n, n, |i, j| Complex::new(w.at(i, j), T::zero()));
        }
        CMatrix::from_fn(n, n, |i, j| {
            Complex::new(
                w.at(i, j) + w.at(i + n, j + n),
                w.at(i + n, j) - w.at(i, j + n),
            )
        })
    }

    /// Sparse text dump (one pairing per line) for cross-checks against
    /// external solvers. Lines:
    ///   var <idx> obj <coeff>
    ///   block <idx> dim <n>
    ///   const <block> <i> <j> <re> <im>
    ///   term <block> <var> <i> <j> <re> <im>
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let mut c = vec![T::zero(); self.nvars];
        for &(i, v) in &self.objective {
            c[i] += v;
        }
        for (i, v) in c.iter().enumerate() {
            if *v != T::zero() {
                writeln!(s, "var {} obj {:e}", i, v).unwrap();
            }
        }
        for (bi, b) in self.blocks.iter().enumerate() {
            writeln!(s, "block {} dim {}", bi, b.dim).unwrap();
            for i in 0..b.dim {
                for j in i..b.dim {
                    let z = b.d[(i, j)];
                    if z.re != T::zero() || z.im != T::zero() {
                        writeln!(s, "const {} {} {} {:e} {:e}", bi, i, j, z.re, z.im).unwrap();
                    }
                }
            }
            for (&var, e) in &b.terms {
                for i in 0..b.dim {
                    for j in i..b.dim {
                        let z = e[(i, j)];
                        if z.re != T::zero() || z.im != T::zero() {
                            writeln!(s, "term {} {} {} {} {:e} {:e}", bi, var, i, j, z.re, z.im)
                                .unwrap();
                        }
                    }
                }
            }
        }
        s
    }
}

/// True when every entry of the given matrices has negligible imaginary
/// part; callers use it to pick [`Mode::Real`].
pub fn all_real<T: Real>(mats: &[&CMatrix<T>]) -> bool {
    let tol = T::of(1e-14);
    mats.iter().all(|m| {
        m.data.iter().all(|z| z.im.abs() <= tol)
    })
}
