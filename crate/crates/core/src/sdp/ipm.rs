//! Primal-dual Nesterov-Todd path-following solver on the real
//! linear-matrix-inequality form
//!
//!   minimize c^T x   subject to   S_j(x) = D_j + sum_i x_i E_{j,i} >= 0.
//!
//! The Lagrange dual is the trace-pairing standard form
//!
//!   maximize -sum_j <D_j, W_j>  subject to  sum_j <E_{j,i}, W_j> = c_i,
//!   W_j >= 0,
//!
//! so one solve yields both the x-witness and the dual blocks W used by
//! the standard-form front end. Infeasible start, Mehrotra predictor
//! step with a cubed centering heuristic, dense Cholesky on the Schur
//! complement, 0.98 fraction-to-boundary, static diagonal
//! regularization.

use super::rsym::{chol_solve, cholesky, eig_sym, sym_fn, tri_solve_left, RMatrix};
use crate::scalar::Real;

/// Sparse symmetric coefficient matrix: entries on the upper triangle
/// (i <= j), off-diagonal entries implicitly mirrored.
#[derive(Clone, Debug)]
pub struct SparseSym<T> {
    pub dim: usize,
    pub entries: Vec<(usize, usize, T)>,
}

impl<T: Real> SparseSym<T> {
    pub fn to_dense(&self) -> RMatrix<T> {
        let mut m = RMatrix::zeros(self.dim, self.dim);
        self.add_into(&mut m, T::one());
        m
    }

    pub fn add_into(&self, m: &mut RMatrix<T>, scale: T) {
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v * scale;
            if i != j {
                m[(j, i)] += v * scale;
            }
        }
    }

    /// <self, M> for symmetric dense M.
    pub fn inner(&self, m: &RMatrix<T>) -> T {
        let mut s = T::zero();
        for &(i, j, v) in &self.entries {
            let x = v * m.at(i, j);
            s += if i == j { x } else { x + x };
        }
        s
    }

    pub fn fro_norm(&self) -> T {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * v } else { v * v + v * v })
            .sum::<T>()
            .sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct RealBlock<T> {
    pub dim: usize,
    pub d: RMatrix<T>,
    pub terms: Vec<(usize, SparseSym<T>)>,
}

#[derive(Clone, Debug)]
pub struct RealLmi<T> {
    pub nvars: usize,
    pub c: Vec<T>,
    pub blocks: Vec<RealBlock<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOpts<T> {
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for SolveOpts<T> {
    fn default() -> Self {
        Self {
            tol: T::of(1e-8),
            max_iter: 200,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmiSolution<T> {
    pub status: SolveStatus,
    pub x: Vec<T>,
    pub w: Vec<RMatrix<T>>,
    pub s: Vec<RMatrix<T>>,
    pub pobj: T,
    pub dobj: T,
    pub primal_res: T,
    pub dual_res: T,
    pub gap: T,
    pub iterations: usize,
}

struct BlockWork<T> {
    g: RMatrix<T>,       // NT scaling, G S G = W
    s_inv: RMatrix<T>,   // S^{-1}
    r_p: RMatrix<T>,     // D + sum x E - S
}

fn affine_value<T: Real>(b: &RealBlock<T>, x: &[T]) -> RMatrix<T> {
    let mut m = b.d.clone();
    for (i, e) in &b.terms {
        e.add_into(&mut m, x[*i]);
    }
    m
}

/// Largest step alpha with S + alpha * dS >= 0, capped at `cap`.
fn max_step<T: Real>(s: &RMatrix<T>, ds: &RMatrix<T>, cap: T) -> T {
    let l = match cholesky(s) {
        Some(l) => l,
        None => return T::of(1e-14),
    };
    let a = tri_solve_left(&l, ds);
    let b = tri_solve_left(&l, &a.transpose());
    let (vals, _) = eig_sym(&b);
    let lam_min = vals[0];
    if lam_min >= T::zero() {
        cap
    } else {
        let a = -T::one() / lam_min;
        if a < cap {
            a
        } else {
            cap
        }
    }
}

pub fn solve_lmi<T: Real>(p: &RealLmi<T>, opts: SolveOpts<T>) -> LmiSolution<T> {
    let nv = p.nvars;
    let nb = p.blocks.len();
    let total_dim: usize = p.blocks.iter().map(|b| b.dim).sum();
    let tdim = T::of(total_dim.max(1) as f64);

    let c_norm = p.c.iter().map(|&v| v * v).sum::<T>().sqrt();
    let d_norm = p
        .blocks
        .iter()
        .map(|b| b.d.fro_norm())
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    let scale = {
        let mut s = T::one();
        if c_norm > s {
            s = c_norm;
        }
        if d_norm > s {
            s = d_norm;
        }
        s
    };

    let mut x = vec![T::zero(); nv];
    let mut s_blk: Vec<RMatrix<T>> = p
        .blocks
        .iter()
        .map(|b| {
            let mut m = RMatrix::zeros(b.dim, b.dim);
            for i in 0..b.dim {
                m[(i, i)] = scale;
            }
            m
        })
        .collect();
    let mut w_blk: Vec<RMatrix<T>> = s_blk.clone();

    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    let (mut rel_p, mut rel_d, mut rel_g) = (T::infinity(), T::infinity(), T::infinity());
    let mut pobj = T::zero();
    let mut dobj = T::zero();

    for iter in 0..opts.max_iter {
        iterations = iter;

        // Residuals.
        let mut work: Vec<BlockWork<T>> = Vec::with_capacity(nb);
        let mut max_rp = T::zero();
        for (j, b) in p.blocks.iter().enumerate() {
            let mut r_p = affine_value(b, &x);
            r_p.add_scaled(&s_blk[j], -T::one());
            let rel = r_p.fro_norm() / (T::one() + b.d.fro_norm());
            if rel > max_rp {
                max_rp = rel;
            }
            work.push(BlockWork {
                g: RMatrix::zeros(0, 0),
                s_inv: RMatrix::zeros(0, 0),
                r_p,
            });
        }
        let mut r_d = vec![T::zero(); nv];
        for (i, rd) in r_d.iter_mut().enumerate() {
            *rd = p.c[i];
        }
        for (j, b) in p.blocks.iter().enumerate() {
            for (i, e) in &b.terms {
                r_d[*i] -= e.inner(&w_blk[j]);
            }
        }
        let rd_norm = r_d.iter().map(|&v| v * v).sum::<T>().sqrt();

        pobj = p
            .c
            .iter()
            .zip(&x)
            .map(|(&ci, &xi)| ci * xi)
            .sum::<T>();
        dobj = -p
            .blocks
            .iter()
            .zip(&w_blk)
            .map(|(b, w)| b.d.inner(w))
            .sum::<T>();

        rel_p = max_rp;
        rel_d = rd_norm / (T::one() + c_norm);
        rel_g = (pobj - dobj).abs() / (T::one() + pobj.abs() + dobj.abs());

        let mu = s_blk
            .iter()
            .zip(&w_blk)
            .map(|(s, w)| s.inner(w))
            .sum::<T>()
            / tdim;

        if rel_p <= opts.tol && rel_d <= opts.tol && rel_g <= opts.tol {
            status = SolveStatus::Optimal;
            break;
        }

        // Certificate checks for pathological problems.
        if iter >= 5 {
            // LMI infeasibility: PSD W with <E_i, W> ~ 0 and <D, W> < 0.
            let wn: T = w_blk.iter().map(|w| w.fro_norm()).sum();
            if wn > T::zero() {
                let dval: T = p
                    .blocks
                    .iter()
                    .zip(&w_blk)
                    .map(|(b, w)| b.d.inner(w))
                    .sum::<T>()
                    / wn;
                let mut emax = T::zero();
                for i in 0..nv {
                    let v = (p.c[i] - r_d[i]).abs() / wn;
                    if v > emax {
                        emax = v;
                    }
                }
                if dval < -T::of(1e-6) && emax <= T::of(1e-8) {
                    status = SolveStatus::Infeasible;
                    break;
                }
            }
            // Unboundedness: direction d with c.d < 0 and sum d_i E_i >= 0.
            let xn = x.iter().map(|&v| v * v).sum::<T>().sqrt();
            if xn > T::of(1e5) * scale {
                let d: Vec<T> = x.iter().map(|&v| v / xn).collect();
                let cd: T = p.c.iter().zip(&d).map(|(&ci, &di)| ci * di).sum();
                if cd < -T::of(1e-6) {
                    let mut ok = true;
                    for b in &p.blocks {
                        let mut m = RMatrix::zeros(b.dim, b.dim);
                        for (i, e) in &b.terms {
                            e.add_into(&mut m, d[*i]);
                        }
                        let (vals, _) = eig_sym(&m);
                        if vals[0] < -T::of(1e-7) {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        status = SolveStatus::Unbounded;
                        break;
                    }
                }
            }
        }

        // NT scaling per block: G = S^{-1/2} (S^{1/2} W S^{1/2})^{1/2} S^{-1/2}.
        let mut scaling_ok = true;
        for (j, wk) in work.iter_mut().enumerate() {
            let (sv, su) = eig_sym(&s_blk[j]);
            if sv[0] <= T::zero() {
                scaling_ok = false;
                break;
            }
            let s_half = sym_fn(&sv, &su, |l| l.sqrt());
            let s_ihalf = sym_fn(&sv, &su, |l| T::one() / l.sqrt());
            wk.s_inv = sym_fn(&sv, &su, |l| T::one() / l);
            let mid = s_half.matmul(&w_blk[j]).matmul(&s_half);
            let (mv, mu_) = eig_sym(&mid);
            if mv[0] <= T::zero() {
                scaling_ok = false;
                break;
            }
            let mid_half = sym_fn(&mv, &mu_, |l| l.sqrt());
            let mut g = s_ihalf.matmul(&mid_half).matmul(&s_ihalf);
            g.symmetrize();
            wk.g = g;
        }
        if !scaling_ok {
            status = SolveStatus::NumericalFailure;
            break;
        }

        // Schur complement M_ik = sum_j <E_i, G E_k G>.
        let mut m_schur = RMatrix::<T>::zeros(nv, nv);
        for (j, b) in p.blocks.iter().enumerate() {
            let g = &work[j].g;
            let f_mats: Vec<RMatrix<T>> = b
                .terms
                .iter()
                .map(|(_, e)| {
                    // G E G via sparse expansion over entries of E.
                    let n = b.dim;
                    let mut f = RMatrix::zeros(n, n);
                    for &(a, bb, v) in &e.entries {
                        for r in 0..n {
                            let gra = g.at(r, a);
                            let grb = g.at(r, bb);
                            let row = r * n;
                            for cidx in 0..n {
                                let term = v * (gra * g.at(bb, cidx) + grb * g.at(a, cidx));
                                f.data[row + cidx] += if a == bb {
                                    v * gra * g.at(a, cidx)
                                } else {
                                    term
                                };
                            }
                        }
                    }
                    f
                })
                .collect();
            for (pi, (i, _)) in b.terms.iter().enumerate() {
                for (k, e_k) in &b.terms {
                    m_schur[(*i, *k)] += e_k.inner(&f_mats[pi]);
                }
            }
        }
        let mut reg = T::of(1e-10) * scale;
        let l_schur = loop {
            let mut m_try = m_schur.clone();
            for i in 0..nv {
                m_try[(i, i)] += reg;
            }
            match cholesky(&m_try) {
                Some(l) => break Some(l),
                None => {
                    reg = reg * T::of(100.0);
                    if reg > T::of(1e-2) * scale {
                        break None;
                    }
                }
            }
        };
        let l_schur = match l_schur {
            Some(l) => l,
            None => {
                status = SolveStatus::NumericalFailure;
                break;
            }
        };

        // Direction for a given centering sigma.
        let make_dir = |sigma_mu: T| -> (Vec<T>, Vec<RMatrix<T>>, Vec<RMatrix<T>>) {
            let mut h = vec![T::zero(); nv];
            for i in 0..nv {
                h[i] = -r_d[i];
            }
            for (j, b) in p.blocks.iter().enumerate() {
                let wk = &work[j];
                // R = sigma_mu S^{-1} - W - G r_p G
                let mut r = wk.s_inv.clone();
                r.scale_mut(sigma_mu);
                r.add_scaled(&w_blk[j], -T::one());
                let grg = wk.g.matmul(&wk.r_p).matmul(&wk.g);
                r.add_scaled(&grg, -T::one());
                for (i, e) in &b.terms {
                    h[*i] += e.inner(&r);
                }
            }
            let dx = chol_solve(&l_schur, &h);
            let mut ds = Vec::with_capacity(nb);
            let mut dw = Vec::with_capacity(nb);
            for (j, b) in p.blocks.iter().enumerate() {
                let wk = &work[j];
                let mut dsj = wk.r_p.clone();
                for (i, e) in &b.terms {
                    e.add_into(&mut dsj, dx[*i]);
                }
                let mut dwj = wk.s_inv.clone();
                dwj.scale_mut(sigma_mu);
                dwj.add_scaled(&w_blk[j], -T::one());
                let gdsg = wk.g.matmul(&dsj).matmul(&wk.g);
                dwj.add_scaled(&gdsg, -T::one());
                dwj.symmetrize();
                ds.push(dsj);
                dw.push(dwj);
            }
            (dx, ds, dw)
        };

        // Predictor.
        let (_dx_a, ds_a, dw_a) = make_dir(T::zero());
        let mut ap = T::one();
        let mut ad = T::one();
        for j in 0..nb {
            let a = max_step(&s_blk[j], &ds_a[j], T::one());
            if a < ap {
                ap = a;
            }
            let a = max_step(&w_blk[j], &dw_a[j], T::one());
            if a < ad {
                ad = a;
            }
        }
        let mut mu_aff = T::zero();
        for j in 0..nb {
            let mut s_new = s_blk[j].clone();
            s_new.add_scaled(&ds_a[j], ap);
            let mut w_new = w_blk[j].clone();
            w_new.add_scaled(&dw_a[j], ad);
            mu_aff += s_new.inner(&w_new);
        }
        mu_aff = mu_aff / tdim;
        let ratio = if mu > T::zero() { mu_aff / mu } else { T::zero() };
        let mut sigma = ratio * ratio * ratio;
        if sigma < T::of(1e-8) {
            sigma = T::of(1e-8);
        }
        if sigma > T::one() {
            sigma = T::one();
        }

        // Corrector / combined step.
        let (dx, ds, dw) = make_dir(sigma * mu);
        let frac = T::of(0.98);
        let mut ap = T::one();
        let mut ad = T::one();
        for j in 0..nb {
            let a = frac * max_step(&s_blk[j], &ds[j], T::one() / frac);
            if a < ap {
                ap = a;
            }
            let a = frac * max_step(&w_blk[j], &dw[j], T::one() / frac);
            if a < ad {
                ad = a;
            }
        }
        if ap < T::of(1e-12) && ad < T::of(1e-12) {
            status = SolveStatus::NumericalFailure;
            break;
        }

        for i in 0..nv {
            x[i] += ap * dx[i];
        }
        for j in 0..nb {
            s_blk[j].add_scaled(&ds[j], ap);
            w_blk[j].add_scaled(&dw[j], ad);
        }
    }

    LmiSolution {
        status,
        x,
        w: w_blk,
        s: s_blk,
        pobj,
        dobj,
        primal_res: rel_p,
        dual_res: rel_d,
        gap: rel_g,
        iterations: iterations + 1,
    }
}
