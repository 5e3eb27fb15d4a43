//! Quantum objects and channel calculus: states, channels, Choi
//! matrices, partial trace/transpose, pinching, tensor powers, and the
//! named channel families used in the reproduction experiments.
//!
//! Choi ordering is fixed as X (input reference) tensor Y (output)
//! throughout; every program in this crate assumes it. The Choi matrix is
//! unnormalized: trace = dim_in for trace-preserving maps.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, HermitianOperator, DEFAULT_RANK_TOL};
use crate::scalar::Real;

/// Relative eigenvalue clustering tolerance for pinch / spec_count.
pub const DEFAULT_SPEC_TOL: f64 = 1e-9;

/// PSD operator with subsystem structure. Normalization is not enforced;
/// unnormalized first arguments stay meaningful for every divergence.
#[derive(Clone, Debug)]
pub struct QState<T> {
    pub op: HermitianOperator<T>,
    pub dims: Vec<usize>,
    pub trace_value: T,
}

impl<T: Real> QState<T> {
    pub fn new(op: HermitianOperator<T>, dims: Vec<usize>) -> Result<Self> {
        if dims.iter().product::<usize>() != op.dim {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dims {:?} do not multiply to {}",
                dims, op.dim
            )));
        }
        let norm = op.op_norm();
        let min = op.min_eig();
        if min < -T::of(1e-10) * norm {
            return Err(Error::NotPSD {
                min_eig: min.to_f64(),
            });
        }
        let trace_value = op.trace();
        Ok(Self {
            op,
            dims,
            trace_value,
        })
    }

    pub fn from_diag(d: &[T]) -> Self {
        let op = HermitianOperator::diag(d);
        let trace_value = op.trace();
        Self {
            op,
            dims: vec![d.len()],
            trace_value,
        }
    }

    /// Rank-1 projector |psi><psi| from an unnormalized vector.
    pub fn pure(psi: &[Complex<T>], dims: Vec<usize>) -> Result<Self> {
        let n = psi.len();
        let op = HermitianOperator::from_parts(CMatrix::from_fn(n, n, |i, j| {
            psi[i] * psi[j].conj()
        }));
        Self::new(op, dims)
    }
}

/// Completely positive map as Kraus list and/or Choi matrix.
#[derive(Clone, Debug)]
pub struct QChannel<T> {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Option<Vec<CMatrix<T>>>,
    pub choi: HermitianOperator<T>,
}

impl<T: Real> QChannel<T> {
    pub fn from_kraus(dim_in: usize, dim_out: usize, kraus: Vec<CMatrix<T>>) -> Result<Self> {
        let choi = choi_from_kraus(&kraus, dim_in, dim_out)?;
        Ok(Self {
            dim_in,
            dim_out,
            kraus: Some(kraus),
            choi,
        })
    }

    /// Channel supplied by Choi alone; complete positivity validated here.
    pub fn from_choi(dim_in: usize, dim_out: usize, choi: HermitianOperator<T>) -> Result<Self> {
        if choi.dim != dim_in * dim_out {
            return Err(Error::DimensionMismatch(format!(
                "Choi dim {} != dim_in*dim_out = {}",
                choi.dim,
                dim_in * dim_out
            )));
        }
        let min = choi.min_eig();
        if min < -T::of(1e-9) * (T::one() + choi.op_norm()) {
            return Err(Error::NotPSD {
                min_eig: min.to_f64(),
            });
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus: None,
            choi,
        })
    }

    pub fn is_trace_preserving(&self) -> bool {
        let marg = partial_trace(
            &self.choi,
            &[self.dim_in, self.dim_out],
            &[true, false],
        )
        .expect("choi dims consistent");
        let id = HermitianOperator::identity(self.dim_in);
        marg.sub(&id).op_norm() <= T::of(1e-9)
    }

    /// Apply the channel to an operator on the input space.
    pub fn apply(&self, w: &HermitianOperator<T>) -> HermitianOperator<T> {
        if let Some(kraus) = &self.kraus {
            let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
            for k in kraus {
                out = out.add(&k.conjugate_by(&w.mat));
            }
            HermitianOperator::from_parts(out)
        } else {
            // tr_X[(W^T x I_Y) J]
            let wt = w.mat.transpose();
            let big = wt.kron(&CMatrix::identity(self.dim_out)).matmul(&self.choi.mat);
            let h = HermitianOperator::from_parts(big.hermitian_part());
            partial_trace(&h, &[self.dim_in, self.dim_out], &[false, true])
                .expect("dims consistent")
        }
    }
}

/// Unnormalized Choi matrix J = sum_{x,x'} |x><x'| (x) K|x><x'|K^dagger
/// on X (x) Y ordering.
pub fn choi_from_kraus<T: Real>(
    kraus: &[CMatrix<T>],
    dim_in: usize,
    dim_out: usize,
) -> Result<HermitianOperator<T>> {
    for k in kraus {
        if k.rows != dim_out || k.cols != dim_in {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator is {}x{}, expected {}x{}",
                k.rows, k.cols, dim_out, dim_in
            )));
        }
    }
    let n = dim_in * dim_out;
    let mut j = CMatrix::zeros(n, n);
    for k in kraus {
        for x in 0..dim_in {
            for xp in 0..dim_in {
                for i in 0..dim_out {
                    for l in 0..dim_out {
                        let v = k[(i, x)] * k[(l, xp)].conj();
                        let r = x * dim_out + i;
                        let c = xp * dim_out + l;
                        j[(r, c)] = j[(r, c)] + v;
                    }
                }
            }
        }
    }
    Ok(HermitianOperator::from_parts(j))
}

fn decompose(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0usize; dims.len()];
    for k in (0..dims.len()).rev() {
        digits[k] = idx % dims[k];
        idx /= dims[k];
    }
    digits
}

fn compose(digits: &[usize], dims: &[usize]) -> usize {
    let mut idx = 0usize;
    for (d, &n) in digits.iter().zip(dims) {
        idx = idx * n + d;
    }
    idx
}

/// Trace out the subsystems with keep_mask = false.
pub fn partial_trace<T: Real>(
    h: &HermitianOperator<T>,
    dims: &[usize],
    keep_mask: &[bool],
) -> Result<HermitianOperator<T>> {
    if dims.iter().product::<usize>() != h.dim || dims.len() != keep_mask.len() {
        return Err(Error::DimensionMismatch(format!(
            "dims {:?} inconsistent with operator dim {}",
            dims, h.dim
        )));
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|&k| keep_mask[k]).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let out_dim = kept_dims.iter().product::<usize>().max(1);
    let mut out = CMatrix::zeros(out_dim, out_dim);
    for r in 0..h.dim {
        let rd = decompose(r, dims);
        for c in 0..h.dim {
            let cd = decompose(c, dims);
            if (0..dims.len()).any(|k| !keep_mask[k] && rd[k] != cd[k]) {
                continue;
            }
            let ro = compose(&kept.iter().map(|&k| rd[k]).collect::<Vec<_>>(), &kept_dims);
            let co = compose(&kept.iter().map(|&k| cd[k]).collect::<Vec<_>>(), &kept_dims);
            out[(ro, co)] = out[(ro, co)] + h.mat[(r, c)];
        }
    }
    Ok(HermitianOperator::from_parts(out))
}

/// Transpose the subsystems with transpose_mask = true.
pub fn partial_transpose<T: Real>(
    h: &HermitianOperator<T>,
    dims: &[usize],
    transpose_mask: &[bool],
) -> Result<HermitianOperator<T>> {
    if dims.iter().product::<usize>() != h.dim || dims.len() != transpose_mask.len() {
        return Err(Error::DimensionMismatch(format!(
            "dims {:?} inconsistent with operator dim {}",
            dims, h.dim
        )));
    }
    let mut out = CMatrix::zeros(h.dim, h.dim);
    for r in 0..h.dim {
        let rd = decompose(r, dims);
        for c in 0..h.dim {
            let cd = decompose(c, dims);
            let mut rn = rd.clone();
            let mut cn = cd.clone();
            for k in 0..dims.len() {
                if transpose_mask[k] {
                    rn[k] = cd[k];
                    cn[k] = rd[k];
                }
            }
            out[(compose(&rn, dims), compose(&cn, dims))] = h.mat[(r, c)];
        }
    }
    Ok(HermitianOperator::from_parts(out))
}

/// Eigenvalue clusters of sigma under relative grouping tolerance:
/// ascending eigenvalues are merged while consecutive gaps stay below
/// spec_tol * max |lambda|.
fn eigen_clusters<T: Real>(sigma: &HermitianOperator<T>, spec_tol: T) -> Vec<Vec<usize>> {
    let d = sigma.eig();
    let scale = d
        .values
        .iter()
        .map(|l| l.abs())
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    let gap = spec_tol * (T::one() + scale);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..d.values.len() {
        match clusters.last_mut() {
            Some(c) if (d.values[i] - d.values[*c.last().unwrap()]).abs() <= gap => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

/// Number of distinct eigenvalue clusters, |spec(sigma)|.
pub fn spec_count<T: Real>(sigma: &HermitianOperator<T>, spec_tol: T) -> usize {
    eigen_clusters(sigma, spec_tol).len()
}

/// Pinching by sigma: sum over eigenspaces of Pi W Pi.
pub fn pinch<T: Real>(
    w: &HermitianOperator<T>,
    sigma: &HermitianOperator<T>,
    spec_tol: T,
) -> HermitianOperator<T> {
    assert_eq!(w.dim, sigma.dim);
    let d = sigma.eig();
    let clusters = eigen_clusters(sigma, spec_tol);
    let mut out = CMatrix::zeros(w.dim, w.dim);
    for cl in clusters {
        let v = CMatrix::from_fn(w.dim, cl.len(), |i, j| d.vectors[(i, cl[j])]);
        let proj = v.matmul(&v.adjoint());
        out = out.add(&proj.conjugate_by(&w.mat));
    }
    HermitianOperator::from_parts(out)
}

/// Amplitude damping channel with Kraus
/// {|0><0| + sqrt(1-gamma)|1><1|, sqrt(gamma)|0><1|}.
pub fn amplitude_damping<T: Real>(gamma: T) -> Result<QChannel<T>> {
    if gamma < T::zero() || gamma > T::one() {
        return Err(Error::OutOfRange(format!(
            "amplitude damping parameter {} outside [0,1]",
            gamma.to_f64()
        )));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut k0 = CMatrix::zeros(2, 2);
    k0[(0, 0)] = Complex::new(T::one(), T::zero());
    k0[(1, 1)] = Complex::new((T::one() - gamma).sqrt(), T::zero());
    let mut k1 = CMatrix::zeros(2, 2);
    k1[(0, 1)] = Complex::new(gamma.sqrt(), T::zero());
    let _ = zero;
    QChannel::from_kraus(2, 2, vec![k0, k1])
}

/// Qubit depolarizing channel W -> (1-p)W + p tr(W) I/2.
pub fn depolarizing<T: Real>(p: T) -> Result<QChannel<T>> {
    if p < T::zero() || p > T::one() {
        return Err(Error::OutOfRange(format!(
            "depolarizing parameter {} outside [0,1]",
            p.to_f64()
        )));
    }
    let z = T::zero();
    let o = T::one();
    let c = |re: T, im: T| Complex::new(re, im);
    let w0 = (o - T::of(0.75) * p).sqrt();
    let w = (T::of(0.25) * p).sqrt();
    let id = CMatrix::from_fn(2, 2, |i, j| if i == j { c(w0, z) } else { c(z, z) });
    let x = CMatrix::from_fn(2, 2, |i, j| if i != j { c(w, z) } else { c(z, z) });
    let y = CMatrix::from_fn(2, 2, |i, j| {
        if i == 0 && j == 1 {
            c(z, -w)
        } else if i == 1 && j == 0 {
            c(z, w)
        } else {
            c(z, z)
        }
    });
    let zm = CMatrix::from_fn(2, 2, |i, j| {
        if i == j {
            c(if i == 0 { w } else { -w }, z)
        } else {
            c(z, z)
        }
    });
    QChannel::from_kraus(2, 2, vec![id, x, y, zm])
}

/// Identity channel on dimension d.
pub fn identity_channel<T: Real>(d: usize) -> QChannel<T> {
    QChannel::from_kraus(d, d, vec![CMatrix::identity(d)]).expect("identity Kraus valid")
}

/// Linear-index permutation realizing a reordering of tensor factors:
/// position j of the new ordering holds old subsystem new_order[j].
/// Returns perm with perm[old_index] = new_index.
pub fn regroup_permutation(dims_old: &[usize], new_order: &[usize]) -> Vec<usize> {
    let total: usize = dims_old.iter().product();
    let dims_new: Vec<usize> = new_order.iter().map(|&k| dims_old[k]).collect();
    (0..total)
        .map(|idx| {
            let digits = decompose(idx, dims_old);
            let new_digits: Vec<usize> = new_order.iter().map(|&k| digits[k]).collect();
            compose(&new_digits, &dims_new)
        })
        .collect()
}

/// m-fold tensor power with X- and Y-systems regrouped to
/// (X^m) (x) (Y^m) ordering. size_budget caps the Choi dimension.
pub fn tensor_power<T: Real>(
    channel: &QChannel<T>,
    m: usize,
    size_budget: usize,
) -> Result<QChannel<T>> {
    if m < 1 {
        return Err(Error::OutOfRange("tensor power m must be >= 1".into()));
    }
    let dim = channel.choi.dim.pow(m as u32);
    if dim > size_budget {
        return Err(Error::SizeBudget {
            dim,
            budget: size_budget,
        });
    }
    if m == 1 {
        return Ok(channel.clone());
    }
    let mut kron = channel.choi.mat.clone();
    for _ in 1..m {
        kron = kron.kron(&channel.choi.mat);
    }
    // Old factor order: X_0 Y_0 X_1 Y_1 ... ; new: X_0..X_{m-1} Y_0..Y_{m-1}.
    let dims_old: Vec<usize> = (0..2 * m)
        .map(|k| {
            if k % 2 == 0 {
                channel.dim_in
            } else {
                channel.dim_out
            }
        })
        .collect();
    let mut new_order: Vec<usize> = (0..m).map(|t| 2 * t).collect();
    new_order.extend((0..m).map(|t| 2 * t + 1));
    let perm = regroup_permutation(&dims_old, &new_order);
    let choi = HermitianOperator::from_parts(kron.permute_symmetric(&perm));
    QChannel::from_choi(channel.dim_in.pow(m as u32), channel.dim_out.pow(m as u32), choi)
}

/// (omega^{1/2} (x) I_Y) J (omega^{1/2} (x) I_Y).
pub fn sandwich_choi<T: Real>(
    omega_x: &HermitianOperator<T>,
    j_xy: &HermitianOperator<T>,
    dim_y: usize,
) -> Result<HermitianOperator<T>> {
    if omega_x.dim * dim_y != j_xy.dim {
        return Err(Error::DimensionMismatch(format!(
            "omega dim {} * dim_y {} != Choi dim {}",
            omega_x.dim, dim_y, j_xy.dim
        )));
    }
    let root = omega_x.matrix_power(T::of(0.5), T::of(DEFAULT_RANK_TOL))?;
    let big = root.mat.kron(&CMatrix::identity(dim_y));
    Ok(HermitianOperator::from_parts(big.conjugate_by(&j_xy.mat)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    type H = HermitianOperator<f64>;

    fn random_herm(rng: &mut impl Rng, n: usize) -> H {
        H::from_parts(CMatrix::from_fn(n, n, |_, _| {
            Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        }))
    }

    fn random_psd(rng: &mut impl Rng, n: usize) -> H {
        let g = CMatrix::from_fn(n, n, |_, _| {
            Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        H::from_parts(g.matmul(&g.adjoint()))
    }

    #[test]
    fn identity_choi_is_phi() {
        let ch = identity_channel::<f64>(2);
        // Phi = sum |xx><x'x'|: rank 1, trace 2
        assert_eq!(ch.choi.dim, 4);
        assert!((ch.choi.trace() - 2.0).abs() < 1e-12);
        assert_eq!(ch.choi.support_rank(1e-9), 1);
        assert!((ch.choi.mat[(0, 3)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_damping_endpoints() {
        let id = amplitude_damping(0.0).unwrap();
        let phi = identity_channel::<f64>(2);
        assert!(id.choi.sub(&phi.choi).op_norm() < 1e-12);

        // gamma=1: J = diag-block (|0><0|, |0><0|)
        let full = amplitude_damping(1.0).unwrap();
        let mut expect = CMatrix::<f64>::zeros(4, 4);
        expect[(0, 0)] = Complex::new(1.0, 0.0);
        expect[(2, 2)] = Complex::new(1.0, 0.0);
        assert!(full.choi.mat.sub(&expect).max_abs() < 1e-12);
        assert!(amplitude_damping(1.5).is_err());
    }

    #[test]
    fn depolarizing_fully_mixing() {
        let ch = depolarizing(1.0).unwrap();
        // J = I_X (x) I_Y / 2
        let expect = H::identity(4).scale(0.5);
        assert!(ch.choi.sub(&expect).op_norm() < 1e-12);
        assert!(ch.is_trace_preserving());
    }

    #[test]
    fn choi_reconstruction_from_kraus() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let k: Vec<Matrix64> = (0..3)
                .map(|_| {
                    CMatrix::from_fn(3, 2, |_, _| {
                        Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                    })
                })
                .collect();
            let ch = QChannel::from_kraus(2, 3, k.clone()).unwrap();
            // reconstruct Choi as sum (I (x) K) Phi (I (x) K)^dagger
            let phi = identity_channel::<f64>(2).choi;
            let mut rebuilt = CMatrix::zeros(6, 6);
            for kk in &k {
                let lift = CMatrix::identity(2).kron(kk);
                rebuilt = rebuilt.add(&lift.conjugate_by(&phi.mat));
            }
            assert!(ch.choi.mat.sub(&rebuilt).max_abs() < 1e-9);
            assert!(ch.choi.min_eig() > -1e-10);
        }
    }
    type Matrix64 = CMatrix<f64>;

    #[test]
    fn partial_trace_choi_marginal() {
        let phi = identity_channel::<f64>(2).choi;
        let marg = partial_trace(&phi, &[2, 2], &[true, false]).unwrap();
        assert!(marg.sub(&H::identity(2)).op_norm() < 1e-12);
        // trace preserved overall
        let tr = partial_trace(&phi, &[2, 2], &[false, false]).unwrap();
        assert!((tr.mat[(0, 0)].re - phi.trace()).abs() < 1e-10);
    }

    #[test]
    fn partial_trace_product() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = random_herm(&mut rng, 3);
        let b = random_herm(&mut rng, 2);
        let ab = a.kron(&b);
        let got = partial_trace(&ab, &[3, 2], &[true, false]).unwrap();
        assert!(got.sub(&a.scale(b.trace())).op_norm() < 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let h = random_herm(&mut rng, 12);
        let got = partial_trace(&h, &[4, 3], &[true, false]).unwrap();
        // naive quadruple-loop oracle
        let mut oracle = CMatrix::<f64>::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                for y in 0..3 {
                    oracle[(i, j)] = oracle[(i, j)] + h.mat[(i * 3 + y, j * 3 + y)];
                }
            }
        }
        assert!(got.mat.sub(&oracle).max_abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_product_and_involution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let a = random_herm(&mut rng, 2);
        let b = random_herm(&mut rng, 3);
        let ab = a.kron(&b);
        let pt = partial_transpose(&ab, &[2, 3], &[false, true]).unwrap();
        let expect = H::from_parts(a.mat.kron(&b.mat.transpose()));
        assert!(pt.sub(&expect).op_norm() < 1e-12);
        let back = partial_transpose(&pt, &[2, 3], &[false, true]).unwrap();
        assert!(back.sub(&ab).op_norm() < 1e-14);
    }

    #[test]
    fn phi_partial_transpose_is_swap() {
        let phi = identity_channel::<f64>(2).choi;
        let pt = partial_transpose(&phi, &[2, 2], &[false, true]).unwrap();
        let mut ev = pt.eig().values;
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [-1.0, 1.0, 1.0, 1.0];
        for (g, e) in ev.iter().zip(expect) {
            assert!((g - e).abs() < 1e-10);
        }
    }

    #[test]
    fn pinch_identity_and_diagonal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let w = random_herm(&mut rng, 4);
        let same = pinch(&w, &H::identity(4), DEFAULT_SPEC_TOL);
        assert!(same.sub(&w).op_norm() < 1e-12);

        let sigma = H::diag(&[1.0, 2.0, 3.0, 4.0]);
        let diag = pinch(&w, &sigma, DEFAULT_SPEC_TOL);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(diag.mat[(i, j)].norm() < 1e-12);
                } else {
                    assert!((diag.mat[(i, i)].re - w.mat[(i, i)].re).abs() < 1e-12);
                }
            }
        }
        // commutes with sigma, idempotent
        let again = pinch(&diag, &sigma, DEFAULT_SPEC_TOL);
        assert!(again.sub(&diag).op_norm() < 1e-12);
    }

    #[test]
    fn pinching_inequality() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let w = random_psd(&mut rng, 4);
            let sigma = random_psd(&mut rng, 4);
            let count = spec_count(&sigma, DEFAULT_SPEC_TOL) as f64;
            let pw = pinch(&w, &sigma, DEFAULT_SPEC_TOL);
            let diff = pw.scale(count).sub(&w);
            assert!(diff.min_eig() > -1e-9 * (1.0 + w.op_norm()));
        }
    }

    #[test]
    fn pinch_is_cptp() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let sigma = random_psd(&mut rng, 3);
        // Choi of the pinching map via action on basis matrix units
        let mut choi = CMatrix::<f64>::zeros(9, 9);
        for x in 0..3 {
            for xp in 0..3 {
                let unit = CMatrix::from_fn(3, 3, |i, j| {
                    if i == x && j == xp {
                        Complex::new(1.0, 0.0)
                    } else {
                        Complex::new(0.0, 0.0)
                    }
                });
                let img = pinch(&H { dim: 3, mat: unit, herm_tol: 1e-12 }, &sigma, DEFAULT_SPEC_TOL);
                for i in 0..3 {
                    for j in 0..3 {
                        choi[(x * 3 + i, xp * 3 + j)] = img.mat[(i, j)];
                    }
                }
            }
        }
        let choi = H::from_parts(choi);
        assert!(choi.min_eig() > -1e-9);
        let marg = partial_trace(&choi, &[3, 3], &[true, false]).unwrap();
        assert!(marg.sub(&H::identity(3)).op_norm() < 1e-9);
    }

    #[test]
    fn spec_count_clustering() {
        assert_eq!(spec_count(&H::identity(4), DEFAULT_SPEC_TOL), 1);
        assert_eq!(spec_count(&H::diag(&[1.0, 2.0, 3.0]), DEFAULT_SPEC_TOL), 3);
        assert_eq!(
            spec_count(&H::diag(&[1.0, 1.0 + 1e-12, 5.0]), DEFAULT_SPEC_TOL),
            2
        );
    }

    #[test]
    fn tensor_power_regrouping_oracle() {
        let ch = amplitude_damping(0.3).unwrap();
        let sq = tensor_power(&ch, 2, 10_000).unwrap();
        let j = &ch.choi.mat;
        let kron = j.kron(j);
        // explicit index permutation oracle: (x0 y0 x1 y1) -> (x0 x1 y0 y1)
        let mut oracle = CMatrix::<f64>::zeros(16, 16);
        for r in 0..16 {
            let (x0, y0, x1, y1) = (r >> 3 & 1, r >> 2 & 1, r >> 1 & 1, r & 1);
            let rn = x0 << 3 | x1 << 2 | y0 << 1 | y1;
            for c in 0..16 {
                let (a0, b0, a1, b1) = (c >> 3 & 1, c >> 2 & 1, c >> 1 & 1, c & 1);
                let cn = a0 << 3 | a1 << 2 | b0 << 1 | b1;
                oracle[(rn, cn)] = kron[(r, c)];
            }
        }
        assert!(sq.choi.mat.sub(&oracle).max_abs() < 1e-12);
        // regrouping is isometric: spectra agree
        let ev_a = H::from_parts(kron).eig().values;
        let ev_b = sq.choi.eig().values;
        for (a, b) in ev_a.iter().zip(ev_b.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(matches!(
            tensor_power(&ch, 4, 100),
            Err(Error::SizeBudget { .. })
        ));
    }

    #[test]
    fn sandwich_choi_dimensions() {
        let ch = amplitude_damping(0.4).unwrap();
        let omega = H::diag(&[0.25, 0.75]);
        let s = sandwich_choi(&omega, &ch.choi, 2).unwrap();
        assert_eq!(s.dim, 4);
        // trace = tr[(omega (x) I) J]
        let lift = omega.kron(&H::identity(2));
        let expect = lift.mat.matmul(&ch.choi.mat).trace().re;
        assert!((s.trace() - expect).abs() < 1e-10);
    }
}
