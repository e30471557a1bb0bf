//! Lanczos iteration for the lowest eigenpair of a Hermitian Pauli sum, with optional
//! deflation against previously found eigenvectors.
//!
//! The stored-basis variant reorthogonalizes every new vector against the full Krylov
//! basis (twice). The two-pass variant keeps three vectors, rebuilding the Krylov
//! sequence in a second pass to form the Ritz vector; it is meant for systems where a
//! basis of dozens of full-size vectors does not fit in memory.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

use super::op::SparseOp;

const PAR_MIN: usize = 1 << 14;
const CHUNK: usize = 1 << 13;

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Target residual `‖Hx - θx‖` relative to `Σ|c|`.
    pub tol: f64,
    /// Residual (same units) still accepted once iterations are exhausted.
    pub accept_tol: f64,
    /// Maximum Krylov dimension per cycle; capped by memory for the stored-basis variant.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: 1e-13,
            accept_tol: 1e-8,
            krylov_dim: 500,
            max_restarts: 12,
            seed: 0x5eed,
        }
    }
}

pub(crate) fn pdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    if a.len() < PAR_MIN {
        return super::state::dot(a, b);
    }
    let parts: Vec<Complex64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| super::state::dot(x, y))
        .collect();
    parts.into_iter().fold(Complex64::new(0.0, 0.0), |acc, v| acc + v)
}

fn pnorm(a: &[Complex64]) -> f64 {
    pdot(a, a).re.max(0.0).sqrt()
}

/// `y -= alpha * x`
fn paxpy_neg(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    if y.len() < PAR_MIN {
        y.iter_mut().zip(x).for_each(|(yi, xi)| *yi -= alpha * xi);
    } else {
        y.par_chunks_mut(CHUNK)
            .zip(x.par_chunks(CHUNK))
            .for_each(|(yc, xc)| yc.iter_mut().zip(xc).for_each(|(yi, xi)| *yi -= alpha * xi));
    }
}

fn pscale(a: &mut [Complex64], s: f64) {
    if a.len() < PAR_MIN {
        a.iter_mut().for_each(|v| *v *= s);
    } else {
        a.par_chunks_mut(CHUNK).for_each(|c| c.iter_mut().for_each(|v| *v *= s));
    }
}

fn project_out(vecs: &[Vec<Complex64>], w: &mut [Complex64]) {
    for v in vecs {
        let c = pdot(v, w);
        paxpy_neg(c, v, w);
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(a, b)` below `mu`.
fn sturm_count(a: &[f64], b: &[f64], mu: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..a.len() {
        let off = if i == 0 { 0.0 } else { b[i - 1] * b[i - 1] };
        q = (a[i] - mu) - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (a[i].abs() + mu.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest eigenpair of a symmetric tridiagonal matrix by bisection plus inverse iteration.
pub(crate) fn tridiag_lowest(a: &[f64], b: &[f64]) -> (f64, Vec<f64>) {
    let m = a.len();
    if m == 1 {
        return (a[0], vec![1.0]);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i + 1 < m { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    let span = (hi - lo).abs().max(1e-300);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-16 * span {
            break;
        }
        if sturm_count(a, b, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    // inverse iteration on (T - theta) with a tiny shift below the eigenvalue
    let shift = theta - 1e-14 * span;
    let mut x = vec![1.0 / (m as f64).sqrt(); m];
    for _ in 0..4 {
        x = thomas_solve(a, b, shift, &x);
        let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(nrm > 0.0 && nrm.is_finite()) {
            break;
        }
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    // Rayleigh quotient is more accurate than the bisection midpoint
    let mut tx = vec![0.0; m];
    for i in 0..m {
        tx[i] = a[i] * x[i];
        if i > 0 {
            tx[i] += b[i - 1] * x[i - 1];
        }
        if i + 1 < m {
            tx[i] += b[i] * x[i + 1];
        }
    }
    let rq: f64 = x.iter().zip(&tx).map(|(u, v)| u * v).sum();
    (rq, x)
}

fn thomas_solve(a: &[f64], b: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let m = a.len();
    let tiny = 1e-300;
    let mut diag: Vec<f64> = a.iter().map(|v| v - shift).collect();
    let mut y = rhs.to_vec();
    for i in 1..m {
        if diag[i - 1].abs() < tiny {
            diag[i - 1] = tiny;
        }
        let f = b[i - 1] / diag[i - 1];
        diag[i] -= f * b[i - 1];
        y[i] -= f * y[i - 1];
    }
    if diag[m - 1].abs() < tiny {
        diag[m - 1] = tiny;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = y[m - 1] / diag[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = (y[i] - b[i] * x[i + 1]) / diag[i];
    }
    x
}

pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
}

fn residual_of(op: &SparseOp, x: &[Complex64], scratch: &mut [Complex64]) -> (f64, f64) {
    op.apply_into(x, scratch);
    let theta = pdot(x, scratch).re;
    let mut r2 = 0.0;
    for (hx, xi) in scratch.iter().zip(x) {
        r2 += (hx - xi * theta).norm_sqr();
    }
    (theta, r2.sqrt())
}

fn prepare_start(deflate: &[Vec<Complex64>], start: &mut [Complex64]) -> Result<()> {
    project_out(deflate, start);
    project_out(deflate, start);
    let nrm = pnorm(start);
    if !(nrm > 1e-12) {
        return Err(Error::Solver("start vector lies in the deflated subspace".into()));
    }
    pscale(start, 1.0 / nrm);
    Ok(())
}

/// Lowest eigenpair of `op` restricted to the orthogonal complement of `deflate`, with a
/// stored, fully reorthogonalized Krylov basis.
pub fn lowest_pair(
    op: &SparseOp,
    deflate: &[Vec<Complex64>],
    mut start: Vec<Complex64>,
    opts: &LanczosOptions,
) -> Result<EigenPair> {
    let d = start.len();
    let scale = op.scale().max(f64::MIN_POSITIVE);
    prepare_start(deflate, &mut start)?;
    let budget = ((1usize << 28) / (16 * d)).max(24);
    let kdim = opts.krylov_dim.min(budget).min(d.saturating_sub(deflate.len())).max(1);
    let mut best: Option<EigenPair> = None;
    let mut total_iters = 0;
    let mut x = start;
    let mut w = vec![Complex64::new(0.0, 0.0); d];
    for _cycle in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<Complex64>> = vec![x];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut s;
        loop {
            let j = basis.len() - 1;
            op.apply_into(&basis[j], &mut w);
            project_out(deflate, &mut w);
            let a = pdot(&basis[j], &w).re;
            paxpy_neg(Complex64::new(a, 0.0), &basis[j], &mut w);
            if j > 0 {
                paxpy_neg(Complex64::new(beta[j - 1], 0.0), &basis[j - 1], &mut w);
            }
            for _ in 0..2 {
                project_out(&basis, &mut w);
                project_out(deflate, &mut w);
            }
            alpha.push(a);
            total_iters += 1;
            let b = pnorm(&w);
            let (_, sv) = tridiag_lowest(&alpha, &beta);
            s = sv;
            let est = b * s.last().copied().unwrap_or(1.0).abs();
            if est <= 0.1 * opts.tol * scale || b <= 1e-14 * scale || basis.len() >= kdim {
                break;
            }
            beta.push(b);
            let mut next = w.clone();
            pscale(&mut next, 1.0 / b);
            basis.push(next);
        }
        let mut ritz = vec![Complex64::new(0.0, 0.0); d];
        for (coef, v) in s.iter().zip(&basis) {
            paxpy_neg(Complex64::new(-coef, 0.0), v, &mut ritz);
        }
        project_out(deflate, &mut ritz);
        let nrm = pnorm(&ritz);
        pscale(&mut ritz, 1.0 / nrm);
        let (theta, r) = residual_of(op, &ritz, &mut w);
        let done = r <= opts.tol * scale;
        let improved = best.as_ref().is_none_or(|b| r < b.residual);
        if improved {
            best = Some(EigenPair {
                value: theta,
                vector: ritz.clone(),
                residual: r,
                iterations: total_iters,
            });
        }
        if done {
            break;
        }
        x = ritz;
    }
    let best = best.expect("at least one cycle");
    if best.residual <= opts.accept_tol * scale {
        Ok(best)
    } else {
        Err(Error::Solver(format!(
            "Lanczos did not converge: residual {:.3e} after {} iterations (scale {:.3e})",
            best.residual, best.iterations, scale
        )))
    }
}

/// Same contract as [`lowest_pair`] but stores only three Krylov vectors.
pub fn lowest_pair_two_pass(
    op: &SparseOp,
    deflate: &[Vec<Complex64>],
    mut start: Vec<Complex64>,
    opts: &LanczosOptions,
) -> Result<EigenPair> {
    let d = start.len();
    let scale = op.scale().max(f64::MIN_POSITIVE);
    prepare_start(deflate, &mut start)?;
    let kdim = opts.krylov_dim.min(d).max(1);
    let mut best: Option<EigenPair> = None;
    let mut total_iters = 0;
    let mut x = start;
    let mut w = vec![Complex64::new(0.0, 0.0); d];

    // One recurrence step: from (prev, cur) produce the unnormalized next vector in `w`.
    let step = |prev: Option<&Vec<Complex64>>, cur: &Vec<Complex64>, beta_prev: f64, w: &mut Vec<Complex64>| -> f64 {
        op.apply_into(cur, w);
        project_out(deflate, w);
        let a = pdot(cur, w).re;
        paxpy_neg(Complex64::new(a, 0.0), cur, w);
        if let Some(p) = prev {
            paxpy_neg(Complex64::new(beta_prev, 0.0), p, w);
        }
        project_out(deflate, w);
        a
    };

    for _cycle in 0..=opts.max_restarts {
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut prev: Option<Vec<Complex64>> = None;
        let mut cur = x.clone();
        let mut s;
        loop {
            let bp = beta.last().copied().unwrap_or(0.0);
            let a = step(prev.as_ref(), &cur, bp, &mut w);
            alpha.push(a);
            total_iters += 1;
            let b = pnorm(&w);
            let (_, sv) = tridiag_lowest(&alpha, &beta);
            s = sv;
            let est = b * s.last().copied().unwrap_or(1.0).abs();
            if est <= 0.1 * opts.tol * scale || b <= 1e-14 * scale || alpha.len() >= kdim {
                break;
            }
            beta.push(b);
            let mut next = w.clone();
            pscale(&mut next, 1.0 / b);
            prev = Some(std::mem::replace(&mut cur, next));
        }
        // second pass: regenerate the sequence and accumulate the Ritz vector
        let mut ritz = vec![Complex64::new(0.0, 0.0); d];
        let mut prev: Option<Vec<Complex64>> = None;
        let mut cur = x.clone();
        for (j, coef) in s.iter().enumerate() {
            paxpy_neg(Complex64::new(-coef, 0.0), &cur, &mut ritz);
            if j + 1 == s.len() {
                break;
            }
            let bp = if j > 0 { beta[j - 1] } else { 0.0 };
            step(prev.as_ref(), &cur, bp, &mut w);
            let mut next = w.clone();
            pscale(&mut next, 1.0 / beta[j]);
            prev = Some(std::mem::replace(&mut cur, next));
        }
        project_out(deflate, &mut ritz);
        let nrm = pnorm(&ritz);
        pscale(&mut ritz, 1.0 / nrm);
        let (theta, r) = residual_of(op, &ritz, &mut w);
        let done = r <= opts.tol * scale;
        if best.as_ref().is_none_or(|b| r < b.residual) {
            best = Some(EigenPair {
                value: theta,
                vector: ritz.clone(),
                residual: r,
                iterations: total_iters,
            });
        }
        if done {
            break;
        }
        x = ritz;
    }
    let best = best.expect("at least one cycle");
    if best.residual <= opts.accept_tol * scale {
        Ok(best)
    } else {
        Err(Error::Solver(format!(
            "two-pass Lanczos did not converge: residual {:.3e} after {} iterations",
            best.residual, best.iterations
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_lowest_matches_dense() {
        let a = vec![2.0, -1.0, 0.5, 3.0, 1.0];
        let b = vec![0.7, 1.3, -0.4, 0.9];
        let (theta, s) = tridiag_lowest(&a, &b);
        let mut m = nalgebra::DMatrix::<f64>::zeros(5, 5);
        for i in 0..5 {
            m[(i, i)] = a[i];
            if i < 4 {
                m[(i, i + 1)] = b[i];
                m[(i + 1, i)] = b[i];
            }
        }
        let e = nalgebra::SymmetricEigen::new(m.clone());
        let min = e.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((theta - min).abs() < 1e-13);
        let v = nalgebra::DVector::from_vec(s);
        assert!((&m * &v - &v * theta).norm() < 1e-12);
    }

    #[test]
    fn sturm_counts() {
        let a = vec![1.0, 2.0, 3.0];
        let b = vec![0.0, 0.0];
        assert_eq!(sturm_count(&a, &b, 0.5), 0);
        assert_eq!(sturm_count(&a, &b, 2.5), 2);
        assert_eq!(sturm_count(&a, &b, 10.0), 3);
    }
}
