//! Expectations, variances, covariances and correlations of Pauli sums on a state.
//!
//! Quantities are quadratic forms on the vector as given; nothing is renormalized, so
//! for an unnormalized vector `variance` returns `<A²> - <A>²` literally.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_dims, Error, Result};
use crate::partition::Partitioning;
use crate::pauli::PauliSum;

use super::lanczos::pdot;
use super::op::SparseOp;
use super::state::StateVector;

pub const VARIANCE_CLAMP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentStats {
    pub label: String,
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub frob_sq_over_d: f64,
}

/// `A|ψ>` together with `<ψ|A|ψ>` (real part) and its imaginary residue.
fn applied(a: &PauliSum, psi: &StateVector) -> Result<(Vec<Complex64>, Complex64)> {
    check_dims(a.n_qubits(), psi.n_qubits())?;
    let op = SparseOp::new(a);
    let av = op.apply_vec(psi.amplitudes());
    let m = pdot(psi.amplitudes(), &av);
    let tol = 1e-10 * op.scale().max(1.0) * psi.norm_sq().max(1.0);
    if m.im.abs() > tol {
        return Err(Error::Undefined(format!(
            "expectation has imaginary part {:.3e}; operator is not Hermitian",
            m.im
        )));
    }
    Ok((av, m))
}

pub fn expectation(a: &PauliSum, psi: &StateVector) -> Result<f64> {
    Ok(applied(a, psi)?.1.re)
}

fn clamp_variance(v: f64, psi: &StateVector) -> Result<f64> {
    if !psi.is_normalized() {
        return Ok(v);
    }
    if v >= 0.0 {
        Ok(v)
    } else if v >= -VARIANCE_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::Solver(format!("negative variance {v:.3e} on a normalized state")))
    }
}

/// `<A²> - <A>²`, evaluated as `‖(A - m)ψ‖² + m²(1 - ‖ψ‖²)` which stays accurate when
/// `ψ` is close to an eigenvector of `A`.
pub fn variance(a: &PauliSum, psi: &StateVector) -> Result<f64> {
    let (av, m) = applied(a, psi)?;
    let m = m.re;
    let centered: f64 = av
        .iter()
        .zip(psi.amplitudes())
        .map(|(x, p)| (x - p * m).norm_sqr())
        .sum();
    clamp_variance(centered + m * m * (1.0 - psi.norm_sq()), psi)
}

/// Symmetrized covariance `½<{A,B}> - <A><B>`.
pub fn covariance_sym(a: &PauliSum, b: &PauliSum, psi: &StateVector) -> Result<f64> {
    let (av, ma) = applied(a, psi)?;
    let (bv, mb) = applied(b, psi)?;
    let (ma, mb) = (ma.re, mb.re);
    let centered: f64 = av
        .iter()
        .zip(&bv)
        .zip(psi.amplitudes())
        .map(|((x, y), p)| ((x - p * ma).conj() * (y - p * mb)).re)
        .sum();
    Ok(centered + ma * mb * (1.0 - psi.norm_sq()))
}

/// `<[A, B]>`, which is purely imaginary for Hermitian `A`, `B`; returns its imaginary part.
pub fn commutator_expectation(a: &PauliSum, b: &PauliSum, psi: &StateVector) -> Result<f64> {
    let (av, _) = applied(a, psi)?;
    let (bv, _) = applied(b, psi)?;
    Ok(2.0 * pdot(&av, &bv).im)
}

/// Pearson correlation `CoV(A,B)/sqrt(Var A Var B)`, clamped to `[-1, 1]`.
pub fn correlation(a: &PauliSum, b: &PauliSum, psi: &StateVector) -> Result<f64> {
    let va = variance(a, psi)?;
    let vb = variance(b, psi)?;
    if va <= 1e-12 || vb <= 1e-12 {
        return Err(Error::Undefined(format!(
            "correlation with a zero-variance operand (Var = {va:.3e}, {vb:.3e})"
        )));
    }
    let r = covariance_sym(a, b, psi)? / (va * vb).sqrt();
    if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&r) {
        return Err(Error::Solver(format!("correlation {r} outside [-1, 1]")));
    }
    Ok(r.clamp(-1.0, 1.0))
}

pub fn part_stats(part: &PauliSum, psi: &StateVector, label: impl Into<String>) -> Result<MomentStats> {
    let (av, m) = applied(part, psi)?;
    let m = m.re;
    let second: f64 = av.iter().map(|x| x.norm_sqr()).sum();
    let centered: f64 = av
        .iter()
        .zip(psi.amplitudes())
        .map(|(x, p)| (x - p * m).norm_sqr())
        .sum();
    let variance = clamp_variance(centered + m * m * (1.0 - psi.norm_sq()), psi)?;
    Ok(MomentStats {
        label: label.into(),
        mean: m,
        second_moment: second,
        variance,
        frob_sq_over_d: part.frobenius_norm_sq_over_d(),
    })
}

/// One [`MomentStats`] per part, in partition order.
pub fn moment_stats(parts: &Partitioning, psi: &StateVector) -> Result<Vec<MomentStats>> {
    parts
        .parts()
        .iter()
        .enumerate()
        .map(|(i, p)| part_stats(p, psi, format!("{}[{i}]", parts.label())))
        .collect()
}
