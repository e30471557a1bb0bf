//! Noise-free cost model: optimal shot allocation, partition cost, relative sampling
//! complexity and its eigenstate lower bounds, Chebyshev shot counts, and the
//! perturbative Ising estimates used as reference values.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Model;
use crate::partition::{make_cut_pair, PartitionKind, Partitioning};
use crate::spectral::{correlation, moment_stats, EigenSolution, StateVector};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Allocation {
    pub budgets: Vec<u64>,
    pub total: u64,
    /// `Σ_b Var_b / M_b`
    pub achieved_cost: f64,
}

pub fn allocation_cost(variances: &[f64], budgets: &[u64]) -> f64 {
    variances
        .iter()
        .zip(budgets)
        .filter(|(v, _)| **v > 0.0)
        .map(|(v, &m)| if m == 0 { f64::INFINITY } else { v / m as f64 })
        .sum()
}

/// Shots per part proportional to the standard deviation, rounded by largest remainder
/// and then polished to the integer optimum. Parts with zero variance get a single shot.
pub fn optimal_allocation(variances: &[f64], m: u64) -> Result<Allocation> {
    if variances.is_empty() {
        return Err(Error::InvalidArgument("no parts to allocate shots to".into()));
    }
    if let Some(v) = variances.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidArgument(format!("variance {v} is not a finite nonnegative number")));
    }
    let k = variances.len() as u64;
    if m < k {
        return Err(Error::InvalidArgument(format!("{m} shots cannot cover {k} parts")));
    }
    let positive: Vec<usize> = (0..variances.len()).filter(|&i| variances[i] > 0.0).collect();
    let mut budgets = vec![0u64; variances.len()];
    for (i, b) in budgets.iter_mut().enumerate() {
        if variances[i] == 0.0 {
            *b = 1;
        }
    }
    let rest = m - (variances.len() - positive.len()) as u64;
    if positive.is_empty() {
        budgets[0] += rest;
    } else {
        let sd: Vec<f64> = positive.iter().map(|&i| variances[i].sqrt()).collect();
        let total_sd: f64 = sd.iter().sum();
        let target: Vec<f64> = sd.iter().map(|s| rest as f64 * s / total_sd).collect();
        let mut assigned = 0u64;
        for (&i, t) in positive.iter().zip(&target) {
            budgets[i] = t.floor() as u64;
            assigned += budgets[i];
        }
        let mut order: Vec<usize> = (0..positive.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = target[a] - target[a].floor();
            let fb = target[b] - target[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &o in order.iter().cycle().take((rest - assigned) as usize) {
            budgets[positive[o]] += 1;
        }
        // every measured part needs at least one shot
        for &i in &positive {
            if budgets[i] == 0 {
                let donor = (0..budgets.len()).max_by_key(|&j| (budgets[j], std::cmp::Reverse(j))).unwrap();
                budgets[donor] -= 1;
                budgets[i] = 1;
            }
        }
        polish(variances, &positive, &mut budgets);
    }
    Ok(Allocation {
        achieved_cost: allocation_cost(variances, &budgets),
        budgets,
        total: m,
    })
}

/// Single-shot exchanges between parts until none lowers the cost. The cost is separable
/// and convex in each budget, so the result is the integer optimum.
fn polish(variances: &[f64], positive: &[usize], budgets: &mut [u64]) {
    loop {
        let gain = |i: usize| variances[i] / (budgets[i] * (budgets[i] + 1)) as f64;
        let loss = |i: usize| variances[i] / (budgets[i] * (budgets[i] - 1)) as f64;
        let Some(&to) = positive.iter().max_by(|&&a, &&b| gain(a).total_cmp(&gain(b)).then(b.cmp(&a))) else {
            return;
        };
        let from = positive
            .iter()
            .copied()
            .filter(|&j| j != to && budgets[j] >= 2)
            .min_by(|&a, &b| loss(a).total_cmp(&loss(b)).then(a.cmp(&b)));
        match from {
            Some(j) if gain(to) > loss(j) * (1.0 + 1e-12) => {
                budgets[j] -= 1;
                budgets[to] += 1;
            }
            _ => return,
        }
    }
}

/// `(Σ_b √Var_b)²`, the shot-count-independent cost of a partitioning.
pub fn cost_from_variances(variances: &[f64]) -> f64 {
    let s: f64 = variances.iter().map(|v| v.max(0.0).sqrt()).sum();
    s * s
}

pub fn partition_cost(parts: &Partitioning, psi: &StateVector) -> Result<f64> {
    let stats = moment_stats(parts, psi)?;
    Ok(cost_from_variances(&stats.iter().map(|s| s.variance).collect::<Vec<_>>()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypotheses {
    Met,
    Degenerate,
    NotTranslationInvariant,
    /// No eigenstate or no geometric comparison, so no bound applies.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImprovementReport {
    pub g: f64,
    pub cost_numerator: f64,
    pub cost_denominator: f64,
    pub bound: Option<f64>,
    /// Strengthened strip bound `4L(1+CoR)/(1-CoR)`, only derived for `L ≥ 2`.
    pub bound_appendix: Option<f64>,
    pub cor_cut: Option<f64>,
    pub hypotheses: Hypotheses,
    /// Set when the denominator cost vanishes or the correlation reaches one.
    pub diverging: bool,
}

fn ratio(num: f64, den: f64) -> Result<(f64, bool)> {
    let tiny = 1e-14 * num.abs().max(1.0);
    if den > tiny {
        Ok((num / den, false))
    } else if num > tiny {
        Ok((f64::INFINITY, true))
    } else {
        Err(Error::Undefined("both partitionings have zero cost".into()))
    }
}

/// `G = cost(B1) / cost(B2)` on `ψ`.
pub fn relative_complexity(b1: &Partitioning, b2: &Partitioning, psi: &StateVector) -> Result<ImprovementReport> {
    crate::error::check_dims(b1.n_qubits(), b2.n_qubits())?;
    let num = partition_cost(b1, psi)?;
    let den = partition_cost(b2, psi)?;
    let (g, diverging) = ratio(num, den)?;
    Ok(ImprovementReport {
        g,
        cost_numerator: num,
        cost_denominator: den,
        bound: None,
        bound_appendix: None,
        cor_cut: None,
        hypotheses: Hypotheses::NotApplicable,
        diverging,
    })
}

/// [`relative_complexity`] on the ground state of `model`, with the eigenstate lower bound
/// attached when `b1` is the Pauli baseline and `b2` a geometric partitioning.
pub fn eigenstate_improvement(
    model: &Model,
    b1: &Partitioning,
    b2: &Partitioning,
    sol: &EigenSolution,
) -> Result<ImprovementReport> {
    let psi = sol.ground();
    let mut report = relative_complexity(b1, b2, psi)?;
    if b1.kind() != PartitionKind::PauliBaseline || !b2.kind().is_geometric() {
        return Ok(report);
    }
    report.hypotheses = if !model.lattice.periodic() {
        Hypotheses::NotTranslationInvariant
    } else if sol.degenerate {
        Hypotheses::Degenerate
    } else {
        Hypotheses::Met
    };
    let kind = b2.kind();
    let cor = match kind {
        PartitionKind::TwoLocal => None,
        _ if b2.len() != 2 => return Ok(report),
        _ => {
            let cut = make_cut_pair(model, kind)?;
            match correlation(&cut.h_cut, &cut.h_cut_prime, psi) {
                Ok(c) => Some(c),
                Err(Error::Undefined(_)) => return Ok(report),
                Err(e) => return Err(e),
            }
        }
    };
    report.cor_cut = cor;
    let bound = theorem1_bound(kind, cor)?;
    report.diverging |= bound.is_infinite();
    report.bound = Some(bound);
    report.bound_appendix = appendix_bound(kind, cor);
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sandwich {
    /// `|B| Σ Var_b`
    pub upper: f64,
    /// `(Σ √Var_b)²`
    pub mid: f64,
    /// `Σ_k (2k - 1) Var_k` with variances sorted non-increasingly
    pub lower: f64,
}

pub fn variance_sandwich(variances: &[f64]) -> Sandwich {
    let mut v: Vec<f64> = variances.iter().map(|x| x.max(0.0)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Sandwich {
        upper: v.len() as f64 * v.iter().sum::<f64>(),
        mid: cost_from_variances(&v),
        lower: v.iter().enumerate().map(|(k, x)| (2 * k + 1) as f64 * x).sum(),
    }
}

/// Effective strip length entering the eigenstate bound.
pub fn bound_length(kind: PartitionKind) -> Option<f64> {
    match kind {
        PartitionKind::Geo1d { l } => Some(l as f64),
        PartitionKind::Geo2d { lx, ly } => Some((lx * ly) as f64 / (lx + ly) as f64),
        _ => None,
    }
}

/// Eigenstate lower bound on `G(Pauli, kind)`: `4L/(1-CoR)`, `4(LxLy/(Lx+Ly))/(1-CoR)` or
/// `4/3`. A correlation of one gives `+∞`.
pub fn theorem1_bound(kind: PartitionKind, cor_cut: Option<f64>) -> Result<f64> {
    if kind == PartitionKind::TwoLocal {
        return Ok(4.0 / 3.0);
    }
    let len = bound_length(kind).ok_or_else(|| Error::InvalidArgument(format!("no eigenstate bound for {kind}")))?;
    let cor = cor_cut.ok_or_else(|| Error::InvalidArgument(format!("{kind} bound needs CoR(H_cut, H_cut')")))?;
    if !(-1.0..=1.0).contains(&cor) {
        return Err(Error::InvalidArgument(format!("correlation {cor} outside [-1, 1]")));
    }
    if cor >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(4.0 * len / (1.0 - cor))
}

pub fn appendix_bound(kind: PartitionKind, cor_cut: Option<f64>) -> Option<f64> {
    match (kind, cor_cut) {
        (PartitionKind::Geo1d { l }, Some(c)) if l >= 2 => Some(if c >= 1.0 {
            f64::INFINITY
        } else {
            4.0 * l as f64 * (1.0 + c) / (1.0 - c)
        }),
        _ => None,
    }
}

/// Shots needed so that the mean misses by more than `eps` with probability at most
/// `failure_prob`, by Chebyshev: `⌈Var / (ε² p)⌉`, at least one.
pub fn shots_for_confidence(variance: f64, eps: f64, failure_prob: f64) -> Result<u64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("precision {eps} must be positive")));
    }
    if !(failure_prob > 0.0 && failure_prob < 1.0) {
        return Err(Error::InvalidArgument(format!("failure probability {failure_prob} outside (0, 1)")));
    }
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::InvalidArgument(format!("variance {variance} must be nonnegative")));
    }
    let m = variance / (eps * eps * failure_prob);
    // absorb rounding in the products so exact quotients do not round up
    let m = (m * (1.0 - 4.0 * f64::EPSILON)).ceil();
    Ok((m as u64).max(1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IsingRegime {
    /// `h ≫ J`, expansion parameter `λ = J/h`
    Disordered,
    /// `J ≫ h`, expansion parameter `λ = h/J`
    Ordered,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbativeEstimate {
    /// Leading-order value, when the leading term is a constant.
    pub value: Option<f64>,
    /// Growth law when the leading term diverges as `λ → 0`.
    pub scaling: Option<&'static str>,
    /// `λ` outside the range where the leading order is meaningful.
    pub out_of_range: bool,
}

/// Leading-order `G(Pauli, Geo1D(L))` for the Ising model on a ground state.
pub fn tfim_perturbative_g(regime: IsingRegime, l: usize, seam_shift: usize, lambda: f64) -> Result<PerturbativeEstimate> {
    if l == 0 || seam_shift == 0 {
        return Err(Error::InvalidArgument("strip length and seam shift must be positive".into()));
    }
    let out_of_range = !(lambda > 0.0 && lambda <= 0.1);
    let l = l as f64;
    let (value, scaling) = match regime {
        IsingRegime::Disordered => (Some(4.0 * l), None),
        IsingRegime::Ordered if l <= 2.0 => (None, Some("Θ(1/λ²)")),
        IsingRegime::Ordered if seam_shift == 1 => (Some(32.0 * l), None),
        IsingRegime::Ordered => (Some(16.0 * l), None),
    };
    Ok(PerturbativeEstimate {
        value,
        scaling,
        out_of_range,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force_min(v: &[f64], m: u64) -> f64 {
        fn rec(v: &[f64], left: u64, acc: f64, best: &mut f64) {
            if v.len() == 1 {
                if left > 0 {
                    *best = best.min(acc + v[0] / left as f64);
                }
                return;
            }
            for k in 1..left {
                rec(&v[1..], left - k, acc + v[0] / k as f64, best);
            }
        }
        let mut best = f64::INFINITY;
        rec(v, m, 0.0, &mut best);
        best
    }

    #[test]
    fn allocation_examples() {
        assert_eq!(optimal_allocation(&[4.0, 1.0], 30).unwrap().budgets, vec![20, 10]);
        assert_eq!(optimal_allocation(&[4.0, 4.0], 100).unwrap().budgets, vec![50, 50]);
        let a = optimal_allocation(&[9.0, 4.0, 1.0], 60).unwrap();
        assert!((a.achieved_cost - brute_force_min(&[9.0, 4.0, 1.0], 60)).abs() < 1e-12);
        let z = optimal_allocation(&[0.0, 2.0, 0.0], 10).unwrap();
        assert_eq!(z.budgets, vec![1, 8, 1]);
        assert!(optimal_allocation(&[1.0, 1.0, 1.0], 2).is_err());
    }

    #[test]
    fn lopsided_allocation_keeps_one_shot_per_part() {
        let a = optimal_allocation(&[1e6, 1e-8, 1e-8], 3).unwrap();
        assert_eq!(a.budgets, vec![1, 1, 1]);
        let a = optimal_allocation(&[1e6, 1e-8], 50).unwrap();
        assert_eq!(a.budgets.iter().sum::<u64>(), 50);
        assert!(a.budgets[1] >= 1);
    }

    proptest! {
        #[test]
        fn allocation_beats_random(v in prop::collection::vec(0.0f64..10.0, 1..6), m in 6u64..200, seed in 0u64..1000) {
            let a = optimal_allocation(&v, m).unwrap();
            prop_assert_eq!(a.budgets.iter().sum::<u64>(), m);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..200 {
                // random composition with at least one shot per part
                let mut b = vec![1u64; v.len()];
                for _ in 0..(m - v.len() as u64) {
                    b[rng.random_range(0..v.len())] += 1;
                }
                prop_assert!(a.achieved_cost <= allocation_cost(&v, &b) + 1e-12);
            }
        }

        #[test]
        fn sandwich_ordering(v in prop::collection::vec(0.0f64..10.0, 1..8)) {
            let s = variance_sandwich(&v);
            prop_assert!(s.upper + 1e-9 >= s.mid);
            prop_assert!(s.mid + 1e-9 >= s.lower);
        }
    }

    #[test]
    fn continuum_limit_of_allocation() {
        let v = [3.0, 0.5, 1.7];
        let a = optimal_allocation(&v, 1_000_000).unwrap();
        let c = cost_from_variances(&v);
        assert!((a.achieved_cost * 1e6 - c).abs() / c < 1e-3);
    }

    #[test]
    fn sandwich_examples() {
        let s = variance_sandwich(&[4.0, 1.0]);
        assert_eq!((s.upper, s.mid, s.lower), (10.0, 9.0, 7.0));
        let s = variance_sandwich(&[2.0; 3]);
        for v in [s.upper, s.mid, s.lower] {
            assert!((v - 18.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(theorem1_bound(PartitionKind::TwoLocal, None).unwrap(), 4.0 / 3.0);
        assert_eq!(theorem1_bound(PartitionKind::Geo1d { l: 2 }, Some(0.0)).unwrap(), 8.0);
        assert_eq!(theorem1_bound(PartitionKind::Geo2d { lx: 2, ly: 2 }, Some(0.5)).unwrap(), 8.0);
        assert!(theorem1_bound(PartitionKind::Geo1d { l: 1 }, Some(1.0)).unwrap().is_infinite());
        assert!(theorem1_bound(PartitionKind::Geo1d { l: 1 }, None).is_err());
        assert_eq!(appendix_bound(PartitionKind::Geo1d { l: 2 }, Some(0.5)), Some(24.0));
        assert_eq!(appendix_bound(PartitionKind::Geo1d { l: 1 }, Some(0.5)), None);
    }

    #[test]
    fn chebyshev_shots() {
        assert_eq!(shots_for_confidence(1.0, 0.1, 0.1).unwrap(), 1000);
        assert_eq!(shots_for_confidence(0.0, 0.1, 0.1).unwrap(), 1);
        assert_eq!(shots_for_confidence(1.0, 0.05, 0.1).unwrap(), 4000);
        assert!(shots_for_confidence(1.0, 0.0, 0.1).is_err());
        assert!(shots_for_confidence(1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn perturbative_table() {
        let d = tfim_perturbative_g(IsingRegime::Disordered, 2, 1, 0.01).unwrap();
        assert_eq!(d.value, Some(8.0));
        assert_eq!(tfim_perturbative_g(IsingRegime::Ordered, 4, 1, 0.01).unwrap().value, Some(128.0));
        assert_eq!(tfim_perturbative_g(IsingRegime::Ordered, 4, 2, 0.01).unwrap().value, Some(64.0));
        let o = tfim_perturbative_g(IsingRegime::Ordered, 2, 1, 0.01).unwrap();
        assert!(o.value.is_none() && o.scaling.is_some());
        assert!(tfim_perturbative_g(IsingRegime::Disordered, 2, 1, 0.5).unwrap().out_of_range);
    }
}
