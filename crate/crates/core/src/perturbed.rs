//! Ensembles `√(1-ε)|ψ> + √ε|ξ>` with Haar-random `ξ`: closed-form expected variances,
//! ensemble sampling complexity, asymmetry bounds, noise regimes and ε thresholds.
//!
//! Every `MomentStats` consumed here is expected in the traceless convention, i.e.
//! computed on the part with its identity component removed ([`noise_stats`]).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::partition::Partitioning;
use crate::pauli::PauliSum;
use crate::spectral::{part_stats, pdot, MomentStats, SparseOp, StateVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Drop the `O(1/d)` terms of the closed form.
    #[serde(default)]
    pub truncate: bool,
    /// Project `ξ` orthogonal to `ψ` and renormalize it before mixing.
    #[serde(default)]
    pub orthogonalize: bool,
}

fn default_samples() -> usize {
    10_000
}

impl NoiseConfig {
    pub fn new(epsilon: f64, seed: u64, samples: usize) -> Result<Self> {
        let c = NoiseConfig {
            epsilon,
            seed,
            samples,
            truncate: false,
            orthogonalize: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("ε = {eps} outside [0, 1]")))
    }
}

/// Haar-random state from a dedicated ChaCha stream.
pub fn haar_sample(n_qubits: usize, seed: u64) -> Result<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    StateVector::random(n_qubits, &mut rng, format!("haar(seed={seed})"))
}

/// `√(1-ε)ψ + √ε ξ` without renormalization.
pub fn perturbed_state(psi: &StateVector, xi: &StateVector, eps: f64) -> Result<StateVector> {
    check_epsilon(eps)?;
    check_dims(psi.dim(), xi.dim())?;
    let (a, b) = ((1.0 - eps).sqrt(), eps.sqrt());
    let amps: Vec<_> = psi
        .amplitudes()
        .iter()
        .zip(xi.amplitudes())
        .map(|(p, x)| p * a + x * b)
        .collect();
    let norm_sq: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    StateVector::unnormalized(
        psi.n_qubits(),
        amps,
        format!("perturbed(eps={eps}, norm²={norm_sq:.12})"),
    )
}

/// `ξ` with its `ψ` component removed, renormalized.
pub fn orthogonalized(psi: &StateVector, xi: &StateVector) -> Result<StateVector> {
    let overlap = psi.inner(xi)?;
    let amps = psi
        .amplitudes()
        .iter()
        .zip(xi.amplitudes())
        .map(|(p, x)| x - p * overlap)
        .collect();
    StateVector::from_amplitudes(psi.n_qubits(), amps, "orthogonalized")
}

/// Moment statistics of each part with its identity component removed.
pub fn noise_stats(parts: &Partitioning, psi: &StateVector) -> Result<Vec<MomentStats>> {
    parts
        .parts()
        .iter()
        .enumerate()
        .map(|(i, p)| part_stats(&p.traceless_part(), psi, format!("{}[{i}]", parts.label())))
        .collect()
}

pub fn operator_noise_stats(op: &PauliSum, psi: &StateVector, label: &str) -> Result<MomentStats> {
    part_stats(&op.traceless_part(), psi, label)
}

/// `E[Var_ψ̃(O)]` over the Haar ensemble. The full form is
/// `(1-ε)Var + ε(1-ε)<O>² + ε‖O‖²_{F/d} - 2ε(1-ε)<O²>/d - ε²‖O‖²_{F/d}/(d+1)`;
/// `truncate` keeps the first three terms.
pub fn expected_variance(stats: &MomentStats, eps: f64, d: f64, truncate: bool) -> f64 {
    let f = stats.frob_sq_over_d;
    let head = (1.0 - eps) * stats.variance + eps * (1.0 - eps) * stats.mean * stats.mean + eps * f;
    if truncate {
        head
    } else {
        head - 2.0 * eps * (1.0 - eps) * stats.second_moment / d - eps * eps * f / (d + 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnsembleComplexity {
    pub g: f64,
    pub cost_numerator: f64,
    pub cost_denominator: f64,
    pub diverging: bool,
}

fn sqrt_sum(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x.max(0.0).sqrt()).sum()
}

/// `[Σ_b √E Var(H_b) / Σ_b' √E Var(H_b')]²` with the closed-form expected variances.
pub fn ensemble_complexity(
    b1: &[MomentStats],
    b2: &[MomentStats],
    eps: f64,
    d: f64,
    truncate: bool,
) -> Result<EnsembleComplexity> {
    check_epsilon(eps)?;
    let num = sqrt_sum(b1.iter().map(|s| expected_variance(s, eps, d, truncate)));
    let den = sqrt_sum(b2.iter().map(|s| expected_variance(s, eps, d, truncate)));
    complexity_from_roots(num, den)
}

fn complexity_from_roots(num: f64, den: f64) -> Result<EnsembleComplexity> {
    let tiny = 1e-300;
    let (g, diverging) = if den > tiny {
        ((num / den).powi(2), false)
    } else if num > tiny {
        (f64::INFINITY, true)
    } else {
        return Err(Error::Undefined("both ensemble costs vanish".into()));
    };
    Ok(EnsembleComplexity {
        g,
        cost_numerator: num * num,
        cost_denominator: den * den,
        diverging,
    })
}

/// State-independent ratio `(Σ_b ‖H_b‖_F / Σ_b' ‖H_b'‖_F)²` from Pauli coefficients.
pub fn frobenius_criterion(b1: &Partitioning, b2: &Partitioning) -> Result<f64> {
    check_dims(b1.n_qubits(), b2.n_qubits())?;
    let num = sqrt_sum(b1.parts().iter().map(|p| p.frobenius_norm_sq_over_d()));
    let den = sqrt_sum(b2.parts().iter().map(|p| p.frobenius_norm_sq_over_d()));
    if den <= 0.0 {
        return Err(Error::Undefined("denominator partitioning has zero Frobenius norm".into()));
    }
    Ok((num / den).powi(2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymmetryStats {
    /// `|<H⁽¹⁾>/E - ½|` for the first part.
    pub alpha: f64,
    /// `|‖H⁽¹⁾‖²_{F/d}/‖H‖²_{F/d} - ½|` for the first part.
    pub beta: f64,
    pub alpha_max: f64,
    pub beta_max: f64,
}

pub fn asymmetries(parts: &[MomentStats], h: &MomentStats) -> Result<AsymmetryStats> {
    if parts.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "asymmetries need exactly 2 parts, got {}",
            parts.len()
        )));
    }
    let e = h.mean;
    if e.abs() <= 1e-12 * h.frob_sq_over_d.sqrt().max(1.0) {
        return Err(Error::Undefined("energy asymmetry is undefined at zero energy".into()));
    }
    if h.frob_sq_over_d <= 0.0 {
        return Err(Error::Undefined("Pauli weight asymmetry needs a nonzero Hamiltonian".into()));
    }
    let a: Vec<f64> = parts.iter().map(|p| (p.mean / e - 0.5).abs()).collect();
    let b: Vec<f64> = parts
        .iter()
        .map(|p| (p.frob_sq_over_d / h.frob_sq_over_d - 0.5).abs())
        .collect();
    Ok(AsymmetryStats {
        alpha: a[0],
        beta: b[0],
        alpha_max: a[0].max(a[1]),
        beta_max: b[0].max(b[1]),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoisyBounds {
    pub lower: f64,
    pub upper: f64,
    pub g_pauli: f64,
    pub g_geo: f64,
}

/// `4(1-ε)Var(H⁽¹⁾) + ε(1+β)‖H‖²_{F/d} + ε(1-ε)(1+α²)E²` for a 2-part partitioning.
pub fn g_part(parts: &[MomentStats], h: &MomentStats, eps: f64) -> Result<f64> {
    let asym = asymmetries(parts, h)?;
    Ok(4.0 * (1.0 - eps) * parts[0].variance
        + eps * (1.0 + asym.beta) * h.frob_sq_over_d
        + eps * (1.0 - eps) * (1.0 + asym.alpha * asym.alpha) * h.mean * h.mean)
}

/// Lower and upper bounds on the ensemble complexity of a Pauli baseline against a
/// geometric 2-partitioning. The upper bound uses the largest Pauli part variance, which
/// is the first part for the 2-group baselines.
pub fn corollary3_bounds(pauli: &[MomentStats], geo: &[MomentStats], h: &MomentStats, eps: f64) -> Result<NoisyBounds> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("ε = {eps} must lie strictly inside (0, 1)")));
    }
    let k = pauli.len() as f64;
    let var_max = pauli.iter().map(|s| s.variance).fold(0.0, f64::max);
    let upper = k + k * k * var_max / (eps * h.mean * h.mean + eps / (1.0 - eps) * h.frob_sq_over_d);
    let g_pauli = g_part(&pauli[..2.min(pauli.len())], h, eps)?;
    let g_geo = g_part(geo, h, eps)?;
    Ok(NoisyBounds {
        lower: g_pauli / g_geo,
        upper,
        g_pauli,
        g_geo,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    I,
    II,
    III,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// `4 Var(H⁽¹⁾)/E²`
    pub low_boundary: f64,
    /// `1 - ‖H‖²_{F/d}/E²`
    pub high_boundary: f64,
    /// The two boundaries cross, which happens on very small systems.
    pub overlapping: bool,
}

pub fn regime_classify(eps: f64, part1: &MomentStats, h: &MomentStats) -> Result<RegimeReport> {
    check_epsilon(eps)?;
    let e2 = h.mean * h.mean;
    if e2 == 0.0 {
        return Err(Error::Undefined("noise regimes are undefined at zero energy".into()));
    }
    let low = 4.0 * part1.variance / e2;
    let high = 1.0 - h.frob_sq_over_d / e2;
    let regime = if eps <= low {
        Regime::I
    } else if eps >= high {
        Regime::III
    } else {
        Regime::II
    };
    Ok(RegimeReport {
        regime,
        low_boundary: low,
        high_boundary: high,
        overlapping: low >= high,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub delta: f64,
    pub alpha: f64,
    /// `4Var(H⁽¹⁾)/(E²(δ-α²))`; absent when `δ ≤ α²`.
    pub eps_threshold_closed: Option<f64>,
    /// Root of `Ḡ(ε; B, H) = δ + 1` with the full closed form; absent without a sign change.
    pub eps_threshold_numeric: Option<f64>,
    /// `Ḡ - (δ + 1)` at the bracket ends.
    pub bracket_values: (f64, f64),
}

pub const THRESHOLD_BRACKET: (f64, f64) = (1e-12, 1.0);
pub const THRESHOLD_TOL: f64 = 1e-10;

/// ε above which measuring `parts` costs at most `δ + 1` times the eigenbasis measurement.
pub fn epsilon_threshold(parts: &[MomentStats], h: &MomentStats, d: f64, delta: f64) -> Result<ThresholdReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("overhead δ = {delta} must be positive")));
    }
    let asym = asymmetries(&parts[..2.min(parts.len())], h)?;
    let alpha = asym.alpha;
    let closed = (delta > alpha * alpha)
        .then(|| 4.0 * parts[0].variance / (h.mean * h.mean * (delta - alpha * alpha)));
    let f = |eps: f64| -> Result<f64> {
        Ok(ensemble_complexity(parts, std::slice::from_ref(h), eps, d, false)?.g - (delta + 1.0))
    };
    let (mut lo, mut hi) = THRESHOLD_BRACKET;
    let (flo, fhi) = (f(lo)?, f(hi)?);
    let numeric = if flo > 0.0 && fhi <= 0.0 {
        while hi - lo > THRESHOLD_TOL {
            let mid = 0.5 * (lo + hi);
            if f(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    } else {
        None
    };
    Ok(ThresholdReport {
        delta,
        alpha,
        eps_threshold_closed: closed,
        eps_threshold_numeric: numeric,
        bracket_values: (flo, fhi),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdRatio {
    pub numeric: Option<f64>,
    pub closed: Option<f64>,
    /// `G · δ/(δ - α²)` with the Pauli asymmetry.
    pub predicted: f64,
}

pub fn threshold_ratio(pauli: &ThresholdReport, geo: &ThresholdReport, g_eigen: f64) -> ThresholdRatio {
    let div = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| a / b);
    ThresholdRatio {
        numeric: div(pauli.eps_threshold_numeric, geo.eps_threshold_numeric),
        closed: div(pauli.eps_threshold_closed, geo.eps_threshold_closed),
        predicted: g_eigen * pauli.delta / (pauli.delta - pauli.alpha * pauli.alpha),
    }
}

/// Per-draw variances `Var_ψ̃(O_k)` from a Monte Carlo run.
#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloRun {
    pub epsilon: f64,
    /// `samples[t][k]`: variance of operator `k` on draw `t`.
    pub samples: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

impl MonteCarloRun {
    pub fn trials(&self) -> usize {
        self.samples.len()
    }

    pub fn estimate(&self, k: usize) -> McEstimate {
        let t = self.samples.len() as f64;
        let mean = self.samples.iter().map(|s| s[k]).sum::<f64>() / t;
        let var = self.samples.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / (t - 1.0);
        McEstimate {
            mean,
            stderr: (var / t).sqrt(),
        }
    }

    /// Plug-in `Ḡ` from the sample means of operators `num` over `den`, with a delta-method
    /// standard error that keeps the correlations between operators.
    pub fn complexity(&self, num: &[usize], den: &[usize]) -> Result<McEstimate> {
        let k = self.samples.first().map_or(0, |s| s.len());
        let means: Vec<f64> = (0..k).map(|i| self.estimate(i).mean).collect();
        let sn = sqrt_sum(num.iter().map(|&i| means[i]));
        let sd = sqrt_sum(den.iter().map(|&i| means[i]));
        let g = complexity_from_roots(sn, sd)?.g;
        let mut grad = vec![0.0; k];
        for &i in num {
            grad[i] += g / (sn * means[i].max(1e-300).sqrt());
        }
        for &i in den {
            grad[i] -= g / (sd * means[i].max(1e-300).sqrt());
        }
        let t = self.samples.len() as f64;
        let proj: Vec<f64> = self
            .samples
            .iter()
            .map(|s| (0..k).map(|i| grad[i] * (s[i] - means[i])).sum())
            .collect();
        let var = proj.iter().map(|x| x * x).sum::<f64>() / (t - 1.0);
        Ok(McEstimate {
            mean: g,
            stderr: (var / t).sqrt(),
        })
    }
}

/// Raw quadratic-form variance through a prebuilt operator.
fn raw_variance(op: &SparseOp, amps: &[num_complex::Complex64], norm_sq: f64) -> f64 {
    let av = op.apply_vec(amps);
    let m = pdot(amps, &av).re;
    let centered: f64 = av.iter().zip(amps).map(|(x, p)| (x - p * m).norm_sqr()).sum();
    centered + m * m * (1.0 - norm_sq)
}

/// Draws `cfg.samples` perturbed states and records the variance of every traceless
/// operator on each. Draw `t` uses ChaCha stream `t` of `cfg.seed`; results keep draw order.
pub fn monte_carlo_variances(ops: &[PauliSum], psi: &StateVector, cfg: &NoiseConfig) -> Result<MonteCarloRun> {
    cfg.validate()?;
    if cfg.samples < 2 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least 2 samples".into()));
    }
    for op in ops {
        check_dims(op.n_qubits(), psi.n_qubits())?;
    }
    let sparse: Vec<SparseOp> = ops.iter().map(|o| SparseOp::new(&o.traceless_part())).collect();
    let n = psi.n_qubits();
    let samples = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(t);
            let mut xi = StateVector::random(n, &mut rng, "haar")?;
            if cfg.orthogonalize {
                xi = orthogonalized(psi, &xi)?;
            }
            let tilde = perturbed_state(psi, &xi, cfg.epsilon)?;
            let ns = tilde.norm_sq();
            Ok(sparse.iter().map(|op| raw_variance(op, tilde.amplitudes(), ns)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloRun {
        epsilon: cfg.epsilon,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, Model, ModelConfig};
    use crate::metrics::relative_complexity;
    use crate::partition::{build_partitioning, PartitionKind};
    use crate::spectral::{dense, expectation, ground_state, variance};
    use num_complex::Complex64;

    fn tfim(nx: usize, ny: usize) -> Model {
        ModelConfig::Tfim { j: 1.0, h: 1.0 }.build(&build_lattice(nx, ny, 1, true).unwrap()).unwrap()
    }

    fn mean_se(x: &[f64]) -> (f64, f64) {
        let t = x.len() as f64;
        let m = x.iter().sum::<f64>() / t;
        let v = x.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (t - 1.0);
        (m, (v / t).sqrt())
    }

    #[test]
    fn haar_first_moments() {
        let n = 6;
        let z0 = PauliSum::from_text("1 ZIIIII", None).unwrap();
        let shifted = PauliSum::from_text("1 IIIIII\n0.7 XXIIII\n-0.4 IZIYII\n", None).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for s in 0..10_000 {
            let xi = haar_sample(n, s).unwrap();
            assert!((xi.norm_sq() - 1.0).abs() < 1e-12);
            a.push(expectation(&z0, &xi).unwrap());
            b.push(expectation(&shifted, &xi).unwrap());
        }
        let (m, se) = mean_se(&a);
        assert!(m.abs() < 3.0 * se, "{m} ± {se}");
        let (m, se) = mean_se(&b);
        assert!((m - 1.0).abs() < 3.0 * se, "{m} ± {se}");
    }

    #[test]
    fn haar_second_moment() {
        let n = 6;
        let d = 64.0;
        let o = PauliSum::from_text("0.5 IIIIII\n0.7 XXIIII\n-0.4 IZIYII\n1.1 ZIZIZI\n", None).unwrap();
        let tr = 0.5 * d;
        let frob = d * (0.25 + 0.49 + 0.16 + 1.21);
        let want = (tr * tr + frob) / (d * (d + 1.0));
        let x: Vec<f64> = (0..10_000)
            .map(|s| expectation(&o, &haar_sample(n, 1_000_000 + s).unwrap()).unwrap().powi(2))
            .collect();
        let (m, se) = mean_se(&x);
        assert!((m - want).abs() < 3.0 * se, "{m} vs {want} ± {se}");
    }

    #[test]
    fn perturbed_endpoints_and_norm() {
        let psi = haar_sample(4, 1).unwrap();
        let xi = haar_sample(4, 2).unwrap();
        let diff = |a: &StateVector, b: &StateVector| {
            a.amplitudes()
                .iter()
                .zip(b.amplitudes())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max)
        };
        assert!(diff(&perturbed_state(&psi, &xi, 0.0).unwrap(), &psi) < 1e-15);
        assert!(diff(&perturbed_state(&psi, &xi, 1.0).unwrap(), &xi) < 1e-15);
        let p = perturbed_state(&psi, &xi, 0.3).unwrap();
        assert!(!p.is_normalized());
        assert!(p.provenance().contains("norm²="));
        let norms: Vec<f64> = (0..10_000)
            .map(|s| perturbed_state(&psi, &haar_sample(4, 50 + s).unwrap(), 0.4).unwrap().norm_sq())
            .collect();
        let (m, se) = mean_se(&norms);
        assert!((m - 1.0).abs() < 3.0 * se);
        assert!(perturbed_state(&psi, &haar_sample(3, 0).unwrap(), 0.5).is_err());
        assert!(perturbed_state(&psi, &xi, 1.5).is_err());
    }

    #[test]
    fn orthogonalized_is_orthogonal() {
        let psi = haar_sample(5, 3).unwrap();
        let xi = orthogonalized(&psi, &haar_sample(5, 4).unwrap()).unwrap();
        assert!(psi.inner(&xi).unwrap().norm() < 1e-12);
        assert!((xi.norm_sq() - 1.0).abs() < 1e-12);
    }

    fn stats(v: f64, m: f64, m2: f64, f: f64) -> MomentStats {
        MomentStats {
            label: "x".into(),
            mean: m,
            second_moment: m2,
            variance: v,
            frob_sq_over_d: f,
        }
    }

    #[test]
    fn closed_form_endpoints() {
        let s = stats(0.7, -2.0, 4.7, 3.0);
        let d = 64.0;
        assert_eq!(expected_variance(&s, 0.0, d, false), 0.7);
        assert_eq!(expected_variance(&s, 0.0, d, true), 0.7);
        assert!((expected_variance(&s, 1.0, d, false) - 3.0 * d / (d + 1.0)).abs() < 1e-12);
        assert!((expected_variance(&s, 1.0, d, true) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_matches_full_form() {
        let model = tfim(3, 2);
        let sol = ground_state(&model.hamiltonian, 2).unwrap();
        let psi = sol.ground();
        let pauli = build_partitioning(&model, PartitionKind::PauliBaseline).unwrap();
        let part = pauli.parts()[0].clone();
        let ops = vec![model.hamiltonian.clone(), part.clone()];
        let cfg = NoiseConfig::new(0.3, 17, 20_000).unwrap();
        let run = monte_carlo_variances(&ops, psi, &cfg).unwrap();
        let d = 64.0;
        for (k, op) in ops.iter().enumerate() {
            let s = operator_noise_stats(op, psi, "op").unwrap();
            let est = run.estimate(k);
            let full = expected_variance(&s, 0.3, d, false);
            let trunc = expected_variance(&s, 0.3, d, true);
            assert!((est.mean - full).abs() < 3.0 * est.stderr, "{k}: {est:?} vs {full}");
            assert!((est.mean - trunc).abs() < 3.0 * est.stderr + 2.0 * s.second_moment / d);
        }
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let psi = haar_sample(3, 0).unwrap();
        let ops = vec![PauliSum::from_text("1 XZI\n0.5 IIZ", None).unwrap()];
        let cfg = NoiseConfig::new(0.5, 9, 64).unwrap();
        let a = monte_carlo_variances(&ops, &psi, &cfg).unwrap();
        let b = monte_carlo_variances(&ops, &psi, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ensemble_complexity_limits() {
        let model = tfim(3, 3);
        let sol = ground_state(&model.hamiltonian, 2).unwrap();
        let psi = sol.ground();
        let pauli = build_partitioning(&model, PartitionKind::PauliBaseline).unwrap();
        let geo = build_partitioning(&model, PartitionKind::Geo1d { l: 1 }).unwrap();
        let sp = noise_stats(&pauli, psi).unwrap();
        let sg = noise_stats(&geo, psi).unwrap();
        let d = 512.0;
        assert!((ensemble_complexity(&sp, &sp, 0.2, d, false).unwrap().g - 1.0).abs() < 1e-14);
        let g0 = relative_complexity(&pauli, &geo, psi).unwrap().g;
        let small = ensemble_complexity(&sp, &sg, 1e-12, d, false).unwrap().g;
        assert!((small - g0).abs() < 1e-6 * g0, "{small} vs {g0}");
        let one = ensemble_complexity(&sp, &sg, 1.0, d, false).unwrap().g;
        assert!((one - frobenius_criterion(&pauli, &geo).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn frobenius_matches_dense_trace() {
        let model = tfim(3, 3);
        let pauli = build_partitioning(&model, PartitionKind::PauliBaseline).unwrap();
        let geo = build_partitioning(&model, PartitionKind::Geo1d { l: 1 }).unwrap();
        let d = 512.0;
        let norm = |p: &Partitioning| -> f64 {
            p.parts()
                .iter()
                .map(|h| {
                    let m = dense::pauli_sum_matrix(h);
                    let tr = m.trace() / Complex64::new(d, 0.0);
                    let c = &m - nalgebra::DMatrix::<Complex64>::identity(512, 512) * tr;
                    (c.adjoint() * &c).trace().re.sqrt()
                })
                .sum()
        };
        let want = (norm(&pauli) / norm(&geo)).powi(2);
        let got = frobenius_criterion(&pauli, &geo).unwrap();
        assert!((got - want).abs() < 1e-9);
        assert!((frobenius_criterion(&geo, &geo).unwrap() - 1.0).abs() < 1e-15);
        let shifted = model.hamiltonian.add(&PauliSum::identity(9, 3.5)).unwrap();
        let whole = Partitioning::whole(&model.hamiltonian);
        let whole_shifted = Partitioning::whole(&shifted);
        assert_eq!(
            frobenius_criterion(&pauli, &whole).unwrap(),
            frobenius_criterion(&pauli, &whole_shifted).unwrap()
        );
    }

    #[test]
    fn asymmetry_values() {
        let model = tfim(3, 3);
        let sol = ground_state(&model.hamiltonian, 2).unwrap();
        let psi = sol.ground();
        let h = operator_noise_stats(&model.hamiltonian, psi, "h").unwrap();
        let geo = build_partitioning(&model, PartitionKind::Geo1d { l: 1 }).unwrap();
        let a = asymmetries(&noise_stats(&geo, psi).unwrap(), &h).unwrap();
        assert!(a.alpha <= 1e-9, "{a:?}");
        let pauli = build_partitioning(&model, PartitionKind::PauliBaseline).unwrap();
        let a = asymmetries(&noise_stats(&pauli, psi).unwrap(), &h).unwrap();
        let direct = (expectation(&pauli.parts()[0], psi).unwrap() / expectation(&model.hamiltonian, psi).unwrap() - 0.5).abs();
        assert!((a.alpha - direct).abs() < 1e-12);
        let zero = stats(0.0, 0.0, 0.0, 0.0);
        let a = asymmetries(&[h.clone(), zero], &h).unwrap();
        assert!((a.alpha - 0.5).abs() < 1e-15);
        let flat = stats(0.0, 0.0, 1.0, 1.0);
        assert!(matches!(asymmetries(&[flat.clone(), flat.clone()], &flat), Err(Error::Undefined(_))));
    }

    #[test]
    fn sandwich_on_small_tfim() {
        let model = tfim(3, 3);
        let sol = ground_state(&model.hamiltonian, 2).unwrap();
        let psi = sol.ground();
        let h = operator_noise_stats(&model.hamiltonian, psi, "h").unwrap();
        let pauli = build_partitioning(&model, PartitionKind::PauliBaseline).unwrap();
        let geo = build_partitioning(&model, PartitionKind::Geo1d { l: 1 }).unwrap();
        let sp = noise_stats(&pauli, psi).unwrap();
        let sg = noise_stats(&geo, psi).unwrap();
        for eps in [0.01, 0.05, 0.2, 0.5, 0.9] {
            let g = ensemble_complexity(&sp, &sg, eps, 512.0, true).unwrap().g;
            let b = corollary3_bounds(&sp, &sg, &h, eps).unwrap();
            assert!(g <= b.upper * (1.0 + 1e-12), "ε={eps}: {g} > {}", b.upper);
        }
        let b = corollary3_bounds(&sp, &sg, &h, 1e-9).unwrap();
        assert!((b.g_geo - 4.0 * sg[0].variance).abs() < 1e-6 * sg[0].variance.max(1.0));
        assert!(corollary3_bounds(&sp, &sg, &h, 0.0).is_err());
    }

    #[test]
    fn regimes() {
        let h = stats(0.0, -10.0, 100.0, 5.0);
        let p1 = stats(0.5, -5.0, 25.5, 2.5);
        assert_eq!(regime_classify(0.0, &p1, &h).unwrap().regime, Regime::I);
        assert_eq!(regime_classify(1.0, &p1, &h).unwrap().regime, Regime::III);
        let r = regime_classify(0.5, &p1, &h).unwrap();
        assert_eq!(r.regime, Regime::II);
        assert!((r.low_boundary - 0.02).abs() < 1e-15 && (r.high_boundary - 0.95).abs() < 1e-15);
        assert!(!r.overlapping);
        assert!(regime_classify(0.5, &p1, &stats(0.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn closed_threshold_example() {
        // geometric split with equal halves: α = 0
        let h = stats(0.0, -10.0, 100.0, 4.0);
        let half = stats(2.0, -5.0, 27.0, 2.0);
        let r = epsilon_threshold(&[half.clone(), half], &h, 4096.0, 4.0).unwrap();
        assert_eq!(r.alpha, 0.0);
        assert!((r.eps_threshold_closed.unwrap() - 0.02).abs() < 1e-15);
        let eps = r.eps_threshold_numeric.unwrap();
        assert!(eps > 0.0 && eps <= 1.0);
        let s = [stats(2.0, -5.0, 27.0, 2.0), stats(2.0, -5.0, 27.0, 2.0)];
        let g = ensemble_complexity(&s, std::slice::from_ref(&h), eps, 4096.0, false).unwrap().g;
        assert!((g - 5.0).abs() < 1e-6);
    }

    #[test]
    fn threshold_without_root() {
        let h = stats(0.0, -10.0, 100.0, 4.0);
        let half = stats(2.0, -5.0, 27.0, 2.0);
        // the overhead at ε = 1 already exceeds a tiny δ
        let r = epsilon_threshold(&[half.clone(), half], &h, 4096.0, 0.1).unwrap();
        assert!(r.eps_threshold_numeric.is_none());
        assert!(r.bracket_values.1 > 0.0);
    }

    #[test]
    fn variance_helper_agrees() {
        let psi = haar_sample(4, 8).unwrap();
        let xi = haar_sample(4, 9).unwrap();
        let t = perturbed_state(&psi, &xi, 0.25).unwrap();
        let o = PauliSum::from_text("0.3 XXII\n-1 IZZI\n0.8 IIIY", None).unwrap();
        let op = SparseOp::new(&o);
        let got = raw_variance(&op, t.amplitudes(), t.norm_sq());
        assert!((got - variance(&o, &t).unwrap()).abs() < 1e-12);
    }
}
