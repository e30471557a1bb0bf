//! Shot-level simulation of partitioned energy estimation.
//!
//! Each part is measured in a product basis over disjoint blocks: qubitwise-commuting
//! blocks are rotated qubit by qubit, other blocks are diagonalized densely. The rotated
//! state's Born distribution is materialized once per part and sampled by CDF inversion.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::metrics::{optimal_allocation, Allocation};
use crate::partition::{PartitionKind, Partitioning};
use crate::pauli::{Letter, PauliString, PauliSum};
use crate::spectral::{dense, StateVector};

/// Largest block handed to the dense eigensolver.
pub const MAX_BLOCK_QUBITS: usize = 12;
/// Largest register whose outcome distribution is materialized.
pub const MAX_SAMPLER_QUBITS: usize = 22;

type Eigen = Arc<(Vec<f64>, DMatrix<Complex64>)>;

#[derive(Clone, Debug)]
enum Block {
    /// Per-qubit rotations taking each letter to `Z`; strings become `Z` masks.
    Qubitwise { rotations: Vec<(usize, Letter)>, z_terms: Vec<(u64, f64)> },
    Dense { qubits: Vec<usize>, eigen: Eigen },
}

/// Born distribution of one part's measurement on a fixed state.
#[derive(Clone, Debug)]
pub struct PartSampler {
    part: PauliSum,
    blocks: Vec<Block>,
    outcomes: Vec<f64>,
    cdf: Vec<f64>,
    mean: f64,
    variance: f64,
}

fn support_qubits(mask: u64) -> Vec<usize> {
    (0..64).filter(|q| mask >> q & 1 == 1).collect()
}

/// Connected components of the qubit graph induced by the strings' supports.
fn support_components(part: &PauliSum) -> Vec<Vec<usize>> {
    let mut comps: Vec<u64> = Vec::new();
    for (p, _) in part.iter() {
        let mut s = p.support();
        if s == 0 {
            continue;
        }
        let mut keep = Vec::with_capacity(comps.len());
        for c in comps.drain(..) {
            if c & s != 0 {
                s |= c;
            } else {
                keep.push(c);
            }
        }
        keep.push(s);
        comps = keep;
    }
    comps.sort_by_key(|c| c.trailing_zeros());
    comps.into_iter().map(support_qubits).collect()
}

fn is_qubitwise(strings: &[(PauliString, f64)]) -> bool {
    strings
        .iter()
        .enumerate()
        .all(|(i, (a, _))| strings[i + 1..].iter().all(|(b, _)| a.qubitwise_commutes(b)))
}

fn block_for(
    qubits: &[usize],
    strings: Vec<(PauliString, f64)>,
    cache: &mut HashMap<String, Eigen>,
) -> Result<Block> {
    if is_qubitwise(&strings) {
        let mut letters: Vec<Option<Letter>> = vec![None; 64];
        let mut z_terms = Vec::new();
        for (p, c) in &strings {
            for q in support_qubits(p.support()) {
                letters[q] = Some(p.letter(q));
            }
            z_terms.push((p.support(), *c));
        }
        let rotations = letters
            .iter()
            .enumerate()
            .filter_map(|(q, l)| l.filter(|l| *l != Letter::Z).map(|l| (q, l)))
            .collect();
        return Ok(Block::Qubitwise { rotations, z_terms });
    }
    if qubits.len() > MAX_BLOCK_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "block of {} qubits exceeds the dense limit of {MAX_BLOCK_QUBITS}",
            qubits.len()
        )));
    }
    let mut local = PauliSum::new(qubits.len());
    for (p, c) in &strings {
        local.add_term(p.restrict(qubits), *c)?;
    }
    let key = local.to_text();
    let eigen = match cache.get(&key) {
        Some(e) => e.clone(),
        None => {
            let e = Arc::new(dense::eigh(dense::assemble(&local)?));
            cache.insert(key, e.clone());
            e
        }
    };
    Ok(Block::Dense {
        qubits: qubits.to_vec(),
        eigen,
    })
}

/// `V` with `V† Z V = letter`.
fn rotation_matrix(l: Letter) -> [[Complex64; 2]; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re * s, im * s);
    match l {
        Letter::X => [[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(-1.0, 0.0)]],
        Letter::Y => [[c(1.0, 0.0), c(0.0, -1.0)], [c(1.0, 0.0), c(0.0, 1.0)]],
        _ => [[Complex64::ONE, Complex64::ZERO], [Complex64::ZERO, Complex64::ONE]],
    }
}

fn apply_single(amps: &mut [Complex64], q: usize, v: &[[Complex64; 2]; 2]) {
    let bit = 1usize << q;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let (a, b) = (amps[i], amps[i | bit]);
            amps[i] = v[0][0] * a + v[0][1] * b;
            amps[i | bit] = v[1][0] * a + v[1][1] * b;
        }
    }
}

/// `amps ← (U† on qubits) amps`, with eigenvectors of the block as the columns of `U`.
fn apply_block(amps: &mut [Complex64], qubits: &[usize], u: &DMatrix<Complex64>) {
    let k = qubits.len();
    let mask: usize = qubits.iter().map(|q| 1usize << q).sum();
    let offsets: Vec<usize> = (0..1usize << k)
        .map(|l| (0..k).filter(|j| l >> j & 1 == 1).map(|j| 1usize << qubits[j]).sum())
        .collect();
    let ud = u.adjoint();
    let mut tmp = vec![Complex64::new(0.0, 0.0); offsets.len()];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (t, o) in tmp.iter_mut().zip(&offsets) {
            *t = amps[base + o];
        }
        for (r, o) in offsets.iter().enumerate() {
            amps[base + o] = (0..tmp.len()).map(|l| ud[(r, l)] * tmp[l]).sum();
        }
    }
}

fn local_index(i: usize, qubits: &[usize]) -> usize {
    qubits.iter().enumerate().map(|(j, q)| (i >> q & 1) << j).sum()
}

/// Sampler for `part` on `psi`. With `patches`, every string must lie inside one patch and
/// patches become the measurement blocks; without, the strings must commute and the blocks
/// are their support components.
pub fn build_sampler(part: &PauliSum, patches: Option<&[Vec<usize>]>, psi: &StateVector) -> Result<PartSampler> {
    build_sampler_cached(part, patches, psi, &mut HashMap::new())
}

fn build_sampler_cached(
    part: &PauliSum,
    patches: Option<&[Vec<usize>]>,
    psi: &StateVector,
    cache: &mut HashMap<String, Eigen>,
) -> Result<PartSampler> {
    check_dims(part.n_qubits(), psi.n_qubits())?;
    let n = part.n_qubits();
    if n > MAX_SAMPLER_QUBITS {
        return Err(Error::TooManyQubits(n, MAX_SAMPLER_QUBITS));
    }
    let groups: Vec<Vec<usize>> = match patches {
        Some(p) => p.to_vec(),
        None => {
            if !pairwise_commuting(part) {
                return Err(Error::InvalidArgument(
                    "a part without patches must be a mutually commuting set".into(),
                ));
            }
            support_components(part)
        }
    };
    let masks: Vec<u64> = groups.iter().map(|g| g.iter().map(|q| 1u64 << q).sum()).collect();
    let mut assigned: Vec<Vec<(PauliString, f64)>> = vec![Vec::new(); groups.len()];
    let mut offset = 0.0;
    for (p, c) in part.iter() {
        if p.is_identity() {
            offset += c;
            continue;
        }
        let home = masks
            .iter()
            .position(|m| p.support() & !m == 0)
            .ok_or_else(|| Error::InvalidArgument(format!("string {p} is not contained in any patch")))?;
        assigned[home].push((*p, c));
    }
    let mut blocks = Vec::new();
    for (g, strings) in groups.iter().zip(assigned) {
        if !strings.is_empty() {
            blocks.push(block_for(g, strings, cache)?);
        }
    }

    let mut amps = psi.amplitudes().to_vec();
    let mut outcomes = vec![offset; amps.len()];
    for b in &blocks {
        match b {
            Block::Qubitwise { rotations, z_terms } => {
                for (q, l) in rotations {
                    apply_single(&mut amps, *q, &rotation_matrix(*l));
                }
                for (i, o) in outcomes.iter_mut().enumerate() {
                    for (mask, c) in z_terms {
                        *o += if (i as u64 & mask).count_ones() % 2 == 0 { *c } else { -*c };
                    }
                }
            }
            Block::Dense { qubits, eigen } => {
                apply_block(&mut amps, qubits, &eigen.1);
                for (i, o) in outcomes.iter_mut().enumerate() {
                    *o += eigen.0[local_index(i, qubits)];
                }
            }
        }
    }
    let probs: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("state norm² {total} is not 1")));
    }
    let mean: f64 = probs.iter().zip(&outcomes).map(|(p, o)| p * o).sum();
    let variance: f64 = probs.iter().zip(&outcomes).map(|(p, o)| p * (o - mean).powi(2)).sum();
    let mut acc = 0.0;
    let cdf = probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    Ok(PartSampler {
        part: part.clone(),
        blocks,
        outcomes,
        cdf,
        mean,
        variance,
    })
}

fn pairwise_commuting(part: &PauliSum) -> bool {
    let strings: Vec<&PauliString> = part.iter().map(|(p, _)| p).collect();
    strings
        .iter()
        .enumerate()
        .all(|(i, a)| strings[i + 1..].iter().all(|b| a.commutes(b).unwrap_or(false)))
}

impl PartSampler {
    pub fn part(&self) -> &PauliSum {
        &self.part
    }

    /// Mean of the outcome distribution.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Variance of the outcome distribution.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn total_probability(&self) -> f64 {
        *self.cdf.last().unwrap_or(&0.0)
    }

    /// Number of dense and qubitwise blocks.
    pub fn block_counts(&self) -> (usize, usize) {
        let dense = self.blocks.iter().filter(|b| matches!(b, Block::Dense { .. })).count();
        (dense, self.blocks.len() - dense)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = rng.random::<f64>() * self.total_probability();
        let i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.outcomes[i]
    }

    pub fn sample_mean<R: Rng + ?Sized>(&self, rng: &mut R, shots: u64) -> f64 {
        let s: f64 = (0..shots).map(|_| self.sample(rng)).sum();
        s / shots as f64
    }
}

/// Measurement blocks used for each part of a partitioning.
pub fn part_blocks(b: &Partitioning) -> Vec<Option<Vec<Vec<usize>>>> {
    (0..b.len())
        .map(|i| {
            let part = &b.parts()[i];
            match b.kind() {
                PartitionKind::PauliBaseline => None,
                _ if b.qubit_local() && !b.patches().is_empty() => Some(b.patches()[i].clone()),
                _ => Some(support_components(part)),
            }
        })
        .collect()
}

pub fn build_samplers(b: &Partitioning, psi: &StateVector) -> Result<Vec<PartSampler>> {
    let mut cache = HashMap::new();
    b.parts()
        .iter()
        .zip(part_blocks(b))
        .map(|(p, blocks)| build_sampler_cached(p, blocks.as_deref(), psi, &mut cache))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationMode {
    Optimal,
    Uniform,
}

impl AllocationMode {
    pub fn label(&self) -> &'static str {
        match self {
            AllocationMode::Optimal => "optimal",
            AllocationMode::Uniform => "uniform",
        }
    }
}

fn uniform_allocation(k: usize, m: u64) -> Result<Vec<u64>> {
    if m < k as u64 {
        return Err(Error::InvalidArgument(format!("{m} shots cannot cover {k} parts")));
    }
    let base = m / k as u64;
    let extra = (m % k as u64) as usize;
    Ok((0..k).map(|i| base + u64::from(i < extra)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatorRun {
    pub label: String,
    pub total_shots: u64,
    pub allocation_mode: AllocationMode,
    pub budgets: Vec<u64>,
    /// Exact `<H>` from the outcome distributions.
    pub exact: f64,
    /// One estimate of `<H>` per trial.
    pub estimates: Vec<f64>,
    /// Per part, the sample mean averaged over trials.
    pub part_means: Vec<f64>,
    pub exact_variances: Vec<f64>,
    pub mean_estimate: f64,
    /// Unbiased sample variance of the per-trial estimates.
    pub empirical_variance: f64,
    pub empirical_stderr: f64,
}

impl EstimatorRun {
    pub fn trials(&self) -> usize {
        self.estimates.len()
    }
}

/// Repeats the partitioned estimator `trials` times. Trial `t` draws from ChaCha stream `t`
/// of `seed`; trials run in parallel and are reduced in trial order.
pub fn simulate_estimator(
    b: &Partitioning,
    psi: &StateVector,
    m: u64,
    mode: AllocationMode,
    seed: u64,
    trials: usize,
) -> Result<EstimatorRun> {
    if trials < 2 {
        return Err(Error::InvalidArgument("need at least 2 trials".into()));
    }
    let samplers = build_samplers(b, psi)?;
    let vars: Vec<f64> = samplers.iter().map(|s| s.variance()).collect();
    let budgets = match mode {
        AllocationMode::Optimal => optimal_allocation(&vars, m)?.budgets,
        AllocationMode::Uniform => uniform_allocation(samplers.len(), m)?,
    };
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            samplers
                .iter()
                .zip(&budgets)
                .map(|(s, &mb)| s.sample_mean(&mut rng, mb))
                .collect()
        })
        .collect();
    let estimates: Vec<f64> = per_trial.iter().map(|p| p.iter().sum()).collect();
    let tn = trials as f64;
    let mean_estimate = estimates.iter().sum::<f64>() / tn;
    let empirical_variance = estimates.iter().map(|e| (e - mean_estimate).powi(2)).sum::<f64>() / (tn - 1.0);
    let part_means = (0..samplers.len())
        .map(|k| per_trial.iter().map(|p| p[k]).sum::<f64>() / tn)
        .collect();
    Ok(EstimatorRun {
        label: b.label().to_string(),
        total_shots: m,
        allocation_mode: mode,
        budgets,
        exact: samplers.iter().map(|s| s.mean()).sum(),
        estimates,
        part_means,
        exact_variances: vars,
        mean_estimate,
        empirical_variance,
        empirical_stderr: empirical_variance.sqrt(),
    })
}

/// Expected estimator variance `Σ_b Var_b / M_b` of a concrete allocation.
pub fn allocation_variance(run: &EstimatorRun) -> f64 {
    crate::metrics::allocation_cost(&run.exact_variances, &run.budgets)
}

pub fn allocation_of(run: &EstimatorRun) -> Allocation {
    Allocation {
        achieved_cost: allocation_variance(run),
        budgets: run.budgets.clone(),
        total: run.total_shots,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZReport {
    pub empirical_variance: f64,
    pub predicted_variance: f64,
    /// Standard error of the sample variance under the prediction, `σ²√(2/(T-1))`.
    pub se: f64,
    pub z: f64,
}

/// Compares the across-trial estimator variance with `predicted_cost / M`.
pub fn compare_predictions(run: &EstimatorRun, predicted_cost: f64, m: u64) -> Result<ZReport> {
    let t = run.trials();
    if t < 30 {
        return Err(Error::InvalidArgument(format!("{t} trials are too few for a variance z-score")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("zero shots".into()));
    }
    let pred = predicted_cost / m as f64;
    let se = pred * (2.0 / (t as f64 - 1.0)).sqrt();
    let emp = run.empirical_variance;
    let z = if pred > 0.0 {
        (emp - pred) / se
    } else if emp <= 1e-24 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ZReport {
        empirical_variance: emp,
        predicted_variance: pred,
        se,
        z,
    })
}
