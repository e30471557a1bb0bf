//! Self-checks run by `geoshot verify` and by the acceptance target.
//!
//! Every check uses fixed seeds, so repeated runs give the same verdicts.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::lattice::{build_lattice, fock, jordan_wigner, FermionTerm, Model, ModelConfig};
use crate::metrics::{eigenstate_improvement, partition_cost, relative_complexity};
use crate::partition::{build_partitioning, make_cut_pair, validate_partition, PartitionKind, Partitioning};
use crate::pauli::{PauliString, PauliSum};
use crate::perturbed::{
    corollary3_bounds, ensemble_complexity, epsilon_threshold, expected_variance, monte_carlo_variances,
    noise_stats, operator_noise_stats, regime_classify, threshold_ratio, NoiseConfig,
};
use crate::simulator::{build_samplers, compare_predictions, simulate_estimator, AllocationMode};
use crate::spectral::dense::{commutator_norm, pauli_sum_matrix};
use crate::spectral::{
    apply, commutator_expectation, correlation, expectation, ground_state, ground_state_with, variance,
    EigenSolution, SolverOptions, StateVector,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifySize {
    #[default]
    Default,
    Large,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub size: VerifySize,
    /// Feed a deliberately broken partitioning to the partition validation check.
    pub inject_corruption: bool,
    /// Run only the checks with these ids (all when empty).
    pub only: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub size: VerifySize,
    pub inject_corruption: bool,
    pub passed: bool,
    pub seconds: f64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {:>2} {} ({:.1}s)",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.id,
                    c.name,
                    c.seconds
                )
            })
            .collect()
    }
}

/// Running verdict plus a human-readable trace.
#[derive(Default)]
struct Log {
    failed: bool,
    text: String,
}

impl Log {
    fn note(&mut self, line: impl AsRef<str>) {
        self.text.push_str(line.as_ref());
        self.text.push('\n');
    }

    fn check(&mut self, ok: bool, line: impl AsRef<str>) {
        self.failed |= !ok;
        let _ = writeln!(self.text, "[{}] {}", if ok { "ok" } else { "FAIL" }, line.as_ref());
    }
}

type CheckFn = fn(&VerifyOptions, &mut Log) -> Result<()>;

const CHECKS: [(usize, &str, CheckFn); 10] = [
    (1, "eigenstate identities", check_identities),
    (2, "eigenstate lower bounds", check_bounds),
    (3, "Ising perturbative limits", check_ising_limits),
    (4, "TFXYM divergence location", check_divergence),
    (5, "perturbed variance Monte Carlo", check_monte_carlo),
    (6, "noisy bounds and regimes", check_noisy_bounds),
    (7, "epsilon threshold ratio", check_thresholds),
    (8, "shot simulator calibration", check_simulator),
    (9, "oracle equivalence", check_oracles),
    (10, "Hubbard structure", check_hubbard),
];

pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    let start = Instant::now();
    let checks: Vec<CheckResult> = CHECKS
        .iter()
        .filter(|(id, _, _)| opts.only.is_empty() || opts.only.contains(id))
        .map(|&(id, name, f)| {
            let t = Instant::now();
            let mut log = Log::default();
            if let Err(e) = f(opts, &mut log) {
                log.check(false, format!("error: {e}"));
            }
            CheckResult {
                id,
                name,
                passed: !log.failed,
                details: log.text,
                seconds: t.elapsed().as_secs_f64(),
            }
        })
        .collect();
    VerifyReport {
        size: opts.size,
        inject_corruption: opts.inject_corruption,
        passed: checks.iter().all(|c| c.passed),
        seconds: start.elapsed().as_secs_f64(),
        checks,
    }
}

fn model(cfg: ModelConfig, nx: usize, ny: usize, layers: usize) -> Result<Model> {
    cfg.build(&build_lattice(nx, ny, layers, true)?)
}

fn tfim(j: f64, h: f64) -> ModelConfig {
    ModelConfig::Tfim { j, h }
}

fn spin_models() -> [ModelConfig; 4] {
    [
        ModelConfig::Tfxym { eta: 0.5, h: 1.0 },
        tfim(1.0, 1.0),
        ModelConfig::Bnnni {
            j: 1.0,
            kappa: 0.3,
            h: 1.0,
        },
        ModelConfig::Hcbh { j: 0.45, h: 1.0 },
    ]
}

/// Lowest state in the sector where `Π X` is +1. For the Ising model this is the exact
/// finite-size ground state, which plain Lanczos cannot resolve once the two lowest levels
/// are split by less than its tolerance.
fn even_ground_state(m: &Model) -> Result<StateVector> {
    let n = m.n_qubits();
    let parity = PauliString::new(n, (1u64 << n) - 1, 0)?;
    let penalized = m.hamiltonian.combine(&PauliSum::from_string(parity, 1.0), 1.0, -1.0)?;
    Ok(ground_state(&penalized, 2)?.states.swap_remove(0))
}

fn check_identities(_: &VerifyOptions, log: &mut Log) -> Result<()> {
    let mut evaluated = 0;
    for cfg in spin_models() {
        let m = model(cfg, 4, 3, 1)?;
        let sol = ground_state(&m.hamiltonian, 2)?;
        if sol.degenerate {
            log.note(format!("{}: degenerate ground level, skipped", cfg.describe()));
            continue;
        }
        evaluated += 1;
        let psi = sol.ground();
        let vh = variance(&m.hamiltonian, psi)?;
        log.check(vh.abs() <= 1e-8, format!("{}: Var(H) = {vh:.3e}", cfg.describe()));
        let geo = build_partitioning(&m, PartitionKind::Geo1d { l: 1 })?;
        let (h1, h2) = (&geo.parts()[0], &geo.parts()[1]);
        let (v1, v2) = (variance(h1, psi)?, variance(h2, psi)?);
        let rel = (v1 - v2).abs() / v1.abs().max(v2.abs()).max(f64::MIN_POSITIVE);
        log.check(rel <= 1e-8, format!("  Var(H1) = {v1:.12}, Var(H2) = {v2:.12}, rel diff {rel:.2e}"));
        let c = commutator_expectation(h1, h2, psi)?;
        log.check(c.abs() <= 1e-8, format!("  <[H1,H2]> = {c:.3e}"));
    }
    log.check(evaluated > 0, format!("{evaluated} of 4 instances nondegenerate"));
    Ok(())
}

fn check_bounds(_: &VerifyOptions, log: &mut Log) -> Result<()> {
    let kinds = [
        (PartitionKind::Geo1d { l: 1 }, 3),
        (PartitionKind::Geo1d { l: 2 }, 3),
        (PartitionKind::Geo2d { lx: 2, ly: 2 }, 4),
        (PartitionKind::TwoLocal, 4),
    ];
    let mut compared = 0;
    for cfg in spin_models() {
        for ny in [3, 4] {
            let m = model(cfg, 4, ny, 1)?;
            let applicable: Vec<PartitionKind> = kinds
                .iter()
                .filter(|(_, y)| *y == ny)
                .map(|(k, _)| *k)
                .filter(|&k| match build_partitioning(&m, k) {
                    Ok(_) => true,
                    Err(e) => {
                        log.note(format!("{} {k} on 4x{ny}: not applicable ({e})", cfg.describe()));
                        false
                    }
                })
                .collect();
            if applicable.is_empty() {
                continue;
            }
            let sol = ground_state(&m.hamiltonian, 2)?;
            if sol.degenerate {
                log.note(format!("{} on 4x{ny}: degenerate ground level, skipped", cfg.describe()));
                continue;
            }
            let pauli = build_partitioning(&m, PartitionKind::PauliBaseline)?;
            for k in applicable {
                let p = build_partitioning(&m, k)?;
                let r = eigenstate_improvement(&m, &pauli, &p, &sol)?;
                let Some(bound) = r.bound else {
                    log.check(false, format!("{} {k}: no bound produced", cfg.describe()));
                    continue;
                };
                compared += 1;
                log.check(
                    r.g - bound >= -1e-6,
                    format!(
                        "{} {k} 4x{ny}: g = {:.6}, bound = {bound:.6}, CoR = {}",
                        cfg.describe(),
                        r.g,
                        r.cor_cut.map_or("-".into(), |c| format!("{c:.6}"))
                    ),
                );
            }
        }
    }
    log.check(compared > 0, format!("{compared} bound comparisons"));
    Ok(())
}

fn ising_g(j: f64, h: f64, kind: PartitionKind) -> Result<f64> {
    let m = model(tfim(j, h), 4, 3, 1)?;
    let psi = even_ground_state(&m)?;
    let pauli = build_partitioning(&m, PartitionKind::PauliBaseline)?;
    let geo = build_partitioning(&m, kind)?;
    Ok(relative_complexity(&pauli, &geo, &psi)?.g)
}

fn check_ising_limits(_: &VerifyOptions, log: &mut Log) -> Result<()> {
    let kind = PartitionKind::Geo1d { l: 2 };
    let g1 = ising_g(0.01, 1.0, kind)?;
    let g2 = ising_g(0.005, 1.0, kind)?;
    let (d1, d2) = (g1 - 8.0, g2 - 8.0);
    log.check(
        d1.abs() / 8.0 <= 0.05,
        format!("disordered J/h = 0.01: g = {g1:.6}, |g-8|/8 = {:.4}", d1.abs() / 8.0),
    );
    let halving = d2 / d1;
    log.check(
        (0.375..=0.625).contains(&halving),
        format!("disordered J/h = 0.005: g = {g2:.6}, deviation ratio {halving:.4} (expect 0.5 ± 25%)"),
    );
    let o1 = ising_g(1.0, 0.05, kind)?;
    let o2 = ising_g(1.0, 0.025, kind)?;
    let ratio = o2 / o1;
    log.check(
        (3.4..=4.6).contains(&ratio),
        format!("ordered h/J = 0.05 -> g = {o1:.4}, 0.025 -> g = {o2:.4}, ratio {ratio:.4}"),
    );
    Ok(())
}

struct DivergenceScan {
    etas: Vec<f64>,
    cor: Vec<f64>,
    g: Vec<f64>,
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
}

fn tfxym_scan(nx: usize, ny: usize, points: usize) -> Result<DivergenceScan> {
    let etas: Vec<f64> = (0..points).map(|i| 0.6 + 0.5 * i as f64 / (points - 1) as f64).collect();
    let kind = PartitionKind::Geo1d { l: 1 };
    let mut cor = Vec::new();
    let mut g = Vec::new();
    for &eta in &etas {
        let m = model(ModelConfig::Tfxym { eta, h: 1.0 }, nx, ny, 1)?;
        let sol = ground_state(&m.hamiltonian, 2)?;
        let pauli = build_partitioning(&m, PartitionKind::PauliBaseline)?;
        let geo = build_partitioning(&m, kind)?;
        let cut = make_cut_pair(&m, kind)?;
        cor.push(correlation(&cut.h_cut, &cut.h_cut_prime, sol.ground()).unwrap_or(f64::NAN));
        let r = relative_complexity(&pauli, &geo, sol.ground())?;
        g.push(r.g);
    }
    Ok(DivergenceScan { etas, cor, g })
}

fn check_divergence(opts: &VerifyOptions, log: &mut Log) -> Result<()> {
    let target = 3f64.sqrt() / 2.0;
    let s = tfxym_scan(4, 3, 26)?;
    let step = s.etas[1] - s.etas[0];
    let (ic, ig) = (argmax(&s.cor), argmax(&s.g));
    for i in 0..s.etas.len() {
        log.note(format!("eta = {:.3}: CoR = {:.6}, g = {:.4}", s.etas[i], s.cor[i], s.g[i]));
    }
    log.check(ic == ig, format!("argmax CoR at eta = {:.3}, argmax g at eta = {:.3}", s.etas[ic], s.etas[ig]));
    let nearest = s
        .etas
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let off = ig.abs_diff(nearest);
    log.check(
        off <= 2,
        format!("peak {off} grid steps (step {step:.3}) from the point nearest sqrt(3)/2"),
    );
    if opts.size == VerifySize::Large {
        let l = tfxym_scan(4, 4, 26)?;
        let off_large = argmax(&l.g).abs_diff(nearest);
        log.check(
            off_large <= off,
            format!("4x4 peak {off_large} steps from sqrt(3)/2 (4x3: {off})"),
        );
    }
    Ok(())
}

fn monte_carlo_case(log: &mut Log, tag: &str, ops: &[(String, PauliSum)], psi: &StateVector, seed: u64) -> Result<()> {
    let d = psi.dim() as f64;
    let sums: Vec<PauliSum> = ops.iter().map(|(_, o)| o.clone()).collect();
    for (i, eps) in [0.01, 0.1, 0.5, 0.9].into_iter().enumerate() {
        let cfg = NoiseConfig::new(eps, seed + i as u64, 20_000)?;
        let run = monte_carlo_variances(&sums, psi, &cfg)?;
        for (k, (name, op)) in ops.iter().enumerate() {
            let st = operator_noise_stats(op, psi, name)?;
            let est = run.estimate(k);
            let full = expected_variance(&st, eps, d, false);
            let trunc = expected_variance(&st, eps, d, true);
            let z = (est.mean - full) / est.stderr;
            log.check(
                z.abs() <= 3.0,
                format!("{tag} {name} eps = {eps}: MC {:.6} ± {:.2e}, full form {full:.6}, z = {z:.2}", est.mean, est.stderr),
            );
            let slack = 3.0 * est.stderr + 2.0 * st.second_moment / d;
            log.check(
                (est.mean - trunc).abs() <= slack,
                format!("{tag} {name} eps = {eps}: truncated {trunc:.6}, allowed miss {slack:.2e}"),
            );
        }
    }
    Ok(())
}

fn check_monte_carlo(_: &VerifyOptions, log: &mut Log) -> Result<()> {
    // n = 10 only fits 5x2, where strips of length 2 do not tile; Geo1D(2) is checked on 4x3
    let m = model(tfim(1.0, 1.0), 5, 2, 1)?;
    let psi = ground_state(&m.hamiltonian, 2)?.states.swap_remove(0);
    let pauli = build_partitioning(&m, PartitionKind::PauliBaseline)?;
    let geo = build_partitioning(&m, PartitionKind::Geo1d { l: 1 })?;
    let ops = vec![
        ("H".to_string(), m.hamiltonian.clone()),
        ("pauli[0]".to_string(), pauli.parts()[0].clone()),
        ("geo1d_l1[0]".to_string(), geo.parts()[0].clone()),
    ];
    monte_carlo_case(log, "5x2", &ops, &psi, 11)?;
    let m = model(tfim(1.0, 1.0), 4, 3, 1)?;
    let psi = ground_state(&m.hamiltonian, 2)?.states.swap_remove(0);
    let geo = build_partitioning(&m, PartitionKind::Geo1d { l: 2 })?;
    monte_carlo_case(log, "4x3", &[("geo1d_l2[0]".to_string(), geo.parts()[0].clone())], &psi, 21)
}

fn check_noisy_bounds(_: &VerifyOptions, log: &mut Log) -> Result<()> {
    let m = model(tfim(1.0, 1.0), 4, 3, 1)?;
    let sol = ground_state(&m.hamiltonian, 2)?;
    let psi = sol.ground();
    let d = psi.dim() as f64;
    let pauli = build_partitioning(&m, PartitionKind::PauliBaseline)?;
    let geo = build_partitioning(&m, PartitionKind::Geo1d { l: 2 })?;
    let (sp, sg) = (noise_stats(&pauli, psi)?, noise_stats(&geo, psi)?);
    let h = operator_noise_stats(&m.hamiltonian, psi, "H")?;
    let grid: Vec<f64> = (0..20)
        .map(|i| (1e-4f64.ln() + (0.9f64.ln() - 1e-4f64.ln()) * i as f64 / 19.0).exp())
        .collect();
    let (mut in_lower, mut in_upper) = (0, 0);
    for &eps in &grid {
        let g = ensemble_complexity(&sp, &sg, eps, d, false)?.g;
        let b = corollary3_bounds(&sp, &sg, &h, eps)?;
        let lo_ok = g >= b.lower * (1.0 - 1e-9);
        let up_ok = g <= b.upper * (1.0 + 1e-9);
        in_lower += lo_ok as usize;
        in_upper += up_ok as usize;
        log.check(lo_ok, format!("lower bound at eps = {eps:.3e}: {:.4} <= G = {g:.4}", b.lower));
        log.check(up_ok, format!("upper bound at eps = {eps:.3e}: G = {g:.4} <= {:.4}", b.upper));
    }
    log.note(format!("lower bound held at {in_lower}/20 points, upper at {in_upper}/20"));
    for (name, stats, cap) in [("geo1d_l2", &sg, 2.05), ("pauli", &sp, 3.05)] {
        let boundary = regime_classify(0.5, &stats[0], &h)?.low_boundary;
        let mut tested = 0;
        for &eps in grid.iter().filter(|&&e| e > boundary) {
            tested += 1;
            let g = ensemble_complexity(stats, std::slice::from_ref(&h), eps, d, false)?.g;
            log.check(g <= cap, format!("{name} vs whole H at eps = {eps:.3e}: G = {g:.4} (cap {cap})"));
        }
        log.note(format!("{name}: regime I ends at eps = {boundary:.3e}, {tested} grid points above"));
    }
    let g0 = relative_complexity(&pauli, &geo, psi)?.g;
    let g_small = ensemble_complexity(&sp, &sg, 1e-6, d, false)?.g;
    let rel = (g_small - g0).abs() / g0;
    log.check(rel <= 0.01, format!("eps = 1e-6: G = {g_small:.6} vs eigenstate g = {g0:.6}, rel {rel:.2e}"));
    Ok(())
}

/// Relative miss of the numeric threshold ratio per δ.
fn threshold_misses(log: &mut Log, nx: usize, ny: usize, kind: PartitionKind) -> Result<Vec<Option<f64>>> {
    let m = model(tfim(1.0, 1.0), nx, ny, 1)?;
    let sol = ground_state(&m.hamiltonian, 2)?;
    let psi = sol.ground();
    let d = psi.dim() as f64;
    let pauli = build_partitioning(&m, PartitionKind::PauliBaseline)?;
    let geo = build_partitioning(&m, kind)?;
    let (sp, sg) = (noise_stats(&pauli, psi)?, noise_stats(&geo, psi)?);
    let h = operator_noise_stats(&m.hamiltonian, psi, "H")?;
    let g = relative_complexity(&pauli, &geo, psi)?.g;
    let mut out = Vec::new();
    for delta in [3.0, 5.0, 10.0] {
        let tp = epsilon_threshold(&sp, &h, d, delta)?;
        let tg = epsilon_threshold(&sg, &h, d, delta)?;
        let r = threshold_ratio(&tp, &tg, g);
        let miss = r.numeric.map(|x| (x / r.predicted - 1.0).abs());
        log.note(format!(
            "{nx}x{ny} {kind} delta = {delta}: eps_P = {:?}, eps_geo = {:?}, numeric ratio {:?}, closed ratio {:?}, predicted {:.4}",
            tp.eps_threshold_numeric, tg.eps_threshold_numeric, r.numeric, r.closed, r.predicted
        ));
        out.push(miss);
    }
    Ok(out)
}

fn check_thresholds(_: &VerifyOptions, log: &mut Log) -> Result<()> {
    let deltas = [3.0, 5.0, 10.0];
    let main = threshold_misses(log, 4, 3, PartitionKind::Geo1d { l: 2 })?;
    for (delta, miss) in deltas.iter().zip(&main) {
        log.check(
            miss.is_some_and(|x| x <= 0.25),
            format!("n = 12 geo1d_l2 delta = {delta}: relative miss {miss:?} (allowed 0.25)"),
        );
    }
    // strips of length 2 need an even extent, so the size trend uses Geo1D(1) on 3x3 and 4x3
    let small = threshold_misses(log, 3, 3, PartitionKind::Geo1d { l: 1 })?;
    let big = threshold_misses(log, 4, 3, PartitionKind::Geo1d { l: 1 })?;
    for ((delta, a), b) in deltas.iter().zip(&small).zip(&big) {
        let ok = matches!((a, b), (Some(a), Some(b)) if b < a);
        log.check(ok, format!("shrink geo1d_l1 delta = {delta}: miss n = 9 {a:?} -> n = 12 {b:?}"));
    }
    Ok(())
}

fn check_simulator(_: &VerifyOptions, log: &mut Log) -> Result<()> {
    let m = model(tfim(1.0, 1.0), 4, 3, 1)?;
    let psi = ground_state(&m.hamiltonian, 2)?.states.swap_remove(0);
    let (shots, trials) = (4000u64, 200usize);
    let mut emp = Vec::new();
    for (kind, seed) in [(PartitionKind::PauliBaseline, 101), (PartitionKind::Geo1d { l: 2 }, 202)] {
        let p = build_partitioning(&m, kind)?;
        let run = simulate_estimator(&p, &psi, shots, AllocationMode::Optimal, seed, trials)?;
        let z = compare_predictions(&run, partition_cost(&p, &psi)?, shots)?;
        log.check(
            z.z.abs() <= 3.0,
            format!(
                "{kind}: empirical variance {:.4e}, predicted {:.4e}, z = {:.2}",
                z.empirical_variance, z.predicted_variance, z.z
            ),
        );
        emp.push((run.empirical_variance, partition_cost(&p, &psi)?));
    }
    let r = emp[0].0 / emp[1].0;
    let g = emp[0].1 / emp[1].1;
    let z = (r - g) / (g * (4.0 / (trials as f64 - 1.0)).sqrt());
    log.check(z.abs() <= 3.0, format!("variance ratio {r:.4} vs g = {g:.4}, z = {z:.2}"));
    Ok(())
}

fn oracle_models() -> Result<Vec<Model>> {
    let mut v = Vec::new();
    for cfg in spin_models() {
        v.push(model(cfg, 3, 3, 1)?);
    }
    v.push(model(ModelConfig::SpinlessHubbard { t: 1.0, u: 0.7, mu: 0.3 }, 3, 3, 1)?);
    v.push(model(ModelConfig::Hubbard { t: 1.0, u: 2.0, mu: 0.4 }, 2, 2, 2)?);
    Ok(v)
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The Hubbard Hamiltonians rebuilt from Fock-space ladder operators.
fn fock_hamiltonian(m: &Model) -> Option<DMatrix<Complex64>> {
    let n = m.n_qubits();
    let lat = &m.lattice;
    let (t, u, mu) = match m.config {
        ModelConfig::SpinlessHubbard { t, u, mu } | ModelConfig::Hubbard { t, u, mu } => (t, u, mu),
        _ => return None,
    };
    let d = 1 << n;
    let mut h = DMatrix::<Complex64>::zeros(d, d);
    let cd: Vec<_> = (0..n).map(|j| fock::creation(n, j)).collect();
    let c: Vec<_> = (0..n).map(|j| fock::annihilation(n, j)).collect();
    let num: Vec<_> = (0..n).map(|j| fock::number(n, j)).collect();
    let k = |x: f64| Complex64::new(x, 0.0);
    for e in lat.nn_edges() {
        h += (&cd[e.a] * &c[e.b] + &cd[e.b] * &c[e.a]) * k(-t);
        if matches!(m.config, ModelConfig::SpinlessHubbard { .. }) {
            h += &num[e.a] * &num[e.b] * k(u);
        }
    }
    if matches!(m.config, ModelConfig::Hubbard { .. }) {
        for y in 0..lat.ny() {
            for x in 0..lat.nx() {
                let (a, b) = (lat.site_index(x, y, 0), lat.site_index(x, y, 1));
                h += &num[a] * &num[b] * k(u);
            }
        }
    }
    for nj in &num {
        h += nj * k(-mu);
    }
    Some(h)
}

fn check_oracles(opts: &VerifyOptions, log: &mut Log) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in oracle_models()? {
        let name = format!("{} {}x{}x{}", m.config.describe(), m.lattice.nx(), m.lattice.ny(), m.lattice.layers());
        let n = m.n_qubits();
        let dense = pauli_sum_matrix(&m.hamiltonian);

        let psi = StateVector::random(n, &mut rng, "oracle")?;
        let fast = apply(&m.hamiltonian, &psi)?;
        let slow = &dense * nalgebra::DVector::from_column_slice(psi.amplitudes());
        let diff = fast.amplitudes().iter().zip(slow.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        log.check(diff <= 1e-12, format!("{name}: matrix-free vs dense apply, max diff {diff:.2e}"));

        let exact = ground_state(&m.hamiltonian, 2)?;
        let forced = SolverOptions {
            dense_max_qubits: 0,
            ..SolverOptions::default()
        };
        let lz = ground_state_with(&m.hamiltonian, 2, &forced)?;
        let de = (exact.ground_energy() - lz.ground_energy()).abs() / exact.ground_energy().abs().max(1.0);
        log.check(de <= 1e-9, format!("{name}: dense vs Lanczos E0 rel diff {de:.2e}"));
        if !exact.degenerate {
            let ov = exact.ground().inner(lz.ground())?.norm();
            log.check(ov >= 1.0 - 1e-8, format!("{name}: ground-state overlap {ov:.12}"));
        }

        if let Some(fh) = fock_hamiltonian(&m) {
            let diff = max_abs(&(fh - &dense));
            log.check(diff <= 1e-12, format!("{name}: Jordan-Wigner vs Fock-space H, max diff {diff:.2e}"));
            for (p, q) in m.lattice.nn_edges().iter().map(|e| (e.a, e.b)).take(4) {
                let jw = pauli_sum_matrix(&jordan_wigner(FermionTerm::Hopping(p, q), n)?);
                let fk = fock::creation(n, p) * fock::annihilation(n, q) + fock::creation(n, q) * fock::annihilation(n, p);
                let diff = max_abs(&(jw - fk));
                log.check(diff <= 1e-12, format!("{name}: hopping ({p},{q}) image, max diff {diff:.2e}"));
            }
        }

        let ops = std::iter::once(m.hamiltonian.clone()).chain(
            build_partitioning(&m, PartitionKind::PauliBaseline)?.parts().to_vec(),
        );
        for op in ops {
            let a = pauli_sum_matrix(&op);
            let d = a.nrows() as f64;
            let tr = a.trace().re / d;
            let tr2 = (&a * &a).trace().re / d;
            let via_trace = tr2 - tr * tr;
            let coeffs = op.frobenius_norm_sq_over_d();
            let rel = (via_trace - coeffs).abs() / coeffs.max(1e-300);
            log.check(rel <= 1e-10, format!("{name}: Frobenius {coeffs:.10} vs trace {via_trace:.10}"));
        }

        let psi = exact.ground();
        let mut kinds = vec![PartitionKind::PauliBaseline, PartitionKind::Geo1d { l: 1 }];
        if m.lattice.nx() % 2 == 0 && m.lattice.ny() % 2 == 0 {
            kinds.push(PartitionKind::TwoLocal);
        }
        for kind in kinds {
            let Ok(p) = build_partitioning(&m, kind) else { continue };
            let samplers = build_samplers(&p, psi)?;
            let mut worst: f64 = 0.0;
            for (s, part) in samplers.iter().zip(p.parts()) {
                worst = worst
                    .max((s.mean() - expectation(part, psi)?).abs())
                    .max((s.variance() - variance(part, psi)?).abs());
            }
            log.check(worst <= 1e-9, format!("{name} {kind}: sampler moments vs exact, max diff {worst:.2e}"));

            let rep = validate_partition(&p, &m.hamiltonian);
            log.check(rep.is_clean(1e-12), format!("{name} {kind}: partition validates (residual {:.1e})", rep.residual));
        }

        let pauli = build_partitioning(&m, PartitionKind::PauliBaseline)?;
        let broken = corrupt(&pauli)?;
        let rep = validate_partition(&broken, &m.hamiltonian);
        log.check(!rep.is_clean(1e-12), format!("{name}: corrupted partition rejected (residual {:.2e})", rep.residual));
        if opts.inject_corruption {
            let rep = validate_partition(&broken, &m.hamiltonian);
            log.check(rep.is_clean(1e-12), format!("{name}: injected corrupted partition validates"));
        }
    }
    Ok(())
}

/// Scales the first coefficient of part 0 so the parts no longer sum to `H`.
fn corrupt(p: &Partitioning) -> Result<Partitioning> {
    let mut a = p.parts()[0].clone();
    let first = a.iter().next().map(|(s, c)| (*s, c));
    if let Some((s, c)) = first {
        a.add_term(s, 0.5 * c)?;
    }
    p.with_part_replaced(0, a)
}

fn check_hubbard(_: &VerifyOptions, log: &mut Log) -> Result<()> {
    for u in [0.25, 0.5, 1.0, 2.0] {
        let m = model(ModelConfig::SpinlessHubbard { t: 1.0, u, mu: 0.0 }, 3, 2, 1)?;
        let pauli = build_partitioning(&m, PartitionKind::PauliBaseline)?;
        log.check(pauli.len() == 5, format!("U = {u}: baseline has {} parts", pauli.len()));
        let number = m.number_operator()?.expect("fermionic models conserve number");
        let cn = commutator_norm(&pauli_sum_matrix(&m.hamiltonian), &pauli_sum_matrix(&number));
        log.check(cn <= 1e-10, format!("U = {u}: ||[H, N]|| = {cn:.2e}"));
        let sol: EigenSolution = ground_state(&m.hamiltonian, 2)?;
        let geo = build_partitioning(&m, PartitionKind::Geo1d { l: 1 })?;
        let g = relative_complexity(&pauli, &geo, sol.ground())?.g;
        log.check(
            g >= 1.0,
            format!(
                "U = {u}: g(geo1d_l1) = {g:.4}, <N> = {:.4}, degenerate = {}",
                expectation(&number, sol.ground())?,
                sol.degenerate
            ),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corruption_is_detected_and_injection_fails() {
        let opts = VerifyOptions {
            inject_corruption: true,
            only: vec![9],
            ..Default::default()
        };
        let r = run_verify(&opts);
        assert!(!r.passed);
        assert!(r.checks[0].details.contains("corrupted partition rejected"));
    }

    #[test]
    fn hubbard_structure_passes() {
        let r = run_verify(&VerifyOptions {
            only: vec![10],
            ..Default::default()
        });
        assert!(r.passed, "{}", r.checks[0].details);
    }
}
