//! Measurement partitionings: commuting Pauli groups and geometric patch splits.
//!
//! Every geometric kind is described by one patch map per part (cell -> patch id). A
//! lattice term belongs to a part when all of its cells fall in one patch of that part,
//! and its operator is shared equally among the parts that can hold it. With two shifted
//! strip families this is the familiar `½(H - H_cut + H_cut')` split; with interaction
//! range `r` along the cut direction it needs `r + 1` shifted families.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::lattice::{Direction, Model, ModelTag};
use crate::pauli::{PauliString, PauliSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartitionKind {
    PauliBaseline,
    Geo1d { l: usize },
    Geo2d { lx: usize, ly: usize },
    TwoLocal,
    EigenbasisWhole,
}

impl PartitionKind {
    pub fn label(&self) -> String {
        match self {
            PartitionKind::PauliBaseline => "pauli".into(),
            PartitionKind::Geo1d { l } => format!("geo1d_l{l}"),
            PartitionKind::Geo2d { lx, ly } => format!("geo2d_{lx}x{ly}"),
            PartitionKind::TwoLocal => "two_local".into(),
            PartitionKind::EigenbasisWhole => "whole".into(),
        }
    }

    pub fn is_geometric(&self) -> bool {
        matches!(
            self,
            PartitionKind::Geo1d { .. } | PartitionKind::Geo2d { .. } | PartitionKind::TwoLocal
        )
    }
}

impl fmt::Display for PartitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Accepts `pauli`, `whole`, `two_local`, `geo1d:L` and `geo2d:LXxLY` (and the labels).
impl FromStr for PartitionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || Error::Parse(format!("unknown partition kind {s:?}"));
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        match s.as_str() {
            "pauli" | "pauli_baseline" => return Ok(PartitionKind::PauliBaseline),
            "whole" | "eigenbasis_whole" => return Ok(PartitionKind::EigenbasisWhole),
            "two_local" | "twolocal" => return Ok(PartitionKind::TwoLocal),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("geo1d:").or_else(|| s.strip_prefix("geo1d_l")) {
            return Ok(PartitionKind::Geo1d { l: num(rest)? });
        }
        if let Some(rest) = s.strip_prefix("geo2d:").or_else(|| s.strip_prefix("geo2d_")) {
            let (a, b) = rest.split_once('x').ok_or_else(bad)?;
            return Ok(PartitionKind::Geo2d { lx: num(a)?, ly: num(b)? });
        }
        Err(bad())
    }
}

/// Ordered list of parts summing to a Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct Partitioning {
    kind: PartitionKind,
    label: String,
    parts: Vec<PauliSum>,
    /// Per part, disjoint site sets. Empty for non-geometric kinds.
    patches: Vec<Vec<Vec<usize>>>,
    /// False when patches describe fermionic modes whose Jordan–Wigner strings leave the patch.
    qubit_local: bool,
}

impl Partitioning {
    pub fn from_parts(kind: PartitionKind, label: impl Into<String>, parts: Vec<PauliSum>) -> Result<Self> {
        Self::with_patches(kind, label, parts, Vec::new(), true)
    }

    pub fn with_patches(
        kind: PartitionKind,
        label: impl Into<String>,
        parts: Vec<PauliSum>,
        patches: Vec<Vec<Vec<usize>>>,
        qubit_local: bool,
    ) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Partition("a partitioning needs at least one part".into()))?;
        for p in &parts {
            check_dims(first.n_qubits(), p.n_qubits())?;
        }
        if !patches.is_empty() && patches.len() != parts.len() {
            return Err(Error::Partition(format!(
                "{} patch lists for {} parts",
                patches.len(),
                parts.len()
            )));
        }
        Ok(Partitioning {
            kind,
            label: label.into(),
            parts,
            patches,
            qubit_local,
        })
    }

    /// `H` as a single part measured in its own eigenbasis.
    pub fn whole(h: &PauliSum) -> Self {
        Partitioning {
            kind: PartitionKind::EigenbasisWhole,
            label: PartitionKind::EigenbasisWhole.label(),
            parts: vec![h.clone()],
            patches: vec![vec![(0..h.n_qubits()).collect()]],
            qubit_local: true,
        }
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn parts(&self) -> &[PauliSum] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn patches(&self) -> &[Vec<Vec<usize>>] {
        &self.patches
    }

    pub fn qubit_local(&self) -> bool {
        self.qubit_local
    }

    pub fn n_qubits(&self) -> usize {
        self.parts[0].n_qubits()
    }

    pub fn total(&self) -> PauliSum {
        self.parts
            .iter()
            .skip(1)
            .fold(self.parts[0].clone(), |acc, p| acc.add(p).expect("dimensions checked at construction"))
    }

    /// Replaces one part; used to build negative controls.
    pub fn with_part_replaced(&self, index: usize, part: PauliSum) -> Result<Self> {
        if index >= self.parts.len() {
            return Err(Error::InvalidArgument(format!("part {index} out of range")));
        }
        check_dims(self.n_qubits(), part.n_qubits())?;
        let mut out = self.clone();
        out.parts[index] = part;
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutPair {
    pub h_cut: PauliSum,
    pub h_cut_prime: PauliSum,
}

fn letter_class(p: &PauliString) -> Option<char> {
    match (p.x_mask(), p.z_mask()) {
        (0, 0) => None,
        (0, _) => Some('Z'),
        (_, 0) => Some('X'),
        (x, z) if x == z => Some('Y'),
        _ => Some('?'),
    }
}

fn commuting_violations(part: &PauliSum, index: usize, out: &mut Vec<String>) {
    let strings: Vec<&PauliString> = part.iter().map(|(p, _)| p).collect();
    for (i, a) in strings.iter().enumerate() {
        for b in &strings[i + 1..] {
            if !a.commutes_unchecked(b) {
                out.push(format!("part {index}: {a} and {b} anticommute"));
            }
        }
    }
}

fn greedy_groups(h: &PauliSum) -> Vec<PauliSum> {
    let mut terms: Vec<(PauliString, f64)> = h.iter().map(|(p, c)| (*p, c)).collect();
    terms.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    let mut groups: Vec<Vec<(PauliString, f64)>> = Vec::new();
    for (p, c) in terms {
        match groups.iter_mut().find(|g| g.iter().all(|(q, _)| q.commutes_unchecked(&p))) {
            Some(g) => g.push((p, c)),
            None => groups.push(vec![(p, c)]),
        }
    }
    groups
        .into_iter()
        .map(|g| PauliSum::from_terms(h.n_qubits(), g).expect("same qubit count"))
        .collect()
}

fn letter_groups(h: &PauliSum, order: &[char]) -> Result<Vec<PauliSum>> {
    let n = h.n_qubits();
    let mut groups = vec![PauliSum::new(n); order.len()];
    for (p, c) in h.iter() {
        let k = match letter_class(p) {
            None => 0,
            Some(l) => order.iter().position(|&o| o == l).ok_or_else(|| {
                Error::Partition(format!("string {p} does not fit the model's baseline grouping"))
            })?,
        };
        groups[k].add_term(*p, c)?;
    }
    Ok(groups.into_iter().filter(|g| !g.is_empty()).collect())
}

/// Hopping bonds grouped per direction into sets with disjoint modes; all diagonal
/// terms in one final group.
fn fermion_groups(model: &Model) -> Result<Vec<PauliSum>> {
    let n = model.n_qubits();
    let mut diagonal = PauliSum::new(n);
    let mut by_dir: Vec<Vec<(u64, PauliSum)>> = vec![Vec::new(), Vec::new()];
    for t in &model.terms {
        if t.op.is_diagonal() {
            diagonal = diagonal.add(&t.op)?;
            continue;
        }
        let modes = t.op.iter().fold(0u64, |acc, (p, _)| acc | p.x_mask());
        let d = match t.direction() {
            Some(Direction::X) => 0,
            Some(Direction::Y) => 1,
            None => {
                return Err(Error::Partition("on-site hopping term has no direction".into()));
            }
        };
        let groups = &mut by_dir[d];
        match groups.iter_mut().find(|(used, _)| used & modes == 0) {
            Some((used, sum)) => {
                *used |= modes;
                *sum = sum.add(&t.op)?;
            }
            None => groups.push((modes, t.op.clone())),
        }
    }
    let mut out: Vec<PauliSum> = by_dir.into_iter().flatten().map(|(_, s)| s).collect();
    if !diagonal.is_empty() {
        out.push(diagonal);
    }
    Ok(out)
}

/// Mutually commuting groups. With a model, the model's own grouping is used
/// (`{ZZ},{X}` for the Ising models, `{XX},{YY},{Z}` for the XY models, disjoint hopping
/// groups plus one diagonal group for the fermionic models); otherwise first-fit by
/// descending `|c|`.
pub fn pauli_baseline(h: &PauliSum, hint: Option<&Model>) -> Result<Partitioning> {
    let parts = match hint {
        None => greedy_groups(h),
        Some(model) => {
            check_dims(model.n_qubits(), h.n_qubits())?;
            if model.hamiltonian.max_abs_diff(h)? > 1e-12 {
                return Err(Error::Partition("hint model does not match the Hamiltonian".into()));
            }
            match model.tag() {
                ModelTag::Tfim | ModelTag::Bnnni => letter_groups(h, &['Z', 'X'])?,
                ModelTag::Tfxym | ModelTag::Hcbh => letter_groups(h, &['X', 'Y', 'Z'])?,
                ModelTag::SpinlessHubbard | ModelTag::Hubbard => fermion_groups(model)?,
            }
        }
    };
    let mut violations = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        commuting_violations(p, i, &mut violations);
    }
    if let Some(v) = violations.first() {
        return Err(Error::Partition(format!("baseline group is not commuting: {v}")));
    }
    if parts.is_empty() {
        return Partitioning::from_parts(PartitionKind::PauliBaseline, "pauli", vec![PauliSum::new(h.n_qubits())]);
    }
    Partitioning::from_parts(PartitionKind::PauliBaseline, "pauli", parts)
}

/// One patch map per part: cell index `x + nx*y` -> patch id.
fn patch_maps(model: &Model, kind: PartitionKind) -> Result<Vec<Vec<usize>>> {
    let lat = &model.lattice;
    let (nx, ny) = (lat.nx(), lat.ny());
    let (rx, ry) = model.interaction_range();
    let cells = || (0..ny).flat_map(move |y| (0..nx).map(move |x| (x, y)));
    let map = |f: &dyn Fn(usize, usize) -> usize| cells().map(|(x, y)| f(x, y)).collect::<Vec<usize>>();
    let strip_check = |axis: &str, n: usize, l: usize, r: usize| -> Result<()> {
        if l == 0 {
            return Err(Error::Partition("patch length must be positive".into()));
        }
        if n % l != 0 {
            return Err(Error::Partition(format!(
                "{axis} extent {n} is not divisible by patch length {l}"
            )));
        }
        if n / l < 2 {
            return Err(Error::Partition(format!(
                "patch length {l} leaves fewer than two patches along {axis} (extent {n})"
            )));
        }
        if l <= r {
            return Err(Error::Partition(format!(
                "interaction range {r} along {axis} does not fit patches of length {l}; \
                 terms would cross the seams of every part"
            )));
        }
        Ok(())
    };
    match kind {
        PartitionKind::Geo1d { l: 1 } => Ok(vec![map(&|x, _| x), map(&|_, y| y)]),
        PartitionKind::Geo1d { l } => {
            strip_check("x", nx, l, rx)?;
            let shifts = rx.max(1) + 1;
            Ok((0..shifts).map(|k| map(&|x, _| ((x + k) % nx) / l)).collect())
        }
        PartitionKind::Geo2d { lx, ly } => {
            let r = rx.max(ry).max(1);
            strip_check("x", nx, lx, r)?;
            strip_check("y", ny, ly, r)?;
            let px = nx / lx;
            Ok((0..=r)
                .map(|k| map(&|x, y| ((x + k) % nx) / lx + px * (((y + k) % ny) / ly)))
                .collect())
        }
        PartitionKind::TwoLocal => {
            if nx % 2 != 0 || ny % 2 != 0 {
                return Err(Error::Partition(format!("two-local dominoes need even extents, got {nx}x{ny}")));
            }
            if rx.max(ry) > 1 {
                return Err(Error::Partition(
                    "two-local partitioning needs a nearest-neighbour model".into(),
                ));
            }
            let hx = nx / 2;
            Ok(vec![
                map(&|x, y| x / 2 + hx * y),
                map(&|x, y| ((x + 1) % nx) / 2 + hx * y),
                map(&|x, y| x + nx * (y / 2)),
                map(&|x, y| x + nx * (((y + 1) % ny) / 2)),
            ])
        }
        other => Err(Error::Partition(format!("{other} is not a geometric partitioning"))),
    }
}

fn inside(map: &[usize], nx: usize, cells: &[(usize, usize)]) -> bool {
    let id = |(x, y): (usize, usize)| map[x + nx * y];
    cells.iter().all(|&c| id(c) == id(cells[0]))
}

/// Bonds cut in the first and in the second part of a two-part geometric partitioning.
pub fn make_cut_pair(model: &Model, kind: PartitionKind) -> Result<CutPair> {
    if !matches!(kind, PartitionKind::Geo1d { .. } | PartitionKind::Geo2d { .. }) {
        return Err(Error::Partition(format!("{kind} has no cut pair")));
    }
    let maps = patch_maps(model, kind)?;
    if maps.len() != 2 {
        return Err(Error::Partition(format!(
            "{kind} has {} parts for this model; a cut pair needs exactly two",
            maps.len()
        )));
    }
    let nx = model.lattice.nx();
    let n = model.n_qubits();
    let mut h_cut = PauliSum::new(n);
    let mut h_cut_prime = PauliSum::new(n);
    for t in model.terms.iter().filter(|t| !t.is_on_site()) {
        if !inside(&maps[0], nx, &t.cells) {
            h_cut = h_cut.add(&t.op)?;
        }
        if !inside(&maps[1], nx, &t.cells) {
            h_cut_prime = h_cut_prime.add(&t.op)?;
        }
    }
    Ok(CutPair { h_cut, h_cut_prime })
}

pub fn geometric_partition(model: &Model, kind: PartitionKind) -> Result<Partitioning> {
    let maps = patch_maps(model, kind)?;
    let lat = &model.lattice;
    let nx = lat.nx();
    let n = model.n_qubits();
    let mut parts = vec![PauliSum::new(n); maps.len()];
    for t in &model.terms {
        let homes: Vec<usize> = (0..maps.len()).filter(|&k| inside(&maps[k], nx, &t.cells)).collect();
        if homes.is_empty() {
            return Err(Error::Partition(format!(
                "term on cells {:?} crosses a seam in every part of {kind}",
                t.cells
            )));
        }
        let share = t.op.scaled(1.0 / homes.len() as f64);
        for k in homes {
            parts[k] = parts[k].add(&share)?;
        }
    }
    let patches: Vec<Vec<Vec<usize>>> = maps
        .iter()
        .map(|m| {
            let mut by_id: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for layer in 0..lat.layers() {
                for y in 0..lat.ny() {
                    for x in 0..nx {
                        by_id.entry(m[x + nx * y]).or_default().push(lat.site_index(x, y, layer));
                    }
                }
            }
            by_id
                .into_values()
                .map(|mut v| {
                    v.sort_unstable();
                    v
                })
                .collect()
        })
        .collect();
    let qubit_local = !model.tag().is_fermionic();
    let p = Partitioning::with_patches(kind, kind.label(), parts, patches, qubit_local)?;
    if qubit_local {
        let mut v = Vec::new();
        patch_violations(&p, &mut v);
        if let Some(first) = v.first() {
            return Err(Error::Partition(format!("internal patch inconsistency: {first}")));
        }
    }
    Ok(p)
}

/// Dispatches on `kind`.
pub fn build_partitioning(model: &Model, kind: PartitionKind) -> Result<Partitioning> {
    match kind {
        PartitionKind::PauliBaseline => pauli_baseline(&model.hamiltonian, Some(model)),
        PartitionKind::EigenbasisWhole => Ok(Partitioning::whole(&model.hamiltonian)),
        _ => geometric_partition(model, kind),
    }
}

fn patch_violations(p: &Partitioning, out: &mut Vec<String>) {
    for (k, (part, patches)) in p.parts.iter().zip(&p.patches).enumerate() {
        let masks: Vec<u64> = patches.iter().map(|s| s.iter().fold(0u64, |m, &q| m | 1 << q)).collect();
        for i in 0..masks.len() {
            for j in i + 1..masks.len() {
                if masks[i] & masks[j] != 0 {
                    out.push(format!("part {k}: patches {i} and {j} overlap"));
                }
            }
        }
        if !p.qubit_local {
            continue;
        }
        for (s, _) in part.iter() {
            let sup = s.support();
            if sup != 0 && !masks.iter().any(|m| sup & !m == 0) {
                out.push(format!("part {k}: {s} is not inside a single patch"));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionReport {
    /// `max_P |Σ_b c_P(part_b) - c_P(H)|`
    pub residual: f64,
    pub commutation_violations: Vec<String>,
    pub patch_violations: Vec<String>,
}

impl PartitionReport {
    pub fn is_clean(&self, tol: f64) -> bool {
        self.residual <= tol && self.commutation_violations.is_empty() && self.patch_violations.is_empty()
    }
}

pub fn validate_partition(p: &Partitioning, h: &PauliSum) -> PartitionReport {
    let residual = p.total().max_abs_diff(h).unwrap_or(f64::INFINITY);
    let mut commutation_violations = Vec::new();
    if p.kind == PartitionKind::PauliBaseline {
        for (i, part) in p.parts.iter().enumerate() {
            commuting_violations(part, i, &mut commutation_violations);
        }
    }
    let mut pv = Vec::new();
    if !p.patches.is_empty() {
        patch_violations(p, &mut pv);
    }
    PartitionReport {
        residual,
        commutation_violations,
        patch_violations: pv,
    }
}

#[derive(Serialize)]
struct ManifestPart<'a> {
    file: String,
    n_terms: usize,
    patches: &'a [Vec<usize>],
}

#[derive(Serialize)]
struct Manifest<'a> {
    kind: PartitionKind,
    label: &'a str,
    n_qubits: usize,
    qubit_local: bool,
    parts: Vec<ManifestPart<'a>>,
}

/// Writes `part_<k>.txt` per part in the Pauli text format and a `manifest.json`.
pub fn export_partitioning(p: &Partitioning, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut parts = Vec::new();
    for (k, part) in p.parts.iter().enumerate() {
        let file = format!("part_{k}.txt");
        std::fs::write(dir.join(&file), part.to_text())?;
        parts.push(ManifestPart {
            file,
            n_terms: part.len(),
            patches: p.patches.get(k).map(|v| v.as_slice()).unwrap_or(&[]),
        });
    }
    let manifest = Manifest {
        kind: p.kind,
        label: &p.label,
        n_qubits: p.n_qubits(),
        qubit_local: p.qubit_local,
        parts,
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}
