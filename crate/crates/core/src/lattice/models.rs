use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, PauliSum};

use super::fermion::{jordan_wigner, number_operator, FermionTerm};
use super::geometry::{Direction, Edge, Lattice};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Tfxym,
    Tfim,
    Bnnni,
    Hcbh,
    SpinlessHubbard,
    Hubbard,
}

impl ModelTag {
    pub fn name(self) -> &'static str {
        match self {
            ModelTag::Tfxym => "tfxym",
            ModelTag::Tfim => "tfim",
            ModelTag::Bnnni => "bnnni",
            ModelTag::Hcbh => "hcbh",
            ModelTag::SpinlessHubbard => "spinless_hubbard",
            ModelTag::Hubbard => "hubbard",
        }
    }

    pub fn is_fermionic(self) -> bool {
        matches!(self, ModelTag::SpinlessHubbard | ModelTag::Hubbard)
    }
}

/// Model and couplings. Unknown coupling names are rejected on deserialization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Tfxym { eta: f64, h: f64 },
    Tfim { j: f64, h: f64 },
    Bnnni { j: f64, kappa: f64, h: f64 },
    Hcbh { j: f64, h: f64 },
    SpinlessHubbard { t: f64, u: f64, mu: f64 },
    Hubbard { t: f64, u: f64, mu: f64 },
}

impl ModelConfig {
    pub fn tag(&self) -> ModelTag {
        match self {
            ModelConfig::Tfxym { .. } => ModelTag::Tfxym,
            ModelConfig::Tfim { .. } => ModelTag::Tfim,
            ModelConfig::Bnnni { .. } => ModelTag::Bnnni,
            ModelConfig::Hcbh { .. } => ModelTag::Hcbh,
            ModelConfig::SpinlessHubbard { .. } => ModelTag::SpinlessHubbard,
            ModelConfig::Hubbard { .. } => ModelTag::Hubbard,
        }
    }

    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            ModelConfig::Tfxym { eta, h } => vec![("eta", eta), ("h", h)],
            ModelConfig::Tfim { j, h } => vec![("j", j), ("h", h)],
            ModelConfig::Bnnni { j, kappa, h } => vec![("j", j), ("kappa", kappa), ("h", h)],
            ModelConfig::Hcbh { j, h } => vec![("j", j), ("h", h)],
            ModelConfig::SpinlessHubbard { t, u, mu } | ModelConfig::Hubbard { t, u, mu } => {
                vec![("t", t), ("u", u), ("mu", mu)]
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.parameters().into_iter().find(|(k, _)| *k == name).map(|(_, v)| v)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match (self, name) {
            (ModelConfig::Tfxym { eta, .. }, "eta") => eta,
            (ModelConfig::Tfxym { h, .. }, "h")
            | (ModelConfig::Tfim { h, .. }, "h")
            | (ModelConfig::Bnnni { h, .. }, "h")
            | (ModelConfig::Hcbh { h, .. }, "h") => h,
            (ModelConfig::Tfim { j, .. }, "j") | (ModelConfig::Bnnni { j, .. }, "j") | (ModelConfig::Hcbh { j, .. }, "j") => j,
            (ModelConfig::Bnnni { kappa, .. }, "kappa") => kappa,
            (ModelConfig::SpinlessHubbard { t, .. }, "t") | (ModelConfig::Hubbard { t, .. }, "t") => t,
            (ModelConfig::SpinlessHubbard { u, .. }, "u") | (ModelConfig::Hubbard { u, .. }, "u") => u,
            (ModelConfig::SpinlessHubbard { mu, .. }, "mu") | (ModelConfig::Hubbard { mu, .. }, "mu") => mu,
            (m, other) => {
                return Err(Error::Config(format!("model {} has no parameter {other:?}", m.tag().name())));
            }
        };
        *slot = value;
        Ok(())
    }

    /// Short description used in provenance strings and CSV rows.
    pub fn describe(&self) -> String {
        let params: Vec<String> = self.parameters().iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.tag().name(), params.join(","))
    }

    pub fn build(&self, lat: &Lattice) -> Result<Model> {
        let terms = match *self {
            ModelConfig::Tfxym { eta, h } => tfxym_terms(lat, eta, h)?,
            ModelConfig::Tfim { j, h } => bnnni_terms(lat, j, 0.0, h, false)?,
            ModelConfig::Bnnni { j, kappa, h } => bnnni_terms(lat, j, kappa, h, true)?,
            ModelConfig::Hcbh { j, h } => hcbh_terms(lat, j, h)?,
            ModelConfig::SpinlessHubbard { t, u, mu } => spinless_hubbard_terms(lat, t, u, mu)?,
            ModelConfig::Hubbard { t, u, mu } => hubbard_terms(lat, t, u, mu)?,
        };
        let mut hamiltonian = PauliSum::new(lat.n_sites());
        for t in &terms {
            hamiltonian = hamiltonian.add(&t.op)?;
        }
        Ok(Model {
            config: *self,
            lattice: lat.clone(),
            terms,
            hamiltonian,
        })
    }
}

/// One geometric piece of a Hamiltonian: an operator together with the lattice cells it
/// acts on. Partitioning decides by `cells`, not by the operator's qubit support, so
/// Jordan–Wigner strings do not count as extent.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeTerm {
    /// `(x, y)` cells covered, endpoints and everything in between.
    pub cells: Vec<(usize, usize)>,
    /// Extent `(dx, dy)` in cells; `(0, 0)` for on-site terms.
    pub extent: (usize, usize),
    pub op: PauliSum,
}

impl LatticeTerm {
    pub fn is_on_site(&self) -> bool {
        self.extent == (0, 0)
    }

    pub fn direction(&self) -> Option<Direction> {
        match self.extent {
            (0, 0) => None,
            (_, 0) => Some(Direction::X),
            _ => Some(Direction::Y),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Model {
    pub config: ModelConfig,
    pub lattice: Lattice,
    pub terms: Vec<LatticeTerm>,
    pub hamiltonian: PauliSum,
}

impl Model {
    pub fn tag(&self) -> ModelTag {
        self.config.tag()
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    /// Largest term extent along x and along y.
    pub fn interaction_range(&self) -> (usize, usize) {
        self.terms
            .iter()
            .fold((0, 0), |(ax, ay), t| (ax.max(t.extent.0), ay.max(t.extent.1)))
    }

    /// Particle number for the models that conserve it.
    pub fn number_operator(&self) -> Result<Option<PauliSum>> {
        let n = self.n_qubits();
        match self.tag() {
            ModelTag::Hcbh => {
                // boson occupation is (1 + Z)/2 in the spin form
                let mut s = PauliSum::identity(n, 0.5 * n as f64);
                for q in 0..n {
                    s.add_term(PauliString::single(n, q, Letter::Z)?, 0.5)?;
                }
                s.prune();
                Ok(Some(s))
            }
            ModelTag::SpinlessHubbard | ModelTag::Hubbard => Ok(Some(number_operator(n)?)),
            _ => Ok(None),
        }
    }
}

fn require_single_layer(lat: &Lattice, model: &str) -> Result<()> {
    if lat.layers() != 1 {
        return Err(Error::Model(format!("{model} needs a single-layer lattice")));
    }
    Ok(())
}

fn edge_cells(lat: &Lattice, e: &Edge) -> (Vec<(usize, usize)>, (usize, usize)) {
    let cells = (0..=e.span)
        .map(|k| match e.dir {
            Direction::X => ((e.x + k) % lat.nx(), e.y),
            Direction::Y => (e.x, (e.y + k) % lat.ny()),
        })
        .collect();
    let extent = match e.dir {
        Direction::X => (e.span, 0),
        Direction::Y => (0, e.span),
    };
    (cells, extent)
}

fn pair(n: usize, a: usize, b: usize, l: Letter) -> Result<PauliString> {
    PauliString::from_ops(n, &[(a, l), (b, l)])
}

fn push_nonzero(out: &mut Vec<LatticeTerm>, cells: Vec<(usize, usize)>, extent: (usize, usize), op: PauliSum) {
    if !op.is_empty() {
        out.push(LatticeTerm { cells, extent, op });
    }
}

fn bond_terms<F>(lat: &Lattice, edges: &[Edge], out: &mut Vec<LatticeTerm>, mut op: F) -> Result<()>
where
    F: FnMut(&Edge) -> Result<PauliSum>,
{
    for e in edges {
        let (cells, extent) = edge_cells(lat, e);
        push_nonzero(out, cells, extent, op(e)?);
    }
    Ok(())
}

fn field_terms(lat: &Lattice, letter: Letter, coeff: f64, out: &mut Vec<LatticeTerm>) -> Result<()> {
    let n = lat.n_sites();
    for s in 0..n {
        let (x, y, _) = lat.coords(s);
        let op = PauliSum::from_terms(n, [(PauliString::single(n, s, letter)?, coeff)])?;
        push_nonzero(out, vec![(x, y)], (0, 0), op);
    }
    Ok(())
}

fn tfxym_terms(lat: &Lattice, eta: f64, h: f64) -> Result<Vec<LatticeTerm>> {
    require_single_layer(lat, "TFXYM")?;
    let n = lat.n_sites();
    let mut out = Vec::new();
    bond_terms(lat, lat.nn_edges(), &mut out, |e| {
        PauliSum::from_terms(
            n,
            [
                (pair(n, e.a, e.b, Letter::X)?, -0.5 * (1.0 + eta)),
                (pair(n, e.a, e.b, Letter::Y)?, -0.5 * (1.0 - eta)),
            ],
        )
    })?;
    field_terms(lat, Letter::Z, -h, &mut out)?;
    Ok(out)
}

fn bnnni_terms(lat: &Lattice, j: f64, kappa: f64, h: f64, nnn: bool) -> Result<Vec<LatticeTerm>> {
    require_single_layer(lat, if nnn { "BNNNI" } else { "TFIM" })?;
    if nnn && (lat.nx() < 3 || lat.ny() < 3) {
        return Err(Error::Model(format!(
            "BNNNI needs at least 3 sites per direction for distinct axial next-nearest bonds, got {}x{}",
            lat.nx(),
            lat.ny()
        )));
    }
    let n = lat.n_sites();
    let mut out = Vec::new();
    bond_terms(lat, lat.nn_edges(), &mut out, |e| {
        PauliSum::from_terms(n, [(pair(n, e.a, e.b, Letter::Z)?, -j)])
    })?;
    if nnn {
        bond_terms(lat, lat.nnn_axial_edges(), &mut out, |e| {
            PauliSum::from_terms(n, [(pair(n, e.a, e.b, Letter::Z)?, j * kappa)])
        })?;
    }
    field_terms(lat, Letter::X, -h, &mut out)?;
    Ok(out)
}

fn hcbh_terms(lat: &Lattice, j: f64, h: f64) -> Result<Vec<LatticeTerm>> {
    require_single_layer(lat, "HCBH")?;
    let n = lat.n_sites();
    let mut out = Vec::new();
    bond_terms(lat, lat.nn_edges(), &mut out, |e| {
        PauliSum::from_terms(
            n,
            [
                (pair(n, e.a, e.b, Letter::X)?, -0.5 * j),
                (pair(n, e.a, e.b, Letter::Y)?, -0.5 * j),
            ],
        )
    })?;
    field_terms(lat, Letter::Z, 0.5 * h, &mut out)?;
    Ok(out)
}

fn fermion_bonds(lat: &Lattice, t: f64, u: f64, out: &mut Vec<LatticeTerm>) -> Result<()> {
    let n = lat.n_sites();
    bond_terms(lat, lat.nn_edges(), out, |e| {
        Ok(jordan_wigner(FermionTerm::Hopping(e.a, e.b), n)?.scaled(-t))
    })?;
    if u != 0.0 {
        bond_terms(lat, lat.nn_edges(), out, |e| {
            Ok(jordan_wigner(FermionTerm::NumberPair(e.a, e.b), n)?.scaled(u))
        })?;
    }
    Ok(())
}

fn chemical_terms(lat: &Lattice, mu: f64, out: &mut Vec<LatticeTerm>) -> Result<()> {
    let n = lat.n_sites();
    for s in 0..n {
        let (x, y, _) = lat.coords(s);
        push_nonzero(out, vec![(x, y)], (0, 0), jordan_wigner(FermionTerm::Number(s), n)?.scaled(-mu));
    }
    Ok(())
}

fn spinless_hubbard_terms(lat: &Lattice, t: f64, u: f64, mu: f64) -> Result<Vec<LatticeTerm>> {
    require_single_layer(lat, "spinless Hubbard")?;
    let mut out = Vec::new();
    fermion_bonds(lat, t, u, &mut out)?;
    chemical_terms(lat, mu, &mut out)?;
    Ok(out)
}

fn hubbard_terms(lat: &Lattice, t: f64, u: f64, mu: f64) -> Result<Vec<LatticeTerm>> {
    if lat.layers() != 2 {
        return Err(Error::Model("the spinful Hubbard model needs a two-layer lattice (up, down)".into()));
    }
    let n = lat.n_sites();
    let mut out = Vec::new();
    // layer 0 holds the up modes, layer 1 the down modes, so up modes precede down modes
    fermion_bonds(lat, t, 0.0, &mut out)?;
    for y in 0..lat.ny() {
        for x in 0..lat.nx() {
            let up = lat.site_index(x, y, 0);
            let down = lat.site_index(x, y, 1);
            push_nonzero(
                &mut out,
                vec![(x, y)],
                (0, 0),
                jordan_wigner(FermionTerm::NumberPair(up, down), n)?.scaled(u),
            );
        }
    }
    chemical_terms(lat, mu, &mut out)?;
    Ok(out)
}

pub fn build_tfxym(lat: &Lattice, eta: f64, h: f64) -> Result<PauliSum> {
    Ok(ModelConfig::Tfxym { eta, h }.build(lat)?.hamiltonian)
}

pub fn build_tfim(lat: &Lattice, j: f64, h: f64) -> Result<PauliSum> {
    Ok(ModelConfig::Tfim { j, h }.build(lat)?.hamiltonian)
}

pub fn build_bnnni(lat: &Lattice, j: f64, kappa: f64, h: f64) -> Result<PauliSum> {
    Ok(ModelConfig::Bnnni { j, kappa, h }.build(lat)?.hamiltonian)
}

pub fn build_hcbh(lat: &Lattice, j: f64, h: f64) -> Result<PauliSum> {
    Ok(ModelConfig::Hcbh { j, h }.build(lat)?.hamiltonian)
}

pub fn build_spinless_hubbard(lat: &Lattice, t: f64, u: f64, mu: f64) -> Result<PauliSum> {
    Ok(ModelConfig::SpinlessHubbard { t, u, mu }.build(lat)?.hamiltonian)
}

pub fn build_hubbard(lat: &Lattice, t: f64, u: f64, mu: f64) -> Result<PauliSum> {
    Ok(ModelConfig::Hubbard { t, u, mu }.build(lat)?.hamiltonian)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;

    fn count(h: &PauliSum, pred: impl Fn(&PauliString) -> bool) -> usize {
        h.iter().filter(|(p, _)| pred(p)).count()
    }

    #[test]
    fn tfxym_counts_and_isotropic_limit() {
        let lat = build_lattice(3, 3, 1, true).unwrap();
        let h = build_tfxym(&lat, 0.5, 1.0).unwrap();
        assert_eq!(h.len(), 18 + 18 + 9);
        let h1 = build_tfxym(&lat, 1.0, 0.3).unwrap();
        assert_eq!(count(&h1, |p| p.y_count() == 2), 0);
        assert!(h1.iter().filter(|(p, _)| p.weight() == 2).all(|(_, c)| c == -1.0));
    }

    #[test]
    fn tfxym_at_zero_anisotropy_is_hcbh() {
        let lat = build_lattice(3, 2, 1, true).unwrap();
        let a = build_tfxym(&lat, 0.0, 0.7).unwrap();
        let b = build_hcbh(&lat, 1.0, -1.4).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-15);
    }

    #[test]
    fn bnnni_reduces_to_tfim() {
        let lat = build_lattice(4, 3, 1, true).unwrap();
        assert_eq!(build_bnnni(&lat, 1.0, 0.0, 0.8).unwrap(), build_tfim(&lat, 1.0, 0.8).unwrap());
        let big = build_lattice(4, 6, 1, true).unwrap();
        let h = build_bnnni(&big, 1.0, 0.3, 1.0).unwrap();
        // on a ring of 4 the +2 neighbour is reached both ways, so those 24 bonds
        // collapse onto 12 strings with doubled coefficient
        assert_eq!(h.len(), 48 + 12 + 24 + 24);
        let doubled = h.iter().filter(|(_, c)| (c - 0.6).abs() < 1e-15).count();
        assert_eq!(doubled, 12);
        assert!(build_bnnni(&build_lattice(4, 2, 1, true).unwrap(), 1.0, 0.3, 1.0).is_err());
    }

    #[test]
    fn layered_lattices_rejected_for_spin_models() {
        let lat = build_lattice(2, 2, 2, true).unwrap();
        assert!(build_tfim(&lat, 1.0, 1.0).is_err());
        assert!(build_spinless_hubbard(&lat, 1.0, 1.0, 0.0).is_err());
        assert!(build_hubbard(&build_lattice(2, 2, 1, true).unwrap(), 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn fermionic_diagonal_limits() {
        let lat = build_lattice(3, 2, 1, true).unwrap();
        assert!(build_spinless_hubbard(&lat, 0.0, 1.0, 0.5).unwrap().is_diagonal());
        let lat2 = build_lattice(2, 2, 2, true).unwrap();
        assert!(build_hubbard(&lat2, 0.0, 2.0, 0.0).unwrap().is_diagonal());
    }

    #[test]
    fn config_parameters() {
        let mut c = ModelConfig::Bnnni { j: 1.0, kappa: 0.3, h: 1.0 };
        c.set("kappa", 0.6).unwrap();
        assert_eq!(c.get("kappa"), Some(0.6));
        assert!(c.set("eta", 1.0).is_err());
        let parsed: ModelConfig = serde_json::from_str(r#"{"model":"tfim","j":1.0,"h":2.0}"#).unwrap();
        assert_eq!(parsed, ModelConfig::Tfim { j: 1.0, h: 2.0 });
        assert!(serde_json::from_str::<ModelConfig>(r#"{"model":"tfim","j":1.0,"h":2.0,"eta":1}"#).is_err());
        assert!(serde_json::from_str::<ModelConfig>(r#"{"model":"tfim","j":1.0}"#).is_err());
    }

    #[test]
    fn lattice_terms_cover_the_hamiltonian() {
        let lat = build_lattice(4, 3, 1, true).unwrap();
        let m = ModelConfig::Bnnni { j: 1.0, kappa: 0.3, h: 1.0 }.build(&lat).unwrap();
        assert_eq!(m.interaction_range(), (2, 2));
        let nn = m.terms.iter().filter(|t| t.extent == (1, 0) || t.extent == (0, 1)).count();
        assert_eq!(nn, 24);
        let tfim = ModelConfig::Tfim { j: 1.0, h: 1.0 }.build(&lat).unwrap();
        assert_eq!(tfim.interaction_range(), (1, 1));
    }
}
