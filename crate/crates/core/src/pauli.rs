//! Pauli strings in symplectic (x, z) bitset form and real-weighted sums of them.
//!
//! A string with masks `(x, z)` denotes `i^{|x & z|} X^x Z^z`. With that phase
//! folded in every string is Hermitian (a single-qubit `(1, 1)` is exactly `Y`),
//! so a sum with real coefficients is a Hermitian operator.
//!
//! Qubit `q` corresponds to bit `q` of both masks, to character `q` of the text
//! form, and to bit `q` of a computational basis index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{check_dims, Error, Result};

pub const MAX_QUBITS: usize = 64;

/// Coefficients below this magnitude are dropped after every combination.
pub const PRUNE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// Power of `i`, so `Phase(3)` is `-i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i64) -> Phase {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    /// `+1` or `-1` for real phases, `None` otherwise.
    pub fn real_sign(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: u32,
    x: u64,
    z: u64,
}

fn mask_for(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn new(n_qubits: usize, x_mask: u64, z_mask: u64) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits, MAX_QUBITS));
        }
        let valid = mask_for(n_qubits);
        if (x_mask | z_mask) & !valid != 0 {
            return Err(Error::InvalidArgument(format!(
                "mask bits set beyond qubit count {n_qubits}"
            )));
        }
        Ok(PauliString {
            n: n_qubits as u32,
            x: x_mask,
            z: z_mask,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliString {
            n: n_qubits as u32,
            x: 0,
            z: 0,
        }
    }

    /// Builds a string from `(qubit, letter)` pairs. Repeated qubits are rejected.
    pub fn from_ops(n_qubits: usize, ops: &[(usize, Letter)]) -> Result<Self> {
        let mut p = PauliString::new(n_qubits, 0, 0)?;
        for &(q, letter) in ops {
            if q >= n_qubits {
                return Err(Error::InvalidArgument(format!(
                    "qubit {q} out of range for {n_qubits} qubits"
                )));
            }
            let bit = 1u64 << q;
            if (p.x | p.z) & bit != 0 {
                return Err(Error::InvalidArgument(format!("qubit {q} given twice")));
            }
            let (bx, bz) = letter.bits();
            if bx {
                p.x |= bit;
            }
            if bz {
                p.z |= bit;
            }
        }
        Ok(p)
    }

    pub fn single(n_qubits: usize, qubit: usize, letter: Letter) -> Result<Self> {
        Self::from_ops(n_qubits, &[(qubit, letter)])
    }

    pub fn n_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// True when the string contains no X or Y, i.e. it is diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn letter(&self, q: usize) -> Letter {
        let bit = 1u64 << q;
        Letter::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Product `self * other = phase * product`.
    pub fn mul(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        check_dims(self.n_qubits(), other.n_qubits())?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &PauliString) -> (Phase, PauliString) {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let y3 = (x & z).count_ones() as i64;
        let swaps = (self.z & other.x).count_ones() as i64;
        let k = self.y_count() as i64 + other.y_count() as i64 - y3 + 2 * swaps;
        (Phase::from_power(k), PauliString { n: self.n, x, z })
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        check_dims(self.n_qubits(), other.n_qubits())?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        (((self.x & other.z) ^ (self.z & other.x)).count_ones() & 1) == 0
    }

    /// Qubit-wise commutation: on every qubit the letters agree or one is identity.
    pub fn qubitwise_commutes(&self, other: &PauliString) -> bool {
        let both = self.support() & other.support();
        (self.x ^ other.x) & both == 0 && (self.z ^ other.z) & both == 0
    }

    /// Action on a computational basis state: `P|b> = amp * |b'>`.
    #[inline]
    pub fn apply_to_basis(&self, b: u64) -> (Complex64, u64) {
        let sign = if (self.z & b).count_ones() & 1 == 1 {
            Phase::MINUS_ONE
        } else {
            Phase::ONE
        };
        let phase = Phase::from_power(self.y_count() as i64) * sign;
        (phase.to_complex(), b ^ self.x)
    }

    /// Restriction to the qubits listed in `qubits`, relabelled `0..qubits.len()`.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        let mut x = 0u64;
        let mut z = 0u64;
        for (k, &q) in qubits.iter().enumerate() {
            if self.x >> q & 1 == 1 {
                x |= 1 << k;
            }
            if self.z >> q & 1 == 1 {
                z |= 1 << k;
            }
        }
        PauliString {
            n: qubits.len() as u32,
            x,
            z,
        }
    }

    /// Relabels qubit `q` as `perm[q]`. `perm` must be a permutation of `0..n`.
    pub fn permuted(&self, perm: &[usize]) -> PauliString {
        debug_assert_eq!(perm.len(), self.n_qubits());
        let mut x = 0u64;
        let mut z = 0u64;
        for (q, &t) in perm.iter().enumerate() {
            x |= (self.x >> q & 1) << t;
            z |= (self.z >> q & 1) << t;
        }
        PauliString { n: self.n, x, z }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits() {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        let n = s.chars().count();
        let mut ops = Vec::with_capacity(n);
        for (q, c) in s.chars().enumerate() {
            let letter = match c {
                'I' | 'i' => Letter::I,
                'X' | 'x' => Letter::X,
                'Y' | 'y' => Letter::Y,
                'Z' | 'z' => Letter::Z,
                other => return Err(Error::Parse(format!("unexpected Pauli letter {other:?}"))),
            };
            if letter != Letter::I {
                ops.push((q, letter));
            }
        }
        PauliString::from_ops(n, &ops)
    }
}

/// Real-weighted sum of Pauli strings on a fixed number of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<PauliString, f64>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        PauliSum {
            n: n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, f64)>,
    {
        let mut s = PauliSum::new(n_qubits);
        for (p, c) in terms {
            s.add_term(p, c)?;
        }
        s.prune();
        Ok(s)
    }

    pub fn from_string(p: PauliString, coeff: f64) -> Self {
        let mut s = PauliSum::new(p.n_qubits());
        s.terms.insert(p, coeff);
        s.prune();
        s
    }

    pub fn identity(n_qubits: usize, coeff: f64) -> Self {
        Self::from_string(PauliString::identity(n_qubits), coeff)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, f64)> + '_ {
        self.terms.iter().map(|(p, c)| (p, *c))
    }

    pub fn coeff(&self, p: &PauliString) -> f64 {
        self.terms.get(p).copied().unwrap_or(0.0)
    }

    /// Adds `coeff * p` without pruning; call [`PauliSum::prune`] afterwards.
    pub fn add_term(&mut self, p: PauliString, coeff: f64) -> Result<()> {
        check_dims(self.n, p.n_qubits())?;
        *self.terms.entry(p).or_insert(0.0) += coeff;
        Ok(())
    }

    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.abs() >= PRUNE_TOL);
    }

    /// `alpha * self + beta * other`, pruned.
    pub fn combine(&self, other: &PauliSum, alpha: f64, beta: f64) -> Result<PauliSum> {
        check_dims(self.n, other.n)?;
        let mut out = PauliSum::new(self.n);
        for (p, c) in &self.terms {
            out.terms.insert(*p, alpha * c);
        }
        for (p, c) in &other.terms {
            *out.terms.entry(*p).or_insert(0.0) += beta * c;
        }
        out.prune();
        Ok(out)
    }

    pub fn scaled(&self, alpha: f64) -> PauliSum {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= alpha;
        }
        out.prune();
        out
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        self.combine(other, 1.0, 1.0)
    }

    pub fn sub(&self, other: &PauliSum) -> Result<PauliSum> {
        self.combine(other, 1.0, -1.0)
    }

    pub fn identity_coeff(&self) -> f64 {
        self.coeff(&PauliString::identity(self.n))
    }

    /// Sum with every string relabelled by [`PauliString::permuted`].
    pub fn permuted(&self, perm: &[usize]) -> Result<PauliSum> {
        check_dims(self.n, perm.len())?;
        let mut out = PauliSum::new(self.n);
        for (p, c) in &self.terms {
            out.terms.insert(p.permuted(perm), *c);
        }
        Ok(out)
    }

    pub fn traceless_part(&self) -> PauliSum {
        let mut out = self.clone();
        out.terms.remove(&PauliString::identity(self.n));
        out
    }

    /// `Σ_{P ≠ I} c_P²`, equal to `‖A - Tr(A)/d‖_F² / d`.
    pub fn frobenius_norm_sq_over_d(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(p, _)| !p.is_identity())
            .map(|(_, c)| c * c)
            .sum()
    }

    /// Largest coefficient-wise difference `max_P |a_P - b_P|`.
    pub fn max_abs_diff(&self, other: &PauliSum) -> Result<f64> {
        check_dims(self.n, other.n)?;
        let mut worst = 0.0f64;
        for (p, c) in &self.terms {
            worst = worst.max((c - other.coeff(p)).abs());
        }
        for (p, c) in &other.terms {
            if !self.terms.contains_key(p) {
                worst = worst.max(c.abs());
            }
        }
        Ok(worst)
    }

    /// Union of the supports of all strings.
    pub fn support(&self) -> u64 {
        self.terms.keys().fold(0, |acc, p| acc | p.support())
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.keys().all(|p| p.is_diagonal())
    }

    /// Half anticommutator `(AB + BA)/2`, which is Hermitian with real coefficients.
    pub fn anticommutator_half(&self, other: &PauliSum) -> Result<PauliSum> {
        check_dims(self.n, other.n)?;
        let mut out = PauliSum::new(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if !a.commutes_unchecked(b) {
                    continue;
                }
                let (ph, prod) = a.mul_unchecked(b);
                let sign = ph.real_sign().expect("commuting Hermitian strings have a real product");
                *out.terms.entry(prod).or_insert(0.0) += sign * ca * cb;
            }
        }
        out.prune();
        Ok(out)
    }

    /// `-i [A, B]`, Hermitian with real coefficients.
    pub fn commutator_over_i(&self, other: &PauliSum) -> Result<PauliSum> {
        check_dims(self.n, other.n)?;
        let mut out = PauliSum::new(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if a.commutes_unchecked(b) {
                    continue;
                }
                // AB = i^k P with k odd; -i[A,B] = -2i * i^k P
                let (ph, prod) = a.mul_unchecked(b);
                let sign = if ph == Phase::I { 2.0 } else { -2.0 };
                *out.terms.entry(prod).or_insert(0.0) += sign * ca * cb;
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn square(&self) -> PauliSum {
        self.anticommutator_half(self).expect("same dimension")
    }

    pub fn commutes_with(&self, other: &PauliSum) -> Result<bool> {
        Ok(self.commutator_over_i(other)?.is_empty())
    }

    /// One term per line, `<coefficient> <IXYZ string>`, in a stable order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, c) in &self.terms {
            out.push_str(&format!("{c:?} {p}\n"));
        }
        out
    }

    /// Parses the text form. Blank lines and lines starting with `#` are skipped.
    /// `n_qubits` is required when the text holds no terms.
    pub fn from_text(text: &str, n_qubits: Option<usize>) -> Result<PauliSum> {
        let mut n = n_qubits;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(cs), Some(ps), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!(
                    "line {}: expected `<coefficient> <string>`",
                    lineno + 1
                )));
            };
            let c: f64 = cs
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad coefficient {cs:?}", lineno + 1)))?;
            if !c.is_finite() {
                return Err(Error::Parse(format!("line {}: non-finite coefficient", lineno + 1)));
            }
            let p: PauliString = ps.parse()?;
            match n {
                None => n = Some(p.n_qubits()),
                Some(m) => check_dims(m, p.n_qubits())?,
            }
            entries.push((p, c));
        }
        let n = n.ok_or_else(|| Error::Parse("empty sum needs an explicit qubit count".into()))?;
        PauliSum::from_terms(n, entries)
    }
}

/// `alpha * a + beta * b`.
pub fn sum_combine(a: &PauliSum, b: &PauliSum, alpha: f64, beta: f64) -> Result<PauliSum> {
    a.combine(b, alpha, beta)
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::dense::{pauli_string_matrix, pauli_sum_matrix};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn phase_matrix(ph: Phase, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        m.map(|v| v * ph.to_complex())
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(ps("X").mul(&ps("Z")).unwrap(), (Phase::MINUS_I, ps("Y")));
        assert_eq!(ps("Z").mul(&ps("X")).unwrap(), (Phase::I, ps("Y")));
        assert_eq!(ps("Z").mul(&ps("Z")).unwrap(), (Phase::ONE, ps("I")));
        assert_eq!(ps("Y").mul(&ps("Y")).unwrap(), (Phase::ONE, ps("I")));
        assert_eq!(ps("X").mul(&ps("Y")).unwrap(), (Phase::I, ps("Z")));
    }

    #[test]
    fn two_qubit_product_matches_dense() {
        let a = ps("XX");
        let b = ps("ZZ");
        let (ph, prod) = a.mul(&b).unwrap();
        assert_eq!(prod, ps("YY"));
        assert_eq!(ph, Phase::MINUS_ONE);
        let lhs = pauli_string_matrix(&a) * pauli_string_matrix(&b);
        let rhs = phase_matrix(ph, &pauli_string_matrix(&prod));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        assert!(matches!(
            ps("XX").mul(&ps("X")),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(ps("XX").commutes(&ps("XYZ")).is_err());
        assert!(PauliSum::new(2).add(&PauliSum::new(3)).is_err());
    }

    #[test]
    fn commutation_basics() {
        assert!(ps("XX").commutes(&ps("ZZ")).unwrap());
        assert!(!ps("XI").commutes(&ps("ZI")).unwrap());
        assert!(!ps("XX").qubitwise_commutes(&ps("ZZ")));
        assert!(ps("XI").qubitwise_commutes(&ps("XZ")));
    }

    #[test]
    fn commutation_exhaustive_small() {
        for n in 1..=3usize {
            let total = 1u64 << (2 * n);
            for a in 0..total {
                for b in 0..total {
                    let pa = PauliString::new(n, a & mask_for(n), a >> n).unwrap();
                    let pb = PauliString::new(n, b & mask_for(n), b >> n).unwrap();
                    let ma = pauli_string_matrix(&pa);
                    let mb = pauli_string_matrix(&pb);
                    let comm = &ma * &mb - &mb * &ma;
                    assert_eq!(pa.commutes(&pb).unwrap(), comm.norm() < 1e-12);
                    let (ph, prod) = pa.mul(&pb).unwrap();
                    let want = phase_matrix(ph, &pauli_string_matrix(&prod));
                    assert!((&ma * &mb - want).norm() < 1e-12, "{pa} * {pb}");
                }
            }
        }
    }

    #[test]
    fn combine_and_prune() {
        let a = PauliSum::from_text("1.5 XZI\n-2.0 IIY\n", None).unwrap();
        assert!(a.combine(&a, 1.0, -1.0).unwrap().is_empty());
        let b = a.scaled(0.5);
        assert_eq!(b.coeff(&ps("XZI")), 0.75);
    }

    #[test]
    fn traceless_and_frobenius() {
        let a = PauliSum::from_text("3 II\n2 ZI\n", None).unwrap();
        let t = a.traceless_part();
        assert_eq!(t, PauliSum::from_text("2 ZI", None).unwrap());
        assert_eq!(t.traceless_part(), t);
        let b = PauliSum::from_text("2 ZZ\n3 XI\n", None).unwrap();
        assert_eq!(b.frobenius_norm_sq_over_d(), 13.0);
        assert_eq!(PauliSum::identity(3, 5.0).frobenius_norm_sq_over_d(), 0.0);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let a = PauliSum::from_terms(
            3,
            vec![
                (ps("XYZ"), 0.1 + 0.2),
                (ps("ZZI"), -1.0 / 3.0),
                (ps("III"), 1e-300),
            ],
        )
        .unwrap();
        let back = PauliSum::from_text(&a.to_text(), None).unwrap();
        assert_eq!(a, back);
        assert_eq!(
            PauliSum::from_string(ps("ZZIIII"), -1.0).to_text(),
            "-1.0 ZZIIII\n"
        );
    }

    #[test]
    fn text_errors() {
        assert!(PauliSum::from_text("1.0 XQ", None).is_err());
        assert!(PauliSum::from_text("abc XX", None).is_err());
        assert!(PauliSum::from_text("1.0 XX\n1.0 X", None).is_err());
        assert!(PauliSum::from_text("", None).is_err());
        assert!(PauliSum::from_text("", Some(3)).unwrap().is_empty());
    }

    fn arb_string(n: usize) -> impl Strategy<Value = PauliString> {
        (0..(1u64 << n), 0..(1u64 << n)).prop_map(move |(x, z)| PauliString::new(n, x, z).unwrap())
    }

    fn arb_sum(n: usize) -> impl Strategy<Value = PauliSum> {
        prop::collection::vec((arb_string(n), -2.0f64..2.0), 0..8)
            .prop_map(move |t| PauliSum::from_terms(n, t).unwrap())
    }

    proptest! {
        #[test]
        fn product_order_flips_phase_by_anticommutation(a in arb_string(6), b in arb_string(6)) {
            let (p1, s1) = a.mul(&b).unwrap();
            let (p2, s2) = b.mul(&a).unwrap();
            prop_assert_eq!(s1, s2);
            let flip = if a.commutes(&b).unwrap() { Phase::ONE } else { Phase::MINUS_ONE };
            prop_assert_eq!(p1, p2 * flip);
        }

        #[test]
        fn commutes_matches_dense(a in arb_string(6), b in arb_string(6)) {
            let ma = pauli_string_matrix(&a);
            let mb = pauli_string_matrix(&b);
            let comm = &ma * &mb - &mb * &ma;
            prop_assert_eq!(a.commutes(&b).unwrap(), comm.norm() < 1e-12);
        }

        #[test]
        fn combine_is_bilinear(a in arb_sum(4), b in arb_sum(4), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
            let c = sum_combine(&a, &b, alpha, beta).unwrap();
            let want = pauli_sum_matrix(&a) * Complex64::from(alpha) + pauli_sum_matrix(&b) * Complex64::from(beta);
            prop_assert!((pauli_sum_matrix(&c) - want).norm() < 1e-10);
        }

        #[test]
        fn frobenius_matches_trace(a in arb_sum(4), shift in -3.0f64..3.0) {
            let a = a.add(&PauliSum::identity(4, shift)).unwrap();
            let t = a.traceless_part();
            let m = pauli_sum_matrix(&t);
            prop_assert!(m.trace().norm() < 1e-12);
            let d = 16.0;
            let f = (m.adjoint() * &m).trace().re / d;
            prop_assert!((f - a.frobenius_norm_sq_over_d()).abs() < 1e-10);
        }

        #[test]
        fn commutator_and_anticommutator_match_dense(a in arb_sum(3), b in arb_sum(3)) {
            let ma = pauli_sum_matrix(&a);
            let mb = pauli_sum_matrix(&b);
            let anti = (&ma * &mb + &mb * &ma) * Complex64::new(0.5, 0.0);
            let comm = (&ma * &mb - &mb * &ma) * Complex64::new(0.0, -1.0);
            prop_assert!((pauli_sum_matrix(&a.anticommutator_half(&b).unwrap()) - anti).norm() < 1e-10);
            prop_assert!((pauli_sum_matrix(&a.commutator_over_i(&b).unwrap()) - comm).norm() < 1e-10);
        }

        #[test]
        fn text_round_trip(a in arb_sum(5)) {
            prop_assert_eq!(PauliSum::from_text(&a.to_text(), Some(5)).unwrap(), a);
        }
    }
}
