//! Jordan–Wigner images of the fermionic monomials used by the Hubbard builders.
//!
//! Mode `p` is qubit `p`; `|1>` means occupied, so `n_p = (I - Z_p)/2` and
//! `c_p = Z_0 ⋯ Z_{p-1} (X_p + iY_p)/2`.

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, PauliSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FermionTerm {
    /// `c†_p c_q + c†_q c_p`
    Hopping(usize, usize),
    /// `n_p`
    Number(usize),
    /// `n_p n_q`
    NumberPair(usize, usize),
}

fn check_mode(p: usize, n_modes: usize) -> Result<()> {
    if p >= n_modes {
        return Err(Error::Model(format!("mode {p} out of range for {n_modes} modes")));
    }
    Ok(())
}

fn number(p: usize, n_modes: usize) -> Result<PauliSum> {
    PauliSum::from_terms(
        n_modes,
        [
            (PauliString::identity(n_modes), 0.5),
            (PauliString::single(n_modes, p, Letter::Z)?, -0.5),
        ],
    )
}

pub fn jordan_wigner(term: FermionTerm, n_modes: usize) -> Result<PauliSum> {
    match term {
        FermionTerm::Number(p) => {
            check_mode(p, n_modes)?;
            number(p, n_modes)
        }
        FermionTerm::NumberPair(p, q) => {
            check_mode(p, n_modes)?;
            check_mode(q, n_modes)?;
            if p == q {
                return Err(Error::Model("n_p n_p is not a supported monomial; use n_p".into()));
            }
            Ok(number(p, n_modes)?.anticommutator_half(&number(q, n_modes)?)?)
        }
        FermionTerm::Hopping(p, q) => {
            check_mode(p, n_modes)?;
            check_mode(q, n_modes)?;
            if p == q {
                return Err(Error::Model("hopping needs two distinct modes".into()));
            }
            let (lo, hi) = (p.min(q), p.max(q));
            let string: Vec<(usize, Letter)> = ((lo + 1)..hi).map(|k| (k, Letter::Z)).collect();
            let with = |l: Letter| -> Result<PauliString> {
                let mut ops = string.clone();
                ops.push((lo, l));
                ops.push((hi, l));
                PauliString::from_ops(n_modes, &ops)
            };
            PauliSum::from_terms(n_modes, [(with(Letter::X)?, 0.5), (with(Letter::Y)?, 0.5)])
        }
    }
}

/// `Σ_p n_p` over `n_modes` modes.
pub fn number_operator(n_modes: usize) -> Result<PauliSum> {
    let mut out = PauliSum::new(n_modes);
    for p in 0..n_modes {
        out = out.add(&number(p, n_modes)?)?;
    }
    Ok(out)
}

pub mod fock {
    //! Dense Fock-space operators built from occupation bit strings, with no reference
    //! to Pauli matrices. Used as an oracle for the Jordan–Wigner images.

    use nalgebra::DMatrix;
    use num_complex::Complex64;

    /// `c†_j` on `n` modes; basis index bit `k` is the occupation of mode `k`.
    pub fn creation(n: usize, j: usize) -> DMatrix<Complex64> {
        let d = 1usize << n;
        let mut m = DMatrix::zeros(d, d);
        for b in 0..d {
            if b >> j & 1 == 0 {
                let below = (b & ((1 << j) - 1)).count_ones();
                let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
                m[(b | 1 << j, b)] = Complex64::new(sign, 0.0);
            }
        }
        m
    }

    pub fn annihilation(n: usize, j: usize) -> DMatrix<Complex64> {
        creation(n, j).adjoint()
    }

    pub fn number(n: usize, j: usize) -> DMatrix<Complex64> {
        creation(n, j) * annihilation(n, j)
    }
}

#[cfg(test)]
mod tests {
    use super::fock;
    use super::*;
    use crate::spectral::dense::pauli_sum_matrix;

    fn text(s: &PauliSum) -> String {
        s.to_text()
    }

    #[test]
    fn number_image() {
        let n0 = jordan_wigner(FermionTerm::Number(0), 1).unwrap();
        assert_eq!(n0, PauliSum::from_text("0.5 I\n-0.5 Z\n", None).unwrap());
    }

    #[test]
    fn adjacent_hopping() {
        let h = jordan_wigner(FermionTerm::Hopping(0, 1), 2).unwrap();
        assert_eq!(text(&h), text(&PauliSum::from_text("0.5 XX\n0.5 YY\n", None).unwrap()));
    }

    #[test]
    fn long_hopping_matches_fock_space() {
        let h = jordan_wigner(FermionTerm::Hopping(0, 2), 3).unwrap();
        assert_eq!(h, PauliSum::from_text("0.5 XZX\n0.5 YZY\n", None).unwrap());
        let f = fock::creation(3, 0) * fock::annihilation(3, 2) + fock::creation(3, 2) * fock::annihilation(3, 0);
        assert!((pauli_sum_matrix(&h) - f).norm() < 1e-14);
    }

    #[test]
    fn all_monomials_match_fock_space() {
        let n = 4;
        for p in 0..n {
            let want = fock::number(n, p);
            assert!((pauli_sum_matrix(&jordan_wigner(FermionTerm::Number(p), n).unwrap()) - want).norm() < 1e-14);
            for q in 0..n {
                if p == q {
                    continue;
                }
                let hop = fock::creation(n, p) * fock::annihilation(n, q) + fock::creation(n, q) * fock::annihilation(n, p);
                let got = pauli_sum_matrix(&jordan_wigner(FermionTerm::Hopping(p, q), n).unwrap());
                assert!((got - hop).norm() < 1e-14, "hopping {p},{q}");
                let nn = fock::number(n, p) * fock::number(n, q);
                let got = pauli_sum_matrix(&jordan_wigner(FermionTerm::NumberPair(p, q), n).unwrap());
                assert!((got - nn).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn unsupported_shapes() {
        assert!(jordan_wigner(FermionTerm::Hopping(1, 1), 3).is_err());
        assert!(jordan_wigner(FermionTerm::NumberPair(2, 2), 3).is_err());
        assert!(jordan_wigner(FermionTerm::Number(3), 3).is_err());
    }
}
