//! Matrix-free application of Pauli sums to statevectors.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_dims, Result};
use crate::pauli::{Phase, PauliSum};

use super::state::StateVector;

const CHUNK: usize = 1 << 12;

struct FlipGroup {
    x: u64,
    // (z mask, c * i^{|x&z|})
    terms: Vec<(u64, Complex64)>,
}

/// A Pauli sum regrouped by X mask for repeated application.
pub struct SparseOp {
    n: usize,
    groups: Vec<FlipGroup>,
    scale: f64,
}

impl SparseOp {
    pub fn new(h: &PauliSum) -> Self {
        let mut groups: Vec<FlipGroup> = Vec::new();
        let mut scale = 0.0;
        // PauliSum iterates in (n, x, z) order so equal X masks are adjacent
        for (p, c) in h.iter() {
            scale += c.abs();
            let amp = Phase::from_power(p.y_count() as i64).to_complex() * c;
            match groups.last_mut() {
                Some(g) if g.x == p.x_mask() => g.terms.push((p.z_mask(), amp)),
                _ => groups.push(FlipGroup {
                    x: p.x_mask(),
                    terms: vec![(p.z_mask(), amp)],
                }),
            }
        }
        SparseOp {
            n: h.n_qubits(),
            groups,
            scale,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// `Σ|c|`, an upper bound on the spectral norm.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    #[inline]
    fn row(&self, a: u64, input: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for g in &self.groups {
            let src = a ^ g.x;
            let mut coef = Complex64::new(0.0, 0.0);
            for &(z, amp) in &g.terms {
                if (z & src).count_ones() & 1 == 1 {
                    coef -= amp;
                } else {
                    coef += amp;
                }
            }
            acc += coef * input[src as usize];
        }
        acc
    }

    /// `out = H * input`. Each output amplitude is a fixed-order sum, so results do not
    /// depend on the thread count.
    pub fn apply_into(&self, input: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(input.len(), 1usize << self.n);
        debug_assert_eq!(out.len(), input.len());
        if input.len() <= CHUNK {
            for (a, o) in out.iter_mut().enumerate() {
                *o = self.row(a as u64, input);
            }
        } else {
            out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
                let base = ci * CHUNK;
                for (k, o) in chunk.iter_mut().enumerate() {
                    *o = self.row((base + k) as u64, input);
                }
            });
        }
    }

    pub fn apply_vec(&self, input: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
        self.apply_into(input, &mut out);
        out
    }
}

/// `H|ψ>` without materializing a matrix. The result keeps the input's provenance and
/// is flagged unnormalized.
pub fn apply(h: &PauliSum, psi: &StateVector) -> Result<StateVector> {
    check_dims(h.n_qubits(), psi.n_qubits())?;
    let op = SparseOp::new(h);
    let out = op.apply_vec(psi.amplitudes());
    StateVector::unnormalized(psi.n_qubits(), out, psi.provenance().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliString, PauliSum};
    use crate::spectral::dense::pauli_sum_matrix;
    use nalgebra::DVector;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = StateVector::random(3, &mut rng, "r").unwrap();
        let id = PauliSum::identity(3, 1.0);
        assert_eq!(apply(&id, &psi).unwrap().amplitudes(), psi.amplitudes());

        let x0 = PauliSum::from_string(PauliString::from_ops(4, &[(0, crate::pauli::Letter::X)]).unwrap(), 1.0);
        let zero = StateVector::basis(4, 0).unwrap();
        let out = apply(&x0, &zero).unwrap();
        assert_eq!(out.amplitudes()[1], Complex64::new(1.0, 0.0));
        assert_eq!(out.norm_sq(), 1.0);
    }

    #[test]
    fn mismatch_rejected() {
        let psi = StateVector::basis(3, 0).unwrap();
        assert!(apply(&PauliSum::new(4), &psi).is_err());
    }

    #[test]
    fn large_vectors_use_parallel_path() {
        let h = PauliSum::from_text("0.5 XYZIIIIIIIIIIIIZ\n-1.25 ZZIIIIIIIIIIIIII\n0.75 IIIIIIIYIIIIIIIX\n", None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = StateVector::random(16, &mut rng, "r").unwrap();
        let op = SparseOp::new(&h);
        let fast = op.apply_vec(psi.amplitudes());
        let mut slow = vec![Complex64::new(0.0, 0.0); psi.dim()];
        for (p, c) in h.iter() {
            for (b, a) in psi.amplitudes().iter().enumerate() {
                let (amp, t) = p.apply_to_basis(b as u64);
                slow[t as usize] += amp * a * c;
            }
        }
        let err: f64 = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    fn arb_sum(n: usize) -> impl Strategy<Value = PauliSum> {
        prop::collection::vec((0..(1u64 << n), 0..(1u64 << n), -2.0f64..2.0), 1..10).prop_map(move |t| {
            PauliSum::from_terms(n, t.into_iter().map(|(x, z, c)| (PauliString::new(n, x, z).unwrap(), c))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn matches_dense_product(h in arb_sum(4), seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = StateVector::random(4, &mut rng, "r").unwrap();
            let out = apply(&h, &psi).unwrap();
            let want = pauli_sum_matrix(&h) * DVector::from_column_slice(psi.amplitudes());
            let err = out.amplitudes().iter().zip(want.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(err < 1e-12);
        }

        #[test]
        fn apply_is_linear(h in arb_sum(5), seed in 0u64..1000, alpha in -2.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = StateVector::random(5, &mut rng, "a").unwrap();
            let b = StateVector::random(5, &mut rng, "b").unwrap();
            let comb: Vec<Complex64> = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x * alpha + y).collect();
            let op = SparseOp::new(&h);
            let lhs = op.apply_vec(&comb);
            let ha = op.apply_vec(a.amplitudes());
            let hb = op.apply_vec(b.amplitudes());
            for i in 0..lhs.len() {
                prop_assert!((lhs[i] - (ha[i] * alpha + hb[i])).norm() < 1e-11);
            }
        }
    }
}
