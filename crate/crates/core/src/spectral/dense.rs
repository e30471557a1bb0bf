//! Dense matrices for small systems. Matrices built here come from explicit Kronecker
//! products of single-qubit matrices and are used as reference values for the
//! matrix-free code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, PauliSum};

pub const DENSE_ORACLE_MAX_QUBITS: usize = 12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn letter_matrix(l: Letter) -> DMatrix<Complex64> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    match l {
        Letter::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        Letter::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Letter::Y => DMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        Letter::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, c(-1.0, 0.0)]),
    }
}

/// Kronecker product with qubit 0 as the least significant factor.
pub fn pauli_string_matrix(p: &PauliString) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for q in (0..p.n_qubits()).rev() {
        m = m.kronecker(&letter_matrix(p.letter(q)));
    }
    m
}

pub fn pauli_sum_matrix(h: &PauliSum) -> DMatrix<Complex64> {
    let d = 1usize << h.n_qubits();
    let mut m = DMatrix::zeros(d, d);
    for (p, coeff) in h.iter() {
        m += pauli_string_matrix(p) * c(coeff, 0.0);
    }
    m
}

/// Dense matrix assembled column by column from the bit-rule action; much faster than
/// the Kronecker construction and used by the small-system eigensolver.
pub fn assemble(h: &PauliSum) -> Result<DMatrix<Complex64>> {
    if h.n_qubits() > DENSE_ORACLE_MAX_QUBITS {
        return Err(Error::TooManyQubits(h.n_qubits(), DENSE_ORACLE_MAX_QUBITS));
    }
    let d = 1usize << h.n_qubits();
    let mut m = DMatrix::zeros(d, d);
    for (p, coeff) in h.iter() {
        for b in 0..d as u64 {
            let (amp, t) = p.apply_to_basis(b);
            m[(t as usize, b as usize)] += amp * coeff;
        }
    }
    Ok(m)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let d = m.nrows();
    let real = m.iter().all(|v| v.im == 0.0);
    let (vals, vecs): (Vec<f64>, DMatrix<Complex64>) = if real {
        let mr = m.map(|v| v.re);
        let e = nalgebra::SymmetricEigen::new(mr);
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors.map(|v| c(v, 0.0)))
    } else {
        let e = nalgebra::SymmetricEigen::new(m);
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let mut sorted_vecs = DMatrix::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        sorted_vecs.set_column(k, &vecs.column(i));
    }
    (sorted_vals, sorted_vecs)
}

pub fn expectation_dense(m: &DMatrix<Complex64>, psi: &[Complex64]) -> Complex64 {
    let v = DVector::from_column_slice(psi);
    v.dotc(&(m * &v))
}

/// Frobenius norm of the commutator `[a, b]`.
pub fn commutator_norm(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a * b - b * a).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assemble_matches_kronecker() {
        let h = PauliSum::from_text("0.3 XYZ\n-1.1 ZIZ\n0.7 IYI\n2.0 III\n", None).unwrap();
        assert!((assemble(&h).unwrap() - pauli_sum_matrix(&h)).norm() < 1e-14);
    }

    #[test]
    fn qubit_zero_is_least_significant() {
        let x0: PauliString = "XI".parse().unwrap();
        let m = pauli_string_matrix(&x0);
        // X on qubit 0 maps |00> (index 0) to |01> (index 1)
        assert_eq!(m[(1, 0)], c(1.0, 0.0));
        assert_eq!(m[(2, 0)], c(0.0, 0.0));
    }

    #[test]
    fn eigh_sorted() {
        let h = PauliSum::from_text("1 ZI\n0.5 IZ\n", None).unwrap();
        let (vals, _) = eigh(pauli_sum_matrix(&h));
        assert_eq!(vals, vec![-1.5, -0.5, 0.5, 1.5]);
    }
}
