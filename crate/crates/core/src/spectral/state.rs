use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dims, Error, Result};
use crate::pauli::MAX_QUBITS;

const MAGIC: &[u8; 7] = b"LSVEC01";
const HEADER_LEN: usize = 16;

/// Upper bound on qubit count for dense statevectors (2^26 amplitudes is 1 GiB).
pub const MAX_STATE_QUBITS: usize = 26;

/// Dense complex amplitude vector over `2^n` computational basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
    normalized: bool,
    provenance: String,
}

impl StateVector {
    /// Wraps amplitudes, normalizing them. Fails on a zero vector.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>, provenance: impl Into<String>) -> Result<Self> {
        let mut s = Self::unnormalized(n, amps, provenance)?;
        s.normalize()?;
        Ok(s)
    }

    /// Wraps amplitudes as-is and marks the vector as unnormalized.
    pub fn unnormalized(n: usize, amps: Vec<Complex64>, provenance: impl Into<String>) -> Result<Self> {
        if n > MAX_STATE_QUBITS.min(MAX_QUBITS) {
            return Err(Error::TooManyQubits(n, MAX_STATE_QUBITS));
        }
        check_dims(1usize << n, amps.len())?;
        Ok(StateVector {
            n,
            amps,
            normalized: false,
            provenance: provenance.into(),
        })
    }

    pub fn basis(n: usize, index: u64) -> Result<Self> {
        if n > MAX_STATE_QUBITS {
            return Err(Error::TooManyQubits(n, MAX_STATE_QUBITS));
        }
        let d = 1usize << n;
        if index as usize >= d {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            n,
            amps,
            normalized: true,
            provenance: format!("basis({index})"),
        })
    }

    /// Normalized vector of i.i.d. standard complex Gaussians, i.e. a Haar-random state.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R, provenance: impl Into<String>) -> Result<Self> {
        if n > MAX_STATE_QUBITS {
            return Err(Error::TooManyQubits(n, MAX_STATE_QUBITS));
        }
        let amps = (0..1usize << n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        Self::from_amplitudes(n, amps, provenance)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn with_provenance(mut self, p: impl Into<String>) -> Self {
        self.provenance = p.into();
        self
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let nrm = self.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero or non-finite vector".into()));
        }
        let inv = 1.0 / nrm;
        self.amps.iter_mut().for_each(|a| *a *= inv);
        self.normalized = true;
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_dims(self.dim(), other.dim())?;
        Ok(dot(&self.amps, &other.amps))
    }

    /// Little-endian binary form: 16-byte header (`LSVEC01`, one zero byte, `n` as u32,
    /// four zero bytes) followed by interleaved `(re, im)` f64 pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = [0u8; HEADER_LEN];
        header[..7].copy_from_slice(MAGIC);
        header[8..12].copy_from_slice(&(self.n as u32).to_le_bytes());
        w.write_all(&header)?;
        let mut buf = Vec::with_capacity(self.amps.len() * 16);
        for a in &self.amps {
            buf.extend_from_slice(&a.re.to_le_bytes());
            buf.extend_from_slice(&a.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Reads the binary form. The result is flagged normalized only if its norm is 1 within 1e-10.
    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)?;
        if &header[..7] != MAGIC {
            return Err(Error::Parse("bad statevector magic".into()));
        }
        let n = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as usize;
        if n > MAX_STATE_QUBITS {
            return Err(Error::TooManyQubits(n, MAX_STATE_QUBITS));
        }
        let d = 1usize << n;
        let mut buf = vec![0u8; d * 16];
        r.read_exact(&mut buf)?;
        let amps: Vec<Complex64> = buf
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        let mut s = StateVector::unnormalized(n, amps, "binary")?;
        s.normalized = (s.norm() - 1.0).abs() <= 1e-10;
        Ok(s)
    }
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}
