//! Pure and mixed qubit states.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::linalg::{eig_hermitian, partial_trace, re, ComplexMatrix, HERMITIAN_TOL, PSD_TOL};
use crate::rng::{complex_gaussian, rng_for, TrialRng};

pub const TRACE_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-10;

/// Which invariant a candidate density matrix breaks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NotSquare,
    NotQubitDimension(usize),
    NotHermitian(f64),
    TraceNotOne(f64),
    NegativeEigenvalue(f64),
    Eigensolver(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSquare => write!(f, "not square"),
            Violation::NotQubitDimension(n) => write!(f, "dimension {n} is not a power of two"),
            Violation::NotHermitian(a) => write!(f, "not Hermitian (asymmetry {a:e})"),
            Violation::TraceNotOne(t) => write!(f, "trace {t} differs from 1"),
            Violation::NegativeEigenvalue(v) => write!(f, "negative eigenvalue {v:e}"),
            Violation::Eigensolver(msg) => write!(f, "eigensolver failed: {msg}"),
        }
    }
}

/// Checks Hermiticity, unit trace and positivity at the crate tolerances.
pub fn validate_density(mat: &ComplexMatrix) -> std::result::Result<(), Violation> {
    if !mat.is_square() {
        return Err(Violation::NotSquare);
    }
    if !mat.rows().is_power_of_two() {
        return Err(Violation::NotQubitDimension(mat.rows()));
    }
    let asym = mat.hermitian_asymmetry();
    if asym > HERMITIAN_TOL {
        return Err(Violation::NotHermitian(asym));
    }
    let tr = mat.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Violation::TraceNotOne(tr.re));
    }
    let spec = eig_hermitian(mat).map_err(|e| Violation::Eigensolver(e.to_string()))?;
    match spec.values.last() {
        Some(&min) if min < -PSD_TOL => Err(Violation::NegativeEigenvalue(min)),
        _ => Ok(()),
    }
}

/// A valid density matrix on `left + right` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    qubits: (usize, usize),
}

impl DensityMatrix {
    /// Validates `mat` as a two-qubit state (one qubit per side).
    pub fn two_qubit(mat: ComplexMatrix) -> Result<Self> {
        Self::with_sides(mat, (1, 1))
    }

    pub fn with_sides(mat: ComplexMatrix, qubits: (usize, usize)) -> Result<Self> {
        let dim = 1usize << (qubits.0 + qubits.1);
        if mat.rows() != dim || mat.cols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for {} + {} qubits",
                mat.rows(),
                mat.cols(),
                qubits.0,
                qubits.1
            )));
        }
        validate_density(&mat).map_err(Error::InvalidState)?;
        Ok(Self { mat, qubits })
    }

    /// Normalizes an unnormalized positive operator by its trace without the
    /// eigenvalue check. Callers guarantee positivity by construction.
    pub(crate) fn normalized_unchecked(
        sigma: &ComplexMatrix,
        qubits: (usize, usize),
    ) -> Result<(Self, f64)> {
        let prob = sigma.trace().re;
        if !(prob > crate::channels::ZERO_PROB_CUTOFF) {
            return Err(Error::ZeroProbability { prob });
        }
        let mat = sigma.hermitian_part().scale_real(1.0 / prob);
        Ok((Self { mat, qubits }, prob))
    }

    pub fn maximally_mixed(qubits: (usize, usize)) -> Self {
        let dim = 1usize << (qubits.0 + qubits.1);
        Self {
            mat: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
            qubits,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn qubits(&self) -> (usize, usize) {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn validate(&self) -> std::result::Result<(), Violation> {
        validate_density(&self.mat)
    }

    /// Reduced state of the left (`keep_left = true`) or right half.
    pub fn marginal(&self, keep_left: bool) -> Result<ComplexMatrix> {
        let dims = [1usize << self.qubits.0, 1usize << self.qubits.1];
        partial_trace(&self.mat, &dims, &[if keep_left { 0 } else { 1 }])
    }
}

/// Unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vec: ComplexMatrix,
}

impl PureState {
    pub fn new(vec: ComplexMatrix) -> Result<Self> {
        if vec.cols() != 1 || !vec.rows().is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "state vector must be 2^n x 1, got {}x{}",
                vec.rows(),
                vec.cols()
            )));
        }
        let norm = vec.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(Violation::TraceNotOne(norm)));
        }
        Ok(Self { vec })
    }

    /// Rescales a non-zero vector to unit norm.
    pub fn normalize(vec: ComplexMatrix) -> Result<Self> {
        let norm = vec.norm_sqr().sqrt();
        if !(norm > 0.0) {
            return Err(Error::ZeroProbability { prob: 0.0 });
        }
        Self::new(vec.scale_real(1.0 / norm))
    }

    pub fn vector(&self) -> &ComplexMatrix {
        &self.vec
    }

    pub fn amplitudes(&self) -> &[crate::linalg::C64] {
        self.vec.as_slice()
    }

    pub fn dim(&self) -> usize {
        self.vec.rows()
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = ComplexMatrix::zeros(dim, 1);
        v[(index, 0)] = re(1.0);
        Self { vec: v }
    }
}

/// `sqrt(omega)|00> + sqrt(1 - omega)|11>`.
pub fn pure_chi(omega: f64) -> Result<PureState> {
    check_range("omega", omega, 0.0, 1.0)?;
    let mut v = ComplexMatrix::zeros(4, 1);
    v[(0, 0)] = re(omega.sqrt());
    v[(3, 0)] = re((1.0 - omega).sqrt());
    Ok(PureState { vec: v })
}

pub fn bell_phi_plus() -> PureState {
    pure_chi(0.5).expect("0.5 is in range")
}

/// `|psi><psi|` for a two-qubit state.
pub fn density_from_pure(psi: &PureState) -> DensityMatrix {
    let n = psi.dim().trailing_zeros() as usize;
    let qubits = if n == 2 { (1, 1) } else { (n, 0) };
    DensityMatrix {
        mat: psi.vec.outer(&psi.vec),
        qubits,
    }
}

/// Haar-random pure state on `2^qubits` dimensions.
pub fn random_pure_from(rng: &mut TrialRng, qubits: usize) -> PureState {
    let dim = 1usize << qubits;
    let v = ComplexMatrix::from_fn(dim, 1, |_, _| complex_gaussian(rng));
    PureState::normalize(v).expect("Gaussian vector is non-zero almost surely")
}

/// Haar-random two-qubit pure state, deterministic in `seed`.
pub fn random_pure(seed: u64) -> PureState {
    random_pure_from(&mut rng_for(seed, 0), 2)
}

/// Two-qubit state of rank at most `rank`: an ancilla of dimension `rank` is
/// traced out of a Haar-random pure state.
pub fn random_mixed_from(rng: &mut TrialRng, rank: usize) -> Result<DensityMatrix> {
    check_range("rank", rank as f64, 1.0, 4.0)?;
    let dim = 4 * rank;
    let v = ComplexMatrix::from_fn(dim, 1, |_, _| complex_gaussian(rng));
    let v = v.scale_real(1.0 / v.norm_sqr().sqrt());
    let joint = v.outer(&v);
    let reduced = partial_trace(&joint, &[4, rank], &[0])?;
    let (rho, _) = DensityMatrix::normalized_unchecked(&reduced, (1, 1))?;
    Ok(rho)
}

pub fn random_mixed(seed: u64, rank: usize) -> Result<DensityMatrix> {
    random_mixed_from(&mut rng_for(seed, 0), rank)
}
