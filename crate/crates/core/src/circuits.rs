//! Teleportation and entanglement swapping, post-selected on the `|phi+>`
//! outcome of the Bell measurement.
//!
//! Qubits are numbered from 0, most significant first. Swapping uses the
//! register (left of chi, right of chi, left of rho_$, right of rho_$) and
//! projects qubits 1 and 2.

use crate::channels::{KrausChannel, ZERO_PROB_CUTOFF};
use crate::duality::choi_state;
use crate::error::{Error, Result};
use crate::linalg::{kron, re, ComplexMatrix};
use crate::states::{bell_phi_plus, density_from_pure, pure_chi, DensityMatrix, PureState};

/// Normalized post-measurement state and its success probability.
#[derive(Debug, Clone)]
pub struct ProjectionOutcome {
    /// State of the unmeasured qubits; `1 x 1` when none remain.
    pub state: ComplexMatrix,
    pub prob: f64,
    pub remaining_qubits: usize,
}

impl ProjectionOutcome {
    /// `<psi| state |psi>` for a pure reference state.
    pub fn fidelity_with(&self, psi: &PureState) -> f64 {
        let v = psi.vector();
        let rho = if self.state.cols() == 1 {
            self.state.outer(&self.state)
        } else {
            self.state.clone()
        };
        (&(&v.adjoint() * &rho) * v)[(0, 0)].re
    }

    /// The outcome as a two-qubit density matrix.
    pub fn two_qubit_state(&self) -> Result<DensityMatrix> {
        if self.remaining_qubits != 2 {
            return Err(Error::DimensionMismatch(format!(
                "{} qubits remain, expected 2",
                self.remaining_qubits
            )));
        }
        let rho = if self.state.cols() == 1 {
            self.state.outer(&self.state)
        } else {
            self.state.clone()
        };
        DensityMatrix::two_qubit(rho)
    }
}

/// `(<phi+|_{a,b} (x) 1_rest)` as a `2^(n-2) x 2^n` matrix.
fn bell_projector(n: usize, a: usize, b: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let rest: Vec<usize> = (0..n).filter(|&q| q != a && q != b).collect();
    let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
    ComplexMatrix::from_fn(1 << rest.len(), 1 << n, |r, i| {
        if bit(i, a) != bit(i, b) {
            return re(0.0);
        }
        let packed = rest.iter().fold(0, |acc, &q| (acc << 1) | bit(i, q));
        if packed == r {
            re(s)
        } else {
            re(0.0)
        }
    })
}

/// Projects qubits `pair` of an `n`-qubit state onto `|phi+>`.
///
/// `joint` is either a `2^n x 1` state vector or a `2^n x 2^n` density
/// matrix; the outcome keeps the same representation.
pub fn bell_project(joint: &ComplexMatrix, pair: (usize, usize)) -> Result<ProjectionOutcome> {
    let dim = joint.rows();
    if !dim.is_power_of_two() || !(joint.cols() == 1 || joint.cols() == dim) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} is neither a qubit state vector nor a density matrix",
            joint.rows(),
            joint.cols()
        )));
    }
    let n = dim.trailing_zeros() as usize;
    let (a, b) = pair;
    if !(2..=4).contains(&n) || a == b || a >= n || b >= n {
        return Err(Error::DimensionMismatch(format!(
            "cannot project qubits ({a}, {b}) of a {n}-qubit register"
        )));
    }
    let proj = bell_projector(n, a, b);
    let (unnormalized, prob) = if joint.cols() == 1 {
        let v = &proj * joint;
        let prob = v.norm_sqr();
        (v, prob)
    } else {
        let sigma = &(&proj * joint) * &proj.adjoint();
        let prob = sigma.trace().re;
        (sigma, prob)
    };
    if !(prob > ZERO_PROB_CUTOFF) {
        return Err(Error::ZeroProbability { prob });
    }
    let state = if joint.cols() == 1 {
        unnormalized.scale_real(1.0 / prob.sqrt())
    } else {
        unnormalized.hermitian_part().scale_real(1.0 / prob)
    };
    Ok(ProjectionOutcome {
        state,
        prob,
        remaining_qubits: n - 2,
    })
}

/// Teleports a single-qubit state through `|phi+>` along the post-selected
/// branch: `|psi>_0 (x) |phi+>_{12}`, projecting qubits 0 and 1.
pub fn teleport_identity(psi: &PureState) -> Result<ProjectionOutcome> {
    if psi.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "teleportation input must be one qubit, got dimension {}",
            psi.dim()
        )));
    }
    let joint = kron(psi.vector(), bell_phi_plus().vector());
    bell_project(&joint, (0, 1))
}

/// Swaps entanglement from `|chi(omega)>` and the Choi state of `ch` onto
/// the outer qubits, giving a state on (left of chi, right of rho_$).
pub fn entanglement_swap(omega: f64, ch: &KrausChannel) -> Result<ProjectionOutcome> {
    let chi = density_from_pure(&pure_chi(omega)?);
    let choi = choi_state(ch)?;
    let joint = kron(chi.matrix(), choi.state.matrix());
    bell_project(&joint, (1, 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{apply_one_sided, make_amplitude_damping, make_filter, Side};
    use crate::linalg::c;
    use crate::rng::rng_for;
    use crate::states::random_pure_from;

    fn qubit(a: f64, b: crate::linalg::C64) -> PureState {
        PureState::normalize(ComplexMatrix::column(&[re(a), b])).unwrap()
    }

    /// Teleportation computed by hand: for `|psi> = a|0> + b|1>`,
    /// `(<phi+| (x) 1)(|psi> (x) |phi+>) = |psi> / 2`.
    #[test]
    fn teleportation_basis_states() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for psi in [
            qubit(1.0, re(0.0)),
            qubit(0.0, re(1.0)),
            qubit(s, re(s)),
            qubit(0.6, c(0.0, 0.8)),
        ] {
            let out = teleport_identity(&psi).unwrap();
            assert!((out.prob - 0.25).abs() < 1e-12);
            assert!(out.state.max_diff(psi.vector()) < 1e-12);
            assert!((out.fidelity_with(&psi) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn teleportation_random_inputs() {
        let mut rng = rng_for(77, 0);
        for _ in 0..100 {
            let psi = random_pure_from(&mut rng, 1);
            let out = teleport_identity(&psi).unwrap();
            assert!((out.prob - 0.25).abs() < 1e-12);
            assert!(out.fidelity_with(&psi) >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn projecting_bell_pair_onto_itself() {
        let out = bell_project(bell_phi_plus().vector(), (0, 1)).unwrap();
        assert!((out.prob - 1.0).abs() < 1e-15);
        assert_eq!(out.remaining_qubits, 0);
        assert!((out.state[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projecting_00() {
        let out = bell_project(PureState::basis(4, 0).vector(), (0, 1)).unwrap();
        assert!((out.prob - 0.5).abs() < 1e-15);
        let rho = density_from_pure(&PureState::basis(4, 0));
        let out = bell_project(rho.matrix(), (1, 0)).unwrap();
        assert!((out.prob - 0.5).abs() < 1e-15);
    }

    #[test]
    fn projection_errors() {
        let v = PureState::basis(8, 0);
        assert!(bell_project(v.vector(), (1, 1)).is_err());
        assert!(bell_project(v.vector(), (0, 3)).is_err());
        assert!(bell_project(&ComplexMatrix::zeros(8, 2), (0, 1)).is_err());
        let orth = PureState::basis(4, 1);
        assert!(matches!(
            bell_project(orth.vector(), (0, 1)),
            Err(Error::ZeroProbability { .. })
        ));
    }

    #[test]
    fn swap_identity_channel() {
        let out = entanglement_swap(0.5, &KrausChannel::identity()).unwrap();
        assert!((out.prob - 0.25).abs() < 1e-12);
        let phi = density_from_pure(&bell_phi_plus());
        assert!(out.state.max_diff(phi.matrix()) < 1e-12);
        let out = entanglement_swap(0.3, &KrausChannel::identity()).unwrap();
        let chi = density_from_pure(&pure_chi(0.3).unwrap());
        assert!(out.state.max_diff(chi.matrix()) < 1e-12);
    }

    #[test]
    fn swap_matches_direct_action() {
        for ch in [
            make_amplitude_damping(0.4).unwrap(),
            make_filter(0.3).unwrap(),
        ] {
            let out = entanglement_swap(0.25, &ch).unwrap();
            let chi = density_from_pure(&pure_chi(0.25).unwrap());
            let direct = apply_one_sided(&ch, &chi, Side::Right).unwrap();
            assert!(out.state.max_diff(direct.state.matrix()) < 1e-9);
            assert_eq!(out.two_qubit_state().unwrap().validate(), Ok(()));
        }
    }
}
