//! Channel-state duality.
//!
//! A qubit channel `$` is encoded by its Choi state
//! `rho_$ = (1 (x) $)|phi+><phi+| / p''`, and a pure state
//! `|chi> = sqrt(w)|00> + sqrt(1-w)|11>` by the filter `M` of
//! [`make_filter`]. Sending the right qubit of `|chi>` through `$` gives the
//! same normalized state as filtering the left qubit of `rho_$` with `M`.
//! Because `M` is diagonal and real, the spin-flip spectra of the two sides
//! differ only by the factor `w(1-w) / (4 p^2)`, which is what makes output
//! concurrence factorize.

use serde::Serialize;

use crate::channels::{apply_one_sided, make_filter, validate_channel, KrausChannel, Side};
use crate::entanglement::wootters_spectrum;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, PSD_TOL};
use crate::states::{bell_phi_plus, density_from_pure, pure_chi, DensityMatrix};

/// Choi eigenvalues below this are dropped when rebuilding Kraus operators.
const KRAUS_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct ChoiState {
    pub state: DensityMatrix,
    /// Trace of `(1 (x) $)|phi+><phi+|` before normalization.
    pub prob: f64,
}

impl ChoiState {
    /// The unnormalized Choi matrix `(1 (x) $)|phi+><phi+|`.
    pub fn unnormalized(&self) -> ComplexMatrix {
        self.state.matrix().scale_real(self.prob)
    }
}

pub fn choi_state(ch: &KrausChannel) -> Result<ChoiState> {
    let phi = density_from_pure(&bell_phi_plus());
    let out = apply_one_sided(ch, &phi, Side::Right)?;
    Ok(ChoiState {
        state: out.state,
        prob: out.prob,
    })
}

fn check_open_unit(omega: f64) -> Result<()> {
    if omega > 0.0 && omega < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "omega",
            value: omega,
            range: "(0, 1)".into(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct DualCheck {
    /// `(1 (x) $)|chi><chi| / p'`.
    pub direct: DensityMatrix,
    /// `(M (x) 1) rho_$ (M (x) 1)^dagger / p`.
    pub dual: DensityMatrix,
    /// `p'`, the probability of `$` acting on `|chi><chi|`.
    pub direct_prob: f64,
    /// `p`, the probability of the filter acting on `rho_$`.
    pub dual_prob: f64,
    /// Largest entrywise deviation between the two states.
    pub residual: f64,
}

/// Compares the laboratory picture with the dual picture for `|chi(omega)>`.
pub fn dual_check(ch: &KrausChannel, omega: f64) -> Result<DualCheck> {
    check_open_unit(omega)?;
    let chi = density_from_pure(&pure_chi(omega)?);
    let direct = apply_one_sided(ch, &chi, Side::Right)?;
    let choi = choi_state(ch)?;
    let dual = apply_one_sided(&make_filter(omega)?, &choi.state, Side::Left)?;
    let residual = direct.state.matrix().max_diff(dual.state.matrix());
    Ok(DualCheck {
        direct: direct.state,
        dual: dual.state,
        direct_prob: direct.prob,
        dual_prob: dual.prob,
        residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    /// Spin-flip spectrum of the output state, descending.
    pub output_spectrum: Vec<f64>,
    /// Spin-flip spectrum of the Choi state, descending.
    pub choi_spectrum: Vec<f64>,
    /// `omega (1 - omega) / (4 p^2)`.
    pub factor: f64,
    /// `max_i |output_i - factor * choi_i|`.
    pub residual: f64,
}

pub fn eigen_proportionality(ch: &KrausChannel, omega: f64) -> Result<EigenReport> {
    let dual = dual_check(ch, omega)?;
    let choi = choi_state(ch)?;
    let output_spectrum = wootters_spectrum(dual.direct.matrix())?;
    let choi_spectrum = wootters_spectrum(choi.state.matrix())?;
    let p = dual.dual_prob;
    let factor = omega * (1.0 - omega) / (4.0 * p * p);
    let residual = output_spectrum
        .iter()
        .zip(&choi_spectrum)
        .map(|(x, y)| (x - factor * y).abs())
        .fold(0.0, f64::max);
    Ok(EigenReport {
        output_spectrum,
        choi_spectrum,
        factor,
        residual,
    })
}

/// Rebuilds Kraus operators from a Choi state.
///
/// With `J = p'' rho_$ = sum_k |w_k><w_k|`, each `K_k` has entries
/// `K_k[a][i] = sqrt(2) w_k[2 i + a]`.
pub fn channel_from_choi(cs: &ChoiState) -> Result<KrausChannel> {
    let j = cs.unnormalized();
    let spec = eig_hermitian(&j.hermitian_part())?;
    if let Some(&min) = spec.values.last() {
        if min < -PSD_TOL {
            return Err(Error::NotPsd { eigenvalue: min });
        }
    }
    let vectors = spec.vectors.as_ref().expect("eigenvectors requested");
    let sqrt2 = std::f64::consts::SQRT_2;
    let kraus: Vec<ComplexMatrix> = spec
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > KRAUS_CUTOFF)
        .map(|(k, &l)| {
            let w = l.sqrt() * sqrt2;
            ComplexMatrix::from_fn(2, 2, |a, i| vectors[(2 * i + a, k)] * w)
        })
        .collect();
    if kraus.is_empty() {
        return Err(Error::ZeroProbability { prob: cs.prob });
    }
    let mut ch = KrausChannel {
        name: "from_choi".into(),
        kraus,
        trace_preserving: false,
    };
    ch.trace_preserving = ch.completeness().max_diff(&ComplexMatrix::identity(2)) <= 1e-10;
    validate_channel(&ch).map_err(|v| Error::InvalidChannel(v.to_string()))?;
    Ok(ch)
}
