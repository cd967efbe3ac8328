//! Wootters concurrence and the entanglement-decay relations built on it.
//!
//! The central relation: for any single-qubit channel acting on one side of
//! a pure two-qubit state, the output concurrence is the channel's Choi-state
//! concurrence times the input concurrence. The mixed-state, two-sided and
//! concatenation statements follow from it as upper bounds.

use serde::Serialize;

use crate::channels::{
    apply_one_sided, apply_two_sided, compose, ApplicationResult, KrausChannel, Side,
};
use crate::duality::choi_state;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, kron, pauli_y, sqrtm_psd, ComplexMatrix, PSD_TOL};
use crate::states::{bell_phi_plus, density_from_pure, DensityMatrix, PureState};

/// Slack allowed on the right-hand side of an entanglement bound.
pub const BOUND_TOL: f64 = 1e-9;

/// `rhs - lhs` of an inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub passed: bool,
}

impl BoundReport {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            lhs,
            rhs,
            margin,
            passed: margin >= -BOUND_TOL,
        }
    }
}

/// `(sigma_y (x) sigma_y) rho^* (sigma_y (x) sigma_y)`.
pub fn spin_flip(rho: &ComplexMatrix) -> ComplexMatrix {
    let yy = kron(&pauli_y(), &pauli_y());
    &(&yy * &rho.conj()) * &yy
}

/// Eigenvalues of `rho * spin_flip(rho)`, descending and unclamped.
///
/// The product is not Hermitian, but it is similar to the Hermitian PSD
/// matrix `sqrt(rho) spin_flip(rho) sqrt(rho)`, whose spectrum is computed
/// instead.
pub fn wootters_spectrum(rho: &ComplexMatrix) -> Result<Vec<f64>> {
    if rho.rows() != 4 || rho.cols() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "concurrence needs a 4x4 matrix, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let root = sqrtm_psd(rho)?;
    let r = &(&root * &spin_flip(rho)) * &root;
    Ok(eig_hermitian(&r.hermitian_part())?.values)
}

/// `sqrt` of the Wootters spectrum, descending, computed without taking
/// square roots of the spectrum itself.
///
/// The roots are the singular values of the complex symmetric matrix
/// `T = sqrt(rho) (sigma_y (x) sigma_y) sqrt(rho)^*`, since
/// `T T^dagger = sqrt(rho) spin_flip(rho) sqrt(rho)`. They are read off the
/// Hermitian embedding `[[0, T], [T^dagger, 0]]`, whose eigenvalues are
/// `+-sigma_i`. Square-rooting roundoff-level eigenvalues directly would
/// cost about eight digits.
pub fn wootters_roots(rho: &ComplexMatrix) -> Result<Vec<f64>> {
    if rho.rows() != 4 || rho.cols() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "concurrence needs a 4x4 matrix, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let root = rank_aware_sqrt(rho)?;
    let yy = kron(&pauli_y(), &pauli_y());
    let t = &(&root * &yy) * &root.conj();
    let embedded = ComplexMatrix::from_fn(8, 8, |i, j| match (i < 4, j < 4) {
        (true, false) => t[(i, j - 4)],
        (false, true) => t[(j, i - 4)].conj(),
        _ => crate::linalg::re(0.0),
    });
    let values = eig_hermitian(&embedded)?.values;
    Ok(values[..4].iter().map(|&v| v.max(0.0)).collect())
}

/// Eigenvalues of `rho` below this fraction of its largest eigenvalue are
/// treated as exact zeros before square-rooting.
const RANK_CUTOFF: f64 = 1e-13;

/// `sqrt(rho)` with roundoff-level eigenvalues dropped.
///
/// The concurrence is not Lipschitz at rank-deficient states: an eigenvalue
/// `eps` can move the roots by `sqrt(eps)`, so roundoff of `1e-17` in a
/// state that should have rank one costs several digits.
fn rank_aware_sqrt(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = eig_hermitian(rho)?;
    let largest = spec.values.first().copied().unwrap_or(0.0);
    if let Some(&min) = spec.values.last() {
        if min < -PSD_TOL {
            return Err(Error::NotPsd { eigenvalue: min });
        }
    }
    let cutoff = RANK_CUTOFF * largest.max(0.0);
    Ok(spec.reconstruct_with(|x| if x > cutoff { x.sqrt() } else { 0.0 }))
}

/// `max(0, r1 - r2 - r3 - r4)` for descending Wootters roots.
pub fn concurrence_from_roots(roots: &[f64]) -> f64 {
    let (first, rest) = roots.split_first().expect("non-empty spectrum");
    (first - rest.iter().sum::<f64>()).clamp(0.0, 1.0)
}

/// `max(0, sqrt(x1) - sqrt(x2) - sqrt(x3) - sqrt(x4))` for a descending
/// spectrum; negative entries count as zero.
pub fn concurrence_from_spectrum(xi: &[f64]) -> f64 {
    let roots: Vec<f64> = xi.iter().map(|&x| x.max(0.0).sqrt()).collect();
    concurrence_from_roots(&roots)
}

pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "concurrence needs a two-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    rho.validate().map_err(Error::InvalidState)?;
    Ok(concurrence_from_roots(&wootters_roots(rho.matrix())?))
}

/// `2 |a d - b c|` for amplitudes `(a, b, c, d)` of a two-qubit pure state.
pub fn concurrence_pure(psi: &PureState) -> Result<f64> {
    if psi.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "concurrence needs a two-qubit state, got dimension {}",
            psi.dim()
        )));
    }
    let a = psi.amplitudes();
    Ok((2.0 * (a[0] * a[3] - a[1] * a[2]).norm()).min(1.0))
}

/// Concurrence of an unnormalized output, `tr(sigma) C(sigma / tr sigma)`.
///
/// Concurrence extends to unnormalized positive operators by homogeneity.
/// The decay relations below hold in this form for every channel; for
/// trace-preserving channels it coincides with the ordinary concurrence.
pub fn weighted_concurrence(out: &ApplicationResult) -> Result<f64> {
    Ok(out.prob * concurrence(&out.state)?)
}

/// Concurrence of the normalized Choi state `(1 (x) ch)|phi+><phi+| / p''`,
/// or of `(ch (x) 1)|phi+><phi+| / p''` for `Side::Left`.
pub fn choi_concurrence(ch: &KrausChannel, side: Side) -> Result<f64> {
    let out = choi_output(ch, side)?;
    concurrence(&out.state)
}

fn choi_output(ch: &KrausChannel, side: Side) -> Result<ApplicationResult> {
    match side {
        Side::Right => {
            let cs = choi_state(ch)?;
            Ok(ApplicationResult {
                state: cs.state,
                prob: cs.prob,
            })
        }
        Side::Left => apply_one_sided(ch, &density_from_pure(&bell_phi_plus()), Side::Left),
    }
}

/// `p'' C(rho_$)`: the Choi concurrence before normalization.
pub fn weighted_choi_concurrence(ch: &KrausChannel, side: Side) -> Result<f64> {
    weighted_concurrence(&choi_output(ch, side)?)
}

/// Concurrences entering the factorization law, all trace-weighted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorizationCheck {
    /// `C[(1 (x) ch)|psi><psi|]`.
    pub output: f64,
    /// `C[(1 (x) ch)|phi+><phi+|]`.
    pub choi: f64,
    /// `C(|psi>)`.
    pub initial: f64,
    pub residual: f64,
}

/// `|C[(1 (x) ch)|psi><psi|] - C[(1 (x) ch)|phi+><phi+|] C(|psi>)|`.
pub fn factorization_residual(ch: &KrausChannel, psi: &PureState) -> Result<FactorizationCheck> {
    let initial = concurrence_pure(psi)?;
    let output = match apply_one_sided(ch, &density_from_pure(psi), Side::Right) {
        Ok(out) => weighted_concurrence(&out)?,
        // An annihilated product state has nothing to compare.
        Err(Error::ZeroProbability { .. }) if initial == 0.0 => {
            return Ok(FactorizationCheck {
                output: 0.0,
                choi: 0.0,
                initial,
                residual: 0.0,
            })
        }
        Err(e) => return Err(e),
    };
    let choi = weighted_choi_concurrence(ch, Side::Right)?;
    Ok(FactorizationCheck {
        output,
        choi,
        initial,
        residual: (output - choi * initial).abs(),
    })
}

/// `C[(1 (x) ch) rho0] <= C[(1 (x) ch)|phi+><phi+|] C(rho0)`.
pub fn mixed_bound_margin(ch: &KrausChannel, rho0: &DensityMatrix) -> Result<BoundReport> {
    let lhs = weighted_concurrence(&apply_one_sided(ch, rho0, Side::Right)?)?;
    let rhs = weighted_choi_concurrence(ch, Side::Right)? * concurrence(rho0)?;
    Ok(BoundReport::new(lhs, rhs))
}

/// `C[(ch1 (x) ch2) rho0] <= C[(ch1 (x) 1)phi+] C[(1 (x) ch2)phi+] C(rho0)`.
pub fn two_sided_margin(
    ch1: &KrausChannel,
    ch2: &KrausChannel,
    rho0: &DensityMatrix,
) -> Result<BoundReport> {
    let lhs = weighted_concurrence(&apply_two_sided(ch1, ch2, rho0)?)?;
    let rhs = weighted_choi_concurrence(ch1, Side::Left)?
        * weighted_choi_concurrence(ch2, Side::Right)?
        * concurrence(rho0)?;
    Ok(BoundReport::new(lhs, rhs))
}

/// `C[(1 (x) ch2 ch1)phi+] <= C[(1 (x) ch2)phi+] C[(1 (x) ch1)phi+]`.
pub fn concat_margin(ch2: &KrausChannel, ch1: &KrausChannel) -> Result<BoundReport> {
    let lhs = weighted_choi_concurrence(&compose(ch2, ch1), Side::Right)?;
    let rhs =
        weighted_choi_concurrence(ch2, Side::Right)? * weighted_choi_concurrence(ch1, Side::Right)?;
    Ok(BoundReport::new(lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideConfig {
    /// Channel on the right qubit only.
    OneSided,
    /// The same channel on both qubits.
    TwoSided,
}

/// Bound values at or below this count as zero.
const ZERO_BOUND: f64 = 1e-12;
const GRID_POINTS: usize = 101;
const MONOTONE_SLACK: f64 = 1e-12;

/// Choi-concurrence upper bound on the output concurrence of every initial
/// state, for the family member at `x`.
pub fn disentanglement_bound<F>(family: &F, sides: SideConfig, x: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<KrausChannel>,
{
    let ch = family(x)?;
    let right = choi_concurrence(&ch, Side::Right)?;
    Ok(match sides {
        SideConfig::OneSided => right,
        SideConfig::TwoSided => choi_concurrence(&ch, Side::Left)? * right,
    })
}

/// Smallest parameter in `[0, 1]` at which the Choi-concurrence bound
/// vanishes; beyond it every initial state is disentangled.
///
/// The bound (for two sides, its smaller factor) must be non-increasing on a
/// 101-point grid up to its first zero.
/// The result is the upper end of the final bisection bracket, so it never
/// undershoots the true threshold by more than rounding.
pub fn disentanglement_threshold<F>(family: F, sides: SideConfig, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<KrausChannel>,
{
    if !(tol > 0.0) {
        return Err(Error::OutOfRange {
            name: "tol",
            value: tol,
            range: "(0, inf)".into(),
        });
    }
    // The two-sided bound is a product, which vanishes exactly where its
    // smaller factor does. Testing the factor keeps the zero test from
    // triggering early on the squared tail.
    let bound = |x: f64| -> Result<f64> {
        let ch = family(x)?;
        let right = choi_concurrence(&ch, Side::Right)?;
        Ok(match sides {
            SideConfig::OneSided => right,
            SideConfig::TwoSided => right.min(choi_concurrence(&ch, Side::Left)?),
        })
    };

    let mut prev = bound(0.0)?;
    if prev <= ZERO_BOUND {
        return Ok(0.0);
    }
    let mut bracket = None;
    for k in 1..GRID_POINTS {
        let x = k as f64 / (GRID_POINTS - 1) as f64;
        let value = bound(x)?;
        if value > prev + MONOTONE_SLACK {
            return Err(Error::NotMonotonic { at: x });
        }
        if value <= ZERO_BOUND {
            bracket = Some(((k - 1) as f64 / (GRID_POINTS - 1) as f64, x));
            break;
        }
        prev = value;
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NoRoot { at_one: prev })?;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if bound(mid)? <= ZERO_BOUND {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{
        make_amplitude_damping, make_depolarizing, make_filter, make_phase_flip, random_channel,
    };
    use crate::linalg::{c, re};
    use crate::rng::{random_unitary, rng_for};
    use crate::states::{pure_chi, random_mixed, random_pure};

    fn werner(p: f64) -> DensityMatrix {
        let phi = density_from_pure(&bell_phi_plus());
        let m = &phi.matrix().scale_real(1.0 - p) + &ComplexMatrix::identity(4).scale_real(p / 4.0);
        DensityMatrix::two_qubit(m).unwrap()
    }

    #[test]
    fn bell_state_is_maximally_entangled() {
        let c = concurrence(&density_from_pure(&bell_phi_plus())).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        assert!((concurrence_pure(&bell_phi_plus()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chi_grid_matches_closed_form() {
        for k in 0..=10 {
            let omega = k as f64 / 10.0;
            let expected = 2.0 * (omega * (1.0 - omega)).sqrt();
            let psi = pure_chi(omega).unwrap();
            let got = concurrence(&density_from_pure(&psi)).unwrap();
            assert!(
                (got - expected).abs() < 1e-10,
                "omega {omega}: {got} vs {expected}"
            );
            assert!((concurrence_pure(&psi).unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn separable_states_have_zero_concurrence() {
        assert_eq!(
            concurrence(&DensityMatrix::maximally_mixed((1, 1))).unwrap(),
            0.0
        );
        assert_eq!(concurrence_pure(&PureState::basis(4, 0)).unwrap(), 0.0);
    }

    #[test]
    fn werner_state() {
        // Eigenvalues of rho * spin_flip(rho) for the Werner state are
        // ((1 - 3p/4)^2, (p/4)^2, (p/4)^2, (p/4)^2), so C = 1 - 3p/2.
        let c = concurrence(&werner(0.5)).unwrap();
        assert!((c - 0.25).abs() < 1e-12, "{c}");
        assert!(concurrence(&werner(0.8)).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_invalid_input() {
        let bad = DensityMatrix::two_qubit(ComplexMatrix::real_diag(&[1.5, -0.5, 0.0, 0.0]));
        assert!(matches!(bad, Err(Error::InvalidState(_))));
        assert!(concurrence_pure(&PureState::basis(2, 0)).is_err());
    }

    #[test]
    fn pure_formula_agrees_with_wootters() {
        for seed in 0..1000u64 {
            let psi = random_pure(seed);
            let a = concurrence_pure(&psi).unwrap();
            let b = concurrence(&density_from_pure(&psi)).unwrap();
            assert!((a - b).abs() < 1e-10, "seed {seed}: {a} vs {b}");
        }
    }

    #[test]
    fn local_unitary_invariance() {
        for seed in 0..500u64 {
            let mut rng = rng_for(seed, 99);
            let rho = random_mixed(seed, 1 + (seed % 4) as usize).unwrap();
            let u = kron(&random_unitary(&mut rng, 2), &random_unitary(&mut rng, 2));
            let rotated = &(&u * rho.matrix()) * &u.adjoint();
            let a = concurrence(&rho).unwrap();
            let b = concurrence(&DensityMatrix::two_qubit(rotated).unwrap()).unwrap();
            assert!((0.0..=1.0).contains(&a));
            assert!((a - b).abs() <= 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn spin_flip_of_complex_state() {
        let psi = PureState::normalize(ComplexMatrix::column(&[
            re(1.0),
            c(0.0, 1.0),
            re(0.5),
            c(0.2, -0.3),
        ]))
        .unwrap();
        let rho = density_from_pure(&psi);
        // For pure states <psi~|psi> gives the concurrence directly.
        let flipped = spin_flip(rho.matrix());
        let overlap = (&(&psi.vector().adjoint() * &flipped) * psi.vector())[(0, 0)];
        let c_pure = concurrence_pure(&psi).unwrap();
        assert!((overlap.re.sqrt() - c_pure).abs() < 1e-12);
    }

    #[test]
    fn identity_and_damping_factorize() {
        for seed in 0..20 {
            let psi = random_pure(seed);
            let r = factorization_residual(&KrausChannel::identity(), &psi).unwrap();
            assert!(r.residual < 1e-12);
        }
        for &gamma in &[0.1, 0.36, 0.9] {
            for &omega in &[0.2, 0.5, 0.7] {
                let psi = pure_chi(omega).unwrap();
                let r =
                    factorization_residual(&make_amplitude_damping(gamma).unwrap(), &psi).unwrap();
                let expected = (1.0 - gamma).sqrt() * 2.0 * (omega * (1.0 - omega)).sqrt();
                assert!((r.output - expected).abs() < 1e-10);
                assert!(r.residual < 1e-10);
            }
        }
    }

    #[test]
    fn factorization_with_filters_and_annihilation() {
        let f = make_filter(0.3).unwrap();
        for seed in 0..50 {
            assert!(
                factorization_residual(&f, &random_pure(seed))
                    .unwrap()
                    .residual
                    < 1e-9
            );
        }
        // Normalized concurrences do not factorize for a filter: the
        // probabilities p' and p'' differ.
        let psi = random_pure(3);
        let out = apply_one_sided(&f, &density_from_pure(&psi), Side::Right).unwrap();
        let normalized = concurrence(&out.state).unwrap();
        let choi = choi_concurrence(&f, Side::Right).unwrap();
        let c_in = concurrence_pure(&psi).unwrap();
        assert!((normalized - choi * c_in).abs() > 1e-3);
        let product = PureState::basis(4, 3);
        let r = factorization_residual(&make_filter(1.0).unwrap(), &product).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn bounds_basic_cases() {
        let ch = random_channel(3, 2).unwrap();
        let pure = random_mixed(9, 1).unwrap();
        assert!(mixed_bound_margin(&ch, &pure).unwrap().margin.abs() < 1e-9);
        let mixed = DensityMatrix::maximally_mixed((1, 1));
        let r = mixed_bound_margin(&ch, &mixed).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let id = KrausChannel::identity();
        let r = two_sided_margin(&id, &id, &pure).unwrap();
        assert!(r.margin.abs() < 1e-9);
        let r = concat_margin(&id, &ch).unwrap();
        assert!(r.margin.abs() < 1e-10);
    }

    #[test]
    fn damping_then_dephasing_is_an_equality() {
        for &(gamma, p) in &[(0.2, 0.1), (0.5, 0.3), (0.9, 0.05)] {
            let r = concat_margin(
                &make_phase_flip(p).unwrap(),
                &make_amplitude_damping(gamma).unwrap(),
            )
            .unwrap();
            let expected = (1.0 - gamma).sqrt() * (1.0 - 2.0 * p).abs();
            assert!((r.lhs - expected).abs() < 1e-9);
            assert!((r.rhs - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn bound_report_pass_flag() {
        assert!(BoundReport::new(0.5, 0.5 - 0.5e-9).passed);
        assert!(!BoundReport::new(0.5, 0.5 - 2e-9).passed);
    }

    #[test]
    fn thresholds() {
        let t = disentanglement_threshold(make_depolarizing, SideConfig::OneSided, 1e-9).unwrap();
        assert!((t - 2.0 / 3.0).abs() < 1e-6, "{t}");
        let t = disentanglement_threshold(make_depolarizing, SideConfig::TwoSided, 1e-9).unwrap();
        assert!((t - 2.0 / 3.0).abs() < 1e-6, "{t}");
        let t = disentanglement_threshold(make_phase_flip, SideConfig::OneSided, 1e-9).unwrap();
        assert!((t - 0.5).abs() < 1e-6, "{t}");
        let t =
            disentanglement_threshold(make_amplitude_damping, SideConfig::OneSided, 1e-9).unwrap();
        assert!((t - 1.0).abs() < 1e-9, "{t}");
    }

    #[test]
    fn threshold_errors() {
        let reversed = |x: f64| make_depolarizing(0.5 - 0.5 * x);
        assert!(matches!(
            disentanglement_threshold(reversed, SideConfig::OneSided, 1e-9),
            Err(Error::NotMonotonic { .. })
        ));
        let weak = |x: f64| make_depolarizing(0.5 * x);
        assert!(matches!(
            disentanglement_threshold(weak, SideConfig::OneSided, 1e-9),
            Err(Error::NoRoot { .. })
        ));
        assert!(disentanglement_threshold(make_depolarizing, SideConfig::OneSided, 0.0).is_err());
    }
}
