//! Single-qubit Kraus channels and their one- and two-sided action on
//! two-qubit states.

use std::fmt;

use crate::error::{check_range, Error, Result};
use crate::linalg::{eig_hermitian, kron, pauli_x, pauli_y, pauli_z, ComplexMatrix};
use crate::rng::{ginibre, orthonormalize_columns, rng_for, TrialRng};
use crate::states::DensityMatrix;

/// Outputs with trace at or below this are refused instead of normalized.
pub const ZERO_PROB_CUTOFF: f64 = 1e-14;
pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    pub name: String,
    pub kraus: Vec<ComplexMatrix>,
    pub trace_preserving: bool,
}

/// A normalized output state together with the trace it had before
/// normalization.
#[derive(Debug, Clone)]
pub struct ApplicationResult {
    pub state: DensityMatrix,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelViolation {
    Empty,
    NotQubitOperator {
        index: usize,
        rows: usize,
        cols: usize,
    },
    CompletenessExceeded {
        max_eigenvalue: f64,
    },
    NotTracePreserving {
        deviation: f64,
    },
}

impl fmt::Display for ChannelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelViolation::Empty => write!(f, "empty Kraus list"),
            ChannelViolation::NotQubitOperator { index, rows, cols } => {
                write!(f, "Kraus operator {index} is {rows}x{cols}, expected 2x2")
            }
            ChannelViolation::CompletenessExceeded { max_eigenvalue } => write!(
                f,
                "completeness exceeded: sum K^dagger K has eigenvalue {max_eigenvalue}"
            ),
            ChannelViolation::NotTracePreserving { deviation } => write!(
                f,
                "flagged trace-preserving but sum K^dagger K deviates from identity by {deviation:e}"
            ),
        }
    }
}

impl KrausChannel {
    /// Builds and validates a channel.
    pub fn new(
        name: impl Into<String>,
        kraus: Vec<ComplexMatrix>,
        trace_preserving: bool,
    ) -> Result<Self> {
        let ch = Self {
            name: name.into(),
            kraus,
            trace_preserving,
        };
        validate_channel(&ch).map_err(|v| Error::InvalidChannel(v.to_string()))?;
        Ok(ch)
    }

    pub fn identity() -> Self {
        Self {
            name: "identity".into(),
            kraus: vec![ComplexMatrix::identity(2)],
            trace_preserving: true,
        }
    }

    /// `sum_i K_i^dagger K_i`.
    pub fn completeness(&self) -> ComplexMatrix {
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(2, 2), |acc, k| {
                &acc + &(&k.adjoint() * k)
            })
    }

    /// Applies the channel to one qubit of `rho` without normalizing.
    pub fn act_unnormalized(&self, rho: &ComplexMatrix, side: Side) -> ComplexMatrix {
        let id = ComplexMatrix::identity(2);
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(4, 4), |acc, k| {
                let op = match side {
                    Side::Left => kron(k, &id),
                    Side::Right => kron(&id, k),
                };
                &acc + &(&(&op * rho) * &op.adjoint())
            })
    }

    /// Single-qubit action `sum_i K_i rho K_i^dagger`.
    pub fn act_on_qubit(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(2, 2), |acc, k| {
                &acc + &(&(k * rho) * &k.adjoint())
            })
    }
}

pub fn validate_channel(ch: &KrausChannel) -> std::result::Result<(), ChannelViolation> {
    if ch.kraus.is_empty() {
        return Err(ChannelViolation::Empty);
    }
    for (index, k) in ch.kraus.iter().enumerate() {
        if k.rows() != 2 || k.cols() != 2 {
            return Err(ChannelViolation::NotQubitOperator {
                index,
                rows: k.rows(),
                cols: k.cols(),
            });
        }
    }
    let sum = ch.completeness();
    let max_eigenvalue = eig_hermitian(&sum.hermitian_part())
        .map(|s| s.values[0])
        .unwrap_or(f64::INFINITY);
    if max_eigenvalue > 1.0 + COMPLETENESS_TOL {
        return Err(ChannelViolation::CompletenessExceeded { max_eigenvalue });
    }
    if ch.trace_preserving {
        let deviation = sum.max_diff(&ComplexMatrix::identity(2));
        if deviation > COMPLETENESS_TOL {
            return Err(ChannelViolation::NotTracePreserving { deviation });
        }
    }
    Ok(())
}

pub fn make_amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    check_range("gamma", gamma, 0.0, 1.0)?;
    let k0 = ComplexMatrix::real_diag(&[1.0, (1.0 - gamma).sqrt()]);
    let k1 = ComplexMatrix::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]]);
    Ok(KrausChannel {
        name: format!("amplitude_damping:{gamma}"),
        kraus: vec![k0, k1],
        trace_preserving: true,
    })
}

pub fn make_phase_flip(p: f64) -> Result<KrausChannel> {
    check_range("p", p, 0.0, 1.0)?;
    Ok(KrausChannel {
        name: format!("phase_flip:{p}"),
        kraus: vec![
            ComplexMatrix::identity(2).scale_real((1.0 - p).sqrt()),
            pauli_z().scale_real(p.sqrt()),
        ],
        trace_preserving: true,
    })
}

pub fn make_depolarizing(p: f64) -> Result<KrausChannel> {
    check_range("p", p, 0.0, 1.0)?;
    let w = (p / 4.0).sqrt();
    Ok(KrausChannel {
        name: format!("depolarizing:{p}"),
        kraus: vec![
            ComplexMatrix::identity(2).scale_real((1.0 - 0.75 * p).sqrt()),
            pauli_x().scale_real(w),
            pauli_y().scale_real(w),
            pauli_z().scale_real(w),
        ],
        trace_preserving: true,
    })
}

/// Single-Kraus filter `M = (sqrt(omega)|0><0| + sqrt(1-omega)|1><1|) / sqrt(2)`.
///
/// Acting on one half of a maximally entangled pair it produces
/// `sqrt(omega)|00> + sqrt(1-omega)|11>` with probability 1/4, which is how a
/// pure two-qubit state is encoded as a channel.
pub fn make_filter(omega: f64) -> Result<KrausChannel> {
    check_range("omega", omega, 0.0, 1.0)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(KrausChannel {
        name: format!("filter:{omega}"),
        kraus: vec![ComplexMatrix::real_diag(&[
            omega.sqrt() * s,
            (1.0 - omega).sqrt() * s,
        ])],
        trace_preserving: false,
    })
}

/// Trace-preserving channel with `kraus_rank` operators, cut from a
/// Haar-random isometry `C^2 -> C^2 (x) C^rank`.
pub fn random_channel_from(rng: &mut TrialRng, kraus_rank: usize) -> Result<KrausChannel> {
    check_range("kraus_rank", kraus_rank as f64, 1.0, 4.0)?;
    let v = orthonormalize_columns(&ginibre(rng, 2 * kraus_rank, 2));
    // Row index of the isometry is system * rank + environment.
    let kraus = (0..kraus_rank)
        .map(|e| ComplexMatrix::from_fn(2, 2, |s, col| v[(s * kraus_rank + e, col)]))
        .collect();
    Ok(KrausChannel {
        name: format!("random(rank={kraus_rank})"),
        kraus,
        trace_preserving: true,
    })
}

pub fn random_channel(seed: u64, kraus_rank: usize) -> Result<KrausChannel> {
    random_channel_from(&mut rng_for(seed, 0), kraus_rank)
}

/// `second` after `first`: Kraus set `{B_i A_j}`.
pub fn compose(second: &KrausChannel, first: &KrausChannel) -> KrausChannel {
    let kraus = second
        .kraus
        .iter()
        .flat_map(|b| first.kraus.iter().map(move |a| b * a))
        .collect();
    KrausChannel {
        name: format!("compose({},{})", second.name, first.name),
        kraus,
        trace_preserving: second.trace_preserving && first.trace_preserving,
    }
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    Ok(())
}

pub fn apply_one_sided(
    ch: &KrausChannel,
    rho: &DensityMatrix,
    side: Side,
) -> Result<ApplicationResult> {
    check_two_qubit(rho)?;
    let sigma = ch.act_unnormalized(rho.matrix(), side);
    let (state, prob) = DensityMatrix::normalized_unchecked(&sigma, (1, 1))?;
    Ok(ApplicationResult { state, prob })
}

/// `(left (x) right) rho`, normalized. The reported probability is the trace
/// of the unnormalized two-sided output.
pub fn apply_two_sided(
    ch_left: &KrausChannel,
    ch_right: &KrausChannel,
    rho: &DensityMatrix,
) -> Result<ApplicationResult> {
    check_two_qubit(rho)?;
    let sigma = ch_left.act_unnormalized(
        &ch_right.act_unnormalized(rho.matrix(), Side::Right),
        Side::Left,
    );
    let (state, prob) = DensityMatrix::normalized_unchecked(&sigma, (1, 1))?;
    Ok(ApplicationResult { state, prob })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, re};
    use crate::states::{bell_phi_plus, density_from_pure, pure_chi, random_mixed};

    fn phi_plus() -> DensityMatrix {
        density_from_pure(&bell_phi_plus())
    }

    /// Single-qubit test states: I/2, |0><0|, |+><+|, |+i><+i|.
    fn qubit_probe_states() -> Vec<ComplexMatrix> {
        use crate::linalg::c;
        vec![
            ComplexMatrix::identity(2).scale_real(0.5),
            ComplexMatrix::real_diag(&[1.0, 0.0]),
            ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]),
            ComplexMatrix::from_rows(&[vec![re(0.5), c(0.0, -0.5)], vec![c(0.0, 0.5), re(0.5)]]),
        ]
    }

    #[test]
    fn amplitude_damping_endpoints() {
        let id = make_amplitude_damping(0.0).unwrap();
        assert_eq!(id.kraus[1], ComplexMatrix::zeros(2, 2));
        let out = apply_one_sided(&id, &phi_plus(), Side::Right).unwrap();
        assert!(out.state.matrix().max_diff(phi_plus().matrix()) < 1e-15);

        let full = make_amplitude_damping(1.0).unwrap();
        for rho in [phi_plus(), random_mixed(3, 4).unwrap()] {
            let out = apply_one_sided(&full, &rho, Side::Right).unwrap();
            let right = out.state.marginal(false).unwrap();
            assert!(right.max_diff(&ComplexMatrix::real_diag(&[1.0, 0.0])) < 1e-14);
        }
        assert!(make_amplitude_damping(1.01).is_err());
    }

    #[test]
    fn full_damping_on_bell_pair() {
        let out = apply_one_sided(
            &make_amplitude_damping(1.0).unwrap(),
            &phi_plus(),
            Side::Right,
        )
        .unwrap();
        let expected = kron(
            &ComplexMatrix::identity(2).scale_real(0.5),
            &ComplexMatrix::real_diag(&[1.0, 0.0]),
        );
        assert!(out.state.matrix().max_diff(&expected) < 1e-15);
        assert!((out.prob - 1.0).abs() < 1e-15);
    }

    #[test]
    fn standard_families_are_trace_preserving() {
        for x in [0.0, 0.3, 2.0 / 3.0, 1.0] {
            for ch in [
                make_amplitude_damping(x).unwrap(),
                make_phase_flip(x).unwrap(),
                make_depolarizing(x).unwrap(),
            ] {
                assert_eq!(validate_channel(&ch), Ok(()), "{}", ch.name);
            }
        }
        assert!(make_phase_flip(-0.2).is_err());
        assert!(make_depolarizing(2.0).is_err());
    }

    #[test]
    fn zero_parameter_families_act_as_identity() {
        let rho = random_mixed(11, 4).unwrap();
        for ch in [
            make_phase_flip(0.0).unwrap(),
            make_depolarizing(0.0).unwrap(),
        ] {
            let out = apply_one_sided(&ch, &rho, Side::Right).unwrap();
            assert!(out.state.matrix().max_diff(rho.matrix()) < 1e-15);
        }
    }

    #[test]
    fn filter_examples() {
        let half = make_filter(0.5).unwrap();
        assert!(half.kraus[0].max_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
        let rho = random_mixed(2, 3).unwrap();
        let out = apply_one_sided(&half, &rho, Side::Left).unwrap();
        assert!((out.prob - 0.25).abs() < 1e-15);
        assert!(out.state.matrix().max_diff(rho.matrix()) < 1e-14);

        let one = make_filter(1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(one.kraus[0], ComplexMatrix::real_diag(&[s, 0.0]));
        assert_eq!(validate_channel(&make_filter(0.7).unwrap()), Ok(()));
        assert!(!make_filter(0.7).unwrap().trace_preserving);
    }

    #[test]
    fn filter_on_bell_pair_prepares_chi() {
        for omega in [0.0, 0.1, 0.3, 0.5, 0.9] {
            let out =
                apply_one_sided(&make_filter(omega).unwrap(), &phi_plus(), Side::Right).unwrap();
            let chi = density_from_pure(&pure_chi(omega).unwrap());
            assert!(out.state.matrix().max_diff(chi.matrix()) < 1e-14);
            assert!((out.prob - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn filter_on_choi_state_has_probability_quarter() {
        for seed in 0..20 {
            let choi = apply_one_sided(&random_channel(seed, 3).unwrap(), &phi_plus(), Side::Right)
                .unwrap();
            let omega = (seed as f64 + 0.5) / 20.0;
            let out =
                apply_one_sided(&make_filter(omega).unwrap(), &choi.state, Side::Left).unwrap();
            assert!((out.prob - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_probability_is_an_error() {
        let rho = density_from_pure(&pure_chi(0.0).unwrap());
        let err = apply_one_sided(&make_filter(1.0).unwrap(), &rho, Side::Right).unwrap_err();
        assert!(matches!(err, Error::ZeroProbability { .. }));
    }

    #[test]
    fn random_channels() {
        for seed in 0..1000u64 {
            let rank = 1 + (seed % 4) as usize;
            let ch = random_channel(seed, rank).unwrap();
            assert_eq!(ch.kraus.len(), rank);
            let dev = ch.completeness().max_diff(&ComplexMatrix::identity(2));
            assert!(dev <= 1e-10, "seed {seed}: {dev:e}");
        }
        assert_eq!(random_channel(4, 2).unwrap(), random_channel(4, 2).unwrap());
        assert!(random_channel(0, 0).is_err());
        assert!(random_channel(0, 5).is_err());
    }

    #[test]
    fn compose_with_identity() {
        let ch = random_channel(21, 3).unwrap();
        let both = compose(&KrausChannel::identity(), &ch);
        assert_eq!(both.kraus.len(), 3);
        let rho = random_mixed(1, 4).unwrap();
        let a = apply_one_sided(&ch, &rho, Side::Right).unwrap();
        let b = apply_one_sided(&both, &rho, Side::Right).unwrap();
        assert!(a.state.matrix().max_diff(b.state.matrix()) < 1e-12);
    }

    #[test]
    fn amplitude_damping_semigroup() {
        let (g1, g2) = (0.3, 0.45);
        let composed = compose(
            &make_amplitude_damping(g2).unwrap(),
            &make_amplitude_damping(g1).unwrap(),
        );
        assert_eq!(composed.kraus.len(), 4);
        let direct = make_amplitude_damping(1.0 - (1.0 - g1) * (1.0 - g2)).unwrap();
        for probe in qubit_probe_states() {
            let a = composed.act_on_qubit(&probe);
            let b = direct.act_on_qubit(&probe);
            assert!(a.max_diff(&b) < 1e-10);
        }
        let f = compose(&make_filter(0.2).unwrap(), &make_phase_flip(0.1).unwrap());
        assert!(!f.trace_preserving);
        assert_eq!(f.kraus.len(), 2);
    }

    #[test]
    fn two_sided_matches_sequential_in_either_order() {
        let a = random_channel(1, 2).unwrap();
        let b = random_channel(2, 4).unwrap();
        let rho = random_mixed(3, 3).unwrap();
        let both = apply_two_sided(&a, &b, &rho).unwrap();
        let lr = apply_one_sided(
            &b,
            &apply_one_sided(&a, &rho, Side::Left).unwrap().state,
            Side::Right,
        )
        .unwrap();
        let rl = apply_one_sided(
            &a,
            &apply_one_sided(&b, &rho, Side::Right).unwrap().state,
            Side::Left,
        )
        .unwrap();
        assert!(both.state.matrix().max_diff(lr.state.matrix()) < 1e-12);
        assert!(both.state.matrix().max_diff(rl.state.matrix()) < 1e-12);
        let id = KrausChannel::identity();
        let same = apply_two_sided(&id, &id, &rho).unwrap();
        assert!(same.state.matrix().max_diff(rho.matrix()) < 1e-15);
        assert!((same.prob - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validate_channel_rejects_overcomplete() {
        let big = KrausChannel {
            name: "big".into(),
            kraus: vec![ComplexMatrix::identity(2).scale_real(2f64.sqrt())],
            trace_preserving: false,
        };
        let v = validate_channel(&big).unwrap_err();
        assert!(v.to_string().starts_with("completeness exceeded"));
        let lying = KrausChannel {
            trace_preserving: true,
            ..make_filter(0.5).unwrap()
        };
        assert!(matches!(
            validate_channel(&lying),
            Err(ChannelViolation::NotTracePreserving { .. })
        ));
        let empty = KrausChannel {
            name: "e".into(),
            kraus: vec![],
            trace_preserving: false,
        };
        assert_eq!(validate_channel(&empty), Err(ChannelViolation::Empty));
        assert!(KrausChannel::new("x", vec![ComplexMatrix::identity(4)], true).is_err());
    }

    #[test]
    fn trace_preserving_outputs_are_valid_and_keep_left_marginal() {
        for seed in 0..200u64 {
            let ch = random_channel(seed, 1 + (seed % 4) as usize).unwrap();
            let rho = random_mixed(seed + 1000, 1 + (seed % 4) as usize).unwrap();
            let out = apply_one_sided(&ch, &rho, Side::Right).unwrap();
            assert_eq!(out.state.validate(), Ok(()));
            assert!((out.prob - 1.0).abs() < 1e-10);
            let before = partial_trace(rho.matrix(), &[2, 2], &[0]).unwrap();
            let after = partial_trace(out.state.matrix(), &[2, 2], &[0]).unwrap();
            assert!(before.max_diff(&after) < 1e-10);
        }
    }

    #[test]
    fn one_sided_action_is_linear() {
        let ch = make_filter(0.3).unwrap();
        let r1 = random_mixed(1, 2).unwrap();
        let r2 = random_mixed(2, 4).unwrap();
        let alpha = 0.37;
        let mix = &r1.matrix().scale_real(alpha) + &r2.matrix().scale_real(1.0 - alpha);
        let lhs = ch.act_unnormalized(&mix, Side::Right);
        let rhs = &ch
            .act_unnormalized(r1.matrix(), Side::Right)
            .scale_real(alpha)
            + &ch
                .act_unnormalized(r2.matrix(), Side::Right)
                .scale_real(1.0 - alpha);
        assert!(lhs.max_diff(&rhs) < 1e-12);
    }
}
