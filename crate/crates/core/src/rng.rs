//! Seeded random sampling.
//!
//! All randomness flows from [`rng_for`]: a ChaCha8 generator keyed by a
//! 64-bit seed, with an independent 64-bit stream per index. ChaCha output
//! is specified bit-for-bit, so a `(seed, stream)` pair reproduces the same
//! samples on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{ComplexMatrix, C64};

pub type TrialRng = ChaCha8Rng;

/// Generator for stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian: real and imaginary parts i.i.d. N(0, 1/2).
pub fn complex_gaussian(rng: &mut TrialRng) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * s, im * s)
}

pub fn ginibre(rng: &mut TrialRng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Gram-Schmidt orthonormalization of the columns of `m` (rows >= cols).
/// Applied to a Ginibre matrix this yields a Haar-distributed isometry, since
/// the implied R factor has a positive diagonal.
pub fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    assert!(rows >= cols);
    let mut q = m.clone();
    for j in 0..cols {
        // Two passes of modified Gram-Schmidt keep the result orthonormal to
        // machine precision.
        for _ in 0..2 {
            for k in 0..j {
                let proj: C64 = (0..rows).map(|i| q[(i, k)].conj() * q[(i, j)]).sum();
                for i in 0..rows {
                    let qik = q[(i, k)];
                    q[(i, j)] -= proj * qik;
                }
            }
        }
        let norm = (0..rows).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            q[(i, j)] /= norm;
        }
    }
    q
}

/// Haar-random `n x n` unitary.
pub fn random_unitary(rng: &mut TrialRng, n: usize) -> ComplexMatrix {
    orthonormalize_columns(&ginibre(rng, n, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| rng_for(9, 3).gen()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x: u64 = rng_for(9, 3).gen();
        let y: u64 = rng_for(9, 4).gen();
        let z: u64 = rng_for(10, 3).gen();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = rng_for(1, 0);
        for n in [2, 4] {
            let u = random_unitary(&mut rng, n);
            let d = (&u.adjoint() * &u).max_diff(&ComplexMatrix::identity(n));
            assert!(d < 1e-13, "{d:e}");
        }
    }
}
