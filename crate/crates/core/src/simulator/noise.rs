use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// 2×2 unitary stored row-major.
pub type Mat2 = [Complex64; 4];

/// Per-gate unitary imprecision.
///
/// After each ideal gate every qubit in its support is rotated about an axis
/// drawn uniformly from the unit sphere by an angle drawn uniformly from
/// `[-epsilon, epsilon]`: `U = cos(θ/2) I - i sin(θ/2) n·σ`.
///
/// Draws for gate `g` come from the ChaCha stream `g` of the seed, qubits
/// taken in support order (target first), so they do not depend on how the
/// run is partitioned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub epsilon: f64,
    pub seed: u64,
    pub enabled: bool,
}

impl NoiseModel {
    pub fn exact() -> Self {
        NoiseModel {
            epsilon: 0.0,
            seed: 0,
            enabled: false,
        }
    }

    pub fn new(epsilon: f64, seed: u64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("noise amplitude {epsilon} must be finite and >= 0")));
        }
        Ok(NoiseModel {
            epsilon,
            seed,
            enabled: true,
        })
    }

    /// True when gates actually get perturbed.
    pub fn is_active(&self) -> bool {
        self.enabled && self.epsilon > 0.0
    }

    /// Rotations following gate number `ordinal`, one per support qubit.
    pub fn rotations(&self, ordinal: u64, support: usize) -> [Mat2; 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(ordinal);
        let mut out = [identity(); 3];
        for slot in out.iter_mut().take(support) {
            let z: f64 = rng.random_range(-1.0..=1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let theta: f64 = rng.random_range(-self.epsilon..=self.epsilon);
            let r = (1.0 - z * z).max(0.0).sqrt();
            *slot = axis_rotation([r * phi.cos(), r * phi.sin(), z], theta);
        }
        out
    }
}

pub fn identity() -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    [one, zero, zero, one]
}

/// `exp(-i θ/2 n·σ)` for a unit axis `n`.
pub fn axis_rotation(n: [f64; 3], theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        Complex64::new(c, -s * n[2]),
        Complex64::new(-s * n[1], -s * n[0]),
        Complex64::new(s * n[1], -s * n[0]),
        Complex64::new(c, s * n[2]),
    ]
}
