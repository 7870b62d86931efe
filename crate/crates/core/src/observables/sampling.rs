use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use super::fidelity::distribution_fidelity;
use super::spectral::{coarse_grain, spectral_oracle, CoarseDistribution, SpectralDensity};
use crate::error::{Error, Result};
use crate::lattice::{iterate_point, ImageSet};

/// Largest sample count tried by [`required_samples`].
pub const DEFAULT_SAMPLE_CAP: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Monte Carlo trajectories through the classical map.
    Classical,
    /// Readouts of the coarse frequency qubits of the exact program.
    Quantum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSearch {
    /// Smallest sample count whose mean fidelity reached the target.
    pub m: u64,
    pub mean_fidelity: f64,
    /// Every `(M, mean fidelity)` evaluated, in order.
    pub evaluations: Vec<(u64, f64)>,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Classical estimator state shared across sample counts.
struct Classical {
    n_q: u32,
    n_f: u32,
    /// `(i0 + N j0, e^{2πi(i_t + j_t)/N})` for each image point.
    points: Vec<(usize, Complex64)>,
    planner: FftPlanner<f64>,
}

impl Classical {
    fn new(image: &ImageSet, t: usize, n_f: u32) -> Result<Self> {
        let n_q = image.n_q();
        if n_f > n_q {
            return Err(Error::Domain(format!("n_f={n_f} exceeds n_q={n_q}")));
        }
        let n = 1usize << n_q;
        let points = image
            .points()
            .iter()
            .map(|&p| {
                let q = iterate_point(p, t, n_q)?;
                let phi = TAU * ((q.i + q.j) as usize % n) as f64 / n as f64;
                Ok((p.index(n_q), Complex64::from_polar(1.0, phi)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Classical {
            n_q,
            n_f,
            points,
            planner: FftPlanner::new(),
        })
    }

    fn estimate(&mut self, m: u64, rng: &mut ChaCha8Rng) -> Result<CoarseDistribution> {
        let n = 1usize << self.n_q;
        let nd = self.points.len();
        // Row-major over j0: grid[i0 + N j0].
        let mut grid = vec![Complex64::default(); 2 * n * n];
        for _ in 0..m {
            let (k, z) = self.points[rng.random_range(0..nd)];
            grid[k] += z;
        }
        // Σ_{i0,j0} g e^{+2πi(kx i0/N + ky j0/2N)}: inverse transforms along
        // both axes.
        let row = self.planner.plan_fft_inverse(n);
        for chunk in grid.chunks_exact_mut(n) {
            row.process(chunk);
        }
        let col = self.planner.plan_fft_inverse(2 * n);
        let mut column = vec![Complex64::default(); 2 * n];
        for kx in 0..n {
            for (jy, c) in column.iter_mut().enumerate() {
                *c = grid[kx + n * jy];
            }
            col.process(&mut column);
            for (ky, c) in column.iter().enumerate() {
                grid[kx + n * ky] = *c;
            }
        }
        let scale = nd as f64 / m as f64;
        let values = grid.iter().map(|c| (c * scale).norm_sqr()).collect();
        coarse_grain(&SpectralDensity { n_q: self.n_q, values }, self.n_f)
    }
}

/// Coarse-grained `|Ĉ|²` from `m` initial points drawn uniformly with
/// replacement: `Ĉ(k) = (N_d / m) Σ_s e^{2πi(x_t + y_t)} e^{2πi k·z_0^s}`.
pub fn monte_carlo_spectral(image: &ImageSet, t: usize, n_f: u32, m: u64, seed: u64) -> Result<CoarseDistribution> {
    if m == 0 {
        return Err(Error::Domain("at least one trajectory is needed".into()));
    }
    if image.is_empty() {
        return Err(Error::Domain("image has no points".into()));
    }
    Classical::new(image, t, n_f)?.estimate(m, &mut trial_rng(seed, 0))
}

fn multinomial(exact: &CoarseDistribution, m: u64, rng: &mut ChaCha8Rng) -> CoarseDistribution {
    let mut cdf = Vec::with_capacity(exact.p.len());
    let mut acc = 0.0;
    for &v in &exact.p {
        acc += v;
        cdf.push(acc);
    }
    let mut counts = vec![0u64; exact.p.len()];
    for _ in 0..m {
        let u: f64 = rng.random::<f64>() * acc;
        let k = cdf.partition_point(|&c| c <= u).min(counts.len() - 1);
        counts[k] += 1;
    }
    CoarseDistribution {
        n_f: exact.n_f,
        p: counts.iter().map(|&c| c as f64 / m as f64).collect(),
    }
}

/// Smallest `M` whose mean distribution fidelity over `trials` seeded
/// estimates reaches `target`, found by doubling then bisection.
///
/// Trial `r` always draws from stream `r` of `seed`, so every `M` sees the
/// same random numbers.
pub fn required_samples(
    mode: SamplingMode,
    image: &ImageSet,
    t: usize,
    n_f: u32,
    target: f64,
    trials: u32,
    seed: u64,
    cap: u64,
) -> Result<SampleSearch> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::Domain(format!("target fidelity {target} outside (0, 1]")));
    }
    if trials == 0 || cap == 0 {
        return Err(Error::Domain("trials and cap must be positive".into()));
    }
    if image.is_empty() {
        return Err(Error::Domain("image has no points".into()));
    }
    let exact = coarse_grain(&spectral_oracle(image, t, image.n_q())?, n_f)?;
    let mut classical = match mode {
        SamplingMode::Classical => Some(Classical::new(image, t, n_f)?),
        SamplingMode::Quantum => None,
    };
    let mut evaluations = Vec::new();
    let mut mean_at = |m: u64| -> Result<f64> {
        let mut total = 0.0;
        for r in 0..trials {
            let mut rng = trial_rng(seed, u64::from(r));
            let est = match classical.as_mut() {
                Some(c) => c.estimate(m, &mut rng)?,
                None => multinomial(&exact, m, &mut rng),
            };
            total += distribution_fidelity(&est, &exact)?;
        }
        let mean = total / f64::from(trials);
        evaluations.push((m, mean));
        Ok(mean)
    };

    let mut best = 0.0f64;
    let mut hi = 1u64;
    let mut hi_f;
    loop {
        hi_f = mean_at(hi)?;
        best = best.max(hi_f);
        if hi_f >= target {
            break;
        }
        if hi >= cap {
            return Err(Error::CappedSearch { target, cap, best });
        }
        hi = (hi * 2).min(cap);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let f = mean_at(mid)?;
        if f >= target {
            hi = mid;
            hi_f = f;
        } else {
            lo = mid;
        }
    }
    Ok(SampleSearch {
        m: hi,
        mean_fidelity: hi_f,
        evaluations,
    })
}
