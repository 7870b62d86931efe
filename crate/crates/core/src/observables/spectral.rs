use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;

use super::fmt_f64;
use crate::circuits::RegisterLayout;
use crate::error::{Error, Result};
use crate::lattice::{iterate_point, ImageSet};
use crate::simulator::DenseState;

/// `|C(t, k)|²` over the frequency registers.
///
/// Stored by register value: `kx_reg ∈ [0, N)`, `ky_reg ∈ [0, 2N)`, index
/// `kx_reg + N ky_reg`. The centred frequency is the two's-complement
/// reading of the register.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub n_q: u32,
    pub values: Vec<f64>,
}

/// Probability over the `2^n_f × 2^{n_f+1}` cells formed by the top `n_f`
/// bits of `kx_reg` and the top `n_f + 1` bits of `ky_reg`. Index
/// `cell_x + 2^n_f cell_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseDistribution {
    pub n_f: u32,
    pub p: Vec<f64>,
}

fn centred(reg: usize, width: usize) -> i64 {
    let half = 1usize << (width - 1);
    if reg >= half {
        reg as i64 - (1i64 << width)
    } else {
        reg as i64
    }
}

impl SpectralDensity {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn at_register(&self, kx_reg: usize, ky_reg: usize) -> f64 {
        self.values[kx_reg + (ky_reg << self.n_q)]
    }

    /// Value at centred frequencies `-N/2 ≤ kx < N/2`, `-N ≤ ky < N`.
    pub fn at(&self, kx: i64, ky: i64) -> f64 {
        let n = 1i64 << self.n_q;
        self.at_register(kx.rem_euclid(n) as usize, ky.rem_euclid(2 * n) as usize)
    }

    /// CSV with header `kx,ky,csq` in centred order, rows by `ky` then `kx`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "kx,ky,csq")?;
        let n = 1i64 << self.n_q;
        for ky in -n..n {
            for kx in -n / 2..n / 2 {
                writeln!(w, "{kx},{ky},{}", fmt_f64(self.at(kx, ky)))?;
            }
        }
        Ok(())
    }

    pub fn centred_x(&self, kx_reg: usize) -> i64 {
        centred(kx_reg, self.n_q as usize)
    }

    pub fn centred_y(&self, ky_reg: usize) -> i64 {
        centred(ky_reg, self.n_q as usize + 1)
    }

    /// Every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> SpectralDensity {
        SpectralDensity {
            n_q: self.n_q,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Largest `|a - b| / max(b, mean b)` over all frequencies, with `other`
    /// as the reference. The mean floor keeps near-zero reference values
    /// from dominating.
    pub fn max_relative_error(&self, other: &SpectralDensity) -> f64 {
        let mean = other.total() / other.values.len() as f64;
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs() / b.max(mean))
            .fold(0.0, f64::max)
    }
}

/// Direct sum
/// `C(t, k) = Σ_{(i0, j0)} e^{2πi (i_t + j_t)/N} e^{2πi (kx i0/N + ky j0/2N)}`
/// where `(i_t, j_t)` is the image of `(i0, j0)` after `t` steps.
///
/// `e^{2πi (i + j)/N}` differs from `e^{2πi (x + y)}` by a constant, and the
/// lattice offsets of `x0, y0` only add `k`-dependent unit phases, so `|C|²`
/// is unchanged.
pub fn spectral_oracle(image: &ImageSet, t: usize, n_q: u32) -> Result<SpectralDensity> {
    if image.n_q() != n_q {
        return Err(Error::Dimension(format!("image is on n_q={}, asked for {n_q}", image.n_q())));
    }
    let n = 1usize << n_q;
    let phases: Vec<(usize, usize, Complex64)> = image
        .points()
        .iter()
        .map(|&p| {
            let q = iterate_point(p, t, n_q)?;
            let phi = TAU * ((q.i + q.j) as usize % n) as f64 / n as f64;
            Ok((p.i as usize, p.j as usize, Complex64::from_polar(1.0, phi)))
        })
        .collect::<Result<_>>()?;
    // Exact root-of-unity tables keep the sum free of accumulated angle error.
    let roots: Vec<Complex64> = (0..2 * n)
        .map(|m| Complex64::from_polar(1.0, TAU * m as f64 / (2 * n) as f64))
        .collect();
    let mut values = vec![0.0; 2 * n * n];
    for ky in 0..2 * n {
        for kx in 0..n {
            let c: Complex64 = phases
                .iter()
                .map(|&(i0, j0, z)| z * roots[(2 * kx * i0 + ky * j0) % (2 * n)])
                .sum();
            values[kx + ky * n] = c.norm_sqr();
        }
    }
    Ok(SpectralDensity { n_q, values })
}

/// Marginal probability of the frequency registers after the spectral
/// program. With exact gates this equals `|C|² / (N_d 2 N²)`.
pub fn spectral_from_state(state: &DenseState, layout: &RegisterLayout, bit_reversed: bool) -> Result<SpectralDensity> {
    let n_q = layout.n_q();
    let n = n_q as usize;
    let (x, y) = (layout.x(), layout.y());
    if state.qubit_count() > layout.qubit_count() {
        return Err(Error::Dimension(format!(
            "{}-qubit state is wider than the {}-qubit layout",
            state.qubit_count(),
            layout.qubit_count()
        )));
    }
    let read = |v: usize, qs: &[usize]| -> usize {
        qs.iter()
            .enumerate()
            .fold(0, |acc, (m, &q)| acc | (((v >> q) & 1) << m))
    };
    let rev = |v: usize, width: usize| -> usize {
        if bit_reversed {
            v.reverse_bits() >> (usize::BITS as usize - width)
        } else {
            v
        }
    };
    let mut values = vec![0.0; 1usize << (2 * n + 1)];
    for (v, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        if p != 0.0 {
            let kx = rev(read(v, x), n);
            let ky = rev(read(v, y), n + 1);
            values[kx + (ky << n)] += p;
        }
    }
    Ok(SpectralDensity { n_q, values })
}

pub fn coarse_grain(sd: &SpectralDensity, n_f: u32) -> Result<CoarseDistribution> {
    if n_f > sd.n_q {
        return Err(Error::Domain(format!("n_f={n_f} exceeds n_q={}", sd.n_q)));
    }
    let n = sd.n_q as usize;
    let drop = n - n_f as usize;
    let cells_x = 1usize << n_f;
    let mut p = vec![0.0; 1usize << (2 * n_f + 1)];
    for (k, &v) in sd.values.iter().enumerate() {
        let (kx, ky) = (k & ((1 << n) - 1), k >> n);
        p[(kx >> drop) + cells_x * (ky >> drop)] += v;
    }
    let total: f64 = p.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Domain("spectrum is identically zero".into()));
    }
    p.iter_mut().for_each(|v| *v /= total);
    Ok(CoarseDistribution { n_f, p })
}

pub fn coarse_grain_state(
    state: &DenseState,
    layout: &RegisterLayout,
    n_f: u32,
    bit_reversed: bool,
) -> Result<CoarseDistribution> {
    coarse_grain(&spectral_from_state(state, layout, bit_reversed)?, n_f)
}

impl CoarseDistribution {
    pub fn cells_x(&self) -> usize {
        1 << self.n_f
    }

    pub fn cells_y(&self) -> usize {
        2 << self.n_f
    }

    pub fn get(&self, cell_x: usize, cell_y: usize) -> f64 {
        self.p[cell_x + self.cells_x() * cell_y]
    }

    /// CSV with header `cell_x,cell_y,p`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "cell_x,cell_y,p")?;
        for cy in 0..self.cells_y() {
            for cx in 0..self.cells_x() {
                writeln!(w, "{cx},{cy},{}", fmt_f64(self.get(cx, cy)))?;
            }
        }
        Ok(())
    }
}
