//! Fidelity and garbage-error measurements on the kicked echo program.

use std::io::Write;

use super::fidelity::overlap;
use super::fmt_f64;
use crate::circuits::{build_kicked_echo, RegisterLayout};
use crate::error::Result;
use crate::fit::{fit_line, LineFit};
use crate::lattice::ImageSet;
use crate::simulator::{
    apply_circuit, main_width, peak_qubits, prepare_image, run_dense_lazy, DenseState, MemoryGuard, NoiseModel,
    QuantumState,
};

/// One noisy run of forward iterations, phase kick and inverse iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoMeasurement {
    pub n_q: u32,
    pub t: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Gates in the program.
    pub n_g: usize,
    /// Overlap with the exact final state.
    pub f: f64,
    /// Overlap after projecting onto clean work and garbage registers.
    pub f_postselected: f64,
    /// Probability that work or garbage registers are not all zero.
    pub w_g: f64,
    pub peak_qubits: usize,
}

pub fn measure_echo(image: &ImageSet, t: usize, epsilon: f64, seed: u64, guard: &MemoryGuard) -> Result<EchoMeasurement> {
    let n_q = image.n_q();
    let layout = RegisterLayout::new(n_q, t)?;
    let circuit = build_kicked_echo(&layout, t)?;
    let noise = NoiseModel::new(epsilon, seed)?;
    let initial = prepare_image(image, &layout)?;
    let QuantumState::Sparse(ideal) =
        apply_circuit(QuantumState::Sparse(initial.clone()), &circuit, &NoiseModel::exact())?
    else {
        unreachable!("sparse in, sparse out")
    };
    let mut out = EchoMeasurement {
        n_q,
        t,
        epsilon,
        seed,
        n_g: circuit.len(),
        f: 1.0,
        f_postselected: 1.0,
        w_g: 0.0,
        peak_qubits: layout.qubit_count(),
    };
    if !noise.is_active() {
        return Ok(out);
    }
    let base = main_width(&layout);
    let peak = peak_qubits(&circuit, base, true);
    guard.admit_dense(peak)?;
    let start = DenseState::from_sparse_truncated(&initial, base)?;
    let run = run_dense_lazy(start, &circuit, &noise, true)?;
    let mask = layout.ancilla_mask();
    let mut dirty = run.released_probability;
    let mut clean_state = run.state.clone();
    for (v, a) in clean_state.amplitudes_mut().iter_mut().enumerate() {
        if (v as u128) & mask != 0 {
            dirty += a.norm_sqr();
            *a = Default::default();
        }
    }
    let clean = clean_state.norm_sqr();
    out.f = overlap(&ideal, &run.state).norm_sqr();
    out.f_postselected = if clean > 0.0 {
        overlap(&ideal, &clean_state).norm_sqr() / clean
    } else {
        0.0
    };
    out.w_g = dirty;
    out.peak_qubits = run.peak_qubits;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub n_q: Vec<u32>,
    pub t: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl ScanGrid {
    pub fn len(&self) -> usize {
        self.n_q.len() * self.t.len() * self.epsilon.len() * self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Every grid point on the default disk image, in `n_q`, `t`, `ε`, seed
/// order. `progress` sees each row as it completes.
pub fn run_scan(
    grid: &ScanGrid,
    guard: &MemoryGuard,
    mut progress: impl FnMut(&EchoMeasurement),
) -> Result<Vec<EchoMeasurement>> {
    let mut rows = Vec::with_capacity(grid.len());
    for &n_q in &grid.n_q {
        let image = ImageSet::default_disk(n_q)?;
        for &t in &grid.t {
            for &eps in &grid.epsilon {
                for &seed in &grid.seeds {
                    let row = measure_echo(&image, t, eps, seed, guard)?;
                    progress(&row);
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanFit {
    /// `ln(1 - f)` against `ln(ε² n_g)` over rows inside the window.
    pub fidelity: Option<LineFit>,
    /// `ln W_g` against `ln(ε² t)` over rows with `W_g > 0`.
    pub garbage: Option<LineFit>,
    /// Mean of `(1 - f) / (ε² n_g)` over the fitted rows.
    pub fidelity_constant: Option<f64>,
    /// Mean of `W_g / (ε² t)` over the fitted rows.
    pub garbage_constant: Option<f64>,
    /// Largest `|f_ps (1 - W_g) / f - 1|` over noisy rows.
    pub postselection_deviation: f64,
}

pub fn fit_scan(rows: &[EchoMeasurement], window: (f64, f64)) -> ScanFit {
    let (mut fx, mut fy, mut fc) = (Vec::new(), Vec::new(), Vec::new());
    let (mut gx, mut gy, mut gc) = (Vec::new(), Vec::new(), Vec::new());
    let mut dev = 0.0f64;
    for r in rows.iter().filter(|r| r.epsilon > 0.0) {
        let loss = 1.0 - r.f;
        let x = r.epsilon * r.epsilon * r.n_g as f64;
        if loss >= window.0 && loss <= window.1 {
            fx.push(x.ln());
            fy.push(loss.ln());
            fc.push(loss / x);
        }
        if r.w_g > 0.0 {
            let x = r.epsilon * r.epsilon * r.t as f64;
            gx.push(x.ln());
            gy.push(r.w_g.ln());
            gc.push(r.w_g / x);
        }
        if r.f > 0.0 {
            dev = dev.max((r.f_postselected * (1.0 - r.w_g) / r.f - 1.0).abs());
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    ScanFit {
        fidelity: fit_line(&fx, &fy),
        garbage: fit_line(&gx, &gy),
        fidelity_constant: mean(&fc),
        garbage_constant: mean(&gc),
        postselection_deviation: dev,
    }
}

/// CSV with header `epsilon,t,n_q,n_g,f,W_g`.
pub fn write_scan_csv(rows: &[EchoMeasurement], mut w: impl Write) -> Result<()> {
    writeln!(w, "epsilon,t,n_q,n_g,f,W_g")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(r.epsilon),
            r.t,
            r.n_q,
            r.n_g,
            fmt_f64(r.f),
            fmt_f64(r.w_g)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_rows_are_perfect() {
        let image = ImageSet::default_disk(2).unwrap();
        let r = measure_echo(&image, 3, 0.0, 1, &MemoryGuard::default()).unwrap();
        assert_eq!((r.f, r.w_g), (1.0, 0.0));
    }

    #[test]
    fn noise_costs_fidelity_and_postselection_recovers_some() {
        let image = ImageSet::default_disk(2).unwrap();
        let r = measure_echo(&image, 3, 0.1, 4, &MemoryGuard::default()).unwrap();
        assert!(r.f < 1.0 && r.f > 0.0);
        assert!(r.w_g > 0.0);
        assert!(r.f_postselected >= r.f);
        assert!((r.f_postselected * (1.0 - r.w_g) / r.f - 1.0).abs() < 1e-9);
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_scan_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "epsilon,t,n_q,n_g,f,W_g\n");
    }
}
