use num_complex::Complex64;

use super::spectral::CoarseDistribution;
use crate::circuits::RegisterLayout;
use crate::error::{Error, Result};
use crate::simulator::{DenseState, QuantumState, SparseState};

/// `⟨ideal|state⟩` for a dense state that may omit high qubits known to be
/// `|0⟩`.
pub fn overlap(ideal: &SparseState, state: &DenseState) -> Complex64 {
    let amps = state.amplitudes();
    ideal
        .entries()
        .iter()
        .filter_map(|&(v, a)| usize::try_from(v).ok().and_then(|k| amps.get(k)).map(|b| a.conj() * b))
        .sum()
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    if a.qubit_count() != b.qubit_count() {
        return Err(Error::Dimension(format!(
            "fidelity of {}-qubit and {}-qubit states",
            a.qubit_count(),
            b.qubit_count()
        )));
    }
    let z = match (a, b) {
        (QuantumState::Dense(x), QuantumState::Dense(y)) => x.inner(y)?,
        (QuantumState::Sparse(x), other) => x
            .entries()
            .iter()
            .map(|&(v, amp)| amp.conj() * other.amplitude(v))
            .sum(),
        (QuantumState::Dense(_), QuantumState::Sparse(y)) => y
            .entries()
            .iter()
            .map(|&(v, amp)| a.amplitude(v).conj() * amp)
            .sum(),
    };
    Ok(z.norm_sqr())
}

/// Bhattacharyya-squared overlap `(Σ_c √(p_c q_c))²`.
pub fn distribution_fidelity(p: &CoarseDistribution, q: &CoarseDistribution) -> Result<f64> {
    if p.n_f != q.n_f || p.p.len() != q.p.len() {
        return Err(Error::Dimension(format!(
            "coarse distributions with n_f={} and n_f={}",
            p.n_f, q.n_f
        )));
    }
    let s: f64 = p.p.iter().zip(&q.p).map(|(a, b)| (a * b).sqrt()).sum();
    Ok((s * s).min(1.0))
}

/// `1 - P(work = garbage = 0)`.
pub fn garbage_error_probability(state: &QuantumState, layout: &RegisterLayout) -> f64 {
    let mask = layout.ancilla_mask();
    let mut clean = 0.0;
    state.for_each(|v, a| {
        if v & mask == 0 {
            clean += a.norm_sqr();
        }
    });
    (1.0 - clean).max(0.0)
}

/// Project onto clean work and garbage registers and renormalise. Returns
/// the projected state and the success probability.
pub fn postselect_garbage_zero(state: &QuantumState, layout: &RegisterLayout) -> Result<(QuantumState, f64)> {
    let mask = layout.ancilla_mask();
    let (projected, kept) = match state {
        QuantumState::Sparse(s) => {
            let entries: Vec<(u128, Complex64)> = s.entries().iter().copied().filter(|(v, _)| v & mask == 0).collect();
            let kept: f64 = entries.iter().map(|(_, a)| a.norm_sqr()).sum();
            (QuantumState::Sparse(SparseState::from_entries(s.qubit_count(), entries)?), kept)
        }
        QuantumState::Dense(d) => {
            let mut amps = d.amplitudes().to_vec();
            let mut kept = 0.0;
            for (v, a) in amps.iter_mut().enumerate() {
                if (v as u128) & mask != 0 {
                    *a = Complex64::default();
                } else {
                    kept += a.norm_sqr();
                }
            }
            (QuantumState::Dense(DenseState::from_amplitudes(d.qubit_count(), amps)?), kept)
        }
    };
    if !(kept > 0.0) {
        return Err(Error::Degenerate("no weight on clean ancillas".into()));
    }
    let scale = 1.0 / kept.sqrt();
    let out = match projected {
        QuantumState::Sparse(s) => QuantumState::Sparse(SparseState::from_entries(
            s.qubit_count(),
            s.entries().iter().map(|&(v, a)| (v, a * scale)).collect(),
        )?),
        QuantumState::Dense(mut d) => {
            d.amplitudes_mut().iter_mut().for_each(|a| *a *= scale);
            QuantumState::Dense(d)
        }
    };
    Ok((out, kept))
}
