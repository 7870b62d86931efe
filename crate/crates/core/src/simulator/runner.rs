//! Dense execution with lazily allocated high qubits.
//!
//! Garbage slots and pebble blocks sit above the `x`, `y` and work
//! registers. A qubit that no gate has touched yet is exactly `|0⟩`, so the
//! amplitude vector only grows to include it when its first gate arrives.
//! With `release` set, the highest live qubit is projected onto `|0⟩` once its
//! last gate has run. That projection is what a final overlap with an
//! ancilla-clean reference or a post-selection on clean ancillas sees anyway,
//! and the dropped probability is reported.

use super::dense::{Cluster, DenseState, CLUSTER_MAX};
use super::noise::{Mat2, NoiseModel};
use crate::circuits::{Circuit, Gate};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct DenseRun {
    /// State over the lowest `state.qubit_count()` qubits; all higher layout
    /// qubits are `|0⟩`.
    pub state: DenseState,
    /// Probability removed by releasing qubits (zero unless `release`).
    pub released_probability: f64,
    pub peak_qubits: usize,
}

/// Peak live qubit count when running `circuit` from a state on `base`
/// qubits.
pub fn peak_qubits(circuit: &Circuit, base: usize, release: bool) -> usize {
    let mut peak = base;
    let mut live = base;
    let last = last_use(circuit.gates(), base);
    for_each_cluster(circuit.gates(), |range, qubits| {
        let top = qubits.iter().copied().max().unwrap_or(0);
        if top >= live {
            live = top + 1;
        }
        peak = peak.max(live);
        if release {
            while live > base && last[live - 1 - base] < range.end {
                live -= 1;
            }
        }
    });
    peak
}

fn last_use(gates: &[Gate], base: usize) -> Vec<usize> {
    let mut last = Vec::new();
    for (g, gate) in gates.iter().enumerate() {
        for &q in gate.support().as_slice() {
            if q >= base {
                if last.len() <= q - base {
                    last.resize(q - base + 1, 0);
                }
                last[q - base] = g;
            }
        }
    }
    last
}

/// Greedy partition into consecutive runs of union support ≤ CLUSTER_MAX.
fn for_each_cluster(gates: &[Gate], mut f: impl FnMut(std::ops::Range<usize>, &[usize])) {
    let mut i = 0;
    let mut union: Vec<usize> = Vec::with_capacity(CLUSTER_MAX);
    while i < gates.len() {
        union.clear();
        let mut j = i;
        while j < gates.len() {
            let mut next = union.clone();
            for &q in gates[j].support().as_slice() {
                if !next.contains(&q) {
                    next.push(q);
                }
            }
            if next.len() > CLUSTER_MAX {
                break;
            }
            union = next;
            j += 1;
        }
        f(i..j, &union);
        i = j;
    }
}

/// Run `circuit` densely, starting from `initial` over its lowest `base`
/// qubits (all higher qubits `|0⟩`).
pub fn run_dense_lazy(initial: DenseState, circuit: &Circuit, noise: &NoiseModel, release: bool) -> Result<DenseRun> {
    let base = initial.qubit_count();
    let total = circuit.layout().qubit_count();
    if base > total {
        return Err(Error::Dimension(format!(
            "{base}-qubit state is wider than the {total}-qubit layout"
        )));
    }
    let gates = circuit.gates();
    let last = last_use(gates, base);
    let peak = peak_qubits(circuit, base, release);
    let mut state = initial;
    state.reserve_qubits(peak);
    let mut released = 0.0;
    let mut failure = None;
    let active = noise.is_active();
    for_each_cluster(gates, |range, qubits| {
        if failure.is_some() {
            return;
        }
        let top = qubits.iter().copied().max().unwrap_or(0);
        while state.qubit_count() <= top {
            if let Err(e) = state.extend_zero_qubit() {
                failure = Some(e);
                return;
            }
        }
        let mut cluster = Cluster::new(qubits);
        for g in range.clone() {
            let rotations: [Mat2; 3];
            let rs: &[Mat2] = if active {
                let k = gates[g].support().len();
                rotations = noise.rotations(g as u64, k);
                &rotations[..k]
            } else {
                &[]
            };
            cluster.push(&gates[g], rs);
        }
        if let Err(e) = state.apply_cluster(&cluster) {
            failure = Some(e);
            return;
        }
        if release {
            while state.qubit_count() > base && last[state.qubit_count() - 1 - base] < range.end {
                released += state.project_top_zero();
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(DenseRun {
        state,
        released_probability: released,
        peak_qubits: peak,
    })
}

/// Gate-by-gate dense application on a state spanning the whole layout.
pub(crate) fn run_dense_full(state: &mut DenseState, circuit: &Circuit, noise: &NoiseModel) -> Result<()> {
    let total = circuit.layout().qubit_count();
    if state.qubit_count() != total {
        return Err(Error::Dimension(format!(
            "{}-qubit state does not match the {total}-qubit layout",
            state.qubit_count()
        )));
    }
    let run = run_dense_lazy(std::mem::replace(state, DenseState::zero(0)?), circuit, noise, false)?;
    *state = run.state;
    Ok(())
}
