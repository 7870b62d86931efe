//! Circuit execution on sparse basis-state maps or dense amplitude vectors.

mod dense;
mod guard;
mod noise;
mod pebble;
mod runner;
pub mod snapshot;
mod sparse;

use num_complex::Complex64;

pub use dense::DenseState;
pub use guard::{memory_guard, Admission, MemoryGuard, DEFAULT_BUDGET_QUBITS};
pub use noise::{axis_rotation, identity, Mat2, NoiseModel};
pub use pebble::{execute_pebble_plan, PebbleOutcome};
pub use runner::{peak_qubits, run_dense_lazy, DenseRun};
pub use sparse::SparseState;

use crate::circuits::{build_evolution, build_spectral_program, BitReversal, Circuit, RegisterLayout};
use crate::error::{Error, Result};
use crate::lattice::ImageSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    Sparse,
    Dense,
    /// Sparse when the work allows it, otherwise dense.
    #[default]
    Auto,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Sparse => "sparse",
            Backend::Dense => "dense",
            Backend::Auto => "auto",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "sparse" => Some(Backend::Sparse),
            "dense" => Some(Backend::Dense),
            "auto" => Some(Backend::Auto),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Sparse(SparseState),
    Dense(DenseState),
}

impl QuantumState {
    pub fn qubit_count(&self) -> usize {
        match self {
            QuantumState::Sparse(s) => s.qubit_count(),
            QuantumState::Dense(d) => d.qubit_count(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        match self {
            QuantumState::Sparse(s) => s.norm_sqr(),
            QuantumState::Dense(d) => d.norm_sqr(),
        }
    }

    pub fn amplitude(&self, index: u128) -> Complex64 {
        match self {
            QuantumState::Sparse(s) => s.amplitude(index),
            QuantumState::Dense(d) => usize::try_from(index)
                .ok()
                .and_then(|k| d.amplitudes().get(k).copied())
                .unwrap_or_default(),
        }
    }

    /// Calls `f` on every basis index with nonzero amplitude (dense states
    /// report every index).
    pub fn for_each(&self, mut f: impl FnMut(u128, Complex64)) {
        match self {
            QuantumState::Sparse(s) => s.entries().iter().for_each(|&(v, a)| f(v, a)),
            QuantumState::Dense(d) => d
                .amplitudes()
                .iter()
                .enumerate()
                .for_each(|(k, &a)| f(k as u128, a)),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, QuantumState::Sparse(_))
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        match self {
            QuantumState::Sparse(s) => DenseState::from_sparse(s),
            QuantumState::Dense(d) => Ok(d.clone()),
        }
    }
}

/// `Σ_{p ∈ image} N_d^{-1/2} |p⟩|0⟩` over the main block of `layout`.
pub fn prepare_image(image: &ImageSet, layout: &RegisterLayout) -> Result<SparseState> {
    if image.is_empty() {
        return Err(Error::Domain("image has no points".into()));
    }
    if image.n_q() != layout.n_q() {
        return Err(Error::Layout(format!(
            "image is on an n_q={} grid, layout on n_q={}",
            image.n_q(),
            layout.n_q()
        )));
    }
    let block = layout.main_block();
    let a = Complex64::new(image.amplitude(), 0.0);
    SparseState::from_entries(
        layout.qubit_count(),
        image.points().iter().map(|&p| (block.encode(p), a)).collect(),
    )
}

/// Apply `circuit` gate by gate. Sparse states accept only exact monomial
/// circuits; nothing is ever densified implicitly.
pub fn apply_circuit(state: QuantumState, circuit: &Circuit, noise: &NoiseModel) -> Result<QuantumState> {
    let want = circuit.layout().qubit_count();
    if state.qubit_count() != want {
        return Err(Error::Dimension(format!(
            "{}-qubit state does not fit a {want}-qubit circuit",
            state.qubit_count()
        )));
    }
    match state {
        QuantumState::Sparse(mut s) => {
            if noise.is_active() {
                return Err(Error::Backend("sparse backend cannot apply gate noise".into()));
            }
            if let Some(g) = circuit.gates().iter().find(|g| !g.is_monomial()) {
                return Err(Error::Backend(format!("sparse backend cannot apply {g}")));
            }
            for g in circuit.gates() {
                s.apply_gate(g)?;
            }
            Ok(QuantumState::Sparse(s))
        }
        QuantumState::Dense(mut d) => {
            runner::run_dense_full(&mut d, circuit, noise)?;
            Ok(QuantumState::Dense(d))
        }
    }
}

fn resolve(backend: Backend, noisy: bool, hadamard: bool) -> Backend {
    match backend {
        Backend::Auto if noisy || hadamard => Backend::Dense,
        Backend::Auto => Backend::Sparse,
        b => b,
    }
}

/// `t` forward iterations of the image state.
///
/// Dense states are grown only as garbage slots come into use and finish
/// padded to the full layout.
pub fn evolve_image(
    image: &ImageSet,
    t: usize,
    layout: &RegisterLayout,
    noise: &NoiseModel,
    backend: Backend,
    guard: &MemoryGuard,
) -> Result<QuantumState> {
    let circuit = build_evolution(layout, t)?;
    let initial = prepare_image(image, layout)?;
    match resolve(backend, noise.is_active(), false) {
        Backend::Sparse => apply_circuit(QuantumState::Sparse(initial), &circuit, noise),
        _ => {
            guard.admit_dense(layout.qubit_count())?;
            let base = main_width(layout);
            let start = DenseState::from_sparse_truncated(&initial, base)?;
            let mut run = run_dense_lazy(start, &circuit, noise, false)?;
            while run.state.qubit_count() < layout.qubit_count() {
                run.state.extend_zero_qubit()?;
            }
            Ok(QuantumState::Dense(run.state))
        }
    }
}

/// Qubits of `x`, `y` and the work register, the part of a layout that is
/// live from the first gate.
pub fn main_width(layout: &RegisterLayout) -> usize {
    layout.x().len() + layout.y().len() + layout.work().len()
}

/// Full spectral program on a dense state spanning the layout.
pub fn run_spectral(
    image: &ImageSet,
    t: usize,
    layout: &RegisterLayout,
    noise: &NoiseModel,
    reversal: BitReversal,
    guard: &MemoryGuard,
) -> Result<DenseState> {
    let circuit = build_spectral_program(layout, t, reversal)?;
    guard.admit_dense(layout.qubit_count())?;
    let initial = prepare_image(image, layout)?;
    let start = DenseState::from_sparse_truncated(&initial, main_width(layout))?;
    let mut run = run_dense_lazy(start, &circuit, noise, false)?;
    while run.state.qubit_count() < layout.qubit_count() {
        run.state.extend_zero_qubit()?;
    }
    Ok(run.state)
}
