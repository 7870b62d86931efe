use super::Backend;
use crate::circuits::RegisterLayout;
use crate::error::{Error, Result};

pub const DEFAULT_BUDGET_QUBITS: usize = 26;

/// Bytes per dense amplitude (two `f64`).
const AMPLITUDE_BYTES: u128 = 16;

/// Refuses dense states wider than a qubit budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryGuard {
    pub budget_qubits: usize,
}

impl Default for MemoryGuard {
    fn default() -> Self {
        MemoryGuard {
            budget_qubits: DEFAULT_BUDGET_QUBITS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Admission {
    pub backend: Backend,
    pub qubits: usize,
    /// Amplitude storage for dense admissions, zero for sparse.
    pub bytes: u128,
}

pub fn dense_bytes(qubits: usize) -> u128 {
    if qubits >= 124 {
        u128::MAX
    } else {
        AMPLITUDE_BYTES << qubits
    }
}

impl MemoryGuard {
    pub fn new(budget_qubits: usize) -> Self {
        MemoryGuard { budget_qubits }
    }

    pub fn admit_dense(&self, qubits: usize) -> Result<Admission> {
        if qubits > self.budget_qubits {
            return Err(Error::OverBudget {
                qubits,
                budget: self.budget_qubits,
                bytes: dense_bytes(qubits),
            });
        }
        Ok(Admission {
            backend: Backend::Dense,
            qubits,
            bytes: dense_bytes(qubits),
        })
    }
}

/// Decide whether `layout` can run on `backend` given what the circuit needs.
pub fn memory_guard(
    layout: &RegisterLayout,
    backend: Backend,
    noisy: bool,
    hadamard: bool,
    guard: &MemoryGuard,
) -> Result<Admission> {
    let qubits = layout.qubit_count();
    match backend {
        Backend::Sparse if noisy => Err(Error::Backend("sparse backend cannot apply gate noise".into())),
        Backend::Sparse if hadamard => Err(Error::Backend("sparse backend cannot apply Hadamard gates".into())),
        Backend::Sparse => {
            if qubits > 128 {
                return Err(Error::Backend(format!("sparse backend holds at most 128 qubits, got {qubits}")));
            }
            Ok(Admission {
                backend,
                qubits,
                bytes: 0,
            })
        }
        Backend::Dense => guard.admit_dense(qubits),
        Backend::Auto if noisy || hadamard => guard.admit_dense(qubits),
        Backend::Auto => memory_guard(layout, Backend::Sparse, false, false, guard),
    }
}
