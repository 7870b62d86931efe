use num_complex::Complex64;

use crate::circuits::Gate;
use crate::error::{Error, Result};

/// Basis-state map for circuits made of permutation and diagonal phase gates.
///
/// Indices are `u128`, so layouts of up to 128 qubits (pebble mode) fit.
/// Entries stay sorted by index.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    qubits: usize,
    entries: Vec<(u128, Complex64)>,
}

impl SparseState {
    pub fn from_entries(qubits: usize, mut entries: Vec<(u128, Complex64)>) -> Result<Self> {
        if qubits > 128 {
            return Err(Error::Backend(format!("sparse backend holds at most 128 qubits, got {qubits}")));
        }
        if let Some((v, _)) = entries.iter().find(|(v, _)| qubits < 128 && *v >> qubits != 0) {
            return Err(Error::Dimension(format!("basis index {v} exceeds {qubits} qubits")));
        }
        entries.sort_unstable_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain("duplicate basis index in sparse state".into()));
        }
        Ok(SparseState { qubits, entries })
    }

    pub fn basis(qubits: usize, index: u128) -> Result<Self> {
        Self::from_entries(qubits, vec![(index, Complex64::new(1.0, 0.0))])
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn entries(&self) -> &[(u128, Complex64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn amplitude(&self, index: u128) -> Complex64 {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .map(|k| self.entries[k].1)
            .unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        if !gate.is_monomial() {
            return Err(Error::Backend(format!(
                "sparse backend cannot apply {gate}: it would leave the basis-state form"
            )));
        }
        let mut sorted = true;
        let mut prev: Option<u128> = None;
        for e in self.entries.iter_mut() {
            let (v, phi) = gate.map_basis(e.0).expect("monomial gate");
            e.0 = v;
            if phi != 0.0 {
                e.1 *= Complex64::from_polar(1.0, phi);
            }
            if prev.is_some_and(|p| p > v) {
                sorted = false;
            }
            prev = Some(v);
        }
        if !sorted {
            self.entries.sort_unstable_by_key(|e| e.0);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refuses_hadamard() {
        let mut s = SparseState::basis(2, 0).unwrap();
        assert!(matches!(
            s.apply_gate(&Gate::Hadamard { target: 0 }),
            Err(Error::Backend(_))
        ));
    }

    #[test]
    fn phases_accumulate() {
        let mut s = SparseState::basis(2, 0b11).unwrap();
        s.apply_gate(&Gate::CPhase {
            control: 0,
            target: 1,
            angle: 0.25,
        })
        .unwrap();
        s.apply_gate(&Gate::Phase {
            target: 1,
            angle: 0.5,
        })
        .unwrap();
        assert!((s.amplitude(0b11).arg() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(SparseState::basis(2, 4).is_err());
        let one = Complex64::new(1.0, 0.0);
        assert!(SparseState::from_entries(2, vec![(1, one), (1, one)]).is_err());
        assert!(SparseState::from_entries(129, vec![]).is_err());
    }
}
