use crate::error::{Error, Result};
use crate::lattice::{check_nq, LatticePoint};

/// A register holding one lattice point: `n_q` x-qubits then `n_q + 1` y-qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointBlock {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl PointBlock {
    fn contiguous(start: usize, n_q: u32) -> Self {
        let n = n_q as usize;
        PointBlock {
            x: (start..start + n).collect(),
            y: (start + n..start + 2 * n + 1).collect(),
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.x.iter().chain(self.y.iter()).copied()
    }

    pub fn width(&self) -> usize {
        self.x.len() + self.y.len()
    }

    /// Basis-index bits that place `p` in this block.
    pub fn encode(&self, p: LatticePoint) -> u128 {
        let mut v = 0u128;
        for (m, &q) in self.x.iter().enumerate() {
            v |= u128::from((p.i >> m) & 1) << q;
        }
        for (m, &q) in self.y.iter().enumerate() {
            v |= u128::from((p.j >> m) & 1) << q;
        }
        v
    }

    pub fn decode(&self, basis: u128) -> LatticePoint {
        let read = |qs: &[usize]| {
            qs.iter()
                .enumerate()
                .fold(0u32, |acc, (m, &q)| acc | ((((basis >> q) & 1) as u32) << m))
        };
        LatticePoint {
            i: read(&self.x),
            j: read(&self.y),
        }
    }
}

/// Extra blocks used by the pebble-game schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PebbleBlocks {
    /// Holds `(x_0, y_0)` for the whole run.
    pub input: PointBlock,
    /// Receives `(x_t, y_t)`.
    pub result: PointBlock,
    /// Intermediate checkpoints.
    pub checkpoints: Vec<PointBlock>,
}

/// Qubit index assignment.
///
/// Qubits are numbered `x | y | work | garbage | pebble blocks`, so the
/// garbage slots are the highest-index qubits of a plain layout and slot `τ`
/// is qubit `3 n_q + τ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    n_q: u32,
    t_max: usize,
    x: Vec<usize>,
    y: Vec<usize>,
    work: Vec<usize>,
    garbage: Vec<usize>,
    pebble: Option<PebbleBlocks>,
}

impl RegisterLayout {
    pub fn new(n_q: u32, t_max: usize) -> Result<Self> {
        check_nq(n_q)?;
        let n = n_q as usize;
        Ok(RegisterLayout {
            n_q,
            t_max,
            x: (0..n).collect(),
            y: (n..2 * n + 1).collect(),
            work: (2 * n + 1..3 * n).collect(),
            garbage: (3 * n..3 * n + t_max).collect(),
            pebble: None,
        })
    }

    /// Layout for pebble execution: one garbage slot per unit segment, an
    /// input block, a result block and `checkpoints` intermediate blocks.
    pub fn with_pebble_blocks(n_q: u32, garbage_slots: usize, checkpoints: usize) -> Result<Self> {
        let mut layout = Self::new(n_q, garbage_slots)?;
        let width = 2 * n_q as usize + 1;
        let mut next = layout.qubit_count();
        let mut block = || {
            let b = PointBlock::contiguous(next, n_q);
            next += width;
            b
        };
        let input = block();
        let result = block();
        let checkpoints = (0..checkpoints).map(|_| block()).collect();
        layout.pebble = Some(PebbleBlocks {
            input,
            result,
            checkpoints,
        });
        Ok(layout)
    }

    pub fn n_q(&self) -> u32 {
        self.n_q
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn x(&self) -> &[usize] {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn work(&self) -> &[usize] {
        &self.work
    }

    pub fn garbage(&self) -> &[usize] {
        &self.garbage
    }

    pub fn pebble(&self) -> Option<&PebbleBlocks> {
        self.pebble.as_ref()
    }

    /// The x/y registers viewed as a point block.
    pub fn main_block(&self) -> PointBlock {
        PointBlock {
            x: self.x.clone(),
            y: self.y.clone(),
        }
    }

    pub fn garbage_slot(&self, step: usize) -> Result<usize> {
        self.garbage.get(step).copied().ok_or_else(|| {
            Error::Layout(format!(
                "garbage slot {step} requested but the register holds {} slots",
                self.t_max
            ))
        })
    }

    pub fn qubit_count(&self) -> usize {
        let blocks = self.pebble.as_ref().map_or(0, |p| {
            (p.checkpoints.len() + 2) * (2 * self.n_q as usize + 1)
        });
        3 * self.n_q as usize + self.t_max + blocks
    }

    /// Work and garbage qubits: the registers that must read zero once the
    /// inverse iterations have run.
    pub fn ancillas(&self) -> impl Iterator<Item = usize> + '_ {
        self.work.iter().chain(self.garbage.iter()).copied()
    }

    /// Basis-index mask of the work and garbage registers.
    pub fn ancilla_mask(&self) -> u128 {
        self.ancillas().fold(0u128, |m, q| m | (1u128 << q))
    }

    /// Every qubit index in declaration order.
    pub fn all_qubits(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .x
            .iter()
            .chain(&self.y)
            .chain(&self.work)
            .chain(&self.garbage)
            .copied()
            .collect();
        if let Some(p) = &self.pebble {
            v.extend(p.input.qubits());
            v.extend(p.result.qubits());
            for b in &p.checkpoints {
                v.extend(b.qubits());
            }
        }
        v
    }

    /// Named registers in declaration order, used by the circuit dump.
    pub fn registers(&self) -> Vec<(String, Vec<usize>)> {
        let mut regs = vec![
            ("x".to_string(), self.x.clone()),
            ("y".to_string(), self.y.clone()),
            ("work".to_string(), self.work.clone()),
            ("garbage".to_string(), self.garbage.clone()),
        ];
        if let Some(p) = &self.pebble {
            regs.push(("input".into(), p.input.qubits().collect()));
            regs.push(("result".into(), p.result.qubits().collect()));
            for (k, b) in p.checkpoints.iter().enumerate() {
                regs.push((format!("checkpoint{k}"), b.qubits().collect()));
            }
        }
        regs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_qubit_ten_step_layout_has_28_qubits() {
        let l = RegisterLayout::new(6, 10).unwrap();
        assert_eq!(l.qubit_count(), 28);
        assert_eq!(l.x().len(), 6);
        assert_eq!(l.y().len(), 7);
        assert_eq!(l.work().len(), 5);
        assert_eq!(l.garbage().len(), 10);
    }

    #[test]
    fn indices_are_distinct_and_dense() {
        for n_q in 1..=6 {
            for &checkpoints in &[0usize, 3] {
                let l = if checkpoints == 0 {
                    RegisterLayout::new(n_q, 4).unwrap()
                } else {
                    RegisterLayout::with_pebble_blocks(n_q, 1, checkpoints).unwrap()
                };
                let mut all = l.all_qubits();
                let len = all.len();
                all.sort_unstable();
                all.dedup();
                assert_eq!(all.len(), len);
                assert_eq!(len, l.qubit_count());
                assert_eq!(*all.last().unwrap(), len - 1);
            }
        }
    }

    #[test]
    fn block_encoding_round_trips() {
        let l = RegisterLayout::with_pebble_blocks(3, 1, 2).unwrap();
        let b = &l.pebble().unwrap().checkpoints[1];
        let p = LatticePoint { i: 5, j: 13 };
        assert_eq!(b.decode(b.encode(p)), p);
        assert_eq!(l.main_block().encode(p), p.index(3) as u128);
    }

    #[test]
    fn garbage_slot_bounds() {
        let l = RegisterLayout::new(2, 3).unwrap();
        assert_eq!(l.garbage_slot(2).unwrap(), 8);
        assert!(matches!(l.garbage_slot(3), Err(Error::Layout(_))));
    }
}
