use num_complex::Complex64;

use super::prepare_image;
use super::sparse::SparseState;
use crate::circuits::pebble::PebblePlan;
use crate::circuits::{Circuit, RegisterLayout};
use crate::error::{Error, Result};
use crate::lattice::{iterate_point, ImageSet, LatticePoint};

/// Result of running a pebble plan on the sparse backend.
#[derive(Debug, Clone)]
pub struct PebbleOutcome {
    pub circuit: Circuit,
    pub state: SparseState,
    /// `(x_0, y_0, x_t, y_t)` read from the input and result blocks, with amplitude.
    pub pairs: Vec<(LatticePoint, LatticePoint, Complex64)>,
    /// Entries with any qubit set outside the input and result blocks.
    pub dirty_entries: usize,
    /// Initial points whose result differs from `t` oracle steps.
    pub mismatches: usize,
}

impl PebbleOutcome {
    pub fn is_verified(&self) -> bool {
        self.dirty_entries == 0 && self.mismatches == 0
    }
}

/// Load `image` into the input block, run the compiled plan exactly and
/// check the result block against the lattice oracle.
pub fn execute_pebble_plan(plan: &PebblePlan, layout: &RegisterLayout, image: &ImageSet) -> Result<PebbleOutcome> {
    plan.check_legality()?;
    let circuit = plan.compile(layout)?;
    let blocks = layout.pebble().expect("compile checked the blocks");
    let main = prepare_image(image, layout)?;
    let main_block = layout.main_block();
    // Move the prepared points from the main block into the input block.
    let entries = main
        .entries()
        .iter()
        .map(|&(v, a)| (blocks.input.encode(main_block.decode(v)), a))
        .collect();
    let mut state = SparseState::from_entries(layout.qubit_count(), entries)?;
    for g in circuit.gates() {
        state.apply_gate(g)?;
    }
    let keep = blocks
        .input
        .qubits()
        .chain(blocks.result.qubits())
        .fold(0u128, |m, q| m | (1u128 << q));
    let mut pairs = Vec::with_capacity(state.len());
    let mut dirty = 0;
    let mut mismatches = 0;
    for &(v, a) in state.entries() {
        if v & !keep != 0 {
            dirty += 1;
        }
        let p0 = blocks.input.decode(v);
        let pt = blocks.result.decode(v);
        match iterate_point(p0, plan.t, image.n_q()) {
            Ok(want) if want == pt => {}
            Ok(_) => mismatches += 1,
            Err(e) => return Err(e),
        }
        pairs.push((p0, pt, a));
    }
    if state.len() != image.len() {
        return Err(Error::Backend(format!(
            "pebble run produced {} entries from {} points",
            state.len(),
            image.len()
        )));
    }
    Ok(PebbleOutcome {
        circuit,
        state,
        pairs,
        dirty_entries: dirty,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::pebble::{plan_pebble_schedule, plan_pebble_schedule_for};

    #[test]
    fn two_level_plan_reproduces_four_steps() {
        let plan = plan_pebble_schedule(2).unwrap();
        let layout = RegisterLayout::with_pebble_blocks(3, 1, 2).unwrap();
        let image = ImageSet::full(3).unwrap();
        let out = execute_pebble_plan(&plan, &layout, &image).unwrap();
        assert!(out.is_verified());
        assert_eq!(out.pairs.len(), 128);
    }

    #[test]
    fn degenerate_plan_is_one_iteration() {
        let plan = plan_pebble_schedule_for(1, 1).unwrap();
        let layout = RegisterLayout::with_pebble_blocks(2, 1, 1).unwrap();
        let image = ImageSet::full(2).unwrap();
        let out = execute_pebble_plan(&plan, &layout, &image).unwrap();
        assert!(out.is_verified());
        // Segment 0 is placed and later removed, each costing a forward and a backward pass.
        assert_eq!(plan.iterations_executed(), 4);
    }
}
