//! Gate-level compilation of the map iteration, the phase kick, the 2D QFT
//! and pebble-game schedules.

mod circuit;
mod gate;
mod iteration;
mod layout;
pub mod pebble;
mod spectral;

pub use circuit::{Circuit, CircuitMeta};
pub use gate::{Gate, GateKind, Support};
pub use iteration::{
    add_modular, add_with_carry_out, build_forward_iteration, build_inverse_iteration, iteration_gate_count,
    ProgramBuilder,
};
pub use layout::{PebbleBlocks, PointBlock, RegisterLayout};
pub use spectral::{
    build_echo, build_evolution, build_kicked_echo, build_phase_kick, build_qft_2d, build_spectral_program,
    qft_register, reference_iteration_gate_count, reference_spectral_gate_count, BitReversal,
};
