//! Simulation of a quantum algorithm for a dissipative chaotic map.
//!
//! The map `ȳ = y/2 + x (mod 2)`, `x̄ = x + ȳ (mod 1)` is discretised on an
//! `N × 2N` lattice with `N = 2^n_q`, compiled into reversible gates over an
//! explicit register layout and executed either exactly on basis states or
//! densely under per-gate unitary noise. The [`observables`] module extracts
//! densities, coarse-grained spectra, fidelities and sampling costs.
//!
//! ```
//! use qstrange::lattice::{forward_step, LatticePoint};
//!
//! let step = forward_step(LatticePoint { i: 1, j: 3 }, 1).unwrap();
//! assert_eq!((step.after.i, step.after.j, step.garbage_bit), (1, 2, 1));
//! ```

pub mod circuits;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod observables;
pub mod simulator;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/pebble.md")]
    mod pebble {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
