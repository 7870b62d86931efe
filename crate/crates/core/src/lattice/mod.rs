//! Exact integer form of the dissipative map on the `N × 2N` lattice.
//!
//! With `N = 2^n_q` the coordinates are `x = -0.5 + i/N` and `y = -1 + j/N`,
//! `0 <= i < N`, `0 <= j < 2N`. One iteration `y' = y/2 + x (mod 2)`,
//! `x' = x + y' (mod 1)` becomes, on indices,
//!
//! ```text
//! b  = j mod 2              (bit dropped by the halving)
//! j' = floor(j / 2) + i     (< 2N, never wraps)
//! i' = (i + j') mod N
//! ```
//!
//! The pair `(point, b)` determines the preimage uniquely, which is what
//! lets a reversible circuit run the map in both directions.

mod analysis;
mod image;

pub use analysis::{box_counting_dimension, lyapunov_analytics, BoxCountEstimate, SpectrumAnalytics};
pub use image::ImageSet;

use crate::error::{Error, Result};

/// Largest grid exponent the classical routines accept.
pub const MAX_NQ: u32 = 15;

pub(crate) fn check_nq(n_q: u32) -> Result<()> {
    if n_q == 0 || n_q > MAX_NQ {
        return Err(Error::Domain(format!(
            "grid exponent n_q={n_q} must lie in 1..={MAX_NQ}"
        )));
    }
    Ok(())
}

/// Index pair on the phase-space grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub i: u32,
    pub j: u32,
}

impl LatticePoint {
    /// Checked constructor.
    pub fn new(i: u32, j: u32, n_q: u32) -> Result<Self> {
        let p = LatticePoint { i, j };
        p.validate(n_q)?;
        Ok(p)
    }

    pub fn validate(&self, n_q: u32) -> Result<()> {
        check_nq(n_q)?;
        let n = 1u64 << n_q;
        if u64::from(self.i) >= n || u64::from(self.j) >= 2 * n {
            return Err(Error::OutOfRange {
                i: self.i.into(),
                j: self.j.into(),
                n_q,
            });
        }
        Ok(())
    }

    /// Packed index `i + j * N`, identical to the computational-basis value
    /// of the x/y registers.
    #[inline]
    pub fn index(&self, n_q: u32) -> usize {
        self.i as usize | ((self.j as usize) << n_q)
    }

    #[inline]
    pub fn from_index(index: usize, n_q: u32) -> Self {
        LatticePoint {
            i: (index & ((1 << n_q) - 1)) as u32,
            j: (index >> n_q) as u32,
        }
    }

    /// Continuous coordinates `(x, y)`.
    pub fn coordinates(&self, n_q: u32) -> (f64, f64) {
        let n = (1u64 << n_q) as f64;
        (-0.5 + self.i as f64 / n, -1.0 + self.j as f64 / n)
    }
}

/// One iteration of the map together with the dropped bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapStep {
    pub before: LatticePoint,
    pub after: LatticePoint,
    pub garbage_bit: u8,
}

#[inline]
pub(crate) fn forward_raw(p: LatticePoint, n_q: u32) -> (LatticePoint, u8) {
    let mask = (1u32 << n_q) - 1;
    let bit = (p.j & 1) as u8;
    let j = (p.j >> 1) + p.i;
    let i = (p.i + j) & mask;
    (LatticePoint { i, j }, bit)
}

/// Apply the map once.
pub fn forward_step(p: LatticePoint, n_q: u32) -> Result<MapStep> {
    p.validate(n_q)?;
    let (after, garbage_bit) = forward_raw(p, n_q);
    Ok(MapStep {
        before: p,
        after,
        garbage_bit,
    })
}

/// Undo one iteration given the bit stored by [`forward_step`].
pub fn inverse_step(p: LatticePoint, garbage_bit: u8, n_q: u32) -> Result<LatticePoint> {
    p.validate(n_q)?;
    if garbage_bit > 1 {
        return Err(Error::Domain(format!("garbage bit {garbage_bit} is not 0 or 1")));
    }
    let n = 1u32 << n_q;
    let i = (p.i + n - (p.j & (n - 1))) & (n - 1);
    let half = (p.j + 2 * n - i) & (2 * n - 1);
    if half >= n {
        return Err(Error::NotInImage {
            i: p.i,
            j: p.j,
            bit: garbage_bit,
        });
    }
    Ok(LatticePoint {
        i,
        j: 2 * half + u32::from(garbage_bit),
    })
}

/// Apply the map `t` times to a single point.
pub fn iterate_point(p: LatticePoint, t: usize, n_q: u32) -> Result<LatticePoint> {
    p.validate(n_q)?;
    let mut q = p;
    for _ in 0..t {
        q = forward_raw(q, n_q).0;
    }
    Ok(q)
}

/// Iterate `t` times recording every dropped bit, oldest first.
pub fn trajectory_bits(p: LatticePoint, t: usize, n_q: u32) -> Result<(LatticePoint, Vec<u8>)> {
    p.validate(n_q)?;
    let mut q = p;
    let mut bits = Vec::with_capacity(t);
    for _ in 0..t {
        let (next, b) = forward_raw(q, n_q);
        bits.push(b);
        q = next;
    }
    Ok((q, bits))
}
