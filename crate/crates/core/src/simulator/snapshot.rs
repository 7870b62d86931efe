//! Binary state snapshots for checkpoint and resume.
//!
//! Layout (little endian): magic `QSNP`, version `u8`, qubit count `u32`,
//! representation tag `u8` (0 dense, 1 sparse), seed `u64`, then either
//! `2^n` pairs of `f64`, or an entry count `u64` followed by
//! `(u128 index, f64 re, f64 im)` triples.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{DenseState, QuantumState, SparseState};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"QSNP";
const VERSION: u8 = 1;

pub fn write_snapshot(state: &QuantumState, seed: u64, mut w: impl Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&(state.qubit_count() as u32).to_le_bytes())?;
    match state {
        QuantumState::Dense(d) => {
            w.write_all(&[0])?;
            w.write_all(&seed.to_le_bytes())?;
            for a in d.amplitudes() {
                w.write_all(&a.re.to_le_bytes())?;
                w.write_all(&a.im.to_le_bytes())?;
            }
        }
        QuantumState::Sparse(s) => {
            w.write_all(&[1])?;
            w.write_all(&seed.to_le_bytes())?;
            w.write_all(&(s.len() as u64).to_le_bytes())?;
            for &(v, a) in s.entries() {
                w.write_all(&v.to_le_bytes())?;
                w.write_all(&a.re.to_le_bytes())?;
                w.write_all(&a.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn take<const K: usize>(r: &mut impl Read) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b)?;
    Ok(b)
}

/// Returns the state and the seed stored with it.
pub fn read_snapshot(mut r: impl Read) -> Result<(QuantumState, u64)> {
    let bad = |m: &str| Error::Parse {
        line: 0,
        message: m.to_string(),
    };
    if &take::<4>(&mut r)? != MAGIC {
        return Err(bad("not a state snapshot"));
    }
    if take::<1>(&mut r)?[0] != VERSION {
        return Err(bad("unsupported snapshot version"));
    }
    let n = u32::from_le_bytes(take(&mut r)?) as usize;
    let tag = take::<1>(&mut r)?[0];
    let seed = u64::from_le_bytes(take(&mut r)?);
    let complex = |r: &mut dyn Read| -> Result<Complex64> {
        let mut b = [0u8; 16];
        r.read_exact(&mut b)?;
        Ok(Complex64::new(
            f64::from_le_bytes(b[..8].try_into().unwrap()),
            f64::from_le_bytes(b[8..].try_into().unwrap()),
        ))
    };
    let state = match tag {
        0 => {
            if n > 40 {
                return Err(bad("dense snapshot too wide"));
            }
            let amps = (0..1usize << n).map(|_| complex(&mut r)).collect::<Result<Vec<_>>>()?;
            QuantumState::Dense(DenseState::from_amplitudes(n, amps)?)
        }
        1 => {
            let len = u64::from_le_bytes(take(&mut r)?);
            let mut entries = Vec::new();
            for _ in 0..len {
                let v = u128::from_le_bytes(take(&mut r)?);
                entries.push((v, complex(&mut r)?));
            }
            QuantumState::Sparse(SparseState::from_entries(n, entries)?)
        }
        _ => return Err(bad("unknown representation tag")),
    };
    Ok((state, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::Gate;

    #[test]
    fn dense_round_trip() {
        let mut d = DenseState::zero(3).unwrap();
        d.apply_gate(&Gate::Hadamard { target: 1 }).unwrap();
        let s = QuantumState::Dense(d);
        let mut buf = Vec::new();
        write_snapshot(&s, 77, &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 1 + 4 + 1 + 8 + 16 * 8);
        let (back, seed) = read_snapshot(&buf[..]).unwrap();
        assert_eq!(seed, 77);
        assert_eq!(back, s);
    }

    #[test]
    fn sparse_round_trip() {
        let s = QuantumState::Sparse(SparseState::basis(100, 1u128 << 99).unwrap());
        let mut buf = Vec::new();
        write_snapshot(&s, 1, &mut buf).unwrap();
        assert_eq!(read_snapshot(&buf[..]).unwrap().0, s);
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(read_snapshot(&b"NOPE"[..]).is_err());
        assert!(read_snapshot(&b"QSNP\x01\x02"[..]).is_err());
    }
}
