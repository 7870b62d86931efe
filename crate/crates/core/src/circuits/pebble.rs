//! Bennett-style pebble schedules.
//!
//! The main `x`/`y` registers act as a cursor. A segment execution copies a
//! materialized state from its source block into the cursor, iterates it,
//! XORs the cursor into a checkpoint block (placing or removing that
//! pebble), then runs the iterations backwards and clears the cursor with
//! the same fan-out. Only one garbage slot is ever needed.
//!
//! Placing the pebble at `a + 2^n` from one at `a` costs `3^n` segment
//! executions and at most `n` intermediate checkpoints:
//!
//! ```text
//! P_n(a, src, dst) = P_{n-1}(a, src, mid)  P_{n-1}(a+h, mid, dst)  R_{n-1}(a, src, mid)
//! R_n(a, src, dst) = P_{n-1}(a, src, mid)  R_{n-1}(a+h, mid, dst)  R_{n-1}(a, src, mid)
//! ```
//!
//! with `h = 2^{n-1}`, `mid` the checkpoint reserved for level `n - 1` and
//! `R_n` removing the pebble that `P_n` placed.

use std::fmt;

use super::circuit::Circuit;
use super::gate::Gate;
use super::iteration::{build_forward_iteration, build_inverse_iteration};
use super::layout::{PointBlock, RegisterLayout};
use crate::error::{Error, Result};

/// Largest supported checkpoint budget.
pub const MAX_PEBBLES: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Input,
    Result,
    Checkpoint(usize),
}

/// Unit segments `start..end`, executing `iterations` real map iterations
/// (fewer than `end - start` only in the padding beyond `t`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    RunSegment {
        direction: Direction,
        span: Span,
        source: Slot,
    },
    CopyCheckpoint {
        slot: Slot,
    },
    UncopyCheckpoint {
        slot: Slot,
    },
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Input => write!(f, "input"),
            Slot::Result => write!(f, "result"),
            Slot::Checkpoint(k) => write!(f, "checkpoint{k}"),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::RunSegment {
                direction,
                span,
                source,
            } => {
                let d = match direction {
                    Direction::Forward => "forward",
                    Direction::Backward => "backward",
                };
                write!(
                    f,
                    "run {d} {}..{} ({} iterations) from {source}",
                    span.start, span.end, span.iterations
                )
            }
            Move::CopyCheckpoint { slot } => write!(f, "copy into {slot}"),
            Move::UncopyCheckpoint { slot } => write!(f, "uncopy from {slot}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PebblePlan {
    pub n_t: u32,
    pub t: usize,
    pub moves: Vec<Move>,
}

/// Plan for `t = 2^{n_t}` iterations.
pub fn plan_pebble_schedule(n_t: u32) -> Result<PebblePlan> {
    if n_t == 0 || n_t > MAX_PEBBLES {
        return Err(Error::Domain(format!("checkpoint budget must be in 1..={MAX_PEBBLES}, got {n_t}")));
    }
    plan_padded(n_t, 1usize << n_t)
}

/// Plan for any `1 <= t <= 2^{n_t}`; unit segments past `t` run no
/// iterations.
pub fn plan_pebble_schedule_for(n_t: u32, t: usize) -> Result<PebblePlan> {
    if n_t == 0 || n_t > MAX_PEBBLES {
        return Err(Error::Domain(format!("checkpoint budget must be in 1..={MAX_PEBBLES}, got {n_t}")));
    }
    if t == 0 || t > 1usize << n_t {
        return Err(Error::Domain(format!(
            "{t} iterations do not fit {n_t} checkpoints (at most {})",
            1usize << n_t
        )));
    }
    plan_padded(n_t, t)
}

fn plan_padded(n_t: u32, t: usize) -> Result<PebblePlan> {
    let mut moves = Vec::new();
    place(&mut moves, n_t, 0, Slot::Input, Slot::Result, t);
    Ok(PebblePlan { n_t, t, moves })
}

fn segment(moves: &mut Vec<Move>, a: usize, src: Slot, dst: Slot, t: usize, placing: bool) {
    let span = Span {
        start: a,
        end: a + 1,
        iterations: usize::from(a < t),
    };
    moves.push(Move::RunSegment {
        direction: Direction::Forward,
        span,
        source: src,
    });
    moves.push(if placing {
        Move::CopyCheckpoint { slot: dst }
    } else {
        Move::UncopyCheckpoint { slot: dst }
    });
    moves.push(Move::RunSegment {
        direction: Direction::Backward,
        span,
        source: src,
    });
}

fn place(moves: &mut Vec<Move>, n: u32, a: usize, src: Slot, dst: Slot, t: usize) {
    if n == 0 {
        return segment(moves, a, src, dst, t, true);
    }
    let h = 1usize << (n - 1);
    let mid = Slot::Checkpoint(n as usize - 1);
    place(moves, n - 1, a, src, mid, t);
    place(moves, n - 1, a + h, mid, dst, t);
    remove(moves, n - 1, a, src, mid, t);
}

fn remove(moves: &mut Vec<Move>, n: u32, a: usize, src: Slot, dst: Slot, t: usize) {
    if n == 0 {
        return segment(moves, a, src, dst, t, false);
    }
    let h = 1usize << (n - 1);
    let mid = Slot::Checkpoint(n as usize - 1);
    place(moves, n - 1, a, src, mid, t);
    remove(moves, n - 1, a + h, mid, dst, t);
    remove(moves, n - 1, a, src, mid, t);
}

impl PebblePlan {
    /// Number of segment executions (forward runs).
    pub fn segment_executions(&self) -> usize {
        self.moves
            .iter()
            .filter(|m| {
                matches!(
                    m,
                    Move::RunSegment {
                        direction: Direction::Forward,
                        ..
                    }
                )
            })
            .count()
    }

    /// Map iterations executed, counting both directions.
    pub fn iterations_executed(&self) -> usize {
        self.moves
            .iter()
            .map(|m| match m {
                Move::RunSegment { span, .. } => span.iterations,
                _ => 0,
            })
            .sum()
    }

    /// Replays the plan on slot contents (the unit time each slot holds).
    /// Returns the largest number of simultaneously live checkpoints.
    pub fn check_legality(&self) -> Result<usize> {
        let illegal = |index: usize, reason: String| Error::IllegalPlan { index, reason };
        let n = self.n_t as usize;
        let mut checkpoints: Vec<Option<usize>> = vec![None; n];
        let mut result: Option<usize> = None;
        let mut cursor: Option<usize> = None;
        let mut peak = 0;
        for (index, m) in self.moves.iter().enumerate() {
            let held = |slot: Slot, checkpoints: &[Option<usize>], result: Option<usize>| -> Result<Option<usize>> {
                match slot {
                    Slot::Input => Ok(Some(0)),
                    Slot::Result => Ok(result),
                    Slot::Checkpoint(k) if k < n => Ok(checkpoints[k]),
                    Slot::Checkpoint(k) => Err(illegal(index, format!("checkpoint {k} exceeds budget {n}"))),
                }
            };
            match *m {
                Move::RunSegment {
                    direction,
                    span,
                    source,
                } => {
                    if span.end <= span.start || span.iterations > span.end - span.start {
                        return Err(illegal(index, "malformed span".into()));
                    }
                    if held(source, &checkpoints, result)? != Some(span.start) {
                        return Err(illegal(
                            index,
                            format!("{source} does not hold the state at {}", span.start),
                        ));
                    }
                    match direction {
                        Direction::Forward => {
                            if cursor.is_some() {
                                return Err(illegal(index, "cursor is not clear".into()));
                            }
                            cursor = Some(span.end);
                        }
                        Direction::Backward => {
                            if cursor != Some(span.end) {
                                return Err(illegal(index, "cursor does not hold the span end".into()));
                            }
                            cursor = None;
                        }
                    }
                }
                Move::CopyCheckpoint { slot } | Move::UncopyCheckpoint { slot } => {
                    let copy = matches!(m, Move::CopyCheckpoint { .. });
                    let Some(now) = cursor else {
                        return Err(illegal(index, "nothing materialized in the cursor".into()));
                    };
                    let current = held(slot, &checkpoints, result)?;
                    let next = match (copy, current) {
                        (true, None) => Some(now),
                        (false, Some(c)) if c == now => None,
                        (true, Some(_)) => return Err(illegal(index, format!("{slot} is occupied"))),
                        _ => return Err(illegal(index, format!("{slot} does not match the cursor"))),
                    };
                    match slot {
                        Slot::Input => return Err(illegal(index, "the input block is read-only".into())),
                        Slot::Result => result = next,
                        Slot::Checkpoint(k) => checkpoints[k] = next,
                    }
                    let live = checkpoints.iter().filter(|c| c.is_some()).count();
                    if live > n {
                        return Err(illegal(index, format!("{live} live checkpoints exceed {n}")));
                    }
                    peak = peak.max(live);
                }
            }
        }
        let end = 1usize << self.n_t;
        if cursor.is_some() {
            return Err(illegal(self.moves.len(), "cursor left dirty".into()));
        }
        if checkpoints.iter().any(Option::is_some) {
            return Err(illegal(self.moves.len(), "checkpoints left occupied".into()));
        }
        if result != Some(end) {
            return Err(illegal(self.moves.len(), format!("result does not hold the state at {end}")));
        }
        Ok(peak)
    }

    /// Gates realizing the plan on a layout with pebble blocks.
    pub fn compile(&self, layout: &RegisterLayout) -> Result<Circuit> {
        self.check_legality()?;
        let blocks = layout
            .pebble()
            .ok_or_else(|| Error::Layout("layout has no pebble blocks".into()))?;
        if blocks.checkpoints.len() < self.n_t as usize {
            return Err(Error::Layout(format!(
                "plan needs {} checkpoint blocks, layout has {}",
                self.n_t,
                blocks.checkpoints.len()
            )));
        }
        if layout.t_max() == 0 {
            return Err(Error::Layout("pebble execution needs one garbage slot".into()));
        }
        let block = |s: Slot| -> &PointBlock {
            match s {
                Slot::Input => &blocks.input,
                Slot::Result => &blocks.result,
                Slot::Checkpoint(k) => &blocks.checkpoints[k],
            }
        };
        let cursor = layout.main_block();
        let xor = |from: &PointBlock, to: &PointBlock| -> Vec<Gate> {
            from.qubits()
                .zip(to.qubits())
                .map(|(control, target)| Gate::Cnot { control, target })
                .collect()
        };
        let forward = build_forward_iteration(layout, 0)?;
        let inverse = build_inverse_iteration(layout, 0)?;
        let mut c = Circuit::new(layout.clone());
        for (k, m) in self.moves.iter().enumerate() {
            match *m {
                Move::RunSegment {
                    direction: Direction::Forward,
                    span,
                    source,
                } => {
                    c.push_section(format!("pebble[{k}].load"), xor(block(source), &cursor))?;
                    for _ in 0..span.iterations {
                        c.append(&forward)?;
                    }
                }
                Move::RunSegment {
                    direction: Direction::Backward,
                    span,
                    source,
                } => {
                    for _ in 0..span.iterations {
                        c.append(&inverse)?;
                    }
                    c.push_section(format!("pebble[{k}].unload"), xor(block(source), &cursor))?;
                }
                Move::CopyCheckpoint { slot } => {
                    c.push_section(format!("pebble[{k}].copy"), xor(&cursor, block(slot)))?;
                }
                Move::UncopyCheckpoint { slot } => {
                    c.push_section(format!("pebble[{k}].uncopy"), xor(&cursor, block(slot)))?;
                }
            }
        }
        Ok(c)
    }
}
