//! Reversible circuits for one map iteration.
//!
//! A forward iteration on `(x, y)` with `y` of `n_q + 1` bits runs three
//! sections:
//!
//! 1. `shift`: SWAP the least significant y-bit into the empty garbage slot,
//!    then ripple it to the top of `y` with `n_q` SWAPs, leaving `floor(j/2)`
//!    with a zero top bit;
//! 2. `add_x_to_y`: `y += x` as an `(n_q + 1)`-bit sum, the final carry
//!    landing in the (zero) top bit of `y`;
//! 3. `add_y_to_x`: `x += y mod 2^n_q` from the low `n_q` bits of `y`; the carry
//!    chain stops at bit `n_q - 1`, which is the modular reduction.
//!
//! Both adders keep their carries in the `n_q - 1` work qubits and clear them
//! again before finishing.

use super::circuit::Circuit;
use super::gate::Gate;
use super::layout::RegisterLayout;
use crate::error::{Error, Result};

/// `b += a`, with the carry out of the top bit XORed into `carry_out`.
///
/// `carries` must hold `a.len() - 1` zeroed qubits; they are zero again
/// afterwards.
pub fn add_with_carry_out(a: &[usize], b: &[usize], carries: &[usize], carry_out: usize) -> Vec<Gate> {
    ripple_add(a, b, carries, Some(carry_out))
}

/// `b += a mod 2^n` for `n = a.len() = b.len()`.
pub fn add_modular(a: &[usize], b: &[usize], carries: &[usize]) -> Vec<Gate> {
    ripple_add(a, b, carries, None)
}

fn ripple_add(a: &[usize], b: &[usize], carries: &[usize], carry_out: Option<usize>) -> Vec<Gate> {
    let n = a.len();
    assert_eq!(b.len(), n, "adder operands differ in width");
    assert!(n >= 1, "adder needs at least one bit");
    assert!(carries.len() + 1 >= n, "adder needs n-1 carry qubits");
    // c[k] is the carry into bit k; c[0] is identically zero and has no qubit.
    let c = |k: usize| -> Option<usize> {
        if k == 0 {
            None
        } else if k < n {
            Some(carries[k - 1])
        } else {
            carry_out
        }
    };
    let mut g = Vec::new();
    let carry_block = |g: &mut Vec<Gate>, k: usize, target: usize| {
        g.push(Gate::Toffoli {
            controls: [a[k], b[k]],
            target,
        });
        g.push(Gate::Cnot {
            control: a[k],
            target: b[k],
        });
        if let Some(ck) = c(k) {
            g.push(Gate::Toffoli {
                controls: [ck, b[k]],
                target,
            });
        }
    };
    // Carries up the chain. The final one only exists with a carry-out qubit.
    let top_with_carry = carry_out.is_some();
    let last_carry_bit = if top_with_carry { n } else { n - 1 };
    for k in 0..last_carry_bit {
        let target = c(k + 1).expect("carry qubit exists below the top");
        carry_block(&mut g, k, target);
    }
    // Top bit: b[n-1] currently holds a^b (with carry-out) or plain b.
    if !top_with_carry {
        g.push(Gate::Cnot {
            control: a[n - 1],
            target: b[n - 1],
        });
    }
    if let Some(cn) = c(n - 1) {
        g.push(Gate::Cnot {
            control: cn,
            target: b[n - 1],
        });
    }
    // Walk back down: clear carry k+1, then write the sum into b[k].
    for k in (0..n - 1).rev() {
        let target = c(k + 1).expect("carry qubit exists below the top");
        if let Some(ck) = c(k) {
            g.push(Gate::Toffoli {
                controls: [ck, b[k]],
                target,
            });
        }
        g.push(Gate::Cnot {
            control: a[k],
            target: b[k],
        });
        g.push(Gate::Toffoli {
            controls: [a[k], b[k]],
            target,
        });
        g.push(Gate::Cnot {
            control: a[k],
            target: b[k],
        });
        if let Some(ck) = c(k) {
            g.push(Gate::Cnot {
                control: ck,
                target: b[k],
            });
        }
    }
    g
}

/// Circuit for one forward iteration that deposits the dropped bit in
/// garbage slot `step`.
pub fn build_forward_iteration(layout: &RegisterLayout, step: usize) -> Result<Circuit> {
    let slot = layout.garbage_slot(step)?;
    let (x, y, work) = (layout.x(), layout.y(), layout.work());
    let n = x.len();

    let mut shift = vec![Gate::Swap { a: y[0], b: slot }];
    shift.extend((0..n).map(|m| Gate::Swap { a: y[m], b: y[m + 1] }));

    let add_x_to_y = add_with_carry_out(x, &y[..n], work, y[n]);
    let add_y_to_x = add_modular(&y[..n], x, work);

    let mut c = Circuit::new(layout.clone());
    c.push_section(format!("forward[{step}].shift"), shift)?;
    c.push_section(format!("forward[{step}].add_x_to_y"), add_x_to_y)?;
    c.push_section(format!("forward[{step}].add_y_to_x"), add_y_to_x)?;
    Ok(c)
}

/// Exact gate-by-gate reversal of [`build_forward_iteration`].
pub fn build_inverse_iteration(layout: &RegisterLayout, step: usize) -> Result<Circuit> {
    let forward = build_forward_iteration(layout, step)?;
    let mut inv = forward.inverse();
    for (name, _) in inv.meta_sections_mut() {
        *name = name.replacen("forward", "inverse", 1);
    }
    Ok(inv)
}

/// Gate count of one forward iteration emitted by this module.
pub fn iteration_gate_count(n_q: u32) -> usize {
    let n = n_q as usize;
    match n {
        0 => 0,
        1 => 5,
        _ => 17 * n - 15,
    }
}

/// Builds multi-iteration programs while tracking which garbage slots hold
/// a bit, so a slot is never written twice or read while empty.
#[derive(Debug)]
pub struct ProgramBuilder {
    circuit: Circuit,
    consumed: Vec<bool>,
}

impl ProgramBuilder {
    pub fn new(layout: &RegisterLayout) -> Self {
        ProgramBuilder {
            circuit: Circuit::new(layout.clone()),
            consumed: vec![false; layout.t_max()],
        }
    }

    pub fn forward(&mut self, step: usize) -> Result<&mut Self> {
        let slot = self.consumed.get(step).copied();
        match slot {
            None => {
                return Err(Error::Layout(format!(
                    "garbage slot {step} is beyond t_max={}",
                    self.consumed.len()
                )))
            }
            Some(true) => {
                return Err(Error::Layout(format!("garbage slot {step} already consumed")))
            }
            Some(false) => {}
        }
        let c = build_forward_iteration(self.circuit.layout(), step)?;
        self.circuit.append(&c)?;
        self.consumed[step] = true;
        Ok(self)
    }

    pub fn inverse(&mut self, step: usize) -> Result<&mut Self> {
        if !self.consumed.get(step).copied().unwrap_or(false) {
            return Err(Error::Layout(format!(
                "garbage slot {step} holds no bit to restore"
            )));
        }
        let c = build_inverse_iteration(self.circuit.layout(), step)?;
        self.circuit.append(&c)?;
        self.consumed[step] = false;
        Ok(self)
    }

    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        self.circuit.append(other)?;
        Ok(self)
    }

    pub fn finish(self) -> Circuit {
        self.circuit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::gate::GateKind;

    /// Classical replay of a permutation circuit on one basis value.
    fn run(gates: &[Gate], mut v: u128) -> u128 {
        for g in gates {
            v = g.map_basis(v).unwrap().0;
        }
        v
    }

    fn bits(v: u128, qs: &[usize]) -> u64 {
        qs.iter()
            .enumerate()
            .fold(0, |acc, (m, &q)| acc | ((((v >> q) & 1) as u64) << m))
    }

    fn place(val: u64, qs: &[usize]) -> u128 {
        qs.iter()
            .enumerate()
            .fold(0, |acc, (m, &q)| acc | ((u128::from((val >> m) & 1)) << q))
    }

    #[test]
    fn adders_are_exact_and_clean() {
        for n in 1..=4usize {
            let a: Vec<usize> = (0..n).collect();
            let b: Vec<usize> = (n..2 * n).collect();
            let carries: Vec<usize> = (2 * n..3 * n - 1).collect();
            let out = 3 * n - 1;
            let with_out = add_with_carry_out(&a, &b, &carries, out);
            let modular = add_modular(&a, &b, &carries);
            for va in 0..1u64 << n {
                for vb in 0..1u64 << n {
                    let v = place(va, &a) | place(vb, &b);
                    let r = run(&with_out, v);
                    let sum = va + vb;
                    assert_eq!(bits(r, &a), va);
                    assert_eq!(bits(r, &b) | (bits(r, &[out]) << n), sum);
                    assert_eq!(bits(r, &carries), 0);

                    let r = run(&modular, v);
                    assert_eq!(bits(r, &a), va);
                    assert_eq!(bits(r, &b), sum % (1 << n));
                    assert_eq!(bits(r, &carries), 0);
                    assert_eq!(bits(r, &[out]), 0);
                }
            }
        }
    }

    #[test]
    fn forward_iteration_is_a_permutation_circuit() {
        let layout = RegisterLayout::new(3, 2).unwrap();
        let c = build_forward_iteration(&layout, 1).unwrap();
        assert!(c.is_permutation());
        assert_eq!(c.count(GateKind::Hadamard), 0);
        assert_eq!(c.count(GateKind::Phase), 0);
    }

    #[test]
    fn counts_follow_closed_form() {
        for n_q in 1..=7 {
            let layout = RegisterLayout::new(n_q, 1).unwrap();
            let c = build_forward_iteration(&layout, 0).unwrap();
            assert_eq!(c.len(), iteration_gate_count(n_q), "n_q={n_q}");
            assert_eq!(c.count(GateKind::Swap), n_q as usize + 1);
        }
    }

    #[test]
    fn inverse_reverses_forward() {
        let layout = RegisterLayout::new(2, 1).unwrap();
        let f = build_forward_iteration(&layout, 0).unwrap();
        let i = build_inverse_iteration(&layout, 0).unwrap();
        let rev: Vec<Gate> = f.gates().iter().rev().copied().collect();
        assert_eq!(i.gates(), &rev[..]);
        assert!(i.meta().sections.iter().all(|(n, _)| n.starts_with("inverse")));
    }

    #[test]
    fn slot_errors() {
        let layout = RegisterLayout::new(2, 2).unwrap();
        assert!(matches!(build_forward_iteration(&layout, 2), Err(Error::Layout(_))));
        let mut b = ProgramBuilder::new(&layout);
        b.forward(0).unwrap();
        assert!(matches!(b.forward(0), Err(Error::Layout(_))));
        assert!(matches!(b.inverse(1), Err(Error::Layout(_))));
        b.inverse(0).unwrap();
    }
}
