use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::gate::{Gate, GateKind};
use super::layout::RegisterLayout;
use crate::error::{Error, Result};

/// Bookkeeping carried alongside the gate list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CircuitMeta {
    /// Consecutive named sections and their gate counts, in order.
    pub sections: Vec<(String, usize)>,
    /// Phase `φ` such that the intended state is `e^{iφ}` times the state the
    /// gates produce.
    pub global_phase: f64,
    /// SWAPs emitted only to undo the QFT bit reversal.
    pub bit_reversal_swaps: usize,
    /// The QFT was built without bit-reversal swaps: x and y registers hold
    /// their frequency index with bits in reverse order.
    pub output_bit_reversed: bool,
}

/// Ordered gate list over a fixed layout. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    layout: RegisterLayout,
    gates: Vec<Gate>,
    meta: CircuitMeta,
}

impl Circuit {
    pub fn new(layout: RegisterLayout) -> Self {
        Circuit {
            layout,
            gates: Vec::new(),
            meta: CircuitMeta::default(),
        }
    }

    pub(crate) fn from_parts(layout: RegisterLayout, gates: Vec<Gate>, meta: CircuitMeta) -> Result<Self> {
        let c = Circuit {
            layout,
            gates,
            meta,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn meta(&self) -> &CircuitMeta {
        &self.meta
    }

    pub(crate) fn meta_sections_mut(&mut self) -> impl Iterator<Item = &mut (String, usize)> {
        self.meta.sections.iter_mut()
    }

    pub(crate) fn set_global_phase(&mut self, phase: f64) {
        self.meta.global_phase = phase;
    }

    pub(crate) fn meta_mut(&mut self) -> &mut CircuitMeta {
        &mut self.meta
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Append a named section of gates.
    pub fn push_section(&mut self, name: impl Into<String>, gates: Vec<Gate>) -> Result<()> {
        let n = self.layout.qubit_count();
        for g in &gates {
            check_gate(g, n)?;
        }
        self.meta.sections.push((name.into(), gates.len()));
        self.gates.extend(gates);
        Ok(())
    }

    /// Concatenate another circuit over the same layout.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.layout != self.layout {
            return Err(Error::Layout("cannot append circuits over different layouts".into()));
        }
        self.gates.extend_from_slice(&other.gates);
        self.meta.sections.extend(other.meta.sections.iter().cloned());
        self.meta.global_phase += other.meta.global_phase;
        self.meta.bit_reversal_swaps += other.meta.bit_reversal_swaps;
        self.meta.output_bit_reversed |= other.meta.output_bit_reversed;
        Ok(())
    }

    /// Gates in reverse order, each inverted.
    pub fn inverse(&self) -> Circuit {
        let gates = self.gates.iter().rev().map(Gate::inverse).collect();
        let mut meta = self.meta.clone();
        meta.sections.reverse();
        meta.global_phase = -meta.global_phase;
        Circuit {
            layout: self.layout.clone(),
            gates,
            meta,
        }
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }

    pub fn counts_by_kind(&self) -> BTreeMap<GateKind, usize> {
        let mut m = BTreeMap::new();
        for g in &self.gates {
            *m.entry(g.kind()).or_insert(0) += 1;
        }
        m
    }

    /// Sum of the counts of every section whose name starts with `prefix`.
    pub fn section_total(&self, prefix: &str) -> usize {
        self.meta
            .sections
            .iter()
            .filter(|(n, _)| n.starts_with(prefix))
            .map(|(_, c)| c)
            .sum()
    }

    pub fn is_permutation(&self) -> bool {
        self.gates.iter().all(Gate::is_permutation)
    }

    pub fn is_monomial(&self) -> bool {
        self.gates.iter().all(Gate::is_monomial)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.layout.qubit_count();
        self.gates.iter().try_for_each(|g| check_gate(g, n))
    }

    /// Line-oriented text form: header lines describing the layout, then one
    /// gate per line as `KIND target [control1 [control2]] [angle]`.
    pub fn write_dump(&self, mut w: impl Write) -> Result<()> {
        let l = &self.layout;
        writeln!(w, "# qstrange circuit v1")?;
        writeln!(
            w,
            "LAYOUT n_q={} t_max={} checkpoints={} qubits={}",
            l.n_q(),
            l.t_max(),
            l.pebble().map_or(-1, |p| p.checkpoints.len() as i64),
            l.qubit_count()
        )?;
        for (name, qs) in l.registers() {
            let list: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
            writeln!(w, "REGISTER {name} {}", list.join(" "))?;
        }
        writeln!(
            w,
            "META global_phase={:.16e} bit_reversal_swaps={} output_bit_reversed={}",
            self.meta.global_phase,
            self.meta.bit_reversal_swaps,
            u8::from(self.meta.output_bit_reversed)
        )?;
        for (name, count) in &self.meta.sections {
            writeln!(w, "SECTION {name} {count}")?;
        }
        writeln!(w, "GATES {}", self.gates.len())?;
        for g in &self.gates {
            writeln!(w, "{g}")?;
        }
        Ok(())
    }

    pub fn to_dump_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dump(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is ASCII")
    }

    /// Parse the format produced by [`Circuit::write_dump`].
    pub fn read_dump(reader: impl BufRead) -> Result<Circuit> {
        let mut layout: Option<RegisterLayout> = None;
        let mut registers: Vec<(String, Vec<usize>)> = Vec::new();
        let mut meta = CircuitMeta::default();
        let mut expected_gates: Option<usize> = None;
        let mut gates = Vec::new();
        for (k, line) in reader.lines().enumerate() {
            let lineno = k + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: lineno,
                message,
            };
            let mut toks = line.split_whitespace();
            let head = toks.next().unwrap_or_default();
            match head {
                "LAYOUT" => {
                    let kv = key_values(toks, lineno)?;
                    let get = |key: &str| -> Result<i64> {
                        kv.get(key)
                            .ok_or_else(|| err(format!("LAYOUT lacks {key}")))?
                            .parse::<i64>()
                            .map_err(|_| err(format!("bad value for {key}")))
                    };
                    let n_q = get("n_q")? as u32;
                    let t_max = get("t_max")? as usize;
                    let checkpoints = get("checkpoints")?;
                    let l = if checkpoints < 0 {
                        RegisterLayout::new(n_q, t_max)?
                    } else {
                        RegisterLayout::with_pebble_blocks(n_q, t_max, checkpoints as usize)?
                    };
                    if get("qubits")? as usize != l.qubit_count() {
                        return Err(err("qubit count disagrees with layout".into()));
                    }
                    layout = Some(l);
                }
                "REGISTER" => {
                    let name = toks.next().ok_or_else(|| err("REGISTER lacks a name".into()))?;
                    let qs = toks
                        .map(|t| t.parse::<usize>().map_err(|_| err(format!("bad qubit {t:?}"))))
                        .collect::<Result<Vec<_>>>()?;
                    registers.push((name.to_string(), qs));
                }
                "META" => {
                    let kv = key_values(toks, lineno)?;
                    if let Some(v) = kv.get("global_phase") {
                        meta.global_phase = v.parse().map_err(|_| err("bad global_phase".into()))?;
                    }
                    if let Some(v) = kv.get("bit_reversal_swaps") {
                        meta.bit_reversal_swaps =
                            v.parse().map_err(|_| err("bad bit_reversal_swaps".into()))?;
                    }
                    if let Some(v) = kv.get("output_bit_reversed") {
                        meta.output_bit_reversed = *v == "1";
                    }
                }
                "SECTION" => {
                    let name = toks.next().ok_or_else(|| err("SECTION lacks a name".into()))?;
                    let count = toks
                        .next()
                        .and_then(|c| c.parse::<usize>().ok())
                        .ok_or_else(|| err("SECTION lacks a count".into()))?;
                    meta.sections.push((name.to_string(), count));
                }
                "GATES" => {
                    expected_gates = Some(
                        toks.next()
                            .and_then(|c| c.parse().ok())
                            .ok_or_else(|| err("GATES lacks a count".into()))?,
                    );
                }
                _ => gates.push(parse_gate(line, lineno)?),
            }
        }
        let layout = layout.ok_or(Error::Parse {
            line: 0,
            message: "missing LAYOUT line".into(),
        })?;
        if !registers.is_empty() && registers != layout.registers() {
            return Err(Error::Parse {
                line: 0,
                message: "REGISTER lines disagree with the declared layout".into(),
            });
        }
        if let Some(n) = expected_gates {
            if n != gates.len() {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("GATES declares {n} gates, found {}", gates.len()),
                });
            }
        }
        Circuit::from_parts(layout, gates, meta)
    }
}

fn check_gate(g: &Gate, n: usize) -> Result<()> {
    if let Some(&q) = g.support().as_slice().iter().find(|&&q| q >= n) {
        return Err(Error::Layout(format!("{g} touches qubit {q} outside a {n}-qubit layout")));
    }
    if !g.distinct_support() {
        return Err(Error::Layout(format!("{g} repeats a qubit")));
    }
    Ok(())
}

fn key_values<'a>(
    toks: impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<BTreeMap<&'a str, &'a str>> {
    toks.map(|t| {
        t.split_once('=').ok_or(Error::Parse {
            line,
            message: format!("expected key=value, found {t:?}"),
        })
    })
    .collect()
}

fn parse_gate(line: &str, lineno: usize) -> Result<Gate> {
    let err = |message: String| Error::Parse {
        line: lineno,
        message,
    };
    let toks: Vec<&str> = line.split_whitespace().collect();
    let kind = GateKind::from_name(toks[0]).ok_or_else(|| err(format!("unknown gate {:?}", toks[0])))?;
    let q = |k: usize| -> Result<usize> {
        toks.get(k)
            .ok_or_else(|| err(format!("{kind} needs more operands")))?
            .parse::<usize>()
            .map_err(|_| err(format!("bad qubit {:?}", toks[k])))
    };
    let angle = |k: usize| -> Result<f64> {
        toks.get(k)
            .ok_or_else(|| err(format!("{kind} needs an angle")))?
            .parse::<f64>()
            .map_err(|_| err(format!("bad angle {:?}", toks[k])))
    };
    let arity = match kind {
        GateKind::Not | GateKind::Hadamard => 2,
        GateKind::Cnot | GateKind::Swap | GateKind::Phase => 3,
        GateKind::Toffoli | GateKind::CPhase => 4,
    };
    if toks.len() != arity {
        return Err(err(format!("{kind} takes {} fields, found {}", arity - 1, toks.len() - 1)));
    }
    Ok(match kind {
        GateKind::Not => Gate::Not { target: q(1)? },
        GateKind::Hadamard => Gate::Hadamard { target: q(1)? },
        GateKind::Cnot => Gate::Cnot {
            target: q(1)?,
            control: q(2)?,
        },
        GateKind::Swap => Gate::Swap { a: q(1)?, b: q(2)? },
        GateKind::Phase => Gate::Phase {
            target: q(1)?,
            angle: angle(2)?,
        },
        GateKind::Toffoli => Gate::Toffoli {
            target: q(1)?,
            controls: [q(2)?, q(3)?],
        },
        GateKind::CPhase => Gate::CPhase {
            target: q(1)?,
            control: q(2)?,
            angle: angle(3)?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Circuit {
        let layout = RegisterLayout::new(2, 2).unwrap();
        let mut c = Circuit::new(layout);
        c.push_section(
            "demo",
            vec![
                Gate::Hadamard { target: 0 },
                Gate::CPhase {
                    control: 0,
                    target: 1,
                    angle: 0.1,
                },
                Gate::Toffoli {
                    controls: [0, 1],
                    target: 4,
                },
                Gate::Swap { a: 2, b: 6 },
            ],
        )
        .unwrap();
        c
    }

    #[test]
    fn rejects_out_of_layout_and_repeated_qubits() {
        let mut c = Circuit::new(RegisterLayout::new(1, 0).unwrap());
        assert!(c.push_section("bad", vec![Gate::Not { target: 3 }]).is_err());
        assert!(c.push_section("bad", vec![Gate::Cnot { control: 1, target: 1 }]).is_err());
    }

    #[test]
    fn inverse_twice_is_original() {
        let c = sample();
        assert_eq!(c.inverse().inverse(), c);
    }

    #[test]
    fn dump_round_trip() {
        let c = sample();
        let text = c.to_dump_string();
        assert!(text.contains("TOFFOLI 4 0 1"));
        let back = Circuit::read_dump(text.as_bytes()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn dump_rejects_mismatched_gate_count() {
        let text = sample().to_dump_string().replace("GATES 4", "GATES 5");
        assert!(Circuit::read_dump(text.as_bytes()).is_err());
    }
}
