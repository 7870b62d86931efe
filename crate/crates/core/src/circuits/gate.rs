use std::fmt;

/// Elementary gate. Qubit arguments are absolute indices into the layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Not { target: usize },
    Cnot { control: usize, target: usize },
    Toffoli { controls: [usize; 2], target: usize },
    Swap { a: usize, b: usize },
    /// `diag(1, e^{iθ})`.
    Phase { target: usize, angle: f64 },
    Hadamard { target: usize },
    /// `diag(1, 1, 1, e^{iθ})` on (control, target).
    CPhase { control: usize, target: usize, angle: f64 },
}

/// Gate kind without operands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Not,
    Cnot,
    Toffoli,
    Swap,
    Phase,
    Hadamard,
    CPhase,
}

impl GateKind {
    pub const ALL: [GateKind; 7] = [
        GateKind::Not,
        GateKind::Cnot,
        GateKind::Toffoli,
        GateKind::Swap,
        GateKind::Phase,
        GateKind::Hadamard,
        GateKind::CPhase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Not => "NOT",
            GateKind::Cnot => "CNOT",
            GateKind::Toffoli => "TOFFOLI",
            GateKind::Swap => "SWAP",
            GateKind::Phase => "PHASE",
            GateKind::Hadamard => "HADAMARD",
            GateKind::CPhase => "CPHASE",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Qubits a gate touches, target first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Support {
    qubits: [usize; 3],
    len: usize,
}

impl Support {
    fn of(qs: &[usize]) -> Self {
        let mut qubits = [0; 3];
        qubits[..qs.len()].copy_from_slice(qs);
        Support {
            qubits,
            len: qs.len(),
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.qubits[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Not { .. } => GateKind::Not,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Toffoli { .. } => GateKind::Toffoli,
            Gate::Swap { .. } => GateKind::Swap,
            Gate::Phase { .. } => GateKind::Phase,
            Gate::Hadamard { .. } => GateKind::Hadamard,
            Gate::CPhase { .. } => GateKind::CPhase,
        }
    }

    pub fn support(&self) -> Support {
        match *self {
            Gate::Not { target } | Gate::Hadamard { target } | Gate::Phase { target, .. } => {
                Support::of(&[target])
            }
            Gate::Cnot { control, target } | Gate::CPhase { control, target, .. } => {
                Support::of(&[target, control])
            }
            Gate::Toffoli { controls, target } => Support::of(&[target, controls[0], controls[1]]),
            Gate::Swap { a, b } => Support::of(&[a, b]),
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Phase { angle, .. } | Gate::CPhase { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Phase { target, angle } => Gate::Phase {
                target,
                angle: -angle,
            },
            Gate::CPhase {
                control,
                target,
                angle,
            } => Gate::CPhase {
                control,
                target,
                angle: -angle,
            },
            g => g,
        }
    }

    /// Maps computational basis states to computational basis states, up to
    /// a phase. Only the Hadamard fails this.
    pub fn is_monomial(&self) -> bool {
        !matches!(self, Gate::Hadamard { .. })
    }

    /// Pure permutation of basis states (no phases).
    pub fn is_permutation(&self) -> bool {
        matches!(
            self,
            Gate::Not { .. } | Gate::Cnot { .. } | Gate::Toffoli { .. } | Gate::Swap { .. }
        )
    }

    /// Action on a basis index for monomial gates: the new index and the
    /// phase angle picked up. `None` for the Hadamard.
    #[inline]
    pub fn map_basis(&self, v: u128) -> Option<(u128, f64)> {
        let bit = |q: usize| (v >> q) & 1 == 1;
        Some(match *self {
            Gate::Not { target } => (v ^ (1 << target), 0.0),
            Gate::Cnot { control, target } => {
                (if bit(control) { v ^ (1 << target) } else { v }, 0.0)
            }
            Gate::Toffoli { controls, target } => (
                if bit(controls[0]) && bit(controls[1]) {
                    v ^ (1 << target)
                } else {
                    v
                },
                0.0,
            ),
            Gate::Swap { a, b } => {
                if bit(a) != bit(b) {
                    (v ^ (1 << a) ^ (1 << b), 0.0)
                } else {
                    (v, 0.0)
                }
            }
            Gate::Phase { target, angle } => (v, if bit(target) { angle } else { 0.0 }),
            Gate::CPhase {
                control,
                target,
                angle,
            } => (v, if bit(control) && bit(target) { angle } else { 0.0 }),
            Gate::Hadamard { .. } => return None,
        })
    }

    pub(crate) fn distinct_support(&self) -> bool {
        let s = self.support();
        let q = s.as_slice();
        (0..q.len()).all(|a| (a + 1..q.len()).all(|b| q[a] != q[b]))
    }
}

impl fmt::Display for Gate {
    /// `KIND target [control1 [control2]] [angle]`; a SWAP lists its two qubits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Not { target } | Gate::Hadamard { target } => {
                write!(f, "{} {target}", self.kind())
            }
            Gate::Cnot { control, target } => write!(f, "CNOT {target} {control}"),
            Gate::Toffoli { controls, target } => {
                write!(f, "TOFFOLI {target} {} {}", controls[0], controls[1])
            }
            Gate::Swap { a, b } => write!(f, "SWAP {a} {b}"),
            Gate::Phase { target, angle } => write!(f, "PHASE {target} {angle:.16e}"),
            Gate::CPhase {
                control,
                target,
                angle,
            } => write!(f, "CPHASE {target} {control} {angle:.16e}"),
        }
    }
}
