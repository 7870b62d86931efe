use num_complex::Complex64;

use super::noise::Mat2;
use super::sparse::SparseState;
use crate::circuits::Gate;
use crate::error::{Error, Result};

/// Amplitude vector over all `2^n` basis states; qubit `q` is bit `q` of the
/// index.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    qubits: usize,
    amps: Vec<Complex64>,
}

/// Hard ceiling independent of any budget: indices must fit in `usize`.
const MAX_DENSE_QUBITS: usize = 40;

impl DenseState {
    pub fn zero(qubits: usize) -> Result<Self> {
        if qubits > MAX_DENSE_QUBITS {
            return Err(Error::Backend(format!("{qubits} qubits cannot be stored densely")));
        }
        let mut amps = vec![Complex64::default(); 1usize << qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(DenseState { qubits, amps })
    }

    pub fn from_amplitudes(qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if qubits > MAX_DENSE_QUBITS || amps.len() != 1usize << qubits {
            return Err(Error::Dimension(format!(
                "{} amplitudes do not describe {qubits} qubits",
                amps.len()
            )));
        }
        Ok(DenseState { qubits, amps })
    }

    pub fn from_sparse(s: &SparseState) -> Result<Self> {
        Self::from_sparse_truncated(s, s.qubit_count())
    }

    /// Densify keeping only the lowest `qubits` qubits. Every entry must have
    /// zeros above them.
    pub fn from_sparse_truncated(s: &SparseState, qubits: usize) -> Result<Self> {
        if qubits > MAX_DENSE_QUBITS {
            return Err(Error::Backend(format!("{qubits} qubits cannot be stored densely")));
        }
        let mut amps = vec![Complex64::default(); 1usize << qubits];
        for &(v, a) in s.entries() {
            if v >> qubits != 0 {
                return Err(Error::Dimension(format!(
                    "basis index {v} has bits above qubit {qubits}"
                )));
            }
            amps[v as usize] = a;
        }
        Ok(DenseState { qubits, amps })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn reserve_qubits(&mut self, qubits: usize) {
        let want = 1usize << qubits.min(MAX_DENSE_QUBITS);
        if want > self.amps.len() {
            self.amps.reserve_exact(want - self.amps.len());
        }
    }

    /// Append a new highest qubit in `|0⟩`.
    pub fn extend_zero_qubit(&mut self) -> Result<()> {
        if self.qubits + 1 > MAX_DENSE_QUBITS {
            return Err(Error::Backend("dense state cannot grow further".into()));
        }
        let len = self.amps.len();
        self.amps.resize(2 * len, Complex64::default());
        self.qubits += 1;
        Ok(())
    }

    /// Project the highest qubit onto `|0⟩` without renormalising; returns
    /// the probability removed.
    pub fn project_top_zero(&mut self) -> f64 {
        assert!(self.qubits > 0, "nothing to project");
        let half = self.amps.len() / 2;
        let removed = self.amps[half..].iter().map(|a| a.norm_sqr()).sum();
        self.amps.truncate(half);
        self.qubits -= 1;
        removed
    }

    /// Exact gate.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        self.apply_with_rotations(gate, &[])
    }

    /// Gate followed by one single-qubit unitary per support qubit
    /// (support order, target first), fused into a single pass.
    pub fn apply_with_rotations(&mut self, gate: &Gate, rotations: &[Mat2]) -> Result<()> {
        let support = gate.support();
        let qs = support.as_slice();
        if let Some(&q) = qs.iter().find(|&&q| q >= self.qubits) {
            return Err(Error::Dimension(format!(
                "{gate} touches qubit {q} of a {}-qubit state",
                self.qubits
            )));
        }
        if !rotations.is_empty() && rotations.len() != qs.len() {
            return Err(Error::Dimension("one rotation per support qubit required".into()));
        }
        match qs.len() {
            1 => apply_local::<1, 2>(&mut self.amps, self.qubits, qs, gate, rotations),
            2 => apply_local::<2, 4>(&mut self.amps, self.qubits, qs, gate, rotations),
            3 => apply_local::<3, 8>(&mut self.amps, self.qubits, qs, gate, rotations),
            _ => unreachable!("gates touch one to three qubits"),
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &DenseState) -> Result<Complex64> {
        if self.qubits != other.qubits {
            return Err(Error::Dimension(format!(
                "overlap of {}-qubit and {}-qubit states",
                self.qubits, other.qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

enum LocalOp<const D: usize> {
    /// `out[l] = phase[l] * in[src[l]]`.
    Monomial { src: [usize; D], phase: [Complex64; D] },
    Matrix([[Complex64; D]; D]),
}

fn local_op<const D: usize>(gate: &Gate, qs: &[usize]) -> LocalOp<D> {
    let embed = |l: usize| -> u128 {
        qs.iter()
            .enumerate()
            .fold(0u128, |v, (b, &q)| v | ((((l >> b) & 1) as u128) << q))
    };
    let extract = |v: u128| -> usize {
        qs.iter()
            .enumerate()
            .fold(0usize, |l, (b, &q)| l | ((((v >> q) & 1) as usize) << b))
    };
    if gate.is_monomial() {
        let mut src = [0usize; D];
        let mut phase = [Complex64::new(1.0, 0.0); D];
        for l in 0..D {
            let (v, phi) = gate.map_basis(embed(l)).expect("monomial");
            let to = extract(v);
            src[to] = l;
            phase[to] = if phi == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, phi)
            };
        }
        LocalOp::Monomial { src, phase }
    } else {
        // Hadamard, the only non-monomial gate.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = [[Complex64::default(); D]; D];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = Complex64::new(if r & c & 1 == 1 { -h } else { h }, 0.0);
            }
        }
        LocalOp::Matrix(m)
    }
}

/// Insert zero bits at the ascending positions `sorted`.
#[inline(always)]
fn deposit(mut r: usize, sorted: &[usize]) -> usize {
    for &q in sorted {
        let low = r & ((1usize << q) - 1);
        r = low | ((r ^ low) << 1);
    }
    r
}

#[inline(always)]
fn rotate_pairs<const D: usize>(buf: &mut [Complex64; D], bit: usize, m: &Mat2) {
    let stride = 1usize << bit;
    for l in 0..D {
        if l & stride == 0 {
            let (u, v) = (buf[l], buf[l | stride]);
            buf[l] = m[0] * u + m[1] * v;
            buf[l | stride] = m[2] * u + m[3] * v;
        }
    }
}

fn apply_local<const K: usize, const D: usize>(
    amps: &mut [Complex64],
    n: usize,
    qs: &[usize],
    gate: &Gate,
    rotations: &[Mat2],
) {
    debug_assert_eq!(qs.len(), K);
    let mut sorted = [0usize; K];
    sorted.copy_from_slice(qs);
    sorted.sort_unstable();
    let mut offsets = [0usize; D];
    for (l, off) in offsets.iter_mut().enumerate() {
        *off = (0..K).fold(0, |acc, b| acc | (((l >> b) & 1) << qs[b]));
    }
    let op = local_op::<D>(gate, qs);
    let blocks = 1usize << (n - K);

    // Fast path for the exact, pure-permutation case: swap amplitude pairs.
    if rotations.is_empty() {
        if let LocalOp::Monomial { src, phase } = &op {
            let one = Complex64::new(1.0, 0.0);
            if phase.iter().all(|p| *p == one) {
                let moved: Vec<usize> = (0..D).filter(|&l| src[l] != l).collect();
                if moved.is_empty() {
                    return;
                }
                // Monomial gates here are products of disjoint transpositions.
                let pairs: Vec<(usize, usize)> = moved
                    .iter()
                    .filter(|&&l| l < src[l])
                    .map(|&l| (offsets[l], offsets[src[l]]))
                    .collect();
                for r in 0..blocks {
                    let base = deposit(r, &sorted);
                    for &(a, b) in &pairs {
                        amps.swap(base + a, base + b);
                    }
                }
                return;
            }
            if src.iter().enumerate().all(|(l, &s)| s == l) {
                // Diagonal.
                let hit: Vec<(usize, Complex64)> = (0..D)
                    .filter(|&l| phase[l] != one)
                    .map(|l| (offsets[l], phase[l]))
                    .collect();
                for r in 0..blocks {
                    let base = deposit(r, &sorted);
                    for &(off, p) in &hit {
                        amps[base + off] *= p;
                    }
                }
                return;
            }
        }
    }

    for r in 0..blocks {
        let base = deposit(r, &sorted);
        let mut input = [Complex64::default(); D];
        for l in 0..D {
            input[l] = amps[base + offsets[l]];
        }
        let mut out = [Complex64::default(); D];
        match &op {
            LocalOp::Monomial { src, phase } => {
                for l in 0..D {
                    out[l] = phase[l] * input[src[l]];
                }
            }
            LocalOp::Matrix(m) => {
                for (l, row) in m.iter().enumerate() {
                    out[l] = row.iter().zip(&input).map(|(a, b)| a * b).sum();
                }
            }
        }
        for (b, rot) in rotations.iter().enumerate() {
            rotate_pairs(&mut out, b, rot);
        }
        for l in 0..D {
            amps[base + offsets[l]] = out[l];
        }
    }
}

/// Largest union support fused into one pass over the state.
pub(crate) const CLUSTER_MAX: usize = 7;
const LOCAL: usize = 1 << CLUSTER_MAX;

/// A run of consecutive gates (with their noise rotations) whose combined
/// support is at most [`CLUSTER_MAX`] qubits, compiled so the whole run costs
/// one gather/scatter sweep of the amplitude vector.
///
/// Permutations never move data: the builder tracks which buffer slot holds
/// each local basis state and bakes that into the pair lists of later steps.
#[derive(Debug, Clone)]
pub(crate) struct Cluster {
    sorted: Vec<usize>,
    /// Buffer slot currently holding local basis state `l`.
    slot: Vec<u8>,
    steps: Vec<LocalStep>,
}

#[derive(Debug, Clone)]
enum LocalStep {
    Rotate(Mat2, Vec<(u8, u8)>),
    Hadamard(Vec<(u8, u8)>),
    Phase(Vec<(u8, Complex64)>),
}

impl Cluster {
    pub(crate) fn new(qubits: &[usize]) -> Self {
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert!(sorted.len() <= CLUSTER_MAX, "cluster too wide");
        let dim = 1usize << sorted.len();
        Cluster {
            sorted,
            slot: (0..dim).map(|l| l as u8).collect(),
            steps: Vec::new(),
        }
    }

    fn local(&self, q: usize) -> usize {
        self.sorted.binary_search(&q).expect("qubit outside cluster")
    }

    fn pairs(&self, bit: usize) -> Vec<(u8, u8)> {
        let s = 1usize << bit;
        (0..self.slot.len())
            .filter(|l| l & s == 0)
            .map(|l| (self.slot[l], self.slot[l | s]))
            .collect()
    }

    /// Append `gate` followed by `rotations` (support order; may be empty).
    pub(crate) fn push(&mut self, gate: &Gate, rotations: &[Mat2]) {
        let support = gate.support();
        let qs = support.as_slice();
        if let Gate::Hadamard { target } = gate {
            let p = self.pairs(self.local(*target));
            self.steps.push(LocalStep::Hadamard(p));
        } else {
            let embed = |l: usize| -> u128 {
                self.sorted
                    .iter()
                    .enumerate()
                    .fold(0u128, |v, (b, &q)| v | ((((l >> b) & 1) as u128) << q))
            };
            let mut next = self.slot.clone();
            let mut phases = Vec::new();
            for l in 0..self.slot.len() {
                let (v, phi) = gate.map_basis(embed(l)).expect("monomial gate");
                let to = self
                    .sorted
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (b, &q)| acc | ((((v >> q) & 1) as usize) << b));
                next[to] = self.slot[l];
                if phi != 0.0 {
                    phases.push((self.slot[l], Complex64::from_polar(1.0, phi)));
                }
            }
            self.slot = next;
            if !phases.is_empty() {
                self.steps.push(LocalStep::Phase(phases));
            }
        }
        for (&q, m) in qs.iter().zip(rotations) {
            let p = self.pairs(self.local(q));
            self.steps.push(LocalStep::Rotate(*m, p));
        }
    }

    fn is_identity(&self) -> bool {
        self.steps.is_empty() && self.slot.iter().enumerate().all(|(l, &s)| s as usize == l)
    }
}

/// Blocks processed side by side; each local amplitude becomes a short
/// vector so the per-step loops run over lanes instead of strided pairs.
const LANES: usize = 8;

/// Real parts in the first `LANES` entries, imaginary parts after.
type Slot = [f64; 2 * LANES];

#[inline(always)]
fn rotate_slots(u: &mut Slot, v: &mut Slot, m: &Mat2) {
    let (m0r, m0i, m1r, m1i) = (m[0].re, m[0].im, m[1].re, m[1].im);
    let (m2r, m2i, m3r, m3i) = (m[2].re, m[2].im, m[3].re, m[3].im);
    for k in 0..LANES {
        let (a, b, c, d) = (u[k], u[LANES + k], v[k], v[LANES + k]);
        u[k] = m0r * a - m0i * b + m1r * c - m1i * d;
        u[LANES + k] = m0r * b + m0i * a + m1r * d + m1i * c;
        v[k] = m2r * a - m2i * b + m3r * c - m3i * d;
        v[LANES + k] = m2r * b + m2i * a + m3r * d + m3i * c;
    }
}

#[inline(always)]
fn pair_mut(v: &mut [Slot], a: u8, b: u8) -> (&mut Slot, &mut Slot) {
    let (a, b) = (a as usize, b as usize);
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

impl DenseState {
    pub(crate) fn apply_cluster(&mut self, c: &Cluster) -> Result<()> {
        let k = c.sorted.len();
        if let Some(&q) = c.sorted.last().filter(|&&q| q >= self.qubits) {
            return Err(Error::Dimension(format!(
                "gate touches qubit {q} of a {}-qubit state",
                self.qubits
            )));
        }
        if c.is_identity() {
            return Ok(());
        }
        let dim = 1usize << k;
        let mut offsets = [0usize; LOCAL];
        for (l, off) in offsets.iter_mut().enumerate().take(dim) {
            *off = (0..k).fold(0, |acc, b| acc | (((l >> b) & 1) << c.sorted[b]));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut buf = vec![[0.0f64; 2 * LANES]; dim];
        let blocks = 1usize << (self.qubits - k);
        let mut bases = [0usize; LANES];
        let mut r0 = 0;
        while r0 < blocks {
            let used = LANES.min(blocks - r0);
            for (lane, base) in bases.iter_mut().enumerate().take(used) {
                *base = deposit(r0 + lane, &c.sorted);
            }
            for (l, slot) in buf.iter_mut().enumerate() {
                for lane in 0..used {
                    let a = self.amps[bases[lane] + offsets[l]];
                    slot[lane] = a.re;
                    slot[LANES + lane] = a.im;
                }
            }
            for step in &c.steps {
                match step {
                    LocalStep::Rotate(m, pairs) => {
                        for &(p, q) in pairs {
                            let (u, v) = pair_mut(&mut buf, p, q);
                            rotate_slots(u, v, m);
                        }
                    }
                    LocalStep::Hadamard(pairs) => {
                        for &(p, q) in pairs {
                            let (u, v) = pair_mut(&mut buf, p, q);
                            for lane in 0..2 * LANES {
                                let (a, b) = (u[lane], v[lane]);
                                u[lane] = (a + b) * h;
                                v[lane] = (a - b) * h;
                            }
                        }
                    }
                    LocalStep::Phase(list) => {
                        for &(p, z) in list {
                            let s = &mut buf[p as usize];
                            for lane in 0..LANES {
                                let (a, b) = (s[lane], s[LANES + lane]);
                                s[lane] = z.re * a - z.im * b;
                                s[LANES + lane] = z.re * b + z.im * a;
                            }
                        }
                    }
                }
            }
            for l in 0..dim {
                let slot = &buf[c.slot[l] as usize];
                for lane in 0..used {
                    self.amps[bases[lane] + offsets[l]] = Complex64::new(slot[lane], slot[LANES + lane]);
                }
            }
            r0 += used;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::noise::{axis_rotation, identity};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn toffoli_and_swap_permute_amplitudes() {
        let mut s = DenseState::zero(3).unwrap();
        s.amplitudes_mut()[0] = c(0.0, 0.0);
        s.amplitudes_mut()[0b011] = c(1.0, 0.0);
        s.apply_gate(&Gate::Toffoli {
            controls: [0, 1],
            target: 2,
        })
        .unwrap();
        assert_eq!(s.amplitudes()[0b111], c(1.0, 0.0));
        s.apply_gate(&Gate::Swap { a: 0, b: 2 }).unwrap();
        assert_eq!(s.amplitudes()[0b111], c(1.0, 0.0));
        s.apply_gate(&Gate::Not { target: 1 }).unwrap();
        assert_eq!(s.amplitudes()[0b101], c(1.0, 0.0));
    }

    #[test]
    fn hadamard_twice_is_identity() {
        let mut s = DenseState::zero(2).unwrap();
        s.apply_gate(&Gate::Hadamard { target: 1 }).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0b10] - c(h, 0.0)).norm() < 1e-15);
        s.apply_gate(&Gate::Hadamard { target: 1 }).unwrap();
        assert!((s.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_rotations_match_exact_gate() {
        let mut a = DenseState::zero(3).unwrap();
        a.apply_gate(&Gate::Hadamard { target: 0 }).unwrap();
        a.apply_gate(&Gate::Hadamard { target: 2 }).unwrap();
        let mut b = a.clone();
        let g = Gate::Toffoli {
            controls: [0, 2],
            target: 1,
        };
        a.apply_gate(&g).unwrap();
        b.apply_with_rotations(&g, &[identity(); 3]).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn rotation_acts_on_the_named_support_qubit() {
        // Rotate the control of a CNOT on |00⟩: only qubit 1 (control) moves.
        let mut s = DenseState::zero(2).unwrap();
        let rx = axis_rotation([1.0, 0.0, 0.0], std::f64::consts::PI);
        s.apply_with_rotations(&Gate::Cnot { control: 1, target: 0 }, &[identity(), rx])
            .unwrap();
        assert!((s.amplitudes()[0b10].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn extend_and_project() {
        let mut s = DenseState::zero(1).unwrap();
        s.apply_gate(&Gate::Hadamard { target: 0 }).unwrap();
        s.extend_zero_qubit().unwrap();
        s.apply_gate(&Gate::Cnot { control: 0, target: 1 }).unwrap();
        let removed = s.project_top_zero();
        assert!((removed - 0.5).abs() < 1e-15);
        assert_eq!(s.qubit_count(), 1);
        assert!((s.norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cluster_matches_gate_by_gate() {
        let gates = [
            Gate::Hadamard { target: 0 },
            Gate::Hadamard { target: 3 },
            Gate::Toffoli { controls: [0, 3], target: 1 },
            Gate::CPhase { control: 1, target: 3, angle: 0.3 },
            Gate::Swap { a: 1, b: 4 },
            Gate::Phase { target: 4, angle: -1.1 },
        ];
        let rot = axis_rotation([0.6, 0.0, 0.8], 0.2);
        let mut a = DenseState::zero(6).unwrap();
        a.apply_gate(&Gate::Hadamard { target: 5 }).unwrap();
        let mut b = a.clone();
        let mut cl = Cluster::new(&[0, 1, 3, 4]);
        for g in &gates {
            let rs = vec![rot; g.support().len()];
            a.apply_with_rotations(g, &rs).unwrap();
            cl.push(g, &rs);
        }
        b.apply_cluster(&cl).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn out_of_range_gate_is_rejected() {
        let mut s = DenseState::zero(2).unwrap();
        assert!(s.apply_gate(&Gate::Not { target: 2 }).is_err());
    }
}
