//! Exhaustive checks over small lattices.

use std::collections::HashSet;

use num_complex::Complex64;
use qstrange::circuits::{
    build_forward_iteration, build_inverse_iteration, build_qft_2d, build_spectral_program, iteration_gate_count,
    BitReversal, Circuit, RegisterLayout,
};
use qstrange::fit::fit_line;
use qstrange::lattice::{forward_step, lyapunov_analytics, ImageSet, LatticePoint};
use qstrange::simulator::{DenseState, SparseState};

fn all_points(n_q: u32) -> impl Iterator<Item = LatticePoint> {
    let n = 1u32 << n_q;
    (0..2 * n).flat_map(move |j| (0..n).map(move |i| LatticePoint { i, j }))
}

fn run_sparse(c: &Circuit, index: u128) -> SparseState {
    let mut s = SparseState::basis(c.layout().qubit_count(), index).unwrap();
    for g in c.gates() {
        s.apply_gate(g).unwrap();
    }
    s
}

#[test]
fn step_with_dropped_bit_is_injective() {
    for n_q in 1..=5 {
        let mut seen = HashSet::new();
        for p in all_points(n_q) {
            let s = forward_step(p, n_q).unwrap();
            assert!(seen.insert((s.after, s.garbage_bit)), "collision at n_q={n_q}");
        }
        assert_eq!(seen.len(), 2 << (2 * n_q));
    }
}

#[test]
fn iteration_circuits_follow_the_map_and_clean_up() {
    for n_q in 1..=4 {
        let layout = RegisterLayout::new(n_q, 2).unwrap();
        let block = layout.main_block();
        let slot = layout.garbage_slot(1).unwrap();
        let fwd = build_forward_iteration(&layout, 1).unwrap();
        let inv = build_inverse_iteration(&layout, 1).unwrap();
        for p in all_points(n_q) {
            let step = forward_step(p, n_q).unwrap();
            let image = block.encode(step.after) | (u128::from(step.garbage_bit) << slot);
            let s = run_sparse(&fwd, block.encode(p));
            assert_eq!(s.entries()[0].0, image, "forward n_q={n_q} {p:?}");
            let back = run_sparse(&inv, image);
            assert_eq!(back.entries()[0].0, block.encode(p), "inverse n_q={n_q} {p:?}");
        }
    }
}

#[test]
fn gate_count_is_affine() {
    let xs: Vec<f64> = (2..=6).map(f64::from).collect();
    let ys: Vec<f64> = (2..=6u32)
        .map(|n| build_forward_iteration(&RegisterLayout::new(n, 1).unwrap(), 0).unwrap().len() as f64)
        .collect();
    let fit = fit_line(&xs, &ys).unwrap();
    assert!(fit.residual < 1e-9);
    assert!((fit.slope - 17.0).abs() < 1e-9 && (fit.intercept + 15.0).abs() < 1e-9);
    for n in 2..=6 {
        assert_eq!(ys[n as usize - 2] as usize, iteration_gate_count(n));
    }
}

fn assert_unitary(c: &Circuit) {
    let q = c.layout().qubit_count();
    let dim = 1usize << q;
    let columns: Vec<Vec<Complex64>> = (0..dim)
        .map(|k| {
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            amps[k] = Complex64::new(1.0, 0.0);
            let mut s = DenseState::from_amplitudes(q, amps).unwrap();
            for g in c.gates() {
                s.apply_gate(g).unwrap();
            }
            s.into_amplitudes()
        })
        .collect();
    for a in 0..dim {
        for b in a..dim {
            let z: Complex64 = columns[a].iter().zip(&columns[b]).map(|(x, y)| x.conj() * y).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((z - want).norm() < 1e-12, "column pair ({a}, {b}) gives {z}");
        }
    }
}

#[test]
fn emitted_circuits_are_unitary() {
    for n_q in 1..=3 {
        let layout = RegisterLayout::new(n_q, 1).unwrap();
        assert_unitary(&build_forward_iteration(&layout, 0).unwrap());
        assert_unitary(&build_inverse_iteration(&layout, 0).unwrap());
        let bare = RegisterLayout::new(n_q, 0).unwrap();
        assert_unitary(&build_qft_2d(&bare, BitReversal::Swaps).unwrap());
        assert_unitary(&build_qft_2d(&bare, BitReversal::Relabel).unwrap());
    }
    for n_q in 1..=2 {
        let layout = RegisterLayout::new(n_q, 1).unwrap();
        assert_unitary(&build_spectral_program(&layout, 1, BitReversal::Swaps).unwrap());
    }
}

#[test]
fn lyapunov_identities() {
    let a = lyapunov_analytics();
    // Sum of exponents is ln det J, sum of eigenvalues is tr J.
    assert!((a.lambda_plus + a.lambda_minus - 0.5f64.ln()).abs() < 1e-12);
    assert!((a.lambda_plus.exp() + a.lambda_minus.exp() - 2.5).abs() < 1e-12);
    assert!((a.d_ky - (1.0 + a.lambda_plus / -a.lambda_minus)).abs() < 1e-12);
    assert!((a.d_ky - 1.543).abs() < 1e-3);
}

/// Fraction of `a` with a cell of `b` within `r` lattice steps (periodic).
fn near_fraction(a: &ImageSet, b: &ImageSet, r: i64) -> f64 {
    let n = 1i64 << a.n_q();
    let hit = a
        .points()
        .iter()
        .filter(|p| {
            (-r..=r).any(|di| {
                (-r..=r).any(|dj| {
                    let i = (i64::from(p.i) + di).rem_euclid(n) as u32;
                    let j = (i64::from(p.j) + dj).rem_euclid(2 * n) as u32;
                    b.contains(&LatticePoint { i, j })
                })
            })
        })
        .count();
    hit as f64 / a.len() as f64
}

#[test]
fn five_steps_reach_the_attractor() {
    // Cell sets keep shrinking on the lattice, so compare up to two cells.
    for n_q in 6..=8 {
        let disk = ImageSet::default_disk(n_q).unwrap();
        let early = disk.iterate(5);
        let late = disk.iterate(10);
        let (a, b) = (near_fraction(&late, &early, 2), near_fraction(&early, &late, 2));
        assert!(a > 0.95 && b > 0.95, "n_q={n_q}: {a:.3} {b:.3}");
        let first = disk.iterate(1);
        assert!(near_fraction(&first, &late, 1) < 0.9);
    }
}
