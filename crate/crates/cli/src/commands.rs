use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde_json::{json, Map, Value};

use qstrange::circuits::pebble::plan_pebble_schedule_for;
use qstrange::circuits::{build_evolution, BitReversal, RegisterLayout};
use qstrange::fit::fit_line;
use qstrange::lattice::{iterate_point, ImageSet, LatticePoint};
use qstrange::observables::{
    coarse_grain, distribution_fidelity, fidelity, fit_scan, garbage_error_probability, position_density,
    required_samples, run_scan, spectral_from_state, spectral_oracle, write_scan_csv, CoarseDistribution,
    PositionDensity, SamplingMode, ScanGrid,
};
use qstrange::simulator::{evolve_image, run_spectral, Backend, NoiseModel, QuantumState};
use qstrange::Error;

use crate::manifest::Outputs;
use crate::render::{render_grid, upscale_for, RenderedImage, DEFAULT_FLOOR};
use crate::{AttractorArgs, Command, ComplexityArgs, PebbleArgs, ScanArgs, SpectralArgs};

type Results = Map<String, Value>;

pub(crate) fn run(command: &Command, out: &mut Outputs) -> Result<Results> {
    match command {
        Command::Attractor(a) => attractor(a, out),
        Command::Spectral(a) => spectral(a, out),
        Command::FidelityScan(a) => fidelity_scan(a, out),
        Command::Complexity(a) => complexity(a, out),
        Command::Pebble(a) => pebble(a, out),
        Command::Replay(_) => unreachable!("replay is dispatched before any output is created"),
    }
}

/// Turn a budget refusal into advice on what to change.
fn budget_hint(e: Error) -> anyhow::Error {
    match e {
        Error::OverBudget { qubits, budget, .. } => anyhow::Error::new(e).context(format!(
            "this run needs a {qubits}-qubit dense state but --budget is {budget}; \
             use a smaller --nq (4 or 5 fit the default budget) or a shorter --t, or raise --budget"
        )),
        other => other.into(),
    }
}

fn load_image(path: Option<&Path>, n_q: u32, out: &mut Outputs) -> Result<ImageSet> {
    let Some(path) = path else {
        return Ok(ImageSet::default_disk(n_q)?);
    };
    out.record_input(path)?;
    let file = File::open(path).with_context(|| format!("opening image {}", path.display()))?;
    let image = ImageSet::read_pbm(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    ensure!(
        image.n_q() == n_q,
        "image {} is {}x{} (n_q={}) but --nq is {n_q}",
        path.display(),
        1u32 << image.n_q(),
        1u32 << image.n_q(),
        image.n_q()
    );
    Ok(image)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    ensure!(
        epsilon.is_finite() && epsilon >= 0.0,
        "--epsilon must be a finite non-negative number, got {epsilon}"
    );
    Ok(())
}

fn emit_ppm(out: &mut Outputs, name: &str, img: &RenderedImage) -> Result<()> {
    let mut buf = Vec::new();
    img.write_ppm(&mut buf)?;
    out.emit_bytes(name, buf)
}

/// Density after `t` classical steps, each initial point carrying `1/N_d`.
fn classical_density(image: &ImageSet, t: usize) -> Result<PositionDensity> {
    let n_q = image.n_q();
    let mut p = vec![0.0; 1usize << (2 * n_q + 1)];
    let w = 1.0 / image.len() as f64;
    for &pt in image.points() {
        p[iterate_point(pt, t, n_q)?.index(n_q)] += w;
    }
    Ok(PositionDensity { n_q, p })
}

/// Writes `<prefix>_density.csv`, `<prefix>_central.ppm` and
/// `<prefix>_phase_space.ppm`; records the panel maxima.
fn emit_density(out: &mut Outputs, prefix: &str, d: &PositionDensity, results: &mut Results) -> Result<()> {
    out.emit(&format!("{prefix}_density.csv"), |w| d.write_csv(w))?;
    let n = 1usize << d.n_q;
    let at = |i: usize, j: usize| d.get(LatticePoint { i: i as u32, j: j as u32 });
    let (central, cmax) = render_grid(n, n, upscale_for(n, n), DEFAULT_FLOOR, |c, r| at(c, 3 * n / 2 - 1 - r));
    let (full, fmax) = render_grid(n, 2 * n, upscale_for(n, 2 * n), DEFAULT_FLOOR, |c, r| at(c, 2 * n - 1 - r));
    emit_ppm(out, &format!("{prefix}_central.ppm"), &central)?;
    emit_ppm(out, &format!("{prefix}_phase_space.ppm"), &full)?;
    results.insert(format!("{prefix}_central_max"), json!(cmax));
    results.insert(format!("{prefix}_phase_space_max"), json!(fmax));
    results.insert(
        format!("{prefix}_occupied_cells"),
        json!(d.p.iter().filter(|&&v| v > 0.0).count()),
    );
    Ok(())
}

fn attractor(a: &AttractorArgs, out: &mut Outputs) -> Result<Results> {
    check_epsilon(a.epsilon)?;
    ensure!(
        a.quantum || a.epsilon == 0.0,
        "--epsilon only applies to simulator runs; add --quantum"
    );
    let image = load_image(a.image.as_deref(), a.n_q, out)?;
    let mut results = Results::new();
    results.insert("initial_points".into(), json!(image.len()));

    let classical = classical_density(&image, a.t)?;
    emit_density(out, "classical", &classical, &mut results)?;

    if a.quantum {
        let layout = RegisterLayout::new(a.n_q, a.t)?;
        let noise = NoiseModel::new(a.epsilon, a.common.seed)?;
        let guard = a.common.guard();
        let backend = Backend::from(a.common.backend);
        let state = evolve_image(&image, a.t, &layout, &noise, backend, &guard).map_err(budget_hint)?;
        let exact = evolve_image(&image, a.t, &layout, &NoiseModel::exact(), Backend::Sparse, &guard)?;
        let f = fidelity(&exact, &state)?;
        let density = position_density(&state, &layout)?;
        emit_density(out, "quantum", &density, &mut results)?;
        results.insert("qubits".into(), json!(layout.qubit_count()));
        results.insert("gates".into(), json!(build_evolution(&layout, a.t)?.len()));
        results.insert("backend".into(), json!(if state.is_sparse() { "sparse" } else { "dense" }));
        results.insert("fidelity".into(), json!(f));
    }
    Ok(results)
}

/// Column `c`, row `r` of a coarse or full spectrum drawn with zero
/// frequency in the centre and `k_y` increasing upwards.
fn centred_cell(cols: usize, rows: usize, c: usize, r: usize) -> (usize, usize) {
    ((c + cols / 2) % cols, (rows - 1 - r + rows / 2) % rows)
}

fn emit_coarse(out: &mut Outputs, name: &str, d: &CoarseDistribution, results: &mut Results) -> Result<()> {
    out.emit(&format!("{name}.csv"), |w| d.write_csv(w))?;
    let (cols, rows) = (d.cells_x(), d.cells_y());
    let (img, max) = render_grid(cols, rows, upscale_for(cols, rows), DEFAULT_FLOOR, |c, r| {
        let (x, y) = centred_cell(cols, rows, c, r);
        d.get(x, y)
    });
    emit_ppm(out, &format!("{name}.ppm"), &img)?;
    results.insert(format!("{name}_max"), json!(max));
    Ok(())
}

fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

/// Largest `n_q` for which the full spectrum is written out.
const FULL_SPECTRUM_MAX_NQ: u32 = 6;

fn spectral(a: &SpectralArgs, out: &mut Outputs) -> Result<Results> {
    check_epsilon(a.epsilon)?;
    ensure!(
        a.n_f <= a.n_q,
        "--nf ({}) cannot exceed --nq ({})",
        a.n_f,
        a.n_q
    );
    ensure!(
        a.common.backend != crate::BackendArg::Sparse,
        "the spectral program contains Hadamard gates and needs the dense backend"
    );
    let image = load_image(a.image.as_deref(), a.n_q, out)?;
    let layout = RegisterLayout::new(a.n_q, a.t)?;
    let guard = a.common.guard();
    let noise = NoiseModel::new(a.epsilon, a.common.seed)?;
    let state = run_spectral(&image, a.t, &layout, &noise, BitReversal::Swaps, &guard).map_err(budget_hint)?;
    let measured = spectral_from_state(&state, &layout, false)?;
    // |C|² sums to N_d 2N², the quantum readout to one.
    let norm = image.len() as f64 * (1u64 << (2 * a.n_q + 1)) as f64;
    let oracle = spectral_oracle(&image, a.t, a.n_q)?.scaled(1.0 / norm);

    let mut results = Results::new();
    results.insert("qubits".into(), json!(layout.qubit_count()));
    results.insert("garbage_error".into(), json!(garbage_error_probability(&QuantumState::Dense(state.clone()), &layout)));
    results.insert("max_relative_error".into(), json!(measured.max_relative_error(&oracle)));
    if noise.is_active() {
        let exact = run_spectral(&image, a.t, &layout, &NoiseModel::exact(), BitReversal::Swaps, &guard)
            .map_err(budget_hint)?;
        results.insert("fidelity".into(), json!(exact.inner(&state)?.norm_sqr()));
    } else {
        results.insert("fidelity".into(), json!(1.0));
    }
    drop(state);

    if a.n_q <= FULL_SPECTRUM_MAX_NQ {
        out.emit("spectrum.csv", |w| measured.scaled(norm).write_csv(w))?;
        out.emit("oracle_spectrum.csv", |w| oracle.scaled(norm).write_csv(w))?;
    }
    let coarse = coarse_grain(&measured, a.n_f)?;
    let oracle_coarse = coarse_grain(&oracle, a.n_f)?;
    emit_coarse(out, "coarse", &coarse, &mut results)?;
    emit_coarse(out, "oracle_coarse", &oracle_coarse, &mut results)?;
    results.insert(
        "coarse_fidelity".into(),
        json!(distribution_fidelity(&coarse, &oracle_coarse)?),
    );
    results.insert("coarse_correlation".into(), json!(correlation(&coarse.p, &oracle_coarse.p)));
    Ok(results)
}

fn fidelity_scan(a: &ScanArgs, out: &mut Outputs) -> Result<Results> {
    for &e in &a.epsilon {
        check_epsilon(e)?;
    }
    ensure!(a.window.len() == 2 && a.window[0] < a.window[1], "--window needs two increasing bounds");
    let grid = ScanGrid {
        n_q: a.n_q.clone(),
        t: a.t.clone(),
        epsilon: a.epsilon.clone(),
        seeds: (0..a.seeds).map(|k| a.common.seed + k).collect(),
    };
    ensure!(!grid.is_empty(), "the scan grid is empty");
    let total = grid.len();
    let mut done = 0;
    let rows = run_scan(&grid, &a.common.guard(), |r| {
        done += 1;
        eprintln!(
            "[{done}/{total}] n_q={} t={} eps={:e} seed={} f={:.6} W_g={:.3e}",
            r.n_q, r.t, r.epsilon, r.seed, r.f, r.w_g
        );
    })
    .map_err(budget_hint)?;
    out.emit("scan.csv", |w| write_scan_csv(&rows, w))?;

    let fit = fit_scan(&rows, (a.window[0], a.window[1]));
    let line = |f: Option<qstrange::fit::LineFit>| {
        f.map(|l| json!({"slope": l.slope, "intercept": l.intercept, "residual": l.residual, "points": l.points}))
    };
    let summary = json!({
        "rows": rows.len(),
        "fidelity_fit": line(fit.fidelity),
        "garbage_fit": line(fit.garbage),
        "fidelity_constant": fit.fidelity_constant,
        "garbage_constant": fit.garbage_constant,
        "postselection_deviation": fit.postselection_deviation,
    });
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    out.emit_bytes("fit_summary.json", text.into_bytes())?;
    let Value::Object(results) = summary else { unreachable!() };
    Ok(results)
}

fn complexity(a: &ComplexityArgs, out: &mut Outputs) -> Result<Results> {
    ensure!(!a.n_q.is_empty(), "--nq needs at least one value");
    let mut csv = String::from("n_q,mode,M,mean_fidelity,status,reference\n");
    let mut classical = Vec::new();
    let mut quantum = Vec::new();
    for &n_q in &a.n_q {
        ensure!(a.n_f <= n_q, "--nf ({}) cannot exceed n_q ({n_q})", a.n_f);
        let image = ImageSet::default_disk(n_q)?;
        let reference = 0.36 * (1u64 << (2 * n_q)) as f64;
        for (mode, name) in [(SamplingMode::Classical, "classical"), (SamplingMode::Quantum, "quantum")] {
            eprintln!("n_q={n_q} {name}: searching");
            match required_samples(mode, &image, a.t, a.n_f, a.target, a.trials, a.common.seed, a.cap) {
                Ok(s) => {
                    csv.push_str(&format!(
                        "{n_q},{name},{},{},ok,{}\n",
                        s.m,
                        qstrange::observables::fmt_f64(s.mean_fidelity),
                        qstrange::observables::fmt_f64(reference)
                    ));
                    let series = if name == "classical" { &mut classical } else { &mut quantum };
                    series.push((n_q, s.m));
                }
                Err(Error::CappedSearch { best, .. }) => {
                    csv.push_str(&format!(
                        "{n_q},{name},,{},capped,{}\n",
                        qstrange::observables::fmt_f64(best),
                        qstrange::observables::fmt_f64(reference)
                    ));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    out.emit_bytes("complexity.csv", csv.into_bytes())?;

    let mut results = Results::new();
    let xs: Vec<f64> = classical.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = classical.iter().map(|&(_, m)| (m as f64).log2()).collect();
    results.insert("classical_log2_slope".into(), json!(fit_line(&xs, &ys).map(|l| l.slope)));
    let qmax = quantum.iter().map(|&(_, m)| m).max();
    let qmin = quantum.iter().map(|&(_, m)| m).min();
    results.insert(
        "quantum_max_min_ratio".into(),
        json!(qmax.zip(qmin).map(|(h, l)| h as f64 / l as f64)),
    );
    results.insert(
        "capped_points".into(),
        json!(2 * a.n_q.len() - classical.len() - quantum.len()),
    );
    Ok(results)
}

fn pebble(a: &PebbleArgs, out: &mut Outputs) -> Result<Results> {
    let t = a.t.unwrap_or(1usize << a.n_t.min(16));
    let plan = plan_pebble_schedule_for(a.n_t, t)?;
    let peak = plan.check_legality().context("generated pebble plan is illegal")?;

    let mut listing = format!("# n_t={} t={t} moves={}\n", a.n_t, plan.moves.len());
    for (k, m) in plan.moves.iter().enumerate() {
        listing.push_str(&format!("{k} {m}\n"));
    }
    out.emit_bytes("plan.txt", listing.into_bytes())?;

    let mut cost = String::from("n_t,segment_executions\n");
    for level in 1..=a.n_t {
        let p = plan_pebble_schedule_for(level, 1 << level)?;
        cost.push_str(&format!("{level},{}\n", p.segment_executions()));
    }
    out.emit_bytes("cost.csv", cost.into_bytes())?;

    let mut results = Results::new();
    results.insert("legal".into(), json!(true));
    results.insert("peak_checkpoints".into(), json!(peak));
    results.insert("segment_executions".into(), json!(plan.segment_executions()));
    results.insert("iterations_executed".into(), json!(plan.iterations_executed()));

    match a.common.backend {
        crate::BackendArg::Dense => bail!("pebble verification runs on the sparse backend; use --backend sparse"),
        _ => {
            let layout = RegisterLayout::with_pebble_blocks(a.n_q, 1, a.n_t as usize)?;
            let image = ImageSet::full(a.n_q)?;
            let outcome = qstrange::simulator::execute_pebble_plan(&plan, &layout, &image)?;
            let mut pairs = String::from("i0,j0,i_t,j_t\n");
            for (p0, pt, _) in &outcome.pairs {
                pairs.push_str(&format!("{},{},{},{}\n", p0.i, p0.j, pt.i, pt.j));
            }
            out.emit_bytes("verification.csv", pairs.into_bytes())?;
            results.insert("qubits".into(), json!(layout.qubit_count()));
            results.insert("gates".into(), json!(outcome.circuit.len()));
            results.insert("verified_points".into(), json!(outcome.pairs.len()));
            results.insert("mismatches".into(), json!(outcome.mismatches));
            results.insert("dirty_entries".into(), json!(outcome.dirty_entries));
            ensure!(
                outcome.is_verified(),
                "pebble execution failed verification: {} mismatches, {} dirty entries",
                outcome.mismatches,
                outcome.dirty_entries
            );
        }
    }
    Ok(results)
}
