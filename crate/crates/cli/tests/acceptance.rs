//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use speckit_cli::RunConfig;
use speckit_core::envelope::{
    fit_g_analytic, has_unique_minimum, minimize_envelope, AlphaGrid, AnalyticOptions, CurveMeta, EnvelopeParams,
    ErrorCurve, MIN_EXISTENCE_BOUND,
};
use speckit_core::spectral::{
    discretize_operator, forward_apply, sf_width, DiscreteOperator, Spectrum, SpectrumKind, SpreadFunctionModel,
    WavelengthGrid,
};
use speckit_core::tikhonov::{classical_bound, filter_gain, operator_norm, relative_error, solve_tikhonov, ErrorBudget};
use speckit_core::training::{
    add_noise, count_local_maxima, run_ensemble, select_from_ensemble, synth_spectrum, FitMode, OriginalExample,
    SelectionReport, TrainingSpec,
};

const REFERENCE_NORM: f64 = 0.843;
const NORM_BAND: f64 = 0.10;
const WIDTH_TOL: f64 = 1e-14;
const FILTER_TOL: f64 = 1e-12;
const SOLVER_TOL: f64 = 1e-8;
const SELF_CONSISTENCY_TOL: f64 = 0.02;
const GOLDEN_TOL: f64 = 0.01;
const G_BRACKET: (f64, f64) = (0.02, 0.09);
const LOG_ALPHA_BRACKET: (f64, f64) = (-2.7, -1.8);
const ENSEMBLE_SECONDS: f64 = 120.0;
const SIGMA_P_MAX: f64 = 0.12;
const MIN_RESOLVED: usize = 9;
const PEAK_THRESHOLD: f64 = 0.1;
const ENVELOPE_MAX: f64 = 0.35;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml")
}

fn reference_config() -> RunConfig {
    RunConfig::load(&config_path()).expect("bundled config loads")
}

fn reference_operator() -> DiscreteOperator {
    let c = reference_config();
    let model = SpreadFunctionModel::unperturbed(c.kernel.q).unwrap();
    discretize_operator(&c.target_grid().unwrap(), &c.source_grid().unwrap(), &model).unwrap()
}

fn width_law() -> Outcome {
    let m = SpreadFunctionModel::unperturbed(0.015).unwrap();
    let table = [(450.0, 6.75), (485.0, 7.275), (620.0, 9.3), (650.0, 9.75)];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (lambda, omega) in table {
        let w = sf_width(lambda, &m).unwrap();
        worst = worst.max((w / omega - 1.0).abs());
        parts.push(format!("w({lambda})={w}"));
    }
    outcome(worst <= WIDTH_TOL, format!("{} (max relative deviation {worst:.1e})", parts.join(", ")))
}

fn norm_check() -> Outcome {
    let op = reference_operator();
    let weighted = operator_norm(&op);
    let plain = op.svd().singular_values[0];
    let rel = weighted / REFERENCE_NORM - 1.0;
    outcome(
        rel.abs() <= NORM_BAND,
        format!(
            "weighted spectral norm (trapezoid weights) = {weighted:.4}, plain matrix 2-norm = {plain:.4}, target {REFERENCE_NORM} +/- {:.0}%, deviation {:+.1}%",
            NORM_BAND * 100.0,
            rel * 100.0
        ),
    )
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn filter_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut spectra = vec![operator_norm_spectrum(&reference_operator())];
    for _ in 0..20 {
        spectra.push(random_matrix(&mut rng, 30, 20).singular_values().as_slice().to_vec());
    }
    let mut worst_ratio: f64 = 0.0;
    for k in 0..20 {
        let alpha = 10f64.powf(-8.0 + 8.0 * k as f64 / 19.0);
        let bound = 1.0 / (2.0 * alpha.sqrt());
        for sv in &spectra {
            let gain = sv.iter().map(|s| filter_gain(*s, alpha)).fold(0.0, f64::max);
            worst_ratio = worst_ratio.max(gain / bound);
        }
    }
    outcome(
        worst_ratio <= 1.0 + FILTER_TOL,
        format!("max gain / (1/(2 sqrt(alpha))) = {worst_ratio:.15} over 21 matrices x 20 alphas"),
    )
}

fn operator_norm_spectrum(op: &DiscreteOperator) -> Vec<f64> {
    op.weighted_singular_values().to_vec()
}

fn filter_factor_solution(m: &DMatrix<f64>, f: &[f64], alpha: f64) -> DVector<f64> {
    let svd = m.clone().svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let f = DVector::from_column_slice(f);
    let mut y = DVector::zeros(m.ncols());
    for (i, s) in svd.singular_values.iter().enumerate() {
        y += (s / (s * s + alpha) * u.column(i).dot(&f)) * v_t.row(i).transpose();
    }
    y
}

fn rel_gap(a: &[f64], b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt() / b.norm()
}

fn solver_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let rows = 14 + 4 * k;
        let cols = 13 + 3 * k;
        let m = random_matrix(&mut rng, rows, cols);
        let t = WavelengthGrid::new(1.0, 1.0, rows).unwrap();
        let s = WavelengthGrid::new(1.0, 1.0, cols).unwrap();
        let op = DiscreteOperator::from_parts(m.clone(), t, s, vec![1.0; cols], vec![1.0; rows]).unwrap();
        let fv: Vec<f64> = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = Spectrum::new(t, fv.clone(), SpectrumKind::Measured).unwrap();
        for alpha in [1e-3, 1e-1, 10.0] {
            let y = solve_tikhonov(&op, &f, alpha).unwrap();
            worst = worst.max(rel_gap(y.spectrum.values(), &filter_factor_solution(&m, &fv, alpha)));
        }
    }
    let op = reference_operator();
    let fv: Vec<f64> = op.target_grid().nodes().map(|x| 1.0 + ((x - 450.0) / 13.0).cos()).collect();
    let f = Spectrum::new(*op.target_grid(), fv.clone(), SpectrumKind::Measured).unwrap();
    let mut worst_reference: f64 = 0.0;
    for alpha in [1e-4, 1e-2, 1.0] {
        let y = solve_tikhonov(&op, &f, alpha).unwrap();
        worst_reference = worst_reference.max(rel_gap(y.spectrum.values(), &filter_factor_solution(op.matrix(), &fv, alpha)));
    }
    outcome(
        worst.max(worst_reference) < SOLVER_TOL,
        format!("max relative gap: random systems up to 50x40 {worst:.2e}, reference operator {worst_reference:.2e}"),
    )
}

fn exact_envelope_curve(p: &EnvelopeParams) -> ErrorCurve {
    let grid = AlphaGrid::log_spaced(-6.0, 0.0, 41).unwrap();
    ErrorCurve::tabulate(grid, CurveMeta::named("envelope"), |a| p.value(a)).unwrap()
}

fn envelope_condition() -> Outcome {
    let p = EnvelopeParams::new(0.843, 0.02, 0.045).unwrap();
    let lhs = p.existence_lhs();
    let unique = has_unique_minimum(&p);
    let a_star = minimize_envelope(&p).unwrap();
    let fit = fit_g_analytic(&exact_envelope_curve(&p), 0.843, 0.02, &AnalyticOptions::default()).unwrap();
    let dg = fit.g / 0.045 - 1.0;
    let da = fit.alpha_g / a_star - 1.0;
    let pass = unique && (lhs - 0.079).abs() < 1e-3 && lhs < MIN_EXISTENCE_BOUND && dg.abs() < SELF_CONSISTENCY_TOL && da.abs() < SELF_CONSISTENCY_TOL;
    outcome(
        pass,
        format!("lhs = {lhs:.5} < {MIN_EXISTENCE_BOUND:.3}, recovered g = {:.5} ({:+.2}%), alpha = {:.4e} ({:+.2}%)", fit.g, dg * 100.0, fit.alpha_g, da * 100.0),
    )
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = hi - r * (hi - lo);
        let d = lo + r * (hi - lo);
        if f(c) < f(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    0.5 * (lo + hi)
}

fn fixed_point() -> Outcome {
    let p = EnvelopeParams::new(0.843, 0.02, 0.045).unwrap();
    let fit = fit_g_analytic(&exact_envelope_curve(&p), 0.843, 0.02, &AnalyticOptions::default()).unwrap();
    let golden = 10f64.powf(golden_section(|x| p.value(10f64.powf(x)), -8.0, 1.0));
    let rel = fit.alpha_g / golden - 1.0;
    outcome(
        fit.converged && fit.iterations <= 100 && rel.abs() < GOLDEN_TOL,
        format!("converged = {} in {} iterations, alpha = {:.5e} vs golden section {golden:.5e} ({:+.3}%)", fit.converged, fit.iterations, fit.alpha_g, rel * 100.0),
    )
}

struct Restored {
    sigma: f64,
    restored_maxima: usize,
    broadened_maxima: usize,
    noisy_maxima: usize,
}

fn restore_p(report: &SelectionReport, op: &DiscreteOperator, spec: &TrainingSpec, p: &OriginalExample) -> Restored {
    let y = synth_spectrum(&p.lines.lines, &spec.source);
    let f = forward_apply(op, &y).unwrap();
    let measured = add_noise(&f, p.noise_sd, p.seed).unwrap();
    let sol = solve_tikhonov(op, &measured, report.alpha_g).unwrap();
    Restored {
        sigma: relative_error(&sol.spectrum, &y).unwrap(),
        restored_maxima: count_local_maxima(sol.spectrum.values(), PEAK_THRESHOLD),
        broadened_maxima: count_local_maxima(f.values(), PEAK_THRESHOLD),
        noisy_maxima: count_local_maxima(measured.values(), PEAK_THRESHOLD),
    }
}

struct Selected {
    report: SelectionReport,
    op: DiscreteOperator,
    seconds: f64,
}

fn select(spec: &TrainingSpec) -> Selected {
    let t = Instant::now();
    let ensemble = run_ensemble(spec).unwrap();
    let report = select_from_ensemble(&ensemble, spec, FitMode::Scan).unwrap();
    Selected { report, op: ensemble.base, seconds: t.elapsed().as_secs_f64() }
}

fn selection(s: &Selected, members: usize) -> Outcome {
    let (g, la) = (s.report.g, s.report.alpha_g.log10());
    let pass = (G_BRACKET.0..=G_BRACKET.1).contains(&g)
        && (LOG_ALPHA_BRACKET.0..=LOG_ALPHA_BRACKET.1).contains(&la)
        && s.seconds < ENSEMBLE_SECONDS;
    outcome(pass, format!("{members} sweeps in {:.1} s: g = {g:.4}, log10 alpha_g = {la:.3}, eta = {:.4}", s.seconds, s.report.eta_used))
}

fn restoration(s: &Selected, spec: &TrainingSpec, p: &OriginalExample) -> Outcome {
    let r = restore_p(&s.report, &s.op, spec, p);
    let pass = r.sigma <= SIGMA_P_MAX && r.restored_maxima >= MIN_RESOLVED && r.broadened_maxima < r.restored_maxima;
    outcome(
        pass,
        format!(
            "sigma_rel(alpha_g) = {:.4}, maxima above 10%: restored {}, noise-free measured {} (noisy samples {})",
            r.sigma, r.restored_maxima, r.broadened_maxima, r.noisy_maxima
        ),
    )
}

fn regularizing(spec: &TrainingSpec, p: &OriginalExample, base: &Selected) -> Outcome {
    let mut sigmas = Vec::new();
    let mut etas = Vec::new();
    for factor in [1.0, 0.5, 0.25, 0.125] {
        let scaled = spec.scaled_errors(factor);
        let s = if factor == 1.0 { None } else { Some(select(&scaled)) };
        let s = s.as_ref().unwrap_or(base);
        let mut q = p.clone();
        q.noise_sd *= factor;
        sigmas.push(restore_p(&s.report, &s.op, &scaled, &q).sigma);
        etas.push(s.report.eta_used);
    }
    let monotone = sigmas.windows(2).all(|w| w[1] <= w[0]);
    let list = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    outcome(monotone, format!("eta = [{}] -> sigma_rel(alpha_g) = [{}]", list(&etas), list(&sigmas)))
}

fn overstatement(s: &Selected) -> Outcome {
    let r = &s.report;
    let budget = ErrorBudget::new(r.eta_used, 0.0).unwrap();
    let classical = classical_bound(r.alpha_g, r.norm_a, &budget, 0.0).unwrap();
    let values: Vec<f64> = r.upper_curve.grid().alphas().map(|a| classical_bound(a, r.norm_a, &budget, 0.0).unwrap()).collect();
    let interior_min = (1..values.len() - 1).any(|i| values[i] <= values[i - 1] && values[i] <= values[i + 1]);
    let pass = classical > 1.0 && r.predicted_error < ENVELOPE_MAX && !interior_min;
    outcome(
        pass,
        format!(
            "at alpha_g: classical bound = {classical:.4}, envelope = {:.4}; classical bound has interior minimum on grid: {interior_min}",
            r.predicted_error
        ),
    )
}

fn run_pipeline(out: &Path) -> bool {
    ["simulate", "train", "fit", "restore", "report"].iter().all(|stage| {
        Command::new(env!("CARGO_BIN_EXE_speckit"))
            .arg(stage)
            .arg("--config")
            .arg(config_path())
            .arg("--out")
            .arg(out)
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false)
    })
}

fn collect_files(root: &Path, dir: &Path, acc: &mut Vec<(PathBuf, Vec<u8>)>) {
    let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_files(root, &p, acc);
        } else {
            acc.push((p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
        }
    }
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    if !(run_pipeline(&a) && run_pipeline(&b)) {
        return outcome(false, "pipeline run failed".into());
    }
    let (mut fa, mut fb) = (Vec::new(), Vec::new());
    collect_files(&a, &a, &mut fa);
    collect_files(&b, &b, &mut fb);
    let same = fa == fb;
    outcome(same, format!("{} files compared across two full runs, identical: {same}", fa.len()))
}

fn main() {
    let config = reference_config();
    let spec = config.training_spec().unwrap();
    let p = config.original().unwrap();

    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "width law", width_law()),
        (2, "operator norm", norm_check()),
        (3, "filter bound", filter_bound()),
        (4, "solver oracle", solver_oracle()),
        (5, "envelope condition", envelope_condition()),
        (6, "fixed-point convergence", fixed_point()),
    ];
    let base = select(&spec);
    results.push((7, "parameter selection", selection(&base, spec.member_count())));
    results.push((8, "restoration quality", restoration(&base, &spec, &p)));
    results.push((9, "regularizing property", regularizing(&spec, &p, &base)));
    results.push((10, "overstatement contrast", overstatement(&base)));
    results.push((11, "determinism", determinism()));

    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag} {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
