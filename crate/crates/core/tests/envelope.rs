use speckit_core::envelope::{
    fit_g_analytic, fit_g_scan, has_unique_minimum, minimize_envelope, AlphaGrid, AnalyticOptions, CurveMeta,
    EnvelopeParams, ErrorCurve, ScanOptions,
};

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    for _ in 0..200 {
        if f(c) < f(d) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - r * (hi - lo);
        d = lo + r * (hi - lo);
    }
    0.5 * (lo + hi)
}

#[test]
fn minimizer_agrees_with_golden_section() {
    for (n, e, g) in [(0.843, 0.02, 0.045), (0.95, 0.02, 0.056), (1.0, 0.005, 0.01), (0.5, 0.1, 0.3)] {
        let p = EnvelopeParams::new(n, e, g).unwrap();
        assert!(has_unique_minimum(&p));
        let a = minimize_envelope(&p).unwrap();
        // Search in log alpha over [1e-8, 10].
        let t = golden_section(|x| p.value(10f64.powf(x)), -8.0, 1.0);
        let oracle = 10f64.powf(t);
        assert!((a / oracle - 1.0).abs() < 1e-4, "{a} vs {oracle}");
    }
    let a = minimize_envelope(&EnvelopeParams::new(0.843, 0.02, 0.045).unwrap()).unwrap();
    assert!((a / 3.7e-3 - 1.0).abs() < 0.03, "{a}");
}

#[test]
fn minimizer_residual_and_curvature() {
    let p = EnvelopeParams::new(0.843, 0.02, 0.045).unwrap();
    let a = minimize_envelope(&p).unwrap();
    let chi = (0.843 * 0.02 / (4.0 * 0.045f64)).powf(2.0 / 3.0);
    assert!((a - chi * (a + 0.045f64).powf(4.0 / 3.0)).abs() / a < 1e-8);
    assert!(p.value(a * 1.01) > p.value(a) && p.value(a * 0.99) > p.value(a));
}

// A band of curves shaped like training errors: a noise term, a bias term
// saturating at 1, and a floor.
fn synthetic_bundle(grid: &AlphaGrid) -> Vec<ErrorCurve> {
    [(0.006, 0.03, 0.05), (0.009, 0.06, 0.04), (0.012, 0.05, 0.06)]
        .iter()
        .enumerate()
        .map(|(k, &(c, g, floor))| {
            ErrorCurve::tabulate(grid.clone(), CurveMeta::named(format!("m{k}")), |a| {
                floor + c / a.sqrt().max(1e-300) * 0.5 + 0.9 * a / (a + g)
            })
            .unwrap()
        })
        .collect()
}

#[test]
fn analytic_contact_matches_two_dimensional_grid_search() {
    let grid = AlphaGrid::log_spaced(-6.0, 0.0, 61).unwrap();
    let upper = ErrorCurve::upper_boundary(&synthetic_bundle(&grid)).unwrap();
    let (norm_a, eta) = (0.95, 0.02);
    let fit = fit_g_analytic(&upper, norm_a, eta, &AnalyticOptions::default()).unwrap();
    assert!(fit.converged);

    // Residual of the contact system on a log-spaced (g, alpha) lattice.
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=600 {
        let g = 10f64.powf(-3.0 + 3.0 * i as f64 / 600.0);
        let p = EnvelopeParams::new(norm_a, eta, g).unwrap();
        for j in 0..=600 {
            let a = 10f64.powf(-5.0 + 4.0 * j as f64 / 600.0);
            let s = upper.interpolate(a).unwrap();
            let r1 = (p.value(a) - s) / s;
            let r2 = (a / p.fixed_point_map(a)).ln();
            let r = r1 * r1 + r2 * r2;
            if r < best.0 {
                best = (r, g, a);
            }
        }
    }
    let (_, g_star, a_star) = best;
    assert!((fit.g.log10() - g_star.log10()).abs() < 0.03, "g {} vs {g_star}", fit.g);
    assert!((fit.alpha_g.log10() - a_star.log10()).abs() < 0.05, "alpha {} vs {a_star}", fit.alpha_g);
}

#[test]
fn scan_envelope_dominates_members() {
    let grid = AlphaGrid::log_spaced(-6.0, 0.0, 41).unwrap();
    let members = synthetic_bundle(&grid);
    let opts = ScanOptions::default();
    let gs: Vec<f64> = (0..25).map(|k| 10f64.powf(-3.0 + 3.0 * k as f64 / 24.0)).collect();
    let fit = fit_g_scan(&members, &gs, 0.95, 0.02, &opts).unwrap();
    let p = EnvelopeParams::new(0.95, 0.02, fit.contact.g).unwrap();
    for m in &members {
        for (a, s) in grid.alphas().zip(m.sigmas()) {
            assert!(p.value(a) >= s - opts.slack);
        }
    }
    // The next larger g on the grid no longer dominates.
    let k = gs.iter().position(|g| *g == fit.contact.g).unwrap();
    if k + 1 < gs.len() {
        let q = EnvelopeParams::new(0.95, 0.02, gs[k + 1]).unwrap();
        assert!(grid.alphas().zip(fit.upper.sigmas()).any(|(a, s)| q.value(a) < s - opts.slack));
    }
}

#[test]
fn scan_and_analytic_agree_within_half_a_decade() {
    let grid = AlphaGrid::log_spaced(-6.0, 0.0, 41).unwrap();
    let members = synthetic_bundle(&grid);
    let gs: Vec<f64> = (0..25).map(|k| 10f64.powf(-3.0 + 3.0 * k as f64 / 24.0)).collect();
    let scan = fit_g_scan(&members, &gs, 0.95, 0.02, &ScanOptions::default()).unwrap();
    let analytic = fit_g_analytic(&scan.upper, 0.95, 0.02, &AnalyticOptions::default()).unwrap();
    assert!((scan.contact.alpha_g.log10() - analytic.alpha_g.log10()).abs() < 0.5);
}
