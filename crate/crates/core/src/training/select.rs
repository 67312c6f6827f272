use super::ensemble::{run_ensemble, Ensemble};
use super::spec::TrainingSpec;
use crate::envelope::{fit_g_analytic, fit_g_scan, EnvelopeParams, ErrorCurve};
use crate::error::{invalid, Result};
use crate::spectral::{DiscreteOperator, Spectrum};
use crate::tikhonov::{solve_tikhonov, RegularizedSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    Scan,
    Analytic,
}

impl FitMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitMode::Scan => "scan",
            FitMode::Analytic => "analytic",
        }
    }
}

impl std::str::FromStr for FitMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scan" => Ok(FitMode::Scan),
            "analytic" => Ok(FitMode::Analytic),
            other => Err(invalid(format!("unknown fit mode {other:?}, expected scan or analytic"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub mode: FitMode,
    pub alpha_g: f64,
    pub g: f64,
    pub eta_used: f64,
    pub norm_a: f64,
    /// Envelope value at `alpha_g`, the a priori error estimate.
    pub predicted_error: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Analytic mode only: `(alpha_i, g_i)` per iteration.
    pub trace: Vec<(f64, f64)>,
    pub curve_bundle: Vec<ErrorCurve>,
    pub upper_curve: ErrorCurve,
}

impl SelectionReport {
    pub fn envelope(&self) -> EnvelopeParams {
        EnvelopeParams::new(self.norm_a, self.eta_used, self.g).expect("fitted parameters are valid")
    }
}

/// Fits `g` and `alpha_g` to precomputed training curves.
pub fn fit_curves(
    curves: Vec<ErrorCurve>,
    norm_a: f64,
    eta: f64,
    spec: &TrainingSpec,
    mode: FitMode,
) -> Result<SelectionReport> {
    if curves.is_empty() {
        return Err(invalid("training ensemble is empty"));
    }
    let upper_curve = ErrorCurve::upper_boundary(&curves)?;
    let contact = match mode {
        FitMode::Scan => fit_g_scan(&curves, &spec.g_grid, norm_a, eta, &spec.scan)?.contact,
        FitMode::Analytic => fit_g_analytic(&upper_curve, norm_a, eta, &spec.analytic)?,
    };
    let predicted_error = EnvelopeParams::new(norm_a, eta, contact.g)?.value(contact.alpha_g);
    Ok(SelectionReport {
        mode,
        alpha_g: contact.alpha_g,
        g: contact.g,
        eta_used: eta,
        norm_a,
        predicted_error,
        iterations: contact.iterations,
        converged: contact.converged,
        trace: contact.trace,
        curve_bundle: curves,
        upper_curve,
    })
}

pub fn select_from_ensemble(ensemble: &Ensemble, spec: &TrainingSpec, mode: FitMode) -> Result<SelectionReport> {
    fit_curves(ensemble.curves(), ensemble.norm_a, ensemble.eta(spec.eta_rule), spec, mode)
}

/// Runs the full training ensemble and selects `alpha_g`.
pub fn select_alpha(spec: &TrainingSpec, mode: FitMode) -> Result<SelectionReport> {
    select_from_ensemble(&run_ensemble(spec)?, spec, mode)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Restoration {
    pub solution: RegularizedSolution,
    pub predicted_error: f64,
}

pub fn restore_original(op: &DiscreteOperator, f_p: &Spectrum, report: &SelectionReport) -> Result<Restoration> {
    let solution = solve_tikhonov(op, f_p, report.alpha_g)?;
    Ok(Restoration { solution, predicted_error: report.predicted_error })
}
