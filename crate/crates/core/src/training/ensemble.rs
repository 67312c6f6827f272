use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::lines::synth_spectrum;
use super::spec::{EtaRule, TrainingSpec};
use crate::envelope::{AlphaGrid, CurveMeta, ErrorCurve};
use crate::error::{invalid, Result};
use crate::spectral::{
    discretize_operator, forward_apply, weighted_norm, DiscreteOperator, Spectrum, SpectrumKind, SpreadFunctionModel,
};
use crate::tikhonov::{operator_norm, relative_error, NormalEquations};

/// Adds white Gaussian noise of standard deviation `sd` to every node.
pub fn add_noise(f: &Spectrum, sd: f64, seed: u64) -> Result<Spectrum> {
    if !(sd.is_finite() && sd > 0.0) {
        return Err(invalid(format!("noise standard deviation must be positive, got {sd}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = f
        .values()
        .iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v + sd * z
        })
        .collect();
    Spectrum::new(*f.grid(), values, SpectrumKind::Measured)
}

/// `||a - b|| / ||b||` on the target grid of `b`.
pub fn relative_data_error(noisy: &Spectrum, exact: &Spectrum) -> Result<f64> {
    exact.grid().ensure_matches(noisy.grid(), "relative_data_error")?;
    let denom = exact.norm();
    if denom == 0.0 {
        return Err(invalid("exact right-hand side has zero norm"));
    }
    let diff: Vec<f64> = noisy.values().iter().zip(exact.values()).map(|(a, b)| a - b).collect();
    Ok(weighted_norm(&diff, &exact.grid().trapezoid_weights()) / denom)
}

/// `||A_pert - A|| / ||A||`, spectral norms between the weighted spaces.
pub fn relative_operator_error(perturbed: &DiscreteOperator, base: &DiscreteOperator) -> Result<f64> {
    base.target_grid().ensure_matches(perturbed.target_grid(), "operator target")?;
    base.source_grid().ensure_matches(perturbed.source_grid(), "operator source")?;
    let diff = perturbed.weighted_matrix() - base.weighted_matrix();
    let top = diff.singular_values().iter().copied().fold(0.0, f64::max);
    let norm = operator_norm(base);
    if norm == 0.0 {
        return Err(invalid("base operator is zero"));
    }
    Ok(top / norm)
}

// SplitMix64 finalizer; decorrelates member streams derived from one seed.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Noise seed of the ensemble member `(line_set, noise, zeta)` under `seed`.
pub fn member_seed(seed: u64, line_set: usize, noise: usize, zeta: usize) -> u64 {
    let mut h = mix(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    for k in [line_set, noise, zeta] {
        h = mix(h ^ (k as u64).wrapping_add(0x9e37_79b9_7f4a_7c15));
    }
    h
}

#[derive(Debug, Clone)]
pub struct TrainingExample {
    pub y: Spectrum,
    /// Noise-free broadened spectrum from the unperturbed operator.
    pub f_exact: Spectrum,
    pub f_noisy: Spectrum,
    /// Operator with the selected width perturbation, used for the solve.
    pub op_perturbed: DiscreteOperator,
}

fn base_model(spec: &TrainingSpec) -> Result<SpreadFunctionModel> {
    SpreadFunctionModel::unperturbed(spec.q)
}

pub fn base_operator(spec: &TrainingSpec) -> Result<DiscreteOperator> {
    discretize_operator(&spec.target, &spec.source, &base_model(spec)?)
}

fn check_indices(spec: &TrainingSpec, l: usize, n: usize, z: usize) -> Result<()> {
    if l >= spec.line_sets.len() || n >= spec.noise_sds.len() || z >= spec.zeta_values.len() {
        return Err(invalid(format!(
            "member index ({l}, {n}, {z}) out of bounds for {} line sets, {} noise levels, {} zeta values",
            spec.line_sets.len(),
            spec.noise_sds.len(),
            spec.zeta_values.len()
        )));
    }
    Ok(())
}

fn noisy_member(
    spec: &TrainingSpec,
    base: &DiscreteOperator,
    l: usize,
    n: usize,
    z: usize,
    seed: u64,
) -> Result<(Spectrum, Spectrum, Spectrum)> {
    let y = synth_spectrum(&spec.line_sets[l].lines, &spec.source);
    let f = forward_apply(base, &y)?;
    let noisy = add_noise(&f, spec.noise_sds[n], member_seed(seed, l, n, z))?;
    Ok((y, f, noisy))
}

pub fn make_training_example(
    spec: &TrainingSpec,
    line_set_index: usize,
    noise_index: usize,
    zeta_index: usize,
    seed: u64,
) -> Result<TrainingExample> {
    check_indices(spec, line_set_index, noise_index, zeta_index)?;
    let base = base_operator(spec)?;
    let (y, f_exact, f_noisy) = noisy_member(spec, &base, line_set_index, noise_index, zeta_index, seed)?;
    let model = base_model(spec)?.with_zeta(spec.zeta_values[zeta_index])?;
    let op_perturbed = discretize_operator(&spec.target, &spec.source, &model)?;
    Ok(TrainingExample { y, f_exact, f_noisy, op_perturbed })
}

/// Relative error of the Tikhonov solution at every alpha of the grid.
pub fn sweep_alpha(
    op: &DiscreteOperator,
    f: &Spectrum,
    y_exact: &Spectrum,
    alpha_grid: &AlphaGrid,
    meta: CurveMeta,
) -> Result<ErrorCurve> {
    if y_exact.norm() == 0.0 {
        return Err(invalid("exact solution has zero norm"));
    }
    let normal = NormalEquations::new(op, f)?;
    let sigmas = alpha_grid
        .alphas()
        .map(|a| relative_error(&normal.solve(a)?.spectrum, y_exact))
        .collect::<Result<Vec<f64>>>()?;
    ErrorCurve::new(alpha_grid.clone(), sigmas, meta)
}

pub fn aggregate_upper(curves: &[ErrorCurve]) -> Result<ErrorCurve> {
    ErrorCurve::upper_boundary(curves)
}

pub fn aggregate_lower(curves: &[ErrorCurve]) -> Result<ErrorCurve> {
    ErrorCurve::lower_boundary(curves)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub curve: ErrorCurve,
    pub delta_rel: f64,
    pub xi_rel: f64,
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    /// In (line set, noise, zeta, seed) lexicographic order.
    pub members: Vec<EnsembleMember>,
    pub upper: ErrorCurve,
    pub lower: ErrorCurve,
    pub norm_a: f64,
    pub base: DiscreteOperator,
}

impl Ensemble {
    pub fn curves(&self) -> Vec<ErrorCurve> {
        self.members.iter().map(|m| m.curve.clone()).collect()
    }

    pub fn eta(&self, rule: EtaRule) -> f64 {
        let n = self.members.len() as f64;
        match rule {
            EtaRule::Fixed(eta) => eta,
            EtaRule::Mean => {
                self.members.iter().map(|m| m.delta_rel).sum::<f64>() / n
                    + self.members.iter().map(|m| m.xi_rel).sum::<f64>() / n
            }
            EtaRule::Max => {
                self.members.iter().map(|m| m.delta_rel).fold(0.0, f64::max)
                    + self.members.iter().map(|m| m.xi_rel).fold(0.0, f64::max)
            }
        }
    }

    pub fn delta_range(&self) -> (f64, f64) {
        range(self.members.iter().map(|m| m.delta_rel))
    }

    pub fn xi_range(&self) -> (f64, f64) {
        range(self.members.iter().map(|m| m.xi_rel))
    }
}

fn range(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Sweeps every member of the spec. Members run in parallel; the result does
/// not depend on scheduling.
pub fn run_ensemble(spec: &TrainingSpec) -> Result<Ensemble> {
    spec.validate()?;
    let base = base_operator(spec)?;
    let model = base_model(spec)?;
    let ops = spec
        .zeta_values
        .par_iter()
        .map(|&z| {
            let op = discretize_operator(&spec.target, &spec.source, &model.with_zeta(z)?)?;
            let xi = relative_operator_error(&op, &base)?;
            op.gram();
            Ok((op, xi))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut tuples = Vec::with_capacity(spec.member_count());
    for l in 0..spec.line_sets.len() {
        for n in 0..spec.noise_sds.len() {
            for z in 0..spec.zeta_values.len() {
                for &s in &spec.seeds {
                    tuples.push((l, n, z, s));
                }
            }
        }
    }

    let members = tuples
        .par_iter()
        .map(|&(l, n, z, seed)| {
            let (y, f, noisy) = noisy_member(spec, &base, l, n, z, seed)?;
            let (op, xi_rel) = &ops[z];
            let meta = CurveMeta {
                id: format!("{}_sd{}_z{}_s{}", spec.line_sets[l].name, spec.noise_sds[n], spec.zeta_values[z], seed),
                noise_sd: Some(spec.noise_sds[n]),
                zeta: Some(spec.zeta_values[z]),
                seed: Some(seed),
                line_count: Some(spec.line_sets[l].len()),
            };
            let curve = sweep_alpha(op, &noisy, &y, &spec.alpha_grid, meta)?;
            let delta_rel = relative_data_error(&noisy, &f)?;
            Ok(EnsembleMember { curve, delta_rel, xi_rel: *xi_rel })
        })
        .collect::<Result<Vec<_>>>()?;

    let curves: Vec<ErrorCurve> = members.iter().map(|m| m.curve.clone()).collect();
    let upper = aggregate_upper(&curves)?;
    let lower = aggregate_lower(&curves)?;
    let norm_a = operator_norm(&base);
    Ok(Ensemble { members, upper, lower, norm_a, base })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_is_deterministic_and_seed_dependent() {
        let g = crate::spectral::WavelengthGrid::new(0.0, 1.0, 50).unwrap();
        let f = Spectrum::zeros(g, SpectrumKind::Exact);
        let a = add_noise(&f, 0.1, 7).unwrap();
        assert_eq!(a, add_noise(&f, 0.1, 7).unwrap());
        assert_ne!(a, add_noise(&f, 0.1, 8).unwrap());
        assert!(add_noise(&f, 0.0, 7).is_err());
        let tiny = add_noise(&f, 1e-300, 7).unwrap();
        assert!(tiny.values().iter().all(|v| v.abs() < 1e-290));
    }

    #[test]
    fn member_seeds_differ() {
        let mut seen = std::collections::HashSet::new();
        for l in 0..3 {
            for n in 0..4 {
                for z in 0..3 {
                    for s in [1, 2] {
                        assert!(seen.insert(member_seed(s, l, n, z)));
                    }
                }
            }
        }
    }

    #[test]
    fn example_indices_are_checked() {
        let spec = TrainingSpec::reference_default();
        assert!(make_training_example(&spec, 3, 0, 0, 1).is_err());
        assert!(make_training_example(&spec, 0, 4, 0, 1).is_err());
    }
}
