//! Training examples with known solutions and selection of the regularization
//! parameter for the original problem.
//!
//! Each ensemble member synthesizes a Gaussian line spectrum, broadens it with
//! the unperturbed operator, adds noise and is then restored with an operator
//! of perturbed width. The relative-error curves of all members are aggregated
//! and the envelope is fitted to their upper boundary.

mod ensemble;
mod lines;
mod select;
mod spec;

pub use ensemble::{
    add_noise, aggregate_lower, aggregate_upper, base_operator, make_training_example, member_seed,
    relative_data_error, relative_operator_error, run_ensemble, sweep_alpha, Ensemble, EnsembleMember,
    TrainingExample,
};
pub use lines::{
    count_local_maxima, default_line_sets, eight_line_set, nine_line_set, synth_spectrum, ten_line_set, GaussianLine,
    LineSet,
};
pub use select::{fit_curves, restore_original, select_alpha, select_from_ensemble, FitMode, Restoration, SelectionReport};
pub use spec::{EtaRule, OriginalExample, TrainingSpec};
