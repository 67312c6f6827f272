use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use super::grid::{Spectrum, SpectrumKind, WavelengthGrid};
use super::kernel::SpreadFunctionModel;
use crate::error::{invalid, Error, Result};

/// Singular value decomposition `M = U diag(s) V^T`, values sorted descending.
#[derive(Debug, Clone)]
pub struct SingularSystem {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

impl SingularSystem {
    fn of(matrix: &DMatrix<f64>) -> Self {
        let svd = matrix.clone().svd(true, true);
        let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let singular_values = order.iter().map(|&i| svd.singular_values[i].max(0.0)).collect();
        let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
        let v_t = DMatrix::from_fn(order.len(), v_t.ncols(), |r, c| v_t[(order[r], c)]);
        Self { u, singular_values, v_t }
    }
}

/// Quadrature discretization of the first-kind integral operator
/// `(A y)(lambda) = integral K(lambda, lambda') y(lambda') d lambda'`.
///
/// Entry `(i, j)` is `w_j K(lambda_i, lambda'_j)` with trapezoid weights `w_j`
/// on the source grid. Immutable after construction; decompositions are
/// computed once on first use.
#[derive(Debug)]
pub struct DiscreteOperator {
    matrix: DMatrix<f64>,
    target: WavelengthGrid,
    source: WavelengthGrid,
    quad_weights: Vec<f64>,
    target_weights: Vec<f64>,
    model: Option<SpreadFunctionModel>,
    svd: OnceLock<SingularSystem>,
    weighted_sv: OnceLock<Vec<f64>>,
    gram: OnceLock<DMatrix<f64>>,
}

impl Clone for DiscreteOperator {
    fn clone(&self) -> Self {
        Self {
            matrix: self.matrix.clone(),
            target: self.target,
            source: self.source,
            quad_weights: self.quad_weights.clone(),
            target_weights: self.target_weights.clone(),
            model: self.model,
            svd: self.svd.clone(),
            weighted_sv: self.weighted_sv.clone(),
            gram: self.gram.clone(),
        }
    }
}

impl DiscreteOperator {
    /// Wraps an explicit matrix; used for toy problems and tests.
    ///
    /// `quad_weights` are the source-node quadrature weights; `target_weights`
    /// define the norm on the target side.
    pub fn from_parts(
        matrix: DMatrix<f64>,
        target: WavelengthGrid,
        source: WavelengthGrid,
        quad_weights: Vec<f64>,
        target_weights: Vec<f64>,
    ) -> Result<Self> {
        if matrix.nrows() != target.count() || matrix.ncols() != source.count() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but grids have {} target and {} source nodes",
                matrix.nrows(),
                matrix.ncols(),
                target.count(),
                source.count()
            )));
        }
        if quad_weights.len() != source.count() {
            return Err(Error::Dimension(format!(
                "{} quadrature weights for {} source nodes",
                quad_weights.len(),
                source.count()
            )));
        }
        if target_weights.len() != target.count() {
            return Err(Error::Dimension(format!(
                "{} target weights for {} target nodes",
                target_weights.len(),
                target.count()
            )));
        }
        if quad_weights.iter().chain(&target_weights).any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid("quadrature weights must be positive"));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(invalid("operator matrix has non-finite entries"));
        }
        Ok(Self {
            matrix,
            target,
            source,
            quad_weights,
            target_weights,
            model: None,
            svd: OnceLock::new(),
            weighted_sv: OnceLock::new(),
            gram: OnceLock::new(),
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn target_grid(&self) -> &WavelengthGrid {
        &self.target
    }

    pub fn source_grid(&self) -> &WavelengthGrid {
        &self.source
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Weights of the norm on the target grid.
    pub fn target_weights(&self) -> &[f64] {
        &self.target_weights
    }

    /// The spread function that generated the matrix, if any.
    pub fn model(&self) -> Option<&SpreadFunctionModel> {
        self.model.as_ref()
    }

    /// Matrix scaled by a constant, keeping grids and weights.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut op = Self::from_parts(
            &self.matrix * factor,
            self.target,
            self.source,
            self.quad_weights.clone(),
            self.target_weights.clone(),
        )?;
        op.model = self.model;
        Ok(op)
    }

    /// Matrix of the operator between weighted L2 spaces:
    /// `D_t^{1/2} M D_s^{-1/2}`.
    pub fn weighted_matrix(&self) -> DMatrix<f64> {
        let wt = &self.target_weights;
        DMatrix::from_fn(self.matrix.nrows(), self.matrix.ncols(), |i, j| {
            wt[i].sqrt() * self.matrix[(i, j)] / self.quad_weights[j].sqrt()
        })
    }

    /// SVD of the stored matrix, computed at most once.
    pub fn svd(&self) -> &SingularSystem {
        self.svd.get_or_init(|| SingularSystem::of(&self.matrix))
    }

    /// Singular values of the weighted matrix, descending.
    pub fn weighted_singular_values(&self) -> &[f64] {
        self.weighted_sv.get_or_init(|| {
            let mut s: Vec<f64> = self
                .weighted_matrix()
                .singular_values()
                .iter()
                .map(|v| v.max(0.0))
                .collect();
            s.sort_by(|a, b| b.total_cmp(a));
            s
        })
    }

    /// `M^T M`, computed at most once.
    pub fn gram(&self) -> &DMatrix<f64> {
        self.gram.get_or_init(|| self.matrix.tr_mul(&self.matrix))
    }

    pub fn apply(&self, y: &Spectrum) -> Result<Spectrum> {
        forward_apply(self, y)
    }
}

/// Builds the trapezoid-rule matrix of the dispersion kernel between two grids.
pub fn discretize_operator(
    target: &WavelengthGrid,
    source: &WavelengthGrid,
    model: &SpreadFunctionModel,
) -> Result<DiscreteOperator> {
    if target.start() <= 0.0 {
        return Err(invalid(format!("target wavelengths must be positive, grid {target}")));
    }
    let mut op = discretize_kernel(target, source, |l, lp| model.kernel_unchecked(l, lp))?;
    op.model = Some(*model);
    Ok(op)
}

/// Trapezoid-rule discretization of an arbitrary kernel `K(lambda, lambda')`.
pub fn discretize_kernel<K>(target: &WavelengthGrid, source: &WavelengthGrid, kernel: K) -> Result<DiscreteOperator>
where
    K: Fn(f64, f64) -> f64,
{
    let weights = source.trapezoid_weights();
    let matrix = DMatrix::from_fn(target.count(), source.count(), |i, j| {
        weights[j] * kernel(target.node(i), source.node(j))
    });
    DiscreteOperator::from_parts(matrix, *target, *source, weights, target.trapezoid_weights())
}

/// `f = A y` on the operator's target grid.
pub fn forward_apply(op: &DiscreteOperator, y: &Spectrum) -> Result<Spectrum> {
    op.source_grid().ensure_matches(y.grid(), "forward_apply input")?;
    let f = &op.matrix * DVector::from_column_slice(y.values());
    Spectrum::new(*op.target_grid(), f.as_slice().to_vec(), SpectrumKind::Measured)
}
