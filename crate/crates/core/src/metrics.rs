//! Size and quality metrics for approximate models, and the search for
//! the most efficient model of a given (k, n).
//!
//! The *literal rate* of a model is its literal count divided by the
//! literal count of the exact sequential-counter encoding of the same
//! at-most-k-of-n constraint. *Efficiency* is overall coverage divided
//! by literal rate: coverage bought per unit of formula size.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use thiserror::Error;

use crate::approx::{
    approx_literal_count, enumerate_shapes, ModelShape, ShapeBounds, ShapeError,
};
use crate::encoders::{counter_literal_count, EncodeError};
use crate::oracle::{coverage, CoverageReport, OracleError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("literal rate needs 1 <= k < n, got k={k}, n={n}")]
    DegenerateBound { k: u64, n: u64 },
    #[error("model encodes to an empty formula; its literal rate is undefined")]
    EmptyEncoding,
}

/// Everything the search reports about one evaluated model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EfficiencyReport {
    pub shape: ModelShape,
    pub derived_k: u64,
    pub derived_n: u64,
    pub approx_literals: u64,
    pub counter_literals: u64,
    pub literal_rate: Ratio<BigUint>,
    pub coverage: CoverageReport,
    /// Overall coverage divided by literal rate.
    pub efficiency: Ratio<BigUint>,
}

/// Approximate literal count over the exact counter encoding's literal
/// count for the same (k, n). Defined for 1 <= k < n.
pub fn literal_rate(approx_literals: u64, k: u64, n: u64) -> Result<Ratio<BigUint>, MetricsError> {
    if k == 0 || k >= n {
        return Err(MetricsError::DegenerateBound { k, n });
    }
    let counter = counter_literal_count(n as usize, k as usize)? as u64;
    Ok(Ratio::new(BigUint::from(approx_literals), BigUint::from(counter)))
}

/// Literal rate of a shape's encoding against the counter baseline for
/// its derived (k, n). Both sides use closed-form counts, which match
/// the built formulas exactly.
pub fn shape_literal_rate(shape: &ModelShape) -> Result<Ratio<BigUint>, MetricsError> {
    let (k, n) = shape.derived_params()?;
    literal_rate(approx_literal_count(shape)?, k, n)
}

/// Builds the model, measures it and computes its exact coverage and
/// efficiency.
pub fn efficiency(shape: &ModelShape) -> Result<EfficiencyReport, MetricsError> {
    let (k, n) = shape.derived_params()?;
    let approx_literals = approx_literal_count(shape)?;
    if approx_literals == 0 {
        return Err(MetricsError::EmptyEncoding);
    }
    let rate = literal_rate(approx_literals, k, n)?;
    let counter_literals = counter_literal_count(n as usize, k as usize)? as u64;
    let report = coverage(shape)?;
    let eff = report.overall_coverage.clone() / rate.clone();
    Ok(EfficiencyReport {
        shape: shape.clone(),
        derived_k: k,
        derived_n: n,
        approx_literals,
        counter_literals,
        literal_rate: rate,
        coverage: report,
        efficiency: eff,
    })
}

/// Evaluates every enumerable shape for (k, n) and returns the reports
/// sorted best-first: higher efficiency, then fewer literals, then
/// enumeration order. `Ok(empty)` when no shape exists within bounds.
pub fn rank_models(
    k: u64,
    n: u64,
    bounds: &ShapeBounds,
) -> Result<Vec<EfficiencyReport>, MetricsError> {
    if k == 0 || k >= n {
        return Err(MetricsError::DegenerateBound { k, n });
    }
    let shapes = enumerate_shapes(k, n, bounds);
    let mut evaluated: Vec<(usize, EfficiencyReport)> = shapes
        .par_iter()
        .enumerate()
        .filter_map(|(i, shape)| match efficiency(shape) {
            Ok(report) => Some(Ok((i, report))),
            Err(MetricsError::EmptyEncoding) => None,
            Err(e) => Some(Err(e)),
        })
        .collect::<Result<_, _>>()?;
    evaluated.sort_by(|(ia, a), (ib, b)| {
        b.efficiency
            .cmp(&a.efficiency)
            .then(a.approx_literals.cmp(&b.approx_literals))
            .then(ia.cmp(ib))
    });
    Ok(evaluated.into_iter().map(|(_, r)| r).collect())
}

/// The single most efficient model for (k, n) within bounds, or
/// `Ok(None)` when the search space is empty.
pub fn best_model(
    k: u64,
    n: u64,
    bounds: &ShapeBounds,
) -> Result<Option<EfficiencyReport>, MetricsError> {
    Ok(rank_models(k, n, bounds)?.into_iter().next())
}

/// Probability that at least one of `samples` independent uniformly
/// drawn assignments (each accepted with probability `coverage`) is
/// accepted: 1 - (1 - c)^samples.
pub fn find_probability(coverage: &Ratio<BigUint>, samples: u32) -> f64 {
    let c = coverage.to_f64().unwrap_or(0.0).clamp(0.0, 1.0);
    1.0 - (1.0 - c).powi(samples as i32)
}
