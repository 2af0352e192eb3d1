//! Mismatch detection by per-point code length.

use serde::{Deserialize, Serialize};

use crate::mdl::{point_codelength, Dataset, FitReport, PointHypothesis};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Classification {
    /// The batch lies outside the training range: the rule never applied there.
    Inherent,
    /// The batch lies inside the training range: the rule itself changed.
    Contextual,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchReport {
    pub baseline_bits_per_point: f64,
    pub batch_bits_per_point: f64,
    pub flagged: bool,
    pub classification: Classification,
}

pub const DEFAULT_TAU: f64 = 3.0;
pub const DEFAULT_MARGIN: f64 = 0.1;

/// Mean of `L(y | x, H)` over the points of `d`, in bits.
pub fn mean_bits_per_point(h: &PointHypothesis, d: &Dataset) -> Result<f64, HarnessError> {
    if d.is_empty() {
        return Err(HarnessError::Config("empty batch".into()));
    }
    let total: f64 = d
        .points()
        .iter()
        .map(|&(x, y)| point_codelength(h, x, y, d.epsilon()))
        .sum();
    Ok(total / d.len() as f64)
}

/// Flags `batch` when its mean code length under `h` exceeds `baseline` by
/// more than `tau` bits per point.
pub fn detect(
    h: &PointHypothesis,
    baseline: f64,
    batch: &Dataset,
    tau: f64,
    train_x_range: (f64, f64),
    margin: f64,
) -> Result<MismatchReport, HarnessError> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(HarnessError::Config(format!(
            "tau must be positive, got {tau}"
        )));
    }
    if !(margin.is_finite() && margin >= 0.0) {
        return Err(HarnessError::Config(format!(
            "margin must be non-negative, got {margin}"
        )));
    }
    if !baseline.is_finite() {
        return Err(HarnessError::Config(format!(
            "baseline must be finite, got {baseline}"
        )));
    }
    let batch_bits = mean_bits_per_point(h, batch)?;
    let flagged = batch_bits - baseline > tau;
    let (lo, hi) = train_x_range;
    let classification = if !flagged {
        Classification::None
    } else if batch
        .points()
        .iter()
        .all(|&(x, _)| x >= lo - margin && x <= hi + margin)
    {
        Classification::Contextual
    } else {
        Classification::Inherent
    };
    Ok(MismatchReport {
        baseline_bits_per_point: baseline,
        batch_bits_per_point: batch_bits,
        flagged,
        classification,
    })
}

/// A fitted model with what detection needs: the training range and the
/// training data's mean code length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    #[serde(flatten)]
    pub fit: FitReport,
    pub epsilon: f64,
    pub n_points: usize,
    pub x_range: (f64, f64),
    pub baseline_bits_per_point: f64,
}

impl FittedModel {
    pub fn new(train: &Dataset, fit: FitReport) -> Result<Self, HarnessError> {
        let x_range = train
            .x_range()
            .ok_or_else(|| HarnessError::Config("empty training data".into()))?;
        Ok(Self {
            baseline_bits_per_point: mean_bits_per_point(&fit.hypothesis, train)?,
            epsilon: train.epsilon(),
            n_points: train.len(),
            x_range,
            fit,
        })
    }

    pub fn detect(
        &self,
        batch: &Dataset,
        tau: f64,
        margin: f64,
    ) -> Result<MismatchReport, HarnessError> {
        detect(
            &self.fit.hypothesis,
            self.baseline_bits_per_point,
            batch,
            tau,
            self.x_range,
            margin,
        )
    }
}
