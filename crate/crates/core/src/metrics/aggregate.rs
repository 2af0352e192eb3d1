use serde::{Deserialize, Serialize};

use crate::compressor::ByteSequence;

use super::MetricError;

/// Tolerance on the total probability of a task's curricula.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// A task with its skill threshold `θ ∈ (0, 1]` and value `ω ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub theta: f64,
    pub omega: f64,
}

impl TaskSpec {
    pub fn new(id: impl Into<String>, theta: f64, omega: f64) -> Result<Self, MetricError> {
        let t = Self {
            id: id.into(),
            theta,
            omega,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(MetricError::Validation(format!(
                "task {}: theta {} outside (0, 1]",
                self.id, self.theta
            )));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(MetricError::Validation(format!(
                "task {}: omega {} must be finite and >= 0",
                self.id, self.omega
            )));
        }
        Ok(())
    }
}

/// Ordered training data with the probability `Pb ∈ (0, 1]` of this
/// curriculum being the one experienced.
#[derive(Debug, Clone, PartialEq)]
pub struct Curriculum {
    pub steps: Vec<ByteSequence>,
    pub probability: f64,
}

impl Curriculum {
    pub fn new(steps: Vec<ByteSequence>, probability: f64) -> Result<Self, MetricError> {
        let c = Self { steps, probability };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        if !(self.probability > 0.0 && self.probability <= 1.0) {
            return Err(MetricError::Validation(format!(
                "curriculum probability {} outside (0, 1]",
                self.probability
            )));
        }
        Ok(())
    }
}

/// Mean over tasks of `ω · Σ Pb · aeff`.
///
/// A task with `ω = 0` contributes exactly 0, even if one of its curricula
/// has an infinite `aeff`.
pub fn aggregate(results: &[(TaskSpec, Vec<(Curriculum, f64)>)]) -> Result<f64, MetricError> {
    if results.is_empty() {
        return Err(MetricError::Validation("no tasks to aggregate".into()));
    }
    let mut sum = 0.0;
    for (task, curricula) in results {
        task.validate()?;
        if curricula.is_empty() {
            return Err(MetricError::Validation(format!(
                "task {} has no curricula",
                task.id
            )));
        }
        let mut total_pb = 0.0;
        let mut weighted = 0.0;
        for (cur, aeff) in curricula {
            cur.validate()?;
            if aeff.is_nan() || *aeff < 0.0 {
                return Err(MetricError::Validation(format!(
                    "task {}: invalid aeff {aeff}",
                    task.id
                )));
            }
            total_pb += cur.probability;
            weighted += cur.probability * aeff;
        }
        if total_pb > 1.0 + PROBABILITY_SLACK {
            return Err(MetricError::Validation(format!(
                "task {}: curriculum probabilities sum to {total_pb}",
                task.id
            )));
        }
        if task.omega > 0.0 {
            sum += task.omega * weighted;
        }
    }
    Ok(sum / results.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cur(p: f64) -> Curriculum {
        Curriculum::new(vec![ByteSequence::new(b"x".to_vec())], p).unwrap()
    }

    fn task(id: &str, omega: f64) -> TaskSpec {
        TaskSpec::new(id, 0.9, omega).unwrap()
    }

    #[test]
    fn single_task_single_curriculum() {
        assert_eq!(
            aggregate(&[(task("t", 1.0), vec![(cur(1.0), 0.37)])]).unwrap(),
            0.37
        );
    }

    #[test]
    fn nuisance_task_contributes_zero() {
        let r = aggregate(&[
            (task("a", 0.0), vec![(cur(1.0), f64::INFINITY)]),
            (task("b", 1.0), vec![(cur(1.0), 0.4)]),
        ]);
        assert_eq!(r.unwrap(), 0.2);
        assert_eq!(
            aggregate(&[(task("a", 0.0), vec![(cur(1.0), 0.9)])]).unwrap(),
            0.0
        );
    }

    #[test]
    fn two_tasks_average() {
        let r = aggregate(&[
            (task("a", 1.0), vec![(cur(1.0), 0.2)]),
            (task("b", 1.0), vec![(cur(1.0), 0.6)]),
        ])
        .unwrap();
        assert!((r - 0.4).abs() < 1e-15);
    }

    #[test]
    fn probability_overflow_rejected() {
        let r = aggregate(&[(task("a", 1.0), vec![(cur(0.6), 0.2), (cur(0.5), 0.3)])]);
        assert!(matches!(r, Err(MetricError::Validation(_))));
        assert!(aggregate(&[(task("a", 1.0), vec![])]).is_err());
        assert!(Curriculum::new(vec![], 0.0).is_err());
        assert!(TaskSpec::new("t", 0.0, 1.0).is_err());
        assert!(TaskSpec::new("t", 0.5, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn linear_in_omega_and_pb(
            omega in 0.0f64..10.0,
            scale in 0.0f64..4.0,
            pb in 0.01f64..0.5,
            a in 0.0f64..3.0,
            b in 0.0f64..3.0,
        ) {
            let base = aggregate(&[(task("t", omega), vec![(cur(pb), a), (cur(pb), b)])]).unwrap();
            let scaled = aggregate(&[(task("t", omega * scale), vec![(cur(pb), a), (cur(pb), b)])]).unwrap();
            prop_assert!((scaled - scale * base).abs() <= 1e-12 * (1.0 + scaled.abs()));
            let half = aggregate(&[(task("t", omega), vec![(cur(pb / 2.0), a), (cur(pb / 2.0), b)])]).unwrap();
            prop_assert!((2.0 * half - base).abs() <= 1e-12 * (1.0 + base.abs()));
        }
    }
}
