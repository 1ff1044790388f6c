//! Uniform result record for every numeric check.

use crate::error::Result;
use serde::Serialize;
use std::time::{Duration, Instant};

/// Outcome of one residual check over a set of samples.
///
/// `pass` is defined as `max_residual <= tolerance`; a check that could not
/// produce a residual (domain violation, failed precondition) reports
/// `max_residual: None`, carries the error text, and fails.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Measured by the constructors; never serialized, so report bytes stay
    /// identical across runs.
    #[serde(skip)]
    pub wall_time: Option<Duration>,
}

impl CheckReport {
    /// Evaluate `residual_at` over the samples, tracking the worst one. An
    /// evaluation error becomes a failed report naming the sample rather
    /// than a crash.
    pub fn over_samples(
        name: &str,
        tolerance: f64,
        samples: &[Vec<f64>],
        mut residual_at: impl FnMut(&[f64]) -> Result<f64>,
    ) -> CheckReport {
        let started = Instant::now();
        let mut max_residual = 0.0f64;
        let mut worst: Option<Vec<f64>> = None;
        for point in samples {
            match residual_at(point) {
                Ok(r) if r.is_finite() => {
                    if worst.is_none() || r > max_residual {
                        max_residual = r;
                        worst = Some(point.clone());
                    }
                }
                Ok(r) => {
                    return CheckReport::failed_at(
                        name,
                        tolerance,
                        samples.len(),
                        Some(point.clone()),
                        format!("non-finite residual {r}"),
                        started,
                    );
                }
                Err(e) => {
                    let located = e.at_point(point);
                    return CheckReport::failed_at(
                        name,
                        tolerance,
                        samples.len(),
                        Some(point.clone()),
                        located.to_string(),
                        started,
                    );
                }
            }
        }
        CheckReport {
            name: name.to_string(),
            samples: samples.len(),
            max_residual: Some(max_residual),
            tolerance,
            pass: max_residual <= tolerance,
            worst_point: worst,
            error: None,
            wall_time: Some(started.elapsed()),
        }
    }

    /// Summarize residuals already paired with their sample points.
    pub fn from_residuals(
        name: &str,
        tolerance: f64,
        residuals: impl IntoIterator<Item = (f64, Vec<f64>)>,
    ) -> CheckReport {
        let started = Instant::now();
        let mut n = 0usize;
        let mut max_residual = 0.0f64;
        let mut worst = None;
        for (r, point) in residuals {
            n += 1;
            if r > max_residual || worst.is_none() {
                max_residual = r.max(max_residual);
                worst = Some(point);
            }
        }
        CheckReport {
            name: name.to_string(),
            samples: n,
            max_residual: Some(max_residual),
            tolerance,
            pass: max_residual.is_finite() && max_residual <= tolerance,
            worst_point: worst,
            error: None,
            wall_time: Some(started.elapsed()),
        }
    }

    /// A check that failed before producing residuals.
    pub fn failure(name: &str, tolerance: f64, samples: usize, error: impl ToString) -> Self {
        CheckReport::failed_at(name, tolerance, samples, None, error.to_string(), Instant::now())
    }

    fn failed_at(
        name: &str,
        tolerance: f64,
        samples: usize,
        worst_point: Option<Vec<f64>>,
        error: String,
        started: Instant,
    ) -> CheckReport {
        CheckReport {
            name: name.to_string(),
            samples,
            max_residual: None,
            tolerance,
            pass: false,
            worst_point,
            error: Some(error),
            wall_time: Some(started.elapsed()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn pass_is_exactly_max_residual_within_tolerance() {
        let samples = vec![vec![0.0], vec![1.0], vec![2.0]];
        let ok = CheckReport::over_samples("probe", 2.5, &samples, |x| Ok(x[0]));
        assert!(ok.pass);
        assert_eq!(ok.max_residual, Some(2.0));
        assert_eq!(ok.worst_point, Some(vec![2.0]));

        let fail = CheckReport::over_samples("probe", 1.5, &samples, |x| Ok(x[0]));
        assert!(!fail.pass);
        assert_eq!(fail.max_residual, Some(2.0));
    }

    #[test]
    fn evaluation_errors_become_failed_reports() {
        let samples = vec![vec![1.0], vec![-1.0]];
        let rep = CheckReport::over_samples("probe", 1.0, &samples, |x| {
            if x[0] < 0.0 {
                Err(Error::Precondition("negative".into()))
            } else {
                Ok(0.0)
            }
        });
        assert!(!rep.pass);
        assert!(rep.max_residual.is_none());
        assert_eq!(rep.worst_point, Some(vec![-1.0]));
        assert!(rep.error.as_deref().unwrap().contains("negative"));
    }

    #[test]
    fn wall_time_never_reaches_the_serialized_form() {
        let rep = CheckReport::over_samples("probe", 1.0, &[vec![0.0]], |_| Ok(0.0));
        let json = serde_json::to_string(&rep).unwrap();
        assert!(!json.contains("wall_time"));
        assert!(json.contains("\"max_residual\":0.0"));
    }
}
