//! Timestamped scalar samples.

use crate::error::{Error, Result};

/// Relative tolerance used to decide whether spacing is uniform.
pub const UNIFORM_TOLERANCE: f64 = 1e-9;

/// Where a series was cut short by escape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Censoring {
    /// Index of the first sample at or beyond the escape level (kept in the series).
    pub index: usize,
}

/// Strictly increasing timestamps with finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    uniform_dt: Option<f64>,
    censored: Option<Censoring>,
}

impl TimeSeries {
    /// Builds a series, validating ordering and finiteness. Uniform spacing is detected.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "{} timestamps but {} values",
                times.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!("non-finite value at index {i}")));
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidSeries(format!("non-finite time at index {i}")));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSeries(format!(
                "timestamps not strictly increasing at index {}",
                i + 1
            )));
        }
        let uniform_dt = detect_uniform(&times);
        Ok(Self {
            times,
            values,
            uniform_dt,
            censored: None,
        })
    }

    /// Series sampled at `t0 + k*dt`.
    pub fn uniform(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(crate::error::invalid("dt", format!("must be positive, got {dt}")));
        }
        let times = (0..values.len()).map(|k| t0 + k as f64 * dt).collect();
        let mut ts = Self::new(times, values)?;
        ts.uniform_dt = Some(dt);
        Ok(ts)
    }

    pub(crate) fn with_censoring(mut self, censored: Option<Censoring>) -> Self {
        self.censored = censored;
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn uniform_dt(&self) -> Option<f64> {
        self.uniform_dt
    }

    pub fn censored(&self) -> Option<Censoring> {
        self.censored
    }

    /// Uniform spacing or an error naming the caller.
    pub fn require_uniform(&self) -> Result<f64> {
        self.uniform_dt.ok_or_else(|| {
            Error::InvalidSeries("uniform spacing required; resample the series first".into())
        })
    }

    /// Drops the escape sample of a censored series, if any.
    pub fn trim_escape(&self) -> TimeSeries {
        match self.censored {
            Some(c) if c.index + 1 == self.len() && self.len() > 1 => {
                let n = self.len() - 1;
                TimeSeries {
                    times: self.times[..n].to_vec(),
                    values: self.values[..n].to_vec(),
                    uniform_dt: self.uniform_dt,
                    censored: None,
                }
            }
            _ => self.clone(),
        }
    }

    /// Same timestamps, new values.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<TimeSeries> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        let mut ts = TimeSeries::new(self.times.clone(), values)?;
        ts.uniform_dt = self.uniform_dt;
        ts.censored = self.censored;
        Ok(ts)
    }

    /// Smallest spacing between consecutive timestamps.
    pub fn min_spacing(&self) -> Option<f64> {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .min_by(|a, b| a.total_cmp(b))
    }
}

fn detect_uniform(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= UNIFORM_TOLERANCE * dt);
    uniform.then_some(dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_increasing_times() {
        let err = TimeSeries::new(vec![0.0, 1.0, 1.0], vec![1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidSeries(_)));
    }

    #[test]
    fn rejects_non_finite_values() {
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn detects_uniform_spacing() {
        let ts = TimeSeries::new(vec![0.0, 0.1, 0.2, 0.30000000000000004], vec![0.0; 4]).unwrap();
        assert!((ts.uniform_dt().unwrap() - 0.1).abs() < 1e-12);
        let ts = TimeSeries::new(vec![0.0, 0.1, 0.25], vec![0.0; 3]).unwrap();
        assert!(ts.uniform_dt().is_none());
    }

    #[test]
    fn trim_escape_drops_last_sample_only_when_censored() {
        let ts = TimeSeries::uniform(0.0, 1.0, vec![1.0, 0.5, -1.2]).unwrap();
        assert_eq!(ts.trim_escape().len(), 3);
        let ts = ts.with_censoring(Some(Censoring { index: 2 }));
        let trimmed = ts.trim_escape();
        assert_eq!(trimmed.values(), &[1.0, 0.5]);
        assert!(trimmed.censored().is_none());
    }
}
