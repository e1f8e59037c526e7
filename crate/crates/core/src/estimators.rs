//! Empirical inference from an observed `Y` path.
//!
//! The change-point estimators rely on exact equality between consecutive
//! values: a repeated value is a copied record. Simulated paths copy by
//! value, so bitwise comparison is correct for them. Data read back from a
//! lossy text format can use [`Equality::Tolerance`].
//!
//! Thresholds are sample order statistics: for quantile level `q` the
//! threshold is the value of rank `ceil(q m)`, and exceedances are values
//! strictly above it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::processes::SeriesPath;

/// Smallest number of exceedances (or conditioning events) an estimate is
/// computed from.
pub const MIN_EVENTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Equality {
    #[default]
    Exact,
    /// Values within this absolute distance count as a repeat.
    Tolerance(f64),
}

impl Equality {
    #[inline]
    pub fn same(self, a: f64, b: f64) -> bool {
        match self {
            Equality::Exact => a.to_bits() == b.to_bits(),
            Equality::Tolerance(tol) => (a - b).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateSummary {
    pub estimator: String,
    pub value: f64,
    pub m: usize,
    pub q: Option<f64>,
    pub auxiliary: BTreeMap<String, f64>,
}

impl EstimateSummary {
    fn new(estimator: &str, value: f64, m: usize, q: Option<f64>) -> Self {
        Self {
            estimator: estimator.to_owned(),
            value,
            m,
            q,
            auxiliary: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.auxiliary.insert(key.to_owned(), value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeProbs {
    /// Estimate of `P(U = 1)`.
    pub p1: f64,
    /// Estimate of `P(U = 0)`.
    pub p0: f64,
}

/// Frequencies of changes and repeats between consecutive values, both
/// divided by the sample size `m` (so `p1 + p0 = (m - 1) / m`).
pub fn estimate_change_probs(y: &SeriesPath, eq: Equality) -> Result<ChangeProbs> {
    let v = y.values();
    let m = v.len();
    if m < 2 {
        return Err(Error::SampleTooShort { needed: 2, got: m });
    }
    let repeats = v.windows(2).filter(|w| eq.same(w[0], w[1])).count();
    let changes = (m - 1) - repeats;
    Ok(ChangeProbs {
        p1: changes as f64 / m as f64,
        p0: repeats as f64 / m as f64,
    })
}

/// Lengths of the maximal runs of repeated values, excluding the run that
/// starts the sample (it has no preceding change).
fn repeat_runs(v: &[f64], eq: Equality) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut current: Option<usize> = None;
    for w in v.windows(2) {
        if eq.same(w[0], w[1]) {
            if let Some(c) = current.as_mut() {
                *c += 1;
            }
        } else {
            if let Some(c) = current.take() {
                runs.push(c);
            }
            current = Some(0);
        }
    }
    if let Some(c) = current {
        runs.push(c);
    }
    runs
}

/// Number of `i` in `s+2..=m` with `Y_{i-s-1} != Y_{i-s} = ... = Y_i`.
fn run_pattern_count(v: &[f64], s: usize, eq: Equality) -> usize {
    // `Y_{i-s}` must sit right after a change, so each repeat run of
    // length at least `s` matches exactly once.
    repeat_runs(v, eq)
        .into_iter()
        .filter(|&len| len >= s)
        .count()
}

/// Estimate of `p(1, 0^s)`, the count of change-then-`s`-repeats patterns
/// divided by `m`.
pub fn estimate_run_pattern_prob(y: &SeriesPath, s: usize, eq: Equality) -> Result<f64> {
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1".into()));
    }
    let v = y.values();
    let m = v.len();
    if m < s + 2 {
        return Err(Error::SampleTooShort {
            needed: s + 2,
            got: m,
        });
    }
    Ok(run_pattern_count(v, s, eq) as f64 / m as f64)
}

/// One plus the longest run of repeats that follows a change; 1 when no
/// value is ever repeated after a change.
pub fn estimate_kappa(y: &SeriesPath, eq: Equality) -> Result<usize> {
    let v = y.values();
    if v.len() < 2 {
        return Err(Error::SampleTooShort {
            needed: 2,
            got: v.len(),
        });
    }
    Ok(1 + repeat_runs(v, eq).into_iter().max().unwrap_or(0))
}

/// Order statistic of rank `ceil(q m)`.
pub fn empirical_quantile(values: &[f64], q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level must lie in (0, 1), got {q}"
        )));
    }
    if values.is_empty() {
        return Err(Error::EmptyPath);
    }
    let m = values.len();
    let rank = ((q * m as f64).ceil() as usize).clamp(1, m);
    let mut sorted = values.to_vec();
    let (_, nth, _) = sorted.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(*nth)
}

struct Exceedances {
    threshold: f64,
    times: Vec<usize>,
}

fn exceedances(v: &[f64], q: f64) -> Result<Exceedances> {
    let threshold = empirical_quantile(v, q)?;
    let times: Vec<usize> = v
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > threshold)
        .map(|(i, _)| i)
        .collect();
    if times.len() < MIN_EVENTS {
        return Err(Error::TooFewExceedances {
            got: times.len(),
            needed: MIN_EVENTS,
        });
    }
    Ok(Exceedances { threshold, times })
}

/// Runs declustering: exceedances separated by at least `r` consecutive
/// non-exceedances start a new cluster. Returns clusters / exceedances.
pub fn extremal_index_runs(y: &SeriesPath, q: f64, r: usize) -> Result<EstimateSummary> {
    if r == 0 {
        return Err(Error::InvalidParameter(
            "run length must be at least 1".into(),
        ));
    }
    let exc = exceedances(y.values(), q)?;
    let n_exc = exc.times.len();
    let clusters = 1 + exc.times.windows(2).filter(|w| w[1] - w[0] > r).count();
    let theta = clusters as f64 / n_exc as f64;
    Ok(EstimateSummary::new("runs", theta, y.len(), Some(q))
        .with("threshold", exc.threshold)
        .with("exceedances", n_exc as f64)
        .with("clusters", clusters as f64)
        .with("run_length", r as f64))
}

/// Intervals estimator from interexceedance times, clipped to at most 1.
pub fn extremal_index_intervals(y: &SeriesPath, q: f64) -> Result<EstimateSummary> {
    let exc = exceedances(y.values(), q)?;
    let n_exc = exc.times.len();
    let gaps: Vec<f64> = exc.times.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let n_gaps = gaps.len() as f64;
    let raw = if max_gap <= 2.0 {
        let s1: f64 = gaps.iter().sum();
        let s2: f64 = gaps.iter().map(|t| t * t).sum();
        2.0 * s1 * s1 / (n_gaps * s2)
    } else {
        let s1: f64 = gaps.iter().map(|t| t - 1.0).sum();
        let s2: f64 = gaps.iter().map(|t| (t - 1.0) * (t - 2.0)).sum();
        2.0 * s1 * s1 / (n_gaps * s2)
    };
    Ok(
        EstimateSummary::new("intervals", raw.min(1.0), y.len(), Some(q))
            .with("threshold", exc.threshold)
            .with("exceedances", n_exc as f64)
            .with("unclipped", raw),
    )
}

/// `#{y_i > u, y_{i+lag} > u} / #{y_i > u}` over `i = 1..m-lag`.
pub fn empirical_tdc(y: &SeriesPath, lag: usize, q: f64) -> Result<EstimateSummary> {
    let v = y.values();
    let m = v.len();
    if lag == 0 || lag >= m {
        return Err(Error::InvalidParameter(format!(
            "lag must lie in 1..{m}, got {lag}"
        )));
    }
    let threshold = empirical_quantile(v, q)?;
    let (mut base, mut joint) = (0usize, 0usize);
    for i in 0..m - lag {
        if v[i] > threshold {
            base += 1;
            if v[i + lag] > threshold {
                joint += 1;
            }
        }
    }
    if base < MIN_EVENTS {
        return Err(Error::TooFewExceedances {
            got: base,
            needed: MIN_EVENTS,
        });
    }
    Ok(
        EstimateSummary::new("tdc", joint as f64 / base as f64, m, Some(q))
            .with("threshold", threshold)
            .with("lag", lag as f64)
            .with("exceedances", base as f64)
            .with("joint_exceedances", joint as f64),
    )
}

/// Extremal index of the base sequence recovered from `Y`.
///
/// Among windows `Y_0, ..., Y_s` whose adjacent values all differ (so every
/// value in the window is a fresh record), the frequency of
/// `Y_1 <= u, ..., Y_{s-1} <= u < Y_s` is divided by the exceedance rate
/// of `Y`.
pub fn estimate_theta_x_from_y(
    y: &SeriesPath,
    s: usize,
    q: f64,
    eq: Equality,
) -> Result<EstimateSummary> {
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1".into()));
    }
    let v = y.values();
    let m = v.len();
    if m < s + 1 {
        return Err(Error::SampleTooShort {
            needed: s + 1,
            got: m,
        });
    }
    let threshold = empirical_quantile(v, q)?;
    let n_exc = v.iter().filter(|&&x| x > threshold).count();
    if n_exc < MIN_EVENTS {
        return Err(Error::TooFewExceedances {
            got: n_exc,
            needed: MIN_EVENTS,
        });
    }
    let changed: Vec<bool> = v.windows(2).map(|w| !eq.same(w[0], w[1])).collect();
    let (mut conditioning, mut hits) = (0usize, 0usize);
    let mut distinct_run = 0usize;
    // `distinct_run` counts consecutive changes ending at position i + s.
    for end in 1..m {
        distinct_run = if changed[end - 1] {
            distinct_run + 1
        } else {
            0
        };
        if end < s || distinct_run < s {
            continue;
        }
        conditioning += 1;
        let start = end - s;
        let below = v[start + 1..end].iter().all(|&x| x <= threshold);
        if below && v[end] > threshold {
            hits += 1;
        }
    }
    if conditioning < MIN_EVENTS {
        return Err(Error::ConditioningTooRare {
            got: conditioning,
            needed: MIN_EVENTS,
        });
    }
    if hits == 0 {
        return Err(Error::TooFewExceedances { got: 0, needed: 1 });
    }
    let exceed_rate = n_exc as f64 / m as f64;
    let raw = (hits as f64 / conditioning as f64) / exceed_rate;
    Ok(
        EstimateSummary::new("theta_x_from_y", raw.min(1.0), m, Some(q))
            .with("threshold", threshold)
            .with("s", s as f64)
            .with("exceedances", n_exc as f64)
            .with("conditioning_events", conditioning as f64)
            .with("hits", hits as f64)
            .with("unclipped", raw),
    )
}
