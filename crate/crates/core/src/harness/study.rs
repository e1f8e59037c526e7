//! Replicated simulation studies.
//!
//! Replica `r` of sample size index `k` always draws from the sub-streams of
//! series `(k << 32) | r`, and per-replica results are reduced in replica
//! order. The reported numbers therefore do not depend on the worker count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use serde::Serialize;

use crate::clock::{simulate, BaseProcess};
use crate::error::{Error, Result};
use crate::estimators::{
    empirical_tdc, estimate_change_probs, estimate_kappa, estimate_run_pattern_prob,
    extremal_index_intervals, extremal_index_runs, Equality,
};
use crate::patterns::{pattern_prob_exact, BinaryPattern};
use crate::processes::{SeedStream, WindowRuleParams};
use crate::theory::{tdc_y_lagm, theta_y_closed_form, theta_y_upcrossing, TheoryInputs};

/// One stopped clock model instance plus the simulation budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub base: BaseProcess,
    pub indicator: WindowRuleParams,
    pub length: usize,
    pub seed: u64,
    pub replicas: usize,
}

impl ModelConfig {
    /// I.i.d. Fréchet base with the default window rule, 1000 replicas.
    pub fn table1(seed: u64) -> Self {
        Self {
            base: BaseProcess::IidFrechet,
            indicator: WindowRuleParams::table1_default(),
            length: 5000,
            seed,
            replicas: 1000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.length == 0 || self.replicas == 0 {
            return Err(Error::InvalidParameter(
                "length and replica count must be positive".into(),
            ));
        }
        Ok(())
    }

    fn theory(&self, max_lag: usize) -> Result<TheoryInputs> {
        TheoryInputs::armax(self.base.phi(), self.indicator, max_lag)
    }
}

/// Fixed-size worker pool.
pub struct Workers {
    pool: ThreadPool,
}

impl Workers {
    /// `threads = None` uses the machine parallelism.
    pub fn new(threads: Option<usize>) -> Result<Self> {
        let mut builder = ThreadPoolBuilder::new();
        if let Some(n) = threads {
            if n == 0 {
                return Err(Error::InvalidParameter(
                    "thread count must be positive".into(),
                ));
            }
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(|e| Error::Pool(e.to_string()))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Evaluates `job` for every index in `0..count`, returning results in
    /// index order.
    pub fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..count).into_par_iter().map(&job).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyCell {
    pub estimator: String,
    pub m: usize,
    /// Mean absolute error across replicas.
    pub abias: f64,
    pub rmse: f64,
    pub truth: f64,
    pub replicas: usize,
    pub mean: f64,
}

impl StudyCell {
    fn from_estimates(estimator: &str, m: usize, truth: f64, estimates: &[f64]) -> Self {
        let n = estimates.len() as f64;
        let (mut abs_sum, mut sq_sum, mut sum) = (0.0, 0.0, 0.0);
        for &e in estimates {
            let err = e - truth;
            abs_sum += err.abs();
            sq_sum += err * err;
            sum += e;
        }
        Self {
            estimator: estimator.to_owned(),
            m,
            abias: abs_sum / n,
            rmse: (sq_sum / n).sqrt(),
            truth,
            replicas: estimates.len(),
            mean: sum / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub cells: Vec<StudyCell>,
    /// Fraction of replicas with `kappa_hat == kappa`, by sample size.
    pub kappa_success: BTreeMap<usize, f64>,
}

impl StudyReport {
    pub fn cell(&self, estimator: &str, m: usize) -> Option<&StudyCell> {
        self.cells
            .iter()
            .find(|c| c.estimator == estimator && c.m == m)
    }
}

/// Estimator names in the order the study reports them.
pub const TABLE1_ESTIMATORS: [&str; 4] = ["p0", "p10", "p100", "kappa"];

struct ReplicaEstimates {
    p0: f64,
    p10: f64,
    p100: f64,
    kappa: usize,
}

/// Replicated estimation of `p(0)`, `p(1,0)`, `p(1,0,0)` and `kappa` for
/// each sample size in `sizes`.
pub fn run_table1_study(
    config: &ModelConfig,
    sizes: &[usize],
    workers: &Workers,
) -> Result<StudyReport> {
    config.validate()?;
    if sizes.is_empty() || sizes.iter().any(|&m| m < 4) {
        return Err(Error::InvalidParameter(
            "sample sizes must be at least 4".into(),
        ));
    }
    let rule = config.indicator;
    let truth = |bits: &[u8]| -> Result<f64> {
        Ok(pattern_prob_exact(&BinaryPattern::new(bits.to_vec())?, rule)?.probability)
    };
    let (t0, t10, t100) = (truth(&[0])?, truth(&[1, 0])?, truth(&[1, 0, 0])?);
    let stream = SeedStream::new(config.seed);

    let mut report = StudyReport {
        cells: Vec::new(),
        kappa_success: BTreeMap::new(),
    };
    for (k, &m) in sizes.iter().enumerate() {
        let results = workers.map(config.replicas, |r| -> Result<ReplicaEstimates> {
            let series = ((k as u64) << 32) | r as u64;
            let path = simulate(config.base, rule, m, &stream, series)?;
            let y = path.y();
            Ok(ReplicaEstimates {
                p0: estimate_change_probs(y, Equality::Exact)?.p0,
                p10: estimate_run_pattern_prob(y, 1, Equality::Exact)?,
                p100: estimate_run_pattern_prob(y, 2, Equality::Exact)?,
                kappa: estimate_kappa(y, Equality::Exact)?,
            })
        });
        let results: Vec<ReplicaEstimates> = results.into_iter().collect::<Result<_>>()?;
        let column = |f: fn(&ReplicaEstimates) -> f64| results.iter().map(f).collect::<Vec<_>>();
        report
            .cells
            .push(StudyCell::from_estimates("p0", m, t0, &column(|e| e.p0)));
        report
            .cells
            .push(StudyCell::from_estimates("p10", m, t10, &column(|e| e.p10)));
        report.cells.push(StudyCell::from_estimates(
            "p100",
            m,
            t100,
            &column(|e| e.p100),
        ));
        report.cells.push(StudyCell::from_estimates(
            "kappa",
            m,
            rule.kappa() as f64,
            &column(|e| e.kappa as f64),
        ));
        let hits = results.iter().filter(|e| e.kappa == rule.kappa()).count();
        report
            .kappa_success
            .insert(m, hits as f64 / results.len() as f64);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaRow {
    pub phi: f64,
    pub kappa: usize,
    pub p: f64,
    pub q: f64,
    pub theta_x: f64,
    /// Closed form weighted by the `beta_j` coefficients.
    pub target: f64,
    /// Upcrossing-rate closed form.
    pub target_upcrossing: f64,
    pub intervals: f64,
    pub runs: f64,
    pub run_length: usize,
    /// Intervals estimate on the latent base path.
    pub base_intervals: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaValidationReport {
    pub m: usize,
    pub seed: u64,
    pub rows: Vec<ThetaRow>,
}

/// Extremal index estimates of one long ARMAX-based path against the
/// closed forms, at each quantile level of `q_grid`.
pub fn run_theta_validation(config: &ModelConfig, q_grid: &[f64]) -> Result<ThetaValidationReport> {
    config.validate()?;
    let phi = match config.base {
        BaseProcess::Armax(params) => params.phi(),
        BaseProcess::IidFrechet => {
            return Err(Error::InvalidParameter(
                "theta validation needs an ARMAX base".into(),
            ))
        }
    };
    let inputs = config.theory(1)?;
    let target = theta_y_closed_form(&inputs)?.theta_y;
    let target_upcrossing = theta_y_upcrossing(&inputs)?;
    let path = simulate(
        config.base,
        config.indicator,
        config.length,
        &SeedStream::new(config.seed),
        0,
    )?;
    let base_path = path
        .x()
        .ok_or_else(|| Error::Format("simulation lost its base path".into()))?;
    let run_length = config.indicator.kappa();
    let rows = q_grid
        .iter()
        .map(|&q| {
            Ok(ThetaRow {
                phi,
                kappa: config.indicator.kappa(),
                p: config.indicator.p(),
                q,
                theta_x: inputs.theta_x,
                target,
                target_upcrossing,
                intervals: extremal_index_intervals(path.y(), q)?.value,
                runs: extremal_index_runs(path.y(), q, run_length)?.value,
                run_length,
                base_intervals: extremal_index_intervals(base_path, q)?.value,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ThetaValidationReport {
        m: config.length,
        seed: config.seed,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TdcRow {
    pub lag: usize,
    pub estimate: f64,
    pub target: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TdcValidationReport {
    pub phi: f64,
    pub kappa: usize,
    pub p: f64,
    pub q: f64,
    pub m: usize,
    pub seed: u64,
    pub rows: Vec<TdcRow>,
}

/// Empirical lag-`m` tail dependence of one long path against the closed
/// form, for each lag in `lags`.
pub fn run_tdc_validation(
    config: &ModelConfig,
    lags: &[usize],
    q: f64,
) -> Result<TdcValidationReport> {
    config.validate()?;
    let max_lag = lags.iter().copied().max().unwrap_or(1);
    let inputs = config.theory(max_lag)?;
    let path = simulate(
        config.base,
        config.indicator,
        config.length,
        &SeedStream::new(config.seed),
        0,
    )?;
    let rows = lags
        .iter()
        .map(|&lag| {
            let estimate = empirical_tdc(path.y(), lag, q)?.value;
            let target = tdc_y_lagm(&inputs, lag)?;
            Ok(TdcRow {
                lag,
                estimate,
                target,
                delta: estimate - target,
            })
        })
        .collect::<Result<_>>()?;
    Ok(TdcValidationReport {
        phi: config.base.phi(),
        kappa: config.indicator.kappa(),
        p: config.indicator.p(),
        q,
        m: config.length,
        seed: config.seed,
        rows,
    })
}
