//! Closed-form extremal index and tail dependence coefficients of `Y`.
//!
//! All indicator probabilities come from the exact enumeration in
//! [`crate::patterns`]; the base sequence enters only through its extremal
//! index `theta_x`, the cluster coefficients `beta_j` and its lag-`j` tail
//! dependence coefficients `lambda_x[j]`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::patterns::{
    fresh_gap_probs, pattern_prob_exact, pattern_prob_masked, prob_failure, BinaryPattern,
};
use crate::processes::WindowRuleParams;

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryInputs {
    pub theta_x: f64,
    /// `beta_j` for `j = 0..kappa`; `beta_0 = 1`.
    pub betas: Vec<f64>,
    pub window: WindowRuleParams,
    /// Lag-`j` tail dependence coefficient of `X`, keyed by `j >= 1`.
    pub lambda_x: BTreeMap<usize, f64>,
}

impl TheoryInputs {
    /// ARMAX base: `theta_x = 1 - phi`, `beta_j = phi^j` and
    /// `lambda_x[j] = phi^j` for every lag needed up to `max_lag`.
    pub fn armax(phi: f64, window: WindowRuleParams, max_lag: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&phi) {
            return Err(Error::InvalidParameter(format!(
                "phi must lie in [0, 1), got {phi}"
            )));
        }
        let kappa = window.kappa();
        let betas = (0..kappa).map(|j| beta_armax(phi, j)).collect();
        let lambda_x = armax_lambda_x(phi, max_lag.max(1) + kappa - 1);
        Ok(Self {
            theta_x: 1.0 - phi,
            betas,
            window,
            lambda_x,
        })
    }

    /// Independent base sequence: `theta_x = 1`, no recurrence and no tail
    /// dependence at any lag.
    pub fn iid(window: WindowRuleParams, max_lag: usize) -> Result<Self> {
        Self::armax(0.0, window, max_lag)
    }

    pub fn kappa(&self) -> usize {
        self.window.kappa()
    }

    fn validate(&self) -> Result<()> {
        if !(self.theta_x > 0.0 && self.theta_x <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta_x must lie in (0, 1], got {}",
                self.theta_x
            )));
        }
        if self.betas.len() != self.kappa() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} beta coefficients, got {}",
                self.kappa(),
                self.betas.len()
            )));
        }
        if self.betas[0] != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "beta_0 must be 1, got {}",
                self.betas[0]
            )));
        }
        let in_unit = |v: &f64| (0.0..=1.0).contains(v);
        if !self.betas.iter().all(in_unit) || !self.lambda_x.values().all(in_unit) {
            return Err(Error::InvalidParameter(
                "coefficients must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    fn lambda(&self, lag: usize) -> Result<f64> {
        self.lambda_x
            .get(&lag)
            .copied()
            .ok_or(Error::MissingCoefficient(lag))
    }
}

/// `beta_j = phi^j` for the ARMAX sequence.
pub fn beta_armax(phi: f64, j: usize) -> f64 {
    phi.powi(j as i32)
}

/// `lag -> phi^lag` for `lag = 1..=max_lag`.
pub fn armax_lambda_x(phi: f64, max_lag: usize) -> BTreeMap<usize, f64> {
    (1..=max_lag)
        .map(|lag| (lag, phi.powi(lag as i32)))
        .collect()
}

/// One itemized term of a closed-form sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub quantity: String,
    /// Indicator pattern, `*` marking unconstrained positions.
    pub pattern: String,
    pub probability: f64,
    pub coefficient: f64,
    pub contribution: f64,
}

fn render(cells: &[Option<u8>]) -> String {
    cells
        .iter()
        .map(|c| match c {
            Some(0) => '0',
            Some(_) => '1',
            None => '*',
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaY {
    pub theta_y: f64,
    /// `theta_x * P(U = 1)`, an upper bound for `theta_y`.
    pub bound: f64,
    pub p1: f64,
    pub fresh_gap_probs: Vec<f64>,
    pub components: Vec<Component>,
}

/// `theta_y = theta_x * sum_{j=0}^{kappa-1} p(1, 0^j, 1) beta_j`.
pub fn theta_y_closed_form(inputs: &TheoryInputs) -> Result<ThetaY> {
    inputs.validate()?;
    let kappa = inputs.kappa();
    let gaps = fresh_gap_probs(inputs.window, kappa - 1)?;
    let mut components = Vec::with_capacity(kappa);
    let mut weighted = 0.0;
    for (j, (&prob, &beta)) in gaps.iter().zip(&inputs.betas).enumerate() {
        let contribution = inputs.theta_x * prob * beta;
        weighted += prob * beta;
        components.push(Component {
            quantity: "theta_y".into(),
            pattern: BinaryPattern::fresh_gap(j)?
                .bits()
                .iter()
                .map(|b| b.to_string())
                .collect(),
            probability: prob,
            coefficient: inputs.theta_x * beta,
            contribution,
        });
    }
    let p1: f64 = gaps.iter().sum();
    Ok(ThetaY {
        theta_y: inputs.theta_x * weighted,
        bound: inputs.theta_x * p1,
        p1,
        fresh_gap_probs: gaps,
        components,
    })
}

/// Extremal index of `Y` as the limiting upcrossing rate over the
/// exceedance rate,
/// `sum_{j=0}^{kappa-1} p(1, 0^j, 1) (1 - lambda_x[j + 1])`.
///
/// `Y_1 <= u < Y_2` needs a fresh record at index 2 whose value exceeds the
/// last fresh value, recorded `j + 1` steps earlier. This matches the
/// simulated extremal index whenever clusters of `X` have a single
/// upcrossing (ARMAX, i.i.d.). It differs from [`theta_y_closed_form`] as
/// soon as `kappa >= 2`; for an i.i.d. base it reduces to `P(U = 1)`.
pub fn theta_y_upcrossing(inputs: &TheoryInputs) -> Result<f64> {
    inputs.validate()?;
    let kappa = inputs.kappa();
    let gaps = fresh_gap_probs(inputs.window, kappa - 1)?;
    gaps.iter()
        .enumerate()
        .map(|(j, &prob)| Ok(prob * (1.0 - inputs.lambda(j + 1)?)))
        .sum()
}

/// `lambda(Y_{n+1} | Y_n) = p(0) + sum_{i=0}^{kappa-1} lambda_x[1+i] p(1, 0^i, 1)`.
pub fn tdc_y_lag1(inputs: &TheoryInputs) -> Result<f64> {
    Ok(tdc_lag1_terms(inputs)?.0)
}

fn tdc_lag1_terms(inputs: &TheoryInputs) -> Result<(f64, Vec<Component>)> {
    inputs.validate()?;
    let kappa = inputs.kappa();
    let p0 = prob_failure(inputs.window)?;
    let mut total = if kappa >= 2 { p0 } else { 0.0 };
    let mut components = vec![Component {
        quantity: "lambda_y[1]".into(),
        pattern: "0".into(),
        probability: p0,
        coefficient: 1.0,
        contribution: total,
    }];
    for i in 0..kappa {
        let prob = pattern_prob_exact(&BinaryPattern::fresh_gap(i)?, inputs.window)?.probability;
        let coef = inputs.lambda(1 + i)?;
        total += coef * prob;
        components.push(Component {
            quantity: "lambda_y[1]".into(),
            pattern: BinaryPattern::fresh_gap(i)?
                .bits()
                .iter()
                .map(|b| b.to_string())
                .collect(),
            probability: prob,
            coefficient: coef,
            contribution: coef * prob,
        });
    }
    Ok((total, components))
}

/// Indicator pattern of the `(i, i*)` term of the lag-`m` sum: fresh record
/// at `n - i*` followed by `i*` failures up to `n`, free positions
/// `n+1..n+i-1`, then a fresh record at `n + i` and failures up to `n + m`.
pub fn lag_m_cells(m: usize, i: usize, i_star: usize) -> Vec<Option<u8>> {
    let mut cells = Vec::with_capacity(i_star + m + 1);
    cells.push(Some(1));
    cells.extend(std::iter::repeat_n(Some(0), i_star));
    cells.extend(std::iter::repeat_n(None, i - 1));
    cells.push(Some(1));
    cells.extend(std::iter::repeat_n(Some(0), m - i));
    cells
}

/// Lag-`m` tail dependence coefficient of `Y`:
/// `p(0^m) 1{m <= kappa-1}
///   + sum_{i = max(1, m-kappa+1)}^{m} sum_{i*=0}^{kappa-1} lambda_x[i+i*] p(term(i, i*))`.
pub fn tdc_y_lagm(inputs: &TheoryInputs, m: usize) -> Result<f64> {
    Ok(tdc_lagm_terms(inputs, m)?.0)
}

fn tdc_lagm_terms(inputs: &TheoryInputs, m: usize) -> Result<(f64, Vec<Component>)> {
    if m == 0 {
        return Err(Error::InvalidParameter("lag must be at least 1".into()));
    }
    inputs.validate()?;
    let kappa = inputs.kappa();
    let label = format!("lambda_y[{m}]");
    let mut components = Vec::new();
    let mut total = 0.0;
    if m < kappa {
        let stuck = pattern_prob_exact(&BinaryPattern::zeros(m)?, inputs.window)?.probability;
        total += stuck;
        components.push(Component {
            quantity: label.clone(),
            pattern: render(&vec![Some(0); m]),
            probability: stuck,
            coefficient: 1.0,
            contribution: stuck,
        });
    }
    let first = 1.max((m + 1).saturating_sub(kappa));
    for i in first..=m {
        for i_star in 0..kappa {
            let cells = lag_m_cells(m, i, i_star);
            let prob = pattern_prob_masked(&cells, inputs.window)?;
            let coef = inputs.lambda(i + i_star)?;
            total += coef * prob;
            components.push(Component {
                quantity: label.clone(),
                pattern: render(&cells),
                probability: prob,
                coefficient: coef,
                contribution: coef * prob,
            });
        }
    }
    Ok((total, components))
}

/// Serialized summary of the closed-form quantities for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub theta_x: f64,
    pub theta_y: f64,
    pub theta_y_upcrossing: f64,
    pub p1: f64,
    pub fresh_gap_probs: Vec<f64>,
    pub lambda_y: BTreeMap<usize, f64>,
    pub components: Vec<Component>,
}

pub fn theory_report(inputs: &TheoryInputs, max_lag: usize) -> Result<TheoryReport> {
    let theta = theta_y_closed_form(inputs)?;
    let mut components = theta.components;
    let mut lambda_y = BTreeMap::new();
    for m in 1..=max_lag {
        let (value, terms) = tdc_lagm_terms(inputs, m)?;
        lambda_y.insert(m, value);
        components.extend(terms);
    }
    Ok(TheoryReport {
        theta_x: inputs.theta_x,
        theta_y: theta.theta_y,
        theta_y_upcrossing: theta_y_upcrossing(inputs)?,
        p1: theta.p1,
        fresh_gap_probs: theta.fresh_gap_probs,
        lambda_y,
        components,
    })
}
