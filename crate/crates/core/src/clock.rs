//! Construction of the stopped clock sequence `Y` from `(X, U)`.
//!
//! A failed record (`U_t = 0`) is filled with the last available one, so
//! `Y_t = X_t` when `U_t = 1` and `Y_t = Y_{t-1}` otherwise. The same path
//! can be read off the base sequence through the random index `N_t` of the
//! last fresh record at or before `t`.
//!
//! Inputs may carry a pre-window: the first `pre_len` entries of `x` and `u`
//! precede index 1 and only serve to define `Y_1` when `U_1 = 0`. They are
//! dropped from the returned path.

use rand::Rng;

use crate::error::{Error, Result};
use crate::processes::{
    gen_armax, gen_iid_frechet, gen_u_window_rule, ArmaxParams, BinarySeries, SeedStream,
    SeriesPath, WindowRuleParams,
};

/// Observed path plus, for simulated data, the latent `X` and `U` behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppedClockPath {
    y: SeriesPath,
    x: Option<SeriesPath>,
    u: Option<BinarySeries>,
    kappa: usize,
}

impl StoppedClockPath {
    /// Wraps an observed `Y` path whose latent sequences are unknown.
    pub fn observed(y: SeriesPath, kappa: usize) -> Self {
        Self {
            y,
            x: None,
            u: None,
            kappa,
        }
    }

    /// Reassembles a path from stored columns. When both `x` and `u` are
    /// present, every kept value must follow the failures definition
    /// exactly (the first row is allowed to come from an earlier record).
    pub fn from_columns(
        y: SeriesPath,
        x: Option<SeriesPath>,
        u: Option<BinarySeries>,
    ) -> Result<Self> {
        let n = y.len();
        for len in [
            x.as_ref().map(SeriesPath::len),
            u.as_ref().map(BinarySeries::len),
        ]
        .into_iter()
        .flatten()
        {
            if len != n {
                return Err(Error::LengthMismatch { x: len, u: n });
            }
        }
        if let (Some(xs), Some(us)) = (&x, &u) {
            let (xv, uv, yv) = (xs.values(), us.values(), y.values());
            for t in 0..n {
                let expected = if uv[t] == 1 {
                    Some(xv[t])
                } else if t > 0 {
                    Some(yv[t - 1])
                } else {
                    None
                };
                if let Some(e) = expected {
                    if e.to_bits() != yv[t].to_bits() {
                        return Err(Error::Format(format!(
                            "row {} violates the failures definition",
                            t + 1
                        )));
                    }
                }
            }
        }
        let kappa = u.as_ref().map_or(1, BinarySeries::kappa);
        Ok(Self { y, x, u, kappa })
    }

    pub fn y(&self) -> &SeriesPath {
        &self.y
    }

    pub fn x(&self) -> Option<&SeriesPath> {
        self.x.as_ref()
    }

    pub fn u(&self) -> Option<&BinarySeries> {
        self.u.as_ref()
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Random index `N_t` for each kept position, 1-based relative to the first
/// kept index. Values `<= 0` point into the pre-window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSeries {
    n_indices: Vec<i64>,
}

impl IndexSeries {
    pub fn indices(&self) -> &[i64] {
        &self.n_indices
    }
}

fn check_shapes(x: &SeriesPath, u: &BinarySeries, pre_len: usize) -> Result<()> {
    if x.len() != u.len() {
        return Err(Error::LengthMismatch {
            x: x.len(),
            u: u.len(),
        });
    }
    if pre_len >= u.len() {
        return Err(Error::InvalidParameter(format!(
            "pre-window of {pre_len} leaves no observations out of {}",
            u.len()
        )));
    }
    check_origin(u.values(), pre_len)
}

fn check_origin(u: &[u8], pre_len: usize) -> Result<()> {
    match u.iter().position(|&b| b == 1) {
        Some(first) if first <= pre_len => Ok(()),
        _ => Err(Error::UndefinedOrigin),
    }
}

/// `Y` from the failures definition, with no pre-window.
pub fn build_y_failures(x: &SeriesPath, u: &BinarySeries) -> Result<StoppedClockPath> {
    build_y_failures_windowed(x, u, 0)
}

/// `Y` from the failures definition; the first `pre_len` entries of `x` and
/// `u` are a pre-window.
pub fn build_y_failures_windowed(
    x: &SeriesPath,
    u: &BinarySeries,
    pre_len: usize,
) -> Result<StoppedClockPath> {
    check_shapes(x, u, pre_len)?;
    let xs = x.values();
    let us = u.values();
    let mut y = Vec::with_capacity(xs.len());
    // The origin check guarantees `us[0..=pre_len]` holds a 1, so every copy
    // below reads a value that has already been set.
    let mut last = f64::NAN;
    for (&xv, &uv) in xs.iter().zip(us) {
        if uv == 1 {
            last = xv;
        }
        y.push(last);
    }
    Ok(assemble(x, u, y, pre_len))
}

fn assemble(x: &SeriesPath, u: &BinarySeries, y: Vec<f64>, pre_len: usize) -> StoppedClockPath {
    let kept_y = y[pre_len..].to_vec();
    let kept_x = x.values()[pre_len..].to_vec();
    let kept_u = u.values()[pre_len..].to_vec();
    StoppedClockPath {
        y: SeriesPath::from_trusted(kept_y, x.marginal()),
        x: Some(SeriesPath::from_trusted(kept_x, x.marginal())),
        u: Some(BinarySeries::new_unchecked(kept_u, u.kappa())),
        kappa: u.kappa(),
    }
}

/// Random index of the last fresh record, no pre-window.
pub fn compute_indices(u: &BinarySeries) -> Result<IndexSeries> {
    compute_indices_windowed(u, 0)
}

/// Evaluates
/// `N_n = n U_n + sum_{i>=1} prod_{j=0}^{i-1} (1 - U_{n-j}) U_{n-i} (n - i)`
/// term by term. The product vanishes once a 1 is passed, so the loop stops
/// there; the zero-run bound keeps it to at most `kappa - 1` live terms.
pub fn compute_indices_windowed(u: &BinarySeries, pre_len: usize) -> Result<IndexSeries> {
    if pre_len >= u.len() {
        return Err(Error::InvalidParameter(
            "pre-window leaves no observations".into(),
        ));
    }
    check_origin(u.values(), pre_len)?;
    let us: Vec<i64> = u.values().iter().map(|&b| i64::from(b)).collect();
    let offset = pre_len as i64;
    let mut n_indices = Vec::with_capacity(us.len() - pre_len);
    for pos in pre_len..us.len() {
        // `n` is 1-based relative to the first kept index.
        let n = pos as i64 - offset + 1;
        let mut total = n * us[pos];
        let mut product = 1i64;
        for i in 1..=pos {
            product *= 1 - us[pos - i + 1];
            if product == 0 {
                break;
            }
            total += product * us[pos - i] * (n - i as i64);
        }
        n_indices.push(total);
    }
    Ok(IndexSeries { n_indices })
}

/// `Y_n = X_{N_n}`, no pre-window.
pub fn build_y_random_index(x: &SeriesPath, u: &BinarySeries) -> Result<StoppedClockPath> {
    build_y_random_index_windowed(x, u, 0)
}

pub fn build_y_random_index_windowed(
    x: &SeriesPath,
    u: &BinarySeries,
    pre_len: usize,
) -> Result<StoppedClockPath> {
    check_shapes(x, u, pre_len)?;
    let idx = compute_indices_windowed(u, pre_len)?;
    let xs = x.values();
    let mut y = vec![f64::NAN; pre_len];
    y.extend(idx.indices().iter().map(|&n| {
        let pos = (n - 1 + pre_len as i64) as usize;
        xs[pos]
    }));
    Ok(assemble(x, u, y, pre_len))
}

/// True when every window of `kappa` consecutive indicators holds a 1, i.e.
/// the trailing `prod_{i=0}^{kappa-1} (1 - U_{n-i}) Y_{n-kappa}` term of the
/// recursive representation vanishes for every `n` and the recursion reduces
/// to the failures definition.
pub fn check_recursive_degeneracy(u: &BinarySeries) -> bool {
    let kappa = u.kappa();
    let us = u.values();
    if us.len() < kappa {
        return us.contains(&1) || us.is_empty();
    }
    us.windows(kappa)
        .all(|w| w.iter().map(|&b| 1 - i64::from(b)).product::<i64>() == 0)
}

/// Base sequence of a simulated model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseProcess {
    IidFrechet,
    Armax(ArmaxParams),
}

impl BaseProcess {
    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SeriesPath> {
        match *self {
            BaseProcess::IidFrechet => gen_iid_frechet(n, rng),
            BaseProcess::Armax(params) => gen_armax(params, n, rng),
        }
    }

    pub fn extremal_index(&self) -> f64 {
        match self {
            BaseProcess::IidFrechet => 1.0,
            BaseProcess::Armax(params) => params.extremal_index(),
        }
    }

    pub fn phi(&self) -> f64 {
        match self {
            BaseProcess::IidFrechet => 0.0,
            BaseProcess::Armax(params) => params.phi(),
        }
    }
}

const X_CHANNEL: u64 = 0;
const U_CHANNEL: u64 = 1;

/// Sub-stream id for one channel of logical series `series`.
pub fn stream_id(series: u64, channel: u64) -> u64 {
    (series << 1) | channel
}

/// Simulates `n` stationary observations of the stopped clock model.
///
/// `kappa` extra `(x, u)` steps are generated ahead of index 1; any window of
/// `kappa` indicators contains a 1, so `Y_1` is always defined.
pub fn simulate(
    base: BaseProcess,
    rule: WindowRuleParams,
    n: usize,
    stream: &SeedStream,
    series: u64,
) -> Result<StoppedClockPath> {
    if n == 0 {
        return Err(Error::EmptyPath);
    }
    let warmup = rule.kappa();
    let mut x_rng = stream.substream(stream_id(series, X_CHANNEL));
    let mut u_rng = stream.substream(stream_id(series, U_CHANNEL));
    let x = base.generate(n + warmup, &mut x_rng)?;
    let u = gen_u_window_rule(rule, n + warmup, &mut u_rng)?;
    build_y_failures_windowed(&x, &u, warmup)
}

/// Longest run of bitwise-equal consecutive values.
pub fn max_equal_run(values: &[f64]) -> usize {
    if values.is_empty() {
        return 0;
    }
    let mut best = 1;
    let mut current = 1;
    for w in values.windows(2) {
        if w[0].to_bits() == w[1].to_bits() {
            current += 1;
            best = best.max(current);
        } else {
            current = 1;
        }
    }
    best
}
