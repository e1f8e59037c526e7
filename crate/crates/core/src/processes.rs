//! Seeded generators for the base sequence `X` and the indicator sequence `U`.
//!
//! Every logical series draws from its own ChaCha sub-stream, keyed by the
//! master seed and a 64-bit stream id. Two series never share a stream, so a
//! replica produces the same numbers no matter which worker thread runs it.

use rand::distr::{Bernoulli, Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Master seed from which independent sub-streams are split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    seed: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Counter-based generator for the sub-stream `id`.
    pub fn substream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }
}

/// Unit-scale standard Fréchet law, `F(x) = exp(-1/x)` for `x > 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrechetMarginal;

impl FrechetMarginal {
    pub fn cdf(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-1.0 / x).exp()
        }
    }

    /// Inverse CDF. `v` must lie in the open interval (0, 1).
    pub fn quantile(v: f64) -> f64 {
        -1.0 / v.ln()
    }
}

/// One standard Fréchet draw by inversion of an open-interval uniform.
pub fn sample_frechet<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let v: f64 = rng.sample(Open01);
    FrechetMarginal::quantile(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Marginal {
    StandardFrechet,
    Unknown,
}

/// A finite realization of a real-valued stationary sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPath {
    values: Vec<f64>,
    marginal: Marginal,
}

impl SeriesPath {
    pub fn new(values: Vec<f64>, marginal: Marginal) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyPath);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "series values must be finite".into(),
            ));
        }
        if marginal == Marginal::StandardFrechet && values.iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidParameter(
                "standard Fréchet values must be strictly positive".into(),
            ));
        }
        Ok(Self { values, marginal })
    }

    /// Wraps observed data of unknown marginal law.
    pub fn observed(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Marginal::Unknown)
    }

    pub(crate) fn from_trusted(values: Vec<f64>, marginal: Marginal) -> Self {
        debug_assert!(!values.is_empty());
        Self { values, marginal }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn marginal(&self) -> Marginal {
        self.marginal
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Length of the longest run of zeros in `bits`.
pub fn max_zero_run(bits: &[u8]) -> usize {
    let mut best = 0;
    let mut current = 0;
    for &b in bits {
        if b == 0 {
            current += 1;
            best = best.max(current);
        } else {
            current = 0;
        }
    }
    best
}

/// A finite realization of the indicator process `U`.
///
/// `kappa` is the smallest window length that must contain a 1, so every
/// maximal run of zeros has length at most `kappa - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinarySeries {
    values: Vec<u8>,
    kappa: usize,
}

impl BinarySeries {
    pub fn new(values: Vec<u8>, kappa: usize) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::InvalidParameter("kappa must be at least 1".into()));
        }
        if values.is_empty() {
            return Err(Error::EmptyPath);
        }
        if let Some(bad) = values.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!(
                "indicator values must be 0 or 1, got {bad}"
            )));
        }
        let run = max_zero_run(&values);
        if run > kappa - 1 {
            return Err(Error::ZeroRunViolation {
                run,
                max: kappa - 1,
            });
        }
        Ok(Self { values, kappa })
    }

    /// Builds a series without checking the zero-run bound. Only meant for
    /// probing the degeneracy check with deliberately invalid input.
    pub fn new_unchecked(values: Vec<u8>, kappa: usize) -> Self {
        Self { values, kappa }
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Coefficient of the ARMAX recursion `X_n = max(phi X_{n-1}, (1 - phi) Z_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmaxParams {
    phi: f64,
}

impl ArmaxParams {
    pub fn new(phi: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&phi) {
            return Err(Error::InvalidParameter(format!(
                "phi must lie in [0, 1), got {phi}"
            )));
        }
        Ok(Self { phi })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Extremal index of the ARMAX sequence, `1 - phi`.
    pub fn extremal_index(&self) -> f64 {
        1.0 - self.phi
    }
}

/// Parameters of the sliding-window failure rule.
///
/// Events `A_t` occur independently with probability `p`. The indicator is
/// forced to 1 when none of the previous `kappa - 1` events occurred and
/// follows `A_t` otherwise. With `kappa = 1` the look-back window is empty
/// and every observation is kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowRuleParams {
    p: f64,
    kappa: usize,
}

impl WindowRuleParams {
    pub fn new(p: f64, kappa: usize) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in (0, 1], got {p}"
            )));
        }
        if kappa == 0 {
            return Err(Error::InvalidParameter("kappa must be at least 1".into()));
        }
        Ok(Self { p, kappa })
    }

    /// The configuration used throughout the Table 1 study: events
    /// `{W <= 1/2}` for standard exponential `W`, so `p = 1 - e^{-1/2}`.
    pub fn table1_default() -> Self {
        Self {
            p: 1.0 - (-0.5f64).exp(),
            kappa: 3,
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    /// Applies the rule to one window of event bits `a_{t-kappa+1}, ..., a_t`
    /// (oldest first). Returns `U_t`.
    pub fn indicator(&self, window: &[u8]) -> u8 {
        debug_assert_eq!(window.len(), self.kappa);
        let (history, current) = window.split_at(self.kappa - 1);
        if history.iter().all(|&a| a == 0) {
            1
        } else {
            current[0]
        }
    }
}

/// `n` independent standard Fréchet values.
pub fn gen_iid_frechet<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SeriesPath> {
    if n == 0 {
        return Err(Error::EmptyPath);
    }
    let values = (0..n).map(|_| sample_frechet(rng)).collect();
    Ok(SeriesPath::from_trusted(values, Marginal::StandardFrechet))
}

/// ARMAX path `X_1..X_n` started from a standard Fréchet `X_0`.
///
/// The innovations `Z_1..Z_n` are the first `n` draws of `rng`; `X_0` is the
/// draw after them. With `phi = 0` the output is exactly what
/// [`gen_iid_frechet`] returns for the same stream.
pub fn gen_armax<R: Rng + ?Sized>(
    params: ArmaxParams,
    n: usize,
    rng: &mut R,
) -> Result<SeriesPath> {
    if n == 0 {
        return Err(Error::EmptyPath);
    }
    let innovations: Vec<f64> = (0..n).map(|_| sample_frechet(rng)).collect();
    let mut prev = sample_frechet(rng);
    let phi = params.phi();
    let values = innovations
        .into_iter()
        .map(|z| {
            prev = armax_step(phi, prev, z);
            prev
        })
        .collect();
    Ok(SeriesPath::from_trusted(values, Marginal::StandardFrechet))
}

#[inline]
pub fn armax_step(phi: f64, prev: f64, innovation: f64) -> f64 {
    (phi * prev).max((1.0 - phi) * innovation)
}

/// Indicator path `U_1..U_n` under the window rule.
///
/// Draws `n + kappa - 1` event bits; the first `kappa - 1` form the warm-up
/// window preceding index 1.
pub fn gen_u_window_rule<R: Rng + ?Sized>(
    params: WindowRuleParams,
    n: usize,
    rng: &mut R,
) -> Result<BinarySeries> {
    if n == 0 {
        return Err(Error::EmptyPath);
    }
    let kappa = params.kappa();
    let bernoulli =
        Bernoulli::new(params.p()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let bits: Vec<u8> = (0..n + kappa - 1)
        .map(|_| u8::from(bernoulli.sample(rng)))
        .collect();
    let values = bits.windows(kappa).map(|w| params.indicator(w)).collect();
    Ok(BinarySeries { values, kappa })
}
