//! Exact joint probabilities of indicator patterns under the window rule.
//!
//! A pattern on `s` consecutive indices is decided by the `s + kappa - 1`
//! event bits that feed those indicators. The probability is the weighted
//! count of bit configurations that reproduce the pattern, so it does not
//! depend on where the pattern is anchored.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::processes::WindowRuleParams;

/// Maximum number of event bits the enumeration will visit.
pub const ENUMERATION_CAP: usize = 24;

/// Fixed 0/1 pattern over consecutive time indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BinaryPattern {
    bits: Vec<u8>,
}

impl BinaryPattern {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || bits.len() > ENUMERATION_CAP {
            return Err(Error::InvalidParameter(format!(
                "pattern length must be in 1..={ENUMERATION_CAP}, got {}",
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter(
                "pattern bits must be 0 or 1".into(),
            ));
        }
        Ok(Self { bits })
    }

    /// `(1, 0, ..., 0, 1)` with `gap` zeros: a fresh record followed by the
    /// next fresh record `gap + 1` steps later.
    pub fn fresh_gap(gap: usize) -> Result<Self> {
        let mut bits = vec![1];
        bits.extend(std::iter::repeat_n(0, gap));
        bits.push(1);
        Self::new(bits)
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![0; len])
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// All `2^s` patterns of length `s`, in binary counting order.
    pub fn all_of_length(s: usize) -> Result<Vec<Self>> {
        if s == 0 || s > 20 {
            return Err(Error::InvalidParameter(format!(
                "cannot list patterns of length {s}"
            )));
        }
        (0..1u32 << s)
            .map(|code| Self::new((0..s).rev().map(|k| ((code >> k) & 1) as u8).collect()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternProb {
    pub pattern: BinaryPattern,
    pub probability: f64,
}

/// Kahan-Babuška compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn pattern_prob_exact(
    pattern: &BinaryPattern,
    params: WindowRuleParams,
) -> Result<PatternProb> {
    let cells: Vec<Option<u8>> = pattern.bits().iter().map(|&b| Some(b)).collect();
    let probability = pattern_prob_masked(&cells, params)?;
    Ok(PatternProb {
        pattern: pattern.clone(),
        probability,
    })
}

/// Probability of a pattern with unconstrained positions (`None`).
///
/// Used for the lag-m tail dependence terms, whose index sets skip the
/// indicators strictly between the two fresh records.
pub fn pattern_prob_masked(cells: &[Option<u8>], params: WindowRuleParams) -> Result<f64> {
    if cells.is_empty() {
        return Err(Error::InvalidParameter(
            "pattern must have at least one position".into(),
        ));
    }
    let bits = cells.len() + params.kappa() - 1;
    if bits > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge {
            bits,
            cap: ENUMERATION_CAP,
        });
    }
    let mut walker = Enumeration {
        cells,
        params,
        window: Vec::with_capacity(bits),
        acc: CompensatedSum::default(),
    };
    walker.descend(1.0);
    Ok(walker.acc.total().clamp(0.0, 1.0))
}

struct Enumeration<'a> {
    cells: &'a [Option<u8>],
    params: WindowRuleParams,
    window: Vec<u8>,
    acc: CompensatedSum,
}

impl Enumeration<'_> {
    /// Depth-first walk over event bits. Each completed `kappa`-window fixes
    /// one indicator; branches contradicting the pattern carry zero weight
    /// in the sum and are cut as soon as they are detected.
    fn descend(&mut self, weight: f64) {
        let kappa = self.params.kappa();
        let depth = self.window.len();
        if depth == self.cells.len() + kappa - 1 {
            self.acc.add(weight);
            return;
        }
        let p = self.params.p();
        for (bit, w) in [(0u8, 1.0 - p), (1u8, p)] {
            if w == 0.0 {
                continue;
            }
            self.window.push(bit);
            let len = self.window.len();
            let consistent = len < kappa || {
                let position = len - kappa;
                match self.cells[position] {
                    Some(want) => self.params.indicator(&self.window[position..]) == want,
                    None => true,
                }
            };
            if consistent {
                self.descend(weight * w);
            }
            self.window.pop();
        }
    }
}

/// `[p(1, 0^j, 1) for j in 0..=max_j]`: the probability that the fresh
/// record after index 1 arrives `j + 1` steps later.
pub fn fresh_gap_probs(params: WindowRuleParams, max_j: usize) -> Result<Vec<f64>> {
    if max_j + 1 > params.kappa() {
        return Err(Error::InvalidParameter(format!(
            "max_j must be at most kappa - 1 = {}, got {max_j}",
            params.kappa() - 1
        )));
    }
    (0..=max_j)
        .map(|j| Ok(pattern_prob_exact(&BinaryPattern::fresh_gap(j)?, params)?.probability))
        .collect()
}

/// `P(U = 1)`.
pub fn prob_fresh(params: WindowRuleParams) -> Result<f64> {
    Ok(pattern_prob_exact(&BinaryPattern::new(vec![1])?, params)?.probability)
}

/// `P(U = 0)`.
pub fn prob_failure(params: WindowRuleParams) -> Result<f64> {
    Ok(pattern_prob_exact(&BinaryPattern::new(vec![0])?, params)?.probability)
}
