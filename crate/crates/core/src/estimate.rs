//! Estimate value types shared by both sampling models, and the geometric
//! extrapolator both models use for future discovery.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frequency::{FrequencySnapshot, SamplingModel};
use crate::{incidence, multinomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RichnessMethod {
    Chao1,
    #[serde(rename = "ichao1")]
    IChao1,
    Jackknife1,
    Jackknife2,
    Chao2,
    #[serde(rename = "ichao2")]
    IChao2,
    Known,
}

impl fmt::Display for RichnessMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RichnessMethod::Chao1 => "chao1",
            RichnessMethod::IChao1 => "ichao1",
            RichnessMethod::Jackknife1 => "jackknife1",
            RichnessMethod::Jackknife2 => "jackknife2",
            RichnessMethod::Chao2 => "chao2",
            RichnessMethod::IChao2 => "ichao2",
            RichnessMethod::Known => "known",
        })
    }
}

/// Percentile confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

/// Point estimate of total species richness `Ŝ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RichnessEstimate {
    pub s_hat: f64,
    pub s_obs: u64,
    pub method: RichnessMethod,
    /// Set when the estimator had to fall back to a simpler formula or clamp.
    pub degraded: bool,
    pub ci: Option<ConfidenceInterval>,
}

impl RichnessEstimate {
    pub(crate) fn new(s_hat: f64, s_obs: u64, method: RichnessMethod) -> Self {
        RichnessEstimate {
            s_hat,
            s_obs,
            method,
            degraded: false,
            ci: None,
        }
    }

    /// Total richness known a priori, e.g. the number of instrumented statements.
    pub fn known(s_known: u64, s_obs: u64) -> Result<Self> {
        if s_known < s_obs {
            return Err(Error::invalid(format!(
                "known richness {s_known} is below discovered species {s_obs}"
            )));
        }
        Ok(Self::new(s_known as f64, s_obs, RichnessMethod::Known))
    }

    /// Estimated number of undiscovered species, `f̂0 = Ŝ − S(n)`.
    pub fn unseen(&self) -> f64 {
        (self.s_hat - self.s_obs as f64).max(0.0)
    }

    pub(crate) fn degraded(mut self, degraded: bool) -> Self {
        self.degraded |= degraded;
        self
    }

    pub(crate) fn check_matches(&self, s_obs: u64) -> Result<()> {
        if self.s_obs != s_obs {
            return Err(Error::invalid(format!(
                "richness estimate was computed for S(n) = {} but the snapshot has S(n) = {s_obs}",
                self.s_obs
            )));
        }
        Ok(())
    }
}

/// Predicted state after `m_star` additional inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtrapolationPoint {
    pub m_star: u64,
    /// `Ŝ(n+m*)`
    pub s_pred: f64,
    /// `Û(n+m*)`
    pub u_pred: f64,
}

/// Additional inputs needed to reach a target species coverage `G*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffortEstimate {
    pub target: f64,
    /// Value of the closed-form approximation (before rounding).
    pub formula: f64,
    /// Exact inversion of the richness extrapolator (before rounding).
    pub exact: f64,
}

impl EffortEstimate {
    pub fn formula_inputs(&self) -> u64 {
        ceil_inputs(self.formula)
    }

    pub fn exact_inputs(&self) -> u64 {
        ceil_inputs(self.exact)
    }
}

fn ceil_inputs(x: f64) -> u64 {
    if x <= 0.0 {
        0
    } else {
        x.ceil() as u64
    }
}

/// Richness and discovery under continued sampling, for either model.
///
/// With `r = F1 / (n·F0 + F1)` (`F1` the singleton count, `F0` the estimated
/// number of undiscovered species):
///
/// * `Ŝ(n+m) = S(n) + F0·[1 − (1−r)^m]`
/// * `Û(n+m) = scale·(1−r)^(m+1)`, with `scale = f1/n` (multinomial) or
///   `Q1/V` (incidence).
///
/// Powers are evaluated as `exp(m·ln(1−r))` through `ln_1p`/`exp_m1`, which
/// stays accurate for `m` up to `1e12`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolator {
    s_obs: f64,
    unseen: f64,
    /// ln(1 − r); zero when nothing is left to discover.
    log_keep: f64,
    rate: f64,
    scale: f64,
}

impl Extrapolator {
    pub(crate) fn new(s_obs: u64, unseen: f64, singletons: u64, n: u64, scale: f64) -> Self {
        let active = unseen > 0.0 && singletons > 0;
        let rate = if active {
            singletons as f64 / (n as f64 * unseen + singletons as f64)
        } else {
            0.0
        };
        Extrapolator {
            s_obs: s_obs as f64,
            unseen: if active { unseen } else { unseen.max(0.0) },
            log_keep: if active { (-rate).ln_1p() } else { 0.0 },
            rate,
            scale: if active { scale } else { 0.0 },
        }
    }

    /// Per-input discovery rate `r`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Whether any further discovery is predicted.
    pub fn is_active(&self) -> bool {
        self.rate > 0.0
    }

    pub fn s_obs(&self) -> f64 {
        self.s_obs
    }

    pub fn unseen(&self) -> f64 {
        self.unseen
    }

    /// `Ŝ(n+m)`, with `m` real-valued.
    pub fn richness_at(&self, m: f64) -> f64 {
        if !self.is_active() || m <= 0.0 {
            return self.s_obs;
        }
        let found = -(m * self.log_keep).exp_m1();
        self.s_obs + self.unseen * found.clamp(0.0, 1.0)
    }

    /// Expected species gained after `m` more inputs, `Ŝ(n+m) − S(n)`.
    pub fn gain_at(&self, m: f64) -> f64 {
        self.richness_at(m) - self.s_obs
    }

    /// `Û(n+m)`, with `m` real-valued.
    pub fn discovery_at(&self, m: f64) -> f64 {
        if !self.is_active() {
            return 0.0;
        }
        (self.scale * ((m + 1.0) * self.log_keep).exp()).clamp(0.0, 1.0)
    }

    pub fn point(&self, m_star: u64) -> ExtrapolationPoint {
        ExtrapolationPoint {
            m_star,
            s_pred: self.richness_at(m_star as f64),
            u_pred: self.discovery_at(m_star as f64),
        }
    }

    /// Real-valued `m` with `Ŝ(n+m) = target`, for `S(n) ≤ target < S(n)+F0`.
    pub fn inputs_to_reach(&self, target: f64) -> Option<f64> {
        if target <= self.s_obs {
            return Some(0.0);
        }
        if !self.is_active() || target >= self.s_obs + self.unseen {
            return None;
        }
        // (1−r)^m = 1 − (target − S(n)) / F0
        let log_remaining = (-(target - self.s_obs) / self.unseen).ln_1p();
        Some(log_remaining / self.log_keep)
    }
}

/// Model-independent richness method selector, as chosen on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RichnessChoice {
    /// Chao1 (multinomial) or Chao2 (incidence).
    #[default]
    Chao,
    /// iChao1 or iChao2.
    IChao,
    Jackknife1,
    Jackknife2,
    Known(u64),
}

impl FromStr for RichnessChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chao" | "chao1" | "chao2" => Ok(RichnessChoice::Chao),
            "ichao" | "ichao1" | "ichao2" => Ok(RichnessChoice::IChao),
            "jk1" | "jackknife1" => Ok(RichnessChoice::Jackknife1),
            "jk2" | "jackknife2" => Ok(RichnessChoice::Jackknife2),
            other => match other.strip_prefix("known:") {
                Some(v) => v
                    .trim()
                    .parse::<u64>()
                    .map(RichnessChoice::Known)
                    .map_err(|_| Error::invalid(format!("bad known richness `{v}`"))),
                None => Err(Error::invalid(format!("unknown richness method `{other}`"))),
            },
        }
    }
}

impl fmt::Display for RichnessChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RichnessChoice::Chao => f.write_str("chao"),
            RichnessChoice::IChao => f.write_str("ichao"),
            RichnessChoice::Jackknife1 => f.write_str("jk1"),
            RichnessChoice::Jackknife2 => f.write_str("jk2"),
            RichnessChoice::Known(s) => write!(f, "known:{s}"),
        }
    }
}

/// Estimates richness for a snapshot of either model.
pub fn estimate_richness(
    snapshot: &FrequencySnapshot,
    choice: RichnessChoice,
) -> Result<RichnessEstimate> {
    match (snapshot, choice) {
        (_, RichnessChoice::Known(s)) => RichnessEstimate::known(s, snapshot.s_obs()),
        (FrequencySnapshot::Abundance(f), RichnessChoice::Chao) => multinomial::chao1(f),
        (FrequencySnapshot::Abundance(f), RichnessChoice::IChao) => multinomial::ichao1(f),
        (FrequencySnapshot::Abundance(f), RichnessChoice::Jackknife1) => {
            multinomial::jackknife(f, 1)
        }
        (FrequencySnapshot::Abundance(f), RichnessChoice::Jackknife2) => {
            multinomial::jackknife(f, 2)
        }
        (FrequencySnapshot::Incidence(q), RichnessChoice::Chao) => incidence::chao2(q),
        (FrequencySnapshot::Incidence(q), RichnessChoice::IChao) => incidence::ichao2(q),
        (FrequencySnapshot::Incidence(_), RichnessChoice::Jackknife1 | RichnessChoice::Jackknife2) => {
            Err(Error::invalid(
                "jackknife estimators are only available for the multinomial model",
            ))
        }
    }
}

/// Extrapolator for a snapshot of either model.
pub fn extrapolator(snapshot: &FrequencySnapshot, richness: &RichnessEstimate) -> Result<Extrapolator> {
    match snapshot {
        FrequencySnapshot::Abundance(f) => multinomial::extrapolator(f, richness),
        FrequencySnapshot::Incidence(q) => incidence::extrapolator(q, richness),
    }
}

/// Current discovery probability `Û(n)` for either model.
pub fn discovery_probability(
    snapshot: &FrequencySnapshot,
    richness: &RichnessEstimate,
) -> Result<f64> {
    match snapshot {
        FrequencySnapshot::Abundance(f) => multinomial::good_turing_u(f),
        FrequencySnapshot::Incidence(q) => {
            incidence::incidence_discovery(q, richness).map(|d| d.estimate)
        }
    }
}

/// Species coverage `Ĝ(n) = S(n)/Ŝ` for either model.
pub fn coverage(snapshot: &FrequencySnapshot, richness: &RichnessEstimate) -> Result<f64> {
    richness.check_matches(snapshot.s_obs())?;
    coverage_ratio(snapshot.s_obs(), richness.s_hat)
}

pub(crate) fn coverage_ratio(s_obs: u64, s_hat: f64) -> Result<f64> {
    if !(s_hat > 0.0) {
        return Err(Error::undefined("species coverage needs a positive richness estimate"));
    }
    Ok((s_obs as f64 / s_hat).clamp(0.0, 1.0))
}

/// Additional inputs to reach coverage `target` for either model.
pub fn required_effort(
    snapshot: &FrequencySnapshot,
    richness: &RichnessEstimate,
    target: f64,
) -> Result<EffortEstimate> {
    match snapshot {
        FrequencySnapshot::Abundance(f) => multinomial::required_effort(f, richness, target),
        FrequencySnapshot::Incidence(q) => incidence::incidence_required_effort(q, richness, target),
    }
}

/// A scalar estimator of a snapshot, named so it can be resampled and evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    /// `Ŝ`
    Richness(RichnessChoice),
    /// `Ĝ(n) = S(n)/Ŝ`
    Coverage(RichnessChoice),
    /// `Û(n)`; the richness choice is only used by the incidence model.
    Discovery(RichnessChoice),
    /// `Ŝ(n+m*)`
    ExtrapolatedRichness { richness: RichnessChoice, m_star: u64 },
    /// `Û(n+m*)`
    ExtrapolatedDiscovery { richness: RichnessChoice, m_star: u64 },
}

impl Statistic {
    pub fn evaluate(&self, snapshot: &FrequencySnapshot) -> Result<f64> {
        match *self {
            Statistic::Richness(c) => estimate_richness(snapshot, c).map(|r| r.s_hat),
            Statistic::Coverage(c) => coverage(snapshot, &estimate_richness(snapshot, c)?),
            Statistic::Discovery(c) => match snapshot.model() {
                SamplingModel::Multinomial => {
                    multinomial::good_turing_u(snapshot.as_abundance()?)
                }
                SamplingModel::Incidence => {
                    discovery_probability(snapshot, &estimate_richness(snapshot, c)?)
                }
            },
            Statistic::ExtrapolatedRichness { richness, m_star } => {
                let est = estimate_richness(snapshot, richness)?;
                Ok(extrapolator(snapshot, &est)?.richness_at(m_star as f64))
            }
            Statistic::ExtrapolatedDiscovery { richness, m_star } => {
                let est = estimate_richness(snapshot, richness)?;
                Ok(extrapolator(snapshot, &est)?.discovery_at(m_star as f64))
            }
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Richness(c) => write!(f, "richness({c})"),
            Statistic::Coverage(c) => write!(f, "coverage({c})"),
            Statistic::Discovery(c) => write!(f, "discovery({c})"),
            Statistic::ExtrapolatedRichness { richness, m_star } => {
                write!(f, "extrapolated_richness({richness}, m*={m_star})")
            }
            Statistic::ExtrapolatedDiscovery { richness, m_star } => {
                write!(f, "extrapolated_discovery({richness}, m*={m_star})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choice_parsing() {
        assert_eq!("chao".parse::<RichnessChoice>().unwrap(), RichnessChoice::Chao);
        assert_eq!("ichao2".parse::<RichnessChoice>().unwrap(), RichnessChoice::IChao);
        assert_eq!("jk2".parse::<RichnessChoice>().unwrap(), RichnessChoice::Jackknife2);
        assert_eq!(
            "known:1200".parse::<RichnessChoice>().unwrap(),
            RichnessChoice::Known(1200)
        );
        assert!("known:x".parse::<RichnessChoice>().is_err());
        assert!("ace".parse::<RichnessChoice>().is_err());
    }

    #[test]
    fn inactive_extrapolator_is_flat() {
        let x = Extrapolator::new(100, 0.0, 10, 1000, 0.01);
        assert_eq!(x.richness_at(1e9), 100.0);
        assert_eq!(x.discovery_at(0.0), 0.0);
        let x = Extrapolator::new(100, 5.0, 0, 1000, 0.0);
        assert_eq!(x.richness_at(1e9), 100.0);
        assert_eq!(x.inputs_to_reach(101.0), None);
    }

    #[test]
    fn huge_horizons_do_not_underflow_to_nan() {
        let x = Extrapolator::new(100, 10.0, 10, 10_000, 1e-3);
        let s = x.richness_at(1e12);
        assert!((s - 110.0).abs() < 1e-9);
        assert_eq!(x.discovery_at(1e12), 0.0);
    }

    #[test]
    fn inversion_round_trips() {
        let x = Extrapolator::new(100, 10.0, 10, 10_000, 1e-3);
        let m = x.inputs_to_reach(105.0).unwrap();
        assert!((x.richness_at(m) - 105.0).abs() < 1e-9);
        assert_eq!(x.inputs_to_reach(110.0), None);
    }
}
