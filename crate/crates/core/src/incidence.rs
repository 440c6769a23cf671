//! Estimators for the Bernoulli product model, where one input may belong to
//! several species (e.g. the statements it covers).
//!
//! Inputs are sampling units; the data are the incidence counts `Q_k` and
//! the incidence total `V`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{
    coverage_ratio, EffortEstimate, ExtrapolationPoint, Extrapolator, RichnessEstimate,
    RichnessMethod,
};
use crate::frequency::IncidenceFrequencies;
use crate::multinomial::{at_current, check_target};

fn require_units(freq: &IncidenceFrequencies, min: u64, what: &str) -> Result<()> {
    if freq.n() < min {
        return Err(Error::undefined(format!(
            "{what} needs at least {min} sampling units, got {}",
            freq.n()
        )));
    }
    Ok(())
}

/// Chao2 lower bound on species richness.
pub fn chao2(freq: &IncidenceFrequencies) -> Result<RichnessEstimate> {
    require_units(freq, 1, "Chao2")?;
    let (q1, q2) = (freq.q(1) as f64, freq.q(2) as f64);
    let unseen = if q2 > 0.0 {
        q1 * q1 / (2.0 * q2)
    } else {
        q1 * (q1 - 1.0) / 2.0
    };
    Ok(RichnessEstimate::new(
        freq.s_obs() as f64 + unseen.max(0.0),
        freq.s_obs(),
        RichnessMethod::Chao2,
    ))
}

/// iChao2; falls back to Chao2 (flagged as degraded) when `Q4 = 0`.
pub fn ichao2(freq: &IncidenceFrequencies) -> Result<RichnessEstimate> {
    let base = chao2(freq)?;
    let (q1, q2, q3, q4) = (
        freq.q(1) as f64,
        freq.q(2) as f64,
        freq.q(3) as f64,
        freq.q(4) as f64,
    );
    let degraded = q4 == 0.0;
    let correction = if degraded || q3 == 0.0 {
        0.0
    } else {
        q3 / (4.0 * q4) * (q1 - q2 * q3 / (2.0 * q4)).max(0.0)
    };
    Ok(RichnessEstimate {
        s_hat: base.s_hat + correction,
        method: RichnessMethod::IChao2,
        ..base
    }
    .degraded(degraded))
}

/// Incidence-based discovery probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncidenceDiscovery {
    /// `Û(n) = (Q1/V)·[n·Q̂0/(n·Q̂0+Q1)]`
    pub estimate: f64,
    /// `Q1/V`, the Good-Turing analogue.
    pub approximation: f64,
}

pub fn incidence_discovery(
    freq: &IncidenceFrequencies,
    richness: &RichnessEstimate,
) -> Result<IncidenceDiscovery> {
    if freq.v() == 0 {
        return Err(Error::undefined(
            "incidence discovery probability needs at least one incidence",
        ));
    }
    let x = extrapolator(freq, richness)?;
    let approximation = (freq.q(1) as f64 / freq.v() as f64).clamp(0.0, 1.0);
    Ok(IncidenceDiscovery {
        estimate: x.discovery_at(0.0),
        approximation,
    })
}

pub fn extrapolator(freq: &IncidenceFrequencies, richness: &RichnessEstimate) -> Result<Extrapolator> {
    require_units(freq, 1, "extrapolation")?;
    richness.check_matches(freq.s_obs())?;
    let scale = if freq.v() == 0 {
        0.0
    } else {
        freq.q(1) as f64 / freq.v() as f64
    };
    Ok(Extrapolator::new(
        freq.s_obs(),
        richness.unseen(),
        freq.q(1),
        freq.n(),
        scale,
    ))
}

/// `Ŝ(n+m*)` and `Û(n+m*)` under the Bernoulli product model.
pub fn incidence_extrapolate(
    freq: &IncidenceFrequencies,
    richness: &RichnessEstimate,
    m_star: u64,
) -> Result<ExtrapolationPoint> {
    Ok(extrapolator(freq, richness)?.point(m_star))
}

/// Additional inputs to reach species coverage `target`.
///
/// `formula` is the closed form
/// `ln[1 − n/(n−1)·2Q2/Q1²·(G*Ŝ − S(n))] / ln[1 − 2Q2/((n−1)Q1 + 2Q2)]`;
/// when its first logarithm is undefined the target is reported as out of
/// range rather than clamped. `exact` inverts [`incidence_extrapolate`].
pub fn incidence_required_effort(
    freq: &IncidenceFrequencies,
    richness: &RichnessEstimate,
    target: f64,
) -> Result<EffortEstimate> {
    if !target.is_finite() || target >= 1.0 {
        return Err(Error::UnreachableTarget { target });
    }
    let (q1, q2) = (freq.q(1), freq.q(2));
    if q1 == 0 || q2 == 0 {
        return Err(Error::InsufficientRareSpecies {
            singletons: q1,
            doubletons: q2,
        });
    }
    require_units(freq, 2, "the effort estimate")?;
    richness.check_matches(freq.s_obs())?;
    let current = coverage_ratio(freq.s_obs(), richness.s_hat)?;
    check_target(target, current)?;
    if at_current(target, current) {
        return Ok(EffortEstimate {
            target,
            formula: 0.0,
            exact: 0.0,
        });
    }

    let n = freq.n() as f64;
    let (q1, q2) = (q1 as f64, q2 as f64);
    let s_obs = freq.s_obs() as f64;
    let argument = 1.0 - n / (n - 1.0) * (2.0 * q2 / (q1 * q1)) * (target * richness.s_hat - s_obs);
    if argument <= 0.0 {
        return Err(Error::FormulaOutOfRange { target, argument });
    }
    let per_input = (-(2.0 * q2 / ((n - 1.0) * q1 + 2.0 * q2))).ln_1p();
    let formula = (argument.min(1.0).ln() / per_input).max(0.0);

    let exact = extrapolator(freq, richness)?
        .inputs_to_reach(target * richness.s_hat)
        .ok_or(Error::UnreachableTarget { target })?
        .max(0.0);
    Ok(EffortEstimate {
        target,
        formula,
        exact,
    })
}
