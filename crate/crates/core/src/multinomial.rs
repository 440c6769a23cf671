//! Estimators for the multinomial model, where every generated input belongs
//! to exactly one species.
//!
//! All estimators read only `n`, `S(n)` and `f1..f4`. The exact
//! `(n−1)/n`-corrected forms are used throughout; they converge to the
//! familiar large-`n` approximations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{
    coverage_ratio, EffortEstimate, ExtrapolationPoint, Extrapolator, RichnessEstimate,
    RichnessMethod,
};
use crate::frequency::{AbundanceFrequencies, SpeciesAccumulator, SpeciesId};

fn require_inputs(freq: &AbundanceFrequencies, min: u64, what: &str) -> Result<()> {
    if freq.n() < min {
        return Err(Error::undefined(format!(
            "{what} needs at least {min} inputs, got {}",
            freq.n()
        )));
    }
    Ok(())
}

/// Good-Turing estimate of the discovery probability, `Û(n) = f1/n`.
///
/// This is also the residual risk: the probability that the next input
/// belongs to a species nobody has seen yet.
pub fn good_turing_u(freq: &AbundanceFrequencies) -> Result<f64> {
    require_inputs(freq, 1, "the Good-Turing estimate")?;
    Ok((freq.singletons() as f64 / freq.n() as f64).clamp(0.0, 1.0))
}

/// Estimated sample coverage `Ĉ(n) = 1 − Û(n)`.
pub fn sample_coverage(freq: &AbundanceFrequencies) -> Result<f64> {
    good_turing_u(freq).map(|u| 1.0 - u)
}

fn chao1_unseen(n: f64, f1: f64, f2: f64) -> f64 {
    let scale = (n - 1.0) / n;
    if f2 > 0.0 {
        scale * f1 * f1 / (2.0 * f2)
    } else {
        scale * f1 * (f1 - 1.0) / 2.0
    }
}

/// Chao1 lower bound on species richness.
pub fn chao1(freq: &AbundanceFrequencies) -> Result<RichnessEstimate> {
    require_inputs(freq, 2, "Chao1")?;
    let n = freq.n() as f64;
    let unseen = chao1_unseen(n, freq.f(1) as f64, freq.f(2) as f64);
    Ok(RichnessEstimate::new(
        freq.s_obs() as f64 + unseen.max(0.0),
        freq.s_obs(),
        RichnessMethod::Chao1,
    ))
}

/// iChao1: Chao1 improved with tripletons and quadrupletons.
///
/// Falls back to Chao1 (flagged as degraded) when `f4 = 0`.
pub fn ichao1(freq: &AbundanceFrequencies) -> Result<RichnessEstimate> {
    require_inputs(freq, 4, "iChao1")?;
    let base = chao1(freq)?;
    let (f1, f2, f3, f4) = (
        freq.f(1) as f64,
        freq.f(2) as f64,
        freq.f(3) as f64,
        freq.f(4) as f64,
    );
    let degraded = f4 == 0.0;
    let correction = if degraded || f3 == 0.0 {
        0.0
    } else {
        let n = freq.n() as f64;
        let inner = f1 - (n - 3.0) / (n - 1.0) * f2 * f3 / (2.0 * f4);
        (n - 3.0) / n * f3 / (4.0 * f4) * inner.max(0.0)
    };
    Ok(RichnessEstimate {
        s_hat: base.s_hat + correction,
        method: RichnessMethod::IChao1,
        ..base
    }
    .degraded(degraded))
}

/// First- or second-order jackknife richness estimator.
///
/// A second-order value below `S(n)` (possible when doubletons dominate) is
/// raised to `S(n)` and flagged as degraded.
pub fn jackknife(freq: &AbundanceFrequencies, order: u32) -> Result<RichnessEstimate> {
    let s = freq.s_obs() as f64;
    let f1 = freq.f(1) as f64;
    let (s_hat, method) = match order {
        1 => {
            require_inputs(freq, 1, "the first-order jackknife")?;
            let n = freq.n() as f64;
            (s + (n - 1.0) / n * f1, RichnessMethod::Jackknife1)
        }
        2 => {
            require_inputs(freq, 2, "the second-order jackknife")?;
            let n = freq.n() as f64;
            let f2 = freq.f(2) as f64;
            let value =
                s + (2.0 * n - 3.0) / n * f1 - (n - 2.0) * (n - 2.0) / (n * (n - 1.0)) * f2;
            (value, RichnessMethod::Jackknife2)
        }
        other => {
            return Err(Error::invalid(format!(
                "jackknife order must be 1 or 2, got {other}"
            )))
        }
    };
    Ok(RichnessEstimate::new(s_hat.max(s), freq.s_obs(), method).degraded(s_hat < s))
}

/// Species coverage `Ĝ(n) = S(n)/Ŝ`.
pub fn species_coverage(freq: &AbundanceFrequencies, richness: &RichnessEstimate) -> Result<f64> {
    richness.check_matches(freq.s_obs())?;
    coverage_ratio(freq.s_obs(), richness.s_hat)
}

/// Extrapolator `Ŝ(n+m)` / `Û(n+m)` for this snapshot.
pub fn extrapolator(freq: &AbundanceFrequencies, richness: &RichnessEstimate) -> Result<Extrapolator> {
    require_inputs(freq, 1, "extrapolation")?;
    richness.check_matches(freq.s_obs())?;
    let scale = freq.singletons() as f64 / freq.n() as f64;
    Ok(Extrapolator::new(
        freq.s_obs(),
        richness.unseen(),
        freq.singletons(),
        freq.n(),
        scale,
    ))
}

/// Expected species discovered, and discovery probability, after `m_star`
/// more inputs.
pub fn extrapolate_richness(
    freq: &AbundanceFrequencies,
    richness: &RichnessEstimate,
    m_star: u64,
) -> Result<ExtrapolationPoint> {
    Ok(extrapolator(freq, richness)?.point(m_star))
}

/// Discovery probability after `m_star` more inputs,
/// `Û(n+m*) = (f1/n)·(n·f̂0/(n·f̂0+f1))^(m*+1)`.
pub fn extrapolate_discovery(
    freq: &AbundanceFrequencies,
    richness: &RichnessEstimate,
    m_star: u64,
) -> Result<f64> {
    Ok(extrapolator(freq, richness)?.discovery_at(m_star as f64))
}

pub(crate) fn check_target(target: f64, current: f64) -> Result<()> {
    if !target.is_finite() || target >= 1.0 {
        return Err(Error::UnreachableTarget { target });
    }
    if target < current {
        return Err(Error::AlreadyAchieved { target, current });
    }
    Ok(())
}

/// Target equal to the current coverage up to rounding in `S(n)/Ŝ`.
pub(crate) fn at_current(target: f64, current: f64) -> bool {
    (target - current).abs() <= 4.0 * f64::EPSILON * current
}

/// Additional inputs needed to reach species coverage `target` (`G*`).
///
/// Reports the closed-form approximation `(n·f1/(2f2))·ln[f̂0/((1−G*)·Ŝ)]`
/// next to the exact inversion of [`extrapolate_richness`]. A target equal to
/// the current coverage needs zero inputs.
pub fn required_effort(
    freq: &AbundanceFrequencies,
    richness: &RichnessEstimate,
    target: f64,
) -> Result<EffortEstimate> {
    if !target.is_finite() || target >= 1.0 {
        return Err(Error::UnreachableTarget { target });
    }
    let (f1, f2) = (freq.singletons(), freq.doubletons());
    if f1 == 0 || f2 == 0 {
        return Err(Error::InsufficientRareSpecies {
            singletons: f1,
            doubletons: f2,
        });
    }
    let current = species_coverage(freq, richness)?;
    check_target(target, current)?;
    if at_current(target, current) {
        return Ok(EffortEstimate {
            target,
            formula: 0.0,
            exact: 0.0,
        });
    }
    let x = extrapolator(freq, richness)?;
    let s_hat = richness.s_hat;
    let f0 = richness.unseen();
    let missing = (1.0 - target) * s_hat;
    let n = freq.n() as f64;
    let formula = (n * f1 as f64 / (2.0 * f2 as f64) * (f0 / missing).ln()).max(0.0);
    let exact = x
        .inputs_to_reach(target * s_hat)
        .ok_or(Error::UnreachableTarget { target })?
        .max(0.0);
    Ok(EffortEstimate {
        target,
        formula,
        exact,
    })
}

/// Smoothed relative-abundance estimates and the evenness they imply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbundanceProfile {
    /// Smoothed probability of each discovered species, ordered by id.
    pub discovered: Vec<(SpeciesId, f64)>,
    /// Probability mass reserved for undiscovered species.
    pub missing_mass: f64,
    /// Pielou evenness `J = H / ln S`.
    pub evenness: f64,
    /// Shannon index `H = −Σ p ln p` over discovered species.
    pub shannon: f64,
}

impl AbundanceProfile {
    /// Profile of an exactly known abundance vector (no missing mass).
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::undefined("evenness of an empty assemblage"));
        }
        if p.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
            return Err(Error::invalid("abundances must lie in (0, 1]"));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("abundances sum to {total}, not 1")));
        }
        let discovered: Vec<_> = p
            .iter()
            .enumerate()
            .map(|(i, &x)| (SpeciesId::from_raw(i as u64), x))
            .collect();
        Ok(Self::with_masses(discovered, 0.0))
    }

    fn with_masses(discovered: Vec<(SpeciesId, f64)>, missing_mass: f64) -> Self {
        let shannon = shannon_index(discovered.iter().map(|&(_, p)| p));
        let evenness = evenness_from(shannon, discovered.len());
        AbundanceProfile {
            discovered,
            missing_mass,
            evenness,
            shannon,
        }
    }

    /// All estimated abundances: discovered species, then the aggregate
    /// missing mass when it is positive.
    pub fn p_hat(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.discovered.iter().map(|&(_, p)| p).collect();
        if self.missing_mass > 0.0 {
            out.push(self.missing_mass);
        }
        out
    }
}

/// Shannon index `H = −Σ p ln p`.
pub fn shannon_index(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.ln())
        .sum()
}

fn evenness_from(shannon: f64, species: usize) -> f64 {
    // a single species is trivially even
    if species <= 1 {
        return 1.0;
    }
    (shannon / (species as f64).ln()).clamp(0.0, 1.0)
}

/// Pielou evenness `J = H / ln S` of an abundance vector.
pub fn pielou_evenness(p: &[f64]) -> f64 {
    evenness_from(shannon_index(p.iter().copied()), p.len())
}

/// Good-Turing smoothed abundance profile of a multinomial campaign.
///
/// The missing mass `f1/n` is reserved for undiscovered species and the
/// naive proportions `X_i/n` are scaled to share the remaining `1 − f1/n`.
/// When every input is a distinct singleton the reserve is capped at
/// `(n−1)/n` so that discovered species keep positive mass.
pub fn abundance_profile(acc: &SpeciesAccumulator) -> Result<AbundanceProfile> {
    let freq = acc.snapshot_abundance()?;
    if freq.n() == 0 {
        return Err(Error::undefined("abundance profile of an empty campaign"));
    }
    let n = freq.n() as f64;
    let missing = (freq.singletons() as f64 / n).min((n - 1.0) / n);
    let keep = 1.0 - missing;
    let mut discovered: Vec<(SpeciesId, f64)> = acc
        .counts()
        .map(|(id, c)| (id, c as f64 / n * keep))
        .collect();
    discovered.sort_unstable_by_key(|&(id, _)| id);
    Ok(AbundanceProfile::with_masses(discovered, missing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn worked() -> AbundanceFrequencies {
        // S(n) = 100, f1 = 10, f2 = 5, n = 10,000; remaining species abundant.
        AbundanceFrequencies::from_leading(10_000, 100, [10, 5, 0, 0]).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn good_turing_examples() {
        let f = AbundanceFrequencies::from_leading(63_600_000, 4944, [447, 70, 0, 0]).unwrap();
        assert!(rel(good_turing_u(&f).unwrap(), 7.028_301_886_792_453e-6) < 1e-12);
        let f = AbundanceFrequencies::from_leading(124_800_000, 5000, [95, 40, 0, 0]).unwrap();
        assert!(rel(good_turing_u(&f).unwrap(), 7.612_179_487_179_487e-7) < 1e-12);
        let f = AbundanceFrequencies::from_counts([(3, 4)]).unwrap();
        assert_eq!(good_turing_u(&f).unwrap(), 0.0);
        let empty = AbundanceFrequencies::from_counts([]).unwrap();
        assert!(matches!(good_turing_u(&empty), Err(Error::UndefinedEstimate(_))));
    }

    #[test]
    fn chao1_examples() {
        let f = AbundanceFrequencies::from_leading(1_000_000, 120, [0, 0, 0, 0]).unwrap();
        assert_eq!(chao1(&f).unwrap().s_hat, 120.0);
        let est = chao1(&worked()).unwrap();
        assert!(rel(est.s_hat, 109.999) < 1e-13);
        assert!((est.unseen() - 9.999).abs() < 1e-12);
        // f2 = 0 falls back to f1(f1−1)/2
        let f = AbundanceFrequencies::from_counts([(1, 3), (5, 1)]).unwrap();
        let n = 8.0;
        assert!(rel(chao1(&f).unwrap().s_hat, 4.0 + (n - 1.0) / n * 3.0) < 1e-15);
        let tiny = AbundanceFrequencies::from_counts([(1, 1)]).unwrap();
        assert!(chao1(&tiny).is_err());
    }

    #[test]
    fn ichao1_examples() {
        let f = AbundanceFrequencies::from_leading(10_000, 100, [10, 5, 4, 2]).unwrap();
        let est = ichao1(&f).unwrap();
        assert!(rel(est.s_hat, 112.498_749_899_989_99) < 1e-13);
        assert!(!est.degraded);

        let f = AbundanceFrequencies::from_leading(10_000, 100, [10, 5, 0, 2]).unwrap();
        assert_eq!(ichao1(&f).unwrap().s_hat, chao1(&f).unwrap().s_hat);

        let f = AbundanceFrequencies::from_leading(10_000, 100, [2, 8, 8, 1]).unwrap();
        assert_eq!(ichao1(&f).unwrap().s_hat, chao1(&f).unwrap().s_hat);

        let f = AbundanceFrequencies::from_leading(10_000, 100, [10, 5, 4, 0]).unwrap();
        let est = ichao1(&f).unwrap();
        assert!(est.degraded);
        assert_eq!(est.s_hat, chao1(&f).unwrap().s_hat);

        let f = AbundanceFrequencies::from_counts([(1, 3)]).unwrap();
        assert!(ichao1(&f).is_err());
    }

    #[test]
    fn jackknife_examples() {
        let f = AbundanceFrequencies::from_counts([(7, 3)]).unwrap();
        assert_eq!(jackknife(&f, 1).unwrap().s_hat, 3.0);
        assert_eq!(jackknife(&f, 2).unwrap().s_hat, 3.0);

        let f = worked();
        assert!(rel(jackknife(&f, 1).unwrap().s_hat, 109.999) < 1e-13);
        assert!(rel(jackknife(&f, 2).unwrap().s_hat, 114.998_499_949_994_99) < 1e-13);
        assert!(matches!(jackknife(&f, 3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn jackknife2_approaches_its_large_sample_form() {
        let n = 10_000_000u64;
        let f = AbundanceFrequencies::from_leading(n, 100, [10, 5, 0, 0]).unwrap();
        let exact = jackknife(&f, 2).unwrap().s_hat;
        assert!((exact - (100.0 + 20.0 - 5.0)).abs() < 0.01);
    }

    #[test]
    fn jackknife2_never_drops_below_discovered() {
        let f = AbundanceFrequencies::from_counts([(2, 50), (1, 1)]).unwrap();
        let est = jackknife(&f, 2).unwrap();
        assert_eq!(est.s_hat, 51.0);
        assert!(est.degraded);
    }

    #[test]
    fn coverage_examples() {
        let f = AbundanceFrequencies::from_leading(1_000_000, 5392, [0, 0, 0, 0]).unwrap();
        let est = RichnessEstimate::known(5408, 5392).unwrap();
        assert!((species_coverage(&f, &est).unwrap() - 0.9970).abs() < 1e-4);

        let f = worked();
        let est = chao1(&f).unwrap();
        assert!(rel(species_coverage(&f, &est).unwrap(), 0.909_099_173_628_851_2) < 1e-13);

        let f = AbundanceFrequencies::from_counts([(3, 2)]).unwrap();
        assert_eq!(species_coverage(&f, &chao1(&f).unwrap()).unwrap(), 1.0);

        let empty = AbundanceFrequencies::from_counts([]).unwrap();
        let zero = RichnessEstimate::known(0, 0).unwrap();
        assert!(species_coverage(&empty, &zero).is_err());
    }

    #[test]
    fn extrapolation_examples() {
        let f = worked();
        let est = chao1(&f).unwrap();
        assert_eq!(extrapolate_richness(&f, &est, 0).unwrap().s_pred, 100.0);
        let p = extrapolate_richness(&f, &est, 10_000).unwrap();
        assert!(rel(p.s_pred, 106.320_757_396_717_13) < 1e-12);
        assert!(rel(p.u_pred, 3.678_242_603_282_866e-4) < 1e-12);

        let none = RichnessEstimate::known(100, 100).unwrap();
        for m in [0, 1, 1000, 1_000_000_000] {
            let p = extrapolate_richness(&f, &none, m).unwrap();
            assert_eq!(p.s_pred, 100.0);
            assert_eq!(p.u_pred, 0.0);
        }
    }

    #[test]
    fn discovery_extrapolation_examples() {
        let f = AbundanceFrequencies::from_leading(1000, 10, [0, 3, 0, 0]).unwrap();
        let est = chao1(&f).unwrap();
        assert_eq!(extrapolate_discovery(&f, &est, 5).unwrap(), 0.0);

        // a vast unseen pool recovers the Good-Turing estimate at m* = 0
        let f = worked();
        let huge = RichnessEstimate::known(u32::MAX as u64, 100).unwrap();
        let u0 = extrapolate_discovery(&f, &huge, 0).unwrap();
        assert!(rel(u0, good_turing_u(&f).unwrap()) < 1e-9);

        let est = chao1(&f).unwrap();
        let u = extrapolate_discovery(&f, &est, 500).unwrap();
        assert!(rel(u, 9.511_319_235_669_485e-4) < 1e-12);
    }

    #[test]
    fn effort_examples() {
        let f = worked();
        let est = chao1(&f).unwrap();
        let e = required_effort(&f, &est, 0.95).unwrap();
        assert!(rel(e.formula, 5977.460_867_057_006) < 1e-10);
        assert!(rel(e.exact, 5977.161_989_032_186) < 1e-10);
        assert_eq!(e.formula_inputs(), 5978);
        assert_eq!(e.exact_inputs(), 5978);

        let current = species_coverage(&f, &est).unwrap();
        let at = required_effort(&f, &est, current).unwrap();
        assert_eq!(at.exact_inputs(), 0);
        assert_eq!(at.formula_inputs(), 0);

        assert!(matches!(
            required_effort(&f, &est, 0.5),
            Err(Error::AlreadyAchieved { .. })
        ));
        assert!(matches!(
            required_effort(&f, &est, 1.0),
            Err(Error::UnreachableTarget { .. })
        ));
        let no_doubles = AbundanceFrequencies::from_leading(10_000, 100, [10, 0, 0, 0]).unwrap();
        let est2 = chao1(&no_doubles).unwrap();
        assert!(matches!(
            required_effort(&no_doubles, &est2, 0.99),
            Err(Error::InsufficientRareSpecies { .. })
        ));
    }

    #[test]
    fn effort_round_trips_through_the_extrapolator() {
        let f = worked();
        let est = chao1(&f).unwrap();
        let e = required_effort(&f, &est, 0.95).unwrap();
        let target = 0.95 * est.s_hat;
        let via_formula = extrapolate_richness(&f, &est, e.formula_inputs()).unwrap().s_pred;
        assert!(rel(via_formula, target) < 0.05);
        let via_exact = extrapolate_richness(&f, &est, e.exact_inputs()).unwrap().s_pred;
        assert!(via_exact >= target && rel(via_exact, target) < 1e-4);
    }

    #[test]
    fn mismatched_richness_is_rejected() {
        let f = worked();
        let other = RichnessEstimate::known(200, 150).unwrap();
        assert!(matches!(
            extrapolate_richness(&f, &other, 10),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn evenness_of_exact_profiles() {
        let even = AbundanceProfile::from_probabilities(&[0.5, 0.5]).unwrap();
        assert!((even.evenness - 1.0).abs() < 1e-12);
        let skew = AbundanceProfile::from_probabilities(&[0.9, 0.1]).unwrap();
        assert!((skew.evenness - 0.468_995_593_589_281_2).abs() < 1e-12);
        assert!(AbundanceProfile::from_probabilities(&[0.5, 0.4]).is_err());
        assert_eq!(pielou_evenness(&[1.0]), 1.0);
    }

    #[test]
    fn empirical_profile_without_singletons_matches_naive_proportions() {
        let mut acc = SpeciesAccumulator::multinomial();
        for (tok, c) in [("a", 500_000u64), ("b", 500_000)] {
            for _ in 0..c {
                acc.observe_one(SpeciesId::from_token(tok));
            }
        }
        let prof = abundance_profile(&acc).unwrap();
        assert_eq!(prof.missing_mass, 0.0);
        assert_eq!(prof.evenness, 1.0);
        assert_eq!(prof.p_hat(), vec![0.5, 0.5]);
    }

    #[test]
    fn profile_reserves_good_turing_mass() {
        let mut acc = SpeciesAccumulator::multinomial();
        for tok in ["a", "a", "a", "b", "c"] {
            acc.observe_one(SpeciesId::from_token(tok));
        }
        let prof = abundance_profile(&acc).unwrap();
        assert!((prof.missing_mass - 0.4).abs() < 1e-15);
        let total: f64 = prof.p_hat().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);

        let mut one = SpeciesAccumulator::multinomial();
        one.observe_one(SpeciesId::from_token("x"));
        let prof = abundance_profile(&one).unwrap();
        assert_eq!(prof.evenness, 1.0);
        assert_eq!(prof.p_hat(), vec![1.0]);

        assert!(abundance_profile(&SpeciesAccumulator::multinomial()).is_err());
    }

    fn snapshot_strategy() -> impl Strategy<Value = AbundanceFrequencies> {
        (0u64..40, 0u64..40, 0u64..20, 0u64..20, 0u64..50, 5u64..50).prop_map(
            |(f1, f2, f3, f4, abundant, each)| {
                AbundanceFrequencies::from_counts([
                    (1, f1),
                    (2, f2),
                    (3, f3),
                    (4, f4),
                    (each, abundant),
                ])
                .unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn lower_bound_ordering(f in snapshot_strategy()) {
            prop_assume!(f.n() >= 4);
            let c1 = chao1(&f).unwrap();
            let i1 = ichao1(&f).unwrap();
            prop_assert!(c1.s_hat >= f.s_obs() as f64);
            prop_assert!(i1.s_hat >= c1.s_hat);
            prop_assert!(c1.s_hat.is_finite() && i1.s_hat.is_finite());
            for order in [1, 2] {
                let jk = jackknife(&f, order).unwrap();
                prop_assert!(jk.s_hat >= f.s_obs() as f64);
            }
        }

        #[test]
        fn estimates_depend_only_on_leading_counts(f in snapshot_strategy()) {
            prop_assume!(f.n() >= 4);
            let leading = [f.f(1), f.f(2), f.f(3), f.f(4)];
            let g = AbundanceFrequencies::from_leading(f.n(), f.s_obs(), leading).unwrap();
            prop_assert_eq!(chao1(&f).unwrap().s_hat.to_bits(), chao1(&g).unwrap().s_hat.to_bits());
            prop_assert_eq!(ichao1(&f).unwrap().s_hat.to_bits(), ichao1(&g).unwrap().s_hat.to_bits());
            prop_assert_eq!(good_turing_u(&f).unwrap().to_bits(), good_turing_u(&g).unwrap().to_bits());
        }
    }
}
