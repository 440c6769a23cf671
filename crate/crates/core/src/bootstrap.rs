//! Percentile bootstrap confidence intervals for any [`Statistic`].
//!
//! Resamples are drawn from a bootstrap assemblage built from the snapshot:
//!
//! * multinomial: discovered species keep their observed proportions scaled
//!   by `1 − f1/n`; the Good-Turing missing mass `f1/n` is shared by
//!   `⌈f̂0⌉` equally likely pseudo-species (`f̂0` from Chao1). Each replicate
//!   draws `n` inputs from this assemblage.
//! * incidence: discovered species get detection rates `Y_i/n · (1 − Û)`;
//!   `⌈Q̂0⌉` pseudo-species (Chao2) share the expected undiscovered incidences
//!   per unit `Û·V/n`. Each replicate draws `n` units of independent
//!   Bernoulli trials.
//!
//! Replicate `i` uses its own ChaCha20 stream seeded with `seed + i`, so
//! intervals are reproducible whatever order replicates run in.

use std::collections::HashMap;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{ConfidenceInterval, Statistic};
use crate::frequency::{
    AbundanceFrequencies, FrequencySnapshot, IncidenceFrequencies,
};
use crate::{incidence, multinomial};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replicates: 200,
            level: 0.95,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn new(replicates: usize, level: f64, seed: u64) -> Result<Self> {
        let cfg = BootstrapConfig {
            replicates,
            level,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::invalid(format!(
                "bootstrap needs at least 2 replicates, got {}",
                self.replicates
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::invalid(format!(
                "confidence level must lie in (0, 1), got {}",
                self.level
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    /// Median of the defined resample estimates.
    pub median: f64,
    /// Replicates on which the statistic was defined.
    pub defined: usize,
    pub replicates: usize,
    /// Fewer than half of the replicates produced a value.
    pub degraded: bool,
}

impl BootstrapInterval {
    pub fn confidence_interval(&self) -> ConfidenceInterval {
        ConfidenceInterval {
            lower: self.lower,
            upper: self.upper,
            level: self.level,
        }
    }
}

/// Bootstrap assemblage for one snapshot; draws resampled snapshots.
#[derive(Debug, Clone)]
pub enum Resampler {
    Abundance(AbundanceResampler),
    Incidence(IncidenceResampler),
}

impl Resampler {
    pub fn new(snapshot: &FrequencySnapshot) -> Result<Self> {
        Ok(match snapshot {
            FrequencySnapshot::Abundance(f) => Resampler::Abundance(AbundanceResampler::new(f)?),
            FrequencySnapshot::Incidence(q) => Resampler::Incidence(IncidenceResampler::new(q)?),
        })
    }

    pub fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FrequencySnapshot> {
        match self {
            Resampler::Abundance(r) => r.resample(rng).map(FrequencySnapshot::from),
            Resampler::Incidence(r) => r.resample(rng).map(FrequencySnapshot::from),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AbundanceResampler {
    n: u64,
    counts: Vec<u64>,
    missing_mass: f64,
    pseudo_species: u64,
}

impl AbundanceResampler {
    pub fn new(freq: &AbundanceFrequencies) -> Result<Self> {
        if freq.n() == 0 {
            return Err(Error::undefined("cannot resample an empty campaign"));
        }
        let unseen = if freq.n() >= 2 {
            multinomial::chao1(freq)?.unseen()
        } else {
            0.0
        };
        let pseudo_species = unseen.ceil() as u64;
        let n = freq.n() as f64;
        let missing_mass = if pseudo_species == 0 {
            0.0
        } else {
            (freq.singletons() as f64 / n).min((n - 1.0) / n)
        };
        Ok(AbundanceResampler {
            n: freq.n(),
            counts: freq.species_counts(),
            missing_mass,
            pseudo_species,
        })
    }

    pub fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<AbundanceFrequencies> {
        let mut tally: HashMap<u64, u64> = HashMap::new();
        let unseen_draws = binomial(rng, self.n, self.missing_mass);
        let mut remaining = self.n - unseen_draws;
        // detected species keep their relative proportions
        let mut weight_left: u64 = self.counts.iter().sum();
        for &c in &self.counts {
            if remaining == 0 {
                break;
            }
            let x = if weight_left == c {
                remaining
            } else {
                binomial(rng, remaining, c as f64 / weight_left as f64)
            };
            if x > 0 {
                *tally.entry(x).or_insert(0) += 1;
            }
            remaining -= x;
            weight_left -= c;
        }
        for occupancy in scatter(rng, unseen_draws, self.pseudo_species, u64::MAX) {
            *tally.entry(occupancy).or_insert(0) += 1;
        }
        AbundanceFrequencies::from_counts(tally)
    }
}

#[derive(Debug, Clone)]
pub struct IncidenceResampler {
    units: u64,
    rates: Vec<f64>,
    pseudo_species: u64,
    pseudo_rate: f64,
}

impl IncidenceResampler {
    pub fn new(freq: &IncidenceFrequencies) -> Result<Self> {
        if freq.n() == 0 {
            return Err(Error::undefined("cannot resample an empty campaign"));
        }
        let n = freq.n() as f64;
        let richness = incidence::chao2(freq)?;
        let pseudo_species = richness.unseen().ceil() as u64;
        let discovery = if freq.v() > 0 && pseudo_species > 0 {
            incidence::incidence_discovery(freq, &richness)?.estimate
        } else {
            0.0
        };
        let rates = freq
            .species_counts()
            .into_iter()
            .map(|y| (y as f64 / n * (1.0 - discovery)).clamp(0.0, 1.0))
            .collect();
        let pseudo_rate = if pseudo_species == 0 {
            0.0
        } else {
            (discovery * freq.v() as f64 / (n * pseudo_species as f64)).clamp(0.0, 1.0)
        };
        Ok(IncidenceResampler {
            units: freq.n(),
            rates,
            pseudo_species,
            pseudo_rate,
        })
    }

    pub fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<IncidenceFrequencies> {
        let mut tally: HashMap<u64, u64> = HashMap::new();
        for &p in &self.rates {
            let y = binomial(rng, self.units, p);
            if y > 0 {
                *tally.entry(y).or_insert(0) += 1;
            }
        }
        let trials = self.units.saturating_mul(self.pseudo_species);
        let hits = binomial(rng, trials, self.pseudo_rate);
        for occupancy in scatter(rng, hits, self.pseudo_species, self.units) {
            *tally.entry(occupancy).or_insert(0) += 1;
        }
        IncidenceFrequencies::from_counts(self.units, tally)
    }
}

fn binomial<R: Rng + ?Sized>(rng: &mut R, trials: u64, p: f64) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    Binomial::new(trials, p)
        .expect("probability checked above")
        .sample(rng)
}

/// Throws `balls` uniformly into `bins` equally likely bins and returns the
/// non-zero occupancies, each capped at `cap`.
fn scatter<R: Rng + ?Sized>(rng: &mut R, balls: u64, bins: u64, cap: u64) -> Vec<u64> {
    if balls == 0 || bins == 0 {
        return Vec::new();
    }
    let mut occupied: HashMap<u64, u64> = HashMap::new();
    for _ in 0..balls {
        *occupied.entry(rng.random_range(0..bins)).or_insert(0) += 1;
    }
    let mut out: Vec<u64> = occupied.into_values().map(|c| c.min(cap)).collect();
    out.sort_unstable();
    out
}

/// Type-7 (linear interpolation) quantile of sorted data.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap interval for `statistic` on `snapshot`.
pub fn bootstrap_ci(
    snapshot: &FrequencySnapshot,
    statistic: Statistic,
    cfg: &BootstrapConfig,
) -> Result<BootstrapInterval> {
    cfg.validate()?;
    let resampler = Resampler::new(snapshot)?;
    let draws: Vec<Option<f64>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            resampler
                .resample(&mut rng)
                .and_then(|s| statistic.evaluate(&s))
                .ok()
                .filter(|v| v.is_finite())
        })
        .collect();
    let mut values: Vec<f64> = draws.into_iter().flatten().collect();
    if values.is_empty() {
        return Err(Error::undefined(format!(
            "{statistic} is undefined on every bootstrap resample"
        )));
    }
    values.sort_unstable_by(f64::total_cmp);
    let defined = values.len();
    let degraded = 2 * defined < cfg.replicates;
    if degraded {
        warn!(
            "{statistic} defined on only {defined} of {} resamples; interval uses those alone",
            cfg.replicates
        );
    }
    let alpha = 1.0 - cfg.level;
    Ok(BootstrapInterval {
        lower: quantile(&values, alpha / 2.0),
        upper: quantile(&values, 1.0 - alpha / 2.0),
        level: cfg.level,
        median: quantile(&values, 0.5),
        defined,
        replicates: cfg.replicates,
        degraded,
    })
}
