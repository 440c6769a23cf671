//! Synthetic campaigns with known ground truth.
//!
//! A [`SyntheticAssemblage`] fixes the true richness and abundances; a
//! [`Campaign`] samples inputs from it and tracks the true discovery
//! probability. Campaigns are driven by a ChaCha20 stream (`rand_chacha`)
//! seeded from a `u64`, and a campaign can be continued at any point: running
//! `n` inputs and then `m` more yields exactly the same inputs as running
//! `n + m` at once.
//!
//! Multinomial inputs are drawn by inverting the cumulative abundance vector
//! with one uniform variate per input. Incidence inputs treat every species as
//! an independent Bernoulli trial per input; instead of `S` trials per input
//! each species carries its next occurrence, drawn from a geometric gap.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::EventWriter;
use crate::frequency::{FrequencySnapshot, SamplingModel, SpeciesAccumulator, SpeciesId};

/// Shape of the abundance (or detection-rate) vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AbundanceDistribution {
    Uniform,
    /// Weight of species `i` (0-based) is `ratio^i`, `0 < ratio ≤ 1`.
    Geometric { ratio: f64 },
    /// Weight of species `i` (0-based) is `(i+1)^−exponent`.
    Zipf { exponent: f64 },
    Custom { weights: Vec<f64> },
}

impl fmt::Display for AbundanceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbundanceDistribution::Uniform => f.write_str("uniform"),
            AbundanceDistribution::Geometric { ratio } => write!(f, "geometric:{ratio}"),
            AbundanceDistribution::Zipf { exponent } => write!(f, "zipf:{exponent}"),
            AbundanceDistribution::Custom { weights } => write!(f, "custom[{}]", weights.len()),
        }
    }
}

impl FromStr for AbundanceDistribution {
    type Err = Error;

    /// `uniform`, `geometric:<ratio>` or `zipf:<exponent>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((name, p)) => (name, Some(p)),
            None => (s, None),
        };
        let value = |default: f64| -> Result<f64> {
            param.map_or(Ok(default), |p| {
                p.parse()
                    .map_err(|_| Error::invalid(format!("bad distribution parameter `{p}`")))
            })
        };
        match name {
            "uniform" => Ok(AbundanceDistribution::Uniform),
            "geometric" => Ok(AbundanceDistribution::Geometric {
                ratio: value(0.99)?,
            }),
            "zipf" => Ok(AbundanceDistribution::Zipf {
                exponent: value(1.2)?,
            }),
            other => Err(Error::invalid(format!("unknown distribution `{other}`"))),
        }
    }
}

impl AbundanceDistribution {
    fn weights(&self, species: usize) -> Result<Vec<f64>> {
        let w: Vec<f64> = match self {
            AbundanceDistribution::Uniform => vec![1.0; species],
            AbundanceDistribution::Geometric { ratio } => {
                if !(*ratio > 0.0 && *ratio <= 1.0) {
                    return Err(Error::invalid(format!(
                        "geometric ratio must lie in (0, 1], got {ratio}"
                    )));
                }
                (0..species).map(|i| ratio.powi(i as i32)).collect()
            }
            AbundanceDistribution::Zipf { exponent } => {
                if !(*exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::invalid(format!(
                        "zipf exponent must be positive, got {exponent}"
                    )));
                }
                (0..species)
                    .map(|i| ((i + 1) as f64).powf(-exponent))
                    .collect()
            }
            AbundanceDistribution::Custom { weights } => weights.clone(),
        };
        if w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::invalid(
                "every species needs a positive, finite weight (increase the ratio or reduce the species count)",
            ));
        }
        Ok(w)
    }
}

/// Ground-truth assemblage: the true richness and per-species probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticAssemblage {
    model: SamplingModel,
    distribution: AbundanceDistribution,
    p: Vec<f64>,
}

impl SyntheticAssemblage {
    /// Relative abundances summing to one.
    pub fn multinomial(species: usize, distribution: AbundanceDistribution) -> Result<Self> {
        if species == 0 {
            return Err(Error::invalid("an assemblage needs at least one species"));
        }
        let w = distribution.weights(species)?;
        let total: f64 = w.iter().sum();
        let p = w.into_iter().map(|x| x / total).collect();
        Ok(SyntheticAssemblage {
            model: SamplingModel::Multinomial,
            distribution,
            p,
        })
    }

    /// Independent per-input detection rates; the most frequent species is
    /// detected with probability `max_rate`. Custom weights are used as rates
    /// directly and must lie in `(0, 1]`.
    pub fn incidence(
        species: usize,
        distribution: AbundanceDistribution,
        max_rate: f64,
    ) -> Result<Self> {
        if species == 0 {
            return Err(Error::invalid("an assemblage needs at least one species"));
        }
        let p = match &distribution {
            AbundanceDistribution::Custom { weights } => {
                if weights.len() != species {
                    return Err(Error::invalid("custom rates must list every species"));
                }
                distribution.weights(species)?
            }
            _ => {
                if !(max_rate > 0.0 && max_rate <= 1.0) {
                    return Err(Error::invalid(format!(
                        "maximum detection rate must lie in (0, 1], got {max_rate}"
                    )));
                }
                let w = distribution.weights(species)?;
                let top = w.iter().copied().fold(0.0, f64::max);
                w.into_iter().map(|x| max_rate * x / top).collect()
            }
        };
        if p.iter().any(|&x| x > 1.0) {
            return Err(Error::invalid("detection rates must not exceed 1"));
        }
        Ok(SyntheticAssemblage {
            model: SamplingModel::Incidence,
            distribution,
            p,
        })
    }

    pub fn model(&self) -> SamplingModel {
        self.model
    }

    pub fn distribution(&self) -> &AbundanceDistribution {
        &self.distribution
    }

    /// True total richness `S`.
    pub fn richness(&self) -> usize {
        self.p.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }
}

/// Feedback-directed sampling bias: on first discovery of species `i`, the
/// probabilities of species `i+1 ..= i+neighbor_degree` (cyclically) are
/// multiplied by `boost`. Multinomial abundances are renormalised afterwards;
/// incidence rates are capped at one.
///
/// The defaults are synthetic and not calibrated against any fuzzer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdaptiveBiasConfig {
    pub enabled: bool,
    pub boost: f64,
    pub neighbor_degree: usize,
}

impl Default for AdaptiveBiasConfig {
    fn default() -> Self {
        AdaptiveBiasConfig {
            enabled: false,
            boost: 2.0,
            neighbor_degree: 2,
        }
    }
}

impl AdaptiveBiasConfig {
    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn neighbor_boost(boost: f64, neighbor_degree: usize) -> Result<Self> {
        if !(boost > 1.0 && boost.is_finite()) {
            return Err(Error::invalid(format!("bias boost must exceed 1, got {boost}")));
        }
        Ok(AdaptiveBiasConfig {
            enabled: true,
            boost,
            neighbor_degree,
        })
    }
}

/// Event-file token of simulated species `index`.
pub fn species_token(index: usize) -> String {
    format!("sp{index}")
}

/// State of the campaign at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub inputs: u64,
    pub discovered: u64,
    /// True `U(n)`: probability mass of species not yet discovered.
    pub true_discovery: f64,
    pub snapshot: FrequencySnapshot,
}

#[derive(Debug, Clone)]
enum Sampler {
    Categorical {
        cumulative: Vec<f64>,
    },
    Bernoulli {
        // (next input index, species, generation); stale generations are skipped
        queue: BinaryHeap<Reverse<(u64, u32, u32)>>,
        generation: Vec<u32>,
    },
}

/// A running simulated campaign.
#[derive(Debug, Clone)]
pub struct Campaign {
    model: SamplingModel,
    p: Vec<f64>,
    ids: Vec<SpeciesId>,
    discovered: Vec<bool>,
    bias: AdaptiveBiasConfig,
    rng: ChaCha20Rng,
    acc: SpeciesAccumulator,
    sampler: Sampler,
    current: Vec<usize>,
    fresh: Vec<usize>,
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|&x| {
            acc += x;
            acc
        })
        .collect()
}

/// Inputs until the next occurrence of a species with per-input rate `p`.
fn geometric_gap<R: Rng>(rng: &mut R, p: f64) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let gap = 1.0 + (u.ln() / (-p).ln_1p()).floor();
    if gap >= u64::MAX as f64 {
        u64::MAX
    } else {
        gap as u64
    }
}

impl Campaign {
    pub fn new(assemblage: &SyntheticAssemblage, bias: AdaptiveBiasConfig, seed: u64) -> Result<Self> {
        if bias.enabled && !(bias.boost > 1.0) {
            return Err(Error::invalid("bias boost must exceed 1"));
        }
        let species = assemblage.richness();
        if species > u32::MAX as usize {
            return Err(Error::invalid("too many species"));
        }
        let p = assemblage.probabilities().to_vec();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let sampler = match assemblage.model() {
            SamplingModel::Multinomial => Sampler::Categorical {
                cumulative: cumulative(&p),
            },
            SamplingModel::Incidence => {
                let mut queue = BinaryHeap::with_capacity(species);
                for (i, &rate) in p.iter().enumerate() {
                    let next = geometric_gap(&mut rng, rate);
                    queue.push(Reverse((next, i as u32, 0)));
                }
                Sampler::Bernoulli {
                    queue,
                    generation: vec![0; species],
                }
            }
        };
        Ok(Campaign {
            model: assemblage.model(),
            ids: (0..species)
                .map(|i| SpeciesId::from_token(&species_token(i)))
                .collect(),
            discovered: vec![false; species],
            p,
            bias,
            rng,
            acc: SpeciesAccumulator::new(assemblage.model()),
            sampler,
            current: Vec::new(),
            fresh: Vec::new(),
        })
    }

    pub fn model(&self) -> SamplingModel {
        self.model
    }

    pub fn inputs(&self) -> u64 {
        self.acc.inputs()
    }

    pub fn discovered(&self) -> u64 {
        self.acc.discovered()
    }

    pub fn accumulator(&self) -> &SpeciesAccumulator {
        &self.acc
    }

    /// Current (possibly bias-adjusted) species probabilities.
    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn species_id(&self, index: usize) -> SpeciesId {
        self.ids[index]
    }

    /// True discovery probability `U(n) = Σ p_i·[undiscovered] / Σ p_i`.
    pub fn true_discovery_probability(&self) -> f64 {
        let total: f64 = self.p.iter().sum();
        let missing: f64 = self
            .p
            .iter()
            .zip(&self.discovered)
            .filter(|(_, &d)| !d)
            .map(|(&p, _)| p)
            .sum();
        missing / total
    }

    /// Generates one input and returns the indices of the species it belongs
    /// to, ascending.
    pub fn step(&mut self) -> &[usize] {
        self.current.clear();
        let unit = self.acc.inputs() + 1;
        match &mut self.sampler {
            Sampler::Categorical { cumulative } => {
                let u: f64 = self.rng.random::<f64>() * cumulative[cumulative.len() - 1];
                let i = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
                self.current.push(i);
            }
            Sampler::Bernoulli { queue, generation } => {
                while let Some(&Reverse((next, i, gen))) = queue.peek() {
                    if next > unit {
                        break;
                    }
                    queue.pop();
                    if gen != generation[i as usize] {
                        continue;
                    }
                    self.current.push(i as usize);
                    let gap = geometric_gap(&mut self.rng, self.p[i as usize]);
                    queue.push(Reverse((unit.saturating_add(gap), i, gen)));
                }
                self.current.sort_unstable();
            }
        }

        self.fresh.clear();
        for &i in &self.current {
            if !self.discovered[i] {
                self.discovered[i] = true;
                self.fresh.push(i);
            }
        }
        match self.model {
            SamplingModel::Multinomial => self.acc.observe_one(self.ids[self.current[0]]),
            SamplingModel::Incidence => {
                let ids: Vec<SpeciesId> = self.current.iter().map(|&i| self.ids[i]).collect();
                self.acc.observe_distinct(&ids);
            }
        }
        if self.bias.enabled && !self.fresh.is_empty() {
            let fresh = std::mem::take(&mut self.fresh);
            for &i in &fresh {
                self.boost_neighbors(i, unit);
            }
            self.fresh = fresh;
        }
        &self.current
    }

    fn boost_neighbors(&mut self, species: usize, unit: u64) {
        let s = self.p.len();
        let degree = self.bias.neighbor_degree.min(s.saturating_sub(1));
        let neighbors = (1..=degree).map(|d| (species + d) % s);
        match &mut self.sampler {
            Sampler::Categorical { cumulative } => {
                for j in neighbors {
                    self.p[j] *= self.bias.boost;
                }
                let total: f64 = self.p.iter().sum();
                for x in &mut self.p {
                    *x /= total;
                }
                *cumulative = self::cumulative(&self.p);
            }
            Sampler::Bernoulli { queue, generation } => {
                for j in neighbors {
                    self.p[j] = (self.p[j] * self.bias.boost).min(1.0);
                    generation[j] = generation[j].wrapping_add(1);
                    let gap = geometric_gap(&mut self.rng, self.p[j]);
                    queue.push(Reverse((unit.saturating_add(gap), j as u32, generation[j])));
                }
            }
        }
    }

    /// Generates `m` more inputs.
    pub fn advance(&mut self, m: u64) {
        for _ in 0..m {
            self.step();
        }
    }

    /// Generates `m` more inputs, handing each input's species to `sink`.
    pub fn advance_with<F: FnMut(&[usize])>(&mut self, m: u64, mut sink: F) {
        for _ in 0..m {
            let species = self.step();
            sink(species);
        }
    }

    pub fn checkpoint(&self) -> TrajectoryPoint {
        TrajectoryPoint {
            inputs: self.inputs(),
            discovered: self.discovered(),
            true_discovery: self.true_discovery_probability(),
            snapshot: self.acc.snapshot(),
        }
    }

    /// Generates `m` more inputs and writes them as event-file lines.
    pub fn write_events<W: Write>(&mut self, m: u64, writer: &mut EventWriter<W>) -> Result<()> {
        for _ in 0..m {
            let species = self.step();
            writer.input(species.iter().map(|&i| species_token(i)))?;
        }
        Ok(())
    }

    /// Advances through the given absolute input counts (ascending), recording
    /// a trajectory point at each. Counts already passed are skipped.
    pub fn run_to(&mut self, checkpoints: &[u64]) -> Vec<TrajectoryPoint> {
        let mut out = Vec::with_capacity(checkpoints.len());
        for &target in checkpoints {
            if target < self.inputs() {
                continue;
            }
            self.advance(target - self.inputs());
            out.push(self.checkpoint());
        }
        out
    }
}

/// Samples a fresh campaign of `n` inputs; returns the campaign state (for
/// continuation) and its trajectory at `checkpoints` plus `n` itself.
pub fn sample_campaign(
    assemblage: &SyntheticAssemblage,
    n: u64,
    bias: AdaptiveBiasConfig,
    seed: u64,
    checkpoints: &[u64],
) -> Result<(Campaign, Vec<TrajectoryPoint>)> {
    let mut campaign = Campaign::new(assemblage, bias, seed)?;
    let trajectory = continue_campaign(&mut campaign, n, checkpoints);
    Ok((campaign, trajectory))
}

/// Continues a campaign by `m` inputs. `checkpoints` are absolute input
/// counts; the final count is always recorded.
pub fn continue_campaign(campaign: &mut Campaign, m: u64, checkpoints: &[u64]) -> Vec<TrajectoryPoint> {
    let end = campaign.inputs() + m;
    let mut marks: Vec<u64> = checkpoints
        .iter()
        .copied()
        .filter(|&c| c >= campaign.inputs() && c <= end)
        .collect();
    marks.push(end);
    marks.sort_unstable();
    marks.dedup();
    campaign.run_to(&marks)
}

/// Roughly geometric spacing of `count` checkpoints in `[first, last]`.
pub fn geometric_checkpoints(first: u64, last: u64, count: usize) -> Vec<u64> {
    if count == 0 || last == 0 {
        return Vec::new();
    }
    let first = first.clamp(1, last);
    if count == 1 || first == last {
        return vec![last];
    }
    let ratio = (last as f64 / first as f64).powf(1.0 / (count - 1) as f64);
    let mut out: Vec<u64> = (0..count)
        .map(|i| (first as f64 * ratio.powi(i as i32)).round() as u64)
        .map(|c| c.clamp(first, last))
        .collect();
    *out.last_mut().expect("count > 0") = last;
    out.dedup();
    out
}
