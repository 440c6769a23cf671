//! Species observations and their frequency-count summaries.
//!
//! A campaign is summarised by how often each discovered species was seen.
//! Under the multinomial model every input belongs to exactly one species and
//! the per-species tallies are abundance counts; under the Bernoulli product
//! model an input may report several species and the tallies are incidence
//! counts (row sums of the never-materialised incidence matrix).
//!
//! Estimators only need the frequency counts `f_k` (or `Q_k`): the number of
//! species seen exactly `k` times. [`SpeciesAccumulator`] maintains those
//! incrementally, so taking a snapshot costs `O(#distinct k)` rather than
//! `O(S(n))`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hasher;
use std::str::FromStr;

use fnv::{FnvHashMap, FnvHasher};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stable identity of a species.
///
/// Identifiers reported by a fuzzer (path ids, statement ids, crash sites) are
/// folded into a 64-bit FNV-1a hash of their UTF-8 bytes. The hash is stable
/// across platforms and releases. Two distinct identifiers collide with
/// probability about `S^2 / 2^65`, i.e. below `1e-7` for a million species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpeciesId(u64);

impl SpeciesId {
    pub const fn from_raw(raw: u64) -> Self {
        SpeciesId(raw)
    }

    pub fn from_token(token: &str) -> Self {
        let mut hasher = FnvHasher::default();
        hasher.write(token.as_bytes());
        SpeciesId(hasher.finish())
    }

    pub const fn raw(self) -> u64 {
        self.0
    }
}

impl fmt::Display for SpeciesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// How inputs relate to species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingModel {
    /// Each input belongs to exactly one species.
    Multinomial,
    /// Each input may belong to any number of species.
    Incidence,
}

impl fmt::Display for SamplingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplingModel::Multinomial => "multinomial",
            SamplingModel::Incidence => "incidence",
        })
    }
}

impl FromStr for SamplingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multinomial" | "abundance" => Ok(SamplingModel::Multinomial),
            "incidence" | "bernoulli" => Ok(SamplingModel::Incidence),
            other => Err(Error::invalid(format!("unknown sampling model `{other}`"))),
        }
    }
}

/// Streaming per-species tally for one campaign.
///
/// Inputs that report no species (incidence mode only) still count towards
/// the number of generated inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeciesAccumulator {
    model: SamplingModel,
    counts: FnvHashMap<SpeciesId, u64>,
    // k -> number of species observed exactly k times; zero entries are removed.
    tally: FnvHashMap<u64, u64>,
    inputs: u64,
    incidences: u64,
}

impl SpeciesAccumulator {
    pub fn new(model: SamplingModel) -> Self {
        SpeciesAccumulator {
            model,
            counts: FnvHashMap::default(),
            tally: FnvHashMap::default(),
            inputs: 0,
            incidences: 0,
        }
    }

    pub fn multinomial() -> Self {
        Self::new(SamplingModel::Multinomial)
    }

    pub fn incidence() -> Self {
        Self::new(SamplingModel::Incidence)
    }

    pub fn model(&self) -> SamplingModel {
        self.model
    }

    /// Number of generated inputs `n`.
    pub fn inputs(&self) -> u64 {
        self.inputs
    }

    /// Number of discovered species `S(n)`.
    pub fn discovered(&self) -> u64 {
        self.counts.len() as u64
    }

    /// Incidence total `V`; equals `n` in multinomial mode.
    pub fn incidences(&self) -> u64 {
        self.incidences
    }

    pub fn count(&self, species: SpeciesId) -> u64 {
        self.counts.get(&species).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> impl Iterator<Item = (SpeciesId, u64)> + '_ {
        self.counts.iter().map(|(&id, &c)| (id, c))
    }

    pub fn is_empty(&self) -> bool {
        self.inputs == 0
    }

    /// Records one generated input and the set of species it belongs to.
    ///
    /// Duplicates within one input are counted once. In multinomial mode the
    /// set must contain exactly one species.
    pub fn observe<I>(&mut self, species: I) -> Result<()>
    where
        I: IntoIterator<Item = SpeciesId>,
    {
        let mut set: Vec<SpeciesId> = species.into_iter().collect();
        set.sort_unstable();
        set.dedup();
        if self.model == SamplingModel::Multinomial && set.len() != 1 {
            return Err(Error::ModeViolation(format!(
                "multinomial input must belong to exactly one species, got {}",
                set.len()
            )));
        }
        self.inputs += 1;
        for id in set {
            self.bump(id);
        }
        Ok(())
    }

    /// Records an input that belongs to exactly one species. Valid in both modes.
    pub fn observe_one(&mut self, species: SpeciesId) {
        self.inputs += 1;
        self.bump(species);
    }

    /// Records a set of species already known to be distinct.
    pub(crate) fn observe_distinct(&mut self, species: &[SpeciesId]) {
        debug_assert!(self.model == SamplingModel::Incidence || species.len() == 1);
        self.inputs += 1;
        for &id in species {
            self.bump(id);
        }
    }

    fn bump(&mut self, id: SpeciesId) {
        self.incidences += 1;
        let count = self.counts.entry(id).or_insert(0);
        let old = *count;
        *count += 1;
        if old > 0 {
            let slot = self.tally.get_mut(&old).expect("tally tracks every count");
            *slot -= 1;
            if *slot == 0 {
                self.tally.remove(&old);
            }
        }
        *self.tally.entry(old + 1).or_insert(0) += 1;
    }

    fn frequency_map(&self) -> BTreeMap<u64, u64> {
        self.tally.iter().map(|(&k, &f)| (k, f)).collect()
    }

    pub fn snapshot_abundance(&self) -> Result<AbundanceFrequencies> {
        if self.model != SamplingModel::Multinomial {
            return Err(Error::WrongModel {
                model: self.model,
                requested: SamplingModel::Multinomial,
            });
        }
        Ok(AbundanceFrequencies {
            n: self.inputs,
            s_obs: self.discovered(),
            f: self.frequency_map(),
            tail: None,
            s_known: None,
        })
    }

    pub fn snapshot_incidence(&self) -> Result<IncidenceFrequencies> {
        if self.model != SamplingModel::Incidence {
            return Err(Error::WrongModel {
                model: self.model,
                requested: SamplingModel::Incidence,
            });
        }
        Ok(IncidenceFrequencies {
            n: self.inputs,
            s_obs: self.discovered(),
            q: self.frequency_map(),
            v: self.incidences,
            tail: None,
            s_known: None,
        })
    }

    /// Snapshot in whichever model this accumulator records.
    pub fn snapshot(&self) -> FrequencySnapshot {
        match self.model {
            SamplingModel::Multinomial => {
                FrequencySnapshot::Abundance(self.snapshot_abundance().expect("model checked"))
            }
            SamplingModel::Incidence => {
                FrequencySnapshot::Incidence(self.snapshot_incidence().expect("model checked"))
            }
        }
    }
}

/// Species whose exact counts are unknown beyond being at least five.
///
/// Snapshot logs carry only `f1..f4`; the remaining discovered species and
/// the inputs (or incidences) they account for are kept in aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyTail {
    pub species: u64,
    pub total: u64,
}

/// Smallest count that may fall into a [`FrequencyTail`].
pub const TAIL_MIN_COUNT: u64 = 5;

fn leading_table(leading: [u64; 4]) -> BTreeMap<u64, u64> {
    leading
        .iter()
        .enumerate()
        .filter(|(_, &f)| f > 0)
        .map(|(i, &f)| (i as u64 + 1, f))
        .collect()
}

fn weighted_sum(table: &BTreeMap<u64, u64>) -> Option<u64> {
    table
        .iter()
        .try_fold(0u64, |acc, (&k, &f)| k.checked_mul(f).and_then(|x| acc.checked_add(x)))
}

fn tail_from_leading(
    table: &BTreeMap<u64, u64>,
    s_obs: u64,
    total: u64,
    what: &str,
) -> Result<Option<FrequencyTail>> {
    let listed: u64 = table.values().sum();
    let weighted = weighted_sum(table)
        .ok_or_else(|| Error::InvalidFrequencies("frequency counts overflow".into()))?;
    if listed > s_obs {
        return Err(Error::InvalidFrequencies(format!(
            "sum of frequency counts ({listed}) exceeds discovered species ({s_obs})"
        )));
    }
    if weighted > total {
        return Err(Error::InvalidFrequencies(format!(
            "frequency counts account for {weighted} {what} but only {total} were recorded"
        )));
    }
    let species = s_obs - listed;
    let rest = total - weighted;
    if species == 0 {
        if rest != 0 {
            return Err(Error::InvalidFrequencies(format!(
                "{rest} {what} are not attributed to any species"
            )));
        }
        return Ok(None);
    }
    if rest < TAIL_MIN_COUNT * species {
        return Err(Error::InvalidFrequencies(format!(
            "{species} species outside f1..f4 need at least {} {what}, found {rest}",
            TAIL_MIN_COUNT * species
        )));
    }
    Ok(Some(FrequencyTail {
        species,
        total: rest,
    }))
}

fn check_known(s_known: u64, s_obs: u64) -> Result<()> {
    if s_known < s_obs {
        return Err(Error::InvalidFrequencies(format!(
            "known richness {s_known} is below discovered species {s_obs}"
        )));
    }
    Ok(())
}

/// Per-species counts implied by a frequency table, ascending.
/// Tail species share the tail total as evenly as possible.
fn expand_counts(table: &BTreeMap<u64, u64>, tail: Option<FrequencyTail>) -> Vec<u64> {
    let mut out = Vec::new();
    for (&k, &f) in table {
        out.extend(std::iter::repeat_n(k, f as usize));
    }
    if let Some(t) = tail {
        let base = t.total / t.species;
        let extra = t.total % t.species;
        out.extend(std::iter::repeat_n(base, (t.species - extra) as usize));
        out.extend(std::iter::repeat_n(base + 1, extra as usize));
    }
    out.sort_unstable();
    out
}

/// Multinomial-model summary: `n`, `S(n)` and the abundance frequency counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbundanceFrequencies {
    n: u64,
    s_obs: u64,
    f: BTreeMap<u64, u64>,
    tail: Option<FrequencyTail>,
    s_known: Option<u64>,
}

impl AbundanceFrequencies {
    /// Builds a complete summary from `(k, f_k)` pairs; `n = Σ k·f_k`.
    pub fn from_counts<I>(counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut f = BTreeMap::new();
        for (k, fk) in counts {
            if k == 0 {
                return Err(Error::InvalidFrequencies("f_0 is never observed".into()));
            }
            if fk > 0 {
                *f.entry(k).or_insert(0) += fk;
            }
        }
        let n = weighted_sum(&f)
            .ok_or_else(|| Error::InvalidFrequencies("frequency counts overflow".into()))?;
        let s_obs = f.values().sum();
        Ok(AbundanceFrequencies {
            n,
            s_obs,
            f,
            tail: None,
            s_known: None,
        })
    }

    /// Builds a summary from the aggregate fields a fuzzer logs:
    /// `n`, `S(n)` and `f1..f4`. Species seen five or more times are kept
    /// as a [`FrequencyTail`].
    pub fn from_leading(n: u64, s_obs: u64, leading: [u64; 4]) -> Result<Self> {
        let f = leading_table(leading);
        let tail = tail_from_leading(&f, s_obs, n, "inputs")?;
        Ok(AbundanceFrequencies {
            n,
            s_obs,
            f,
            tail,
            s_known: None,
        })
    }

    /// Attaches a known total richness (e.g. the number of instrumented goals).
    pub fn with_known_richness(mut self, s_known: u64) -> Result<Self> {
        check_known(s_known, self.s_obs)?;
        self.s_known = Some(s_known);
        Ok(self)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn s_obs(&self) -> u64 {
        self.s_obs
    }

    /// Frequency count `f_k`. Counts inside the tail are not resolved and read as zero.
    pub fn f(&self, k: u64) -> u64 {
        self.f.get(&k).copied().unwrap_or(0)
    }

    pub fn singletons(&self) -> u64 {
        self.f(1)
    }

    pub fn doubletons(&self) -> u64 {
        self.f(2)
    }

    pub fn s_known(&self) -> Option<u64> {
        self.s_known
    }

    pub fn tail(&self) -> Option<FrequencyTail> {
        self.tail
    }

    /// Non-zero `(k, f_k)` pairs in ascending `k`.
    pub fn frequencies(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.f.iter().map(|(&k, &f)| (k, f))
    }

    /// One count per discovered species, ascending.
    pub fn species_counts(&self) -> Vec<u64> {
        expand_counts(&self.f, self.tail)
    }
}

/// Bernoulli-product-model summary: sampling units `n`, `S(n)`, the incidence
/// frequency counts `Q_k` and the incidence total `V = Σ k·Q_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncidenceFrequencies {
    n: u64,
    s_obs: u64,
    q: BTreeMap<u64, u64>,
    v: u64,
    tail: Option<FrequencyTail>,
    s_known: Option<u64>,
}

impl IncidenceFrequencies {
    /// Builds a complete summary over `units` sampling units from `(k, Q_k)` pairs.
    pub fn from_counts<I>(units: u64, counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut q = BTreeMap::new();
        for (k, qk) in counts {
            if k == 0 {
                return Err(Error::InvalidFrequencies("Q_0 is never observed".into()));
            }
            if k > units && qk > 0 {
                return Err(Error::InvalidFrequencies(format!(
                    "a species cannot occur in {k} of {units} sampling units"
                )));
            }
            if qk > 0 {
                *q.entry(k).or_insert(0) += qk;
            }
        }
        let v = weighted_sum(&q)
            .ok_or_else(|| Error::InvalidFrequencies("frequency counts overflow".into()))?;
        let s_obs = q.values().sum();
        Ok(IncidenceFrequencies {
            n: units,
            s_obs,
            q,
            v,
            tail: None,
            s_known: None,
        })
    }

    /// Builds a summary from logged aggregates: `n`, `S(n)`, `Q1..Q4` and `V`.
    pub fn from_leading(n: u64, s_obs: u64, leading: [u64; 4], v: u64) -> Result<Self> {
        let q = leading_table(leading);
        if let Some((&k, _)) = q.iter().next_back() {
            if k > n {
                return Err(Error::InvalidFrequencies(format!(
                    "a species cannot occur in {k} of {n} sampling units"
                )));
            }
        }
        let tail = tail_from_leading(&q, s_obs, v, "incidences")?;
        if let Some(t) = tail {
            if t.total > t.species.saturating_mul(n) {
                return Err(Error::InvalidFrequencies(format!(
                    "{} species cannot account for {} incidences over {n} units",
                    t.species, t.total
                )));
            }
        }
        Ok(IncidenceFrequencies {
            n,
            s_obs,
            q,
            v,
            tail,
            s_known: None,
        })
    }

    pub fn with_known_richness(mut self, s_known: u64) -> Result<Self> {
        check_known(s_known, self.s_obs)?;
        self.s_known = Some(s_known);
        Ok(self)
    }

    /// Number of sampling units (generated inputs).
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn s_obs(&self) -> u64 {
        self.s_obs
    }

    pub fn q(&self, k: u64) -> u64 {
        self.q.get(&k).copied().unwrap_or(0)
    }

    /// Incidence total `V`.
    pub fn v(&self) -> u64 {
        self.v
    }

    pub fn s_known(&self) -> Option<u64> {
        self.s_known
    }

    pub fn tail(&self) -> Option<FrequencyTail> {
        self.tail
    }

    pub fn frequencies(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.q.iter().map(|(&k, &q)| (k, q))
    }

    /// One incidence count `Y_i` per discovered species, ascending.
    pub fn species_counts(&self) -> Vec<u64> {
        expand_counts(&self.q, self.tail)
    }
}

/// A frequency summary in either model.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FrequencySnapshot {
    #[serde(rename = "multinomial")]
    Abundance(AbundanceFrequencies),
    #[serde(rename = "incidence")]
    Incidence(IncidenceFrequencies),
}

impl FrequencySnapshot {
    pub fn model(&self) -> SamplingModel {
        match self {
            FrequencySnapshot::Abundance(_) => SamplingModel::Multinomial,
            FrequencySnapshot::Incidence(_) => SamplingModel::Incidence,
        }
    }

    pub fn n(&self) -> u64 {
        match self {
            FrequencySnapshot::Abundance(f) => f.n(),
            FrequencySnapshot::Incidence(q) => q.n(),
        }
    }

    pub fn s_obs(&self) -> u64 {
        match self {
            FrequencySnapshot::Abundance(f) => f.s_obs(),
            FrequencySnapshot::Incidence(q) => q.s_obs(),
        }
    }

    /// `f_k` or `Q_k`, depending on the model.
    pub fn count(&self, k: u64) -> u64 {
        match self {
            FrequencySnapshot::Abundance(f) => f.f(k),
            FrequencySnapshot::Incidence(q) => q.q(k),
        }
    }

    pub fn s_known(&self) -> Option<u64> {
        match self {
            FrequencySnapshot::Abundance(f) => f.s_known(),
            FrequencySnapshot::Incidence(q) => q.s_known(),
        }
    }

    pub fn with_known_richness(self, s_known: u64) -> Result<Self> {
        Ok(match self {
            FrequencySnapshot::Abundance(f) => {
                FrequencySnapshot::Abundance(f.with_known_richness(s_known)?)
            }
            FrequencySnapshot::Incidence(q) => {
                FrequencySnapshot::Incidence(q.with_known_richness(s_known)?)
            }
        })
    }

    pub fn as_abundance(&self) -> Result<&AbundanceFrequencies> {
        match self {
            FrequencySnapshot::Abundance(f) => Ok(f),
            FrequencySnapshot::Incidence(_) => Err(Error::WrongModel {
                model: SamplingModel::Incidence,
                requested: SamplingModel::Multinomial,
            }),
        }
    }

    pub fn as_incidence(&self) -> Result<&IncidenceFrequencies> {
        match self {
            FrequencySnapshot::Incidence(q) => Ok(q),
            FrequencySnapshot::Abundance(_) => Err(Error::WrongModel {
                model: SamplingModel::Multinomial,
                requested: SamplingModel::Incidence,
            }),
        }
    }
}

impl From<AbundanceFrequencies> for FrequencySnapshot {
    fn from(f: AbundanceFrequencies) -> Self {
        FrequencySnapshot::Abundance(f)
    }
}

impl From<IncidenceFrequencies> for FrequencySnapshot {
    fn from(q: IncidenceFrequencies) -> Self {
        FrequencySnapshot::Incidence(q)
    }
}

/// Tallies a plain `species -> count` map into `(k, f_k)` pairs.
pub fn tally_counts<K>(counts: &HashMap<K, u64>) -> BTreeMap<u64, u64> {
    let mut out = BTreeMap::new();
    for &c in counts.values().filter(|&&c| c > 0) {
        *out.entry(c).or_insert(0) += 1;
    }
    out
}
