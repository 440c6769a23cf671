//! Estimator performance over repeated campaigns.
//!
//! For `N` runs with estimates `Ŝ_i` and reference values `S_i` at one
//! checkpoint, the report gives
//!
//! ```text
//! mean bias   = Σ_i (Ŝ_i − S_i) / (N·S)
//! imprecision = sqrt( Σ_i ((Ŝ_i − S_i)/S_i − Σ_j (Ŝ_j − S_j)/(N·S))² / (N − 1) )
//! ```
//!
//! where `S` is the mean of the reference values. The bias is scaled, so a
//! bias of −1 corresponds to an estimate of zero. The mean-bias term divides
//! by the common `S` while the imprecision term divides each run by its own
//! `S_i`; both are computed exactly as written, so the two only line up when
//! all runs share one reference value.
//!
//! Per-run terms are sorted before summation, which makes the report
//! independent of the order of the runs.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, ErrorKind, Result};
use crate::frequency::FrequencySnapshot;
use crate::ingest::CampaignSnapshotRow;
use crate::simulator::{sample_campaign, AdaptiveBiasConfig, SyntheticAssemblage, TrajectoryPoint};

/// One observation point of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    pub inputs: u64,
    pub time_s: Option<u64>,
    pub snapshot: FrequencySnapshot,
}

/// Checkpoints of one campaign, ordered by inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignRun {
    pub checkpoints: Vec<Checkpoint>,
    /// Total richness of the sampled assemblage, when known.
    pub true_richness: Option<u64>,
}

impl CampaignRun {
    pub fn new(mut checkpoints: Vec<Checkpoint>, true_richness: Option<u64>) -> Self {
        checkpoints.sort_by_key(|c| c.inputs);
        CampaignRun {
            checkpoints,
            true_richness,
        }
    }

    pub fn from_trajectory(trajectory: &[TrajectoryPoint], true_richness: Option<u64>) -> Self {
        let checkpoints = trajectory
            .iter()
            .map(|p| Checkpoint {
                inputs: p.inputs,
                time_s: None,
                snapshot: p.snapshot.clone(),
            })
            .collect();
        Self::new(checkpoints, true_richness)
    }

    pub fn from_snapshot_rows(rows: &[CampaignSnapshotRow]) -> Result<Self> {
        let checkpoints = rows
            .iter()
            .map(|r| {
                Ok(Checkpoint {
                    inputs: r.n,
                    time_s: Some(r.time_s),
                    snapshot: r.to_snapshot()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self::new(checkpoints, None))
    }

    fn at_inputs(&self, inputs: u64) -> Option<&Checkpoint> {
        self.checkpoints
            .binary_search_by_key(&inputs, |c| c.inputs)
            .ok()
            .map(|i| &self.checkpoints[i])
    }

    fn at_time(&self, time_s: u64) -> Option<&Checkpoint> {
        self.checkpoints.iter().rev().find(|c| c.time_s == Some(time_s))
    }

    /// Checkpoints with their key on `axis`, keeping only the latest one
    /// when several share a key (rows logged within the same second).
    fn keyed(&self, axis: CheckpointAxis) -> Result<Vec<(u64, &Checkpoint)>> {
        let mut out: Vec<(u64, &Checkpoint)> = Vec::with_capacity(self.checkpoints.len());
        for c in &self.checkpoints {
            let key = self.key(c, axis)?;
            match out.last_mut() {
                Some(last) if last.0 == key => *last = (key, c),
                _ => out.push((key, c)),
            }
        }
        Ok(out)
    }

    fn key(&self, checkpoint: &Checkpoint, axis: CheckpointAxis) -> Result<u64> {
        match axis {
            CheckpointAxis::Inputs => Ok(checkpoint.inputs),
            CheckpointAxis::Seconds => checkpoint
                .time_s
                .ok_or_else(|| Error::invalid("checkpoint has no timestamp")),
        }
    }
}

/// What the estimates are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Species discovered by the end of each run.
    #[default]
    FinalEmpirical,
    /// The assemblage's true richness.
    SimulatorTruth,
}

impl std::str::FromStr for Reference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "final-empirical" | "empirical" => Ok(Reference::FinalEmpirical),
            "simulator-truth" | "truth" => Ok(Reference::SimulatorTruth),
            other => Err(Error::invalid(format!("unknown reference `{other}`"))),
        }
    }
}

impl Reference {
    fn value(self, run: &CampaignRun) -> Result<f64> {
        match self {
            Reference::FinalEmpirical => run
                .checkpoints
                .last()
                .map(|c| c.snapshot.s_obs() as f64)
                .ok_or_else(|| Error::invalid("campaign without checkpoints")),
            Reference::SimulatorTruth => run
                .true_richness
                .map(|s| s as f64)
                .ok_or_else(|| Error::invalid("simulator-truth reference needs the true richness")),
        }
    }
}

/// Unit of the report's checkpoint column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckpointAxis {
    #[default]
    Inputs,
    Seconds,
}

/// Extrapolation horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// `m*` additional inputs.
    Inputs(u64),
    /// `t*` additional seconds, converted with `m* = round(n·t*/t)`.
    Seconds(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub checkpoint: u64,
    pub mean_bias: f64,
    pub imprecision: f64,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub axis: CheckpointAxis,
    pub rows: Vec<ReportRow>,
}

impl EvaluationReport {
    pub fn row(&self, checkpoint: u64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.checkpoint == checkpoint)
    }

    /// Writes `checkpoint,mean_bias,imprecision,n_runs` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        let to_io = |e: csv::Error| Error::Io(e.into());
        csv.write_record(["checkpoint", "mean_bias", "imprecision", "n_runs"])
            .map_err(to_io)?;
        for r in &self.rows {
            csv.write_record([
                r.checkpoint.to_string(),
                r.mean_bias.to_string(),
                r.imprecision.to_string(),
                r.n_runs.to_string(),
            ])
            .map_err(to_io)?;
        }
        csv.flush()?;
        Ok(())
    }
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.axis {
            CheckpointAxis::Inputs => "inputs",
            CheckpointAxis::Seconds => "seconds",
        };
        writeln!(f, "{label:>14}  {:>12}  {:>12}  {:>6}", "mean bias", "imprecision", "runs")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>14}  {:>12.6}  {:>12.6}  {:>6}",
                r.checkpoint, r.mean_bias, r.imprecision, r.n_runs
            )?;
        }
        Ok(())
    }
}

fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Mean bias and imprecision of `estimates` against per-run `references`.
pub fn bias_and_imprecision(estimates: &[f64], references: &[f64]) -> Result<(f64, f64)> {
    if estimates.len() != references.len() {
        return Err(Error::invalid("one reference value per estimate is required"));
    }
    let runs = estimates.len();
    if runs < 2 {
        return Err(Error::InsufficientReplication { runs });
    }
    if references.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::undefined("reference richness must be positive"));
    }
    let n = runs as f64;
    let s = sorted_sum(references.to_vec()) / n;
    let errors: Vec<f64> = estimates.iter().zip(references).map(|(e, r)| e - r).collect();
    let mean_bias = sorted_sum(errors.clone()) / (n * s);
    let spread = errors
        .iter()
        .zip(references)
        .map(|(e, r)| (e / r - mean_bias).powi(2))
        .collect();
    let imprecision = (sorted_sum(spread) / (n - 1.0)).sqrt();
    Ok((mean_bias, imprecision))
}

fn assemble(samples: BTreeMap<u64, (Vec<f64>, Vec<f64>)>, axis: CheckpointAxis) -> Result<EvaluationReport> {
    let mut rows = Vec::new();
    for (checkpoint, (est, refs)) in samples {
        if est.len() < 2 {
            continue;
        }
        let (mean_bias, imprecision) = bias_and_imprecision(&est, &refs)?;
        rows.push(ReportRow {
            checkpoint,
            mean_bias,
            imprecision,
            n_runs: est.len(),
        });
    }
    Ok(EvaluationReport { axis, rows })
}

/// Estimates that are undefined for a run at a checkpoint are left out of
/// that checkpoint's row; any other error aborts the evaluation.
fn keep_defined(value: Result<f64>) -> Result<Option<f64>> {
    match value {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        Ok(_) => Ok(None),
        Err(e) if e.kind() == ErrorKind::Undefined => Ok(None),
        Err(e) => Err(e),
    }
}

/// Bias and imprecision of a richness estimator at every checkpoint.
///
/// Checkpoints are matched across runs by their key on `axis`; rows with
/// fewer than two defined estimates are omitted.
pub fn evaluate_estimator<F>(
    runs: &[CampaignRun],
    estimator: F,
    reference: Reference,
    axis: CheckpointAxis,
) -> Result<EvaluationReport>
where
    F: Fn(&FrequencySnapshot) -> Result<f64> + Sync,
{
    if runs.len() < 2 {
        return Err(Error::InsufficientReplication { runs: runs.len() });
    }
    let per_run: Vec<Vec<(u64, f64, f64)>> = runs
        .par_iter()
        .map(|run| {
            let truth = reference.value(run)?;
            let mut out = Vec::with_capacity(run.checkpoints.len());
            for (key, c) in run.keyed(axis)? {
                if let Some(est) = keep_defined(estimator(&c.snapshot))? {
                    out.push((key, est, truth));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut samples: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (key, est, truth) in per_run.into_iter().flatten() {
        let slot = samples.entry(key).or_default();
        slot.0.push(est);
        slot.1.push(truth);
    }
    assemble(samples, axis)
}

/// Bias and imprecision of `Ŝ(n+m*)` against the species each run had
/// actually discovered `m*` inputs (or `t*` seconds) later.
///
/// `extrapolate(snapshot, m*)` predicts the richness after `m*` more inputs.
/// A checkpoint contributes only when the run also has a checkpoint at
/// exactly the horizon.
pub fn evaluate_extrapolator<F>(
    runs: &[CampaignRun],
    extrapolate: F,
    horizon: Horizon,
    axis: CheckpointAxis,
) -> Result<EvaluationReport>
where
    F: Fn(&FrequencySnapshot, u64) -> Result<f64> + Sync,
{
    if runs.len() < 2 {
        return Err(Error::InsufficientReplication { runs: runs.len() });
    }
    let per_run: Vec<Vec<(u64, f64, f64)>> = runs
        .par_iter()
        .map(|run| {
            let mut out = Vec::new();
            for (key, c) in run.keyed(axis)? {
                let (m_star, later) = match horizon {
                    Horizon::Inputs(m) => (m, c.inputs.checked_add(m).and_then(|t| run.at_inputs(t))),
                    Horizon::Seconds(t_star) => {
                        let t = c
                            .time_s
                            .ok_or_else(|| Error::invalid("time horizons need timestamped checkpoints"))?;
                        if t == 0 {
                            continue;
                        }
                        let m = ((2 * c.inputs as u128 * t_star as u128 + t as u128) / (2 * t as u128)) as u64;
                        (m, run.at_time(t + t_star))
                    }
                };
                let Some(later) = later else { continue };
                if let Some(pred) = keep_defined(extrapolate(&c.snapshot, m_star))? {
                    out.push((key, pred, later.snapshot.s_obs() as f64));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut samples: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (key, pred, actual) in per_run.into_iter().flatten() {
        let slot = samples.entry(key).or_default();
        slot.0.push(pred);
        slot.1.push(actual);
    }
    assemble(samples, axis)
}

/// Simulates one campaign per seed (in parallel) with trajectory points at
/// `checkpoints` and at `n`.
pub fn simulate_runs(
    assemblage: &SyntheticAssemblage,
    n: u64,
    bias: AdaptiveBiasConfig,
    seeds: &[u64],
    checkpoints: &[u64],
) -> Result<Vec<CampaignRun>> {
    let truth = assemblage.richness() as u64;
    seeds
        .par_iter()
        .map(|&seed| {
            let (_, trajectory) = sample_campaign(assemblage, n, bias, seed, checkpoints)?;
            Ok(CampaignRun::from_trajectory(&trajectory, Some(truth)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{estimate_richness, RichnessChoice};
    use crate::frequency::AbundanceFrequencies;
    use crate::simulator::AbundanceDistribution;

    #[test]
    fn hand_evaluated_pair() {
        let s = 250.0;
        let (bias, imprecision) = bias_and_imprecision(&[2.0 * s, 0.0], &[s, s]).unwrap();
        assert_eq!(bias, 0.0);
        assert_eq!(imprecision, 2f64.sqrt());
    }

    #[test]
    fn perfect_estimates() {
        let (bias, imprecision) = bias_and_imprecision(&[10.0, 20.0, 30.0], &[10.0, 20.0, 30.0]).unwrap();
        assert_eq!((bias, imprecision), (0.0, 0.0));
    }

    #[test]
    fn replication_is_required() {
        assert!(matches!(
            bias_and_imprecision(&[1.0], &[1.0]),
            Err(Error::InsufficientReplication { runs: 1 })
        ));
        let run = CampaignRun::new(Vec::new(), Some(3));
        assert!(matches!(
            evaluate_estimator(&[run], |_| Ok(0.0), Reference::SimulatorTruth, CheckpointAxis::Inputs),
            Err(Error::InsufficientReplication { runs: 1 })
        ));
    }

    fn uniform_runs(seeds: std::ops::Range<u64>, species: usize, n: u64, marks: &[u64]) -> Vec<CampaignRun> {
        let a = SyntheticAssemblage::multinomial(species, AbundanceDistribution::Uniform).unwrap();
        let seeds: Vec<u64> = seeds.collect();
        simulate_runs(&a, n, AdaptiveBiasConfig::disabled(), &seeds, marks).unwrap()
    }

    fn chao(snapshot: &FrequencySnapshot) -> Result<f64> {
        estimate_richness(snapshot, RichnessChoice::Chao).map(|e| e.s_hat)
    }

    #[test]
    fn report_is_order_invariant() {
        let mut runs = uniform_runs(0..6, 300, 3000, &[300, 1000]);
        let a = evaluate_estimator(&runs, chao, Reference::SimulatorTruth, CheckpointAxis::Inputs).unwrap();
        runs.reverse();
        runs.swap(1, 4);
        let b = evaluate_estimator(&runs, chao, Reference::SimulatorTruth, CheckpointAxis::Inputs).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 3);
        assert!(a.rows.iter().all(|r| r.n_runs == 6 && r.imprecision >= 0.0));
    }

    #[test]
    fn references_coincide_on_exhausted_assemblages() {
        let runs = uniform_runs(0..4, 20, 5000, &[10, 40, 100]);
        assert!(runs.iter().all(|r| r.checkpoints.last().unwrap().snapshot.s_obs() == 20));
        let truth = evaluate_estimator(&runs, chao, Reference::SimulatorTruth, CheckpointAxis::Inputs).unwrap();
        let empirical = evaluate_estimator(&runs, chao, Reference::FinalEmpirical, CheckpointAxis::Inputs).unwrap();
        assert_eq!(truth, empirical);
    }

    #[test]
    fn zero_horizon_is_exact() {
        let runs = uniform_runs(0..5, 500, 4000, &[500, 1000, 2000]);
        let report = evaluate_extrapolator(
            &runs,
            |s, m| {
                let r = estimate_richness(s, RichnessChoice::Chao)?;
                Ok(crate::estimate::extrapolator(s, &r)?.richness_at(m as f64))
            },
            Horizon::Inputs(0),
            CheckpointAxis::Inputs,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 4);
        assert!(report.rows.iter().all(|r| r.mean_bias == 0.0 && r.imprecision == 0.0));
    }

    fn row(time_s: u64, n: u64, s: u64, f: [u64; 4]) -> Checkpoint {
        Checkpoint {
            inputs: n,
            time_s: Some(time_s),
            snapshot: AbundanceFrequencies::from_leading(n, s, f).unwrap().into(),
        }
    }

    #[test]
    fn time_horizons_use_the_rate_of_each_checkpoint() {
        let runs = vec![
            CampaignRun::new(vec![row(10, 100, 30, [10, 5, 3, 2]), row(20, 200, 40, [8, 6, 4, 2])], None),
            CampaignRun::new(vec![row(10, 100, 28, [9, 5, 3, 2]), row(20, 200, 38, [9, 6, 4, 2])], None),
        ];
        let report = evaluate_extrapolator(
            &runs,
            |s, m| {
                assert_eq!(m, 100);
                Ok(s.s_obs() as f64 + 10.0)
            },
            Horizon::Seconds(10),
            CheckpointAxis::Seconds,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 1);
        let r = &report.rows[0];
        assert_eq!((r.checkpoint, r.n_runs), (10, 2));
        assert!(r.mean_bias.abs() < 1e-15);
    }

    #[test]
    fn rows_sharing_a_second_count_once() {
        let runs = vec![
            CampaignRun::new(vec![row(1, 10, 8, [6, 2, 0, 0]), row(1, 20, 12, [6, 4, 2, 0])], None),
            CampaignRun::new(vec![row(1, 10, 9, [8, 1, 0, 0]), row(1, 20, 11, [4, 5, 2, 0])], None),
        ];
        let report = evaluate_estimator(&runs, |s| Ok(s.n() as f64), Reference::FinalEmpirical, CheckpointAxis::Seconds)
            .unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].n_runs, 2);
        // only the n = 20 rows are evaluated: estimates 20, 20 against 12, 11
        assert!((report.rows[0].mean_bias - (8.0 + 9.0) / 23.0).abs() < 1e-15);
    }

    #[test]
    fn csv_output() {
        let report = EvaluationReport {
            axis: CheckpointAxis::Inputs,
            rows: vec![ReportRow {
                checkpoint: 10,
                mean_bias: 0.5,
                imprecision: 0.25,
                n_runs: 3,
            }],
        };
        let mut out = Vec::new();
        report.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "checkpoint,mean_bias,imprecision,n_runs\n10,0.5,0.25,3\n"
        );
        assert!(report.to_string().contains("imprecision"));
    }
}
