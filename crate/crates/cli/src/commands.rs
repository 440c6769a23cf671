use std::fs::File;
use std::io::{BufWriter, Write};
use std::thread;
use std::time::SystemTime;

use fuzzstat_core::estimate::{coverage, extrapolator, required_effort};
use fuzzstat_core::evaluation::{
    evaluate_estimator, evaluate_extrapolator, simulate_runs, CampaignRun, CheckpointAxis,
    Horizon, Reference,
};
use fuzzstat_core::incidence::incidence_discovery;
use fuzzstat_core::ingest::{inputs_for_horizon, write_snapshots, CampaignSnapshotRow, EventWriter};
use fuzzstat_core::multinomial::good_turing_u;
use fuzzstat_core::simulator::geometric_checkpoints;
use fuzzstat_core::{
    bootstrap_ci, estimate_richness, AdaptiveBiasConfig, BootstrapConfig, BootstrapInterval,
    Campaign, Error, ErrorKind, FrequencySnapshot, Result, RichnessChoice, SamplingModel,
    Statistic, SyntheticAssemblage,
};
use log::warn;
use serde::Serialize;

use crate::args::{
    AssemblageArgs, BootstrapArgs, Cli, Command, EffortArgs, EstimateArgs, EvaluateArgs,
    ExtrapolateArgs, Format, HorizonArg, InputFormat, SimulateArgs, WatchArgs,
};
use crate::input::{self, Loaded, Observation};
use crate::output::emit;

pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<()> {
    let format = cli.format;
    match cli.command {
        Command::Estimate(args) => estimate(args, format, out),
        Command::Extrapolate(args) => extrapolate(args, format, out),
        Command::Effort(args) => effort(args, format, out),
        Command::Simulate(args) => simulate(args, format, out),
        Command::Evaluate(args) => evaluate(args, format, out),
        Command::Watch(args) => watch(args, format, out),
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn bootstrap_config(args: &BootstrapArgs) -> Result<Option<BootstrapConfig>> {
    if args.bootstrap == 0 {
        return Ok(None);
    }
    BootstrapConfig::new(args.bootstrap, args.level, args.seed).map(Some)
}

fn interval(
    snapshot: &FrequencySnapshot,
    statistic: Statistic,
    cfg: Option<&BootstrapConfig>,
) -> Result<Option<BootstrapInterval>> {
    cfg.map(|c| bootstrap_ci(snapshot, statistic, c)).transpose()
}

/// Applies `f` to each selected observation. With `all_rows`, rows whose
/// estimate is undefined are reported through `fallback` instead of failing.
fn per_row<T>(
    loaded: &Loaded,
    all_rows: bool,
    f: impl Fn(&Observation) -> Result<Vec<T>>,
    fallback: impl Fn(&Observation, &Error) -> Vec<T>,
) -> Result<Vec<T>> {
    let mut records = Vec::new();
    for obs in loaded.select(all_rows) {
        match f(obs) {
            Ok(r) => records.extend(r),
            Err(e) if all_rows && e.kind() == ErrorKind::Undefined => {
                records.extend(fallback(obs, &e))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(records)
}

#[derive(Debug, Serialize)]
struct EstimateRecord {
    time_s: Option<u64>,
    inputs: u64,
    species: u64,
    singletons: u64,
    doubletons: u64,
    method: Option<String>,
    richness: Option<f64>,
    degraded: Option<bool>,
    ci_lower: Option<f64>,
    ci_upper: Option<f64>,
    coverage: Option<f64>,
    residual_risk: Option<f64>,
    residual_risk_approx: Option<f64>,
    inputs_to_next: Option<f64>,
    seconds_to_next: Option<f64>,
    error: Option<String>,
}

impl EstimateRecord {
    fn blank(obs: &Observation) -> Self {
        let s = &obs.snapshot;
        EstimateRecord {
            time_s: obs.time_s,
            inputs: s.n(),
            species: s.s_obs(),
            singletons: s.count(1),
            doubletons: s.count(2),
            method: None,
            richness: None,
            degraded: None,
            ci_lower: None,
            ci_upper: None,
            coverage: None,
            residual_risk: None,
            residual_risk_approx: None,
            inputs_to_next: None,
            seconds_to_next: None,
            error: None,
        }
    }
}

fn estimate_row(
    obs: &Observation,
    method: RichnessChoice,
    cfg: Option<&BootstrapConfig>,
) -> Result<EstimateRecord> {
    let snap = &obs.snapshot;
    let richness = estimate_richness(snap, method)?;
    let cov = coverage(snap, &richness)?;
    let (risk, approx) = match snap {
        FrequencySnapshot::Abundance(f) => (good_turing_u(f)?, None),
        FrequencySnapshot::Incidence(q) => {
            let d = incidence_discovery(q, &richness)?;
            (d.estimate, Some(d.approximation))
        }
    };
    let ci = interval(snap, Statistic::Richness(method), cfg)?;
    let per_input = match obs.time_s {
        Some(t) if t > 0 && snap.n() > 0 => Some(t as f64 / snap.n() as f64),
        _ => None,
    };
    Ok(EstimateRecord {
        method: Some(richness.method.to_string()),
        richness: Some(richness.s_hat),
        degraded: Some(richness.degraded || ci.is_some_and(|c| c.degraded)),
        ci_lower: ci.map(|c| c.lower),
        ci_upper: ci.map(|c| c.upper),
        coverage: Some(cov),
        residual_risk: Some(risk),
        residual_risk_approx: approx,
        inputs_to_next: (risk > 0.0).then(|| 1.0 / risk),
        seconds_to_next: per_input.filter(|_| risk > 0.0).map(|d| d / risk),
        ..EstimateRecord::blank(obs)
    })
}

fn estimate_records(
    loaded: &Loaded,
    all_rows: bool,
    method: RichnessChoice,
    boot: &BootstrapArgs,
) -> Result<Vec<EstimateRecord>> {
    let cfg = bootstrap_config(boot)?;
    per_row(
        loaded,
        all_rows,
        |obs| Ok(vec![estimate_row(obs, method, cfg.as_ref())?]),
        |obs, e| {
            vec![EstimateRecord {
                error: Some(e.to_string()),
                ..EstimateRecord::blank(obs)
            }]
        },
    )
}

fn estimate<W: Write>(args: EstimateArgs, format: Format, out: &mut W) -> Result<()> {
    let loaded = input::load(&args.input.input, args.input.input_format, args.input.model)?;
    let records = estimate_records(&loaded, args.input.all_rows, args.method.method, &args.bootstrap)?;
    emit(&records, format, out)
}

#[derive(Debug, Serialize)]
struct ExtrapolateRecord {
    time_s: Option<u64>,
    inputs: u64,
    species: u64,
    method: Option<String>,
    richness: Option<f64>,
    horizon: String,
    m_star: Option<u64>,
    predicted_species: Option<f64>,
    predicted_risk: Option<f64>,
    ci_lower: Option<f64>,
    ci_upper: Option<f64>,
    error: Option<String>,
}

fn horizon_inputs(loaded: &Loaded, obs: &Observation, horizon: &HorizonArg) -> Result<u64> {
    match horizon {
        HorizonArg::Inputs(m) => Ok(*m),
        HorizonArg::Seconds { seconds, .. } => {
            if loaded.rows.is_empty() {
                return Err(usage(
                    "duration horizons need a snapshot log with timestamps; give an input count instead",
                ));
            }
            inputs_for_horizon(&loaded.rows[..=obs.row], *seconds)
        }
    }
}

fn extrapolate<W: Write>(args: ExtrapolateArgs, format: Format, out: &mut W) -> Result<()> {
    let loaded = input::load(&args.input.input, args.input.input_format, args.input.model)?;
    let cfg = bootstrap_config(&args.bootstrap)?;
    let method = args.method.method;
    let blank = |obs: &Observation, h: &HorizonArg| ExtrapolateRecord {
        time_s: obs.time_s,
        inputs: obs.snapshot.n(),
        species: obs.snapshot.s_obs(),
        method: None,
        richness: None,
        horizon: h.to_string(),
        m_star: None,
        predicted_species: None,
        predicted_risk: None,
        ci_lower: None,
        ci_upper: None,
        error: None,
    };
    let records = per_row(
        &loaded,
        args.input.all_rows,
        |obs| {
            let richness = estimate_richness(&obs.snapshot, method)?;
            let x = extrapolator(&obs.snapshot, &richness)?;
            args.horizons
                .iter()
                .map(|h| {
                    let m_star = horizon_inputs(&loaded, obs, h)?;
                    let point = x.point(m_star);
                    let ci = interval(
                        &obs.snapshot,
                        Statistic::ExtrapolatedRichness { richness: method, m_star },
                        cfg.as_ref(),
                    )?;
                    Ok(ExtrapolateRecord {
                        method: Some(richness.method.to_string()),
                        richness: Some(richness.s_hat),
                        m_star: Some(m_star),
                        predicted_species: Some(point.s_pred),
                        predicted_risk: Some(point.u_pred),
                        ci_lower: ci.map(|c| c.lower),
                        ci_upper: ci.map(|c| c.upper),
                        ..blank(obs, h)
                    })
                })
                .collect()
        },
        |obs, e| {
            args.horizons
                .iter()
                .map(|h| ExtrapolateRecord {
                    error: Some(e.to_string()),
                    ..blank(obs, h)
                })
                .collect()
        },
    )?;
    emit(&records, format, out)
}

#[derive(Debug, Serialize)]
struct EffortRecord {
    time_s: Option<u64>,
    inputs: u64,
    species: u64,
    method: Option<String>,
    richness: Option<f64>,
    coverage: Option<f64>,
    target: f64,
    required_inputs: Option<u64>,
    required_inputs_exact: Option<u64>,
    formula: Option<f64>,
    exact: Option<f64>,
    error: Option<String>,
}

fn effort<W: Write>(args: EffortArgs, format: Format, out: &mut W) -> Result<()> {
    let loaded = input::load(&args.input.input, args.input.input_format, args.input.model)?;
    let method = args.method.method;
    let blank = |obs: &Observation| EffortRecord {
        time_s: obs.time_s,
        inputs: obs.snapshot.n(),
        species: obs.snapshot.s_obs(),
        method: None,
        richness: None,
        coverage: None,
        target: args.target,
        required_inputs: None,
        required_inputs_exact: None,
        formula: None,
        exact: None,
        error: None,
    };
    let records = per_row(
        &loaded,
        args.input.all_rows,
        |obs| {
            let richness = estimate_richness(&obs.snapshot, method)?;
            let cov = coverage(&obs.snapshot, &richness)?;
            let e = required_effort(&obs.snapshot, &richness, args.target)?;
            Ok(vec![EffortRecord {
                method: Some(richness.method.to_string()),
                richness: Some(richness.s_hat),
                coverage: Some(cov),
                required_inputs: Some(e.formula_inputs()),
                required_inputs_exact: Some(e.exact_inputs()),
                formula: Some(e.formula),
                exact: Some(e.exact),
                ..blank(obs)
            }])
        },
        |obs, e| {
            vec![EffortRecord {
                error: Some(e.to_string()),
                ..blank(obs)
            }]
        },
    )?;
    emit(&records, format, out)
}

fn assemblage(args: &AssemblageArgs) -> Result<(SyntheticAssemblage, AdaptiveBiasConfig)> {
    let a = match args.model {
        SamplingModel::Multinomial => {
            SyntheticAssemblage::multinomial(args.species, args.distribution.clone())?
        }
        SamplingModel::Incidence => {
            SyntheticAssemblage::incidence(args.species, args.distribution.clone(), args.max_rate)?
        }
    };
    let bias = match args.bias_boost {
        Some(boost) => AdaptiveBiasConfig::neighbor_boost(boost, args.bias_degree)?,
        None => AdaptiveBiasConfig::disabled(),
    };
    Ok((a, bias))
}

fn create(path: &std::path::Path) -> Result<BufWriter<File>> {
    let f = File::create(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(BufWriter::new(f))
}

#[derive(Debug, Serialize)]
struct TruthRecord {
    time_s: u64,
    inputs: u64,
    species: u64,
    true_richness: u64,
    true_discovery: f64,
}

#[derive(Debug, Serialize)]
struct SimulateRecord {
    time_s: u64,
    inputs: u64,
    species: u64,
    counts: [u64; 4],
    v: Option<u64>,
    true_richness: u64,
    true_discovery: f64,
}

fn simulate<W: Write>(args: SimulateArgs, format: Format, out: &mut W) -> Result<()> {
    let (a, bias) = assemblage(&args.assemblage)?;
    let mut campaign = Campaign::new(&a, bias, args.seed)?;
    let mut marks = geometric_checkpoints(1, args.inputs, args.checkpoints);
    if args.inputs == 0 {
        marks = vec![0];
    }
    let mut events = args.events.as_deref().map(create).transpose()?.map(EventWriter::new);
    if let Some(w) = events.as_mut() {
        w.comment(&format!(
            "simulated {} campaign: {} species, {}, seed {}",
            a.model(),
            a.richness(),
            a.distribution(),
            args.seed
        ))?;
    }
    let time_of = |n: u64| (n as f64 / args.rate).ceil() as u64;
    let mut rows = Vec::with_capacity(marks.len());
    let mut truth = Vec::with_capacity(marks.len());
    for &mark in &marks {
        let m = mark - campaign.inputs();
        match events.as_mut() {
            Some(w) => campaign.write_events(m, w)?,
            None => campaign.advance(m),
        }
        let point = campaign.checkpoint();
        rows.push(CampaignSnapshotRow::from_snapshot(time_of(point.inputs), &point.snapshot));
        truth.push(TruthRecord {
            time_s: time_of(point.inputs),
            inputs: point.inputs,
            species: point.discovered,
            true_richness: a.richness() as u64,
            true_discovery: point.true_discovery,
        });
    }
    if let Some(mut w) = events {
        w.flush()?;
    }
    if let Some(path) = &args.truth {
        let mut w = create(path)?;
        emit(&truth, Format::Csv, &mut w)?;
        w.flush()?;
    }
    match format {
        Format::JsonLines => {
            let records: Vec<SimulateRecord> = rows
                .iter()
                .zip(&truth)
                .map(|(r, t)| SimulateRecord {
                    time_s: r.time_s,
                    inputs: r.n,
                    species: r.species,
                    counts: r.leading,
                    v: r.v,
                    true_richness: t.true_richness,
                    true_discovery: t.true_discovery,
                })
                .collect();
            emit(&records, format, out)
        }
        Format::Table | Format::Csv => write_snapshots(out, a.model(), &rows),
    }
}

fn evaluate<W: Write>(args: EvaluateArgs, format: Format, out: &mut W) -> Result<()> {
    let method = args.method.method;
    let replayed = !args.logs.is_empty();
    let (runs, axis) = if replayed {
        let runs = args
            .logs
            .iter()
            .map(|p| {
                let loaded = input::load(&p.to_string_lossy(), InputFormat::Snapshots, None)?;
                CampaignRun::from_snapshot_rows(&loaded.rows)
            })
            .collect::<Result<Vec<_>>>()?;
        (runs, CheckpointAxis::Seconds)
    } else {
        let (a, bias) = assemblage(&args.assemblage)?;
        // checkpoints shifted by the horizon supply the later observations
        let mut marks = geometric_checkpoints((args.inputs / 1000).max(1), args.inputs, args.checkpoints);
        let mut length = args.inputs;
        match &args.horizon {
            Some(HorizonArg::Inputs(m)) => {
                let shifted: Vec<u64> = marks.iter().map(|c| c + m).collect();
                marks.extend(shifted);
                marks.sort_unstable();
                marks.dedup();
                length += m;
            }
            Some(HorizonArg::Seconds { .. }) => {
                return Err(usage("simulated runs take extrapolation horizons as input counts"));
            }
            None => {}
        }
        let seeds: Vec<u64> = (0..args.runs).map(|i| args.seed.wrapping_add(i)).collect();
        (simulate_runs(&a, length, bias, &seeds, &marks)?, CheckpointAxis::Inputs)
    };
    let reference = match args.reference {
        Some(r) => r,
        None if replayed => Reference::FinalEmpirical,
        None => Reference::SimulatorTruth,
    };
    let report = match &args.horizon {
        None => evaluate_estimator(
            &runs,
            |s| estimate_richness(s, method).map(|r| r.s_hat),
            reference,
            axis,
        )?,
        Some(h) => {
            let horizon = match h {
                HorizonArg::Inputs(m) => Horizon::Inputs(*m),
                HorizonArg::Seconds { seconds, .. } => Horizon::Seconds(*seconds),
            };
            evaluate_extrapolator(
                &runs,
                |s, m| {
                    let r = estimate_richness(s, method)?;
                    Ok(extrapolator(s, &r)?.richness_at(m as f64))
                },
                horizon,
                axis,
            )?
        }
    };
    match format {
        Format::Csv => report.write_csv(out),
        _ => emit(&report.rows, format, out),
    }
}

fn modified(path: &std::path::Path) -> Option<(SystemTime, u64)> {
    let meta = std::fs::metadata(path).ok()?;
    Some((meta.modified().ok()?, meta.len()))
}

fn watch<W: Write>(args: WatchArgs, format: Format, out: &mut W) -> Result<()> {
    let source = args.input.to_string_lossy().into_owned();
    let mut last_seen: Option<Vec<u8>> = None;
    let mut last_error: Option<Error> = None;
    let mut stamp = None;
    let mut poll = 0u64;
    loop {
        poll += 1;
        let now = modified(&args.input);
        if now.is_none() || now != stamp {
            stamp = now;
            match input::read_source(&source) {
                Ok(bytes) if last_seen.as_deref() != Some(&bytes[..]) => {
                    let result = input::parse(&bytes, InputFormat::Snapshots, args.model).and_then(|l| {
                        estimate_records(&l, false, args.method.method, &args.bootstrap)
                    });
                    match result {
                        Ok(records) => {
                            emit(&records, format, out)?;
                            out.flush()?;
                            last_seen = Some(bytes);
                            last_error = None;
                        }
                        // a row may be half-written; retry on the next poll
                        Err(e) if e.kind() != ErrorKind::Usage => {
                            warn!("{source}: {e}");
                            last_error = Some(e);
                        }
                        Err(e) => return Err(e),
                    }
                }
                Ok(_) => {}
                Err(e) => {
                    warn!("{source}: {e}");
                    last_error = Some(e);
                }
            }
        }
        if args.iterations != 0 && poll >= args.iterations {
            break;
        }
        thread::sleep(args.interval);
    }
    match (last_seen, last_error) {
        (None, Some(e)) => Err(e),
        _ => Ok(()),
    }
}
