//! Reading and writing campaign data.
//!
//! Two formats are supported.
//!
//! **Event files** hold one generated input per line. A line lists the
//! species the input belongs to as tokens matching `[A-Za-z0-9:_\-.]+`,
//! separated by whitespace or commas. Multinomial files carry exactly one
//! token per line; in incidence files a line may list several tokens or none
//! (an input that exhibited no species). Lines whose first non-blank character
//! is `#` are comments.
//!
//! **Snapshot CSV** holds one pre-aggregated row per logging interval, with
//! the header `time_s,n,species,f1,f2,f3,f4` (multinomial) or
//! `time_s,n,species,q1,q2,q3,q4,v` (incidence). Extra columns are ignored.
//! A fuzzer that cannot produce event files should append such a row every
//! few seconds: wall-clock seconds since the campaign started, inputs
//! generated, species discovered, and the number of species seen exactly
//! 1..4 times (plus the incidence total for the incidence model).

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frequency::{
    AbundanceFrequencies, FrequencySnapshot, IncidenceFrequencies, SamplingModel,
    SpeciesAccumulator, SpeciesId,
};

fn is_token_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, ':' | '_' | '-' | '.')
}

fn is_separator(c: char) -> bool {
    c == ',' || c.is_whitespace()
}

/// Checks that `token` is a valid event-file species token.
pub fn validate_token(token: &str) -> Result<()> {
    if token.is_empty() || !token.chars().all(is_token_char) {
        return Err(Error::invalid(format!("`{token}` is not a valid species token")));
    }
    Ok(())
}

/// Splits one event line into tokens; `None` for comments.
fn tokens(line: &str, line_no: usize) -> Result<Option<Vec<&str>>> {
    if line.trim_start().starts_with('#') {
        return Ok(None);
    }
    let mut out = Vec::new();
    for token in line.split(is_separator).filter(|t| !t.is_empty()) {
        if let Some(bad) = token.chars().find(|&c| !is_token_char(c)) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("invalid character {bad:?} in species token `{token}`"),
            });
        }
        out.push(token);
    }
    Ok(Some(out))
}

/// Reads an event file into a fresh accumulator.
pub fn parse_events<R: BufRead>(reader: R, model: SamplingModel) -> Result<SpeciesAccumulator> {
    let mut acc = SpeciesAccumulator::new(model);
    parse_events_into(reader, &mut acc)?;
    Ok(acc)
}

/// Appends the inputs of an event file to `acc`. Returns the number of inputs
/// read. Line numbers in errors are relative to `reader`.
pub fn parse_events_into<R: BufRead>(mut reader: R, acc: &mut SpeciesAccumulator) -> Result<u64> {
    let mut buf = String::new();
    let mut line_no = 0;
    let mut inputs = 0;
    let mut ids = Vec::new();
    loop {
        buf.clear();
        if reader.read_line(&mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = buf.trim_end_matches(['\n', '\r']);
        let Some(toks) = tokens(line, line_no)? else {
            continue;
        };
        ids.clear();
        ids.extend(toks.iter().map(|t| SpeciesId::from_token(t)));
        acc.observe(ids.drain(..)).map_err(|e| match e {
            Error::ModeViolation(msg) => Error::ModeViolation(format!("line {line_no}: {msg}")),
            other => other,
        })?;
        inputs += 1;
    }
    Ok(inputs)
}

/// Line-oriented event-file writer.
#[derive(Debug)]
pub struct EventWriter<W: Write> {
    inner: W,
}

impl<W: Write> EventWriter<W> {
    pub fn new(inner: W) -> Self {
        EventWriter { inner }
    }

    /// Writes one `#` comment line.
    pub fn comment(&mut self, text: &str) -> Result<()> {
        for line in text.lines() {
            writeln!(self.inner, "# {line}")?;
        }
        Ok(())
    }

    /// Writes one input with the given species tokens.
    pub fn input<I, S>(&mut self, species: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for token in species {
            let token = token.as_ref();
            validate_token(token)?;
            if !first {
                self.inner.write_all(b" ")?;
            }
            self.inner.write_all(token.as_bytes())?;
            first = false;
        }
        self.inner.write_all(b"\n")?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

/// One row of a snapshot log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CampaignSnapshotRow {
    pub model: SamplingModel,
    /// Seconds since campaign start.
    pub time_s: u64,
    /// Inputs generated.
    pub n: u64,
    /// Species discovered.
    pub species: u64,
    /// `f1..f4` or `q1..q4`.
    pub leading: [u64; 4],
    /// Incidence total; `None` for multinomial rows.
    pub v: Option<u64>,
}

impl CampaignSnapshotRow {
    pub fn from_snapshot(time_s: u64, snapshot: &FrequencySnapshot) -> Self {
        let leading = [1, 2, 3, 4].map(|k| snapshot.count(k));
        let v = match snapshot {
            FrequencySnapshot::Abundance(_) => None,
            FrequencySnapshot::Incidence(q) => Some(q.v()),
        };
        CampaignSnapshotRow {
            model: snapshot.model(),
            time_s,
            n: snapshot.n(),
            species: snapshot.s_obs(),
            leading,
            v,
        }
    }

    /// Frequency summary for running estimators on this row.
    pub fn to_snapshot(&self) -> Result<FrequencySnapshot> {
        Ok(match self.model {
            SamplingModel::Multinomial => {
                AbundanceFrequencies::from_leading(self.n, self.species, self.leading)?.into()
            }
            SamplingModel::Incidence => {
                let v = self
                    .v
                    .ok_or_else(|| Error::InvalidFrequencies("incidence row without v".into()))?;
                IncidenceFrequencies::from_leading(self.n, self.species, self.leading, v)?.into()
            }
        })
    }
}

const COMMON: [&str; 3] = ["time_s", "n", "species"];
const ABUNDANCE: [&str; 4] = ["f1", "f2", "f3", "f4"];
const INCIDENCE: [&str; 5] = ["q1", "q2", "q3", "q4", "v"];

fn column_names(model: SamplingModel) -> Vec<&'static str> {
    let extra: &[&str] = match model {
        SamplingModel::Multinomial => &ABUNDANCE,
        SamplingModel::Incidence => &INCIDENCE,
    };
    COMMON.iter().chain(extra).copied().collect()
}

/// Parses a snapshot CSV log.
///
/// The model is inferred from the header (`f1` vs `q1` columns) unless given.
/// Every row is validated; errors carry the 1-based line number in the file.
pub fn parse_snapshots<R: std::io::Read>(
    reader: R,
    model: Option<SamplingModel>,
) -> Result<Vec<CampaignSnapshotRow>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read header: {e}")))?
        .clone();
    if headers.is_empty() {
        return Err(Error::Schema("missing header row".into()));
    }
    let has = |name: &str| headers.iter().any(|h| h == name);
    let model = match model {
        Some(m) => m,
        None => match (has("f1"), has("q1")) {
            (true, false) => SamplingModel::Multinomial,
            (false, true) => SamplingModel::Incidence,
            (true, true) => {
                return Err(Error::Schema(
                    "header has both f1 and q1 columns; specify the model".into(),
                ))
            }
            (false, false) => {
                return Err(Error::Schema(
                    "header needs f1..f4 (multinomial) or q1..q4,v (incidence) columns".into(),
                ))
            }
        },
    };
    let names = column_names(model);
    let mut index = Vec::with_capacity(names.len());
    for name in &names {
        let i = headers
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| Error::Schema(format!("missing mandatory column `{name}`")))?;
        index.push(i);
    }

    let mut rows: Vec<CampaignSnapshotRow> = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut values = [0u64; 8];
        for (slot, (&i, name)) in values.iter_mut().zip(index.iter().zip(&names)) {
            let raw = record.get(i).unwrap_or("");
            *slot = raw.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column `{name}`: expected a non-negative integer, got `{raw}`"),
            })?;
        }
        let row = CampaignSnapshotRow {
            model,
            time_s: values[0],
            n: values[1],
            species: values[2],
            leading: [values[3], values[4], values[5], values[6]],
            v: (model == SamplingModel::Incidence).then_some(values[7]),
        };
        row.to_snapshot().map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if let Some(prev) = rows.last() {
            if row.n < prev.n {
                return Err(Error::Monotonicity {
                    row: line,
                    message: format!("n decreased from {} to {}", prev.n, row.n),
                });
            }
            if row.time_s < prev.time_s {
                return Err(Error::Monotonicity {
                    row: line,
                    message: format!("time_s decreased from {} to {}", prev.time_s, row.time_s),
                });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Writes rows as snapshot CSV with the canonical header.
pub fn write_snapshots<W: Write>(writer: W, model: SamplingModel, rows: &[CampaignSnapshotRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| Error::Io(e.into());
    csv.write_record(column_names(model)).map_err(to_io)?;
    for row in rows {
        if row.model != model {
            return Err(Error::invalid("all rows of a snapshot log must share one model"));
        }
        let mut fields: Vec<u64> = vec![row.time_s, row.n, row.species];
        fields.extend(row.leading);
        if let Some(v) = row.v {
            fields.push(v);
        }
        csv.write_record(fields.iter().map(u64::to_string)).map_err(to_io)?;
    }
    csv.flush()?;
    Ok(())
}

/// Inputs generated over `t_star` more seconds at the rate of the latest row:
/// `round(n·t*/t)`.
pub fn inputs_for_horizon(rows: &[CampaignSnapshotRow], t_star: u64) -> Result<u64> {
    let (time_s, n) = rows.last().map_or((0, 0), |r| (r.time_s, r.n));
    if time_s == 0 {
        return Err(Error::UndefinedRate { time_s, inputs: n });
    }
    let (n, t_star, t) = (n as u128, t_star as u128, time_s as u128);
    let m = (2 * n * t_star + t) / (2 * t);
    u64::try_from(m).map_err(|_| Error::invalid("horizon overflows the input counter"))
}
