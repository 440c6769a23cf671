//! Loading campaign observations from event files and snapshot logs.

use std::fs;
use std::io::Read;
use std::path::Path;

use fuzzstat_core::ingest::{parse_events, parse_snapshots, CampaignSnapshotRow};
use fuzzstat_core::{Error, FrequencySnapshot, Result, SamplingModel};

use crate::args::InputFormat;

/// One observation point: a frequency summary plus, for snapshot logs, the
/// rows up to and including it (needed to convert durations into inputs).
#[derive(Debug, Clone)]
pub struct Observation {
    pub time_s: Option<u64>,
    pub snapshot: FrequencySnapshot,
    pub row: usize,
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub observations: Vec<Observation>,
    /// Parsed rows when the input was a snapshot log.
    pub rows: Vec<CampaignSnapshotRow>,
}

impl Loaded {
    pub fn select(&self, all_rows: bool) -> &[Observation] {
        if all_rows || self.observations.is_empty() {
            &self.observations
        } else {
            &self.observations[self.observations.len() - 1..]
        }
    }
}

pub fn read_source(source: &str) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    if source == "-" {
        std::io::stdin().lock().read_to_end(&mut bytes)?;
    } else {
        bytes = fs::read(Path::new(source)).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{source}: {e}")))
        })?;
    }
    Ok(bytes)
}

fn looks_like_snapshots(bytes: &[u8]) -> bool {
    let text = String::from_utf8_lossy(&bytes[..bytes.len().min(4096)]);
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.split(',').any(|f| f.trim() == "time_s"))
}

pub fn parse(bytes: &[u8], format: InputFormat, model: Option<SamplingModel>) -> Result<Loaded> {
    let snapshots = match format {
        InputFormat::Auto => looks_like_snapshots(bytes),
        InputFormat::Events => false,
        InputFormat::Snapshots => true,
    };
    if snapshots {
        let rows = parse_snapshots(bytes, model)?;
        let observations = rows
            .iter()
            .enumerate()
            .map(|(row, r)| {
                Ok(Observation {
                    time_s: Some(r.time_s),
                    snapshot: r.to_snapshot()?,
                    row,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Loaded { observations, rows })
    } else {
        let acc = parse_events(bytes, model.unwrap_or(SamplingModel::Multinomial))?;
        Ok(Loaded {
            observations: vec![Observation {
                time_s: None,
                snapshot: acc.snapshot(),
                row: 0,
            }],
            rows: Vec::new(),
        })
    }
}

pub fn load(source: &str, format: InputFormat, model: Option<SamplingModel>) -> Result<Loaded> {
    parse(&read_source(source)?, format, model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sniffing() {
        assert!(looks_like_snapshots(b"# log\ntime_s,n,species,f1,f2,f3,f4\n"));
        assert!(!looks_like_snapshots(b"path:1\npath:2\n"));
        assert!(!looks_like_snapshots(b""));
    }

    #[test]
    fn events_and_rows() {
        let ev = parse(b"a\nb\na\n", InputFormat::Auto, None).unwrap();
        assert_eq!(ev.observations.len(), 1);
        assert_eq!(ev.observations[0].snapshot.n(), 3);
        let log = b"time_s,n,species,f1,f2,f3,f4\n1,2,2,2,0,0,0\n2,4,3,2,1,0,0\n";
        let rows = parse(log, InputFormat::Auto, None).unwrap();
        assert_eq!(rows.select(false).len(), 1);
        assert_eq!(rows.select(true).len(), 2);
        assert_eq!(rows.select(false)[0].time_s, Some(2));
    }
}
