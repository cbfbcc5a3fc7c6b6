//! Valid-inference counting from newline-delimited JSON telemetry.
//!
//! Each line is an object with string fields `ts` (RFC 3339), `kind`
//! (`inference`, `health_check`, `admin`, `background`) and `status` (`ok`,
//! `error`). Other fields are ignored. Blank lines are skipped.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::ops::{Add, AddAssign};

use chrono::{DateTime, Datelike, Months, Utc};
use serde::Deserialize;
use thiserror::Error;

use crate::scenario::{Horizon, VolumeProjection};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Inference,
    HealthCheck,
    Admin,
    Background,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InferenceRecord {
    pub timestamp: DateTime<Utc>,
    pub kind: RecordKind,
    pub status: RecordStatus,
    /// 1-based source line.
    pub line: usize,
}

#[derive(Deserialize)]
struct WireRecord {
    ts: String,
    kind: RecordKind,
    status: RecordStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("reading log: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ParseMode {
    /// Abort on the first malformed line.
    #[default]
    Strict,
    /// Skip malformed lines and report them.
    Lenient,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParsedLog {
    pub records: Vec<InferenceRecord>,
    pub skipped: Vec<ParseError>,
}

pub fn parse_line(text: &str, line: usize) -> Result<InferenceRecord, ParseError> {
    let err = |message: String| ParseError { line, message };
    let wire: WireRecord = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    let timestamp = DateTime::parse_from_rfc3339(&wire.ts)
        .map_err(|e| err(format!("bad timestamp `{}`: {e}", wire.ts)))?
        .with_timezone(&Utc);
    Ok(InferenceRecord {
        timestamp,
        kind: wire.kind,
        status: wire.status,
        line,
    })
}

/// Single pass over `reader`.
pub fn parse_log<R: BufRead>(mut reader: R, mode: ParseMode) -> Result<ParsedLog, IngestError> {
    let mut out = ParsedLog::default();
    let mut buf = Vec::new();
    let mut line = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line += 1;
        let parsed = match std::str::from_utf8(&buf) {
            Ok(text) if text.trim().is_empty() => continue,
            Ok(text) => parse_line(text, line),
            Err(_) => Err(ParseError {
                line,
                message: "line is not valid UTF-8".into(),
            }),
        };
        match (parsed, mode) {
            (Ok(record), _) => out.records.push(record),
            (Err(e), ParseMode::Strict) => return Err(e.into()),
            (Err(e), ParseMode::Lenient) => out.skipped.push(e),
        }
    }
    Ok(out)
}

pub fn parse_str(text: &str, mode: ParseMode) -> Result<ParsedLog, IngestError> {
    parse_log(text.as_bytes(), mode)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CountPolicy {
    /// Count errored inferences as valid output.
    pub include_failed: bool,
}

/// Tallies partitioning a set of records. Records outside the horizon land in
/// `out_of_range` whatever their kind.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VolumeCount {
    pub valid: u64,
    pub excluded_nonproductive: u64,
    pub excluded_failed: u64,
    pub out_of_range: u64,
    /// Valid inferences per 0-based period.
    pub period_buckets: BTreeMap<u32, u64>,
}

impl VolumeCount {
    pub fn total(&self) -> u64 {
        self.valid + self.excluded_nonproductive + self.excluded_failed + self.out_of_range
    }

    /// Bucketed counts as a projection over `horizon`, empty periods as zero.
    pub fn to_projection(&self, horizon: &Horizon) -> VolumeProjection {
        VolumeProjection::new(
            (0..horizon.periods())
                .map(|p| self.period_buckets.get(&p).copied().unwrap_or(0))
                .collect(),
        )
    }
}

impl AddAssign<&VolumeCount> for VolumeCount {
    fn add_assign(&mut self, rhs: &VolumeCount) {
        self.valid += rhs.valid;
        self.excluded_nonproductive += rhs.excluded_nonproductive;
        self.excluded_failed += rhs.excluded_failed;
        self.out_of_range += rhs.out_of_range;
        for (&p, &n) in &rhs.period_buckets {
            *self.period_buckets.entry(p).or_default() += n;
        }
    }
}

impl Add for VolumeCount {
    type Output = VolumeCount;
    fn add(mut self, rhs: VolumeCount) -> VolumeCount {
        self += &rhs;
        self
    }
}

/// Whole calendar months from `start` to `at`, or `None` if `at` precedes
/// `start`.
pub fn months_elapsed(start: DateTime<Utc>, at: DateTime<Utc>) -> Option<u32> {
    if at < start {
        return None;
    }
    let guess = (at.year() - start.year()) * 12 + at.month() as i32 - start.month() as i32;
    let mut months = guess.max(0) as u32;
    while months > 0 && start.checked_add_months(Months::new(months))? > at {
        months -= 1;
    }
    Some(months)
}

pub fn count_valid(
    records: &[InferenceRecord],
    horizon: &Horizon,
    start: DateTime<Utc>,
) -> VolumeCount {
    count_valid_with(records, horizon, start, CountPolicy::default())
}

pub fn count_valid_with(
    records: &[InferenceRecord],
    horizon: &Horizon,
    start: DateTime<Utc>,
    policy: CountPolicy,
) -> VolumeCount {
    let mut count = VolumeCount::default();
    for record in records {
        let period = months_elapsed(start, record.timestamp)
            .map(|m| m / horizon.period_length_months())
            .filter(|&p| p < horizon.periods());
        let Some(period) = period else {
            count.out_of_range += 1;
            continue;
        };
        match (record.kind, record.status) {
            (RecordKind::Inference, RecordStatus::Ok) => {}
            (RecordKind::Inference, RecordStatus::Error) if policy.include_failed => {}
            (RecordKind::Inference, RecordStatus::Error) => {
                count.excluded_failed += 1;
                continue;
            }
            _ => {
                count.excluded_nonproductive += 1;
                continue;
            }
        }
        count.valid += 1;
        *count.period_buckets.entry(period).or_default() += 1;
    }
    count
}
