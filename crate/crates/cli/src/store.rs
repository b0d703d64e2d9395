//! Append-only JSON-lines results store.
//!
//! Every record is re-verified when it is written and again when it is read;
//! lines that fail are moved to a sibling `.quarantine` file.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use monochrome_core::avoid::{check_certificate, AvoidCertificate, SearchStats, ThresholdResult, ThresholdValue};
use monochrome_core::coloring::{Coloring, RunLengthColoring};
use monochrome_core::constructive::{ConstructionParams, ConstructiveTrace};
use monochrome_core::family::{preset_family, reduction_family, PatternFamily};
use monochrome_core::reductions::{check_quad_solution, QuadSolution};
use monochrome_core::witness::{verify_witness, Instance, Witness, WitnessRecord};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Witness,
    Avoiding,
    Threshold,
    Construction,
    Reduction,
}

impl Kind {
    pub fn parse(s: &str) -> Option<Kind> {
        serde_json::from_value(Value::String(s.to_owned())).ok()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Witness => "witness",
            Kind::Avoiding => "avoiding",
            Kind::Threshold => "threshold",
            Kind::Construction => "construction",
            Kind::Reduction => "reduction",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub timestamp: u64,
    #[serde(default)]
    pub stats: Option<SearchStats>,
}

impl Provenance {
    pub fn now(stats: Option<SearchStats>) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Provenance { tool_version: env!("CARGO_PKG_VERSION").to_owned(), timestamp, stats }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub kind: Kind,
    pub fingerprint: String,
    pub params: Value,
    pub payload: Value,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPayload {
    pub family: PatternFamily,
    pub coloring: RunLengthColoring,
    pub distinct: bool,
    pub witness: WitnessRecord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionPayload {
    pub coloring: RunLengthColoring,
    pub params: ConstructionParams,
    pub trace: ConstructiveTrace,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionPayload {
    pub coloring: RunLengthColoring,
    pub solution: QuadSolution,
}

/// Hex SHA-256 of the family's canonical key; names and term order do not matter.
pub fn fingerprint(family: &PatternFamily) -> String {
    hex::encode(Sha256::digest(family.canonical_key().as_bytes()))
}

/// Hex SHA-256 of a coloring's text form, used to key coloring-dependent results.
pub fn coloring_digest(c: &Coloring) -> String {
    hex::encode(Sha256::digest(c.to_text().as_bytes()))
}

fn decode<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T, String> {
    serde_json::from_value(v.clone()).map_err(|e| format!("malformed payload: {e}"))
}

fn expect_fingerprint(rec: &ResultRecord, family: &PatternFamily) -> Result<(), String> {
    if fingerprint(family) != rec.fingerprint {
        return Err("payload family does not match fingerprint".into());
    }
    Ok(())
}

/// Kind-specific check of a record's payload.
pub fn verify_record(rec: &ResultRecord) -> Result<(), String> {
    match rec.kind {
        Kind::Witness => {
            let p: WitnessPayload = decode(&rec.payload)?;
            expect_fingerprint(rec, &p.family)?;
            let coloring = Coloring::try_from(&p.coloring).map_err(|e| e.to_string())?;
            if p.witness.n != coloring.n() || p.witness.r != coloring.r() {
                return Err("witness N or r disagrees with its coloring".into());
            }
            verify_witness(&p.family, &coloring, &p.witness.witness(), p.distinct)
        }
        Kind::Avoiding => {
            let cert: AvoidCertificate = decode(&rec.payload)?;
            expect_fingerprint(rec, &cert.family)?;
            check_certificate(&cert)
        }
        Kind::Threshold => {
            let res: ThresholdResult = decode(&rec.payload)?;
            let expected_n = match res.value {
                ThresholdValue::Exact(t) => t - 1,
                ThresholdValue::LowerBound(t) => t - 1,
            };
            match &res.avoider {
                Some(cert) => {
                    expect_fingerprint(rec, &cert.family)?;
                    if cert.n != expected_n || cert.r != res.r {
                        return Err(format!("avoider is for N = {}, r = {}; expected N = {expected_n}", cert.n, cert.r));
                    }
                    check_certificate(cert)
                }
                None if expected_n == 0 => Ok(()),
                None => Err("threshold above 1 without an avoider".into()),
            }
        }
        Kind::Construction => {
            let p: ConstructionPayload = decode(&rec.payload)?;
            let family = preset_family("xyxy", None).map_err(|e| e.to_string())?;
            expect_fingerprint(rec, &family)?;
            let coloring = Coloring::try_from(&p.coloring).map_err(|e| e.to_string())?;
            if p.trace.n != coloring.n() {
                return Err("trace N disagrees with its coloring".into());
            }
            match (&p.trace.witness, &p.trace.failure_reason) {
                (Some(w), None) => {
                    let (x, y) = (w.x as i64, w.y as i64);
                    let witness = Witness {
                        instance: Instance { assignment: vec![x, y], term_values: vec![x, x + y, x * y] },
                        color: w.color,
                    };
                    if w.x_tilde != w.x * w.y {
                        return Err("x_tilde is not x * y".into());
                    }
                    verify_witness(&family, &coloring, &witness, false)
                }
                (None, Some(_)) => Ok(()),
                _ => Err("trace must carry exactly one of witness and failure_reason".into()),
            }
        }
        Kind::Reduction => {
            let p: ReductionPayload = decode(&rec.payload)?;
            let family = reduction_family(&p.solution.u).map_err(|e| e.to_string())?;
            expect_fingerprint(rec, &family)?;
            let coloring = Coloring::try_from(&p.coloring).map_err(|e| e.to_string())?;
            check_quad_solution(&coloring, &p.solution)
        }
    }
}

#[derive(Debug)]
pub struct Quarantined {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Default)]
pub struct LoadReport {
    pub records: Vec<ResultRecord>,
    pub quarantined: Vec<Quarantined>,
}

pub struct Store {
    path: PathBuf,
}

impl Store {
    pub fn open(path: impl Into<PathBuf>) -> Self {
        Store { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn quarantine_path(&self) -> PathBuf {
        let mut s = self.path.clone().into_os_string();
        s.push(".quarantine");
        PathBuf::from(s)
    }

    fn open_file(&self) -> std::io::Result<File> {
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        OpenOptions::new().read(true).append(true).create(true).open(&self.path)
    }

    /// Verifies and appends; returns the 1-based line number of the record.
    pub fn store(&self, rec: &ResultRecord) -> Result<usize, String> {
        verify_record(rec).map_err(|e| format!("refusing to store unverified {} record: {e}", rec.kind.as_str()))?;
        let line = serde_json::to_string(rec).map_err(|e| e.to_string())?;
        let mut f = self.open_file().map_err(|e| e.to_string())?;
        f.lock().map_err(|e| e.to_string())?;
        let existing = BufReader::new(&f).lines().count();
        writeln!(f, "{line}").map_err(|e| e.to_string())?;
        f.flush().map_err(|e| e.to_string())?;
        Ok(existing + 1)
    }

    /// Reads every record, re-verifying each one. Failing lines are removed
    /// from the store and appended to the quarantine file.
    pub fn load(&self) -> Result<LoadReport, String> {
        if !self.path.exists() {
            return Ok(LoadReport::default());
        }
        let f = self.open_file().map_err(|e| e.to_string())?;
        f.lock().map_err(|e| e.to_string())?;
        let mut report = LoadReport::default();
        let mut keep = Vec::new();
        let mut bad = Vec::new();
        for (i, line) in BufReader::new(&f).lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed = serde_json::from_str::<ResultRecord>(&line)
                .map_err(|e| format!("unreadable record: {e}"))
                .and_then(|rec| verify_record(&rec).map(|()| rec));
            match parsed {
                Ok(rec) => {
                    keep.push(line);
                    report.records.push(rec);
                }
                Err(reason) => {
                    bad.push(line);
                    report.quarantined.push(Quarantined { line: i + 1, reason });
                }
            }
        }
        if !bad.is_empty() {
            let mut q = OpenOptions::new()
                .append(true)
                .create(true)
                .open(self.quarantine_path())
                .map_err(|e| e.to_string())?;
            for line in &bad {
                writeln!(q, "{line}").map_err(|e| e.to_string())?;
            }
            let mut body = keep.join("\n");
            if !body.is_empty() {
                body.push('\n');
            }
            f.set_len(0).map_err(|e| e.to_string())?;
            (&f).write_all(body.as_bytes()).map_err(|e| e.to_string())?;
        }
        Ok(report)
    }

    /// Exact match on kind, fingerprint and parameters; the latest record wins.
    pub fn lookup(&self, kind: Kind, fingerprint: &str, params: &Value) -> Result<Option<ResultRecord>, String> {
        Ok(self
            .load()?
            .records
            .into_iter()
            .rev()
            .find(|r| r.kind == kind && r.fingerprint == fingerprint && &r.params == params))
    }
}
