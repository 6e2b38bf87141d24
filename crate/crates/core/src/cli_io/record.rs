use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::scenarios::{BoundaryComponent, PredictedSpectrum};

pub const VERSION: &str = concat!("weyl-lab ", env!("CARGO_PKG_VERSION"));
pub const CSV_HEADER: [&str; 4] = ["offset", "localization_norm", "dynamical_sup", "symbol_decay"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?}, expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub offset: f64,
    pub localization_norm: f64,
    pub dynamical_sup: Option<f64>,
    pub symbol_decay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBlock {
    pub eigenvalues: Vec<f64>,
    pub predicted: PredictedSpectrum,
    /// Predicted set restricted to the numeric range; what the distance is measured on.
    pub compared: PredictedSpectrum,
    pub clipped: bool,
    pub one_sided_hausdorff: f64,
    pub within_tolerance: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub component: BoundaryComponent,
    pub epsilon: f64,
    pub achieved: bool,
    pub first_below: Option<f64>,
    pub min_norm: f64,
    /// The whole curve stays at or above the plateau tolerance.
    pub plateau: bool,
    pub seminorm_order: usize,
    pub seminorm_decay: Vec<f64>,
    pub commutator_defect: Option<f64>,
    /// Every dynamical value is within the static bound.
    pub propagation_holds: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub hamiltonian_seconds: f64,
    pub spectrum_seconds: f64,
    pub sweep_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub run_id: String,
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub config: ScenarioConfig,
    pub normalizations: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub sweep: Option<SweepSummary>,
    pub spectrum: Option<SpectrumBlock>,
    pub timing: Timing,
}

/// SHA-256 of the canonical JSON form of the config.
pub fn config_hash(config: &ScenarioConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

impl ResultRecord {
    pub fn new(command: &str, config: ScenarioConfig, normalizations: Vec<String>) -> Self {
        let hash = config_hash(&config);
        ResultRecord {
            run_id: format!("{command}-{}-seed{}", &hash[..12], config.seed),
            command: command.to_string(),
            version: VERSION.to_string(),
            config_hash: hash,
            config,
            normalizations,
            rows: Vec::new(),
            sweep: None,
            spectrum: None,
            timing: Timing::default(),
        }
    }
}

fn float(v: f64) -> String {
    // shortest round-trip representation
    format!("{v:?}")
}

/// Rows as CSV bytes, header included.
pub fn rows_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| Error::invalid(format!("csv encoding failed: {e}"));
    w.write_record(CSV_HEADER).map_err(wrap)?;
    for r in rows {
        let opt = |v: Option<f64>| v.map(float).unwrap_or_default();
        w.write_record([
            float(r.offset),
            float(r.localization_norm),
            opt(r.dynamical_sup),
            opt(r.symbol_decay),
        ])
        .map_err(wrap)?;
    }
    w.into_inner()
        .map_err(|e| Error::invalid(format!("csv encoding failed: {e}")))
}

pub fn parse_rows_csv(bytes: &[u8]) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(bytes);
    let bad = |e: String| Error::invalid(format!("csv decoding failed: {e}"));
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<Option<f64>> {
            let s = &rec[i];
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|e| bad(format!("{s:?}: {e}")))
            }
        };
        out.push(SweepRow {
            offset: num(0)?.ok_or_else(|| bad("missing offset".into()))?,
            localization_norm: num(1)?.ok_or_else(|| bad("missing localization_norm".into()))?,
            dynamical_sup: num(2)?,
            symbol_decay: num(3)?,
        });
    }
    Ok(out)
}

pub fn record_json(record: &ResultRecord) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(record).map_err(|e| Error::invalid(format!("json encoding failed: {e}")))?;
    v.push(b'\n');
    Ok(v)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
}

/// Version and config hash for the files of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub version: String,
    pub config_hash: String,
    pub files: Vec<ManifestEntry>,
}

/// Writes the record in `format` under `dir`; returns the paths written.
///
/// CSV output is `<command>.csv` with exactly the sweep columns. JSON output
/// is `<command>.json`, the full record. Both come with `<command>.manifest.json`
/// carrying version, config hash and output digests.
pub fn emit(record: &ResultRecord, format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    match format {
        OutputFormat::Csv => {
            files.push((format!("{}.csv", record.command), rows_csv(&record.rows)?));
            if let Some(s) = &record.spectrum {
                let mut w = csv::Writer::from_writer(Vec::new());
                let wrap = |e: csv::Error| Error::invalid(format!("csv encoding failed: {e}"));
                w.write_record(["index", "eigenvalue"]).map_err(wrap)?;
                for (k, e) in s.eigenvalues.iter().enumerate() {
                    w.write_record([k.to_string(), float(*e)]).map_err(wrap)?;
                }
                let eig = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
                files.push((format!("{}.eigenvalues.csv", record.command), eig));
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["lo", "hi"]).map_err(wrap)?;
                for iv in s.predicted.intervals() {
                    w.write_record([float(iv.lo), float(iv.hi)]).map_err(wrap)?;
                }
                let pred = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
                files.push((format!("{}.predicted.csv", record.command), pred));
            }
        }
        OutputFormat::Json => files.push((format!("{}.json", record.command), record_json(record)?)),
    }
    let manifest = Manifest {
        run_id: record.run_id.clone(),
        version: record.version.clone(),
        config_hash: record.config_hash.clone(),
        files: files
            .iter()
            .map(|(name, bytes)| ManifestEntry {
                file: name.clone(),
                sha256: hex::encode(Sha256::digest(bytes)),
            })
            .collect(),
    };
    let mut mbytes = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::invalid(e.to_string()))?;
    mbytes.push(b'\n');
    files.push((format!("{}.manifest.json", record.command), mbytes));
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}
