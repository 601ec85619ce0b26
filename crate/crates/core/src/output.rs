//! Run bundles: manifest, CSV series, fit summary and plots.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{census_to_series, fit_occurrences, occurrences_to_series, RegressionFit};
use crate::colony::{CensusSample, ColonyConfig, HaltReason, Occurrence, RunRecord, RunStats};
use crate::config::RunConfig;
use crate::error::{BagaError, Result};
use crate::plot;

pub const OCCURRENCES_HEADER: [&str; 4] = ["index", "time", "bacterium_id", "genome"];
pub const CENSUS_HEADER: [&str; 4] = ["time", "colony_size", "optimal_count", "mean_fitness"];

/// Round to nine significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Nine significant digits, shortest form.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&r.abs()) || !r.is_finite() {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn csv_err(path: &Path, e: csv::Error) -> BagaError {
    BagaError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn to_csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn occurrences_csv(occ: &[Occurrence]) -> Vec<u8> {
    to_csv(
        &OCCURRENCES_HEADER,
        occ.iter().enumerate().map(|(i, o)| {
            vec![
                (i + 1).to_string(),
                fmt_num(o.time),
                o.bacterium_id.to_string(),
                o.genome.genome_string(),
            ]
        }),
    )
}

pub fn census_csv(census: &[CensusSample]) -> Vec<u8> {
    to_csv(
        &CENSUS_HEADER,
        census.iter().map(|s| {
            vec![
                fmt_num(s.time),
                s.colony_size.to_string(),
                s.optimal_count.to_string(),
                fmt_num(s.mean_fitness),
            ]
        }),
    )
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct OccurrenceRow {
    pub index: usize,
    pub time: f64,
    pub bacterium_id: u64,
    pub genome: String,
}

#[derive(Deserialize)]
struct CensusRow {
    time: f64,
    colony_size: usize,
    optimal_count: usize,
    mean_fitness: f64,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let found = r.headers().map_err(|e| csv_err(path, e))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(BagaError::Input {
            path: path.to_path_buf(),
            message: format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}

pub fn read_occurrences(path: &Path) -> Result<Vec<OccurrenceRow>> {
    read_rows(path, &OCCURRENCES_HEADER)
}

pub fn read_census(path: &Path) -> Result<Vec<CensusSample>> {
    let rows: Vec<CensusRow> = read_rows(path, &CENSUS_HEADER)?;
    Ok(rows
        .into_iter()
        .map(|r| CensusSample {
            time: r.time,
            colony_size: r.colony_size,
            optimal_count: r.optimal_count,
            mean_fitness: r.mean_fitness,
        })
        .collect())
}

/// Contents of `fit.json`. Coefficients are null when the fit failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub message: Option<String>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub r2: Option<f64>,
    pub p_value: Option<f64>,
    pub n: usize,
}

impl FitSummary {
    pub fn from_result(res: &Result<RegressionFit>, n: usize) -> Self {
        match res {
            Ok(f) => FitSummary {
                status: "ok".into(),
                message: None,
                a: Some(round_sig(f.a)),
                b: Some(round_sig(f.b)),
                r2: Some(round_sig(f.r2)),
                p_value: Some(round_sig(f.p_value)),
                n: f.n,
            },
            Err(e) => FitSummary {
                status: "insufficient_data".into(),
                message: Some(e.to_string()),
                a: None,
                b: None,
                r2: None,
                p_value: None,
                n,
            },
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("plain struct");
        v.push(b'\n');
        v
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    /// Configuration after command-line overrides.
    pub config: &'a RunConfig,
    /// Parameters the simulation actually used.
    pub effective: ColonyConfig,
    pub halt: HaltReason,
    pub end_time: f64,
    pub final_size: usize,
    pub occurrences: usize,
    pub stats: RunStats,
    /// SHA-256 of every other file in the bundle.
    pub files: BTreeMap<String, String>,
}

pub fn effective_config(cfg: &ColonyConfig) -> ColonyConfig {
    ColonyConfig {
        problem: cfg.effective_problem(),
        ..cfg.clone()
    }
}

/// What a bundle write produced.
#[derive(Debug)]
pub struct BundleSummary {
    pub dir: PathBuf,
    pub fit: Result<RegressionFit>,
    pub files: BTreeMap<String, String>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| BagaError::io(path, e))
}

/// Renders every bundle file in memory, keyed by file name.
pub fn render_bundle(
    run_cfg: &RunConfig,
    cfg: &ColonyConfig,
    record: &RunRecord,
) -> (BTreeMap<String, Vec<u8>>, Result<RegressionFit>) {
    let times = record.occurrence_times();
    let fit = fit_occurrences(&times);
    let mut files = BTreeMap::new();
    files.insert("occurrences.csv".to_string(), occurrences_csv(&record.occurrences));
    files.insert("census.csv".to_string(), census_csv(&record.census));
    files.insert(
        "fit.json".to_string(),
        FitSummary::from_result(&fit, times.len()).to_json(),
    );
    let title = format!("{} {} seed {}", cfg.problem.kind, cfg.protocol, cfg.seed);
    files.insert(
        "growth.svg".to_string(),
        plot::growth_svg(&occurrences_to_series(&times), fit.as_ref().ok(), false, &title).into_bytes(),
    );
    files.insert(
        "colony.svg".to_string(),
        plot::colony_svg(
            &record.final_population,
            cfg.problem.circuit.reporter.m,
            record.end_time,
            &title,
        )
        .into_bytes(),
    );
    let hashes: BTreeMap<String, String> = files.iter().map(|(k, v)| (k.clone(), sha256_hex(v))).collect();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config: run_cfg,
        effective: effective_config(cfg),
        halt: record.halt,
        end_time: round_sig(record.end_time),
        final_size: record.final_population.len(),
        occurrences: record.occurrences.len(),
        stats: record.stats,
        files: hashes,
    };
    let mut m = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    m.push(b'\n');
    files.insert("manifest.json".to_string(), m);
    (files, fit)
}

pub fn write_bundle(dir: &Path, run_cfg: &RunConfig, cfg: &ColonyConfig, record: &RunRecord) -> Result<BundleSummary> {
    fs::create_dir_all(dir).map_err(|e| BagaError::io(dir, e))?;
    let (files, fit) = render_bundle(run_cfg, cfg, record);
    let mut hashes = BTreeMap::new();
    for (name, bytes) in &files {
        write_file(&dir.join(name), bytes)?;
        hashes.insert(name.clone(), sha256_hex(bytes));
    }
    Ok(BundleSummary {
        dir: dir.to_path_buf(),
        fit,
        files: hashes,
    })
}

/// Growth plot from a census file, fitted on the binned counts.
pub fn census_plot(census: &[CensusSample], log: bool, title: &str) -> String {
    let pts: Vec<(f64, f64)> = census.iter().map(|s| (s.time, s.optimal_count as f64)).collect();
    let fit = crate::analysis::fit_exponential(&census_to_series(census)).ok();
    plot::growth_svg(&pts, fit.as_ref(), log, title)
}

/// Growth plot from occurrence rows.
pub fn occurrence_plot(rows: &[OccurrenceRow], log: bool, title: &str) -> String {
    let times: Vec<f64> = rows.iter().map(|r| r.time).collect();
    let fit = fit_occurrences(&times).ok();
    plot::growth_svg(&occurrences_to_series(&times), fit.as_ref(), log, title)
}
