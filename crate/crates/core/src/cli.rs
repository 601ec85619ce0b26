//! Command implementations behind the `baga` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analysis::{fit_occurrences, RegressionFit};
use crate::colony::{run, Protocol};
use crate::config::RunConfig;
use crate::error::{BagaError, Result};
use crate::output::{self, BundleSummary, FitSummary};
use crate::problems::{brute_force_oracle, ProblemKind, ProblemSpec};
use crate::sweep::{map_seeds, thread_cap, SeedSummary, SweepSummary};

fn load(config: &Path, seed: Option<u64>, variant: Option<Protocol>) -> Result<RunConfig> {
    Ok(RunConfig::load(config)?.with_overrides(seed, variant))
}

/// Run one colony and write its bundle into `out`.
pub fn cmd_run(config: &Path, seed: Option<u64>, out: &Path, variant: Option<Protocol>) -> Result<BundleSummary> {
    let rc = load(config, seed, variant)?;
    let cfg = rc.to_colony()?;
    let record = run(&cfg)?;
    output::write_bundle(out, &rc, &cfg, &record)
}

/// Fit an occurrence CSV and write the summary JSON.
pub fn cmd_fit(input: &Path, out: &Path) -> Result<RegressionFit> {
    let rows = output::read_occurrences(input)?;
    let times: Vec<f64> = rows.iter().map(|r| r.time).collect();
    let fit = fit_occurrences(&times)?;
    let bytes = FitSummary::from_result(&Ok(fit), times.len()).to_json();
    fs::write(out, bytes).map_err(|e| BagaError::io(out, e))?;
    Ok(fit)
}

fn sig6(x: f64) -> String {
    let r: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    format!("{}", if r == 0.0 { 0.0 } else { r })
}

/// Exhaustive report for one problem under its reference parameters.
pub fn cmd_oracle(kind: ProblemKind) -> Result<String> {
    let spec = ProblemSpec::preset(kind)?;
    let report = brute_force_oracle(&spec)?;
    let mut s = String::new();
    let _ = writeln!(s, "problem: {kind}");
    let _ = writeln!(s, "optimal ({} of {}):", report.optimal.len(), report.rows.len());
    for p in &report.optimal {
        let row = report
            .rows
            .iter()
            .find(|r| &r.plasmid == p)
            .expect("optimum comes from the rows");
        let ev = &row.evaluation;
        let line = match kind {
            ProblemKind::SineRatio | ProblemKind::Booth => {
                format!("{} → {} ({})", p.genome_string(), sig6(ev.objective), spec.describe(p))
            }
            ProblemKind::KnapsackStandard | ProblemKind::KnapsackImproved => format!(
                "{} → profit {}, weight {}",
                p.genome_string(),
                sig6(ev.objective),
                sig6(ev.weight.unwrap_or(0.0))
            ),
            ProblemKind::Hamiltonian3 => format!(
                "{} → {} ({} of {} orders)",
                spec.describe(p),
                ev.fluorescence.map(|f| f.to_string()).unwrap_or_default(),
                report.optimal.len(),
                report.rows.len()
            ),
        };
        let _ = writeln!(s, "  {line}");
    }
    let _ = writeln!(
        s,
        "\n{:<18} {:<14} {:>12} {:>9} {:>12} {:>10} {:>8}",
        "genome", "decoded", "objective", "feasible", "iptg", "z", "optimal"
    );
    for r in &report.rows {
        let ev = &r.evaluation;
        let _ = writeln!(
            s,
            "{:<18} {:<14} {:>12} {:>9} {:>12} {:>10} {:>8}",
            r.plasmid.genome_string(),
            spec.describe(&r.plasmid),
            sig6(ev.objective),
            ev.feasible,
            sig6(ev.iptg),
            sig6(ev.z),
            if report.optimal.contains(&r.plasmid) { "*" } else { "" }
        );
    }
    Ok(s)
}

/// Growth plot from a census or occurrence CSV.
pub fn cmd_plot(census: Option<&Path>, occurrences: Option<&Path>, out: &Path, log: bool) -> Result<()> {
    let svg = match (census, occurrences) {
        (Some(c), None) => {
            let rows = output::read_census(c)?;
            output::census_plot(&rows, log, &c.display().to_string())
        }
        (None, Some(o)) => {
            let rows = output::read_occurrences(o)?;
            output::occurrence_plot(&rows, log, &o.display().to_string())
        }
        _ => {
            return Err(BagaError::config(
                "plot",
                "give exactly one of --census or --occurrences",
            ))
        }
    };
    fs::write(out, svg).map_err(|e| BagaError::io(out, e))
}

/// Multi-seed run: one bundle per seed under `out/seed_<n>` plus `out/sweep.json`.
pub fn cmd_sweep(config: &Path, seeds: &[u64], out: &Path, variant: Option<Protocol>) -> Result<SweepSummary> {
    let base = load(config, None, variant)?;
    base.to_colony()?;
    let threads = thread_cap()?;
    let results = map_seeds(seeds, threads, |seed| -> Result<_> {
        let rc = base.clone().with_overrides(Some(seed), None);
        let cfg = rc.to_colony()?;
        let record = run(&cfg)?;
        let bundle = output::write_bundle(&out.join(format!("seed_{seed}")), &rc, &cfg, &record)?;
        Ok((record, bundle))
    })?;
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let runs = results
        .iter()
        .map(|(rec, bundle)| SeedSummary {
            seed: rec.seed,
            occurrences: rec.occurrences.len(),
            first_occurrence: rec.first_occurrence().map(output::round_sig),
            final_size: rec.final_population.len(),
            fit: FitSummary::from_result(&bundle.fit, rec.occurrences.len()),
        })
        .collect();
    let records: Vec<_> = results.iter().map(|(r, _)| r).collect();
    let summary = SweepSummary::from_runs(runs, &records);
    let path = out.join("sweep.json");
    let mut bytes = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    bytes.push(b'\n');
    fs::write(&path, bytes).map_err(|e| BagaError::io(&path, e))?;
    Ok(summary)
}
