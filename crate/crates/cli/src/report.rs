//! Report rendering: results CSV, aligned text tables, seed ledger, traces.

use std::fmt::Write as _;

use cipherchain_core::harness::{summarize, ExperimentReport};
use cipherchain_core::mcmc::TraceStep;

use crate::error::{CliError, Result};
use crate::runner::SeedRecord;

pub const REPORT_CSV_HEADER: [&str; 10] = [
    "prng",
    "en",
    "ac",
    "ac_support",
    "nsd",
    "runs",
    "iterations",
    "p",
    "threshold",
    "seed",
];

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| CliError::Config(format!("csv buffer: {e}")))
}

/// One row per (generator, experiment). Accuracies carry six decimals.
pub fn report_csv(reports: &[ExperimentReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_CSV_HEADER)?;
    for report in reports {
        let chain = &report.config.chain;
        for row in &report.rows {
            w.write_record([
                report.prng.name().to_string(),
                row.en.to_string(),
                format!("{:.6}", row.ac),
                format!("{:.6}", row.ac_support),
                row.nsd.to_string(),
                row.runs.to_string(),
                chain.iterations.to_string(),
                chain.p.to_string(),
                report.config.success_threshold.to_string(),
                row.seed.to_string(),
            ])?;
        }
    }
    finish(w)
}

/// Per-generator means, one CSV row each.
pub fn summary_csv(reports: &[ExperimentReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "prng",
        "experiments",
        "mean_ac",
        "mean_ac_support",
        "mean_nsd",
        "mean_text_accuracy",
    ])?;
    for report in reports {
        let s = summarize(report);
        w.write_record([
            s.prng.name().to_string(),
            s.experiments.to_string(),
            format!("{:.6}", s.mean_ac),
            format!("{:.6}", s.mean_ac_support),
            format!("{:.2}", s.mean_nsd),
            format!("{:.6}", s.mean_text_accuracy),
        ])?;
    }
    finish(w)
}

/// `EN  AC  NSD` table for each generator, then a comparison of means.
pub fn render_tables(reports: &[ExperimentReport]) -> String {
    let mut out = String::new();
    for report in reports {
        let runs = report.rows.first().map_or(0, |r| r.runs);
        let _ = writeln!(out, "{} prng ({} runs per experiment)", report.prng, runs);
        let _ = writeln!(out, "{:>4}  {:>8}  {:>10}  {:>5}", "EN", "AC", "AC(supp)", "NSD");
        for row in &report.rows {
            let _ = writeln!(
                out,
                "{:>4}  {:>8.4}  {:>10.4}  {:>5}",
                row.en, row.ac, row.ac_support, row.nsd
            );
        }
        out.push('\n');
    }
    if reports.len() > 1 {
        let _ = writeln!(out, "per-generator means");
        let _ = writeln!(
            out,
            "{:<12}  {:>8}  {:>10}  {:>8}  {:>9}",
            "prng", "AC", "AC(supp)", "NSD", "text acc"
        );
        for report in reports {
            let s = summarize(report);
            let _ = writeln!(
                out,
                "{:<12}  {:>8.4}  {:>10.4}  {:>8.2}  {:>9.4}",
                s.prng.name(),
                s.mean_ac,
                s.mean_ac_support,
                s.mean_nsd,
                s.mean_text_accuracy
            );
        }
    }
    out
}

/// One JSON object per line.
pub fn seed_ledger(seeds: &[SeedRecord]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for record in seeds {
        serde_json::to_writer(&mut out, record)?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Per-step chain trace: `iteration,log_score,accepted`.
pub fn trace_csv(steps: &[TraceStep]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iteration", "log_score", "accepted"])?;
    for s in steps {
        w.write_record([
            s.iteration.to_string(),
            format!("{:.6}", s.log_score),
            u8::from(s.accepted).to_string(),
        ])?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cipherchain_core::harness::{ExperimentRow, HarnessConfig};
    use cipherchain_core::PrngKind;

    fn report(kind: PrngKind) -> ExperimentReport {
        ExperimentReport {
            prng: kind,
            master_seed: 1,
            config: HarnessConfig::default(),
            rows: (1..=2)
                .map(|en| ExperimentRow {
                    en,
                    ac: 0.5 + f64::from(en) / 10.0,
                    ac_support: 0.75,
                    nsd: 40 + u64::from(en),
                    runs: 100,
                    mean_text_accuracy: 0.8,
                    seed: 1000 + u64::from(en),
                })
                .collect(),
        }
    }

    #[test]
    fn csv_schema() {
        let bytes = report_csv(&[report(PrngKind::Xorshift128)]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("prng,en,ac,ac_support,nsd,runs,iterations,p,threshold,seed")
        );
        assert_eq!(
            lines.next(),
            Some("xorshift128,1,0.600000,0.750000,41,100,10000,1,0.9,1001")
        );
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn tables_include_means() {
        let reports = [report(PrngKind::Lcg48), report(PrngKind::ChaoticIteration)];
        let t = render_tables(&reports);
        assert!(t.contains("drand48 prng (100 runs per experiment)"));
        assert!(t.contains("per-generator means"));
        assert!(t.contains("ci"));
        let summary = String::from_utf8(summary_csv(&reports).unwrap()).unwrap();
        assert!(summary.contains("drand48,2,0.650000,0.750000,41.50,0.800000"));
    }

    #[test]
    fn ledger_is_json_lines() {
        let seeds = [
            SeedRecord { prng: "ci".into(), en: 1, run: 0, seed: 5 },
            SeedRecord { prng: "ci".into(), en: 1, run: 1, seed: 6 },
        ];
        let text = String::from_utf8(seed_ledger(&seeds).unwrap()).unwrap();
        assert_eq!(text, "{\"prng\":\"ci\",\"en\":1,\"run\":0,\"seed\":5}\n{\"prng\":\"ci\",\"en\":1,\"run\":1,\"seed\":6}\n");
    }
}
