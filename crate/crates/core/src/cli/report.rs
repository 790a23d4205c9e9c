//! `report`: parameter counts, the classical-count discrepancy and headline
//! ensemble numbers gathered from `eval` summaries.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;

use serde::Serialize;

use crate::models::{ModelKind, CLASSICAL_PARAM_COUNT, QMDN_PARAM_COUNT};

use super::config::ConfigFile;
use super::evaluate::{EvalSummary, SUMMARY_FILE};
use super::manifest::{write_file, write_json, RunManifest};
use super::{output_root, CliError, CliResult, ReportArgs};

/// Classical parameter count quoted alongside the 1-5-5 description.
pub const QUOTED_CLASSICAL_COUNT: usize = 105;

pub const CLASSICAL_COUNT_NOTE: &str = "The reference describes the classical MDN as one hidden layer of 5 tanh units \
and quotes 105 parameters. No 1-5-5 or 1-5-15 dense network has 105 parameters: \
a 5-mode head needs 15 outputs (weight logit, mean, log-sigma per mode), giving \
1*5+5 + 5*15+15 = 100. This implementation uses that 100-parameter network.";

/// Reference final training NLL per (benchmark, model kind).
pub fn reference_nll(benchmark: &str, kind: ModelKind) -> Option<f64> {
    match (benchmark, kind) {
        ("logistic", ModelKind::Mdn) => Some(-1.576),
        ("logistic", ModelKind::Qmdn) => Some(-1.691),
        _ => None,
    }
}

#[derive(Debug, Serialize)]
struct KindRow {
    members: usize,
    final_train_nll_mean: Option<f64>,
    final_train_nll_std: Option<f64>,
    reference_final_nll: Option<f64>,
    held_out_nll_mean: f64,
    median_mode_count: Vec<(f64, f64)>,
}

#[derive(Debug, Serialize)]
struct BenchmarkRow {
    ensembles: BTreeMap<ModelKind, KindRow>,
    crossing_epoch: Option<usize>,
    member_crossing_epochs: Vec<Option<usize>>,
}

#[derive(Debug, Serialize)]
struct Report {
    param_counts: BTreeMap<ModelKind, usize>,
    quoted_classical_count: usize,
    classical_count_note: &'static str,
    benchmarks: BTreeMap<String, BenchmarkRow>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into())
}

fn render(report: &Report) -> String {
    let mut s = String::from("# Q-MDN vs classical MDN\n\n## Parameter counts\n\n");
    for (kind, n) in &report.param_counts {
        let _ = writeln!(s, "- {kind}: {n}");
    }
    let _ = writeln!(
        s,
        "\nQuoted classical count: {}. {}\n",
        report.quoted_classical_count, report.classical_count_note
    );
    for (bench, row) in &report.benchmarks {
        let _ = writeln!(s, "## {bench}\n");
        let _ = writeln!(s, "| model | members | final train NLL (mean ± std) | reference | held-out NLL | median modes |");
        let _ = writeln!(s, "|---|---|---|---|---|---|");
        for (kind, k) in &row.ensembles {
            let modes: Vec<String> = k.median_mode_count.iter().map(|(x, m)| format!("x={x}: {m}")).collect();
            let _ = writeln!(
                s,
                "| {kind} | {} | {} ± {} | {} | {:.4} | {} |",
                k.members,
                fmt_opt(k.final_train_nll_mean),
                fmt_opt(k.final_train_nll_std),
                fmt_opt(k.reference_final_nll),
                k.held_out_nll_mean,
                modes.join(", ")
            );
        }
        let crossing = row
            .crossing_epoch
            .map(|e| e.to_string())
            .unwrap_or_else(|| "none".into());
        let per_member: Vec<String> = row
            .member_crossing_epochs
            .iter()
            .map(|c| c.map(|e| e.to_string()).unwrap_or_else(|| "-".into()))
            .collect();
        let _ = writeln!(s, "\nCrossing epoch of the ensemble-mean losses: {crossing}");
        if !per_member.is_empty() {
            let _ = writeln!(s, "Per member pair: {}", per_member.join(" "));
        }
        s.push('\n');
    }
    s
}

pub fn report(args: ReportArgs, cfg: &ConfigFile) -> CliResult<()> {
    let root = output_root();
    let mut evals = args.evals;
    if evals.is_empty() {
        if let Some(dir) = cfg.opt::<PathBuf>(None, "eval")? {
            evals.push(dir);
        }
    }
    let out_dir = cfg.or(args.out, "out", root.join("report"))?;

    let mut manifest = RunManifest::new("report");
    let mut benchmarks = BTreeMap::new();
    for dir in &evals {
        let summary = EvalSummary::load(dir)
            .map_err(|e| CliError::Config(format!("cannot load eval summary from {}: {e}", dir.display())))?;
        manifest.inputs.push(dir.join(SUMMARY_FILE));
        let ensembles = summary
            .ensembles
            .iter()
            .map(|(&kind, e)| {
                (
                    kind,
                    KindRow {
                        members: e.members,
                        final_train_nll_mean: e.final_train_nll_mean,
                        final_train_nll_std: e.final_train_nll_std,
                        reference_final_nll: reference_nll(&summary.benchmark, kind),
                        held_out_nll_mean: e.held_out_nll_mean,
                        median_mode_count: e.median_mode_count.clone(),
                    },
                )
            })
            .collect();
        benchmarks.insert(
            summary.benchmark.clone(),
            BenchmarkRow {
                ensembles,
                crossing_epoch: summary.crossing_epoch,
                member_crossing_epochs: summary.member_crossing_epochs.clone(),
            },
        );
    }

    let report = Report {
        param_counts: BTreeMap::from([(ModelKind::Mdn, CLASSICAL_PARAM_COUNT), (ModelKind::Qmdn, QMDN_PARAM_COUNT)]),
        quoted_classical_count: QUOTED_CLASSICAL_COUNT,
        classical_count_note: CLASSICAL_COUNT_NOTE,
        benchmarks,
    };
    let text = render(&report);
    let md = out_dir.join("report.md");
    let json = out_dir.join("report.json");
    write_file(&md, text.as_bytes())?;
    write_json(&json, &report)?;
    manifest.outputs = vec![md, json];
    manifest.write(&out_dir.join("manifest.json"))?;
    print!("{text}");
    Ok(())
}
