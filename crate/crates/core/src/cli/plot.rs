//! `plot`: SVG figures from an `eval` directory and training loss histories.

use std::path::{Path, PathBuf};

use crate::error::Error;
use crate::models::ModelKind;

use super::config::ConfigFile;
use super::evaluate::{x_tag, EvalSummary};
use super::manifest::{write_file, RunManifest};
use super::svg::{Chart, BLACK, BLUE, GRAY, RED};
use super::{output_root, CliError, CliResult, PlotArgs};

/// A numeric CSV table: header names and rows of equal width.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str, path: &Path) -> crate::Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or_else(|| Error::parse(path, 1, "empty file"))?;
        let header: Vec<String> = head.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|_| Error::parse(path, i + 1, "non-numeric field"))?;
            if row.len() != header.len() {
                return Err(Error::parse(
                    path,
                    i + 1,
                    format!("expected {} fields, found {}", header.len(), row.len()),
                ));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn load(path: &Path) -> crate::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }
}

fn kind_color(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Mdn => BLUE,
        ModelKind::Qmdn => RED,
    }
}

fn kind_label(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Mdn => "classical MDN",
        ModelKind::Qmdn => "Q-MDN",
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Truth rows in gray, model samples in the family color: one circle per row.
pub fn scatter_svg(title: &str, truth: &Table, samples: &Table, color: &str) -> String {
    let all = || truth.rows.iter().chain(&samples.rows);
    let (x0, x1) = extent(all().map(|r| r[0]));
    let (y0, y1) = extent(all().map(|r| r[1]));
    let mut chart = Chart::new(title, "x", "y", (x0, x1), (y0, y1));
    let pts = |t: &Table| t.rows.iter().map(|r| (r[0], r[1])).collect::<Vec<_>>();
    chart.circles(&pts(truth), GRAY, 1.2, 0.35);
    chart.circles(&pts(samples), color, 1.2, 0.35);
    chart.legend(0, "data", GRAY);
    chart.legend(1, "model samples", color);
    chart.render()
}

/// Density panel over the full evaluation grid: every member faint, the
/// ensemble mean bold, the truth in black when available.
pub fn density_svg(title: &str, grid: (f64, f64), kinds: &[(ModelKind, Table)], truth: Option<&Table>) -> String {
    let mut top: f64 = 0.0;
    for (_, t) in kinds {
        let last = t.header.len() - 1;
        top = top.max(t.rows.iter().map(|r| r[last]).fold(0.0, f64::max));
    }
    if let Some(t) = truth {
        top = top.max(t.rows.iter().map(|r| r[1]).fold(0.0, f64::max));
    }
    let mut chart = Chart::new(title, "y", "density", grid, (0.0, 1.1 * top));
    let mut slot = 0;
    for (kind, t) in kinds {
        let ys = t.column(0);
        let color = kind_color(*kind);
        let last = t.header.len() - 1;
        for c in 1..last {
            chart.polyline(&ys, &t.column(c), color, 0.25);
        }
        chart.polyline(&ys, &t.column(last), color, 1.0);
        chart.legend(slot, kind_label(*kind), color);
        slot += 1;
    }
    if let Some(t) = truth {
        chart.polyline(&t.column(0), &t.column(1), BLACK, 1.0);
        chart.legend(slot, "truth", BLACK);
    }
    chart.render()
}

/// Training NLL per epoch, one curve per member, colored by family.
pub fn loss_svg(title: &str, histories: &[(ModelKind, Table)]) -> String {
    let all = || histories.iter().flat_map(|(_, t)| t.rows.iter());
    let (e0, e1) = extent(all().map(|r| r[0]));
    let (l0, l1) = extent(all().map(|r| r[1]));
    let mut chart = Chart::new(title, "epoch", "training NLL", (e0, e1), (l0, l1));
    for (kind, t) in histories {
        chart.polyline(&t.column(0), &t.column(1), kind_color(*kind), 0.8);
    }
    for (slot, kind) in ModelKind::ALL.iter().enumerate() {
        chart.legend(slot, kind_label(*kind), kind_color(*kind));
    }
    chart.render()
}

fn loss_files(dir: &Path) -> CliResult<Vec<(ModelKind, PathBuf)>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Config(format!("cannot read runs directory {}: {e}", dir.display())))?;
    let mut out: Vec<(ModelKind, PathBuf)> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter_map(|p| {
            let name = p.file_name()?.to_str()?;
            let stem = name.strip_suffix("_loss.csv")?;
            let kind = stem.split('_').next()?.parse().ok()?;
            Some((kind, p))
        })
        .collect();
    out.sort_by(|a, b| a.1.cmp(&b.1));
    Ok(out)
}

pub fn plot(args: PlotArgs, cfg: &ConfigFile) -> CliResult<()> {
    let eval_dir: PathBuf = cfg
        .opt(args.eval, "eval")?
        .ok_or_else(|| CliError::Config("--eval is required".into()))?;
    let summary = EvalSummary::load(&eval_dir).map_err(|e| match e {
        Error::Io { .. } => CliError::Config(format!("{e} (is {} an eval directory?)", eval_dir.display())),
        other => other.into(),
    })?;
    let bench = summary.benchmark.clone();
    let runs_dir = cfg.or(args.runs, "runs", summary.models_dir.clone())?;
    let out_dir = cfg.or(args.out, "out", output_root().join("figures").join(&bench))?;
    let kinds: Vec<ModelKind> = summary.ensembles.keys().copied().collect();

    let mut manifest = RunManifest::new("plot");
    manifest.set("benchmark", &bench);
    manifest.inputs.push(eval_dir.join(super::evaluate::SUMMARY_FILE));

    let truth_path = eval_dir.join("samples_truth.csv");
    let truth = Table::load(&truth_path)?;
    manifest.inputs.push(truth_path);
    for &kind in &kinds {
        let path = eval_dir.join(format!("samples_{kind}.csv"));
        let samples = Table::load(&path)?;
        manifest.inputs.push(path);
        let svg = scatter_svg(&format!("{bench}: data vs {} samples", kind_label(kind)), &truth, &samples, kind_color(kind));
        let out = out_dir.join(format!("scatter_{kind}.svg"));
        write_file(&out, svg.as_bytes())?;
        manifest.outputs.push(out);
    }

    for &x in &summary.figure_xs {
        let tag = x_tag(x);
        let mut tables = Vec::new();
        for &kind in &kinds {
            let path = eval_dir.join(format!("density_{kind}_x{tag}.csv"));
            tables.push((kind, Table::load(&path)?));
            manifest.inputs.push(path);
        }
        let truth_path = eval_dir.join(format!("density_truth_x{tag}.csv"));
        let truth = if truth_path.is_file() {
            manifest.inputs.push(truth_path.clone());
            Some(Table::load(&truth_path)?)
        } else {
            None
        };
        let svg = density_svg(
            &format!("{bench}: p(y | x = {tag})"),
            (summary.grid.y_min, summary.grid.y_max),
            &tables,
            truth.as_ref(),
        );
        let out = out_dir.join(format!("density_x{tag}.svg"));
        write_file(&out, svg.as_bytes())?;
        manifest.outputs.push(out);
    }

    let files = loss_files(&runs_dir)?;
    if !files.is_empty() {
        let mut histories = Vec::new();
        for (kind, path) in files {
            histories.push((kind, Table::load(&path)?));
            manifest.inputs.push(path);
        }
        let out = out_dir.join("loss.svg");
        write_file(&out, loss_svg(&format!("{bench}: training loss"), &histories).as_bytes())?;
        manifest.outputs.push(out);
    }

    manifest.write(&out_dir.join("manifest.json"))?;
    eprintln!("wrote {} figures to {}", manifest.outputs.len(), out_dir.display());
    Ok(())
}
