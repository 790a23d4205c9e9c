//! `eval`: held-out NLL, density curves, modes and KL for every trained model.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{self, Benchmark, Dataset, DoubleSlitTruth};
use crate::eval::{self, DensityCurve, MODE_THRESHOLD};
use crate::models::{read_model_file, ConditionalDensity, MixtureModel, Model, ModelKind};
use crate::train::{crossing_epoch, TrainReport};

use super::config::ConfigFile;
use super::manifest::{write_file, write_json, RunManifest};
use super::pipeline::require_file;
use super::{output_root, CliError, CliResult, EvalArgs};

pub const SUMMARY_FILE: &str = "summary.json";
pub const DEFAULT_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub y_min: f64,
    pub y_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub x: f64,
    pub mode_count: usize,
    pub modes: Vec<f64>,
    pub kl: Option<f64>,
}

/// One ensemble member; `(benchmark, model_kind, ensemble_member)` is the key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub benchmark: String,
    pub model_kind: ModelKind,
    pub ensemble_member: usize,
    pub file: PathBuf,
    pub seed: Option<u64>,
    pub final_train_nll: Option<f64>,
    pub held_out_nll: f64,
    pub points: Vec<PointSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub members: usize,
    pub final_train_nll_mean: Option<f64>,
    pub final_train_nll_std: Option<f64>,
    pub held_out_nll_mean: f64,
    pub held_out_nll_std: f64,
    /// Median detected-mode count at each figure x.
    pub median_mode_count: Vec<(f64, f64)>,
    /// Per-epoch training NLL averaged over members.
    pub mean_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub benchmark: String,
    pub data: PathBuf,
    pub models_dir: PathBuf,
    pub grid: Grid,
    pub figure_xs: Vec<f64>,
    pub mode_threshold: f64,
    pub truth: Option<Vec<PointSummary>>,
    pub members: Vec<MemberSummary>,
    pub ensembles: BTreeMap<ModelKind, EnsembleSummary>,
    /// Epoch after which the mean quantum history stays below the classical one.
    pub crossing_epoch: Option<usize>,
    /// The same per member pair `(mdn_k, qmdn_k)`.
    pub member_crossing_epochs: Vec<Option<usize>>,
}

impl EvalSummary {
    pub fn load(dir: &Path) -> crate::Result<Self> {
        let path = dir.join(SUMMARY_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| crate::Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub(crate) struct LoadedModel {
    pub kind: ModelKind,
    pub member: usize,
    pub path: PathBuf,
    pub model: Model,
    pub report: Option<TrainReport>,
}

/// Loads `*.model` files in name order, with their `.run.json` if present.
pub(crate) fn load_models(dir: &Path, bench: Benchmark) -> CliResult<Vec<LoadedModel>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Config(format!("cannot read models directory {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "model"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Config(format!("no .model files in {}", dir.display())));
    }
    let mut counters: BTreeMap<ModelKind, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let file = read_model_file(&path)?;
        if file.benchmark != bench.as_str() && file.benchmark.parse::<Benchmark>().is_ok() {
            return Err(crate::Error::BenchmarkMismatch {
                model: file.benchmark,
                requested: bench.to_string(),
            }
            .into());
        }
        let kind = file.model.kind();
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let counter = counters.entry(kind).or_default();
        let member = stem
            .rsplit_once('_')
            .and_then(|(_, k)| k.parse().ok())
            .unwrap_or(*counter);
        *counter += 1;
        let run = path.with_file_name(format!("{stem}.run.json"));
        let report = match std::fs::read_to_string(&run) {
            Ok(text) => Some(serde_json::from_str(&text).map_err(crate::Error::from)?),
            Err(_) => None,
        };
        out.push(LoadedModel {
            kind,
            member,
            path,
            model: file.model,
            report,
        });
    }
    Ok(out)
}

/// `0.4` -> `"0.4"`; used in file names.
pub fn x_tag(x: f64) -> String {
    format!("{x}")
}

fn point_summary(
    model: &dyn ConditionalDensity,
    x: f64,
    grid: &Grid,
    with_kl: bool,
) -> CliResult<(PointSummary, DensityCurve)> {
    let curve = eval::density_grid(model, x, grid.y_min, grid.y_max, grid.points)?;
    let modes: Vec<f64> = eval::detect_modes(&curve, MODE_THRESHOLD)?.iter().map(|m| m.y).collect();
    let kl = if with_kl {
        Some(eval::kl_to_truth(model, x, &curve.ys)?)
    } else {
        None
    };
    Ok((
        PointSummary {
            x,
            mode_count: modes.len(),
            modes,
            kl,
        },
        curve,
    ))
}

/// Named density columns for one conditioning value.
type Columns = Vec<(String, Vec<f64>)>;

fn density_table(ys: &[f64], columns: &[(String, Vec<f64>)]) -> String {
    let mut out = String::from("y");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, y) in ys.iter().enumerate() {
        out.push_str(&format!("{y:.16e}"));
        for (_, col) in columns {
            out.push_str(&format!(",{:.16e}", col[i]));
        }
        out.push('\n');
    }
    out
}

pub fn eval(args: EvalArgs, cfg: &ConfigFile) -> CliResult<()> {
    let data_path: PathBuf = cfg
        .opt(args.data, "data")?
        .ok_or_else(|| CliError::Config("--data is required".into()))?;
    require_file(&data_path, "dataset")?;
    let ds = data::load_csv(&data_path)?;
    let bench: Benchmark = cfg
        .opt(args.benchmark, "benchmark")?
        .or(ds.benchmark())
        .ok_or_else(|| CliError::Config("--benchmark is required for data of unknown origin".into()))?;
    let root = output_root();
    let models_dir = cfg.or(args.models, "models", root.join("runs").join(bench.as_str()))?;
    let out_dir = cfg.or(args.out, "out", root.join("eval").join(bench.as_str()))?;
    let n_samples = cfg.or(args.samples, "samples", DEFAULT_SAMPLES)?;
    let seed = cfg.or(args.seed, "seed", 0u64)?;
    let (y_min, y_max, default_points) = eval::default_grid(bench);
    let points = cfg.or(args.grid_points, "grid_points", default_points)?;
    if points < 3 {
        return Err(CliError::Config("--grid-points must be at least 3".into()));
    }
    let grid = Grid { y_min, y_max, points };
    let xs = eval::figure_xs(bench).to_vec();
    let double_slit = bench == Benchmark::DoubleSlit;

    let models = load_models(&models_dir, bench)?;
    eprintln!("evaluating {} models on {} ({} rows)", models.len(), data_path.display(), ds.len());

    let mut manifest = RunManifest::new("eval");
    manifest.seed = Some(seed);
    manifest.set("benchmark", bench);
    manifest.set("samples", n_samples);
    manifest.set("grid_points", points);
    manifest.inputs.push(data_path.clone());
    manifest.inputs.extend(models.iter().map(|m| m.path.clone()));
    if let Some(p) = cfg.path() {
        manifest.inputs.push(p.to_path_buf());
    }

    let mut members = Vec::new();
    let mut curves: BTreeMap<ModelKind, Vec<Columns>> = BTreeMap::new();
    let mut mode_rows: BTreeMap<ModelKind, String> = BTreeMap::new();
    for m in &models {
        let mut points_out = Vec::new();
        let cols = curves.entry(m.kind).or_insert_with(|| vec![Vec::new(); xs.len()]);
        let rows = mode_rows
            .entry(m.kind)
            .or_insert_with(|| String::from("member,x,mode,y\n"));
        for (i, &x) in xs.iter().enumerate() {
            let (ps, curve) = point_summary(&m.model, x, &grid, double_slit)?;
            for (j, y) in ps.modes.iter().enumerate() {
                rows.push_str(&format!("{},{},{j},{y:.16e}\n", m.member, x));
            }
            cols[i].push((format!("member_{:02}", m.member), curve.densities));
            points_out.push(ps);
        }
        members.push(MemberSummary {
            benchmark: bench.to_string(),
            model_kind: m.kind,
            ensemble_member: m.member,
            file: m.path.clone(),
            seed: m.report.as_ref().map(|r| r.seed),
            final_train_nll: m.report.as_ref().map(|r| r.final_loss()),
            held_out_nll: eval::held_out_nll(&m.model, &ds)?,
            points: points_out,
        });
    }

    let ys = eval::linspace(grid.y_min, grid.y_max, grid.points);
    for (kind, per_x) in &mut curves {
        for (i, cols) in per_x.iter_mut().enumerate() {
            let n = cols.len() as f64;
            let mean: Vec<f64> = (0..ys.len())
                .map(|j| cols.iter().map(|(_, c)| c[j]).sum::<f64>() / n)
                .collect();
            cols.push(("ensemble_mean".into(), mean));
            let path = out_dir.join(format!("density_{kind}_x{}.csv", x_tag(xs[i])));
            write_file(&path, density_table(&ys, cols).as_bytes())?;
            manifest.outputs.push(path);
        }
    }
    for (kind, rows) in &mode_rows {
        let path = out_dir.join(format!("modes_{kind}.csv"));
        write_file(&path, rows.as_bytes())?;
        manifest.outputs.push(path);
    }

    let truth = if double_slit {
        let mut pts = Vec::new();
        let mut rows = String::from("x,mode,y\n");
        for &x in &xs {
            let (ps, curve) = point_summary(&DoubleSlitTruth, x, &grid, false)?;
            for (j, y) in ps.modes.iter().enumerate() {
                rows.push_str(&format!("{x},{j},{y:.16e}\n"));
            }
            let path = out_dir.join(format!("density_truth_x{}.csv", x_tag(x)));
            write_file(&path, density_table(&ys, &[("density".into(), curve.densities)]).as_bytes())?;
            manifest.outputs.push(path);
            pts.push(ps);
        }
        let path = out_dir.join("modes_truth.csv");
        write_file(&path, rows.as_bytes())?;
        manifest.outputs.push(path);
        Some(pts)
    } else {
        None
    };

    // prediction samples for scatter plots, drawn from each family's first member
    let sample_xs: Vec<f64> = ds.xs().into_iter().take(n_samples).collect();
    let truth_rows = Dataset::new(ds.pairs()[..sample_xs.len()].to_vec(), ds.meta().clone())?;
    let path = out_dir.join("samples_truth.csv");
    write_file(&path, data::dataset_to_csv(&truth_rows).as_bytes())?;
    manifest.outputs.push(path);
    for kind in ModelKind::ALL {
        let Some(first) = models.iter().find(|m| m.kind == kind) else {
            continue;
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(kind as u64);
        let samples = eval::sample_predictions(&first.model, &sample_xs, &mut rng)?;
        let path = out_dir.join(format!("samples_{kind}.csv"));
        write_file(&path, data::dataset_to_csv(&samples).as_bytes())?;
        manifest.outputs.push(path);
    }

    let mut ensembles = BTreeMap::new();
    for kind in ModelKind::ALL {
        let group: Vec<&MemberSummary> = members.iter().filter(|m| m.model_kind == kind).collect();
        if group.is_empty() {
            continue;
        }
        let finals: Option<Vec<f64>> = group.iter().map(|m| m.final_train_nll).collect();
        let (final_mean, final_std) = match &finals {
            Some(f) => {
                let (m, s) = eval::mean_std(f);
                (Some(m), Some(s))
            }
            None => (None, None),
        };
        let held: Vec<f64> = group.iter().map(|m| m.held_out_nll).collect();
        let (held_mean, held_std) = eval::mean_std(&held);
        let median_mode_count = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let counts: Vec<f64> = group.iter().map(|m| m.points[i].mode_count as f64).collect();
                (x, eval::median(&counts))
            })
            .collect();
        let reports: Vec<&TrainReport> = models
            .iter()
            .filter(|m| m.kind == kind)
            .filter_map(|m| m.report.as_ref())
            .collect();
        ensembles.insert(
            kind,
            EnsembleSummary {
                members: group.len(),
                final_train_nll_mean: final_mean,
                final_train_nll_std: final_std,
                held_out_nll_mean: held_mean,
                held_out_nll_std: held_std,
                median_mode_count,
                mean_history: crate::train::mean_history(&reports),
            },
        );
    }

    let history = |kind: ModelKind| ensembles.get(&kind).map(|e: &EnsembleSummary| e.mean_history.clone());
    let crossing = match (history(ModelKind::Mdn), history(ModelKind::Qmdn)) {
        (Some(c), Some(q)) if !c.is_empty() && !q.is_empty() => crossing_epoch(&c, &q),
        _ => None,
    };
    let reports_of = |kind: ModelKind| -> Vec<&TrainReport> {
        models
            .iter()
            .filter(|m| m.kind == kind)
            .filter_map(|m| m.report.as_ref())
            .collect()
    };
    let member_crossing_epochs = reports_of(ModelKind::Mdn)
        .iter()
        .zip(reports_of(ModelKind::Qmdn))
        .map(|(c, q)| crossing_epoch(&c.epoch_losses, &q.epoch_losses))
        .collect();

    let summary = EvalSummary {
        benchmark: bench.to_string(),
        data: data_path,
        models_dir,
        grid,
        figure_xs: xs,
        mode_threshold: MODE_THRESHOLD,
        truth,
        members,
        ensembles,
        crossing_epoch: crossing,
        member_crossing_epochs,
    };
    let path = out_dir.join(SUMMARY_FILE);
    write_json(&path, &summary)?;
    manifest.outputs.push(path);
    manifest.write(&out_dir.join("manifest.json"))?;

    for (kind, e) in &summary.ensembles {
        eprintln!(
            "  {kind}: {} members, held-out NLL {:.4} ± {:.4}",
            e.members, e.held_out_nll_mean, e.held_out_nll_std
        );
    }
    Ok(())
}
