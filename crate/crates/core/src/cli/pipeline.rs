//! `gen-data` and `train`.

use std::path::{Path, PathBuf};

use crate::data::{self, Benchmark, LOGISTIC_KEEP, LOGISTIC_N_X};
use crate::models::{ModelFile, ModelKind};
use crate::train::{self, TrainConfig};

use super::config::ConfigFile;
use super::manifest::{write_file, write_json, RunManifest};
use super::{output_root, CliError, CliResult, GenDataArgs, TrainArgs};

pub const DOUBLE_SLIT_DEFAULT_N: usize = 20_000;

pub(crate) fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} {} does not exist", path.display())))
    }
}

/// `out/dir/name.csv` -> `out/dir/name.manifest.json`.
fn sidecar_manifest(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

pub fn gen_data(args: GenDataArgs, cfg: &ConfigFile) -> CliResult<()> {
    let bench = args.benchmark;
    let out = cfg.or(args.out, "out", output_root().join("data").join(format!("{bench}.csv")))?;
    let n = cfg.opt(args.n, "n")?;
    let seed = cfg.opt(args.seed, "seed")?;

    let ds = match bench {
        Benchmark::DoubleSlit => {
            let seed = seed.unwrap_or(0);
            let mut rng = train::init_rng(seed);
            data::gen_double_slit(n.unwrap_or(DOUBLE_SLIT_DEFAULT_N), &mut rng, Some(seed))?
        }
        Benchmark::Logistic => {
            let n_x = match n {
                None => LOGISTIC_N_X,
                Some(n) if n > 0 && n % LOGISTIC_KEEP == 0 => n / LOGISTIC_KEEP,
                Some(n) => {
                    return Err(CliError::Config(format!(
                        "logistic data has {LOGISTIC_KEEP} iterates per x; --n {n} is not a positive multiple"
                    )))
                }
            };
            data::gen_logistic(n_x, LOGISTIC_KEEP)?
        }
    };

    write_file(&out, data::dataset_to_csv(&ds).as_bytes())?;
    let meta = data::meta_path(&out);
    write_file(&meta, data::meta_to_text(ds.meta()).as_bytes())?;

    let mut manifest = RunManifest::new("gen-data");
    manifest.seed = ds.meta().seed;
    manifest.set("benchmark", bench);
    manifest.set("n", ds.len());
    if let Some(p) = cfg.path() {
        manifest.inputs.push(p.to_path_buf());
    }
    manifest.outputs = vec![out.clone(), meta];
    manifest.write(&sidecar_manifest(&out))?;
    eprintln!("wrote {} rows to {}", ds.len(), out.display());
    Ok(())
}

pub fn train_config(args: &TrainArgs, cfg: &ConfigFile) -> CliResult<TrainConfig> {
    let d = TrainConfig::default();
    let tc = TrainConfig {
        learning_rate: cfg.or(args.learning_rate, "learning_rate", d.learning_rate)?,
        batch_size: cfg.or(args.batch_size, "batch_size", d.batch_size)?,
        epochs: cfg.or(args.epochs, "epochs", d.epochs)?,
        ensemble_size: cfg.or(args.ensemble_size, "ensemble_size", d.ensemble_size)?,
        seed: cfg.or(args.seed, "seed", d.seed)?,
        beta1: cfg.or(args.beta1, "beta1", d.beta1)?,
        beta2: cfg.or(args.beta2, "beta2", d.beta2)?,
        epsilon: cfg.or(args.epsilon, "epsilon", d.epsilon)?,
        strict_sequential: cfg.switch(args.strict_sequential, "strict_sequential")?,
    };
    tc.validate()?;
    Ok(tc)
}

/// File stem of ensemble member `k`: `mdn_03`.
pub fn member_stem(kind: ModelKind, k: usize) -> String {
    format!("{kind}_{k:02}")
}

pub fn train(args: TrainArgs, cfg: &ConfigFile) -> CliResult<()> {
    let kind: ModelKind = cfg
        .opt(args.model, "model")?
        .ok_or_else(|| CliError::Config("--model is required (mdn or qmdn)".into()))?;
    let data_path: PathBuf = cfg
        .opt(args.data.clone(), "data")?
        .ok_or_else(|| CliError::Config("--data is required".into()))?;
    require_file(&data_path, "dataset")?;
    let tc = train_config(&args, cfg)?;
    let ds = data::load_csv(&data_path)?;
    let bench_name = ds
        .benchmark()
        .map(|b| b.to_string())
        .unwrap_or_else(|| "custom".to_string());
    let out_dir = cfg.or(args.out.clone(), "out", output_root().join("runs").join(&bench_name))?;

    eprintln!(
        "training {} x {kind} on {} ({} rows, {} epochs)",
        tc.ensemble_size,
        data_path.display(),
        ds.len(),
        tc.epochs
    );
    let members = train::train_ensemble(kind, &ds, &tc)?;

    let mut manifest = RunManifest::new("train");
    manifest.seed = Some(tc.seed);
    manifest.set("model", kind);
    manifest.set("benchmark", &bench_name);
    manifest.set("learning_rate", tc.learning_rate);
    manifest.set("batch_size", tc.batch_size);
    manifest.set("epochs", tc.epochs);
    manifest.set("ensemble_size", tc.ensemble_size);
    manifest.set("beta1", tc.beta1);
    manifest.set("beta2", tc.beta2);
    manifest.set("epsilon", tc.epsilon);
    manifest.set("strict_sequential", tc.strict_sequential);
    manifest.inputs.push(data_path.clone());
    if let Some(p) = cfg.path() {
        manifest.inputs.push(p.to_path_buf());
    }

    let mut timings = String::from("member,seed,seconds\n");
    for (k, (model, report)) in members.into_iter().enumerate() {
        let stem = member_stem(kind, k);
        let model_path = out_dir.join(format!("{stem}.model"));
        let loss_path = out_dir.join(format!("{stem}_loss.csv"));
        let run_path = out_dir.join(format!("{stem}.run.json"));
        let file = ModelFile {
            benchmark: bench_name.clone(),
            model,
        };
        std::fs::create_dir_all(&out_dir).map_err(|e| crate::Error::io(&out_dir, e))?;
        crate::models::write_model_file(&model_path, &file)?;
        write_file(&loss_path, train::loss_history_csv(&report).as_bytes())?;
        write_json(&run_path, &report)?;
        timings.push_str(&format!("{k},{},{:.3}\n", report.seed, report.wall_clock_seconds));
        eprintln!("  {stem}: final NLL {:.4}", report.final_loss());
        manifest.outputs.extend([model_path, loss_path, run_path]);
    }
    // wall-clock times vary between runs, so they stay out of the JSON files
    let timings_path = out_dir.join(format!("train_{kind}.timings.txt"));
    write_file(&timings_path, timings.as_bytes())?;
    manifest.outputs.push(timings_path);
    manifest.write(&out_dir.join(format!("train_{kind}.manifest.json")))?;
    Ok(())
}
