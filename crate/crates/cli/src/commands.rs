use std::path::Path;
use std::time::Instant;

use clap::Parser;
use less_core::eval::{
    feasible_clusters, make_folds, nested_cv_with_plan, run_ablation, run_variants,
    ExperimentTable, GridSpec, INNER_FOLDS, OUTER_FOLDS,
};
use less_core::synthetic::{sinusoid, sinusoid_demo_cell};
use less_core::{fit, DatasetF64, LessModelF64};
use serde::Serialize;

use crate::args::{BenchArgs, Cli, Command, CvArgs, DemoArgs, ExperimentArgs, FitArgs, GridKind, PredictArgs};
use crate::error::{CliError, CliResult};
use crate::io::{load_features, load_training, tsv, write_json, write_predictions, write_text};
use crate::manifest::{manifest_path, DatasetFingerprint, RunManifest};

fn pool(threads: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        b = b.num_threads(t);
    }
    b.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn fingerprint(path: &Path, data: &DatasetF64) -> CliResult<DatasetFingerprint> {
    DatasetFingerprint::of(path, data.n_samples(), data.n_features() + 1)
}

pub fn run(cli: Cli, args: Vec<String>) -> CliResult<()> {
    match cli.command {
        Command::Fit(a) => cmd_fit(a, args),
        Command::Predict(a) => cmd_predict(a, args),
        Command::Cv(a) => cmd_cv(a, args),
        Command::Ablation(a) => cmd_experiment("ablation", a, args, run_ablation),
        Command::Variants(a) => cmd_experiment("variants", a, args, run_variants),
        Command::DemoSinusoid(a) => cmd_demo_sinusoid(a, args),
        Command::BenchParallel(a) => cmd_bench_parallel(a, args),
        Command::Replay { manifest } => cmd_replay(&manifest),
    }
}

fn cmd_fit(a: FitArgs, args: Vec<String>) -> CliResult<()> {
    let start = Instant::now();
    let config = a.config.resolve()?;
    let data = load_training(&a.data, &a.target)?;
    let pool = pool(a.run.threads)?;
    let model = pool.install(|| fit(&data, &config))?;
    model.save(&a.model)?;

    let mut m = RunManifest::new("fit", args).with_config(&config);
    m.threads = pool.current_num_threads();
    m.datasets.push(fingerprint(&a.data, &data)?);
    m.outputs.push(a.model.display().to_string());
    m.wall_seconds = start.elapsed().as_secs_f64();
    m.write(&manifest_path(a.run.manifest.as_deref(), &a.model))?;
    eprintln!(
        "fitted {} replications on {} x {} in {:.2}s -> {}",
        config.n_replications,
        data.n_samples(),
        data.n_features(),
        m.wall_seconds,
        a.model.display()
    );
    Ok(())
}

fn cmd_predict(a: PredictArgs, args: Vec<String>) -> CliResult<()> {
    let start = Instant::now();
    let model = LessModelF64::load(&a.model)?;
    let features: Vec<String> = model
        .feature_names
        .clone()
        .unwrap_or_else(|| (0..model.n_features()).map(|i| format!("x{i}")).collect());
    let x = load_features(&a.data, &features, model.target_name.as_deref())?;
    let pool = pool(a.run.threads)?;
    let preds = pool.install(|| model.predict_batch(x.view()))?;
    write_predictions(&a.output, &preds)?;

    let mut m = RunManifest::new("predict", args).with_config(&model.config);
    m.threads = pool.current_num_threads();
    m.datasets.push(DatasetFingerprint::of(&a.data, x.nrows(), x.ncols())?);
    m.datasets.push(DatasetFingerprint::of(&a.model, 0, 0)?);
    m.outputs.push(a.output.display().to_string());
    m.wall_seconds = start.elapsed().as_secs_f64();
    m.write(&manifest_path(a.run.manifest.as_deref(), &a.output))?;
    eprintln!("{} predictions -> {}", preds.len(), a.output.display());
    Ok(())
}

fn cmd_cv(a: CvArgs, args: Vec<String>) -> CliResult<()> {
    let start = Instant::now();
    let config = a.config.resolve()?;
    let data = load_training(&a.data, &a.target)?;
    let plan = make_folds(data.n_samples(), OUTER_FOLDS, INNER_FOLDS, config.seed)?;
    let grid = match a.grid {
        GridKind::Full => GridSpec::full(),
        GridKind::Frac => GridSpec::frac_only(),
        GridKind::Single => GridSpec::singleton(),
        GridKind::Clusters => GridSpec::clusters(&feasible_clusters(&plan, config.use_validation_split))?,
    };
    let pool = pool(a.run.threads)?;
    let report = pool.install(|| nested_cv_with_plan(&data, &grid, &config, &plan))?;
    write_json(&a.report, &report)?;

    let mut m = RunManifest::new("cv", args).with_config(&config);
    m.threads = pool.current_num_threads();
    m.grid = Some(grid);
    m.datasets.push(fingerprint(&a.data, &data)?);
    m.outputs.push(a.report.display().to_string());
    m.timings = Some(report.timings.clone());
    m.wall_seconds = start.elapsed().as_secs_f64();
    m.write(&manifest_path(a.run.manifest.as_deref(), &a.report))?;
    for f in &report.folds {
        println!("fold {}: grid point {} test MSE {:.6}", f.fold, f.chosen_index, f.test_mse);
    }
    println!("mean MSE {:.6} +/- {:.6}", report.mean_mse, report.std_mse);
    Ok(())
}

fn cmd_experiment(
    name: &str,
    a: ExperimentArgs,
    args: Vec<String>,
    runner: fn(&DatasetF64, &less_core::LessConfig) -> less_core::Result<ExperimentTable>,
) -> CliResult<()> {
    let start = Instant::now();
    let config = a.config.resolve()?;
    let data = load_training(&a.data, &a.target)?;
    let pool = pool(a.run.threads)?;
    let table = pool.install(|| runner(&data, &config))?;
    write_json(&a.report, &table)?;

    let mut m = RunManifest::new(name, args).with_config(&config);
    m.threads = pool.current_num_threads();
    m.datasets.push(fingerprint(&a.data, &data)?);
    m.outputs.push(a.report.display().to_string());
    m.wall_seconds = start.elapsed().as_secs_f64();
    m.write(&manifest_path(a.run.manifest.as_deref(), &a.report))?;
    println!("method\tmean_mse\tstd_mse\tscaled");
    for r in &table.rows {
        println!("{}\t{:.6}\t{:.6}\t{:.4}", r.method, r.mean_mse, r.std_mse, r.scaled);
    }
    Ok(())
}

fn cmd_demo_sinusoid(a: DemoArgs, args: Vec<String>) -> CliResult<()> {
    let start = Instant::now();
    if a.m.iter().chain(&a.r).any(|&v| v == 0) {
        return Err(CliError::Usage("--m and --r values must be positive".into()));
    }
    if let Some(&m) = a.m.iter().find(|&&m| m > a.samples) {
        return Err(CliError::Usage(format!("m = {m} exceeds the {} samples", a.samples)));
    }
    let pool = pool(a.run.threads)?;
    let train: DatasetF64 = sinusoid(a.samples, a.noise, a.seed);
    let dir = &a.out_dir;
    let train_rows: Vec<[f64; 2]> = (0..train.n_samples()).map(|i| [train.row(i)[0], train.y()[i]]).collect();
    write_text(&dir.join("train.tsv"), &tsv(&["x", "y"], &train_rows))?;

    let mut outputs = vec![dir.join("train.tsv")];
    let mut summary = Vec::new();
    for &m in &a.m {
        for &r in &a.r {
            let cell = pool.install(|| sinusoid_demo_cell(&train, m, r, a.grid_points, a.seed))?;
            let pred = dir.join(format!("pred_m{m}_r{r}.tsv"));
            write_text(&pred, &tsv(&["x", "y_true", "y_noisy", "y_pred"], &cell.rows))?;
            let seg_rows: Vec<[f64; 6]> = cell
                .segments
                .iter()
                .map(|s| [s.replication as f64, s.subset as f64, s.x_start, s.y_start, s.x_end, s.y_end])
                .collect();
            let seg = dir.join(format!("segments_m{m}_r{r}.tsv"));
            write_text(
                &seg,
                &tsv(&["replication", "subset", "x_start", "y_start", "x_end", "y_end"], &seg_rows),
            )?;
            outputs.push(pred);
            outputs.push(seg);
            summary.push([m as f64, r as f64, cell.clean_mse]);
        }
    }
    let summary_path = dir.join("summary.tsv");
    let text = tsv(&["m", "r", "clean_mse"], &summary);
    write_text(&summary_path, &text)?;
    outputs.push(summary_path);
    print!("{text}");

    let mut man = RunManifest::new("demo-sinusoid", args);
    man.seed = Some(a.seed);
    man.threads = pool.current_num_threads();
    man.outputs = outputs.iter().map(|p| p.display().to_string()).collect();
    man.wall_seconds = start.elapsed().as_secs_f64();
    man.write(&a.run.manifest.clone().unwrap_or_else(|| dir.join("manifest.json")))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct BenchRow {
    threads: usize,
    seconds: f64,
    speedup: f64,
}

#[derive(Debug, Serialize)]
struct BenchReport {
    rows: Vec<BenchRow>,
    identical: bool,
}

fn cmd_bench_parallel(a: BenchArgs, args: Vec<String>) -> CliResult<()> {
    let start = Instant::now();
    let config = a.config.resolve()?;
    let data = load_training(&a.data, &a.target)?;
    let mut counts = a.threads_list.clone();
    if counts.contains(&0) {
        return Err(CliError::Usage("thread counts must be positive".into()));
    }
    if !counts.contains(&1) {
        counts.insert(0, 1);
    }
    let mut timed = Vec::new();
    let mut outputs: Vec<Vec<u64>> = Vec::new();
    for &t in &counts {
        let p = pool(Some(t))?;
        let clock = Instant::now();
        let model = p.install(|| fit(&data, &config))?;
        let secs = clock.elapsed().as_secs_f64();
        let preds = p.install(|| model.predict_batch(data.x()))?;
        outputs.push(preds.iter().map(|v| v.to_bits()).collect());
        timed.push((t, secs));
    }
    let base = timed.iter().find(|r| r.0 == 1).map_or(1.0, |r| r.1);
    let rows: Vec<BenchRow> = timed
        .iter()
        .map(|&(threads, seconds)| BenchRow { threads, seconds, speedup: base / seconds })
        .collect();
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    println!("threads\tseconds\tspeedup");
    for r in &rows {
        println!("{}\t{:.4}\t{:.3}", r.threads, r.seconds, r.speedup);
    }
    println!("predictions identical across thread counts: {identical}");
    let report = BenchReport { rows, identical };

    let mut m = RunManifest::new("bench-parallel", args).with_config(&config);
    m.datasets.push(fingerprint(&a.data, &data)?);
    if let Some(path) = &a.report {
        write_json(path, &report)?;
        m.outputs.push(path.display().to_string());
    }
    m.wall_seconds = start.elapsed().as_secs_f64();
    if let Some(path) = a.manifest.as_deref().or(a.report.as_deref()) {
        m.write(&manifest_path(a.manifest.as_deref(), path))?;
    }
    if !identical {
        return Err(CliError::Numeric("predictions differ between thread counts".into()));
    }
    Ok(())
}

fn cmd_replay(path: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let argv = std::iter::once("less".to_string()).chain(manifest.args.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Command::Replay { .. } = cli.command {
        return Err(CliError::Usage("a manifest cannot replay another replay".into()));
    }
    run(cli, manifest.args)
}
