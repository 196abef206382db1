use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use demand_core::gbt::{
    self, feature_importance, importance_ranks, load_model, save_model, Ensemble,
};
use demand_core::ingest::{
    build_matrix, check_matrix_schema, descriptive_stats, parse_holidays, parse_trips,
    parse_weather, station_counts, write_matrix, write_station_counts, write_stats_csv,
};
use demand_core::shap::{
    dependence, explain_rows, force_record, summarize, write_dependence_csv, write_force_json,
    write_importance_csv, write_summary_csv,
};
use demand_core::tuning::{
    grid_search, r_squared, rmsle_detailed, split_train_test, write_report_csv, write_report_json,
    GridPoint, TuneOptions,
};
use demand_core::Dataset;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Context, Result};
use crate::manifest::Manifest;

fn open_input(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| CliError::missing(path, e.to_string()))
}

fn output_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = config.output_dir();
    std::fs::create_dir_all(&dir).context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

/// Creates `dir/name`, hands a buffered writer to `write`, and records the
/// file in the manifest.
fn emit<F>(dir: &Path, name: &str, manifest: &mut Manifest, write: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> demand_core::Result<()>,
{
    let path = dir.join(name);
    let file = File::create(&path).context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    write(&mut out).context(|| format!("writing {}", path.display()))?;
    out.flush()
        .context(|| format!("writing {}", path.display()))?;
    manifest.output(name);
    Ok(())
}

fn read_matrix(config: &RunConfig, manifest: &mut Manifest) -> Result<Dataset> {
    let path = config.matrix_path();
    let data =
        Dataset::read_csv(open_input(&path)?).context(|| format!("reading {}", path.display()))?;
    if config.parse_value("data.check_schema")?.unwrap_or(true) {
        check_matrix_schema(&data).context(|| format!("reading {}", path.display()))?;
    }
    manifest.input(&path);
    Ok(data)
}

fn json<T: Serialize>(value: &T, out: &mut impl Write) -> demand_core::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::other)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn ingest(config: &RunConfig) -> Result<()> {
    let seed = config.seed()?;
    let mut manifest = Manifest::new("ingest", seed, config.entries());
    let period = config.period()?;
    let schema = config.trip_schema()?;

    let pattern = config
        .path("ingest.trips")
        .ok_or_else(|| CliError::config("config key `ingest.trips` is required"))?;
    let pattern_text = pattern.to_string_lossy().into_owned();
    let mut trip_files: Vec<PathBuf> = glob::glob(&pattern_text)
        .map_err(|e| CliError::config(format!("`ingest.trips` pattern: {e}")))?
        .filter_map(std::result::Result::ok)
        .collect();
    trip_files.sort();
    if trip_files.is_empty() {
        return Err(CliError::missing(pattern, "no trip files match"));
    }

    let weather_path = config
        .path("ingest.weather")
        .ok_or_else(|| CliError::config("config key `ingest.weather` is required"))?;
    let weather_file = open_input(&weather_path)?;
    let holidays = match config.path("ingest.holidays") {
        Some(path) => {
            let set = parse_holidays(open_input(&path)?)
                .context(|| format!("reading {}", path.display()))?;
            manifest.input(&path);
            set
        }
        None => {
            log::warn!("no holiday file configured; every hour is a non-holiday");
            Default::default()
        }
    };

    let mut trips = Vec::new();
    let mut rejects = Vec::new();
    for path in &trip_files {
        let parsed = parse_trips(open_input(path)?, &schema)
            .context(|| format!("reading {}", path.display()))?;
        log::info!(
            "{}: {} trips, {} rejected",
            path.display(),
            parsed.trips.len(),
            parsed.rejects.len()
        );
        trips.extend(parsed.trips);
        rejects.extend(
            parsed
                .rejects
                .into_iter()
                .map(|r| (path.display().to_string(), r)),
        );
        manifest.input(path);
    }
    let weather =
        parse_weather(weather_file).context(|| format!("reading {}", weather_path.display()))?;
    manifest.input(&weather_path);

    let built =
        build_matrix(&trips, period, &weather, &holidays).context(|| "aggregating trips".into())?;
    if built.rows.is_empty() {
        return Err(CliError::config(format!(
            "no complete hours in the {period} period"
        )));
    }

    let dir = output_dir(config)?;
    emit(&dir, "matrix.csv", &mut manifest, |w| {
        write_matrix(&built.rows, w)
    })?;
    emit(&dir, "incomplete_hours.csv", &mut manifest, |w| {
        writeln!(w, "hour")?;
        for h in &built.incomplete {
            writeln!(w, "{h}")?;
        }
        Ok(())
    })?;
    emit(&dir, "rejects.csv", &mut manifest, |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["file", "line", "reason"])?;
        for (file, r) in &rejects {
            wtr.write_record([file.as_str(), &r.line.to_string(), &r.reason])?;
        }
        wtr.flush()?;
        Ok(())
    })?;
    let stations = station_counts(&trips, period);
    emit(&dir, "stations.csv", &mut manifest, |w| {
        write_station_counts(&stations, w)
    })?;
    manifest.write(&dir)?;

    println!(
        "{period}: {} trips from {} file(s), {} rejected, {} outside period",
        trips.len(),
        trip_files.len(),
        rejects.len(),
        built.outside_period
    );
    println!(
        "{} hourly rows written to {}; {} hour(s) dropped for missing weather",
        built.rows.len(),
        dir.join("matrix.csv").display(),
        built.incomplete.len()
    );
    Ok(())
}

pub fn describe(config: &RunConfig) -> Result<()> {
    let mut manifest = Manifest::new("describe", config.seed()?, config.entries());
    let data = read_matrix(config, &mut manifest)?;
    let stats = descriptive_stats(&data).context(|| "computing statistics".into())?;
    let dir = output_dir(config)?;
    emit(&dir, "describe.csv", &mut manifest, |w| {
        write_stats_csv(&stats, w)
    })?;
    manifest.write(&dir)?;

    println!(
        "{:<18} {:>10} {:>10} {:>10} {:>10}",
        "variable", "mean", "sd (n-1)", "min", "max"
    );
    for s in &stats {
        println!(
            "{:<18} {:>10.1} {:>10.1} {:>10.1} {:>10.1}",
            s.name, s.mean, s.sd, s.min, s.max
        );
    }
    println!("n = {}", data.len());
    Ok(())
}

pub fn tune(config: &RunConfig) -> Result<()> {
    let seed = config.seed()?;
    let mut manifest = Manifest::new("tune", seed, config.entries());
    let data = read_matrix(config, &mut manifest)?;
    let options = TuneOptions {
        folds: config.parse_value("grid.folds")?.unwrap_or(10),
        train_fraction: config.split_fraction()?,
        seed,
        base: config.train_config()?,
    };
    let grid = config.grid()?;
    let report = grid_search(&data, &grid, &options).context(|| "grid search".into())?;

    let dir = output_dir(config)?;
    emit(&dir, "tune_report.csv", &mut manifest, |w| {
        write_report_csv(&report, w)
    })?;
    emit(&dir, "tune_report.json", &mut manifest, |w| {
        write_report_json(&report, w)
    })?;
    manifest.write(&dir)?;

    let w = report.winning();
    let p = &w.point;
    println!(
        "{} configurations x {} folds on {} training rows",
        report.records.len(),
        report.folds,
        report.n_train
    );
    println!(
        "winner #{}: max_depth={} min_child_weight={} eta={} subsample={} colsample_bytree={}",
        w.index, p.max_depth, p.min_child_weight, p.eta, p.subsample, p.colsample_bytree
    );
    println!(
        "cv RMSLE {:.4} (sd {:.4}), cv R² {:.4} (sd {:.4})",
        w.mean_rmsle, w.sd_rmsle, w.mean_r2, w.sd_r2
    );
    Ok(())
}

/// Reads the winning grid point out of a tune report.
fn tuned_point(path: &Path) -> Result<GridPoint> {
    let value: serde_json::Value = serde_json::from_reader(open_input(path)?)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let winner = value["winner"]
        .as_u64()
        .ok_or_else(|| CliError::config(format!("{}: no `winner` field", path.display())))?;
    serde_json::from_value(value["records"][winner as usize]["point"].clone())
        .map_err(|e| CliError::config(format!("{}: winning point: {e}", path.display())))
}

#[derive(Serialize)]
struct TrainMetrics {
    seed: u64,
    n_train: usize,
    n_test: usize,
    rounds: usize,
    r_squared: f64,
    rmsle: f64,
    clamped_predictions: usize,
}

pub fn train(config: &RunConfig) -> Result<()> {
    let seed = config.seed()?;
    let mut manifest = Manifest::new("train", seed, config.entries());
    let data = read_matrix(config, &mut manifest)?;
    let mut train_config = config.train_config()?;
    if let Some(path) = config.path("train.params_from") {
        train_config = tuned_point(&path)?.apply(&train_config);
        manifest.input(&path);
    }

    let (train_idx, test_idx) = split_train_test(data.len(), config.split_fraction()?, seed)
        .context(|| "splitting rows".into())?;
    let train_data = data.subset(&train_idx);
    let test_data = data.subset(&test_idx);
    let model = gbt::fit(&train_data, &train_config).context(|| "training".into())?;
    let pred = model
        .predict(&test_data.features)
        .context(|| "predicting".into())?;
    let r2 = r_squared(&test_data.target, &pred).context(|| "test R²".into())?;
    let rmsle = rmsle_detailed(&test_data.target, &pred).context(|| "test RMSLE".into())?;
    if rmsle.clamped > 0 {
        log::warn!(
            "{} negative test predictions clamped to 0 for RMSLE",
            rmsle.clamped
        );
    }
    let importance = feature_importance(&model, config.importance_type()?);
    let ranks = importance_ranks(&importance);

    let dir = output_dir(config)?;
    emit(&dir, "model.json", &mut manifest, |w| save_model(&model, w))?;
    let metrics = TrainMetrics {
        seed,
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        rounds: model.trees.len(),
        r_squared: r2,
        rmsle: rmsle.value,
        clamped_predictions: rmsle.clamped,
    };
    emit(&dir, "metrics.json", &mut manifest, |w| json(&metrics, w))?;
    emit(&dir, "importance.csv", &mut manifest, |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["feature", "relative_importance_pct", "rank"])?;
        for (j, name) in model.feature_names.iter().enumerate() {
            wtr.write_record([
                name.clone(),
                importance[j].to_string(),
                ranks[j].to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    })?;
    manifest.write(&dir)?;

    println!("{:<18} {:>14} {:>5}", "variable", "importance (%)", "rank");
    let mut order: Vec<usize> = (0..ranks.len()).collect();
    order.sort_by_key(|&j| ranks[j]);
    for j in order {
        println!(
            "{:<18} {:>14.2} {:>5}",
            model.feature_names[j], importance[j], ranks[j]
        );
    }
    println!("{:<18} {:>14.3}", "R²", r2);
    println!("{:<18} {:>14.3}", "RMSLE", rmsle.value);
    println!(
        "({} trees, {} training rows, {} test rows)",
        model.trees.len(),
        train_idx.len(),
        test_idx.len()
    );
    Ok(())
}

fn load_model_file(path: &Path) -> Result<Ensemble> {
    load_model(open_input(path)?).context(|| format!("loading {}", path.display()))
}

pub fn explain(config: &RunConfig) -> Result<()> {
    let seed = config.seed()?;
    let mut manifest = Manifest::new("explain", seed, config.entries());
    let model_path = config
        .path("explain.model")
        .unwrap_or_else(|| config.output_dir().join("model.json"));
    let model = load_model_file(&model_path)?;
    manifest.input(&model_path);
    let data = read_matrix(config, &mut manifest)?;
    if data.feature_names != model.feature_names {
        return Err(CliError::config(format!(
            "matrix features `{}` do not match model features `{}`",
            data.feature_names.join(","),
            model.feature_names.join(",")
        )));
    }

    let x = match config.get("explain.rows").unwrap_or("all") {
        "all" => data.features,
        "test" => {
            let (_, test_idx) = split_train_test(data.len(), config.split_fraction()?, seed)
                .context(|| "splitting rows".into())?;
            data.features.select_rows(&test_idx)
        }
        other => {
            return Err(CliError::config(format!(
                "`explain.rows` must be `all` or `test`, got `{other}`"
            )))
        }
    };
    let names = &model.feature_names;
    let explained = explain_rows(&model, &x).context(|| "computing SHAP values".into())?;
    let summary = summarize(&explained, &x, names).context(|| "summarizing".into())?;

    let dir = output_dir(config)?;
    emit(&dir, "shap_summary.csv", &mut manifest, |w| {
        write_summary_csv(&summary, w)
    })?;
    emit(&dir, "shap_importance.csv", &mut manifest, |w| {
        write_importance_csv(&summary, w)
    })?;

    let targets: Vec<String> = match config.list::<String>("explain.dependence")? {
        Some(list) => list,
        None => vec![names[summary.ranking[0]].clone()],
    };
    if names.len() >= 2 {
        for name in &targets {
            let j = names.iter().position(|n| n == name).ok_or_else(|| {
                CliError::config(format!("`explain.dependence`: unknown feature `{name}`"))
            })?;
            let view = dependence(&explained, &x, j).context(|| format!("dependence of {name}"))?;
            if let Some(msg) = &view.warning {
                eprintln!("warning: {name}: {msg}");
            }
            emit(
                &dir,
                &format!("dependence_{name}.csv"),
                &mut manifest,
                |w| write_dependence_csv(&view, names, w),
            )?;
        }
    }

    let samples: Vec<usize> = config
        .list("explain.force_samples")?
        .unwrap_or_else(|| vec![0]);
    for i in samples {
        let e = explained.get(i).ok_or_else(|| {
            CliError::config(format!(
                "force sample {i} out of range ({} rows)",
                explained.len()
            ))
        })?;
        let mut record = force_record(e, names, x.row(i));
        record.sample_id = Some(i);
        emit(&dir, &format!("force_{i}.json"), &mut manifest, |w| {
            write_force_json(&record, w)
        })?;
    }
    manifest.write(&dir)?;

    println!(
        "{:<18} {:>14} {:>5} {:>5}",
        "variable", "mean |SHAP|", "rank", "sign"
    );
    for &j in &summary.ranking {
        let f = &summary.features[j];
        println!(
            "{:<18} {:>14.4} {:>5} {:>5}",
            f.name, f.mean_abs_shap, f.rank, f.correlation_sign
        );
    }
    println!(
        "base value {:.4}, {} samples explained",
        explained[0].base_value,
        explained.len()
    );
    Ok(())
}
