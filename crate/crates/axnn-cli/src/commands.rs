//! Implementations of the four subcommands.

use crate::manifest::{stamp, RunManifest};
use crate::plot;
use crate::{DecomposeArgs, EvalArgs, GenArgs, TrainArgs};
use axnn::data::{gen_example, gen_simple, read_csv, write_components_csv, write_csv};
use axnn::decompose::{
    decompose as decompose_table, effect_curve, importance, threshold_sweep, DecomposeOptions,
    EffectCurve, GridSpec, SIGNIFICANCE_CUTOFF,
};
use axnn::metrics::{binary_metrics, regression_metrics};
use axnn::{
    train_axnn, CandidateReport, Ensemble, Error, Link, Loss, Mode, Result, RunConfig,
    RunConfigPatch, Task,
};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub fn gen(args: GenArgs) -> Result<()> {
    let ds = match args.example.as_str() {
        "simple" => gen_simple(args.n, args.seed, args.noise.unwrap_or(0.1)),
        "ex1" => gen_example(1, args.n, args.seed, args.noise.unwrap_or(0.0))?,
        "ex2" => gen_example(2, args.n, args.seed, args.noise.unwrap_or(0.0))?,
        "ex3" => gen_example(3, args.n, args.seed, args.noise.unwrap_or(0.0))?,
        "ex4" => gen_example(4, args.n, args.seed, args.noise.unwrap_or(0.0))?,
        other => {
            return Err(Error::Schema(format!(
                "unknown example '{other}' (expected simple | ex1 | ex2 | ex3 | ex4)"
            )))
        }
    };
    write_csv(&ds, &args.out)?;
    let comp_path = companion_path(&args.out, "components.csv");
    if let Some(comps) = &ds.true_components {
        write_components_csv(comps, &comp_path)?;
    }
    let mean = ds.y.iter().sum::<f64>() / ds.y.len() as f64;
    let var = ds.y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / ds.y.len() as f64;
    println!(
        "wrote {} ({} rows, {} features) and {}",
        args.out.display(),
        ds.num_samples(),
        ds.num_features(),
        comp_path.display()
    );
    println!("target mean {mean:.5}, variance {var:.5}");
    Ok(())
}

/// `<out stem>.<suffix>` next to `out`.
fn companion_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn parse_mode(s: &str) -> Result<Mode> {
    match s {
        "boosting" => Ok(Mode::Boosting),
        "stacking" => Ok(Mode::Stacking),
        "one-stage" => Ok(Mode::OneStage),
        other => Err(Error::InvalidConfig(vec![format!(
            "mode must be boosting | stacking | one-stage, got '{other}'"
        )])),
    }
}

fn parse_loss(s: &str) -> Result<Loss> {
    match s {
        "squared" => Ok(Loss::Squared),
        "logistic" => Ok(Loss::Logistic),
        other => Err(Error::InvalidConfig(vec![format!(
            "loss must be squared | logistic, got '{other}'"
        )])),
    }
}

fn resolve_config(args: &TrainArgs) -> Result<RunConfig> {
    let mut patch = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<RunConfigPatch>(&text).map_err(|e| {
                Error::InvalidConfig(vec![format!("config file {}: {e}", path.display())])
            })?
        }
        None => RunConfigPatch::default(),
    };
    if let Some(mode) = &args.mode {
        patch.mode = Some(parse_mode(mode)?);
    }
    if let Some(loss) = &args.loss {
        patch.loss = Some(parse_loss(loss)?);
    }
    patch.seed = args.seed.or(patch.seed);
    patch.workers = args.workers.or(patch.workers);
    patch.epochs_per_iteration = args.epochs.or(patch.epochs_per_iteration);
    patch.batch_size = args.batch_size.or(patch.batch_size);
    patch.j1_max = args.j1_max.or(patch.j1_max);
    patch.j2_max = args.j2_max.or(patch.j2_max);
    patch.lambda = args.lambda.or(patch.lambda);
    patch.beta_penalty = args.beta_penalty.or(patch.beta_penalty);
    let config = patch.resolve(Mode::Boosting);
    config.validate()?;
    Ok(config)
}

fn write_training_log(report: &CandidateReport, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        "iteration,stage,kind,widths,k,train_loss,valid_loss,selected_objective,w_norm"
    )?;
    for r in &report.iterations {
        let widths: Vec<String> = r.selected_spec.subnet.hidden.iter().map(|v| v.to_string()).collect();
        let w_norm: f64 = r.weights.iter().map(|w| w.abs()).sum();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.iteration,
            r.stage,
            r.selected_spec.kind,
            widths.join("|"),
            r.selected_spec.num_ridges,
            r.train_loss,
            r.valid_loss,
            r.selected_objective,
            w_norm
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<()> {
    let config = resolve_config(&args)?;
    let task = match config.loss {
        Loss::Squared => Task::Regression,
        Loss::Logistic => Task::Binary,
    };
    let mut manifest = RunManifest::new(config.clone());
    manifest.inputs.push(stamp(&args.train)?);
    manifest.inputs.push(stamp(&args.valid)?);
    if let Some(cfg_path) = &args.config {
        manifest.inputs.push(stamp(cfg_path)?);
    }

    let t0 = Instant::now();
    let train_ds = read_csv(&args.train, &args.target, task)?;
    let valid_ds = read_csv(&args.valid, &args.target, task)?;
    manifest
        .timings_seconds
        .insert("load_data".into(), t0.elapsed().as_secs_f64());

    let t1 = Instant::now();
    let (ensemble, report) = train_axnn(&config, &train_ds, &valid_ds)?;
    manifest
        .timings_seconds
        .insert("train".into(), t1.elapsed().as_secs_f64());

    let t2 = Instant::now();
    ensemble.save(&args.out)?;
    let log_path = args
        .log
        .clone()
        .unwrap_or_else(|| companion_path(&args.out, "log.csv"));
    write_training_log(&report, &log_path)?;
    manifest
        .timings_seconds
        .insert("write_outputs".into(), t2.elapsed().as_secs_f64());

    let last = report.iterations.last();
    manifest.final_metrics = serde_json::json!({
        "iterations": report.iterations.len(),
        "stage1_learners": ensemble.stage_boundary,
        "total_learners": ensemble.learners.len(),
        "final_train_loss": last.map(|r| r.train_loss),
        "final_valid_loss": last.map(|r| r.valid_loss),
    });
    manifest.outputs.push(stamp(&args.out)?);
    manifest.outputs.push(stamp(&log_path)?);
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| companion_path(&args.out, "manifest.json"));
    manifest.write(&manifest_path)?;

    println!(
        "trained {} learners ({} GAMnet + {} xNN) in {} iterations",
        ensemble.learners.len(),
        ensemble.stage_boundary,
        ensemble.learners.len() - ensemble.stage_boundary,
        report.iterations.len()
    );
    if let Some(r) = last {
        println!("final train loss {:.6}, valid loss {:.6}", r.train_loss, r.valid_loss);
    }
    println!(
        "model: {}\nlog: {}\nmanifest: {}",
        args.out.display(),
        log_path.display(),
        manifest_path.display()
    );
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let ensemble = Ensemble::load(&args.model)?;
    let task = match ensemble.link {
        Link::Identity => Task::Regression,
        Link::Logit => Task::Binary,
    };
    let ds = read_csv(&args.data, &args.target, task)?;
    if ds.num_features() != ensemble.num_features() {
        return Err(Error::Schema(format!(
            "model expects {} feature columns, data has {}",
            ensemble.num_features(),
            ds.num_features()
        )));
    }
    if let Some(m) = &args.metrics {
        let requested_binary = match m.as_str() {
            "auc" => true,
            "mse" => false,
            other => {
                return Err(Error::UnsupportedMetric(format!(
                    "unknown metric set '{other}' (expected mse | auc)"
                )))
            }
        };
        if requested_binary != (ensemble.link == Link::Logit) {
            return Err(Error::UnsupportedMetric(format!(
                "metric set '{m}' does not apply to a {} model",
                if ensemble.link == Link::Logit { "logistic" } else { "regression" }
            )));
        }
    }
    let metrics = match ensemble.link {
        Link::Identity => {
            let preds = ensemble.predict_link(&ds.x)?;
            let (mse, r2) = regression_metrics(&ds.y, &preds)?;
            serde_json::json!({"mse": mse, "r2": r2})
        }
        Link::Logit => {
            let probs = ensemble.predict_response(&ds.x)?;
            let (auc, logloss) = binary_metrics(&ds.y, &probs)?;
            serde_json::json!({"auc": auc, "logloss": logloss})
        }
    };
    let text = serde_json::to_string_pretty(&metrics)
        .map_err(|e| Error::MalformedModel(format!("metrics serialization: {e}")))?;
    println!("{text}");
    if let Some(out) = &args.out {
        std::fs::write(out, text)?;
    }
    Ok(())
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

pub fn decompose(args: DecomposeArgs) -> Result<()> {
    if !(args.theta > 0.0) {
        return Err(Error::InvalidConfig(vec![format!(
            "theta must be > 0, got {}",
            args.theta
        )]));
    }
    let ensemble = Ensemble::load(&args.model)?;
    let task = match ensemble.link {
        Link::Identity => Task::Regression,
        Link::Logit => Task::Binary,
    };
    let ds = read_csv(&args.data, &args.target, task)?;
    if ds.num_features() != ensemble.num_features() {
        return Err(Error::Schema(format!(
            "model expects {} feature columns, data has {}",
            ensemble.num_features(),
            ds.num_features()
        )));
    }
    std::fs::create_dir_all(&args.out)?;
    std::fs::create_dir_all(args.out.join("effects"))?;

    let opts = DecomposeOptions {
        theta: args.theta,
        normalize: !args.raw_beta,
    };
    let table = decompose_table(&ensemble, &ds.x, opts)?;
    let preds = ensemble.predict_link(&ds.x)?;
    let report = importance(&table, &preds)?;

    // importance.csv: every group, including insignificant ones.
    let imp_path = args.out.join("importance.csv");
    {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&imp_path)?);
        writeln!(w, "group_id,type,members,importance,rank,significant")?;
        for e in &report.entries {
            let members: Vec<String> = e
                .group
                .covariates()
                .iter()
                .map(|&i| ds.feature_names[i].clone())
                .collect();
            writeln!(
                w,
                "{},{},{},{},{},{}",
                e.group.label(&ds.feature_names),
                e.group.kind_str(),
                members.join("|"),
                e.importance,
                e.rank,
                e.significant
            )?;
        }
    }

    // Per-group effect CSVs and SVGs. Insignificant groups keep their CSV row
    // above but are excluded from the plots.
    let mut bar_labels = Vec::new();
    let mut bar_values = Vec::new();
    for e in &report.entries {
        let label = e.group.label(&ds.feature_names);
        if e.significant {
            bar_labels.push(label.clone());
            bar_values.push(e.importance);
        }
        let covs = e.group.covariates();
        let curve = effect_curve(
            &ensemble,
            &table,
            &ds.x,
            &e.group,
            GridSpec {
                points: args.grid,
                range: None,
            },
        )?;
        match (&curve, covs.as_slice()) {
            (EffectCurve::Curve1D { xs, values, .. }, [p]) => {
                let name = sanitize(&ds.feature_names[*p]);
                let csv_path = args.out.join(format!("effects/main_{name}.csv"));
                let mut w = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
                writeln!(w, "{},effect", ds.feature_names[*p])?;
                for (x, v) in xs.iter().zip(values) {
                    writeln!(w, "{x},{v}")?;
                }
                if e.significant {
                    let svg = plot::line_chart(
                        &format!("Main effect {label}"),
                        &ds.feature_names[*p],
                        "effect",
                        &xs.iter().copied().zip(values.iter().copied()).collect::<Vec<_>>(),
                    );
                    std::fs::write(args.out.join(format!("effects/main_{name}.svg")), svg)?;
                }
            }
            (
                EffectCurve::Surface2D {
                    xs, ys, values, ..
                },
                [p1, p2],
            ) => {
                let (n1, n2) = (sanitize(&ds.feature_names[*p1]), sanitize(&ds.feature_names[*p2]));
                let csv_path = args.out.join(format!("effects/int_{n1}_{n2}.csv"));
                let mut w = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
                writeln!(w, "{},{},effect", ds.feature_names[*p1], ds.feature_names[*p2])?;
                for (i, x) in xs.iter().enumerate() {
                    for (j, yv) in ys.iter().enumerate() {
                        writeln!(w, "{x},{yv},{}", values.get(i, j))?;
                    }
                }
                if e.significant {
                    let svg = plot::heatmap(
                        &format!("Interaction {label}"),
                        &ds.feature_names[*p1],
                        &ds.feature_names[*p2],
                        xs,
                        ys,
                        values,
                    );
                    std::fs::write(args.out.join(format!("effects/int_{n1}_{n2}.svg")), svg)?;
                }
            }
            (EffectCurve::Scatter { values }, _) => {
                let stem: Vec<String> = covs
                    .iter()
                    .map(|&i| sanitize(&ds.feature_names[i]))
                    .collect();
                let stem = if stem.is_empty() {
                    "null".to_string()
                } else {
                    format!("int_{}", stem.join("_"))
                };
                let csv_path = args.out.join(format!("effects/{stem}.csv"));
                let mut w = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
                writeln!(w, "sample,effect")?;
                for (i, v) in values.iter().enumerate() {
                    writeln!(w, "{i},{v}")?;
                }
            }
            _ => {}
        }
    }
    std::fs::write(
        args.out.join("importance.svg"),
        plot::bar_chart("Effect importance", "variance share", &bar_labels, &bar_values),
    )?;

    // |beta| histogram (and optional sweep table).
    let thetas: Vec<f64> = match &args.sweep {
        Some(list) => {
            let mut parsed = Vec::new();
            for part in list.split(',') {
                let v: f64 = part.trim().parse().map_err(|_| {
                    Error::InvalidConfig(vec![format!("bad sweep threshold '{part}'")])
                })?;
                if !(v > 0.0) {
                    return Err(Error::InvalidConfig(vec![format!(
                        "sweep thresholds must be > 0, got {v}"
                    )]));
                }
                parsed.push(v);
            }
            parsed.sort_by(|a, b| a.partial_cmp(b).unwrap());
            parsed
        }
        None => vec![args.theta],
    };
    let sweep = threshold_sweep(&ensemble, &ds.x, &thetas, !args.raw_beta)?;
    std::fs::write(
        args.out.join("beta_histogram.svg"),
        plot::histogram(
            "Normalized |projection coefficient| distribution",
            "|beta| (normalized)",
            &sweep.histogram.edges,
            &sweep.histogram.counts,
        ),
    )?;
    if args.sweep.is_some() {
        let path = args.out.join("sweep.csv");
        let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(w, "theta,group_id,type,importance,rank,significant")?;
        for (theta, _, rep) in &sweep.per_theta {
            for e in &rep.entries {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    theta,
                    e.group.label(&ds.feature_names),
                    e.group.kind_str(),
                    e.importance,
                    e.rank,
                    e.significant
                )?;
            }
        }
    }

    let n_sig = report.entries.iter().filter(|e| e.significant).count();
    println!(
        "decomposed into {} groups ({} significant at {:.1}%) — reports in {}",
        report.entries.len(),
        n_sig,
        SIGNIFICANCE_CUTOFF * 100.0,
        args.out.display()
    );
    Ok(())
}
