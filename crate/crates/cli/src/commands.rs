//! One function per subcommand. Each returns the process exit code on
//! success; errors are mapped to codes in `main`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tae_core::baselines::train_linear_ae;
use tae_core::datasets::{
    denoise_split, generate_planted, write_csv, zscore_normalize, PlantedSpec, ZScore,
};
use tae_core::linear::{
    initialize, reconstruct_all, s_update_lloyd, tae_loss, train_from, ReconstructionForm,
};
use tae_core::metrics::{adjusted_rand_index, mse};
use tae_core::mlp::{initialize_mlp, tensorized_mlp_loss, train_mlp, train_mlp_from};
use tae_core::model_io::{load_model, save_model, ModelBundle, SavedModel};
use tae_core::spectral::verify_optimality;
use tae_core::{AssignmentMatrix, DataMatrix, TaeError};

use crate::args::{
    ArchArg, ClusterArgs, ColumnOptions, DenoiseArgs, GenArgs, ModelOptions, Preset, TrainArgs,
    VerifyArgs,
};
use crate::exit::{Failure, DIVERGED, UNSUPPORTED, VERIFY_FAILED};
use crate::io::{labels_csv, read_labels, read_table, write_json, write_labels};
use crate::record::{Metrics, RunRecord};

pub fn gen(args: GenArgs) -> Result<u8> {
    let mut spec = match (&args.spec, args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            PlantedSpec::from_json(&text)
                .with_context(|| format!("invalid spec {}", path.display()))?
        }
        (None, Some(Preset::Crossing)) => PlantedSpec::crossing(0),
        (None, Some(Preset::ThreeOriented)) => PlantedSpec::three_oriented(0),
        (None, Some(Preset::Nested)) => PlantedSpec::nested(0),
        (None, None) => bail!("either --spec or --preset is required"),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let data = generate_planted(&spec)?;
    write_csv(&args.out, &data).with_context(|| format!("writing {}", args.out.display()))?;
    log::info!(
        "wrote {} rows to {}",
        data.x.n_samples(),
        args.out.display()
    );
    Ok(0)
}

/// Configuration echo stored in a training run record.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainEcho {
    pub data: PathBuf,
    pub columns: ColumnOptions,
    pub normalize: bool,
    pub model: ModelOptions,
}

struct Dataset {
    x: DataMatrix,
    labels: Option<Vec<usize>>,
    transform: Option<ZScore>,
}

fn load_dataset(path: &Path, columns: &ColumnOptions, normalize: bool) -> Result<Dataset> {
    let table = read_table(path, columns)?;
    let x = DataMatrix::new(table.values)
        .with_context(|| format!("{} has no usable rows", path.display()))?;
    let (x, transform) = if normalize {
        let (z, params) = zscore_normalize(&x)?;
        (z, Some(params))
    } else {
        (x, None)
    };
    Ok(Dataset {
        x,
        labels: table.labels,
        transform,
    })
}

/// Outcome of either architecture's trainer.
struct Fitted {
    model: SavedModel,
    assignments: AssignmentMatrix,
    loss_trace: Vec<f64>,
    final_loss: f64,
    epochs_run: usize,
    converged: bool,
}

/// Trains the configured architecture. `trace` receives the initial loss and
/// every epoch's loss as they are produced, so it survives a divergence.
fn fit(x: &DataMatrix, opts: &ModelOptions, trace: &mut Vec<f64>) -> tae_core::Result<Fitted> {
    let k = opts
        .k
        .ok_or_else(|| TaeError::InvalidInput("--k is required".into()))?;
    let cfg = opts.train_config();
    match opts.arch {
        ArchArg::Linear => {
            let (model, s) = initialize(x, k, &cfg)?;
            trace.push(tae_loss(x, &s, &model)?);
            let out = train_from(x, s, model, &cfg, &mut |snap| trace.push(snap.loss))?;
            Ok(Fitted {
                model: SavedModel::Linear(out.model),
                assignments: out.assignments,
                loss_trace: out.loss_trace,
                final_loss: out.final_loss,
                epochs_run: out.epochs_run,
                converged: out.converged,
            })
        }
        ArchArg::Mlp => {
            let (model, s) = initialize_mlp(x, k, &cfg, opts.mlp_arch())?;
            trace.push(tensorized_mlp_loss(x, &s, &model)?);
            let out = train_mlp_from(x, s, model, &cfg, &mut |snap| trace.push(snap.loss))?;
            Ok(Fitted {
                model: SavedModel::Mlp(out.model),
                assignments: out.assignments,
                loss_trace: out.loss_trace,
                final_loss: out.final_loss,
                epochs_run: out.epochs_run,
                converged: out.converged,
            })
        }
    }
}

fn reconstruct_with(
    model: &SavedModel,
    x: &DataMatrix,
    form: ReconstructionForm,
) -> tae_core::Result<ndarray::Array2<f64>> {
    match model {
        SavedModel::Linear(m) => reconstruct_all(x, m, form),
        SavedModel::Mlp(m) => m.reconstruct_all(x),
    }
}

/// Writes a `diverged` record holding the partial trace and returns the
/// error to exit with.
fn report_divergence(
    err: TaeError,
    command: &str,
    config: serde_json::Value,
    seed: u64,
    trace: Vec<f64>,
    report: Option<&Path>,
    started: Instant,
) -> anyhow::Error {
    let path = report
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(format!("tae-{command}-diverged-{seed}.json")));
    let record = RunRecord {
        command: command.into(),
        status: "diverged".into(),
        config,
        seed,
        epochs_run: trace.len().saturating_sub(1),
        loss_trace: trace,
        final_loss: None,
        converged: false,
        metrics: Metrics::default(),
        spectral_report: None,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    match write_json(&path, &record) {
        Ok(()) => Failure::new(
            DIVERGED,
            format!("{err}; loss trace written to {}", path.display()),
        )
        .into(),
        Err(write_err) => Failure::new(
            DIVERGED,
            format!("{err}; could not write loss trace: {write_err:#}"),
        )
        .into(),
    }
}

fn is_divergence(err: &TaeError) -> bool {
    matches!(
        err,
        TaeError::NumericalDivergence { .. } | TaeError::EmptyCluster { .. }
    )
}

pub fn train(args: TrainArgs) -> Result<u8> {
    let started = Instant::now();
    let echo = match &args.from_record {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let record: RunRecord = serde_json::from_str(&text)
                .with_context(|| format!("parsing run record {}", path.display()))?;
            serde_json::from_value::<TrainEcho>(record.config).with_context(|| {
                format!("{} does not hold a train configuration", path.display())
            })?
        }
        None => {
            let data = args.data.clone().context("--data is required")?;
            TrainEcho {
                data: std::fs::canonicalize(&data).unwrap_or(data),
                columns: args.columns.clone(),
                normalize: args.normalize,
                model: args.model.clone(),
            }
        }
    };
    if echo.model.k.is_none() {
        bail!(Failure::new(crate::exit::INPUT_ERROR, "--k is required"));
    }
    let config = serde_json::to_value(&echo)?;
    let seed = echo.model.seed;
    let data = load_dataset(&echo.data, &echo.columns, echo.normalize)?;

    let mut trace = Vec::new();
    let fitted = match fit(&data.x, &echo.model, &mut trace) {
        Ok(f) => f,
        Err(err) if is_divergence(&err) => {
            return Err(report_divergence(
                err,
                "train",
                config,
                seed,
                trace,
                args.report.as_deref(),
                started,
            ));
        }
        Err(err) => return Err(err.into()),
    };

    let labels = fitted.assignments.hard_labels();
    let ari = match &data.labels {
        Some(truth) if truth.len() >= 2 => Some(adjusted_rand_index(truth, &labels)?),
        _ => None,
    };
    let recon = reconstruct_with(&fitted.model, &data.x, ReconstructionForm::Projection)?;
    let spectral_report = match &fitted.model {
        SavedModel::Linear(m) => Some(verify_optimality(&data.x, &fitted.assignments, m)?),
        SavedModel::Mlp(_) => None,
    };
    let record = RunRecord {
        command: "train".into(),
        status: "ok".into(),
        config,
        seed,
        loss_trace: fitted.loss_trace,
        final_loss: Some(fitted.final_loss),
        epochs_run: fitted.epochs_run,
        converged: fitted.converged,
        metrics: Metrics {
            ari,
            mse: Some(mse(data.x.view(), recon.view())?),
            ..Default::default()
        },
        spectral_report,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };

    if let Some(out) = &args.out {
        let bundle = ModelBundle {
            model: fitted.model,
            seed,
            input_transform: data.transform,
        };
        save_model(out, &bundle).with_context(|| format!("writing {}", out.display()))?;
    }
    if let Some(path) = &args.assignments_out {
        write_labels(path, &labels)?;
    }
    match &args.report {
        Some(path) => write_json(path, &record)?,
        None => println!("{}", serde_json::to_string_pretty(&record)?),
    }
    log::info!(
        "trained {} epochs, final loss {:.6e}{}",
        record.epochs_run,
        fitted.final_loss,
        ari.map(|a| format!(", ARI {a:.4}")).unwrap_or_default()
    );
    Ok(0)
}

/// Reads data for an existing model, applying its stored standardization.
fn data_for_model(
    path: &Path,
    columns: &ColumnOptions,
    bundle: &ModelBundle,
) -> Result<Option<DataMatrix>> {
    let table = read_table(path, columns)?;
    if table.values.nrows() == 0 {
        return Ok(None);
    }
    let x = DataMatrix::new(table.values)?;
    if x.n_features() != bundle.model.input_dim() {
        return Err(TaeError::DimensionMismatch {
            axis: "features",
            expected: bundle.model.input_dim(),
            found: x.n_features(),
        })
        .with_context(|| format!("{} does not match the model", path.display()));
    }
    Ok(Some(match &bundle.input_transform {
        Some(z) => z.apply(&x)?,
        None => x,
    }))
}

pub fn cluster(args: ClusterArgs) -> Result<u8> {
    let bundle =
        load_model(&args.model).with_context(|| format!("loading {}", args.model.display()))?;
    let labels = match data_for_model(&args.data, &args.columns, &bundle)? {
        None => {
            // Empty input, empty output.
            if let Some(path) = &args.out {
                std::fs::write(path, "")?;
            }
            return Ok(0);
        }
        Some(x) => match &bundle.model {
            SavedModel::Linear(m) => s_update_lloyd(&x, m)?.hard_labels(),
            SavedModel::Mlp(m) => x
                .rows()
                .into_iter()
                .map(|r| m.assign(r).map(|(j, _)| j))
                .collect::<tae_core::Result<Vec<_>>>()?,
        },
    };
    match &args.out {
        Some(path) => write_labels(path, &labels)?,
        None => print!("{}", labels_csv(&labels)),
    }
    Ok(0)
}

pub fn verify(args: VerifyArgs) -> Result<u8> {
    let bundle =
        load_model(&args.model).with_context(|| format!("loading {}", args.model.display()))?;
    let SavedModel::Linear(model) = &bundle.model else {
        bail!(Failure::new(UNSUPPORTED, "theorem check is linear-only"));
    };
    let x = data_for_model(&args.data, &args.columns, &bundle)?
        .with_context(|| format!("{} has no usable rows", args.data.display()))?;
    let s = match &args.assignments {
        Some(path) => {
            let labels = read_labels(path)?;
            if labels.len() != x.n_samples() {
                bail!(TaeError::DimensionMismatch {
                    axis: "samples",
                    expected: x.n_samples(),
                    found: labels.len(),
                });
            }
            AssignmentMatrix::from_labels(&labels, model.k())?
        }
        None => s_update_lloyd(&x, model)?,
    };
    let report = verify_optimality(&x, &s, model)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    Ok(if report.pass { 0 } else { VERIFY_FAILED })
}

pub fn denoise(args: DenoiseArgs) -> Result<u8> {
    let started = Instant::now();
    let opts = &args.model;
    let seed = opts.seed;
    let config = serde_json::json!({
        "data_clean": std::fs::canonicalize(&args.data_clean).unwrap_or(args.data_clean.clone()),
        "columns": args.columns,
        "noise_sigma": args.noise_sigma,
        "train_fraction": args.train_fraction,
        "corrupt_train": args.corrupt_train,
        "recon_form": format!("{:?}", args.recon_form).to_lowercase(),
        "model": opts,
    });
    let data = load_dataset(&args.data_clean, &args.columns, false)?;
    let split = denoise_split(
        &data.x,
        args.train_fraction,
        args.noise_sigma,
        args.corrupt_train,
        seed,
    )?;
    let (train_input, clean_test, noisy_test) =
        (split.train_input, split.test_clean, split.test_noisy);

    let mut trace = Vec::new();
    let fitted = match fit(&train_input, opts, &mut trace) {
        Ok(f) => f,
        Err(err) if is_divergence(&err) => {
            return Err(report_divergence(
                err,
                "denoise",
                config,
                seed,
                trace,
                args.report.as_deref(),
                started,
            ));
        }
        Err(err) => return Err(err.into()),
    };
    let form = args.recon_form.into();
    let tae_recon = reconstruct_with(&fitted.model, &noisy_test, form)?;

    let cfg = opts.train_config();
    let ae_recon = match opts.arch {
        ArchArg::Linear => {
            let ae = train_linear_ae(&train_input, opts.latent, opts.lambda, &cfg)?.model;
            ae.reconstruct(&noisy_test)?
        }
        ArchArg::Mlp => train_mlp(&train_input, 1, &cfg, opts.mlp_arch())?
            .model
            .reconstruct_all(&noisy_test)?,
    };
    let metrics = Metrics {
        mse_tae: Some(mse(clean_test.view(), tae_recon.view())?),
        mse_ae: Some(mse(clean_test.view(), ae_recon.view())?),
        mse_noisy: Some(mse(clean_test.view(), noisy_test.view())?),
        ..Default::default()
    };
    log::info!(
        "test MSE: tensorized {:.6}, single autoencoder {:.6}, noisy input {:.6}",
        metrics.mse_tae.unwrap_or(f64::NAN),
        metrics.mse_ae.unwrap_or(f64::NAN),
        metrics.mse_noisy.unwrap_or(f64::NAN)
    );
    let record = RunRecord {
        command: "denoise".into(),
        status: "ok".into(),
        config,
        seed,
        loss_trace: fitted.loss_trace,
        final_loss: Some(fitted.final_loss),
        epochs_run: fitted.epochs_run,
        converged: fitted.converged,
        metrics,
        spectral_report: None,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    if let Some(path) = &args.model_out {
        let bundle = ModelBundle {
            model: fitted.model,
            seed,
            input_transform: None,
        };
        save_model(path, &bundle).with_context(|| format!("writing {}", path.display()))?;
    }
    match &args.report {
        Some(path) => write_json(path, &record)?,
        None => println!("{}", serde_json::to_string_pretty(&record)?),
    }
    Ok(0)
}
