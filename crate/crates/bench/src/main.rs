use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twinsvm_core::cv::{FoldContext, Objective};
use twinsvm_core::metrics::{metrics, ConfusionMatrix};
use twinsvm_core::{Hyperparams, Kernel, Label};
use twinsvm_bench::config::{parse_method, ExperimentConfig, Overrides};
use twinsvm_bench::dataset::{default_schema_path, load_csv, load_features, Schema};
use twinsvm_bench::fixtures::{render_checks, validate_fixtures};
use twinsvm_bench::model_io::{read_model, write_model, ModelFile};
use twinsvm_bench::report::write_summaries;
use twinsvm_bench::runner::{exit_code, run, PairStatus};
use twinsvm_bench::BenchError;

#[derive(Parser)]
#[command(name = "twinsvm", version, about = "Twin SVM benchmarks for imbalanced classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Nested cross-validation for every dataset × method in a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Use the literal bias-weight branches (one weight above 1).
        #[arg(long)]
        literal_weights: bool,
        #[arg(long, value_parser = parse_objective)]
        objective: Option<Objective>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare shipped datasets with the fixture manifest.
    ValidateFixtures {
        #[arg(long, default_value = "fixtures")]
        dir: PathBuf,
    },
    /// Rebuild summary.md and friedman.md from the CSV files of a run.
    Report { out_dir: PathBuf },
    /// Train one model on a whole CSV file and save it.
    Train {
        csv: PathBuf,
        #[arg(long)]
        method: String,
        /// Defaults to the CSV path with a `.schema` extension.
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Hyperparameter override such as `eta1=0.4`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        literal_weights: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print `label,score` for every row of a CSV file.
    Predict {
        model: PathBuf,
        csv: PathBuf,
        /// With a schema the label column is skipped and scored against.
        #[arg(long)]
        schema: Option<PathBuf>,
    },
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    s.parse()
}

fn set_param(hp: &mut Hyperparams, spec: &str) -> Result<(), String> {
    let (key, value) = spec.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, found `{spec}`"))?;
    let v: f64 = value.trim().parse().map_err(|_| format!("`{key}`: cannot parse `{value}`"))?;
    match key.trim() {
        "theta" => (hp.theta1, hp.theta2) = (v, v),
        "theta1" => hp.theta1 = v,
        "theta2" => hp.theta2 = v,
        "c" => (hp.c1, hp.c2) = (v, v),
        "c_slack" => (hp.c3, hp.c4) = (v, v),
        "c1" => hp.c1 = v,
        "c2" => hp.c2 = v,
        "c3" => hp.c3 = v,
        "c4" => hp.c4 = v,
        "eta1" => hp.eta1 = v,
        "eta2" => hp.eta2 = v,
        "k" if v >= 1.0 && v.fract() == 0.0 => hp.k_graph = v as usize,
        "gamma" => hp.kernel = Kernel::Rbf { gamma: v },
        other => return Err(format!("unknown or invalid parameter `{other}`")),
    }
    Ok(())
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn train(
    csv: &Path,
    method: &str,
    schema: Option<&Path>,
    set: &[String],
    seed: u64,
    literal: bool,
    out: &Path,
) -> Result<(), String> {
    let mut spec = parse_method(method, 5).ok_or_else(|| format!("unknown method `{method}`"))?;
    if literal {
        spec.wsocp.weight_mode = twinsvm_core::weighting::WeightMode::Literal;
    }
    let mut hp = Hyperparams::default();
    if spec.kernelized {
        hp.kernel = Kernel::Rbf { gamma: 1.0 };
    }
    for s in set {
        set_param(&mut hp, s)?;
    }
    if !spec.kernelized && hp.kernel != Kernel::Linear {
        return Err("gamma given for a linear method".into());
    }
    hp.validate().map_err(|e| e.to_string())?;
    let schema_path = schema.map_or_else(|| default_schema_path(csv), Path::to_path_buf);
    let ds = Schema::load(&schema_path)
        .and_then(|s| load_csv(csv, &s))
        .map_err(|e| e.to_string())?;
    let mut ctx = FoldContext::new(&ds, &spec, seed).map_err(|e| e.to_string())?;
    let model = ctx.fit(&hp).map_err(|e| e.to_string())?;
    if !model.info.converged {
        log::warn!("solver hit its iteration limit");
    }
    let file = ModelFile {
        model,
        scaler: Some(ctx.scaler().clone()),
    };
    std::fs::write(out, write_model(&file)).map_err(|e| BenchError::io(out, e).to_string())
}

fn predict(model: &Path, csv: &Path, schema: Option<&Path>) -> Result<(), String> {
    let text = std::fs::read_to_string(model).map_err(|e| BenchError::io(model, e).to_string())?;
    let file = read_model(&text).map_err(|e| BenchError::parse(model, e).to_string())?;
    let (x, truth) = match schema {
        Some(s) => {
            let ds = Schema::load(s).and_then(|s| load_csv(csv, &s)).map_err(|e| e.to_string())?;
            (ds.features().clone(), Some(ds.labels().to_vec()))
        }
        None => (load_features(csv).map_err(|e| e.to_string())?, None),
    };
    let mut cm = ConfusionMatrix::default();
    let mut out = String::from("label,score\n");
    for (i, row) in x.iter_rows().enumerate() {
        let (label, score) = file.predict(row).map_err(|e| format!("row {}: {e}", i + 1))?;
        let name = if label == Label::Minority { "minority" } else { "majority" };
        out.push_str(&format!("{name},{score}\n"));
        if let Some(t) = &truth {
            cm.record(t[i], label);
        }
    }
    print!("{out}");
    if truth.is_some() {
        let r = metrics(&cm);
        eprintln!(
            "accuracy {:.4}  sensitivity {:.4}  specificity {:.4}  g-mean {:.4}",
            r.accuracy, r.sensitivity, r.specificity, r.gmean
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match cli.command {
        Command::Run {
            config,
            seed,
            jobs,
            literal_weights,
            objective,
            output,
        } => {
            let mut cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            cfg.apply(&Overrides {
                seed,
                jobs,
                literal_weights,
                objective,
                output,
            });
            let outcomes = match run(&cfg) {
                Ok(o) => o,
                Err(e) => return fail(e),
            };
            for o in &outcomes {
                match &o.status {
                    PairStatus::Done(r) => eprintln!(
                        "{} / {}: accuracy {:.2} ± {:.2}, g-mean {:.2} ± {:.2} ({:.1}s)",
                        o.dataset,
                        o.method,
                        100.0 * r.accuracy.mean,
                        100.0 * r.accuracy.std,
                        100.0 * r.gmean.mean,
                        100.0 * r.gmean.std,
                        o.cpu_seconds
                    ),
                    PairStatus::Unrunnable(e) | PairStatus::Failed(e) => {
                        eprintln!("{} / {}: FAILED: {e}", o.dataset, o.method)
                    }
                }
            }
            let code = exit_code(&outcomes);
            if code == 1 {
                eprintln!("error: no runnable dataset/method pairs");
            }
            ExitCode::from(code as u8)
        }
        Command::ValidateFixtures { dir } => match validate_fixtures(&dir) {
            Ok(checks) => {
                print!("{}", render_checks(&checks));
                if checks.iter().all(|c| c.passed()) {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(3)
                }
            }
            Err(e) => fail(e),
        },
        Command::Report { out_dir } => match write_summaries(&out_dir) {
            Ok(c) if c.cells.is_empty() && c.errors.is_empty() => fail(format!("no results in {}", out_dir.display())),
            Ok(_) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Command::Train {
            csv,
            method,
            schema,
            set,
            seed,
            literal_weights,
            out,
        } => match train(&csv, &method, schema.as_deref(), &set, seed, literal_weights, &out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Command::Predict { model, csv, schema } => match predict(&model, &csv, schema.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
    }
}
