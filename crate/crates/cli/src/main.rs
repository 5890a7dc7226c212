//! `esvar` — scriptable joint VaR/ES forecasting runs.
//!
//! Every output file `X` is paired with a `X.run.json` sidecar recording the
//! exact subcommand configuration; `esvar rerun --sidecar X.run.json`
//! re-executes it and reproduces `X` byte-for-byte. Chain CSVs additionally
//! carry a `X.json` artifact sidecar (seed, sampler config, acceptance
//! rate) written by the library.
//!
//! Exit codes: 0 success, 2 usage (clap), 3 I/O, 4 malformed data or
//! invalid configuration, 5 numeric/sampler failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use esvar::backtest::{
    compare, rolling_forecast, write_records_csv, BacktestConfig, ForecastMode,
};
use esvar::data::{load_price_csv, load_return_csv, to_log_returns};
use esvar::mcmc::{fit_model, posterior_summary, FitOptions, McmcConfig};
use esvar::models::{ModelKind, ModelParams};
use esvar::scoring::{evaluate, ForecastTriple};
use esvar::sim::{simulate_nonlinear_sv, SimConfig};
use esvar::{Error, ForecastRecord64, Result, ReturnSeries64};

#[derive(Parser)]
#[command(
    name = "esvar",
    version,
    about = "Joint Value-at-Risk / Expected Shortfall forecasting (LSTM-AL, SAV-EXP, AS-EXC)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Generate a synthetic return series from the nonlinear
    /// stochastic-volatility model
    Simulate(SimulateArgs),
    /// Estimate a model on the first `window` returns and store the chain
    Fit(FitArgs),
    /// Rolling one-step-ahead VaR/ES forecasts with periodic re-estimation
    Backtest(BacktestArgs),
    /// Score an existing forecast CSV
    Evaluate(EvaluateArgs),
    /// Posterior summary of an existing chain CSV
    Summarize(SummarizeArgs),
    /// Re-execute a run recorded in a `.run.json` sidecar
    Rerun(RerunArgs),
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, Default)]
#[serde(rename_all = "kebab-case")]
enum InputKind {
    /// `date,close` CSV; percentage log returns are derived
    #[default]
    Prices,
    /// `date,return` CSV with returns already in percent
    Returns,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct SimulateArgs {
    /// Output CSV path (`date,return[,logvol]`)
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Observations generated before trimming
    #[arg(long, default_value_t = 6000)]
    total: usize,
    /// Trailing observations kept
    #[arg(long, default_value_t = 2000)]
    keep: usize,
    /// Append the true log-volatility column
    #[arg(long, default_value_t = false)]
    logvol: bool,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputKind::Prices)]
    kind: InputKind,
    #[arg(long, value_parser = parse_model)]
    model: ModelKind,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// In-sample size (0 = use the whole series)
    #[arg(long, default_value_t = 2000)]
    window: usize,
    #[arg(long, default_value_t = 50000)]
    iters: usize,
    #[arg(long, default_value_t = 15000)]
    burnin: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Chain CSV output path
    #[arg(long)]
    out: PathBuf,
    /// Optional posterior-summary CSV
    #[arg(long)]
    summary_out: Option<PathBuf>,
    /// Optional in-sample risk-path CSV at the posterior mean
    #[arg(long)]
    path_out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct BacktestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputKind::Prices)]
    kind: InputKind,
    /// Model to run; repeat the flag to compare several
    #[arg(long, value_parser = parse_model, required = true)]
    model: Vec<ModelKind>,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = 2000)]
    window: usize,
    #[arg(long, default_value_t = 1)]
    refit_every: usize,
    #[arg(long, default_value_t = 50000)]
    iters: usize,
    #[arg(long, default_value_t = 15000)]
    burnin: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Forecast CSV path; with several models, `-<model>` is inserted
    /// before the extension
    #[arg(long)]
    out: PathBuf,
    /// Comparison table CSV (several models)
    #[arg(long)]
    compare_out: Option<PathBuf>,
    /// Tidy long-format CSV (`t,series,value`) for external plotting;
    /// single-model runs only
    #[arg(long)]
    tidy_out: Option<PathBuf>,
    /// Start each refit chain fresh instead of at the previous posterior mean
    #[arg(long, default_value_t = false)]
    cold_start: bool,
    /// Average forecasts over posterior draws instead of plugging in the
    /// posterior mean
    #[arg(long, default_value_t = false)]
    predictive: bool,
    /// Worker threads across models
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct EvaluateArgs {
    /// Forecast CSV (`t,date,return,var,es,refit`)
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Optional single-row score CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct SummarizeArgs {
    /// Chain CSV written by `fit`
    #[arg(long)]
    input: PathBuf,
    /// Burn-in override; defaults to the value recorded in the sidecar
    #[arg(long)]
    burnin: Option<usize>,
    /// Optional summary CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct RerunArgs {
    #[arg(long)]
    sidecar: PathBuf,
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command, 0) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        Error::Csv { .. } | Error::Domain(_) | Error::LengthMismatch { .. } => 4,
        Error::PathDiverged { .. } | Error::McmcInit { .. } | Error::Mcmc(_) => 5,
    }
}

fn dispatch(cmd: Command, depth: usize) -> Result<()> {
    match cmd {
        Command::Simulate(args) => run_simulate(args),
        Command::Fit(args) => run_fit(args),
        Command::Backtest(args) => run_backtest(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Summarize(args) => run_summarize(args),
        Command::Rerun(args) => {
            if depth > 0 {
                return Err(Error::domain("a rerun sidecar cannot itself be a rerun"));
            }
            let raw = fs::read_to_string(&args.sidecar).map_err(|source| Error::Io {
                path: args.sidecar.clone(),
                source,
            })?;
            let recorded: Command = serde_json::from_str(&raw).map_err(|e| {
                Error::domain(format!("{}: not a run sidecar: {e}", args.sidecar.display()))
            })?;
            dispatch(recorded, depth + 1)
        }
    }
}

/// Writes an output file plus its `.run.json` sidecar.
fn write_output(path: &Path, bytes: &[u8], cmd: &Command) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut sidecar = path.as_os_str().to_os_string();
    sidecar.push(".run.json");
    let sidecar = PathBuf::from(sidecar);
    let json = serde_json::to_string_pretty(cmd)
        .map_err(|e| Error::domain(format!("sidecar serialization failed: {e}")))?;
    fs::write(&sidecar, json + "\n").map_err(|source| Error::Io {
        path: sidecar,
        source,
    })?;
    Ok(())
}

fn load_series(path: &Path, kind: InputKind) -> Result<ReturnSeries64> {
    match kind {
        InputKind::Prices => to_log_returns(&load_price_csv(path)?),
        InputKind::Returns => load_return_csv(path),
    }
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let out = simulate_nonlinear_sv::<f64>(&SimConfig {
        t_total: args.total,
        t_keep: args.keep,
        seed: args.seed,
    })?;
    let mut buf = Vec::new();
    out.write_csv(&mut buf, args.logvol)?;
    let path = args.out.clone();
    write_output(&path, &buf, &Command::Simulate(args))?;
    println!("wrote {} observations to {}", out.returns.len(), path.display());
    Ok(())
}

fn run_fit(args: FitArgs) -> Result<()> {
    let series = load_series(&args.input, args.kind)?;
    let n_in = if args.window == 0 || args.window >= series.len() {
        series.len()
    } else {
        args.window
    };
    let insample = &series.values[..n_in];
    let opts = FitOptions {
        alpha: args.alpha,
        mcmc: McmcConfig {
            iters: args.iters,
            burnin: args.burnin,
            seed: args.seed,
            ..Default::default()
        },
        ..Default::default()
    };
    let fit = fit_model(args.model, insample, &opts, None)?;
    let cmd = Command::Fit(args.clone());

    fit.chain.save(&args.out, Some(args.model.as_str()))?;
    // The chain CSV also gets the run sidecar (Chain::save wrote the
    // artifact sidecar).
    let mut chain_bytes = Vec::new();
    fit.chain.write_csv(&mut chain_bytes)?;
    write_output(&args.out, &chain_bytes, &cmd)?;

    let summary = posterior_summary(&fit.chain, args.burnin)?;
    println!("model {}  acceptance rate {:.4}", args.model, fit.chain.acceptance_rate());
    println!("{summary}");
    if let Some(path) = &args.summary_out {
        let mut buf = Vec::new();
        summary.write_csv(&mut buf)?;
        write_output(path, &buf, &cmd)?;
    }
    if let Some(path) = &args.path_out {
        let params = ModelParams::from_flat(args.model, &fit.point)?;
        let insample_series = ReturnSeries64 {
            dates: series.dates.as_ref().map(|d| d[..n_in].to_vec()),
            values: insample.to_vec(),
        };
        let risk = params.risk_path(insample, &fit.init)?;
        let mut buf = Vec::new();
        risk.write_csv(&mut buf, &insample_series, true)?;
        write_output(path, &buf, &cmd)?;
    }
    Ok(())
}

fn model_out_path(base: &Path, model: ModelKind, n_models: usize) -> PathBuf {
    if n_models == 1 {
        return base.to_path_buf();
    }
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = base
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    base.with_file_name(format!("{stem}-{model}{ext}"))
}

fn run_backtest(args: BacktestArgs) -> Result<()> {
    let series = load_series(&args.input, args.kind)?;
    if args.tidy_out.is_some() && args.model.len() != 1 {
        return Err(Error::domain("--tidy-out needs exactly one --model"));
    }
    let make_cfg = |model: ModelKind| BacktestConfig {
        model,
        alpha: args.alpha,
        window: args.window,
        refit_every: args.refit_every,
        mcmc: McmcConfig {
            iters: args.iters,
            burnin: args.burnin,
            seed: args.seed,
            ..Default::default()
        },
        warm_start: !args.cold_start,
        forecast: if args.predictive {
            ForecastMode::PosteriorPredictive
        } else {
            ForecastMode::PointEstimate
        },
        fixed_params: None,
        es_fallback: esvar::models::DEFAULT_ES_FALLBACK,
    };

    // --jobs parallelizes across models only; each model's run stays
    // sequential so warm starts chain deterministically.
    let jobs = args.jobs.max(1);
    let mut results: Vec<Option<Result<Vec<ForecastRecord64>>>> =
        (0..args.model.len()).map(|_| None).collect();
    for batch in (0..args.model.len()).collect::<Vec<_>>().chunks(jobs) {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for &i in batch {
                let cfg = make_cfg(args.model[i]);
                let series = &series;
                handles.push((i, scope.spawn(move || rolling_forecast(series, &cfg))));
            }
            for (i, h) in handles {
                results[i] = Some(h.join().expect("backtest worker panicked"));
            }
        });
    }

    let cmd = Command::Backtest(args.clone());
    let mut per_model: Vec<(String, Vec<ForecastRecord64>)> = Vec::new();
    for (model, res) in args.model.iter().zip(results) {
        let records = res.expect("all slots filled")?;
        per_model.push((model.to_string(), records));
    }

    for (model, records) in args.model.iter().zip(&per_model) {
        let path = model_out_path(&args.out, *model, args.model.len());
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &records.1)?;
        write_output(&path, &buf, &cmd)?;

        let triples: Vec<ForecastTriple<f64>> = records
            .1
            .iter()
            .map(|r| ForecastTriple {
                r: r.r_observed,
                var: r.var_forecast,
                es: r.es_forecast,
            })
            .collect();
        let report = evaluate(&triples, args.alpha)?;
        println!("== {model} ==");
        println!("{report}");
    }

    if let Some(path) = &args.tidy_out {
        let records = &per_model[0].1;
        let mut buf = String::from("t,series,value\n");
        for r in records {
            buf.push_str(&format!("{},return,{}\n", r.t, r.r_observed));
            buf.push_str(&format!("{},var,{}\n", r.t, r.var_forecast));
            buf.push_str(&format!("{},es,{}\n", r.t, r.es_forecast));
        }
        write_output(path, buf.as_bytes(), &cmd)?;
    }

    if per_model.len() > 1 {
        let views: Vec<(String, &[ForecastRecord64])> = per_model
            .iter()
            .map(|(name, recs)| (name.clone(), recs.as_slice()))
            .collect();
        let table = compare(&views, args.alpha)?;
        println!("{table}");
        if let Some(path) = &args.compare_out {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            write_output(path, &buf, &cmd)?;
        }
    }
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).map_err(|source| Error::Io {
        path: args.input.clone(),
        source,
    })?;
    let records = esvar::backtest::parse_records_csv::<f64>(&text, Some(&args.input))?;
    let triples: Vec<ForecastTriple<f64>> = records
        .iter()
        .map(|r| ForecastTriple {
            r: r.r_observed,
            var: r.var_forecast,
            es: r.es_forecast,
        })
        .collect();
    let report = evaluate(&triples, args.alpha)?;
    println!("{report}");
    if let Some(path) = args.out.clone() {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write_output(&path, &buf, &Command::Evaluate(args))?;
    }
    Ok(())
}

fn run_summarize(args: SummarizeArgs) -> Result<()> {
    let chain: esvar::Chain64 = esvar::mcmc::Chain::load(&args.input)?;
    let burnin = args.burnin.unwrap_or(chain.config.burnin);
    let summary = posterior_summary(&chain, burnin)?;
    println!("acceptance rate {:.4}  burn-in {}", chain.acceptance_rate(), burnin);
    println!("{summary}");
    if let Some(path) = args.out.clone() {
        let mut buf = Vec::new();
        summary.write_csv(&mut buf)?;
        write_output(&path, &buf, &Command::Summarize(args))?;
    }
    Ok(())
}
