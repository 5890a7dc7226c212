//! Rolling-window one-step-ahead forecasting and cross-model comparison.
//!
//! For every out-of-sample index `t` the harness re-estimates (on the refit
//! cadence) and re-filters the model on the trailing `window` returns, then
//! extends the recursion one step to obtain `(VaR_t, ES_t)`. Estimation and
//! filtering see only data strictly before `t`, so forecasts are free of
//! look-ahead by construction.
//!
//! Reproducibility: refit `k` runs its chain with seed
//! `derive_seed(mcmc.seed, k)` (a splitmix64 hash), so a fixed base seed
//! makes the whole backtest bit-reproducible.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::ReturnSeries;
use crate::error::{Error, Result};
use crate::mcmc::{fit_model, FitOptions, McmcConfig};
use crate::models::{default_init_with, ModelKind, ModelParams, DEFAULT_ES_FALLBACK};
use crate::scalar::Scalar;
use crate::scoring::{evaluate, ForecastTriple, ScoreReport};

/// How the per-step forecast is formed from a fitted chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ForecastMode {
    /// Plug in the posterior mean.
    #[default]
    PointEstimate,
    /// Average the `(VaR, ES)` forecasts over thinned posterior draws.
    PosteriorPredictive,
}

/// Number of thinned posterior draws kept per fit (predictive averaging and
/// the admissibility fallback scan).
const KEPT_POSTERIOR_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub model: ModelKind,
    pub alpha: f64,
    /// Trailing in-sample size for each forecast.
    pub window: usize,
    /// Re-estimate every this many out-of-sample steps (1 = every step).
    pub refit_every: usize,
    pub mcmc: McmcConfig,
    /// Start each refit chain at the previous window's posterior mean.
    pub warm_start: bool,
    pub forecast: ForecastMode,
    /// Pin the parameters and skip estimation entirely (debug/oracle mode).
    pub fixed_params: Option<Vec<f64>>,
    pub es_fallback: f64,
}

impl BacktestConfig {
    pub fn new(model: ModelKind, alpha: f64, window: usize) -> Self {
        Self {
            model,
            alpha,
            window,
            refit_every: 1,
            mcmc: McmcConfig::default(),
            warm_start: true,
            forecast: ForecastMode::PointEstimate,
            fixed_params: None,
            es_fallback: DEFAULT_ES_FALLBACK,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.window < 200 {
            return Err(Error::domain(format!(
                "window must be at least 200, got {}",
                self.window
            )));
        }
        if self.refit_every == 0 {
            return Err(Error::domain("refit_every must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::domain("alpha must lie in (0, 0.5)"));
        }
        if let Some(p) = &self.fixed_params {
            if p.len() != self.model.dim() {
                return Err(Error::LengthMismatch {
                    left: p.len(),
                    right: self.model.dim(),
                });
            }
        }
        Ok(())
    }
}

/// One dated out-of-sample forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRecord<T> {
    /// 1-based index into the analyzed return series.
    pub t: usize,
    pub date: String,
    pub r_observed: T,
    pub var_forecast: T,
    pub es_forecast: T,
    pub refit: bool,
}

pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct ParamVintage<T> {
    point: Vec<T>,
    /// Thinned post-burn-in draws, oldest first; empty in pinned mode.
    draws: Vec<Vec<T>>,
}

/// Produces one forecast record per index in `window..len`.
pub fn rolling_forecast<T: Scalar>(
    r: &ReturnSeries<T>,
    cfg: &BacktestConfig,
) -> Result<Vec<ForecastRecord<T>>> {
    cfg.validate()?;
    if r.len() <= cfg.window {
        return Err(Error::domain(format!(
            "series of length {} leaves no out-of-sample data past window {}",
            r.len(),
            cfg.window
        )));
    }
    let alpha = T::cast(cfg.alpha);
    let fallback = T::cast(cfg.es_fallback);

    let mut vintage: Option<ParamVintage<T>> = None;
    let mut refit_counter = 0u64;
    let mut records = Vec::with_capacity(r.len() - cfg.window);

    for t in cfg.window..r.len() {
        let slice = &r.values[t - cfg.window..t];
        let step = t - cfg.window;
        let mut refit = false;

        if step % cfg.refit_every == 0 {
            if let Some(fixed) = &cfg.fixed_params {
                if vintage.is_none() {
                    vintage = Some(ParamVintage {
                        point: fixed.iter().map(|v| T::cast(*v)).collect(),
                        draws: Vec::new(),
                    });
                }
            } else {
                let opts = FitOptions {
                    alpha: cfg.alpha,
                    mcmc: McmcConfig {
                        seed: derive_seed(cfg.mcmc.seed, refit_counter),
                        ..cfg.mcmc.clone()
                    },
                    es_fallback: cfg.es_fallback,
                };
                let warm = vintage.as_ref().filter(|_| cfg.warm_start);
                let fit = fit_model(
                    cfg.model,
                    slice,
                    &opts,
                    warm.map(|v| v.point.as_slice()),
                )?;
                let post = fit.chain.posterior_draws(opts.mcmc.burnin);
                let stride = (post.len() / KEPT_POSTERIOR_DRAWS).max(1);
                let draws: Vec<Vec<T>> =
                    post.iter().step_by(stride).map(|d| d.to_vec()).collect();
                vintage = Some(ParamVintage {
                    point: fit.point,
                    draws,
                });
                refit_counter += 1;
                refit = true;
            }
        }
        let vintage = vintage.as_ref().expect("first step always sets a vintage");

        let init = default_init_with(slice, alpha, fallback)?;
        let r_last = slice[slice.len() - 1];
        let (var, es) = match cfg.forecast {
            ForecastMode::PointEstimate => {
                forecast_with_fallback(cfg.model, vintage, slice, &init, r_last, t)?
            }
            ForecastMode::PosteriorPredictive => {
                if vintage.draws.is_empty() {
                    forecast_with_fallback(cfg.model, vintage, slice, &init, r_last, t)?
                } else {
                    let mut var_sum = T::zero();
                    let mut es_sum = T::zero();
                    let mut used = 0usize;
                    for draw in &vintage.draws {
                        let params = ModelParams::from_flat(cfg.model, draw)?;
                        let path = params.risk_path(slice, &init)?;
                        if !path.admissible {
                            continue;
                        }
                        let (v, e) = params.forecast_next(&path, r_last)?;
                        var_sum += v;
                        es_sum += e;
                        used += 1;
                    }
                    if used == 0 {
                        return Err(Error::domain(format!(
                            "no admissible posterior draw at step {t}"
                        )));
                    }
                    let n = T::cast(used as f64);
                    (var_sum / n, es_sum / n)
                }
            }
        };
        if !(es < T::zero()) {
            return Err(Error::domain(format!(
                "forecast at step {t} has ES = {es} ≥ 0; the fit is not usable"
            )));
        }
        records.push(ForecastRecord {
            t: t + 1,
            date: r.date_label(t),
            r_observed: r.values[t],
            var_forecast: var,
            es_forecast: es,
            refit,
        });
    }
    Ok(records)
}

/// Forecast from the point estimate; if its path on the current window is
/// inadmissible, fall back to the most recent admissible posterior draw.
fn forecast_with_fallback<T: Scalar>(
    kind: ModelKind,
    vintage: &ParamVintage<T>,
    slice: &[T],
    init: &crate::models::InitState<T>,
    r_last: T,
    t: usize,
) -> Result<(T, T)> {
    let params = ModelParams::from_flat(kind, &vintage.point)?;
    let path = params.risk_path(slice, init)?;
    if path.admissible {
        return params.forecast_next(&path, r_last);
    }
    for draw in vintage.draws.iter().rev() {
        let params = ModelParams::from_flat(kind, draw)?;
        let path = params.risk_path(slice, init)?;
        if path.admissible {
            return params.forecast_next(&path, r_last);
        }
    }
    Err(Error::domain(format!(
        "no admissible parameter vector for the window ending at step {t}"
    )))
}

/// Per-model score rows over an identical out-of-sample span, with the best
/// quantile loss and AL score flagged.
#[derive(Debug, Clone)]
pub struct ComparisonTable<T> {
    pub alpha: f64,
    pub rows: Vec<(String, ScoreReport<T>)>,
    pub best_quantile: usize,
    pub best_al: usize,
}

pub fn compare<T: Scalar>(
    per_model: &[(String, &[ForecastRecord<T>])],
    alpha: T,
) -> Result<ComparisonTable<T>> {
    if per_model.is_empty() {
        return Err(Error::domain("nothing to compare"));
    }
    let reference = per_model[0].1;
    for (name, records) in per_model {
        if records.len() != reference.len() {
            return Err(Error::domain(format!(
                "misaligned spans: {} has {} records, {} has {}",
                per_model[0].0,
                reference.len(),
                name,
                records.len()
            )));
        }
        if records
            .iter()
            .zip(reference)
            .any(|(a, b)| a.t != b.t)
        {
            return Err(Error::domain(format!(
                "misaligned spans: {} covers different indices than {}",
                name, per_model[0].0
            )));
        }
    }
    let mut rows = Vec::with_capacity(per_model.len());
    for (name, records) in per_model {
        let triples: Vec<ForecastTriple<T>> = records
            .iter()
            .map(|rec| ForecastTriple {
                r: rec.r_observed,
                var: rec.var_forecast,
                es: rec.es_forecast,
            })
            .collect();
        rows.push((name.clone(), evaluate(&triples, alpha)?));
    }
    let best_by = |f: fn(&ScoreReport<T>) -> T| {
        rows.iter()
            .enumerate()
            .min_by(|a, b| f(&a.1 .1).partial_cmp(&f(&b.1 .1)).unwrap())
            .map(|(i, _)| i)
            .unwrap()
    };
    let best_quantile = best_by(|r| r.avg_quantile_loss);
    let best_al = best_by(|r| r.avg_al_score);
    Ok(ComparisonTable {
        alpha: alpha.as_f64(),
        rows,
        best_quantile,
        best_al,
    })
}

impl<T: Scalar> ComparisonTable<T> {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let io_err = |source| Error::Io {
            path: std::path::PathBuf::from("<comparison csv>"),
            source,
        };
        writeln!(
            w,
            "model,n,violation_rate,avg_quantile_loss,avg_al_score,best_quantile,best_al"
        )
        .map_err(io_err)?;
        for (i, (name, rep)) in self.rows.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                name,
                rep.n,
                rep.violation_rate,
                rep.avg_quantile_loss,
                rep.avg_al_score,
                i == self.best_quantile,
                i == self.best_al
            )
            .map_err(io_err)?;
        }
        Ok(())
    }
}

impl<T: Scalar> std::fmt::Display for ComparisonTable<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "alpha = {}", self.alpha)?;
        writeln!(
            f,
            "{:<12} {:>6} {:>10} {:>16} {:>12}",
            "model", "n", "viol.rate", "quantile loss", "AL score"
        )?;
        for (i, (name, rep)) in self.rows.iter().enumerate() {
            writeln!(
                f,
                "{:<12} {:>6} {:>10.4} {:>15.4}{} {:>11.4}{}",
                name,
                rep.n,
                rep.violation_rate.as_f64(),
                rep.avg_quantile_loss.as_f64(),
                if i == self.best_quantile { "*" } else { " " },
                rep.avg_al_score.as_f64(),
                if i == self.best_al { "*" } else { " " },
            )?;
        }
        write!(f, "(* = column best)")
    }
}

/// `t,date,return,var,es,refit` CSV.
pub fn write_records_csv<T: Scalar, W: Write>(w: &mut W, records: &[ForecastRecord<T>]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: std::path::PathBuf::from("<forecast csv>"),
        source,
    };
    writeln!(w, "t,date,return,var,es,refit").map_err(io_err)?;
    for rec in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            rec.t, rec.date, rec.r_observed, rec.var_forecast, rec.es_forecast, rec.refit as u8
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// Parses a forecast CSV written by [`write_records_csv`].
pub fn parse_records_csv<T: Scalar>(
    text: &str,
    path: Option<&std::path::Path>,
) -> Result<Vec<ForecastRecord<T>>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::csv(path, 1, "empty file"))?;
    if header.trim_end_matches('\r') != "t,date,return,var,es,refit" {
        return Err(Error::csv(path, 1, "expected header `t,date,return,var,es,refit`"));
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::csv(path, idx + 1, "expected 6 fields"));
        }
        let bad = |what: &str| Error::csv(path, idx + 1, format!("bad {what}"));
        records.push(ForecastRecord {
            t: fields[0].parse().map_err(|_| bad("t"))?,
            date: fields[1].to_string(),
            r_observed: fields[2].parse().map_err(|_| bad("return"))?,
            var_forecast: fields[3].parse().map_err(|_| bad("var"))?,
            es_forecast: fields[4].parse().map_err(|_| bad("es"))?,
            refit: match fields[5] {
                "1" | "true" => true,
                "0" | "false" => false,
                _ => return Err(bad("refit flag")),
            },
        });
    }
    if records.is_empty() {
        return Err(Error::csv(path, 1, "no observations"));
    }
    Ok(records)
}
