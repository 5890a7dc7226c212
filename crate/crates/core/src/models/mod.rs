//! VaR/ES filter models: LSTM-AL and the SAV-EXP / AS-EXC benchmarks.
//!
//! Every model is a deterministic pass over a return series given
//! parameters: same inputs, bit-identical paths. Parameters map to and from
//! a flat vector whose order is fixed per model; that order is the sampler's
//! coordinate system.

mod caviar;
mod likelihood;
mod lstm_al;

pub use caviar::{es_exc, es_exp, filter_as, filter_sav, AsExcParams, SavExpParams};
pub use likelihood::al_log_likelihood;
pub use lstm_al::{filter_lstm_al, forecast_next_lstm_al, LstmAlParams, LSTM_AL_DIM};

use std::io::Write;

use crate::data::ReturnSeries;
use crate::error::{Error, Result};
use crate::lstm::LstmState;
use crate::scalar::Scalar;

/// Magnitude ceiling for filter states; beyond it a path is flagged
/// inadmissible so explosive proposals cannot reach NaN.
pub(crate) const MAG_LIMIT: f64 = 1e8;

/// Default multiplier for the ES seed when the in-sample window has no
/// exceedance below the empirical quantile.
pub const DEFAULT_ES_FALLBACK: f64 = 1.1;

/// Which model a flat parameter vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    LstmAl,
    SavExp,
    AsExc,
}

impl ModelKind {
    pub fn dim(self) -> usize {
        match self {
            ModelKind::LstmAl => LSTM_AL_DIM,
            ModelKind::SavExp => 4,
            ModelKind::AsExc => 7,
        }
    }

    pub fn param_names(self) -> Vec<&'static str> {
        match self {
            ModelKind::LstmAl => LstmAlParams::<f64>::names(),
            ModelKind::SavExp => SavExpParams::<f64>::names().to_vec(),
            ModelKind::AsExc => AsExcParams::<f64>::names().to_vec(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::LstmAl => "lstm-al",
            ModelKind::SavExp => "sav-exp",
            ModelKind::AsExc => "as-exc",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lstm-al" => Ok(ModelKind::LstmAl),
            "sav-exp" => Ok(ModelKind::SavExp),
            "as-exc" => Ok(ModelKind::AsExc),
            other => Err(Error::domain(format!(
                "unknown model `{other}` (expected lstm-al, sav-exp, or as-exc)"
            ))),
        }
    }
}

/// Parameters of one of the three models, tagged by kind.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams<T> {
    LstmAl(LstmAlParams<T>),
    SavExp(SavExpParams<T>),
    AsExc(AsExcParams<T>),
}

impl<T: Scalar> ModelParams<T> {
    pub fn from_flat(kind: ModelKind, w: &[T]) -> Result<Self> {
        if w.len() != kind.dim() {
            return Err(Error::LengthMismatch {
                left: w.len(),
                right: kind.dim(),
            });
        }
        Ok(match kind {
            ModelKind::LstmAl => ModelParams::LstmAl(LstmAlParams::from_slice(w)),
            ModelKind::SavExp => ModelParams::SavExp(SavExpParams::from_slice(w)),
            ModelKind::AsExc => ModelParams::AsExc(AsExcParams::from_slice(w)),
        })
    }

    pub fn to_flat(&self) -> Vec<T> {
        match self {
            ModelParams::LstmAl(p) => p.to_vec(),
            ModelParams::SavExp(p) => p.to_vec(),
            ModelParams::AsExc(p) => p.to_vec(),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::LstmAl(_) => ModelKind::LstmAl,
            ModelParams::SavExp(_) => ModelKind::SavExp,
            ModelParams::AsExc(_) => ModelKind::AsExc,
        }
    }

    /// Runs the model's filter over `r` from `init` and assembles the risk
    /// path. Divergence is reported as an inadmissible path, never a NaN.
    pub fn risk_path(&self, r: &[T], init: &InitState<T>) -> Result<RiskPath<T>> {
        match self {
            ModelParams::LstmAl(p) => filter_lstm_al(p, r, init),
            // Stepwise rather than filter_sav ∘ es_exp so the failure step
            // and truncation behave exactly like the LSTM-AL filter; the
            // arithmetic per step is identical to the composition.
            ModelParams::SavExp(p) => {
                if p.to_vec().iter().any(|v| !v.is_finite()) {
                    return Err(Error::domain("non-finite SAV-EXP parameters"));
                }
                if r.iter().any(|v| !v.is_finite()) {
                    return Err(Error::domain("non-finite returns"));
                }
                init.validate()?;
                if r.is_empty() {
                    return Err(Error::domain("empty return series"));
                }
                let limit = T::cast(MAG_LIMIT);
                let factor = T::one() + p.g0.exp();
                let mut var = Vec::with_capacity(r.len());
                let mut es = Vec::with_capacity(r.len());
                var.push(init.var1);
                es.push(factor * init.var1);
                let mut admissible = true;
                let mut fail_t = None;
                for t in 1..r.len() {
                    let v = p.b0 + p.b2 * r[t - 1].abs() + p.b1 * var[t - 1];
                    if !v.is_finite() || v.abs() > limit {
                        admissible = false;
                        fail_t = Some(t);
                        break;
                    }
                    let e = factor * v;
                    var.push(v);
                    es.push(e);
                    if !e.is_finite() || !(e < T::zero()) {
                        admissible = false;
                        fail_t = Some(t);
                        break;
                    }
                }
                Ok(RiskPath {
                    var,
                    es,
                    eta: None,
                    h: None,
                    c: None,
                    x: None,
                    admissible,
                    fail_t,
                })
            }
            ModelParams::AsExc(p) => {
                let var = match filter_as(p, r, init.var1) {
                    Ok(v) => v,
                    Err(Error::PathDiverged { t }) => return Ok(RiskPath::diverged(t)),
                    Err(e) => return Err(e),
                };
                let (es, x) = match es_exc(&var, r, p.g0, p.g1, p.g2, init.x1) {
                    Ok(v) => v,
                    Err(Error::PathDiverged { t }) => return Ok(RiskPath::diverged(t)),
                    Err(e) => return Err(e),
                };
                let fail_t = es.iter().position(|e| !(*e < T::zero()));
                Ok(RiskPath {
                    var,
                    es,
                    eta: None,
                    h: None,
                    c: None,
                    x: Some(x),
                    admissible: fail_t.is_none(),
                    fail_t,
                })
            }
        }
    }

    /// One-step-ahead `(VaR, ES)` continuation of an admissible path whose
    /// last aligned return is `r_last`.
    pub fn forecast_next(&self, path: &RiskPath<T>, r_last: T) -> Result<(T, T)> {
        if !path.admissible || path.var.is_empty() {
            return Err(Error::domain("cannot forecast from an inadmissible path"));
        }
        let last = path.var.len() - 1;
        match self {
            ModelParams::LstmAl(p) => forecast_next_lstm_al(p, path, r_last),
            ModelParams::SavExp(p) => {
                let var_next = p.b0 + p.b2 * r_last.abs() + p.b1 * path.var[last];
                let es_next = (T::one() + p.g0.exp()) * var_next;
                Ok((var_next, es_next))
            }
            ModelParams::AsExc(p) => {
                let zero = T::zero();
                let var_prev = path.var[last];
                let var_next =
                    p.b0 + p.b1 * var_prev + p.b2 * r_last.max(zero) + p.b3 * (-r_last.min(zero));
                let x_prev = path.x.as_ref().map(|x| x[last]).ok_or_else(|| {
                    Error::domain("path carries no exceedance-gap state")
                })?;
                let x_next = if r_last <= var_prev {
                    p.g0 + p.g1 * (var_prev - r_last) + p.g2 * x_prev
                } else {
                    x_prev
                };
                Ok((var_next, var_next - x_next))
            }
        }
    }
}

/// Filter seed: initial `(VaR, ES)` pair plus the auxiliary starting values
/// each recursion consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitState<T> {
    pub var1: T,
    pub es1: T,
    /// Initial exceedance gap (EXC link); always `var1 − es1 ≥ 0`.
    pub x1: T,
    /// Input consumed by the first LSTM cell update.
    pub eta0: T,
    pub lstm0: LstmState<T>,
}

impl<T: Scalar> InitState<T> {
    /// Builds a seed from an `(VaR_1, ES_1)` pair with `es1 < var1 < 0`;
    /// the gap, drift input, and cell state take their conventional zeros.
    pub fn new(var1: T, es1: T) -> Result<Self> {
        let s = Self {
            var1,
            es1,
            x1: var1 - es1,
            eta0: T::zero(),
            lstm0: LstmState::zero(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.es1.is_finite() && self.var1.is_finite() && self.x1.is_finite()) {
            return Err(Error::domain("non-finite initial state"));
        }
        if !(self.es1 < self.var1 && self.var1 < T::zero()) {
            return Err(Error::domain(format!(
                "initial state must satisfy es1 < var1 < 0, got es1 = {}, var1 = {}",
                self.es1, self.var1
            )));
        }
        if self.x1 < T::zero() {
            return Err(Error::domain("initial exceedance gap must be nonnegative"));
        }
        Ok(())
    }
}

/// Empirical `alpha`-quantile: the `(⌊αn⌋+1)`-th order statistic.
pub fn empirical_quantile<T: Scalar>(values: &[T], alpha: T) -> Result<T> {
    if values.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::domain("quantile level must lie in (0, 1)"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let idx = ((alpha.as_f64() * values.len() as f64).floor() as usize).min(values.len() - 1);
    Ok(sorted[idx])
}

/// Data-driven filter seed for a lower-tail quantile level.
///
/// `var1` is the empirical `alpha`-quantile of the in-sample returns and
/// `es1` the mean of returns strictly below it; with no exceedance, `es1`
/// falls back to `fallback · var1` (default 1.1).
pub fn default_init<T: Scalar>(returns: &[T], alpha: T) -> Result<InitState<T>> {
    default_init_with(returns, alpha, T::cast(DEFAULT_ES_FALLBACK))
}

pub fn default_init_with<T: Scalar>(returns: &[T], alpha: T, fallback: T) -> Result<InitState<T>> {
    if returns.len() < 50 {
        return Err(Error::domain(format!(
            "need at least 50 in-sample returns to seed the filter, got {}",
            returns.len()
        )));
    }
    if !(alpha > T::zero() && alpha < T::cast(0.5)) {
        return Err(Error::domain(format!("alpha must lie in (0, 0.5), got {alpha}")));
    }
    if !(fallback > T::one()) {
        return Err(Error::domain("ES fallback multiplier must exceed 1"));
    }
    let var1 = empirical_quantile(returns, alpha)?;
    if !(var1 < T::zero()) {
        return Err(Error::domain(format!(
            "empirical {alpha}-quantile is {var1} ≥ 0; series not suited to lower-tail risk at this level"
        )));
    }
    let mut sum = T::zero();
    let mut count = 0usize;
    for v in returns {
        if *v < var1 {
            sum += *v;
            count += 1;
        }
    }
    let es1 = if count > 0 {
        sum / T::cast(count as f64)
    } else {
        fallback * var1
    };
    InitState::new(var1, es1)
}

/// A filter pass over a return series: the `(VaR_t, ES_t)` pair per step
/// plus whichever auxiliary states the model carries.
///
/// When `admissible` is false the vectors stop at the first failing step
/// (`fail_t`, 0-based); an admissible path is always full length and has
/// `es[t] < 0` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskPath<T> {
    pub var: Vec<T>,
    pub es: Vec<T>,
    pub eta: Option<Vec<T>>,
    pub h: Option<Vec<T>>,
    pub c: Option<Vec<T>>,
    pub x: Option<Vec<T>>,
    pub admissible: bool,
    pub fail_t: Option<usize>,
}

impl<T: Scalar> RiskPath<T> {
    fn diverged(t: usize) -> Self {
        RiskPath {
            var: Vec::new(),
            es: Vec::new(),
            eta: None,
            h: None,
            c: None,
            x: None,
            admissible: false,
            fail_t: Some(t),
        }
    }

    /// Serializes an admissible path as `t,date,return,var,es`, with the
    /// model's auxiliary state columns appended when `include_aux` is set.
    pub fn write_csv<W: Write>(
        &self,
        w: &mut W,
        returns: &ReturnSeries<T>,
        include_aux: bool,
    ) -> Result<()> {
        if !self.admissible {
            return Err(Error::domain("refusing to serialize an inadmissible path"));
        }
        if self.var.len() != returns.len() {
            return Err(Error::LengthMismatch {
                left: self.var.len(),
                right: returns.len(),
            });
        }
        let io_err = |source| Error::Io {
            path: std::path::PathBuf::from("<risk path csv>"),
            source,
        };
        let mut header = String::from("t,date,return,var,es");
        let aux: Vec<(&str, &Vec<T>)> = if include_aux {
            [
                ("eta", self.eta.as_ref()),
                ("h", self.h.as_ref()),
                ("c", self.c.as_ref()),
                ("x", self.x.as_ref()),
            ]
            .into_iter()
            .filter_map(|(name, v)| v.map(|v| (name, v)))
            .collect()
        } else {
            Vec::new()
        };
        for (name, _) in &aux {
            header.push(',');
            header.push_str(name);
        }
        writeln!(w, "{header}").map_err(io_err)?;
        for t in 0..self.var.len() {
            write!(
                w,
                "{},{},{},{},{}",
                t + 1,
                returns.date_label(t),
                returns.values[t],
                self.var[t],
                self.es[t]
            )
            .map_err(io_err)?;
            for (_, v) in &aux {
                write!(w, ",{}", v[t]).map_err(io_err)?;
            }
            writeln!(w).map_err(io_err)?;
        }
        Ok(())
    }
}
