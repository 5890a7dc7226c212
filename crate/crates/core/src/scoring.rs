//! Forecast evaluation: quantile loss, the joint AL score, and violation
//! rates.
//!
//! The quantile loss uses the strict indicator `1{r < var}` and the AL score
//! the weak one `1{r ≤ var}`, each following its defining equation. Ties
//! (`r` exactly equal to `var`) are measure-zero in practice.

use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `(r − var)(α − 1{r < var})`; nonnegative, zero exactly at `r = var`.
#[inline]
pub fn quantile_loss<T: Scalar>(r: T, var: T, alpha: T) -> T {
    let hit = if r < var { T::one() } else { T::zero() };
    (r - var) * (alpha - hit)
}

/// Joint VaR/ES score: the negative AL log density,
/// `−ln((α−1)/es) − (r − var)(α − 1{r ≤ var}) / (α es)`.
pub fn al_score<T: Scalar>(r: T, var: T, es: T, alpha: T) -> Result<T> {
    if !(es < T::zero()) {
        return Err(Error::domain(format!("AL score requires es < 0, got {es}")));
    }
    if !(alpha > T::zero() && alpha < T::cast(0.5)) {
        return Err(Error::domain(format!("alpha must lie in (0, 0.5), got {alpha}")));
    }
    let hit = if r <= var { T::one() } else { T::zero() };
    Ok(-((alpha - T::one()) / es).ln() - (r - var) * (alpha - hit) / (alpha * es))
}

/// One evaluated out-of-sample observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastTriple<T> {
    pub r: T,
    pub var: T,
    pub es: T,
}

/// Average losses and the hit rate over a forecast sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreReport<T> {
    pub avg_quantile_loss: T,
    pub avg_al_score: T,
    /// Fraction of observations with `r ≤ var`.
    pub violation_rate: T,
    pub n: usize,
}

/// Arithmetic means of the per-observation losses plus the violation rate.
pub fn evaluate<T: Scalar>(records: &[ForecastTriple<T>], alpha: T) -> Result<ScoreReport<T>> {
    if records.is_empty() {
        return Err(Error::domain("cannot evaluate an empty forecast sample"));
    }
    let mut ql = T::zero();
    let mut al = T::zero();
    let mut hits = 0usize;
    for rec in records {
        ql += quantile_loss(rec.r, rec.var, alpha);
        al += al_score(rec.r, rec.var, rec.es, alpha)?;
        if rec.r <= rec.var {
            hits += 1;
        }
    }
    let n = T::cast(records.len() as f64);
    Ok(ScoreReport {
        avg_quantile_loss: ql / n,
        avg_al_score: al / n,
        violation_rate: T::cast(hits as f64) / n,
        n: records.len(),
    })
}

impl<T: Scalar> ScoreReport<T> {
    /// Single-row CSV with a header.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let io_err = |source| Error::Io {
            path: std::path::PathBuf::from("<score csv>"),
            source,
        };
        writeln!(w, "n,violation_rate,avg_quantile_loss,avg_al_score").map_err(io_err)?;
        writeln!(
            w,
            "{},{},{},{}",
            self.n, self.violation_rate, self.avg_quantile_loss, self.avg_al_score
        )
        .map_err(io_err)?;
        Ok(())
    }
}

impl<T: Scalar> std::fmt::Display for ScoreReport<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "observations    {:>12}", self.n)?;
        writeln!(f, "violation rate  {:>12.6}", self.violation_rate.as_f64())?;
        writeln!(f, "quantile loss   {:>12.6}", self.avg_quantile_loss.as_f64())?;
        write!(f, "AL score        {:>12.6}", self.avg_al_score.as_f64())
    }
}
