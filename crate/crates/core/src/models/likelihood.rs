//! Asymmetric-Laplace quasi-log-likelihood of a risk path.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::RiskPath;

/// Sum over observations of the AL log density
///
/// ```text
/// ln p(r_t | VaR_t, ES_t) = ln((α−1)/ES_t)
///                         + (r_t − VaR_t)(α − 1{r_t ≤ VaR_t}) / (α ES_t)
/// ```
///
/// Inadmissible paths (flagged, or any `ES_t ≥ 0`) yield `−∞` — the sampler
/// treats such proposals as zero-probability rather than failing.
pub fn al_log_likelihood<T: Scalar>(r: &[T], path: &RiskPath<T>, alpha: T) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::cast(0.5)) {
        return Err(Error::domain(format!("alpha must lie in (0, 0.5), got {alpha}")));
    }
    if !path.admissible {
        return Ok(T::neg_infinity());
    }
    if path.var.len() != r.len() || path.es.len() != r.len() {
        return Err(Error::LengthMismatch {
            left: r.len(),
            right: path.var.len(),
        });
    }
    let mut total = T::zero();
    for t in 0..r.len() {
        let es = path.es[t];
        if !(es < T::zero()) {
            return Ok(T::neg_infinity());
        }
        let var = path.var[t];
        let hit = if r[t] <= var { T::one() } else { T::zero() };
        total += ((alpha - T::one()) / es).ln() + (r[t] - var) * (alpha - hit) / (alpha * es);
    }
    Ok(total)
}
