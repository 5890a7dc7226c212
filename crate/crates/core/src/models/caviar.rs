//! CAViaR VaR recursions (SAV, AS) and the two ES links (EXP, EXC) used by
//! the benchmark models.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::MAG_LIMIT;

/// SAV-EXP parameters: `b0,b1,b2` drive the VaR recursion, `g0` the
/// multiplicative ES link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SavExpParams<T> {
    pub b0: T,
    pub b1: T,
    pub b2: T,
    pub g0: T,
}

/// AS-EXC parameters: `b0..b3` drive the asymmetric-slope VaR recursion,
/// `g0,g1,g2` the mean-exceedance ES recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsExcParams<T> {
    pub b0: T,
    pub b1: T,
    pub b2: T,
    pub b3: T,
    pub g0: T,
    pub g1: T,
    pub g2: T,
}

impl<T: Scalar> SavExpParams<T> {
    pub fn from_slice(w: &[T]) -> Self {
        assert_eq!(w.len(), 4);
        Self {
            b0: w[0],
            b1: w[1],
            b2: w[2],
            g0: w[3],
        }
    }

    pub fn to_vec(&self) -> Vec<T> {
        vec![self.b0, self.b1, self.b2, self.g0]
    }

    pub fn names() -> [&'static str; 4] {
        ["b0", "b1", "b2", "g0"]
    }
}

impl<T: Scalar> AsExcParams<T> {
    pub fn from_slice(w: &[T]) -> Self {
        assert_eq!(w.len(), 7);
        Self {
            b0: w[0],
            b1: w[1],
            b2: w[2],
            b3: w[3],
            g0: w[4],
            g1: w[5],
            g2: w[6],
        }
    }

    pub fn to_vec(&self) -> Vec<T> {
        vec![self.b0, self.b1, self.b2, self.b3, self.g0, self.g1, self.g2]
    }

    pub fn names() -> [&'static str; 7] {
        ["b0", "b1", "b2", "b3", "g0", "g1", "g2"]
    }
}

fn check_finite<T: Scalar>(vals: &[T], what: &str) -> Result<()> {
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(format!("non-finite {what}")));
    }
    Ok(())
}

#[inline]
fn guard<T: Scalar>(v: T, t: usize) -> Result<T> {
    if !v.is_finite() || v.abs() > T::cast(MAG_LIMIT) {
        Err(Error::PathDiverged { t })
    } else {
        Ok(v)
    }
}

/// Symmetric Absolute Value recursion:
/// `VaR_t = b0 + b1 VaR_{t−1} + b2 |r_{t−1}|`, seeded with `var1`.
pub fn filter_sav<T: Scalar>(p: &SavExpParams<T>, r: &[T], var1: T) -> Result<Vec<T>> {
    check_finite(&p.to_vec(), "SAV parameters")?;
    check_finite(r, "returns")?;
    if !(var1 < T::zero()) {
        return Err(Error::domain(format!("initial VaR must be negative, got {var1}")));
    }
    if r.is_empty() {
        return Err(Error::domain("empty return series"));
    }
    let mut var = Vec::with_capacity(r.len());
    var.push(var1);
    for t in 1..r.len() {
        // Summation order matches the LSTM-AL VaR update bit-for-bit, so the
        // α₁ = γ₁ = 0 reduction holds exactly.
        let v = p.b0 + p.b2 * r[t - 1].abs() + p.b1 * var[t - 1];
        var.push(guard(v, t)?);
    }
    Ok(var)
}

/// Asymmetric Slope recursion:
/// `VaR_t = b0 + b1 VaR_{t−1} + b2 (r_{t−1})⁺ + b3 (r_{t−1})⁻`,
/// with `(x)⁺ = max(x,0)` and `(x)⁻ = −min(x,0)`.
pub fn filter_as<T: Scalar>(p: &AsExcParams<T>, r: &[T], var1: T) -> Result<Vec<T>> {
    check_finite(&p.to_vec(), "AS parameters")?;
    check_finite(r, "returns")?;
    if !(var1 < T::zero()) {
        return Err(Error::domain(format!("initial VaR must be negative, got {var1}")));
    }
    if r.is_empty() {
        return Err(Error::domain("empty return series"));
    }
    let zero = T::zero();
    let mut var = Vec::with_capacity(r.len());
    var.push(var1);
    for t in 1..r.len() {
        let prev = r[t - 1];
        let pos = prev.max(zero);
        let neg = -prev.min(zero);
        let v = p.b0 + p.b1 * var[t - 1] + p.b2 * pos + p.b3 * neg;
        var.push(guard(v, t)?);
    }
    Ok(var)
}

/// Exponential ES link: `ES_t = (1 + exp(g0)) VaR_t`. The factor exceeds 1
/// for every finite `g0`, so ES sits strictly below a negative VaR.
pub fn es_exp<T: Scalar>(var: &[T], g0: T) -> Result<Vec<T>> {
    if !g0.is_finite() {
        return Err(Error::domain("non-finite g0"));
    }
    if let Some(t) = var.iter().position(|v| !(*v < T::zero())) {
        return Err(Error::domain(format!(
            "EXP link requires VaR < 0 everywhere, violated at index {t}"
        )));
    }
    let factor = T::one() + g0.exp();
    Ok(var.iter().map(|v| factor * *v).collect())
}

/// Mean-exceedance ES link, Taylor's EXC:
///
/// ```text
/// x_t  = g0 + g1 (VaR_{t−1} − r_{t−1}) + g2 x_{t−1}   if r_{t−1} ≤ VaR_{t−1}
///      = x_{t−1}                                      otherwise
/// ES_t = VaR_t − x_t
/// ```
///
/// With nonnegative `g` and `x1` the gap stays nonnegative, hence
/// `ES_t ≤ VaR_t`. Returns the ES series and the gap series.
pub fn es_exc<T: Scalar>(
    var: &[T],
    r: &[T],
    g0: T,
    g1: T,
    g2: T,
    x1: T,
) -> Result<(Vec<T>, Vec<T>)> {
    check_finite(&[g0, g1, g2, x1], "EXC parameters")?;
    if g0 < T::zero() || g1 < T::zero() || g2 < T::zero() {
        return Err(Error::domain("EXC coefficients must be nonnegative"));
    }
    if x1 < T::zero() {
        return Err(Error::domain("initial exceedance gap must be nonnegative"));
    }
    if var.len() != r.len() {
        return Err(Error::LengthMismatch {
            left: var.len(),
            right: r.len(),
        });
    }
    if var.is_empty() {
        return Err(Error::domain("empty series"));
    }
    let mut x = Vec::with_capacity(var.len());
    x.push(x1);
    for t in 1..var.len() {
        let xt = if r[t - 1] <= var[t - 1] {
            g0 + g1 * (var[t - 1] - r[t - 1]) + g2 * x[t - 1]
        } else {
            x[t - 1]
        };
        x.push(guard(xt, t)?);
    }
    let es = var.iter().zip(&x).map(|(v, g)| *v - *g).collect();
    Ok((es, x))
}
