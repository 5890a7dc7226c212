//! The LSTM-AL filter: a SAV-style VaR recursion whose drift and ES
//! multiplier are driven by a scalar LSTM cell fed with the lagged drift.

use crate::error::{Error, Result};
use crate::lstm::{lstm_step, LstmParams, LstmState, LSTM_DIM};
use crate::scalar::Scalar;

use super::{InitState, RiskPath, MAG_LIMIT};

/// LSTM-AL parameters, dimension 18.
///
/// `beta_abs` multiplies `|r_{t−1}|` and `beta_lag` multiplies `VaR_{t−1}`
/// in the VaR update; `gamma0, gamma1` shape the ES multiplier
/// `1 + exp(gamma0 + gamma1 h_t)`; `alpha0, alpha1` map the cell output to
/// the drift `η_t = alpha0 + alpha1 h_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LstmAlParams<T> {
    pub beta_abs: T,
    pub beta_lag: T,
    pub gamma0: T,
    pub gamma1: T,
    pub alpha0: T,
    pub alpha1: T,
    pub lstm: LstmParams<T>,
}

/// Flat dimension of [`LstmAlParams`].
pub const LSTM_AL_DIM: usize = 6 + LSTM_DIM;

impl<T: Scalar> LstmAlParams<T> {
    /// Reads the fixed flat order:
    /// `beta_abs, beta_lag, gamma0, gamma1, alpha0, alpha1`, then the 12 cell
    /// weights in their own serialization order.
    pub fn from_slice(w: &[T]) -> Self {
        assert_eq!(w.len(), LSTM_AL_DIM);
        Self {
            beta_abs: w[0],
            beta_lag: w[1],
            gamma0: w[2],
            gamma1: w[3],
            alpha0: w[4],
            alpha1: w[5],
            lstm: LstmParams::from_slice(&w[6..]),
        }
    }

    pub fn to_vec(&self) -> Vec<T> {
        let mut v = vec![
            self.beta_abs,
            self.beta_lag,
            self.gamma0,
            self.gamma1,
            self.alpha0,
            self.alpha1,
        ];
        v.extend(self.lstm.to_vec());
        v
    }

    pub fn names() -> Vec<&'static str> {
        let mut n = vec!["beta_abs", "beta_lag", "gamma0", "gamma1", "alpha0", "alpha1"];
        n.extend(LstmParams::<T>::names());
        n
    }
}

/// Runs the LSTM-AL recursion over `r` and returns the full risk path.
///
/// Step order for `t ≥ 2` (1-based time, matching the recursion):
///
/// ```text
/// h_t   = LSTM(η_{t−1}, state_{t−1})
/// η_t   = α0 + α1 h_t
/// VaR_t = η_t + β_abs |r_{t−1}| + β_lag VaR_{t−1}
/// ES_t  = (1 + exp(γ0 + γ1 h_t)) VaR_t
/// ```
///
/// `t = 1` takes `(VaR_1, ES_1)` from `init`; the first cell update consumes
/// `init.eta0` and `init.lstm0`. Any `ES_t ≥ 0` flags the path inadmissible
/// rather than erroring, as does `|VaR_t|` or `|C_t|` beyond 1e8; both stop
/// the recursion at the failing step so explosive proposals cannot produce
/// NaNs downstream.
pub fn filter_lstm_al<T: Scalar>(
    p: &LstmAlParams<T>,
    r: &[T],
    init: &InitState<T>,
) -> Result<RiskPath<T>> {
    if p.to_vec().iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite LSTM-AL parameters"));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite returns"));
    }
    init.validate()?;
    if r.is_empty() {
        return Err(Error::domain("empty return series"));
    }

    let n = r.len();
    let limit = T::cast(MAG_LIMIT);
    let mut var = Vec::with_capacity(n);
    let mut es = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);

    var.push(init.var1);
    es.push(init.es1);
    eta.push(init.eta0);
    h.push(init.lstm0.h);
    c.push(init.lstm0.c);

    let mut admissible = true;
    let mut fail_t = None;

    let mut state = init.lstm0;
    let mut eta_prev = init.eta0;
    for t in 1..n {
        state = lstm_step(&p.lstm, eta_prev, state);
        let eta_t = p.alpha0 + p.alpha1 * state.h;
        let var_t = eta_t + p.beta_abs * r[t - 1].abs() + p.beta_lag * var[t - 1];
        if !var_t.is_finite() || var_t.abs() > limit || !state.c.is_finite() || state.c.abs() > limit
        {
            admissible = false;
            fail_t = Some(t);
            break;
        }
        let es_t = (T::one() + (p.gamma0 + p.gamma1 * state.h).exp()) * var_t;
        var.push(var_t);
        eta.push(eta_t);
        h.push(state.h);
        c.push(state.c);
        es.push(es_t);
        if !es_t.is_finite() || !(es_t < T::zero()) {
            admissible = false;
            fail_t = Some(t);
            break;
        }
        eta_prev = eta_t;
    }
    if admissible && !(init.es1 < T::zero()) {
        admissible = false;
        fail_t = Some(0);
    }

    Ok(RiskPath {
        var,
        es,
        eta: Some(eta),
        h: Some(h),
        c: Some(c),
        x: None,
        admissible,
        fail_t,
    })
}

/// One-step-ahead continuation of an admissible LSTM-AL path: the forecast
/// for time `T+1` given the path state at `T` and the return `r_T`.
pub fn forecast_next_lstm_al<T: Scalar>(
    p: &LstmAlParams<T>,
    path: &RiskPath<T>,
    r_last: T,
) -> Result<(T, T)> {
    if !path.admissible || path.var.is_empty() {
        return Err(Error::domain("cannot forecast from an inadmissible path"));
    }
    let (eta, h, c) = match (&path.eta, &path.h, &path.c) {
        (Some(e), Some(h), Some(c)) => (e, h, c),
        _ => return Err(Error::domain("path carries no LSTM state")),
    };
    let last = path.var.len() - 1;
    let state = lstm_step(
        &p.lstm,
        eta[last],
        LstmState {
            h: h[last],
            c: c[last],
        },
    );
    let eta_next = p.alpha0 + p.alpha1 * state.h;
    let var_next = eta_next + p.beta_abs * r_last.abs() + p.beta_lag * path.var[last];
    let es_next = (T::one() + (p.gamma0 + p.gamma1 * state.h).exp()) * var_next;
    Ok((var_next, es_next))
}
