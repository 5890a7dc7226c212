//! Scalar LSTM cell used as the recurrent drift engine.
//!
//! One cell, scalar input and output. All four pre-activations are affine in
//! the input `x` and the previous data output `h`:
//!
//! ```text
//! g^f = σ(μ_f x + ω_f h + b_f)        forget gate
//! g^i = σ(μ_i x + ω_i h + b_i)        input gate
//! x^d = σ(μ_d x + ω_d h + b_d)        data input
//! g^o = σ(μ_o x + ω_o h + b_o)        output gate
//! C'  = g^f C + g^i x^d               cell state
//! h'  = g^o tanh(C')                  data output
//! ```
//!
//! Note the data input uses the logistic function, not the tanh of textbook
//! LSTM cells. That is deliberate and load-bearing: with `x^d ∈ (0,1)` the
//! cell state stays strictly positive once it leaves zero.

use crate::scalar::Scalar;

/// The 12 cell weights, serialized in this field order when the cell is
/// embedded in a flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LstmParams<T> {
    pub mu_f: T,
    pub omega_f: T,
    pub b_f: T,
    pub mu_i: T,
    pub omega_i: T,
    pub b_i: T,
    pub mu_d: T,
    pub omega_d: T,
    pub b_d: T,
    pub mu_o: T,
    pub omega_o: T,
    pub b_o: T,
}

/// Recurrent state: data output `h` and cell state `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LstmState<T> {
    pub h: T,
    pub c: T,
}

/// Number of cell weights.
pub const LSTM_DIM: usize = 12;

impl<T: Scalar> LstmParams<T> {
    pub fn zeros() -> Self {
        Self::from_slice(&[T::zero(); LSTM_DIM])
    }

    /// Reads 12 weights in the fixed serialization order.
    pub fn from_slice(w: &[T]) -> Self {
        assert_eq!(w.len(), LSTM_DIM, "LSTM cell takes exactly 12 weights");
        Self {
            mu_f: w[0],
            omega_f: w[1],
            b_f: w[2],
            mu_i: w[3],
            omega_i: w[4],
            b_i: w[5],
            mu_d: w[6],
            omega_d: w[7],
            b_d: w[8],
            mu_o: w[9],
            omega_o: w[10],
            b_o: w[11],
        }
    }

    pub fn to_vec(&self) -> Vec<T> {
        vec![
            self.mu_f,
            self.omega_f,
            self.b_f,
            self.mu_i,
            self.omega_i,
            self.b_i,
            self.mu_d,
            self.omega_d,
            self.b_d,
            self.mu_o,
            self.omega_o,
            self.b_o,
        ]
    }

    /// Weight names in serialization order.
    pub fn names() -> [&'static str; LSTM_DIM] {
        [
            "mu_f", "omega_f", "b_f", "mu_i", "omega_i", "b_i", "mu_d", "omega_d", "b_d", "mu_o",
            "omega_o", "b_o",
        ]
    }
}

impl<T: Scalar> LstmState<T> {
    /// The conventional start state `(h, c) = (0, 0)`.
    pub fn zero() -> Self {
        Self {
            h: T::zero(),
            c: T::zero(),
        }
    }
}

impl<T: Scalar> Default for LstmState<T> {
    fn default() -> Self {
        Self::zero()
    }
}

#[inline]
pub(crate) fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

/// One cell update. Total on finite inputs; the output `h'` always lies in
/// `(−1, 1)` and every gate in `(0, 1)`.
#[inline]
pub fn lstm_step<T: Scalar>(p: &LstmParams<T>, x: T, s: LstmState<T>) -> LstmState<T> {
    let g_f = sigmoid(p.mu_f * x + p.omega_f * s.h + p.b_f);
    let g_i = sigmoid(p.mu_i * x + p.omega_i * s.h + p.b_i);
    let x_d = sigmoid(p.mu_d * x + p.omega_d * s.h + p.b_d);
    let g_o = sigmoid(p.mu_o * x + p.omega_o * s.h + p.b_o);
    let c = g_f * s.c + g_i * x_d;
    let h = g_o * c.tanh();
    LstmState { h, c }
}
