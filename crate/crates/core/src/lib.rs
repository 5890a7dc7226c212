//! Joint Value-at-Risk / Expected Shortfall forecasting.
//!
//! The crate models the lower-tail pair `(VaR_t, ES_t)` of a return series
//! with CAViaR-style recursions — the LSTM-AL model (an LSTM-driven drift
//! and ES multiplier inside a symmetric-absolute-value VaR update) plus the
//! SAV-EXP and AS-EXC benchmarks — estimated by Bayesian adaptive
//! random-walk MCMC under the asymmetric-Laplace quasi-likelihood.
//!
//! The numeric core is generic over the floating scalar via [`Scalar`]
//! (f32 or f64); the aliases below pin the common f64 instantiations.
//!
//! Module map:
//! - [`data`]: CSV ingestion, percentage log returns, sample splits
//! - [`lstm`]: the scalar recurrent cell
//! - [`models`]: filter recursions, admissibility, the AL likelihood
//! - [`scoring`]: quantile loss, AL score, violation rates
//! - [`mcmc`]: the adaptive sampler, priors, posterior summaries
//! - [`sim`]: the nonlinear stochastic-volatility generator
//! - [`backtest`]: rolling one-step-ahead forecasting and comparison

pub mod backtest;
pub mod data;
pub mod error;
pub mod lstm;
pub mod mcmc;
pub mod models;
pub mod scalar;
pub mod scoring;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type PriceSeries64 = data::PriceSeries<f64>;
pub type ReturnSeries64 = data::ReturnSeries<f64>;
pub type LstmParams64 = lstm::LstmParams<f64>;
pub type LstmState64 = lstm::LstmState<f64>;
pub type ModelParams64 = models::ModelParams<f64>;
pub type RiskPath64 = models::RiskPath<f64>;
pub type InitState64 = models::InitState<f64>;
pub type ScoreReport64 = scoring::ScoreReport<f64>;
pub type Chain64 = mcmc::Chain<f64>;
pub type PriorSpec64 = mcmc::PriorSpec<f64>;
pub type SimOutput64 = sim::SimOutput<f64>;
pub type ForecastRecord64 = backtest::ForecastRecord<f64>;
