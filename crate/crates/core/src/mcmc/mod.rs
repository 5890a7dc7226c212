//! Two-phase adaptive random-walk Metropolis sampler.
//!
//! Proposals are spherical for the first `2d` iterations
//! (`N(θ, σ_ini I)`, `σ_ini = 0.1²/d`), then switch to the mixture
//! `(1−β) N(θ, σ_opt c_n) + β N(θ, σ_ini I)` with `σ_opt = 2.38²/d` and
//! `c_n` the running covariance of every realized chain state, which is
//! refreshed each iteration. A proposal is accepted when
//! `u ≤ min{1, exp(Δ log target)}` — the standard Metropolis rule.
//!
//! Determinism contract: the chain is a pure function of `(seed, target)`.
//! The generator is ChaCha12 seeded from a u64; normal variates use the
//! rand_distr ziggurat. Per iteration the draw order is fixed: mixture
//! selector (phase 2 only), `d` proposal normals, acceptance uniform.

mod fit;
pub mod prior;
mod proposal;
mod summary;

pub use fit::{fit_model, FitOptions, ModelFit};
pub use prior::{prior_for, PriorDist, PriorSpec, FLAT_BOUND};
pub use proposal::{cholesky, ProposalState};
pub use summary::{point_estimate, posterior_summary, ParamSummary, PosteriorSummary};

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Jitter added to the scaled covariance before factorization so early
/// phase-2 proposals stay proper even when the chain has barely moved.
const COV_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub iters: usize,
    pub burnin: usize,
    pub seed: u64,
    /// Weight of the spherical component in the phase-2 mixture.
    pub beta_mix: f64,
    /// Keep every `thin`-th state (iteration 0 is always kept).
    pub thin: usize,
    /// Update the running moments only on accepted moves instead of every
    /// iteration. Off by default; exists for fidelity experiments.
    pub adapt_on_accept_only: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iters: 50_000,
            burnin: 15_000,
            seed: 1,
            beta_mix: 0.05,
            thin: 1,
            adapt_on_accept_only: false,
        }
    }
}

impl McmcConfig {
    fn validate(&self) -> Result<()> {
        if self.iters == 0 || self.burnin >= self.iters {
            return Err(Error::domain(format!(
                "burn-in {} must be smaller than the iteration count {}",
                self.burnin, self.iters
            )));
        }
        if !(0.0..=1.0).contains(&self.beta_mix) {
            return Err(Error::domain("beta_mix must lie in [0, 1]"));
        }
        if self.thin == 0 {
            return Err(Error::domain("thin must be positive"));
        }
        Ok(())
    }
}

/// Stored sampler output: states at iterations `0, thin, 2·thin, …` with
/// their log-target values, plus the acceptance count over all iterations.
#[derive(Debug, Clone)]
pub struct Chain<T> {
    pub config: McmcConfig,
    pub dim: usize,
    pub param_names: Vec<String>,
    /// Iteration index of each stored row.
    pub iters_stored: Vec<usize>,
    pub draws: Vec<Vec<T>>,
    pub log_posts: Vec<T>,
    pub accept_count: usize,
}

impl<T: Scalar> Chain<T> {
    pub fn acceptance_rate(&self) -> f64 {
        self.accept_count as f64 / self.config.iters as f64
    }

    /// Stored states past the burn-in cut (iteration strictly greater than
    /// `burnin`).
    pub fn posterior_draws(&self, burnin: usize) -> Vec<&[T]> {
        self.iters_stored
            .iter()
            .zip(&self.draws)
            .filter(|(it, _)| **it > burnin)
            .map(|(_, d)| d.as_slice())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let io_err = |source| Error::Io {
            path: std::path::PathBuf::from("<chain csv>"),
            source,
        };
        write!(w, "iter,logpost").map_err(io_err)?;
        for name in &self.param_names {
            write!(w, ",{name}").map_err(io_err)?;
        }
        writeln!(w).map_err(io_err)?;
        for (row, (it, lp)) in self.iters_stored.iter().zip(&self.log_posts).enumerate() {
            write!(w, "{it},{lp}").map_err(io_err)?;
            for v in &self.draws[row] {
                write!(w, ",{v}").map_err(io_err)?;
            }
            writeln!(w).map_err(io_err)?;
        }
        Ok(())
    }

    /// Persists `<path>` (CSV) and `<path>.json` (sidecar with the config,
    /// seed, and acceptance rate). Floats are written in shortest
    /// round-trip form, so a reload reproduces the chain bit-exactly.
    pub fn save(&self, path: impl AsRef<Path>, model: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        fs::write(path, &buf).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let meta = ChainMeta {
            model: model.map(str::to_string),
            dim: self.dim,
            param_names: self.param_names.clone(),
            config: self.config.clone(),
            accept_count: self.accept_count,
            acceptance_rate: self.acceptance_rate(),
        };
        let sidecar = sidecar_path(path);
        let json = serde_json::to_string_pretty(&meta)
            .map_err(|e| Error::Mcmc(format!("sidecar serialization failed: {e}")))?;
        fs::write(&sidecar, json + "\n").map_err(|source| Error::Io {
            path: sidecar,
            source,
        })?;
        Ok(())
    }

    /// Reloads a chain persisted by [`Chain::save`].
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let sidecar = sidecar_path(path);
        let meta: ChainMeta = {
            let raw = fs::read_to_string(&sidecar).map_err(|source| Error::Io {
                path: sidecar.clone(),
                source,
            })?;
            serde_json::from_str(&raw)
                .map_err(|e| Error::Mcmc(format!("{}: bad sidecar: {e}", sidecar.display())))?
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::csv(Some(path), 1, "empty chain file"))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 3 || cols[0] != "iter" || cols[1] != "logpost" {
            return Err(Error::csv(Some(path), 1, "expected header `iter,logpost,p1..`"));
        }
        let param_names: Vec<String> = cols[2..].iter().map(|s| s.to_string()).collect();
        let dim = param_names.len();
        let mut iters_stored = Vec::new();
        let mut draws = Vec::new();
        let mut log_posts = Vec::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let it: usize = fields
                .next()
                .unwrap_or("")
                .parse()
                .map_err(|_| Error::csv(Some(path), idx + 1, "bad iteration index"))?;
            let lp: T = fields
                .next()
                .unwrap_or("")
                .parse()
                .map_err(|_| Error::csv(Some(path), idx + 1, "bad log-posterior"))?;
            let row: std::result::Result<Vec<T>, _> = fields.map(|f| f.parse::<T>()).collect();
            let row = row.map_err(|_| Error::csv(Some(path), idx + 1, "bad parameter value"))?;
            if row.len() != dim {
                return Err(Error::csv(Some(path), idx + 1, "wrong column count"));
            }
            iters_stored.push(it);
            log_posts.push(lp);
            draws.push(row);
        }
        if draws.is_empty() {
            return Err(Error::csv(Some(path), 1, "chain has no rows"));
        }
        Ok(Chain {
            config: meta.config,
            dim,
            param_names,
            iters_stored,
            draws,
            log_posts,
            accept_count: meta.accept_count,
        })
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".json");
    std::path::PathBuf::from(os)
}

#[derive(Debug, Serialize, Deserialize)]
struct ChainMeta {
    model: Option<String>,
    dim: usize,
    param_names: Vec<String>,
    config: McmcConfig,
    accept_count: usize,
    acceptance_rate: f64,
}

/// Runs the sampler from `theta0` against `log_target` (log posterior up to
/// a constant; `−∞` marks zero-probability points).
pub fn adaptive_mh<T, F>(mut log_target: F, theta0: &[T], cfg: &McmcConfig) -> Result<Chain<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    cfg.validate()?;
    let d = theta0.len();
    if d == 0 {
        return Err(Error::domain("parameter dimension must be at least 1"));
    }
    let mut lp = log_target(theta0);
    if !lp.is_finite() {
        return Err(Error::Mcmc(format!(
            "log target at the starting point is {lp}; the chain cannot start"
        )));
    }

    let sigma_ini = T::cast(0.1 * 0.1 / d as f64);
    let sigma_opt = T::cast(2.38 * 2.38 / d as f64);
    let jitter = T::cast(COV_JITTER);
    let beta_mix = T::cast(cfg.beta_mix);

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut theta = theta0.to_vec();
    let mut moments = ProposalState::<T>::new(d);
    moments.update(&theta);

    let stored = cfg.iters / cfg.thin + 1;
    let mut chain = Chain {
        config: cfg.clone(),
        dim: d,
        param_names: (1..=d).map(|i| format!("p{i}")).collect(),
        iters_stored: Vec::with_capacity(stored),
        draws: Vec::with_capacity(stored),
        log_posts: Vec::with_capacity(stored),
        accept_count: 0,
    };
    chain.iters_stored.push(0);
    chain.draws.push(theta.clone());
    chain.log_posts.push(lp);

    let mut proposal = vec![T::zero(); d];
    for it in 1..=cfg.iters {
        let spherical = if it <= 2 * d {
            true
        } else {
            T::unif01(&mut rng) < beta_mix
        };
        if spherical {
            let step = sigma_ini.sqrt();
            for (p, t) in proposal.iter_mut().zip(&theta) {
                *p = *t + step * T::std_normal(&mut rng);
            }
        } else {
            let mut m = moments.cov();
            for v in m.iter_mut() {
                *v *= sigma_opt;
                if !v.is_finite() {
                    return Err(Error::Mcmc(format!(
                        "proposal covariance became non-finite at iteration {it}"
                    )));
                }
            }
            for i in 0..d {
                m[i * d + i] += jitter;
            }
            match cholesky(&m, d) {
                Some(l) => {
                    let z: Vec<T> = (0..d).map(|_| T::std_normal(&mut rng)).collect();
                    for i in 0..d {
                        let mut s = theta[i];
                        for k in 0..=i {
                            s += l[i * d + k] * z[k];
                        }
                        proposal[i] = s;
                    }
                }
                None => {
                    // Degenerate covariance; fall back to the spherical leg.
                    let step = sigma_ini.sqrt();
                    for (p, t) in proposal.iter_mut().zip(&theta) {
                        *p = *t + step * T::std_normal(&mut rng);
                    }
                }
            }
        }

        let lp_prop = log_target(&proposal);
        let u = T::unif01(&mut rng);
        let accepted = lp_prop > T::neg_infinity() && u.ln() <= lp_prop - lp;
        if accepted {
            std::mem::swap(&mut theta, &mut proposal);
            lp = lp_prop;
            chain.accept_count += 1;
        }
        if accepted || !cfg.adapt_on_accept_only {
            moments.update(&theta);
        }
        if it % cfg.thin == 0 {
            chain.iters_stored.push(it);
            chain.draws.push(theta.clone());
            chain.log_posts.push(lp);
        }
    }
    Ok(chain)
}
