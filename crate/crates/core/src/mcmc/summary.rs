//! Posterior summaries: per-parameter sample moments of the post-burn-in
//! chain segment.

use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::prior::PriorSpec;
use super::Chain;

/// Moments of one parameter. `std` uses the sample convention (ddof = 1);
/// `skew` and `kurt` are the standardized third and fourth central moments,
/// kurtosis reported as excess. A numerically constant chain sets
/// `degenerate` and zeroes both shape statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSummary<T> {
    pub name: String,
    pub mean: T,
    pub std: T,
    pub min: T,
    pub max: T,
    pub skew: T,
    pub kurt: T,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary<T> {
    pub params: Vec<ParamSummary<T>>,
    pub draws_used: usize,
}

/// Summarizes the stored states with iteration index strictly past
/// `burnin`. Needs at least two such states.
pub fn posterior_summary<T: Scalar>(chain: &Chain<T>, burnin: usize) -> Result<PosteriorSummary<T>> {
    let post = chain.posterior_draws(burnin);
    if post.len() < 2 {
        return Err(Error::domain(format!(
            "need at least 2 post-burn-in draws, have {}",
            post.len()
        )));
    }
    let n = T::cast(post.len() as f64);
    let mut params = Vec::with_capacity(chain.dim);
    for j in 0..chain.dim {
        let mut mean = T::zero();
        let mut min = T::infinity();
        let mut max = T::neg_infinity();
        for d in &post {
            mean += d[j];
            min = min.min(d[j]);
            max = max.max(d[j]);
        }
        mean /= n;
        let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
        for d in &post {
            let c = d[j] - mean;
            let c2 = c * c;
            m2 += c2;
            m3 += c2 * c;
            m4 += c2 * c2;
        }
        m2 /= n;
        m3 /= n;
        m4 /= n;
        let std = (m2 * n / (n - T::one())).sqrt();
        // Rounding alone produces m2 ≈ (ε·mean)²; anything at that scale is
        // a constant chain for reporting purposes.
        let floor = T::cast(16.0) * T::epsilon() * T::epsilon() * (T::one() + mean * mean);
        let degenerate = m2 <= floor;
        let (skew, kurt) = if degenerate {
            (T::zero(), T::zero())
        } else {
            (
                m3 / m2.powf(T::cast(1.5)),
                m4 / (m2 * m2) - T::cast(3.0),
            )
        };
        params.push(ParamSummary {
            name: chain.param_names[j].clone(),
            mean,
            std: if degenerate { T::zero() } else { std },
            min,
            max,
            skew,
            kurt,
            degenerate,
        });
    }
    Ok(PosteriorSummary {
        params,
        draws_used: post.len(),
    })
}

/// Posterior mean of the post-burn-in draws, projected back onto the prior
/// support when one is supplied.
pub fn point_estimate<T: Scalar>(
    chain: &Chain<T>,
    burnin: usize,
    prior: Option<&PriorSpec<T>>,
) -> Result<Vec<T>> {
    let post = chain.posterior_draws(burnin);
    if post.is_empty() {
        return Err(Error::domain("no post-burn-in draws to average"));
    }
    let n = T::cast(post.len() as f64);
    let mut mean = vec![T::zero(); chain.dim];
    for d in &post {
        for (m, v) in mean.iter_mut().zip(*d) {
            *m += *v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    Ok(match prior {
        Some(p) => p.project(&mean),
        None => mean,
    })
}

impl<T: Scalar> PosteriorSummary<T> {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let io_err = |source| Error::Io {
            path: std::path::PathBuf::from("<summary csv>"),
            source,
        };
        writeln!(w, "parameter,mean,std,min,max,skew,kurt").map_err(io_err)?;
        for p in &self.params {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                p.name, p.mean, p.std, p.min, p.max, p.skew, p.kurt
            )
            .map_err(io_err)?;
        }
        Ok(())
    }
}

impl<T: Scalar> std::fmt::Display for PosteriorSummary<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{:<10} {:>10} {:>10} {:>10} {:>10} {:>8} {:>8}",
            "parameter", "mean", "std", "min", "max", "skew", "kurt"
        )?;
        for p in &self.params {
            writeln!(
                f,
                "{:<10} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>8.4} {:>8.4}{}",
                p.name,
                p.mean.as_f64(),
                p.std.as_f64(),
                p.min.as_f64(),
                p.max.as_f64(),
                p.skew.as_f64(),
                p.kurt.as_f64(),
                if p.degenerate { "  (degenerate)" } else { "" }
            )?;
        }
        write!(f, "post-burn-in draws: {}", self.draws_used)
    }
}
