//! Fixed-beta sampling of the objective and the estimates derived from an
//! exponential-decay model of its mean.

mod fit;

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

pub use fit::{fit_decay, fit_line, AcceptanceModel, DecayFit};

use crate::bec::frame_seed;
use crate::error::{Error, Result};
use crate::optimizer::{run, AnnealSchedule, Chain, OptProblem, RunOptions, SamplerConfig};

/// Series whose acceptance falls below this are treated as trapped.
pub const TRAPPED_ACCEPTANCE: f64 = 0.005;

/// Objective samples of one chain at fixed beta.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries {
    pub beta: f64,
    pub samples: Vec<f64>,
    pub acceptance: f64,
    pub trapped: bool,
}

/// Runs one chain per beta (in parallel, each with its own derived seed).
/// After a burn-in of one pass, the objective is recorded after every
/// transition until `budget` samples are collected.
pub fn collect_samples(
    problem: &OptProblem,
    x_init: &[u32],
    betas: &[f64],
    budget: usize,
    seed: u64,
    sampler: SamplerConfig,
) -> Result<Vec<SampleSeries>> {
    betas
        .par_iter()
        .enumerate()
        .map(|(k, &beta)| {
            let mut chain = Chain::new(problem, x_init.to_vec(), beta, frame_seed(seed, k, 0), sampler)?;
            chain.pass(|_, _| {}, |_| false)?;
            let mut samples = Vec::with_capacity(budget);
            let mut changed = 0usize;
            while samples.len() < budget {
                let stop_at = chain.transitions() + (budget - samples.len()) as u64;
                chain.pass(
                    |c, moved| {
                        samples.push(c.c_current());
                        changed += moved as usize;
                    },
                    |c| c.transitions() >= stop_at,
                )?;
            }
            let acceptance = changed as f64 / budget.max(1) as f64;
            Ok(SampleSeries {
                beta,
                samples,
                acceptance,
                trapped: acceptance < TRAPPED_ACCEPTANCE,
            })
        })
        .collect()
}

/// Acceptance targets of [`beta_ladder`], as fractions of the acceptance at beta = 0.
pub const DEFAULT_LADDER_FRACTIONS: [f64; 5] = [0.8, 0.5, 0.25, 0.1, 0.03];

/// Beta values at which the controlled chain settles for a ladder of
/// acceptance targets. The targets are `fractions` of the acceptance measured
/// at beta = 0 over `budget` transitions. Each target gets one constant-target
/// run of `budget` transitions from `x_init` at `beta_init`; the reported beta
/// is the geometric mean over the second half of the run. Targets whose run
/// ends pinned at a beta clamp are dropped, so the result may be shorter than
/// `fractions`.
pub fn beta_ladder(
    problem: &OptProblem,
    x_init: &[u32],
    fractions: &[f64],
    budget: u64,
    beta_init: f64,
    seed: u64,
    sampler: SamplerConfig,
) -> Result<Vec<f64>> {
    if fractions.is_empty() || fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
        return Err(Error::InvalidArgument("ladder fractions must lie in (0, 1)".into()));
    }
    let free = collect_samples(problem, x_init, &[0.0], budget.max(1) as usize, seed, sampler)?;
    let f0 = free[0].acceptance;
    if f0 <= 0.0 {
        return Err(Error::InvalidArgument("the chain never moves at beta = 0".into()));
    }
    let gains = sampler.pid;
    let betas: Vec<Option<f64>> = fractions
        .par_iter()
        .enumerate()
        .map(|(k, &frac)| {
            let mut o = RunOptions::new(
                AnnealSchedule::constant(frac * f0, budget)?,
                beta_init,
                frame_seed(seed, k, 1),
            );
            o.sampler = sampler;
            o.early_stop = false;
            let r = run(problem, x_init.to_vec(), &o)?;
            let tail = &r.log[r.log.len() / 2..];
            let beta = if tail.is_empty() {
                r.final_beta
            } else {
                (tail.iter().map(|l| l.beta.ln()).sum::<f64>() / tail.len() as f64).exp()
            };
            let pinned = beta <= gains.beta_min * 1.01 || beta >= gains.beta_max / 1.01;
            Ok((!pinned).then_some(beta))
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<f64> = betas.into_iter().flatten().collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// Sample mean, unbiased standard deviation and a histogram with bin width `1/alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFit {
    pub mean: f64,
    pub std: f64,
    pub degenerate: bool,
    /// `(bin center, count)`, bins of width `1/alpha` centered on multiples of it.
    pub histogram: Vec<(f64, usize)>,
}

pub fn fit_gaussian(samples: &[f64], alpha: f64) -> Result<GaussianFit> {
    if samples.len() < 30 {
        return Err(Error::InvalidArgument(format!(
            "{} samples; at least 30 are needed",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let mut bins = std::collections::BTreeMap::new();
    for &s in samples {
        *bins.entry((s * alpha).round() as i64).or_insert(0usize) += 1;
    }
    let std = var.sqrt();
    Ok(GaussianFit {
        mean,
        std,
        degenerate: std == 0.0,
        histogram: bins.into_iter().map(|(k, c)| (k as f64 / alpha, c)).collect(),
    })
}

/// Approximation of the Gaussian tail `Q(x)`, reflected for negative arguments.
pub fn q_approx(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - q_approx(-x);
    }
    // multiplied through by pi so that x = 0 gives pi / 2pi exactly
    let denom = (PI - 1.0) * x * (2.0 * PI).sqrt() + (2.0 * PI * (x * x + 2.0 * PI)).sqrt();
    (-x * x / 2.0).exp() * PI / denom
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon = {eps} must be positive")));
    }
    Ok(())
}

/// Gaussian probability that the objective lies within `eps` of `c`.
pub fn prob_within_gaussian(fit: &DecayFit, beta: f64, eps: f64) -> f64 {
    let x1 = -(fit.a / fit.b).sqrt() * (-fit.b * beta / 2.0).exp();
    let x2 = x1 + eps / fit.sigma(beta);
    q_approx(x1) - q_approx(x2)
}

/// First-order form of [`prob_within_gaussian`] for small `eps / sigma`.
pub fn prob_within_taylor(fit: &DecayFit, beta: f64, eps: f64) -> f64 {
    eps / (2.0 * PI * fit.a * fit.b).sqrt()
        * (fit.b * beta / 2.0 - fit.a / (2.0 * fit.b) * (-fit.b * beta).exp()).exp()
}

/// Probability of being within `eps` of the attainable minimum at `beta`, clamped
/// to `[0, 1]`. Falls back to the first-order form when the difference of tails
/// drops below `1e-12`.
pub fn prob_within(fit: &DecayFit, beta: f64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let mut p = prob_within_gaussian(fit, beta, eps);
    if p < 1e-12 {
        p = prob_within_taylor(fit, beta, eps);
    }
    if !(0.0..=1.0).contains(&p) {
        log::debug!("probability {p:.3e} clamped to [0, 1]");
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `1 / (f(beta) P(beta, eps))`, the order of the iterations needed to reach
/// the `eps`-neighborhood of the minimum.
pub fn iter_order(fit: &DecayFit, acceptance: &AcceptanceModel, beta: f64, eps: f64) -> Result<f64> {
    let f = acceptance.eval(beta)?;
    let p = prob_within(fit, beta, eps)?;
    Ok(1.0 / (f * p))
}

/// `log_z` of the recurrent-class size `sqrt(2 pi a b) exp(a / 2b) / eps`.
pub fn cardinality_log_z_eps(fit: &DecayFit, eps: f64, z: usize) -> f64 {
    let ln = 0.5 * (2.0 * PI * fit.a * fit.b).ln() + fit.a / (2.0 * fit.b) - eps.ln();
    (ln / (z as f64).ln()).max(0.0)
}

/// [`cardinality_log_z_eps`] with `eps = 1 / alpha`.
pub fn cardinality_estimate(fit: &DecayFit, alpha: f64, z: usize) -> f64 {
    cardinality_log_z_eps(fit, 1.0 / alpha, z)
}

/// Estimated attainable minimum object count, `c alpha`.
pub fn min_estimate(fit: &DecayFit, alpha: f64) -> f64 {
    fit.c * alpha
}

/// Per-beta summary of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesStats {
    pub beta: f64,
    pub mean: f64,
    pub std: f64,
    pub acceptance: f64,
    pub trapped: bool,
}

/// Fits and estimates of one estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub stats: Vec<SeriesStats>,
    pub fit: DecayFit,
    pub acceptance: Option<AcceptanceModel>,
    pub alpha: f64,
    pub eps: f64,
    pub z: usize,
    pub min_estimate: f64,
    pub cardinality_log_z: f64,
    /// `(beta, prob_within, iter_order)` at every sampled beta.
    pub per_beta: Vec<(f64, f64, Option<f64>)>,
}

/// Fits the decay and variance models to non-trapped series and evaluates
/// every estimate.
pub fn analyze(series: &[SampleSeries], alpha: f64, eps: f64, z: usize) -> Result<EstimateReport> {
    check_eps(eps)?;
    let mut stats = Vec::new();
    for s in series {
        let g = fit_gaussian(&s.samples, alpha)?;
        stats.push(SeriesStats {
            beta: s.beta,
            mean: g.mean,
            std: g.std,
            acceptance: s.acceptance,
            trapped: s.trapped,
        });
    }
    let usable: Vec<&SeriesStats> = stats.iter().filter(|s| !s.trapped).collect();
    let mut fit = fit_decay(&usable.iter().map(|s| (s.beta, s.mean)).collect::<Vec<_>>())?;
    fit.kl = fit_line(&usable.iter().map(|s| (s.mean, s.std * s.std)).collect::<Vec<_>>()).ok();
    let acceptance =
        AcceptanceModel::fit(&usable.iter().map(|s| (s.beta, s.acceptance)).collect::<Vec<_>>(), TRAPPED_ACCEPTANCE)
            .ok();
    let mut per_beta = Vec::new();
    for s in &stats {
        let p = prob_within(&fit, s.beta, eps)?;
        let it = acceptance.as_ref().and_then(|m| iter_order(&fit, m, s.beta, eps).ok());
        per_beta.push((s.beta, p, it));
    }
    Ok(EstimateReport {
        min_estimate: min_estimate(&fit, alpha),
        cardinality_log_z: cardinality_log_z_eps(&fit, eps, z),
        stats,
        fit,
        acceptance,
        alpha,
        eps,
        z,
        per_beta,
    })
}

impl EstimateReport {
    /// `beta,mean,std,acceptance,trapped` table.
    pub fn stats_csv(&self) -> String {
        let mut s = String::from("beta,mean,std,acceptance,trapped\n");
        for r in &self.stats {
            writeln!(s, "{},{:.10},{:.10},{:.6},{}", r.beta, r.mean, r.std, r.acceptance, r.trapped).unwrap();
        }
        s
    }

    pub fn to_text(&self) -> String {
        let f = &self.fit;
        let mut s = String::new();
        writeln!(s, "model mu(beta) = c + a exp(-b beta)").unwrap();
        writeln!(s, "a = {:.6e}", f.a).unwrap();
        writeln!(s, "b = {:.6e}", f.b).unwrap();
        writeln!(s, "c = {:.6e}", f.c).unwrap();
        writeln!(s, "rms residual = {:.3e}", f.residual).unwrap();
        match f.kl {
            Some((k, l)) => writeln!(s, "variance line k = {k:.6e}, l = {l:.6e} (decay slope b = {:.6e})", f.b).unwrap(),
            None => writeln!(s, "variance line: not fitted").unwrap(),
        }
        writeln!(s, "alpha = {}", self.alpha).unwrap();
        writeln!(s, "epsilon = {:.6e}", self.eps).unwrap();
        writeln!(s, "estimated minimum count = {:.3}", self.min_estimate).unwrap();
        writeln!(s, "recurrent class size, log base {} = {:.3}", self.z, self.cardinality_log_z).unwrap();
        for (beta, p, it) in &self.per_beta {
            match it {
                Some(it) => writeln!(s, "beta = {beta}: P(within eps) = {p:.3e}, iteration order = {it:.3e}").unwrap(),
                None => writeln!(s, "beta = {beta}: P(within eps) = {p:.3e}, iteration order n/a").unwrap(),
            }
        }
        s
    }
}

/// Histogram CSV of one series.
pub fn histogram_csv(samples: &[f64], alpha: f64) -> Result<String> {
    let g = fit_gaussian(samples, alpha)?;
    let mut s = String::from("bin,count\n");
    for (b, c) in g.histogram {
        writeln!(s, "{b:.10},{c}").unwrap();
    }
    Ok(s)
}

#[cfg(test)]
mod tests;
