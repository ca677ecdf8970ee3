use rand::Rng;

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-9;

/// Normalized `exp(-beta * cost)` over the assignments of one tuple. `None`
/// marks an infeasible assignment, which gets probability 0.
pub fn conditional_pmf(costs: &[Option<f64>], beta: f64) -> Result<Vec<f64>> {
    let min = costs
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::Unnormalized(0.0));
    }
    let mut pmf: Vec<f64> = costs
        .iter()
        .map(|c| match c {
            Some(c) => (-beta * (c - min)).exp(),
            None => 0.0,
        })
        .collect();
    let z: f64 = pmf.iter().sum();
    for p in &mut pmf {
        *p /= z;
    }
    Ok(pmf)
}

fn check_normalized(pmf: &[f64]) -> Result<()> {
    let s: f64 = pmf.iter().sum();
    if (s - 1.0).abs() > NORM_TOL || pmf.iter().any(|p| *p < 0.0) {
        return Err(Error::Unnormalized(s));
    }
    Ok(())
}

/// Index of the interval containing `t` in the cumulative layout of `pmf`,
/// skipping zero-mass assignments.
fn locate(pmf: &[f64], t: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in pmf.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = k;
        if t < acc {
            return k;
        }
    }
    last
}

/// Draws the next assignment index. With `gibbs` unset this is ordered
/// overrelaxation: the quantile of `current` is drawn uniformly inside its own
/// interval and the assignment holding the mirrored quantile is returned.
/// A current assignment whose mass underflowed to zero is mirrored from the
/// point where its interval would start.
pub fn overrelax_sample<R: Rng + ?Sized>(pmf: &[f64], current: usize, rng: &mut R, gibbs: bool) -> Result<usize> {
    check_normalized(pmf)?;
    if current >= pmf.len() {
        return Err(Error::InvalidArgument(format!(
            "current assignment {current} outside 0..{}",
            pmf.len()
        )));
    }
    let u: f64 = rng.gen();
    if gibbs {
        return Ok(locate(pmf, u));
    }
    let lo: f64 = pmf[..current].iter().sum();
    let q = lo + u * pmf[current];
    Ok(locate(pmf, 1.0 - q))
}

/// Exact transition probabilities of [`overrelax_sample`] from `current`.
pub fn sample_kernel(pmf: &[f64], current: usize, gibbs: bool) -> Vec<f64> {
    if gibbs {
        return pmf.to_vec();
    }
    // mirrored image of the current interval
    let lo: f64 = pmf[..current].iter().sum();
    let mut out = vec![0.0; pmf.len()];
    if pmf[current] <= 0.0 {
        out[locate(pmf, 1.0 - lo)] = 1.0;
        return out;
    }
    let hi = lo + pmf[current];
    let (mlo, mhi) = (1.0 - hi, 1.0 - lo);
    let mut acc = 0.0;
    for (k, &p) in pmf.iter().enumerate() {
        let (a, b) = (acc, acc + p);
        acc = b;
        if p <= 0.0 {
            continue;
        }
        let overlap = (b.min(mhi) - a.max(mlo)).max(0.0);
        out[k] = overlap / pmf[current];
    }
    out
}

/// Gains and clamps of the acceptance-rate controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        PidGains {
            kp: 2.0,
            ki: 0.1,
            kd: 0.0,
            beta_min: 1e-6,
            beta_max: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: Option<f64>,
}

/// Multiplicative update `beta * exp(kp e + ki sum(e) + kd de)` with
/// `e = f - f_target`.
pub fn update_beta(beta: f64, f: f64, f_target: f64, state: &mut PidState, gains: &PidGains) -> f64 {
    let e = f - f_target;
    state.integral += e;
    let de = state.prev_error.map_or(0.0, |p| e - p);
    state.prev_error = Some(e);
    let next = beta * (gains.kp * e + gains.ki * state.integral + gains.kd * de).exp();
    next.clamp(gains.beta_min, gains.beta_max)
}
