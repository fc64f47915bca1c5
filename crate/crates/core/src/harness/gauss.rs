//! Empirical checks of the Gaussian-maximum inequalities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{sample_noise, trial_seed, trial_window, NoiseSpec};
use crate::adaptive::theta_stat;
use crate::error::{param, Result};

/// Empirical `P{max |f_j| > u + sqrt(2 ln N)}` against `exp(-u^2/2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailLine {
    pub u: f64,
    pub frequency: f64,
    pub se: f64,
    pub bound: f64,
}

impl TailLine {
    pub fn passes(&self) -> bool {
        self.frequency <= self.bound + 3.0 * self.se
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianMaxReport {
    pub n: usize,
    pub trials: usize,
    /// Sample mean of `max_j |f_j|^2`.
    pub mean_max2: f64,
    pub se: f64,
    /// `2 ln N + 2`.
    pub bound: f64,
    pub tails: Vec<TailLine>,
}

impl GaussianMaxReport {
    pub fn mean_passes(&self) -> bool {
        self.mean_max2 <= self.bound + 3.0 * self.se
    }

    pub fn passes(&self) -> bool {
        self.mean_passes() && self.tails.iter().all(TailLine::passes)
    }
}

fn se_of_frequency(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Draw `trials` batches of `n` independent standard complex Gaussians
/// (real and imaginary parts N(0,1)) and compare `max |f_j|` with its bounds
/// at `u = 1, 2, 3`.
pub fn check_gaussian_max(n: usize, trials: usize, seed: u64) -> Result<GaussianMaxReport> {
    if n == 0 || trials == 0 {
        return param("need N >= 1 and at least one trial");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maxima: Vec<f64> = (0..trials)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    re * re + im * im
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let (mean, se) = super::mean_and_se(maxima.iter().copied());
    let shift = (2.0 * (n as f64).ln()).sqrt();
    let tails = [1.0f64, 2.0, 3.0]
        .iter()
        .map(|&u| {
            let thr = (u + shift).powi(2);
            let p = maxima.iter().filter(|&&m| m > thr).count() as f64 / trials as f64;
            TailLine { u, frequency: p, se: se_of_frequency(p, trials), bound: (-u * u / 2.0).exp() }
        })
        .collect();
    Ok(GaussianMaxReport { n, trials, mean_max2: mean, se, bound: 2.0 * (n as f64).ln() + 2.0, tails })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaReport {
    pub dim: usize,
    pub order: usize,
    pub sigma: f64,
    pub trials: usize,
    /// Sample mean of the squared unnormalised noise statistic.
    pub mean_theta2: f64,
    pub se: f64,
    /// `sigma^2 (4 d ln(4T+1) + 2)`.
    pub bound: f64,
}

impl ThetaReport {
    pub fn passes(&self) -> bool {
        self.mean_theta2 <= self.bound + 3.0 * self.se
    }
}

/// Monte Carlo estimate of the second moment of the noise statistic at the origin.
pub fn check_theta_moment(dim: usize, order: usize, sigma: f64, trials: usize, seed: u64) -> Result<ThetaReport> {
    if dim == 0 || trials == 0 || order == 0 {
        return param("need d >= 1, T >= 1 and at least one trial");
    }
    let origin = vec![0i64; dim];
    let window = trial_window(&origin, order);
    let vals = (0..trials)
        .map(|i| {
            let e = sample_noise(&window, &NoiseSpec { sigma, seed: trial_seed(seed, i as u64) });
            theta_stat(&e, &origin, order).map(|s| s * s)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, se) = super::mean_and_se(vals.iter().copied());
    let bound = sigma * sigma * (4.0 * dim as f64 * ((4 * order + 1) as f64).ln() + 2.0);
    Ok(ThetaReport { dim, order, sigma, trials, mean_theta2: mean, se, bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable_mean_is_two() {
        let r = check_gaussian_max(1, 20_000, 5).unwrap();
        assert_eq!(r.bound, 2.0);
        assert!((r.mean_max2 - 2.0).abs() < 4.0 * r.se);
        assert!(r.passes());
        assert!(check_gaussian_max(0, 10, 1).is_err());
    }

    #[test]
    fn theta_moment_small() {
        let r = check_theta_moment(1, 2, 0.5, 300, 9).unwrap();
        assert!(r.passes(), "{r:?}");
    }
}
