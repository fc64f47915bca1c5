//! Noise generation and Monte Carlo experiments around the estimators.

mod bench;
mod gauss;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bench::{
    run_suite, BenchSuite, CheckLine, ExperimentSpec, ExperimentOutcome, GaussianMaxSpec, SuiteReport, ThetaSpec,
};
pub use gauss::{check_gaussian_max, check_theta_moment, GaussianMaxReport, TailLine, ThetaReport};

use crate::adaptive::{estimate_point, pathwise_bound, risk_bound, theta_stat, DenoiseSetup};
use crate::error::{param, Error, Result};
use crate::field::{Field, GridBox, Norm};
use crate::signals::Certificate;
use crate::solver::SolverOptions;

/// `e = sigma * eps`, `Re eps` and `Im eps` independent standard normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

/// The splitmix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `i` under `master`: `splitmix64(master + i * 0x9E3779B97F4A7C15)`.
pub fn trial_seed(master: u64, i: u64) -> u64 {
    splitmix64(master.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Stream id of a grid point: splitmix64 folded over the coordinates.
pub fn point_stream(p: &[i64]) -> u64 {
    p.iter().fold(0x5EED_u64, |h, &x| splitmix64(h ^ x as u64))
}

/// Noise on `bbox`.
///
/// The value at `tau` comes from `ChaCha8Rng::seed_from_u64(seed)` moved to
/// stream `point_stream(tau)`: its first standard normal draw (ziggurat,
/// `rand_distr::StandardNormal`) is the real part and the second the
/// imaginary part. Values therefore depend only on the seed and the point,
/// never on the box.
pub fn sample_noise(bbox: &GridBox, spec: &NoiseSpec) -> Field {
    if spec.sigma == 0.0 {
        return Field::zeros(bbox.clone());
    }
    let base = ChaCha8Rng::seed_from_u64(spec.seed);
    Field::from_fn(bbox.clone(), |p| {
        let mut rng = base.clone();
        rng.set_stream(point_stream(p));
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * spec.sigma
    })
}

/// One replication at one anchor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub anchor: Vec<i64>,
    pub truth: Complex64,
    pub estimate: Complex64,
    /// `(q(Delta) y)_t` with the certificate filter of order `T`.
    pub oracle_estimate: Complex64,
    pub err2_adaptive: f64,
    pub err2_oracle: f64,
    pub gap: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Unnormalised noise statistic, `sigma Theta^t_T`.
    pub theta_stat: f64,
    pub pathwise_bound: f64,
}

impl TrialRecord {
    pub fn pathwise_ok(&self) -> bool {
        self.err2_adaptive.sqrt() <= self.pathwise_bound
    }
}

/// Window over which a trial generates noise: `{|tau - t| <= 4T}`, which
/// covers both estimators and the noise statistic.
pub fn trial_window(t: &[i64], order: usize) -> GridBox {
    GridBox::around(t, 4 * order)
}

/// Observe `s` in noise, run the estimator and the certificate's oracle filter.
pub fn run_trial(
    s: &Field,
    cert: &Certificate,
    t: &[i64],
    setup: &DenoiseSetup,
    noise: &NoiseSpec,
    opts: &SolverOptions,
) -> Result<TrialRecord> {
    let window = trial_window(t, setup.order);
    s.grid().require_contains(&window, "signal")?;
    let e = sample_noise(&window, noise);
    let y = s.restrict(&window)?.add(&e)?;
    let truth = s.at(t)?;
    let (estimate, gap, converged, iterations) = match estimate_point(&y, t, setup, opts) {
        Ok(est) => match est.solve {
            Some(r) => (est.value, r.gap, true, r.iterations),
            None => (est.value, 0.0, true, 0),
        },
        Err(Error::NotConverged(r)) => (r.phi.apply_at(&y, t)?, r.gap, false, r.iterations),
        Err(err) => return Err(err),
    };
    let q = cert.filter(setup.order)?;
    let oracle_estimate = q.apply_at(&y, t)?;
    let stat = theta_stat(&e, t, setup.order)?;
    Ok(TrialRecord {
        seed: noise.seed,
        anchor: t.to_vec(),
        truth,
        estimate,
        oracle_estimate,
        err2_adaptive: (estimate - truth).norm_sqr(),
        err2_oracle: (oracle_estimate - truth).norm_sqr(),
        gap,
        converged,
        iterations,
        theta_stat: stat,
        pathwise_bound: pathwise_bound(t.len(), setup.order, setup.rho, cert.theta(), stat),
    })
}

#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    pub signal: Field,
    pub cert: Certificate,
    pub anchor: Vec<i64>,
    pub setup: DenoiseSetup,
    pub sigma: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub solver: SolverOptions,
    pub parallel: bool,
}

/// Aggregates of a Monte Carlo run; half-widths are 95% normal-approximation
/// intervals (delta method for the root mean squares).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentStats {
    pub trials: usize,
    pub rmse_adaptive: f64,
    pub rmse_oracle: f64,
    pub ci_adaptive: f64,
    pub ci_oracle: f64,
    pub risk_bound: f64,
    /// `rmse_adaptive / risk_bound`.
    pub ratio: f64,
    /// `sqrt 2 sigma |q|_2 + theta (2T+1)^{-d/2}`.
    pub oracle_bound: f64,
    /// Whether the setup's `rho` is at least the certificate's, so that the
    /// risk bound applies.
    pub bound_applies: bool,
    pub pathwise_violations: usize,
    pub unconverged: usize,
    pub max_gap: f64,
    /// Mean of `theta_stat^2`.
    pub mean_theta2: f64,
}

const Z95: f64 = 1.959_963_984_540_054;

fn mean_and_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let m = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (m, 0.0);
    }
    let var = xs.map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn rms_with_ci(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (m, se) = mean_and_se(xs);
    let r = m.sqrt();
    let hw = if r > 0.0 { Z95 * se / (2.0 * r) } else { 0.0 };
    (r, hw)
}

pub fn aggregate(cfg: &MonteCarloConfig, records: &[TrialRecord]) -> Result<ExperimentStats> {
    if records.is_empty() {
        return param("no trials to aggregate");
    }
    let d = cfg.anchor.len();
    let t = cfg.setup.order;
    let (rmse_adaptive, ci_adaptive) = rms_with_ci(records.iter().map(|r| r.err2_adaptive));
    let (rmse_oracle, ci_oracle) = rms_with_ci(records.iter().map(|r| r.err2_oracle));
    let bound = risk_bound(d, t, cfg.setup.rho, cfg.cert.theta(), cfg.sigma);
    let q = cfg.cert.filter(t)?;
    Ok(ExperimentStats {
        trials: records.len(),
        rmse_adaptive,
        rmse_oracle,
        ci_adaptive,
        ci_oracle,
        risk_bound: bound,
        ratio: rmse_adaptive / bound,
        oracle_bound: 2f64.sqrt() * cfg.sigma * q.norm(Norm::L2) + cfg.cert.residual_bound(t),
        bound_applies: cfg.setup.rho >= cfg.cert.rho(),
        pathwise_violations: records.iter().filter(|r| !r.pathwise_ok()).count(),
        unconverged: records.iter().filter(|r| !r.converged).count(),
        max_gap: records.iter().map(|r| r.gap).fold(0.0, f64::max),
        mean_theta2: records.iter().map(|r| r.theta_stat * r.theta_stat).sum::<f64>() / records.len() as f64,
    })
}

/// Independent-seed replications, aggregated in seed order.
pub fn monte_carlo(cfg: &MonteCarloConfig) -> Result<(ExperimentStats, Vec<TrialRecord>)> {
    if cfg.trials == 0 {
        return param("monte carlo needs at least one trial");
    }
    if !(cfg.sigma >= 0.0) {
        return param(format!("sigma must be nonnegative, got {}", cfg.sigma));
    }
    let one = |i: usize| {
        let seed = trial_seed(cfg.master_seed, i as u64);
        run_trial(&cfg.signal, &cfg.cert, &cfg.anchor, &cfg.setup, &NoiseSpec { sigma: cfg.sigma, seed }, &cfg.solver)
            .map_err(|e| Error::Trial { seed, source: Box::new(e) })
    };
    let records: Vec<TrialRecord> = if cfg.parallel {
        (0..cfg.trials).into_par_iter().map(one).collect::<Result<_>>()?
    } else {
        (0..cfg.trials).map(one).collect::<Result<_>>()?
    };
    Ok((aggregate(cfg, &records)?, records))
}
