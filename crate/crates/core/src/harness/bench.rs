//! Declarative benchmark suites and their CSV/JSON reports.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{check_gaussian_max, check_theta_moment, monte_carlo, trial_seed, trial_window, ExperimentStats};
use super::{GaussianMaxReport, MonteCarloConfig, ThetaReport, TrialRecord};
use crate::adaptive::DenoiseSetup;
use crate::error::{param, Error, Result};
use crate::signals::SignalSpec;
use crate::solver::SolverOptions;

/// One Monte Carlo experiment of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub signal: SignalSpec,
    pub order: usize,
    pub rho: f64,
    pub sigma: f64,
    pub trials: usize,
    /// Present for prediction experiments.
    #[serde(default)]
    pub kappa: Option<usize>,
    /// Defaults to the origin.
    #[serde(default)]
    pub anchor: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianMaxSpec {
    pub n: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaSpec {
    pub dim: usize,
    pub order: usize,
    pub sigma: f64,
    pub trials: usize,
}

/// A full benchmark: experiment `k` draws its trial seeds from
/// `trial_seed(master_seed, 2^32 + k)`, Gaussian check `k` from
/// `trial_seed(master_seed, 2^33 + k)` and moment check `k` from
/// `trial_seed(master_seed, 2^34 + k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSuite {
    pub master_seed: u64,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub parallel: bool,
    #[serde(default)]
    pub experiment: Vec<ExperimentSpec>,
    #[serde(default)]
    pub gaussian_max: Vec<GaussianMaxSpec>,
    #[serde(default)]
    pub theta_moment: Vec<ThetaSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The check's hypothesis does not hold for this configuration.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl CheckLine {
    fn new(name: impl Into<String>, ok: bool, detail: String) -> Self {
        CheckLine { name: name.into(), status: if ok { Status::Pass } else { Status::Fail }, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    pub spec: ExperimentSpec,
    pub stats: ExperimentStats,
    pub records: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub master_seed: u64,
    pub experiments: Vec<ExperimentOutcome>,
    pub gaussian_max: Vec<GaussianMaxReport>,
    pub theta_moment: Vec<ThetaReport>,
    pub checks: Vec<CheckLine>,
}

const EXP_BASE: u64 = 1 << 32;
const GAUSS_BASE: u64 = 1 << 33;
const THETA_BASE: u64 = 1 << 34;

impl BenchSuite {
    pub fn validate(&self) -> Result<()> {
        if self.experiment.is_empty() && self.gaussian_max.is_empty() && self.theta_moment.is_empty() {
            return param("the suite is empty");
        }
        for e in &self.experiment {
            if e.trials == 0 {
                return param(format!("experiment {}: trials must be positive", e.name));
            }
            if !(e.sigma >= 0.0) {
                return param(format!("experiment {}: sigma must be nonnegative", e.name));
            }
            if e.anchor.as_ref().is_some_and(|a| a.len() != e.signal.dim()) {
                return param(format!("experiment {}: anchor dimension differs from the signal's", e.name));
            }
            setup_of(e)?;
        }
        if self.gaussian_max.iter().any(|g| g.trials == 0 || g.n == 0) || self.theta_moment.iter().any(|t| t.trials == 0) {
            return param("check trial counts and sizes must be positive");
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return param("tol must be positive");
            }
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        let d = SolverOptions::default();
        SolverOptions { tol: self.tol.unwrap_or(d.tol), max_iter: self.max_iter.unwrap_or(d.max_iter), ..d }
    }
}

fn setup_of(e: &ExperimentSpec) -> Result<DenoiseSetup> {
    match e.kappa {
        None => DenoiseSetup::filtering(e.rho, e.order),
        Some(k) => DenoiseSetup::prediction(e.rho, e.order, k),
    }
}

fn run_experiment(suite: &BenchSuite, k: usize, e: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let anchor = e.anchor.clone().unwrap_or_else(|| vec![0; e.signal.dim()]);
    let signal = e.signal.eval(&trial_window(&anchor, e.order))?;
    let cert = e.signal.certificate(e.kappa, e.order)?;
    let cfg = MonteCarloConfig {
        signal,
        cert,
        anchor,
        setup: setup_of(e)?,
        sigma: e.sigma,
        trials: e.trials,
        master_seed: trial_seed(suite.master_seed, EXP_BASE + k as u64),
        solver: suite.solver_options(),
        parallel: suite.parallel,
    };
    let (stats, records) = monte_carlo(&cfg)?;
    Ok(ExperimentOutcome { spec: e.clone(), stats, records })
}

fn experiment_checks(o: &ExperimentOutcome) -> Vec<CheckLine> {
    let s = &o.stats;
    let name = &o.spec.name;
    let risk = if s.bound_applies {
        CheckLine::new(
            format!("{name}: rmse within risk bound"),
            s.rmse_adaptive <= s.risk_bound,
            format!("rmse {:.4e} bound {:.4e} ratio {:.4e}", s.rmse_adaptive, s.risk_bound, s.ratio),
        )
    } else {
        CheckLine {
            name: format!("{name}: rmse within risk bound"),
            status: Status::Skip,
            detail: "setup rho is below the certificate's".into(),
        }
    };
    let path = CheckLine::new(
        format!("{name}: pathwise bound"),
        s.bound_applies && s.pathwise_violations == 0,
        format!("{} violations in {} trials", s.pathwise_violations, s.trials),
    );
    let slack = s.ci_oracle * 3.0 / super::Z95;
    let oracle = CheckLine::new(
        format!("{name}: oracle rmse"),
        s.rmse_oracle <= s.oracle_bound + slack,
        format!("rmse {:.4e} bound {:.4e} (+{:.1e})", s.rmse_oracle, s.oracle_bound, slack),
    );
    vec![risk, path, oracle]
}

/// Run every experiment and check of the suite, in order.
pub fn run_suite(suite: &BenchSuite) -> Result<SuiteReport> {
    suite.validate()?;
    let mut checks = Vec::new();
    let mut experiments = Vec::with_capacity(suite.experiment.len());
    for (k, e) in suite.experiment.iter().enumerate() {
        let o = run_experiment(suite, k, e).map_err(|err| match err {
            Error::Trial { .. } => err,
            other => Error::Param(format!("experiment {}: {other}", e.name)),
        })?;
        checks.extend(experiment_checks(&o));
        experiments.push(o);
    }
    let mut gaussian_max = Vec::new();
    for (k, g) in suite.gaussian_max.iter().enumerate() {
        let r = check_gaussian_max(g.n, g.trials, trial_seed(suite.master_seed, GAUSS_BASE + k as u64))?;
        checks.push(CheckLine::new(
            format!("gaussian max N={}: mean", g.n),
            r.mean_passes(),
            format!("mean {:.4} bound {:.4} se {:.2e}", r.mean_max2, r.bound, r.se),
        ));
        for t in &r.tails {
            checks.push(CheckLine::new(
                format!("gaussian max N={}: tail u={}", g.n, t.u),
                t.passes(),
                format!("freq {:.4e} bound {:.4e} se {:.2e}", t.frequency, t.bound, t.se),
            ));
        }
        gaussian_max.push(r);
    }
    let mut theta_moment = Vec::new();
    for (k, t) in suite.theta_moment.iter().enumerate() {
        let r = check_theta_moment(t.dim, t.order, t.sigma, t.trials, trial_seed(suite.master_seed, THETA_BASE + k as u64))?;
        checks.push(CheckLine::new(
            format!("noise statistic d={} T={}: second moment", t.dim, t.order),
            r.passes(),
            format!("mean {:.4e} bound {:.4e} se {:.2e}", r.mean_theta2, r.bound, r.se),
        ));
        theta_moment.push(r);
    }
    Ok(SuiteReport { master_seed: suite.master_seed, experiments, gaussian_max, theta_moment, checks })
}

fn join_anchor(a: &[i64]) -> String {
    a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("{other:?}")),
    }
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    /// Columns: `name, dim, order, rho, sigma, kappa, trials, rmse_adaptive,
    /// ci_adaptive, rmse_oracle, ci_oracle, risk_bound, ratio, oracle_bound,
    /// bound_applies, pathwise_violations, unconverged, max_gap, mean_theta2`,
    /// after a `# master_seed = ...` line.
    pub fn write_stats_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "# master_seed = {}", self.master_seed)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "name", "dim", "order", "rho", "sigma", "kappa", "trials", "rmse_adaptive", "ci_adaptive", "rmse_oracle",
            "ci_oracle", "risk_bound", "ratio", "oracle_bound", "bound_applies", "pathwise_violations", "unconverged",
            "max_gap", "mean_theta2",
        ])
        .map_err(csv_err)?;
        for o in &self.experiments {
            let (e, s) = (&o.spec, &o.stats);
            w.write_record([
                e.name.clone(),
                e.signal.dim().to_string(),
                e.order.to_string(),
                e.rho.to_string(),
                e.sigma.to_string(),
                e.kappa.map_or(String::new(), |k| k.to_string()),
                s.trials.to_string(),
                s.rmse_adaptive.to_string(),
                s.ci_adaptive.to_string(),
                s.rmse_oracle.to_string(),
                s.ci_oracle.to_string(),
                s.risk_bound.to_string(),
                s.ratio.to_string(),
                s.oracle_bound.to_string(),
                s.bound_applies.to_string(),
                s.pathwise_violations.to_string(),
                s.unconverged.to_string(),
                s.max_gap.to_string(),
                s.mean_theta2.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Columns: `experiment, trial, seed, anchor, truth_re, truth_im, est_re,
    /// est_im, oracle_re, oracle_im, err2_adaptive, err2_oracle, gap,
    /// converged, iterations, theta_stat, pathwise_bound`; anchors are
    /// `;`-separated.
    pub fn write_trials_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "# master_seed = {}", self.master_seed)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "experiment", "trial", "seed", "anchor", "truth_re", "truth_im", "est_re", "est_im", "oracle_re",
            "oracle_im", "err2_adaptive", "err2_oracle", "gap", "converged", "iterations", "theta_stat",
            "pathwise_bound",
        ])
        .map_err(csv_err)?;
        for o in &self.experiments {
            for (i, r) in o.records.iter().enumerate() {
                w.write_record([
                    o.spec.name.clone(),
                    i.to_string(),
                    r.seed.to_string(),
                    join_anchor(&r.anchor),
                    r.truth.re.to_string(),
                    r.truth.im.to_string(),
                    r.estimate.re.to_string(),
                    r.estimate.im.to_string(),
                    r.oracle_estimate.re.to_string(),
                    r.oracle_estimate.im.to_string(),
                    r.err2_adaptive.to_string(),
                    r.err2_oracle.to_string(),
                    r.gap.to_string(),
                    r.converged.to_string(),
                    r.iterations.to_string(),
                    r.theta_stat.to_string(),
                    r.pathwise_bound.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Report without per-trial records.
    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            master_seed: u64,
            all_pass: bool,
            experiments: Vec<(&'a str, &'a ExperimentStats)>,
            gaussian_max: &'a [GaussianMaxReport],
            theta_moment: &'a [ThetaReport],
            checks: &'a [CheckLine],
        }
        let s = Summary {
            master_seed: self.master_seed,
            all_pass: self.all_pass(),
            experiments: self.experiments.iter().map(|o| (o.spec.name.as_str(), &o.stats)).collect(),
            gaussian_max: &self.gaussian_max,
            theta_moment: &self.theta_moment,
            checks: &self.checks,
        };
        serde_json::to_string_pretty(&s).map_err(|e| Error::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SUITE: &str = r#"
master_seed = 42

[[experiment]]
name = "constant"
signal = { kind = "exp_poly", terms = [{ re_c = 1.0, alpha = [0], re_omega = [0.0], im_omega = [0.0] }] }
order = 2
rho = 1.4142135623730951
sigma = 0.1
trials = 4

[[gaussian_max]]
n = 4
trials = 500

[[theta_moment]]
dim = 1
order = 1
sigma = 1.0
trials = 50
"#;

    #[test]
    fn small_suite_runs_and_is_reproducible() {
        let suite: BenchSuite = toml::from_str(SUITE).unwrap();
        let a = run_suite(&suite).unwrap();
        assert!(a.all_pass(), "{:?}", a.checks);
        let b = run_suite(&suite).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_stats_csv(&mut ca).unwrap();
        b.write_stats_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        assert!(String::from_utf8(ca).unwrap().starts_with("# master_seed = 42\nname,dim,order"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<BenchSuite>("master_seed = 1\nbogus = 2").is_err());
        let empty: BenchSuite = toml::from_str("master_seed = 1").unwrap();
        assert!(run_suite(&empty).is_err());
    }
}
