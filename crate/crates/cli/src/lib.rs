//! The `wellfilt` command line: generate, denoise, predict, bench, certify.

pub mod config;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use wellfilt::adaptive::{estimate_point, read_window};
use wellfilt::field::io;
use wellfilt::harness::{run_suite, sample_noise, BenchSuite, NoiseSpec};
use wellfilt::signals::{
    check_certificate, combine_certificates, lift_certificate, modulate_certificate, tensor_certificate, Certificate,
    ExpPolynomial, Monomial, RegularOperator, SignalSpec,
};
use wellfilt::{DenoiseSetup, Error, Field, GridBox, Norm, SolverOptions};

use config::{CertSpec, CertifyConfig, EstimateConfig, GenerateConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECKS: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_GENERATE: i32 = 3;
pub const EXIT_COVERAGE: i32 = 4;
pub const EXIT_NOT_CONVERGED: i32 = 5;
pub const EXIT_CERTIFICATE: i32 = 6;

/// Relative tolerance for certificate audits.
pub const CERT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn with_code(code: i32) -> impl Fn(Error) -> CliError {
    move |e| CliError::new(code, e.to_string())
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::new(EXIT_CHECKS, format!("cannot write {}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "wellfilt", version, about = "Adaptive filtering and prediction of signals observed in noise on Z^d")]
pub struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Override the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override the solver tolerance (absolute duality gap).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Write a signal and/or noisy observations as ZDF1 files.
    Generate,
    /// Filtering estimates at anchors.
    Denoise,
    /// Prediction estimates at anchors from preceding observations.
    Predict,
    /// Run a Monte Carlo benchmark suite.
    Bench,
    /// Build a certificate filter and audit it.
    Certify,
}

struct Ctx<'a> {
    cli: &'a Cli,
    config: PathBuf,
}

impl Ctx<'_> {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.cli.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn out_path(&self, name: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.cli.out)
            .map_err(|e| CliError::new(EXIT_CHECKS, format!("cannot create {}: {e}", self.cli.out.display())))?;
        Ok(self.cli.out.join(name))
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    let Some(config) = cli.config.clone() else {
        return Err(CliError::new(EXIT_CONFIG, "--config is required"));
    };
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(CliError::new(EXIT_CONFIG, "--tol must be positive"));
        }
    }
    let ctx = Ctx { cli, config };
    match cli.command {
        Command::Generate => generate(&ctx),
        Command::Denoise => estimate(&ctx, false),
        Command::Predict => estimate(&ctx, true),
        Command::Bench => bench(&ctx),
        Command::Certify => certify(&ctx),
    }
}

fn generate(ctx: &Ctx) -> Result<i32, CliError> {
    let cfg: GenerateConfig = config::load(&ctx.config)?;
    if !(cfg.sigma >= 0.0) || !cfg.sigma.is_finite() {
        return Err(CliError::new(EXIT_CONFIG, "sigma must be a finite number >= 0"));
    }
    if cfg.signal_out.is_none() && cfg.observations_out.is_none() {
        return Err(CliError::new(EXIT_CONFIG, "set signal_out and/or observations_out"));
    }
    let bbox = cfg.domain.grid()?;
    if bbox.dim() != cfg.signal.dim() {
        return Err(CliError::new(EXIT_CONFIG, "domain and signal dimensions differ"));
    }
    let s = cfg.signal.eval(&bbox).map_err(with_code(EXIT_GENERATE))?;
    if let Some(name) = &cfg.signal_out {
        let p = ctx.out_path(name)?;
        io::save(&s, &p).map_err(with_code(EXIT_GENERATE))?;
        ctx.say(format!("wrote signal on {bbox} to {}", p.display()));
    }
    if let Some(name) = &cfg.observations_out {
        let noise = NoiseSpec { sigma: cfg.sigma, seed: ctx.cli.seed.unwrap_or(cfg.seed) };
        let y = s.add(&sample_noise(&bbox, &noise)).map_err(with_code(EXIT_GENERATE))?;
        let p = ctx.out_path(name)?;
        io::save(&y, &p).map_err(with_code(EXIT_GENERATE))?;
        ctx.say(format!("wrote observations (sigma {}, seed {}) to {}", noise.sigma, noise.seed, p.display()));
    }
    Ok(EXIT_OK)
}

fn anchors_of(cfg: &EstimateConfig) -> Result<Vec<Vec<i64>>, CliError> {
    let mut out = cfg.anchors.clone().unwrap_or_default();
    if let Some(b) = &cfg.anchor_box {
        out.extend(b.grid()?.points());
    }
    if out.is_empty() {
        return Err(CliError::new(EXIT_CONFIG, "no anchors: set anchors and/or anchor_box"));
    }
    Ok(out)
}

fn fmt_point(p: &[i64]) -> String {
    p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn estimate(ctx: &Ctx, predict: bool) -> Result<i32, CliError> {
    let cfg: EstimateConfig = config::load(&ctx.config)?;
    let setup = match (predict, cfg.kappa) {
        (false, None) => DenoiseSetup::filtering(cfg.rho, cfg.order),
        (true, Some(k)) => DenoiseSetup::prediction(cfg.rho, cfg.order, k),
        (false, Some(_)) => return Err(CliError::new(EXIT_CONFIG, "kappa is only valid for predict")),
        (true, None) => return Err(CliError::new(EXIT_CONFIG, "predict needs kappa")),
    }
    .map_err(with_code(EXIT_CONFIG))?;
    let defaults = SolverOptions::default();
    let opts = SolverOptions {
        tol: ctx.cli.tol.or(cfg.tol).unwrap_or(defaults.tol),
        max_iter: cfg.max_iter.unwrap_or(defaults.max_iter),
        ..defaults
    };
    if !(opts.tol > 0.0) {
        return Err(CliError::new(EXIT_CONFIG, "tol must be positive"));
    }
    let anchors = anchors_of(&cfg)?;
    let y = io::load(&cfg.observations).map_err(|e| CliError::new(EXIT_CONFIG, format!("{}: {e}", cfg.observations)))?;
    if anchors.iter().any(|a| a.len() != y.dim()) {
        return Err(CliError::new(EXIT_CONFIG, "anchor dimension differs from the observations'"));
    }
    let path = ctx.out_path(cfg.estimates_out.as_deref().unwrap_or("estimates.csv"))?;
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::new(EXIT_CHECKS, e.to_string()))?;
    let csv_fail = |e: csv::Error| CliError::new(EXIT_CHECKS, format!("cannot write {}: {e}", path.display()));
    w.write_record(["anchor", "re", "im", "objective", "dual_bound", "gap"]).map_err(csv_fail)?;
    let mut unconverged = 0usize;
    for t in &anchors {
        let window = read_window(t, &setup).map_err(with_code(EXIT_CONFIG))?;
        ctx.say(format!("anchor {} reads {window}", fmt_point(t)));
        let (value, obj, dual, gap) = match estimate_point(&y, t, &setup, &opts) {
            Ok(e) => match e.solve {
                Some(r) => (e.value, r.objective, r.dual_bound, r.gap),
                None => (e.value, 0.0, 0.0, 0.0),
            },
            Err(Error::NotConverged(r)) => {
                unconverged += 1;
                let v = r.phi.apply_at(&y, t).map_err(with_code(EXIT_COVERAGE))?;
                ctx.say(format!("anchor {}: gap {:.3e} above tol {:.1e}", fmt_point(t), r.gap, opts.tol));
                (v, r.objective, r.dual_bound, r.gap)
            }
            Err(e @ Error::Domain(_)) => return Err(CliError::new(EXIT_COVERAGE, e.to_string())),
            Err(e) => return Err(CliError::new(EXIT_CONFIG, e.to_string())),
        };
        w.write_record([
            fmt_point(t),
            value.re.to_string(),
            value.im.to_string(),
            obj.to_string(),
            dual.to_string(),
            gap.to_string(),
        ])
        .map_err(csv_fail)?;
    }
    w.flush().map_err(io_error(&path))?;
    ctx.say(format!("wrote {} estimates to {}", anchors.len(), path.display()));
    if unconverged > 0 {
        eprintln!("error: {unconverged} anchor(s) did not reach the requested gap");
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}

fn bench(ctx: &Ctx) -> Result<i32, CliError> {
    let mut suite: BenchSuite = config::load(&ctx.config)?;
    if let Some(s) = ctx.cli.seed {
        suite.master_seed = s;
    }
    if let Some(t) = ctx.cli.tol {
        suite.tol = Some(t);
    }
    suite.validate().map_err(with_code(EXIT_CONFIG))?;
    let report = run_suite(&suite).map_err(|e| match e {
        Error::Param(_) => CliError::new(EXIT_CONFIG, e.to_string()),
        other => CliError::new(EXIT_CHECKS, other.to_string()),
    })?;
    let stats = ctx.out_path("bench_stats.csv")?;
    report.write_stats_csv(fs::File::create(&stats).map_err(io_error(&stats))?).map_err(with_code(EXIT_CHECKS))?;
    let trials = ctx.out_path("bench_trials.csv")?;
    report.write_trials_csv(fs::File::create(&trials).map_err(io_error(&trials))?).map_err(with_code(EXIT_CHECKS))?;
    let summary = ctx.out_path("bench_summary.json")?;
    fs::write(&summary, report.summary_json().map_err(with_code(EXIT_CHECKS))?).map_err(io_error(&summary))?;
    if !ctx.cli.quiet {
        println!("master_seed = {}", report.master_seed);
        for c in &report.checks {
            println!("{:<4} {}  ({})", format!("{:?}", c.status).to_uppercase(), c.name, c.detail);
        }
    }
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_CHECKS })
}

type Signal = Arc<dyn Fn(&[i64]) -> wellfilt::Result<Complex64> + Send + Sync>;

fn cfg_err(e: Error) -> CliError {
    CliError::new(EXIT_CONFIG, e.to_string())
}

fn exp_poly(terms: &[wellfilt::signals::TermSpec]) -> Result<ExpPolynomial, CliError> {
    SignalSpec::ExpPoly { terms: terms.to_vec() }.exp_polynomial().map_err(cfg_err).map(|p| p.expect("exp-poly"))
}

fn poly_signal(p: ExpPolynomial) -> Signal {
    Arc::new(move |tau| p.value_at(tau))
}

/// The certificate of a construction together with a member of its class.
pub fn build_certificate(spec: &CertSpec, order: usize) -> Result<(Certificate, Signal), CliError> {
    Ok(match spec {
        CertSpec::ExpPoly { terms } => {
            let p = exp_poly(terms)?;
            (Certificate::exp_polynomial(&p).map_err(cfg_err)?, poly_signal(p))
        }
        CertSpec::QuasiStable { terms, kappa } => {
            let p = exp_poly(terms)?;
            (Certificate::quasi_stable(&p, *kappa).map_err(cfg_err)?, poly_signal(p))
        }
        CertSpec::Polynomial { dim, degree } => {
            if *dim == 0 {
                return Err(CliError::new(EXIT_CONFIG, "polynomial dimension must be positive"));
            }
            let k = (*degree as u32) + 1;
            let mut terms = Vec::new();
            for idx in 0..k.pow(*dim as u32) {
                let alpha: Vec<u32> = (0..*dim).map(|j| (idx / k.pow(j as u32)) % k).collect();
                let c = 1.0 / (1 + alpha.iter().sum::<u32>()) as f64;
                terms.push(Monomial::new(Complex64::new(c, 0.0), alpha, vec![Complex64::new(0.0, 0.0); *dim]).map_err(cfg_err)?);
            }
            let p = ExpPolynomial::new(terms).map_err(cfg_err)?;
            (Certificate::polynomial(*dim, *degree).map_err(cfg_err)?, poly_signal(p))
        }
        CertSpec::Harmonic { dim, c24 } => {
            if *dim < 2 {
                return Err(CliError::new(EXIT_CONFIG, "harmonic certificates need dim >= 2"));
            }
            let op = RegularOperator::averaging(*dim).map_err(cfg_err)?;
            let cert = Certificate::harmonic(&op, *c24, order).map_err(cfg_err)?;
            let sig: Signal = Arc::new(|tau| Ok(Complex64::new((tau[0] * tau[0] - tau[1] * tau[1]) as f64, 0.0)));
            (cert, sig)
        }
        CertSpec::Modulate { inner, omega, phase } => {
            let (c, s) = build_certificate(inner, order)?;
            let cert = modulate_certificate(&c, omega).map_err(cfg_err)?;
            let (w, ph) = (omega.clone(), *phase);
            let sig: Signal = Arc::new(move |tau| {
                let arg: f64 = w.iter().zip(tau).map(|(a, b)| a * *b as f64).sum::<f64>() + ph;
                Ok(s(tau)? * Complex64::from_polar(1.0, arg))
            });
            (cert, sig)
        }
        CertSpec::Lift { inner, dim } => {
            let (c, s) = build_certificate(inner, order)?;
            let d = c.dim();
            let cert = lift_certificate(&c, *dim).map_err(cfg_err)?;
            let sig: Signal = Arc::new(move |tau| s(&tau[..d]));
            (cert, sig)
        }
        CertSpec::Tensor { a, b } => {
            let (ca, sa) = build_certificate(a, order)?;
            let (cb, sb) = build_certificate(b, order)?;
            let da = ca.dim();
            let cert = tensor_certificate(&ca, &cb).map_err(cfg_err)?;
            let sig: Signal = Arc::new(move |tau| Ok(sa(&tau[..da])? * sb(&tau[da..])?));
            (cert, sig)
        }
        CertSpec::Combine { parts, lambdas } => {
            if parts.len() != lambdas.len() {
                return Err(CliError::new(EXIT_CONFIG, "combine needs one lambda per part"));
            }
            let m = parts.len().max(1);
            let built = parts.iter().map(|p| build_certificate(p, order / m)).collect::<Result<Vec<_>, _>>()?;
            let lam: Vec<Complex64> = lambdas.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
            let certs: Vec<Certificate> = built.iter().map(|(c, _)| c.clone()).collect();
            let sigs: Vec<Signal> = built.into_iter().map(|(_, s)| s).collect();
            let cert = combine_certificates(&certs, &lam).map_err(cfg_err)?;
            let sig: Signal = Arc::new(move |tau| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (s, l) in sigs.iter().zip(&lam) {
                    acc += l * s(tau)?;
                }
                Ok(acc)
            });
            (cert, sig)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyReport {
    pub label: String,
    pub dim: usize,
    pub order: usize,
    pub theta: f64,
    pub rho: f64,
    pub horizon: Option<usize>,
    pub l2_norm: f64,
    pub l2_bound: f64,
    pub residual: f64,
    pub residual_bound: f64,
    pub scale: f64,
    pub passes: bool,
}

fn certify(ctx: &Ctx) -> Result<i32, CliError> {
    let cfg: CertifyConfig = config::load(&ctx.config)?;
    let (cert, sig) = build_certificate(&cfg.certificate, cfg.order)?;
    let anchor = cfg.anchor.clone().unwrap_or_else(|| vec![0; cert.dim()]);
    if anchor.len() != cert.dim() {
        return Err(CliError::new(EXIT_CONFIG, "anchor dimension differs from the certificate's"));
    }
    let field_of = |b: &GridBox| -> wellfilt::Result<Field> {
        let vals = b.points().map(|p| sig(&p)).collect::<wellfilt::Result<Vec<_>>>()?;
        Field::from_vec(b.clone(), vals)
    };
    let chk = check_certificate(&cert, &field_of, &anchor, cfg.order, cfg.radius.unwrap_or(cfg.order)).map_err(cfg_err)?;
    let q = cert.filter(cfg.order).map_err(cfg_err)?;
    let report = CertifyReport {
        label: cert.label().to_string(),
        dim: cert.dim(),
        order: cfg.order,
        theta: cert.theta(),
        rho: cert.rho(),
        horizon: cert.horizon(),
        l2_norm: q.norm(Norm::L2),
        l2_bound: chk.l2_bound,
        residual: chk.residual,
        residual_bound: chk.residual_bound,
        scale: chk.scale,
        passes: chk.passes(CERT_TOL),
    };
    let fpath = ctx.out_path(cfg.filter_out.as_deref().unwrap_or("filter.zdf"))?;
    io::save(q.field(), &fpath).map_err(with_code(EXIT_CHECKS))?;
    let rpath = ctx.out_path(cfg.report_out.as_deref().unwrap_or("certify_report.json"))?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::new(EXIT_CHECKS, e.to_string()))?;
    fs::write(&rpath, json).map_err(io_error(&rpath))?;
    if !ctx.cli.quiet {
        println!("{}", report.label);
        println!("|q|_2            = {:.6e}", report.l2_norm);
        println!("rho (2T+1)^-d/2  = {:.6e}", report.l2_bound);
        println!("residual         = {:.6e}", report.residual);
        println!("theta (2T+1)^-d/2 = {:.6e}", report.residual_bound);
    }
    if !report.passes {
        eprintln!("error: the filter violates its certificate bounds");
        return Ok(EXIT_CERTIFICATE);
    }
    Ok(EXIT_OK)
}
