//! The adaptive estimators and the formulas that bound their risk.

use num_complex::Complex64;

use crate::error::{param, Result};
use crate::field::{dft, Field, GridBox, Norm};
use crate::solver::{build_filtering_instance, build_prediction_instance, solve_with, SolveResult, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Filtering,
    /// Use only observations preceding the anchor by at least `kappa` in every coordinate.
    Prediction { kappa: usize },
}

/// The setup `(rho, T)` of the filtering estimator, or `(rho, kappa, T)` of the predictor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseSetup {
    pub rho: f64,
    pub order: usize,
    pub mode: Mode,
}

impl DenoiseSetup {
    pub fn filtering(rho: f64, order: usize) -> Result<Self> {
        let s = DenoiseSetup { rho, order, mode: Mode::Filtering };
        s.validate()?;
        Ok(s)
    }

    pub fn prediction(rho: f64, order: usize, kappa: usize) -> Result<Self> {
        let s = DenoiseSetup { rho, order, mode: Mode::Prediction { kappa } };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= 1.0) || !self.rho.is_finite() {
            return param(format!("rho must be a finite number >= 1, got {}", self.rho));
        }
        if let Mode::Prediction { kappa } = self.mode {
            if kappa > self.order {
                return param(format!("kappa = {kappa} exceeds T = {}", self.order));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub anchor: Vec<i64>,
    /// `None` for the `T = 0` filtering estimate, which is `y_t` itself.
    pub solve: Option<SolveResult>,
}

/// Observation window read at anchor `t`.
pub fn read_window(t: &[i64], setup: &DenoiseSetup) -> Result<GridBox> {
    let r = 4 * setup.order as i64;
    match setup.mode {
        Mode::Filtering => Ok(GridBox::around(t, 4 * setup.order)),
        Mode::Prediction { kappa } => {
            GridBox::new(t.iter().map(|x| x - r).collect(), t.iter().map(|x| x - kappa as i64).collect())
        }
    }
}

/// Filtering estimate at `t` with default solver options.
pub fn denoise_point(y: &Field, t: &[i64], setup: &DenoiseSetup) -> Result<Estimate> {
    denoise_point_with(y, t, setup, &SolverOptions::default())
}

/// Filtering estimate `(phi(Delta) y)_t`, `phi` the optimum of the filtering program.
pub fn denoise_point_with(y: &Field, t: &[i64], setup: &DenoiseSetup, opts: &SolverOptions) -> Result<Estimate> {
    setup.validate()?;
    if setup.mode != Mode::Filtering {
        return param("denoise_point needs a filtering setup");
    }
    if setup.order == 0 {
        return Ok(Estimate { value: y.at(t)?, anchor: t.to_vec(), solve: None });
    }
    let inst = build_filtering_instance(y, t, setup.order, setup.rho)?;
    let res = solve_with(&inst, opts)?;
    Ok(Estimate { value: res.phi.apply_at(inst.observations(), t)?, anchor: t.to_vec(), solve: Some(res) })
}

/// Prediction estimate at `t` with default solver options.
pub fn predict_point(y: &Field, t: &[i64], setup: &DenoiseSetup) -> Result<Estimate> {
    predict_point_with(y, t, setup, &SolverOptions::default())
}

/// Prediction estimate `(psi(Delta) y)_t`; reads only [`read_window`].
pub fn predict_point_with(y: &Field, t: &[i64], setup: &DenoiseSetup, opts: &SolverOptions) -> Result<Estimate> {
    setup.validate()?;
    let Mode::Prediction { kappa } = setup.mode else {
        return param("predict_point needs a prediction setup");
    };
    let inst = build_prediction_instance(y, t, setup.order, kappa, setup.rho)?;
    let res = solve_with(&inst, opts)?;
    Ok(Estimate { value: res.phi.apply_at(inst.observations(), t)?, anchor: t.to_vec(), solve: Some(res) })
}

/// Dispatch on the setup's mode.
pub fn estimate_point(y: &Field, t: &[i64], setup: &DenoiseSetup, opts: &SolverOptions) -> Result<Estimate> {
    match setup.mode {
        Mode::Filtering => denoise_point_with(y, t, setup, opts),
        Mode::Prediction { .. } => predict_point_with(y, t, setup, opts),
    }
}

/// `c(d) = 3 (2^d + 2^{3d-1})`.
pub fn c_d(d: usize) -> f64 {
    3.0 * (2f64.powi(d as i32) + 2f64.powi(3 * d as i32 - 1))
}

/// `c(d) rho^3 (theta + sigma rho sqrt(ln(2T+1) + 1)) (2T+1)^{-d/2}`.
pub fn risk_bound(d: usize, order: usize, rho: f64, theta: f64, sigma: f64) -> f64 {
    let n = (2 * order + 1) as f64;
    c_d(d) * rho.powi(3) * (theta + sigma * rho * (n.ln() + 1.0).sqrt()) * n.powf(-(d as f64) / 2.0)
}

/// `c(d) rho^3 (theta + rho stat) (2T+1)^{-d/2}`, with `stat` the output of
/// [`theta_stat`] on the realized noise.
pub fn pathwise_bound(d: usize, order: usize, rho: f64, theta: f64, stat: f64) -> f64 {
    let n = (2 * order + 1) as f64;
    c_d(d) * rho.powi(3) * (theta + rho * stat) * n.powf(-(d as f64) / 2.0)
}

/// `max_{|tau| <= 2T} |F_{2T}(window of e centred at t + tau)|_inf`.
pub fn theta_stat(e: &Field, t: &[i64], order: usize) -> Result<f64> {
    let d = e.dim();
    if t.len() != d {
        return param("anchor dimension does not match the field");
    }
    let r = 2 * order;
    e.grid().require_contains(&GridBox::around(t, 2 * r), "noise statistic window")?;
    let window = GridBox::centered(d, r);
    let mut best = 0.0f64;
    for tau in window.points() {
        let shift: Vec<i64> = t.iter().zip(&tau).map(|(a, b)| -(a + b)).collect();
        let w = e.shift(&shift).restrict(&window)?;
        best = best.max(dft(&w, r)?.norm(Norm::Linf));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constants() {
        assert_eq!(c_d(1), 18.0);
        assert_eq!(c_d(2), 108.0);
        assert_eq!(risk_bound(1, 4, 2.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn order_zero_returns_observation() {
        let y = Field::from_fn(GridBox::centered(1, 3), |p| c(p[0] as f64));
        let e = denoise_point(&y, &[2], &DenoiseSetup::filtering(1.0, 0).unwrap()).unwrap();
        assert_eq!(e.value, c(2.0));
        assert!(e.solve.is_none());
    }

    #[test]
    fn setup_validation() {
        assert!(DenoiseSetup::filtering(0.5, 1).is_err());
        assert!(DenoiseSetup::prediction(1.0, 1, 2).is_err());
        assert!(DenoiseSetup::prediction(1.0, 2, 2).is_ok());
    }

    #[test]
    fn noiseless_constant() {
        let y = Field::constant(GridBox::centered(1, 8), c(0.7));
        let opts = SolverOptions { tol: 1e-9, ..SolverOptions::default() };
        let e = denoise_point_with(&y, &[0], &DenoiseSetup::filtering(1.0, 1).unwrap(), &opts).unwrap();
        assert!((e.value - c(0.7)).norm() < 1e-7);
        let p = predict_point_with(&y, &[0], &DenoiseSetup::prediction(3f64.sqrt(), 2, 1).unwrap(), &opts).unwrap();
        assert!((p.value - c(0.7)).norm() < 1e-7, "{p:?}");
    }

    #[test]
    fn impulse_statistic() {
        let b = GridBox::centered(1, 12);
        let mut e = Field::zeros(b);
        e.set(&[1], c(1.0)).unwrap();
        let v = theta_stat(&e, &[0], 2).unwrap();
        assert!((v - 9f64.powf(-0.5)).abs() < 1e-14);
        assert_eq!(theta_stat(&Field::zeros(GridBox::centered(1, 8)), &[0], 2).unwrap(), 0.0);
        assert!(theta_stat(&Field::zeros(GridBox::centered(1, 7)), &[0], 2).is_err());
    }
}
