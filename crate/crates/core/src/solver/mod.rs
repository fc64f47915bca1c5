//! The convex program behind the adaptive estimators:
//! minimise `|F_{2T}(residual)|_inf` over filters `phi` with
//! `|phi|^*_{2T,1} <= c`, where the residual is `(1 - phi(Delta)) y`
//! recentred at the anchor.

mod dense;
mod pdhg;
mod project;

pub use project::project_l1_ball;

use num_complex::Complex64;

use crate::error::{domain, param, Error, Result};
use crate::field::{convolve, dft, unitary_transform, Field, Filter, FilterKind, GridBox, Norm, Spectrum};
use dense::{l1, Mat};
use pdhg::{Constraint, Problem, Settings};

/// Admissible filter support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// Centered cube `{|nu| <= 2T}`.
    Centered,
    /// One-sided cube `{kappa <= nu_j <= 2T}`.
    OneSided { kappa: usize },
}

/// `2^{d/2} rho^2 (2T+1)^{-d/2}`.
pub fn l1_bound(d: usize, t_alg: usize, rho: f64) -> f64 {
    2f64.powf(d as f64 / 2.0) * rho * rho * ((2 * t_alg + 1) as f64).powf(-(d as f64) / 2.0)
}

#[derive(Debug, Clone)]
pub struct Instance {
    t_alg: usize,
    anchor: Vec<i64>,
    support: Support,
    l1_bound: f64,
    y: Field,
    /// Residual points relative to the anchor.
    residual_box: GridBox,
    /// Support points of the filter.
    support_box: GridBox,
    b: Vec<Complex64>,
    /// Filtering: operator on `Phi = F phi`. Prediction: operator on `phi`.
    op: Mat,
    /// Prediction only: `F E`, with `E` the embedding of the support.
    embed: Option<Mat>,
}

fn check_common(y: &Field, t: &[i64], rho: f64) -> Result<()> {
    if t.len() != y.dim() {
        return param(format!("anchor has dimension {} but observations have {}", t.len(), y.dim()));
    }
    if !(rho >= 1.0) || !rho.is_finite() {
        return param(format!("rho must be a finite number >= 1, got {rho}"));
    }
    Ok(())
}

/// Instance of the filtering program at anchor `t`; reads `{|tau - t| <= 4T}`.
pub fn build_filtering_instance(y: &Field, t: &[i64], t_alg: usize, rho: f64) -> Result<Instance> {
    check_common(y, t, rho)?;
    if t_alg == 0 {
        return param("filtering instances need T >= 1");
    }
    let d = y.dim();
    let reads = GridBox::around(t, 4 * t_alg);
    build(y, t, t_alg, rho, Support::Centered, reads, GridBox::centered(d, 2 * t_alg), GridBox::centered(d, 2 * t_alg))
}

/// Instance of the prediction program at anchor `t`; reads
/// `{kappa <= t_j - tau_j <= 4T}` only.
///
/// The residual is taken at the points `t + tau` with `kappa <= -tau_j <= 2T`,
/// so every observation entering the program precedes `t` by at least `kappa`.
pub fn build_prediction_instance(y: &Field, t: &[i64], t_alg: usize, kappa: usize, rho: f64) -> Result<Instance> {
    check_common(y, t, rho)?;
    let r = 2 * t_alg;
    if kappa > r {
        return param(format!("kappa = {kappa} exceeds 2T = {r}: the support is empty"));
    }
    let d = y.dim();
    let (r, k) = (r as i64, kappa as i64);
    let reads = GridBox::new(t.iter().map(|x| x - 2 * r).collect(), t.iter().map(|x| x - k).collect())?;
    let residual_box = GridBox::cube(d, -r, -k)?;
    let support_box = GridBox::cube(d, k, r)?;
    build(y, t, t_alg, rho, Support::OneSided { kappa }, reads, residual_box, support_box)
}

#[allow(clippy::too_many_arguments)]
fn build(
    y: &Field,
    t: &[i64],
    t_alg: usize,
    rho: f64,
    support: Support,
    reads: GridBox,
    residual_box: GridBox,
    support_box: GridBox,
) -> Result<Instance> {
    if !y.grid().contains_box(&reads) {
        return domain(format!("observations on {} do not cover the window {reads} read at anchor {t:?}", y.grid()));
    }
    let d = y.dim();
    let r = 2 * t_alg;
    let window = GridBox::centered(d, r);
    let y = y.restrict(&reads)?;
    let m = window.len();
    let n = support_box.len();

    let mut b: Vec<Complex64> = window
        .points()
        .map(|tau| {
            if residual_box.contains(&tau) {
                let p: Vec<i64> = tau.iter().zip(t).map(|(a, b)| a + b).collect();
                y.get(&p).expect("residual point inside the read window")
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    unitary_transform(&mut b, r, d, false);

    let mut a = Mat::zeros(m, n);
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for (k, nu) in support_box.points().enumerate() {
        for (i, tau) in window.points().enumerate() {
            col[i] = if residual_box.contains(&tau) {
                let p: Vec<i64> = tau.iter().zip(&nu).zip(t).map(|((a, v), s)| s + a - v).collect();
                y.get(&p).expect("convolution read inside the read window")
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        unitary_transform(&mut col, r, d, false);
        a.set_col(k, &col);
    }

    let (op, embed) = match support {
        Support::Centered => {
            // K = A F^H, row by row: K[i,:] = conj(F conj(A[i,:]))
            let mut k = Mat::zeros(m, n);
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..m {
                for (dst, src) in row.iter_mut().zip(a.row(i)) {
                    *dst = src.conj();
                }
                unitary_transform(&mut row, r, d, false);
                for (j, v) in row.iter().enumerate() {
                    k.data[i * n + j] = v.conj();
                }
            }
            (k, None)
        }
        Support::OneSided { .. } => {
            let mut e = Mat::zeros(m, n);
            let mut col = vec![Complex64::new(0.0, 0.0); m];
            for (k, nu) in support_box.points().enumerate() {
                col.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                col[window.offset(&nu).expect("support inside the window")] = Complex64::new(1.0, 0.0);
                unitary_transform(&mut col, r, d, false);
                e.set_col(k, &col);
            }
            (a, Some(e))
        }
    };

    Ok(Instance {
        t_alg,
        anchor: t.to_vec(),
        support,
        l1_bound: l1_bound(d, t_alg, rho),
        y,
        residual_box,
        support_box,
        b,
        op,
        embed,
    })
}

impl Instance {
    pub fn dim(&self) -> usize {
        self.y.dim()
    }

    pub fn t_alg(&self) -> usize {
        self.t_alg
    }

    /// Half-order `2T` of the residual transform and of the filter.
    pub fn order(&self) -> usize {
        2 * self.t_alg
    }

    pub fn anchor(&self) -> &[i64] {
        &self.anchor
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn l1_bound(&self) -> f64 {
        self.l1_bound
    }

    /// The observation window the instance reads, in absolute coordinates.
    pub fn read_window(&self) -> &GridBox {
        self.y.grid()
    }

    pub fn observations(&self) -> &Field {
        &self.y
    }

    pub fn filter_kind(&self) -> FilterKind {
        match self.support {
            Support::Centered => FilterKind::TwoSided,
            Support::OneSided { kappa } => FilterKind::OneSided { kappa },
        }
    }

    /// Transform `b` of the recentred observations.
    pub fn target(&self) -> Spectrum {
        Spectrum::new(self.order(), self.dim(), self.b.clone()).expect("window size")
    }

    /// Coerce `phi` onto the admissible support; coefficients outside it are a domain error.
    fn admissible(&self, phi: &Filter) -> Result<Filter> {
        if phi.dim() != self.dim() {
            return domain("filter dimension does not match the instance");
        }
        let out = Field::from_fn(self.support_box.clone(), |p| phi.coefficient(p));
        for (p, v) in phi.field().iter() {
            if v != Complex64::new(0.0, 0.0) && !self.support_box.contains(&p) {
                return domain(format!("filter coefficient at {p:?} lies outside the admissible support {}", self.support_box));
            }
        }
        match self.support {
            Support::Centered => Filter::two_sided(out, self.order()),
            Support::OneSided { kappa } => Filter::one_sided(out, kappa, self.order()),
        }
    }

    /// `F E g` for `g` on the support.
    fn support_spectrum(&self, g: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        let window = GridBox::centered(d, self.order());
        let mut full = vec![Complex64::new(0.0, 0.0); window.len()];
        for (v, nu) in g.iter().zip(self.support_box.points()) {
            full[window.offset(&nu).unwrap()] = *v;
        }
        unitary_transform(&mut full, self.order(), d, false);
        full
    }

    /// `F_{2T} E A^H u`, with `A` acting on spatial filter coefficients.
    fn adjoint_spectrum(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut g = vec![Complex64::new(0.0, 0.0); self.op.cols];
        self.op.apply_adjoint(u, &mut g);
        match self.support {
            Support::Centered => g,
            Support::OneSided { .. } => self.support_spectrum(&g),
        }
    }
}

/// `J(phi) = |Delta^{-t} (1 - phi(Delta)) y|^*_{2T,inf}`, on the residual
/// points of the instance, evaluated directly by convolution and transform.
pub fn objective(inst: &Instance, phi: &Filter) -> Result<f64> {
    let phi = inst.admissible(phi)?;
    let eval = inst.residual_box.translate(&inst.anchor);
    let filtered = convolve(&phi, &inst.y, &eval)?;
    let resid = inst.y.restrict(&eval)?.sub(&filtered)?;
    let neg: Vec<i64> = inst.anchor.iter().map(|v| -v).collect();
    let window = GridBox::centered(inst.dim(), inst.order());
    let centred = resid.shift(&neg).embed(&window)?;
    Ok(dft(&centred, inst.order())?.norm(Norm::Linf))
}

/// `Re<u, b> - c |F_{2T} E A^H u|_inf`, a lower bound on the optimum for any `|u|_1 <= 1`.
pub fn dual_lower_bound(inst: &Instance, u: &Spectrum) -> Result<f64> {
    if u.order() != inst.order() || u.dim() != inst.dim() {
        return param("dual point has the wrong order or dimension");
    }
    let s = u.norm(Norm::L1);
    if s > 1.0 + 1e-12 {
        return param(format!("dual point has l1 norm {s} > 1"));
    }
    let lin: f64 = u.values().iter().zip(&inst.b).map(|(u, b)| (u.conj() * b).re).sum();
    let g = inst.adjoint_spectrum(u.values());
    Ok(lin - inst.l1_bound * dense::linf(&g))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Absolute duality-gap target.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterations between gap evaluations.
    pub check_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-6, max_iter: 20_000, check_every: 64 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub phi: Filter,
    pub objective: f64,
    pub dual_bound: f64,
    pub gap: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// The dual point that produced `dual_bound`.
    pub dual: Spectrum,
}

pub fn solve(inst: &Instance, tol: f64) -> Result<SolveResult> {
    solve_with(inst, &SolverOptions { tol, ..SolverOptions::default() })
}

pub fn solve_with(inst: &Instance, opts: &SolverOptions) -> Result<SolveResult> {
    if !(opts.tol > 0.0) {
        return param(format!("tol must be positive, got {}", opts.tol));
    }
    if opts.check_every == 0 {
        return param("check_every must be positive");
    }
    let problem = Problem {
        a: &inst.op,
        b: &inst.b,
        c: inst.l1_bound,
        constraint: match &inst.embed {
            None => Constraint::Ball,
            Some(e) => Constraint::Split(e),
        },
    };
    let out = pdhg::run(&problem, &Settings { tol: opts.tol, max_iter: opts.max_iter, check_every: opts.check_every });

    let d = inst.dim();
    let phi = match inst.support {
        Support::Centered => {
            let mut x = out.x.clone();
            unitary_transform(&mut x, inst.order(), d, true);
            Filter::two_sided(Field::from_vec(inst.support_box.clone(), x)?, inst.order())?
        }
        Support::OneSided { kappa } => {
            Filter::one_sided(Field::from_vec(inst.support_box.clone(), out.x.clone())?, kappa, inst.order())?
        }
    };
    let objective = objective(inst, &phi)?;
    let dual_bound = out.dual;
    let result = SolveResult {
        phi,
        objective,
        dual_bound,
        gap: objective - dual_bound,
        iterations: out.iterations,
        restarts: out.restarts,
        converged: out.converged && objective - dual_bound <= opts.tol,
        dual: Spectrum::new(inst.order(), d, out.u)?,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(Error::NotConverged(Box::new(result)))
    }
}

/// `|phi|^*_{2T,1}` for a filter of the instance's support.
pub fn constraint_value(inst: &Instance, phi: &Filter) -> Result<f64> {
    let phi = inst.admissible(phi)?;
    let g: Vec<Complex64> = inst.support_box.points().map(|p| phi.coefficient(&p)).collect();
    Ok(l1(&inst.support_spectrum(&g)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn zero_observations() {
        let y = Field::zeros(GridBox::centered(1, 8));
        let inst = build_filtering_instance(&y, &[0], 2, 1.0).unwrap();
        let r = solve(&inst, 1e-6).unwrap();
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.gap, 0.0);
        assert!(r.phi.norm(Norm::L1) == 0.0);
    }

    #[test]
    fn bound_value() {
        let v = l1_bound(1, 8, 2.0);
        assert!((v - 2f64.sqrt() * 4.0 / 17f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_signal_has_zero_optimum() {
        let y = Field::constant(GridBox::centered(1, 4), c(1.5));
        let inst = build_filtering_instance(&y, &[0], 1, 1.0).unwrap();
        let avg = Filter::two_sided(Field::constant(GridBox::centered(1, 2), c(0.2)), 2).unwrap();
        let cv = constraint_value(&inst, &avg).unwrap();
        assert!((cv - 5f64.powf(-0.5)).abs() < 1e-14);
        assert!(cv <= inst.l1_bound());
        assert!(objective(&inst, &avg).unwrap() < 1e-14);
        let r = solve(&inst, 1e-9).unwrap();
        assert!(r.objective <= 1e-9);
    }

    #[test]
    fn coverage_and_parameters() {
        let y = Field::zeros(GridBox::centered(1, 3));
        assert!(matches!(build_filtering_instance(&y, &[0], 1, 1.0), Err(Error::Domain(_))));
        let y = Field::zeros(GridBox::centered(1, 8));
        assert!(matches!(build_filtering_instance(&y, &[0], 1, 0.5), Err(Error::Param(_))));
        assert!(matches!(build_prediction_instance(&y, &[8], 1, 3, 1.0), Err(Error::Param(_))));
        // prediction reads only [t - 4T, t - kappa]
        let y = Field::zeros(GridBox::new(vec![-4], vec![-1]).unwrap());
        assert!(build_prediction_instance(&y, &[0], 1, 1, 1.0).is_ok());
    }

    #[test]
    fn one_sided_average_on_constants() {
        let y = Field::constant(GridBox::new(vec![-10], vec![10]).unwrap(), c(1.0));
        let inst = build_prediction_instance(&y, &[5], 1, 1, 1.0).unwrap();
        let psi = Filter::one_sided(Field::constant(GridBox::new(vec![1], vec![2]).unwrap(), c(0.5)), 1, 2).unwrap();
        assert!(objective(&inst, &psi).unwrap() < 1e-15);
    }

    #[test]
    fn dual_checks() {
        let y = Field::from_fn(GridBox::centered(1, 6), |p| Complex64::new(p[0] as f64 * 0.3, 1.0));
        let inst = build_filtering_instance(&y, &[0], 1, 1.0).unwrap();
        let zero = Spectrum::zeros(2, 1);
        assert_eq!(dual_lower_bound(&inst, &zero).unwrap(), 0.0);
        let mut big = Spectrum::zeros(2, 1);
        big.values_mut()[0] = c(1.5);
        assert!(dual_lower_bound(&inst, &big).is_err());
    }
}
