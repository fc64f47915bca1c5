//! Certificates of well-filteredness / well-predictedness and the calculus
//! that builds new ones from old.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::exppoly::ExpPolynomial;
use super::harmonic::{harmonic_filter, harmonic_filter_order, RegularOperator};
use super::filters::{annihilating_combination, axis_factors, exp_filter_1d, poly_filter, predictor_exp_poly_filter};
use crate::error::{param, Result};
use crate::field::{Field, Filter, FilterKind, GridBox, Norm};

/// Which estimation problem a certificate speaks to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertKind {
    Filtering,
    /// One-sided filters on `{kappa <= tau_j <= T}`, available for `T >= t0`.
    Prediction { kappa: usize, t0: usize },
}

type Builder = Arc<dyn Fn(usize) -> Result<Filter> + Send + Sync>;

/// A filter family `q^(T)` with the parameters it certifies:
/// `|q^(T)|_2 <= rho (2T+1)^{-d/2}` and reproduction error at most
/// `theta (2T+1)^{-d/2}` on `{|tau - t| <= L}`, for all admissible `T`.
#[derive(Clone)]
pub struct Certificate {
    dim: usize,
    theta: f64,
    rho: f64,
    /// `None` is an unbounded horizon.
    horizon: Option<usize>,
    kind: CertKind,
    label: String,
    builder: Builder,
}

impl fmt::Debug for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Certificate")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("theta", &self.theta)
            .field("rho", &self.rho)
            .field("horizon", &self.horizon)
            .field("kind", &self.kind)
            .finish()
    }
}

fn identity_of_order(d: usize, order: usize) -> Filter {
    Filter::impulse(d).reshaped(FilterKind::TwoSided, order).expect("impulse fits")
}

impl Certificate {
    /// Assemble a certificate from a builder; the builder is trusted to honour
    /// the stated parameters, which [`check_certificate`] verifies numerically.
    pub fn from_builder(
        dim: usize,
        theta: f64,
        rho: f64,
        horizon: Option<usize>,
        kind: CertKind,
        label: impl Into<String>,
        builder: impl Fn(usize) -> Result<Filter> + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(rho >= 1.0) || !(theta >= 0.0) {
            return param(format!("certificate needs rho >= 1 and theta >= 0, got rho {rho}, theta {theta}"));
        }
        if let CertKind::Prediction { kappa, t0 } = kind {
            if t0 < kappa {
                return param("prediction certificates need T0 >= kappa");
            }
        }
        Ok(Certificate { dim, theta, rho, horizon, kind, label: label.into(), builder: Arc::new(builder) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn horizon(&self) -> Option<usize> {
        self.horizon
    }

    pub fn kind(&self) -> CertKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn min_order(&self) -> usize {
        match self.kind {
            CertKind::Filtering => 0,
            CertKind::Prediction { t0, .. } => t0,
        }
    }

    pub fn admits(&self, order: usize) -> bool {
        order >= self.min_order() && self.horizon.is_none_or(|l| order <= l)
    }

    /// `q^(T)`.
    pub fn filter(&self, order: usize) -> Result<Filter> {
        if !self.admits(order) {
            return param(format!(
                "order {order} is outside the certified range [{}, {}] of {}",
                self.min_order(),
                self.horizon.map_or("inf".to_string(), |l| l.to_string()),
                self.label
            ));
        }
        (self.builder)(order)
    }

    /// `rho (2T+1)^{-d/2}`.
    pub fn l2_bound(&self, order: usize) -> f64 {
        self.rho * ((2 * order + 1) as f64).powf(-(self.dim as f64) / 2.0)
    }

    /// `theta (2T+1)^{-d/2}`.
    pub fn residual_bound(&self, order: usize) -> f64 {
        self.theta * ((2 * order + 1) as f64).powf(-(self.dim as f64) / 2.0)
    }

    /// Exact filtering certificate for every exponential polynomial sharing
    /// the frequency sets and degrees of `p`.
    ///
    /// Axis `j` contributes `(2N_j - 1)^{1/2} 2^{3N_j/2}` to `rho`, or `sqrt 2`
    /// when `N_j = 1`. Orders too small for the product construction use the
    /// identity filter.
    pub fn exp_polynomial(p: &ExpPolynomial) -> Result<Self> {
        let sizes = p.partial_sizes();
        let rho: f64 = sizes
            .iter()
            .map(|&n| if n == 1 { 2f64.sqrt() } else { ((2 * n - 1) as f64).sqrt() * 2f64.powf(1.5 * n as f64) })
            .product();
        let d = p.dim();
        let shape = p.clone();
        Certificate::from_builder(d, 0.0, rho, None, CertKind::Filtering, format!("exp-poly N={sizes:?}"), move |t| {
            let parts = axis_factors(&shape)
                .iter()
                .map(|freqs| if t < freqs.len() { Ok(identity_of_order(1, t)) } else { axis_only(freqs, t) })
                .collect::<Result<Vec<_>>>()?;
            let mut it = parts.into_iter();
            let mut q = it.next().expect("at least one axis");
            for f in it {
                q = q.tensor(&f)?;
            }
            Ok(q)
        })
    }

    /// Exact filtering certificate for algebraic polynomials of degree `<= m`
    /// in every variable, with `rho = (16 m)^d`.
    pub fn polynomial(d: usize, m: usize) -> Result<Self> {
        let rho = (16.0 * m.max(1) as f64).powi(d as i32);
        Certificate::from_builder(d, 0.0, rho, None, CertKind::Filtering, format!("poly m={m}"), move |t| {
            if 2 * t + 1 < m + 1 {
                Ok(identity_of_order(d, t))
            } else {
                poly_filter(d, m, t)
            }
        })
    }

    /// Exact prediction certificate for a quasi-stable exponential polynomial:
    /// `rho = prod (2N_j - 1)^{1/2} 2^{N_j} max(2, 2 kappa + 1)^{N_j/2}`,
    /// `T0 = kappa max N_j`.
    pub fn quasi_stable(p: &ExpPolynomial, kappa: usize) -> Result<Self> {
        if !p.is_quasi_stable() {
            return param("prediction certificates need a quasi-stable exponential polynomial");
        }
        let sizes = p.partial_sizes();
        let spread = (2 * kappa + 1).max(2) as f64;
        let rho: f64 = sizes
            .iter()
            .map(|&n| if n == 1 { spread.sqrt() } else { ((2 * n - 1) as f64).sqrt() * 2f64.powi(n as i32) * spread.powf(n as f64 / 2.0) })
            .product();
        let t0 = kappa * sizes.iter().max().unwrap();
        let shape = p.clone();
        Certificate::from_builder(
            p.dim(),
            0.0,
            rho,
            None,
            CertKind::Prediction { kappa, t0 },
            format!("quasi-stable N={sizes:?} kappa={kappa}"),
            move |t| predictor_exp_poly_filter(&shape, t, kappa),
        )
    }

    /// Certificate for fields fixed by `op`, using [`harmonic_filter`] with the
    /// largest `n` whose order fits `T` (the identity below the first one).
    /// `rho` is measured over `T <= t_max`, which is also the horizon.
    pub fn harmonic(op: &RegularOperator, c24: usize, t_max: usize) -> Result<Self> {
        let d = op.dim();
        let mut table: Vec<Filter> = Vec::with_capacity(t_max + 1);
        let mut best: Option<Filter> = None;
        let mut n = 1;
        for t in 0..=t_max {
            while harmonic_filter_order(op, n, c24) <= t {
                best = Some(harmonic_filter(op, n, c24)?);
                n += 1;
            }
            table.push(match &best {
                Some(q) => q.reshaped(FilterKind::TwoSided, t)?,
                None => identity_of_order(d, t),
            });
        }
        let rho = table
            .iter()
            .map(|q| q.norm(Norm::L2) * ((2 * q.order() + 1) as f64).powf(d as f64 / 2.0))
            .fold(1.0f64, f64::max);
        let table = Arc::new(table);
        Certificate::from_builder(d, 0.0, rho, Some(t_max), CertKind::Filtering, format!("harmonic c24={c24}"), move |t| {
            Ok(table[t].clone())
        })
    }
}

fn axis_only(freqs: &[Complex64], order: usize) -> Result<Filter> {
    let per = order / freqs.len();
    let factors: Vec<Filter> = freqs.iter().map(|w| exp_filter_1d(*w, per)).collect();
    annihilating_combination(&factors, FilterKind::TwoSided, order)
}

/// Certificate of `sum_j lambda_j s^j` from certificates of the `s^j`.
///
/// With `m >= 2` the filter of order `T+` is `1 - prod_j (1 - q^j)` on
/// per-factor order `floor(T+/m)`, and
/// `theta+ = (2m-1)^{d/2} 2^{m-1} prod rho * sum theta_j |lambda_j| / rho_j`,
/// `rho+ = (2m-1)^{d/2} 2^m prod rho`, `L+ = floor(L/2)`.
pub fn combine_certificates(certs: &[Certificate], lambdas: &[Complex64]) -> Result<Certificate> {
    if certs.is_empty() {
        return param("combine needs at least one certificate");
    }
    if certs.len() != lambdas.len() {
        return param("one coefficient per certificate is required");
    }
    let d = certs[0].dim;
    if certs.iter().any(|c| c.dim != d) {
        return param("certificates must share a dimension");
    }
    let m = certs.len();
    if m == 1 {
        let mut c = certs[0].clone();
        c.theta *= lambdas[0].norm();
        return Ok(c);
    }
    let kind = match certs[0].kind {
        CertKind::Filtering => {
            if certs.iter().any(|c| c.kind != CertKind::Filtering) {
                return param("cannot combine filtering and prediction certificates");
            }
            CertKind::Filtering
        }
        CertKind::Prediction { .. } => {
            let mut kappa = usize::MAX;
            let mut t0 = 0;
            for c in certs {
                match c.kind {
                    CertKind::Prediction { kappa: k, t0: t } => {
                        kappa = kappa.min(k);
                        t0 = t0.max(t);
                    }
                    CertKind::Filtering => return param("cannot combine filtering and prediction certificates"),
                }
            }
            CertKind::Prediction { kappa, t0: m * t0 }
        }
    };
    let prod: f64 = certs.iter().map(|c| c.rho).product();
    let lead = ((2 * m - 1) as f64).powf(d as f64 / 2.0);
    let theta_sum: f64 = certs.iter().zip(lambdas).map(|(c, l)| c.theta * l.norm() / c.rho).sum();
    let theta = lead * 2f64.powi(m as i32 - 1) * prod * theta_sum;
    let rho = lead * 2f64.powi(m as i32) * prod;
    let horizon = certs.iter().filter_map(|c| c.horizon).min().map(|l| l / 2);
    let parts: Vec<Certificate> = certs.to_vec();
    let out_kind = match kind {
        CertKind::Filtering => FilterKind::TwoSided,
        CertKind::Prediction { kappa, .. } => FilterKind::OneSided { kappa },
    };
    let label = format!("combine({})", parts.iter().map(|c| c.label.as_str()).collect::<Vec<_>>().join(", "));
    Certificate::from_builder(d, theta, rho, horizon, kind, label, move |t| {
        let per = t / m;
        let factors = parts.iter().map(|c| c.filter(per)).collect::<Result<Vec<_>>>()?;
        annihilating_combination(&factors, out_kind, t)
    })
}

/// Filters `exp(i omega . tau) q_tau`; certifies `exp(i (omega . tau + phase)) s_tau`
/// for any phase, with unchanged parameters.
pub fn modulate_certificate(cert: &Certificate, omega: &[f64]) -> Result<Certificate> {
    if omega.len() != cert.dim {
        return param("modulation frequency has the wrong dimension");
    }
    let inner = cert.clone();
    let w = omega.to_vec();
    let label = format!("modulate({}, {omega:?})", cert.label);
    Certificate::from_builder(cert.dim, cert.theta, cert.rho, cert.horizon, cert.kind, label, move |t| inner.filter(t)?.modulate(&w))
}

/// Certificate of the cylinder extension `s+(tau_1..tau_{d+}) = s(tau_1..tau_d)`.
///
/// Filtering: `q+ = (2T+1)^{-(d+ - d)} q` on the slab, `rho+ = rho`.
/// Prediction: the extra axes are averaged over `kappa..=T`, and
/// `rho+ = max(2, 2 kappa + 1)^{(d+ - d)/2} rho`. In both cases
/// `theta+ = (2L+1)^{(d+ - d)/2} theta`.
pub fn lift_certificate(cert: &Certificate, d_plus: usize) -> Result<Certificate> {
    let d = cert.dim;
    if d_plus <= d {
        return param(format!("lift target dimension {d_plus} must exceed {d}"));
    }
    let extra = d_plus - d;
    let theta = if cert.theta == 0.0 {
        0.0
    } else {
        match cert.horizon {
            Some(l) => ((2 * l + 1) as f64).powf(extra as f64 / 2.0) * cert.theta,
            None => f64::INFINITY,
        }
    };
    let rho = match cert.kind {
        CertKind::Filtering => cert.rho,
        CertKind::Prediction { kappa, .. } => ((2 * kappa + 1).max(2) as f64).powf(extra as f64 / 2.0) * cert.rho,
    };
    let kind = cert.kind;
    let inner = cert.clone();
    let label = format!("lift({}, {d_plus})", cert.label);
    let mut out = Certificate::from_builder(d_plus, 0.0, rho, cert.horizon, kind, label, move |t| {
        let q = inner.filter(t)?;
        let avg = match kind {
            CertKind::Filtering => {
                let n = GridBox::centered(extra, t);
                let w = 1.0 / n.len() as f64;
                Filter::two_sided(Field::constant(n, Complex64::new(w, 0.0)), t)?
            }
            CertKind::Prediction { kappa, .. } => {
                let n = GridBox::cube(extra, kappa as i64, t as i64)?;
                let w = 1.0 / n.len() as f64;
                Filter::one_sided(Field::constant(n, Complex64::new(w, 0.0)), kappa, t)?
            }
        };
        q.tensor(&avg)?.reshaped(q.kind(), t)
    })?;
    out.theta = theta;
    Ok(out)
}

/// Certificate of `s'(tau') s''(tau'')` from exact certificates of the factors; `rho = rho' rho''`.
pub fn tensor_certificate(a: &Certificate, b: &Certificate) -> Result<Certificate> {
    if a.theta != 0.0 || b.theta != 0.0 {
        return param("tensor products need exact (theta = 0) certificates");
    }
    let kind = match (a.kind, b.kind) {
        (CertKind::Filtering, CertKind::Filtering) => CertKind::Filtering,
        (CertKind::Prediction { kappa: k1, t0: t1 }, CertKind::Prediction { kappa: k2, t0: t2 }) => {
            CertKind::Prediction { kappa: k1.min(k2), t0: t1.max(t2) }
        }
        _ => return param("cannot tensor filtering and prediction certificates"),
    };
    let horizon = match (a.horizon, b.horizon) {
        (None, h) | (h, None) => h,
        (Some(x), Some(y)) => Some(x.min(y)),
    };
    let (qa, qb) = (a.clone(), b.clone());
    let label = format!("tensor({}, {})", a.label, b.label);
    Certificate::from_builder(a.dim + b.dim, 0.0, a.rho * b.rho, horizon, kind, label, move |t| {
        let q = qa.filter(t)?.tensor(&qb.filter(t)?)?;
        let fk = match kind {
            CertKind::Filtering => FilterKind::TwoSided,
            CertKind::Prediction { kappa, .. } => FilterKind::OneSided { kappa },
        };
        q.reshaped(fk, t)
    })
}

/// Numerical audit of one certificate at one order.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck {
    pub order: usize,
    pub l2_norm: f64,
    pub l2_bound: f64,
    /// `max |s - q(Delta) s|` over the test box.
    pub residual: f64,
    pub residual_bound: f64,
    /// `max |s|` over the test box, the scale for relative tolerances.
    pub scale: f64,
}

impl CertificateCheck {
    /// Norm within `(1 + rel)` of its bound and residual within
    /// `theta (2T+1)^{-d/2} + rel * max(1, scale)`.
    pub fn passes(&self, rel: f64) -> bool {
        self.l2_norm <= self.l2_bound * (1.0 + rel) && self.residual <= self.residual_bound + rel * self.scale.max(1.0)
    }
}

/// Evaluate `q^(T)` on a signal over `{|tau - t| <= radius}`, with the
/// radius capped by the certificate's horizon.
pub fn check_certificate(
    cert: &Certificate,
    signal: &dyn Fn(&GridBox) -> Result<Field>,
    anchor: &[i64],
    order: usize,
    radius: usize,
) -> Result<CertificateCheck> {
    let q = cert.filter(order)?;
    let radius = cert.horizon.map_or(radius, |l| radius.min(l));
    let test = GridBox::around(anchor, radius);
    let reads = test.reach_of(q.field().grid());
    let data = signal(&reads)?;
    let out = q.apply(&data, &test)?;
    let truth = signal(&test)?;
    Ok(CertificateCheck {
        order,
        l2_norm: q.norm(Norm::L2),
        l2_bound: cert.l2_bound(order),
        residual: out.max_abs_diff(&truth)?,
        residual_bound: cert.residual_bound(order),
        scale: truth.max_abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::exppoly::Monomial;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn audit(cert: &Certificate, p: &ExpPolynomial, orders: impl IntoIterator<Item = usize>) {
        let anchor = vec![3; cert.dim()];
        for t in orders {
            let chk = check_certificate(cert, &|b| p.eval(b), &anchor, t, 3).unwrap();
            assert!(chk.passes(1e-9), "{} at T={t}: {chk:?}", cert.label());
        }
    }

    fn wave(d: usize, im: f64) -> ExpPolynomial {
        ExpPolynomial::exponential(cx(1.0, 0.0), vec![cx(0.0, im); d])
    }

    #[test]
    fn exp_poly_certificate_is_exact() {
        let p = ExpPolynomial::new(vec![
            Monomial::new(cx(1.0, 0.5), vec![1], vec![cx(0.0, 0.3)]).unwrap(),
            Monomial::new(cx(-2.0, 0.0), vec![0], vec![cx(-0.1, 1.1)]).unwrap(),
        ])
        .unwrap();
        let cert = Certificate::exp_polynomial(&p).unwrap();
        assert_eq!(cert.theta(), 0.0);
        audit(&cert, &p, 0..12);
    }

    #[test]
    fn combine_two_waves() {
        let a = Certificate::exp_polynomial(&wave(1, 0.4)).unwrap();
        let b = Certificate::exp_polynomial(&wave(1, -1.3)).unwrap();
        let lam = [cx(2.0, 0.0), cx(0.0, -1.0)];
        let c = combine_certificates(&[a.clone(), b], &lam).unwrap();
        assert_eq!(c.theta(), 0.0);
        assert!((c.rho() - 8.0 * 3f64.sqrt()).abs() < 1e-12);
        let sum = ExpPolynomial::new(vec![
            Monomial::exponential(lam[0], vec![cx(0.0, 0.4)]),
            Monomial::exponential(lam[1], vec![cx(0.0, -1.3)]),
        ])
        .unwrap();
        audit(&c, &sum, 0..16);
        let same = combine_certificates(std::slice::from_ref(&a), &[cx(1.0, 0.0)]).unwrap();
        assert_eq!((same.theta(), same.rho()), (a.theta(), a.rho()));
        assert!(combine_certificates(&[], &[]).is_err());
    }

    #[test]
    fn modulate_lift_tensor() {
        let constant = Certificate::exp_polynomial(&ExpPolynomial::constant(1, cx(1.0, 0.0))).unwrap();
        let m = modulate_certificate(&constant, &[0.9]).unwrap();
        audit(&m, &wave(1, 0.9), 1..8);
        for t in 1..6 {
            assert!((m.filter(t).unwrap().norm(Norm::L2) - constant.filter(t).unwrap().norm(Norm::L2)).abs() < 1e-15);
        }
        let lifted = lift_certificate(&m, 2).unwrap();
        let cyl = ExpPolynomial::exponential(cx(1.0, 0.0), vec![cx(0.0, 0.9), cx(0.0, 0.0)]);
        audit(&lifted, &cyl, 1..6);
        let tp = tensor_certificate(&m, &Certificate::exp_polynomial(&wave(1, -0.2)).unwrap()).unwrap();
        let prod = ExpPolynomial::exponential(cx(1.0, 0.0), vec![cx(0.0, 0.9), cx(0.0, -0.2)]);
        audit(&tp, &prod, 1..6);
        let a = tp.filter(4).unwrap().norm(Norm::L2);
        let b = m.filter(4).unwrap().norm(Norm::L2) * exp_filter_1d(cx(0.0, -0.2), 4).norm(Norm::L2);
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn polynomial_and_predictor() {
        let p = ExpPolynomial::new(vec![Monomial::new(cx(0.5, 0.0), vec![3, 1], vec![cx(0.0, 0.0); 2]).unwrap()]).unwrap();
        let cert = Certificate::polynomial(2, 3).unwrap();
        audit(&cert, &p, 0..8);
        let q = ExpPolynomial::new(vec![
            Monomial::exponential(cx(1.0, 0.0), vec![cx(-0.2, 0.5)]),
            Monomial::new(cx(0.3, 0.0), vec![1], vec![cx(0.0, 0.0)]).unwrap(),
        ])
        .unwrap();
        let pc = Certificate::quasi_stable(&q, 2).unwrap();
        assert_eq!(pc.kind(), CertKind::Prediction { kappa: 2, t0: 8 });
        assert!(pc.filter(7).is_err());
        audit(&pc, &q, 8..16);
        for t in 8..16 {
            let f = pc.filter(t).unwrap();
            assert!(f.field().iter().all(|(tau, v)| v.norm() == 0.0 || (2..=t as i64).contains(&tau[0])));
        }
    }

    #[test]
    fn harmonic_certificate_reproduces_saddle() {
        let op = RegularOperator::averaging(2).unwrap();
        let cert = Certificate::harmonic(&op, 1, 12).unwrap();
        let saddle = |b: &GridBox| Ok(Field::from_fn(b.clone(), |p| cx((p[0] * p[0] - p[1] * p[1]) as f64, 0.0)));
        for t in 0..=12 {
            let chk = check_certificate(&cert, &saddle, &[1, -2], t, 2).unwrap();
            assert!(chk.passes(1e-9), "T={t}: {chk:?}");
        }
        assert!(cert.filter(13).is_err());
    }
}
