//! Signal families and the certificate filters that reproduce them.

mod certificate;
mod exppoly;
mod filters;
mod harmonic;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use certificate::{
    check_certificate, combine_certificates, lift_certificate, modulate_certificate, tensor_certificate, CertKind,
    Certificate, CertificateCheck,
};
pub use exppoly::{distinct_frequencies, ExpPolynomial, Monomial};
pub use filters::{
    annihilating_combination, exp_filter_1d, exp_poly_filter, poly_filter, poly_filter_1d, predictor_exp_filter,
    predictor_exp_poly_filter, simple_exp_filter,
};
pub use harmonic::{
    chebyshev, chebyshev_quotient, harmonic_filter, harmonic_filter_order, make_regular_operator,
    random_discrete_harmonic, RegularOperator,
};

use crate::error::{param, Result};
use crate::field::{Field, GridBox};

/// One monomial in textual form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub re_c: f64,
    #[serde(default)]
    pub im_c: f64,
    pub alpha: Vec<u32>,
    pub re_omega: Vec<f64>,
    pub im_omega: Vec<f64>,
}

/// Textual signal description used by configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    ExpPoly { terms: Vec<TermSpec> },
    /// `tau_1^2 - tau_2^2`, discrete harmonic for nearest-neighbour averaging on `Z^2`.
    Saddle,
}

impl SignalSpec {
    pub fn dim(&self) -> usize {
        match self {
            SignalSpec::ExpPoly { terms } => terms.first().map_or(0, |t| t.alpha.len()),
            SignalSpec::Saddle => 2,
        }
    }

    pub fn exp_polynomial(&self) -> Result<Option<ExpPolynomial>> {
        let SignalSpec::ExpPoly { terms } = self else {
            return Ok(None);
        };
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let d = t.alpha.len();
            if t.re_omega.len() != d || t.im_omega.len() != d {
                return param("alpha, re_omega and im_omega must have equal lengths");
            }
            let omega = t.re_omega.iter().zip(&t.im_omega).map(|(r, i)| Complex64::new(*r, *i)).collect();
            out.push(Monomial::new(Complex64::new(t.re_c, t.im_c), t.alpha.clone(), omega)?);
        }
        Ok(Some(ExpPolynomial::new(out)?))
    }

    pub fn eval(&self, bbox: &GridBox) -> Result<Field> {
        match self {
            SignalSpec::ExpPoly { .. } => self.exp_polynomial()?.expect("exp-poly variant").eval(bbox),
            SignalSpec::Saddle => {
                if bbox.dim() != 2 {
                    return param("the saddle signal lives on Z^2");
                }
                Ok(Field::from_fn(bbox.clone(), |p| Complex64::new((p[0] * p[0] - p[1] * p[1]) as f64, 0.0)))
            }
        }
    }

    /// Exact certificate for the described class: filtering, or prediction
    /// with lag `kappa`. Harmonic certificates are measured up to `t_max`.
    pub fn certificate(&self, kappa: Option<usize>, t_max: usize) -> Result<Certificate> {
        match (self, kappa) {
            (SignalSpec::ExpPoly { .. }, None) => Certificate::exp_polynomial(&self.exp_polynomial()?.unwrap()),
            (SignalSpec::ExpPoly { .. }, Some(k)) => Certificate::quasi_stable(&self.exp_polynomial()?.unwrap(), k),
            (SignalSpec::Saddle, None) => Certificate::harmonic(&RegularOperator::averaging(2)?, 1, t_max),
            (SignalSpec::Saddle, Some(_)) => param("no prediction certificate for harmonic fields"),
        }
    }
}
