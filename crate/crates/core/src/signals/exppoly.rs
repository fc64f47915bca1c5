use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{Field, GridBox};

/// `c * tau^alpha * exp(omega . tau)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub c: Complex64,
    pub alpha: Vec<u32>,
    pub omega: Vec<Complex64>,
}

impl Monomial {
    pub fn new(c: Complex64, alpha: Vec<u32>, omega: Vec<Complex64>) -> Result<Self> {
        if alpha.len() != omega.len() || alpha.is_empty() {
            return param("monomial needs equal-length, nonempty alpha and omega");
        }
        Ok(Monomial { c, alpha, omega })
    }

    /// `c exp(omega . tau)`.
    pub fn exponential(c: Complex64, omega: Vec<Complex64>) -> Self {
        let d = omega.len();
        Monomial { c, alpha: vec![0; d], omega }
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }
}

/// A finite sum of exponential monomials on `Z^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPolynomial {
    terms: Vec<Monomial>,
}

/// Largest exponent that `f64::exp` keeps finite.
const EXP_LIMIT: f64 = 709.78;

/// Sort and deduplicate by exact `(re, im)` so that filters built from a set
/// never depend on the order terms were listed in.
pub fn distinct_frequencies(values: impl IntoIterator<Item = Complex64>) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = values.into_iter().collect();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v.dedup_by(|a, b| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    v
}

impl ExpPolynomial {
    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return param("exponential polynomial needs at least one term");
        };
        let d = first.dim();
        if terms.iter().any(|m| m.dim() != d || m.alpha.len() != d) {
            return param("all monomials must share one dimension");
        }
        Ok(ExpPolynomial { terms })
    }

    pub fn constant(d: usize, c: Complex64) -> Self {
        ExpPolynomial { terms: vec![Monomial { c, alpha: vec![0; d], omega: vec![Complex64::new(0.0, 0.0); d] }] }
    }

    pub fn exponential(c: Complex64, omega: Vec<Complex64>) -> Self {
        ExpPolynomial { terms: vec![Monomial::exponential(c, omega)] }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.terms[0].dim()
    }

    /// Maximum degree `m_j` of `tau_j` over the terms.
    pub fn degrees(&self) -> Vec<u32> {
        (0..self.dim()).map(|j| self.terms.iter().map(|m| m.alpha[j]).max().unwrap_or(0)).collect()
    }

    /// The distinct partial frequencies on each axis, sorted.
    pub fn frequency_sets(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim()).map(|j| distinct_frequencies(self.terms.iter().map(|m| m.omega[j]))).collect()
    }

    /// `N_j = (m_j + 1) M_j`.
    pub fn partial_sizes(&self) -> Vec<usize> {
        self.degrees().iter().zip(self.frequency_sets()).map(|(m, o)| (*m as usize + 1) * o.len()).collect()
    }

    /// All partial frequencies have nonpositive real part.
    pub fn is_quasi_stable(&self) -> bool {
        self.terms.iter().all(|m| m.omega.iter().all(|w| w.re <= 0.0))
    }

    pub fn value_at(&self, tau: &[i64]) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for m in &self.terms {
            let e: Complex64 = m.omega.iter().zip(tau).map(|(w, t)| w * *t as f64).sum();
            if e.re > EXP_LIMIT {
                return Err(Error::Overflow(format!("exp({}) at {tau:?} exceeds double range", e.re)));
            }
            let poly: f64 = m.alpha.iter().zip(tau).map(|(a, t)| (*t as f64).powi(*a as i32)).product();
            s += m.c * poly * e.exp();
        }
        if !s.re.is_finite() || !s.im.is_finite() {
            return Err(Error::Overflow(format!("value at {tau:?} is not finite")));
        }
        Ok(s)
    }

    /// Pointwise evaluation on a box.
    pub fn eval(&self, bbox: &GridBox) -> Result<Field> {
        if bbox.dim() != self.dim() {
            return param(format!("box has dimension {} but the polynomial has {}", bbox.dim(), self.dim()));
        }
        let data = bbox.points().map(|p| self.value_at(&p)).collect::<Result<Vec<_>>>()?;
        Field::from_vec(bbox.clone(), data)
    }

    /// `exp(i (omega . tau + phase)) s_tau`, again an exponential polynomial.
    pub fn modulate(&self, omega: &[f64], phase: f64) -> Result<Self> {
        if omega.len() != self.dim() {
            return param("modulation frequency has the wrong dimension");
        }
        let rot = Complex64::from_polar(1.0, phase);
        let terms = self
            .terms
            .iter()
            .map(|m| Monomial {
                c: m.c * rot,
                alpha: m.alpha.clone(),
                omega: m.omega.iter().zip(omega).map(|(w, o)| w + Complex64::new(0.0, *o)).collect(),
            })
            .collect();
        Ok(ExpPolynomial { terms })
    }

    /// The same polynomial with every coefficient replaced.
    pub fn with_coefficients(&self, c: &[Complex64]) -> Result<Self> {
        if c.len() != self.terms.len() {
            return param("coefficient count does not match the term count");
        }
        let terms = self.terms.iter().zip(c).map(|(m, c)| Monomial { c: *c, ..m.clone() }).collect();
        Ok(ExpPolynomial { terms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(v: f64) -> Complex64 {
        Complex64::new(0.0, v)
    }

    #[test]
    fn basic_fields() {
        let b = GridBox::new(vec![-3], vec![3]).unwrap();
        let one = ExpPolynomial::constant(1, Complex64::new(1.0, 0.0)).eval(&b).unwrap();
        assert!(one.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        let alt = ExpPolynomial::exponential(Complex64::new(1.0, 0.0), vec![i(std::f64::consts::PI)]).eval(&b).unwrap();
        for (p, v) in alt.iter() {
            let expect = if p[0].rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-14);
        }
        let lin = ExpPolynomial::new(vec![Monomial::new(Complex64::new(1.0, 0.0), vec![1], vec![i(0.0)]).unwrap()]).unwrap();
        let f = lin.eval(&b).unwrap();
        for (p, v) in f.iter() {
            assert_eq!(v, Complex64::new(p[0] as f64, 0.0));
        }
    }

    #[test]
    fn sizes_and_stability() {
        let p = ExpPolynomial::new(vec![
            Monomial::new(Complex64::new(1.0, 0.0), vec![2, 0], vec![i(0.5), Complex64::new(-0.1, 0.0)]).unwrap(),
            Monomial::new(Complex64::new(2.0, 0.0), vec![0, 1], vec![i(0.5), i(1.0)]).unwrap(),
            Monomial::new(Complex64::new(3.0, 0.0), vec![0, 0], vec![i(-0.5), i(1.0)]).unwrap(),
        ])
        .unwrap();
        assert_eq!(p.partial_sizes(), vec![6, 4]);
        assert!(p.is_quasi_stable());
        let q = ExpPolynomial::exponential(Complex64::new(1.0, 0.0), vec![Complex64::new(0.01, 0.0)]);
        assert!(!q.is_quasi_stable());
    }

    #[test]
    fn overflow_is_reported() {
        let p = ExpPolynomial::exponential(Complex64::new(1.0, 0.0), vec![Complex64::new(100.0, 0.0)]);
        let b = GridBox::new(vec![0], vec![10]).unwrap();
        assert!(matches!(p.eval(&b), Err(Error::Overflow(_))));
    }
}
