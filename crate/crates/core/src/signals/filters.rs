//! Explicit reproducing filters for exponential and algebraic polynomials.

use num_complex::Complex64;

use super::exppoly::{distinct_frequencies, ExpPolynomial};
use crate::error::{param, Result};
use crate::field::{Field, Filter, FilterKind, GridBox};

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Order-`T` filter reproducing `exp(omega tau)` on `Z`.
///
/// For `Re omega >= 0` the taps sit at lags `0, -1, ..., -T` with
/// `q_{-k} = exp(-k omega) / (T + 1)`; otherwise at `0..=T` with
/// `q_k = exp(k omega) / (T + 1)`. All taps have modulus at most `1/(T+1)`.
pub fn exp_filter_1d(omega: Complex64, order: usize) -> Filter {
    let t = order as i64;
    let w = 1.0 / (order as f64 + 1.0);
    let f = if omega.re >= 0.0 {
        Field::from_fn(GridBox::centered(1, order), |p| if p[0] <= 0 { (omega * p[0] as f64).exp() * w } else { Complex64::new(0.0, 0.0) })
    } else {
        Field::from_fn(GridBox::centered(1, order), |p| if p[0] >= 0 { (omega * p[0] as f64).exp() * w } else { Complex64::new(0.0, 0.0) })
    };
    debug_assert!(f.grid().hi()[0] == t);
    Filter::two_sided(f, order).expect("taps fit the centered cube")
}

/// One-sided filter `q_k = exp(k omega) / (T - kappa + 1)` on `kappa..=T`,
/// reproducing `exp(omega tau)` from observations at least `kappa` steps back.
pub fn predictor_exp_filter(omega: Complex64, order: usize, kappa: usize) -> Result<Filter> {
    if omega.re > 0.0 {
        return param(format!("predictor filters need Re(omega) <= 0, got {}", omega.re));
    }
    if kappa > order {
        return param(format!("lag kappa = {kappa} exceeds the order {order}"));
    }
    let w = 1.0 / (order - kappa + 1) as f64;
    let b = GridBox::new(vec![kappa as i64], vec![order as i64])?;
    let f = Field::from_fn(b, |p| (omega * p[0] as f64).exp() * w);
    Filter::one_sided(f, kappa, order)
}

/// `q = 1 - prod_j (1 - q_j)`, expressed with the given kind and order.
pub fn annihilating_combination(factors: &[Filter], kind: FilterKind, order: usize) -> Result<Filter> {
    let Some(first) = factors.first() else {
        return param("need at least one factor");
    };
    let d = first.dim();
    let mut acc = Filter::impulse(d);
    for f in factors {
        let complement = Filter::impulse(d).add_scaled(f, -one())?;
        acc = acc.product(&complement)?;
    }
    let q = Filter::impulse(d).add_scaled(&acc, -one())?;
    q.reshaped(kind, order)
}

/// Per-axis factor frequencies: every distinct frequency repeated
/// `m_j + 1` times, which also annihilates `tau^k exp(omega tau)` for `k <= m_j`.
pub(crate) fn axis_factors(p: &ExpPolynomial) -> Vec<Vec<Complex64>> {
    p.frequency_sets()
        .into_iter()
        .zip(p.degrees())
        .map(|(set, m)| set.into_iter().flat_map(|w| std::iter::repeat_n(w, m as usize + 1)).collect())
        .collect()
}

fn axis_filter(freqs: &[Complex64], order: usize) -> Result<Filter> {
    let n = freqs.len();
    if order < n {
        return param(format!("order {order} is below the {n} factors needed on an axis"));
    }
    let per = order / n;
    let factors: Vec<Filter> = freqs.iter().map(|w| exp_filter_1d(*w, per)).collect();
    annihilating_combination(&factors, FilterKind::TwoSided, order)
}

fn tensor_all(parts: Vec<Filter>) -> Result<Filter> {
    let mut it = parts.into_iter();
    let mut q = it.next().expect("at least one axis");
    for f in it {
        q = q.tensor(&f)?;
    }
    Ok(q)
}

/// Order-`T` filter reproducing every simple exponential polynomial whose
/// partial frequencies on axis `j` lie in `freq_sets[j]`.
pub fn simple_exp_filter(freq_sets: &[Vec<Complex64>], order: usize) -> Result<Filter> {
    if freq_sets.is_empty() || freq_sets.iter().any(|s| s.is_empty()) {
        return param("every axis needs a nonempty frequency set");
    }
    let parts = freq_sets
        .iter()
        .map(|s| axis_filter(&distinct_frequencies(s.iter().copied()), order))
        .collect::<Result<Vec<_>>>()?;
    tensor_all(parts)
}

/// Order-`T` filter reproducing every exponential polynomial with the same
/// frequency sets and degrees as `p`; independent of the coefficients.
pub fn exp_poly_filter(p: &ExpPolynomial, order: usize) -> Result<Filter> {
    let parts = axis_factors(p).iter().map(|f| axis_filter(f, order)).collect::<Result<Vec<_>>>()?;
    tensor_all(parts)
}

/// One-sided analogue of [`exp_poly_filter`] for quasi-stable polynomials;
/// needs `T >= kappa * N_j` on every axis.
pub fn predictor_exp_poly_filter(p: &ExpPolynomial, order: usize, kappa: usize) -> Result<Filter> {
    if !p.is_quasi_stable() {
        return param("predictor filters need a quasi-stable exponential polynomial");
    }
    let parts = axis_factors(p)
        .iter()
        .map(|freqs| {
            let per = order / freqs.len();
            if per < kappa {
                return param(format!("order {order} is below kappa * N = {}", kappa * freqs.len()));
            }
            let factors = freqs.iter().map(|w| predictor_exp_filter(*w, per, kappa)).collect::<Result<Vec<_>>>()?;
            annihilating_combination(&factors, FilterKind::OneSided { kappa }, order)
        })
        .collect::<Result<Vec<_>>>()?;
    tensor_all(parts)
}

/// Minimum-norm weights on `|t| <= T` with `sum q_t = 1` and
/// `sum q_t t^i = 0` for `i = 1..=m`; reproduces polynomials of degree `<= m`.
///
/// Computed as the discrete reproducing kernel `q_t = sum_k p_k(0) p_k(t/T)`
/// of polynomials orthonormal on the scaled grid.
pub fn poly_filter_1d(m: usize, order: usize) -> Result<Filter> {
    let n = 2 * order + 1;
    if n < m + 1 {
        return param(format!("degree {m} moments cannot be matched on {n} points"));
    }
    let scale = order.max(1) as f64;
    let xs: Vec<f64> = (-(order as i64)..=order as i64).map(|t| t as f64 / scale).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut at_zero: Vec<f64> = Vec::with_capacity(m + 1);
    for k in 0..=m {
        // x * p_{k-1} keeps the Gram-Schmidt input well conditioned
        let mut v: Vec<f64> = if k == 0 { vec![1.0; n] } else { basis[k - 1].iter().zip(&xs).map(|(p, x)| p * x).collect() };
        let mut v0 = if k == 0 { 1.0 } else { 0.0 };
        for _ in 0..2 {
            for (b, b0) in basis.iter().zip(&at_zero) {
                let c: f64 = b.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                v0 -= c * b0;
            }
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv < 1e-12 {
            return param("moment system is degenerate");
        }
        v.iter_mut().for_each(|x| *x /= nv);
        basis.push(v);
        at_zero.push(v0 / nv);
    }
    let q: Vec<Complex64> = (0..n).map(|i| Complex64::new(basis.iter().zip(&at_zero).map(|(b, z)| b[i] * z).sum(), 0.0)).collect();
    Filter::two_sided(Field::from_vec(GridBox::centered(1, order), q)?, order)
}

/// Tensor of [`poly_filter_1d`] over `d` axes.
pub fn poly_filter(d: usize, m: usize, order: usize) -> Result<Filter> {
    let q = poly_filter_1d(m, order)?;
    tensor_all(vec![q; d])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Norm;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn exp_filter_taps() {
        let q = exp_filter_1d(c(0.0), 2);
        for k in [0, -1, -2] {
            assert!((q.coefficient(&[k]) - c(1.0 / 3.0)).norm() < 1e-15);
        }
        assert_eq!(q.coefficient(&[1]), c(0.0));
        let q = exp_filter_1d(Complex64::new(0.0, std::f64::consts::PI), 1);
        assert!((q.coefficient(&[0]) - c(0.5)).norm() < 1e-15);
        assert!((q.coefficient(&[-1]) - c(-0.5)).norm() < 1e-15);
    }

    #[test]
    fn predictor_taps() {
        let q = predictor_exp_filter(c(0.0), 2, 1).unwrap();
        assert_eq!(q.coefficient(&[1]), c(0.5));
        assert_eq!(q.coefficient(&[2]), c(0.5));
        assert_eq!(q.coefficient(&[0]), c(0.0));
        assert!(predictor_exp_filter(c(0.1), 2, 1).is_err());
        assert!(predictor_exp_filter(c(0.0), 2, 3).is_err());
        let q = predictor_exp_filter(Complex64::new(0.0, 0.7), 5, 2).unwrap();
        assert!((q.norm(Norm::L2) - 0.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn poly_small_cases() {
        let q = poly_filter_1d(1, 1).unwrap();
        for k in -1..=1 {
            assert!((q.coefficient(&[k]) - c(1.0 / 3.0)).norm() < 1e-14);
        }
        let q = poly_filter_1d(2, 1).unwrap();
        assert!((q.coefficient(&[0]) - c(1.0)).norm() < 1e-14);
        assert!(q.coefficient(&[1]).norm() < 1e-14 && q.coefficient(&[-1]).norm() < 1e-14);
        assert!(poly_filter_1d(3, 1).is_err());
    }

    #[test]
    fn simple_exp_rejects_small_orders() {
        let sets = vec![vec![c(0.0), Complex64::new(0.0, 1.0)]];
        assert!(simple_exp_filter(&sets, 1).is_err());
        assert!(simple_exp_filter(&sets, 2).is_ok());
        assert!(simple_exp_filter(&[vec![]], 4).is_err());
    }
}
