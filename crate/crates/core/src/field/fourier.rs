use num_complex::Complex64;
use std::f64::consts::PI;

use super::{Field, GridBox};
use crate::error::{param, Result};

/// The three norms used throughout: `l1`, `l2`, `l_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::L1, Norm::L2, Norm::Linf];

    /// `1/p`, with `1/inf = 0`.
    pub fn inverse_exponent(self) -> f64 {
        match self {
            Norm::L1 => 1.0,
            Norm::L2 => 0.5,
            Norm::Linf => 0.0,
        }
    }
}

pub(crate) fn lp(values: &[Complex64], p: Norm) -> f64 {
    match p {
        Norm::L1 => values.iter().map(|v| v.norm()).sum(),
        Norm::L2 => values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
        Norm::Linf => values.iter().map(|v| v.norm()).fold(0.0, |a, b| if b.is_nan() || b > a { b } else { a }),
    }
}

/// Values of the finite Fourier transform `F_T` on `Gamma_T^d`.
///
/// Index vector `n in {-T..T}^d` stands for the point
/// `mu_j = exp(2 pi i n_j / (2T+1))`; storage is row-major over `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    order: usize,
    dim: usize,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(order: usize, dim: usize, values: Vec<Complex64>) -> Result<Self> {
        let n = (2 * order + 1).pow(dim as u32);
        if values.len() != n {
            return param(format!("spectrum of order {order} in d={dim} needs {n} values, got {}", values.len()));
        }
        Ok(Spectrum { order, dim, values })
    }

    pub fn zeros(order: usize, dim: usize) -> Self {
        let n = (2 * order + 1).pow(dim as u32);
        Spectrum { order, dim, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Index vectors `n` in storage order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<i64>> {
        GridBox::centered(self.dim, self.order).points().collect::<Vec<_>>().into_iter()
    }

    pub fn get(&self, n: &[i64]) -> Option<Complex64> {
        GridBox::centered(self.dim, self.order).offset(n).map(|i| self.values[i])
    }

    pub fn norm(&self, p: Norm) -> f64 {
        lp(&self.values, p)
    }

    /// `<self, other> = sum conj(self) * other`.
    pub fn inner(&self, other: &Spectrum) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Table of `exp(sign * 2 pi i k / m)` for `k = 0..m`.
fn roots(m: usize, sign: f64) -> Vec<Complex64> {
    (0..m).map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / m as f64)).collect()
}

/// In-place separable transform on a cube of side `m = 2T+1` indexed by
/// `{-T..T}^d`: along each axis `out_n = sum_tau in_tau w^(n tau)` with
/// `w = exp(sign 2 pi i / m)`.
fn transform_cube(data: &mut [Complex64], order: usize, dim: usize, sign: f64) {
    let m = 2 * order + 1;
    let w = roots(m, sign);
    let t = order as i64;
    let mi = m as i64;
    // phase index table: (n * tau) mod m for n, tau in -T..T
    let mut table = vec![Complex64::new(0.0, 0.0); m * m];
    for (a, n) in (-t..=t).enumerate() {
        for (b, tau) in (-t..=t).enumerate() {
            table[a * m + b] = w[((n * tau).rem_euclid(mi)) as usize];
        }
    }
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..dim {
        let stride = m.pow((dim - 1 - axis) as u32);
        let block = stride * m;
        for start in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = start + inner;
                for (k, l) in line.iter_mut().enumerate() {
                    *l = data[base + k * stride];
                }
                for a in 0..m {
                    let row = &table[a * m..(a + 1) * m];
                    data[base + a * stride] = row.iter().zip(&line).map(|(r, v)| r * v).sum();
                }
            }
        }
    }
}

/// Unitary transform of raw cube data in place; `inverse` selects `F_T^H`.
pub(crate) fn unitary_transform(data: &mut [Complex64], order: usize, dim: usize, inverse: bool) {
    transform_cube(data, order, dim, if inverse { -1.0 } else { 1.0 });
    let scale = ((2 * order + 1) as f64).powf(-(dim as f64) / 2.0);
    data.iter_mut().for_each(|v| *v *= scale);
}

/// `(F_T x)(mu) = (2T+1)^{-d/2} sum_{|tau| <= T} x_tau mu^tau`.
pub fn dft(x: &Field, order: usize) -> Result<Spectrum> {
    let d = x.dim();
    let window = GridBox::centered(d, order);
    let mut data = if x.grid() == &window { x.values().to_vec() } else { x.restrict(&window)?.into_values() };
    unitary_transform(&mut data, order, d, false);
    Spectrum::new(order, d, data)
}

/// Inverse of [`dft`]: `x_tau = (2T+1)^{-d/2} sum_mu S(mu) mu^{-tau}` on `{|tau| <= T}`.
pub fn idft(s: &Spectrum) -> Field {
    let mut data = s.values.clone();
    unitary_transform(&mut data, s.order, s.dim, true);
    Field::from_vec(GridBox::centered(s.dim, s.order), data).expect("spectrum size matches its cube")
}

/// `|x|_{T,p}`: the `l_p` norm of `x` on `{|tau| <= T}`.
pub fn norm(x: &Field, order: usize, p: Norm) -> Result<f64> {
    let window = GridBox::centered(x.dim(), order);
    if x.grid() == &window {
        return Ok(lp(x.values(), p));
    }
    Ok(lp(x.restrict(&window)?.values(), p))
}

/// `|x|^*_{T,p} = |F_T x|_p`.
pub fn star_norm(x: &Field, order: usize, p: Norm) -> Result<f64> {
    Ok(dft(x, order)?.norm(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impulse_has_flat_spectrum() {
        for d in 1..=2 {
            for t in 0..4 {
                let x = Field::impulse(d).embed(&GridBox::centered(d, t)).unwrap();
                let s = dft(&x, t).unwrap();
                let expect = ((2 * t + 1) as f64).powf(-(d as f64) / 2.0);
                for v in s.values() {
                    assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-14);
                }
                for p in Norm::ALL {
                    assert!((norm(&x, t, p).unwrap() - 1.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn constant_is_a_single_spike() {
        let x = Field::constant(GridBox::centered(1, 2), Complex64::new(1.0, 0.0));
        let s = dft(&x, 2).unwrap();
        let root5 = 5f64.sqrt();
        assert!((s.get(&[0]).unwrap() - Complex64::new(root5, 0.0)).norm() < 1e-14);
        for n in [-2, -1, 1, 2] {
            assert!(s.get(&[n]).unwrap().norm() < 1e-14);
        }
        assert!((star_norm(&x, 2, Norm::L1).unwrap() - root5).abs() < 1e-13);
        assert!((star_norm(&x, 2, Norm::Linf).unwrap() - root5).abs() < 1e-13);
    }

    #[test]
    fn phase_convention() {
        // x = impulse at tau = 1 => F(mu_n) = mu_n / sqrt(3)
        let x = Field::from_fn(GridBox::centered(1, 1), |p| Complex64::new(if p[0] == 1 { 1.0 } else { 0.0 }, 0.0));
        let s = dft(&x, 1).unwrap();
        let mu = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!((s.get(&[1]).unwrap() - mu / 3f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn coverage_is_checked() {
        let x = Field::zeros(GridBox::centered(1, 1));
        assert!(dft(&x, 2).is_err());
        assert!(norm(&x, 2, Norm::L2).is_err());
    }
}
