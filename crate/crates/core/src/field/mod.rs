//! Dense complex fields over boxes of `Z^d`, filters acting on them by
//! convolution, and the windowed Fourier transform with its norms.

mod filter;
mod fourier;
mod grid;
pub mod io;

pub use filter::{Filter, FilterKind};
pub use fourier::{dft, idft, norm, star_norm, Norm, Spectrum};
pub(crate) use fourier::unitary_transform;
pub use grid::{GridBox, Points};

use num_complex::Complex64;

use crate::error::{domain, param, Result};

/// A complex-valued field on a box of `Z^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    bbox: GridBox,
    data: Vec<Complex64>,
}

impl Field {
    pub fn zeros(bbox: GridBox) -> Self {
        let n = bbox.len();
        Field { bbox, data: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn constant(bbox: GridBox, c: Complex64) -> Self {
        let n = bbox.len();
        Field { bbox, data: vec![c; n] }
    }

    pub fn from_vec(bbox: GridBox, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != bbox.len() {
            return param(format!(
                "field data has {} values but box {bbox} holds {}",
                data.len(),
                bbox.len()
            ));
        }
        Ok(Field { bbox, data })
    }

    pub fn from_fn(bbox: GridBox, mut f: impl FnMut(&[i64]) -> Complex64) -> Self {
        let data = bbox.points().map(|p| f(&p)).collect();
        Field { bbox, data }
    }

    /// Unit impulse at the origin of dimension `d`.
    pub fn impulse(d: usize) -> Self {
        Field::constant(GridBox::centered(d, 0), Complex64::new(1.0, 0.0))
    }

    pub fn grid(&self) -> &GridBox {
        &self.bbox
    }

    pub fn dim(&self) -> usize {
        self.bbox.dim()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, p: &[i64]) -> Option<Complex64> {
        self.bbox.offset(p).map(|i| self.data[i])
    }

    /// Value at `p`; a point outside the box is a domain error.
    pub fn at(&self, p: &[i64]) -> Result<Complex64> {
        match self.get(p) {
            Some(v) => Ok(v),
            None => domain(format!("point {p:?} is outside {}", self.bbox)),
        }
    }

    /// Value at `p`, zero outside the box.
    pub fn get_or_zero(&self, p: &[i64]) -> Complex64 {
        self.get(p).unwrap_or_default()
    }

    pub fn set(&mut self, p: &[i64], v: Complex64) -> Result<()> {
        match self.bbox.offset(p) {
            Some(i) => {
                self.data[i] = v;
                Ok(())
            }
            None => domain(format!("point {p:?} is outside {}", self.bbox)),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        self.bbox.points().zip(self.data.iter().copied())
    }

    /// `(shift(x, v))_tau = x_{tau - v}`: the same values on the translated box.
    pub fn shift(&self, v: &[i64]) -> Field {
        Field { bbox: self.bbox.translate(v), data: self.data.clone() }
    }

    /// Copy of the field restricted to a sub-box.
    pub fn restrict(&self, sub: &GridBox) -> Result<Field> {
        self.bbox.require_contains(sub, "restrict")?;
        Ok(Field::from_fn(sub.clone(), |p| self.data[self.bbox.offset(p).unwrap()]))
    }

    /// Copy onto a larger box, zero outside the original one.
    pub fn embed(&self, sup: &GridBox) -> Result<Field> {
        sup.require_contains(&self.bbox, "embed")?;
        let mut out = Field::zeros(sup.clone());
        for (p, v) in self.iter() {
            let i = sup.offset(&p).unwrap();
            out.data[i] = v;
        }
        Ok(out)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field { bbox: self.bbox.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn map_indexed(&self, mut f: impl FnMut(&[i64], Complex64) -> Complex64) -> Field {
        let data = self.bbox.points().zip(&self.data).map(|(p, &v)| f(&p, v)).collect();
        Field { bbox: self.bbox.clone(), data }
    }

    pub fn scale(&self, c: Complex64) -> Field {
        self.map(|v| v * c)
    }

    /// Pointwise `self + other` on a common box.
    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Field, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Field> {
        if self.bbox != other.bbox {
            return domain(format!("fields live on different boxes: {} vs {}", self.bbox, other.bbox));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field { bbox: self.bbox.clone(), data })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, |a: f64, b| if b.is_nan() || b > a { b } else { a })
    }

    /// `max |self - other|` over the common box.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// `|x|_p` over all stored values.
    pub fn lp_norm(&self, p: Norm) -> f64 {
        fourier::lp(&self.data, p)
    }
}

/// `(q(Delta) x)_t = sum_tau q_tau x_{t - tau}` for every `t` in `eval`.
///
/// Every read `t - tau` (with `tau` ranging over the filter's box) must lie in
/// `x`'s box; reading outside is a domain error, never zero padding.
pub fn convolve(q: &Filter, x: &Field, eval: &GridBox) -> Result<Field> {
    let taps = q.field();
    if eval.dim() != x.dim() || taps.dim() != x.dim() {
        return domain(format!(
            "dimension mismatch: filter d={}, field d={}, eval d={}",
            taps.dim(),
            x.dim(),
            eval.dim()
        ));
    }
    let needed = eval.reach_of(taps.grid());
    if !x.grid().contains_box(&needed) {
        return domain(format!(
            "observation window {} does not cover the reads {} required by a filter of box {} on {}",
            x.grid(),
            needed,
            taps.grid(),
            eval
        ));
    }
    let strides = x.grid().strides();
    let tap_list: Vec<(isize, Complex64)> = taps
        .iter()
        .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
        .map(|(tau, c)| {
            let off: isize = tau.iter().zip(&strides).map(|(t, s)| -(*t as isize) * (*s as isize)).sum();
            (off, c)
        })
        .collect();
    let xv = x.values();
    let out: Vec<Complex64> = eval
        .points()
        .map(|t| {
            let base: isize = t
                .iter()
                .zip(x.grid().lo())
                .zip(&strides)
                .map(|((p, l), s)| (p - l) as isize * *s as isize)
                .sum();
            tap_list.iter().map(|&(off, c)| c * xv[(base + off) as usize]).sum()
        })
        .collect();
    Field::from_vec(eval.clone(), out)
}
