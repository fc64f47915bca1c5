use num_complex::Complex64;

use super::{convolve, Field, GridBox, Norm};
use crate::error::{param, Result};

/// Support convention of a filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    /// Coefficients on the centered cube `{|tau| <= order}`.
    TwoSided,
    /// Polynomial filter with coefficients on `{kappa <= tau_j <= order}`.
    OneSided { kappa: usize },
}

/// A finitely supported field identified with the Laurent sum
/// `q(z) = sum_tau q_tau z^tau`; acts on fields by `q(Delta)`.
///
/// Coefficients are stored densely on the canonical box of the kind and order.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    field: Field,
    kind: FilterKind,
    order: usize,
}

fn canonical_box(d: usize, kind: FilterKind, order: usize) -> Result<GridBox> {
    match kind {
        FilterKind::TwoSided => Ok(GridBox::centered(d, order)),
        FilterKind::OneSided { kappa } => {
            if kappa > order {
                return param(format!("one-sided filter needs kappa <= order, got kappa {kappa} > {order}"));
            }
            GridBox::cube(d, kappa as i64, order as i64)
        }
    }
}

impl Filter {
    /// Build a filter of the given kind and order; `field` may live on any
    /// sub-box of the canonical box and is zero-padded to it.
    pub fn new(field: Field, kind: FilterKind, order: usize) -> Result<Self> {
        let canon = canonical_box(field.dim(), kind, order)?;
        if !canon.contains_box(field.grid()) {
            // allow a larger box as long as the excess coefficients vanish
            let mut out = Field::zeros(canon.clone());
            for (p, v) in field.iter() {
                match canon.offset(&p) {
                    Some(i) => out.values_mut()[i] = v,
                    None if v == Complex64::new(0.0, 0.0) => {}
                    None => {
                        return param(format!(
                            "coefficient at {p:?} lies outside the support {canon} of a {kind:?} filter of order {order}"
                        ))
                    }
                }
            }
            return Ok(Filter { field: out, kind, order });
        }
        let field = if field.grid() == &canon { field } else { field.embed(&canon)? };
        Ok(Filter { field, kind, order })
    }

    pub fn two_sided(field: Field, order: usize) -> Result<Self> {
        Self::new(field, FilterKind::TwoSided, order)
    }

    pub fn one_sided(field: Field, kappa: usize, order: usize) -> Result<Self> {
        Self::new(field, FilterKind::OneSided { kappa }, order)
    }

    /// `q(z) = 1`.
    pub fn impulse(d: usize) -> Self {
        Filter { field: Field::impulse(d), kind: FilterKind::TwoSided, order: 0 }
    }

    pub fn zero(d: usize, kind: FilterKind, order: usize) -> Result<Self> {
        Ok(Filter { field: Field::zeros(canonical_box(d, kind, order)?), kind, order })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn into_field(self) -> Field {
        self.field
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn coefficient(&self, tau: &[i64]) -> Complex64 {
        self.field.get_or_zero(tau)
    }

    /// `|q|_p` over the whole (finite) support.
    pub fn norm(&self, p: Norm) -> f64 {
        self.field.lp_norm(p)
    }

    /// Smallest `T` with `q_tau = 0` whenever `|tau| > T`.
    pub fn effective_order(&self) -> usize {
        self.field
            .iter()
            .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
            .map(|(p, _)| p.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Re-express with another order (and kind) when the coefficients fit.
    pub fn reshaped(&self, kind: FilterKind, order: usize) -> Result<Filter> {
        Filter::new(self.field.clone(), kind, order)
    }

    /// Same coefficients viewed as a two-sided filter of the same order.
    pub fn as_two_sided(&self) -> Filter {
        match self.kind {
            FilterKind::TwoSided => self.clone(),
            FilterKind::OneSided { .. } => {
                Filter::new(self.field.clone(), FilterKind::TwoSided, self.order).expect("one-sided support fits the centered cube")
            }
        }
    }

    /// `q(Delta) x` evaluated on `eval`.
    pub fn apply(&self, x: &Field, eval: &GridBox) -> Result<Field> {
        convolve(self, x, eval)
    }

    /// `(q(Delta) x)_t` at a single point.
    pub fn apply_at(&self, x: &Field, t: &[i64]) -> Result<Complex64> {
        let eval = GridBox::around(t, 0);
        Ok(convolve(self, x, &eval)?.values()[0])
    }

    /// Laurent product `a(z) b(z)`; orders add.
    pub fn product(&self, other: &Filter) -> Result<Filter> {
        if self.dim() != other.dim() {
            return param(format!("filter dimensions differ: {} vs {}", self.dim(), other.dim()));
        }
        let out_box = self.field.grid().minkowski(other.field.grid());
        let mut out = Field::zeros(out_box.clone());
        let strides = out_box.strides();
        let ob = other.field.grid();
        // offset of each pb - ob.lo inside the output box
        let inner: Vec<usize> = (0..ob.len())
            .map(|k| ob.point(k).iter().zip(ob.lo()).zip(&strides).map(|((p, l), s)| (p - l) as usize * s).sum())
            .collect();
        for (pa, va) in self.field.iter() {
            if va == Complex64::new(0.0, 0.0) {
                continue;
            }
            let base: usize = pa
                .iter()
                .zip(ob.lo())
                .zip(out_box.lo())
                .zip(&strides)
                .map(|(((a, bl), ol), s)| (a + bl - ol) as usize * s)
                .sum();
            for (off, vb) in inner.iter().zip(other.field.values()) {
                out.values_mut()[base + off] += va * vb;
            }
        }
        let order = self.order + other.order;
        let kind = match (self.kind, other.kind) {
            (FilterKind::OneSided { kappa: a }, FilterKind::OneSided { kappa: b }) => FilterKind::OneSided { kappa: a + b },
            _ => FilterKind::TwoSided,
        };
        Filter::new(out, kind, order)
    }

    /// `self + c * other` with a kind/order large enough for both.
    pub fn add_scaled(&self, other: &Filter, c: Complex64) -> Result<Filter> {
        if self.dim() != other.dim() {
            return param("filter dimensions differ");
        }
        let order = self.order.max(other.order);
        let kind = match (self.kind, other.kind) {
            (FilterKind::OneSided { kappa: a }, FilterKind::OneSided { kappa: b }) => FilterKind::OneSided { kappa: a.min(b) },
            _ => FilterKind::TwoSided,
        };
        let canon = canonical_box(self.dim(), kind, order)?;
        let mut out = self.field.embed(&canon)?;
        for (p, v) in other.field.iter() {
            let i = canon.offset(&p).expect("support fits");
            out.values_mut()[i] += c * v;
        }
        Filter::new(out, kind, order)
    }

    pub fn scale(&self, c: Complex64) -> Filter {
        Filter { field: self.field.scale(c), kind: self.kind, order: self.order }
    }

    /// `q_(tau', tau'') = a_tau' * b_tau''` over `Z^{d' + d''}`.
    pub fn tensor(&self, other: &Filter) -> Result<Filter> {
        let out_box = self.field.grid().product(other.field.grid());
        let mut data = Vec::with_capacity(out_box.len());
        for &va in self.field.values() {
            for &vb in other.field.values() {
                data.push(va * vb);
            }
        }
        let f = Field::from_vec(out_box, data)?;
        let order = self.order.max(other.order);
        let kind = match (self.kind, other.kind) {
            (FilterKind::OneSided { kappa: a }, FilterKind::OneSided { kappa: b }) => FilterKind::OneSided { kappa: a.min(b) },
            _ => FilterKind::TwoSided,
        };
        Filter::new(f, kind, order)
    }

    /// `q^_tau = exp(i omega . tau) q_tau`.
    pub fn modulate(&self, omega: &[f64]) -> Result<Filter> {
        if omega.len() != self.dim() {
            return param("modulation frequency has the wrong dimension");
        }
        let field = self.field.map_indexed(|p, v| {
            let phase: f64 = p.iter().zip(omega).map(|(t, w)| *t as f64 * w).sum();
            v * Complex64::from_polar(1.0, phase)
        });
        Ok(Filter { field, kind: self.kind, order: self.order })
    }

    /// Coefficient-wise complex conjugate.
    pub fn conj(&self) -> Filter {
        Filter { field: self.field.map(|v| v.conj()), kind: self.kind, order: self.order }
    }
}
