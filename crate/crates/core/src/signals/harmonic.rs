//! Regular difference operators, discrete harmonic fields and the
//! Chebyshev-type filters that reproduce them.

use num_complex::Complex64;

use crate::error::{param, Error, RegularityCondition, Result};
use crate::field::{Field, Filter, FilterKind, GridBox};

const REG_TOL: f64 = 1e-12;

/// `(D f)_tau = sum_l w_l f_{tau - alpha(l)}`, validated as regular.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularOperator {
    offsets: Vec<Vec<i64>>,
    weights: Vec<Complex64>,
}

fn rank(rows: &[Vec<i64>], d: usize) -> usize {
    let mut m: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let mut r = 0;
    for col in 0..d {
        let Some(p) = (r..m.len()).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())) else {
            break;
        };
        if m[p][col].abs() < 1e-9 {
            continue;
        }
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r {
                let f = m[i][col] / m[r][col];
                for j in 0..d {
                    m[i][j] -= f * m[r][j];
                }
            }
        }
        r += 1;
    }
    r
}

/// Validate offsets and weights as a regular operator.
pub fn make_regular_operator(offsets: Vec<Vec<i64>>, weights: Vec<Complex64>) -> Result<RegularOperator> {
    let bad = |c| Err(Error::Regularity(c));
    if offsets.is_empty() || offsets.len() != weights.len() {
        return bad(RegularityCondition::Malformed);
    }
    let d = offsets[0].len();
    if d == 0 || offsets.iter().any(|a| a.len() != d) || weights.iter().any(|w| w.norm() == 0.0 || !w.is_finite()) {
        return bad(RegularityCondition::Malformed);
    }
    if rank(&offsets, d) < d {
        return bad(RegularityCondition::Span);
    }
    if weights.iter().map(|w| w.norm()).sum::<f64>() > 1.0 + REG_TOL {
        return bad(RegularityCondition::WeightSum);
    }
    for j in 0..d {
        let mean: f64 = offsets.iter().zip(&weights).map(|(a, w)| w.norm() * a[j] as f64).sum();
        if mean.abs() > REG_TOL {
            return bad(RegularityCondition::ZeroMean);
        }
    }
    Ok(RegularOperator { offsets, weights })
}

impl RegularOperator {
    /// Nearest-neighbour averaging with weight `1/(2d)`.
    pub fn averaging(d: usize) -> Result<Self> {
        let mut offsets = Vec::with_capacity(2 * d);
        for j in 0..d {
            for s in [1, -1] {
                let mut a = vec![0; d];
                a[j] = s;
                offsets.push(a);
            }
        }
        make_regular_operator(offsets, vec![Complex64::new(1.0 / (2 * d) as f64, 0.0); 2 * d])
    }

    pub fn dim(&self) -> usize {
        self.offsets[0].len()
    }

    pub fn offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// `max_l |alpha(l)|_inf`.
    pub fn order(&self) -> usize {
        self.offsets.iter().flat_map(|a| a.iter().map(|x| x.unsigned_abs() as usize)).max().unwrap_or(0)
    }

    /// `D` as a filter: `q_{alpha(l)} = w_l`.
    pub fn filter(&self) -> Filter {
        let t = self.order();
        let mut f = Field::zeros(GridBox::centered(self.dim(), t));
        for (a, w) in self.offsets.iter().zip(&self.weights) {
            let cur = f.get_or_zero(a);
            f.set(a, cur + w).expect("offset inside the centered cube");
        }
        Filter::two_sided(f, t).expect("taps fit the centered cube")
    }

    /// Points of `bbox` whose stencil reads all stay inside `bbox`.
    pub fn interior(&self, bbox: &GridBox) -> Option<GridBox> {
        let d = self.dim();
        let mut lo = bbox.lo().to_vec();
        let mut hi = bbox.hi().to_vec();
        for j in 0..d {
            let amax = self.offsets.iter().map(|a| a[j]).max().unwrap();
            let amin = self.offsets.iter().map(|a| a[j]).min().unwrap();
            lo[j] += amax.max(0);
            hi[j] += amin.min(0);
        }
        GridBox::new(lo, hi).ok()
    }

    fn apply_at(&self, f: &Field, tau: &[i64], buf: &mut [i64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, w) in self.offsets.iter().zip(&self.weights) {
            for ((b, t), x) in buf.iter_mut().zip(tau).zip(a) {
                *b = t - x;
            }
            acc += w * f.get_or_zero(buf);
        }
        acc
    }
}

/// Monomial coefficients of the Chebyshev polynomial `T_n`.
pub fn chebyshev(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for _ in 1..n {
        let mut next = vec![0.0; cur.len() + 1];
        for (k, c) in cur.iter().enumerate() {
            next[k + 1] += 2.0 * c;
        }
        for (k, c) in prev.iter().enumerate() {
            next[k] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `P_n(z) = (1 - T_n(z)) / (n^2 (1 - z))`, a polynomial of degree `n - 1` with `P_n(1) = 1`.
pub fn chebyshev_quotient(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return param("degree parameter must be at least 1");
    }
    let mut num: Vec<f64> = chebyshev(n).iter().map(|c| -c).collect();
    num[0] += 1.0;
    // (1 - T_n) = (z - 1) * g  =>  P_n = -g / n^2
    let deg = num.len() - 1;
    let mut g = vec![0.0; deg];
    let mut carry = 0.0;
    for k in (1..=deg).rev() {
        carry = num[k] + carry;
        g[k - 1] = carry;
    }
    let n2 = (n * n) as f64;
    Ok(g.into_iter().map(|c| -c / n2).collect())
}

/// Evaluate a real polynomial at a filter by Horner's rule.
fn eval_poly(coeffs: &[f64], x: &Filter) -> Result<Filter> {
    let d = x.dim();
    let id = Filter::impulse(d);
    let mut acc = Filter::zero(d, FilterKind::TwoSided, 0)?;
    for c in coeffs.iter().rev() {
        acc = acc.product(x)?.add_scaled(&id, Complex64::new(*c, 0.0))?;
    }
    Ok(acc)
}

fn power(x: &Filter, k: usize) -> Result<Filter> {
    let mut acc = Filter::impulse(x.dim());
    for _ in 0..k {
        acc = acc.product(x)?;
    }
    Ok(acc)
}

/// Order of [`harmonic_filter`]: `ord(D) d (n - 1 + c24 n)`.
pub fn harmonic_filter_order(op: &RegularOperator, n: usize, c24: usize) -> usize {
    op.order() * op.dim() * (n.saturating_sub(1) + c24 * n)
}

/// `R_n(D)` with `R_n = (P_n Q^{c24 n})^d` and `Q(z) = (1 + z)/2`.
///
/// Since `R_n(1) = 1`, the filter reproduces every field fixed by `D` at points
/// where all iterated reads stay in the region where the field is harmonic.
pub fn harmonic_filter(op: &RegularOperator, n: usize, c24: usize) -> Result<Filter> {
    if c24 == 0 {
        return param("c24 must be a positive integer");
    }
    let dmat = op.filter();
    let p = eval_poly(&chebyshev_quotient(n)?, &dmat)?;
    let q = eval_poly(&[0.5, 0.5], &dmat)?;
    let s = p.product(&power(&q, c24 * n)?)?;
    let r = power(&s, op.dim())?;
    r.reshaped(FilterKind::TwoSided, harmonic_filter_order(op, n, c24))
}

/// Solve `f = D f` on the interior of `bbox` with `f = boundary` elsewhere,
/// by damped Jacobi iteration to a residual of `1e-10 max(1, |boundary|_inf)`.
pub fn random_discrete_harmonic(op: &RegularOperator, bbox: &GridBox, boundary: &Field) -> Result<Field> {
    if op.dim() != bbox.dim() {
        return param("operator and box dimensions differ");
    }
    boundary.grid().require_contains(bbox, "boundary data")?;
    let mut f = boundary.restrict(bbox)?;
    let Some(inner) = op.interior(bbox) else {
        return Ok(f);
    };
    let idx: Vec<usize> = inner.points().map(|p| bbox.offset(&p).unwrap()).collect();
    let pts: Vec<Vec<i64>> = inner.points().collect();
    for &i in &idx {
        f.values_mut()[i] = Complex64::new(0.0, 0.0);
    }
    let scale = boundary.restrict(bbox)?.max_abs().max(1.0);
    let tol = 1e-10 * scale;
    let mut buf = vec![0i64; bbox.dim()];
    let mut next = vec![Complex64::new(0.0, 0.0); idx.len()];
    let max_iter = 2_000_000usize.max(50 * bbox.len());
    for _ in 0..max_iter {
        let mut res = 0.0f64;
        for (k, p) in pts.iter().enumerate() {
            let df = op.apply_at(&f, p, &mut buf);
            let cur = f.values()[idx[k]];
            res = res.max((df - cur).norm());
            next[k] = cur + 0.9 * (df - cur);
        }
        if res <= tol {
            return Ok(f);
        }
        for (k, &i) in idx.iter().enumerate() {
            f.values_mut()[i] = next[k];
        }
    }
    Err(Error::Convergence(format!("Dirichlet iteration stalled after {max_iter} sweeps")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn saddle(p: &[i64]) -> Complex64 {
        Complex64::new((p[0] * p[0] - p[1] * p[1]) as f64, 0.0)
    }

    #[test]
    fn validation() {
        assert!(RegularOperator::averaging(2).is_ok());
        let w = vec![Complex64::new(0.375, 0.0); 4];
        let offs = RegularOperator::averaging(2).unwrap().offsets().to_vec();
        assert!(matches!(make_regular_operator(offs, w), Err(Error::Regularity(RegularityCondition::WeightSum))));
        let r = make_regular_operator(vec![vec![1, 0], vec![-1, 0]], vec![Complex64::new(0.5, 0.0); 2]);
        assert!(matches!(r, Err(Error::Regularity(RegularityCondition::Span))));
        let r = make_regular_operator(vec![vec![1, 0], vec![0, 1]], vec![Complex64::new(0.5, 0.0); 2]);
        assert!(matches!(r, Err(Error::Regularity(RegularityCondition::ZeroMean))));
        let r = make_regular_operator(vec![vec![1], vec![-1]], vec![Complex64::new(0.5, 0.0)]);
        assert!(matches!(r, Err(Error::Regularity(RegularityCondition::Malformed))));
    }

    #[test]
    fn chebyshev_coefficients() {
        assert_eq!(chebyshev(3), vec![0.0, -3.0, 0.0, 4.0]);
        assert_eq!(chebyshev_quotient(1).unwrap(), vec![1.0]);
        // (1 - 2z^2 + 1) / (4 (1 - z)) = (1 + z) / 2
        assert_eq!(chebyshev_quotient(2).unwrap(), vec![0.5, 0.5]);
        for n in 1..8 {
            let s: f64 = chebyshev_quotient(n).unwrap().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn saddle_is_reproduced() {
        let op = RegularOperator::averaging(2).unwrap();
        for n in 1..=3 {
            let q = harmonic_filter(&op, n, 1).unwrap();
            let t = q.order();
            assert_eq!(t, harmonic_filter_order(&op, n, 1));
            let data = Field::from_fn(GridBox::centered(2, t + 2), saddle);
            let eval = GridBox::centered(2, 2);
            let out = q.apply(&data, &eval).unwrap();
            assert!(out.max_abs_diff(&data.restrict(&eval).unwrap()).unwrap() < 1e-10);
        }
    }

    #[test]
    fn dirichlet_recovers_saddle() {
        let op = RegularOperator::averaging(2).unwrap();
        let b = GridBox::centered(2, 5);
        let g = Field::from_fn(b.clone(), saddle);
        let f = random_discrete_harmonic(&op, &b, &g).unwrap();
        assert!(f.max_abs_diff(&g).unwrap() < 1e-8);
        let c = Field::constant(b.clone(), Complex64::new(2.0, -1.0));
        let f = random_discrete_harmonic(&op, &b, &c).unwrap();
        assert!(f.max_abs_diff(&c).unwrap() < 1e-8);
    }
}
