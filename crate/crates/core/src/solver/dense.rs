use num_complex::Complex64;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn set_col(&mut self, j: usize, col: &[Complex64]) {
        for (i, v) in col.iter().enumerate() {
            self.data[i * self.cols + j] = *v;
        }
    }

    /// `out = M x`.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// `out = M^H y`.
    pub fn apply_adjoint(&self, y: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (i, yi) in y.iter().enumerate() {
            if *yi == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * yi;
            }
        }
    }

}

pub(crate) fn l1(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm()).sum()
}

pub(crate) fn l2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn linf(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm()).fold(0.0, |a: f64, b| if b.is_nan() || b > a { b } else { a })
}

/// Largest singular value of the stacked operator `[m_1; m_2; ...]`,
/// estimated by power iteration on the normal operator from a fixed start.
pub(crate) fn operator_norm(blocks: &[&Mat], iters: usize) -> f64 {
    let n = blocks[0].cols;
    let mut x: Vec<Complex64> = (0..n).map(|k| Complex64::new(1.0, 0.1 * k as f64 / n.max(1) as f64)).collect();
    let mut est = 0.0;
    let mut tmp_out = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..iters {
        let nx = l2(&x);
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for m in blocks {
            let mut y = vec![Complex64::new(0.0, 0.0); m.rows];
            m.apply(&x, &mut y);
            m.apply_adjoint(&y, &mut tmp_out);
            for (a, t) in acc.iter_mut().zip(&tmp_out) {
                *a += t;
            }
        }
        est = l2(&acc).sqrt();
        x = acc;
    }
    est
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_matches_inner_product() {
        let mut m = Mat::zeros(3, 2);
        for (k, v) in m.data.iter_mut().enumerate() {
            *v = Complex64::new(k as f64, 1.0 - k as f64 * 0.5);
        }
        let x = [Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.3)];
        let y = [Complex64::new(0.2, -1.0), Complex64::new(1.5, 0.0), Complex64::new(0.0, 0.7)];
        let mut mx = [Complex64::new(0.0, 0.0); 3];
        let mut mhy = [Complex64::new(0.0, 0.0); 2];
        m.apply(&x, &mut mx);
        m.apply_adjoint(&y, &mut mhy);
        let lhs: Complex64 = y.iter().zip(&mx).map(|(a, b)| a.conj() * b).sum();
        let rhs: Complex64 = mhy.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn norm_of_diagonal() {
        let mut m = Mat::zeros(2, 2);
        m.data[0] = Complex64::new(3.0, 0.0);
        m.data[3] = Complex64::new(0.0, 1.0);
        assert!((operator_norm(&[&m], 200) - 3.0).abs() < 1e-9);
    }
}
