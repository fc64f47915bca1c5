use num_complex::Complex64;

/// Euclidean projection of `z` onto `{x : |x|_1 <= radius}` in `C^n`.
///
/// Moduli are projected onto the scaled simplex by the sort-based threshold
/// rule and phases are kept. Ties in the sort break by index.
pub fn project_l1_ball(z: &mut [Complex64], radius: f64) {
    let total: f64 = z.iter().map(|v| v.norm()).sum();
    if total <= radius {
        return;
    }
    if radius <= 0.0 {
        z.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        return;
    }
    let mods: Vec<f64> = z.iter().map(|v| v.norm()).collect();
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| mods[b].total_cmp(&mods[a]).then(a.cmp(&b)));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &i) in order.iter().enumerate() {
        cum += mods[i];
        let t = (cum - radius) / (k + 1) as f64;
        if mods[i] > t {
            theta = t;
        } else {
            break;
        }
    }
    if theta <= 0.0 {
        // the sum exceeded the radius only by rounding
        return;
    }
    for (v, &m) in z.iter_mut().zip(&mods) {
        if m <= theta {
            *v = Complex64::new(0.0, 0.0);
        } else {
            *v *= (m - theta) / m;
        }
    }
}
