//! Restarted primal-dual hybrid gradient for
//! `min_x |b - A x|_inf` subject to `|x|_1 <= c` (ball form) or
//! `|B x|_1 <= c` with `B^H B = I` (split form).

use num_complex::Complex64;

use super::dense::{l1, l2, linf, operator_norm, Mat};
use super::project::project_l1_ball;

pub(crate) enum Constraint<'a> {
    Ball,
    Split(&'a Mat),
}

pub(crate) struct Problem<'a> {
    pub a: &'a Mat,
    pub b: &'a [Complex64],
    pub c: f64,
    pub constraint: Constraint<'a>,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<Complex64>,
    pub u: Vec<Complex64>,
    pub dual: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
}

#[derive(Clone)]
struct Point {
    x: Vec<Complex64>,
    u: Vec<Complex64>,
    v: Vec<Complex64>,
}

struct Eval {
    xf: Vec<Complex64>,
    objective: f64,
    dual: f64,
}

fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}

impl Problem<'_> {
    fn m(&self) -> usize {
        self.a.rows
    }

    fn n(&self) -> usize {
        self.a.cols
    }

    fn feasible(&self, x: &[Complex64]) -> Vec<Complex64> {
        match self.constraint {
            Constraint::Ball => {
                let mut x = x.to_vec();
                project_l1_ball(&mut x, self.c);
                x
            }
            Constraint::Split(bm) => {
                let mut bx = zeros(bm.rows);
                bm.apply(x, &mut bx);
                let s = l1(&bx);
                let k = if s > self.c { self.c / s } else { 1.0 };
                x.iter().map(|v| v * k).collect()
            }
        }
    }

    fn primal_value(&self, x: &[Complex64]) -> f64 {
        let mut ax = zeros(self.m());
        self.a.apply(x, &mut ax);
        ax.iter().zip(self.b).map(|(a, b)| (b - a).norm()).fold(0.0, |a: f64, b| if b.is_nan() || b > a { b } else { a })
    }

    /// Lower bound from a dual point with `|u|_1 <= 1`.
    fn dual_value(&self, u: &[Complex64], v: Option<&[Complex64]>) -> f64 {
        let lin: f64 = u.iter().zip(self.b).map(|(u, b)| (u.conj() * b).re).sum();
        let mut g = zeros(self.n());
        self.a.apply_adjoint(u, &mut g);
        let support = match self.constraint {
            Constraint::Ball => linf(&g),
            Constraint::Split(bm) => {
                let mut w = zeros(bm.rows);
                bm.apply(&g, &mut w);
                let mut best = linf(&w);
                if let Some(v) = v {
                    // v' = v + B(g - B^H v) also satisfies B^H v' = g
                    let mut bhv = zeros(self.n());
                    bm.apply_adjoint(v, &mut bhv);
                    let diff: Vec<Complex64> = g.iter().zip(&bhv).map(|(a, b)| a - b).collect();
                    bm.apply(&diff, &mut w);
                    let corrected: Vec<Complex64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
                    best = best.min(linf(&corrected));
                }
                best
            }
        };
        lin - self.c * support
    }

    fn evaluate(&self, p: &Point) -> Eval {
        let xf = self.feasible(&p.x);
        let objective = self.primal_value(&xf);
        let v = match self.constraint {
            Constraint::Ball => None,
            Constraint::Split(_) => Some(p.v.as_slice()),
        };
        let dual = self.dual_value(&p.u, v);
        Eval { xf, objective, dual }
    }
}

pub(crate) struct Settings {
    pub tol: f64,
    pub max_iter: usize,
    pub check_every: usize,
}

/// Sign-matched dual point attaining `|b|_inf` when `A = 0`.
fn trivial(p: &Problem) -> Outcome {
    let mut u = zeros(p.m());
    let mut best = 0.0;
    let mut arg = None;
    for (i, v) in p.b.iter().enumerate() {
        if v.norm() > best {
            best = v.norm();
            arg = Some(i);
        }
    }
    if let Some(i) = arg {
        u[i] = p.b[i] / best;
    }
    Outcome { x: zeros(p.n()), dual: p.dual_value(&u, None), u, iterations: 0, restarts: 0, converged: true }
}

pub(crate) fn run(p: &Problem, s: &Settings) -> Outcome {
    let (m, n) = (p.m(), p.n());
    let m2 = match p.constraint {
        Constraint::Ball => 0,
        Constraint::Split(bm) => bm.rows,
    };
    let norm = match p.constraint {
        Constraint::Ball => operator_norm(&[p.a], 100),
        Constraint::Split(bm) => operator_norm(&[p.a, bm], 100),
    };
    if norm < 1e-300 || linf(p.b) == 0.0 {
        return trivial(p);
    }
    let eta = 0.95 / (norm * 1.01);
    let mut omega = 1.0f64;

    let mut cur = Point { x: zeros(n), u: zeros(m), v: zeros(m2) };
    let mut sum = Point { x: zeros(n), u: zeros(m), v: zeros(m2) };
    let mut count = 0usize;
    let mut anchor = cur.clone();
    let e0 = p.evaluate(&cur);
    let mut gap_anchor = e0.objective - e0.dual;
    let mut prev_candidate = f64::INFINITY;
    let mut best_x = e0.xf;
    let mut best_obj = e0.objective;
    let mut best_u = cur.u.clone();
    let mut best_dual = e0.dual;
    let mut last_restart = 0usize;
    let mut restarts = 0usize;
    let mut converged = best_obj - best_dual <= s.tol;

    let mut gu = zeros(n);
    let mut gv = zeros(n);
    let mut ax = zeros(m);
    let mut bx = zeros(m2);
    let mut x_new = zeros(n);
    let mut xbar = zeros(n);
    let mut iterations = 0;

    while !converged && iterations < s.max_iter {
        iterations += 1;
        let tau = eta / omega;
        let sigma = eta * omega;

        p.a.apply_adjoint(&cur.u, &mut gu);
        if let Constraint::Split(bm) = p.constraint {
            bm.apply_adjoint(&cur.v, &mut gv);
        }
        for k in 0..n {
            x_new[k] = cur.x[k] + tau * (gu[k] - gv[k]);
        }
        if let Constraint::Ball = p.constraint {
            project_l1_ball(&mut x_new, p.c);
        }
        for k in 0..n {
            xbar[k] = 2.0 * x_new[k] - cur.x[k];
        }
        p.a.apply(&xbar, &mut ax);
        for i in 0..m {
            cur.u[i] += sigma * (p.b[i] - ax[i]);
        }
        project_l1_ball(&mut cur.u, 1.0);
        if let Constraint::Split(bm) = p.constraint {
            bm.apply(&xbar, &mut bx);
            let mut z: Vec<Complex64> = cur.v.iter().zip(&bx).map(|(v, b)| v + sigma * b).collect();
            let mut w: Vec<Complex64> = z.iter().map(|v| v / sigma).collect();
            project_l1_ball(&mut w, p.c);
            for (zi, wi) in z.iter_mut().zip(&w) {
                *zi -= sigma * wi;
            }
            cur.v = z;
        }
        std::mem::swap(&mut cur.x, &mut x_new);

        count += 1;
        for (a, b) in sum.x.iter_mut().zip(&cur.x) {
            *a += b;
        }
        for (a, b) in sum.u.iter_mut().zip(&cur.u) {
            *a += b;
        }
        for (a, b) in sum.v.iter_mut().zip(&cur.v) {
            *a += b;
        }

        if iterations % s.check_every != 0 && iterations != s.max_iter {
            continue;
        }
        let k = count as f64;
        let avg = Point {
            x: sum.x.iter().map(|v| v / k).collect(),
            u: sum.u.iter().map(|v| v / k).collect(),
            v: sum.v.iter().map(|v| v / k).collect(),
        };
        let ec = p.evaluate(&cur);
        let ea = p.evaluate(&avg);
        for e in [&ec, &ea] {
            if e.objective < best_obj {
                best_obj = e.objective;
                best_x = e.xf.clone();
            }
        }
        if ec.dual > best_dual {
            best_dual = ec.dual;
            best_u = cur.u.clone();
        }
        if ea.dual > best_dual {
            best_dual = ea.dual;
            best_u = avg.u.clone();
        }
        if best_obj - best_dual <= s.tol {
            converged = true;
            break;
        }

        let gc = ec.objective - ec.dual;
        let ga = ea.objective - ea.dual;
        let (cand, gcand) = if ga < gc { (avg, ga) } else { (cur.clone(), gc) };
        let since = iterations - last_restart;
        let restart = gcand <= 0.2 * gap_anchor
            || (gcand <= 0.8 * gap_anchor && gcand > prev_candidate)
            || since as f64 >= 0.36 * iterations as f64;
        prev_candidate = gcand;
        if restart {
            let dx = l2(&cand.x.iter().zip(&anchor.x).map(|(a, b)| a - b).collect::<Vec<_>>());
            let du = {
                let su: f64 = cand.u.iter().zip(&anchor.u).map(|(a, b)| (a - b).norm_sqr()).sum();
                let sv: f64 = cand.v.iter().zip(&anchor.v).map(|(a, b)| (a - b).norm_sqr()).sum();
                (su + sv).sqrt()
            };
            if dx > 1e-10 && du > 1e-10 {
                omega = (0.5 * (du / dx).ln() + 0.5 * omega.ln()).exp();
            }
            cur = cand;
            anchor = cur.clone();
            sum = Point { x: zeros(n), u: zeros(m), v: zeros(m2) };
            count = 0;
            gap_anchor = gcand;
            prev_candidate = f64::INFINITY;
            last_restart = iterations;
            restarts += 1;
        }
    }
    Outcome { x: best_x, u: best_u, dual: best_dual, iterations, restarts, converged }
}
