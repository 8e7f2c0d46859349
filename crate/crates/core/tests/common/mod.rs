//! Independent oracles shared by the integration and acceptance suites.
//! Nothing here calls the closed-form solvers or the analytic formulas
//! under test; each check goes through an unrelated numerical route.
#![allow(dead_code)]

use holling_bt::model::{rhs, ModelParams, State};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

// ---------- polynomial roots ----------

/// Roots of the monic polynomial with `coeffs` (highest degree first,
/// leading 1 omitted) as eigenvalues of the companion matrix.
pub fn companion_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    // last column holds -c_0 .. -c_{n-1} from the top
    for (k, c) in coeffs.iter().enumerate() {
        m[(n - 1 - k, n - 1)] = -c;
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// Greedy multiset matching; returns the largest pairwise distance.
pub fn match_multisets(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut done = vec![false; a.len()];
    for (d, i, j) in pairs {
        if !done[i] && !used[j] {
            done[i] = true;
            used[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

// ---------- interior equilibria by sign scan ----------

/// Prey-isocline mismatch on the predator isocline, divided by `x`.
pub fn scan_function(p: &ModelParams, x: f64) -> f64 {
    let y = p.delta * (p.m + x) / p.eta;
    (1.0 - x) - x * y / (p.a * x * x + p.b * x + 1.0) - p.h / (p.c + x)
}

/// Interior equilibria from a sign scan of [`scan_function`] on `(0, 1)`
/// (no interior equilibrium has `x >= 1`), refined by bisection.
pub fn sign_scan_interior(p: &ModelParams, n: usize) -> Vec<(f64, f64)> {
    let f = |x: f64| scan_function(p, x);
    let mut out = Vec::new();
    let xs: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
    // start just off zero: with h = c the scan function vanishes at x = 0
    let x0 = 1e-12;
    let mut prev = (x0, f(x0));
    for &x in &xs {
        let v = f(x);
        if prev.1 == 0.0 {
            out.push(prev.0);
        } else if (prev.1 < 0.0) != (v < 0.0) && v != 0.0 {
            let (mut a, mut b, fa) = (prev.0, x, prev.1);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if (f(m) < 0.0) == (fa < 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev = (x, v);
    }
    out.into_iter()
        .map(|x| (x, p.delta * (p.m + x) / p.eta))
        .collect()
}

// ---------- finite differences ----------

fn comp(p: &ModelParams, x: f64, y: f64, k: usize) -> f64 {
    let (f, g) = rhs(p, State::new(x, y)).expect("in domain");
    if k == 0 {
        f
    } else {
        g
    }
}

/// Fourth-order central stencils for the 0th..3rd derivative.
fn stencil(order: usize) -> Vec<(i32, f64)> {
    match order {
        0 => vec![(0, 1.0)],
        1 => vec![
            (-2, 1.0 / 12.0),
            (-1, -8.0 / 12.0),
            (1, 8.0 / 12.0),
            (2, -1.0 / 12.0),
        ],
        2 => vec![
            (-2, -1.0 / 12.0),
            (-1, 16.0 / 12.0),
            (0, -30.0 / 12.0),
            (1, 16.0 / 12.0),
            (2, -1.0 / 12.0),
        ],
        3 => vec![
            (-3, 0.125),
            (-2, -1.0),
            (-1, 1.625),
            (1, -1.625),
            (2, 1.0),
            (3, -0.125),
        ],
        _ => unreachable!(),
    }
}

/// `d^{i+j} F_k / dx^i dy^j` at `(x, y)` by tensor-product stencils.
pub fn fd_partial(p: &ModelParams, x: f64, y: f64, k: usize, i: usize, j: usize, h: f64) -> f64 {
    let mut s = 0.0;
    for (a, wa) in stencil(i) {
        for (b, wb) in stencil(j) {
            s += wa * wb * comp(p, x + a as f64 * h, y + b as f64 * h, k);
        }
    }
    s / h.powi((i + j) as i32)
}

pub fn fd_jacobian(p: &ModelParams, s: State) -> [[f64; 2]; 2] {
    let h = 1e-3 * s.x.min(s.y).max(1e-3);
    [
        [
            fd_partial(p, s.x, s.y, 0, 1, 0, h),
            fd_partial(p, s.x, s.y, 0, 0, 1, h),
        ],
        [
            fd_partial(p, s.x, s.y, 1, 1, 0, h),
            fd_partial(p, s.x, s.y, 1, 0, 1, h),
        ],
    ]
}

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

/// Taylor coefficient `(1/(i! j!)) d^{i+j} F_k / dx^i dy^j`.
pub fn fd_taylor(p: &ModelParams, s: State, k: usize, i: usize, j: usize) -> f64 {
    let h = 2e-2 * s.x.min(s.y).min(1.0);
    fd_partial(p, s.x, s.y, k, i, j, h) / (factorial(i) * factorial(j))
}

// ---------- first Lyapunov coefficient (Kuznetsov) ----------

type CVec = [Complex64; 2];

fn field_at(p: &ModelParams, x: [f64; 2]) -> [f64; 2] {
    let (f, g) = rhs(p, State::new(x[0], x[1])).expect("in domain");
    [f, g]
}

/// Symmetric bilinear form of second derivatives on real vectors.
fn b_real(p: &ModelParams, x0: [f64; 2], u: [f64; 2], v: [f64; 2], h: f64) -> [f64; 2] {
    let at = |s: f64, t: f64| {
        field_at(
            p,
            [
                x0[0] + h * (s * u[0] + t * v[0]),
                x0[1] + h * (s * u[1] + t * v[1]),
            ],
        )
    };
    let (pp, pm, mp, mm) = (at(1.0, 1.0), at(1.0, -1.0), at(-1.0, 1.0), at(-1.0, -1.0));
    [0, 1].map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h))
}

/// Symmetric trilinear form of third derivatives on real vectors.
fn c_real(
    p: &ModelParams,
    x0: [f64; 2],
    u: [f64; 2],
    v: [f64; 2],
    w: [f64; 2],
    h: f64,
) -> [f64; 2] {
    let mut acc = [0.0; 2];
    for s in [-1.0, 1.0] {
        for t in [-1.0, 1.0] {
            for r in [-1.0, 1.0] {
                let pt = [
                    x0[0] + h * (s * u[0] + t * v[0] + r * w[0]),
                    x0[1] + h * (s * u[1] + t * v[1] + r * w[1]),
                ];
                let f = field_at(p, pt);
                for k in 0..2 {
                    acc[k] += s * t * r * f[k];
                }
            }
        }
    }
    acc.map(|a| a / (8.0 * h * h * h))
}

fn parts(z: CVec) -> ([f64; 2], [f64; 2]) {
    ([z[0].re, z[1].re], [z[0].im, z[1].im])
}

fn b_cplx(p: &ModelParams, x0: [f64; 2], u: CVec, v: CVec, h: f64) -> CVec {
    let (ur, ui) = parts(u);
    let (vr, vi) = parts(v);
    let rr = b_real(p, x0, ur, vr, h);
    let ii = b_real(p, x0, ui, vi, h);
    let ri = b_real(p, x0, ur, vi, h);
    let ir = b_real(p, x0, ui, vr, h);
    [0, 1].map(|k| Complex64::new(rr[k] - ii[k], ri[k] + ir[k]))
}

fn c_cplx(p: &ModelParams, x0: [f64; 2], u: CVec, v: CVec, w: CVec, h: f64) -> CVec {
    let (ur, ui) = parts(u);
    let (vr, vi) = parts(v);
    let (wr, wi) = parts(w);
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for mask in 0..8u32 {
        let pick = |bit: u32, r: [f64; 2], i: [f64; 2]| {
            if mask & bit == 0 {
                (r, false)
            } else {
                (i, true)
            }
        };
        let (a, ia) = pick(1, ur, ui);
        let (b, ib) = pick(2, vr, vi);
        let (c, ic) = pick(4, wr, wi);
        let n_i = ia as u32 + ib as u32 + ic as u32;
        let unit = Complex64::i().powu(n_i);
        let val = c_real(p, x0, a, b, c, h);
        for k in 0..2 {
            out[k] += unit * val[k];
        }
    }
    out
}

fn mat_solve(m: [[Complex64; 2]; 2], r: CVec) -> CVec {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        (r[0] * m[1][1] - m[0][1] * r[1]) / det,
        (m[0][0] * r[1] - m[1][0] * r[0]) / det,
    ]
}

/// First Lyapunov coefficient `l1` at an equilibrium with eigenvalues
/// `+-i omega`, from finite-difference multilinear forms of the raw field.
/// Richardson-extrapolated over two step sizes (the stencils are second order).
pub fn kuznetsov_l1(p: &ModelParams, eq: State) -> (f64, f64) {
    let (coarse, omega) = kuznetsov_l1_steps(p, eq, 0.5);
    let (fine, _) = kuznetsov_l1_steps(p, eq, 0.25);
    ((4.0 * fine - coarse) / 3.0, omega)
}

fn kuznetsov_l1_steps(p: &ModelParams, eq: State, k: f64) -> (f64, f64) {
    let x0 = [eq.x, eq.y];
    let j = fd_jacobian(p, eq);
    let omega = (j[0][0] * j[1][1] - j[0][1] * j[1][0]).sqrt();
    let i = Complex64::i();
    let c = |v: f64| Complex64::new(v, 0.0);
    // A q = i omega q, A^T p = -i omega p, <p, q> = conj(p) . q = 1
    let q: CVec = [c(j[0][1]), i * omega - j[0][0]];
    // first row of A^T + i omega: (a00 + i omega) p0 + a10 p1 = 0
    let p_raw: CVec = [c(j[1][0]), -(c(j[0][0]) + i * omega)];
    let dot = p_raw[0].conj() * q[0] + p_raw[1].conj() * q[1];
    let pn: CVec = [p_raw[0] / dot.conj(), p_raw[1] / dot.conj()];
    let qb: CVec = [q[0].conj(), q[1].conj()];
    let h2 = k * 1e-3 * eq.x.min(eq.y).min(1.0) / (q[0].norm() + q[1].norm());
    let h3 = k * 5e-3 * eq.x.min(eq.y).min(1.0) / (q[0].norm() + q[1].norm());
    let a = [[c(j[0][0]), c(j[0][1])], [c(j[1][0]), c(j[1][1])]];
    let bqqb = b_cplx(p, x0, q, qb, h2);
    let bqq = b_cplx(p, x0, q, q, h2);
    let s1 = mat_solve(a, bqqb);
    let m2 = [
        [2.0 * i * omega - a[0][0], -a[0][1]],
        [-a[1][0], 2.0 * i * omega - a[1][1]],
    ];
    let s2 = mat_solve(m2, bqq);
    let cqqqb = c_cplx(p, x0, q, q, qb, h3);
    let t1 = b_cplx(p, x0, q, s1, h2);
    let t2 = b_cplx(p, x0, qb, s2, h2);
    let inner = |v: CVec| pn[0].conj() * v[0] + pn[1].conj() * v[1];
    let val = inner(cqqqb) - 2.0 * inner(t1) + inner(t2);
    (val.re / (2.0 * omega), omega)
}

// ---------- equilibria by Newton on the 2-D system ----------

/// Newton's method on the full system with a finite-difference Jacobian.
pub fn newton_equilibrium(p: &ModelParams, mut s: State) -> Option<State> {
    for _ in 0..100 {
        let (f, g) = rhs(p, s).ok()?;
        if f.abs().max(g.abs()) < 1e-15 {
            return Some(s);
        }
        let j = fd_jacobian(p, s);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let dx = (f * j[1][1] - j[0][1] * g) / det;
        let dy = (j[0][0] * g - j[1][0] * f) / det;
        s = State::new(s.x - dx, s.y - dy);
        if dx.abs() < 1e-16 * (1.0 + s.x.abs()) && dy.abs() < 1e-16 * (1.0 + s.y.abs()) {
            return Some(s);
        }
    }
    let (f, g) = rhs(p, s).ok()?;
    (f.abs().max(g.abs()) < 1e-12).then_some(s)
}

// ---------- random admissible parameters ----------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Draw {
    K1,
    K2,
    K3,
}

/// Random admissible parameters whose `(h, c)` lie in the requested region.
pub fn draw_params<R: Rng>(rng: &mut R, region: Draw) -> ModelParams {
    let a: f64 = rng.gen_range(0.2..3.0);
    let lim = 2.0 * f64::sqrt(a);
    let b = rng.gen_range((-0.95 * lim)..4.0);
    let c: f64 = rng.gen_range(0.02..0.95);
    let h = match region {
        Draw::K2 => c,
        Draw::K3 => rng.gen_range(0.01 * c..0.99 * c),
        Draw::K1 => {
            let top = (c + 1.0).powi(2) / 4.0;
            c + rng.gen_range(0.01..0.99) * (top - c)
        }
    };
    let delta = rng.gen_range(0.01..1.0);
    let eta = rng.gen_range(0.05..1.0);
    let m = rng.gen_range(0.0..1.5);
    ModelParams {
        a,
        b,
        c,
        h,
        delta,
        eta,
        m,
    }
}
