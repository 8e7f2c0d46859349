//! Closed-form cubic and quartic solvers.
//!
//! The cubic `x^3 + A x^2 + B x + C` is solved by Cardano's formula after
//! the shift `x = t - A/3`; the quartic `x^4 + A x^3 + B x^2 + C x + D` by
//! Ferrari's method: shift away the cubic term, pick a positive root `u` of
//! the resolvent cubic and split the depressed quartic into two quadratics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A root counts as real when `|Im| < REAL_TOL * (1 + |Re|)`.
pub const REAL_TOL: f64 = 1e-9;

/// Below this `|Q2|` the quartic is treated as biquadratic.
pub const Q2_TOL: f64 = 1e-12;

pub fn is_real(z: Complex64) -> bool {
    z.im.abs() < REAL_TOL * (1.0 + z.re.abs())
}

/// Real parts of the roots classified as real, ascending.
pub fn real_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut v: Vec<f64> = roots
        .iter()
        .filter(|z| is_real(**z))
        .map(|z| z.re)
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CubicNature {
    /// `Delta > 0`: one real root and a conjugate pair.
    OneReal,
    /// `Delta = 0`: a repeated root, all roots real.
    Repeated,
    /// `Delta < 0`: three distinct real roots.
    ThreeReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicResolution {
    pub p: f64,
    pub q: f64,
    pub delta: f64,
    /// Angle of the trigonometric branch; `None` unless `delta < 0`.
    pub phi: Option<f64>,
    pub roots: [Complex64; 3],
    pub nature: CubicNature,
}

/// Discriminant-like quantity `(Q/2)^2 + (P/3)^3` of a monic cubic.
pub fn cubic_delta(a: f64, b: f64, c: f64) -> f64 {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    (q / 2.0).powi(2) + (p / 3.0).powi(3)
}

/// Cardano's formula for `x^3 + a x^2 + b x + c`.
pub fn solve_cubic_cardano(a: f64, b: f64, c: f64) -> CubicResolution {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let delta = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let shift = -a / 3.0;
    // scale of the terms entering delta, to decide "delta = 0"
    let scale = (q / 2.0).powi(2).max((p / 3.0).abs().powi(3));
    let zero = delta.abs() <= 1e-14 * scale || (scale == 0.0);
    let mut roots;
    let nature;
    let mut phi = None;
    if zero {
        // repeated root: t = 3Q/P (simple) and -3Q/(2P) (double), or triple 0
        nature = CubicNature::Repeated;
        if p.abs() < 1e-300 {
            let t = (-q).cbrt();
            roots = [Complex64::new(t + shift, 0.0); 3];
        } else {
            let t1 = 3.0 * q / p;
            let t2 = -3.0 * q / (2.0 * p);
            roots = [
                Complex64::new(t1 + shift, 0.0),
                Complex64::new(t2 + shift, 0.0),
                Complex64::new(t2 + shift, 0.0),
            ];
        }
    } else if delta > 0.0 {
        nature = CubicNature::OneReal;
        let sd = delta.sqrt();
        // pick the sign avoiding cancellation, then v = -P/(3u)
        let w = if q >= 0.0 {
            -q / 2.0 - sd
        } else {
            -q / 2.0 + sd
        };
        let u = w.cbrt();
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let t1 = u + v;
        let re = -(u + v) / 2.0;
        let im = (u - v) * 3f64.sqrt() / 2.0;
        roots = [
            Complex64::new(t1 + shift, 0.0),
            Complex64::new(re + shift, im.abs()),
            Complex64::new(re + shift, -im.abs()),
        ];
    } else {
        nature = CubicNature::ThreeReal;
        let r = (-p / 3.0).sqrt();
        let cos_phi = (-(q / 2.0) / (-(p / 3.0).powi(3)).sqrt()).clamp(-1.0, 1.0);
        let f = cos_phi.acos();
        phi = Some(f);
        roots = [0, 1, 2].map(|k| {
            let t = 2.0 * r * ((f + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
            Complex64::new(t + shift, 0.0)
        });
    }
    let coeffs = [1.0, a, b, c];
    for z in roots.iter_mut() {
        if z.im == 0.0 {
            if let Ok(x) = polish_root(&coeffs, z.re) {
                z.re = x;
            }
        }
    }
    CubicResolution {
        p,
        q,
        delta,
        phi,
        roots,
        nature,
    }
}

/// Coefficients `(P2, Q2, r)` of the depressed quartic `X^4 + P2 X^2 + Q2 X + r`
/// obtained with `x = X - A/4`.
pub fn depress_quartic(a: f64, b: f64, c: f64, d: f64) -> (f64, f64, f64) {
    let a2 = a * a;
    let p2 = -3.0 * a2 / 8.0 + b;
    let q2 = a2 * a / 8.0 - a * b / 2.0 + c;
    let r = -3.0 * a2 * a2 / 256.0 + a2 * b / 16.0 - a * c / 4.0 + d;
    (p2, q2, r)
}

/// Largest positive root of `8u^3 + 8 P2 u^2 + (2 P2^2 - 8 r) u - Q2^2`.
pub fn resolvent_positive_root(p2: f64, q2: f64, r: f64) -> Result<f64> {
    if q2.abs() < Q2_TOL {
        return Err(Error::DegenerateResolvent { q2 });
    }
    let (ra, rb, rc) = (p2, (2.0 * p2 * p2 - 8.0 * r) / 8.0, -q2 * q2 / 8.0);
    let cub = solve_cubic_cardano(ra, rb, rc);
    // the value at 0 is -Q2^2/8 < 0 and the cubic grows without bound, so a
    // positive root exists
    let u = cub
        .roots
        .iter()
        .filter(|z| is_real(**z))
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let coeffs = [1.0, ra, rb, rc];
    let u = polish_root(&coeffs, u).unwrap_or(u);
    if u > 0.0 {
        Ok(u)
    } else {
        // cancellation pushed the root to <= 0; fall back to bisection
        let mut hi = 1.0f64;
        while horner(&coeffs, hi) < 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if horner(&coeffs, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Ferrari split data when `Q2 != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FerrariSplit {
    pub u: f64,
    pub delta1: f64,
    pub delta2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FerrariDecomposition {
    pub p2: f64,
    pub q2: f64,
    pub r: f64,
    /// `None` when the biquadratic fallback was used.
    pub split: Option<FerrariSplit>,
    pub biquadratic: bool,
    /// `[x1+, x1-, x2+, x2-]`.
    pub roots: [Complex64; 4],
}

fn csqrt(v: f64) -> Complex64 {
    Complex64::new(v, 0.0).sqrt()
}

/// Ferrari's method for `x^4 + a x^3 + b x^2 + c x + d`.
pub fn solve_quartic_ferrari(a: f64, b: f64, c: f64, d: f64) -> FerrariDecomposition {
    let (p2, q2, r) = depress_quartic(a, b, c, d);
    let shift = Complex64::new(-a / 4.0, 0.0);
    let (split, mut roots) = match resolvent_positive_root(p2, q2, r) {
        Ok(u) => {
            let s = (2.0 * u).sqrt();
            let t = q2 / (2.0 * s);
            let delta1 = 2.0 * u - 4.0 * (p2 / 2.0 + u - t);
            let delta2 = 2.0 * u - 4.0 * (p2 / 2.0 + u + t);
            let (s1, s2) = (csqrt(delta1), csqrt(delta2));
            let h = Complex64::new(0.5, 0.0);
            let roots = [
                h * (Complex64::new(-s, 0.0) + s1) + shift,
                h * (Complex64::new(-s, 0.0) - s1) + shift,
                h * (Complex64::new(s, 0.0) + s2) + shift,
                h * (Complex64::new(s, 0.0) - s2) + shift,
            ];
            (Some(FerrariSplit { u, delta1, delta2 }), roots)
        }
        Err(_) => {
            // X^4 + P2 X^2 + r = 0 as a quadratic in X^2
            let disc = csqrt(p2 * p2 - 4.0 * r);
            let z1 = (Complex64::new(-p2, 0.0) + disc) / 2.0;
            let z2 = (Complex64::new(-p2, 0.0) - disc) / 2.0;
            let (r1, r2) = (z1.sqrt(), z2.sqrt());
            (None, [r1 + shift, -r1 + shift, r2 + shift, -r2 + shift])
        }
    };
    let coeffs = [1.0, a, b, c, d];
    for z in roots.iter_mut() {
        if is_real(*z) {
            z.im = 0.0;
            if let Ok(x) = polish_root(&coeffs, z.re) {
                z.re = x;
            }
        }
    }
    close_conjugates(&mut roots);
    FerrariDecomposition {
        p2,
        q2,
        r,
        biquadratic: split.is_none(),
        split,
        roots,
    }
}

/// Force complex roots into exact conjugate pairs.
fn close_conjugates(roots: &mut [Complex64; 4]) {
    let mut used = [false; 4];
    for i in 0..4 {
        if used[i] || roots[i].im == 0.0 {
            continue;
        }
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for j in (i + 1)..4 {
            if used[j] || roots[j].im == 0.0 {
                continue;
            }
            let dd = (roots[j] - roots[i].conj()).norm();
            if dd < best_d {
                best_d = dd;
                best = Some(j);
            }
        }
        if let Some(j) = best {
            let re = 0.5 * (roots[i].re + roots[j].re);
            let im = 0.5 * (roots[i].im - roots[j].im);
            roots[i] = Complex64::new(re, im);
            roots[j] = Complex64::new(re, -im);
            used[i] = true;
            used[j] = true;
        }
    }
}

/// Evaluate a polynomial with coefficients ordered highest degree first.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

fn horner_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Newton polish of a real root of the polynomial `coeffs` (highest degree
/// first). Fails if the iteration wanders more than `1e-3` from `x0`.
pub fn polish_root(coeffs: &[f64], x0: f64) -> Result<f64> {
    let scale = |x: f64| {
        let ax = x.abs();
        let mut s = 0.0f64;
        let mut pw = 1.0;
        for &c in coeffs.iter().rev() {
            s = s.max(c.abs() * pw);
            pw *= ax;
        }
        s.max(f64::MIN_POSITIVE)
    };
    let mut x = x0;
    for _ in 0..50 {
        let (p, dp) = horner_with_derivative(coeffs, x);
        if p.abs() <= 1e-15 * scale(x) {
            return Ok(x);
        }
        if dp == 0.0 {
            return Err(Error::NoConvergence(format!("zero derivative at x = {x}")));
        }
        let step = p / dp;
        let nx = x - step;
        if (nx - x0).abs() > 1e-3 {
            return Err(Error::NoConvergence(format!(
                "iterate left the 1e-3 neighbourhood of {x0}"
            )));
        }
        if step.abs() <= 4.0 * f64::EPSILON * nx.abs().max(f64::MIN_POSITIVE) {
            return Ok(nx);
        }
        x = nx;
    }
    let p = horner(coeffs, x);
    if p.abs() <= 1e-12 * scale(x) {
        Ok(x)
    } else {
        Err(Error::NoConvergence(format!(
            "50 iterations from {x0}, residual {p:e}"
        )))
    }
}
