//! Trivial and interior equilibria and the harvesting regions K1, K2, K3.
//!
//! Interior equilibria lie on the predator isocline `y = delta (m + x) / eta`
//! and on the prey isocline `y = p(x) G(x)`. Eliminating `y` gives a monic
//! quartic in `x`; when `h = c` its constant term vanishes and the positive
//! roots come from a cubic instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{residual, ModelParams, State, EQUILIBRIUM_TOL};
use crate::polyroots::{self, CubicNature, CubicResolution, FerrariDecomposition};

/// Relative tolerance deciding `h = c`.
pub const HC_TOL: f64 = 1e-10;

/// Roots at or below this are not treated as positive.
pub const POSITIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    Origin,
    PreyExtinction,
    PredatorFree,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub x: f64,
    pub y: f64,
    pub kind: EquilibriumKind,
    /// Which branch of the analysis produced the point, e.g. `K1-Ferrari-x2plus`.
    pub source: String,
}

impl Equilibrium {
    pub fn state(&self) -> State {
        State::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    K1,
    K2,
    K3,
    None,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Region::K1 => "K1",
            Region::K2 => "K2",
            Region::K3 => "K3",
            Region::None => "None",
        };
        f.write_str(s)
    }
}

pub fn h_equals_c(h: f64, c: f64, tol: f64) -> bool {
    (h - c).abs() < tol * h.max(c).max(1.0)
}

pub fn classify_region(h: f64, c: f64) -> Region {
    classify_region_with_tol(h, c, HC_TOL)
}

pub fn classify_region_with_tol(h: f64, c: f64, tol: f64) -> Region {
    if h_equals_c(h, c, tol) {
        if c < 1.0 {
            Region::K2
        } else {
            Region::None
        }
    } else if h < c {
        Region::K3
    } else if c < 1.0 && h < (c + 1.0).powi(2) / 4.0 {
        Region::K1
    } else {
        Region::None
    }
}

/// Coefficients of the monic quartic `x^4 + A x^3 + B x^2 + C x + D` whose
/// roots are the abscissae of the interior equilibria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl QuarticCoeffs {
    pub fn eval(&self, x: f64) -> f64 {
        polyroots::horner(&[1.0, self.a, self.b, self.c, self.d], x)
    }
}

/// The coefficient table exactly as commonly printed, with `delta/eta` in `A`.
/// Kept for comparison only: it agrees with the elimination only when `a = 1`.
pub fn printed_quartic_coeffs(p: &ModelParams) -> QuarticCoeffs {
    let QuarticCoeffs { b, c, d, .. } = quartic_coeffs_unchecked(p);
    QuarticCoeffs {
        a: (p.c - 1.0) + p.b / p.a + p.delta / p.eta,
        b,
        c,
        d,
    }
}

fn quartic_coeffs_unchecked(p: &ModelParams) -> QuarticCoeffs {
    let (a, b, c, h, d, eta, m) = (p.a, p.b, p.c, p.h, p.delta, p.eta, p.m);
    QuarticCoeffs {
        a: (c - 1.0) + b / a + d / (a * eta),
        b: (h - c) + (b / a) * (c - 1.0) + d * (c + m) / (a * eta) + 1.0 / a,
        c: (b / a) * (h - c) + (c - 1.0) / a + c * d * m / (a * eta),
        d: (h - c) / a,
    }
}

/// `-a P(x)`, expanded from the isocline equation with denominators cleared.
fn cleared_isocline(p: &ModelParams, x: f64) -> f64 {
    p.p(x) * (-x * x + (1.0 - p.c) * x + (p.c - p.h)) - p.delta * x * (p.m + x) * (p.c + x) / p.eta
}

/// Quartic coefficients, cross-checked against the cleared isocline equation
/// at five abscissae.
pub fn quartic_coeffs(p: &ModelParams) -> Result<QuarticCoeffs> {
    let q = quartic_coeffs_unchecked(p);
    for x in [0.1, 0.5, 1.0, 2.0, 3.0] {
        let want = cleared_isocline(p, x);
        let got = -p.a * q.eval(x);
        let scale = 1.0
            + want.abs()
            + p.a
                * (x.powi(4)
                    + (q.a * x.powi(3)).abs()
                    + (q.b * x * x).abs()
                    + (q.c * x).abs()
                    + q.d.abs());
        if (got - want).abs() > 1e-7 * scale {
            return Err(Error::CoefficientMismatch {
                name: "P(x)",
                printed: got,
                derived: want,
            });
        }
    }
    Ok(q)
}

/// Prey isocline `y = p(x) G(x)`.
pub fn isocline_y(p: &ModelParams, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::DomainError(format!(
            "prey isocline undefined at x = {x}"
        )));
    }
    Ok(p.p(x) * (-x * x + (1.0 - p.c) * x + (p.c - p.h)) / (x * (p.c + x)))
}

/// Predator isocline `y = delta (m + x) / eta`.
pub fn predator_isocline_y(p: &ModelParams, x: f64) -> f64 {
    p.delta * (p.m + x) / p.eta
}

/// Origin, prey-extinction point and predator-free points.
pub fn trivial_equilibria(p: &ModelParams) -> Vec<Equilibrium> {
    trivial_equilibria_with_tol(p, HC_TOL)
}

pub fn trivial_equilibria_with_tol(p: &ModelParams, tol: f64) -> Vec<Equilibrium> {
    let mut out = vec![Equilibrium {
        x: 0.0,
        y: 0.0,
        kind: EquilibriumKind::Origin,
        source: "E".into(),
    }];
    if p.m > 0.0 {
        out.push(Equilibrium {
            x: 0.0,
            y: p.delta * p.m / p.eta,
            kind: EquilibriumKind::PreyExtinction,
            source: "Ey".into(),
        });
    }
    for (x, tag) in predator_free_x(p, tol) {
        out.push(Equilibrium {
            x,
            y: 0.0,
            kind: EquilibriumKind::PredatorFree,
            source: tag.into(),
        });
    }
    out
}

/// Positive roots of `x^2 - (1 - c) x + (h - c) = 0`, tagged `E+`, `E-`.
pub(crate) fn predator_free_x(p: &ModelParams, tol: f64) -> Vec<(f64, &'static str)> {
    let c = p.c;
    if h_equals_c(p.h, c, tol) {
        return if c < 1.0 {
            vec![(1.0 - c, "E+")]
        } else {
            vec![]
        };
    }
    let disc = (c - 1.0).powi(2) - 4.0 * (p.h - c);
    if disc < 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    // stable pair: the larger-magnitude root first, the other through the product
    let big = if 1.0 - c >= 0.0 {
        (1.0 - c + sq) / 2.0
    } else {
        (1.0 - c - sq) / 2.0
    };
    let small = if big != 0.0 { (p.h - c) / big } else { 0.0 };
    let (xp, xm) = if big >= small {
        (big, small)
    } else {
        (small, big)
    };
    let mut out = Vec::new();
    if xp > POSITIVE_TOL {
        out.push((xp, "E+"));
    }
    if disc > 0.0 && xm > POSITIVE_TOL {
        out.push((xm, "E-"));
    }
    out
}

/// Which closed-form route produced the interior roots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InteriorRoute {
    Cardano(CubicResolution),
    Ferrari(FerrariDecomposition),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorReport {
    pub region: Region,
    pub coeffs: QuarticCoeffs,
    pub route: InteriorRoute,
    pub equilibria: Vec<Equilibrium>,
    pub discarded_complex: usize,
    pub discarded_nonpositive: usize,
    pub discarded_residual: usize,
    /// Pairs of roots closer than the residual tolerance can separate,
    /// reported as one (tangential) equilibrium.
    pub merged_tangencies: usize,
}

pub fn interior_equilibria(p: &ModelParams) -> Result<Vec<Equilibrium>> {
    Ok(interior_equilibria_detailed(p, HC_TOL)?.equilibria)
}

/// Interior equilibria with the intermediate closed-form data and counts of
/// discarded roots.
pub fn interior_equilibria_detailed(p: &ModelParams, tol: f64) -> Result<InteriorReport> {
    let coeffs = quartic_coeffs(p)?;
    let region = classify_region_with_tol(p.h, p.c, tol);
    let region_tag = region.to_string();
    let mut candidates: Vec<(f64, String)> = Vec::new();
    let mut discarded_complex = 0;
    let route = if h_equals_c(p.h, p.c, tol) {
        let cub = polyroots::solve_cubic_cardano(coeffs.a, coeffs.b, coeffs.c);
        let nature = match cub.nature {
            CubicNature::OneReal => "D>0",
            CubicNature::Repeated => "D=0",
            CubicNature::ThreeReal => "D<0",
        };
        for (i, z) in cub.roots.iter().enumerate() {
            if polyroots::is_real(*z) {
                candidates.push((z.re, format!("{region_tag}-Cardano-{nature}-x{}", i + 1)));
            } else {
                discarded_complex += 1;
            }
        }
        InteriorRoute::Cardano(cub)
    } else {
        let fer = polyroots::solve_quartic_ferrari(coeffs.a, coeffs.b, coeffs.c, coeffs.d);
        if fer.biquadratic {
            return Err(Error::DegenerateResolvent { q2: fer.q2 });
        }
        let names = ["x1plus", "x1minus", "x2plus", "x2minus"];
        for (z, name) in fer.roots.iter().zip(names) {
            if polyroots::is_real(*z) {
                candidates.push((z.re, format!("{region_tag}-Ferrari-{name}")));
            } else {
                discarded_complex += 1;
            }
        }
        InteriorRoute::Ferrari(fer)
    };
    let mut equilibria = Vec::new();
    let mut discarded_nonpositive = 0;
    let mut discarded_residual = 0;
    for (x, source) in candidates {
        if x <= POSITIVE_TOL {
            discarded_nonpositive += 1;
            continue;
        }
        let x = polish_interior_x(p, x);
        let y = predator_isocline_y(p, x);
        match residual(p, State::new(x, y)) {
            Ok(r) if r < EQUILIBRIUM_TOL => equilibria.push(Equilibrium {
                x,
                y,
                kind: EquilibriumKind::Interior,
                source,
            }),
            _ => discarded_residual += 1,
        }
    }
    equilibria.sort_by(|a, b| a.x.total_cmp(&b.x));
    let merged_tangencies = merge_tangent_pairs(p, &mut equilibria);
    Ok(InteriorReport {
        region,
        coeffs,
        route,
        equilibria,
        discarded_complex,
        discarded_nonpositive,
        discarded_residual,
        merged_tangencies,
    })
}

/// Two neighbouring roots whose midpoint is itself an equilibrium within
/// [`EQUILIBRIUM_TOL`] are a double root split by rounding in the data (the
/// isoclines touch); replace them by the midpoint.
fn merge_tangent_pairs(p: &ModelParams, eqs: &mut Vec<Equilibrium>) -> usize {
    let mut merged = 0;
    let mut i = 0;
    while i + 1 < eqs.len() {
        let (x1, x2) = (eqs[i].x, eqs[i + 1].x);
        let xm = 0.5 * (x1 + x2);
        let ym = predator_isocline_y(p, xm);
        let close = (x2 - x1) < MERGE_GAP * (1.0 + xm);
        if close && matches!(residual(p, State::new(xm, ym)), Ok(r) if r < EQUILIBRIUM_TOL) {
            let src = format!("{}+{}-tangent", eqs[i].source, eqs[i + 1].source);
            eqs[i] = Equilibrium {
                x: xm,
                y: ym,
                kind: EquilibriumKind::Interior,
                source: src,
            };
            eqs.remove(i + 1);
            merged += 1;
        } else {
            i += 1;
        }
    }
    merged
}

/// Largest gap considered for merging a root pair.
pub const MERGE_GAP: f64 = 1e-4;

/// Newton on `phi(x) = (1 - x) - x y(x)/p(x) - h/(c + x)` with `y` on the
/// predator isocline; returns the input unchanged if the iteration does not
/// improve the residual.
fn polish_interior_x(p: &ModelParams, x0: f64) -> f64 {
    use crate::dual::{Dual, Scalar};
    let phi = |x: Dual| {
        let one = Dual::cst(1.0);
        let y = Dual::cst(p.delta / p.eta) * (Dual::cst(p.m) + x);
        let den = (Dual::cst(p.a) * x + Dual::cst(p.b)) * x + one;
        (one - x) - x * y / den - Dual::cst(p.h) / (Dual::cst(p.c) + x)
    };
    let mut x = x0;
    let mut best = (phi(Dual::cst(x0)).re.abs(), x0);
    for _ in 0..8 {
        let v = phi(Dual::var(x));
        if v.eps == 0.0 {
            break;
        }
        let nx = x - v.re / v.eps;
        if !(nx > 0.0) || (nx - x0).abs() > 1e-6 * (1.0 + x0) {
            break;
        }
        x = nx;
        let r = phi(Dual::cst(x)).re.abs();
        if r < best.0 {
            best = (r, x);
        }
        if r == 0.0 {
            break;
        }
    }
    best.1
}

/// All equilibria: trivial ones first, then interior ones by increasing `x`.
pub fn all_equilibria(p: &ModelParams) -> Result<Vec<Equilibrium>> {
    let mut v = trivial_equilibria(p);
    v.extend(interior_equilibria(p)?);
    Ok(v)
}

/// Discriminant `Delta` of the cubic governing the case `h = c`.
pub fn k2_cubic_delta(p: &ModelParams) -> Result<f64> {
    if !h_equals_c(p.h, p.c, HC_TOL) {
        return Err(Error::DomainError(format!(
            "h = {} differs from c = {}",
            p.h, p.c
        )));
    }
    let q = quartic_coeffs(p)?;
    Ok(polyroots::cubic_delta(q.a, q.b, q.c))
}

/// Values of `delta` in `[lo, hi]` where the `h = c` cubic changes its root
/// structure (`Delta = 0`), bracketed on `n` samples and bisected to
/// machine precision.
pub fn k2_delta_crossings(p: &ModelParams, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    let f = |d: f64| k2_cubic_delta(&ModelParams { delta: d, ..*p });
    let n = n.max(1);
    let mut out = Vec::new();
    let mut prev = (lo, f(lo)?);
    for i in 1..=n {
        let d = lo + (hi - lo) * i as f64 / n as f64;
        let v = f(d)?;
        if prev.1 == 0.0 {
            out.push(prev.0);
        } else if (prev.1 < 0.0) != (v < 0.0) && v != 0.0 {
            let (mut a, mut b, neg_a) = (prev.0, d, prev.1 < 0.0);
            loop {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = f(m)?;
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if (fm < 0.0) == neg_a {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev = (d, v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> ModelParams {
        ModelParams {
            a: 2.0,
            b: -2.82,
            c: 0.05,
            h: 0.1715598183,
            delta: 0.03070149222,
            eta: 0.1,
            m: 0.8,
        }
    }

    #[test]
    fn regions() {
        assert_eq!(classify_region(0.3, 0.3), Region::K2);
        assert_eq!(classify_region(0.4, 0.3), Region::K1);
        assert_eq!(classify_region(0.3, 0.5), Region::K3);
        assert_eq!(classify_region(0.5, 0.3), Region::None);
        assert_eq!(classify_region(1.5, 1.5), Region::None);
    }

    #[test]
    fn trivial_example() {
        let eqs = trivial_equilibria(&example());
        assert_eq!(eqs.len(), 4);
        assert!((eqs[1].y - 0.2456119378).abs() < 1e-9);
        assert!((eqs[2].x - 0.7975913540).abs() < 1e-9);
        assert!((eqs[3].x - 0.1524086460).abs() < 1e-9);
    }

    #[test]
    fn k2_single_predator_free() {
        let p = ModelParams {
            a: 1.0,
            b: 20.0,
            c: 0.3,
            h: 0.3,
            delta: 0.5,
            eta: 0.1,
            m: 1.0,
        };
        let pf: Vec<_> = trivial_equilibria(&p)
            .into_iter()
            .filter(|e| e.kind == EquilibriumKind::PredatorFree)
            .collect();
        assert_eq!(pf.len(), 1);
        assert!((pf[0].x - 0.7).abs() < 1e-15);
    }

    #[test]
    fn quartic_constant_term() {
        let q = quartic_coeffs(&example()).unwrap();
        assert!((q.d - (0.1715598183 - 0.05) / 2.0).abs() < 1e-12);
        let printed = printed_quartic_coeffs(&example());
        assert!((printed.a - q.a).abs() > 1e-3);
    }

    #[test]
    fn bt_example_has_one_interior_point() {
        let e = interior_equilibria(&example()).unwrap();
        assert_eq!(e.len(), 1, "{e:?}");
        assert!((e[0].x - 0.2187994431).abs() < 1e-6);
        assert!((e[0].y - 0.3127866314).abs() < 1e-6);
    }

    #[test]
    fn isocline_domain() {
        assert!(isocline_y(&example(), 0.0).is_err());
        let p = ModelParams {
            a: 1.0,
            b: 2.0,
            c: 0.2,
            h: 0.2,
            delta: 0.5,
            eta: 0.1,
            m: 1.0,
        };
        let v = isocline_y(&p, 1.0).unwrap();
        assert!((v - (-(p.a + p.b + 1.0) * p.c / (1.0 + p.c))).abs() < 1e-14);
    }
}
