//! Hopf points of the interior branch: location in `delta`, transversality,
//! and the cycle-stability coefficient (printed closed form and an
//! independent normal-form evaluation).

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::{Dual, Scalar};
use crate::equilibria::{interior_equilibria, Equilibrium};
use crate::error::{Error, Result};
use crate::model::{field, jacobian, taylor_jet, JetCoefficients, ModelParams, State};
use crate::sim::{section_returns, IntegrateOptions, Section};
use crate::stability::zero_tol;

/// Step used for the finite-difference transversality check.
pub const TRANSVERSALITY_STEP: f64 = 1e-6;
/// Relative agreement expected between printed and numeric coefficients.
pub const L_AGREEMENT: f64 = 1e-4;
/// Seed radii of the empirical return-map probe.
pub const PROBE_RADII: [f64; 2] = [1e-3, 5e-4];

/// Cycle stability read off `sign(l)` with the convention "stable if l > 0".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConventionVerdict {
    StableByConvention,
    RepellingByConvention,
}

impl ConventionVerdict {
    pub fn from_sign(l: f64) -> Self {
        if l > 0.0 {
            ConventionVerdict::StableByConvention
        } else {
            ConventionVerdict::RepellingByConvention
        }
    }
}

/// Behaviour of small orbits around the Hopf point, from section returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmpiricalVerdict {
    Attracting,
    Repelling,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transversality {
    /// Finite-difference `d(trace)/d delta` of `alpha10(x, y) - delta`.
    pub value: f64,
    /// False when `(x, y)` is not an equilibrium: the formula still has slope
    /// -1 but no longer describes an eigenvalue crossing.
    pub applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfData {
    pub delta_h: f64,
    pub x: f64,
    pub y: f64,
    pub omega: f64,
    pub trace: f64,
    pub det: f64,
    /// Printed closed-form coefficient.
    pub l: f64,
    /// Guckenheimer-Holmes coefficient in canonical coordinates.
    pub l_numeric: f64,
    pub transversality: f64,
    /// `d(trace)/d delta` following the equilibrium as `delta` moves.
    pub transversality_branch: f64,
    /// Verdict of the "stable if l > 0" convention on the numeric coefficient.
    pub cycle_verdict: ConventionVerdict,
    /// Verdict of the "stable if l > 0" convention on the printed coefficient.
    pub printed_verdict: ConventionVerdict,
    pub empirical_verdict: EmpiricalVerdict,
    /// One-revolution radius ratios `r1/r0` at [`PROBE_RADII`].
    pub return_ratios: [f64; 2],
    pub diagnostics: Vec<String>,
}

/// Trace as written with the predator isocline substituted: `alpha10 - delta`.
pub fn trace_formula(p: &ModelParams, x: f64, y: f64) -> f64 {
    let (fx, _) = field(p, Dual::var(x), Dual::cst(y));
    fx.eps - p.delta
}

/// `d(trace)/d delta` by central differences of [`trace_formula`].
pub fn transversality(p: &ModelParams, eq: State) -> Transversality {
    let d = TRANSVERSALITY_STEP;
    let tp = trace_formula(
        &ModelParams {
            delta: p.delta + d,
            ..*p
        },
        eq.x,
        eq.y,
    );
    let tm = trace_formula(
        &ModelParams {
            delta: p.delta - d,
            ..*p
        },
        eq.x,
        eq.y,
    );
    let applicable = crate::model::residual(p, eq)
        .map(|r| r < crate::model::EQUILIBRIUM_TOL)
        .unwrap_or(false);
    Transversality {
        value: (tp - tm) / (2.0 * d),
        applicable,
    }
}

/// Printed cycle-stability coefficient evaluated verbatim from the jet.
/// The `omega_2` factor of the last quadratic term is read as `omega^2`.
pub fn lyapunov_coefficient_l(p: &ModelParams, eq: State) -> Result<f64> {
    let j = taylor_jet(p, eq)?;
    let det = j.alpha10 * j.beta01 - j.alpha01 * j.beta10;
    if det <= 0.0 {
        return Err(Error::NoHopf(format!("det = {det} <= 0")));
    }
    printed_l(&j, p.delta, det.sqrt())
}

fn printed_l(j: &JetCoefficients, delta: f64, w: f64) -> Result<f64> {
    let a01 = j.alpha01;
    if a01 == 0.0 {
        return Err(Error::DomainError("alpha01 = 0".into()));
    }
    let d = delta;
    let a2 = a01 * a01;
    let cubic = j.alpha21 * w / (8.0 * a01) + j.beta12 * w * w / (8.0 * a2)
        - 3.0 * j.beta21 * d / (8.0 * a01)
        + 3.0 * j.beta12 * d * d / (8.0 * a2)
        + 3.0 * j.beta30 / 8.0;
    let f_yy = 2.0 * j.alpha20 - 2.0 * j.alpha11 * d / a01;
    let g_xy = j.beta11 * w / a01 - 2.0 * j.beta02 * d * w / a2;
    let g_sum = 2.0 * j.beta02 * w * w / a2 - 2.0 * j.beta11 * d / a01
        + 2.0 * j.beta20
        + 2.0 * j.beta02 * d * d / a2;
    let g_yy = -2.0 * j.beta11 * d / a01 + 2.0 * j.beta20 + 2.0 * j.beta02 * d * d / a2;
    let quad1 = (j.alpha11 * w / a01 * f_yy - g_xy * g_sum) / (16.0 * w);
    let quad2 = (f_yy * g_yy) / (16.0 * w);
    Ok(cubic + quad1 + quad2)
}

/// Partial derivatives of a planar field `(f, g)` at the origin, up to the
/// orders entering the Hopf coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarJet3 {
    pub f_xx: f64,
    pub f_xy: f64,
    pub f_yy: f64,
    pub f_xxx: f64,
    pub f_xyy: f64,
    pub g_xx: f64,
    pub g_xy: f64,
    pub g_yy: f64,
    pub g_xxy: f64,
    pub g_yyy: f64,
}

/// Guckenheimer-Holmes coefficient `a` for a field whose linear part is
/// `[[0, -omega], [omega, 0]]`.
pub fn gh_first_coefficient(d: &PlanarJet3, omega: f64) -> f64 {
    (d.f_xxx + d.f_xyy + d.g_xxy + d.g_yyy) / 16.0
        + (d.f_xy * (d.f_xx + d.f_yy) - d.g_xy * (d.g_xx + d.g_yy) - d.f_xx * d.g_xx
            + d.f_yy * d.g_yy)
            / (16.0 * omega)
}

/// Canonical frame at a Hopf point: columns `Im q`, `Re q` of the
/// eigenvector `q = (alpha01, i omega - alpha10)` for `i omega`.
pub fn canonical_frame(j: &Matrix2<f64>, omega: f64) -> Matrix2<f64> {
    Matrix2::new(0.0, j[(0, 1)], omega, -j[(0, 0)])
}

/// Numeric Hopf coefficient: transform to canonical coordinates, take first
/// derivatives exactly (dual numbers) and higher ones by fourth-order
/// differences of those.
pub fn lyapunov_coefficient_numeric(p: &ModelParams, eq: State) -> Result<f64> {
    let j = jacobian(p, eq)?;
    let det = j.determinant();
    if det <= 0.0 {
        return Err(Error::NoHopf(format!("det = {det} <= 0")));
    }
    let omega = det.sqrt();
    let t = canonical_frame(&j, omega);
    let ti = t
        .try_inverse()
        .ok_or(Error::SingularSolve(t.determinant()))?;
    // first-derivative columns of the transformed field at Y
    let grad = |y1: f64, y2: f64, k: usize| -> [f64; 2] {
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            let (v1, v2) = if k == 0 {
                (Dual::var(y1), Dual::cst(y2))
            } else {
                (Dual::cst(y1), Dual::var(y2))
            };
            let x = Dual::cst(eq.x) + Dual::cst(t[(0, 0)]) * v1 + Dual::cst(t[(0, 1)]) * v2;
            let y = Dual::cst(eq.y) + Dual::cst(t[(1, 0)]) * v1 + Dual::cst(t[(1, 1)]) * v2;
            let (fx, fy) = field(p, x, y);
            let r = Dual::cst(ti[(i, 0)]) * fx + Dual::cst(ti[(i, 1)]) * fy;
            *o = r.eps;
        }
        out
    };
    let scale = t.abs().max().max(1e-300);
    let h = 1e-3 * (eq.x.min(eq.y).max(1e-3)) / scale;
    // d/dY_dir of component `comp` of dF/dY_k, first and second derivative
    let d12 = |k: usize, comp: usize, dir: usize| -> (f64, f64) {
        let at = |s: f64| {
            let (y1, y2) = if dir == 0 { (s * h, 0.0) } else { (0.0, s * h) };
            grad(y1, y2, k)[comp]
        };
        let (p1, m1, p2, m2, c) = (at(1.0), at(-1.0), at(2.0), at(-2.0), at(0.0));
        let first = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
        let second = (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h);
        (first, second)
    };
    let (f_xx, f_xxx) = d12(0, 0, 0);
    let (f_xy, f_xyy) = d12(0, 0, 1);
    let (f_yy, _) = d12(1, 0, 1);
    let (g_xx, _) = d12(0, 1, 0);
    let (g_xy, _) = d12(0, 1, 1);
    let (g_yy, g_yyy) = d12(1, 1, 1);
    let (_, g_xxy) = d12(1, 1, 0);
    let jet = PlanarJet3 {
        f_xx,
        f_xy,
        f_yy,
        f_xxx,
        f_xyy,
        g_xx,
        g_xy,
        g_yy,
        g_xxy,
        g_yyy,
    };
    Ok(gh_first_coefficient(&jet, omega))
}

/// One-revolution radius ratio on the half-line `x > x*` from seed `r0`.
fn return_ratio(p: &ModelParams, eq: State, r0: f64, period: f64) -> Option<f64> {
    let opt = IntegrateOptions {
        tol: 1e-12,
        ..Default::default()
    };
    let (ret, _) = section_returns(p, Section { xc: eq.x, yc: eq.y }, r0, 1, 4.0 * period, &opt);
    ret.first().map(|r| r.r / r0)
}

/// Full Hopf record for an equilibrium at which the trace vanishes.
pub fn hopf_at(p: &ModelParams, eq: State) -> Result<HopfData> {
    let j = jacobian(p, eq)?;
    let (tr, det) = (j.trace(), j.determinant());
    let tz = zero_tol(&j);
    if det.abs() <= tz && tr.abs() <= tz {
        return Err(Error::NoHopf(format!(
            "double zero eigenvalue at ({}, {}): Bogdanov-Takens point, not Hopf",
            eq.x, eq.y
        )));
    }
    if det <= 0.0 {
        return Err(Error::NoHopf(format!("det = {det} <= 0 (neutral saddle)")));
    }
    let omega = det.sqrt();
    let mut diagnostics = Vec::new();
    let l = lyapunov_coefficient_l(p, eq)?;
    let l_numeric = lyapunov_coefficient_numeric(p, eq)?;
    if (l - l_numeric).abs() > L_AGREEMENT * l_numeric.abs() {
        diagnostics.push(format!(
            "PrintedCoefficientMismatch: printed l = {l:.10e}, canonical-frame value = {l_numeric:.10e}"
        ));
    }
    let trans = transversality(p, eq);
    let transversality_branch = branch_trace_slope(p, eq).unwrap_or(f64::NAN);
    let period = 2.0 * std::f64::consts::PI / omega;
    let ratios: Vec<Option<f64>> = PROBE_RADII
        .par_iter()
        .map(|&r| return_ratio(p, eq, r, period))
        .collect();
    let return_ratios = [ratios[0].unwrap_or(f64::NAN), ratios[1].unwrap_or(f64::NAN)];
    let empirical_verdict = if return_ratios.iter().all(|&r| r > 1.0) {
        EmpiricalVerdict::Repelling
    } else if return_ratios.iter().all(|&r| r < 1.0) {
        EmpiricalVerdict::Attracting
    } else {
        EmpiricalVerdict::Inconclusive
    };
    let cycle_verdict = ConventionVerdict::from_sign(l_numeric);
    let expected = if l_numeric > 0.0 {
        EmpiricalVerdict::Repelling
    } else {
        EmpiricalVerdict::Attracting
    };
    if empirical_verdict != EmpiricalVerdict::Inconclusive && empirical_verdict != expected {
        diagnostics.push(format!(
            "NormalFormMismatch: canonical coefficient {l_numeric:.3e} predicts {expected:?}, returns show {empirical_verdict:?}"
        ));
    }
    if (cycle_verdict == ConventionVerdict::StableByConvention)
        != (empirical_verdict == EmpiricalVerdict::Attracting)
        && empirical_verdict != EmpiricalVerdict::Inconclusive
    {
        diagnostics.push(format!(
            "ConventionConflict: the \"stable if l > 0\" convention gives {cycle_verdict:?}, returns show {empirical_verdict:?}"
        ));
    }
    Ok(HopfData {
        delta_h: p.delta,
        x: eq.x,
        y: eq.y,
        omega,
        trace: tr,
        det,
        l,
        l_numeric,
        transversality: trans.value,
        transversality_branch,
        cycle_verdict,
        printed_verdict: ConventionVerdict::from_sign(l),
        empirical_verdict,
        return_ratios,
        diagnostics,
    })
}

/// `d(trace)/d delta` with the equilibrium re-solved at `delta +- d`.
fn branch_trace_slope(p: &ModelParams, eq: State) -> Result<f64> {
    let d = TRANSVERSALITY_STEP;
    let near = |delta: f64| -> Result<f64> {
        let q = ModelParams { delta, ..*p };
        let e = interior_equilibria(&q)?
            .into_iter()
            .min_by(|a, b| (a.x - eq.x).abs().total_cmp(&(b.x - eq.x).abs()))
            .ok_or_else(|| Error::NotPresent("equilibrium lost".into()))?;
        Ok(jacobian(&q, e.state())?.trace())
    };
    Ok((near(p.delta + d)? - near(p.delta - d)?) / (2.0 * d))
}

/// An interior-equilibrium branch followed in `delta`: the `index`-th
/// interior equilibrium in increasing `x` over `[delta_lo, delta_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqBranch {
    pub index: usize,
    pub delta_lo: f64,
    pub delta_hi: f64,
}

/// Default sample count used by [`hopf_delta`].
pub const BRANCH_SAMPLES: usize = 64;

struct BranchSample {
    delta: f64,
    count: usize,
    eq: Option<Equilibrium>,
    trace: f64,
}

fn sample(p: &ModelParams, index: usize, delta: f64) -> Result<BranchSample> {
    let q = ModelParams { delta, ..*p };
    let eqs = interior_equilibria(&q)?;
    let count = eqs.len();
    let eq = eqs.get(index).cloned();
    let trace = match &eq {
        Some(e) => jacobian(&q, e.state())?.trace(),
        None => f64::NAN,
    };
    Ok(BranchSample {
        delta,
        count,
        eq,
        trace,
    })
}

/// Every sign change of the trace along the branch, each bisected and turned
/// into a [`HopfData`] (or reported as a neutral saddle / BT point in the
/// second list). Sorted by `delta`.
pub fn hopf_scan_detailed(
    p: &ModelParams,
    branch: &EqBranch,
    n_samples: usize,
) -> Result<(Vec<HopfData>, Vec<String>)> {
    let (lo, hi) = (branch.delta_lo, branch.delta_hi);
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::DomainError(format!(
            "delta interval [{lo}, {hi}] must lie in (0, inf)"
        )));
    }
    let n = n_samples.max(2);
    let samples: Vec<BranchSample> = (0..=n)
        .into_par_iter()
        .map(|i| sample(p, branch.index, lo + (hi - lo) * i as f64 / n as f64))
        .collect::<Result<_>>()?;
    let count0 = samples[0].count;
    for w in samples.windows(2) {
        if w[1].count != count0 || w[1].eq.is_none() || w[0].eq.is_none() {
            return Err(Error::BranchLost {
                lo: w[0].delta,
                hi: w[1].delta,
                reason: format!(
                    "interior equilibrium count changes {} -> {} (branch index {})",
                    w[0].count, w[1].count, branch.index
                ),
            });
        }
    }
    let brackets: Vec<(f64, f64, f64)> = samples
        .windows(2)
        .filter(|w| (w[0].trace < 0.0) != (w[1].trace < 0.0) || w[1].trace == 0.0)
        .map(|w| (w[0].delta, w[1].delta, w[0].trace))
        .collect();
    let results: Vec<Result<std::result::Result<HopfData, String>>> = brackets
        .par_iter()
        .map(|&(a, b, ta)| {
            let (delta, eq) = bisect_trace(p, branch.index, a, b, ta)?;
            let q = ModelParams { delta, ..*p };
            Ok(match hopf_at(&q, eq) {
                Ok(h) => Ok(h),
                Err(Error::NoHopf(why)) => Err(format!("trace zero at delta = {delta}: {why}")),
                Err(e) => return Err(e),
            })
        })
        .collect();
    let mut found = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r? {
            Ok(h) => found.push(h),
            Err(s) => skipped.push(s),
        }
    }
    found.sort_by(|a, b| a.delta_h.total_cmp(&b.delta_h));
    Ok((found, skipped))
}

pub fn hopf_scan(p: &ModelParams, branch: &EqBranch, n_samples: usize) -> Result<Vec<HopfData>> {
    Ok(hopf_scan_detailed(p, branch, n_samples)?.0)
}

/// Bisection on `delta` until the bracket stops shrinking; returns the end
/// with the smaller `|trace|`.
fn bisect_trace(
    p: &ModelParams,
    index: usize,
    mut a: f64,
    mut b: f64,
    ta: f64,
) -> Result<(f64, State)> {
    let neg_a = ta < 0.0;
    let mut best: Option<(f64, f64, State)> = None;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let s = sample(p, index, mid)?;
        let e = s.eq.ok_or_else(|| Error::BranchLost {
            lo: a,
            hi: b,
            reason: "equilibrium lost during bisection".into(),
        })?;
        if best.as_ref().map_or(true, |bb| s.trace.abs() < bb.0) {
            best = Some((s.trace.abs(), mid, e.state()));
        }
        if s.trace == 0.0 {
            break;
        }
        if (s.trace < 0.0) == neg_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    let (_, d, st) = best.ok_or_else(|| Error::NoConvergence("empty bracket".into()))?;
    Ok((d, st))
}

/// Self-consistent `delta` with `trace = 0` on the branch, or `None` if the
/// trace keeps its sign. A trace zero with `det <= 0` is an error.
pub fn hopf_delta(p: &ModelParams, branch: &EqBranch) -> Result<Option<f64>> {
    let (found, skipped) = hopf_scan_detailed(p, branch, BRANCH_SAMPLES)?;
    if let Some(h) = found.first() {
        return Ok(Some(h.delta_h));
    }
    if let Some(s) = skipped.first() {
        return Err(Error::NoHopf(s.clone()));
    }
    Ok(None)
}
