//! Adaptive integration (Dormand-Prince 5(4) with PI step control),
//! positivity/boundedness envelopes and Poincare-section cycle probes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::Equilibrium;
use crate::error::{Error, Result};
use crate::model::{field, ModelParams, State};
use crate::stability::{classify_generic, StabilityLabel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    TimeLimit,
    /// The vector field vanished to within the convergence tolerance.
    Converged {
        x: f64,
        y: f64,
    },
    Escaped,
    StepFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub terminated: Termination,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    /// Used as both absolute and relative tolerance.
    pub tol: f64,
    /// `+1` forward in time, `-1` backward.
    pub direction: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    pub escape_radius: f64,
    /// Stop once `|f| < converge_tol` (0 disables).
    pub converge_tol: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            tol: 1e-9,
            direction: 1.0,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
            escape_radius: 1e3,
            converge_tol: 0.0,
        }
    }
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand-Prince step of signed size `h`. Returns the 5th-order state
/// and the scaled error norm, or `None` if a stage left the domain
/// (negative coordinate or non-finite value).
fn dp_step(p: &ModelParams, s: State, h: f64, tol: f64) -> Option<(State, f64)> {
    let mut k = [(0.0, 0.0); 7];
    for i in 0..7 {
        let (mut x, mut y) = (s.x, s.y);
        for j in 0..i {
            x += h * A[i][j] * k[j].0;
            y += h * A[i][j] * k[j].1;
        }
        if x < 0.0 || y < 0.0 {
            return None;
        }
        let f = field(p, x, y);
        if !(f.0.is_finite() && f.1.is_finite()) {
            return None;
        }
        k[i] = f;
        let _ = C[i];
    }
    let (mut x5, mut y5, mut ex, mut ey) = (s.x, s.y, 0.0, 0.0);
    for i in 0..7 {
        x5 += h * B5[i] * k[i].0;
        y5 += h * B5[i] * k[i].1;
        ex += h * (B5[i] - B4[i]) * k[i].0;
        ey += h * (B5[i] - B4[i]) * k[i].1;
    }
    if x5 < 0.0 || y5 < 0.0 {
        return None;
    }
    let sx = tol + tol * s.x.abs().max(x5.abs());
    let sy = tol + tol * s.y.abs().max(y5.abs());
    let err = (ex / sx).abs().max((ey / sy).abs());
    Some((State::new(x5, y5), err))
}

/// What the step observer wants the integrator to do next.
pub(crate) enum Control {
    Continue,
    Stop,
}

/// Adaptive driver; `observe(t_prev, s_prev, t, s, h)` sees every accepted
/// step. Returns the final time, state and termination reason.
pub(crate) fn drive<F>(
    p: &ModelParams,
    s0: State,
    t_span: f64,
    opt: &IntegrateOptions,
    mut observe: F,
) -> (f64, State, Termination)
where
    F: FnMut(f64, State, f64, State, f64) -> Control,
{
    let dir = if opt.direction < 0.0 { -1.0 } else { 1.0 };
    let mut t = 0.0;
    let mut s = s0;
    let f0 = field(p, s.x, s.y);
    let scale = (s.x.abs() + s.y.abs()).max(1e-3);
    let speed = f0.0.abs() + f0.1.abs();
    let mut h = if speed > 0.0 {
        (0.01 * scale / speed).min(0.1)
    } else {
        0.1
    };
    h = h.min(opt.h_max).min(t_span).max(opt.h_min);
    let mut err_prev: f64 = 1e-4;
    let mut steps = 0;
    while t < t_span {
        if opt.converge_tol > 0.0 {
            let f = field(p, s.x, s.y);
            if f.0.abs().max(f.1.abs()) < opt.converge_tol {
                return (t, s, Termination::Converged { x: s.x, y: s.y });
            }
        }
        if steps >= opt.max_steps {
            return (t, s, Termination::StepFailure);
        }
        steps += 1;
        let hh = h.min(t_span - t);
        match dp_step(p, s, dir * hh, opt.tol) {
            Some((ns, err)) if err <= 1.0 => {
                let nt = t + hh;
                let ctl = observe(dir * t, s, dir * nt, ns, dir * hh);
                t = nt;
                s = ns;
                if s.x.hypot(s.y) > opt.escape_radius {
                    return (t, s, Termination::Escaped);
                }
                if let Control::Stop = ctl {
                    return (t, s, Termination::TimeLimit);
                }
                let e = err.max(1e-10);
                let fac = 0.9 * e.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                h = (hh * fac.clamp(0.2, 5.0)).min(opt.h_max);
                err_prev = e;
            }
            Some((_, err)) => {
                let fac = 0.9 * err.powf(-1.0 / 5.0);
                h = hh * fac.clamp(0.1, 0.9);
            }
            None => h = hh * 0.25,
        }
        if h < opt.h_min {
            return (t, s, Termination::StepFailure);
        }
    }
    (t, s, Termination::TimeLimit)
}

/// Integrate from `x0` over `[0, t_end]`, recording every accepted step.
pub fn integrate_with(
    p: &ModelParams,
    x0: State,
    t_end: f64,
    opt: &IntegrateOptions,
) -> Trajectory {
    let mut times = vec![0.0];
    let mut states = vec![x0];
    let (_, _, term) = drive(p, x0, t_end, opt, |_, _, t, s, _| {
        times.push(t);
        states.push(s);
        Control::Continue
    });
    Trajectory {
        times,
        states,
        terminated: term,
    }
}

/// Integrate with tolerance `tol`; a step failure is an error.
pub fn integrate(p: &ModelParams, x0: State, t_end: f64, tol: f64) -> Result<Trajectory> {
    if !(x0.x >= 0.0 && x0.y >= 0.0 && x0.x.is_finite() && x0.y.is_finite()) {
        return Err(Error::DomainError(format!(
            "initial state ({}, {}) must be finite and nonnegative",
            x0.x, x0.y
        )));
    }
    if !(1e-12..=1e-3).contains(&tol) {
        return Err(Error::DomainError(format!(
            "tolerance {tol} outside [1e-12, 1e-3]"
        )));
    }
    let tr = integrate_with(
        p,
        x0,
        t_end,
        &IntegrateOptions {
            tol,
            ..Default::default()
        },
    );
    if tr.terminated == Termination::StepFailure {
        let t = *tr.times.last().unwrap_or(&0.0);
        return Err(Error::StepFailure {
            t,
            reason: "step size underflow".into(),
        });
    }
    Ok(tr)
}

/// One trajectory per seed, in seed order.
pub fn phase_portrait(
    p: &ModelParams,
    grid: &[State],
    t_end: f64,
    tol: f64,
) -> Vec<Result<Trajectory>> {
    grid.par_iter()
        .map(|&s| integrate(p, s, t_end, tol))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Largest `x(t) - bound_x(t)` (positive means violated).
    pub max_violation_x: f64,
    /// Largest `y(t) - bound_y(t)`.
    pub max_violation_y: f64,
    /// `max(x0, 1)`, the eventual prey bound.
    pub m_bound: f64,
}

impl BoundReport {
    pub fn max_violation(&self) -> f64 {
        self.max_violation_x.max(self.max_violation_y)
    }
}

/// Logistic envelope `r / (s - C e^{-r t})`, `C = s - r / z0`, for
/// `z' <= z (r - s z)`.
fn logistic_envelope(r: f64, s: f64, z0: f64, t: f64) -> f64 {
    let c = s - r / z0;
    r / (s - c * (-r * t).exp())
}

/// Check the comparison-principle envelopes along a trajectory:
/// `x(t) <= 1/(1 - C e^{-t})` and `x <= max(x0, 1) =: M`, and for the
/// predator `y(t) <= delta/(C2 - C' e^{-delta t})` with `C2 = eta/(m + M)`,
/// together with `y <= max(y0, delta (m + M)/eta)`.
pub fn bound_check(traj: &Trajectory, p: &ModelParams, x0: State) -> BoundReport {
    let m_bound = x0.x.max(1.0);
    let c2 = p.eta / (p.m + m_bound);
    let y_cap = x0.y.max(p.delta * (p.m + m_bound) / p.eta);
    let mut vx = f64::NEG_INFINITY;
    let mut vy = f64::NEG_INFINITY;
    for (&t, s) in traj.times.iter().zip(&traj.states) {
        let bx = if x0.x > 0.0 {
            logistic_envelope(1.0, 1.0, x0.x, t).min(m_bound)
        } else {
            0.0
        };
        let by = if x0.y > 0.0 {
            logistic_envelope(p.delta, c2, x0.y, t).min(y_cap)
        } else {
            0.0
        };
        vx = vx.max(s.x - bx);
        vy = vy.max(s.y - by);
    }
    BoundReport {
        max_violation_x: vx,
        max_violation_y: vy,
        m_bound,
    }
}

/// Half-line `{(xc + r, yc) : r > 0}` used as Poincare section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub xc: f64,
    pub yc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Return {
    pub t: f64,
    pub r: f64,
}

/// Successive crossings of the section (in the sense of the flow) starting
/// from `(xc + r0, yc)`. Stops after `n` returns, at `t_max`, or when the
/// orbit leaves the domain.
pub fn section_returns(
    p: &ModelParams,
    sec: Section,
    r0: f64,
    n: usize,
    t_max: f64,
    opt: &IntegrateOptions,
) -> (Vec<Return>, Termination) {
    // orientation of the flow across the section
    let (_, gy) = field(p, sec.xc + r0, sec.yc);
    let up = gy > 0.0;
    let dir = if opt.direction < 0.0 { -1.0 } else { 1.0 };
    // crossing sense along the integration direction
    let rising = up == (dir > 0.0);
    let mut out = Vec::new();
    let (_, _, term) = drive(
        p,
        State::new(sec.xc + r0, sec.yc),
        t_max,
        opt,
        |t0, s0, _t1, s1, h| {
            let (g0, g1) = (s0.y - sec.yc, s1.y - sec.yc);
            let crossing = if rising {
                g0 < 0.0 && g1 >= 0.0
            } else {
                g0 > 0.0 && g1 <= 0.0
            };
            if crossing && (s0.x > sec.xc || s1.x > sec.xc) {
                let (tc, sc) = refine_crossing(p, sec.yc, t0, s0, h, g0, g1, opt.tol);
                if sc.x > sec.xc {
                    out.push(Return {
                        t: tc,
                        r: sc.x - sec.xc,
                    });
                    if out.len() >= n {
                        return Control::Stop;
                    }
                }
            }
            Control::Continue
        },
    );
    (out, term)
}

/// Locate `y = yc` inside an accepted step by secant iterations on the step
/// length, each trial being a single Dormand-Prince step from the step start.
fn refine_crossing(
    p: &ModelParams,
    yc: f64,
    t0: f64,
    s0: State,
    h: f64,
    g0: f64,
    g1: f64,
    tol: f64,
) -> (f64, State) {
    let (mut a, mut ga) = (0.0, g0);
    let (mut b, mut gb) = (1.0, g1);
    let mut best = (t0 + h, dp_step(p, s0, h, tol).map(|r| r.0).unwrap_or(s0));
    for _ in 0..60 {
        let mut th = b - gb * (b - a) / (gb - ga);
        if !(th > a.min(b) && th < a.max(b)) {
            th = 0.5 * (a + b);
        }
        let Some((st, _)) = dp_step(p, s0, th * h, tol) else {
            break;
        };
        let g = st.y - yc;
        best = (t0 + th * h, st);
        if g.abs() < 1e-15 || (b - a).abs() < 1e-15 {
            break;
        }
        // Illinois-style bracket maintenance
        if (g < 0.0) == (ga < 0.0) {
            a = th;
            ga = g;
            gb *= 0.5;
        } else {
            b = th;
            gb = g;
            ga *= 0.5;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleStability {
    Attracting,
    Repelling,
}

/// How the return sequence from the probe seed behaved in one time direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProbeOutcome {
    /// Returns converged to a positive radius.
    Converged { radius: f64, returns: usize },
    /// Returns shrank onto the centre.
    Collapsed,
    /// The orbit left the neighbourhood or stopped returning.
    Diverged,
    /// Neither pattern emerged within the budget.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleProbe {
    pub found: bool,
    /// Time between the last two returns.
    pub period: f64,
    pub stability: Option<CycleStability>,
    pub section: Section,
    /// Distance from the centre along the section.
    pub radius: f64,
    /// Forward-time return-map contraction `(r_{k+1} - r*) / (r_k - r*)`.
    pub floquet_ratio: f64,
    pub forward: ProbeOutcome,
    pub backward: ProbeOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleProbeOptions {
    pub tol: f64,
    pub max_returns: usize,
    /// Relative change between returns that counts as converged.
    pub converge_rel: f64,
}

impl Default for CycleProbeOptions {
    fn default() -> Self {
        CycleProbeOptions {
            tol: 1e-11,
            max_returns: 600,
            converge_rel: 1e-7,
        }
    }
}

fn classify_returns(
    returns: &[Return],
    term: Termination,
    r0: f64,
    opt: &CycleProbeOptions,
) -> ProbeOutcome {
    for w in returns.windows(2).enumerate() {
        let (i, w) = w;
        if w[1].r < 1e-3 * r0 {
            return ProbeOutcome::Collapsed;
        }
        if (w[1].r - w[0].r).abs() < opt.converge_rel * w[1].r {
            return ProbeOutcome::Converged {
                radius: w[1].r,
                returns: i + 2,
            };
        }
    }
    match returns.last() {
        Some(r) if r.r < 1e-3 * r0 => ProbeOutcome::Collapsed,
        _ if term != Termination::TimeLimit || returns.len() < opt.max_returns => {
            ProbeOutcome::Diverged
        }
        _ => ProbeOutcome::Undecided,
    }
}

/// Median of successive-difference ratios, a return-map multiplier estimate.
fn multiplier(returns: &[Return]) -> f64 {
    let mut ratios: Vec<f64> = returns
        .windows(3)
        .filter_map(|w| {
            let (d0, d1) = (w[1].r - w[0].r, w[2].r - w[1].r);
            (d0.abs() > 1e-9 * w[1].r && d1.abs() > 1e-9 * w[2].r).then(|| d1 / d0)
        })
        .collect();
    if ratios.is_empty() {
        return f64::NAN;
    }
    ratios.sort_by(f64::total_cmp);
    ratios[ratios.len() / 2]
}

/// Search for a closed orbit around a spiral equilibrium: follow section
/// returns forward (attracting cycle) and backward (repelling cycle) from a
/// seed at `probe_radius`.
pub fn detect_limit_cycle(
    p: &ModelParams,
    center: &Equilibrium,
    probe_radius: f64,
    t_max: f64,
) -> Result<CycleProbe> {
    detect_limit_cycle_with(
        p,
        center,
        probe_radius,
        t_max,
        &CycleProbeOptions::default(),
    )
}

pub fn detect_limit_cycle_with(
    p: &ModelParams,
    center: &Equilibrium,
    probe_radius: f64,
    t_max: f64,
    opt: &CycleProbeOptions,
) -> Result<CycleProbe> {
    let rep = classify_generic(p, center.state())?;
    if !matches!(
        rep.label,
        StabilityLabel::StableSpiral
            | StabilityLabel::UnstableSpiral
            | StabilityLabel::CenterCandidate
    ) {
        return Err(Error::DomainError(format!(
            "centre ({}, {}) is a {}, not a spiral",
            center.x, center.y, rep.label
        )));
    }
    let sec = Section {
        xc: center.x,
        yc: center.y,
    };
    let mut outcomes = [ProbeOutcome::Undecided; 2];
    for (k, dir) in [1.0, -1.0].into_iter().enumerate() {
        let io = IntegrateOptions {
            tol: opt.tol,
            direction: dir,
            ..Default::default()
        };
        let (ret, term) = section_returns(p, sec, probe_radius, opt.max_returns, t_max, &io);
        let outcome = classify_returns(&ret, term, probe_radius, opt);
        outcomes[k] = outcome;
        if let ProbeOutcome::Converged { radius, .. } = outcome {
            // one more return from the converged point must close up
            let (check, _) = section_returns(p, sec, radius, 2, t_max, &io);
            let Some(next) = check.first() else {
                return Err(Error::Inconclusive(
                    "no return from the converged section point".into(),
                ));
            };
            if (next.r - radius).abs() > 1e-6 {
                return Err(Error::Inconclusive(format!(
                    "return from r = {radius} lands at {} (not closed)",
                    next.r
                )));
            }
            let period = next.t.abs();
            let m = multiplier(&ret);
            let floquet_ratio = if dir > 0.0 { m } else { 1.0 / m };
            let (forward, backward) = if dir > 0.0 {
                (outcome, ProbeOutcome::Undecided)
            } else {
                (outcomes[0], outcome)
            };
            return Ok(CycleProbe {
                found: true,
                period,
                stability: Some(if dir > 0.0 {
                    CycleStability::Attracting
                } else {
                    CycleStability::Repelling
                }),
                section: sec,
                radius,
                floquet_ratio,
                forward,
                backward,
            });
        }
    }
    if outcomes.iter().all(|o| *o == ProbeOutcome::Undecided) {
        return Err(Error::Inconclusive(format!(
            "no decision after {} returns",
            opt.max_returns
        )));
    }
    Ok(CycleProbe {
        found: false,
        period: f64::NAN,
        stability: None,
        section: sec,
        radius: f64::NAN,
        floquet_ratio: f64::NAN,
        forward: outcomes[0],
        backward: outcomes[1],
    })
}
