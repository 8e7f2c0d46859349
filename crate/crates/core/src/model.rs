//! Scaled model, parameter handling, vector field, Jacobian and Taylor jet.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::error::{Error, Result};

/// Residual (sup norm of the vector field) below which a point counts as an
/// equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;

/// The seven parameters of the scaled system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub h: f64,
    pub delta: f64,
    pub eta: f64,
    pub m: f64,
}

/// The parameters that stay fixed while `h` and `delta` are varied, as in a
/// Bogdanov-Takens search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub eta: f64,
    pub m: f64,
}

impl BtParams {
    pub fn with_h_delta(&self, h: f64, delta: f64) -> ModelParams {
        ModelParams {
            a: self.a,
            b: self.b,
            c: self.c,
            h,
            delta,
            eta: self.eta,
            m: self.m,
        }
    }
}

impl ModelParams {
    pub fn bt_part(&self) -> BtParams {
        BtParams {
            a: self.a,
            b: self.b,
            c: self.c,
            eta: self.eta,
            m: self.m,
        }
    }

    pub fn with_h_delta(&self, h: f64, delta: f64) -> ModelParams {
        ModelParams { h, delta, ..*self }
    }

    pub fn validate(self) -> Result<Self> {
        validate(self)
    }

    /// Holling denominator `a x^2 + b x + 1`.
    pub fn p(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + 1.0
    }
}

/// Check the admissibility constraints and return the parameters unchanged.
pub fn validate(p: ModelParams) -> Result<ModelParams> {
    let named = [
        ("a", p.a),
        ("b", p.b),
        ("c", p.c),
        ("h", p.h),
        ("delta", p.delta),
        ("eta", p.eta),
        ("m", p.m),
    ];
    for (name, v) in named {
        if !v.is_finite() {
            return Err(Error::ParameterOutOfRange(format!(
                "{name} = {v} is not finite"
            )));
        }
    }
    for (name, v) in [
        ("a", p.a),
        ("c", p.c),
        ("h", p.h),
        ("delta", p.delta),
        ("eta", p.eta),
    ] {
        if v <= 0.0 {
            return Err(Error::ParameterOutOfRange(format!(
                "{name} = {v} must be > 0"
            )));
        }
    }
    if p.m < 0.0 {
        return Err(Error::ParameterOutOfRange(format!(
            "m = {} must be >= 0",
            p.m
        )));
    }
    let bound = -2.0 * p.a.sqrt();
    if p.b <= bound {
        return Err(Error::ParameterOutOfRange(format!(
            "b = {} violates b > -2 sqrt(a) = {bound}",
            p.b
        )));
    }
    Ok(p)
}

impl BtParams {
    /// Same checks as [`validate`] for the parameters that do not move.
    pub fn validate(self) -> Result<Self> {
        validate(self.with_h_delta(1.0, 1.0))?;
        Ok(self)
    }
}

/// Parameters of the dimensional model before rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginalParams {
    pub r: f64,
    pub k: f64,
    pub q: f64,
    /// Harvesting effort `E`.
    pub e: f64,
    pub m1: f64,
    pub m2: f64,
    pub s: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub n: f64,
    pub m_bar: f64,
    /// Holling type II half-saturation of the antecedent model; kept for
    /// completeness, it plays no role in the rescaling.
    #[serde(default)]
    pub n1: Option<f64>,
}

/// Map dimensional parameters to the scaled ones.
pub fn rescale_parameters(o: &OriginalParams) -> Result<ModelParams> {
    let named = [
        ("r", o.r),
        ("k", o.k),
        ("q", o.q),
        ("E", o.e),
        ("m1", o.m1),
        ("m2", o.m2),
        ("s", o.s),
        ("a1", o.a1),
        ("a2", o.a2),
        ("n", o.n),
        ("m_bar", o.m_bar),
    ];
    for (name, v) in named {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!(
                "{name} = {v} must be > 0"
            )));
        }
    }
    let k = o.k;
    validate(ModelParams {
        a: o.a1 * k * k,
        b: o.b1 * k,
        c: o.m1 * o.e / (o.m2 * k),
        h: o.q * o.e / (o.r * o.m2 * k),
        delta: o.s / o.r,
        eta: o.s * o.a2 / (o.m_bar * k * k),
        m: o.n / k,
    })
}

/// A point of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub fn new(x: f64, y: f64) -> Self {
        State { x, y }
    }
}

/// Unchecked vector field, generic so it can be differentiated.
#[inline]
pub(crate) fn field<T: Scalar>(p: &ModelParams, x: T, y: T) -> (T, T) {
    let one = T::cst(1.0);
    let den = (T::cst(p.a) * x + T::cst(p.b)) * x + one;
    let fx = x * (one - x) - x * x * y / den - T::cst(p.h) * x / (T::cst(p.c) + x);
    let fy = y * (T::cst(p.delta) - T::cst(p.eta) * y / (T::cst(p.m) + x));
    (fx, fy)
}

fn check_domain(p: &ModelParams, s: State) -> Result<()> {
    if !(s.x.is_finite() && s.y.is_finite()) {
        return Err(Error::DomainError(format!(
            "non-finite state ({}, {})",
            s.x, s.y
        )));
    }
    if p.c + s.x <= 0.0 {
        return Err(Error::DomainError(format!("c + x = {} <= 0", p.c + s.x)));
    }
    if p.m + s.x <= 0.0 {
        return Err(Error::DomainError(format!("m + x = {} <= 0", p.m + s.x)));
    }
    if p.p(s.x) <= 0.0 {
        return Err(Error::DomainError(format!(
            "a x^2 + b x + 1 = {} <= 0",
            p.p(s.x)
        )));
    }
    Ok(())
}

/// Right-hand side `(dx/dt, dy/dt)`.
pub fn rhs(p: &ModelParams, s: State) -> Result<(f64, f64)> {
    check_domain(p, s)?;
    Ok(field(p, s.x, s.y))
}

/// Sup norm of the vector field at `s`.
pub fn residual(p: &ModelParams, s: State) -> Result<f64> {
    let (f, g) = rhs(p, s)?;
    Ok(f.abs().max(g.abs()))
}

/// Exact partial derivatives of [`rhs`].
pub fn jacobian(p: &ModelParams, s: State) -> Result<Matrix2<f64>> {
    check_domain(p, s)?;
    let (x, y) = (s.x, s.y);
    let den = p.p(x);
    let cx = p.c + x;
    let mx = p.m + x;
    let fx = 1.0 - 2.0 * x - x * y * (p.b * x + 2.0) / (den * den) - p.h * p.c / (cx * cx);
    let fy = -x * x / den;
    let gx = p.eta * y * y / (mx * mx);
    let gy = p.delta - 2.0 * p.eta * y / mx;
    Ok(Matrix2::new(fx, fy, gx, gy))
}

/// Taylor coefficients of the field in the shifted coordinates
/// `u = x - x*`, `v = y - y*`: `du/dt = sum alpha_ij u^i v^j`,
/// `dv/dt = sum beta_ij u^i v^j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JetCoefficients {
    pub alpha10: f64,
    pub alpha01: f64,
    pub beta10: f64,
    pub beta01: f64,
    pub alpha20: f64,
    pub alpha11: f64,
    pub alpha30: f64,
    pub alpha21: f64,
    pub beta20: f64,
    pub beta11: f64,
    pub beta02: f64,
    pub beta30: f64,
    pub beta21: f64,
    pub beta12: f64,
}

/// Jet at an equilibrium. The linear part is the exact Jacobian; the
/// higher-order terms use the closed forms, which rely on the point lying on
/// both isoclines.
pub fn taylor_jet(p: &ModelParams, eq: State) -> Result<JetCoefficients> {
    let res = residual(p, eq)?;
    if !(res < EQUILIBRIUM_TOL) {
        return Err(Error::NotAnEquilibrium { residual: res });
    }
    let j = jacobian(p, eq)?;
    let (x, y) = (eq.x, eq.y);
    let (a, b, c, h, d, eta, m) = (p.a, p.b, p.c, p.h, p.delta, p.eta, p.m);
    let den = p.p(x);
    let cx = c + x;
    let mx = m + x;
    let k = a * b * x.powi(3) + 3.0 * a * x * x - 1.0;
    Ok(JetCoefficients {
        alpha10: j[(0, 0)],
        alpha01: j[(0, 1)],
        beta10: j[(1, 0)],
        beta01: j[(1, 1)],
        alpha20: -1.0 + y * k / den.powi(3) + h * c / cx.powi(3),
        alpha11: -x * (b * x + 2.0) / (den * den),
        alpha30: -h * c / cx.powi(4)
            - y * (a * x * x - 1.0) * (a * b * x * x + 4.0 * a * x + b) / den.powi(4),
        alpha21: k / den.powi(3),
        beta20: -d * d / (eta * mx),
        beta11: 2.0 * d / mx,
        beta02: -eta / mx,
        beta30: d * d / (eta * mx * mx),
        beta21: -2.0 * d / (mx * mx),
        beta12: eta / (mx * mx),
    })
}
