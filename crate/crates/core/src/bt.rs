//! Bogdanov-Takens points in the `(h, delta)` plane, the normal-form
//! reduction and the local fold (T), Hopf (H) and homoclinic (P) curves.
//!
//! Adding the trace and determinant conditions eliminates `y` and leaves
//! `x^2 (a eta - 1) + b eta x + eta = 0` for the abscissa of a double-zero
//! equilibrium; the equilibrium equations are then linear in `(h, delta)`.
//!
//! The unfolding uses `h = h_bt + lambda1`, `delta = delta_bt + lambda2`.
//! After moving the point to the origin and changing to the Jordan basis
//! `(v0, v1)` the field reads
//!
//! ```text
//! Y1' = Y2 + a00 + a10 Y1 + a01 Y2 + a20 Y1^2/2 + a11 Y1 Y2 + a02 Y2^2/2 + ...
//! Y2' =      b00 + b10 Y1 + b01 Y2 + b20 Y1^2/2 + b11 Y1 Y2 + b02 Y2^2/2 + ...
//! ```
//!
//! and is reduced to `z1' = z2`, `z2' = beta1 + beta2 z1 + z1^2 + s z1 z2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::{Dual, Scalar};
use crate::error::{Error, Result};
use crate::model::{field, jacobian, residual, BtParams, ModelParams, State, EQUILIBRIUM_TOL};
use crate::numdiff::jet2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    EtaAeq1,
    EtaAlt1,
    EtaAgt1X3,
    EtaAgt1X4,
}

/// `a eta` closer to 1 than this is treated as the linear case.
pub const A_ETA_TOL: f64 = 1e-12;

/// Real roots of `x^2 (a eta - 1) + b eta x + eta = 0` with their case tags.
/// Roots are not filtered by sign.
pub fn bt_candidate_x(a: f64, b: f64, eta: f64) -> Result<Vec<(f64, CaseTag)>> {
    let k = a * eta - 1.0;
    if k.abs() < A_ETA_TOL {
        if b == 0.0 {
            return Err(Error::NoCandidate(
                "a eta = 1 and b = 0: the quadratic has no root".into(),
            ));
        }
        return Ok(vec![(-1.0 / b, CaseTag::EtaAeq1)]);
    }
    let disc = b * b * eta * eta - 4.0 * k * eta;
    if disc < 0.0 {
        return Err(Error::NoCandidate(format!(
            "b^2 eta - 4 (a eta - 1) = {} < 0",
            disc / eta
        )));
    }
    let sq = disc.sqrt();
    if k < 0.0 {
        // opposite signs; the positive root takes the minus sign
        let x2 = (-b * eta - sq) / (2.0 * k);
        let x1 = eta / (k * x2);
        Ok(vec![(x1, CaseTag::EtaAlt1), (x2, CaseTag::EtaAlt1)])
    } else {
        let x3 = (-b * eta + sq) / (2.0 * k);
        let x4 = (-b * eta - sq) / (2.0 * k);
        Ok(vec![(x3, CaseTag::EtaAgt1X3), (x4, CaseTag::EtaAgt1X4)])
    }
}

/// `y` from the trace condition at a given `(x, h, delta)`.
pub fn bt_y_of_x(p: &ModelParams, x: f64) -> Result<f64> {
    let bx2 = p.b * x + 2.0;
    if bx2 == 0.0 || x == 0.0 {
        return Err(Error::DomainError(format!("x (b x + 2) = 0 at x = {x}")));
    }
    let den = p.p(x);
    Ok(den * den / (x * bx2) * (1.0 - 2.0 * x - p.h * p.c / (p.c + x).powi(2) - p.delta))
}

/// The four coefficients of the linear system `delta = a1 + a2 h`,
/// `h = b1 + b2 delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

pub fn linear_system(bp: &BtParams, x: f64) -> Result<LinearSystem> {
    let (a, b, c, eta, m) = (bp.a, bp.b, bp.c, bp.eta, bp.m);
    let p = (a * x + b) * x + 1.0;
    let bx2 = b * x + 2.0;
    let den = x * bx2 * (m + x) + eta * p * p;
    let dd = bx2 * (c + x) - c * p;
    if den == 0.0 || dd == 0.0 {
        return Err(Error::DomainError(format!(
            "vanishing denominator in the linear system at x = {x}"
        )));
    }
    let cx2 = (c + x) * (c + x);
    Ok(LinearSystem {
        a1: eta * p * p * (1.0 - 2.0 * x) / den,
        a2: eta * p * p / den * (-c / cx2),
        b1: cx2 * ((1.0 - x) * bx2 - p * (1.0 - 2.0 * x)) / dd,
        b2: cx2 * p / dd,
    })
}

/// Closed forms for `h` and `delta` when `a eta = 1`.
pub fn printed_aeq1(bp: &BtParams) -> (f64, f64) {
    let (b, c, eta, m) = (bp.b, bp.c, bp.eta, bp.m);
    let (b2, b3, b4) = (b * b, b * b * b, b * b * b * b);
    // delta first: h depends on it
    let delta = -(b * c - b - 2.0)
        / (b * (b4 * c * eta * m - b3 * c * eta - b3 * eta * m - b2 * c * m + b2 * eta + 1.0));
    let h = (b3 * eta + b2 * eta + b * delta - b - 2.0) * (b * c - 1.0).powi(2)
        / (b3 * (b2 * c * eta - b * eta - c));
    (h, delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BTPoint {
    pub x: f64,
    pub y: f64,
    pub h_bt: f64,
    pub delta_bt: f64,
    pub case_tag: CaseTag,
}

impl BTPoint {
    pub fn state(&self) -> State {
        State::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtLocateReport {
    pub points: Vec<BTPoint>,
    pub diagnostics: Vec<String>,
}

/// Bogdanov-Takens points for fixed `(a, b, c, eta, m)`, ordered by `x`.
pub fn bt_locate(bp: &BtParams) -> Result<Vec<BTPoint>> {
    Ok(bt_locate_detailed(bp)?.points)
}

pub fn bt_locate_detailed(bp: &BtParams) -> Result<BtLocateReport> {
    bp.validate()?;
    let cands = bt_candidate_x(bp.a, bp.b, bp.eta)?;
    let mut points = Vec::new();
    let mut diagnostics = Vec::new();
    for (x, tag) in cands {
        if !(x > 0.0) {
            diagnostics.push(format!("{tag:?}: candidate x = {x} is not positive"));
            continue;
        }
        let ls = linear_system(bp, x)?;
        let den = 1.0 - ls.b2 * ls.a2;
        if den.abs() < 1e-12 {
            return Err(Error::SingularSolve(den.abs()));
        }
        let h = (ls.b1 + ls.b2 * ls.a1) / den;
        let delta = ls.a1 + ls.a2 * h;
        if tag == CaseTag::EtaAeq1 {
            let (h1, d1) = printed_aeq1(bp);
            if (h1 - h).abs() > 1e-8 * (1.0 + h.abs())
                || (d1 - delta).abs() > 1e-8 * (1.0 + delta.abs())
            {
                diagnostics.push(format!(
                    "closed forms for a eta = 1 give (h, delta) = ({h1}, {d1}); linear solve gives ({h}, {delta})"
                ));
            }
        }
        if !(h > 0.0 && delta > 0.0) {
            diagnostics.push(format!(
                "{tag:?}: x = {x} gives h = {h}, delta = {delta}; not admissible"
            ));
            continue;
        }
        let p = bp.with_h_delta(h, delta);
        let y = delta * (bp.m + x) / bp.eta;
        if let Ok(yt) = bt_y_of_x(&p, x) {
            if (yt - y).abs() > 1e-8 * (1.0 + y.abs()) {
                diagnostics.push(format!(
                    "{tag:?}: trace-condition y = {yt} differs from isocline y = {y}"
                ));
            }
        }
        let st = State::new(x, y);
        let res = residual(&p, st)?;
        let j = jacobian(&p, st)?;
        if res >= EQUILIBRIUM_TOL || j.trace().abs() >= 1e-8 || j.determinant().abs() >= 1e-8 {
            diagnostics.push(format!(
                "{tag:?}: x = {x} fails verification (residual {res:e}, trace {:e}, det {:e})",
                j.trace(),
                j.determinant()
            ));
            continue;
        }
        points.push(BTPoint {
            x,
            y,
            h_bt: h,
            delta_bt: delta,
            case_tag: tag,
        });
    }
    points.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(BtLocateReport {
        points,
        diagnostics,
    })
}

/// Taylor coefficients of the field in Jordan coordinates. `a01` excludes
/// the unit Jordan entry.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TransformedCoeffs {
    pub a00: f64,
    pub a10: f64,
    pub a01: f64,
    pub a20: f64,
    pub a11: f64,
    pub a02: f64,
    pub b00: f64,
    pub b10: f64,
    pub b01: f64,
    pub b20: f64,
    pub b11: f64,
    pub b02: f64,
}

impl TransformedCoeffs {
    pub fn named(&self) -> [(&'static str, f64); 12] {
        [
            ("a00", self.a00),
            ("a10", self.a10),
            ("a01", self.a01),
            ("a20", self.a20),
            ("a11", self.a11),
            ("a02", self.a02),
            ("b00", self.b00),
            ("b10", self.b10),
            ("b01", self.b01),
            ("b20", self.b20),
            ("b11", self.b11),
            ("b02", self.b02),
        ]
    }

    fn zip(&self, o: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        TransformedCoeffs {
            a00: f(self.a00, o.a00),
            a10: f(self.a10, o.a10),
            a01: f(self.a01, o.a01),
            a20: f(self.a20, o.a20),
            a11: f(self.a11, o.a11),
            a02: f(self.a02, o.a02),
            b00: f(self.b00, o.b00),
            b10: f(self.b10, o.b10),
            b01: f(self.b01, o.b01),
            b20: f(self.b20, o.b20),
            b11: f(self.b11, o.b11),
            b02: f(self.b02, o.b02),
        }
    }
}

/// Point, parameters and Jordan basis: everything needed to evaluate the
/// transformed field at any `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JordanFrame {
    pub params: BtParams,
    pub point: BTPoint,
    pub v0: [f64; 2],
    pub v1: [f64; 2],
    pub w0: [f64; 2],
    pub w1: [f64; 2],
}

impl JordanFrame {
    pub fn new(params: BtParams, point: BTPoint) -> Self {
        let (d, eta) = (point.delta_bt, params.eta);
        let v0 = [eta, d];
        let v1 = [eta, d - 1.0];
        // dual basis: rows of P^{-1}, P = [v0 | v1]
        let det = v0[0] * v1[1] - v1[0] * v0[1];
        let w0 = [v1[1] / det, -v1[0] / det];
        let w1 = [-v0[1] / det, v0[0] / det];
        JordanFrame {
            params,
            point,
            v0,
            v1,
            w0,
            w1,
        }
    }

    fn model(&self, l1: f64, l2: f64) -> ModelParams {
        self.params
            .with_h_delta(self.point.h_bt + l1, self.point.delta_bt + l2)
    }

    /// `(<g(Y1 v0 + Y2 v1, lambda), w0>, <g(...), w1>)`.
    pub(crate) fn phi<T: Scalar>(&self, y1: T, y2: T, l1: f64, l2: f64) -> (T, T) {
        let p = self.model(l1, l2);
        let x = T::cst(self.point.x) + y1 * T::cst(self.v0[0]) + y2 * T::cst(self.v1[0]);
        let y = T::cst(self.point.y) + y1 * T::cst(self.v0[1]) + y2 * T::cst(self.v1[1]);
        let (g1, g2) = field(&p, x, y);
        (
            g1 * T::cst(self.w0[0]) + g2 * T::cst(self.w0[1]),
            g1 * T::cst(self.w1[0]) + g2 * T::cst(self.w1[1]),
        )
    }

    /// Jet of the transformed field at `Y = 0` for the given `lambda`.
    pub fn coefficients(&self, l1: f64, l2: f64) -> TransformedCoeffs {
        let hs = JET_STEP;
        let ja = jet2(|a, b| self.phi(a, b, l1, l2).0, 0.0, 0.0, hs, hs);
        let jb = jet2(|a, b| self.phi(a, b, l1, l2).1, 0.0, 0.0, hs, hs);
        TransformedCoeffs {
            a00: ja[0],
            a10: ja[1],
            a01: ja[2] - 1.0,
            a20: ja[3],
            a11: ja[4],
            a02: ja[5],
            b00: jb[0],
            b10: jb[1],
            b01: jb[2],
            b20: jb[3],
            b11: jb[4],
            b02: jb[5],
        }
    }

    /// Same coefficients from the closed-form expressions.
    pub fn printed_coefficients(&self, l1: f64, l2: f64) -> TransformedCoeffs {
        let (a, b, c, eta, m) = (
            self.params.a,
            self.params.b,
            self.params.c,
            self.params.eta,
            self.params.m,
        );
        let (x, y, d) = (self.point.x, self.point.y, self.point.delta_bt);
        let hh = self.point.h_bt + l1;
        let p = (a * x + b) * x + 1.0;
        let cx = c + x;
        let q = 2.0 * a * eta * x + b * eta;
        let a00 = l1 * x * (d - 1.0) / (cx * eta) + y * l2;
        let a10 = (d - 1.0) * c * l1 / (cx * cx) + d * l2;
        let a01 = (d - 1.0) * c * l1 / (cx * cx) + (d - 1.0) * l2;
        let a20 = -2.0 * (d - 1.0) / eta
            * (-(1.0 / p)
                * (-x * x * y * a * eta * eta / p + eta * eta * y + 2.0 * x * eta * d
                    - x * q / (p * p) * (x * d * p + b * eta * x * y + 2.0 * eta * y)))
            - 2.0 * (d - 1.0) * (-eta + hh * eta * c / cx.powi(3));
        let a11 = -2.0 / eta
            * (d - 1.0)
            * (-eta * eta - eta * (eta * y + 2.0 * x * d - x) / p
                + x * x * q * (2.0 * d - 1.0) / (2.0 * p * p))
            - 2.0 / eta
                * (d - 1.0)
                * (x * (b * eta * x * y + 2.0 * eta * y) * q / p.powi(3)
                    + x * x * y * a * eta * eta / p
                    + hh * eta * eta * c / cx.powi(3));
        let a02 = -2.0 * (d - 1.0) / eta
            * (-eta * eta + hh * eta * eta * c / cx.powi(3)
                - (1.0 / p)
                    * (2.0 * x * eta * (d - 1.0)
                        - x * (d * x / p + (b * eta * x * y + 2.0 * eta * y) / (p * p) - x / p)
                            * q
                        - x * x * y * a * eta * eta / p
                        + eta * eta * y))
            + 2.0 * eta * (d - 1.0) / (m + x)
            - 2.0 * eta * eta * y / (m + x * x);
        let b00 = -d * x * l1 / (eta * cx) - l2 * y;
        let b10 = -c * d * l1 / (cx * cx) - d * l2;
        let b01 = -c * d * l1 / (cx * cx) - (d - 1.0) * l2;
        let b20 = 2.0 * d / eta
            * (-(1.0 / p)
                * (-x * x * y * a * eta * eta / p + eta * eta * y + 2.0 * x * eta * d
                    - x * x * d * q / p
                    - q * x * eta * y * (b * x + 2.0) / (p * p))
                - eta * eta
                + hh * eta * eta * c / cx.powi(3));
        let b11 = d / eta
            * (-2.0 * eta * eta
                - (1.0 / p) * (2.0 * eta * eta * y + 4.0 * x * eta * d - 2.0 * x * eta))
            + d * x * q / (eta * p.powi(3))
                * (x * p * (2.0 * d - 1.0) + 2.0 * b * eta * x * y + 4.0 * eta * y)
            + 2.0 * a * eta * d * x * x * y / (p * p)
            + 2.0 * d * hh * eta * c / cx.powi(3);
        let b02 = -2.0 * d * (-eta + hh * eta * c / cx.powi(3))
            - 2.0 * d / (eta * p)
                * (-x * q / (p * p) * (x * p * (d - 1.0) + b * eta * x * y + 2.0 * eta * y)
                    - x * x * y * a * eta * eta / p
                    + 2.0 * x * eta * (d - 1.0)
                    + eta * eta * y)
            + 2.0 * eta / (m + x);
        TransformedCoeffs {
            a00,
            a10,
            a01,
            a20,
            a11,
            a02,
            b00,
            b10,
            b01,
            b20,
            b11,
            b02,
        }
    }
}

/// Finite-difference step for the transformed jet; the field is smooth on a
/// scale of order one, so 4th-order stencils at this step are accurate to
/// about 1e-10.
pub const JET_STEP: f64 = 1e-3;

/// Stencil step for the jet of the reduced field. Its truncation error is
/// smooth in `lambda` and shifts the curves by ~1e-10; smaller steps trade
/// that for roundoff noise that the curve bisection cannot resolve.
pub const REDUCED_STEP: f64 = 1e-2;

/// Step for the `lambda` partials (the field is affine in `lambda`).
pub const LAMBDA_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nondegeneracy {
    /// `g11(0) != 0`
    pub bt1: bool,
    /// `2A(0) = b20(0) != 0`
    pub bt2: bool,
    /// `det d(beta)/d(lambda) != 0`
    pub bt3: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BTNormalForm {
    pub frame: JordanFrame,
    pub j0: [[f64; 2]; 2],
    /// Coefficients at `lambda = 0`.
    pub coeffs: TransformedCoeffs,
    pub d_lambda1: TransformedCoeffs,
    pub d_lambda2: TransformedCoeffs,
    /// Closed-form coefficients at `lambda = 0`, for comparison.
    pub printed: TransformedCoeffs,
    pub g20_0: f64,
    pub g11_0: f64,
    pub g02_0: f64,
    /// `A(0) = b20(0) / 2`.
    pub a0: f64,
    /// `B(0) = g11(0)`.
    pub b0: f64,
    /// Sign of `b20(0) g11(0)`.
    pub s: i8,
    /// The product `b20(0) g11(0)` itself.
    pub s_product: f64,
    /// `d(beta1, beta2)/d(lambda1, lambda2)` at 0, rows `beta1`, `beta2`.
    pub beta_jacobian: [[f64; 2]; 2],
    pub beta_jacobian_det: f64,
    pub nondegeneracy: Nondegeneracy,
    /// Printed-formula mismatches and other notes.
    pub diagnostics: Vec<String>,
}

/// Relative agreement required between closed-form and numeric coefficients.
pub const PRINTED_TOL: f64 = 1e-4;

/// Normal-form data at a Bogdanov-Takens point.
pub fn normal_form(bp: &BtParams, point: &BTPoint) -> Result<BTNormalForm> {
    let frame = JordanFrame::new(*bp, *point);
    let (d, eta) = (point.delta_bt, bp.eta);
    let j0 = [[d, -eta], [d * d / eta, -d]];
    let c0 = frame.coefficients(0.0, 0.0);
    let hl = LAMBDA_STEP;
    let cd = |l1: f64, l2: f64| {
        let p = frame.coefficients(l1, l2);
        let m = frame.coefficients(-l1, -l2);
        p.zip(&m, |u, v| (u - v) / (2.0 * hl))
    };
    let d1 = cd(hl, 0.0);
    let d2 = cd(0.0, hl);
    let printed = frame.printed_coefficients(0.0, 0.0);
    let mut diagnostics = Vec::new();
    let scale = c0.named().iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    for ((name, num), (_, pr)) in c0.named().iter().zip(printed.named()) {
        if (num - pr).abs() > PRINTED_TOL * num.abs().max(1e-6 * scale) {
            diagnostics.push(format!(
                "PrintedFormulaMismatch: {name} printed {pr:.10e}, numeric {num:.10e}"
            ));
        }
    }
    // lambda-partials of the printed expressions, by the same differences
    let pd = |l1: f64, l2: f64| {
        let p = frame.printed_coefficients(l1, l2);
        let m = frame.printed_coefficients(-l1, -l2);
        p.zip(&m, |u, v| (u - v) / (2.0 * hl))
    };
    for (tag, num, pr) in [("lambda1", d1, pd(hl, 0.0)), ("lambda2", d2, pd(0.0, hl))] {
        for ((name, n), (_, q)) in num.named().iter().zip(pr.named()) {
            if (n - q).abs() > PRINTED_TOL * n.abs().max(1e-6) {
                diagnostics.push(format!(
                    "PrintedFormulaMismatch: d{name}/d{tag} printed {q:.10e}, numeric {n:.10e}"
                ));
            }
        }
    }

    let g20 = c0.b20;
    let g11 = c0.a20 + c0.b11;
    let g02 = c0.b02 + 2.0 * c0.a11;
    let jscale = 1.0 + d.abs() + eta;
    if !(g11.abs() > 1e-10 * jscale) {
        return Err(Error::DegenerateBT {
            condition: "BT.1",
            value: g11,
        });
    }
    if !(g20.abs() > 1e-10 * jscale) {
        return Err(Error::DegenerateBT {
            condition: "BT.2",
            value: g20,
        });
    }
    let a0 = 0.5 * g20;
    let b0 = g11;
    // first-order partials of g00, g10, g01 from their displayed truncations
    let dg = |dc: &TransformedCoeffs| {
        let dg00 = dc.b00;
        let dg10 = dc.b10 + c0.a11 * dc.b00 - c0.b11 * dc.a00;
        let dg01 = dc.b01 + dc.a10 + c0.a02 * dc.b00 - (c0.a11 + c0.b02) * dc.a00;
        let dmu1 = dg00;
        let dmu2 = dg10 - g20 / g11 * dg01 - 0.5 * g02 * dg00;
        (b0.powi(4) / a0.powi(3) * dmu1, b0 * b0 / (a0 * a0) * dmu2)
    };
    let (b1l1, b2l1) = dg(&d1);
    let (b1l2, b2l2) = dg(&d2);
    let beta_jacobian = [[b1l1, b1l2], [b2l1, b2l2]];
    let det = b1l1 * b2l2 - b1l2 * b2l1;
    let dscale = (b1l1.abs() + b1l2.abs()) * (b2l1.abs() + b2l2.abs());
    if !(det.abs() > 1e-10 * dscale) {
        return Err(Error::DegenerateBT {
            condition: "BT.3",
            value: det,
        });
    }
    let s_product = g20 * g11;
    Ok(BTNormalForm {
        frame,
        j0,
        coeffs: c0,
        d_lambda1: d1,
        d_lambda2: d2,
        printed,
        g20_0: g20,
        g11_0: g11,
        g02_0: g02,
        a0,
        b0,
        s: if s_product > 0.0 { 1 } else { -1 },
        s_product,
        beta_jacobian,
        beta_jacobian_det: det,
        nondegeneracy: Nondegeneracy {
            bt1: true,
            bt2: true,
            bt3: true,
        },
        diagnostics,
    })
}

/// `beta` from the first-order expansion `beta_jacobian * lambda`.
pub fn beta_map_linear(nf: &BTNormalForm, l1: f64, l2: f64) -> (f64, f64) {
    let j = nf.beta_jacobian;
    (j[0][0] * l1 + j[0][1] * l2, j[1][0] * l1 + j[1][1] * l2)
}

/// Full set of reduced coefficients at one `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedCoeffs {
    /// Shift `u1 -> u1 - shift` removing the `u2` term.
    pub shift: f64,
    pub h00: f64,
    pub h10: f64,
    pub h20: f64,
    pub h11: f64,
    pub h02: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub a: f64,
    pub b: f64,
    pub beta1: f64,
    pub beta2: f64,
}

/// `u2' = G(u1, u2)` with `u1 = Y1` and `u2 = Y1'` taken exactly, so the
/// `g_ij` are the Taylor coefficients of `G`.
struct Reduced<'a> {
    frame: &'a JordanFrame,
    l1: f64,
    l2: f64,
}

impl Reduced<'_> {
    /// Solve `Phi1(u1, Y2) = u2` for `Y2`.
    fn y2_of(&self, u1: f64, u2: f64) -> Result<f64> {
        let mut y2 = u2;
        for _ in 0..60 {
            let v = self
                .frame
                .phi(Dual::cst(u1), Dual::var(y2), self.l1, self.l2)
                .0;
            if v.eps == 0.0 {
                break;
            }
            let step = (v.re - u2) / v.eps;
            y2 -= step;
            if step.abs() <= 1e-15 * (1.0 + y2.abs()) {
                return Ok(y2);
            }
        }
        let r = self.frame.phi(u1, y2, self.l1, self.l2).0 - u2;
        if r.abs() < 1e-13 {
            Ok(y2)
        } else {
            Err(Error::NoConvergence(format!(
                "inverting the first Jordan component at u = ({u1}, {u2})"
            )))
        }
    }

    fn g(&self, u1: f64, u2: f64) -> Result<f64> {
        let y2 = self.y2_of(u1, u2)?;
        let (p1, p2) = self.frame.phi(u1, y2, self.l1, self.l2);
        let d1 = self
            .frame
            .phi(Dual::var(u1), Dual::cst(y2), self.l1, self.l2)
            .0
            .eps;
        let d2 = self
            .frame
            .phi(Dual::cst(u1), Dual::var(y2), self.l1, self.l2)
            .0
            .eps;
        Ok(d1 * p1 + d2 * p2)
    }

    fn jet(&self, u1: f64) -> Result<[f64; 6]> {
        let mut err = None;
        let j = jet2(
            |a, b| match self.g(a, b) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            },
            u1,
            0.0,
            REDUCED_STEP,
            REDUCED_STEP,
        );
        if j.iter().any(|v| !v.is_finite()) {
            return Err(
                err.unwrap_or_else(|| Error::NoConvergence("non-finite reduced jet".into()))
            );
        }
        Ok(j)
    }
}

/// Reduced coefficients at finite `lambda`: the chain `g -> h -> (mu, A, B)
/// -> beta` with every coefficient evaluated at the given `lambda` rather
/// than expanded to first order.
pub fn reduced_coefficients(nf: &BTNormalForm, l1: f64, l2: f64) -> Result<ReducedCoeffs> {
    let r = Reduced {
        frame: &nf.frame,
        l1,
        l2,
    };
    let mut shift = -{
        let j = r.jet(0.0)?;
        j[2] / j[4]
    };
    for _ in 0..40 {
        let j = r.jet(shift)?;
        let ds = -j[2] / j[4];
        shift += ds;
        if ds.abs() < 1e-14 {
            break;
        }
    }
    let [h00, h10, _, h20, h11, h02] = r.jet(shift)?;
    let mu1 = h00;
    let mu2 = h10 - 0.5 * h00 * h02;
    let a = 0.5 * (h20 - h10 * h02);
    let b = h11;
    if !(a.abs() > 1e-12) {
        return Err(Error::DegenerateBT {
            condition: "BT.2",
            value: a,
        });
    }
    Ok(ReducedCoeffs {
        shift,
        h00,
        h10,
        h20,
        h11,
        h02,
        mu1,
        mu2,
        a,
        b,
        beta1: b.powi(4) / a.powi(3) * mu1,
        beta2: b * b / (a * a) * mu2,
    })
}

/// `(beta1, beta2)` at `lambda`; exactly `(0, 0)` at the origin.
pub fn beta_map(nf: &BTNormalForm, l1: f64, l2: f64) -> Result<(f64, f64)> {
    if l1 == 0.0 && l2 == 0.0 {
        return Ok((0.0, 0.0));
    }
    let r = reduced_coefficients(nf, l1, l2)?;
    Ok((r.beta1, r.beta2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Curve {
    /// Fold: `4 beta1 = beta2^2`.
    T,
    /// Hopf: `beta1 = 0`, `beta2 < 0`.
    H,
    /// Homoclinic: `beta1 = -(6/25) beta2^2`, `beta2 < 0`.
    P,
}

impl Curve {
    pub fn defining(&self, b: (f64, f64)) -> f64 {
        match self {
            Curve::T => 4.0 * b.0 - b.1 * b.1,
            Curve::H => b.0,
            Curve::P => b.0 + 6.0 / 25.0 * b.1 * b.1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Curve::T => "T",
            Curve::H => "H",
            Curve::P => "P",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaBox {
    pub l1_min: f64,
    pub l1_max: f64,
    pub l2_min: f64,
    pub l2_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub lambda1: f64,
    pub lambda2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    pub t: Vec<CurvePoint>,
    pub h: Vec<CurvePoint>,
    pub p: Vec<CurvePoint>,
    pub lambda_box: LambdaBox,
    /// Samples that could not be bracketed or evaluated.
    pub dropped: Vec<String>,
}

/// Number of `lambda2` grid cells scanned for sign changes per `lambda1`.
pub const CURVE_SCAN: usize = 400;

/// Roots in `lambda2` of one curve's defining equation at fixed `lambda1`.
///
/// Only the part of the segment where `A(lambda)` keeps the sign of `A(0)`
/// is used: the rescaling by `B^4/A^3` is singular where `A` vanishes, and
/// beyond that the local normal form no longer describes the unfolding.
/// Grid cells that cannot be evaluated are skipped.
pub fn curve_lambda2(
    nf: &BTNormalForm,
    curve: Curve,
    l1: f64,
    lo: f64,
    hi: f64,
) -> Result<Vec<CurvePoint>> {
    let a_sign = nf.a0.signum();
    let f = |l2: f64| -> Option<(f64, (f64, f64))> {
        let r = reduced_coefficients(nf, l1, l2).ok()?;
        (r.a.signum() == a_sign).then(|| {
            let b = (r.beta1, r.beta2);
            (curve.defining(b), b)
        })
    };
    let grid: Vec<f64> = (0..=CURVE_SCAN)
        .map(|i| lo + (hi - lo) * i as f64 / CURVE_SCAN as f64)
        .collect();
    let vals: Vec<_> = grid.iter().map(|&l2| f(l2)).collect();
    if vals.iter().all(Option::is_none) {
        return Err(Error::DegenerateBT {
            condition: "BT.2",
            value: 0.0,
        });
    }
    let mut out = Vec::new();
    for i in 0..CURVE_SCAN {
        let (Some((fa, ba)), Some((fb, _))) = (vals[i], vals[i + 1]) else {
            continue;
        };
        if fa == 0.0 {
            push_point(&mut out, curve, l1, grid[i], ba);
            continue;
        }
        if fa * fb >= 0.0 {
            continue;
        }
        let (mut a, mut b, mut fa) = (grid[i], grid[i + 1], fa);
        let mut ok = true;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let Some((fm, _)) = f(m) else {
                ok = false;
                break;
            };
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fa * fm < 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        let l2 = 0.5 * (a + b);
        if let (true, Some((_, bm))) = (ok, f(l2)) {
            push_point(&mut out, curve, l1, l2, bm);
        }
    }
    Ok(out)
}

fn push_point(out: &mut Vec<CurvePoint>, curve: Curve, l1: f64, l2: f64, b: (f64, f64)) {
    if curve != Curve::T && !(b.1 < 0.0) {
        return;
    }
    out.push(CurvePoint {
        lambda1: l1,
        lambda2: l2,
        beta1: b.0,
        beta2: b.1,
    });
}

/// Sample the T, H and P curves over `n` values of `lambda1` in the box.
pub fn bifurcation_curves(nf: &BTNormalForm, lambda_box: LambdaBox, n: usize) -> CurveSet {
    let n = n.max(1);
    let l1s: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                lambda_box.l1_min
            } else {
                lambda_box.l1_min
                    + (lambda_box.l1_max - lambda_box.l1_min) * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let per: Vec<_> = l1s
        .par_iter()
        .map(|&l1| {
            [Curve::T, Curve::H, Curve::P].map(|c| {
                if l1 == 0.0 {
                    // every curve passes through the BT point itself
                    return Ok(vec![CurvePoint {
                        lambda1: 0.0,
                        lambda2: 0.0,
                        beta1: 0.0,
                        beta2: 0.0,
                    }]);
                }
                curve_lambda2(nf, c, l1, lambda_box.l2_min, lambda_box.l2_max)
            })
        })
        .collect();
    let mut set = CurveSet {
        t: vec![],
        h: vec![],
        p: vec![],
        lambda_box,
        dropped: vec![],
    };
    for (l1, res) in l1s.iter().zip(per) {
        for (c, r) in [Curve::T, Curve::H, Curve::P].into_iter().zip(res) {
            match r {
                Ok(pts) if pts.is_empty() => set
                    .dropped
                    .push(format!("{}: no bracket at lambda1 = {l1}", c.name())),
                Ok(pts) => match c {
                    Curve::T => set.t.extend(pts),
                    Curve::H => set.h.extend(pts),
                    Curve::P => set.p.extend(pts),
                },
                Err(e) => set
                    .dropped
                    .push(format!("{}: lambda1 = {l1}: {e}", c.name())),
            }
        }
    }
    set
}
