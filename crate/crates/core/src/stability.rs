//! Linear stability plus the sign rules for the non-hyperbolic boundary cases.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::{h_equals_c, predator_free_x, Equilibrium, EquilibriumKind, HC_TOL};
use crate::error::{Error, Result};
use crate::model::{jacobian, ModelParams, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityLabel {
    StableNode,
    UnstableNode,
    Saddle,
    StableSpiral,
    UnstableSpiral,
    CenterCandidate,
    /// One zero eigenvalue; the parabolic sector lies in the given half-plane.
    SaddleNode {
        sector: Sector,
    },
    DegenerateSaddle,
    DoubleZero,
    NonHyperbolicOther,
}

impl std::fmt::Display for StabilityLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StabilityLabel::SaddleNode {
                sector: Sector::Left,
            } => f.write_str("SaddleNode(Left)"),
            StabilityLabel::SaddleNode {
                sector: Sector::Right,
            } => f.write_str("SaddleNode(Right)"),
            other => write!(f, "{other:?}"),
        }
    }
}

impl StabilityLabel {
    pub fn is_hyperbolic(&self) -> bool {
        matches!(
            self,
            StabilityLabel::StableNode
                | StabilityLabel::UnstableNode
                | StabilityLabel::Saddle
                | StabilityLabel::StableSpiral
                | StabilityLabel::UnstableSpiral
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub eigenvalues: [Complex64; 2],
    pub trace: f64,
    pub det: f64,
    pub label: StabilityLabel,
    /// Which rule produced the label.
    pub theorem_branch: String,
    /// Sign quantities the rule looked at, by name.
    pub quantities: Vec<(String, f64)>,
}

/// Eigenvalues from trace and determinant; real pairs ascending.
pub fn eigenvalues(j: &Matrix2<f64>) -> [Complex64; 2] {
    let tr = j.trace();
    let det = j.determinant();
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        // avoid cancellation in the smaller root
        let big = if tr >= 0.0 {
            (tr + s) / 2.0
        } else {
            (tr - s) / 2.0
        };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (l1, l2) = if big <= small {
            (big, small)
        } else {
            (small, big)
        };
        [Complex64::new(l1, 0.0), Complex64::new(l2, 0.0)]
    } else {
        let im = (-disc).sqrt() / 2.0;
        [Complex64::new(tr / 2.0, -im), Complex64::new(tr / 2.0, im)]
    }
}

/// Threshold below which an eigenvalue is treated as zero.
pub fn zero_tol(j: &Matrix2<f64>) -> f64 {
    1e-8 * (1.0 + j.norm())
}

/// Planar classification from trace, determinant and discriminant.
pub fn classify_matrix(j: &Matrix2<f64>) -> StabilityReport {
    let tr = j.trace();
    let det = j.determinant();
    let eig = eigenvalues(j);
    let tz = zero_tol(j);
    let disc = tr * tr - 4.0 * det;
    let label = if tr.abs() < tz && det.abs() < tz {
        StabilityLabel::DoubleZero
    } else if eig.iter().any(|l| l.norm() < tz) {
        StabilityLabel::NonHyperbolicOther
    } else if det < 0.0 {
        StabilityLabel::Saddle
    } else if tr.abs() < tz {
        StabilityLabel::CenterCandidate
    } else if disc < 0.0 {
        if tr < 0.0 {
            StabilityLabel::StableSpiral
        } else {
            StabilityLabel::UnstableSpiral
        }
    } else if tr < 0.0 {
        StabilityLabel::StableNode
    } else {
        StabilityLabel::UnstableNode
    };
    StabilityReport {
        eigenvalues: eig,
        trace: tr,
        det,
        label,
        theorem_branch: "linearization".into(),
        quantities: vec![
            ("trace".into(), tr),
            ("det".into(), det),
            ("discriminant".into(), disc),
        ],
    }
}

/// Linearization at an arbitrary equilibrium.
pub fn classify_generic(p: &ModelParams, eq: State) -> Result<StabilityReport> {
    Ok(classify_matrix(&jacobian(p, eq)?))
}

/// The origin: unstable node, saddle, or saddle-node when `h = c`.
pub fn classify_origin(p: &ModelParams) -> StabilityReport {
    let mut rep =
        classify_matrix(&jacobian(p, State::new(0.0, 0.0)).expect("origin is in the domain"));
    let cmh = p.c - p.h;
    rep.quantities = vec![("c-h".into(), cmh)];
    let (label, branch) = if h_equals_c(p.h, p.c, HC_TOL) {
        if p.c == 1.0 || (p.c - 1.0).abs() < HC_TOL {
            (StabilityLabel::DegenerateSaddle, "origin: h = c = 1")
        } else if p.c < 1.0 {
            (
                StabilityLabel::SaddleNode {
                    sector: Sector::Right,
                },
                "origin: h = c < 1",
            )
        } else {
            (
                StabilityLabel::SaddleNode {
                    sector: Sector::Left,
                },
                "origin: h = c > 1",
            )
        }
    } else if cmh > 0.0 {
        (StabilityLabel::UnstableNode, "origin: c - h > 0")
    } else {
        (StabilityLabel::Saddle, "origin: c - h < 0")
    };
    rep.label = label;
    rep.theorem_branch = branch.into();
    rep
}

/// The prey-extinction point `(0, delta m / eta)`.
pub fn classify_prey_extinction(p: &ModelParams) -> Result<StabilityReport> {
    if p.m <= 0.0 {
        return Err(Error::DomainError(
            "prey-extinction equilibrium needs m > 0".into(),
        ));
    }
    let (c, d, eta, m, b) = (p.c, p.delta, p.eta, p.m, p.b);
    let mut rep = classify_generic(p, State::new(0.0, d * m / eta))?;
    let cmh = c - p.h;
    let q = c * d * m + c * eta - eta;
    let r = b * d * eta * m - d * d * m * m - 2.0 * d * eta * m - d * eta - eta * eta;
    rep.quantities = vec![
        ("c-h".into(), cmh),
        ("c*delta*m+c*eta-eta".into(), q),
        ("cubic coefficient".into(), r),
    ];
    let (label, branch) = if h_equals_c(p.h, c, HC_TOL) {
        let qscale = c * d * m + c * eta + eta;
        if q.abs() > 1e-12 * qscale {
            let sector = if q > 0.0 { Sector::Right } else { Sector::Left };
            (
                StabilityLabel::SaddleNode { sector },
                "Ey: h = c, c delta m + c eta - eta != 0",
            )
        } else if r < 0.0 {
            (
                StabilityLabel::UnstableNode,
                "Ey: h = c, c delta m + c eta - eta = 0, cubic coefficient < 0",
            )
        } else if r > 0.0 {
            (
                StabilityLabel::Saddle,
                "Ey: h = c, c delta m + c eta - eta = 0, cubic coefficient > 0",
            )
        } else {
            (
                StabilityLabel::NonHyperbolicOther,
                "Ey: h = c, all sign quantities vanish",
            )
        }
    } else if cmh < 0.0 {
        (StabilityLabel::StableNode, "Ey: c - h < 0")
    } else {
        (StabilityLabel::Saddle, "Ey: c - h > 0")
    };
    rep.label = label;
    rep.theorem_branch = branch.into();
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    Plus,
    Minus,
}

/// A predator-free point `E+` or `E-`; always unstable since one eigenvalue
/// is `delta > 0`.
pub fn classify_predator_free(p: &ModelParams, which: Which) -> Result<StabilityReport> {
    let tag = match which {
        Which::Plus => "E+",
        Which::Minus => "E-",
    };
    let x = predator_free_x(p, HC_TOL)
        .into_iter()
        .find(|(_, t)| *t == tag)
        .map(|(x, _)| x)
        .ok_or_else(|| Error::NotPresent(format!("{tag} does not exist for these parameters")))?;
    let j = jacobian(p, State::new(x, 0.0))?;
    let l1 = p.delta;
    let l2 = 1.0 - 2.0 * x - p.h * p.c / (p.c + x).powi(2);
    let tz = zero_tol(&j);
    let label = if l2.abs() < tz {
        StabilityLabel::NonHyperbolicOther
    } else if l2 > 0.0 {
        StabilityLabel::UnstableNode
    } else {
        StabilityLabel::Saddle
    };
    Ok(StabilityReport {
        eigenvalues: [Complex64::new(l1, 0.0), Complex64::new(l2, 0.0)],
        trace: j.trace(),
        det: j.determinant(),
        label,
        theorem_branch: format!("{tag}: eigenvalues delta and 1 - 2x - hc/(c+x)^2"),
        quantities: vec![("lambda1".into(), l1), ("lambda2".into(), l2)],
    })
}

/// Dispatch on the kind of equilibrium.
pub fn classify(p: &ModelParams, eq: &Equilibrium) -> Result<StabilityReport> {
    match eq.kind {
        EquilibriumKind::Origin => Ok(classify_origin(p)),
        EquilibriumKind::PreyExtinction => classify_prey_extinction(p),
        EquilibriumKind::PredatorFree => {
            let which = if eq.source == "E-" {
                Which::Minus
            } else {
                Which::Plus
            };
            classify_predator_free(p, which)
        }
        EquilibriumKind::Interior => classify_generic(p, eq.state()),
    }
}
