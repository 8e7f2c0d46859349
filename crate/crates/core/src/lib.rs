//! Bifurcation toolkit for a predator-prey system with Holling type III
//! predation, Michaelis-Menten prey harvesting and a modified Leslie-Gower
//! predator equation:
//!
//! ```text
//! x' = x(1 - x) - x^2 y / (a x^2 + b x + 1) - h x / (c + x)
//! y' = y (delta - eta y / (m + x))
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parameters, vector field, Jacobian and Taylor jet.
//! * [`polyroots`]: closed-form cubic (Cardano) and quartic (Ferrari) solvers.
//! * [`equilibria`]: trivial and interior equilibria, harvesting regions.
//! * [`stability`]: linear classification plus the degenerate sign rules for
//!   the boundary equilibria.
//! * [`hopf`]: Hopf points along an equilibrium branch and cycle stability.
//! * [`bt`]: Bogdanov-Takens points, normal form and local bifurcation curves.
//! * [`sim`]: adaptive integration, invariance/boundedness checks and
//!   Poincare-section limit cycle probes.
//!
//! ```
//! use holling_bt::bt::bt_locate;
//! use holling_bt::model::BtParams;
//!
//! let points = bt_locate(&BtParams { a: 2.0, b: -2.82, c: 0.05, eta: 0.1, m: 0.8 }).unwrap();
//! let p = &points[0];
//! assert!((p.h_bt - 0.1715598183).abs() < 1e-9);
//! assert!((p.delta_bt - 0.03070149222).abs() < 1e-9);
//! ```

pub mod bt;
mod dual;
pub mod equilibria;
pub mod error;
pub mod hopf;
pub mod model;
mod numdiff;
pub mod polyroots;
pub mod sim;
pub mod stability;

pub use equilibria::{Equilibrium, EquilibriumKind, Region};
pub use error::{Error, Result};
pub use model::{ModelParams, State};

/// Library version, recorded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Chapters of the guide under `book/src`, compiled as doc-tests so the
/// snippets there cannot drift from the library.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    pub mod model {}
    #[doc = include_str!("../../../book/src/equilibria.md")]
    pub mod equilibria {}
    #[doc = include_str!("../../../book/src/stability.md")]
    pub mod stability {}
    #[doc = include_str!("../../../book/src/hopf.md")]
    pub mod hopf {}
    #[doc = include_str!("../../../book/src/bogdanov_takens.md")]
    pub mod bogdanov_takens {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub mod simulation {}
}
