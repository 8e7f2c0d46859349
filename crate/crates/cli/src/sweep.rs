//! `(h, c)` parameter sweep: region tag, interior-equilibrium count and the
//! stability label of every equilibrium at each grid node.

use holling_bt::equilibria::{
    classify_region_with_tol, interior_equilibria_detailed, trivial_equilibria_with_tol,
};
use holling_bt::model::ModelParams;
use holling_bt::stability::classify;
use holling_bt::{Equilibrium, EquilibriumKind, Region};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SweepSection;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub h: f64,
    pub c: f64,
    pub region: Region,
    /// `None` when the node failed; the reason is in `error`.
    pub n_interior: Option<usize>,
    /// `name=label` for every equilibrium, trivial ones first.
    pub labels: Vec<String>,
    pub error: Option<String>,
}

/// Short name used in the label list.
pub fn equilibrium_name(e: &Equilibrium, interior_index: usize) -> String {
    match e.kind {
        EquilibriumKind::Origin => "E0".into(),
        EquilibriumKind::Interior => format!("E{}", interior_index + 1),
        _ => e.source.clone(),
    }
}

/// One node: equilibria and labels at `(h, c)`.
pub fn sweep_point(base: &ModelParams, h: f64, c: f64, region_tol: f64) -> SweepRow {
    let p = ModelParams { h, c, ..*base };
    let region = classify_region_with_tol(h, c, region_tol);
    let mut row = SweepRow {
        h,
        c,
        region,
        n_interior: None,
        labels: Vec::new(),
        error: None,
    };
    let interior = match interior_equilibria_detailed(&p, region_tol) {
        Ok(r) => r.equilibria,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.n_interior = Some(interior.len());
    let trivial = trivial_equilibria_with_tol(&p, region_tol);
    let named = trivial.iter().map(|e| (equilibrium_name(e, 0), e)).chain(
        interior
            .iter()
            .enumerate()
            .map(|(i, e)| (equilibrium_name(e, i), e)),
    );
    for (name, e) in named {
        match classify(&p, e) {
            Ok(r) => row.labels.push(format!("{name}={}", r.label)),
            Err(err) => {
                row.labels.push(format!("{name}=?"));
                row.error.get_or_insert_with(|| format!("{name}: {err}"));
            }
        }
    }
    row
}

/// Rows in `h`-major order; parallel evaluation, ordered collection.
pub fn sweep(base: &ModelParams, s: &SweepSection, region_tol: f64) -> Vec<SweepRow> {
    let (hs, cs) = (s.h_nodes(), s.c_nodes());
    let nodes: Vec<(f64, f64)> = hs
        .iter()
        .flat_map(|h| cs.iter().map(move |c| (*h, *c)))
        .collect();
    nodes
        .par_iter()
        .map(|&(h, c)| sweep_point(base, h, c, region_tol))
        .collect()
}
