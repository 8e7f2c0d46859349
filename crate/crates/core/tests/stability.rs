mod common;

use common::{draw_params, Draw};
use holling_bt::equilibria::{interior_equilibria, trivial_equilibria, EquilibriumKind};
use holling_bt::model::{jacobian, ModelParams};
use holling_bt::stability::{
    classify, classify_generic, classify_origin, classify_predator_free, classify_prey_extinction,
    Sector, StabilityLabel, Which,
};
use holling_bt::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn base(c: f64, h: f64) -> ModelParams {
    ModelParams {
        a: 1.0,
        b: 2.0,
        c,
        h,
        delta: 0.5,
        eta: 0.1,
        m: 1.0,
    }
}

fn bt_example() -> ModelParams {
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
fn origin_labels() {
    assert_eq!(
        classify_origin(&base(0.2, 0.1)).label,
        StabilityLabel::UnstableNode
    );
    assert_eq!(
        classify_origin(&base(0.2, 0.5)).label,
        StabilityLabel::Saddle
    );
    assert_eq!(
        classify_origin(&base(0.5, 0.5)).label,
        StabilityLabel::SaddleNode {
            sector: Sector::Right
        }
    );
}

#[test]
fn prey_extinction_labels() {
    assert_eq!(
        classify_prey_extinction(&bt_example()).unwrap().label,
        StabilityLabel::StableNode
    );
    // c = h with c delta m + c eta - eta > 0
    let p = base(0.5, 0.5);
    assert!(p.c * p.delta * p.m + p.c * p.eta - p.eta > 0.0);
    assert_eq!(
        classify_prey_extinction(&p).unwrap().label,
        StabilityLabel::SaddleNode {
            sector: Sector::Right
        }
    );
    // c = h with c delta m + c eta - eta = 0: pick delta to cancel it, then
    // choose b so that the cubic-coefficient quantity is positive
    let (c, eta, m) = (0.5, 0.1, 1.0);
    let delta = (eta - c * eta) / (c * m);
    let p = ModelParams {
        a: 1.0,
        b: 60.0,
        c,
        h: c,
        delta,
        eta,
        m,
    };
    let rep = classify_prey_extinction(&p).unwrap();
    let r = rep
        .quantities
        .iter()
        .find(|(n, _)| n == "cubic coefficient")
        .unwrap()
        .1;
    assert!(r > 0.0);
    assert_eq!(rep.label, StabilityLabel::Saddle);
    assert!(classify_prey_extinction(&ModelParams {
        m: 0.0,
        ..base(0.2, 0.1)
    })
    .is_err());
}

#[test]
fn predator_free_points_are_unstable() {
    let p = bt_example();
    for which in [Which::Plus, Which::Minus] {
        let rep = classify_predator_free(&p, which).unwrap();
        assert!(rep.eigenvalues.iter().any(|z| z.re > 0.0));
        assert_eq!(rep.eigenvalues[0].re, p.delta);
    }
    // K3: only E+ exists
    assert!(matches!(
        classify_predator_free(&base(0.5, 0.3), Which::Minus),
        Err(Error::NotPresent(_))
    ));
}

#[test]
fn bt_equilibrium_is_double_zero() {
    let p = bt_example();
    let e = &interior_equilibria(&p).unwrap()[0];
    assert_eq!(
        classify_generic(&p, e.state()).unwrap().label,
        StabilityLabel::DoubleZero
    );
}

#[test]
fn predator_free_law_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..500 {
        let p = draw_params(&mut rng, Draw::K3);
        for e in trivial_equilibria(&p)
            .iter()
            .filter(|e| e.kind == EquilibriumKind::PredatorFree)
        {
            let rep = classify(&p, e).unwrap();
            assert_eq!(rep.eigenvalues[0].re, p.delta);
            assert!(rep.eigenvalues.iter().any(|z| z.re > 0.0));
            // independent eigen-decomposition of the Jacobian
            let eig = jacobian(&p, e.state()).unwrap().complex_eigenvalues();
            assert!(eig.iter().any(|z| (z.re - p.delta).abs() < 1e-12));
        }
    }
}

/// Label from the characteristic polynomial's roots computed by nalgebra.
fn label_from_eigen(j: &nalgebra::Matrix2<f64>) -> StabilityLabel {
    let ev = j.complex_eigenvalues();
    let (a, b) = (ev[0], ev[1]);
    if a.im.abs() > 1e-12 {
        if a.re < 0.0 {
            StabilityLabel::StableSpiral
        } else {
            StabilityLabel::UnstableSpiral
        }
    } else if a.re * b.re < 0.0 {
        StabilityLabel::Saddle
    } else if a.re < 0.0 {
        StabilityLabel::StableNode
    } else {
        StabilityLabel::UnstableNode
    }
}

#[test]
fn hyperbolic_labels_agree_with_eigendecomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut seen = 0;
    for i in 0..600 {
        let p = draw_params(&mut rng, [Draw::K1, Draw::K2, Draw::K3][i % 3]);
        for e in interior_equilibria(&p).unwrap() {
            let j = jacobian(&p, e.state()).unwrap();
            let rep = classify_generic(&p, e.state()).unwrap();
            let disc = j.trace().powi(2) - 4.0 * j.determinant();
            if rep.label.is_hyperbolic() && disc.abs() > 1e-9 {
                assert_eq!(rep.label, label_from_eigen(&j), "{p:?}");
                seen += 1;
            }
        }
    }
    assert!(seen > 100);
}

#[test]
fn perturbing_off_h_equals_c_gives_adjacent_labels() {
    let p = base(0.5, 0.5);
    assert!(matches!(
        classify_origin(&p).label,
        StabilityLabel::SaddleNode { .. }
    ));
    assert_eq!(
        classify_origin(&ModelParams { h: 0.5 - 1e-6, ..p }).label,
        StabilityLabel::UnstableNode
    );
    assert_eq!(
        classify_origin(&ModelParams { h: 0.5 + 1e-6, ..p }).label,
        StabilityLabel::Saddle
    );
    assert_eq!(
        classify_prey_extinction(&ModelParams { h: 0.5 + 1e-6, ..p })
            .unwrap()
            .label,
        StabilityLabel::StableNode
    );
    assert_eq!(
        classify_prey_extinction(&ModelParams { h: 0.5 - 1e-6, ..p })
            .unwrap()
            .label,
        StabilityLabel::Saddle
    );
}
