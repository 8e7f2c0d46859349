mod common;

use common::{companion_roots, draw_params, sign_scan_interior, Draw};
use holling_bt::equilibria::{
    all_equilibria, classify_region, interior_equilibria, interior_equilibria_detailed, isocline_y,
    k2_cubic_delta, k2_delta_crossings, printed_quartic_coeffs, quartic_coeffs, trivial_equilibria,
    EquilibriumKind, InteriorRoute, HC_TOL,
};
use holling_bt::model::{residual, ModelParams};
use holling_bt::Region;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spiral() -> ModelParams {
    ModelParams {
        a: 1.0,
        b: 2.0,
        c: 0.2,
        h: 0.1,
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

fn k2_example(delta: f64) -> ModelParams {
    ModelParams {
        a: 1.0,
        b: 20.0,
        c: 0.3,
        h: 0.3,
        delta,
        eta: 0.1,
        m: 1.0,
    }
}

#[test]
fn trivial_equilibria_golden() {
    let eqs = trivial_equilibria(&bt_example());
    let get = |s: &str| eqs.iter().find(|e| e.source == s).unwrap().clone();
    let (ep, em, ey) = (get("E+"), get("E-"), get("Ey"));
    assert!((ep.x - 0.7975913540).abs() < 1e-8 && ep.y == 0.0);
    assert!((em.x - 0.1524086460).abs() < 1e-8 && em.y == 0.0);
    assert!(ey.x == 0.0 && (ey.y - 0.2456119378).abs() < 1e-8);
    assert!(eqs.iter().any(|e| e.kind == EquilibriumKind::Origin));

    let ey = trivial_equilibria(&spiral())
        .into_iter()
        .find(|e| e.source == "Ey")
        .unwrap();
    assert!((ey.y - 5.0).abs() < 1e-12);

    let pf: Vec<_> = trivial_equilibria(&k2_example(0.5))
        .into_iter()
        .filter(|e| e.kind == EquilibriumKind::PredatorFree)
        .collect();
    assert_eq!(pf.len(), 1);
    assert!((pf[0].x - 0.7).abs() < 1e-12);
}

#[test]
fn regions() {
    assert_eq!(classify_region(0.3, 0.3), Region::K2);
    assert_eq!(classify_region(0.4, 0.3), Region::K1);
    assert_eq!(classify_region(0.3, 0.5), Region::K3);
}

#[test]
fn quartic_coefficients() {
    let p = bt_example();
    let q = quartic_coeffs(&p).unwrap();
    assert!((q.d - (0.1715598183 - 0.05) / 2.0).abs() < 1e-15);
    assert_eq!(quartic_coeffs(&k2_example(0.5)).unwrap().d, 0.0);
    // with a != 1 the printed A differs from the elimination
    assert!((printed_quartic_coeffs(&p).a - q.a).abs() > 1e-3);
    // with a = 1 they coincide
    assert_eq!(
        printed_quartic_coeffs(&spiral()).a,
        quartic_coeffs(&spiral()).unwrap().a
    );
}

#[test]
fn quartic_roots_are_isocline_intersections() {
    // the interior abscissae are roots of the quartic (companion-matrix check)
    let p = spiral();
    let q = quartic_coeffs(&p).unwrap();
    let roots = companion_roots(&[q.a, q.b, q.c, q.d]);
    for e in interior_equilibria(&p).unwrap() {
        assert!(roots
            .iter()
            .any(|r| (r.re - e.x).abs() < 1e-8 && r.im.abs() < 1e-8));
    }
}

#[test]
fn bt_point_has_one_interior_equilibrium() {
    let rep = interior_equilibria_detailed(&bt_example(), HC_TOL).unwrap();
    assert_eq!(rep.equilibria.len(), 1);
    let e = &rep.equilibria[0];
    assert!((e.x - 0.2187994431).abs() < 1e-6);
    assert!((e.y - 0.3127866314).abs() < 1e-6);
    assert!(matches!(rep.route, InteriorRoute::Ferrari(_)));
}

#[test]
fn k2_two_equilibria_when_delta_negative() {
    let p = k2_example(0.4);
    assert!(k2_cubic_delta(&p).unwrap() < 0.0);
    let eqs = interior_equilibria(&p).unwrap();
    assert_eq!(eqs.len(), 2);
    assert!(eqs.iter().all(|e| e.source.starts_with("K2-Cardano")));
}

#[test]
fn k2_discriminant_crossings() {
    let xs = k2_delta_crossings(&k2_example(0.4), 0.01, 20.0, 2000).unwrap();
    assert_eq!(xs.len(), 2);
    assert!((xs[0] - 0.42769229198509).abs() < 1e-8);
    assert!((xs[1] - 10.49999490731896).abs() < 1e-8);
    assert!(
        k2_cubic_delta(&k2_example(0.42769229198509138494))
            .unwrap()
            .abs()
            < 1e-9
    );
}

#[test]
fn spiral_matches_sign_scan() {
    let p = spiral();
    let got = interior_equilibria(&p).unwrap();
    let want = sign_scan_interior(&p, 1_000_000);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!((g.x - w.0).abs() < 1e-7 && (g.y - w.1).abs() < 1e-7);
    }
}

#[test]
fn isocline_values() {
    let p = k2_example(0.5);
    // at x = 1 with c = h: numerator -1 + (1 - c) + 0 = -c
    let want = -(p.a + p.b + 1.0) * p.c / (1.0 + p.c);
    assert!((isocline_y(&p, 1.0).unwrap() - want).abs() < 1e-12);
    assert!(isocline_y(&p, 0.0).is_err());
}

fn check_region(region: Draw, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        let p = draw_params(&mut rng, region);
        let got = interior_equilibria(&p).unwrap();
        let want = sign_scan_interior(&p, 100_000);
        assert_eq!(got.len(), want.len(), "{p:?}: {got:?} vs {want:?}");
        for (g, w) in got.iter().zip(&want) {
            assert!((g.x - w.0).abs() < 1e-7, "{p:?}");
            assert!(residual(&p, g.state()).unwrap() < 1e-8);
        }
        if region == Draw::K3 {
            let q = quartic_coeffs(&p).unwrap();
            assert!(q.d < 0.0);
            assert_eq!(got.len() % 2, 1);
        }
    }
}

#[test]
fn k1_draws_match_oracle() {
    check_region(Draw::K1, 11);
}

#[test]
fn k2_draws_match_oracle() {
    check_region(Draw::K2, 12);
}

#[test]
fn k3_draws_match_oracle() {
    check_region(Draw::K3, 13);
}

#[test]
fn predator_free_branch_logic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let p = draw_params(&mut rng, Draw::K3);
        let n = trivial_equilibria(&p)
            .iter()
            .filter(|e| e.kind == EquilibriumKind::PredatorFree)
            .count();
        assert_eq!(n, 1);
        let p = draw_params(&mut rng, Draw::K2);
        let pf: Vec<_> = trivial_equilibria(&p)
            .into_iter()
            .filter(|e| e.kind == EquilibriumKind::PredatorFree)
            .collect();
        assert_eq!(pf.len(), 1);
        assert!((pf[0].x - (1.0 - p.c)).abs() < 1e-12);
    }
}

#[test]
fn all_equilibria_have_small_residual() {
    for p in [spiral(), bt_example(), k2_example(0.4)] {
        for e in all_equilibria(&p).unwrap() {
            assert!(residual(&p, e.state()).unwrap() < 1e-8, "{e:?}");
        }
    }
}
