mod common;

use common::{fd_jacobian, kuznetsov_l1, sign_scan_interior};
use holling_bt::bt::bt_locate;
use holling_bt::hopf::{
    gh_first_coefficient, hopf_at, hopf_delta, hopf_scan, lyapunov_coefficient_l,
    lyapunov_coefficient_numeric, transversality, ConventionVerdict, EmpiricalVerdict, EqBranch,
    HopfData, PlanarJet3,
};
use holling_bt::model::{BtParams, ModelParams, State};
use holling_bt::Error;

const H_BT: f64 = 0.1715598183;
const D_BT: f64 = 0.03070149222;

fn bt() -> BtParams {
    BtParams {
        a: 2.0,
        b: -2.82,
        c: 0.05,
        eta: 0.1,
        m: 0.8,
    }
}

/// The unfolding slice `lambda1 = 0.02` with `delta` free.
fn slice() -> (ModelParams, EqBranch) {
    let p = bt().with_h_delta(H_BT + 0.02, D_BT);
    (
        p,
        EqBranch {
            index: 1,
            delta_lo: D_BT - 0.0135,
            delta_hi: D_BT - 0.012838,
        },
    )
}

fn hopf_point() -> HopfData {
    let (p, br) = slice();
    let v = hopf_scan(&p, &br, 64).unwrap();
    assert_eq!(v.len(), 1);
    v[0].clone()
}

#[test]
fn hopf_delta_lies_in_the_unstable_cycle_window() {
    let (p, br) = slice();
    let d = hopf_delta(&p, &br).unwrap().unwrap();
    assert!(d > D_BT - 0.01284449222 && d < D_BT - 0.01284149222, "{d}");
    let h = hopf_point();
    assert_eq!(h.delta_h, d);
}

#[test]
fn hopf_point_invariants() {
    let h = hopf_point();
    assert!(h.trace.abs() < 1e-8);
    assert!(h.det > 0.0);
    assert!((h.omega * h.omega - h.det).abs() < 1e-10);
    assert!((h.transversality + 1.0).abs() < 1e-8);
}

/// Independent route: interior equilibria by sign scan, trace by finite
/// differences, bisection on delta.
#[test]
fn hopf_delta_matches_bisection_oracle() {
    let (p, br) = slice();
    let trace = |delta: f64| {
        let q = ModelParams { delta, ..p };
        let eqs = sign_scan_interior(&q, 200_000);
        let (x, y) = eqs[br.index];
        let j = fd_jacobian(&q, State::new(x, y));
        j[0][0] + j[1][1]
    };
    let (mut a, mut b) = (br.delta_lo, br.delta_hi);
    let neg_a = trace(a) < 0.0;
    assert_ne!(neg_a, trace(b) < 0.0);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if (trace(m) < 0.0) == neg_a {
            a = m;
        } else {
            b = m;
        }
    }
    let oracle = 0.5 * (a + b);
    let got = hopf_delta(&p, &br).unwrap().unwrap();
    assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
}

#[test]
fn canonical_coefficient_matches_lyapunov_oracle() {
    let h = hopf_point();
    let (p, _) = slice();
    let q = ModelParams {
        delta: h.delta_h,
        ..p
    };
    let s = State::new(h.x, h.y);
    let (l1, omega) = kuznetsov_l1(&q, s);
    assert!((omega - h.omega).abs() < 1e-8 * h.omega);
    // a = omega l1 / 4 for the frame [Im q, Re q] with x = 2 Re(w q)
    let a = lyapunov_coefficient_numeric(&q, s).unwrap();
    assert!(
        (a - omega * l1 / 4.0).abs() < 1e-4 * a.abs(),
        "{a} vs {}",
        omega * l1 / 4.0
    );
    assert_eq!(a, h.l_numeric);
}

#[test]
fn printed_coefficient_is_reported_alongside() {
    let h = hopf_point();
    let (p, _) = slice();
    let q = ModelParams {
        delta: h.delta_h,
        ..p
    };
    let l = lyapunov_coefficient_l(&q, State::new(h.x, h.y)).unwrap();
    assert!(l.is_finite());
    assert_eq!(l, h.l);
    assert_eq!(h.printed_verdict, ConventionVerdict::from_sign(l));
    assert_eq!(h.cycle_verdict, ConventionVerdict::from_sign(h.l_numeric));
    if (h.l - h.l_numeric).abs() > 1e-4 * h.l_numeric.abs() {
        assert!(h
            .diagnostics
            .iter()
            .any(|d| d.starts_with("PrintedCoefficientMismatch")));
    }
}

#[test]
fn empirical_verdict_is_repelling_and_seed_consistent() {
    let h = hopf_point();
    assert_eq!(h.empirical_verdict, EmpiricalVerdict::Repelling);
    assert!(h.return_ratios.iter().all(|r| *r > 1.0));
    // positive normal-form coefficient: subcritical, small cycles repel
    assert!(h.l_numeric > 0.0);
}

#[test]
fn time_rescaling_keeps_the_sign() {
    let jet = PlanarJet3 {
        f_xx: 0.3,
        f_xy: -1.2,
        f_yy: 0.7,
        f_xxx: 2.0,
        f_xyy: -0.4,
        g_xx: 0.1,
        g_xy: 0.9,
        g_yy: -0.6,
        g_xxy: 0.5,
        g_yyy: -1.1,
    };
    let a = gh_first_coefficient(&jet, 0.8);
    for k in [0.01, 0.5, 3.0, 100.0] {
        let s = PlanarJet3 {
            f_xx: k * jet.f_xx,
            f_xy: k * jet.f_xy,
            f_yy: k * jet.f_yy,
            f_xxx: k * jet.f_xxx,
            f_xyy: k * jet.f_xyy,
            g_xx: k * jet.g_xx,
            g_xy: k * jet.g_xy,
            g_yy: k * jet.g_yy,
            g_xxy: k * jet.g_xxy,
            g_yyy: k * jet.g_yyy,
        };
        let b = gh_first_coefficient(&s, k * 0.8);
        assert_eq!(a.signum(), b.signum());
        assert!((b - k * a).abs() < 1e-12 * (1.0 + (k * a).abs()));
    }
}

#[test]
fn bt_point_is_not_a_hopf_point() {
    let pt = bt_locate(&bt()).unwrap().remove(0);
    let p = bt().with_h_delta(pt.h_bt, pt.delta_bt);
    match hopf_at(&p, State::new(pt.x, pt.y)) {
        Err(Error::NoHopf(msg)) => assert!(msg.contains("Bogdanov-Takens")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn transversality_off_equilibrium() {
    let p = bt().with_h_delta(H_BT, D_BT);
    let t = transversality(&p, State::new(0.5, 0.5));
    assert!((t.value + 1.0).abs() < 1e-8);
    assert!(!t.applicable);
}

#[test]
fn fold_in_interval_is_branch_lost() {
    let p = ModelParams {
        a: 1.0,
        b: 20.0,
        c: 0.3,
        h: 0.3,
        delta: 0.4,
        eta: 0.1,
        m: 1.0,
    };
    let br = EqBranch {
        index: 0,
        delta_lo: 0.40,
        delta_hi: 0.45,
    };
    assert!(matches!(
        hopf_scan(&p, &br, 32),
        Err(Error::BranchLost { .. })
    ));
}

#[test]
fn no_sign_change_gives_empty_list() {
    let (p, _) = slice();
    let br = EqBranch {
        index: 1,
        delta_lo: D_BT - 0.0135,
        delta_hi: D_BT - 0.0130,
    };
    assert!(hopf_scan(&p, &br, 16).unwrap().is_empty());
    assert_eq!(hopf_delta(&p, &br).unwrap(), None);
}

#[test]
fn scan_is_deterministic() {
    let (p, br) = slice();
    let a = hopf_scan(&p, &br, 48).unwrap();
    let b = hopf_scan(&p, &br, 48).unwrap();
    assert_eq!(a, b);
}
