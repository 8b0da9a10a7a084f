//! Bounds against a brute-force scan of the rectangle, plus the structural
//! properties of the case split.
//!
//! Oracle: for fixed `t` the admissible `v` form an interval (below both
//! curves, or above both), and `D_{n-1} = 1/(t v)` is monotone in `v`. The
//! extreme value at `t` therefore sits at the interval end, and a fine scan
//! over `t` gives the infimum or supremum without any case analysis.

use cfcoef::bounds::{
    classify, lower_bound_c, lower_bound_d, upper_bound_c, upper_bound_d, witness, BoundError, CaseLabel, Direction,
};
use cfcoef::natural_extension::{f_curve, CurveConfig};
use proptest::prelude::*;

const SCAN: usize = 20_000;

fn g(b: u64, big_r: f64, t: f64) -> f64 {
    big_r / t - b as f64 * (big_r + 1.0)
}

fn scan_points(a: u64, b: u64, r: f64, big_r: f64) -> Vec<f64> {
    let (tl, tr) = (1.0 / (b as f64 + 1.0), 1.0 / b as f64);
    let mut ts: Vec<f64> = (0..=SCAN).map(|i| tl + (tr - tl) * i as f64 / SCAN as f64).collect();
    let s = CurveConfig::new(a, b, r, big_r).s;
    if s > tl && s < tr {
        ts.push(s);
    }
    ts
}

/// `inf D_{n-1}` over the part of the rectangle below both curves.
fn scan_lower(a: u64, b: u64, r: f64, big_r: f64) -> Option<f64> {
    let (vb, vt) = (1.0 / (a as f64 + 1.0), 1.0 / a as f64);
    scan_points(a, b, r, big_r)
        .into_iter()
        .filter_map(|t| {
            let m = f_curve(a, r, t).min(g(b, big_r, t)).min(vt);
            (m > vb).then(|| 1.0 / (t * m))
        })
        .reduce(f64::min)
}

/// `sup D_{n-1}` over the part of the rectangle above both curves.
fn scan_upper(a: u64, b: u64, r: f64, big_r: f64) -> Option<f64> {
    let (vb, vt) = (1.0 / (a as f64 + 1.0), 1.0 / a as f64);
    scan_points(a, b, r, big_r)
        .into_iter()
        .filter_map(|t| {
            let m = f_curve(a, r, t).max(g(b, big_r, t)).max(vb);
            (m < vt).then(|| 1.0 / (t * m))
        })
        .reduce(f64::max)
}

fn close(x: f64, y: f64, rel: f64) -> bool {
    (x - y).abs() <= rel * y.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lower_bound_is_the_infimum(a in 1u64..12, b in 1u64..12, r in 1.05f64..14.0, big_r in 1.05f64..14.0) {
        match (lower_bound_d(a, b, r, big_r), scan_lower(a, b, r, big_r)) {
            (Ok(res), Some(inf)) => {
                prop_assert!(inf >= res.value * (1.0 - 1e-12), "bound {} above scanned {inf}", res.value);
                prop_assert!(close(inf, res.value, 1e-3), "bound {} vs scanned {inf} (case {})", res.value, res.theorem_case);
            }
            (Err(BoundError::EmptyRegion { .. }), None) => {}
            (res, inf) => prop_assert!(false, "mismatch: {res:?} vs scan {inf:?}"),
        }
    }

    #[test]
    fn upper_bound_is_the_supremum(a in 1u64..12, b in 1u64..12, r in 1.05f64..14.0, big_r in 1.05f64..14.0) {
        let res = upper_bound_d(a, b, r, big_r).unwrap();
        let sup = scan_upper(a, b, r, big_r).expect("region above both curves is never empty");
        prop_assert!(sup <= res.value * (1.0 + 1e-12), "bound {} below scanned {sup}", res.value);
        prop_assert!(close(sup, res.value, 1e-3), "bound {} vs scanned {sup} (case {})", res.value, res.theorem_case);
    }

    #[test]
    fn c_bounds_are_d_bounds_in_other_coordinates(
        a in 1u64..20,
        b in 1u64..20,
        t in 1.01f64..1.99,
        big_t in 1.01f64..1.99,
    ) {
        let (r, big_r) = (1.0 / (t - 1.0), 1.0 / (big_t - 1.0));
        // C > t is D < r: the upper C-bound comes from the lower D-bound
        if let Ok(low) = lower_bound_d(a, b, r, big_r) {
            let up_c = upper_bound_c(a, b, t, big_t).unwrap().value;
            prop_assert!(close(up_c, 1.0 + 1.0 / low.value, 1e-9), "{up_c} vs D {}", low.value);
        }
        let up = upper_bound_d(a, b, r, big_r).unwrap();
        let low_c = lower_bound_c(a, b, t, big_t).unwrap().value;
        prop_assert!(close(low_c, 1.0 + 1.0 / up.value, 1e-9), "{low_c} vs D {}", up.value);
        prop_assert!(low_c > 1.0 && low_c < 2.0);
    }

    #[test]
    fn classify_is_total_and_matches_bound_cases(a in 1u64..60, b in 1u64..60, r in 1.0001f64..80.0, big_r in 1.0001f64..80.0) {
        let label = classify(a, b, r, big_r);
        prop_assert!(CaseLabel::ALL.contains(&label));
        let up = upper_bound_d(a, b, r, big_r).unwrap();
        let expected = match up.theorem_case {
            1 => vec![CaseLabel::I, CaseLabel::II],
            2 => vec![CaseLabel::III, CaseLabel::IV],
            3 => vec![CaseLabel::V],
            _ => vec![CaseLabel::ViA, CaseLabel::ViB, CaseLabel::ViC, CaseLabel::ViD],
        };
        prop_assert!(expected.contains(&label), "{label} with upper case {}", up.theorem_case);
        if let Ok(low) = lower_bound_d(a, b, r, big_r) {
            prop_assert_eq!(low.theorem_case == 3, label.is_crossing());
        }
    }
}

/// Ties on the thresholds of the case split still produce exactly one label.
#[test]
fn classify_on_exact_ties() {
    for a in 1..=6u64 {
        for b in 1..=6u64 {
            let (af, bf) = (a as f64, b as f64);
            for dr in [1.0 / (bf + 1.0), 1.0 / bf, 0.5] {
                for dbig in [1.0 / (af + 1.0), 1.0 / af, 0.5] {
                    let (r, big_r) = (af + dr, bf + dbig);
                    if r <= 1.0 || big_r <= 1.0 {
                        continue;
                    }
                    let label = classify(a, b, r, big_r);
                    assert!(CaseLabel::ALL.contains(&label));
                    assert_eq!(label, classify(a, b, r, big_r));
                }
            }
        }
    }
}

#[test]
fn dominance_over_the_tong_value() {
    let thresholds = [1.1, 1.5, 2.0, 2.9, 3.6, 5.2, 7.7, 12.5];
    for a in 1..=40 {
        for b in 1..=40 {
            for &r in &thresholds {
                for &big_r in &thresholds {
                    let up = upper_bound_d(a, b, r, big_r).unwrap();
                    if up.theorem_case <= 3 {
                        assert!(up.value <= up.tong_value * (1.0 + 1e-12), "{up:?}");
                    }
                    if let Ok(low) = lower_bound_d(a, b, r, big_r) {
                        if low.theorem_case <= 2 {
                            assert!(low.value >= low.tong_value * (1.0 - 1e-12), "{low:?}");
                        }
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn witnesses_reach_both_bounds(a in 1u64..25, b in 1u64..25, r in 1.05f64..30.0, big_r in 1.05f64..30.0) {
        let w = witness(a, b, r, big_r, Direction::Above, 1e-4).unwrap();
        prop_assert!(w.relative_gap < 1e-4);
        prop_assert!(w.d_prev2 > cfcoef::Rational::from_f64(r).unwrap());
        match witness(a, b, r, big_r, Direction::Below, 1e-4) {
            Ok(w) => prop_assert!(w.relative_gap < 1e-4),
            Err(BoundError::EmptyRegion { .. }) => prop_assert!(lower_bound_d(a, b, r, big_r).is_err()),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

#[test]
fn scan_reproduces_known_extremes() {
    // (R - b) = 0.6 gives (b+1)/0.6 for the lower bound on (1, 3)
    assert!(close(scan_lower(1, 3, 2.9, 3.6).unwrap(), 4.0 / 0.6, 1e-4));
    assert!(close(scan_upper(17, 29, 2.9, 3.6).unwrap(), 540.0, 1e-9));
    assert!(scan_lower(5, 5, 2.9, 3.6).is_none());
}
