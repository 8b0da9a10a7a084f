//! Case classification and the sharp bounds on `D_{n-1}` and `C_{n-1}`.
//!
//! All bounds depend on `(a, b) = (a_n, a_{n+1})` and on thresholds for the
//! neighbouring coefficients: `r, R` for `D_{n-2}, D_n`, or `t, T` for
//! `C_{n-2}, C_n` (the two are related by `t = 1 + 1/r`, `T = 1 + 1/R`).

mod witness;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::natural_extension::{m_tong, CurveConfig};

pub use witness::{witness, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("the {kind} region is empty in the rectangle a = {a}, b = {b} (r = {r}, R = {big_r})")]
    EmptyRegion {
        kind: BoundKind,
        a: u64,
        b: u64,
        r: f64,
        big_r: f64,
    },
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("could not reach relative accuracy {eps} for a = {a}, b = {b}")]
    UnreachableEps { eps: f64, a: u64, b: u64 },
}

/// Position of the two boundary curves relative to the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseLabel {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    II,
    #[serde(rename = "iii")]
    III,
    #[serde(rename = "iv")]
    IV,
    #[serde(rename = "v")]
    V,
    #[serde(rename = "vi_a")]
    ViA,
    #[serde(rename = "vi_b")]
    ViB,
    #[serde(rename = "vi_c")]
    ViC,
    #[serde(rename = "vi_d")]
    ViD,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 9] = [
        CaseLabel::I,
        CaseLabel::II,
        CaseLabel::III,
        CaseLabel::IV,
        CaseLabel::V,
        CaseLabel::ViA,
        CaseLabel::ViB,
        CaseLabel::ViC,
        CaseLabel::ViD,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::I => "i",
            CaseLabel::II => "ii",
            CaseLabel::III => "iii",
            CaseLabel::IV => "iv",
            CaseLabel::V => "v",
            CaseLabel::ViA => "vi_a",
            CaseLabel::ViB => "vi_b",
            CaseLabel::ViC => "vi_c",
            CaseLabel::ViD => "vi_d",
        }
    }

    /// True for the four configurations where the curves cross inside the
    /// rectangle.
    pub fn is_crossing(self) -> bool {
        matches!(
            self,
            CaseLabel::ViA | CaseLabel::ViB | CaseLabel::ViC | CaseLabel::ViD
        )
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CaseLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        CaseLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown case label {s:?}"))
    }
}

/// Classifies the configuration of `f_{a,r}` and `g_{b,R}` on `Δ_{a,b}`.
///
/// The "both curves miss the rectangle" configuration (v) is tested first:
/// its defining inequalities can coincide with those of (i) or (iii) when a
/// curve passes exactly through a corner, and (v) is the one whose measure
/// formula is right there.
pub fn classify(a: u64, b: u64, r: f64, big_r: f64) -> CaseLabel {
    let c = CurveConfig::new(a, b, r, big_r);
    let (af, bf) = (a as f64, b as f64);
    let f_drop = c.f_bottom();
    let g_left = c.g_left();
    if c.f_left < 1.0 / (af + 1.0) && c.g_bottom < 1.0 / (bf + 1.0) {
        return CaseLabel::V;
    }
    if f_drop >= c.g_bottom && g_left < c.f_left {
        return if f_drop > 1.0 / bf {
            CaseLabel::I
        } else {
            CaseLabel::II
        };
    }
    if f_drop < c.g_bottom && g_left >= c.f_left {
        return if g_left > 1.0 / af {
            CaseLabel::III
        } else {
            CaseLabel::IV
        };
    }
    match (f_drop >= 1.0 / bf, g_left >= 1.0 / af) {
        (true, true) => CaseLabel::ViA,
        (true, false) => CaseLabel::ViB,
        (false, true) => CaseLabel::ViC,
        (false, false) => CaseLabel::ViD,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    #[serde(rename = "lower_d")]
    LowerD,
    #[serde(rename = "upper_d")]
    UpperD,
    #[serde(rename = "lower_c")]
    LowerC,
    #[serde(rename = "upper_c")]
    UpperC,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::LowerD => "lower_d",
            BoundKind::UpperD => "upper_d",
            BoundKind::LowerC => "lower_c",
            BoundKind::UpperC => "upper_c",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "lower_d" => Ok(BoundKind::LowerD),
            "upper_d" => Ok(BoundKind::UpperD),
            "lower_c" => Ok(BoundKind::LowerC),
            "upper_c" => Ok(BoundKind::UpperC),
            _ => Err(format!("unknown bound kind {s:?}")),
        }
    }
}

/// Which side of both thresholds the neighbouring coefficients lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `D_{n-2} < r` and `D_n < R`; bounded by [`lower_bound_d`].
    Below,
    /// `D_{n-2} > r` and `D_n > R`; bounded by [`upper_bound_d`].
    Above,
}

impl std::str::FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "below" => Ok(Direction::Below),
            "above" => Ok(Direction::Above),
            _ => Err(format!("unknown direction {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub a: u64,
    pub b: u64,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub kind: BoundKind,
    #[serde(rename = "case")]
    pub theorem_case: u8,
    #[serde(rename = "label")]
    pub case_label: CaseLabel,
    pub value: f64,
    /// `M_Tong` for D-bounds, Tong's `K` for C-bounds.
    pub tong_value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none", default)]
    pub big_t: Option<f64>,
}

fn check_d_params(a: u64, b: u64, r: f64, big_r: f64) -> Result<(), BoundError> {
    if a == 0 || b == 0 {
        return Err(BoundError::Domain(format!(
            "digits must be positive (a = {a}, b = {b})"
        )));
    }
    if !(r > 1.0 && r.is_finite()) || !(big_r > 1.0 && big_r.is_finite()) {
        return Err(BoundError::Domain(format!(
            "thresholds must be finite and > 1 (r = {r}, R = {big_r})"
        )));
    }
    Ok(())
}

fn check_c_params(a: u64, b: u64, t: f64, big_t: f64) -> Result<(), BoundError> {
    if a == 0 || b == 0 {
        return Err(BoundError::Domain(format!(
            "digits must be positive (a = {a}, b = {b})"
        )));
    }
    if !(t > 1.0 && t < 2.0) || !(big_t > 1.0 && big_t < 2.0) {
        return Err(BoundError::Domain(format!(
            "t and T must lie in (1, 2) (t = {t}, T = {big_t})"
        )));
    }
    Ok(())
}

/// True when some point of `Δ_{a,b}` has `D_{n-2} < r` and `D_n < R`.
///
/// Both curves decrease in `t`, so the region is nonempty iff both lie above
/// the bottom edge at the left edge of the rectangle.
pub fn below_region_nonempty(a: u64, b: u64, r: f64, big_r: f64) -> bool {
    let c = CurveConfig::new(a, b, r, big_r);
    let bottom = 1.0 / (a as f64 + 1.0);
    c.f_left > bottom && c.g_left() > bottom
}

/// Sharp lower bound for `D_{n-1}` given `D_{n-2} < r` and `D_n < R`.
pub fn lower_bound_d(a: u64, b: u64, r: f64, big_r: f64) -> Result<BoundResult, BoundError> {
    check_d_params(a, b, r, big_r)?;
    if !below_region_nonempty(a, b, r, big_r) {
        return Err(BoundError::EmptyRegion {
            kind: BoundKind::LowerD,
            a,
            b,
            r,
            big_r,
        });
    }
    let c = CurveConfig::new(a, b, r, big_r);
    let (af, bf) = (a as f64, b as f64);
    let (f_drop, g_left) = (c.f_bottom(), c.g_left());
    let (theorem_case, value) = if f_drop >= c.g_bottom && g_left < c.f_left {
        (1, (bf + 1.0) / g_left)
    } else if f_drop < c.g_bottom && g_left >= c.f_left {
        (2, (af + 1.0) / f_drop)
    } else {
        (3, c.m_tong)
    };
    Ok(BoundResult {
        a,
        b,
        r,
        big_r,
        kind: BoundKind::LowerD,
        theorem_case,
        case_label: classify(a, b, r, big_r),
        value,
        tong_value: m_tong(a, b, r, big_r),
        t: None,
        big_t: None,
    })
}

/// Sharp upper bound for `D_{n-1}` given `D_{n-2} > r` and `D_n > R`.
///
/// The region is never empty (it contains a neighbourhood of the corner
/// `(1/b, 1/a)`). The corner case is tested first since its condition can
/// overlap those of the two curve-endpoint cases.
pub fn upper_bound_d(a: u64, b: u64, r: f64, big_r: f64) -> Result<BoundResult, BoundError> {
    check_d_params(a, b, r, big_r)?;
    let c = CurveConfig::new(a, b, r, big_r);
    let (af, bf) = (a as f64, b as f64);
    let (f_drop, g_left) = (c.f_bottom(), c.g_left());
    let (theorem_case, value) = if f_drop < 1.0 / (bf + 1.0) && g_left < 1.0 / (af + 1.0) {
        (3, (af + 1.0) * (bf + 1.0))
    } else if f_drop >= c.g_bottom && g_left < c.f_left {
        (1, (bf + 1.0) / c.f_left)
    } else if f_drop < c.g_bottom && g_left >= c.f_left {
        (2, (af + 1.0) / c.g_bottom)
    } else {
        (4, c.m_tong)
    };
    Ok(BoundResult {
        a,
        b,
        r,
        big_r,
        kind: BoundKind::UpperD,
        theorem_case,
        case_label: classify(a, b, r, big_r),
        value,
        tong_value: m_tong(a, b, r, big_r),
        t: None,
        big_t: None,
    })
}

/// Dispatch on direction: the lower bound for `Below`, the upper for `Above`.
pub fn bound_d(direction: Direction, a: u64, b: u64, r: f64, big_r: f64) -> Result<BoundResult, BoundError> {
    match direction {
        Direction::Below => lower_bound_d(a, b, r, big_r),
        Direction::Above => upper_bound_d(a, b, r, big_r),
    }
}

/// Curve quantities in the `(t, T)` parametrization of the C-bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CIntermediates {
    #[serde(rename = "F_prime")]
    pub f_prime: f64,
    #[serde(rename = "G_prime")]
    pub g_prime: f64,
    #[serde(rename = "L_prime")]
    pub l_prime: f64,
}

pub fn c_intermediates(a: u64, b: u64, t: f64, big_t: f64) -> CIntermediates {
    let (af, bf) = (a as f64, b as f64);
    CIntermediates {
        f_prime: (bf + 1.0) / ((af * bf + af + 1.0) * t - 1.0),
        g_prime: (af + 1.0) / ((af * bf + bf + 1.0) * big_t - 1.0),
        l_prime: t + big_t + af * bf * t * big_t - 2.0,
    }
}

/// `1 + (L' - sqrt(L'^2 - 4(t-1)(T-1))) / (2(t-1)(T-1))`, rewritten without
/// the cancelling difference.
fn c_crossing_value(l_prime: f64, t: f64, big_t: f64) -> f64 {
    let p = (t - 1.0) * (big_t - 1.0);
    let disc = (l_prime * l_prime - 4.0 * p).max(0.0);
    1.0 + 2.0 / (l_prime + disc.sqrt())
}

fn c_result(kind: BoundKind, a: u64, b: u64, t: f64, big_t: f64, theorem_case: u8, value: f64) -> BoundResult {
    let (r, big_r) = (1.0 / (t - 1.0), 1.0 / (big_t - 1.0));
    BoundResult {
        a,
        b,
        r,
        big_r,
        kind,
        theorem_case,
        case_label: classify(a, b, r, big_r),
        value,
        tong_value: tong_k(a, b, t, big_t),
        t: Some(t),
        big_t: Some(big_t),
    }
}

/// Sharp upper bound for `C_{n-1}` given `C_{n-2} > t` and `C_n > T`.
pub fn upper_bound_c(a: u64, b: u64, t: f64, big_t: f64) -> Result<BoundResult, BoundError> {
    check_c_params(a, b, t, big_t)?;
    let k = c_intermediates(a, b, t, big_t);
    let (af, bf) = (a as f64, b as f64);
    let x1 = 1.0 / (t - 1.0) - af;
    let x2 = 1.0 / (big_t - 1.0) - bf;
    let (case, value) = if x1 >= k.g_prime && x2 < k.f_prime {
        (1, big_t / ((bf + 1.0) * (big_t - 1.0)))
    } else if x1 < k.g_prime && x2 >= k.f_prime {
        (2, t / ((af + 1.0) * (t - 1.0)))
    } else {
        (3, c_crossing_value(k.l_prime, t, big_t))
    };
    Ok(c_result(BoundKind::UpperC, a, b, t, big_t, case, value))
}

/// Sharp lower bound for `C_{n-1}` given `C_{n-2} < t` and `C_n < T`.
///
/// The second case is the mirror image of the first under swapping the
/// roles of the two curves; the corner case is tested first as in
/// [`upper_bound_d`].
pub fn lower_bound_c(a: u64, b: u64, t: f64, big_t: f64) -> Result<BoundResult, BoundError> {
    check_c_params(a, b, t, big_t)?;
    let k = c_intermediates(a, b, t, big_t);
    let (af, bf) = (a as f64, b as f64);
    let x1 = 1.0 / (t - 1.0) - af;
    let x2 = 1.0 / (big_t - 1.0) - bf;
    let (case, value) = if x1 < 1.0 / (bf + 1.0) && x2 < 1.0 / (af + 1.0) {
        (3, 1.0 + 1.0 / ((af + 1.0) * (bf + 1.0)))
    } else if x1 >= k.g_prime && x2 < k.f_prime {
        (1, 1.0 + k.f_prime / (bf + 1.0))
    } else if x1 < k.g_prime && x2 >= k.f_prime {
        (2, 1.0 + k.g_prime / (af + 1.0))
    } else {
        (4, c_crossing_value(k.l_prime, t, big_t))
    };
    Ok(c_result(BoundKind::LowerC, a, b, t, big_t, case, value))
}

/// Tong's value `K` for the C-bound, evaluated as he stated it. It is not a
/// valid bound: it can exceed 2 while every `C_n` lies in `(1, 2)`.
pub fn tong_k(a: u64, b: u64, t: f64, big_t: f64) -> f64 {
    let (s, u) = (1.0 / (t - 1.0), 1.0 / (big_t - 1.0));
    let x = s + u + (a * b) as f64 * t * big_t;
    0.5 * (x + (x * x - 4.0 * s * u).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    const R0: (f64, f64) = (2.9, 3.6);

    #[test]
    fn classify_examples() {
        assert_eq!(classify(1, 1, R0.0, R0.1), CaseLabel::ViA);
        assert_eq!(classify(2, 1, R0.0, R0.1), CaseLabel::ViC);
        assert_eq!(classify(17, 29, R0.0, R0.1), CaseLabel::V);
        assert_eq!(classify(1, 3, R0.0, R0.1), CaseLabel::I);
        assert_eq!(classify(3, 1, R0.0, R0.1), CaseLabel::III);
        assert_eq!(classify(3, 4, R0.0, R0.1), CaseLabel::V);
    }

    #[test]
    fn label_text_round_trip() {
        for l in CaseLabel::ALL {
            assert_eq!(l.as_str().parse::<CaseLabel>().unwrap(), l);
            let json = serde_json::to_string(&l).unwrap();
            assert_eq!(json, format!("\"{}\"", l.as_str()));
        }
    }

    #[test]
    fn lower_bound_examples() {
        let r = lower_bound_d(1, 1, R0.0, R0.1).unwrap();
        assert_eq!(r.theorem_case, 3);
        assert!((r.value - 2.30).abs() < 0.005);
        let r = lower_bound_d(1, 3, R0.0, R0.1).unwrap();
        assert_eq!(r.theorem_case, 1);
        assert!((r.value - 4.0 / 0.6).abs() < 1e-12);
        assert!((r.tong_value - 5.76).abs() < 0.005);
        let r = lower_bound_d(2, 3, R0.0, R0.1).unwrap();
        assert_eq!(r.theorem_case, 3);
        assert!((r.value - 10.92).abs() < 0.005);
    }

    #[test]
    fn lower_bound_empty_region() {
        let e = lower_bound_d(17, 29, R0.0, R0.1).unwrap_err();
        assert!(matches!(e, BoundError::EmptyRegion { .. }));
    }

    #[test]
    fn upper_bound_examples() {
        let r = upper_bound_d(1, 3, R0.0, R0.1).unwrap();
        assert!((r.value - 5.72).abs() < 0.005);
        assert!((r.tong_value - 5.76).abs() < 0.005);
        let r = upper_bound_d(17, 29, R0.0, R0.1).unwrap();
        assert_eq!(r.theorem_case, 3);
        assert_eq!(r.value, 540.0);
        assert!((r.tong_value - 847.79).abs() < 0.005);
        let r = upper_bound_d(2, 2, R0.0, R0.1).unwrap();
        assert_eq!(r.theorem_case, 4);
        assert_eq!(r.value, r.tong_value);
        assert!((r.value - 7.48).abs() < 0.005);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(lower_bound_d(0, 1, 2.0, 2.0), Err(BoundError::Domain(_))));
        assert!(matches!(upper_bound_d(1, 1, 1.0, 2.0), Err(BoundError::Domain(_))));
        assert!(matches!(upper_bound_c(1, 1, 2.0, 1.5), Err(BoundError::Domain(_))));
        assert!(matches!(lower_bound_c(1, 1, 1.5, 1.0), Err(BoundError::Domain(_))));
    }

    #[test]
    fn c_bound_example() {
        let k = c_intermediates(1, 1, 1.1, 1.4);
        assert!((k.f_prime - 0.870).abs() < 5e-4);
        assert!((k.g_prime - 0.625).abs() < 5e-4);
        assert!((k.l_prime - 2.04).abs() < 5e-4);
        let u = upper_bound_c(1, 1, 1.1, 1.4).unwrap();
        assert_eq!(u.theorem_case, 3);
        assert!(u.value < 1.5 && (u.value - 1.50).abs() < 0.005);
        assert!(tong_k(1, 1, 1.1, 1.4) > 11.94);
    }

    #[test]
    fn c_bounds_near_range_ends() {
        let u = upper_bound_c(1, 3, 1.0 + 1.0 / 2.9, 1.0 + 1.0 / 3.6).unwrap();
        assert_eq!(u.theorem_case, 1);
        assert!((u.value - (1.0 + 0.6 / 4.0)).abs() < 1e-12);
        for b in [1, 5, 40] {
            let u = upper_bound_c(1, b, 1.5, 1.999).unwrap();
            assert!(u.value < 2.0);
        }
        let l = lower_bound_c(17, 29, 1.0 + 1.0 / 2.9, 1.0 + 1.0 / 3.6).unwrap();
        assert_eq!(l.theorem_case, 3);
        assert!((l.value - (1.0 + 1.0 / 540.0)).abs() < 1e-12);
        let l = lower_bound_c(1, 1, 1.9, 1.9).unwrap();
        assert_eq!(l.theorem_case, 3);
        assert_eq!(l.value, 1.25);
    }

    #[test]
    fn c_bounds_match_d_transform() {
        let ts = [1.05, 1.2, 1.4, 1.6, 1.9];
        for a in 1..=5 {
            for b in 1..=5 {
                for &t in &ts {
                    for &big_t in &ts {
                        let (r, big_r) = (1.0 / (t - 1.0), 1.0 / (big_t - 1.0));
                        let up = upper_bound_d(a, b, r, big_r).unwrap();
                        let lc = lower_bound_c(a, b, t, big_t).unwrap();
                        assert!((lc.value - (1.0 + 1.0 / up.value)).abs() < 1e-9);
                        assert_eq!(lc.theorem_case, up.theorem_case);
                        if let Ok(lo) = lower_bound_d(a, b, r, big_r) {
                            let uc = upper_bound_c(a, b, t, big_t).unwrap();
                            assert!((uc.value - (1.0 + 1.0 / lo.value)).abs() < 1e-9);
                            assert_eq!(uc.theorem_case, lo.theorem_case);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tong_k_is_symmetric() {
        for (a, b, t, big_t) in [(1, 2, 1.1, 1.4), (3, 7, 1.3, 1.8), (5, 1, 1.01, 1.99)] {
            let (k1, k2) = (tong_k(a, b, t, big_t), tong_k(b, a, big_t, t));
            assert!((k1 - k2).abs() < 1e-13 * k1);
        }
    }

    #[test]
    fn json_shape() {
        let r = upper_bound_d(1, 3, R0.0, R0.1).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["a", "b", "r", "R", "kind", "case", "label", "value", "tong_value"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v.get("t").is_none());
        assert_eq!(v["kind"], "upper_d");
        let back: BoundResult = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
