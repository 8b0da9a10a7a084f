//! Asymptotic frequencies of the events `D_{n-2} ≷ r`, `D_n ≷ R`.
//!
//! By ergodicity of the natural extension the frequency of an event equals
//! the measure of the corresponding region of `Ω` under the invariant
//! density. "Scaled" measures are `log 2` times the measure, i.e. integrals
//! of `(1+tv)^{-2}` without the normalizing constant.

mod blocks;
mod monte_carlo;
mod reference;

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{classify, CaseLabel};
use crate::natural_extension::{f_curve, f_inverse, g_inverse, g_unchecked, CurveConfig, Rectangle};
use crate::quadrature::integrate;

pub use blocks::{blocks, total_frequency, total_frequency_with, Block, CellGroup, DigitRange, FrequencyReport, TailMethod};
pub use monte_carlo::{
    monte_carlo_cdf, monte_carlo_cells, monte_carlo_frequency, sample_start, CdfPoint, MonteCarloConfig, DEFAULT_BURN_IN,
};
pub use reference::{
    compare_with_reference, ComparisonRow, Interpretation, ReferenceRow, REFERENCE_CONDITIONAL, REFERENCE_R,
    REFERENCE_ROWS, REFERENCE_TOTAL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrequencyError {
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("case label {given} does not match the configuration, which is {expected}")]
    LabelMismatch { given: CaseLabel, expected: CaseLabel },
    #[error("the conditioning event has zero measure")]
    DivisionByZero,
}

/// Which side of each threshold the two neighbouring coefficients lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    /// `D_{n-2} < r` and `D_n < R`.
    BothLess,
    /// `D_{n-2} > r` and `D_n > R`.
    BothGreater,
    /// `D_{n-2} < r` and `D_n > R`.
    LessGreater,
    /// `D_{n-2} > r` and `D_n < R`.
    GreaterLess,
}

impl Event {
    pub const ALL: [Event; 4] = [Event::BothLess, Event::BothGreater, Event::LessGreater, Event::GreaterLess];

    /// Whether the event wants `D_{n-2} > r` and `D_n > R` respectively.
    fn sides(self) -> (bool, bool) {
        match self {
            Event::BothLess => (false, false),
            Event::BothGreater => (true, true),
            Event::LessGreater => (false, true),
            Event::GreaterLess => (true, false),
        }
    }

    pub fn holds(self, d_before: f64, d_after: f64, r: f64, big_r: f64) -> bool {
        let (first, second) = self.sides();
        (d_before > r) == first && (d_after > big_r) == second
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Event::BothLess => "both_less",
            Event::BothGreater => "both_greater",
            Event::LessGreater => "less_greater",
            Event::GreaterLess => "greater_less",
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Event {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "both_less" | "less" => Ok(Event::BothLess),
            "both_greater" | "greater" => Ok(Event::BothGreater),
            "less_greater" => Ok(Event::LessGreater),
            "greater_less" => Ok(Event::GreaterLess),
            _ => Err(format!("unknown event {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "closed" | "closed_form" => Ok(Method::ClosedForm),
            "quadrature" | "quad" => Ok(Method::Quadrature),
            "mc" | "monte_carlo" => Ok(Method::MonteCarlo),
            _ => Err(format!("unknown method {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMeasure {
    /// Measure under the normalized invariant density.
    pub value: f64,
    /// `value · log 2`.
    pub scaled: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rectangle: Option<Rectangle>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub case_label: Option<CaseLabel>,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stderr: Option<f64>,
}

impl RegionMeasure {
    pub fn from_scaled(scaled: f64, method: Method) -> Self {
        RegionMeasure {
            value: scaled / LN_2,
            scaled,
            rectangle: None,
            case_label: None,
            method,
            stderr: None,
        }
    }

    pub fn from_value(value: f64, method: Method) -> Self {
        RegionMeasure {
            value,
            scaled: value * LN_2,
            rectangle: None,
            case_label: None,
            method,
            stderr: None,
        }
    }

    fn on_cell(mut self, a: u64, b: u64, label: CaseLabel) -> Self {
        self.rectangle = Some(Rectangle::new(a, b));
        self.case_label = Some(label);
        self
    }
}

fn check_thresholds(r: f64, big_r: f64) -> Result<(), FrequencyError> {
    if !(r > 1.0 && r.is_finite() && big_r > 1.0 && big_r.is_finite()) {
        return Err(FrequencyError::Domain(format!(
            "thresholds must be finite and > 1 (r = {r}, R = {big_r})"
        )));
    }
    Ok(())
}

/// `P(D ≤ R)` for the limiting distribution of the coefficients `D_n`.
pub fn dist_h(big_r: f64) -> Result<f64, FrequencyError> {
    if big_r.is_nan() || big_r < 1.0 {
        return Err(FrequencyError::Domain(format!("dist_h needs R >= 1, got {big_r}")));
    }
    if big_r.is_infinite() {
        return Ok(1.0);
    }
    Ok(1.0 - ((1.0 / big_r).ln_1p() + big_r.ln() / (big_r + 1.0)) / LN_2)
}

/// Density of [`dist_h`].
pub fn density_h(x: f64) -> Result<f64, FrequencyError> {
    if x.is_nan() || x < 1.0 {
        return Err(FrequencyError::Domain(format!("density_h needs x >= 1, got {x}")));
    }
    Ok(x.ln() / (LN_2 * (x + 1.0) * (x + 1.0)))
}

// ---------------------------------------------------------------------------
// Closed forms on a single rectangle

/// Scaled measure above both curves on `Δ_{a,b}` for the given configuration.
fn above_both_scaled(label: CaseLabel, c: &CurveConfig) -> f64 {
    let (a, b, r, big_r) = (c.a as f64, c.b as f64, c.r, c.big_r);
    let (s, g1) = (c.s, c.g_top);
    let ab = a * b;
    match label {
        CaseLabel::I => (1.0 / ((ab + a + 1.0) * b)).ln_1p() / (r + 1.0),
        CaseLabel::II => {
            ((ab + 1.0) * (b + 1.0) * (r + 1.0) / ((ab + b + 1.0) * (ab + a + 1.0))).ln()
                - r / (r + 1.0) * (r * (b + 1.0) / (ab + a + 1.0)).ln()
        }
        CaseLabel::III => (1.0 / ((ab + b + 1.0) * a)).ln_1p() / (big_r + 1.0),
        CaseLabel::IV => {
            ((ab + 1.0) * (a + 1.0) * (big_r + 1.0) / ((ab + a + 1.0) * (ab + b + 1.0))).ln()
                - big_r / (big_r + 1.0) * (big_r * (a + 1.0) / (ab + b + 1.0)).ln()
        }
        CaseLabel::V => (1.0 / ((ab + a + 1.0) * (ab + b + 1.0))).ln_1p(),
        CaseLabel::ViA => {
            (s * (1.0 - b * g1) / (g1 * (1.0 - b * s))).ln() / (big_r + 1.0)
                + ((ab + 1.0) / ((a + s) * b)).ln() / (r + 1.0)
                + (g1 * (s + a) / (s * (g1 + a))).ln()
        }
        CaseLabel::ViB => {
            (s / (1.0 - b * s)).ln() / (big_r + 1.0)
                + ((ab + 1.0) / ((a + s) * b)).ln() / (r + 1.0)
                + ((s + a) / (s * (ab + a + 1.0))).ln()
        }
        CaseLabel::ViC => {
            (s * (1.0 - b * g1) / (g1 * (1.0 - b * s))).ln() / (big_r + 1.0)
                + (r / (a + s)).ln() / (r + 1.0)
                + (g1 * (s + a) * (ab + 1.0) * (r + 1.0) / (s * (g1 + a) * (ab + b + 1.0) * r)).ln()
        }
        CaseLabel::ViD => {
            (s / (1.0 - b * s)).ln() / (big_r + 1.0)
                + (r / (a + s)).ln() / (r + 1.0)
                + ((s + a) * (ab + 1.0) * (r + 1.0) / (s * (ab + a + 1.0) * (ab + b + 1.0) * r)).ln()
        }
    }
}

/// Scaled measure of `{D_{n-2} > r}` on `Δ_{a,b}`: the one-curve versions of
/// the formulas for configurations (i), (ii) and (v).
fn above_f_scaled(c: &CurveConfig) -> f64 {
    let b = c.b as f64;
    let drop = c.f_bottom();
    let label = if drop >= 1.0 / b {
        CaseLabel::I
    } else if drop >= 1.0 / (b + 1.0) {
        CaseLabel::II
    } else {
        CaseLabel::V
    };
    above_both_scaled(label, c)
}

/// Scaled measure of `{D_n > R}` on `Δ_{a,b}`, via (iii), (iv) and (v).
fn above_g_scaled(c: &CurveConfig) -> f64 {
    let a = c.a as f64;
    let left = c.g_left();
    let label = if left >= 1.0 / a {
        CaseLabel::III
    } else if left >= 1.0 / (a + 1.0) {
        CaseLabel::IV
    } else {
        CaseLabel::V
    };
    above_both_scaled(label, c)
}

/// Closed-form scaled measure of an event on `Δ_{a,b}`; the events other
/// than "both greater" follow by inclusion and exclusion.
pub(crate) fn event_scaled_closed(a: u64, b: u64, r: f64, big_r: f64, event: Event) -> f64 {
    let c = CurveConfig::new(a, b, r, big_r);
    let label = classify(a, b, r, big_r);
    let both = above_both_scaled(label, &c);
    let f_only = above_f_scaled(&c);
    let g_only = above_g_scaled(&c);
    let full = Rectangle::new(a, b).scaled_measure();
    let value = match event {
        Event::BothGreater => both,
        Event::GreaterLess => f_only - both,
        Event::LessGreater => g_only - both,
        Event::BothLess => full - f_only - g_only + both,
    };
    value.max(0.0)
}

/// Closed-form measure of `{D_{n-2} > r, D_n > R}` on `Δ_{a,b}`. The caller
/// states the configuration; a wrong one is an error.
pub fn cell_measure(label: CaseLabel, a: u64, b: u64, r: f64, big_r: f64) -> Result<RegionMeasure, FrequencyError> {
    check_thresholds(r, big_r)?;
    if a == 0 || b == 0 {
        return Err(FrequencyError::Domain("digits must be positive".into()));
    }
    let expected = classify(a, b, r, big_r);
    if expected != label {
        return Err(FrequencyError::LabelMismatch { given: label, expected });
    }
    let c = CurveConfig::new(a, b, r, big_r);
    Ok(RegionMeasure::from_scaled(above_both_scaled(label, &c), Method::ClosedForm).on_cell(a, b, label))
}

/// Closed-form measure of any of the four events on `Δ_{a,b}`.
pub fn cell_event_measure(a: u64, b: u64, r: f64, big_r: f64, event: Event) -> Result<RegionMeasure, FrequencyError> {
    check_thresholds(r, big_r)?;
    let label = classify(a, b, r, big_r);
    Ok(RegionMeasure::from_scaled(event_scaled_closed(a, b, r, big_r, event), Method::ClosedForm).on_cell(a, b, label))
}

// ---------------------------------------------------------------------------
// Quadrature

/// Absolute tolerance for one region, in scaled units.
pub const QUAD_TOL: f64 = 1e-10;

/// A region `{(t, v) : t ∈ [t0, t1], v ∈ [v0, v1], event}` on which the
/// constraint from `D_{n-2}` is either the curve `f_{a,r}` or absent, and
/// likewise `g_{b,R}` for `D_n`. An absent curve means the corresponding
/// coefficient exceeds its threshold everywhere in the region.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Region {
    pub t: (f64, f64),
    pub v: (f64, f64),
    pub f_digit: Option<u64>,
    pub g_digit: Option<u64>,
    pub r: f64,
    pub big_r: f64,
}

impl Region {
    fn cell(a: u64, b: u64, r: f64, big_r: f64) -> Self {
        let rect = Rectangle::new(a, b);
        Region {
            t: rect.t_range(),
            v: rect.v_range(),
            f_digit: Some(a),
            g_digit: Some(b),
            r,
            big_r,
        }
    }

    /// The v-interval of the event above `t`, possibly empty.
    fn slice(&self, t: f64, event: Event) -> (f64, f64) {
        let (want_f_above, want_g_above) = event.sides();
        let (mut lo, mut hi) = self.v;
        match self.f_digit {
            Some(a) => {
                let f = f_curve(a, self.r, t);
                if want_f_above {
                    lo = lo.max(f);
                } else {
                    hi = hi.min(f);
                }
            }
            None if !want_f_above => return (0.0, 0.0),
            None => {}
        }
        match self.g_digit {
            Some(b) => {
                let g = g_unchecked(b, self.big_r, t);
                if want_g_above {
                    lo = lo.max(g);
                } else {
                    hi = hi.min(g);
                }
            }
            None if !want_g_above => return (0.0, 0.0),
            None => {}
        }
        (lo, hi)
    }

    /// Points where a curve crosses a horizontal edge, or the curves cross.
    fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        if let Some(a) = self.f_digit {
            out.push(f_inverse(a, self.r, self.v.0));
            out.push(f_inverse(a, self.r, self.v.1));
        }
        if let Some(b) = self.g_digit {
            out.push(g_inverse(b, self.big_r, self.v.0));
            out.push(g_inverse(b, self.big_r, self.v.1));
        }
        if let (Some(a), Some(b)) = (self.f_digit, self.g_digit) {
            out.push(CurveConfig::new(a, b, self.r, self.big_r).s);
        }
        out
    }

    /// Two-level adaptive integral of `(1+tv)^{-2}` over the event.
    pub fn scaled_quadrature(&self, event: Event, tol: f64) -> f64 {
        let inner = |t: f64| {
            let (lo, hi) = self.slice(t, event);
            if hi > lo {
                integrate(|v| (1.0 + t * v).powi(-2), lo, hi, &[], 1e-15).value
            } else {
                0.0
            }
        };
        integrate(inner, self.t.0, self.t.1, &self.breakpoints(), tol).value
    }
}

/// Measure of an event on `Δ_{a,b}` by adaptive quadrature of the density
/// over the part of the rectangle cut out by the curves.
pub fn quadrature_measure(a: u64, b: u64, r: f64, big_r: f64, event: Event) -> Result<RegionMeasure, FrequencyError> {
    check_thresholds(r, big_r)?;
    if a == 0 || b == 0 {
        return Err(FrequencyError::Domain("digits must be positive".into()));
    }
    let scaled = Region::cell(a, b, r, big_r).scaled_quadrature(event, QUAD_TOL);
    Ok(RegionMeasure::from_scaled(scaled, Method::Quadrature).on_cell(a, b, classify(a, b, r, big_r)))
}

/// Share of the "both greater" frequency carried by rectangles where the
/// sharp upper bound is Tong's value.
pub fn conditional_mtong(r: f64, big_r: f64) -> Result<f64, FrequencyError> {
    let report = total_frequency(r, big_r, Event::BothGreater)?;
    report.conditional_mtong.ok_or(FrequencyError::DivisionByZero)
}
