//! Summation over all rectangles `Δ_{a,b}`.
//!
//! The strips `a = ⌊r⌋` and `b = ⌊R⌋` cut `Ω` into nine blocks. Rectangles
//! with `a ≤ ⌊r⌋` and `b ≤ ⌊R⌋` are summed one by one; the rest form
//! infinite families whose union is a plain region:
//!
//! - row tail `a, b > ⌊R⌋`: `g` lies left of every rectangle, so only `f`
//!   matters on `t ∈ [0, 1/(⌊R⌋+1)]`;
//! - column tail `b, a > ⌊r⌋`: `f` lies below, only `g` matters on
//!   `v ∈ [0, 1/(⌊r⌋+1)]`;
//! - corner `a > ⌊r⌋, b > ⌊R⌋`: both coefficients exceed their thresholds.
//!
//! Each family is evaluated either by the telescoped closed form or by
//! quadrature over the union region.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{
    check_thresholds, event_scaled_closed, Event, FrequencyError, Method, Region, RegionMeasure, QUAD_TOL,
};
use crate::bounds::{classify, upper_bound_d, CaseLabel};
use crate::natural_extension::Rectangle;

/// Inclusive digit range; `hi = None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DigitRange {
    pub lo: u64,
    pub hi: Option<u64>,
}

impl DigitRange {
    pub fn single(d: u64) -> Self {
        DigitRange { lo: d, hi: Some(d) }
    }

    pub fn from(lo: u64) -> Self {
        DigitRange { lo, hi: None }
    }

    pub fn is_single(&self) -> bool {
        self.hi == Some(self.lo)
    }
}

impl fmt::Display for DigitRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(hi) if hi == self.lo => write!(f, "{}", self.lo),
            Some(hi) => write!(f, "{}..{}", self.lo, hi),
            None => write!(f, ">{}", self.lo - 1),
        }
    }
}

impl FromStr for DigitRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad digit range {s:?}");
        if let Some(rest) = s.strip_prefix('>') {
            let n: u64 = rest.trim().parse().map_err(|_| bad())?;
            return Ok(DigitRange::from(n + 1));
        }
        if let Some((lo, hi)) = s.split_once("..") {
            let lo = lo.trim().parse().map_err(|_| bad())?;
            let hi = hi.trim().parse().map_err(|_| bad())?;
            return Ok(DigitRange { lo, hi: Some(hi) });
        }
        s.trim().parse().map(DigitRange::single).map_err(|_| bad())
    }
}

impl Serialize for DigitRange {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DigitRange {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// One of the pieces the sum over rectangles is split into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Cell { a: u64, b: u64 },
    /// All `Δ_{a,b}` with `b > ⌊R⌋`.
    RowTail { a: u64 },
    /// All `Δ_{a,b}` with `a > ⌊r⌋`.
    ColumnTail { b: u64 },
    /// All `Δ_{a,b}` with `a > ⌊r⌋` and `b > ⌊R⌋`.
    Corner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    Telescoping,
    Quadrature,
}

fn floors(r: f64, big_r: f64) -> (u64, u64) {
    (r.floor() as u64, big_r.floor() as u64)
}

/// `∫_0^T ∫_{max(f_{a,r}, 1/(a+1))}^{1/a} (1+tv)^{-2} dv dt`, summed in closed
/// form: above `f` the inner integral is `1/((r+1)(a+t))`, below the
/// point where `f` leaves the strip it is the full strip.
fn above_curve_strip(a: f64, r: f64, width: f64) -> f64 {
    let u = (r - a).clamp(0.0, width);
    (u / a).ln_1p() / (r + 1.0) + (1.0 / (a + u)).ln_1p() - (1.0 / (a + width)).ln_1p()
}

/// `∫_0^T ∫_{1/(a+1)}^{1/a} (1+tv)^{-2} dv dt`.
fn full_strip(a: f64, width: f64) -> f64 {
    (1.0 / a).ln_1p() - (1.0 / (a + width)).ln_1p()
}

impl Block {
    fn region(self, r: f64, big_r: f64) -> Region {
        let (a0, b0) = floors(r, big_r);
        let t_width = 1.0 / (b0 as f64 + 1.0);
        let v_width = 1.0 / (a0 as f64 + 1.0);
        match self {
            Block::Cell { a, b } => Region::cell(a, b, r, big_r),
            Block::RowTail { a } => Region {
                t: (0.0, t_width),
                v: Rectangle::new(a, 1).v_range(),
                f_digit: Some(a),
                g_digit: None,
                r,
                big_r,
            },
            Block::ColumnTail { b } => Region {
                t: Rectangle::new(1, b).t_range(),
                v: (0.0, v_width),
                f_digit: None,
                g_digit: Some(b),
                r,
                big_r,
            },
            Block::Corner => Region {
                t: (0.0, t_width),
                v: (0.0, v_width),
                f_digit: None,
                g_digit: None,
                r,
                big_r,
            },
        }
    }

    /// Scaled measure of the event on this block. Single cells always use
    /// the closed forms; `tails` selects the route for the infinite families.
    pub fn scaled(self, r: f64, big_r: f64, event: Event, tails: TailMethod) -> f64 {
        if let Block::Cell { a, b } = self {
            return event_scaled_closed(a, b, r, big_r, event);
        }
        if tails == TailMethod::Quadrature {
            return self.region(r, big_r).scaled_quadrature(event, QUAD_TOL);
        }
        let (a0, b0) = floors(r, big_r);
        let t_width = 1.0 / (b0 as f64 + 1.0);
        let v_width = 1.0 / (a0 as f64 + 1.0);
        let (f_above, g_above) = event.sides();
        match self {
            Block::Cell { .. } => unreachable!(),
            Block::RowTail { a } => {
                let a = a as f64;
                let above = above_curve_strip(a, r, t_width);
                match (f_above, g_above) {
                    (true, true) => above,
                    (false, true) => full_strip(a, t_width) - above,
                    _ => 0.0,
                }
            }
            // mirror image of the row tail under (t, v) -> (v, t)
            Block::ColumnTail { b } => {
                let b = b as f64;
                let above = above_curve_strip(b, big_r, v_width);
                match (f_above, g_above) {
                    (true, true) => above,
                    (true, false) => full_strip(b, v_width) - above,
                    _ => 0.0,
                }
            }
            Block::Corner => {
                if f_above && g_above {
                    (t_width * v_width).ln_1p()
                } else {
                    0.0
                }
            }
        }
    }

    fn ranges(self, r: f64, big_r: f64) -> (DigitRange, DigitRange) {
        let (a0, b0) = floors(r, big_r);
        match self {
            Block::Cell { a, b } => (DigitRange::single(a), DigitRange::single(b)),
            Block::RowTail { a } => (DigitRange::single(a), DigitRange::from(b0 + 1)),
            Block::ColumnTail { b } => (DigitRange::from(a0 + 1), DigitRange::single(b)),
            Block::Corner => (DigitRange::from(a0 + 1), DigitRange::from(b0 + 1)),
        }
    }

    /// The configuration shared by every rectangle of the block, if any.
    fn uniform_label(self, r: f64, big_r: f64) -> Option<CaseLabel> {
        let (a0, b0) = floors(r, big_r);
        match self {
            Block::Cell { a, b } => Some(classify(a, b, r, big_r)),
            Block::RowTail { a } => {
                let drop = r - a as f64;
                if drop > 1.0 / (b0 as f64 + 1.0) {
                    Some(CaseLabel::I)
                } else if drop <= 0.0 {
                    Some(CaseLabel::V)
                } else {
                    None
                }
            }
            Block::ColumnTail { b } => {
                let left = big_r - b as f64;
                if left > 1.0 / (a0 as f64 + 1.0) {
                    Some(CaseLabel::III)
                } else if left <= 0.0 {
                    Some(CaseLabel::V)
                } else {
                    None
                }
            }
            Block::Corner => Some(CaseLabel::V),
        }
    }
}

/// Every block of the decomposition, cells first in `(a, b)` order.
pub fn blocks(r: f64, big_r: f64) -> Vec<Block> {
    let (a0, b0) = floors(r, big_r);
    let mut out = Vec::new();
    for a in 1..=a0 {
        for b in 1..=b0 {
            out.push(Block::Cell { a, b });
        }
    }
    out.extend((1..=a0).map(|a| Block::RowTail { a }));
    out.extend((1..=b0).map(|b| Block::ColumnTail { b }));
    out.push(Block::Corner);
    out
}

/// A row of the frequency table: one rectangle or a union of rectangles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellGroup {
    pub a: DigitRange,
    pub b: DigitRange,
    /// Present when all rectangles of the group share one configuration.
    pub case_label: Option<CaseLabel>,
    pub measure: RegionMeasure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub event: Event,
    pub method: Method,
    pub per_cell: Vec<CellGroup>,
    /// Sum of the group values.
    pub total: f64,
    pub total_scaled: f64,
    /// For the "both greater" event: the share of `total` carried by
    /// rectangles whose sharp upper bound is Tong's value.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub conditional_mtong: Option<f64>,
}

struct Piece {
    block: Block,
    a: DigitRange,
    b: DigitRange,
    label: Option<CaseLabel>,
    scaled: f64,
    method: Method,
}

/// Total frequency of an event with closed forms and telescoped tails. The
/// rectangle `Δ_{⌊r⌋,⌊R⌋}` is always integrated numerically.
pub fn total_frequency(r: f64, big_r: f64, event: Event) -> Result<FrequencyReport, FrequencyError> {
    total_frequency_with(r, big_r, event, Method::ClosedForm)
}

/// Like [`total_frequency`]; `Method::Quadrature` integrates every block
/// numerically.
pub fn total_frequency_with(
    r: f64,
    big_r: f64,
    event: Event,
    method: Method,
) -> Result<FrequencyReport, FrequencyError> {
    check_thresholds(r, big_r)?;
    let tails = match method {
        Method::ClosedForm => TailMethod::Telescoping,
        Method::Quadrature => TailMethod::Quadrature,
        Method::MonteCarlo => {
            return Err(FrequencyError::Domain(
                "total_frequency is exact; use monte_carlo_frequency for sampling".into(),
            ))
        }
    };
    let (a0, b0) = floors(r, big_r);
    let pieces: Vec<Piece> = blocks(r, big_r)
        .into_iter()
        .map(|block| {
            let special = block == Block::Cell { a: a0, b: b0 };
            let (scaled, m) = if special || method == Method::Quadrature {
                (block.region(r, big_r).scaled_quadrature(event, QUAD_TOL), Method::Quadrature)
            } else {
                (block.scaled(r, big_r, event, tails), Method::ClosedForm)
            };
            let (a, b) = block.ranges(r, big_r);
            Piece {
                block,
                a,
                b,
                label: block.uniform_label(r, big_r),
                scaled,
                method: m,
            }
        })
        .collect();

    let conditional_scaled: f64 = pieces
        .iter()
        .filter_map(|p| match p.block {
            Block::Cell { a, b } => upper_bound_d(a, b, r, big_r)
                .ok()
                .filter(|u| u.theorem_case == 4)
                .map(|_| p.scaled),
            _ => None,
        })
        .sum();

    let per_cell = group(pieces, a0, b0);
    let total_scaled: f64 = per_cell.iter().map(|g| g.measure.scaled).sum();
    let total: f64 = per_cell.iter().map(|g| g.measure.value).sum();
    let conditional_mtong = (event == Event::BothGreater && total_scaled > 0.0)
        .then(|| conditional_scaled / total_scaled);
    Ok(FrequencyReport {
        r,
        big_r,
        event,
        method,
        per_cell,
        total,
        total_scaled,
        conditional_mtong,
    })
}

/// Merges a boundary cell into the adjacent tail when both share a
/// configuration, e.g. `Δ_{1,⌊R⌋}` into the row tail of `a = 1` when both are
/// (i). The cell `Δ_{⌊r⌋,⌊R⌋}` is never merged.
fn group(pieces: Vec<Piece>, a0: u64, b0: u64) -> Vec<CellGroup> {
    let mut merged_into: Vec<Option<usize>> = vec![None; pieces.len()];
    for (i, p) in pieces.iter().enumerate() {
        let Block::Cell { a, b } = p.block else { continue };
        if (a, b) == (a0, b0) || p.label.is_none() {
            continue;
        }
        let target = if b == b0 {
            Some(Block::RowTail { a })
        } else if a == a0 {
            Some(Block::ColumnTail { b })
        } else {
            None
        };
        if let Some(t) = target {
            if let Some(j) = pieces.iter().position(|q| q.block == t) {
                if pieces[j].label == p.label {
                    merged_into[i] = Some(j);
                }
            }
        }
    }
    let mut groups: Vec<(DigitRange, DigitRange, Option<CaseLabel>, f64, Method, bool)> = pieces
        .iter()
        .map(|p| (p.a, p.b, p.label, p.scaled, p.method, matches!(p.block, Block::Cell { .. })))
        .collect();
    for (i, target) in merged_into.iter().enumerate() {
        if let Some(j) = *target {
            let (a, b, scaled, method) = (groups[i].0, groups[i].1, groups[i].3, groups[i].4);
            let g = &mut groups[j];
            g.0.lo = g.0.lo.min(a.lo);
            g.1.lo = g.1.lo.min(b.lo);
            g.3 += scaled;
            if method == Method::Quadrature {
                g.4 = Method::Quadrature;
            }
        }
    }
    let mut out: Vec<CellGroup> = groups
        .into_iter()
        .enumerate()
        .filter(|(i, _)| merged_into[*i].is_none())
        .map(|(_, (a, b, label, scaled, method, is_cell))| {
            let mut measure = RegionMeasure::from_scaled(scaled, method);
            if is_cell {
                measure.rectangle = Some(Rectangle::new(a.lo, b.lo));
            }
            measure.case_label = label;
            CellGroup {
                a,
                b,
                case_label: label,
                measure,
            }
        })
        .collect();
    out.sort_by_key(|g| (g.a.lo, g.b.lo));
    out
}
