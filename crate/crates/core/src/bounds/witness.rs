//! Explicit rationals whose `D_{n-1}` comes arbitrarily close to a bound.
//!
//! A target point `(t, v)` is picked inside the admissible region of
//! `Δ_{a,b}`, near the extremal point for the theorem case. Its floating
//! coordinates are exact dyadic rationals, so the digits of `1/t - b` give
//! the future and the digits of `1/v - a` (reversed) give the past. The
//! resulting `x` has `(t_n, v_n)` equal to the target exactly, and every
//! hypothesis is re-checked on the exact digit sequence.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{bound_d, BoundError, BoundResult, Direction};
use crate::cf::{coefficients, d_definitional, expand_exact, DigitSequence, Exactness};
use crate::natural_extension::{d_after, d_before, d_middle, CurveConfig, Rectangle};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub digits: DigitSequence,
    pub n: usize,
    pub x: Rational,
    pub d_prev2: Rational,
    pub d_prev: Rational,
    pub d_next: Rational,
    pub bound: BoundResult,
    /// `|D_{n-1} - bound| / bound`.
    pub relative_gap: f64,
}

const MAX_HALVINGS: usize = 80;

/// Finds `x` and `n` with `a_n = a`, `a_{n+1} = b`, the direction's
/// hypotheses on `D_{n-2}` and `D_n` holding exactly, and `D_{n-1}` within
/// relative `eps` of the bound.
pub fn witness(
    a: u64,
    b: u64,
    r: f64,
    big_r: f64,
    direction: Direction,
    eps: f64,
) -> Result<Witness, BoundError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(BoundError::Domain(format!("eps must be positive, got {eps}")));
    }
    let bound = bound_d(direction, a, b, r, big_r)?;
    let c = CurveConfig::new(a, b, r, big_r);
    let thresholds = (
        Rational::from_f64(r).expect("finite"),
        Rational::from_f64(big_r).expect("finite"),
    );
    let mut tau = 0.25;
    for _ in 0..MAX_HALVINGS {
        if let Some((t, v)) = candidate(&c, direction, bound.theorem_case, tau) {
            let gap = (d_middle(t, v) - bound.value).abs() / bound.value;
            if gap < eps / 2.0 && float_hypotheses(&c, direction, t, v) {
                if let Some(w) = build(&c, direction, &thresholds, &bound, t, v) {
                    if w.relative_gap < eps {
                        return Ok(w);
                    }
                }
            }
        }
        tau *= 0.5;
    }
    Err(BoundError::UnreachableEps { eps, a, b })
}

/// A point at offset `tau` (relative to the rectangle size) from the
/// extremal point of the region.
fn candidate(c: &CurveConfig, direction: Direction, case: u8, tau: f64) -> Option<(f64, f64)> {
    let rect = Rectangle::new(c.a, c.b);
    let (tl, tr) = rect.t_range();
    let (vb, vt) = rect.v_range();
    let (wt, wv) = (tr - tl, vt - vb);
    let t = match (direction, case) {
        (Direction::Below, 1) => tl + tau * wt,
        (Direction::Below, 2) => c.f_bottom() - tau * wt,
        (Direction::Above, 1) | (Direction::Above, 3) => tl + tau * wt,
        (Direction::Above, 2) => c.g_bottom + tau * wt,
        _ => c.s,
    };
    if !(t > tl && t < tr) {
        return None;
    }
    let v = match direction {
        Direction::Below => {
            let m = c.f(t).min(c.g(t)).min(vt);
            m - (tau * wv).min((m - vb) / 2.0)
        }
        Direction::Above => {
            let m = c.f(t).max(c.g(t)).max(vb);
            m + (tau * wv).min((vt - m) / 2.0)
        }
    };
    (v > vb && v < vt).then_some((t, v))
}

fn float_hypotheses(c: &CurveConfig, direction: Direction, t: f64, v: f64) -> bool {
    let before = d_before(c.a, t, v);
    let after = d_after(c.b, t, v);
    match direction {
        Direction::Below => before < c.r && after < c.big_r,
        Direction::Above => before > c.r && after > c.big_r,
    }
}

fn build(
    c: &CurveConfig,
    direction: Direction,
    (r, big_r): &(Rational, Rational),
    bound: &BoundResult,
    t: f64,
    v: f64,
) -> Option<Witness> {
    let t = Rational::from_f64(t)?;
    let v = Rational::from_f64(v)?;
    let (a, b) = (Rational::from(c.a as i64), Rational::from(c.b as i64));
    // both lie in (0, 1) because (t, v) is strictly inside the rectangle
    let future = &t.recip()? - &b;
    let past = &v.recip()? - &a;
    if !(future.is_positive() && future < 1 && past.is_positive() && past < 1) {
        return None;
    }
    let fut = expand_exact(&future);
    let pst = expand_exact(&past);
    let mut digits: Vec<BigUint> = pst.digits().iter().rev().cloned().collect();
    let n = digits.len() + 1;
    digits.push(BigUint::from(c.a));
    digits.push(BigUint::from(c.b));
    digits.extend(fut.digits().iter().cloned());
    let seq = DigitSequence::new(0.into(), digits, Exactness::ExactFinite).ok()?;

    let co = coefficients(&seq, n).ok()?;
    let d_prev2 = co.d_prev2?;
    let d_prev = co.d_prev?;
    let d_next = co.d_next?;
    let holds = match direction {
        Direction::Below => &d_prev2 < r && &d_next < big_r,
        Direction::Above => &d_prev2 > r && &d_next > big_r,
    };
    if !holds || seq.digit_u64(n)? != c.a || seq.digit_u64(n + 1)? != c.b {
        return None;
    }
    // the definitional route must agree with the future/past route
    if d_definitional(&seq, n - 1).ok()? != d_prev {
        return None;
    }
    let relative_gap = (d_prev.to_f64() - bound.value).abs() / bound.value;
    Some(Witness {
        x: seq.value(),
        digits: seq,
        n,
        d_prev2,
        d_prev,
        d_next,
        bound: bound.clone(),
        relative_gap,
    })
}
