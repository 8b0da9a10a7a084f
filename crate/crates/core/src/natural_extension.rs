//! Geometry of the natural extension `Ω = [0,1) × [0,1]` of the Gauss map.
//!
//! A point `(t, v)` is a future/past pair. On the rectangle `Δ_{a,b}` (where
//! `a_n = a`, `a_{n+1} = b`) the events `D_{n-2} < r` and `D_n < R` are the
//! regions below the curves `f_{a,r}` and `g_{b,R}` respectively.
//!
//! Everything involving square roots is evaluated in `f64`; the orbit maps
//! have exact rational versions as well.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("the extension map has no preimage structure at t = 0 (fixed point)")]
    FixedPointAtZero,
    #[error("point ({t}, {v}) lies outside Ω = [0,1) × [0,1]")]
    OutsideOmega { t: String, v: String },
    #[error("g_{{b,R}} is only defined for t > 0, got {0}")]
    NonPositiveT(f64),
}

/// `T(x) = {1/x}`, `T(0) = 0`.
pub fn gauss_map(x: &Rational) -> Rational {
    match x.recip() {
        Some(inv) => inv.fract(),
        None => Rational::zero(),
    }
}

pub fn gauss_map_f64(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        let inv = 1.0 / x;
        inv - inv.floor()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint<S> {
    pub t: S,
    pub v: S,
}

pub type ExactPoint = OrbitPoint<Rational>;
pub type FloatPoint = OrbitPoint<f64>;

impl OrbitPoint<Rational> {
    pub fn new(t: Rational, v: Rational) -> Result<Self, GeometryError> {
        if t.is_negative() || t >= 1 || v.is_negative() || v > 1 {
            return Err(GeometryError::OutsideOmega {
                t: t.to_string(),
                v: v.to_string(),
            });
        }
        Ok(OrbitPoint { t, v })
    }

    /// `(x, 0)` for `x` in `[0, 1)`.
    pub fn start(x: Rational) -> Result<Self, GeometryError> {
        Self::new(x, Rational::zero())
    }

    /// `𝒯(t, v) = ({1/t}, 1/(a_1(t) + v))` with `a_1(t) = floor(1/t)`.
    pub fn ext_map(&self) -> Result<Self, GeometryError> {
        self.ext_map_with_digit().map(|(p, _)| p)
    }

    /// Like [`ext_map`](Self::ext_map), also returning the digit `floor(1/t)`
    /// that was shifted out.
    pub fn ext_map_with_digit(&self) -> Result<(Self, BigUint), GeometryError> {
        if self.t.is_zero() {
            return Err(GeometryError::FixedPointAtZero);
        }
        // t = p/q in lowest terms: 1/t = q/p, and the remainder is coprime
        // to p, so neither new coordinate needs a gcd.
        let (p, q) = (self.t.numer(), self.t.denom());
        let (digit, rem) = q.div_rem(p);
        let t = Rational::from_coprime(rem, p.clone());
        let (s, u) = (self.v.numer(), self.v.denom());
        let v = Rational::from_coprime(u.clone(), &digit * u + s);
        let digit = digit.to_biguint().expect("1/t > 1");
        Ok((OrbitPoint { t, v }, digit))
    }

    pub fn to_float(&self) -> FloatPoint {
        OrbitPoint {
            t: self.t.to_f64(),
            v: self.v.to_f64(),
        }
    }
}

impl OrbitPoint<f64> {
    pub fn new(t: f64, v: f64) -> Result<Self, GeometryError> {
        if !(0.0..1.0).contains(&t) || !(0.0..=1.0).contains(&v) {
            return Err(GeometryError::OutsideOmega {
                t: t.to_string(),
                v: v.to_string(),
            });
        }
        Ok(OrbitPoint { t, v })
    }

    pub fn ext_map(&self) -> Result<Self, GeometryError> {
        if self.t == 0.0 {
            return Err(GeometryError::FixedPointAtZero);
        }
        let inv = 1.0 / self.t;
        let a = inv.floor();
        Ok(OrbitPoint {
            t: inv - a,
            v: 1.0 / (a + self.v),
        })
    }
}

/// One step of the exact orbit `𝒯^n(x, 0)`.
#[derive(Debug, Clone)]
pub struct OrbitStep {
    pub n: usize,
    pub point: ExactPoint,
    /// `a_n`, the digit shifted into the past on the way to this point
    /// (`None` at `n = 0`).
    pub a_n: Option<BigUint>,
}

impl OrbitStep {
    /// `a_{n+1} = floor(1/t_n)`, `None` once the orbit has hit `t = 0`.
    pub fn next_digit(&self) -> Option<BigUint> {
        let t = &self.point.t;
        if t.is_zero() {
            None
        } else {
            (t.denom() / t.numer()).to_biguint()
        }
    }
}

/// Iterator over `(t_n, v_n) = 𝒯^n(x, 0)`; stops after the point with
/// `t_n = 0`.
#[derive(Debug, Clone)]
pub struct ExactOrbit {
    next: Option<OrbitStep>,
}

impl ExactOrbit {
    pub fn new(x: Rational) -> Result<Self, GeometryError> {
        let point = ExactPoint::start(x)?;
        Ok(ExactOrbit {
            next: Some(OrbitStep {
                n: 0,
                point,
                a_n: None,
            }),
        })
    }
}

impl Iterator for ExactOrbit {
    type Item = OrbitStep;

    fn next(&mut self) -> Option<OrbitStep> {
        let current = self.next.take()?;
        if let Ok((point, digit)) = current.point.ext_map_with_digit() {
            self.next = Some(OrbitStep {
                n: current.n + 1,
                point,
                a_n: Some(digit),
            });
        }
        Some(current)
    }
}

/// Invariant density `1 / (log 2 · (1 + t v)^2)`.
pub fn density(t: f64, v: f64) -> f64 {
    let s = 1.0 + t * v;
    1.0 / (LN_2 * s * s)
}

/// `Δ_{a,b} = [1/(b+1), 1/b) × [1/(a+1), 1/a)`, the set of points with
/// `a_n = a` and `a_{n+1} = b`. Half-open so the rectangles partition `Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rectangle {
    pub a: u64,
    pub b: u64,
}

impl Rectangle {
    pub fn new(a: u64, b: u64) -> Self {
        assert!(a >= 1 && b >= 1, "digits are positive");
        Rectangle { a, b }
    }

    pub fn t_range(&self) -> (f64, f64) {
        (1.0 / (self.b as f64 + 1.0), 1.0 / self.b as f64)
    }

    pub fn v_range(&self) -> (f64, f64) {
        (1.0 / (self.a as f64 + 1.0), 1.0 / self.a as f64)
    }

    pub fn contains(&self, t: &Rational, v: &Rational) -> bool {
        let (a, b) = (BigInt::from(self.a), BigInt::from(self.b));
        // 1/(b+1) <= t < 1/b  <=>  b t < 1 <= (b+1) t
        let one = Rational::one();
        let bt = Rational::from(b.clone()) * t;
        let av = Rational::from(a.clone()) * v;
        bt < one && bt + t >= one && av < one && av + v >= one
    }

    /// Rectangle holding `(t, v)`, by `a = floor(1/v)`, `b = floor(1/t)`.
    /// Points with `t = 0` or `v = 0` lie in no rectangle.
    pub fn containing(t: &Rational, v: &Rational) -> Option<Self> {
        use num_traits::ToPrimitive;
        let b = t.recip()?.floor().to_u64()?;
        let a = v.recip()?.floor().to_u64()?;
        Some(Rectangle { a, b })
    }

    /// `∫∫_Δ (1+tv)^{-2}` (log 2 times the ν-measure).
    pub fn scaled_measure(&self) -> f64 {
        let (a, b) = (self.a as f64, self.b as f64);
        (1.0 / ((a * b + a + 1.0) * (a * b + b + 1.0))).ln_1p()
    }
}

/// `f_{a,r}(t) = r / (a (r+1) + t)`; on `Δ_{a,b}`, `D_{n-2} < r` iff `v < f`.
pub fn f_curve(a: u64, r: f64, t: f64) -> f64 {
    r / (a as f64 * (r + 1.0) + t)
}

/// `g_{b,R}(t) = R/t - b (R+1)`; on `Δ_{a,b}`, `D_n < R` iff `v < g`.
pub fn g_curve(b: u64, big_r: f64, t: f64) -> Result<f64, GeometryError> {
    if t <= 0.0 || t.is_nan() {
        return Err(GeometryError::NonPositiveT(t));
    }
    Ok(big_r / t - b as f64 * (big_r + 1.0))
}

pub(crate) fn g_unchecked(b: u64, big_r: f64, t: f64) -> f64 {
    big_r / t - b as f64 * (big_r + 1.0)
}

/// `t` with `f_{a,r}(t) = v`.
pub fn f_inverse(a: u64, r: f64, v: f64) -> f64 {
    r / v - a as f64 * (r + 1.0)
}

/// `t` with `g_{b,R}(t) = v`.
pub fn g_inverse(b: u64, big_r: f64, v: f64) -> f64 {
    big_r / (v + b as f64 * (big_r + 1.0))
}

/// `D_{n-2}` as a function of `(t, v)` on a rectangle with `a_n = a`.
pub fn d_before(a: u64, t: f64, v: f64) -> f64 {
    let a = a as f64;
    (a + t) * v / (1.0 - a * v)
}

/// `D_{n-1} = 1/(t v)`.
pub fn d_middle(t: f64, v: f64) -> f64 {
    1.0 / (t * v)
}

/// `D_n` as a function of `(t, v)` on a rectangle with `a_{n+1} = b`.
pub fn d_after(b: u64, t: f64, v: f64) -> f64 {
    let b = b as f64;
    (b + v) * t / (1.0 - b * t)
}

/// Derived quantities of the two boundary curves on `Δ_{a,b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub a: u64,
    pub b: u64,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    /// `f_{a,r}(1/(b+1))`: where f meets the left edge.
    #[serde(rename = "F")]
    pub f_left: f64,
    /// `g_{b,R}(G) = 1/(a+1)`: where g meets the bottom edge.
    #[serde(rename = "G")]
    pub g_bottom: f64,
    /// `g_{b,R}(G1) = 1/a`: where g meets the top edge.
    #[serde(rename = "G1")]
    pub g_top: f64,
    /// The unique positive `t` with `f_{a,r}(t) = g_{b,R}(t)`.
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "w")]
    pub w: f64,
    /// `a b (r+1) (R+1)`.
    #[serde(rename = "L")]
    pub l: f64,
    /// `D_{n-1}` at the intersection point.
    #[serde(rename = "M_tong")]
    pub m_tong: f64,
}

impl CurveConfig {
    pub fn new(a: u64, b: u64, r: f64, big_r: f64) -> Self {
        let (af, bf) = (a as f64, b as f64);
        let f_left = r * (bf + 1.0) / (af * (bf + 1.0) * (r + 1.0) + 1.0);
        let g_bottom = big_r * (af + 1.0) / ((af + 1.0) * bf * (big_r + 1.0) + 1.0);
        let g_top = big_r * af / (af * bf * (big_r + 1.0) + 1.0);
        // L first, then r - R + L, then the discriminant.
        let l = af * bf * (r + 1.0) * (big_r + 1.0);
        let lin = r - big_r + l;
        let w = (4.0 * l * big_r + lin * lin).sqrt();
        // Positive root of b(R+1) t^2 + (r - R + L) t - a R (r+1) = 0. When
        // the linear coefficient is positive, -lin + w cancels; use the
        // product of the roots instead.
        let s = if lin > 0.0 {
            2.0 * af * big_r * (r + 1.0) / (lin + w)
        } else {
            (w - lin) / (2.0 * bf * (big_r + 1.0))
        };
        let m_tong = m_tong_from(l, w, r, big_r);
        CurveConfig {
            a,
            b,
            r,
            big_r,
            f_left,
            g_bottom,
            g_top,
            s,
            w,
            l,
            m_tong,
        }
    }

    pub fn rectangle(&self) -> Rectangle {
        Rectangle::new(self.a, self.b)
    }

    pub fn f(&self, t: f64) -> f64 {
        f_curve(self.a, self.r, t)
    }

    pub fn g(&self, t: f64) -> f64 {
        g_unchecked(self.b, self.big_r, t)
    }

    /// `r - a`: where f meets the bottom edge `v = 1/(a+1)`.
    pub fn f_bottom(&self) -> f64 {
        self.r - self.a as f64
    }

    /// `R - b`: the value of g on the left edge `t = 1/(b+1)`.
    pub fn g_left(&self) -> f64 {
        self.big_r - self.b as f64
    }

    pub fn intersection(&self) -> (f64, f64) {
        (self.s, self.f(self.s))
    }
}

fn m_tong_from(l: f64, w: f64, r: f64, big_r: f64) -> f64 {
    0.5 * (1.0 / r + 1.0 / big_r + (l + w) / (r * big_r))
}

pub fn curve_config(a: u64, b: u64, r: f64, big_r: f64) -> CurveConfig {
    CurveConfig::new(a, b, r, big_r)
}

/// Tong's bound, evaluated from its closed form.
pub fn m_tong(a: u64, b: u64, r: f64, big_r: f64) -> f64 {
    let x = 1.0 / r + 1.0 / big_r + (a * b) as f64 * (1.0 + 1.0 / r) * (1.0 + 1.0 / big_r);
    0.5 * (x + (x * x - 4.0 / (r * big_r)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p, d)
    }

    #[test]
    fn gauss_map_examples() {
        assert_eq!(gauss_map(&Rational::zero()), Rational::zero());
        assert_eq!(gauss_map(&q(2, 5)), q(1, 2));
        assert_eq!(gauss_map(&q(3, 11)), q(2, 3));
        assert_eq!(gauss_map_f64(0.0), 0.0);
        assert!((gauss_map_f64(0.4) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ext_map_examples() {
        let p = ExactPoint::new(q(2, 5), Rational::zero()).unwrap();
        assert_eq!(p.ext_map().unwrap(), ExactPoint::new(q(1, 2), q(1, 2)).unwrap());
        let p = ExactPoint::new(q(1, 2), Rational::one()).unwrap();
        assert_eq!(p.ext_map().unwrap(), ExactPoint::new(Rational::zero(), q(1, 3)).unwrap());
        let p = ExactPoint::new(Rational::zero(), q(1, 3)).unwrap();
        assert_eq!(p.ext_map().unwrap_err(), GeometryError::FixedPointAtZero);

        let fp = FloatPoint::new(0.4, 0.0).unwrap().ext_map().unwrap();
        assert!((fp.t - 0.5).abs() < 1e-15 && (fp.v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn points_outside_omega_rejected() {
        assert!(ExactPoint::new(Rational::one(), Rational::zero()).is_err());
        assert!(ExactPoint::new(q(1, 2), q(3, 2)).is_err());
        assert!(FloatPoint::new(-0.1, 0.5).is_err());
    }

    #[test]
    fn orbit_matches_future_and_past() {
        use crate::cf::{future_t, past_v, DigitSequence};
        let d = DigitSequence::finite(0, &[2, 1, 3, 1, 2]).unwrap();
        let steps: Vec<OrbitStep> = ExactOrbit::new(d.value()).unwrap().collect();
        assert_eq!(steps.len(), 6);
        assert_eq!(steps[2].point.t, q(3, 11));
        assert_eq!(steps[2].point.v, q(2, 3));
        for s in &steps {
            assert_eq!(s.point.t, future_t(&d, s.n).unwrap());
            assert_eq!(s.point.v, past_v(&d, s.n).unwrap());
            if s.n >= 1 {
                assert_eq!(s.a_n.as_ref(), d.digit(s.n));
            }
            assert_eq!(s.next_digit().as_ref(), d.digit(s.n + 1));
        }
    }

    #[test]
    fn density_corners() {
        assert!((density(0.0, 0.0) - 1.0 / LN_2).abs() < 1e-15);
        assert!((density(1.0, 1.0) - 0.25 / LN_2).abs() < 1e-15);
        assert!((density(0.0, 0.0) - 1.0 / std::f64::consts::LN_2).abs() < 1e-15);
        assert!((density(1.0, 1.0) - 0.3607).abs() < 1e-4);
    }

    #[test]
    fn rectangle_membership_is_half_open() {
        let r = Rectangle::new(1, 2);
        assert!(r.contains(&q(1, 3), &q(1, 2)));
        assert!(!r.contains(&q(1, 2), &q(3, 4)));
        assert!(!r.contains(&q(2, 5), &Rational::one()));
        assert_eq!(Rectangle::containing(&q(2, 5), &q(2, 3)), Some(Rectangle::new(1, 2)));
        assert_eq!(Rectangle::containing(&Rational::zero(), &q(2, 3)), None);
    }

    #[test]
    fn curve_examples() {
        assert!((f_curve(1, 2.9, 0.25) - 2.9 / 4.15).abs() < 1e-15);
        assert!((f_curve(1, 2.9, 0.25) - 0.6988).abs() < 1e-4);
        assert!((f_curve(1, 2.9, 0.5) - 0.6591).abs() < 1e-4);
        let big_r = 3.6;
        let zero_at = big_r / (3.0 * (big_r + 1.0));
        assert!(g_curve(3, big_r, zero_at).unwrap().abs() < 1e-14);
        assert!(g_curve(1, big_r, 0.0).is_err());
        assert!(g_curve(1, big_r, -1.0).is_err());
    }

    #[test]
    fn curve_config_reference_example() {
        let c = curve_config(1, 1, 2.9, 3.6);
        assert!((c.f_left - 0.6591).abs() < 1e-4);
        assert!((c.g_bottom - 0.7059).abs() < 1e-4);
        assert!((g_curve(1, 3.6, c.g_bottom).unwrap() - 0.5).abs() < 1e-12);
        let c = curve_config(1, 3, 2.9, 3.6);
        assert!((c.f_left - 0.6988).abs() < 1e-4);
        assert!((c.g_bottom - 0.2517).abs() < 1e-4);
        assert!((g_curve(3, 3.6, c.g_bottom).unwrap() - 0.5).abs() < 1e-12);
        assert!((c.f_left - f_curve(1, 2.9, 0.25)).abs() < 1e-12);
        assert!((g_curve(3, 3.6, c.g_top).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn intersection_separates_curves() {
        let c = curve_config(2, 3, 2.9, 3.6);
        assert!((c.f(c.s) - c.g(c.s)).abs() < 1e-12);
        for i in 1..=100 {
            let t = 2.0 * c.s * i as f64 / 101.0;
            if (t - c.s).abs() < 1e-9 {
                continue;
            }
            if t < c.s {
                assert!(c.f(t) < c.g(t));
            } else {
                assert!(c.f(t) > c.g(t));
            }
        }
    }

    #[test]
    fn m_tong_examples() {
        assert!((m_tong(1, 1, 2.9, 3.6) - 2.30).abs() < 0.005);
        assert!((m_tong(2, 2, 2.9, 3.6) - 7.48).abs() < 0.005);
        assert!((m_tong(1, 3, 2.9, 3.6) - 5.76).abs() < 0.005);
    }

    #[test]
    fn m_tong_is_d_at_intersection() {
        let grid: Vec<f64> = (1..=10).map(|k| 1.0 + 1.9 * k as f64).collect();
        for a in 1..=10 {
            for b in 1..=10 {
                for &r in &grid {
                    for &big_r in &grid {
                        let c = curve_config(a, b, r, big_r);
                        let m = m_tong(a, b, r, big_r);
                        assert!((m * c.s * c.f(c.s) - 1.0).abs() < 1e-9);
                        assert!((c.m_tong - m).abs() < 1e-9 * m.max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn large_digits_keep_intersection_accurate() {
        let c = curve_config(5000, 7000, 1.3, 1.7);
        assert!(c.s > 0.0);
        // residual of b(R+1) S^2 + (r - R + L) S - a R (r+1) = 0 relative to
        // its constant term; comparing f and g directly cancels badly here
        let (a, b, r, big_r) = (5000.0, 7000.0, 1.3, 1.7);
        let lin = r - big_r + c.l;
        let k = a * big_r * (r + 1.0);
        let rel = (b * (big_r + 1.0) * c.s * c.s + lin * c.s - k).abs() / k;
        assert!(rel < 1e-12, "rel = {rel}");
    }

    #[test]
    fn d_along_curves_is_monotone() {
        let (a, b, r, big_r) = (2, 3, 2.9, 3.6);
        let mut prev_f = f64::INFINITY;
        let mut prev_g = 0.0;
        for i in 0..=1000 {
            let t = 0.01 + 0.2 * i as f64 / 1000.0;
            let on_f = d_middle(t, f_curve(a, r, t));
            assert!(on_f < prev_f);
            assert!((on_f - (a as f64 * (r + 1.0) + t) / (r * t)).abs() < 1e-9 * on_f);
            prev_f = on_f;
            let gv = g_curve(b, big_r, t).unwrap();
            if gv > 0.0 {
                let on_g = d_middle(t, gv);
                assert!(on_g > prev_g);
                assert!((on_g - 1.0 / (big_r - b as f64 * (big_r + 1.0) * t)).abs() < 1e-9 * on_g);
                prev_g = on_g;
            }
        }
    }

    #[test]
    fn curves_characterize_events() {
        let (a, b, r, big_r) = (1, 2, 2.9, 3.6);
        let rect = Rectangle::new(a, b);
        let (t0, t1) = rect.t_range();
        let (v0, v1) = rect.v_range();
        for i in 0..40 {
            for j in 0..40 {
                let t = t0 + (t1 - t0) * (i as f64 + 0.5) / 40.0;
                let v = v0 + (v1 - v0) * (j as f64 + 0.5) / 40.0;
                assert_eq!(d_before(a, t, v) < r, v < f_curve(a, r, t));
                assert_eq!(d_after(b, t, v) < big_r, v < g_curve(b, big_r, t).unwrap());
            }
        }
    }
}
