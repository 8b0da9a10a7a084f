//! Soundness sweep along exact orbits of random dyadic rationals.
//!
//! Every inequality is decided on integers: with `t_n = p/q` and
//! `v_n = s/u` in lowest terms, each coefficient is a ratio of products of
//! `p, q, s, u` and the checks cross-multiply. Only the comparison with a
//! floating bound value converts `D_{n-1}` to `f64`.

use std::collections::BTreeMap;

use cfcoef::bounds::{lower_bound_d, upper_bound_d, BoundError};
use cfcoef::cf::n_safe_for_bits;
use cfcoef::frequency::sample_start;
use cfcoef::natural_extension::ExactOrbit;
use cfcoef::{BoundKind, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

/// At most this many violations are listed; all are counted.
const MAX_LISTED: usize = 100;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepConfig {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub samples: usize,
    pub orbit: usize,
    pub seed: u64,
    pub bits: u64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Borel,
    Conjugate,
    Dirichlet,
    Corner,
    LowerD,
    UpperD,
}

impl Check {
    const ALL: [Check; 6] = [
        Check::Borel,
        Check::Conjugate,
        Check::Dirichlet,
        Check::Corner,
        Check::LowerD,
        Check::UpperD,
    ];
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub check: Check,
    /// Index of the starting point in the seeded stream.
    pub sample: usize,
    pub n: usize,
    pub x: String,
    pub a: String,
    pub b: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckTally {
    pub check: Check,
    pub checked: u64,
    pub violations: u64,
}

/// Smallest relative distance of `D_{n-1}` from the bound inside one
/// bound case. Positive means the bound held with room to spare.
#[derive(Debug, Clone, Serialize)]
pub struct SlackEntry {
    pub kind: BoundKind,
    pub case: u8,
    pub count: u64,
    pub min_relative_slack: f64,
    pub sample: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub points: u64,
    pub checks: Vec<CheckTally>,
    pub slack: Vec<SlackEntry>,
    pub total_violations: u64,
    pub violations: Vec<Violation>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.total_violations == 0
    }
}

#[derive(Default)]
struct Partial {
    points: u64,
    checked: BTreeMap<Check, (u64, u64)>,
    slack: BTreeMap<(u8, u8), SlackEntry>,
    violations: Vec<Violation>,
}

impl Partial {
    fn record(&mut self, check: Check, ok: bool) -> bool {
        let e = self.checked.entry(check).or_default();
        e.0 += 1;
        if !ok {
            e.1 += 1;
        }
        ok
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.points += other.points;
        for (k, (c, v)) in other.checked {
            let e = self.checked.entry(k).or_default();
            e.0 += c;
            e.1 += v;
        }
        for (k, s) in other.slack {
            match self.slack.get_mut(&k) {
                Some(cur) => {
                    cur.count += s.count;
                    if s.min_relative_slack < cur.min_relative_slack {
                        cur.min_relative_slack = s.min_relative_slack;
                        cur.sample = s.sample;
                        cur.n = s.n;
                    }
                }
                None => {
                    self.slack.insert(k, s);
                }
            }
        }
        self.violations.extend(other.violations);
        self
    }
}

fn kind_key(kind: BoundKind) -> u8 {
    match kind {
        BoundKind::LowerD => 0,
        BoundKind::UpperD => 1,
        BoundKind::LowerC => 2,
        BoundKind::UpperC => 3,
    }
}

/// A ratio `num/den` of positive integers.
struct Ratio {
    num: BigInt,
    den: BigInt,
}

impl Ratio {
    /// Drops low bits instead of reducing; the relative error stays near
    /// `2^-62`.
    fn to_f64(&self) -> f64 {
        let shift = self.den.bits().saturating_sub(64);
        let num = (&self.num >> shift).to_f64().unwrap_or(f64::INFINITY);
        let den = (&self.den >> shift).to_f64().unwrap_or(f64::INFINITY);
        num / den
    }
}

/// `x < 1/sqrt(k)` for a positive ratio, i.e. `k num^2 < den^2`.
fn below_inv_sqrt(x: &Ratio, k: &BigInt) -> bool {
    k * &x.num * &x.num < &x.den * &x.den
}

pub fn validate(cfg: &SweepConfig) -> Result<(), String> {
    if cfg.samples == 0 || cfg.orbit == 0 {
        return Err("samples and orbit must be at least 1".into());
    }
    if !(cfg.r > 1.0 && cfg.r.is_finite() && cfg.big_r > 1.0 && cfg.big_r.is_finite()) {
        return Err(format!("thresholds must be finite and > 1 (r = {}, R = {})", cfg.r, cfg.big_r));
    }
    let safe = n_safe_for_bits(cfg.bits);
    if cfg.orbit + 3 > safe {
        return Err(format!(
            "orbit length {} exceeds the certified depth of {}-bit samples (at most {})",
            cfg.orbit,
            cfg.bits,
            safe.saturating_sub(3)
        ));
    }
    Ok(())
}

pub fn sweep(cfg: &SweepConfig) -> Result<SweepReport, String> {
    validate(cfg)?;
    let merged = (0..cfg.samples)
        .into_par_iter()
        .map(|i| sweep_one(cfg, i))
        .reduce(Partial::default, Partial::merge);
    let mut violations = merged.violations;
    violations.sort_by_key(|v| (v.sample, v.n, v.check));
    let total_violations = violations.len() as u64;
    violations.truncate(MAX_LISTED);
    Ok(SweepReport {
        points: merged.points,
        checks: Check::ALL
            .iter()
            .map(|&check| {
                let (checked, violations) = merged.checked.get(&check).copied().unwrap_or_default();
                CheckTally {
                    check,
                    checked,
                    violations,
                }
            })
            .collect(),
        slack: merged.slack.into_values().collect(),
        total_violations,
        violations,
    })
}

fn sweep_one(cfg: &SweepConfig, sample: usize) -> Partial {
    let x = sample_start(cfg.seed, sample, cfg.bits);
    let (xn, xd) = (x.numer().clone(), x.denom().clone());
    let steps: Vec<_> = ExactOrbit::new(x.clone())
        .expect("x in [0,1)")
        .take(cfg.orbit + 2)
        .collect();
    let mut part = Partial::default();
    if steps.len() < cfg.orbit + 2 {
        return part;
    }
    let Some(last_digit) = steps[cfg.orbit + 1].next_digit() else {
        return part;
    };
    // digits[k] = a_k for k = 1..=orbit+2
    let mut digits: Vec<BigInt> = vec![BigInt::zero()];
    digits.extend(steps[1..].iter().map(|s| BigInt::from(s.a_n.clone().expect("n >= 1"))));
    digits.push(BigInt::from(last_digit));

    // p_n, q_n for n = 0..=orbit+1
    let (mut p, mut q) = (vec![BigInt::zero()], vec![BigInt::one()]);
    let (mut pp, mut qp) = (BigInt::one(), BigInt::zero());
    for a in &digits[1..=cfg.orbit + 1] {
        let pn = a * p.last().unwrap() + &pp;
        let qn = a * q.last().unwrap() + &qp;
        pp = p.last().unwrap().clone();
        qp = q.last().unwrap().clone();
        p.push(pn);
        q.push(qn);
    }

    let theta: Vec<Ratio> = steps
        .iter()
        .map(|s| {
            let (tp, tq) = (s.point.t.numer(), s.point.t.denom());
            let (vs, vu) = (s.point.v.numer(), s.point.v.denom());
            Ratio {
                num: tp * vu,
                den: tq * vu + tp * vs,
            }
        })
        .collect();

    let five = BigInt::from(5);
    let mut violation = |check: Check, n: usize, detail: String, part: &mut Partial| {
        part.violations.push(Violation {
            check,
            sample,
            n,
            x: x.to_string(),
            a: digits[n].to_string(),
            b: digits[n + 1].to_string(),
            detail,
        });
    };

    for n in 1..=cfg.orbit {
        part.points += 1;
        let (a, b) = (&digits[n], &digits[n + 1]);
        let pt = &steps[n].point;
        let (tp, tq) = (pt.t.numer(), pt.t.denom());
        let (vs, vu) = (pt.v.numer(), pt.v.denom());
        let window = [&theta[n - 1], &theta[n], &theta[n + 1]];

        let borel = window.iter().any(|th| below_inv_sqrt(th, &five));
        if !part.record(Check::Borel, borel) {
            violation(Check::Borel, n, "all three of theta_{n-1}, theta_n, theta_{n+1} are >= 1/sqrt(5)".into(), &mut part);
        }

        let k = b * b + 4;
        let conj = window.iter().any(|th| below_inv_sqrt(th, &k)) && window.iter().any(|th| !below_inv_sqrt(th, &k));
        if !part.record(Check::Conjugate, conj) {
            violation(Check::Conjugate, n, format!("1/sqrt({k}) is not strictly between min and max theta"), &mut part);
        }

        // |x - p/q| q_{n+1} < 1/q  <=>  |x_n q - p x_d| q_{n+1} < x_d
        let err = (&xn * &q[n] - &p[n] * &xd).abs();
        let dir = err * &q[n + 1] < xd;
        if !part.record(Check::Dirichlet, dir) {
            violation(Check::Dirichlet, n, "|x - p_n/q_n| >= 1/(q_n q_{n+1})".into(), &mut part);
        }

        // D_{n-1} = q u / (p s)
        let d_num = tq * vu;
        let d_den = tp * vs;
        let corner = a * b * &d_den <= d_num && d_num < (a + 1) * (b + 1) * &d_den;
        if !part.record(Check::Corner, corner) {
            violation(Check::Corner, n, "D_{n-1} outside [a b, (a+1)(b+1))".into(), &mut part);
        }

        if n >= 2 {
            bound_checks(cfg, n, a, b, (tp, tq, vs, vu), Ratio { num: d_num, den: d_den }, sample, &mut part, &mut violation);
        }
    }
    part
}

type Point<'a> = (&'a BigInt, &'a BigInt, &'a BigInt, &'a BigInt);

#[allow(clippy::too_many_arguments)]
fn bound_checks(
    cfg: &SweepConfig,
    n: usize,
    a: &BigInt,
    b: &BigInt,
    (tp, tq, vs, vu): Point<'_>,
    d_mid: Ratio,
    sample: usize,
    part: &mut Partial,
    violation: &mut impl FnMut(Check, usize, String, &mut Partial),
) {
    let (Some(a64), Some(b64)) = (a.to_u64(), b.to_u64()) else {
        return;
    };
    // D_{n-2} = (a q + p) s / (q (u - a s)),  D_n = (b u + s) p / (u (q - b p))
    let before = Ratio {
        num: (a * tq + tp) * vs,
        den: tq * (vu - a * vs),
    };
    let after_den = vu * (tq - b * tp);
    if !before.den.is_positive() || !after_den.is_positive() {
        return;
    }
    let after = Ratio {
        num: (b * vu + vs) * tp,
        den: after_den,
    };
    let r = Rational::from_f64(cfg.r).expect("finite");
    let big_r = Rational::from_f64(cfg.big_r).expect("finite");
    let side = |x: &Ratio, thr: &Rational| (&x.num * thr.denom()).cmp(&(thr.numer() * &x.den));
    use std::cmp::Ordering::*;
    let (kind, check) = match (side(&before, &r), side(&after, &big_r)) {
        (Less, Less) => (BoundKind::LowerD, Check::LowerD),
        (Greater, Greater) => (BoundKind::UpperD, Check::UpperD),
        _ => return,
    };
    let result = match kind {
        BoundKind::LowerD => lower_bound_d(a64, b64, cfg.r, cfg.big_r),
        _ => upper_bound_d(a64, b64, cfg.r, cfg.big_r),
    };
    let bound = match result {
        Ok(bound) => bound,
        Err(BoundError::EmptyRegion { .. }) => {
            part.record(check, false);
            violation(check, n, "point satisfies the hypotheses in a region reported empty".into(), part);
            return;
        }
        Err(e) => {
            part.record(check, false);
            violation(check, n, e.to_string(), part);
            return;
        }
    };
    let d = d_mid.to_f64();
    let slack = match kind {
        BoundKind::LowerD => d / bound.value - 1.0,
        _ => 1.0 - d / bound.value,
    };
    if !part.record(check, slack > -cfg.tolerance) {
        violation(
            check,
            n,
            format!("D_{{n-1}} = {d} vs {} bound {} (case {})", kind, bound.value, bound.theorem_case),
            part,
        );
    }
    let entry = part
        .slack
        .entry((kind_key(kind), bound.theorem_case))
        .or_insert_with(|| SlackEntry {
            kind,
            case: bound.theorem_case,
            count: 0,
            min_relative_slack: f64::INFINITY,
            sample,
            n,
        });
    entry.count += 1;
    if slack < entry.min_relative_slack {
        entry.min_relative_slack = slack;
        entry.sample = sample;
        entry.n = n;
    }
}
