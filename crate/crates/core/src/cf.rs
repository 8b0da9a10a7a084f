//! Regular continued fraction machinery.
//!
//! Digits are extracted with the Euclidean algorithm, so everything here is
//! exact. For index `n` the "future" is `t_n = [0; a_{n+1}, a_{n+2}, ...]`
//! and the "past" is `v_n = [0; a_n, ..., a_1] = q_{n-1}/q_n`; all the
//! approximation coefficients are rational functions of that pair.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfError {
    #[error("index {index} out of range (sequence has {available} digits)")]
    IndexOutOfRange { index: usize, available: usize },
    #[error("index {index} needs certified digits beyond n_safe = {n_safe}")]
    InsufficientDigits { index: usize, n_safe: usize },
    #[error("partial quotient a_{index} must be at least 1")]
    ZeroDigit { index: usize },
    #[error("n_safe = {n_safe} exceeds the {available} listed digits")]
    BadNSafe { n_safe: usize, available: usize },
    #[error("t_{index} = 0: the expansion terminates at this index")]
    TerminalIndex { index: usize },
    #[error("malformed digit sequence {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// How far a digit sequence can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exactness {
    /// The full expansion of a rational.
    ExactFinite,
    /// A prefix of a longer expansion; digits with index `<= n_safe` are
    /// digits of the underlying number.
    Truncated { n_safe: usize },
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DigitSequence {
    a0: BigInt,
    digits: Vec<BigUint>,
    exactness: Exactness,
}

impl DigitSequence {
    /// Validates the digits. Exact-finite sequences ending in `..., k, 1` are
    /// folded to the canonical `..., k + 1` form.
    pub fn new(a0: BigInt, digits: Vec<BigUint>, exactness: Exactness) -> Result<Self, CfError> {
        if let Some(i) = digits.iter().position(|d| d.is_zero()) {
            return Err(CfError::ZeroDigit { index: i + 1 });
        }
        if let Exactness::Truncated { n_safe } = exactness {
            if n_safe > digits.len() {
                return Err(CfError::BadNSafe {
                    n_safe,
                    available: digits.len(),
                });
            }
        }
        let mut seq = DigitSequence {
            a0,
            digits,
            exactness,
        };
        if exactness == Exactness::ExactFinite {
            seq.canonicalize();
        }
        Ok(seq)
    }

    /// Exact-finite sequence from small digits; convenient in tests.
    pub fn finite(a0: i64, digits: &[u64]) -> Result<Self, CfError> {
        Self::new(
            BigInt::from(a0),
            digits.iter().map(|&d| BigUint::from(d)).collect(),
            Exactness::ExactFinite,
        )
    }

    /// Rewrites a trailing `..., k, 1` as `..., k + 1`. Idempotent.
    pub fn canonicalize(&mut self) {
        if self.digits.last().is_some_and(|d| d.is_one()) {
            self.digits.pop();
            match self.digits.last_mut() {
                Some(d) => *d += 1u32,
                None => self.a0 += 1,
            }
        }
    }

    pub fn a0(&self) -> &BigInt {
        &self.a0
    }

    /// `a_1, a_2, ...`; `digits()[k - 1]` is `a_k`.
    pub fn digits(&self) -> &[BigUint] {
        &self.digits
    }

    /// `a_k` for `k >= 1`.
    pub fn digit(&self, k: usize) -> Option<&BigUint> {
        k.checked_sub(1).and_then(|i| self.digits.get(i))
    }

    pub fn digit_u64(&self, k: usize) -> Option<u64> {
        self.digit(k).and_then(|d| d.to_u64())
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    pub fn n_safe(&self) -> Option<usize> {
        match self.exactness {
            Exactness::ExactFinite => None,
            Exactness::Truncated { n_safe } => Some(n_safe),
        }
    }

    /// Value of the listed digits. For truncated sequences this is the
    /// convergent at the last listed digit.
    pub fn value(&self) -> Rational {
        Rational::from_integer(self.a0.clone()) + fold_tail(&self.digits)
    }

    /// Largest index `n` for which `t_n` and the coefficient triple may be
    /// reported.
    fn check_certified(&self, n: usize) -> Result<(), CfError> {
        match self.exactness {
            Exactness::ExactFinite if n <= self.len() => Ok(()),
            Exactness::ExactFinite => Err(CfError::IndexOutOfRange {
                index: n,
                available: self.len(),
            }),
            Exactness::Truncated { n_safe } if n + 2 <= n_safe => Ok(()),
            Exactness::Truncated { n_safe } => Err(CfError::InsufficientDigits { index: n, n_safe }),
        }
    }
}

/// `[0; d_1, d_2, ...]` for the given digits (zero for an empty slice).
pub fn fold_tail(digits: &[BigUint]) -> Rational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    // 1/(d + num/den) = den/(d*den + num)
    for d in digits.iter().rev() {
        let d = BigInt::from_biguint(Sign::Plus, d.clone());
        let next_den = &d * &den + &num;
        num = den;
        den = next_den;
    }
    Rational::new(num, den)
}

/// `[lead; rest_1, rest_2, ...]`.
pub fn fold_bracket(lead: &BigUint, rest: &[BigUint]) -> Rational {
    Rational::from(lead.clone()) + fold_tail(rest)
}

/// Regular continued fraction of `x`, stopping after `max_digits` partial
/// quotients `a_1, a_2, ...` if the expansion has not terminated by then.
pub fn expand(x: &Rational, max_digits: usize) -> DigitSequence {
    let a0 = x.floor();
    let mut num = x.denom().clone();
    let mut den = x.numer() - &a0 * x.denom();
    let mut digits = Vec::new();
    while !den.is_zero() && digits.len() < max_digits {
        let (a, rem) = num.div_rem(&den);
        digits.push(a.to_biguint().expect("partial quotients are positive"));
        num = den;
        den = rem;
    }
    let exactness = if den.is_zero() {
        Exactness::ExactFinite
    } else {
        Exactness::Truncated {
            n_safe: digits.len(),
        }
    };
    DigitSequence {
        a0,
        digits,
        exactness,
    }
}

/// Full expansion of a rational.
pub fn expand_exact(x: &Rational) -> DigitSequence {
    expand(x, usize::MAX)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergentPair {
    pub index: usize,
    pub p: BigInt,
    pub q: BigInt,
}

impl ConvergentPair {
    pub fn value(&self) -> Rational {
        Rational::new(self.p.clone(), self.q.clone())
    }
}

/// `(p_0, q_0), ..., (p_n, q_n)` from `p_k = a_k p_{k-1} + p_{k-2}` with
/// seeds `p_{-1} = 1, q_{-1} = 0, p_0 = a_0, q_0 = 1`.
pub fn convergents(d: &DigitSequence, n: usize) -> Result<Vec<ConvergentPair>, CfError> {
    if n > d.len() {
        return Err(CfError::IndexOutOfRange {
            index: n,
            available: d.len(),
        });
    }
    let mut out = Vec::with_capacity(n + 1);
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (d.a0.clone(), BigInt::one());
    out.push(ConvergentPair {
        index: 0,
        p: p.clone(),
        q: q.clone(),
    });
    for (k, a) in d.digits[..n].iter().enumerate() {
        let a = BigInt::from_biguint(Sign::Plus, a.clone());
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push(ConvergentPair {
            index: k + 1,
            p: p.clone(),
            q: q.clone(),
        });
    }
    Ok(out)
}

/// `t_n = [0; a_{n+1}, a_{n+2}, ...]`, with `t_0 = x - a_0`.
pub fn future_t(d: &DigitSequence, n: usize) -> Result<Rational, CfError> {
    d.check_certified(n)?;
    Ok(fold_tail(&d.digits[n..]))
}

/// `v_n = [0; a_n, ..., a_1]`, with `v_0 = 0`.
pub fn past_v(d: &DigitSequence, n: usize) -> Result<Rational, CfError> {
    if n > d.len() {
        return Err(CfError::IndexOutOfRange {
            index: n,
            available: d.len(),
        });
    }
    let mut v = Rational::zero();
    for a in &d.digits[..n] {
        v = (Rational::from(a.clone()) + v)
            .recip()
            .expect("a_k + v is at least 1");
    }
    Ok(v)
}

/// Approximation coefficients read off the pair `(t_n, v_n)`.
///
/// `theta` is `Θ_n`; the `_prev` fields refer to index `n - 1`
/// (`d_prev = D_{n-1} = 1/(t_n v_n)`, `c_prev = 1 + 1/D_{n-1}`),
/// `d_prev2 = D_{n-2}` and `d_next = D_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientTriple {
    pub index: usize,
    pub theta: Rational,
    pub theta_prev: Option<Rational>,
    pub d_prev: Option<Rational>,
    pub c_prev: Option<Rational>,
    pub d_prev2: Option<Rational>,
    pub d_next: Option<Rational>,
}

impl CoefficientTriple {
    /// `a_n` is `None` only for `n = 0`. `a_next` is `a_{n+1}`.
    pub fn from_future_past(
        index: usize,
        t: &Rational,
        v: &Rational,
        a_n: Option<&BigUint>,
        a_next: &BigUint,
    ) -> Self {
        let one = Rational::one();
        let tv = t * v;
        let denom = &one + &tv;
        let theta = t / &denom;
        if index == 0 || v.is_zero() {
            return CoefficientTriple {
                index,
                theta,
                theta_prev: None,
                d_prev: None,
                c_prev: None,
                d_prev2: None,
                d_next: None,
            };
        }
        let theta_prev = Some(v / &denom);
        let d_prev = tv.recip();
        let c_prev = d_prev.as_ref().map(|d| &one + d.recip().expect("D > 0"));

        // D_{n-2} = (a_n + t_n) v_n / (1 - a_n v_n); undefined at n = 1 where
        // a_1 v_1 = 1.
        let d_prev2 = a_n.and_then(|a| {
            let a = Rational::from(a.clone());
            let den = &one - &a * v;
            if index < 2 || den.is_zero() {
                None
            } else {
                Some((a + t) * v / den)
            }
        });
        // D_n = (a_{n+1} + v_n) t_n / (1 - a_{n+1} t_n); the denominator
        // vanishes exactly when t_{n+1} = 0.
        let b = Rational::from(a_next.clone());
        let den = &one - &b * t;
        let d_next = if den.is_zero() {
            None
        } else {
            Some((b + v) * t / den)
        };
        CoefficientTriple {
            index,
            theta,
            theta_prev,
            d_prev,
            c_prev,
            d_prev2,
            d_next,
        }
    }
}

/// Coefficients at index `n` from the future/past representation.
pub fn coefficients(d: &DigitSequence, n: usize) -> Result<CoefficientTriple, CfError> {
    let t = future_t(d, n)?;
    if t.is_zero() {
        return Err(CfError::TerminalIndex { index: n });
    }
    let v = past_v(d, n)?;
    let a_next = d.digit(n + 1).expect("t_n != 0 implies a_{n+1} exists");
    Ok(CoefficientTriple::from_future_past(n, &t, &v, d.digit(n), a_next))
}

/// `Θ_n = q_n^2 |x - p_n/q_n|` straight from the convergents, where `x` is
/// the value of the listed digits.
pub fn theta_definitional(d: &DigitSequence, n: usize) -> Result<Rational, CfError> {
    let conv = convergents(d, n)?;
    let last = conv.last().expect("at least one convergent");
    let q = Rational::from_integer(last.q.clone());
    Ok((d.value() - last.value()).abs() * &q * &q)
}

/// `D_n = [a_{n+1}; a_n, ..., a_1] * [a_{n+2}; a_{n+3}, ...]` evaluated as
/// two brackets. Needs `a_{n+2}`.
pub fn d_definitional(d: &DigitSequence, n: usize) -> Result<Rational, CfError> {
    if n + 2 > d.len() {
        return Err(CfError::IndexOutOfRange {
            index: n + 2,
            available: d.len(),
        });
    }
    let backward: Vec<BigUint> = d.digits[..n].iter().rev().cloned().collect();
    let left = fold_bracket(&d.digits[n], &backward);
    let right = fold_bracket(&d.digits[n + 1], &d.digits[n + 2..]);
    Ok(left * right)
}

/// `C_n` from `x - p_n/q_n = (-1)^n / (C_n q_n q_{n+1})`. Needs `a_{n+1}`
/// and `x != p_n/q_n`.
pub fn c_definitional(d: &DigitSequence, n: usize) -> Result<Rational, CfError> {
    let conv = convergents(d, n + 1)?;
    let (cur, next) = (&conv[n], &conv[n + 1]);
    let err = d.value() - cur.value();
    if err.is_zero() {
        return Err(CfError::TerminalIndex { index: n });
    }
    let sign = if n.is_multiple_of(2) { Rational::one() } else { -Rational::one() };
    let qq = Rational::from_integer(&cur.q * &next.q);
    Ok(sign / (err * qq))
}

/// A uniformly random dyadic `k / 2^bits` in `[0, 1)` standing in for a
/// generic real. Only the first `bits / 6` digits are treated as certified,
/// well below the typical ~3.4 bits consumed per partial quotient.
#[derive(Debug, Clone)]
pub struct GenericReal {
    pub x: Rational,
    pub digits: DigitSequence,
}

pub const DEFAULT_SAMPLE_BITS: u64 = 4096;

pub fn n_safe_for_bits(bits: u64) -> usize {
    (bits / 6) as usize
}

impl GenericReal {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, bits: u64) -> Self {
        let k = rng.gen_biguint(bits);
        let x = Rational::new(BigInt::from_biguint(Sign::Plus, k), BigInt::one() << bits);
        let digits = expand(&x, n_safe_for_bits(bits));
        GenericReal { x, digits }
    }
}

impl fmt::Display for DigitSequence {
    /// Bracket text form `a0;a1,a2,...` (just `a0` when there are no
    /// further digits).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.a0)?;
        for (i, d) in self.digits.iter().enumerate() {
            f.write_str(if i == 0 { ";" } else { "," })?;
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DigitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")?;
        if let Exactness::Truncated { n_safe } = self.exactness {
            write!(f, " (truncated, n_safe={n_safe})")?;
        }
        Ok(())
    }
}

impl FromStr for DigitSequence {
    type Err = CfError;

    /// Parses `a0;a1,a2,...`, optionally wrapped in brackets and with
    /// whitespace. The result is exact-finite.
    fn from_str(input: &str) -> Result<Self, CfError> {
        let perr = |reason: String| CfError::Parse {
            input: input.to_string(),
            reason,
        };
        let s = input.trim();
        let s = s.strip_prefix('[').unwrap_or(s);
        let s = s.strip_suffix(']').unwrap_or(s);
        let (head, tail) = match s.split_once(';') {
            Some((h, t)) => (h, t),
            None => (s, ""),
        };
        let a0: BigInt = head
            .trim()
            .parse()
            .map_err(|_| perr(format!("bad a0 {:?}", head.trim())))?;
        let mut digits = Vec::new();
        if !tail.trim().is_empty() {
            for part in tail.split(',') {
                let d: BigUint = part
                    .trim()
                    .parse()
                    .map_err(|_| perr(format!("bad digit {:?}", part.trim())))?;
                digits.push(d);
            }
        }
        DigitSequence::new(a0, digits, Exactness::ExactFinite)
    }
}

/// Integers go to JSON as numbers when they fit in `i64` and as decimal
/// strings otherwise.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonInt {
    Small(i64),
    Big(String),
}

impl JsonInt {
    fn from_bigint(n: &BigInt) -> Self {
        match n.to_i64() {
            Some(v) => JsonInt::Small(v),
            None => JsonInt::Big(n.to_string()),
        }
    }

    fn to_bigint(&self) -> Result<BigInt, String> {
        match self {
            JsonInt::Small(v) => Ok(BigInt::from(*v)),
            JsonInt::Big(s) => s.parse().map_err(|_| format!("bad integer {s:?}")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DigitSequenceJson {
    a0: JsonInt,
    digits: Vec<JsonInt>,
    exactness: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_safe: Option<usize>,
}

impl Serialize for DigitSequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let (exactness, n_safe) = match self.exactness {
            Exactness::ExactFinite => ("exact_finite", None),
            Exactness::Truncated { n_safe } => ("truncated", Some(n_safe)),
        };
        DigitSequenceJson {
            a0: JsonInt::from_bigint(&self.a0),
            digits: self
                .digits
                .iter()
                .map(|d| JsonInt::from_bigint(&BigInt::from_biguint(Sign::Plus, d.clone())))
                .collect(),
            exactness: exactness.to_string(),
            n_safe,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DigitSequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = DigitSequenceJson::deserialize(deserializer)?;
        let a0 = raw.a0.to_bigint().map_err(D::Error::custom)?;
        let mut digits = Vec::with_capacity(raw.digits.len());
        for d in &raw.digits {
            let d = d.to_bigint().map_err(D::Error::custom)?;
            if d.is_negative() {
                return Err(D::Error::custom("negative partial quotient"));
            }
            digits.push(d.magnitude().clone());
        }
        let exactness = match (raw.exactness.as_str(), raw.n_safe) {
            ("exact_finite", _) => Exactness::ExactFinite,
            ("truncated", Some(n_safe)) => Exactness::Truncated { n_safe },
            ("truncated", None) => return Err(D::Error::custom("truncated sequence needs n_safe")),
            (other, _) => return Err(D::Error::custom(format!("unknown exactness {other:?}"))),
        };
        DigitSequence::new(a0, digits, exactness).map_err(D::Error::custom)
    }
}
