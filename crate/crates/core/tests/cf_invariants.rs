//! Classical inequalities and exact identities on random finite expansions.
//!
//! Near the end of a finite expansion some inequalities become equalities
//! (the last convergent is `x` itself), so "valid" indices stop short of
//! the last digit where noted.

use cfcoef::cf::{c_definitional, coefficients, convergents, d_definitional, expand_exact, theta_definitional};
use cfcoef::{DigitSequence, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use proptest::prelude::*;

fn sequence() -> impl Strategy<Value = DigitSequence> {
    prop::collection::vec(1u64..60, 3..24).prop_map(|digits| {
        let d = DigitSequence::finite(0, &digits).unwrap();
        // canonical form of the value, so len() counts real digits
        expand_exact(&d.value())
    })
}

fn digit(d: &DigitSequence, k: usize) -> BigInt {
    BigInt::from(d.digits()[k - 1].clone())
}

/// `x < 1/sqrt(k)` for a nonnegative rational `x`.
fn below_inv_sqrt(x: &Rational, k: &BigInt) -> bool {
    k * x.numer() * x.numer() < x.denom() * x.denom()
}

fn thetas(d: &DigitSequence) -> Vec<Rational> {
    (0..=d.len()).map(|n| theta_definitional(d, n).unwrap()).collect()
}

proptest! {
    #[test]
    fn borel_window(d in sequence()) {
        prop_assume!(d.len() >= 3);
        let th = thetas(&d);
        let five = BigInt::from(5);
        for n in 1..d.len() {
            prop_assert!(
                th[n - 1..=n + 1].iter().any(|t| below_inv_sqrt(t, &five)),
                "n = {n} for {d:?}"
            );
        }
    }

    #[test]
    fn conjugate_window(d in sequence()) {
        let th = thetas(&d);
        // at n = len - 1 the window ends in theta_len = 0 and the upper side
        // can fail; the property is about indices with a proper future
        for n in 1..d.len().saturating_sub(1) {
            let b = digit(&d, n + 1);
            let k = &b * &b + 4;
            let w = &th[n - 1..=n + 1];
            prop_assert!(w.iter().any(|t| below_inv_sqrt(t, &k)), "min side, n = {n}");
            prop_assert!(w.iter().any(|t| !below_inv_sqrt(t, &k)), "max side, n = {n}");
        }
    }

    #[test]
    fn dirichlet(d in sequence()) {
        let conv = convergents(&d, d.len()).unwrap();
        let x = d.value();
        // n = len - 1 is the equality |p_len/q_len - p/q| = 1/(q q_len)
        for n in 0..d.len() - 1 {
            let err = (&x - &conv[n].value()).abs();
            let limit = Rational::new(BigInt::from(1), &conv[n].q * &conv[n + 1].q);
            prop_assert!(err < limit, "n = {n}");
        }
    }

    #[test]
    fn future_past_forms_match_definitions(d in sequence()) {
        for n in 1..d.len() {
            let co = coefficients(&d, n).unwrap();
            prop_assert_eq!(&co.theta, &theta_definitional(&d, n).unwrap());
            prop_assert_eq!(co.d_prev.clone().unwrap(), d_definitional(&d, n - 1).unwrap());
        }
    }

    #[test]
    fn corner_inequality(d in sequence()) {
        for n in 1..d.len() {
            let (a, b) = (digit(&d, n), digit(&d, n + 1));
            let dp = coefficients(&d, n).unwrap().d_prev.unwrap();
            let lo = Rational::from_integer(&a * &b);
            let hi = Rational::from_integer((&a + 1) * (&b + 1));
            prop_assert!(dp >= lo && dp < hi, "n = {n}: {dp:?}");
            // the minimum a b needs both t_n = 1/b and v_n = 1/a
            if !(n == 1 && d.len() == 2) {
                prop_assert!(dp > lo);
            }
        }
    }

    #[test]
    fn c_in_open_interval_and_tied_to_d(d in sequence()) {
        for n in 0..d.len() - 1 {
            let c = c_definitional(&d, n).unwrap();
            prop_assert!(c > 1 && c < 2, "n = {n}: {c:?}");
            let dn = d_definitional(&d, n).unwrap();
            prop_assert_eq!(&c, &(Rational::one() + dn.recip().unwrap()));
        }
        // at the last index x is the next convergent and C collapses to 1
        prop_assert!(c_definitional(&d, d.len() - 1).unwrap() == 1);
    }

    #[test]
    fn convergent_denominators(d in sequence()) {
        let conv = convergents(&d, d.len()).unwrap();
        for w in conv[1..].windows(2) {
            prop_assert!(w[1].q > w[0].q);
        }
        for c in &conv {
            prop_assert!(c.p.gcd(&c.q) == BigInt::from(1));
        }
        prop_assert_eq!(conv.last().unwrap().value(), d.value());
    }
}
