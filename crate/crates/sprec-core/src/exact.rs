//! Exact probability computations for finite discrete variables.
//!
//! All arithmetic runs over arbitrary-precision rationals and every
//! reported probability is the correctly rounded double of the true
//! value, so sums of many mass products lose nothing to accumulation.
//!
//! Masses are interpreted through their shortest round-trip decimal
//! representation — the number as written in a config file. A mass of
//! `0.4` is the fraction 4/10 rather than the nearest binary double, so
//! results land exactly on the decimals they should (0.4 * 0.4 = 0.16,
//! not 0.16000000000000003).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dist::Atom;

/// Exact rational equal to the double `x` (every finite double is dyadic).
/// Test-only counterpart of [`decimal_rational`], used to pin down the
/// difference between the two readings.
#[cfg(test)]
pub(crate) fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Exact rational of the shortest decimal that round-trips to `x` — the
/// literal a user wrote in a config. `Display` for f64 prints exactly that
/// decimal, without exponent notation.
pub(crate) fn decimal_rational(x: f64) -> BigRational {
    let s = format!("{x}");
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.as_str()),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    let mut numer = BigInt::from(0u32);
    for c in int_part.chars().chain(frac_part.chars()) {
        numer = numer * 10 + c.to_digit(10).expect("decimal digit");
    }
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    BigRational::new(numer * sign, denom)
}

/// Correctly rounded (nearest, ties to even) double of a rational.
///
/// `num`'s own `to_f64` is not guaranteed to round once, so this performs
/// the scaling and the half-even rounding explicitly.
pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let negative = r.is_negative();
    let n = r.numer().abs();
    let d = r.denom().clone();

    // Scale so the integer quotient has 54..56 significant bits.
    let shift = 55 - (n.bits() as i64 - d.bits() as i64);
    let (num, den) = if shift >= 0 { (n << shift as u64, d) } else { (n, d << (-shift) as u64) };
    let q: BigInt = &num / &den;
    let rem = num - &q * den;

    let q64 = q.to_u64().expect("quotient fits 64 bits by construction");
    let bits = 64 - q64.leading_zeros();
    let drop = bits - 53;
    let mut kept = q64 >> drop;
    let round_bit = (q64 >> (drop - 1)) & 1;
    let sticky = (q64 & ((1u64 << (drop - 1)) - 1)) != 0 || !rem.is_zero();
    if round_bit == 1 && (sticky || kept & 1 == 1) {
        kept += 1;
    }

    let value = kept as f64 * 2f64.powi((drop as i64 - shift) as i32);
    if negative {
        -value
    } else {
        value
    }
}

/// Masses of one variable as exact rationals, paired with the atom values.
pub(crate) struct ExactAtoms {
    pub values: Vec<f64>,
    pub masses: Vec<BigRational>,
}

impl ExactAtoms {
    pub fn new(atoms: &[Atom]) -> Self {
        ExactAtoms {
            values: atoms.iter().map(|a| a.value).collect(),
            masses: atoms.iter().map(|a| decimal_rational(a.mass)).collect(),
        }
    }
}

/// `(P(T2 >= T1), P(T1 >= T2), P(T1 = T2))` over two atom sets, exactly.
/// Ties contribute to both weak probabilities.
pub(crate) fn sp_pair_exact(d1: &[Atom], d2: &[Atom]) -> (BigRational, BigRational, BigRational) {
    let a1 = ExactAtoms::new(d1);
    let a2 = ExactAtoms::new(d2);
    let mut p21 = BigRational::zero();
    let mut p12 = BigRational::zero();
    let mut tie = BigRational::zero();
    for (i, &x1) in a1.values.iter().enumerate() {
        for (j, &x2) in a2.values.iter().enumerate() {
            let w = &a1.masses[i] * &a2.masses[j];
            if x2 >= x1 {
                p21 += &w;
            }
            if x1 >= x2 {
                p12 += &w;
            }
            if x1 == x2 {
                tie += &w;
            }
        }
    }
    (p21, p12, tie)
}

/// Exact probability of the ordering event
/// `T_{order[0]} <= T_{order[1]} <= ... ` (or `<` under the strict
/// convention) for all-discrete variables. `order` lists the atom sets in
/// event position order.
pub(crate) fn perm_prob_exact(ordered: &[&[Atom]], strict: bool) -> BigRational {
    let exact: Vec<ExactAtoms> = ordered.iter().map(|a| ExactAtoms::new(a)).collect();
    descend(&exact, 0, f64::NEG_INFINITY, strict)
}

fn descend(dists: &[ExactAtoms], position: usize, bound: f64, strict: bool) -> BigRational {
    if position == dists.len() {
        return BigRational::one();
    }
    let d = &dists[position];
    let mut total = BigRational::zero();
    for (i, &value) in d.values.iter().enumerate() {
        let admissible = if position == 0 {
            true
        } else if strict {
            value > bound
        } else {
            value >= bound
        };
        if admissible {
            total += &d.masses[i] * descend(dists, position + 1, value, strict);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Distribution;
    use proptest::prelude::*;

    fn atoms(d: &Distribution) -> &[Atom] {
        d.atoms().unwrap()
    }

    #[test]
    fn rational_roundtrip_known_decimals() {
        for &x in &[0.6, 0.64, 0.4, 0.36, 0.24, 0.16, 1.0, 0.0, 1e-9, 123.456] {
            assert_eq!(rational_to_f64(&rational_from_f64(x)), x);
            assert_eq!(rational_to_f64(&decimal_rational(x)), x);
        }
    }

    #[test]
    fn decimal_rational_reads_the_literal() {
        assert_eq!(decimal_rational(0.4), BigRational::new(BigInt::from(2), BigInt::from(5)));
        assert_eq!(decimal_rational(1.0), BigRational::new(BigInt::from(1), BigInt::from(1)));
        assert_eq!(decimal_rational(-2.5), BigRational::new(BigInt::from(-5), BigInt::from(2)));
        // a double that is not a short decimal still round-trips
        let x = 0.1 + 0.2;
        assert_eq!(rational_to_f64(&decimal_rational(x)), x);
    }

    #[test]
    fn decimal_products_land_on_decimals() {
        // 0.4 * 0.4 = 0.16 exactly under the decimal reading; the dyadic
        // reading would end up one ulp high
        let p = decimal_rational(0.4) * decimal_rational(0.4);
        assert_eq!(rational_to_f64(&p), 0.16);
        let q = decimal_rational(0.6) * decimal_rational(0.4);
        assert_eq!(rational_to_f64(&q), 0.24);
        let s = decimal_rational(0.4) + decimal_rational(0.24);
        assert_eq!(rational_to_f64(&s), 0.64);
    }

    proptest! {
        // IEEE division of exactly representable integers is correctly
        // rounded, which makes it an independent oracle for the converter.
        #[test]
        fn rational_to_f64_matches_ieee_division(n in 1u64..(1 << 53), d in 1u64..(1 << 53)) {
            let r = BigRational::new(BigInt::from(n), BigInt::from(d));
            prop_assert_eq!(rational_to_f64(&r), n as f64 / d as f64);
        }

        #[test]
        fn rational_to_f64_is_identity_on_floats(x in -1e12f64..1e12) {
            prop_assert_eq!(rational_to_f64(&rational_from_f64(x)), x);
        }
    }

    #[test]
    fn blyth_pairwise_probabilities() {
        let t1 = Distribution::discrete(vec![(3.0, 1.0)]).unwrap();
        let t2 = Distribution::discrete(vec![(1.0, 0.4), (4.0, 0.6)]).unwrap();
        let t3 = Distribution::discrete(vec![(2.0, 0.6), (5.0, 0.4)]).unwrap();

        let (p21, p12, tie) = sp_pair_exact(atoms(&t1), atoms(&t2));
        assert_eq!(rational_to_f64(&p21), 0.6);
        assert_eq!(rational_to_f64(&p12), 0.4);
        assert!(tie.is_zero());

        let (p32, _, _) = sp_pair_exact(atoms(&t2), atoms(&t3));
        assert_eq!(rational_to_f64(&p32), 0.64);

        let (p13, _, _) = sp_pair_exact(atoms(&t3), atoms(&t1));
        assert_eq!(rational_to_f64(&p13), 0.6);
    }

    #[test]
    fn ties_count_on_both_sides() {
        let a = Distribution::discrete(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let b = Distribution::discrete(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let (p21, p12, tie) = sp_pair_exact(atoms(&a), atoms(&b));
        // P(B >= A) = P(A >= B) = 0.75, P(A = B) = 0.5
        assert_eq!(rational_to_f64(&p21), 0.75);
        assert_eq!(rational_to_f64(&p12), 0.75);
        assert_eq!(rational_to_f64(&tie), 0.5);
    }

    #[test]
    fn blyth_312_event_is_036() {
        let t1 = Distribution::discrete(vec![(3.0, 1.0)]).unwrap();
        let t2 = Distribution::discrete(vec![(1.0, 0.4), (4.0, 0.6)]).unwrap();
        let t3 = Distribution::discrete(vec![(2.0, 0.6), (5.0, 0.4)]).unwrap();
        // event T3 <= T1 <= T2
        let p = perm_prob_exact(&[atoms(&t3), atoms(&t1), atoms(&t2)], false);
        assert_eq!(rational_to_f64(&p), 0.36);
        let p_strict = perm_prob_exact(&[atoms(&t3), atoms(&t1), atoms(&t2)], true);
        assert_eq!(rational_to_f64(&p_strict), 0.36);
    }
}
