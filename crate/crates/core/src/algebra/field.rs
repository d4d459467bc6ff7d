use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::ExactMatrix;
use super::prime::is_prime;
use crate::error::{Error, Result};

/// Lowest admissible modulus for [`PrimeField`].
pub const PRIME_LOWER: u64 = 1 << 20;
/// Exclusive upper limit for [`PrimeField`] moduli; keeps products inside a `u64`.
pub const PRIME_UPPER: u64 = 1 << 31;

/// An exact coefficient field.
///
/// Elements are plain values; the field object carries whatever context is
/// needed to operate on them (the modulus for prime fields).
pub trait Field: Clone + fmt::Debug + PartialEq {
    type Elem: Clone + fmt::Debug + PartialEq;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn from_bigint(&self, v: &BigInt) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    /// `a + b * c`, the inner loop of every elimination and convolution.
    fn mul_add(&self, a: &Self::Elem, b: &Self::Elem, c: &Self::Elem) -> Self::Elem {
        self.add(a, &self.mul(b, c))
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Exact rank by ordinary elimination; prime fields and the rationals
    /// override it with specialised routines.
    fn rank(&self, m: &ExactMatrix<Self>) -> usize {
        super::matrix::gaussian_rank(m)
    }

    fn label(&self) -> FieldLabel;
}

/// Which field a computation ran over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldLabel {
    /// `Z/pZ`; the prime is serialized as a decimal string.
    Prime {
        #[serde(with = "crate::report::decimal")]
        p: u64,
    },
    Rational,
}

impl fmt::Display for FieldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldLabel::Prime { p } => write!(f, "F_{p}"),
            FieldLabel::Rational => f.write_str("Q"),
        }
    }
}

/// `Z/pZ` for a prime `2^20 <= p < 2^31`, elements stored reduced in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
    /// `floor(2^64 / p)` for Barrett reduction.
    mu: u64,
}

impl PrimeField {
    /// Checks primality and the admissible range.
    pub fn new(p: u64) -> Result<Self> {
        if !(PRIME_LOWER..PRIME_UPPER).contains(&p) {
            return Err(Error::InvalidPrime { p, reason: "outside [2^20, 2^31)" });
        }
        if !is_prime(p) {
            return Err(Error::InvalidPrime { p, reason: "not prime" });
        }
        Ok(Self { p, mu: (u128::from(u64::MAX) + 1).div_euclid(u128::from(p)) as u64 })
    }

    /// `x mod p` for `x < 2^63`.
    #[inline]
    pub(crate) fn reduce_wide(&self, x: u64) -> u64 {
        let q = ((u128::from(x) * u128::from(self.mu)) >> 64) as u64;
        let r = x - q * self.p;
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Residue of a signed integer.
    pub fn reduce(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    /// `BadPrime` if the activation degree vanishes in this field.
    pub fn check_degree(&self, r: u32) -> Result<()> {
        if u64::from(r) % self.p == 0 {
            Err(Error::BadPrime { p: self.p, r })
        } else {
            Ok(())
        }
    }
}

impl Field for PrimeField {
    type Elem = u64;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }
    #[inline]
    fn one(&self) -> u64 {
        1
    }
    fn from_i64(&self, v: i64) -> u64 {
        self.reduce(v)
    }
    fn from_bigint(&self, v: &BigInt) -> u64 {
        let m = BigInt::from(self.p);
        let r = ((v % &m) + &m) % &m;
        r.try_into().expect("residue fits in u64")
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.reduce_wide(a * b)
    }
    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            return None;
        }
        // extended Euclid on signed 64-bit, p < 2^31
        let (mut t, mut new_t) = (0i64, 1i64);
        let (mut r, mut new_r) = (self.p as i64, *a as i64);
        while new_r != 0 {
            let q = r / new_r;
            (t, new_t) = (new_t, t - q * new_t);
            (r, new_r) = (new_r, r - q * new_r);
        }
        debug_assert_eq!(r, 1);
        Some(t.rem_euclid(self.p as i64) as u64)
    }
    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    #[inline]
    fn mul_add(&self, a: &u64, b: &u64, c: &u64) -> u64 {
        self.reduce_wide(a + b * c)
    }
    fn rank(&self, m: &ExactMatrix<Self>) -> usize {
        super::matrix::prime_rank(self, m)
    }
    fn label(&self) -> FieldLabel {
        FieldLabel::Prime { p: self.p }
    }
}

/// The rational numbers with arbitrary precision.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_bigint(&self, v: &BigInt) -> BigRational {
        BigRational::from_integer(v.clone())
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn rank(&self, m: &ExactMatrix<Self>) -> usize {
        super::bareiss::rational_rank(m)
    }
    fn label(&self) -> FieldLabel {
        FieldLabel::Rational
    }
}

/// Integer value of a rational with unit denominator.
pub fn rational_to_integer(q: &BigRational) -> Option<BigInt> {
    if q.denom().abs().is_one() {
        Some(q.numer() * q.denom().signum())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_rejects_composites_and_range() {
        assert!(PrimeField::new(1_048_573).is_err()); // below 2^20
        assert!(PrimeField::new((1 << 20) + 1).is_err()); // 1048577 = 17 * 61681
        assert!(PrimeField::new(2_147_483_647).is_ok()); // 2^31 - 1
        assert!(PrimeField::new(1 << 31).is_err());
    }

    #[test]
    fn barrett_matches_division() {
        use proptest::prelude::*;
        let primes = [1_048_583u64, 1_048_589, 2_147_483_629, 2_147_483_647];
        proptest!(|(i in 0usize..4, a in any::<u64>(), b in any::<u64>(), c in any::<u64>())| {
            let f = PrimeField::new(primes[i]).unwrap();
            let p = f.modulus();
            let (a, b, c) = (a % p, b % p, c % p);
            prop_assert_eq!(f.mul(&b, &c), b * c % p);
            prop_assert_eq!(f.mul_add(&a, &b, &c), (a + b * c) % p);
        });
        for p in primes {
            let f = PrimeField::new(p).unwrap();
            let m = p - 1;
            assert_eq!(f.mul_add(&m, &m, &m), (m + m * m) % p);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let f = PrimeField::new(1_048_583).unwrap();
        for a in [1u64, 2, 3, 12345, 1_048_582] {
            let ai = f.inv(&a).unwrap();
            assert_eq!(f.mul(&a, &ai), 1);
        }
        assert_eq!(f.inv(&0), None);
    }

    #[test]
    fn signed_reduction() {
        let f = PrimeField::new(1_048_583).unwrap();
        assert_eq!(f.from_i64(-1), 1_048_582);
        assert_eq!(f.from_bigint(&BigInt::from(-1_048_584i64)), 1_048_582);
    }

    #[test]
    fn degree_check() {
        let f = PrimeField::new(1_048_583).unwrap();
        assert!(f.check_degree(2).is_ok());
        assert!(matches!(f.check_degree(1_048_583), Err(Error::BadPrime { .. })));
    }
}
