//! Coefficient fields: a prime field `F_p` and the rationals.
//!
//! Elements carry no context; all arithmetic goes through a field handle so
//! the prime can be chosen at runtime.

use alloc::format;
use alloc::string::String;
use core::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Default characteristic, the usual computer-algebra choice.
pub const DEFAULT_PRIME: u32 = 32003;

pub trait Field: Clone + Debug + PartialEq + Send + Sync {
    type Elem: Clone + PartialEq + Eq + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; division by zero is an error.
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;
    /// 0 for the rationals.
    fn characteristic(&self) -> u64;
    /// Human/JSON representation. Prime field elements use the symmetric
    /// residue so that `-1` prints as `-1`.
    fn render(&self, a: &Self::Elem) -> String;

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    /// `acc <- acc + c * b`
    fn mul_add_assign(&self, acc: &mut Self::Elem, c: &Self::Elem, b: &Self::Elem) {
        *acc = self.add(acc, &self.mul(c, b));
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    fn pow(&self, a: &Self::Elem, mut e: u32) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        if p < 2 || p >= (1 << 31) || !is_prime(p) {
            return Err(Error::NotPrime(p as u64));
        }
        Ok(Self { p })
    }

    pub fn prime(&self) -> u32 {
        self.p
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        Self { p: DEFAULT_PRIME }
    }
}

fn is_prime(p: u32) -> bool {
    if p < 4 {
        return p >= 2;
    }
    if p % 2 == 0 {
        return false;
    }
    let mut d = 3u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl Field for PrimeField {
    type Elem = u32;

    #[inline]
    fn zero(&self) -> u32 {
        0
    }
    #[inline]
    fn one(&self) -> u32 {
        1
    }
    fn from_i64(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }
    #[inline]
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    #[inline]
    fn add(&self, a: &u32, b: &u32) -> u32 {
        let s = *a + *b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        if *a >= *b {
            *a - *b
        } else {
            *a + self.p - *b
        }
    }
    #[inline]
    fn neg(&self, a: &u32) -> u32 {
        if *a == 0 {
            0
        } else {
            self.p - *a
        }
    }
    #[inline]
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 * *b as u64) % self.p as u64) as u32
    }
    fn inv(&self, a: &u32) -> Result<u32> {
        if *a == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.p - 2))
    }
    fn characteristic(&self) -> u64 {
        self.p as u64
    }
    fn render(&self, a: &u32) -> String {
        if *a > self.p / 2 {
            format!("-{}", self.p - *a)
        } else {
            format!("{}", a)
        }
    }
    #[inline]
    fn mul_add_assign(&self, acc: &mut u32, c: &u32, b: &u32) {
        *acc = ((*acc as u64 + *c as u64 * *b as u64) % self.p as u64) as u32;
    }
}

/// Exact rational arithmetic; slow, for cross-checking prime-field runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
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
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> Result<BigRational> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(a.recip())
    }
    fn characteristic(&self) -> u64 {
        0
    }
    fn render(&self, a: &BigRational) -> String {
        if a.is_integer() {
            format!("{}", a.numer())
        } else {
            let sign = if a.is_negative() { "-" } else { "" };
            format!("{}{}/{}", sign, a.numer().abs(), a.denom())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_arithmetic() {
        let f = PrimeField::new(5).unwrap();
        assert_eq!(f.add(&3, &4), 2);
        assert_eq!(f.sub(&1, &3), 3);
        assert_eq!(f.mul(&3, &4), 2);
        assert_eq!(f.inv(&2).unwrap(), 3);
        assert_eq!(f.from_i64(-1), 4);
        assert_eq!(f.render(&4), "-1");
        assert!(matches!(f.inv(&0), Err(Error::DivisionByZero)));
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(PrimeField::new(32004).is_err());
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(2).is_ok());
        assert_eq!(PrimeField::default().prime(), 32003);
    }

    #[test]
    fn rationals_exact() {
        let q = Rationals;
        let half = q.inv(&q.from_i64(2)).unwrap();
        assert_eq!(q.add(&half, &half), q.one());
        assert_eq!(q.render(&q.neg(&half)), "-1/2");
        assert!(q.inv(&q.zero()).is_err());
    }
}
