//! Scalar abstraction for the exact arithmetic in this crate.
//!
//! Everything downstream is computed either over the rationals (with
//! arbitrary-precision integers) or over a prime field used for modular
//! nonvanishing certificates. The two are unified behind the [`Scalar`]
//! trait so that evaluators can be written once and instantiated with
//! either arithmetic.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::Rat;

/// Commutative-ring operations, as a bound alias in the num-traits style.
pub trait Ring:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + PartialEq
        + Debug
        + Zero
        + One
        + Neg<Output = Self>
        + Add<Output = Self>
        + Sub<Output = Self>
        + Mul<Output = Self>
{
}

/// A field scalar that rational data can be mapped into.
pub trait Scalar: Ring {
    /// Embeds a machine integer.
    fn from_i64(v: i64) -> Self;

    /// Embeds `num/den`. Returns `None` when the denominator is not
    /// invertible (a prime field hit a denominator divisible by `p`).
    fn from_ratio(num: &BigInt, den: &BigInt) -> Option<Self>;

    /// Multiplicative inverse; `None` for zero.
    fn inv(&self) -> Option<Self>;
}

impl Scalar for Rat {
    fn from_i64(v: i64) -> Self {
        Rat::from(BigInt::from(v))
    }

    fn from_ratio(num: &BigInt, den: &BigInt) -> Option<Self> {
        if den.is_zero() {
            None
        } else {
            Some(Rat::new(num.clone(), den.clone()))
        }
    }

    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
}

/// Element of the prime field `Z/p` for a word-sized prime `p`.
///
/// Each element carries its modulus; mixing moduli is a logic error and
/// panics. The primes in use are below 2^40, so products fit in u128.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Fp {
    value: u64,
    modulus: u64,
}

impl Fp {
    pub fn new(value: i64, modulus: u64) -> Self {
        let v = value.rem_euclid(modulus as i64) as u64;
        Fp { value: v, modulus }
    }

    pub fn from_u64(value: u64, modulus: u64) -> Self {
        Fp { value: value % modulus, modulus }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    // Zero/One literals carry modulus 0 and adopt the other operand's.
    fn unify(self, other: Self) -> u64 {
        match (self.modulus, other.modulus) {
            (0, m) | (m, 0) => m,
            (a, b) => {
                assert_eq!(a, b, "mixed moduli in prime-field arithmetic");
                a
            }
        }
    }

    fn reduce_bigint(v: &BigInt, p: u64) -> u64 {
        let m = BigInt::from(p);
        let r = v.mod_floor(&m);
        // r in [0, p), fits in u64
        let (_, digits) = r.to_u64_digits();
        digits.first().copied().unwrap_or(0)
    }

    pub fn from_bigint(v: &BigInt, p: u64) -> Self {
        Fp { value: Self::reduce_bigint(v, p), modulus: p }
    }

    fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp { value: 1 % self.modulus, modulus: self.modulus };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        let p = self.unify(rhs);
        if p == 0 {
            return Fp { value: self.value + rhs.value, modulus: 0 };
        }
        let mut v = self.value % p + rhs.value % p;
        if v >= p {
            v -= p;
        }
        Fp { value: v, modulus: p }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        let p = self.unify(rhs);
        assert!(p != 0 || rhs.value == 0, "cannot subtract a bare literal");
        if p == 0 {
            return Fp { value: self.value, modulus: 0 };
        }
        let (a, b) = (self.value % p, rhs.value % p);
        let v = if a >= b { a - b } else { a + p - b };
        Fp { value: v, modulus: p }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        let p = self.unify(rhs);
        if p == 0 {
            return Fp { value: self.value * rhs.value, modulus: 0 };
        }
        let v = ((self.value % p) as u128 * (rhs.value % p) as u128 % p as u128) as u64;
        Fp { value: v, modulus: p }
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.value == 0 {
            self
        } else {
            assert!(self.modulus != 0, "cannot negate a bare literal");
            Fp { value: self.modulus - self.value, modulus: self.modulus }
        }
    }
}

// Zero/One need a modulus to be meaningful; a modulus of 0 marks the
// neutral literal, which adopts the other operand's modulus on use.
impl Zero for Fp {
    fn zero() -> Self {
        Fp { value: 0, modulus: 0 }
    }
    fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl One for Fp {
    fn one() -> Self {
        Fp { value: 1, modulus: 0 }
    }
}

impl Scalar for Fp {
    fn from_i64(_v: i64) -> Self {
        // Fp literals need a modulus; use Fp::new with an explicit prime.
        panic!("Fp::from_i64 requires a modulus; use Fp::new")
    }

    fn from_ratio(_num: &BigInt, _den: &BigInt) -> Option<Self> {
        panic!("Fp::from_ratio requires a modulus; use fp_from_ratio")
    }

    fn inv(&self) -> Option<Self> {
        if self.value == 0 {
            None
        } else {
            // Fermat: p prime
            Some(self.pow(self.modulus - 2))
        }
    }
}

/// Maps `num/den` into `Z/p`; `None` when `p | den`.
pub fn fp_from_ratio(num: &BigInt, den: &BigInt, p: u64) -> Option<Fp> {
    let d = Fp::from_bigint(den, p);
    let dinv = d.inv()?;
    Some(Fp::from_bigint(num, p) * dinv)
}

/// Deterministic Miller-Rabin primality test, exact for u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut acc = 1u64;
        a %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, a);
            }
            a = mulmod(a, a);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime >= n.
pub fn next_prime(mut n: u64) -> u64 {
    if n <= 2 {
        return 2;
    }
    if n % 2 == 0 {
        n += 1;
    }
    while !is_prime_u64(n) {
        n += 2;
    }
    n
}

/// Reduces a rational to a canonical integer pair (num, den) with den > 0.
pub fn rat_parts(r: &Rat) -> (BigInt, BigInt) {
    let mut num = r.numer().clone();
    let mut den = r.denom().clone();
    if den.is_negative() {
        num = -num;
        den = -den;
    }
    (num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fp_field_ops() {
        let p = 2147483659u64; // first prime above 2^31
        assert!(is_prime_u64(p));
        let a = Fp::new(-5, p);
        let b = Fp::new(7, p);
        assert_eq!((a + b).value(), 2);
        assert_eq!((a * b).value(), p - 35);
        let inv = b.inv().unwrap();
        assert_eq!((b * inv).value(), 1);
    }

    #[test]
    fn prime_search() {
        assert_eq!(next_prime(2147483648), 2147483659);
        assert!(is_prime_u64(next_prime(1 << 40)));
    }

    #[test]
    fn ratio_embedding() {
        let p = 101u64;
        let v = fp_from_ratio(&BigInt::from(3), &BigInt::from(4), p).unwrap();
        let four = Fp::new(4, p);
        assert_eq!((v * four).value(), 3);
        // denominator divisible by p is rejected
        assert!(fp_from_ratio(&BigInt::from(1), &BigInt::from(202), p).is_none());
    }
}
