//! Exact rational scalars. Every quantity in the engine is a `Rat`; floats
//! never appear in stored values (the CLI's `--decimal` rendering is applied
//! at print time only).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use crate::error::Error;

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator (maintained by the backing implementation).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_big(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }

    /// `p/q`; errors on `q = 0`.
    pub fn frac(p: i64, q: i64) -> Result<Self, Error> {
        if q == 0 {
            return Err(Error::ParseError {
                position: 0,
                message: "zero denominator".into(),
            });
        }
        Ok(Rat(BigRational::new(BigInt::from(p), BigInt::from(q))))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn recip(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::ParseError {
                position: 0,
                message: "division by zero".into(),
            });
        }
        Ok(Rat(self.0.recip()))
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn to_i64(&self) -> Option<i64> {
        if !self.is_integer() {
            return None;
        }
        self.0.numer().to_i64()
    }

    /// Decimal rendering for display purposes only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Rat::one();
        for _ in 0..e {
            acc *= self.clone();
        }
        acc
    }
}

impl fmt::Display for Rat {
    /// `"p/q"` when the denominator is not 1, plain `"n"` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = |msg: &str| Error::ParseError {
            position: 0,
            message: format!("{msg}: {s:?}"),
        };
        let (num_s, den_s) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s, None),
        };
        let num = BigInt::from_str(num_s).map_err(|_| bad("malformed rational"))?;
        match den_s {
            None => Ok(Rat(BigRational::from_integer(num))),
            Some(d) => {
                let den = BigInt::from_str(d).map_err(|_| bad("malformed rational"))?;
                if den.is_zero() {
                    return Err(bad("zero denominator"));
                }
                Ok(Rat(BigRational::new(num, den)))
            }
        }
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rat(self.0 / rhs.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl AddAssign for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        self.0 -= rhs.0;
    }
}

impl MulAssign for Rat {
    fn mul_assign(&mut self, rhs: Rat) {
        self.0 *= rhs.0;
    }
}

impl serde::Serialize for Rat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Rat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Binomial coefficient as an exact rational (zero for `k > n`).
pub fn binomial(n: u64, k: u64) -> Rat {
    if k > n {
        return Rat::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= BigInt::from(n - i);
        acc /= BigInt::from(i + 1);
    }
    Rat::from_big(acc)
}

/// `1/n!`.
pub fn inv_factorial(n: u64) -> Rat {
    let mut acc = BigInt::one();
    for i in 1..=n {
        acc *= BigInt::from(i);
    }
    Rat::one() / Rat::from_big(acc)
}

/// Bernoulli numbers `B_0..=B_n` (convention `B_1 = -1/2`), from the
/// recurrence `sum_{j<=m} C(m+1,j) B_j = 0`.
pub fn bernoulli(n: usize) -> Vec<Rat> {
    let mut b: Vec<Rat> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(Rat::one());
            continue;
        }
        let mut acc = Rat::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += &binomial(m as u64 + 1, j as u64) * bj;
        }
        let coeff = binomial(m as u64 + 1, m as u64); // m+1
        b.push(-acc / coeff);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(r("3/4").to_string(), "3/4");
        assert_eq!(r("-6/4").to_string(), "-3/2");
        assert_eq!(r("7").to_string(), "7");
        assert_eq!(r("-0").to_string(), "0");
        assert!("1/0".parse::<Rat>().is_err());
        assert!("x".parse::<Rat>().is_err());
    }

    #[test]
    fn arithmetic() {
        assert_eq!(r("1/2") + r("1/3"), r("5/6"));
        assert_eq!(r("1/2") * r("2/3"), r("1/3"));
        assert_eq!(r("1") / r("4"), r("1/4"));
        assert_eq!(-r("2/5"), r("-2/5"));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(9, 2), Rat::from_int(36));
        assert_eq!(binomial(4, 7), Rat::zero());
        assert_eq!(binomial(66, 2), Rat::from_int(2145));
    }

    #[test]
    fn bernoulli_low_values() {
        let b = bernoulli(8);
        assert_eq!(b[0], Rat::one());
        assert_eq!(b[1], r("-1/2"));
        assert_eq!(b[2], r("1/6"));
        assert_eq!(b[3], Rat::zero());
        assert_eq!(b[4], r("-1/30"));
        assert_eq!(b[6], r("1/42"));
        assert_eq!(b[8], r("-1/30"));
    }
}
