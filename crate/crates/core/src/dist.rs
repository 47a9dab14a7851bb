//! Exact extended distances: nonnegative rationals plus a top element `inf`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Repr {
    Finite(BigRational),
    Infinite,
}

/// A distance value in `[0, ∞]` with exact rational arithmetic.
///
/// Ordering is total with infinity on top; addition saturates at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtDist(Repr);

impl ExtDist {
    pub fn zero() -> Self {
        ExtDist(Repr::Finite(BigRational::zero()))
    }

    pub fn infinity() -> Self {
        ExtDist(Repr::Infinite)
    }

    pub fn from_integer(n: u64) -> Self {
        ExtDist(Repr::Finite(BigRational::from_integer(BigInt::from(n))))
    }

    /// `p/q`; panics if `q == 0`.
    pub fn ratio(p: u64, q: u64) -> Self {
        assert!(q != 0, "zero denominator");
        ExtDist(Repr::Finite(BigRational::new(
            BigInt::from(p),
            BigInt::from(q),
        )))
    }

    /// Wraps a rational, rejecting negative values.
    pub fn from_rational(r: BigRational) -> Result<Self, Error> {
        if r.is_negative() {
            return Err(Error::Structural(format!("negative distance {r}")));
        }
        Ok(ExtDist(Repr::Finite(r)))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.0, Repr::Infinite)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0, Repr::Finite(r) if r.is_zero())
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.0 {
            Repr::Finite(r) => Some(r),
            Repr::Infinite => None,
        }
    }

    /// Absolute difference `|a - b|` of two finite values; infinite if either is.
    pub fn abs_diff(&self, other: &ExtDist) -> ExtDist {
        match (&self.0, &other.0) {
            (Repr::Finite(a), Repr::Finite(b)) => ExtDist(Repr::Finite((a - b).abs())),
            _ => ExtDist::infinity(),
        }
    }

    /// Half of a finite value, infinity stays infinite.
    pub fn halve(&self) -> ExtDist {
        match &self.0 {
            Repr::Finite(r) => ExtDist(Repr::Finite(r / BigRational::from_integer(2.into()))),
            Repr::Infinite => ExtDist::infinity(),
        }
    }
}

impl Default for ExtDist {
    fn default() -> Self {
        ExtDist::zero()
    }
}

impl Add for &ExtDist {
    type Output = ExtDist;

    fn add(self, rhs: &ExtDist) -> ExtDist {
        match (&self.0, &rhs.0) {
            (Repr::Finite(a), Repr::Finite(b)) => ExtDist(Repr::Finite(a + b)),
            _ => ExtDist::infinity(),
        }
    }
}

impl Add for ExtDist {
    type Output = ExtDist;

    fn add(self, rhs: ExtDist) -> ExtDist {
        &self + &rhs
    }
}

impl fmt::Display for ExtDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Infinite => f.write_str("inf"),
            Repr::Finite(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl FromStr for ExtDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s == "inf" {
            return Ok(ExtDist::infinity());
        }
        let bad = || Error::Structural(format!("malformed distance {s:?}"));
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        ExtDist::from_rational(BigRational::new(num, den))
    }
}

impl Serialize for ExtDist {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExtDist {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Ordering helper for the `≤` checks that dominate validation code.
pub(crate) fn le(a: &ExtDist, b: &ExtDist) -> bool {
    a.cmp(b) != Ordering::Greater
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_are_canonical() {
        for (input, canon) in [
            ("1/2", "1/2"),
            ("2/4", "1/2"),
            ("3", "3"),
            ("6/3", "2"),
            ("inf", "inf"),
            ("0", "0"),
        ] {
            let d: ExtDist = input.parse().unwrap();
            assert_eq!(d.to_string(), canon);
        }
    }

    #[test]
    fn rejects_negative_and_garbage() {
        assert!("-1".parse::<ExtDist>().is_err());
        assert!("1/0".parse::<ExtDist>().is_err());
        assert!("x".parse::<ExtDist>().is_err());
        assert!("-1/-2".parse::<ExtDist>().is_ok());
    }

    #[test]
    fn infinity_is_top_and_absorbs() {
        let inf = ExtDist::infinity();
        let one = ExtDist::from_integer(1);
        assert!(one < inf);
        assert_eq!(&one + &inf, inf);
        assert_eq!(&ExtDist::ratio(1, 3) + &ExtDist::ratio(2, 3), one);
        assert_eq!(std::cmp::max(one.clone(), inf.clone()), inf);
    }
}
