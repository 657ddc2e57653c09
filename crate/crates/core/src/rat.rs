//! 2-local rational numbers.
//!
//! All integral coefficient arithmetic happens in the localization of the
//! integers at 2: rationals whose denominator (in lowest terms) is odd.
//! The 2-adic valuation of such a number is the valuation of its numerator
//! and is always non-negative, which is what makes the filtration-by-powers
//! of the augmentation ideal well defined.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

/// A rational number with odd denominator, kept in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalRational(BigRational);

impl LocalRational {
    /// Normalize `numer/denom` and check 2-locality.
    ///
    /// `4/3` is accepted as-is; `8/6` reduces to `4/3` and is accepted;
    /// `6/4` reduces to `3/2` and is rejected.
    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::Other("zero denominator".into()));
        }
        Self::from_rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    /// Wrap an arbitrary rational, checking that its reduced denominator is odd.
    pub fn from_rational(r: BigRational) -> Result<Self> {
        // BigRational::new already reduces to lowest terms with positive denominator.
        if r.denom().abs() % BigInt::from(2) == BigInt::zero() {
            Err(Error::EvenDenominator(format!("{r} is not 2-local")))
        } else {
            Ok(LocalRational(r))
        }
    }

    pub fn from_int(n: i64) -> Self {
        LocalRational(BigRational::from(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        LocalRational(BigRational::zero())
    }

    pub fn one() -> Self {
        LocalRational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }

    /// 2-adic valuation. `None` for zero (valuation is +infinity).
    /// Since the denominator is odd, this is the valuation of the numerator
    /// and is non-negative.
    pub fn nu2(&self) -> Option<u32> {
        nu2_rational(&self.0).map(|v| {
            debug_assert!(v >= 0);
            v as u32
        })
    }

    /// True if the value is a unit in the 2-local integers (odd/odd).
    pub fn is_unit(&self) -> bool {
        self.nu2() == Some(0)
    }
}

impl std::fmt::Display for LocalRational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 2-adic valuation of an arbitrary rational: nu2(numer) - nu2(denom).
/// `None` for zero.
pub fn nu2_rational(r: &BigRational) -> Option<i64> {
    if r.is_zero() {
        return None;
    }
    Some(nu2_bigint(r.numer()) - nu2_bigint(r.denom()))
}

/// 2-adic valuation of a nonzero integer.
pub fn nu2_bigint(n: &BigInt) -> i64 {
    debug_assert!(!n.is_zero());
    let (_, digits) = n.to_u64_digits();
    let mut v = 0i64;
    for d in digits {
        if d == 0 {
            v += 64;
        } else {
            v += d.trailing_zeros() as i64;
            break;
        }
    }
    v
}

/// True if the reduced denominator of `r` is odd.
pub fn is_two_local(r: &BigRational) -> bool {
    r.denom().abs() % BigInt::from(2) != BigInt::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        // Already reduced, odd denominator.
        let a = LocalRational::new(4, 3).unwrap();
        assert_eq!(a.as_rational(), &BigRational::new(4.into(), 3.into()));
        // 6/4 = 3/2: even denominator after reduction.
        assert!(matches!(
            LocalRational::new(6, 4),
            Err(Error::EvenDenominator(_))
        ));
        // 8/6 = 4/3: reduction rescues it.
        let c = LocalRational::new(8, 6).unwrap();
        assert_eq!(c, a);
    }

    #[test]
    fn nu2_comes_from_numerator() {
        assert_eq!(LocalRational::new(4, 3).unwrap().nu2(), Some(2));
        assert_eq!(LocalRational::new(1, 1).unwrap().nu2(), Some(0));
        assert_eq!(LocalRational::new(-12, 5).unwrap().nu2(), Some(2));
        assert_eq!(LocalRational::zero().nu2(), None);
        assert!(LocalRational::new(3, 7).unwrap().is_unit());
        assert!(!LocalRational::new(2, 7).unwrap().is_unit());
    }

    #[test]
    fn nu2_rational_mixed() {
        let r = BigRational::new(3.into(), 8.into());
        assert_eq!(nu2_rational(&r), Some(-3));
        let r = BigRational::new(40.into(), 3.into());
        assert_eq!(nu2_rational(&r), Some(3));
    }
}
