//! The group Q/Z in additive notation, with exact reduced representatives.

use crate::rat::{parse_rat, ArithError, Rat};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// A reduced rational r with 0 <= r < 1, addition wrapping modulo 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QmodZ(Rat);

impl QmodZ {
    pub fn zero() -> Self {
        QmodZ(Rat::zero())
    }

    pub fn new(r: Rat) -> Self {
        QmodZ(r.clone() - r.floor())
    }

    /// k/n reduced modulo 1.
    pub fn frac(k: i64, n: u64) -> Self {
        QmodZ::new(Rat::new(BigInt::from(k), BigInt::from(n)))
    }

    pub fn add(&self, other: &Self) -> Self {
        QmodZ::new(&self.0 + &other.0)
    }

    pub fn neg(&self) -> Self {
        QmodZ::new(-self.0.clone())
    }

    pub fn scale(&self, k: i64) -> Self {
        QmodZ::new(&self.0 * Rat::from_integer(BigInt::from(k)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Additive order.
    pub fn order(&self) -> u64 {
        use num_traits::ToPrimitive;
        self.0.denom().to_u64().expect("desk-scale denominators")
    }

    pub fn as_rat(&self) -> &Rat {
        &self.0
    }

    pub fn parse(s: &str) -> Result<Self, ArithError> {
        let r = parse_rat(s)?;
        if r.is_negative() || r >= Rat::from_integer(BigInt::from(1)) {
            return Err(ArithError::BadLiteral(s.to_string()));
        }
        Ok(QmodZ(r))
    }
}

impl std::fmt::Display for QmodZ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", crate::rat::format_rat(&self.0))
    }
}

impl std::iter::Sum for QmodZ {
    fn sum<I: Iterator<Item = QmodZ>>(iter: I) -> Self {
        iter.fold(QmodZ::zero(), |a, b| a.add(&b))
    }
}
