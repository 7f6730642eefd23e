//! Places of the two supported global fields: rational primes and the real
//! place of Q, monic irreducibles and the degree place of F_q(t).

use crate::fq::FqPoly;
use crate::rat::{is_prime_u64, ArithError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Place {
    /// A finite rational prime.
    Prime(u64),
    /// The archimedean place of Q.
    RealInfinity,
    /// A monic irreducible of F_q[t] (coefficients low-to-high).
    FfPrime(FqPoly),
    /// The degree place of F_q(t), uniformizer 1/t.
    FfInfinity,
}

impl Place {
    pub fn prime(p: u64) -> Result<Self, ArithError> {
        if !is_prime_u64(p) {
            return Err(ArithError::BadLiteral(format!("{p} is not prime")));
        }
        Ok(Place::Prime(p))
    }

    pub fn is_finite_q(&self) -> bool {
        matches!(self, Place::Prime(_))
    }
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "{p}"),
            Place::RealInfinity => write!(f, "inf"),
            Place::FfPrime(pi) => write!(f, "ff:{pi:?}"),
            Place::FfInfinity => write!(f, "ff:inf"),
        }
    }
}
