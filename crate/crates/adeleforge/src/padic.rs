//! Finite-precision p-adic numbers: valuation plus a unit residue at an
//! explicit precision. Precision is never silently extended; operations that
//! would need more digits than stored fail instead.

use crate::rat::{mod_inv_big, residue_mod, val_unit, ArithError, Rat};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

/// The coset p^val · unit · (1 + p^prec Z_p); equivalently the value is known
/// modulo p^(val+prec). Invariants: 1 <= unit < p^prec, gcd(unit, p) = 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdicApprox {
    p: u64,
    val: i64,
    unit: BigUint,
    prec: u32,
}

fn pow_u(p: u64, k: u32) -> BigUint {
    BigUint::from(p).pow(k)
}

impl PAdicApprox {
    pub fn new(p: u64, val: i64, unit: BigUint, prec: u32) -> Self {
        assert!(prec >= 1, "precision must be at least 1");
        let m = pow_u(p, prec);
        let unit = unit % &m;
        assert!(!unit.is_zero() && (&unit % p) != BigUint::ZERO, "unit must be prime to p");
        PAdicApprox { p, val, unit, prec }
    }

    /// Embed a nonzero rational at precision k.
    pub fn from_rational(x: &Rat, p: u64, k: u32) -> Result<Self, ArithError> {
        if x.is_zero() {
            return Err(ArithError::ZeroInput);
        }
        assert!(k >= 1);
        let (val, u) = val_unit(x, p)?;
        let unit = residue_mod(&u, &pow_u(p, k))?;
        Ok(PAdicApprox { p, val, unit, prec: k })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }
    pub fn valuation(&self) -> i64 {
        self.val
    }
    pub fn unit_residue(&self) -> &BigUint {
        &self.unit
    }
    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Unit residue truncated to modulus p^e, e <= stored precision.
    pub fn residue(&self, e: u32) -> Result<BigUint, ArithError> {
        if e > self.prec {
            return Err(ArithError::PrecisionExceeded { wanted: e, have: self.prec });
        }
        Ok(&self.unit % pow_u(self.p, e))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ArithError> {
        if self.p != other.p {
            return Err(ArithError::PrimeMismatch);
        }
        let prec = self.prec.min(other.prec);
        let m = pow_u(self.p, prec);
        Ok(PAdicApprox {
            p: self.p,
            val: self.val + other.val,
            unit: (&self.unit * &other.unit) % m,
            prec,
        })
    }

    pub fn inv(&self) -> Self {
        let m = pow_u(self.p, self.prec);
        let inv = mod_inv_big(&BigInt::from(self.unit.clone()), &m)
            .expect("unit is invertible by construction")
            .magnitude()
            .clone();
        PAdicApprox { p: self.p, val: -self.val, unit: inv, prec: self.prec }
    }

    pub fn div(&self, other: &Self) -> Result<Self, ArithError> {
        self.mul(&other.inv())
    }

    /// Multiply by an exact nonzero rational; precision is preserved.
    pub fn mul_exact(&self, c: &Rat) -> Result<Self, ArithError> {
        if c.is_zero() {
            return Err(ArithError::ZeroInput);
        }
        let (cv, cu) = val_unit(c, self.p)?;
        let m = pow_u(self.p, self.prec);
        let cr = residue_mod(&cu, &m)?;
        Ok(PAdicApprox {
            p: self.p,
            val: self.val + cv,
            unit: (&self.unit * cr) % m,
            prec: self.prec,
        })
    }

    /// Subtract an exact rational. The input is known modulo p^(val+prec);
    /// the difference inherits exactly that additive precision. Fails when
    /// every stored digit of the difference vanishes.
    pub fn sub_exact(&self, r: &Rat) -> Result<Self, ArithError> {
        let p = self.p;
        let known = self.val + self.prec as i64;
        if r.is_zero() {
            return Ok(self.clone());
        }
        let (rv, _) = val_unit(r, p)?;
        // Representative of the class, as an exact rational.
        let rep = Rat::new(BigInt::from(self.unit.clone()), BigInt::one())
            * pow_rat(p, self.val)
            - r;
        if rep.is_zero() {
            return Err(ArithError::InsufficientPrecision);
        }
        let (wv, wu) = val_unit(&rep, p)?;
        if wv >= known {
            // All digits we know cancel; cannot certify valuation or residue.
            return Err(ArithError::InsufficientPrecision);
        }
        let prec = (known - wv) as u32;
        let unit = residue_mod(&wu, &pow_u(p, prec))?;
        let _ = rv;
        Ok(PAdicApprox { p, val: wv, unit, prec })
    }

    /// A rational representative of the stored class.
    pub fn representative(&self) -> Rat {
        Rat::new(BigInt::from(self.unit.clone()), BigInt::one()) * pow_rat(self.p, self.val)
    }

    /// Whether the exact rational q lies in the stored class.
    pub fn contains(&self, q: &Rat) -> bool {
        if q.is_zero() {
            return false;
        }
        let (v, u) = val_unit(q, self.p).expect("nonzero");
        if v != self.val {
            return false;
        }
        match residue_mod(&u, &pow_u(self.p, self.prec)) {
            Ok(r) => r == self.unit,
            Err(_) => false,
        }
    }
}

fn pow_rat(p: u64, e: i64) -> Rat {
    let pe = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rat::from_integer(pe)
    } else {
        Rat::new(BigInt::one(), pe)
    }
}

/// Sign of a real component, with an optional certifying interval.
#[derive(Debug, Clone, PartialEq, Eq, Copy)]
pub enum RealSign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealDatum {
    pub sign: RealSign,
    pub interval: Option<(Rat, Rat)>,
}

impl RealDatum {
    pub fn new(sign: RealSign, interval: Option<(Rat, Rat)>) -> Result<Self, ArithError> {
        if let Some((lo, hi)) = &interval {
            let ok = match sign {
                RealSign::Positive => lo.is_positive() && hi.is_positive() && lo <= hi,
                RealSign::Negative => lo.is_negative() && hi.is_negative() && lo <= hi,
            };
            if !ok {
                return Err(ArithError::UnknownSign);
            }
        }
        Ok(RealDatum { sign, interval })
    }

    pub fn of_sign(sign: RealSign) -> Self {
        RealDatum { sign, interval: None }
    }
}

pub fn sign_of(r: &Rat) -> RealSign {
    if r.is_negative() {
        RealSign::Negative
    } else {
        RealSign::Positive
    }
}

/// A local field element at finite precision: exact rationals keep full
/// information, approximations carry explicit precision, real data a sign.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalValue {
    Exact(Rat),
    Approx(PAdicApprox),
    Real(RealDatum),
}

impl LocalValue {
    pub fn exact(r: Rat) -> Result<Self, ArithError> {
        if r.is_zero() {
            return Err(ArithError::ZeroInput);
        }
        Ok(LocalValue::Exact(r))
    }

    pub fn valuation_at(&self, p: u64) -> Result<i64, ArithError> {
        match self {
            LocalValue::Exact(r) => Ok(val_unit(r, p)?.0),
            LocalValue::Approx(a) => {
                if a.prime() != p {
                    Err(ArithError::PrimeMismatch)
                } else {
                    Ok(a.valuation())
                }
            }
            LocalValue::Real(_) => Err(ArithError::PrimeMismatch),
        }
    }

    /// Residue of the unit part modulo p^e.
    pub fn unit_residue_at(&self, p: u64, e: u32) -> Result<BigUint, ArithError> {
        match self {
            LocalValue::Exact(r) => {
                let (_, u) = val_unit(r, p)?;
                residue_mod(&u, &pow_u(p, e))
            }
            LocalValue::Approx(a) => {
                if a.prime() != p {
                    return Err(ArithError::PrimeMismatch);
                }
                a.residue(e)
            }
            LocalValue::Real(_) => Err(ArithError::PrimeMismatch),
        }
    }

    pub fn real_sign(&self) -> Result<RealSign, ArithError> {
        match self {
            LocalValue::Exact(r) => Ok(sign_of(r)),
            LocalValue::Real(d) => Ok(d.sign),
            LocalValue::Approx(_) => Err(ArithError::UnknownSign),
        }
    }
}

impl std::fmt::Display for PAdicApprox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}^{} * ({} mod {}^{})",
            self.p, self.val, self.unit, self.p, self.prec
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i64};
    use num_traits::ToPrimitive;

    #[test]
    fn embed_examples() {
        let a = PAdicApprox::from_rational(&rat_i64(3), 2, 3).unwrap();
        assert_eq!((a.valuation(), a.unit_residue().to_u64().unwrap()), (0, 3));
        let b = PAdicApprox::from_rational(&rat(1, 2), 2, 3).unwrap();
        assert_eq!((b.valuation(), b.unit_residue().to_u64().unwrap()), (-1, 1));
        let c = PAdicApprox::from_rational(&rat_i64(-1), 5, 2).unwrap();
        assert_eq!((c.valuation(), c.unit_residue().to_u64().unwrap()), (0, 24));
    }

    #[test]
    fn mul_inv_residue_examples() {
        let x = PAdicApprox::new(2, 1, BigUint::from(3u32), 3);
        let y = PAdicApprox::new(2, 0, BigUint::from(5u32), 3);
        let z = x.mul(&y).unwrap();
        assert_eq!((z.valuation(), z.unit_residue().to_u64().unwrap()), (1, 7));

        let w = PAdicApprox::new(2, 2, BigUint::from(3u32), 3);
        let wi = w.inv();
        assert_eq!((wi.valuation(), wi.unit_residue().to_u64().unwrap()), (-2, 3));

        let r = PAdicApprox::new(2, 0, BigUint::from(7u32), 3);
        assert_eq!(r.residue(2).unwrap().to_u64().unwrap(), 3);
        assert!(matches!(r.residue(4), Err(ArithError::PrecisionExceeded { .. })));
    }

    #[test]
    fn prime_mismatch() {
        let x = PAdicApprox::new(2, 0, BigUint::from(3u32), 3);
        let y = PAdicApprox::new(3, 0, BigUint::from(2u32), 3);
        assert_eq!(x.mul(&y), Err(ArithError::PrimeMismatch));
    }

    #[test]
    fn embed_then_residue_matches_modular_reduction() {
        for n in [3i64, 7, 11, 25, -9, 123] {
            let a = PAdicApprox::from_rational(&rat_i64(n), 5, 4).unwrap();
            if n % 5 != 0 {
                let r = a.residue(2).unwrap().to_i64().unwrap();
                assert_eq!(r, n.rem_euclid(25));
            }
        }
    }

    #[test]
    fn subtract_exact_tracks_precision() {
        // t = 3 mod 5^2 (val 0, prec 2): t - 1 = 2 mod 25, full precision kept.
        let t = PAdicApprox::from_rational(&rat_i64(3), 5, 2).unwrap();
        let d = t.sub_exact(&rat_i64(1)).unwrap();
        assert_eq!(d.valuation(), 0);
        assert_eq!(d.residue(2).unwrap().to_u64().unwrap(), 2);

        // t = 1 mod p at precision 1: t - 1 has no certified digits.
        let t = PAdicApprox::new(7, 0, BigUint::from(1u32), 1);
        assert_eq!(t.sub_exact(&rat_i64(1)), Err(ArithError::InsufficientPrecision));

        // t = 6 mod 7 at precision 1: t - (-1) = t + 1 vanishes mod 7.
        let t = PAdicApprox::new(7, 0, BigUint::from(6u32), 1);
        assert_eq!(t.sub_exact(&rat_i64(-1)), Err(ArithError::InsufficientPrecision));

        // Valuation drop within precision: t = 8 mod 16 (prec 4, val 0... 8 is even)
        // use val 0 unit 9 prec 3 at p=2: t - 1 = 8 mod 16: val 3, prec dropped to 0 -> error
        let t = PAdicApprox::new(2, 0, BigUint::from(1u32) + BigUint::from(8u32), 3);
        assert!(t.sub_exact(&rat_i64(1)).is_err());
    }

    #[test]
    fn class_membership() {
        let t = PAdicApprox::from_rational(&rat(3, 2), 5, 2).unwrap();
        assert!(t.contains(&rat(3, 2)));
        assert!(t.contains(&rat(3 + 2 * 25, 2)));
        assert!(!t.contains(&rat(5, 2)));
    }
}
