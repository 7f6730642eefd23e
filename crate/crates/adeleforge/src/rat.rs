//! Exact rational arithmetic helpers: p-adic valuations and unit parts,
//! multiplicative height, factorization and small modular utilities.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

#[derive(Debug, thiserror::Error, PartialEq, Eq, Clone)]
pub enum ArithError {
    #[error("zero input where a nonzero value is required")]
    ZeroInput,
    #[error("operands live over different primes")]
    PrimeMismatch,
    #[error("requested residue precision {wanted} exceeds stored precision {have}")]
    PrecisionExceeded { wanted: u32, have: u32 },
    #[error("value indistinguishable from zero at the stored precision")]
    InsufficientPrecision,
    #[error("sign of the archimedean component is not determined")]
    UnknownSign,
    #[error("denominator not invertible modulo {0}")]
    NotInvertible(u64),
    #[error("malformed numeric literal `{0}`")]
    BadLiteral(String),
}

pub fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parse `"a/b"` or `"a"` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, ArithError> {
    let s = s.trim();
    let bad = || ArithError::BadLiteral(s.to_string());
    if let Some((a, b)) = s.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| bad())?;
        let den: BigInt = b.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(Rat::new(num, den))
    } else {
        let num: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Rat::from_integer(num))
    }
}

pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Strip all factors of `p` from `n`, returning the exponent and cofactor.
pub fn int_val(n: &BigInt, p: u64) -> (i64, BigInt) {
    assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut m = n.clone();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, &p);
        if r.is_zero() {
            v += 1;
            m = q;
        } else {
            return (v, m);
        }
    }
}

/// Write a nonzero rational as p^v · u with u a p-adic unit.
pub fn val_unit(x: &Rat, p: u64) -> Result<(i64, Rat), ArithError> {
    if x.is_zero() {
        return Err(ArithError::ZeroInput);
    }
    let (vn, n) = int_val(x.numer(), p);
    let (vd, d) = int_val(x.denom(), p);
    Ok((vn - vd, Rat::new(n, d)))
}

/// Multiplicative height max(|numerator|, denominator) of a reduced rational.
pub fn height(x: &Rat) -> BigUint {
    let n = x.numer().magnitude().clone();
    let d = x.denom().magnitude().clone();
    if n >= d {
        n
    } else {
        d
    }
}

/// Residue of x modulo m, provided the denominator is invertible.
pub fn residue_mod(x: &Rat, m: &BigUint) -> Result<BigUint, ArithError> {
    let mi = BigInt::from_biguint(Sign::Plus, m.clone());
    let num = x.numer().mod_floor_big(&mi);
    let den = x.denom().mod_floor_big(&mi);
    let den_inv = mod_inv_big(&den, m).ok_or_else(|| {
        ArithError::NotInvertible(m.to_u64().unwrap_or(u64::MAX))
    })?;
    Ok((num * den_inv).mod_floor_big(&mi).magnitude().clone())
}

trait ModFloorBig {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt;
}
impl ModFloorBig for BigInt {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt {
        num_integer::Integer::mod_floor(self, m)
    }
}

pub fn mod_inv_big(a: &BigInt, m: &BigUint) -> Option<BigInt> {
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    let e = num_integer::Integer::extended_gcd(a, &m);
    if e.gcd.is_one() {
        Some(num_integer::Integer::mod_floor(&e.x, &m))
    } else {
        None
    }
}

/// Prime factorization of |num| and den as (prime, signed exponent) pairs.
pub fn support(x: &Rat) -> Vec<(u64, i64)> {
    let mut out: Vec<(u64, i64)> = Vec::new();
    let mut push = |p: u64, e: i64| {
        if e != 0 {
            out.push((p, e));
        }
    };
    for (m, sgn) in [(x.numer().magnitude().clone(), 1i64), (x.denom().magnitude().clone(), -1)] {
        for (p, e) in factor_biguint(&m) {
            push(p, sgn * e as i64);
        }
    }
    let mut merged = std::collections::BTreeMap::new();
    for (p, e) in out {
        *merged.entry(p).or_insert(0i64) += e;
    }
    merged.into_iter().filter(|&(_, e)| e != 0).collect()
}

/// Factor a positive big integer by trial division (desk-scale inputs).
pub fn factor_biguint(n: &BigUint) -> Vec<(u64, u32)> {
    assert!(!n.is_zero(), "cannot factor zero");
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut p = 2u64;
    while !n.is_one() {
        let pb = BigUint::from(p);
        if (&pb * &pb) > n {
            let q = n.to_u64().expect("residual factor exceeds u64 range");
            out.push((q, 1));
            break;
        }
        let mut e = 0u32;
        loop {
            let (q, r) = num_integer::Integer::div_rem(&n, &pb);
            if r.is_zero() {
                e += 1;
                n = q;
            } else {
                break;
            }
        }
        if e > 0 {
            out.push((p, e));
        }
        p = if p == 2 { 3 } else { p + 2 };
    }
    out
}

pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    factor_biguint(&BigUint::from(n))
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

pub fn mod_pow_u64(b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mm = m as u128;
    let mut acc = 1u128;
    let mut bb = (b % m) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    acc as u64
}

pub fn mod_inv_u64(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(((t % m as i128 + m as i128) % m as i128) as u64)
}

/// Smallest generator of (Z/p)^* for prime p.
pub fn least_primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors = factor_u64(p - 1);
    'outer: for g in 2..p {
        for &(q, _) in &factors {
            if mod_pow_u64(g, (p - 1) / q, p) == 1 {
                continue 'outer;
            }
        }
        return g;
    }
    unreachable!("no primitive root found for prime {p}");
}

/// Exact product formula: sign(x) · prod p^{v_p(x)} reconstructs x.
pub fn reconstruct_from_valuations(x: &Rat) -> Rat {
    let mut acc = if x.is_negative() { rat_i64(-1) } else { rat_i64(1) };
    for (p, e) in support(x) {
        let pe = Rat::from_integer(BigInt::from(p));
        let mut pw = rat_i64(1);
        for _ in 0..e.unsigned_abs() {
            pw *= pe.clone();
        }
        if e > 0 {
            acc *= pw;
        } else {
            acc /= pw;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn val_unit_examples() {
        assert_eq!(val_unit(&rat_i64(12), 2).unwrap(), (2, rat_i64(3)));
        assert_eq!(val_unit(&rat(1, 6), 3).unwrap(), (-1, rat(1, 2)));
        assert_eq!(val_unit(&rat_i64(-5), 7).unwrap(), (0, rat_i64(-5)));
        assert_eq!(val_unit(&Rat::zero(), 2), Err(ArithError::ZeroInput));
    }

    #[test]
    fn valuation_additivity() {
        let samples = [rat(3, 4), rat(-7, 10), rat_i64(45), rat(1, 49), rat(22, 9)];
        for x in &samples {
            for y in &samples {
                for p in [2u64, 3, 5, 7, 11] {
                    let (vx, _) = val_unit(x, p).unwrap();
                    let (vy, _) = val_unit(y, p).unwrap();
                    let (vxy, _) = val_unit(&(x * y), p).unwrap();
                    assert_eq!(vxy, vx + vy);
                }
            }
        }
    }

    #[test]
    fn product_formula_reconstruction() {
        for x in [rat(3, 4), rat(-75, 8), rat_i64(1), rat_i64(-1), rat(1001, 13)] {
            assert_eq!(reconstruct_from_valuations(&x), x);
        }
    }

    #[test]
    fn residue_of_fraction() {
        // 1/2 mod 9 = 5
        assert_eq!(residue_mod(&rat(1, 2), &BigUint::from(9u32)).unwrap(), BigUint::from(5u32));
        assert!(residue_mod(&rat(1, 3), &BigUint::from(9u32)).is_err());
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(least_primitive_root(7), 3);
        assert_eq!(least_primitive_root(5), 2);
        assert_eq!(least_primitive_root(13), 2);
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_rat("-5").unwrap(), rat_i64(-5));
        assert_eq!(format_rat(&rat(-3, 7)), "-3/7");
        assert!(parse_rat("x").is_err());
    }
}
