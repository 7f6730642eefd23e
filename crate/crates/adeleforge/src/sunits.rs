//! S-unit groups of Q and F_q(t), bounded enumeration, the generalized unit
//! equation a·u + b·w = 1, and unit groups modulo N-th powers.
//!
//! No effective completeness bounds are implemented: solution sets are
//! enumerated inside an exponent box and reported together with a
//! bound-stability flag (result unchanged when the box grows by 5).

use crate::fq::{poly_is_zero, poly_mul, poly_xpow, FfPlace, FqCtx, FqPoly, RatFn};
use crate::rat::{rat_i64, support, ArithError, Rat};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

/// ±prod p^{e_p} over the finite primes of S.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SUnit {
    pub negative: bool,
    pub exponents: BTreeMap<u64, i64>,
}

impl SUnit {
    pub fn value(&self) -> Rat {
        let mut acc = if self.negative { rat_i64(-1) } else { rat_i64(1) };
        for (&p, &e) in &self.exponents {
            let pr = Rat::from_integer(BigInt::from(p));
            for _ in 0..e.unsigned_abs() {
                if e > 0 {
                    acc *= pr.clone();
                } else {
                    acc /= pr.clone();
                }
            }
        }
        acc
    }
}

/// Is x supported entirely on the primes of S? Returns the exponent vector.
pub fn s_unit_exponents(x: &Rat, s: &[u64]) -> Option<BTreeMap<u64, i64>> {
    let mut exps = BTreeMap::new();
    for (p, e) in support(x) {
        if !s.contains(&p) {
            return None;
        }
        exps.insert(p, e);
    }
    Some(exps)
}

/// All S-units with every exponent in [-bound, bound], in deterministic
/// order: exponent vector lexicographic, positive sign first.
pub fn enumerate(s: &[u64], bound: i64) -> Vec<SUnit> {
    assert!(bound >= 0);
    let mut primes: Vec<u64> = s.to_vec();
    primes.sort_unstable();
    primes.dedup();
    let mut out = Vec::new();
    let k = primes.len();
    let width = (2 * bound + 1) as usize;
    let total = width.pow(k as u32);
    for idx in 0..total {
        let mut exps = BTreeMap::new();
        let mut rem = idx;
        for &p in &primes {
            let e = (rem % width) as i64 - bound;
            rem /= width;
            if e != 0 {
                exps.insert(p, e);
            }
        }
        for negative in [false, true] {
            out.push(SUnit { negative, exponents: exps.clone() });
        }
    }
    out
}

/// Solutions of a·u + b·w = 1 with u, w S-units inside the exponent box,
/// sorted by (u, w), plus the bound-stability flag.
#[derive(Debug, Clone)]
pub struct UnitEquationSolutions {
    pub a: Rat,
    pub b: Rat,
    pub bound: i64,
    pub pairs: Vec<(Rat, Rat)>,
    pub bound_stable: bool,
}

pub fn solve_unit_equation(s: &[u64], bound: i64, a: &Rat, b: &Rat) -> UnitEquationSolutions {
    assert!(!a.is_zero() && !b.is_zero(), "coefficients must be nonzero");
    let solve = |bnd: i64| -> Vec<(Rat, Rat)> {
        let mut pairs = Vec::new();
        for u in enumerate(s, bnd) {
            let uv = u.value();
            let w = (rat_i64(1) - a * uv.clone()) / b;
            if w.is_zero() {
                continue;
            }
            if let Some(exps) = s_unit_exponents(&w, s) {
                if exps.values().all(|e| e.unsigned_abs() <= bnd as u64) {
                    pairs.push((uv, w));
                }
            }
        }
        pairs.sort();
        pairs.dedup();
        pairs
    };
    let pairs = solve(bound);
    let larger = solve(bound + 5);
    let bound_stable = pairs == larger;
    UnitEquationSolutions { a: a.clone(), b: b.clone(), bound, pairs, bound_stable }
}

/// Invariant-factor description of Z_S^x / (Z_S^x)^N with a projection map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitsModNth {
    pub n: u64,
    pub primes: Vec<u64>,
    /// invariant factors d_1 | d_2 | ... (trivial factors omitted)
    pub invariant_factors: Vec<u64>,
}

impl UnitsModNth {
    pub fn order(&self) -> u64 {
        self.invariant_factors.iter().product()
    }

    /// Image of an S-unit: the (sign, exponent mod N, ...) vector aligned
    /// with the invariant factors. None when x is not an S-unit.
    pub fn project(&self, x: &Rat) -> Option<Vec<u64>> {
        let exps = s_unit_exponents(x, &self.primes)?;
        let mut out = Vec::new();
        if self.n % 2 == 0 {
            out.push(if x.is_negative() { 1 } else { 0 });
        }
        for &p in &self.primes {
            let e = exps.get(&p).copied().unwrap_or(0);
            out.push(e.rem_euclid(self.n as i64) as u64);
        }
        Some(out)
    }
}

/// Structure of Z_S^x modulo N-th powers: {±1} contributes Z/2 exactly when
/// N is even, and each finite prime of S contributes Z/N.
pub fn mod_nth_powers(s: &[u64], n: u64) -> UnitsModNth {
    assert!(n >= 2);
    let mut primes: Vec<u64> = s.to_vec();
    primes.sort_unstable();
    primes.dedup();
    let mut invariant_factors = Vec::new();
    if n % 2 == 0 {
        invariant_factors.push(2);
    }
    for _ in &primes {
        invariant_factors.push(n);
    }
    UnitsModNth { n, primes, invariant_factors }
}

// ---------------------------------------------------------------------------
// function-field S-units
// ---------------------------------------------------------------------------

/// c · prod pi^{e} with c in F_q^x; when the degree place is outside S the
/// total degree of the exponent divisor must vanish.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FfSUnit {
    pub constant: u64,
    pub exponents: BTreeMap<FqPoly, i64>,
}

impl FfSUnit {
    pub fn value(&self, ctx: &FqCtx) -> RatFn {
        let mut num: FqPoly = vec![self.constant];
        let mut den: FqPoly = vec![1];
        for (pi, &e) in &self.exponents {
            for _ in 0..e.unsigned_abs() {
                if e > 0 {
                    num = poly_mul(ctx, &num, pi);
                } else {
                    den = poly_mul(ctx, &den, pi);
                }
            }
        }
        RatFn::new(ctx, num, den).expect("nonzero by construction")
    }
}

fn ff_finite_places(s: &[FfPlace]) -> Vec<FqPoly> {
    let mut ps: Vec<FqPoly> = s
        .iter()
        .filter_map(|p| match p {
            FfPlace::Finite(pi) => Some(pi.clone()),
            FfPlace::Infinity => None,
        })
        .collect();
    ps.sort();
    ps.dedup();
    ps
}

/// Bounded enumeration of S-units of F_q(t) in deterministic order.
pub fn ff_enumerate(ctx: &FqCtx, s: &[FfPlace], bound: i64) -> Vec<FfSUnit> {
    assert!(bound >= 0);
    let finite = ff_finite_places(s);
    let inf_in_s = s.contains(&FfPlace::Infinity);
    let width = (2 * bound + 1) as usize;
    let total = width.pow(finite.len() as u32);
    let mut out = Vec::new();
    for idx in 0..total {
        let mut exps = BTreeMap::new();
        let mut rem = idx;
        let mut degree = 0i64;
        for pi in &finite {
            let e = (rem % width) as i64 - bound;
            rem /= width;
            if e != 0 {
                degree += e * (pi.len() as i64 - 1);
                exps.insert(pi.clone(), e);
            }
        }
        if !inf_in_s && degree != 0 {
            continue;
        }
        for c in 1..ctx.q {
            out.push(FfSUnit { constant: c, exponents: exps.clone() });
        }
    }
    out
}

/// Is x an S-unit? Exponent vector over the finite places of S; the degree
/// place absorbs any leftover degree only when it belongs to S. Divides out
/// the S-places directly rather than factoring x.
pub fn ff_s_unit_exponents(
    ctx: &FqCtx,
    x: &RatFn,
    s: &[FfPlace],
) -> Option<BTreeMap<FqPoly, i64>> {
    use crate::fq::{ff_val_unit, poly_deg, poly_divrem};
    let inf_in_s = s.contains(&FfPlace::Infinity);
    let finite = ff_finite_places(s);
    let mut exps = BTreeMap::new();
    let (mut num, mut den) = (x.num.clone(), x.den.clone());
    for pi in &finite {
        let place = FfPlace::Finite(pi.clone());
        let (v, _) = ff_val_unit(ctx, x, &place).ok()?;
        if v != 0 {
            exps.insert(pi.clone(), v);
        }
        for poly in [&mut num, &mut den] {
            loop {
                let (q, r) = poly_divrem(ctx, poly, pi);
                if r.is_empty() && !q.is_empty() {
                    *poly = q;
                } else {
                    break;
                }
            }
        }
    }
    // what is left must be a unit away from the degree place
    if poly_deg(&num) > 0 || poly_deg(&den) > 0 {
        return None;
    }
    if !inf_in_s && x.degree() != 0 {
        return None;
    }
    Some(exps)
}

#[derive(Debug, Clone)]
pub struct FfUnitEquationSolutions {
    pub bound: i64,
    pub pairs: Vec<(RatFn, RatFn)>,
    pub bound_stable: bool,
    /// In characteristic p the full solution set may be infinite (p-th power
    /// orbits); the enumeration is an exponent-box truncation.
    pub truncated_by_bound: bool,
}

/// Solutions of a·u + b·w = 1 in S-units of F_q(t) inside the exponent box.
pub fn ff_solve_unit_equation(
    ctx: &FqCtx,
    s: &[FfPlace],
    bound: i64,
    a: &RatFn,
    b: &RatFn,
) -> Result<FfUnitEquationSolutions, ArithError> {
    let solve = |bnd: i64| -> Vec<(RatFn, RatFn)> {
        let mut pairs = Vec::new();
        for u in ff_enumerate(ctx, s, bnd) {
            let uv = u.value(ctx);
            // w = (1 - a*u) / b
            let au = a.mul(ctx, &uv);
            let one = RatFn::one();
            let num = match one.sub(ctx, &au) {
                Ok(v) => v,
                Err(_) => continue, // a*u = 1, w would vanish
            };
            let w = num.mul(ctx, &b.inv(ctx));
            if let Some(exps) = ff_s_unit_exponents(ctx, &w, s) {
                if exps.values().all(|e| e.unsigned_abs() <= bnd as u64) {
                    pairs.push((uv, w));
                }
            }
        }
        pairs.sort_by(|x, y| {
            (&x.0.num, &x.0.den, &x.1.num, &x.1.den).cmp(&(&y.0.num, &y.0.den, &y.1.num, &y.1.den))
        });
        pairs.dedup();
        pairs
    };
    if poly_is_zero(&a.num) || poly_is_zero(&b.num) {
        return Err(ArithError::ZeroInput);
    }
    let pairs = solve(bound);
    let larger = solve(bound + 5);
    let bound_stable = pairs == larger;
    Ok(FfUnitEquationSolutions { bound, pairs, bound_stable, truncated_by_bound: !bound_stable })
}

/// x^p for the Frobenius-closure checks.
pub fn ff_frobenius(ctx: &FqCtx, x: &RatFn) -> RatFn {
    x.pow(ctx, ctx.p as i64)
}

/// Convenience: the rational function t.
pub fn ff_t() -> RatFn {
    RatFn { num: poly_xpow(1), den: vec![1] }
}
