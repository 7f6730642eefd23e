//! Finite fields F_q (q = p^e), polynomials over F_q, and rational functions
//! in one variable. Elements of F_q are encoded as integers in [0, q): the
//! base-p digits are the coefficients of the polynomial representative modulo
//! a fixed defining polynomial. The defining polynomials are shipped as a
//! static table so that certificates are bit-reproducible.

use crate::rat::ArithError;
use std::fmt::Write as _;

/// Defining polynomials for the prime-power fields we ship, coefficients of
/// x^0..x^e (monic). Prime fields need no entry.
const DEFINING_POLYS: &[(u64, &[u64])] = &[
    (4, &[1, 1, 1]),          // x^2 + x + 1 over F_2
    (8, &[1, 1, 0, 1]),       // x^3 + x + 1 over F_2
    (9, &[2, 2, 1]),          // x^2 + 2x + 2 over F_3
    (16, &[1, 1, 0, 0, 1]),   // x^4 + x + 1 over F_2
    (25, &[2, 4, 1]),         // x^2 + 4x + 2 over F_5
    (27, &[1, 2, 0, 1]),      // x^3 + 2x + 1 over F_3
    (49, &[3, 6, 1]),         // x^2 + 6x + 3 over F_7
];

/// Context for arithmetic in F_q. Copyable so values can carry it around.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FqCtx {
    pub p: u64,
    pub e: u32,
    pub q: u64,
    modulus: [u64; 8],
}

impl FqCtx {
    pub fn new(q: u64) -> Result<Self, ArithError> {
        let fs = crate::rat::factor_u64(q);
        if fs.len() != 1 {
            return Err(ArithError::BadLiteral(format!("{q} is not a prime power")));
        }
        let (p, e) = fs[0];
        if e == 1 {
            return Ok(FqCtx { p, e: 1, q, modulus: [0; 8] });
        }
        let entry = DEFINING_POLYS
            .iter()
            .find(|(qq, _)| *qq == q)
            .ok_or_else(|| ArithError::BadLiteral(format!("no defining polynomial shipped for F_{q}")))?;
        let mut modulus = [0u64; 8];
        for (i, &c) in entry.1.iter().enumerate() {
            modulus[i] = c;
        }
        Ok(FqCtx { p, e, q, modulus })
    }

    fn digits(&self, a: u64) -> Vec<u64> {
        let mut a = a;
        let mut out = vec![0; self.e as usize];
        for d in out.iter_mut() {
            *d = a % self.p;
            a /= self.p;
        }
        out
    }

    fn encode(&self, ds: &[u64]) -> u64 {
        let mut acc = 0u64;
        for &d in ds.iter().rev() {
            acc = acc * self.p + d % self.p;
        }
        acc
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.e == 1 {
            return (a + b) % self.p;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let ds: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.encode(&ds)
    }

    pub fn neg(&self, a: u64) -> u64 {
        if self.e == 1 {
            return (self.p - a % self.p) % self.p;
        }
        let ds: Vec<u64> = self.digits(a).iter().map(|x| (self.p - x) % self.p).collect();
        self.encode(&ds)
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.e == 1 {
            return a * b % self.p;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let n = self.e as usize;
        let mut prod = vec![0u64; 2 * n];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        // reduce modulo the defining polynomial (monic of degree e)
        for i in (n..2 * n).rev() {
            let c = prod[i];
            if c != 0 {
                prod[i] = 0;
                for j in 0..n {
                    let m = self.modulus[j];
                    prod[i - n + j] = (prod[i - n + j] + c * (self.p - m % self.p)) % self.p;
                }
            }
        }
        self.encode(&prod[..n])
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64, ArithError> {
        if a == 0 {
            return Err(ArithError::ZeroInput);
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// Fixed multiplicative generator: the least element code generating F_q^*.
    pub fn generator(&self) -> u64 {
        let ord = self.q - 1;
        if ord == 1 {
            return 1;
        }
        let factors = crate::rat::factor_u64(ord);
        'outer: for g in 2..self.q {
            for &(f, _) in &factors {
                if self.pow(g, ord / f) == 1 {
                    continue 'outer;
                }
            }
            return g;
        }
        unreachable!("F_q^* is cyclic");
    }

    /// Discrete log base the fixed generator (brute force; q is small).
    pub fn dlog(&self, a: u64) -> Result<u64, ArithError> {
        if a == 0 {
            return Err(ArithError::ZeroInput);
        }
        let g = self.generator();
        let mut acc = 1u64;
        for k in 0..self.q - 1 {
            if acc == a {
                return Ok(k);
            }
            acc = self.mul(acc, g);
        }
        unreachable!("element outside the multiplicative group");
    }

    pub fn elem_to_string(&self, a: u64) -> String {
        if self.e == 1 {
            return a.to_string();
        }
        let ds = self.digits(a);
        let mut s = String::new();
        let mut first = true;
        for (i, &d) in ds.iter().enumerate().rev() {
            if d == 0 {
                continue;
            }
            if !first {
                s.push('+');
            }
            first = false;
            match i {
                0 => {
                    let _ = write!(s, "{d}");
                }
                1 => {
                    if d != 1 {
                        let _ = write!(s, "{d}*");
                    }
                    s.push('u');
                }
                _ => {
                    if d != 1 {
                        let _ = write!(s, "{d}*");
                    }
                    let _ = write!(s, "u^{i}");
                }
            }
        }
        if first {
            s.push('0');
        }
        s
    }
}

// ---------------------------------------------------------------------------
// polynomials over F_q, coefficient codes low-to-high, no trailing zeros
// ---------------------------------------------------------------------------

pub type FqPoly = Vec<u64>;

pub fn poly_trim(mut a: FqPoly) -> FqPoly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub fn poly_deg(a: &[u64]) -> i64 {
    if a.is_empty() {
        i64::MIN
    } else {
        a.len() as i64 - 1
    }
}

pub fn poly_is_zero(a: &[u64]) -> bool {
    a.is_empty()
}

pub fn poly_add(ctx: &FqCtx, a: &[u64], b: &[u64]) -> FqPoly {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = ctx.add(x, y);
    }
    poly_trim(out)
}

pub fn poly_neg(ctx: &FqCtx, a: &[u64]) -> FqPoly {
    a.iter().map(|&x| ctx.neg(x)).collect()
}

pub fn poly_sub(ctx: &FqCtx, a: &[u64], b: &[u64]) -> FqPoly {
    poly_add(ctx, a, &poly_neg(ctx, b))
}

pub fn poly_mul(ctx: &FqCtx, a: &[u64], b: &[u64]) -> FqPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = ctx.add(out[i + j], ctx.mul(x, y));
        }
    }
    poly_trim(out)
}

pub fn poly_scale(ctx: &FqCtx, a: &[u64], c: u64) -> FqPoly {
    poly_trim(a.iter().map(|&x| ctx.mul(x, c)).collect())
}

/// Division with remainder; divisor must be nonzero.
pub fn poly_divrem(ctx: &FqCtx, a: &[u64], b: &[u64]) -> (FqPoly, FqPoly) {
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r: FqPoly = a.to_vec();
    let db = b.len() - 1;
    let lb_inv = ctx.inv(*b.last().unwrap()).unwrap();
    let mut q = vec![0u64; a.len().saturating_sub(db)];
    while !r.is_empty() && r.len() - 1 >= db {
        let dr = r.len() - 1;
        let c = ctx.mul(*r.last().unwrap(), lb_inv);
        q[dr - db] = c;
        for j in 0..=db {
            let t = ctx.mul(c, b[j]);
            r[dr - db + j] = ctx.sub(r[dr - db + j], t);
        }
        r = poly_trim(r);
    }
    (poly_trim(q), r)
}

pub fn poly_gcd(ctx: &FqCtx, a: &[u64], b: &[u64]) -> FqPoly {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    while !y.is_empty() {
        let (_, r) = poly_divrem(ctx, &x, &y);
        x = y;
        y = r;
    }
    poly_monic(ctx, &x)
}

pub fn poly_monic(ctx: &FqCtx, a: &[u64]) -> FqPoly {
    if a.is_empty() {
        return vec![];
    }
    let inv = ctx.inv(*a.last().unwrap()).unwrap();
    poly_scale(ctx, a, inv)
}

pub fn poly_eval(ctx: &FqCtx, a: &[u64], x: u64) -> u64 {
    let mut acc = 0u64;
    for &c in a.iter().rev() {
        acc = ctx.add(ctx.mul(acc, x), c);
    }
    acc
}

/// x^v exactly (v >= 0).
pub fn poly_xpow(v: usize) -> FqPoly {
    let mut out = vec![0u64; v + 1];
    out[v] = 1;
    out
}

/// Irreducibility over F_q for degrees up to 4, by factor search.
pub fn poly_irreducible(ctx: &FqCtx, a: &[u64]) -> bool {
    let d = poly_deg(a);
    if d <= 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    for x in 0..ctx.q {
        if poly_eval(ctx, a, x) == 0 {
            return false;
        }
    }
    if d <= 3 {
        return true;
    }
    // degree 4: exclude irreducible quadratic divisors
    for c1 in 0..ctx.q {
        for c0 in 0..ctx.q {
            let quad = poly_trim(vec![c0, c1, 1]);
            if poly_deg(&quad) == 2 && poly_irreducible(ctx, &quad) {
                let (_, r) = poly_divrem(ctx, a, &quad);
                if r.is_empty() {
                    return false;
                }
            }
        }
    }
    true
}

/// All monic irreducibles of the given degree, in coefficient-lex order.
pub fn monic_irreducibles(ctx: &FqCtx, degree: u32) -> Vec<FqPoly> {
    let mut out = Vec::new();
    let n = degree as usize;
    let total = ctx.q.pow(degree);
    for code in 0..total {
        let mut cs = vec![0u64; n + 1];
        let mut c = code;
        for item in cs.iter_mut().take(n) {
            *item = c % ctx.q;
            c /= ctx.q;
        }
        cs[n] = 1;
        if poly_irreducible(ctx, &cs) {
            out.push(cs);
        }
    }
    out
}

pub fn poly_to_string(ctx: &FqCtx, a: &[u64]) -> String {
    if a.is_empty() {
        return "0".to_string();
    }
    let mut parts: Vec<String> = Vec::new();
    for (i, &c) in a.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let cs = ctx.elem_to_string(c);
        let coeff_one = c == 1;
        let needs_paren = cs.contains('+');
        let wrap = |s: &str| if needs_paren { format!("({s})") } else { s.to_string() };
        let part = match i {
            0 => wrap(&cs),
            1 => {
                if coeff_one {
                    "t".to_string()
                } else {
                    format!("{}*t", wrap(&cs))
                }
            }
            _ => {
                if coeff_one {
                    format!("t^{i}")
                } else {
                    format!("{}*t^{i}", wrap(&cs))
                }
            }
        };
        parts.push(part);
    }
    parts.join(" + ")
}

/// Parse a polynomial in t over a prime field (integer coefficients only).
pub fn poly_parse(ctx: &FqCtx, s: &str) -> Result<FqPoly, ArithError> {
    let bad = || ArithError::BadLiteral(s.to_string());
    let cleaned = s.replace(' ', "").replace('-', "+-");
    let mut coeffs: Vec<i64> = Vec::new();
    for term in cleaned.split('+') {
        if term.is_empty() {
            continue;
        }
        let (coeff_str, pow): (&str, usize) = if let Some(rest) = term.strip_suffix("t") {
            (rest, 1)
        } else if let Some(idx) = term.find("t^") {
            let e: usize = term[idx + 2..].parse().map_err(|_| bad())?;
            (&term[..idx], e)
        } else {
            (term, 0)
        };
        let cs = coeff_str.trim_end_matches('*');
        let c: i64 = if cs.is_empty() {
            1
        } else if cs == "-" {
            -1
        } else {
            cs.parse().map_err(|_| bad())?
        };
        if coeffs.len() <= pow {
            coeffs.resize(pow + 1, 0);
        }
        coeffs[pow] += c;
    }
    let p = ctx.p as i64;
    Ok(poly_trim(coeffs.into_iter().map(|c| c.rem_euclid(p) as u64).collect()))
}

// ---------------------------------------------------------------------------
// rational functions and places of F_q(t)
// ---------------------------------------------------------------------------

/// Nonzero rational function num/den, gcd 1, den monic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFn {
    pub num: FqPoly,
    pub den: FqPoly,
}

impl RatFn {
    pub fn new(ctx: &FqCtx, num: FqPoly, den: FqPoly) -> Result<Self, ArithError> {
        if poly_is_zero(&num) {
            return Err(ArithError::ZeroInput);
        }
        assert!(!poly_is_zero(&den));
        let g = poly_gcd(ctx, &num, &den);
        let (num, _) = poly_divrem(ctx, &num, &g);
        let (den, _) = poly_divrem(ctx, &den, &g);
        let lc = *den.last().unwrap();
        let lc_inv = ctx.inv(lc).unwrap();
        Ok(RatFn { num: poly_scale(ctx, &num, lc_inv), den: poly_scale(ctx, &den, lc_inv) })
    }

    pub fn from_poly(p: FqPoly) -> Result<Self, ArithError> {
        if poly_is_zero(&p) {
            return Err(ArithError::ZeroInput);
        }
        Ok(RatFn { num: p, den: vec![1] })
    }

    pub fn one() -> Self {
        RatFn { num: vec![1], den: vec![1] }
    }

    pub fn constant(c: u64) -> Result<Self, ArithError> {
        if c == 0 {
            return Err(ArithError::ZeroInput);
        }
        Ok(RatFn { num: vec![c], den: vec![1] })
    }

    pub fn mul(&self, ctx: &FqCtx, other: &Self) -> Self {
        RatFn::new(ctx, poly_mul(ctx, &self.num, &other.num), poly_mul(ctx, &self.den, &other.den))
            .expect("product of nonzero functions")
    }

    pub fn inv(&self, ctx: &FqCtx) -> Self {
        RatFn::new(ctx, self.den.clone(), self.num.clone()).expect("nonzero")
    }

    pub fn add(&self, ctx: &FqCtx, other: &Self) -> Result<Self, ArithError> {
        let num = poly_add(
            ctx,
            &poly_mul(ctx, &self.num, &other.den),
            &poly_mul(ctx, &other.num, &self.den),
        );
        RatFn::new(ctx, num, poly_mul(ctx, &self.den, &other.den))
    }

    pub fn sub(&self, ctx: &FqCtx, other: &Self) -> Result<Self, ArithError> {
        let num = poly_sub(
            ctx,
            &poly_mul(ctx, &self.num, &other.den),
            &poly_mul(ctx, &other.num, &self.den),
        );
        RatFn::new(ctx, num, poly_mul(ctx, &self.den, &other.den))
    }

    pub fn pow(&self, ctx: &FqCtx, e: i64) -> Self {
        let mut acc = RatFn::one();
        let base = if e >= 0 { self.clone() } else { self.inv(ctx) };
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(ctx, &base);
        }
        acc
    }

    pub fn degree(&self) -> i64 {
        poly_deg(&self.num) - poly_deg(&self.den)
    }

    pub fn to_string(&self, ctx: &FqCtx) -> String {
        if self.den == vec![1] {
            poly_to_string(ctx, &self.num)
        } else {
            format!("({}) / ({})", poly_to_string(ctx, &self.num), poly_to_string(ctx, &self.den))
        }
    }
}

/// A place of F_q(t): a monic irreducible of F_q[t] or the degree place.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum FfPlace {
    Finite(FqPoly),
    Infinity,
}

impl FfPlace {
    pub fn finite(ctx: &FqCtx, pi: FqPoly) -> Result<Self, ArithError> {
        let pi = poly_trim(pi);
        if !poly_irreducible(ctx, &pi) || *pi.last().unwrap() != 1 {
            return Err(ArithError::BadLiteral("place must be a monic irreducible".into()));
        }
        Ok(FfPlace::Finite(pi))
    }

    pub fn degree(&self) -> u32 {
        match self {
            FfPlace::Finite(pi) => (pi.len() - 1) as u32,
            FfPlace::Infinity => 1,
        }
    }

    pub fn to_string(&self, ctx: &FqCtx) -> String {
        match self {
            FfPlace::Finite(pi) => poly_to_string(ctx, pi),
            FfPlace::Infinity => "inf".to_string(),
        }
    }
}

fn poly_ord_at(ctx: &FqCtx, a: &[u64], pi: &[u64]) -> (i64, FqPoly) {
    let mut v = 0i64;
    let mut cur = a.to_vec();
    loop {
        let (q, r) = poly_divrem(ctx, &cur, pi);
        if r.is_empty() && !q.is_empty() {
            v += 1;
            cur = q;
        } else {
            return (v, cur);
        }
    }
}

/// Order of vanishing of x at P together with the leading unit's residue in
/// the residue field at P (encoded as a reduced polynomial for finite P, a
/// constant for the degree place).
pub fn ff_val_unit(ctx: &FqCtx, x: &RatFn, place: &FfPlace) -> Result<(i64, FqPoly), ArithError> {
    if poly_is_zero(&x.num) {
        return Err(ArithError::ZeroInput);
    }
    match place {
        FfPlace::Finite(pi) => {
            let (vn, nn) = poly_ord_at(ctx, &x.num, pi);
            let (vd, dd) = poly_ord_at(ctx, &x.den, pi);
            // residue of the unit part: nn/dd mod pi
            let (_, nr) = poly_divrem(ctx, &nn, pi);
            let (_, dr) = poly_divrem(ctx, &dd, pi);
            let dinv = poly_inv_mod(ctx, &dr, pi)?;
            let (_, res) = poly_divrem(ctx, &poly_mul(ctx, &nr, &dinv), pi);
            Ok((vn - vd, res))
        }
        FfPlace::Infinity => {
            let v = poly_deg(&x.den) - poly_deg(&x.num);
            // residue of x * t^v at t -> infinity: ratio of leading coefficients
            let ln = *x.num.last().unwrap();
            let ld = *x.den.last().unwrap();
            Ok((v, vec![ctx.mul(ln, ctx.inv(ld)?)]))
        }
    }
}

/// Inverse of a modulo pi in F_q[t]/(pi).
pub fn poly_inv_mod(ctx: &FqCtx, a: &[u64], pi: &[u64]) -> Result<FqPoly, ArithError> {
    let (_, a) = poly_divrem(ctx, a, pi);
    if a.is_empty() {
        return Err(ArithError::ZeroInput);
    }
    // extended Euclid
    let (mut r0, mut r1) = (pi.to_vec(), a.clone());
    let (mut t0, mut t1): (FqPoly, FqPoly) = (vec![], vec![1]);
    while !r1.is_empty() {
        let (q, r) = poly_divrem(ctx, &r0, &r1);
        let t = poly_sub(ctx, &t0, &poly_mul(ctx, &q, &t1));
        r0 = r1;
        r1 = r;
        t0 = t1;
        t1 = t;
    }
    // r0 = gcd, a constant since pi is irreducible and a nonzero mod pi
    assert_eq!(poly_deg(&r0), 0);
    let c = ctx.inv(r0[0])?;
    let (_, out) = poly_divrem(ctx, &poly_scale(ctx, &t0, c), pi);
    Ok(out)
}

/// Norm from the residue field at P down to F_q.
pub fn residue_norm(ctx: &FqCtx, place: &FfPlace, elem: &[u64]) -> Result<u64, ArithError> {
    match place {
        FfPlace::Infinity => {
            if elem.len() > 1 {
                return Err(ArithError::BadLiteral("degree-place residue must be constant".into()));
            }
            Ok(elem.first().copied().unwrap_or(0))
        }
        FfPlace::Finite(pi) => {
            let d = (pi.len() - 1) as u32;
            if d == 1 {
                let (_, r) = poly_divrem(ctx, elem, pi);
                return Ok(r.first().copied().unwrap_or(0));
            }
            // norm = elem^((q^d - 1)/(q - 1)) computed in F_q[t]/(pi)
            let mut exp: u64 = 0;
            let mut qp = 1u64;
            for _ in 0..d {
                exp += qp;
                qp *= ctx.q;
            }
            let mut acc: FqPoly = vec![1];
            let mut base = {
                let (_, r) = poly_divrem(ctx, elem, pi);
                r
            };
            if base.is_empty() {
                return Ok(0);
            }
            let mut e = exp;
            while e > 0 {
                if e & 1 == 1 {
                    let (_, r) = poly_divrem(ctx, &poly_mul(ctx, &acc, &base), pi);
                    acc = r;
                }
                let (_, r) = poly_divrem(ctx, &poly_mul(ctx, &base, &base), pi);
                base = r;
                e >>= 1;
            }
            assert!(acc.len() <= 1, "norm must land in the base field");
            Ok(acc.first().copied().unwrap_or(0))
        }
    }
}

/// Monic irreducible factorization by degree-bounded trial division: factors
/// of degree d are searched only while 2d <= deg(rem); a positive-degree
/// remainder after that is itself irreducible.
pub fn poly_factor(ctx: &FqCtx, poly: &[u64]) -> Vec<(FqPoly, i64)> {
    let mut out = Vec::new();
    let mut rem = poly_monic(ctx, poly);
    let mut deg = 1u32;
    while poly_deg(&rem) > 0 {
        if 2 * deg as i64 > poly_deg(&rem) {
            out.push((rem.clone(), 1));
            break;
        }
        for pi in monic_irreducibles(ctx, deg) {
            let (v, cof) = poly_ord_at(ctx, &rem, &pi);
            if v > 0 {
                out.push((pi, v));
                rem = cof;
            }
        }
        deg += 1;
    }
    out
}

/// Support of a rational function: all finite places where it has a zero or
/// pole, with multiplicities, plus the degree place when deg != 0.
pub fn ratfn_support(ctx: &FqCtx, x: &RatFn) -> Vec<(FfPlace, i64)> {
    let mut out: Vec<(FfPlace, i64)> = Vec::new();
    for (poly, sign) in [(&x.num, 1i64), (&x.den, -1i64)] {
        for (pi, v) in poly_factor(ctx, poly) {
            out.push((FfPlace::Finite(pi), sign * v));
        }
    }
    let mut merged: std::collections::BTreeMap<FfPlace, i64> = std::collections::BTreeMap::new();
    for (pl, v) in out {
        *merged.entry(pl).or_insert(0) += v;
    }
    let dinf = -x.degree();
    if dinf != 0 {
        merged.insert(FfPlace::Infinity, dinf);
    }
    merged.into_iter().filter(|&(_, v)| v != 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_polys_are_irreducible() {
        for &(q, _) in DEFINING_POLYS {
            let ctx = FqCtx::new(q).unwrap();
            let base = FqCtx::new(ctx.p).unwrap();
            let m: Vec<u64> = ctx.modulus[..=(ctx.e as usize)].to_vec();
            assert!(poly_irreducible(&base, &m), "defining polynomial for F_{q} reducible");
        }
    }

    #[test]
    fn f4_arithmetic() {
        let ctx = FqCtx::new(4).unwrap();
        // u * u = u + 1 (code 2*2 = 3)
        assert_eq!(ctx.mul(2, 2), 3);
        assert_eq!(ctx.mul(2, 3), 1); // u(u+1) = u^2+u = 1
        assert_eq!(ctx.inv(2).unwrap(), 3);
        assert_eq!(ctx.generator(), 2);
        assert_eq!(ctx.dlog(3).unwrap(), 2);
    }

    #[test]
    fn f9_arithmetic() {
        let ctx = FqCtx::new(9).unwrap();
        for a in 1..9 {
            let inv = ctx.inv(a).unwrap();
            assert_eq!(ctx.mul(a, inv), 1);
        }
        let g = ctx.generator();
        let mut seen = std::collections::BTreeSet::new();
        let mut acc = 1u64;
        for _ in 0..8 {
            seen.insert(acc);
            acc = ctx.mul(acc, g);
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn ff_val_unit_examples() {
        let ctx = FqCtx::new(2).unwrap();
        // t^2(t+1) at P=(t) over F_2: order 2, residue of t+1 at 0 is 1
        let x = RatFn::from_poly(poly_mul(&ctx, &[0, 0, 1], &[1, 1])).unwrap();
        let p = FfPlace::finite(&ctx, vec![0, 1]).unwrap();
        let (v, r) = ff_val_unit(&ctx, &x, &p).unwrap();
        assert_eq!((v, r), (2, vec![1]));

        // 1/t at infinity: valuation 1, unit 1
        let y = RatFn::new(&ctx, vec![1], vec![0, 1]).unwrap();
        let (v, r) = ff_val_unit(&ctx, &y, &FfPlace::Infinity).unwrap();
        assert_eq!((v, r), (1, vec![1]));

        // t+1 at P=(t+1): order 1, unit 1
        let z = RatFn::from_poly(vec![1, 1]).unwrap();
        let p2 = FfPlace::finite(&ctx, vec![1, 1]).unwrap();
        let (v, r) = ff_val_unit(&ctx, &z, &p2).unwrap();
        assert_eq!((v, r), (1, vec![1]));
    }

    #[test]
    fn principal_divisors_have_degree_zero() {
        let ctx = FqCtx::new(3).unwrap();
        let samples = [
            RatFn::new(&ctx, vec![0, 0, 1], vec![1, 1]).unwrap(),
            RatFn::new(&ctx, vec![2, 1], vec![0, 1]).unwrap(),
            RatFn::from_poly(vec![1, 0, 1]).unwrap(),
        ];
        for x in &samples {
            let total: i64 = ratfn_support(&ctx, x)
                .iter()
                .map(|(pl, v)| v * pl.degree() as i64)
                .sum();
            assert_eq!(total, 0, "divisor of {} has nonzero degree", x.to_string(&ctx));
        }
    }

    #[test]
    fn irreducibles_f2() {
        let ctx = FqCtx::new(2).unwrap();
        assert_eq!(monic_irreducibles(&ctx, 1), vec![vec![0, 1], vec![1, 1]]);
        assert_eq!(monic_irreducibles(&ctx, 2), vec![vec![1, 1, 1]]);
        assert_eq!(monic_irreducibles(&ctx, 3).len(), 2);
    }

    #[test]
    fn parse_and_print() {
        let ctx = FqCtx::new(3).unwrap();
        let p = poly_parse(&ctx, "t^2 + 2t + 1").unwrap();
        assert_eq!(p, vec![1, 2, 1]);
        let q = poly_parse(&ctx, "t^2 - t").unwrap();
        assert_eq!(q, vec![0, 2, 1]);
        assert_eq!(poly_to_string(&ctx, &q), "t^2 + 2*t");
    }

    #[test]
    fn residue_norm_quadratic_place() {
        // F_2, P = (t^2+t+1): residue field F_4; norm of t mod P:
        // t * t^2 = t^3 = 1 mod P, so norm(t) = t^(1+2) = 1.
        let ctx = FqCtx::new(2).unwrap();
        let p = FfPlace::finite(&ctx, vec![1, 1, 1]).unwrap();
        assert_eq!(residue_norm(&ctx, &p, &[0, 1]).unwrap(), 1);
    }
}
