//! Sparse multivariate polynomials with exact rational coefficients, plus the
//! little expression parser the model JSON format needs.

use crate::rat::{parse_rat, ArithError, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Terms keyed by exponent vectors (one entry per variable).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, Rat>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn variable(nvars: usize, idx: usize) -> Self {
        let mut exp = vec![0u32; nvars];
        exp[idx] = 1;
        let mut p = Poly::zero(nvars);
        p.terms.insert(exp, Rat::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, exp: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&exp);
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert(e, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::constant(self.nvars, Rat::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, point: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    term *= x.clone();
                }
            }
            acc += term;
        }
        acc
    }

    /// Substitute x_i -> subs[i] (each a polynomial in the same variables).
    pub fn substitute(&self, subs: &[Poly]) -> Poly {
        let mut acc = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut term = Poly::constant(self.nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&subs[i].pow(k));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Minimal p-adic valuation over the coefficients.
    pub fn content_valuation(&self, p: u64) -> i64 {
        self.terms
            .values()
            .map(|c| crate::rat::val_unit(c, p).expect("nonzero coefficient").0)
            .min()
            .unwrap_or(0)
    }

    /// Multiply by the rational making the coefficients coprime integers
    /// outside the inverted primes, with a positive leading coefficient.
    pub fn normalize_content(&self, inverted: &[u64]) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut scale = Rat::one();
        // clear denominators
        let mut lcm = BigInt::one();
        for c in self.terms.values() {
            lcm = num_integer::Integer::lcm(&lcm, c.denom());
        }
        scale *= Rat::from_integer(lcm);
        // divide by the gcd of numerators
        let mut gcd = BigInt::zero();
        for c in self.terms.values() {
            let n = (c * scale.clone()).to_integer();
            gcd = num_integer::Integer::gcd(&gcd, &n);
        }
        if !gcd.is_zero() {
            scale /= Rat::from_integer(gcd);
        }
        // reintroduce inverted primes freely to keep coefficients minimal:
        // content at inverted primes is irrelevant, leave as is
        let _ = inverted;
        let mut out = self.scale(&scale);
        // positive sign on the lexicographically largest term
        if let Some((_, c)) = out.terms.iter().next_back() {
            if c.is_negative() {
                out = out.neg();
            }
        }
        out
    }

    pub fn partial(&self, idx: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[idx] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[idx] -= 1;
            out.insert(e2, c * Rat::from_integer(BigInt::from(e[idx])));
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn to_string_with(&self, vars: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts: Vec<String> = Vec::new();
        for (e, c) in self.terms.iter().rev() {
            let mut factors: Vec<String> = Vec::new();
            let is_const = e.iter().all(|&k| k == 0);
            if is_const || c.clone().abs() != Rat::one() {
                factors.push(crate::rat::format_rat(&c.clone().abs()));
            }
            for (v, &k) in vars.iter().zip(e) {
                match k {
                    0 => {}
                    1 => factors.push(v.clone()),
                    _ => factors.push(format!("{v}^{k}")),
                }
            }
            let term = factors.join("*");
            if parts.is_empty() {
                parts.push(if c.is_negative() { format!("-{term}") } else { term });
            } else {
                parts.push(format!("{} {term}", if c.is_negative() { "-" } else { "+" }));
            }
        }
        parts.join(" ")
    }
}

/// Parse an expression in the given variables: +, -, *, ^, parentheses,
/// rational literals.
pub fn parse_poly(input: &str, vars: &[String]) -> Result<Poly, ArithError> {
    let mut parser = ExprParser { input: input.as_bytes(), pos: 0, vars };
    let p = parser.expr()?;
    parser.skip_ws();
    if parser.pos != parser.input.len() {
        return Err(ArithError::BadLiteral(input.to_string()));
    }
    Ok(p)
}

struct ExprParser<'a> {
    input: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

impl<'a> ExprParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.input.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Poly, ArithError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.term()?.neg()
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ArithError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                // implicit multiplication: `2X1` or `3(X+1)`
                Some(c) if c.is_ascii_alphabetic() || c == b'(' => {
                    acc = acc.mul(&self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Poly, ArithError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = std::str::from_utf8(&self.input[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| ArithError::BadLiteral("exponent".into()))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, ArithError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(ArithError::BadLiteral("missing )".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.input.len()
                    && (self.input[self.pos].is_ascii_digit() || self.input[self.pos] == b'/')
                {
                    self.pos += 1;
                }
                // a/b only when b is a digit run; backtrack a trailing slash
                let mut end = self.pos;
                if self.input[end - 1] == b'/' {
                    end -= 1;
                    self.pos = end;
                }
                let lit = std::str::from_utf8(&self.input[start..end]).unwrap();
                Ok(Poly::constant(self.vars.len(), parse_rat(lit)?))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                self.skip_ws();
                let start = self.pos;
                while self.pos < self.input.len()
                    && (self.input[self.pos].is_ascii_alphanumeric() || self.input[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
                match self.vars.iter().position(|v| v == name) {
                    Some(i) => Ok(Poly::variable(self.vars.len(), i)),
                    None => Err(ArithError::BadLiteral(format!("unknown variable {name}"))),
                }
            }
            _ => Err(ArithError::BadLiteral("unexpected end of expression".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i64};

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parse_eval_roundtrip() {
        let vs = vars(&["X1", "X2"]);
        let p = parse_poly("2*X1 - X2 - 1", &vs).unwrap();
        assert_eq!(p.eval(&[rat_i64(1), rat_i64(1)]), rat_i64(0));
        assert_eq!(p.eval(&[rat_i64(3), rat_i64(2)]), rat_i64(3));
        let printed = p.to_string_with(&vs);
        let back = parse_poly(&printed, &vs).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn substitution_and_content() {
        let vs = vars(&["X", "Y"]);
        let p = parse_poly("X*Y - 1", &vs).unwrap();
        // X -> 1 + 3X, Y -> 1 + 3Y
        let sx = parse_poly("1 + 3*X", &vs).unwrap();
        let sy = parse_poly("1 + 3*Y", &vs).unwrap();
        let q = p.substitute(&[sx, sy]);
        assert_eq!(q.content_valuation(3), 1);
        let r = q.scale(&rat(1, 3));
        assert_eq!(r, parse_poly("X + Y + 3*X*Y", &vs).unwrap());
    }

    #[test]
    fn normalization() {
        let vs = vars(&["X"]);
        let p = parse_poly("4*X - 2", &vs).unwrap();
        let n = p.normalize_content(&[]);
        assert_eq!(n, parse_poly("2*X - 1", &vs).unwrap());
        let p = parse_poly("1/2*X - 1/4", &vs).unwrap();
        let n = p.normalize_content(&[]);
        assert_eq!(n, parse_poly("2*X - 1", &vs).unwrap());
    }

    #[test]
    fn partials() {
        let vs = vars(&["X", "Y"]);
        let p = parse_poly("X^2*Y + 3*Y", &vs).unwrap();
        assert_eq!(p.partial(0), parse_poly("2*X*Y", &vs).unwrap());
        assert_eq!(p.partial(1), parse_poly("X^2 + 3", &vs).unwrap());
    }
}
