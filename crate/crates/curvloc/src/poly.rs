//! Sparse polynomials in three variables over exact rationals, with the
//! germ/net text grammar (parser and canonical printer).

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational p/q. Panics on q = 0.
pub fn ratq(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Serialize a rational as "p" or "p/q".
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True iff `r` is the square of a rational; returns the nonnegative root.
pub fn rational_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

/// Monomial exponents (i, j, k) for x^i y^j z^k.
pub type Expo = [u32; 3];

fn total_degree(e: &Expo) -> u32 {
    e[0] + e[1] + e[2]
}

/// Sparse polynomial in x, y, z with rational coefficients.
///
/// No zero coefficients are stored; the map is keyed by exponent triple.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly3 {
    terms: BTreeMap<Expo, Rat>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Poly3::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Poly3::zero();
        p.add_term([0, 0, 0], c);
        p
    }

    /// The variable with index 0, 1 or 2 (x, y, z).
    pub fn var(i: usize) -> Self {
        let mut e = [0u32; 3];
        e[i] = 1;
        let mut p = Poly3::zero();
        p.add_term(e, Rat::one());
        p
    }

    pub fn monomial(e: Expo, c: Rat) -> Self {
        let mut p = Poly3::zero();
        p.add_term(e, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: Expo) -> Rat {
        self.terms.get(&e).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, e: Expo, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly3 {
        let mut out = Poly3::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> Poly3 {
        let mut out = Poly3::zero();
        if s.is_zero() {
            return out;
        }
        for (e, c) in &self.terms {
            out.add_term(*e, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly3) -> Poly3 {
        let mut out = Poly3::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly3 {
        let mut out = Poly3::constant(Rat::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(total_degree).max().unwrap_or(0)
    }

    /// Drop all terms of total degree > d.
    pub fn truncate(&self, d: u32) -> Poly3 {
        let mut out = Poly3::zero();
        for (e, c) in &self.terms {
            if total_degree(e) <= d {
                out.add_term(*e, c.clone());
            }
        }
        out
    }

    pub fn eval(&self, v: &[Rat; 3]) -> Rat {
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..3 {
                for _ in 0..e[i] {
                    t *= &v[i];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, v: &[f64; 3]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = rat_to_f64(c);
            for i in 0..3 {
                t *= v[i].powi(e[i] as i32);
            }
            acc += t;
        }
        acc
    }

    /// Partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Poly3 {
        let mut out = Poly3::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut ne = *e;
            ne[i] -= 1;
            out.add_term(ne, c * rat(e[i] as i64));
        }
        out
    }

    /// Compose with a substitution x -> subs[0], y -> subs[1], z -> subs[2].
    pub fn substitute(&self, subs: &[Poly3; 3]) -> Poly3 {
        let mut out = Poly3::zero();
        for (e, c) in &self.terms {
            let mut t = Poly3::constant(c.clone());
            for i in 0..3 {
                if e[i] > 0 {
                    t = t.mul(&subs[i].pow(e[i]));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Compose with the linear map v -> M v on the variables.
    pub fn substitute_linear(&self, m: &[[Rat; 3]; 3]) -> Poly3 {
        let subs = [
            linear_form(&m[0]),
            linear_form(&m[1]),
            linear_form(&m[2]),
        ];
        // Rows of M give the new expression of each old variable:
        // old_i = sum_j M[i][j] * new_j.
        self.substitute(&subs)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff([0, 0, 0])
    }

    /// Coefficients of the linear part (x, y, z).
    pub fn linear_coeffs(&self) -> [Rat; 3] {
        [
            self.coeff([1, 0, 0]),
            self.coeff([0, 1, 0]),
            self.coeff([0, 0, 1]),
        ]
    }
}

/// The linear polynomial c0*x + c1*y + c2*z.
pub fn linear_form(c: &[Rat; 3]) -> Poly3 {
    let mut p = Poly3::zero();
    p.add_term([1, 0, 0], c[0].clone());
    p.add_term([0, 1, 0], c[1].clone());
    p.add_term([0, 0, 1], c[2].clone());
    p
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    let n = bigint_to_f64(r.numer());
    let d = bigint_to_f64(r.denom());
    n / d
}

fn bigint_to_f64(b: &BigInt) -> f64 {
    // Good enough for the magnitudes this crate produces.
    b.to_string().parse::<f64>().unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------------------
// Printing: graded lexicographic, x > y > z, highest degree first.
// ---------------------------------------------------------------------------

fn grlex_key(e: &Expo) -> (u32, [u32; 3]) {
    (total_degree(e), *e)
}

fn fmt_monomial(e: &Expo, names: &[&str; 3]) -> String {
    let mut parts = Vec::new();
    for i in 0..3 {
        match e[i] {
            0 => {}
            1 => parts.push(names[i].to_string()),
            k => parts.push(format!("{}^{}", names[i], k)),
        }
    }
    parts.join("*")
}

/// Canonical rendering with caller-chosen variable names.
pub fn poly_to_string_named(p: &Poly3, names: &[&str; 3]) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut keys: Vec<&Expo> = p.terms.keys().collect();
    keys.sort_by(|a, b| grlex_key(b).cmp(&grlex_key(a)));
    let mut out = String::new();
    for (idx, e) in keys.iter().enumerate() {
        let c = p.terms.get(*e).unwrap();
        let mono = fmt_monomial(e, names);
        let abs = c.abs();
        let coeff_str = if abs.is_one() && !mono.is_empty() {
            String::new()
        } else {
            rat_to_string(&abs)
        };
        let body = match (coeff_str.is_empty(), mono.is_empty()) {
            (true, false) => mono,
            (false, true) => coeff_str,
            (false, false) => format!("{}*{}", coeff_str, mono),
            (true, true) => unreachable!(),
        };
        if idx == 0 {
            if c.is_negative() {
                out.push('-');
            }
        } else if c.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        out.push_str(&body);
    }
    out
}

impl fmt::Display for Poly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", poly_to_string_named(self, &["x", "y", "z"]))
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parse failure with a byte position into the source string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let start = self.pos;
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                }
                b'0'..=b'9' => {
                    let mut end = self.pos;
                    while end < self.src.len() && self.src[end].is_ascii_digit() {
                        end += 1;
                    }
                    let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                    let n: BigInt = text.parse().unwrap();
                    out.push((start, Tok::Num(n)));
                    self.pos = end;
                }
                b'x' => {
                    out.push((start, Tok::Var(0)));
                    self.pos += 1;
                }
                b'y' => {
                    out.push((start, Tok::Var(1)));
                    self.pos += 1;
                }
                b'z' => {
                    out.push((start, Tok::Var(2)));
                    self.pos += 1;
                }
                b'+' => {
                    out.push((start, Tok::Plus));
                    self.pos += 1;
                }
                b'-' => {
                    out.push((start, Tok::Minus));
                    self.pos += 1;
                }
                b'*' => {
                    out.push((start, Tok::Star));
                    self.pos += 1;
                }
                b'^' => {
                    out.push((start, Tok::Caret));
                    self.pos += 1;
                }
                b'/' => {
                    out.push((start, Tok::Slash));
                    self.pos += 1;
                }
                b'(' => {
                    out.push((start, Tok::LParen));
                    self.pos += 1;
                }
                b')' => {
                    out.push((start, Tok::RParen));
                    self.pos += 1;
                }
                b',' => {
                    out.push((start, Tok::Comma));
                    self.pos += 1;
                }
                other => {
                    return Err(ParseError {
                        position: start,
                        message: format!("unexpected character '{}'", other as char),
                    })
                }
            }
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.pos(),
            message: msg.to_string(),
        })
    }

    fn expr(&mut self) -> Result<Poly3, ParseError> {
        let mut negate = false;
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            negate = true;
        } else if matches!(self.peek(), Some(Tok::Plus)) {
            self.bump();
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let t = self.term()?;
                    acc = acc.sub(&t);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly3, ParseError> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.bump();
            let f = self.factor()?;
            acc = acc.mul(&f);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly3, ParseError> {
        let base = self.base()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            match self.bump() {
                Some(Tok::Num(n)) => {
                    let e: u32 = n
                        .to_string()
                        .parse()
                        .map_err(|_| ParseError {
                            position: self.pos(),
                            message: "exponent too large".to_string(),
                        })?;
                    Ok(base.pow(e))
                }
                _ => self.err("expected integer exponent after '^'"),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Poly3, ParseError> {
        match self.bump() {
            Some(Tok::Num(n)) => {
                // Optional "/ q" immediately after a literal makes a ratio.
                if matches!(self.peek(), Some(Tok::Slash)) {
                    self.bump();
                    match self.bump() {
                        Some(Tok::Num(d)) => {
                            if d.is_zero() {
                                return self.err("zero denominator");
                            }
                            Ok(Poly3::constant(Rat::new(n, d)))
                        }
                        _ => self.err("expected integer denominator after '/'"),
                    }
                } else {
                    Ok(Poly3::constant(Rat::from_integer(n)))
                }
            }
            Some(Tok::Var(i)) => Ok(Poly3::var(i)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => self.err("expected ')'"),
                }
            }
            Some(Tok::Minus) => Ok(self.base()?.neg()),
            _ => self.err("expected number, variable or '('"),
        }
    }
}

/// Parse a single polynomial expression.
pub fn parse_poly(src: &str) -> Result<Poly3, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser {
        toks,
        idx: 0,
        end: src.len(),
    };
    let poly = p.expr()?;
    if p.idx != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(poly)
}

/// Parse a parenthesized comma-separated tuple of polynomial expressions.
pub fn parse_poly_tuple(src: &str) -> Result<Vec<Poly3>, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser {
        toks,
        idx: 0,
        end: src.len(),
    };
    match p.bump() {
        Some(Tok::LParen) => {}
        _ => return p.err("expected '('"),
    }
    let mut comps = vec![p.expr()?];
    loop {
        match p.bump() {
            Some(Tok::Comma) => comps.push(p.expr()?),
            Some(Tok::RParen) => break,
            _ => return p.err("expected ',' or ')'"),
        }
    }
    if p.idx != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(comps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print_roundtrip() {
        let p = parse_poly("x*z + 2*y^2 - 1/2*z^2").unwrap();
        assert_eq!(p.to_string(), "x*z + 2*y^2 - 1/2*z^2");
        let q = parse_poly(&p.to_string()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn parse_tuple() {
        let comps = parse_poly_tuple("(x, y, x*z, y*z, z^2)").unwrap();
        assert_eq!(comps.len(), 5);
        assert_eq!(comps[2], Poly3::var(0).mul(&Poly3::var(2)));
    }

    #[test]
    fn parse_error_position() {
        let err = parse_poly("x + @").unwrap_err();
        assert_eq!(err.position, 4);
    }

    #[test]
    fn substitution_composes() {
        // x^2 under x -> x + y is x^2 + 2xy + y^2.
        let p = Poly3::var(0).pow(2);
        let subs = [
            Poly3::var(0).add(&Poly3::var(1)),
            Poly3::var(1),
            Poly3::var(2),
        ];
        let q = p.substitute(&subs);
        assert_eq!(q.coeff([2, 0, 0]), rat(1));
        assert_eq!(q.coeff([1, 1, 0]), rat(2));
        assert_eq!(q.coeff([0, 2, 0]), rat(1));
    }

    #[test]
    fn rational_sqrt_detects_squares() {
        assert_eq!(rational_sqrt(&ratq(9, 4)), Some(ratq(3, 2)));
        assert_eq!(rational_sqrt(&rat(2)), None);
        assert_eq!(rational_sqrt(&rat(-4)), None);
    }

    #[test]
    fn partials() {
        let p = parse_poly("x^2*z + 3*y*z^2").unwrap();
        assert_eq!(p.partial(2), parse_poly("x^2 + 6*y*z").unwrap());
    }
}
