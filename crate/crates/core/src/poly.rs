//! Exact multivariate polynomials with arbitrary-precision integer coefficients.
//!
//! An [`IntPoly`] is stored as a sorted map from exponent vectors to non-zero
//! coefficients, so two polynomials are equal exactly when their maps are
//! equal. The text syntax is `x0*x1 + 3*x2^2 - 1`; parsing followed by
//! printing yields the canonical form.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::PolyError;

/// Exponent vector of a monomial, one entry per variable.
pub type Exponents = Vec<u32>;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IntPoly {
    num_vars: usize,
    monomials: BTreeMap<Exponents, BigInt>,
}

impl IntPoly {
    pub fn zero(num_vars: usize) -> Self {
        IntPoly { num_vars, monomials: BTreeMap::new() }
    }

    pub fn constant(num_vars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = IntPoly::zero(num_vars);
        p.add_term(vec![0; num_vars], c.into());
        p
    }

    /// The polynomial `x_index` over `num_vars` variables.
    ///
    /// Panics if `index >= num_vars`.
    pub fn var(num_vars: usize, index: usize) -> Self {
        assert!(index < num_vars, "variable x{index} out of range for {num_vars} variables");
        let mut exps = vec![0; num_vars];
        exps[index] = 1;
        let mut p = IntPoly::zero(num_vars);
        p.add_term(exps, BigInt::one());
        p
    }

    /// Product of the listed variables (with repetition), coefficient 1.
    pub fn product_of(num_vars: usize, vars: &[usize]) -> Result<Self, PolyError> {
        let mut exps = vec![0u32; num_vars];
        for &v in vars {
            if v >= num_vars {
                return Err(PolyError::IndexOutOfRange { index: v, num_vars });
            }
            exps[v] += 1;
        }
        let mut p = IntPoly::zero(num_vars);
        p.add_term(exps, BigInt::one());
        Ok(p)
    }

    pub fn from_terms<I, C>(num_vars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (C, Exponents)>,
        C: Into<BigInt>,
    {
        let mut p = IntPoly::zero(num_vars);
        for (c, exps) in terms {
            if exps.len() != num_vars {
                return Err(PolyError::DimensionMismatch { expected: num_vars, got: exps.len() });
            }
            p.add_term(exps, c.into());
        }
        Ok(p)
    }

    fn add_term(&mut self, exps: Exponents, c: BigInt) {
        debug_assert_eq!(exps.len(), self.num_vars);
        if c.is_zero() {
            return;
        }
        match self.monomials.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn num_monomials(&self) -> usize {
        self.monomials.len()
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&Exponents, &BigInt)> {
        self.monomials.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> BigInt {
        self.monomials.get(exps).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn constant_term(&self) -> BigInt {
        self.coefficient(&vec![0; self.num_vars])
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.monomials.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.monomials.keys().map(|e| e.get(var).copied().unwrap_or(0)).max().unwrap_or(0)
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.monomials.keys().any(|e| e.get(var).is_some_and(|&x| x > 0))
    }

    /// Number of variables actually used, i.e. one more than the largest
    /// variable index with a positive exponent.
    pub fn used_vars(&self) -> usize {
        (0..self.num_vars).rev().find(|&v| self.depends_on(v)).map_or(0, |v| v + 1)
    }

    /// Re-embeds the polynomial in `num_vars` variables. Shrinking is allowed
    /// only when the dropped variables are unused.
    pub fn with_num_vars(&self, num_vars: usize) -> Result<Self, PolyError> {
        if num_vars < self.used_vars() {
            return Err(PolyError::IndexOutOfRange { index: self.used_vars() - 1, num_vars });
        }
        let monomials = self
            .monomials
            .iter()
            .map(|(e, c)| {
                let mut e2 = e.clone();
                e2.resize(num_vars, 0);
                (e2, c.clone())
            })
            .collect();
        Ok(IntPoly { num_vars, monomials })
    }

    pub fn eval(&self, point: &[BigInt]) -> Result<BigInt, PolyError> {
        if point.len() != self.num_vars {
            return Err(PolyError::DimensionMismatch { expected: self.num_vars, got: point.len() });
        }
        let mut acc = BigInt::zero();
        for (exps, c) in &self.monomials {
            let mut term = c.clone();
            for (x, &e) in point.iter().zip(exps) {
                if e > 0 {
                    term *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    pub fn eval_i64(&self, point: &[i64]) -> Result<BigInt, PolyError> {
        let big: Vec<BigInt> = point.iter().map(|&x| BigInt::from(x)).collect();
        self.eval(&big)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = IntPoly::constant(self.num_vars, 1);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Replaces argument `k` of `self` by the product of the base variables
    /// listed in `var_products[k]`, producing a polynomial in `target_vars`
    /// variables.
    pub fn substitute_products(
        &self,
        var_products: &[Vec<usize>],
        target_vars: usize,
    ) -> Result<Self, PolyError> {
        if var_products.len() != self.num_vars {
            return Err(PolyError::DimensionMismatch {
                expected: self.num_vars,
                got: var_products.len(),
            });
        }
        for (k, vars) in var_products.iter().enumerate() {
            if vars.is_empty() {
                return Err(PolyError::EmptyProduct(k));
            }
            if let Some(&bad) = vars.iter().find(|&&v| v >= target_vars) {
                return Err(PolyError::IndexOutOfRange { index: bad, num_vars: target_vars });
            }
        }
        let mut out = IntPoly::zero(target_vars);
        for (exps, c) in &self.monomials {
            let mut new_exps = vec![0u32; target_vars];
            for (k, &e) in exps.iter().enumerate() {
                for &v in &var_products[k] {
                    new_exps[v] += e;
                }
            }
            out.add_term(new_exps, c.clone());
        }
        Ok(out)
    }

    /// Parses the text syntax, taking the number of variables from the
    /// largest index mentioned.
    pub fn parse(s: &str) -> Result<Self, PolyError> {
        let p = Parser::new(s).parse_all()?;
        let n = p.used_vars();
        p.with_num_vars(n)
    }

    /// Parses the text syntax into a polynomial over exactly `num_vars` variables.
    pub fn parse_with_vars(s: &str, num_vars: usize) -> Result<Self, PolyError> {
        Parser::new(s).parse_all()?.with_num_vars(num_vars)
    }

    /// Monomials in print order: total degree descending, then exponent
    /// vectors descending (so `x0` precedes `x1`).
    fn ordered(&self) -> Vec<(&Exponents, &BigInt)> {
        let mut v: Vec<_> = self.monomials.iter().collect();
        v.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        v
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, exps: &[u32], coeff: &BigInt) -> fmt::Result {
    let vars: Vec<String> = exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
        .collect();
    if vars.is_empty() {
        return write!(f, "{coeff}");
    }
    if !coeff.is_one() {
        write!(f, "{coeff}*")?;
    }
    write!(f, "{}", vars.join("*"))
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (exps, c)) in self.ordered().into_iter().enumerate() {
            let mag = c.abs();
            match (i, c.is_negative()) {
                (0, false) => {}
                (0, true) => write!(f, "-")?,
                (_, false) => write!(f, " + ")?,
                (_, true) => write!(f, " - ")?,
            }
            write_monomial(f, exps, &mag)?;
        }
        Ok(())
    }
}

impl std::str::FromStr for IntPoly {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IntPoly::parse(s)
    }
}

impl PartialOrd for IntPoly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for IntPoly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.num_vars
            .cmp(&other.num_vars)
            .then_with(|| self.monomials.iter().cmp(other.monomials.iter()))
    }
}

fn aligned(a: &IntPoly, b: &IntPoly) -> (IntPoly, IntPoly) {
    let n = a.num_vars.max(b.num_vars);
    (a.with_num_vars(n).expect("growing"), b.with_num_vars(n).expect("growing"))
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        let (mut a, b) = aligned(self, rhs);
        for (e, c) in b.monomials {
            a.add_term(e, c);
        }
        a
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly {
            num_vars: self.num_vars,
            monomials: self.monomials.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        self + &(-rhs)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        let (a, b) = aligned(self, rhs);
        let mut out = IntPoly::zero(a.num_vars);
        for (ea, ca) in &a.monomials {
            for (eb, cb) in &b.monomials {
                let e: Exponents = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for IntPoly {
            type Output = IntPoly;
            fn $m(self, rhs: IntPoly) -> IntPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        -&self
    }
}

/// Machine-integer evaluator for the search kernels. Values are computed in
/// `i128` with overflow detection; callers fall back to [`IntPoly::eval`]
/// when `eval` returns `None`.
#[derive(Clone, Debug)]
pub struct MachinePoly {
    monomials: Vec<(i128, Vec<(usize, u32)>)>,
}

impl MachinePoly {
    /// `None` if some coefficient does not fit in `i128`.
    pub fn compile(p: &IntPoly) -> Option<Self> {
        let mut monomials = Vec::with_capacity(p.num_monomials());
        for (exps, c) in p.monomials() {
            let c = c.to_i128()?;
            let factors = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| (v, e))
                .collect();
            monomials.push((c, factors));
        }
        Some(MachinePoly { monomials })
    }

    #[inline]
    pub fn eval(&self, point: &[i64]) -> Option<i128> {
        let mut acc: i128 = 0;
        for (c, factors) in &self.monomials {
            let mut term = *c;
            for &(v, e) in factors {
                let x = point[v] as i128;
                for _ in 0..e {
                    term = term.checked_mul(x)?;
                }
            }
            acc = acc.checked_add(term)?;
        }
        Some(acc)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser { src: s.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<BigInt, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digits parse as integer"))
    }

    fn parse_all(mut self) -> Result<IntPoly, PolyError> {
        let p = self.expr()?;
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<IntPoly, PolyError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<IntPoly, PolyError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<IntPoly, PolyError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                return Ok(-self.factor()?);
            }
            Some(b'+') => {
                self.pos += 1;
                return self.factor();
            }
            _ => {}
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.number()?;
            let Some(e) = e.to_u32() else { return self.err("exponent too large") };
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<IntPoly, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let p = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(p)
            }
            Some(b'x') => {
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if start == self.pos {
                    return self.err("expected variable index after `x`");
                }
                let idx: usize = std::str::from_utf8(&self.src[start..self.pos])
                    .expect("ascii")
                    .parse()
                    .or_else(|_| self.err("variable index too large"))?;
                if idx > 4096 {
                    return self.err("variable index too large");
                }
                Ok(IntPoly::var(idx + 1, idx))
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.number()?;
                Ok(IntPoly::constant(0, n))
            }
            Some(c) => self.err(format!("unexpected character `{}`", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}
