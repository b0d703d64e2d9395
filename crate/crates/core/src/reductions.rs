//! Quadratic equations `c_1 a_1^2 + ... + c_k a_k^2 = a_0` (with `Σ c = 0`)
//! from witnesses of `{x, xy, x + y, x + u_1 y, ..., x + u_k y}`, and the
//! exponential lift that turns additive witnesses into multiplicative ones.
//!
//! Setup finds a non-zero rational root `t` of
//! `p(t) = Σ c_l (1 + l t)^2` (or of `q`, which uses `1 + 2k t` in the last
//! slot), sets `u_l = d (1 + l t)` with `d` the denominator of `t`, so that
//! `Σ c_l u_l^2 = 0`, and takes `b = 2 Σ c_l u_l`. Coloring `n` by
//! `χ(n / b)` when `b | n` and by its residue otherwise forces `b | x` and
//! `b | y` in any monochromatic witness, and `a_0 = xy / b`,
//! `a_l = (x + u_l y) / b` then solve the equation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::coloring::Coloring;
use crate::error::{ColoringError, ReductionError};
use crate::family::reduction_family;
use crate::rational::{rational_roots_deg2, Rational};
use crate::witness::{CompiledFamily, SearchBox};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChosenPoly {
    P,
    Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionData {
    pub c: Vec<i64>,
    pub chosen_poly: ChosenPoly,
    /// Non-zero root `t`, as `num/den`.
    pub root_t: String,
    pub d: i64,
    pub u: Vec<i64>,
    /// Indices (0-based) whose sign was flipped to make `Σ c_l u_l` non-zero.
    pub sign_flips: Vec<usize>,
    /// Whether all of `u` was negated so that `Σ c_l u_l > 0`.
    pub negated: bool,
    pub b: i64,
}

impl ReductionData {
    pub fn root(&self) -> Rational {
        let (n, d) = self.root_t.split_once('/').unwrap_or((&self.root_t, "1"));
        Rational::new(n.parse().expect("stored numerator"), d.parse().expect("stored denominator"))
    }
}

fn slot_multipliers(k: usize, which: ChosenPoly) -> Vec<i64> {
    (1..=k as i64)
        .map(|l| if which == ChosenPoly::Q && l == k as i64 { 2 * k as i64 } else { l })
        .collect()
}

/// Coefficients `[const, linear, quadratic]` of `Σ c_l (1 + a_l t)^2`.
pub fn setup_polynomial(c: &[i64], which: ChosenPoly) -> [BigInt; 3] {
    let a = slot_multipliers(c.len(), which);
    let mut out = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
    for (&cl, &al) in c.iter().zip(&a) {
        let cl = BigInt::from(cl);
        let al = BigInt::from(al);
        out[0] += &cl;
        out[1] += BigInt::from(2) * &cl * &al;
        out[2] += &cl * &al * &al;
    }
    out
}

fn big_to_i64(v: &BigInt) -> Result<i64, ReductionError> {
    v.to_i64().ok_or_else(|| ReductionError::Overflow(v.to_string()))
}

fn distinct(u: &[BigInt]) -> bool {
    let mut v = u.to_vec();
    v.sort();
    v.windows(2).all(|w| w[0] != w[1])
}

fn dot(c: &[i64], u: &[BigInt]) -> BigInt {
    c.iter().zip(u).map(|(&cl, ul)| BigInt::from(cl) * ul).sum()
}

fn dot_sq(c: &[i64], u: &[BigInt]) -> BigInt {
    c.iter().zip(u).map(|(&cl, ul)| BigInt::from(cl) * ul * ul).sum()
}

fn try_root(c: &[i64], which: ChosenPoly, t: &Rational) -> Result<Option<ReductionData>, ReductionError> {
    let a = slot_multipliers(c.len(), which);
    let d = t.denom().clone();
    let mut u: Vec<BigInt> = a
        .iter()
        .map(|&al| {
            let v = Rational::from_integer(d.clone()) * (Rational::one() + Rational::from_integer(al.into()) * t);
            debug_assert!(v.is_integer());
            v.to_integer()
        })
        .collect();
    if !distinct(&u) {
        return Ok(None);
    }
    if !dot_sq(c, &u).is_zero() {
        return Err(ReductionError::Internal(format!("Σ c u² ≠ 0 for t = {t}")));
    }
    let mut sign_flips = Vec::new();
    if dot(c, &u).is_zero() {
        let flip = (0..u.len()).find(|&l| {
            if u[l].is_zero() {
                return false;
            }
            let mut v = u.clone();
            v[l] = -&v[l];
            !dot(c, &v).is_zero() && distinct(&v)
        });
        match flip {
            Some(l) => {
                u[l] = -&u[l];
                sign_flips.push(l);
            }
            None => return Ok(None),
        }
    }
    let mut negated = false;
    if dot(c, &u).is_negative() {
        u.iter_mut().for_each(|x| *x = -&*x);
        negated = true;
    }
    let b = BigInt::from(2) * dot(c, &u);
    Ok(Some(ReductionData {
        c: c.to_vec(),
        chosen_poly: which,
        root_t: t.to_string(),
        d: big_to_i64(&d)?,
        u: u.iter().map(big_to_i64).collect::<Result<_, _>>()?,
        sign_flips,
        negated,
        b: big_to_i64(&b)?,
    }))
}

/// Derives `(t, d, u, b)` from a coefficient vector with zero sum.
pub fn quadratic_setup(c: &[i64]) -> Result<ReductionData, ReductionError> {
    if c.len() < 2 {
        return Err(ReductionError::TooFewCoefficients);
    }
    if let Some(i) = c.iter().position(|&x| x == 0) {
        return Err(ReductionError::ZeroCoefficient(i));
    }
    let sum: i128 = c.iter().map(|&x| x as i128).sum();
    if sum != 0 {
        return Err(ReductionError::NonzeroSum(sum.clamp(i64::MIN as i128, i64::MAX as i128) as i64));
    }
    for which in [ChosenPoly::P, ChosenPoly::Q] {
        let coeffs: Vec<Rational> =
            setup_polynomial(c, which).into_iter().map(Rational::from_integer).collect();
        // The zero polynomial gives no specific root to work with.
        let Ok(roots) = rational_roots_deg2(&coeffs) else { continue };
        for t in roots.iter().filter(|t| !t.is_zero()) {
            if let Some(data) = try_root(c, which, t)? {
                return Ok(data);
            }
        }
    }
    Err(ReductionError::Degenerate)
}

/// `χ̃(n) = χ(n / b)` if `b | n`, else `r + (n mod b)`, on `[1..m]`.
/// Requires `m <= b * N` so every multiple of `b` maps into `χ`'s domain.
pub fn lift_coloring_to(chi: &Coloring, b: i64, m: usize) -> Result<Coloring, ReductionError> {
    if b < 2 {
        return Err(ReductionError::BadModulus(b));
    }
    let bu = b as usize;
    if m / bu > chi.n() {
        return Err(ReductionError::Coloring(ColoringError::Format(format!(
            "lifted range {m} exceeds b * N = {}",
            bu * chi.n()
        ))));
    }
    let r = chi.r();
    let total = r + (b as u32) - 1;
    Ok(Coloring::from_fn(m, total, |n| {
        if n % bu == 0 {
            chi.color(n / bu)
        } else {
            r + (n % bu) as u32
        }
    })?)
}

/// Lift on the same range `[1..N]` as `chi`, with `r + b - 1` colors.
pub fn lift_coloring(chi: &Coloring, b: i64) -> Result<Coloring, ReductionError> {
    lift_coloring_to(chi, b, chi.n())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadSolution {
    pub c: Vec<i64>,
    pub u: Vec<i64>,
    pub b: i64,
    /// `a_0, a_1, ..., a_k`.
    pub a: Vec<i64>,
    pub color: u32,
    /// `(x, y)` under the lifted coloring.
    pub source_witness: (i64, i64),
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    /// Size of the lifted range searched; defaults to `b * N`.
    pub lifted_range: Option<usize>,
}

/// Runs setup, lifts `chi`, walks witnesses of the reduction family in
/// lexicographic order and decodes the first one giving pairwise distinct
/// `a_0, ..., a_k`. `Ok(None)` when the lifted range holds no such witness.
pub fn solve_quadratic(
    c: &[i64],
    chi: &Coloring,
    opts: &SolveOptions,
) -> Result<Option<QuadSolution>, ReductionError> {
    let data = quadratic_setup(c)?;
    let b = data.b;
    let m = opts.lifted_range.unwrap_or(chi.n().saturating_mul(b as usize));
    let lifted = lift_coloring_to(chi, b, m)?;
    let family = reduction_family(&data.u).map_err(|e| ReductionError::Internal(e.to_string()))?;
    let cf = CompiledFamily::new(&family);
    let bx: Option<SearchBox> = None;
    for inst in cf.instances(m, bx.as_ref()) {
        let first = lifted.color(inst.term_values[0] as usize);
        if inst.term_values.iter().any(|&v| lifted.color(v as usize) != first) {
            continue;
        }
        let (x, y) = (inst.assignment[0], inst.assignment[1]);
        if x % b != 0 || y % b != 0 {
            return Err(ReductionError::Internal(format!(
                "monochromatic (x, y) = ({x}, {y}) not divisible by b = {b}"
            )));
        }
        let xb = BigInt::from(x);
        let yb = BigInt::from(y);
        let bb = BigInt::from(b);
        let mut a = vec![(&xb * &yb).div_floor(&bb)];
        for &ul in &data.u {
            a.push((&xb + BigInt::from(ul) * &yb).div_floor(&bb));
        }
        let a: Vec<i64> = a.iter().map(big_to_i64).collect::<Result<_, _>>()?;
        if a.iter().any(|&v| v < 1) {
            continue;
        }
        let mut sorted = a.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let sol = QuadSolution {
            c: c.to_vec(),
            u: data.u.clone(),
            b,
            a,
            color: chi.color(x as usize / b as usize),
            source_witness: (x, y),
        };
        check_quad_solution(chi, &sol).map_err(ReductionError::Internal)?;
        return Ok(Some(sol));
    }
    Ok(None)
}

/// Standalone check of a decoded solution: the equation holds exactly, the
/// `a`'s are pairwise distinct positive integers in range, and all share
/// `sol.color` under `chi`.
pub fn check_quad_solution(chi: &Coloring, sol: &QuadSolution) -> Result<(), String> {
    if sol.a.len() != sol.c.len() + 1 {
        return Err(format!("expected {} values, got {}", sol.c.len() + 1, sol.a.len()));
    }
    let lhs: BigInt = sol
        .c
        .iter()
        .zip(&sol.a[1..])
        .map(|(&cl, &al)| BigInt::from(cl) * BigInt::from(al) * BigInt::from(al))
        .sum();
    if lhs != BigInt::from(sol.a[0]) {
        return Err(format!("Σ c a² = {lhs} but a_0 = {}", sol.a[0]));
    }
    for (i, &ai) in sol.a.iter().enumerate() {
        if ai < 1 || ai as u64 > chi.n() as u64 {
            return Err(format!("a_{i} = {ai} outside [1..{}]", chi.n()));
        }
        if chi.color(ai as usize) != sol.color {
            return Err(format!("a_{i} = {ai} has color {} ≠ {}", chi.color(ai as usize), sol.color));
        }
        if sol.a[..i].contains(&ai) {
            return Err(format!("a_{i} = {ai} repeats an earlier value"));
        }
    }
    Ok(())
}

/// Coloring `n ↦ χ(base^n)` on `[1..⌊log_base N⌋]`.
pub fn exp_lift(chi: &Coloring, base: u64) -> Result<Coloring, ReductionError> {
    if base < 2 {
        return Err(ReductionError::BadBase(base));
    }
    let mut powers = Vec::new();
    let mut p: u128 = base as u128;
    while p <= chi.n() as u128 {
        powers.push(p as usize);
        p *= base as u128;
    }
    if powers.is_empty() {
        return Err(ReductionError::DomainTooSmall { n: chi.n(), base });
    }
    Ok(Coloring::new(chi.r(), powers.iter().map(|&q| chi.color(q)).collect())?)
}

/// Maps a lifted witness `(x, y)` to `(base^x, base^y, base^(x+y))`.
pub fn decode_exp_pair(base: u64, x: u32, y: u32) -> (BigInt, BigInt, BigInt) {
    let b = BigInt::from(base);
    let px = num_traits::pow(b.clone(), x as usize);
    let py = num_traits::pow(b, y as usize);
    let prod = &px * &py;
    (px, py, prod)
}
