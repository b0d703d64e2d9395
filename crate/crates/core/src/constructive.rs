//! Finite-scale run of the iterated shift-and-dilate construction that yields
//! a monochromatic `{x, x + y, x*y}`.
//!
//! Starting from a color class `B_0`, each round picks a multiplier `y_i`
//! such that
//!
//! ```text
//! D_i = B_{i-1} ∩ ⋂_{j=1..i} (B_{i-1} - y_j^2 ⋯ y_{i-1}^2 y_i)
//! ```
//!
//! is large enough, then keeps the best color class of the dilation:
//! `B_i = y_i D_i ∩ C_{t_i}`. Once a color repeats (`t_i = t_j`, `j < i`),
//! any `x̃ ∈ B_i` gives `y = y_{j+1} ⋯ y_i`, `x = x̃ / y` with
//! `{x, x + y, x y} ⊂ C_{t_i}`. All sets live in `[1..N]` and every
//! containment used by that argument is checked on the computed sets.

use serde::{Deserialize, Serialize};

use crate::coloring::Coloring;
use crate::error::ConstructionError;
use crate::family::preset_family;
use crate::witness::{verify_witness, Instance, Witness};

/// Subset of `[1..n]` stored as a bitset (bit `i` is integer `i`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntSet {
    n: usize,
    words: Vec<u64>,
}

impl IntSet {
    pub fn empty(n: usize) -> Self {
        IntSet { n, words: vec![0; n / 64 + 1] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = IntSet::empty(n);
        for i in 1..=n {
            s.insert(i);
        }
        s
    }

    pub fn from_iter(n: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = IntSet::empty(n);
        for i in items {
            s.insert(i);
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Panics unless `1 <= i <= n`.
    pub fn insert(&mut self, i: usize) {
        assert!(i >= 1 && i <= self.n, "{i} outside [1..{}]", self.n);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= self.n && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    pub fn min(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn max(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(wi, &w)| wi * 64 + 63 - w.leading_zeros() as usize)
    }

    /// `{b - c : b ∈ self, b > c}`.
    pub fn shifted_down(&self, c: usize) -> IntSet {
        let mut out = IntSet::empty(self.n);
        if c > self.n {
            return out;
        }
        let (ws, bs) = (c / 64, c % 64);
        let len = self.words.len();
        for i in 0..len {
            let lo = self.words.get(i + ws).copied().unwrap_or(0);
            let hi = self.words.get(i + ws + 1).copied().unwrap_or(0);
            out.words[i] = if bs == 0 { lo } else { (lo >> bs) | (hi << (64 - bs)) };
        }
        out.words[0] &= !1;
        out
    }

    pub fn intersect_with(&mut self, other: &IntSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn intersection(&self, other: &IntSet) -> IntSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn is_subset(&self, other: &IntSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// `{y d : d ∈ self, y d <= n}` and the number of elements dropped.
    pub fn dilated(&self, y: usize) -> (IntSet, usize) {
        let mut out = IntSet::empty(self.n);
        let mut dropped = 0;
        for d in self.iter() {
            match d.checked_mul(y) {
                Some(v) if v <= self.n => out.insert(v),
                _ => dropped += 1,
            }
        }
        (out, dropped)
    }
}

/// A set together with the interval over which its gaps are measured.
#[derive(Clone, Debug)]
pub struct FiniteSetWindow {
    pub elements: IntSet,
    pub window: (usize, usize),
}

impl FiniteSetWindow {
    pub fn new(elements: IntSet, window: (usize, usize)) -> Self {
        FiniteSetWindow { elements, window }
    }

    /// Largest distance between consecutive elements inside the window,
    /// with virtual neighbours at `lo - 1` and `hi`. An empty set has gap
    /// `hi - lo + 1`.
    pub fn max_gap(&self) -> usize {
        let (lo, hi) = self.window;
        assert!(lo >= 1 && lo <= hi, "window must be non-empty");
        let mut prev = lo - 1;
        let mut gap = 0;
        for e in self.elements.iter().filter(|&e| e >= lo && e <= hi) {
            gap = gap.max(e - prev);
            prev = e;
        }
        gap.max(hi - prev)
    }
}

pub fn max_gap(s: &FiniteSetWindow) -> usize {
    s.max_gap()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectFailure {
    pub best_y: usize,
    pub best_size: usize,
}

/// Smallest `y <= y_max` with `|B ∩ ⋂_k (B - m_k y)| >= size_floor`.
pub fn select_y(
    b: &IntSet,
    multipliers: &[usize],
    y_max: usize,
    size_floor: usize,
) -> Result<(usize, IntSet), SelectFailure> {
    let mut best = SelectFailure { best_y: 0, best_size: 0 };
    let top = b.max().unwrap_or(0);
    for y in 1..=y_max {
        let mut d = b.clone();
        let mut exhausted = true;
        for &m in multipliers {
            let shift = m.saturating_mul(y);
            if shift < top {
                exhausted = false;
            }
            d.intersect_with(&b.shifted_down(shift));
        }
        let size = d.len();
        if size > best.best_size || best.best_y == 0 {
            best = SelectFailure { best_y: y, best_size: size };
        }
        if size >= size_floor {
            return Ok((y, d));
        }
        // every shift already clears max(B); larger y only empties D further
        if exhausted && !multipliers.is_empty() {
            break;
        }
    }
    Err(best)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionParams {
    /// Largest multiplier tried per round; `None` means `N`.
    pub y_max: Option<usize>,
    pub size_floor: usize,
    /// Rounds before giving up; `None` means `r + 1`.
    pub max_rounds: Option<usize>,
}

impl Default for ConstructionParams {
    fn default() -> Self {
        ConstructionParams { y_max: None, size_floor: 1, max_rounds: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionWitness {
    pub x: u64,
    pub y: u64,
    pub x_tilde: u64,
    pub color: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructiveTrace {
    pub n: usize,
    pub r: u32,
    /// Colors `t_0, t_1, ...`.
    pub t: Vec<u32>,
    /// Multipliers `y_1, y_2, ...`.
    pub y: Vec<usize>,
    /// `|B_0|, |B_1|, ...`.
    pub b_sizes: Vec<usize>,
    /// `|D_1|, |D_2|, ...`.
    pub d_sizes: Vec<usize>,
    /// Elements of `y_i D_i` dropped for exceeding `N`, per round.
    pub truncated: Vec<usize>,
    pub t0_max_gap: usize,
    pub repeat_pair: Option<(usize, usize)>,
    pub witness: Option<ConstructionWitness>,
    pub failure_reason: Option<String>,
}

fn violated<T>(msg: String) -> Result<T, ConstructionError> {
    Err(ConstructionError::InvariantViolated(msg))
}

/// Runs the construction against `coloring`. Running out of room (no usable
/// `y`, empty `B_i`, too few rounds) is reported in the trace; an error means
/// one of the exact containments failed.
pub fn run_construction(
    coloring: &Coloring,
    params: &ConstructionParams,
) -> Result<ConstructiveTrace, ConstructionError> {
    if params.size_floor == 0 {
        return Err(ConstructionError::InvalidParameters("size_floor must be at least 1".into()));
    }
    let n = coloring.n();
    let r = coloring.r();
    let y_max = params.y_max.unwrap_or(n);
    let max_rounds = params.max_rounds.unwrap_or(r as usize + 1);

    let classes: Vec<IntSet> =
        (1..=r).map(|t| IntSet::from_iter(n, coloring.class(t))).collect();
    let gaps: Vec<usize> = classes
        .iter()
        .map(|c| FiniteSetWindow::new(c.clone(), (1, n)).max_gap())
        .collect();
    let t0_idx = (0..r as usize).min_by_key(|&i| (gaps[i], i)).expect("r >= 1");

    let mut trace = ConstructiveTrace {
        n,
        r,
        t: vec![t0_idx as u32 + 1],
        y: Vec::new(),
        b_sizes: vec![classes[t0_idx].len()],
        d_sizes: Vec::new(),
        truncated: Vec::new(),
        t0_max_gap: gaps[t0_idx],
        repeat_pair: None,
        witness: None,
        failure_reason: None,
    };
    let mut bs: Vec<IntSet> = vec![classes[t0_idx].clone()];
    if bs[0].is_empty() {
        trace.failure_reason = Some("every color class is empty".into());
        return Ok(trace);
    }

    for i in 1..=max_rounds {
        let prev = &bs[i - 1];
        // multiplier for index j: y_j^2 ⋯ y_{i-1}^2 (empty product = 1)
        let cap = n + 1;
        let mults: Vec<usize> = (1..=i)
            .map(|j| {
                trace.y[j - 1..i - 1]
                    .iter()
                    .fold(1usize, |acc, &yl| acc.saturating_mul(yl.saturating_mul(yl)).min(cap))
            })
            .collect();
        let (yi, di) = match select_y(prev, &mults, y_max, params.size_floor) {
            Ok(v) => v,
            Err(f) => {
                trace.failure_reason = Some(format!(
                    "round {i}: no y <= {y_max} gives |D| >= {} (best y = {}, |D| = {})",
                    params.size_floor, f.best_y, f.best_size
                ));
                return Ok(trace);
            }
        };
        for (j, &m) in mults.iter().enumerate() {
            let shifted = prev.shifted_down(m.saturating_mul(yi));
            if !di.is_subset(prev) || !di.is_subset(&shifted) {
                return violated(format!("round {i}: D_{i} not inside B_{} - shift for j = {}", i - 1, j + 1));
            }
        }
        let (dil, dropped) = di.dilated(yi);
        let (best_t, bi) = classes
            .iter()
            .enumerate()
            .map(|(t, c)| (t, dil.intersection(c)))
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
            .expect("r >= 1");
        if !bi.is_subset(&dil) {
            return violated(format!("round {i}: B_{i} not inside y_{i} D_{i}"));
        }
        trace.y.push(yi);
        trace.d_sizes.push(di.len());
        trace.truncated.push(dropped);
        trace.t.push(best_t as u32 + 1);
        trace.b_sizes.push(bi.len());
        bs.push(bi);
        let bi = &bs[i];

        // B_i ⊂ y_{m+1} ⋯ y_i B_m: every element divisible by that product
        for m in 0..i {
            let prod = trace.y[m..i].iter().fold(1u128, |acc, &v| acc * v as u128);
            if let Some(e) = bi.iter().find(|&e| !(e as u128).is_multiple_of(prod)) {
                return violated(format!("round {i}: {e} ∈ B_{i} not divisible by y_{}⋯y_{i} = {prod}", m + 1));
            }
        }

        if bi.is_empty() {
            trace.failure_reason = Some(format!("round {i}: B_{i} is empty after truncation to [1..{n}]"));
            return Ok(trace);
        }

        let ti = trace.t[i];
        if let Some(j) = trace.t[..i].iter().position(|&t| t == ti) {
            trace.repeat_pair = Some((j, i));
            let x_tilde = bi.min().expect("non-empty");
            let y: usize = trace.y[j..i].iter().product();
            if !x_tilde.is_multiple_of(y) {
                return violated(format!("x̃ = {x_tilde} not divisible by y = {y}"));
            }
            let x = x_tilde / y;
            let family = preset_family("xyxy", None).expect("preset");
            let w = Witness {
                instance: Instance {
                    assignment: vec![x as i64, y as i64],
                    term_values: vec![x as i64, (x + y) as i64, x_tilde as i64],
                },
                color: ti,
            };
            if let Err(e) = verify_witness(&family, coloring, &w, false) {
                return violated(format!("extracted (x, y) = ({x}, {y}) fails verification: {e}"));
            }
            trace.witness = Some(ConstructionWitness {
                x: x as u64,
                y: y as u64,
                x_tilde: x_tilde as u64,
                color: ti,
            });
            return Ok(trace);
        }
    }
    trace.failure_reason = Some(format!("no repeated color within {max_rounds} rounds"));
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaps() {
        let evens = IntSet::from_iter(100, (2..=100).step_by(2));
        assert_eq!(max_gap(&FiniteSetWindow::new(evens, (1, 100))), 2);
        assert_eq!(max_gap(&FiniteSetWindow::new(IntSet::full(100), (1, 100))), 1);
        let single = IntSet::from_iter(100, [50]);
        assert_eq!(max_gap(&FiniteSetWindow::new(single, (1, 100))), 50);
        assert_eq!(max_gap(&FiniteSetWindow::new(IntSet::empty(100), (1, 100))), 100);
    }

    #[test]
    fn shift_matches_definition() {
        let s = IntSet::from_iter(200, [1, 5, 63, 64, 65, 127, 128, 129, 200]);
        for c in [0, 1, 4, 63, 64, 65, 130, 199, 200, 500] {
            let expected: Vec<usize> = s.iter().filter(|&b| b > c).map(|b| b - c).collect();
            assert_eq!(s.shifted_down(c).iter().collect::<Vec<_>>(), expected, "shift {c}");
        }
        assert_eq!(s.max(), Some(200));
        assert_eq!(s.min(), Some(1));
    }

    #[test]
    fn select_on_full_set() {
        let (y, d) = select_y(&IntSet::full(100), &[1], 10, 1).unwrap();
        assert_eq!(y, 1);
        assert_eq!(d, IntSet::from_iter(100, 1..=99));
    }

    #[test]
    fn select_on_evens() {
        let evens = IntSet::from_iter(100, (2..=100).step_by(2));
        let (y, d) = select_y(&evens, &[1], 10, 1).unwrap();
        assert_eq!(y, 2);
        assert_eq!(d, IntSet::from_iter(100, (2..=98).step_by(2)));
    }

    #[test]
    fn select_on_singleton_fails() {
        let one = IntSet::from_iter(100, [1]);
        assert!(select_y(&one, &[1, 3], 10, 1).is_err());
    }

    #[test]
    fn single_color_repeats_immediately() {
        let trace = run_construction(&Coloring::monochromatic(1000), &ConstructionParams::default()).unwrap();
        assert_eq!(trace.t, vec![1, 1]);
        assert_eq!(trace.repeat_pair, Some((0, 1)));
        let w = trace.witness.unwrap();
        assert_eq!((w.x, w.y, w.color), (1, 1, 1));
    }

    #[test]
    fn tiny_range_fails_in_round_one() {
        let c = Coloring::from_fn(10, 3, |i| ((i - 1) % 3) as u32 + 1).unwrap();
        let params = ConstructionParams { y_max: Some(1), size_floor: 5, max_rounds: None };
        let trace = run_construction(&c, &params).unwrap();
        assert!(trace.witness.is_none());
        assert!(trace.failure_reason.as_deref().unwrap().starts_with("round 1"));
    }

    #[test]
    fn parity_witness_verifies_if_present() {
        let c = Coloring::parity(10_000);
        for floor in [1, 10, 100, 1000] {
            let params = ConstructionParams { size_floor: floor, ..Default::default() };
            let trace = run_construction(&c, &params).unwrap();
            if let Some(w) = trace.witness {
                let fam = preset_family("xyxy", None).unwrap();
                let wit = Witness {
                    instance: Instance {
                        assignment: vec![w.x as i64, w.y as i64],
                        term_values: vec![w.x as i64, (w.x + w.y) as i64, (w.x * w.y) as i64],
                    },
                    color: w.color,
                };
                assert!(verify_witness(&fam, &c, &wit, false).is_ok());
            }
        }
    }

    #[test]
    fn zero_floor_rejected() {
        let params = ConstructionParams { size_floor: 0, ..Default::default() };
        assert!(run_construction(&Coloring::monochromatic(5), &params).is_err());
    }
}
