//! Brute-force oracles sharing no code with the search kernels: plain
//! enumeration of `[1..N]^s` with big-integer evaluation, and exhaustive
//! enumeration of all `r^N` colorings.
#![allow(dead_code)]

use std::collections::BTreeSet;

use monochrome_core::family::PatternFamily;
use num_bigint::BigInt;
use num_traits::ToPrimitive;

/// `(assignment, term values)` for every point of `[1..N]^s` whose values
/// all lie in `[1..N]`.
pub fn naive_instances(family: &PatternFamily, n: usize) -> Vec<(Vec<i64>, Vec<i64>)> {
    let s = family.num_vars();
    let mut out = Vec::new();
    let mut point = vec![1i64; s];
    loop {
        let big: Vec<BigInt> = point.iter().map(|&v| BigInt::from(v)).collect();
        let vals: Option<Vec<i64>> = family
            .terms()
            .iter()
            .map(|t| t.eval(&big).unwrap().to_i64().filter(|&v| v >= 1 && v as usize <= n))
            .collect();
        if let Some(vals) = vals {
            out.push((point.clone(), vals));
        }
        let mut k = s;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if point[k] < n as i64 {
                point[k] += 1;
                break;
            }
            point[k] = 1;
        }
    }
}

/// Distinct value sets of admissible instances (honouring the family's
/// distinctness flag).
pub fn naive_value_sets(family: &PatternFamily, n: usize) -> Vec<Vec<usize>> {
    let mut sets = BTreeSet::new();
    for (_, vals) in naive_instances(family, n) {
        let mut v: Vec<usize> = vals.iter().map(|&x| x as usize).collect();
        v.sort_unstable();
        let len = v.len();
        v.dedup();
        if family.distinct_required() && v.len() != len {
            continue;
        }
        sets.insert(v);
    }
    sets.into_iter().collect()
}

fn is_avoiding(colors: &[u8], sets: &[Vec<usize>]) -> bool {
    sets.iter().all(|s| {
        let c = colors[s[0] - 1];
        s.iter().any(|&v| colors[v - 1] != c)
    })
}

/// Some `r`-coloring of `[1..N]` avoids the family; tries all `r^N`.
pub fn naive_exists_avoiding(family: &PatternFamily, r: u32, n: usize) -> Option<Vec<u8>> {
    let sets = naive_value_sets(family, n);
    let mut colors = vec![1u8; n];
    loop {
        if is_avoiding(&colors, &sets) {
            return Some(colors);
        }
        let mut k = n;
        loop {
            if k == 0 {
                return None;
            }
            k -= 1;
            if (colors[k] as u32) < r {
                colors[k] += 1;
                break;
            }
            colors[k] = 1;
        }
    }
}

/// Smallest `N <= max_n` with no avoiding coloring.
pub fn naive_threshold(family: &PatternFamily, r: u32, max_n: usize) -> Option<usize> {
    (1..=max_n).find(|&n| naive_exists_avoiding(family, r, n).is_none())
}

pub fn all_presets() -> Vec<PatternFamily> {
    ["schur", "xyxy", "x_xp1", "x_y_3xmy", "vdw:3", "vdw:4", "geometric:1", "geometric:2"]
        .iter()
        .map(|p| monochrome_core::family::parse_preset(p).unwrap())
        .collect()
}
