//! Instances and monochromatic witnesses of a family inside `[1..N]`.
//!
//! An assignment is *admissible* when every term value lies in `[1..N]`.
//! Enumeration walks assignments in lexicographic order and prunes with terms
//! whose non-constant coefficients are all positive: such a term only grows
//! as a variable grows, so once its lower bound (remaining variables at their
//! box minimum) exceeds `N` the current variable can stop increasing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::coloring::Coloring;
use crate::family::PatternFamily;
use crate::poly::{IntPoly, MachinePoly};

/// A variable assignment with the resulting term values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instance {
    pub assignment: Vec<i64>,
    pub term_values: Vec<i64>,
}

impl Instance {
    pub fn is_admissible(&self, n: usize) -> bool {
        self.term_values.iter().all(|&v| v >= 1 && v as u64 <= n as u64)
    }

    pub fn values_distinct(&self) -> bool {
        let mut v = self.term_values.clone();
        v.sort_unstable();
        v.windows(2).all(|w| w[0] != w[1])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Witness {
    pub instance: Instance,
    pub color: u32,
}

/// Inclusive per-variable bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBox {
    pub bounds: Vec<(i64, i64)>,
}

impl SearchBox {
    pub fn uniform(num_vars: usize, lo: i64, hi: i64) -> Self {
        SearchBox { bounds: vec![(lo, hi); num_vars] }
    }
}

#[derive(Clone, Debug)]
struct CompiledTerm {
    poly: IntPoly,
    machine: Option<MachinePoly>,
    /// All non-constant coefficients positive.
    monotone: bool,
}

impl CompiledTerm {
    fn new(poly: &IntPoly) -> Self {
        let monotone = poly
            .monomials()
            .filter(|(e, _)| e.iter().any(|&x| x > 0))
            .all(|(_, c)| c.is_positive());
        CompiledTerm { poly: poly.clone(), machine: MachinePoly::compile(poly), monotone }
    }

    /// Exact value, with `i128::MAX` standing in for anything outside `i128`.
    #[inline]
    fn eval(&self, point: &[i64]) -> i128 {
        if let Some(v) = self.machine.as_ref().and_then(|m| m.eval(point)) {
            return v;
        }
        let big = self.poly.eval_i64(point).expect("dimension checked");
        big.to_i128().unwrap_or(if big.is_negative() { i128::MIN } else { i128::MAX })
    }

    /// Whether every variable of this term is bounded by `N` whenever the
    /// term value is at most `N`.
    fn bounds_its_vars(&self) -> bool {
        self.monotone && !self.poly.constant_term().is_negative()
    }
}

/// A family prepared for repeated enumeration.
#[derive(Clone, Debug)]
pub struct CompiledFamily {
    family: PatternFamily,
    terms: Vec<CompiledTerm>,
    /// `prune_at[k]`: monotone terms to re-check after variable `k` changes.
    prune_at: Vec<Vec<usize>>,
    bounded: Vec<bool>,
}

impl CompiledFamily {
    pub fn new(family: &PatternFamily) -> Self {
        let s = family.num_vars();
        let terms: Vec<CompiledTerm> = family.terms().iter().map(CompiledTerm::new).collect();
        let mut prune_at = vec![Vec::new(); s];
        for (ti, t) in terms.iter().enumerate() {
            if !t.monotone {
                continue;
            }
            for (k, list) in prune_at.iter_mut().enumerate() {
                if k == 0 || t.poly.depends_on(k) {
                    list.push(ti);
                }
            }
        }
        let bounded = (0..s)
            .map(|v| terms.iter().any(|t| t.bounds_its_vars() && t.poly.depends_on(v)))
            .collect();
        CompiledFamily { family: family.clone(), terms, prune_at, bounded }
    }

    pub fn family(&self) -> &PatternFamily {
        &self.family
    }

    pub fn num_vars(&self) -> usize {
        self.family.num_vars()
    }

    /// True iff every admissible assignment for `[1..N]` lies inside the
    /// enumeration box: every variable occurs in a term with positive
    /// non-constant coefficients and non-negative constant, and the box
    /// covers `[1..N]` in every coordinate.
    pub fn box_complete(&self, n: usize, search_box: Option<&SearchBox>) -> bool {
        let vars_bounded = self.bounded.iter().all(|&b| b);
        let covers = match search_box {
            None => true,
            Some(b) => b.bounds.iter().all(|&(lo, hi)| lo <= 1 && hi >= n as i64),
        };
        vars_bounded && covers
    }

    pub fn eval_terms(&self, assignment: &[i64]) -> Vec<i128> {
        self.terms.iter().map(|t| t.eval(assignment)).collect()
    }

    fn bounds(&self, n: usize, search_box: Option<&SearchBox>) -> (Vec<i64>, Vec<i64>) {
        let s = self.num_vars();
        match search_box {
            None => (vec![1; s], vec![n as i64; s]),
            Some(b) => {
                assert_eq!(b.bounds.len(), s, "search box dimension");
                b.bounds.iter().map(|&(lo, hi)| (lo.max(1), hi)).unzip()
            }
        }
    }

    /// Lexicographic stream of admissible instances.
    pub fn instances(&self, n: usize, search_box: Option<&SearchBox>) -> InstanceStream<'_> {
        let (lo, hi) = self.bounds(n, search_box);
        InstanceStream {
            complete: self.box_complete(n, search_box),
            iter: InstanceIter::new(self, n, lo, hi),
        }
    }

    /// Splits the box by the value of the first variable, for parallel
    /// workers; concatenating the parts in order gives the sequential stream.
    fn first_var_slices(&self, n: usize, search_box: Option<&SearchBox>) -> Vec<(Vec<i64>, Vec<i64>)> {
        let (lo, hi) = self.bounds(n, search_box);
        if lo.is_empty() {
            return vec![(lo, hi)];
        }
        (lo[0]..=hi[0])
            .map(|v| {
                let mut l = lo.clone();
                let mut h = hi.clone();
                l[0] = v;
                h[0] = v;
                (l, h)
            })
            .collect()
    }
}

/// Iterator over admissible instances plus the box-completeness flag.
pub struct InstanceStream<'a> {
    pub complete: bool,
    iter: InstanceIter<'a>,
}

impl Iterator for InstanceStream<'_> {
    type Item = Instance;
    fn next(&mut self) -> Option<Instance> {
        self.iter.next()
    }
}

struct InstanceIter<'a> {
    cf: &'a CompiledFamily,
    n: i128,
    lo: Vec<i64>,
    hi: Vec<i64>,
    assign: Vec<i64>,
    scratch: Vec<i64>,
    started: bool,
    done: bool,
}

impl<'a> InstanceIter<'a> {
    fn new(cf: &'a CompiledFamily, n: usize, lo: Vec<i64>, hi: Vec<i64>) -> Self {
        let s = lo.len();
        InstanceIter {
            cf,
            n: n as i128,
            assign: lo.clone(),
            scratch: vec![0; s],
            lo,
            hi,
            started: false,
            done: false,
        }
    }

    /// True if no admissible completion exists with `assign[0..=k]` fixed
    /// and any `assign[k] >= current`.
    fn pruned(&mut self, k: usize) -> bool {
        let terms = &self.cf.prune_at[k];
        if terms.is_empty() {
            return false;
        }
        self.scratch[..=k].copy_from_slice(&self.assign[..=k]);
        self.scratch[k + 1..].copy_from_slice(&self.lo[k + 1..]);
        terms.iter().any(|&ti| self.cf.terms[ti].eval(&self.scratch) > self.n)
    }

    /// Moves to the next full assignment that survives pruning.
    fn advance(&mut self) -> bool {
        let s = self.lo.len();
        let mut k: usize;
        if !self.started {
            self.started = true;
            if s == 0 {
                return true;
            }
            if self.lo.iter().zip(&self.hi).any(|(l, h)| l > h) {
                return false;
            }
            k = 0;
            self.assign[0] = self.lo[0];
        } else {
            if s == 0 {
                return false;
            }
            k = s - 1;
            self.assign[k] += 1;
        }
        loop {
            if self.assign[k] > self.hi[k] || self.pruned(k) {
                if k == 0 {
                    return false;
                }
                k -= 1;
                self.assign[k] += 1;
                continue;
            }
            if k == s - 1 {
                return true;
            }
            k += 1;
            self.assign[k] = self.lo[k];
        }
    }
}

impl Iterator for InstanceIter<'_> {
    type Item = Instance;

    fn next(&mut self) -> Option<Instance> {
        while !self.done {
            if !self.advance() {
                self.done = true;
                break;
            }
            let mut values = Vec::with_capacity(self.cf.terms.len());
            let mut ok = true;
            for t in &self.cf.terms {
                let v = t.eval(&self.assign);
                if v < 1 || v > self.n {
                    ok = false;
                    break;
                }
                values.push(v as i64);
            }
            if ok {
                return Some(Instance { assignment: self.assign.clone(), term_values: values });
            }
        }
        None
    }
}

/// Admissible instances of `family` in `[1..N]`, plus whether the box is complete.
pub fn enumerate_instances(
    family: &PatternFamily,
    n: usize,
    search_box: Option<&SearchBox>,
) -> (Vec<Instance>, bool) {
    let cf = CompiledFamily::new(family);
    let stream = cf.instances(n, search_box);
    let complete = stream.complete;
    (stream.collect(), complete)
}

#[derive(Clone, Debug, Default)]
pub struct WitnessOptions {
    /// Require pairwise distinct term values (in addition to the family flag).
    pub distinct: bool,
    pub search_box: Option<SearchBox>,
    /// Worker threads; 0 or 1 means sequential.
    pub jobs: usize,
}

/// Color shared by every term value, if the instance is a witness.
pub fn monochromatic_color(inst: &Instance, coloring: &Coloring, distinct: bool) -> Option<u32> {
    let first = coloring.get(*inst.term_values.first()?)?;
    for &v in &inst.term_values[1..] {
        if coloring.get(v)? != first {
            return None;
        }
    }
    if distinct && !inst.values_distinct() {
        return None;
    }
    Some(first)
}

fn to_witness(inst: Instance, coloring: &Coloring, distinct: bool) -> Option<Witness> {
    monochromatic_color(&inst, coloring, distinct).map(|color| Witness { instance: inst, color })
}

fn run_parallel<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool")
        .install(f)
}

/// Lexicographically smallest witness, if any.
pub fn find_first_witness(
    family: &PatternFamily,
    coloring: &Coloring,
    opts: &WitnessOptions,
) -> Option<Witness> {
    let cf = CompiledFamily::new(family);
    find_first_witness_compiled(&cf, coloring, opts)
}

pub fn find_first_witness_compiled(
    cf: &CompiledFamily,
    coloring: &Coloring,
    opts: &WitnessOptions,
) -> Option<Witness> {
    let distinct = opts.distinct || cf.family().distinct_required();
    let n = coloring.n();
    if opts.jobs <= 1 {
        return cf
            .instances(n, opts.search_box.as_ref())
            .find_map(|inst| to_witness(inst, coloring, distinct));
    }
    let slices = cf.first_var_slices(n, opts.search_box.as_ref());
    run_parallel(opts.jobs, || {
        slices
            .into_par_iter()
            .map(|(lo, hi)| {
                InstanceIter::new(cf, n, lo, hi).find_map(|inst| to_witness(inst, coloring, distinct))
            })
            .find_first(Option::is_some)
            .flatten()
    })
}

/// Every witness in the box, in lexicographic order.
pub fn find_all_witnesses(
    family: &PatternFamily,
    coloring: &Coloring,
    opts: &WitnessOptions,
) -> Vec<Witness> {
    let cf = CompiledFamily::new(family);
    let distinct = opts.distinct || family.distinct_required();
    let n = coloring.n();
    if opts.jobs <= 1 {
        return cf
            .instances(n, opts.search_box.as_ref())
            .filter_map(|inst| to_witness(inst, coloring, distinct))
            .collect();
    }
    let slices = cf.first_var_slices(n, opts.search_box.as_ref());
    run_parallel(opts.jobs, || {
        slices
            .into_par_iter()
            .flat_map_iter(|(lo, hi)| {
                InstanceIter::new(&cf, n, lo, hi)
                    .filter_map(|inst| to_witness(inst, coloring, distinct))
                    .collect::<Vec<_>>()
            })
            .collect()
    })
}

pub fn count_witnesses(family: &PatternFamily, coloring: &Coloring, opts: &WitnessOptions) -> u64 {
    let cf = CompiledFamily::new(family);
    count_witnesses_compiled(&cf, coloring, opts)
}

pub fn count_witnesses_compiled(cf: &CompiledFamily, coloring: &Coloring, opts: &WitnessOptions) -> u64 {
    let distinct = opts.distinct || cf.family().distinct_required();
    let n = coloring.n();
    let count = |it: &mut dyn Iterator<Item = Instance>| {
        it.filter(|inst| monochromatic_color(inst, coloring, distinct).is_some()).count() as u64
    };
    if opts.jobs <= 1 {
        return count(&mut cf.instances(n, opts.search_box.as_ref()));
    }
    let slices = cf.first_var_slices(n, opts.search_box.as_ref());
    run_parallel(opts.jobs, || {
        slices
            .into_par_iter()
            .map(|(lo, hi)| count(&mut InstanceIter::new(cf, n, lo, hi)))
            .sum()
    })
}

/// Re-checks a witness from scratch with exact arithmetic. The error names
/// the first violated condition.
pub fn verify_witness(
    family: &PatternFamily,
    coloring: &Coloring,
    witness: &Witness,
    distinct: bool,
) -> Result<(), String> {
    let inst = &witness.instance;
    if inst.assignment.len() != family.num_vars() {
        return Err(format!(
            "assignment has {} entries, family has {} variables",
            inst.assignment.len(),
            family.num_vars()
        ));
    }
    if let Some(i) = inst.assignment.iter().position(|&x| x < 1) {
        return Err(format!("variable x{i} = {} is not positive", inst.assignment[i]));
    }
    if inst.term_values.len() != family.len() {
        return Err(format!(
            "witness lists {} term values, family has {} terms",
            inst.term_values.len(),
            family.len()
        ));
    }
    let point: Vec<BigInt> = inst.assignment.iter().map(|&x| BigInt::from(x)).collect();
    let n = BigInt::from(coloring.n());
    let mut seen = Vec::with_capacity(family.len());
    for (k, (term, &claimed)) in family.terms().iter().zip(&inst.term_values).enumerate() {
        let idx = k + 1;
        let value = term.eval(&point).map_err(|e| e.to_string())?;
        if value != BigInt::from(claimed) {
            return Err(format!("term {idx} evaluates to {value}, witness claims {claimed}"));
        }
        if value < BigInt::from(1) || value > n {
            return Err(format!("term {idx} out of range: value {value} not in [1..{n}]"));
        }
        let c = coloring.color(claimed as usize);
        if c != witness.color {
            return Err(format!("term {idx} colored {c} ≠ {}", witness.color));
        }
        seen.push(claimed);
    }
    if distinct || family.distinct_required() {
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(format!("term value {} repeated but distinct values required", w[0]));
        }
    }
    Ok(())
}

/// Witness JSON: `{family_name, n, r, assignment, term_values, color}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub family_name: String,
    pub n: usize,
    pub r: u32,
    pub assignment: Vec<i64>,
    pub term_values: Vec<i64>,
    pub color: u32,
}

impl WitnessRecord {
    pub fn new(family: &PatternFamily, coloring: &Coloring, w: &Witness) -> Self {
        WitnessRecord {
            family_name: family.name().to_owned(),
            n: coloring.n(),
            r: coloring.r(),
            assignment: w.instance.assignment.clone(),
            term_values: w.instance.term_values.clone(),
            color: w.color,
        }
    }

    pub fn witness(&self) -> Witness {
        Witness {
            instance: Instance {
                assignment: self.assignment.clone(),
                term_values: self.term_values.clone(),
            },
            color: self.color,
        }
    }
}
