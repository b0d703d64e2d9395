//! Avoiding colorings and threshold numbers.
//!
//! The search colors positions `1, 2, ...` in order. Instances are bucketed by
//! their largest value, so coloring position `p` only has to check the
//! instances whose maximum is `p`. Colors are introduced in increasing order
//! (position 1 always gets color 1), which removes relabelings of the same
//! coloring from the tree.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{Coloring, RunLengthColoring};
use crate::error::SearchError;
use crate::family::PatternFamily;
use crate::witness::{count_witnesses_compiled, CompiledFamily, SearchBox, WitnessOptions};

/// Instances of a family in `[1..N]`, bucketed by maximum value. Each entry
/// stores the remaining distinct values of the instance.
#[derive(Clone, Debug)]
pub struct AvoidIndex {
    n: usize,
    buckets: Vec<Vec<Box<[u32]>>>,
}

impl AvoidIndex {
    pub fn build(cf: &CompiledFamily, n: usize, search_box: Option<&SearchBox>) -> Self {
        let distinct = cf.family().distinct_required();
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        let mut buckets: Vec<Vec<Box<[u32]>>> = vec![Vec::new(); n + 1];
        for inst in cf.instances(n, search_box) {
            if distinct && !inst.values_distinct() {
                continue;
            }
            let mut vals: Vec<u32> = inst.term_values.iter().map(|&v| v as u32).collect();
            vals.sort_unstable();
            vals.dedup();
            if !seen.insert(vals.clone()) {
                continue;
            }
            let max = vals.pop().expect("non-empty family") as usize;
            buckets[max].push(vals.into_boxed_slice());
        }
        AvoidIndex { n, buckets }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_instances(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }

    /// Would giving position `p` color `c` complete a monochromatic instance?
    /// `colors` is indexed from 1.
    #[inline]
    pub fn completes_mono(&self, colors: &[u32], p: usize, c: u32) -> bool {
        self.buckets[p]
            .iter()
            .any(|rest| rest.iter().all(|&v| colors[v as usize] == c))
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchLimits {
    pub max_nodes: Option<u64>,
    pub time_limit: Option<Duration>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, Default)]
pub struct AvoidOptions {
    pub limits: SearchLimits,
    /// Worker threads; 0 or 1 means the sequential canonical search.
    pub jobs: usize,
    pub search_box: Option<SearchBox>,
    /// Permit families whose box is incomplete; certificates are then
    /// stamped `box_relative`.
    pub allow_box_relative: bool,
}

/// A coloring claimed to contain no witness of `family`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvoidCertificate {
    pub family_name: String,
    pub family: PatternFamily,
    pub n: usize,
    pub r: u32,
    pub coloring: RunLengthColoring,
    pub verified: bool,
    #[serde(default)]
    pub box_relative: bool,
    #[serde(default)]
    pub search_box: Option<SearchBox>,
}

impl AvoidCertificate {
    fn new(family: &PatternFamily, r: u32, coloring: &Coloring, search_box: Option<SearchBox>) -> Self {
        let box_relative = !CompiledFamily::new(family).box_complete(coloring.n(), search_box.as_ref());
        let mut cert = AvoidCertificate {
            family_name: family.name().to_owned(),
            family: family.clone(),
            n: coloring.n(),
            r,
            coloring: coloring.into(),
            verified: false,
            box_relative,
            search_box,
        };
        cert.verified = verify_certificate(&cert);
        cert
    }

    pub fn coloring(&self) -> Result<Coloring, crate::error::ColoringError> {
        Coloring::try_from(&self.coloring)
    }
}

/// Independent re-check: the coloring is well formed and has zero witnesses.
pub fn check_certificate(cert: &AvoidCertificate) -> Result<(), String> {
    let coloring = cert.coloring().map_err(|e| e.to_string())?;
    if coloring.n() != cert.n {
        return Err(format!("coloring covers {} integers, certificate claims {}", coloring.n(), cert.n));
    }
    if coloring.r() != cert.r {
        return Err(format!("coloring uses r = {}, certificate claims {}", coloring.r(), cert.r));
    }
    let cf = CompiledFamily::new(&cert.family);
    if !cert.box_relative && !cf.box_complete(cert.n, cert.search_box.as_ref()) {
        return Err("family box is incomplete but certificate is not box-relative".into());
    }
    let opts = WitnessOptions { search_box: cert.search_box.clone(), ..Default::default() };
    match count_witnesses_compiled(&cf, &coloring, &opts) {
        0 => Ok(()),
        k => Err(format!("coloring has {k} monochromatic instances")),
    }
}

pub fn verify_certificate(cert: &AvoidCertificate) -> bool {
    check_certificate(cert).is_ok()
}

enum Flow {
    Continue,
    Stop,
}

struct Budget<'a> {
    limits: &'a SearchLimits,
    start: Instant,
    shared_nodes: &'a AtomicU64,
    abort: &'a (dyn Fn() -> bool + Sync),
}

const TICK: u64 = 1024;

/// Depth-first search state over positions `1..=target`.
struct Dfs<'a> {
    index: &'a AvoidIndex,
    r: u32,
    target: usize,
    colors: Vec<u32>,
    max_used: Vec<u32>,
    nodes: u64,
    pending: u64,
}

enum DfsEnd {
    Exhausted,
    Stopped,
    Aborted,
}

impl<'a> Dfs<'a> {
    fn new(index: &'a AvoidIndex, r: u32, target: usize) -> Self {
        Dfs {
            index,
            r,
            target,
            colors: vec![0; target + 2],
            max_used: vec![0; target + 2],
            nodes: 0,
            pending: 0,
        }
    }

    fn tick(&mut self, budget: &Budget<'_>) -> Result<bool, SearchError> {
        self.nodes += 1;
        self.pending += 1;
        if let Some(max) = budget.limits.max_nodes {
            if self.nodes > max {
                let total = budget.shared_nodes.fetch_add(self.pending, Ordering::Relaxed) + self.pending;
                self.pending = 0;
                return Err(SearchError::ResourceLimit { nodes: total, reason: "node budget".into() });
            }
        }
        if self.pending < TICK {
            return Ok(true);
        }
        let total = budget.shared_nodes.fetch_add(self.pending, Ordering::Relaxed) + self.pending;
        self.pending = 0;
        if let Some(max) = budget.limits.max_nodes {
            if total > max {
                return Err(SearchError::ResourceLimit { nodes: total, reason: "node budget".into() });
            }
        }
        if let Some(tl) = budget.limits.time_limit {
            if budget.start.elapsed() > tl {
                return Err(SearchError::ResourceLimit { nodes: total, reason: "time limit".into() });
            }
        }
        Ok(!(budget.abort)())
    }

    fn flush(&mut self, budget: &Budget<'_>) {
        budget.shared_nodes.fetch_add(self.pending, Ordering::Relaxed);
        self.pending = 0;
    }

    /// Extends the fixed, already valid `prefix` (positions `1..=prefix.len()`)
    /// and calls `visit(p, colors)` after every successful placement.
    fn run(
        &mut self,
        prefix: &[u32],
        budget: &Budget<'_>,
        visit: &mut dyn FnMut(usize, &[u32]) -> Flow,
    ) -> Result<DfsEnd, SearchError> {
        let k = prefix.len();
        for (i, &c) in prefix.iter().enumerate() {
            self.colors[i + 1] = c;
            self.max_used[i + 1] = self.max_used[i].max(c);
        }
        if k >= self.target {
            return Ok(DfsEnd::Exhausted);
        }
        let base = k + 1;
        let mut p = base;
        self.colors[p] = 0;
        let end = loop {
            let limit = self.r.min(self.max_used[p - 1] + 1);
            let next = self.colors[p] + 1;
            if next > limit {
                self.colors[p] = 0;
                if p == base {
                    break DfsEnd::Exhausted;
                }
                p -= 1;
                continue;
            }
            self.colors[p] = next;
            if !self.tick(budget)? {
                break DfsEnd::Aborted;
            }
            if self.index.completes_mono(&self.colors, p, next) {
                continue;
            }
            self.max_used[p] = self.max_used[p - 1].max(next);
            if let Flow::Stop = visit(p, &self.colors[1..=p]) {
                break DfsEnd::Stopped;
            }
            if p == self.target {
                continue;
            }
            p += 1;
            self.colors[p] = 0;
        };
        self.flush(budget);
        Ok(end)
    }
}

fn prepare(
    family: &PatternFamily,
    n: usize,
    r: u32,
    opts: &AvoidOptions,
    allow_incomplete: bool,
) -> Result<(CompiledFamily, AvoidIndex), SearchError> {
    if r == 0 {
        return Err(SearchError::InvalidParameters("need at least one color".into()));
    }
    if n == 0 {
        return Err(SearchError::InvalidParameters("N must be at least 1".into()));
    }
    let cf = CompiledFamily::new(family);
    if !cf.box_complete(n, opts.search_box.as_ref()) && !allow_incomplete {
        return Err(SearchError::IncompleteBox);
    }
    let index = AvoidIndex::build(&cf, n, opts.search_box.as_ref());
    Ok((cf, index))
}

fn no_abort() -> bool {
    false
}

/// All valid canonical prefixes of length `depth`, in search order.
fn prefixes(
    index: &AvoidIndex,
    r: u32,
    depth: usize,
    budget: &Budget<'_>,
    mut on_partial: impl FnMut(usize, &[u32]),
) -> Result<(u64, Vec<Vec<u32>>), SearchError> {
    let mut out = Vec::new();
    let mut dfs = Dfs::new(index, r, depth);
    dfs.run(&[], budget, &mut |p, cols| {
        on_partial(p, cols);
        if p == depth {
            out.push(cols.to_vec());
        }
        Flow::Continue
    })?;
    Ok((dfs.nodes, out))
}

/// Smallest prefix depth giving at least `want` subtrees (capped at `n`).
fn split_depth(index: &AvoidIndex, r: u32, want: usize) -> usize {
    let mut d = 1;
    let mut approx: usize = 1;
    while d < index.n() && approx < want {
        d += 1;
        approx = approx.saturating_mul(r.max(1) as usize);
    }
    d.min(index.n())
}

/// Searches for an `r`-coloring of `[1..n]` with no monochromatic instance.
///
/// With one worker the result is the first avoider in canonical order; with
/// several workers the prefix tree is split and the earliest subtree's
/// avoider wins, which gives the same answer.
pub fn exists_avoiding(
    family: &PatternFamily,
    r: u32,
    n: usize,
    opts: &AvoidOptions,
) -> Result<Option<AvoidCertificate>, SearchError> {
    let (_cf, index) = prepare(family, n, r, opts, opts.allow_box_relative)?;
    let shared = AtomicU64::new(0);
    let start = Instant::now();
    let budget = Budget { limits: &opts.limits, start, shared_nodes: &shared, abort: &no_abort };
    let found = if opts.jobs <= 1 {
        let mut found = None;
        Dfs::new(&index, r, n).run(&[], &budget, &mut |p, cols| {
            if p == n {
                found = Some(cols.to_vec());
                Flow::Stop
            } else {
                Flow::Continue
            }
        })?;
        found
    } else {
        let depth = split_depth(&index, r, opts.jobs * 8);
        let (_, pre) = prefixes(&index, r, depth, &budget, |_, _| {})?;
        if depth == n {
            pre.into_iter().next()
        } else {
            let best = AtomicUsize::new(usize::MAX);
            let results = with_pool(opts.jobs, || {
                pre.par_iter()
                    .enumerate()
                    .map(|(idx, prefix)| -> Result<Option<(usize, Vec<u32>)>, SearchError> {
                        if idx > best.load(Ordering::Relaxed) {
                            return Ok(None);
                        }
                        let abort = || idx > best.load(Ordering::Relaxed);
                        let b = Budget { limits: &opts.limits, start, shared_nodes: &shared, abort: &abort };
                        let mut found = None;
                        Dfs::new(&index, r, n).run(prefix, &b, &mut |p, cols| {
                            if p == n {
                                found = Some(cols.to_vec());
                                Flow::Stop
                            } else {
                                Flow::Continue
                            }
                        })?;
                        if found.is_some() {
                            best.fetch_min(idx, Ordering::Relaxed);
                        }
                        Ok(found.map(|f| (idx, f)))
                    })
                    .collect::<Vec<_>>()
            });
            let mut winner: Option<(usize, Vec<u32>)> = None;
            for res in results {
                if let Some((idx, f)) = res? {
                    if winner.as_ref().is_none_or(|(w, _)| idx < *w) {
                        winner = Some((idx, f));
                    }
                }
            }
            winner.map(|(_, f)| f)
        }
    };
    Ok(found.map(|colors| {
        let coloring = Coloring::new(r, colors).expect("search colors are in range");
        AvoidCertificate::new(family, r, &coloring, opts.search_box.clone())
    }))
}

/// Every canonical avoiding `r`-coloring of `[1..n]`, in search order.
pub fn enumerate_avoiders(
    family: &PatternFamily,
    r: u32,
    n: usize,
    opts: &AvoidOptions,
) -> Result<Vec<Coloring>, SearchError> {
    let (_cf, index) = prepare(family, n, r, opts, opts.allow_box_relative)?;
    let shared = AtomicU64::new(0);
    let budget = Budget { limits: &opts.limits, start: Instant::now(), shared_nodes: &shared, abort: &no_abort };
    let mut out = Vec::new();
    Dfs::new(&index, r, n).run(&[], &budget, &mut |p, cols| {
        if p == n {
            out.push(Coloring::new(r, cols.to_vec()).expect("in range"));
        }
        Flow::Continue
    })?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdValue {
    /// No avoider exists at this N, one exists at N - 1.
    Exact(usize),
    /// An avoider exists for every N below this value (search stopped at `max_n`).
    LowerBound(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub family_name: String,
    pub r: u32,
    pub value: ThresholdValue,
    /// Avoider for `N = T - 1` (or for `max_n` when only a lower bound is
    /// known); absent when `T = 1`.
    pub avoider: Option<AvoidCertificate>,
    pub stats: SearchStats,
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool")
        .install(f)
}

struct Deepest {
    depth: usize,
    coloring: Vec<u32>,
    reached_target: bool,
}

fn deepest_from(
    index: &AvoidIndex,
    r: u32,
    target: usize,
    prefix: &[u32],
    budget: &Budget<'_>,
) -> Result<(Deepest, u64), SearchError> {
    let mut best = Deepest { depth: prefix.len(), coloring: prefix.to_vec(), reached_target: prefix.len() >= target };
    if best.reached_target {
        return Ok((best, 0));
    }
    let mut dfs = Dfs::new(index, r, target);
    dfs.run(prefix, budget, &mut |p, cols| {
        if p > best.depth {
            best.depth = p;
            best.coloring = cols.to_vec();
        }
        if p == target {
            best.reached_target = true;
            Flow::Stop
        } else {
            Flow::Continue
        }
    })?;
    Ok((best, dfs.nodes))
}

/// Smallest `N <= max_n` admitting no avoiding `r`-coloring.
///
/// A single depth-first pass to `max_n` finds the longest avoidable prefix
/// `[1..L]`; avoiders restrict to avoiders of shorter prefixes, so `T = L + 1`.
pub fn threshold(
    family: &PatternFamily,
    r: u32,
    max_n: usize,
    opts: &AvoidOptions,
) -> Result<ThresholdResult, SearchError> {
    let (_cf, index) = prepare(family, max_n, r, opts, false)?;
    let start = Instant::now();
    let shared = AtomicU64::new(0);
    let budget = Budget { limits: &opts.limits, start, shared_nodes: &shared, abort: &no_abort };

    let best = if opts.jobs <= 1 {
        deepest_from(&index, r, max_n, &[], &budget)?.0
    } else {
        let depth = split_depth(&index, r, opts.jobs * 8);
        let mut shallow = Deepest { depth: 0, coloring: Vec::new(), reached_target: false };
        let (_, pre) = prefixes(&index, r, depth, &budget, |p, cols| {
            if p > shallow.depth {
                shallow.depth = p;
                shallow.coloring = cols.to_vec();
            }
        })?;
        if pre.is_empty() || depth == max_n {
            shallow.reached_target = shallow.depth == max_n;
            shallow
        } else {
            let reached = AtomicUsize::new(usize::MAX);
            let any_reached = AtomicBool::new(false);
            let results = with_pool(opts.jobs, || {
                pre.par_iter()
                    .enumerate()
                    .map(|(idx, prefix)| -> Result<Option<Deepest>, SearchError> {
                        if idx > reached.load(Ordering::Relaxed) {
                            return Ok(None);
                        }
                        let abort = || idx > reached.load(Ordering::Relaxed);
                        let b = Budget { limits: &opts.limits, start, shared_nodes: &shared, abort: &abort };
                        let (d, _) = deepest_from(&index, r, max_n, prefix, &b)?;
                        if d.reached_target {
                            reached.fetch_min(idx, Ordering::Relaxed);
                            any_reached.store(true, Ordering::Relaxed);
                        }
                        Ok(Some(d))
                    })
                    .collect::<Vec<_>>()
            });
            let mut winner: Option<Deepest> = None;
            let stop_idx = reached.load(Ordering::Relaxed);
            for (idx, res) in results.into_iter().enumerate() {
                let Some(d) = res? else { continue };
                // Subtrees after the first one reaching max_n may have been cut short.
                if any_reached.load(Ordering::Relaxed) && idx > stop_idx {
                    continue;
                }
                if winner.as_ref().is_none_or(|w| d.depth > w.depth) {
                    winner = Some(d);
                }
            }
            winner.expect("at least one prefix")
        }
    };

    let stats = SearchStats {
        nodes: shared.load(Ordering::Relaxed),
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    let value = if best.reached_target {
        ThresholdValue::LowerBound(max_n + 1)
    } else {
        ThresholdValue::Exact(best.depth + 1)
    };
    let avoider = (best.depth > 0).then(|| {
        let coloring = Coloring::new(r, best.coloring).expect("in range");
        AvoidCertificate::new(family, r, &coloring, None)
    });
    Ok(ThresholdResult { family_name: family.name().to_owned(), r, value, avoider, stats })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreedyStrategy {
    /// Each position takes the smallest color that completes no instance.
    FirstFit,
    /// First-fit, then up to `restarts` attempts with seeded random color order.
    RandomRestart { restarts: u32, seed: u64 },
}

/// Heuristic avoider; `Ok(None)` when every attempt dead-ends. Returned
/// certificates have been re-verified by witness counting.
pub fn greedy_avoider(
    family: &PatternFamily,
    r: u32,
    n: usize,
    strategy: GreedyStrategy,
) -> Result<Option<AvoidCertificate>, SearchError> {
    let (_cf, index) = prepare(family, n, r, &AvoidOptions::default(), false)?;
    let (attempts, seed) = match strategy {
        GreedyStrategy::FirstFit => (1, 0),
        GreedyStrategy::RandomRestart { restarts, seed } => (1 + restarts as u64, seed),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut colors = vec![0u32; n + 1];
    let mut order: Vec<u32> = (1..=r).collect();
    for attempt in 0..attempts {
        let mut ok = true;
        for p in 1..=n {
            if attempt > 0 {
                order.shuffle(&mut rng);
            }
            match order.iter().copied().find(|&c| !index.completes_mono(&colors, p, c)) {
                Some(c) => colors[p] = c,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let coloring = Coloring::new(r, colors[1..].to_vec()).expect("in range");
            let cert = AvoidCertificate::new(family, r, &coloring, None);
            if !cert.verified {
                return Err(SearchError::VerificationFailed(
                    check_certificate(&cert).unwrap_err(),
                ));
            }
            return Ok(Some(cert));
        }
        colors.iter_mut().for_each(|c| *c = 0);
        order.sort_unstable();
    }
    Ok(None)
}
