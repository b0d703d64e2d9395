//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed. Exits non-zero
//! when a criterion fails that is not listed in `KNOWN_UNATTAINABLE`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{all_presets, naive_exists_avoiding, naive_instances, naive_threshold};
use monochrome_core::avoid::{
    check_certificate, exists_avoiding, greedy_avoider, threshold, AvoidCertificate, AvoidOptions, GreedyStrategy,
    ThresholdValue,
};
use monochrome_core::coloring::Coloring;
use monochrome_core::constructive::{run_construction, ConstructionParams};
use monochrome_core::family::{moreira_family, parse_preset, preset_family, MoreiraSpec, PatternFamily};
use monochrome_core::poly::IntPoly;
use monochrome_core::reductions::{check_quad_solution, quadratic_setup, solve_quadratic, SolveOptions};
use monochrome_core::witness::{
    count_witnesses, enumerate_instances, find_first_witness, verify_witness, Instance, Witness, WitnessOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SCHUR_R2_LIMIT: Duration = Duration::from_secs(1);
const SCHUR_R3_LIMIT: Duration = Duration::from_secs(60);
const VDW3_LIMIT: Duration = Duration::from_secs(1);
const PARITY_LIMIT: Duration = Duration::from_secs(1);
const THREE_X_LIMIT: Duration = Duration::from_secs(10);
const PARITY_N: usize = 1_000_000;
const CONSTRUCTION_RUNS: usize = 1000;
const CONSTRUCTION_N: usize = 10_000;
const GRID_BOUND: i64 = 5;
const QUAD_N: usize = 200;

/// Criteria whose stated target contradicts an exact computation; see README.
const KNOWN_UNATTAINABLE: &[&str] = &["3b"];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn check(id: &'static str, f: impl FnOnce() -> Result<String, String>) -> Outcome {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(Ok(detail)) => Outcome { id, pass: true, detail },
        Ok(Err(detail)) => Outcome { id, pass: false, detail },
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome { id, pass: false, detail: format!("panicked: {msg}") }
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact(v: ThresholdValue) -> Result<usize, String> {
    match v {
        ThresholdValue::Exact(t) => Ok(t),
        ThresholdValue::LowerBound(t) => Err(format!("only a lower bound T >= {t}")),
    }
}

fn timed_threshold(f: &PatternFamily, r: u32, max_n: usize) -> Result<(usize, Duration, AvoidCertificate), String> {
    let start = Instant::now();
    let res = threshold(f, r, max_n, &AvoidOptions::default()).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let t = exact(res.value)?;
    let cert = res.avoider.ok_or("no avoider returned")?;
    check_certificate(&cert)?;
    ensure(cert.n == t - 1, || format!("avoider is for N = {}, expected {}", cert.n, t - 1))?;
    Ok((t, took, cert))
}

fn schur_thresholds() -> Result<String, String> {
    let schur = preset_family("schur", None).unwrap();
    let (t2, d2, _) = timed_threshold(&schur, 2, 100)?;
    let (t3, d3, _) = timed_threshold(&schur, 3, 100)?;
    ensure(t2 == 5, || format!("T(schur, 2) = {t2}, expected 5"))?;
    ensure(t3 == 14, || format!("T(schur, 3) = {t3}, expected 14"))?;
    ensure(d2 < SCHUR_R2_LIMIT, || format!("r = 2 took {d2:?}"))?;
    ensure(d3 < SCHUR_R3_LIMIT, || format!("r = 3 took {d3:?}"))?;
    let n2 = naive_threshold(&schur, 2, 10);
    let n3 = naive_threshold(&schur, 3, 14);
    ensure(n2 == Some(5) && n3 == Some(14), || format!("naive oracle gave {n2:?}, {n3:?}"))?;
    Ok(format!("T(2) = 5 in {d2:.2?}, T(3) = 14 in {d3:.2?}; naive oracle agrees"))
}

fn vdw_threshold() -> Result<String, String> {
    let vdw = parse_preset("vdw:3").unwrap();
    let (t, d, _) = timed_threshold(&vdw, 2, 100)?;
    ensure(t == 9, || format!("T = {t}, expected 9"))?;
    ensure(d < VDW3_LIMIT, || format!("took {d:?}"))?;
    let naive = naive_threshold(&vdw, 2, 12);
    ensure(naive == Some(9), || format!("naive oracle gave {naive:?}"))?;
    Ok(format!("T(vdw k=3, 2) = 9 in {d:.2?}; naive oracle agrees"))
}

fn parity_certificate() -> Result<String, String> {
    let f = preset_family("x_xp1", None).unwrap();
    let parity = Coloring::parity(PARITY_N);
    let cert = AvoidCertificate {
        family_name: f.name().to_owned(),
        family: f.clone(),
        n: PARITY_N,
        r: 2,
        coloring: (&parity).into(),
        verified: false,
        box_relative: false,
        search_box: None,
    };
    let start = Instant::now();
    check_certificate(&cert)?;
    let witnesses = count_witnesses(&f, &parity, &WitnessOptions::default());
    let d = start.elapsed();
    ensure(witnesses == 0, || format!("{witnesses} witnesses"))?;
    ensure(d < PARITY_LIMIT, || format!("took {d:?}"))?;
    Ok(format!("{{x, x+1}}: parity on [1..{PARITY_N}] has 0 witnesses, verified in {d:.2?}"))
}

fn three_x_minus_y() -> Result<String, String> {
    let f = preset_family("x_y_3xmy", None).unwrap();
    let start = Instant::now();
    let found = exists_avoiding(&f, 2, 50, &AvoidOptions::default()).map_err(|e| e.to_string())?;
    let d = start.elapsed();
    ensure(d < THREE_X_LIMIT, || format!("took {d:?}"))?;
    if let Some(cert) = found {
        check_certificate(&cert)?;
        return Ok(format!("{{x, y, 3x-y}}: verified 2-color avoider of [1..50] in {d:.2?}"));
    }
    let t2 = threshold(&f, 2, 50, &AvoidOptions::default()).map_err(|e| e.to_string())?.value;
    let naive = naive_threshold(&f, 2, 12);
    let t3 = threshold(&f, 3, 60, &AvoidOptions::default()).map_err(|e| e.to_string())?;
    let three = exists_avoiding(&f, 3, 50, &AvoidOptions::default()).map_err(|e| e.to_string())?;
    let three_ok = three.as_ref().is_some_and(|c| check_certificate(c).is_ok());
    Err(format!(
        "{{x, y, 3x-y}}: no 2-coloring of [1..50] avoids it (searched in {d:.2?}); 2-color threshold {t2:?} \
         (naive oracle {naive:?}); 3 colors: verified avoider of [1..50] {three_ok}, threshold {:?}",
        t3.value
    ))
}

fn xyxy_threshold() -> Result<String, String> {
    let f = preset_family("xyxy", None).unwrap();
    let (t, d, cert) = timed_threshold(&f, 2, 200)?;
    let cap = t.min(12);
    for n in 1..=cap {
        let fast = exists_avoiding(&f, 2, n, &AvoidOptions::default()).map_err(|e| e.to_string())?.is_some();
        let slow = naive_exists_avoiding(&f, 2, n).is_some();
        ensure(fast == slow, || format!("N = {n}: search says {fast}, naive oracle {slow}"))?;
        ensure(fast == (n < t), || format!("N = {n}: avoidability {fast} contradicts T = {t}"))?;
    }
    let colors = cert.coloring().map_err(|e| e.to_string())?;
    Ok(format!(
        "T({{x, x+y, xy}}, 2) = {t} in {d:.2?}; avoider of [1..{}] = {:?} verifies; naive agrees for N <= {cap}",
        t - 1,
        colors.colors()
    ))
}

fn generator_fidelity() -> Result<String, String> {
    let f4 = moreira_family(&MoreiraSpec::all_products(4));
    // x, y, z, t, w of the displayed triangle are x0..x4
    let triangle = [
        "x0",
        "x0*x1", "x0 + x1",
        "x0*x1*x2", "x0 + x1*x2", "x0*x1 + x2",
        "x0*x1*x2*x3", "x0 + x1*x2*x3", "x0*x1 + x2*x3", "x0*x1*x2 + x3",
        "x0*x1*x2*x3*x4", "x0 + x1*x2*x3*x4", "x0*x1 + x2*x3*x4", "x0*x1*x2 + x3*x4", "x0*x1*x2*x3 + x4",
    ];
    let expected = PatternFamily::from_strings(None, 5, &triangle).unwrap();
    ensure(f4.len() == 15, || format!("{} terms", f4.len()))?;
    ensure(f4.same_terms(&expected), || format!("terms differ: {:?}", f4.terms().iter().map(|t| t.to_string()).collect::<Vec<_>>()))?;
    let s1 = MoreiraSpec::new(1, vec![vec![IntPoly::zero(1), IntPoly::var(1, 0)]]).unwrap();
    let f1 = moreira_family(&s1);
    let want = PatternFamily::from_strings(None, 2, &["x0", "x0*x1", "x0 + x1"]).unwrap();
    ensure(f1.same_terms(&want) && f1.len() == 3, || "s = 1 family differs".into())?;
    Ok("s = 4 all-products: 15 terms match the triangle; s = 1 gives {x0, x0*x1, x0 + x1}".into())
}

fn random_coloring(rng: &mut ChaCha8Rng, n: usize, r: u32) -> Coloring {
    match rng.random_range(0..4) {
        0 => Coloring::from_fn(n, r, |_| rng.random_range(1..=r)).unwrap(),
        1 => {
            let block = rng.random_range(1..200usize);
            let offs: Vec<u32> = (0..=n / block).map(|_| rng.random_range(1..=r)).collect();
            Coloring::from_fn(n, r, |i| offs[i / block]).unwrap()
        }
        2 => {
            let m = rng.random_range(2..12usize);
            let table: Vec<u32> = (0..m).map(|_| rng.random_range(1..=r)).collect();
            Coloring::from_fn(n, r, |i| table[i % m]).unwrap()
        }
        _ => {
            // color by the parity of the number of binary digits, shuffled
            let shift = rng.random_range(0..r);
            Coloring::from_fn(n, r, |i| ((usize::BITS - i.leading_zeros()) % r + shift) % r + 1).unwrap()
        }
    }
}

fn construction_soundness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let xyxy = preset_family("xyxy", None).unwrap();
    let mut completed = 0;
    for run in 0..CONSTRUCTION_RUNS {
        let r = if run % 2 == 0 { 2 } else { 3 };
        let col = random_coloring(&mut rng, CONSTRUCTION_N, r);
        let trace = run_construction(&col, &ConstructionParams::default()).map_err(|e| format!("run {run}: {e}"))?;
        if let Some(w) = &trace.witness {
            completed += 1;
            let (x, y) = (w.x as i64, w.y as i64);
            let witness = Witness {
                instance: Instance { assignment: vec![x, y], term_values: vec![x, x + y, x * y] },
                color: w.color,
            };
            verify_witness(&xyxy, &col, &witness, false).map_err(|e| format!("run {run}: {e}"))?;
        }
    }
    ensure(completed > 0, || "no run completed".into())?;
    Ok(format!("{completed}/{CONSTRUCTION_RUNS} runs completed (N = {CONSTRUCTION_N}); every witness verifies"))
}

fn reduction_exactness() -> Result<String, String> {
    let mut ok = 0;
    let mut errs = 0;
    let range: Vec<i64> = (-GRID_BOUND..=GRID_BOUND).filter(|&v| v != 0).collect();
    let mut grid: Vec<Vec<i64>> = Vec::new();
    for &a in &range {
        for &b in &range {
            if a + b == 0 {
                grid.push(vec![a, b]);
            }
            for &c in &range {
                if a + b + c == 0 {
                    grid.push(vec![a, b, c]);
                }
            }
        }
    }
    for c in &grid {
        match quadratic_setup(c) {
            Ok(d) => {
                let sq: i128 = c.iter().zip(&d.u).map(|(&a, &u)| a as i128 * u as i128 * u as i128).sum();
                let lin: i128 = c.iter().zip(&d.u).map(|(&a, &u)| a as i128 * u as i128).sum();
                ensure(sq == 0 && lin > 0 && d.b as i128 == 2 * lin, || format!("c = {c:?}: bad setup {d:?}"))?;
                let mut u = d.u.clone();
                u.sort_unstable();
                u.dedup();
                ensure(u.len() == d.u.len(), || format!("c = {c:?}: repeated u entries"))?;
                ok += 1;
            }
            Err(_) => errs += 1,
        }
    }
    let a = quadratic_setup(&[1, -1]).map_err(|e| e.to_string())?;
    ensure(a.u == [1, -1] && a.b == 4, || format!("(1, -1): u = {:?}, b = {}", a.u, a.b))?;
    let b = quadratic_setup(&[1, 1, -2]).map_err(|e| e.to_string())?;
    ensure(b.u == [7, 1, -5] && b.b == 36, || format!("(1, 1, -2): u = {:?}, b = {}", b.u, b.b))?;
    Ok(format!("{} vectors: {ok} exact setups, {errs} explicit errors; (1,-1) and (1,1,-2) match", grid.len()))
}

fn quadratic_end_to_end() -> Result<String, String> {
    let families = ["x0, x0 + 1", "x0, x0 + 3", "x0, 2*x0", "x0, x0 + 5", "x0, 3*x0", "x0, x0 + 2*x1 + 1"];
    let mut colorings = vec![("all-one".to_string(), Coloring::monochromatic(QUAD_N))];
    for spec in families {
        let terms: Vec<&str> = spec.split(", ").collect();
        let vars = if spec.contains("x1") { 2 } else { 1 };
        let f = PatternFamily::from_strings(Some(spec), vars, &terms).unwrap();
        let strat = GreedyStrategy::RandomRestart { restarts: 20, seed: 1 };
        let cert = greedy_avoider(&f, 2, QUAD_N, strat)
            .map_err(|e| format!("{{{spec}}}: {e}"))?
            .ok_or_else(|| format!("greedy found no 2-coloring of [1..{QUAD_N}] avoiding {{{spec}}}"))?;
        colorings.push((format!("greedy {{{spec}}}"), cert.coloring().map_err(|e| e.to_string())?));
    }
    let mut lines = Vec::new();
    for (name, col) in &colorings {
        let sol = solve_quadratic(&[1, -1], col, &SolveOptions::default())
            .map_err(|e| format!("{name}: {e}"))?
            .ok_or_else(|| format!("{name}: no solution"))?;
        check_quad_solution(col, &sol).map_err(|e| format!("{name}: {e}"))?;
        let [a0, a1, a2] = sol.a[..] else { return Err(format!("{name}: wrong arity")) };
        ensure(a1 * a1 - a2 * a2 == a0, || format!("{name}: {a1}^2 - {a2}^2 != {a0}"))?;
        lines.push(format!("{name} -> {:?}", sol.a));
    }
    Ok(format!("{} colorings, 0 verification failures: {}", colorings.len(), lines.join("; ")))
}

fn property_suites() -> Result<String, String> {
    let opts = AvoidOptions::default();
    for name in ["schur", "vdw:3", "xyxy"] {
        let f = parse_preset(name).unwrap();
        let mut prev = 0;
        for r in 1..=3u32 {
            if name != "schur" && r == 3 {
                break;
            }
            let t = match threshold(&f, r, 80, &opts).map_err(|e| e.to_string())?.value {
                ThresholdValue::Exact(t) | ThresholdValue::LowerBound(t) => t,
            };
            ensure(t >= prev, || format!("{name}: T(r = {r}) = {t} < {prev}"))?;
            prev = t;
        }
    }
    let schur = preset_family("schur", None).unwrap();
    let base = exact(threshold(&schur, 2, 80, &opts).map_err(|e| e.to_string())?.value)?;
    for extra in ["x0*x1", "2*x0", "x0 + 2*x1"] {
        let bigger = schur.extended_with(&[IntPoly::parse_with_vars(extra, 2).unwrap()]).unwrap();
        let t = match threshold(&bigger, 2, 80, &opts).map_err(|e| e.to_string())?.value {
            ThresholdValue::Exact(t) | ThresholdValue::LowerBound(t) => t,
        };
        ensure(t >= base, || format!("adding {extra} lowered T to {t}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for f in all_presets() {
        for _ in 0..20 {
            let col = random_coloring(&mut rng, 60, 3);
            let perm = [2, 3, 1];
            let p = col.permuted(&perm).unwrap();
            let wo = WitnessOptions::default();
            ensure(count_witnesses(&f, &col, &wo) == count_witnesses(&f, &p, &wo), || {
                format!("{}: permutation changed the witness count", f.name())
            })?;
            let a = find_first_witness(&f, &col, &wo).map(|w| w.instance);
            let b = find_first_witness(&f, &p, &wo).map(|w| w.instance);
            ensure(a == b, || format!("{}: permutation changed the first witness", f.name()))?;
        }
        for n in 1..=12 {
            let (fast, _) = enumerate_instances(&f, n, None);
            let fast: Vec<_> = fast.into_iter().map(|i| (i.assignment, i.term_values)).collect();
            ensure(fast == naive_instances(&f, n), || format!("{} instances differ at N = {n}", f.name()))?;
            let s = exists_avoiding(&f, 2, n, &opts).map_err(|e| e.to_string())?.is_some();
            ensure(s == naive_exists_avoiding(&f, 2, n).is_some(), || {
                format!("{}: search and naive disagree at N = {n}", f.name())
            })?;
        }
    }
    Ok("monotone in r, antitone under extension, permutation equivariant, pruned = naive (N <= 12)".into())
}

fn main() -> ExitCode {
    let outcomes = vec![
        check("1", schur_thresholds),
        check("2", vdw_threshold),
        check("3a", parity_certificate),
        check("3b", three_x_minus_y),
        check("4", xyxy_threshold),
        check("5", generator_fidelity),
        check("6", construction_soundness),
        check("7", reduction_exactness),
        check("8", quadratic_end_to_end),
        check("9", property_suites),
    ];
    let mut unexpected = Vec::new();
    for o in &outcomes {
        println!("{} criterion {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.detail);
        let known = KNOWN_UNATTAINABLE.contains(&o.id);
        if o.pass == known {
            unexpected.push(o.id);
        }
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!(
        "acceptance: {} passed, {} failed {:?}; known unattainable {:?}",
        outcomes.len() - failed.len(),
        failed.len(),
        failed,
        KNOWN_UNATTAINABLE
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for {unexpected:?}");
        ExitCode::FAILURE
    }
}
