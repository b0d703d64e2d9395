//! `monochrome` command-line front end.
//!
//! Exit status: 0 when something was found, 1 when nothing was found or a
//! check failed, 2 for usage or input errors, 3 when a search hit its node or
//! time budget.

pub mod store;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use monochrome_core::avoid::{
    exists_avoiding, greedy_avoider, threshold, AvoidCertificate, AvoidOptions, GreedyStrategy, SearchLimits,
    ThresholdResult, ThresholdValue,
};
use monochrome_core::coloring::Coloring;
use monochrome_core::constructive::{run_construction, ConstructionParams, ConstructiveTrace};
use monochrome_core::error::SearchError;
use monochrome_core::family::{moreira_family, parse_preset, preset_family, reduction_family, MoreiraSpec, PatternFamily};
use monochrome_core::reductions::{decode_exp_pair, exp_lift, quadratic_setup, solve_quadratic, SolveOptions};
use monochrome_core::witness::{find_all_witnesses, find_first_witness, WitnessOptions, WitnessRecord};
use serde::Serialize;
use serde_json::{json, Value};

use crate::store::{
    coloring_digest, fingerprint, ConstructionPayload, Kind, Provenance, ReductionPayload, ResultRecord, Store,
    WitnessPayload,
};

pub const EXIT_FOUND: i32 = 0;
pub const EXIT_NONE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "monochrome", version, about = "Monochromatic polynomial patterns in finite colorings")]
struct Cli {
    /// Worker threads for searches.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed for randomized heuristics.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Abort a search after this many nodes.
    #[arg(long, global = true)]
    max_nodes: Option<u64>,
    /// Abort a search after this many seconds.
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    /// Write the machine-readable result here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Results store (JSON lines); results are looked up and saved here.
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Show a preset, file or generated family.
    #[command(subcommand)]
    Family(FamilyCmd),
    /// Find monochromatic instances of a family in a coloring.
    Witness(WitnessArgs),
    /// Decide whether some r-coloring of [1..N] avoids a family.
    Avoid(AvoidArgs),
    /// Smallest N with no avoiding r-coloring.
    Threshold(ThresholdArgs),
    /// Run the bitset construction for {x, x + y, xy} on a coloring.
    Construct(ConstructArgs),
    /// Monochromatic solutions of c_1 a_1^2 + ... + c_k a_k^2 = a_0.
    Reduce(ReduceArgs),
    /// Color n by chi(base^n) and decode a Schur witness multiplicatively.
    LiftExp(LiftExpArgs),
    /// Inspect the results store.
    #[command(subcommand)]
    Cache(CacheCmd),
}

#[derive(Subcommand, Debug)]
enum FamilyCmd {
    Show {
        #[arg(long, conflicts_with = "file", required_unless_present = "file")]
        preset: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    Moreira {
        #[arg(long)]
        s: usize,
        /// Function-set file; defaults to {0, product of all arguments} at every level.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct WitnessArgs {
    /// Family file (JSON) or preset such as `schur` or `vdw:3`.
    #[arg(long)]
    family: String,
    #[arg(long)]
    coloring: PathBuf,
    #[arg(long)]
    all: bool,
    #[arg(long)]
    distinct: bool,
}

#[derive(Args, Debug)]
struct AvoidArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    colors: u32,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    certificate: Option<PathBuf>,
    /// Use greedy first-fit plus this many seeded random restarts instead of exhaustive search.
    #[arg(long)]
    greedy: Option<u32>,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    colors: u32,
    #[arg(long, default_value_t = 200)]
    max_n: usize,
    #[arg(long)]
    certificate: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long)]
    coloring: PathBuf,
    #[arg(long)]
    y_max: Option<usize>,
    #[arg(long, default_value_t = 1)]
    size_floor: usize,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    /// Comma-separated coefficients with zero sum, e.g. `1,-1`.
    #[arg(long, allow_hyphen_values = true)]
    coeffs: String,
    #[arg(long)]
    coloring: PathBuf,
    /// Size of the lifted range searched; defaults to b * N.
    #[arg(long = "box")]
    lifted_range: Option<usize>,
}

#[derive(Args, Debug)]
struct LiftExpArgs {
    #[arg(long)]
    coloring: PathBuf,
    #[arg(long, default_value_t = 2)]
    base: u64,
}

#[derive(Subcommand, Debug)]
enum CacheCmd {
    List,
    Lookup {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        family: String,
        /// Parameters as a JSON object, e.g. '{"max_n":200,"r":2}'.
        #[arg(long)]
        params: String,
    },
    Verify,
}

#[derive(Debug)]
struct Fail {
    code: i32,
    msg: String,
}

impl Fail {
    fn input(msg: impl Into<String>) -> Self {
        Fail { code: EXIT_USAGE, msg: msg.into() }
    }

    fn failure(msg: impl Into<String>) -> Self {
        Fail { code: EXIT_NONE, msg: msg.into() }
    }
}

impl From<SearchError> for Fail {
    fn from(e: SearchError) -> Self {
        let code = match e {
            SearchError::ResourceLimit { .. } => EXIT_LIMIT,
            SearchError::VerificationFailed(_) => EXIT_NONE,
            SearchError::IncompleteBox | SearchError::InvalidParameters(_) => EXIT_USAGE,
        };
        Fail { code, msg: e.to_string() }
    }
}

type Outcome = Result<i32, Fail>;

struct Ctx<'a> {
    cli: &'a Cli,
    out: String,
}

impl Ctx<'_> {
    fn line(&mut self, s: impl AsRef<str>) {
        self.out.push_str(s.as_ref());
        self.out.push('\n');
    }

    fn avoid_options(&self) -> AvoidOptions {
        AvoidOptions {
            limits: SearchLimits {
                max_nodes: self.cli.max_nodes,
                time_limit: self.cli.time_limit.map(Duration::from_secs_f64),
            },
            jobs: self.cli.jobs,
            ..Default::default()
        }
    }

    fn store(&self) -> Option<Store> {
        self.cli.store.as_ref().map(Store::open)
    }

    fn write_out<T: Serialize>(&mut self, value: &T) -> Result<(), Fail> {
        if let Some(path) = self.cli.out.clone() {
            write_json(&path, value)?;
            self.line(format!("wrote {}", path.display()));
        }
        Ok(())
    }

    fn save(&mut self, kind: Kind, family: &PatternFamily, params: Value, payload: Value, prov: Provenance) -> Result<(), Fail> {
        let Some(store) = self.store() else { return Ok(()) };
        let rec = ResultRecord { kind, fingerprint: fingerprint(family), params, payload, provenance: prov };
        store.store(&rec).map_err(Fail::failure)?;
        self.line(format!("stored {} result in {}", kind.as_str(), store.path().display()));
        Ok(())
    }

    fn cached(&mut self, kind: Kind, family: &PatternFamily, params: &Value) -> Result<Option<ResultRecord>, Fail> {
        let Some(store) = self.store() else { return Ok(None) };
        store.lookup(kind, &fingerprint(family), params).map_err(Fail::input)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Fail> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Fail::failure(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Fail::input(format!("cannot write {}: {e}", path.display())))
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::input(format!("cannot read {}: {e}", path.display())))
}

fn load_family(arg: &str) -> Result<PatternFamily, Fail> {
    let path = Path::new(arg);
    if path.is_file() {
        PatternFamily::from_json(&read(path)?).map_err(|e| Fail::input(format!("{}: {e}", path.display())))
    } else {
        parse_preset(arg).map_err(|e| Fail::input(format!("`{arg}` is neither a family file nor a preset: {e}")))
    }
}

fn load_coloring(path: &Path) -> Result<Coloring, Fail> {
    Coloring::parse_text(&read(path)?).map_err(|e| Fail::input(format!("{}: {e}", path.display())))
}

fn tuple<T: ToString>(v: &[T]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

fn show_coloring(c: &Coloring) -> String {
    const SHOWN: usize = 120;
    let sep = if c.r() <= 9 { "" } else { " " };
    let parts: Vec<String> = c.colors().iter().take(SHOWN).map(u32::to_string).collect();
    let mut s = parts.join(sep);
    if c.n() > SHOWN {
        let _ = write!(s, " ... ({} total)", c.n());
    }
    s
}

fn describe_family(ctx: &mut Ctx<'_>, f: &PatternFamily) {
    ctx.line(format!(
        "family: {} ({} terms, {} variables{})",
        f.name(),
        f.len(),
        f.num_vars(),
        if f.distinct_required() { ", distinct values" } else { "" }
    ));
}

fn cmd_family(ctx: &mut Ctx<'_>, cmd: &FamilyCmd) -> Outcome {
    let family = match cmd {
        FamilyCmd::Show { preset: Some(p), .. } => load_family(p)?,
        FamilyCmd::Show { file: Some(f), .. } => {
            PatternFamily::from_json(&read(f)?).map_err(|e| Fail::input(format!("{}: {e}", f.display())))?
        }
        FamilyCmd::Show { .. } => return Err(Fail::input("pass --preset or --file")),
        FamilyCmd::Moreira { s, spec } => {
            let spec = match spec {
                Some(p) => MoreiraSpec::from_json(&read(p)?).map_err(|e| Fail::input(format!("{}: {e}", p.display())))?,
                None => MoreiraSpec::all_products(*s),
            };
            if spec.s() != *s {
                return Err(Fail::input(format!("spec file is for s = {}, not {s}", spec.s())));
            }
            moreira_family(&spec)
        }
    };
    describe_family(ctx, &family);
    for (i, t) in family.terms().iter().enumerate() {
        ctx.line(format!("  {:>3}  {t}", i + 1));
    }
    ctx.line(format!("fingerprint: {}", fingerprint(&family)));
    ctx.write_out(&family)?;
    Ok(EXIT_FOUND)
}

fn cmd_witness(ctx: &mut Ctx<'_>, a: &WitnessArgs) -> Outcome {
    let family = load_family(&a.family)?;
    let coloring = load_coloring(&a.coloring)?;
    describe_family(ctx, &family);
    ctx.line(format!("coloring: N = {}, r = {}", coloring.n(), coloring.r()));
    let opts = WitnessOptions { distinct: a.distinct, jobs: ctx.cli.jobs, ..Default::default() };
    if a.all {
        let all = find_all_witnesses(&family, &coloring, &opts);
        for w in &all {
            ctx.line(format!(
                "  {} -> {} color {}",
                tuple(&w.instance.assignment),
                tuple(&w.instance.term_values),
                w.color
            ));
        }
        ctx.line(format!("witnesses: {}", all.len()));
        let records: Vec<WitnessRecord> = all.iter().map(|w| WitnessRecord::new(&family, &coloring, w)).collect();
        ctx.write_out(&records)?;
        return Ok(if all.is_empty() { EXIT_NONE } else { EXIT_FOUND });
    }
    match find_first_witness(&family, &coloring, &opts) {
        Some(w) => {
            ctx.line(format!(
                "witness: assignment {} values {} color {}",
                tuple(&w.instance.assignment),
                tuple(&w.instance.term_values),
                w.color
            ));
            let record = WitnessRecord::new(&family, &coloring, &w);
            ctx.write_out(&record)?;
            let payload = WitnessPayload {
                family: family.clone(),
                coloring: (&coloring).into(),
                distinct: a.distinct,
                witness: record,
            };
            let params = json!({"coloring": coloring_digest(&coloring), "distinct": a.distinct});
            ctx.save(Kind::Witness, &family, params, json!(payload), Provenance::now(None))?;
            Ok(EXIT_FOUND)
        }
        None => {
            ctx.line("no witness");
            Ok(EXIT_NONE)
        }
    }
}

fn cmd_avoid(ctx: &mut Ctx<'_>, a: &AvoidArgs) -> Outcome {
    let family = load_family(&a.family)?;
    describe_family(ctx, &family);
    ctx.line(format!("colors: {}, N = {}", a.colors, a.n));
    let params = json!({"n": a.n, "r": a.colors});
    let cert: Option<AvoidCertificate> = match ctx.cached(Kind::Avoiding, &family, &params)? {
        Some(rec) => {
            ctx.line("source: store");
            Some(serde_json::from_value(rec.payload).map_err(|e| Fail::failure(e.to_string()))?)
        }
        None => match a.greedy {
            Some(restarts) => {
                let strategy = if restarts == 0 {
                    GreedyStrategy::FirstFit
                } else {
                    GreedyStrategy::RandomRestart { restarts, seed: ctx.cli.seed }
                };
                greedy_avoider(&family, a.colors, a.n, strategy)?
            }
            None => exists_avoiding(&family, a.colors, a.n, &ctx.avoid_options())?,
        },
    };
    let Some(cert) = cert else {
        if a.greedy.is_some() {
            ctx.line("greedy search found no avoiding coloring");
        } else {
            ctx.line(format!("no avoiding coloring: every {}-coloring of [1..{}] has a witness", a.colors, a.n));
        }
        return Ok(EXIT_NONE);
    };
    let coloring = cert.coloring().map_err(|e| Fail::failure(e.to_string()))?;
    ctx.line(format!("avoiding coloring: {}", show_coloring(&coloring)));
    ctx.line(format!("verified: {}", if cert.verified { "yes" } else { "NO" }));
    if let Some(path) = &a.certificate {
        write_json(path, &cert)?;
        ctx.line(format!("certificate: {}", path.display()));
    }
    ctx.write_out(&cert)?;
    if !cert.verified {
        return Err(Fail::failure("certificate failed verification"));
    }
    ctx.save(Kind::Avoiding, &family, params, json!(cert), Provenance::now(None))?;
    Ok(EXIT_FOUND)
}

fn cmd_threshold(ctx: &mut Ctx<'_>, a: &ThresholdArgs) -> Outcome {
    let family = load_family(&a.family)?;
    describe_family(ctx, &family);
    ctx.line(format!("colors: {}, searched up to N = {}", a.colors, a.max_n));
    let params = json!({"max_n": a.max_n, "r": a.colors});
    let (res, fresh): (ThresholdResult, bool) = match ctx.cached(Kind::Threshold, &family, &params)? {
        Some(rec) => {
            ctx.line("source: store");
            (serde_json::from_value(rec.payload).map_err(|e| Fail::failure(e.to_string()))?, false)
        }
        None => (threshold(&family, a.colors, a.max_n, &ctx.avoid_options())?, true),
    };
    match res.value {
        ThresholdValue::Exact(t) => ctx.line(format!("T = {t}")),
        ThresholdValue::LowerBound(t) => ctx.line(format!("T >= {t} (an avoider exists for N = {})", t - 1)),
    }
    if let Some(cert) = &res.avoider {
        let coloring = cert.coloring().map_err(|e| Fail::failure(e.to_string()))?;
        ctx.line(format!("avoider for N = {}: {}", cert.n, show_coloring(&coloring)));
        ctx.line(format!("verified: {}", if cert.verified { "yes" } else { "NO" }));
        if let Some(path) = &a.certificate {
            write_json(path, cert)?;
            ctx.line(format!("certificate: {}", path.display()));
        }
    }
    if fresh && ctx.cli.jobs <= 1 {
        ctx.line(format!("nodes: {}", res.stats.nodes));
    }
    ctx.write_out(&res)?;
    if res.avoider.as_ref().is_some_and(|c| !c.verified) {
        return Err(Fail::failure("avoider failed verification"));
    }
    if fresh {
        let prov = Provenance::now(Some(res.stats.clone()));
        ctx.save(Kind::Threshold, &family, params, json!(res), prov)?;
    }
    Ok(match res.value {
        ThresholdValue::Exact(_) => EXIT_FOUND,
        ThresholdValue::LowerBound(_) => EXIT_NONE,
    })
}

fn trace_table(ctx: &mut Ctx<'_>, tr: &ConstructiveTrace) {
    ctx.line(format!("{:>5}  {:>3}  {:>6}  {:>8}  {:>8}  {:>8}", "round", "t", "y", "|B|", "|D|", "dropped"));
    for (i, &t) in tr.t.iter().enumerate() {
        let b = tr.b_sizes.get(i).map_or("-".to_string(), usize::to_string);
        let (y, d, dropped) = if i == 0 {
            ("-".to_string(), "-".to_string(), "-".to_string())
        } else {
            (
                tr.y.get(i - 1).map_or("-".to_string(), usize::to_string),
                tr.d_sizes.get(i - 1).map_or("-".to_string(), usize::to_string),
                tr.truncated.get(i - 1).map_or("-".to_string(), usize::to_string),
            )
        };
        ctx.line(format!("{i:>5}  {t:>3}  {y:>6}  {b:>8}  {d:>8}  {dropped:>8}"));
    }
}

fn cmd_construct(ctx: &mut Ctx<'_>, a: &ConstructArgs) -> Outcome {
    let coloring = load_coloring(&a.coloring)?;
    let params = ConstructionParams { y_max: a.y_max, size_floor: a.size_floor, max_rounds: a.max_rounds };
    let trace = run_construction(&coloring, &params).map_err(|e| Fail::failure(e.to_string()))?;
    ctx.line(format!("coloring: N = {}, r = {}", coloring.n(), coloring.r()));
    ctx.line(format!("starting class: color {} (max gap {})", trace.t[0], trace.t0_max_gap));
    trace_table(ctx, &trace);
    if let Some(path) = &a.trace {
        write_json(path, &trace)?;
        ctx.line(format!("trace: {}", path.display()));
    }
    ctx.write_out(&trace)?;
    let code = match (&trace.witness, &trace.failure_reason) {
        (Some(w), _) => {
            if let Some((i, j)) = trace.repeat_pair {
                ctx.line(format!("repeat: rounds {i} and {j}"));
            }
            ctx.line(format!(
                "witness: x = {}, y = {}, x + y = {}, xy = {}, color {}",
                w.x,
                w.y,
                w.x + w.y,
                w.x_tilde,
                w.color
            ));
            EXIT_FOUND
        }
        (None, reason) => {
            ctx.line(format!("no witness: {}", reason.as_deref().unwrap_or("construction stopped")));
            EXIT_NONE
        }
    };
    let family = preset_family("xyxy", None).map_err(|e| Fail::failure(e.to_string()))?;
    let record_params = json!({
        "coloring": coloring_digest(&coloring),
        "max_rounds": a.max_rounds,
        "size_floor": a.size_floor,
        "y_max": a.y_max,
    });
    let payload = ConstructionPayload { coloring: (&coloring).into(), params, trace };
    ctx.save(Kind::Construction, &family, record_params, json!(payload), Provenance::now(None))?;
    Ok(code)
}

fn parse_coeffs(s: &str) -> Result<Vec<i64>, Fail> {
    s.split(',')
        .map(|p| p.trim().parse::<i64>().map_err(|_| Fail::input(format!("bad coefficient `{}`", p.trim()))))
        .collect()
}

fn cmd_reduce(ctx: &mut Ctx<'_>, a: &ReduceArgs) -> Outcome {
    let c = parse_coeffs(&a.coeffs)?;
    let coloring = load_coloring(&a.coloring)?;
    let data = quadratic_setup(&c).map_err(|e| Fail::input(e.to_string()))?;
    ctx.line(format!("c = {}", tuple(&c)));
    ctx.line(format!(
        "root: t = {} of {}, d = {}",
        data.root_t,
        if data.chosen_poly == monochrome_core::reductions::ChosenPoly::P { "p" } else { "q" },
        data.d
    ));
    ctx.line(format!("u = {}", tuple(&data.u)));
    ctx.line(format!("b = {}", data.b));
    let range = a.lifted_range.unwrap_or(coloring.n() * data.b as usize);
    ctx.line(format!("lifted coloring: {} colors on [1..{range}]", coloring.r() as i64 + data.b - 1));
    let opts = SolveOptions { lifted_range: Some(range) };
    let sol = solve_quadratic(&c, &coloring, &opts).map_err(|e| Fail::failure(e.to_string()))?;
    let Some(sol) = sol else {
        ctx.line("no solution in the lifted range");
        return Ok(EXIT_NONE);
    };
    ctx.line(format!(
        "solution: a = {} color {} from (x, y) = ({}, {})",
        tuple(&sol.a),
        sol.color,
        sol.source_witness.0,
        sol.source_witness.1
    ));
    let lhs: Vec<String> = c.iter().zip(&sol.a[1..]).map(|(ci, ai)| format!("{ci}*{ai}^2")).collect();
    ctx.line(format!("check: {} = {}", lhs.join(" + "), sol.a[0]));
    ctx.write_out(&sol)?;
    let family = reduction_family(&sol.u).map_err(|e| Fail::failure(e.to_string()))?;
    let params = json!({"box": range, "c": c, "coloring": coloring_digest(&coloring)});
    let payload = ReductionPayload { coloring: (&coloring).into(), solution: sol };
    ctx.save(Kind::Reduction, &family, params, json!(payload), Provenance::now(None))?;
    Ok(EXIT_FOUND)
}

fn cmd_lift_exp(ctx: &mut Ctx<'_>, a: &LiftExpArgs) -> Outcome {
    let coloring = load_coloring(&a.coloring)?;
    let lifted = exp_lift(&coloring, a.base).map_err(|e| Fail::input(e.to_string()))?;
    ctx.line(format!("lifted coloring n -> chi({}^n): N = {}, r = {}", a.base, lifted.n(), lifted.r()));
    ctx.line(format!("colors: {}", show_coloring(&lifted)));
    if let Some(path) = ctx.cli.out.clone() {
        fs::write(&path, lifted.to_text()).map_err(|e| Fail::input(format!("cannot write {}: {e}", path.display())))?;
        ctx.line(format!("wrote {}", path.display()));
    }
    let schur = preset_family("schur", None).map_err(|e| Fail::failure(e.to_string()))?;
    match find_first_witness(&schur, &lifted, &WitnessOptions::default()) {
        Some(w) => {
            let (x, y) = (w.instance.assignment[0] as u32, w.instance.assignment[1] as u32);
            let (px, py, prod) = decode_exp_pair(a.base, x, y);
            ctx.line(format!("schur witness {} -> ({px}, {py}, {prod}) color {}", tuple(&[x, y]), w.color));
            Ok(EXIT_FOUND)
        }
        None => {
            ctx.line("no schur witness in the lifted coloring");
            Ok(EXIT_NONE)
        }
    }
}

fn cmd_cache(ctx: &mut Ctx<'_>, cmd: &CacheCmd) -> Outcome {
    let store = ctx.store().ok_or_else(|| Fail::input("pass --store PATH"))?;
    match cmd {
        CacheCmd::List => {
            let report = store.load().map_err(Fail::input)?;
            for (i, r) in report.records.iter().enumerate() {
                ctx.line(format!("{:>4}  {:<12}  {}  {}", i + 1, r.kind.as_str(), &r.fingerprint[..16], r.params));
            }
            for q in &report.quarantined {
                ctx.line(format!("quarantined line {}: {}", q.line, q.reason));
            }
            ctx.line(format!("records: {}", report.records.len()));
            Ok(EXIT_FOUND)
        }
        CacheCmd::Lookup { kind, family, params } => {
            let kind = Kind::parse(kind).ok_or_else(|| Fail::input(format!("unknown kind `{kind}`")))?;
            let family = load_family(family)?;
            let params: Value =
                serde_json::from_str(params).map_err(|e| Fail::input(format!("--params is not JSON: {e}")))?;
            match store.lookup(kind, &fingerprint(&family), &params).map_err(Fail::input)? {
                Some(rec) => {
                    ctx.line(format!("found {} record for {}", kind.as_str(), family.name()));
                    ctx.line(serde_json::to_string_pretty(&rec.payload).map_err(|e| Fail::failure(e.to_string()))?);
                    ctx.write_out(&rec)?;
                    Ok(EXIT_FOUND)
                }
                None => {
                    ctx.line("not found");
                    Ok(EXIT_NONE)
                }
            }
        }
        CacheCmd::Verify => {
            let report = store.load().map_err(Fail::input)?;
            for q in &report.quarantined {
                ctx.line(format!("quarantined line {}: {}", q.line, q.reason));
            }
            ctx.line(format!("verified: {}, quarantined: {}", report.records.len(), report.quarantined.len()));
            Ok(if report.quarantined.is_empty() { EXIT_FOUND } else { EXIT_NONE })
        }
    }
}

/// Parses `argv` (including the program name), runs the command and writes
/// the report to `out` and diagnostics to `err`. Returns the exit status.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_FOUND };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut ctx = Ctx { cli: &cli, out: String::new() };
    let result = match &cli.command {
        Command::Family(c) => cmd_family(&mut ctx, c),
        Command::Witness(a) => cmd_witness(&mut ctx, a),
        Command::Avoid(a) => cmd_avoid(&mut ctx, a),
        Command::Threshold(a) => cmd_threshold(&mut ctx, a),
        Command::Construct(a) => cmd_construct(&mut ctx, a),
        Command::Reduce(a) => cmd_reduce(&mut ctx, a),
        Command::LiftExp(a) => cmd_lift_exp(&mut ctx, a),
        Command::Cache(c) => cmd_cache(&mut ctx, c),
    };
    let _ = out.write_all(ctx.out.as_bytes());
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.msg);
            f.code
        }
    }
}
