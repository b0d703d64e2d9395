//! Pattern families: finite sets of integer polynomials over a common set of
//! variables, plus generators for the families studied by this crate.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::FamilyError;
use crate::poly::IntPoly;

/// An ordered, duplicate-free list of polynomial terms over `num_vars`
/// variables. A witness for the family is a point at which every term lands
/// in a single color class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FamilyFile", into = "FamilyFile")]
pub struct PatternFamily {
    name: Option<String>,
    num_vars: usize,
    terms: Vec<IntPoly>,
    distinct_required: bool,
}

impl PatternFamily {
    /// Builds a family, re-embedding every term in `num_vars` variables and
    /// dropping repeated terms (first occurrence wins).
    pub fn new(
        name: Option<String>,
        num_vars: usize,
        terms: impl IntoIterator<Item = IntPoly>,
    ) -> Result<Self, FamilyError> {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for (index, t) in terms.into_iter().enumerate() {
            if t.used_vars() > num_vars {
                return Err(FamilyError::TooManyVariables {
                    index,
                    term_vars: t.used_vars(),
                    num_vars,
                });
            }
            let t = t.with_num_vars(num_vars)?;
            if seen.insert(t.clone()) {
                kept.push(t);
            }
        }
        if kept.is_empty() {
            return Err(FamilyError::Empty);
        }
        Ok(PatternFamily { name, num_vars, terms: kept, distinct_required: false })
    }

    /// Parses each term with the polynomial text syntax.
    pub fn from_strings<S: AsRef<str>>(
        name: Option<&str>,
        num_vars: usize,
        terms: &[S],
    ) -> Result<Self, FamilyError> {
        let polys = terms
            .iter()
            .map(|s| IntPoly::parse_with_vars(s.as_ref(), num_vars))
            .collect::<Result<Vec<_>, _>>()?;
        PatternFamily::new(name.map(str::to_owned), num_vars, polys)
    }

    pub fn with_distinct(mut self, distinct_required: bool) -> Self {
        self.distinct_required = distinct_required;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("unnamed")
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> &[IntPoly] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn distinct_required(&self) -> bool {
        self.distinct_required
    }

    /// True when the two families have the same terms regardless of order.
    pub fn same_terms(&self, other: &PatternFamily) -> bool {
        self.num_vars == other.num_vars && self.is_subfamily_of(other) && other.is_subfamily_of(self)
    }

    pub fn is_subfamily_of(&self, other: &PatternFamily) -> bool {
        self.num_vars == other.num_vars && self.terms.iter().all(|t| other.terms.contains(t))
    }

    /// A family containing the terms of both (same variable count).
    pub fn extended_with(&self, extra: &[IntPoly]) -> Result<PatternFamily, FamilyError> {
        let mut f = PatternFamily::new(
            self.name.clone(),
            self.num_vars,
            self.terms.iter().cloned().chain(extra.iter().cloned()),
        )?;
        f.distinct_required = self.distinct_required;
        Ok(f)
    }

    /// Order-independent identity of the family: variable count, the sorted
    /// canonical term strings, and the distinctness flag. Names do not
    /// participate.
    pub fn canonical_key(&self) -> String {
        let mut ts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        ts.sort();
        format!("vars={};distinct={};terms={}", self.num_vars, self.distinct_required, ts.join(";"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, FamilyError> {
        serde_json::from_str(s).map_err(|e| FamilyError::Format(e.to_string()))
    }
}

/// On-disk form of a [`PatternFamily`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyFile {
    #[serde(default)]
    pub name: Option<String>,
    pub num_vars: usize,
    pub terms: Vec<String>,
    #[serde(default)]
    pub distinct_required: bool,
}

impl TryFrom<FamilyFile> for PatternFamily {
    type Error = FamilyError;
    fn try_from(f: FamilyFile) -> Result<Self, FamilyError> {
        Ok(PatternFamily::from_strings(f.name.as_deref(), f.num_vars, &f.terms)?
            .with_distinct(f.distinct_required))
    }
}

impl From<PatternFamily> for FamilyFile {
    fn from(f: PatternFamily) -> Self {
        FamilyFile {
            name: f.name,
            num_vars: f.num_vars,
            terms: f.terms.iter().map(|t| t.to_string()).collect(),
            distinct_required: f.distinct_required,
        }
    }
}

/// Hypotheses of the main construction: `function_sets[i - 1]` holds the
/// functions of `i` variables, each vanishing when its last variable is 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoreiraSpec {
    s: usize,
    function_sets: Vec<Vec<IntPoly>>,
}

impl MoreiraSpec {
    pub fn new(s: usize, function_sets: Vec<Vec<IntPoly>>) -> Result<Self, FamilyError> {
        if s == 0 || function_sets.len() != s {
            return Err(FamilyError::WrongLevelCount { expected: s, got: function_sets.len() });
        }
        let mut sets = Vec::with_capacity(s);
        for (lvl, set) in function_sets.into_iter().enumerate() {
            let level = lvl + 1;
            let mut fixed = Vec::with_capacity(set.len());
            for (index, f) in set.into_iter().enumerate() {
                if f.used_vars() > level {
                    return Err(FamilyError::WrongArity { level, got: f.used_vars() });
                }
                let f = f.with_num_vars(level)?;
                // Every monomial must involve the last variable; this is
                // exactly "zero constant term for every fixed prefix".
                if !f.monomials().all(|(e, _)| e[level - 1] > 0) {
                    return Err(FamilyError::NonzeroConstantTerm { level, index });
                }
                fixed.push(f);
            }
            sets.push(fixed);
        }
        Ok(MoreiraSpec { s, function_sets: sets })
    }

    /// Every level gets the same list of functions built by `make(level)`.
    pub fn uniform(
        s: usize,
        mut make: impl FnMut(usize) -> Vec<IntPoly>,
    ) -> Result<Self, FamilyError> {
        MoreiraSpec::new(s, (1..=s).map(&mut make).collect())
    }

    /// `F[i] = {0, x1*...*xi}` for every level.
    pub fn all_products(s: usize) -> Self {
        MoreiraSpec::uniform(s, |i| {
            let all: Vec<usize> = (0..i).collect();
            vec![IntPoly::zero(i), IntPoly::product_of(i, &all).expect("in range")]
        })
        .expect("products vanish at zero")
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn function_set(&self, level: usize) -> &[IntPoly] {
        &self.function_sets[level - 1]
    }

    pub fn from_json(s: &str) -> Result<Self, FamilyError> {
        let file: MoreiraSpecFile =
            serde_json::from_str(s).map_err(|e| FamilyError::Format(e.to_string()))?;
        let sets = file
            .function_sets
            .iter()
            .enumerate()
            .map(|(lvl, fs)| {
                fs.iter()
                    .map(|f| IntPoly::parse_with_vars(f, lvl + 1))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        MoreiraSpec::new(file.s, sets)
    }
}

/// JSON form of a [`MoreiraSpec`]: level `i` functions use variables `x0..x{i-1}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MoreiraSpecFile {
    pub s: usize,
    pub function_sets: Vec<Vec<String>>,
}

/// The family `{x0*...*xs} ∪ {x0*...*xj + f(x_{j+1}, ..., x_i) : 0 <= j < i <= s, f ∈ F[i-j]}`.
pub fn moreira_family(spec: &MoreiraSpec) -> PatternFamily {
    let s = spec.s;
    let n = s + 1;
    let all: Vec<usize> = (0..n).collect();
    let mut terms = vec![IntPoly::product_of(n, &all).expect("in range")];
    for i in 1..=s {
        for j in 0..i {
            let prefix: Vec<usize> = (0..=j).collect();
            let head = IntPoly::product_of(n, &prefix).expect("in range");
            let args: Vec<Vec<usize>> = (j + 1..=i).map(|v| vec![v]).collect();
            for f in spec.function_set(i - j) {
                let tail = f.substitute_products(&args, n).expect("arity checked by spec");
                terms.push(&head + &tail);
            }
        }
    }
    PatternFamily::new(Some(format!("moreira(s={s})")), n, terms).expect("non-empty")
}

/// Named families: `schur`, `vdw` (needs k), `geometric` (needs k), `xyxy`,
/// `x_xp1`, `x_y_3xmy`.
pub fn preset_family(name: &str, k: Option<u32>) -> Result<PatternFamily, FamilyError> {
    let strs = |v: &[&str], vars: usize| PatternFamily::from_strings(None, vars, v);
    let need_k = |min: u32| -> Result<u32, FamilyError> {
        let k = k.ok_or_else(|| FamilyError::MissingParameter(name.to_owned()))?;
        if k < min {
            return Err(FamilyError::BadParameter {
                name: name.to_owned(),
                msg: format!("k must be at least {min}"),
            });
        }
        Ok(k)
    };
    let fam = match name {
        "schur" => strs(&["x0", "x1", "x0 + x1"], 2)?.with_name("schur"),
        "xyxy" => strs(&["x0", "x0 + x1", "x0*x1"], 2)?.with_name("xyxy"),
        "x_xp1" => strs(&["x0", "x0 + 1"], 1)?.with_name("x_xp1"),
        "x_y_3xmy" => strs(&["x0", "x1", "3*x0 - x1"], 2)?.with_name("x_y_3xmy"),
        "vdw" => {
            let k = need_k(2)?;
            let terms: Vec<String> = (0..k).map(|m| format!("x0 + {m}*x1")).collect();
            strs(&terms.iter().map(String::as_str).collect::<Vec<_>>(), 2)?
                .with_name(format!("vdw:{k}"))
        }
        "geometric" => {
            let k = need_k(1)?;
            let terms: Vec<String> = (0..=k).map(|m| format!("x0*x1^{m}")).collect();
            strs(&terms.iter().map(String::as_str).collect::<Vec<_>>(), 2)?
                .with_name(format!("geometric:{k}"))
        }
        other => return Err(FamilyError::UnknownPreset(other.to_owned())),
    };
    Ok(fam)
}

/// Parses `name` or `name:k` and builds the preset.
pub fn parse_preset(spec: &str) -> Result<PatternFamily, FamilyError> {
    match spec.split_once(':') {
        None => preset_family(spec, None),
        Some((name, k)) => {
            let k: u32 = k.trim().parse().map_err(|_| FamilyError::BadParameter {
                name: name.to_owned(),
                msg: format!("`{k}` is not a non-negative integer"),
            })?;
            preset_family(name, Some(k))
        }
    }
}

/// `{x0, x0*x1, x0 + x1, x0 + u_1*x1, ..., x0 + u_k*x1}`.
pub fn reduction_family(u: &[i64]) -> Result<PatternFamily, FamilyError> {
    if u.is_empty() {
        return Err(FamilyError::EmptyReductionVector);
    }
    let x = IntPoly::var(2, 0);
    let y = IntPoly::var(2, 1);
    let mut terms = vec![x.clone(), &x * &y, &x + &y];
    for &ul in u {
        terms.push(&x + &(&IntPoly::constant(2, ul) * &y));
    }
    let label = u.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
    PatternFamily::new(Some(format!("reduction({label})")), 2, terms)
}
