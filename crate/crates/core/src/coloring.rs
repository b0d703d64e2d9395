//! Finite colorings of `[1..N]`.

use serde::{Deserialize, Serialize};

use crate::error::ColoringError;

/// A total map `[1..N] -> {1..r}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coloring {
    r: u32,
    colors: Vec<u32>,
}

impl Coloring {
    pub fn new(r: u32, colors: Vec<u32>) -> Result<Self, ColoringError> {
        if colors.is_empty() {
            return Err(ColoringError::EmptyRange);
        }
        if r == 0 {
            return Err(ColoringError::NoColors);
        }
        if let Some((i, &c)) = colors.iter().enumerate().find(|(_, &c)| c == 0 || c > r) {
            return Err(ColoringError::ColorOutOfRange { position: i + 1, color: c, r });
        }
        Ok(Coloring { r, colors })
    }

    pub fn from_fn(n: usize, r: u32, f: impl FnMut(usize) -> u32) -> Result<Self, ColoringError> {
        Coloring::new(r, (1..=n).map(f).collect())
    }

    pub fn monochromatic(n: usize) -> Self {
        Coloring::new(1, vec![1; n]).expect("valid")
    }

    /// Odd integers get color 1, even integers color 2.
    pub fn parity(n: usize) -> Self {
        Coloring::from_fn(n, 2, |i| if i % 2 == 1 { 1 } else { 2 }).expect("valid")
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Color of `i` for `1 <= i <= N`.
    #[inline]
    pub fn color(&self, i: usize) -> u32 {
        self.colors[i - 1]
    }

    /// Color of `i`, or `None` outside `[1..N]`.
    #[inline]
    pub fn get(&self, i: i64) -> Option<u32> {
        if i < 1 {
            return None;
        }
        self.colors.get(i as usize - 1).copied()
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    /// Members of color class `t`, ascending.
    pub fn class(&self, t: u32) -> Vec<usize> {
        (1..=self.n()).filter(|&i| self.color(i) == t).collect()
    }

    /// Relabels colors through `perm`, where `perm[c - 1]` is the new label of `c`.
    pub fn permuted(&self, perm: &[u32]) -> Result<Self, ColoringError> {
        Coloring::new(self.r, self.colors.iter().map(|&c| perm[c as usize - 1]).collect())
    }

    /// Restriction to `[1..m]`.
    pub fn truncated(&self, m: usize) -> Result<Self, ColoringError> {
        Coloring::new(self.r, self.colors[..m.min(self.n())].to_vec())
    }

    /// Canonical form under color relabeling: colors introduced in increasing order.
    pub fn is_canonical(&self) -> bool {
        let mut max_seen = 0;
        for &c in &self.colors {
            if c > max_seen + 1 {
                return false;
            }
            max_seen = max_seen.max(c);
        }
        true
    }

    /// Text format: `N r` on the first line, then N colors.
    pub fn parse_text(s: &str) -> Result<Self, ColoringError> {
        let mut it = s.split_whitespace();
        let mut next_num = |what: &str| -> Result<u64, ColoringError> {
            let tok = it.next().ok_or_else(|| ColoringError::Format(format!("missing {what}")))?;
            tok.parse().map_err(|_| ColoringError::Format(format!("bad {what} `{tok}`")))
        };
        let n = next_num("N")? as usize;
        let r = next_num("r")? as u32;
        let mut colors = Vec::with_capacity(n);
        for _ in 0..n {
            colors.push(next_num("color")? as u32);
        }
        if it.next().is_some() {
            return Err(ColoringError::Format(format!("more than {n} colors")));
        }
        Coloring::new(r, colors)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.r);
        for chunk in self.colors.chunks(40) {
            let line: Vec<String> = chunk.iter().map(u32::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Run-length encoding as `(color, run length)` pairs.
    pub fn to_runs(&self) -> Vec<(u32, usize)> {
        let mut runs: Vec<(u32, usize)> = Vec::new();
        for &c in &self.colors {
            match runs.last_mut() {
                Some((last, len)) if *last == c => *len += 1,
                _ => runs.push((c, 1)),
            }
        }
        runs
    }

    pub fn from_runs(r: u32, runs: &[(u32, usize)]) -> Result<Self, ColoringError> {
        let colors = runs.iter().flat_map(|&(c, len)| std::iter::repeat_n(c, len)).collect();
        Coloring::new(r, colors)
    }
}

/// Serialized form used inside certificates and traces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLengthColoring {
    pub n: usize,
    pub r: u32,
    pub runs: Vec<(u32, usize)>,
}

impl From<&Coloring> for RunLengthColoring {
    fn from(c: &Coloring) -> Self {
        RunLengthColoring { n: c.n(), r: c.r(), runs: c.to_runs() }
    }
}

impl TryFrom<&RunLengthColoring> for Coloring {
    type Error = ColoringError;
    fn try_from(rl: &RunLengthColoring) -> Result<Self, ColoringError> {
        let c = Coloring::from_runs(rl.r, &rl.runs)?;
        if c.n() != rl.n {
            return Err(ColoringError::LengthMismatch { expected: rl.n, got: c.n() });
        }
        Ok(c)
    }
}
