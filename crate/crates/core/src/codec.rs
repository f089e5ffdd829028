//! The quadratic code `θ(n, b, z) = (n-1)(n+4) + b(n+2) + z` and its inverse
//! `ι` on `T = {(n, b, z) : n ≥ 1, b ∈ {0,1}, 0 ≤ z ≤ n+1}`.
//!
//! Ordered lexicographically, `T` is order isomorphic to `N` through `θ`:
//! the block of triples with first entry `n` occupies exactly
//! `(n-1)(n+4) .. n(n+5)`, `2(n+2)` consecutive integers.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{invalid, Error, Result};
use crate::report::{Status, VerificationReport};

/// A triple `(n, b, z)`. The derived order is lexicographic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CodedTriple {
    pub n: u64,
    pub b: bool,
    pub z: i64,
}

impl CodedTriple {
    pub fn new(n: u64, b: bool, z: i64) -> Self {
        Self { n, b, z }
    }

    /// Membership in `T`: `n ≥ 1` and `z ∈ [0, n+1]`.
    pub fn in_t(&self) -> bool {
        self.n >= 1 && self.z >= 0 && (self.z as u128) <= self.n as u128 + 1
    }

    /// The tighter regime `z ∈ [0, n]`, where `z` lies in the support of `rho(n)`.
    pub fn in_support(&self) -> bool {
        self.n >= 1 && self.z >= 0 && (self.z as u128) <= self.n as u128
    }

    pub fn theta(&self) -> Result<i64> {
        theta(self.n, self.b, self.z)
    }
}

impl std::fmt::Display for CodedTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.n, u8::from(self.b), self.z)
    }
}

/// Start of the `n`-block, `(n-1)(n+4)`. Only called with `n < 2^40`.
fn block_start(n: u64) -> i128 {
    (n as i128 - 1) * (n as i128 + 4)
}

/// `(n-1)(n+4) + b(n+2) + z`. Total on `n ≥ 1`; `z` is not range checked.
pub fn theta(n: u64, b: bool, z: i64) -> Result<i64> {
    if n < 1 {
        return Err(invalid("theta requires n >= 1"));
    }
    let value = (n as i128 - 1)
        .checked_mul(n as i128 + 4)
        .map(|start| start + i128::from(b) * (n as i128 + 2) + z as i128)
        .ok_or(Error::Overflow("theta"))?;
    i64::try_from(value).map_err(|_| Error::Overflow("theta"))
}

/// The unique triple of `T` with `θ = m`.
pub fn iota(m: i64) -> Result<CodedTriple> {
    if m < 0 {
        return Err(invalid(format!("iota requires m >= 0, got {m}")));
    }
    let target = m as i128;
    // Largest n with block_start(n) <= m; block_start is increasing on n >= 1.
    let mut hi: u64 = 2;
    while block_start(hi) <= target {
        hi *= 2;
    }
    let mut lo: u64 = 1;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if block_start(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let n = lo;
    let offset = target - block_start(n);
    let width = n as i128 + 2;
    Ok(CodedTriple {
        n,
        b: offset >= width,
        z: (offset % width) as i64,
    })
}

/// Finite prefix `(a, x, g)` of a point of `Z₊^ω × 2^ω × Z^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawPointPrefix", into = "RawPointPrefix")]
pub struct PointPrefix {
    a: Vec<u64>,
    x: Vec<bool>,
    g: Vec<i64>,
}

/// JSON shape: integer arrays `a`, `x` (0/1), `g`.
#[derive(Serialize, Deserialize)]
pub(crate) struct RawPointPrefix {
    pub a: Vec<u64>,
    pub x: Vec<u8>,
    pub g: Vec<i64>,
}

impl TryFrom<RawPointPrefix> for PointPrefix {
    type Error = Error;

    fn try_from(raw: RawPointPrefix) -> Result<Self> {
        let x = raw
            .x
            .iter()
            .map(|&bit| match bit {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(invalid(format!("x entry {other} is not a bit"))),
            })
            .collect::<Result<_>>()?;
        PointPrefix::new(raw.a, x, raw.g)
    }
}

impl From<PointPrefix> for RawPointPrefix {
    fn from(p: PointPrefix) -> Self {
        RawPointPrefix {
            a: p.a,
            x: p.x.into_iter().map(u8::from).collect(),
            g: p.g,
        }
    }
}

impl PointPrefix {
    pub fn new(a: Vec<u64>, x: Vec<bool>, g: Vec<i64>) -> Result<Self> {
        if a.len() != x.len() || a.len() != g.len() {
            return Err(invalid(format!(
                "prefix lengths differ: |a| = {}, |x| = {}, |g| = {}",
                a.len(),
                x.len(),
                g.len()
            )));
        }
        if let Some(k) = a.iter().position(|&n| n == 0) {
            return Err(invalid(format!("a({k}) = 0, entries must be positive")));
        }
        Ok(Self { a, x, g })
    }

    pub fn from_triples(triples: &[CodedTriple]) -> Result<Self> {
        Self::new(
            triples.iter().map(|t| t.n).collect(),
            triples.iter().map(|t| t.b).collect(),
            triples.iter().map(|t| t.z).collect(),
        )
    }

    pub fn depth(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[u64] {
        &self.a
    }

    pub fn x(&self) -> &[bool] {
        &self.x
    }

    pub fn g(&self) -> &[i64] {
        &self.g
    }

    pub fn triple(&self, k: usize) -> CodedTriple {
        CodedTriple::new(self.a[k], self.x[k], self.g[k])
    }

    pub fn triples(&self) -> impl Iterator<Item = CodedTriple> + '_ {
        (0..self.depth()).map(|k| self.triple(k))
    }

    /// The same `(a, x)` with `g` replaced.
    pub fn with_g(&self, g: Vec<i64>) -> Result<Self> {
        Self::new(self.a.clone(), self.x.clone(), g)
    }

    /// `g(k) ∈ [0, a(k)+1]` for every `k`: the truncation of `𝒯`.
    pub fn in_coding_region(&self) -> bool {
        self.triples().all(|t| t.in_t())
    }

    /// `g(k) ∈ [0, a(k)]` for every `k`: `g` lies in the support of `μ_a`.
    pub fn in_support_region(&self) -> bool {
        self.triples().all(|t| t.in_support())
    }
}

/// Coordinatewise `θ(a(k), x(k), g(k))`.
pub fn t_lift(p: &PointPrefix) -> Result<Vec<i64>> {
    p.triples().map(|t| t.theta()).collect()
}

/// Coordinatewise `ι`.
pub fn i_lift(s: &[i64]) -> Result<PointPrefix> {
    let triples = s.iter().map(|&m| iota(m)).collect::<Result<Vec<_>>>()?;
    PointPrefix::from_triples(&triples)
}

/// `|θ(q) - θ(p)|` for triples in the support regime with distinct `(n, b)`.
/// With the lexicographically smaller `(n, b)` first this is `θ(q) - θ(p)`,
/// and it is always at least 2.
pub fn separation_gap(p: CodedTriple, q: CodedTriple) -> Result<i64> {
    for t in [p, q] {
        if !t.in_support() {
            return Err(invalid(format!("{t} is outside the regime 0 <= z <= n")));
        }
    }
    let (low, high) = match (p.n, p.b).cmp(&(q.n, q.b)) {
        std::cmp::Ordering::Less => (p, q),
        std::cmp::Ordering::Greater => (q, p),
        std::cmp::Ordering::Equal => {
            return Err(invalid(format!("{p} and {q} share (n, b); the gap lemma does not apply")))
        }
    };
    high.theta()?
        .checked_sub(low.theta()?)
        .ok_or(Error::Overflow("separation gap"))
}

/// Scans `[0, max)`: `θ(ι(m)) = m`, `ι(m) ∈ T`, and `ι(m) < ι(m+1)`.
pub fn roundtrip_scan(max: i64) -> Result<VerificationReport> {
    if max < 1 {
        return Err(invalid(format!("scan bound must be positive, got {max}")));
    }
    let mut failures: Vec<i64> = Vec::new();
    let mut prev: Option<CodedTriple> = None;
    for m in 0..max {
        let t = iota(m)?;
        let ordered = prev.is_none_or(|p| p < t);
        if t.theta()? != m || !t.in_t() || !ordered {
            failures.push(m);
        }
        prev = Some(t);
    }
    let status = if failures.is_empty() { Status::Pass } else { Status::Fail };
    let mut report = VerificationReport::new("codec-roundtrip", status, 0)
        .with_sides(json!(max as u64 - failures.len() as u64), json!(max))
        .with_parameter("max", json!(max))
        .with_parameter("checks", json!(max))
        .with_parameter("failures", json!(failures.len()));
    if let Some(&m) = failures.first() {
        report = report.with_counterexample(json!({ "m": m }));
    }
    Ok(report)
}
