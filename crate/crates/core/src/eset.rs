//! Finite-depth pieces of `E = t(graph f)` built from supplied graph data,
//! with the two checks behind its Haar nullity: distinct points differ by at
//! least 2 somewhere, and so every translate meets the coin-flip cube
//! `{0,1}^d` in at most one point.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::codec::{i_lift, t_lift, PointPrefix};
use crate::error::{invalid, Error, Result};
use crate::measure::{Interval, IntervalBox};
use crate::report::{Status, VerificationReport};

/// Which bound the `g` entries of a dataset obey.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `g(k) ∈ [0, a(k)]`: `g` lies in the support of `μ_a`.
    Support,
    /// `g(k) ∈ [0, a(k)+1]`: anything `θ` still codes bijectively.
    /// Only meant for negative controls.
    Coding,
}

impl Regime {
    fn admits(&self, p: &PointPrefix) -> bool {
        match self {
            Regime::Support => p.in_support_region(),
            Regime::Coding => p.in_coding_region(),
        }
    }
}

/// One point `(a, x, f(a, x))` of the graph, truncated to depth `d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphDatum {
    prefix: PointPrefix,
    regime: Regime,
}

impl GraphDatum {
    /// Requires `g(k) ∈ [0, a(k)]`.
    pub fn new(prefix: PointPrefix) -> Result<Self> {
        Self::with_regime(prefix, Regime::Support)
    }

    pub fn with_regime(prefix: PointPrefix, regime: Regime) -> Result<Self> {
        if !regime.admits(&prefix) {
            return Err(invalid(format!(
                "g = {:?} leaves the {regime:?} region for a = {:?}",
                prefix.g(),
                prefix.a()
            )));
        }
        Ok(Self { prefix, regime })
    }

    pub fn prefix(&self) -> &PointPrefix {
        &self.prefix
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn depth(&self) -> usize {
        self.prefix.depth()
    }

    fn key(&self) -> (&[u64], &[bool]) {
        (self.prefix.a(), self.prefix.x())
    }
}

/// `(line number, message)` for each dataset line that breaks an invariant.
pub type Violations = Vec<(usize, String)>;

/// Parses a JSON lines dataset (`{"a": [...], "x": [...], "g": [...]}` per
/// line, blank lines skipped). Returns the data, or `(line number, message)`
/// for every offending line. Malformed JSON is reported separately as
/// [`Error::Parse`] so callers can tell syntax from invariant violations.
pub fn parse_dataset(text: &str, regime: Regime) -> Result<std::result::Result<Vec<GraphDatum>, Violations>> {
    let mut data = Vec::new();
    let mut violations = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: crate::codec::RawPointPrefix =
            serde_json::from_str(line).map_err(|e| Error::Parse(format!("line {line_no}: {e}")))?;
        match PointPrefix::try_from(raw).and_then(|p| GraphDatum::with_regime(p, regime)) {
            Ok(d) => data.push(d),
            Err(e) => violations.push((line_no, e.to_string())),
        }
    }
    if violations.is_empty() {
        if let Err(e) = check_dataset(&data) {
            return Ok(Err(e));
        }
        Ok(Ok(data))
    } else {
        Ok(Err(violations))
    }
}

/// Common depth and uniqueness of `(a, x)`; violations are `(1-based index, message)`.
fn check_dataset(data: &[GraphDatum]) -> std::result::Result<(), Vec<(usize, String)>> {
    let mut violations = Vec::new();
    let depth = data.first().map_or(0, GraphDatum::depth);
    let mut seen: BTreeMap<(&[u64], &[bool]), usize> = BTreeMap::new();
    for (idx, datum) in data.iter().enumerate() {
        if datum.depth() != depth {
            violations.push((idx + 1, format!("depth {} differs from {depth}", datum.depth())));
        }
        if let Some(first) = seen.insert(datum.key(), idx + 1) {
            violations.push((idx + 1, format!("(a, x) repeats entry {first}")));
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// The images `t(a, x, g)` of a dataset, all of one depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EPrefixSet {
    depth: usize,
    regime: Regime,
    points: BTreeSet<Vec<i64>>,
}

impl EPrefixSet {
    /// Validates that every point decodes to a prefix in the given regime.
    pub fn new(depth: usize, regime: Regime, points: impl IntoIterator<Item = Vec<i64>>) -> Result<Self> {
        let points: BTreeSet<Vec<i64>> = points.into_iter().collect();
        for p in &points {
            if p.len() != depth {
                return Err(invalid(format!("point {p:?} does not have depth {depth}")));
            }
            if !regime.admits(&i_lift(p)?) {
                return Err(invalid(format!("point {p:?} decodes outside the {regime:?} region")));
            }
        }
        Ok(Self { depth, regime, points })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.points.iter()
    }

    /// `[min, max]` of each coordinate over the points; `None` when empty.
    pub fn bounds(&self) -> Option<IntervalBox> {
        let first = self.points.iter().next()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for p in &self.points {
            for k in 0..self.depth {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some(IntervalBox::new(
            lo.into_iter()
                .zip(hi)
                .map(|(l, h)| Interval::new(l, h).expect("min <= max"))
                .collect(),
        ))
    }
}

/// `{ t(datum) : datum ∈ data }`. Data must share a depth and have distinct `(a, x)`.
pub fn build_e_prefixes(data: &[GraphDatum]) -> Result<EPrefixSet> {
    if let Err(violations) = check_dataset(data) {
        let (idx, msg) = &violations[0];
        return Err(invalid(format!("datum {idx}: {msg}")));
    }
    let depth = data.first().map_or(0, GraphDatum::depth);
    let regime = data.iter().map(GraphDatum::regime).max().unwrap_or(Regime::Support);
    let points = data
        .iter()
        .map(|d| t_lift(d.prefix()))
        .collect::<Result<BTreeSet<_>>>()?;
    debug_assert_eq!(points.len(), data.len(), "t is injective on the coding region");
    Ok(EPrefixSet { depth, regime, points })
}

fn linf_at_most_one(p: &[i64], q: &[i64]) -> bool {
    p.iter().zip(q).all(|(&u, &v)| (u as i128 - v as i128).abs() <= 1)
}

/// For every pair of distinct points with different decoded `(a, x)`,
/// confirms some coordinate differs by at least 2. Pairs whose `(a, x)`
/// agree on the whole prefix are listed as undecidable at this depth.
pub fn check_pairwise_gap(e: &EPrefixSet) -> Result<VerificationReport> {
    let points: Vec<&Vec<i64>> = e.points().collect();
    let decoded = points.iter().map(|p| i_lift(p)).collect::<Result<Vec<_>>>()?;
    let mut undecidable = Vec::new();
    let mut failures = Vec::new();
    let mut pairs: u64 = 0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            pairs += 1;
            let (p, q) = (&decoded[i], &decoded[j]);
            if p.a() == q.a() && p.x() == q.x() {
                undecidable.push(json!([points[i], points[j]]));
            } else if linf_at_most_one(points[i], points[j]) {
                failures.push(json!([points[i], points[j]]));
            }
        }
    }
    let status = if failures.is_empty() { Status::Pass } else { Status::Fail };
    let mut report = VerificationReport::new("pairwise-gap", status, e.depth())
        .with_parameter("points", json!(e.len()))
        .with_parameter("pairs", json!(pairs))
        .with_parameter("failing_pairs", json!(failures.len()))
        .with_parameter("undecidable_count", json!(undecidable.len()))
        .with_parameter("undecidable", json!(undecidable))
        .with_parameter("regime", json!(e.regime()));
    if let Some(first) = failures.into_iter().next() {
        report = report.with_counterexample(json!({ "pair": first }));
    }
    Ok(report)
}

/// Checks `|(E + r) ∩ {0,1}^d| ≤ 1` for every translate `r`.
///
/// Only translates in `∏ [-max e(k), 1 - min e(k)]` can meet the cube at all,
/// and each hit has the form `r = c - e` for a cube vertex `c` and a point
/// `e`, so tallying those `|E| · 2^d` pairs covers the whole window exactly.
/// `budget` bounds that tally. The report carries a cross-check against
/// [`check_pairwise_gap`], which must agree whenever it has no undecidable pairs.
pub fn coinflip_bound(e: &EPrefixSet, budget: u64) -> Result<VerificationReport> {
    let d = e.depth();
    let window_size = e.bounds().map_or(0, |b| {
        b.intervals()
            .iter()
            .fold(1u128, |acc, i| acc.saturating_mul(i.len() as u128 + 1))
    });
    let work = (e.len() as u128).saturating_mul(1u128.checked_shl(d as u32).unwrap_or(u128::MAX));
    let base = |status| {
        VerificationReport::new("coinflip-bound", status, d)
            .with_parameter("points", json!(e.len()))
            .with_parameter("window_size", json!(window_size.to_string()))
            .with_parameter("evaluations", json!(work.to_string()))
            .with_parameter("budget", json!(budget))
    };
    if work > budget as u128 {
        return Ok(base(Status::BudgetExceeded));
    }

    let mut hits: BTreeMap<Vec<i64>, Vec<&Vec<i64>>> = BTreeMap::new();
    for point in e.points() {
        for mask in 0u64..(1u64 << d) {
            let r = point
                .iter()
                .enumerate()
                .map(|(k, &v)| ((mask >> k) & 1) as i64 - v)
                .collect();
            hits.entry(r).or_default().push(point);
        }
    }
    let max_hits = hits.values().map(Vec::len).max().unwrap_or(0);
    let violation = hits.iter().find(|(_, pts)| pts.len() >= 2);

    let gap = check_pairwise_gap(e)?;
    let decided = gap.parameters["undecidable_count"] == json!(0);
    let status = if violation.is_some() { Status::Fail } else { Status::Pass };
    let cross_check = match (decided, gap.status == status) {
        (false, _) => "undecided",
        (true, true) => "agree",
        (true, false) => "disagree",
    };

    let mut report = base(status)
        .with_sides(json!(max_hits), json!(1))
        .with_parameter("max_hits", json!(max_hits))
        .with_parameter("pairwise_gap", json!(gap.status))
        .with_parameter("cross_check", json!(cross_check));
    if let Some((r, pts)) = violation {
        report = report.with_counterexample(json!({ "r": r, "points": pts }));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn datum(a: &[u64], x: &[u8], g: &[i64]) -> PointPrefix {
        PointPrefix::new(a.to_vec(), x.iter().map(|&b| b == 1).collect(), g.to_vec()).unwrap()
    }

    #[test]
    fn build_examples() {
        let e = build_e_prefixes(&[GraphDatum::new(datum(&[1], &[0], &[0])).unwrap()]).unwrap();
        assert_eq!(e.points().collect::<Vec<_>>(), vec![&vec![0]]);

        let two = [
            GraphDatum::new(datum(&[1], &[0], &[1])).unwrap(),
            GraphDatum::new(datum(&[1], &[1], &[0])).unwrap(),
        ];
        let e = build_e_prefixes(&two).unwrap();
        assert_eq!(e.points().cloned().collect::<Vec<_>>(), vec![vec![1], vec![3]]);

        let empty = build_e_prefixes(&[]).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn build_rejects_bad_data() {
        assert!(GraphDatum::new(datum(&[1], &[0], &[2])).is_err());
        assert!(GraphDatum::with_regime(datum(&[1], &[0], &[2]), Regime::Coding).is_ok());
        assert!(GraphDatum::with_regime(datum(&[1], &[0], &[3]), Regime::Coding).is_err());
        let dup = [
            GraphDatum::new(datum(&[1], &[0], &[1])).unwrap(),
            GraphDatum::new(datum(&[1], &[0], &[0])).unwrap(),
        ];
        assert!(build_e_prefixes(&dup).is_err());
        let mixed = [
            GraphDatum::new(datum(&[1], &[0], &[1])).unwrap(),
            GraphDatum::new(datum(&[1, 1], &[0, 0], &[0, 0])).unwrap(),
        ];
        assert!(build_e_prefixes(&mixed).is_err());
    }

    #[test]
    fn gap_examples() {
        let e = EPrefixSet::new(1, Regime::Support, [vec![1], vec![3]]).unwrap();
        let report = check_pairwise_gap(&e).unwrap();
        assert!(report.passed());
        assert_eq!(report.parameters["pairs"], json!(1));

        let single = EPrefixSet::new(2, Regime::Support, [vec![4, 0]]).unwrap();
        assert!(check_pairwise_gap(&single).unwrap().passed());

        // same (a, x) = ((2), (0)), different g
        let same = EPrefixSet::new(1, Regime::Support, [vec![6], vec![7]]).unwrap();
        let report = check_pairwise_gap(&same).unwrap();
        assert!(report.passed());
        assert_eq!(report.parameters["undecidable_count"], json!(1));
    }

    #[test]
    fn coinflip_examples() {
        let e = EPrefixSet::new(1, Regime::Support, [vec![1], vec![3]]).unwrap();
        let report = coinflip_bound(&e, 1000).unwrap();
        assert!(report.passed());
        assert_eq!(report.parameters["cross_check"], json!("agree"));
        assert_eq!(report.parameters["window_size"], json!("4"));

        let empty = EPrefixSet::new(2, Regime::Support, []).unwrap();
        assert!(coinflip_bound(&empty, 1000).unwrap().passed());

        let adversarial = EPrefixSet::new(1, Regime::Support, [vec![0], vec![1]]).unwrap();
        let report = coinflip_bound(&adversarial, 1000).unwrap();
        assert_eq!(report.status, Status::Fail);
        assert_eq!(report.counterexample.unwrap()["r"], json!([0]));
        // (0) and (1) both decode to (a, x) = ((1), (0))
        assert_eq!(report.parameters["cross_check"], json!("undecided"));
    }

    #[test]
    fn negative_control_fails_both_checks() {
        let data = [
            GraphDatum::with_regime(datum(&[1], &[0], &[2]), Regime::Coding).unwrap(),
            GraphDatum::new(datum(&[1], &[1], &[0])).unwrap(),
        ];
        let e = build_e_prefixes(&data).unwrap();
        assert_eq!(e.regime(), Regime::Coding);
        assert_eq!(check_pairwise_gap(&e).unwrap().status, Status::Fail);
        let report = coinflip_bound(&e, 1000).unwrap();
        assert_eq!(report.status, Status::Fail);
        assert_eq!(report.parameters["cross_check"], json!("agree"));
    }

    #[test]
    fn coinflip_budget() {
        let e = EPrefixSet::new(3, Regime::Support, [vec![0, 0, 0], vec![3, 3, 3]]).unwrap();
        assert_eq!(coinflip_bound(&e, 15).unwrap().status, Status::BudgetExceeded);
        assert!(coinflip_bound(&e, 16).unwrap().passed());
    }

    #[test]
    fn eprefix_validation() {
        assert!(EPrefixSet::new(1, Regime::Support, [vec![2]]).is_err());
        assert!(EPrefixSet::new(1, Regime::Coding, [vec![2]]).is_ok());
        assert!(EPrefixSet::new(1, Regime::Support, [vec![-1]]).is_err());
        assert!(EPrefixSet::new(2, Regime::Support, [vec![0]]).is_err());
    }

    #[test]
    fn dataset_parsing() {
        let text = "{\"a\":[1],\"x\":[0],\"g\":[1]}\n\n{\"a\":[1],\"x\":[1],\"g\":[0]}\n";
        let data = parse_dataset(text, Regime::Support).unwrap().unwrap();
        assert_eq!(data.len(), 2);

        let bad = "{\"a\":[1],\"x\":[0],\"g\":[2]}\n{\"a\":[1],\"x\":[1],\"g\":[0]}\n{\"a\":[0],\"x\":[1],\"g\":[0]}\n";
        let violations = parse_dataset(bad, Regime::Support).unwrap().unwrap_err();
        assert_eq!(violations.iter().map(|v| v.0).collect::<Vec<_>>(), vec![1, 3]);

        let dup = "{\"a\":[1],\"x\":[0],\"g\":[1]}\n{\"a\":[1],\"x\":[0],\"g\":[0]}\n";
        let violations = parse_dataset(dup, Regime::Support).unwrap().unwrap_err();
        assert_eq!(violations[0].0, 2);

        assert!(matches!(parse_dataset("{nope", Regime::Support), Err(Error::Parse(_))));
    }
}
