//! Finitely supported rational probability measures on `Z`, their countable
//! products on `Z^ω` (as an explicit prefix plus a tail policy), and finite
//! unions of cylinders.
//!
//! Every value here is canonical: zero masses are dropped, supports and
//! prefix sets are sorted, so structural equality is semantic equality.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::rational::{self, Rational};

/// Closed integer interval `[lo, hi]`, never empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[i64; 2]", into = "[i64; 2]")]
pub struct Interval {
    lo: i64,
    hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(invalid(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(z: i64) -> Self {
        Self { lo: z, hi: z }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn contains(&self, z: i64) -> bool {
        self.lo <= z && z <= self.hi
    }

    /// Number of integers in the interval, saturating at `u64::MAX`.
    pub fn len(&self) -> u64 {
        (self.hi as i128 - self.lo as i128 + 1).min(u64::MAX as i128) as u64
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }
}

impl TryFrom<[i64; 2]> for Interval {
    type Error = Error;

    fn try_from([lo, hi]: [i64; 2]) -> Result<Self> {
        Interval::new(lo, hi)
    }
}

impl From<Interval> for [i64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Rational probability measure on `Z` with finite support.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteMeasure {
    weights: BTreeMap<i64, Rational>,
}

impl FiniteMeasure {
    /// Validates and canonicalizes. Zero masses are dropped; negative masses,
    /// an empty support or a total other than 1 are rejected.
    pub fn new(weights: impl IntoIterator<Item = (i64, Rational)>) -> Result<Self> {
        let mut map: BTreeMap<i64, Rational> = BTreeMap::new();
        for (z, w) in weights {
            if w.is_negative() {
                return Err(invalid(format!("negative mass {} at {z}", rational::format(&w))));
            }
            *map.entry(z).or_insert_with(Rational::zero) += w;
        }
        map.retain(|_, w| !w.is_zero());
        if map.is_empty() {
            return Err(invalid("measure has empty support"));
        }
        let total: Rational = map.values().sum();
        if !total.is_one() {
            return Err(invalid(format!("total mass is {}, not 1", rational::format(&total))));
        }
        Ok(Self { weights: map })
    }

    /// Builds from relative integer weights, normalizing by their sum.
    pub fn from_weights(weights: impl IntoIterator<Item = (i64, u64)>) -> Result<Self> {
        let raw: Vec<(i64, u64)> = weights.into_iter().collect();
        let total: u64 = raw.iter().map(|&(_, w)| w).sum();
        if total == 0 {
            return Err(invalid("all weights are zero"));
        }
        let total = Rational::from_integer(total.into());
        Self::new(
            raw.into_iter()
                .map(|(z, w)| (z, Rational::from_integer(w.into()) / &total)),
        )
    }

    pub fn dirac(z: i64) -> Self {
        Self {
            weights: BTreeMap::from([(z, Rational::one())]),
        }
    }

    /// The uniform measure on `0..=k`.
    pub fn uniform(k: u64) -> Result<Self> {
        let top = i64::try_from(k).map_err(|_| Error::Overflow("uniform measure support"))?;
        let mass = Rational::new(1.into(), (k as u128 + 1).into());
        Ok(Self {
            weights: (0..=top).map(|z| (z, mass.clone())).collect(),
        })
    }

    pub fn mass(&self, z: i64) -> Rational {
        self.weights.get(&z).cloned().unwrap_or_else(Rational::zero)
    }

    pub(crate) fn mass_ref(&self, z: i64) -> Option<&Rational> {
        self.weights.get(&z)
    }

    pub fn mass_in(&self, interval: Interval) -> Rational {
        self.weights.range(interval.lo..=interval.hi).map(|(_, w)| w).sum()
    }

    pub fn total_mass(&self) -> Rational {
        self.weights.values().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.weights.keys().copied()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn min_support(&self) -> i64 {
        *self.weights.keys().next().expect("support is nonempty")
    }

    pub fn max_support(&self) -> i64 {
        *self.weights.keys().next_back().expect("support is nonempty")
    }

    pub fn support_interval(&self) -> Interval {
        Interval {
            lo: self.min_support(),
            hi: self.max_support(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.weights.iter().map(|(&z, w)| (z, w))
    }

    /// Convolution: the law of `X + Y` for independent `X ~ self`, `Y ~ other`.
    ///
    /// The support is tracked first as the Minkowski sum of the two supports,
    /// then each point's mass is gathered from `self`'s support.
    pub fn convolve(&self, other: &FiniteMeasure) -> Result<FiniteMeasure> {
        let mut sumset = BTreeSet::new();
        for x in self.support() {
            for y in other.support() {
                sumset.insert(x.checked_add(y).ok_or(Error::Overflow("convolution support"))?);
            }
        }
        let mut weights = BTreeMap::new();
        for z in sumset {
            let mut acc = Rational::zero();
            for (x, px) in self.iter() {
                // z - x cannot overflow: z = x' + y for some support points
                if let Some(qy) = z.checked_sub(x).and_then(|y| other.mass_ref(y)) {
                    acc += px * qy;
                }
            }
            weights.insert(z, acc);
        }
        Ok(Self { weights })
    }

    /// The pullback `z ↦ self(z + shift)`, i.e. every support point moves by `-shift`.
    pub fn translate(&self, shift: i64) -> Result<FiniteMeasure> {
        let weights = self
            .weights
            .iter()
            .map(|(&z, w)| {
                z.checked_sub(shift)
                    .map(|p| (p, w.clone()))
                    .ok_or(Error::Overflow("measure translation"))
            })
            .collect::<Result<_>>()?;
        Ok(Self { weights })
    }
}

/// The uniform probability measure on `0..=k`.
pub fn rho(k: i64) -> Result<FiniteMeasure> {
    if k < 0 {
        return Err(invalid(format!("rho requires k >= 0, got {k}")));
    }
    FiniteMeasure::uniform(k as u64)
}

pub fn convolve(p: &FiniteMeasure, q: &FiniteMeasure) -> Result<FiniteMeasure> {
    p.convolve(q)
}

pub fn translate_measure(p: &FiniteMeasure, shift: i64) -> Result<FiniteMeasure> {
    p.translate(shift)
}

impl Serialize for FiniteMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.weights.len()))?;
        for (z, w) in &self.weights {
            map.serialize_entry(&z.to_string(), &rational::format(w))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FiniteMeasure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct MeasureVisitor;

        impl<'de> Visitor<'de> for MeasureVisitor {
            type Value = FiniteMeasure;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping integer points to \"p/q\" masses")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Self::Value, A::Error> {
                let mut weights = Vec::new();
                while let Some((key, value)) = access.next_entry::<String, String>()? {
                    let z: i64 = key
                        .trim()
                        .parse()
                        .map_err(|_| de::Error::custom(format!("point {key:?} is not an integer")))?;
                    weights.push((z, rational::parse(&value).map_err(de::Error::custom)?));
                }
                FiniteMeasure::new(weights).map_err(de::Error::custom)
            }
        }

        d.deserialize_map(MeasureVisitor)
    }
}

/// What every coordinate at or beyond the prefix depth carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailPolicy {
    /// `rho(k)` on every remaining coordinate.
    Uniform(u64),
    /// Dirac mass at `z` on every remaining coordinate.
    PointMass(i64),
    /// Nothing is known beyond the prefix; deeper queries fail.
    Truncated,
}

impl TailPolicy {
    fn measure(&self) -> Result<Option<FiniteMeasure>> {
        Ok(match *self {
            TailPolicy::Uniform(k) => Some(FiniteMeasure::uniform(k)?),
            TailPolicy::PointMass(z) => Some(FiniteMeasure::dirac(z)),
            TailPolicy::Truncated => None,
        })
    }
}

/// A product measure on `Z^ω`, known exactly on its first `prefix.len()`
/// coordinates and described by a [`TailPolicy`] afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductMeasure {
    prefix: Vec<FiniteMeasure>,
    tail: TailPolicy,
}

impl ProductMeasure {
    pub fn new(prefix: Vec<FiniteMeasure>, tail: TailPolicy) -> Self {
        Self { prefix, tail }
    }

    /// `μ_a` truncated to `a.len()` coordinates: the product of `rho(a(n))`.
    pub fn uniform_box(a: &[u64], tail: TailPolicy) -> Result<Self> {
        let prefix = a.iter().map(|&k| FiniteMeasure::uniform(k)).collect::<Result<_>>()?;
        Ok(Self { prefix, tail })
    }

    /// The coin-flip measure `μ_(1,1,...)`, with `depth` explicit coordinates.
    pub fn coin_flip(depth: usize) -> Self {
        Self::uniform_box(&vec![1; depth], TailPolicy::Uniform(1)).expect("rho(1) is valid")
    }

    pub fn prefix(&self) -> &[FiniteMeasure] {
        &self.prefix
    }

    pub fn tail(&self) -> TailPolicy {
        self.tail
    }

    pub fn depth(&self) -> usize {
        self.prefix.len()
    }

    /// Largest depth at which cylinder measures are determined; `None` if unbounded.
    pub fn determined_depth(&self) -> Option<usize> {
        match self.tail {
            TailPolicy::Truncated => Some(self.prefix.len()),
            _ => None,
        }
    }

    /// The measure on coordinate `n`.
    pub fn coordinate(&self, n: usize) -> Result<Cow<'_, FiniteMeasure>> {
        if let Some(m) = self.prefix.get(n) {
            return Ok(Cow::Borrowed(m));
        }
        self.tail.measure()?.map(Cow::Owned).ok_or(Error::UnsupportedDepth {
            requested: n + 1,
            available: self.prefix.len(),
        })
    }

    /// The first `depth` coordinate measures.
    pub fn coordinates(&self, depth: usize) -> Result<Vec<Cow<'_, FiniteMeasure>>> {
        if depth <= self.prefix.len() {
            return Ok(self.prefix[..depth].iter().map(Cow::Borrowed).collect());
        }
        let tail = self.tail.measure()?.ok_or(Error::UnsupportedDepth {
            requested: depth,
            available: self.prefix.len(),
        })?;
        let mut coords: Vec<_> = self.prefix.iter().map(Cow::Borrowed).collect();
        coords.resize(depth, Cow::Owned(tail));
        Ok(coords)
    }

    /// The first `depth` coordinates as an explicit prefix with a truncated tail.
    pub fn truncated(&self, depth: usize) -> Result<ProductMeasure> {
        let prefix = self.coordinates(depth)?.into_iter().map(Cow::into_owned).collect();
        Ok(ProductMeasure {
            prefix,
            tail: TailPolicy::Truncated,
        })
    }

    /// Exact measure of a finite union of cylinders.
    pub fn measure_of(&self, set: &CylinderSet) -> Result<Rational> {
        let coords = self.coordinates(set.depth())?;
        let mut total = Rational::zero();
        'prefixes: for s in set.iter() {
            let mut term = Rational::one();
            for (coord, &z) in coords.iter().zip(s) {
                match coord.mass_ref(z) {
                    Some(w) => term *= w,
                    None => continue 'prefixes,
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Exact measure of a box cylinder `∏_{n<len} [lo_n, hi_n]`.
    pub fn measure_of_box(&self, boxed: &IntervalBox) -> Result<Rational> {
        let coords = self.coordinates(boxed.depth())?;
        Ok(coords
            .iter()
            .zip(boxed.intervals())
            .map(|(c, &i)| c.mass_in(i))
            .product())
    }

    /// Exact measure of `set ∩ boxed`, for cylinder sets and boxes of any depths.
    pub fn measure_of_within(&self, set: &CylinderSet, boxed: &IntervalBox) -> Result<Rational> {
        let depth = set.depth().max(boxed.depth());
        let coords = self.coordinates(depth)?;
        let beyond: Rational = coords[set.depth().min(depth)..]
            .iter()
            .zip(boxed.intervals().iter().skip(set.depth()))
            .map(|(c, &i)| c.mass_in(i))
            .product();
        if beyond.is_zero() {
            return Ok(beyond);
        }
        let mut total = Rational::zero();
        'prefixes: for s in set.iter() {
            let mut term = Rational::one();
            for (n, &z) in s.iter().enumerate() {
                if boxed.intervals().get(n).is_some_and(|i| !i.contains(z)) {
                    continue 'prefixes;
                }
                match coords[n].mass_ref(z) {
                    Some(w) => term *= w,
                    None => continue 'prefixes,
                }
            }
            total += term;
        }
        Ok(total * beyond)
    }

    /// `[min, max]` of the support of each prefix coordinate.
    pub fn support_box(&self) -> IntervalBox {
        IntervalBox::new(self.prefix.iter().map(FiniteMeasure::support_interval).collect())
    }

    /// Coordinatewise convolution. The result's prefix covers every
    /// coordinate where both factors are determined, up to the deeper prefix.
    pub fn convolve(&self, other: &ProductMeasure) -> Result<ProductMeasure> {
        let mut prefix = Vec::new();
        for n in 0..self.depth().max(other.depth()) {
            match (self.coordinate(n), other.coordinate(n)) {
                (Ok(p), Ok(q)) => prefix.push(p.convolve(&q)?),
                _ => break,
            }
        }
        let tail = match (self.tail, other.tail) {
            (TailPolicy::PointMass(x), TailPolicy::PointMass(y)) => {
                TailPolicy::PointMass(x.checked_add(y).ok_or(Error::Overflow("tail convolution"))?)
            }
            (TailPolicy::PointMass(0), t) | (t, TailPolicy::PointMass(0)) => t,
            _ => TailPolicy::Truncated,
        };
        let tail = if prefix.len() < self.depth().max(other.depth()) {
            TailPolicy::Truncated
        } else {
            tail
        };
        Ok(ProductMeasure { prefix, tail })
    }
}

pub fn measure_of(spec: &ProductMeasure, set: &CylinderSet) -> Result<Rational> {
    spec.measure_of(set)
}

pub fn support_box(spec: &ProductMeasure) -> IntervalBox {
    spec.support_box()
}

/// A box `∏_{n<d} [lo_n, hi_n] × Z × Z × ...`, the cylinder set of all
/// sequences whose first `d` entries lie in the given intervals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalBox(Vec<Interval>);

impl IntervalBox {
    pub fn new(intervals: Vec<Interval>) -> Self {
        Self(intervals)
    }

    /// `∏ [0, a(n)]`, the support of `μ_a`.
    pub fn from_bounds(a: &[u64]) -> Result<Self> {
        a.iter()
            .map(|&k| {
                let hi = i64::try_from(k).map_err(|_| Error::Overflow("box bound"))?;
                Interval::new(0, hi)
            })
            .collect::<Result<_>>()
            .map(Self)
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.0
    }

    /// Number of depth-`d` cylinders inside the box, saturating.
    pub fn cardinality(&self) -> u128 {
        self.0
            .iter()
            .fold(1u128, |acc, i| acc.saturating_mul(i.len() as u128))
    }

    pub fn contains_prefix(&self, s: &[i64]) -> bool {
        self.0.iter().zip(s).all(|(i, &z)| i.contains(z))
    }
}

/// A finite union of cylinders `[s]`, all of the same depth.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCylinderSet")]
pub struct CylinderSet {
    depth: usize,
    prefixes: BTreeSet<Vec<i64>>,
}

#[derive(Deserialize)]
struct RawCylinderSet {
    depth: usize,
    prefixes: Vec<Vec<i64>>,
}

impl TryFrom<RawCylinderSet> for CylinderSet {
    type Error = Error;

    fn try_from(raw: RawCylinderSet) -> Result<Self> {
        CylinderSet::new(raw.depth, raw.prefixes)
    }
}

impl CylinderSet {
    pub fn new(depth: usize, prefixes: impl IntoIterator<Item = Vec<i64>>) -> Result<Self> {
        let prefixes: BTreeSet<Vec<i64>> = prefixes.into_iter().collect();
        if let Some(bad) = prefixes.iter().find(|s| s.len() != depth) {
            return Err(invalid(format!(
                "prefix {bad:?} has length {}, expected {depth}",
                bad.len()
            )));
        }
        Ok(Self { depth, prefixes })
    }

    pub fn empty(depth: usize) -> Self {
        Self {
            depth,
            prefixes: BTreeSet::new(),
        }
    }

    /// All of `Z^ω`: the single empty prefix at depth 0.
    pub fn whole_space() -> Self {
        Self {
            depth: 0,
            prefixes: BTreeSet::from([Vec::new()]),
        }
    }

    pub fn singleton(prefix: Vec<i64>) -> Self {
        Self {
            depth: prefix.len(),
            prefixes: BTreeSet::from([prefix]),
        }
    }

    /// Enumerates every depth-`d` cylinder of the box. Fails above `limit` cylinders.
    pub fn from_box(boxed: &IntervalBox, limit: u128) -> Result<Self> {
        if boxed.cardinality() > limit {
            return Err(invalid(format!(
                "box has {} cylinders, over the limit {limit}",
                boxed.cardinality()
            )));
        }
        Self::whole_space().refine(boxed.intervals())
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.prefixes.iter()
    }

    pub fn contains_prefix(&self, s: &[i64]) -> bool {
        self.prefixes.contains(s)
    }

    /// Whether a point (given by a prefix at least `depth` long) lies in the set.
    pub fn contains_point(&self, point: &[i64]) -> bool {
        point.len() >= self.depth && self.prefixes.contains(&point[..self.depth])
    }

    /// Coordinatewise `S + x`.
    pub fn translate(&self, x: &[i64]) -> Result<CylinderSet> {
        if x.len() != self.depth {
            return Err(invalid(format!(
                "translation has length {}, set depth is {}",
                x.len(),
                self.depth
            )));
        }
        let prefixes = self
            .prefixes
            .iter()
            .map(|s| {
                s.iter()
                    .zip(x)
                    .map(|(&a, &b)| a.checked_add(b).ok_or(Error::Overflow("set translation")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(CylinderSet {
            depth: self.depth,
            prefixes,
        })
    }

    /// Re-expresses the set at depth `depth + windows.len()`, keeping only the
    /// extensions whose new coordinates fall in `windows`. This is exact
    /// whenever the measures involved vanish outside those windows.
    pub fn refine(&self, windows: &[Interval]) -> Result<CylinderSet> {
        let mut current: Vec<Vec<i64>> = self.prefixes.iter().cloned().collect();
        for window in windows {
            let mut next = Vec::with_capacity(current.len().saturating_mul(window.len() as usize));
            for s in &current {
                for z in window.iter() {
                    let mut t = Vec::with_capacity(s.len() + 1);
                    t.extend_from_slice(s);
                    t.push(z);
                    next.push(t);
                }
            }
            current = next;
        }
        CylinderSet::new(self.depth + windows.len(), current)
    }

    /// Refines the shallower of two sets so both share a depth. `windows`
    /// must cover every coordinate up to the deeper of the two.
    pub fn align(&self, other: &CylinderSet, windows: &[Interval]) -> Result<(CylinderSet, CylinderSet)> {
        let depth = self.depth.max(other.depth);
        if windows.len() < depth {
            return Err(Error::UnsupportedDepth {
                requested: depth,
                available: windows.len(),
            });
        }
        let lift = |s: &CylinderSet| s.refine(&windows[s.depth..depth]);
        Ok((lift(self)?, lift(other)?))
    }

    fn same_depth(&self, other: &CylinderSet) -> Result<()> {
        if self.depth != other.depth {
            return Err(invalid(format!(
                "depth mismatch {} vs {}; align the sets first",
                self.depth, other.depth
            )));
        }
        Ok(())
    }

    pub fn union(&self, other: &CylinderSet) -> Result<CylinderSet> {
        self.same_depth(other)?;
        Ok(CylinderSet {
            depth: self.depth,
            prefixes: self.prefixes.union(&other.prefixes).cloned().collect(),
        })
    }

    pub fn intersection(&self, other: &CylinderSet) -> Result<CylinderSet> {
        self.same_depth(other)?;
        Ok(CylinderSet {
            depth: self.depth,
            prefixes: self.prefixes.intersection(&other.prefixes).cloned().collect(),
        })
    }

    pub fn difference(&self, other: &CylinderSet) -> Result<CylinderSet> {
        self.same_depth(other)?;
        Ok(CylinderSet {
            depth: self.depth,
            prefixes: self.prefixes.difference(&other.prefixes).cloned().collect(),
        })
    }

    pub fn is_subset(&self, other: &CylinderSet) -> Result<bool> {
        self.same_depth(other)?;
        Ok(self.prefixes.is_subset(&other.prefixes))
    }

    /// Keeps the cylinders inside the box, which must be exactly as deep as the set.
    pub fn restrict_to_box(&self, boxed: &IntervalBox) -> Result<CylinderSet> {
        if boxed.depth() != self.depth {
            return Err(invalid(format!(
                "box depth {} differs from set depth {}",
                boxed.depth(),
                self.depth
            )));
        }
        Ok(CylinderSet {
            depth: self.depth,
            prefixes: self
                .prefixes
                .iter()
                .filter(|s| boxed.contains_prefix(s))
                .cloned()
                .collect(),
        })
    }
}

pub fn translate_set(set: &CylinderSet, x: &[i64]) -> Result<CylinderSet> {
    set.translate(x)
}
