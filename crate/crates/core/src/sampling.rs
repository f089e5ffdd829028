//! Seeded random instances for the randomized suites.
//!
//! Every generator draws from [`Rng`], ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`, so a seed fixes every instance on every
//! platform.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::PointPrefix;
use crate::eset::{GraphDatum, Regime};
use crate::measure::{CylinderSet, FiniteMeasure, Interval, ProductMeasure, TailPolicy};
use crate::witness::{shift_to_nonpositive, synthesize_witness, SynthesisTrace};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A measure with between 1 and `max_points` support points drawn from
/// `window`, with integer weights in `1..=9` normalized to 1.
pub fn measure(rng: &mut Rng, window: Interval, max_points: usize) -> FiniteMeasure {
    let width = window.len() as usize;
    let count = rng.gen_range(1..=max_points.min(width));
    let picks = index::sample(rng, width, count);
    let weights: Vec<(i64, u64)> = picks
        .iter()
        .map(|i| (window.lo() + i as i64, rng.gen_range(1..=9)))
        .collect();
    FiniteMeasure::from_weights(weights).expect("positive weights")
}

/// A product measure of depth `depth` whose coordinate supports span at most
/// `max_radius + 1` consecutive integers, placed at random offsets.
pub fn product_measure(rng: &mut Rng, depth: usize, max_radius: u64) -> ProductMeasure {
    let prefix = (0..depth)
        .map(|_| {
            let radius = rng.gen_range(0..=max_radius) as i64;
            let lo = rng.gen_range(-6..=6);
            measure(rng, Interval::new(lo, lo + radius).unwrap(), radius as usize + 1)
        })
        .collect();
    ProductMeasure::new(prefix, TailPolicy::Truncated)
}

/// Up to `max_prefixes` distinct cylinders of depth `ranges.len()`, each
/// coordinate drawn from the matching range.
pub fn cylinder_set(rng: &mut Rng, ranges: &[Interval], max_prefixes: usize) -> CylinderSet {
    let count = rng.gen_range(0..=max_prefixes);
    let prefixes: BTreeSet<Vec<i64>> = (0..count)
        .map(|_| ranges.iter().map(|r| rng.gen_range(r.lo()..=r.hi())).collect())
        .collect();
    CylinderSet::new(ranges.len(), prefixes).expect("lengths match")
}

/// A dataset of up to `max_len` graph points with pairwise distinct `(a, x)`,
/// `a(k) ∈ [1, max_a]` and `g` uniform on the regime's region.
pub fn graph_dataset(rng: &mut Rng, depth: usize, max_a: u64, max_len: usize, regime: Regime) -> Vec<GraphDatum> {
    let distinct = (2 * max_a as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
    let len = rng.gen_range(1..=max_len).min(distinct.min(usize::MAX as u128) as usize);
    let mut keys = BTreeSet::new();
    let mut data = Vec::with_capacity(len);
    while data.len() < len {
        let a: Vec<u64> = (0..depth).map(|_| rng.gen_range(1..=max_a)).collect();
        let x: Vec<bool> = (0..depth).map(|_| rng.gen_bool(0.5)).collect();
        if !keys.insert((a.clone(), x.clone())) {
            continue;
        }
        let extra = match regime {
            Regime::Support => 0,
            Regime::Coding => 1,
        };
        let g = a.iter().map(|&ak| rng.gen_range(0..=ak as i64 + extra)).collect();
        let prefix = PointPrefix::new(a, x, g).expect("consistent lengths");
        data.push(GraphDatum::with_regime(prefix, regime).expect("g drawn inside the region"));
    }
    data
}

/// A random measure, its nonpositive shift, the synthesized trace and a test set.
#[derive(Debug, Clone)]
pub struct ClaimInstance {
    pub original: ProductMeasure,
    pub shifted: ProductMeasure,
    pub trace: SynthesisTrace,
    pub set: CylinderSet,
}

/// Depth in `1..=max_depth`, support radii up to `max_radius`, and a set of at
/// most `max_prefixes` cylinders of depth up to the full depth whose entries
/// straddle the box `∏ [0, a(n)]` by 2 on each side.
pub fn claim_instance(rng: &mut Rng, max_depth: usize, max_radius: u64, max_prefixes: usize) -> ClaimInstance {
    let depth = rng.gen_range(1..=max_depth);
    let original = product_measure(rng, depth, max_radius);
    let (shifted, _) = shift_to_nonpositive(&original).expect("small supports");
    let trace = synthesize_witness(&original).expect("small supports");
    let set_depth = rng.gen_range(0..=depth);
    let ranges: Vec<Interval> = trace.a[..set_depth]
        .iter()
        .map(|&a| Interval::new(-2, a as i64 + 2).unwrap())
        .collect();
    let set = cylinder_set(rng, &ranges, max_prefixes);
    ClaimInstance {
        original,
        shifted,
        trace,
        set,
    }
}
