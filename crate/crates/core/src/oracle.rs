//! Brute-force reference implementations. Each one follows the definition
//! as literally as possible and shares no code path with the routine it
//! checks; they exist to be compared against.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::measure::{CylinderSet, FiniteMeasure};
use crate::rational::Rational;

/// `(p ∗ q)(z)` by enumerating every outcome pair `(x, y)` and adding
/// `p(x)q(y)` into bucket `x + y`.
pub fn convolve(p: &FiniteMeasure, q: &FiniteMeasure) -> BTreeMap<i64, Rational> {
    let mut out: BTreeMap<i64, Rational> = BTreeMap::new();
    for (x, px) in p.iter() {
        for (y, qy) in q.iter() {
            *out.entry(x + y).or_insert_with(Rational::zero) += px * qy;
        }
    }
    out
}

fn lattice(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let mut points = vec![Vec::new()];
    for (&l, &h) in lo.iter().zip(hi) {
        points = points
            .into_iter()
            .flat_map(|p| {
                (l..=h).map(move |z| {
                    let mut q = p.clone();
                    q.push(z);
                    q
                })
            })
            .collect();
    }
    points
}

/// `μ_a(B + x)` computed by visiting every lattice point `y` of
/// `∏ [0, a(n)]`, each of mass `1/∏(a(n)+1)`, and testing `y - x ∈ B`.
pub fn uniform_box_measure_of_translate(a: &[u64], b: &CylinderSet, x: &[i64]) -> Rational {
    let cell = Rational::new(
        BigInt::one(),
        a.iter().map(|&k| BigInt::from(k) + 1).product::<BigInt>(),
    );
    let zeros = vec![0; a.len()];
    let tops: Vec<i64> = a.iter().map(|&k| k as i64).collect();
    let hits = lattice(&zeros, &tops)
        .into_iter()
        .filter(|y| {
            let back: Vec<i64> = y.iter().zip(x).map(|(u, v)| u - v).collect();
            b.contains_prefix(&back)
        })
        .count();
    cell * BigInt::from(hits)
}

/// The lexicographically first `x` in the cube `[-R, R]^d` with
/// `μ_a(B + x) > 0`, where `R` is larger than every `|s(n)| + a(n)`.
/// Every translate outside that cube misses the box.
pub fn first_positive_translate(a: &[u64], b: &CylinderSet) -> Option<(Vec<i64>, Rational)> {
    let radius = b
        .iter()
        .flat_map(|s| s.iter().map(|v| v.abs()))
        .max()
        .unwrap_or(0)
        + a.iter().copied().max().unwrap_or(0) as i64
        + 1;
    let d = a.len();
    lattice(&vec![-radius; d], &vec![radius; d])
        .into_iter()
        .map(|x| {
            let m = uniform_box_measure_of_translate(a, b, &x);
            (x, m)
        })
        .find(|(_, m)| !m.is_zero())
}

/// Largest `|(E + r) ∩ {0,1}^d|` over every `r` in a window containing all
/// translates that can hit the cube, scanning translates one at a time.
/// Returns the count and the lexicographically first maximizing `r`.
pub fn max_cube_hits(points: &[Vec<i64>], depth: usize) -> (usize, Vec<i64>) {
    if points.is_empty() {
        return (0, vec![0; depth]);
    }
    let lo: Vec<i64> = (0..depth).map(|k| -points.iter().map(|p| p[k]).max().unwrap()).collect();
    let hi: Vec<i64> = (0..depth).map(|k| 1 - points.iter().map(|p| p[k]).min().unwrap()).collect();
    let mut best = (0, lo.clone());
    for r in lattice(&lo, &hi) {
        let hits = points
            .iter()
            .filter(|p| p.iter().zip(&r).all(|(v, s)| (0..=1).contains(&(v + s))))
            .count();
        if hits > best.0 {
            best = (hits, r);
        }
    }
    best
}

/// `ι(m)` by walking `T` in lexicographic order from `(1, 0, 0)`.
pub fn iota_by_counting(m: u64) -> (u64, bool, i64) {
    let (mut n, mut b, mut z) = (1u64, false, 0i64);
    for _ in 0..m {
        if z < n as i64 + 1 {
            z += 1;
        } else if !b {
            b = true;
            z = 0;
        } else {
            n += 1;
            b = false;
            z = 0;
        }
    }
    (n, b, z)
}
