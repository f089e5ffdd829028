//! The acceptance criteria, each a self-contained run that reports pass or
//! fail with a one-line summary. Thresholds are fixed here; randomized
//! criteria derive their seed from the suite seed and the criterion number.

use std::fmt;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::Rng as _;

use crate::codec::{iota, separation_gap, theta, CodedTriple};
use crate::eset::{build_e_prefixes, check_pairwise_gap, coinflip_bound, GraphDatum, Regime};
use crate::measure::{FiniteMeasure, Interval};
use crate::report::Status;
use crate::sampling;
use crate::witness::{
    choose_n, deficiency_floor, deficiency_lower_bound, is_witness_prefix, verify_claim_fst, SynthesisTrace,
    DEFAULT_BUDGET,
};
use crate::{codec::PointPrefix, measure::rho, oracle};

pub const DEFAULT_SEED: u64 = 42;

pub const ROUNDTRIP_RANGE: i64 = 1_000_000;
pub const ROUNDTRIP_TIME_LIMIT: Duration = Duration::from_secs(5);
pub const RECURRENCE_MAX_N: u64 = 10_000;
pub const SEPARATION_MAX_N: u64 = 20;
pub const CLAIM_INSTANCES: usize = 100;
pub const CLAIM_MAX_DEPTH: usize = 5;
pub const CLAIM_MAX_RADIUS: u64 = 3;
pub const CLAIM_MAX_PREFIXES: usize = 8;
pub const CLAIM_TIME_LIMIT: Duration = Duration::from_secs(60);
pub const CONVOLUTION_PAIRS: usize = 1000;
pub const CONVOLUTION_MAX_POINTS: usize = 12;
pub const DEFICIENCY_SEQUENCES: usize = 100;
pub const DEFICIENCY_MAX_RADIUS: u64 = 5;
pub const DEFICIENCY_MAX_DEPTH: usize = 10;
pub const ESET_DATASETS: usize = 100;
pub const ESET_MAX_DEPTH: usize = 4;
pub const ESET_MAX_A: u64 = 3;
pub const ESET_MAX_LEN: usize = 50;
pub const WITNESS_INSTANCES: usize = 50;
pub const WITNESS_DEPTH: usize = 3;

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}. {}: {} ({:.2?})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed
        )
    }
}

fn timed(id: u8, title: &'static str, body: impl FnOnce() -> (bool, String)) -> CriterionOutcome {
    let start = Instant::now();
    let (passed, detail) = body();
    CriterionOutcome {
        id,
        title,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

fn sub_seed(seed: u64, id: u8) -> u64 {
    seed ^ (u64::from(id) << 56)
}

/// Runs all nine criteria in order.
pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    vec![
        codec_roundtrip(),
        order_isomorphism(),
        recurrences(),
        separation_lemma(),
        claim_fst_suite(seed),
        convolution_oracle(seed),
        deficiency_bound(seed),
        eset_suite(seed),
        witness_prefix_oracle(seed),
    ]
}

/// 1. `θ∘ι = id` on `[0, 10^6)` and `ι∘θ = id` on `{t ∈ T : θ(t) < 10^6}`, under 5 s.
pub fn codec_roundtrip() -> CriterionOutcome {
    let mut outcome = timed(1, "codec roundtrip", || {
        let mut failures = 0u64;
        for m in 0..ROUNDTRIP_RANGE {
            match iota(m).and_then(|t| t.theta().map(|v| (t, v))) {
                Ok((t, v)) if v == m && t.in_t() => {}
                _ => failures += 1,
            }
        }
        let mut covered = 0u64;
        let mut n = 1u64;
        while theta(n, false, 0).unwrap() < ROUNDTRIP_RANGE {
            for b in [false, true] {
                for z in 0..=(n as i64 + 1) {
                    let t = CodedTriple::new(n, b, z);
                    let v = t.theta().unwrap();
                    if v >= ROUNDTRIP_RANGE {
                        continue;
                    }
                    covered += 1;
                    if iota(v).ok() != Some(t) {
                        failures += 1;
                    }
                }
            }
            n += 1;
        }
        if covered != ROUNDTRIP_RANGE as u64 {
            failures += 1;
        }
        (
            failures == 0,
            format!("{ROUNDTRIP_RANGE} codes and {covered} triples, {failures} failures"),
        )
    });
    if outcome.elapsed >= ROUNDTRIP_TIME_LIMIT {
        outcome.passed = false;
        outcome.detail += &format!("; over the {ROUNDTRIP_TIME_LIMIT:?} limit");
    }
    outcome
}

/// 2. `ι(m) < ι(m+1)` lexicographically for every `m < 10^6`.
pub fn order_isomorphism() -> CriterionOutcome {
    timed(2, "order isomorphism", || {
        let mut failures = 0u64;
        let mut prev = iota(0).unwrap();
        for m in 1..=ROUNDTRIP_RANGE {
            let next = iota(m).unwrap();
            if prev >= next {
                failures += 1;
            }
            prev = next;
        }
        (failures == 0, format!("{ROUNDTRIP_RANGE} consecutive pairs, {failures} failures"))
    })
}

/// 3. `θ(n,1,0) = θ(n,0,0) + (n+2)` and `θ(n+1,0,0) = θ(n,1,0) + (n+2)` for `1 ≤ n ≤ 10^4`.
pub fn recurrences() -> CriterionOutcome {
    timed(3, "theta recurrences", || {
        let mut failures = 0u64;
        for n in 1..=RECURRENCE_MAX_N {
            let step = n as i64 + 2;
            let start = theta(n, false, 0).unwrap();
            let mid = theta(n, true, 0).unwrap();
            let next = theta(n + 1, false, 0).unwrap();
            if mid != start + step {
                failures += 1;
            }
            if next != mid + step {
                failures += 1;
            }
        }
        (failures == 0, format!("n = 1..={RECURRENCE_MAX_N}, {failures} failures"))
    })
}

/// 4. Exhaustive separation lemma for `n, n' ≤ 20`, `z ≤ n`, `z' ≤ n'`, with a tight pair.
pub fn separation_lemma() -> CriterionOutcome {
    timed(4, "separation lemma", || {
        let triples: Vec<CodedTriple> = (1..=SEPARATION_MAX_N)
            .flat_map(|n| {
                [false, true]
                    .into_iter()
                    .flat_map(move |b| (0..=n as i64).map(move |z| CodedTriple::new(n, b, z)))
            })
            .collect();
        let (mut pairs, mut failures, mut tight) = (0u64, 0u64, 0u64);
        let mut min_gap = i64::MAX;
        for p in &triples {
            for q in &triples {
                if (p.n, p.b) >= (q.n, q.b) {
                    continue;
                }
                pairs += 1;
                let direct = q.theta().unwrap() - p.theta().unwrap();
                match separation_gap(*p, *q) {
                    Ok(gap) if gap == direct && gap >= 2 => {
                        min_gap = min_gap.min(gap);
                        if gap == 2 {
                            tight += 1;
                        }
                    }
                    _ => failures += 1,
                }
            }
        }
        (
            failures == 0 && tight >= 1,
            format!("{pairs} ordered pairs, {failures} failures, minimum gap {min_gap}, {tight} tight pairs"),
        )
    })
}

/// 5. The restrict-and-normalize identities on 100 random instances, under 60 s.
pub fn claim_fst_suite(seed: u64) -> CriterionOutcome {
    let mut outcome = timed(5, "convolution normalization identities", || {
        let mut rng = sampling::rng(sub_seed(seed, 5));
        let mut passed = 0usize;
        let mut first_failure = None;
        for i in 0..CLAIM_INSTANCES {
            let inst = sampling::claim_instance(&mut rng, CLAIM_MAX_DEPTH, CLAIM_MAX_RADIUS, CLAIM_MAX_PREFIXES);
            let trace_ok = inst.trace.m.iter().all(|&m| m <= CLAIM_MAX_RADIUS)
                && inst.trace.n.iter().zip(&inst.trace.m).all(|(&n, &m)| n > 2 * m)
                && inst.trace.a.iter().all(|&a| a >= 1);
            match verify_claim_fst(&inst.shifted, &inst.trace, &inst.set) {
                Ok(r) if r.passed() && trace_ok => passed += 1,
                Ok(r) => {
                    first_failure.get_or_insert(format!("instance {i}: {r}"));
                }
                Err(e) => {
                    first_failure.get_or_insert(format!("instance {i}: {e}"));
                }
            }
        }
        let mut detail = format!("{passed}/{CLAIM_INSTANCES} instances pass");
        if let Some(f) = first_failure {
            detail += &format!("; first failure {f}");
        }
        (passed == CLAIM_INSTANCES, detail)
    });
    if outcome.elapsed >= CLAIM_TIME_LIMIT {
        outcome.passed = false;
        outcome.detail += &format!("; over the {CLAIM_TIME_LIMIT:?} limit");
    }
    outcome
}

/// 6. `convolve` against pair enumeration on 1000 random pairs, plus `ρ₁ ∗ ρ₁`.
pub fn convolution_oracle(seed: u64) -> CriterionOutcome {
    timed(6, "convolution oracle", || {
        let r1 = rho(1).unwrap();
        let expected = FiniteMeasure::new([
            (0, crate::rational::ratio(1, 4)),
            (1, crate::rational::ratio(1, 2)),
            (2, crate::rational::ratio(1, 4)),
        ])
        .unwrap();
        let fixed_ok = r1.convolve(&r1).unwrap() == expected;

        let mut rng = sampling::rng(sub_seed(seed, 6));
        let mut mismatches = 0usize;
        for _ in 0..CONVOLUTION_PAIRS {
            let draw = |rng: &mut sampling::Rng| {
                let lo = rng.gen_range(-20..=20);
                let width = rng.gen_range(0..=30);
                sampling::measure(rng, Interval::new(lo, lo + width).unwrap(), CONVOLUTION_MAX_POINTS)
            };
            let p = draw(&mut rng);
            let q = draw(&mut rng);
            let fast = p.convolve(&q).unwrap();
            let slow = oracle::convolve(&p, &q);
            let same = fast.support_len() == slow.len()
                && slow.iter().all(|(&z, w)| &fast.mass(z) == w && !w.is_zero())
                && fast.total_mass() == crate::rational::one();
            if !same {
                mismatches += 1;
            }
        }
        (
            fixed_ok && mismatches == 0,
            format!(
                "rho(1)*rho(1) {}; {CONVOLUTION_PAIRS} random pairs, {mismatches} mismatches",
                if fixed_ok { "matches" } else { "MISMATCH" }
            ),
        )
    })
}

/// 7. Deficiency partial products stay above the per-depth floor, which stays above `C`.
pub fn deficiency_bound(seed: u64) -> CriterionOutcome {
    timed(7, "N-rule deficiency bound", || {
        let c = deficiency_lower_bound();
        let mut rng = sampling::rng(sub_seed(seed, 7));
        let mut failures = 0usize;
        let mut smallest = crate::rational::one();
        for _ in 0..DEFICIENCY_SEQUENCES {
            let depth = rng.gen_range(1..=DEFICIENCY_MAX_DEPTH);
            let m: Vec<u64> = (0..depth).map(|_| rng.gen_range(0..=DEFICIENCY_MAX_RADIUS)).collect();
            let n = choose_n(&m).unwrap();
            let trace = SynthesisTrace::from_bounds(vec![0; depth], m, n).unwrap();
            for (d, partial) in trace.deficiency_partial.iter().enumerate() {
                let floor = deficiency_floor(d);
                if !(partial >= &floor && floor >= c) {
                    failures += 1;
                }
                if partial < &smallest {
                    smallest = partial.clone();
                }
            }
        }
        (
            failures == 0,
            format!(
                "{DEFICIENCY_SEQUENCES} sequences, {failures} failures, smallest partial product {} >= C = {}",
                crate::rational::format(&smallest),
                crate::rational::format(&c)
            ),
        )
    })
}

/// 8. Gap check never fails on valid data, agrees with the coin-flip scan,
///    and catches the engineered negative control.
pub fn eset_suite(seed: u64) -> CriterionOutcome {
    timed(8, "E-set gap and coin-flip bound", || {
        let mut rng = sampling::rng(sub_seed(seed, 8));
        let (mut gap_failures, mut disagreements, mut undecided, mut errors) = (0usize, 0usize, 0usize, 0usize);
        for _ in 0..ESET_DATASETS {
            let depth = rng.gen_range(1..=ESET_MAX_DEPTH);
            let data = sampling::graph_dataset(&mut rng, depth, ESET_MAX_A, ESET_MAX_LEN, Regime::Support);
            let result = build_e_prefixes(&data)
                .and_then(|e| Ok((check_pairwise_gap(&e)?, coinflip_bound(&e, DEFAULT_BUDGET)?)));
            let Ok((gap, coin)) = result else {
                errors += 1;
                continue;
            };
            if gap.status == Status::Fail {
                gap_failures += 1;
            }
            if gap.parameters["undecidable_count"] != serde_json::json!(0) {
                undecided += 1;
            } else if gap.status != coin.status {
                disagreements += 1;
            }
        }

        // θ(1,0,2) = 2 and θ(1,1,0) = 3 differ by one once g(0) = a(0) + 1 is allowed
        let control = [
            PointPrefix::new(vec![1], vec![false], vec![2]).unwrap(),
            PointPrefix::new(vec![1], vec![true], vec![0]).unwrap(),
        ]
        .map(|p| GraphDatum::with_regime(p, Regime::Coding).unwrap());
        let control_e = build_e_prefixes(&control).unwrap();
        let control_caught = check_pairwise_gap(&control_e).unwrap().status == Status::Fail
            && coinflip_bound(&control_e, DEFAULT_BUDGET).unwrap().status == Status::Fail;

        let passed = gap_failures == 0 && disagreements == 0 && errors == 0 && control_caught;
        (
            passed,
            format!(
                "{ESET_DATASETS} datasets: {gap_failures} gap failures, {disagreements} disagreements, \
                 {undecided} undecided, {errors} errors; negative control {}",
                if control_caught { "caught" } else { "MISSED" }
            ),
        )
    })
}

/// 9. `is_witness_prefix` against a full-lattice scan on 50 random depth-3 instances.
pub fn witness_prefix_oracle(seed: u64) -> CriterionOutcome {
    timed(9, "witness prefix oracle", || {
        let mut rng = sampling::rng(sub_seed(seed, 9));
        let mut mismatches = 0usize;
        let mut fails = 0usize;
        for _ in 0..WITNESS_INSTANCES {
            let a: Vec<u64> = (0..WITNESS_DEPTH).map(|_| rng.gen_range(1..=3)).collect();
            let ranges = vec![Interval::new(-3, 5).unwrap(); WITNESS_DEPTH];
            let b = sampling::cylinder_set(&mut rng, &ranges, 4);
            let report = is_witness_prefix(&a, &b, DEFAULT_BUDGET).unwrap();
            let expected = oracle::first_positive_translate(&a, &b);
            let agrees = match (&expected, report.status) {
                (None, Status::Pass) => true,
                (Some((x, m)), Status::Fail) => {
                    let ce = report.counterexample.as_ref().unwrap();
                    ce["x"] == serde_json::json!(x) && ce["measure"] == serde_json::json!(crate::rational::format(m))
                }
                _ => false,
            };
            if report.status == Status::Fail {
                fails += 1;
            }
            if !agrees {
                mismatches += 1;
            }
        }
        (
            mismatches == 0,
            format!(
                "{WITNESS_INSTANCES} instances ({fails} with a positive translate), {mismatches} mismatches"
            ),
        )
    })
}
