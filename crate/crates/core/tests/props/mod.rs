//! Randomized invariant checks, shared by the core property tests and the
//! acceptance harness. Each check runs `cases` deterministic instances.

#![allow(dead_code)]

use chrono::{DateTime, Duration, TimeZone, Utc};
use lcoai_core::decision::{compare, fine_tune_threshold, savings_between};
use lcoai_core::ingest::{count_valid, InferenceRecord, RecordKind, RecordStatus};
use lcoai_core::money::div_round;
use lcoai_core::sensitivity::{break_even, break_even_bisect, scenario_at, sweep, SweepSpec};
use lcoai_core::{
    amortize_capex, compute_lcoai, parse_scenarios, scenarios_to_json, AssetLife, CapexItem,
    CostScenario, DiscountPolicy, Horizon, Money, OpexModel, PerInferenceRate, VolumeProjection,
};
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub type Check = fn(u32) -> Result<(), String>;

pub const CHECKS: &[(&str, Check)] = &[
    ("closed-form equivalence", closed_form_equivalence),
    ("volume monotonicity", volume_monotonicity),
    ("asymptote", asymptote),
    ("homogeneity under cost scaling", homogeneity),
    ("zero-rate discount degeneracy", discount_degeneracy),
    ("amortization conservation", amortization_conservation),
    ("sweep/point consistency", sweep_point_consistency),
    ("volume sweep monotonicity", volume_sweep_monotonicity),
    ("affine OPEX response", affine_opex),
    ("affine CAPEX response", affine_capex),
    ("break-even correctness", break_even_correctness),
    ("bisection/closed-form agreement", bisection_agreement),
    ("fine-tune/break-even agreement", fine_tune_agreement),
    ("ranking invariance under scaling", ranking_invariance),
    ("baseline antisymmetry", baseline_antisymmetry),
    ("ingest partition", ingest_partition),
    ("ingest permutation invariance", ingest_permutation),
    ("ingest concatenation additivity", ingest_additivity),
    ("scenario file round-trip", scenario_file_round_trip),
];

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

fn simple(capex: i64, rate: i64, volume: u64) -> CostScenario {
    CostScenario::simple(
        "s",
        Money::from_micros(capex),
        PerInferenceRate::from_micros(rate),
        volume,
    )
    .unwrap()
}

fn capex_micros() -> impl Strategy<Value = i64> {
    0i64..=500_000_000_000
}

fn rate_micros() -> impl Strategy<Value = i64> {
    0i64..=100_000
}

fn volume() -> impl Strategy<Value = u64> {
    1u64..=1_000_000_000
}

fn exact(n: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn err(e: impl std::fmt::Display) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

pub fn closed_form_equivalence(cases: u32) -> Result<(), String> {
    run(
        cases,
        (capex_micros(), rate_micros(), volume()),
        |(c, r, v)| {
            let result = compute_lcoai(&simple(c, r, v)).map_err(err)?;
            let expected = div_round(c as i128, v as i128) + r as i128;
            prop_assert_eq!(result.per_inference.micros() as i128, expected);
            prop_assert_eq!(result.per_thousand.micros() as i128, expected * 1000);
            Ok(())
        },
    )
}

pub fn volume_monotonicity(cases: u32) -> Result<(), String> {
    let strategy = (
        1i64..=500_000_000_000,
        rate_micros(),
        volume(),
        1u64..=1_000_000,
    );
    run(cases, strategy, |(c, r, v, dv)| {
        let lo = compute_lcoai(&simple(c, r, v)).map_err(err)?;
        let hi = compute_lcoai(&simple(c, r, v + dv)).map_err(err)?;
        prop_assert!(hi.exact_per_inference() < lo.exact_per_inference());
        prop_assert!(hi.per_inference <= lo.per_inference);
        Ok(())
    })
}

pub fn asymptote(cases: u32) -> Result<(), String> {
    run(
        cases,
        (capex_micros(), rate_micros(), volume()),
        |(c, r, v)| {
            let result = compute_lcoai(&simple(c, r, v)).map_err(err)?;
            let gap = result.exact_per_inference() - exact(r as i128);
            prop_assert_eq!(gap, BigRational::new(BigInt::from(c), BigInt::from(v)));
            Ok(())
        },
    )
}

pub fn homogeneity(cases: u32) -> Result<(), String> {
    let strategy = (
        prop::sample::select(vec![1i64, 2, 4, 5, 10]),
        1i64..=40,
        0i64..=50_000_000_000,
        0i64..=10_000,
        volume(),
    );
    run(cases, strategy, |(q, p, c, r, v)| {
        // inputs are multiples of q, so scaling by p/q is exact
        let (c, r) = (c * q, r * q);
        let k = Ratio::new(p, q);
        let base = simple(c, r, v);
        let mut scaled = base.with_capex_scaled(k).map_err(err)?;
        scaled.opex.per_inference = base.opex.per_inference.scale(k).map_err(err)?;
        let b = compute_lcoai(&base).map_err(err)?;
        let s = compute_lcoai(&scaled).map_err(err)?;
        let k_big = BigRational::new(BigInt::from(p), BigInt::from(q));
        let target = b.exact_per_inference() * &k_big;
        prop_assert_eq!(s.exact_per_inference(), &target);
        let diff = exact(s.per_inference.micros() as i128) - &target;
        prop_assert!(diff.clone() * diff <= exact(1));
        Ok(())
    })
}

fn multi_period() -> impl Strategy<Value = CostScenario> {
    (1u32..=5, prop::sample::select(vec![1u32, 3, 6, 12, 24]))
        .prop_flat_map(|(periods, len)| {
            (
                Just(periods),
                Just(len),
                prop::collection::vec(
                    (0i64..=1_000_000_000_000, prop::option::of(1u32..=120)),
                    0..4,
                ),
                rate_micros(),
                0i64..=10_000_000_000,
                prop::collection::vec(0u64..=100_000_000, periods as usize),
                any::<bool>(),
            )
        })
        .prop_filter("needs volume", |t| t.5.iter().any(|&v| v > 0))
        .prop_map(|(periods, len, items, rate, fixed, vols, denom)| {
            let capex = items
                .into_iter()
                .map(|(amount, life)| {
                    let life = life.map_or(AssetLife::Horizon, AssetLife::Months);
                    CapexItem::new("item", Money::from_micros(amount), life).unwrap()
                })
                .collect();
            CostScenario::new(
                "multi",
                capex,
                OpexModel {
                    per_inference: PerInferenceRate::from_micros(rate),
                    fixed_per_period: Money::from_micros(fixed),
                },
                VolumeProjection::new(vols),
                Horizon::new(periods, len).unwrap(),
                DiscountPolicy::none().with_discounted_denominator(denom),
            )
            .unwrap()
        })
}

pub fn discount_degeneracy(cases: u32) -> Result<(), String> {
    run(cases, multi_period(), |scenario| {
        let none = compute_lcoai(&scenario).map_err(err)?;
        let mut wacc = scenario.clone();
        wacc.discount = DiscountPolicy::wacc(Ratio::from_integer(0))
            .map_err(err)?
            .with_discounted_denominator(scenario.discount.discount_denominator);
        prop_assert_eq!(none, compute_lcoai(&wacc).map_err(err)?);
        Ok(())
    })
}

pub fn amortization_conservation(cases: u32) -> Result<(), String> {
    run(cases, multi_period(), |scenario| {
        let h = scenario.horizon;
        for item in &scenario.capex {
            let stream = amortize_capex(std::slice::from_ref(item), &h).map_err(err)?;
            prop_assert_eq!(stream.len(), h.periods() as usize);
            prop_assert!(stream.iter().all(|m| !m.is_negative()));
            let sum: Money = stream.into_iter().sum();
            prop_assert!(sum <= item.amount);
            let full = match item.asset_life {
                AssetLife::Horizon => true,
                AssetLife::Months(m) => m <= h.span_months(),
            };
            if full {
                prop_assert_eq!(sum, item.amount);
            }
        }
        Ok(())
    })
}

fn sorted_points<T: Ord + Clone + std::fmt::Debug>(
    s: impl Strategy<Value = T>,
) -> impl Strategy<Value = Vec<T>> {
    prop::collection::btree_set(s, 1..12).prop_map(|set| set.into_iter().collect())
}

pub fn sweep_point_consistency(cases: u32) -> Result<(), String> {
    let spec = prop_oneof![
        sorted_points(0u64..=100_000_000).prop_map(SweepSpec::Volume),
        sorted_points(0i64..=50_000).prop_map(|p| SweepSpec::OpexRate(
            p.into_iter().map(PerInferenceRate::from_micros).collect()
        )),
        sorted_points(1i64..=300).prop_map(|p| SweepSpec::CapexMultiplier(
            p.into_iter().map(|k| Ratio::new(k, 100)).collect()
        )),
    ];
    run(cases, (multi_period(), spec), |(scenario, spec)| {
        let result = sweep(&scenario, &spec).map_err(err)?;
        prop_assert_eq!(result.series.len(), spec.values().len());
        for (point, value) in result.series.iter().zip(spec.values()) {
            prop_assert_eq!(point.value, value);
            let rebuilt = scenario_at(&scenario, value).map_err(err)?;
            let independent = compute_lcoai(&rebuilt).ok().map(|r| r.per_thousand);
            prop_assert_eq!(point.per_thousand, independent);
        }
        Ok(())
    })
}

pub fn volume_sweep_monotonicity(cases: u32) -> Result<(), String> {
    let strategy = (capex_micros(), rate_micros(), sorted_points(volume()));
    run(cases, strategy, |(c, r, points)| {
        let result = sweep(&simple(c, r, 1), &SweepSpec::Volume(points)).map_err(err)?;
        let values: Vec<Money> = result
            .series
            .iter()
            .map(|p| p.per_thousand.unwrap())
            .collect();
        prop_assert!(values.windows(2).all(|w| w[0] >= w[1]));
        Ok(())
    })
}

pub fn affine_opex(cases: u32) -> Result<(), String> {
    let strategy = (capex_micros(), volume(), sorted_points(0i64..=100_000));
    run(cases, strategy, |(c, v, rates)| {
        let spec = SweepSpec::OpexRate(
            rates
                .iter()
                .copied()
                .map(PerInferenceRate::from_micros)
                .collect(),
        );
        let result = sweep(&simple(c, 0, v), &spec).map_err(err)?;
        let first = result.series[0].per_thousand.unwrap();
        for (point, &r) in result.series.iter().zip(&rates) {
            let slope_part = Money::from_micros(1000 * (r - rates[0]));
            prop_assert_eq!(point.per_thousand.unwrap(), first + slope_part);
        }
        Ok(())
    })
}

pub fn affine_capex(cases: u32) -> Result<(), String> {
    let strategy = (
        0i64..=50_000_000_000,
        rate_micros(),
        volume(),
        sorted_points(1i64..=300),
    );
    run(cases, strategy, |(c, r, v, ks)| {
        let c = c * 100;
        let spec = SweepSpec::CapexMultiplier(ks.iter().map(|&k| Ratio::new(k, 100)).collect());
        let result = sweep(&simple(c, r, v), &spec).map_err(err)?;
        for (point, &k) in result.series.iter().zip(&ks) {
            // exact affine value k * C / V + r, rounded once
            let expected = div_round(c as i128 / 100 * k as i128, v as i128) + r as i128;
            prop_assert_eq!(
                point.per_thousand.unwrap().micros() as i128,
                expected * 1000
            );
        }
        Ok(())
    })
}

fn pair() -> impl Strategy<Value = (i64, i64, i64, i64)> {
    (
        0i64..=1_000_000_000_000,
        0i64..=100_000,
        0i64..=1_000_000_000_000,
        0i64..=100_000,
    )
}

fn total_cost(c: i64, r: i64, v: u64) -> i128 {
    c as i128 + r as i128 * v as i128
}

pub fn break_even_correctness(cases: u32) -> Result<(), String> {
    run(cases, pair(), |(ca, ra, cb, rb)| {
        let a = simple(ca, ra, 1);
        let mut b = simple(cb, rb, 1);
        b.name = "t".into();
        let result = break_even(&a, &b, u64::MAX).map_err(err)?;
        let (high, low) = if ca > cb {
            ((ca, ra), (cb, rb))
        } else {
            ((cb, rb), (ca, ra))
        };
        match result.crossover_volume {
            Some(v) => {
                prop_assert!(v > 1);
                prop_assert!(total_cost(high.0, high.1, v) < total_cost(low.0, low.1, v));
                prop_assert!(total_cost(low.0, low.1, v - 1) <= total_cost(high.0, high.1, v - 1));
                // grid oracle: scan a window of volumes either side
                for probe in v.saturating_sub(50).max(1)..v + 50 {
                    let cheaper =
                        total_cost(high.0, high.1, probe) < total_cost(low.0, low.1, probe);
                    prop_assert_eq!(cheaper, probe >= v);
                }
            }
            None => {
                prop_assert_eq!(&result.cheaper_below, &result.cheaper_above);
                let winner = if result.cheaper_below == "s" {
                    (ca, ra)
                } else {
                    (cb, rb)
                };
                let loser = if result.cheaper_below == "s" {
                    (cb, rb)
                } else {
                    (ca, ra)
                };
                for probe in [1u64, 10, 1_000, 1_000_000, 1_000_000_000, 1 << 40] {
                    prop_assert!(
                        total_cost(winner.0, winner.1, probe)
                            <= total_cost(loser.0, loser.1, probe)
                    );
                }
            }
        }
        Ok(())
    })
}

pub fn bisection_agreement(cases: u32) -> Result<(), String> {
    run(cases, pair(), |(ca, ra, cb, rb)| {
        let a = simple(ca, ra, 1);
        let mut b = simple(cb, rb, 1);
        b.name = "t".into();
        let max = 1_000_000_000;
        let closed = break_even(&a, &b, max).map_err(err)?;
        let bis = break_even_bisect(&a, &b, max).map_err(err)?;
        match (closed.crossover_volume, bis.crossover_volume) {
            (Some(x), Some(y)) => {
                prop_assert!(x.abs_diff(y) <= 1);
                prop_assert_eq!(&closed.cheaper_above, &bis.cheaper_above);
            }
            (Some(x), None) => prop_assert!(x > max && bis.search_exhausted),
            (None, Some(y)) => prop_assert!(false, "bisection found {} alone", y),
            (None, None) => {}
        }
        Ok(())
    })
}

pub fn fine_tune_agreement(cases: u32) -> Result<(), String> {
    run(
        cases,
        (0i64..=100_000, 0i64..=100_000, capex_micros()),
        |(base, tuned, capex)| {
            let decision = fine_tune_threshold(
                PerInferenceRate::from_micros(base),
                PerInferenceRate::from_micros(tuned),
                Money::from_micros(capex),
            )
            .map_err(err)?;
            let untuned = simple(0, base, 1);
            let mut tuned_s = simple(capex, tuned, 1);
            tuned_s.name = "tuned".into();
            let be = break_even(&untuned, &tuned_s, u64::MAX).map_err(err)?;
            let expected = match be.crossover_volume {
                Some(v) => Some(v),
                // tuned model dominating from the first inference
                None if be.cheaper_above == "tuned" && tuned < base => Some(1),
                None => None,
            };
            prop_assert_eq!(decision.threshold_volume, expected);
            Ok(())
        },
    )
}

pub fn ranking_invariance(cases: u32) -> Result<(), String> {
    let strategy = (
        prop::collection::vec((capex_micros(), rate_micros()), 1..6),
        1i64..=20,
        1u64..=100_000_000,
    );
    run(cases, strategy, |(specs, k, v)| {
        let build = |scale: i64| -> Vec<CostScenario> {
            specs
                .iter()
                .enumerate()
                .map(|(i, &(c, r))| {
                    let mut s = simple(c * scale, r * scale, v);
                    s.name = format!("s{i}");
                    s
                })
                .collect()
        };
        let base = compare(&build(1)).map_err(err)?;
        let scaled = compare(&build(k)).map_err(err)?;
        prop_assert_eq!(&base[0].scenario_name, &scaled[0].scenario_name);
        for w in base.windows(2) {
            prop_assert!(w[0].per_thousand <= w[1].per_thousand);
        }
        Ok(())
    })
}

pub fn baseline_antisymmetry(cases: u32) -> Result<(), String> {
    run(
        cases,
        (0i64..=1_000_000_000, 0i64..=1_000_000_000),
        |(x, y)| {
            let (x, y) = (Money::from_micros(x), Money::from_micros(y));
            let fwd = savings_between(x, y).map_err(err)?;
            let back = savings_between(y, x).map_err(err)?;
            prop_assert_eq!(fwd.savings_per_thousand, -back.savings_per_thousand);
            prop_assert_eq!(fwd.savings_per_thousand, y - x);
            Ok(())
        },
    )
}

fn start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap()
}

fn record() -> impl Strategy<Value = InferenceRecord> {
    (
        -400i64..=(3 * 366 * 24),
        prop::sample::select(vec![
            RecordKind::Inference,
            RecordKind::Inference,
            RecordKind::HealthCheck,
            RecordKind::Admin,
            RecordKind::Background,
        ]),
        prop::sample::select(vec![
            RecordStatus::Ok,
            RecordStatus::Ok,
            RecordStatus::Error,
        ]),
    )
        .prop_map(|(hours, kind, status)| InferenceRecord {
            timestamp: start() + Duration::hours(hours),
            kind,
            status,
            line: 0,
        })
}

fn horizon() -> impl Strategy<Value = Horizon> {
    (1u32..=4, prop::sample::select(vec![1u32, 3, 6, 12]))
        .prop_map(|(p, l)| Horizon::new(p, l).unwrap())
}

pub fn ingest_partition(cases: u32) -> Result<(), String> {
    run(
        cases,
        (prop::collection::vec(record(), 0..200), horizon()),
        |(records, h)| {
            let c = count_valid(&records, &h, start());
            prop_assert_eq!(c.total(), records.len() as u64);
            prop_assert_eq!(c.period_buckets.values().sum::<u64>(), c.valid);
            prop_assert!(c.period_buckets.keys().all(|&p| p < h.periods()));
            let manual_valid = records
                .iter()
                .filter(|r| r.kind == RecordKind::Inference && r.status == RecordStatus::Ok)
                .count() as u64;
            prop_assert!(c.valid <= manual_valid);
            Ok(())
        },
    )
}

pub fn ingest_permutation(cases: u32) -> Result<(), String> {
    let strategy =
        (prop::collection::vec(record(), 0..200), horizon()).prop_flat_map(|(records, h)| {
            (Just(records.clone()), Just(records).prop_shuffle(), Just(h))
        });
    run(cases, strategy, |(records, shuffled, h)| {
        prop_assert_eq!(
            count_valid(&records, &h, start()),
            count_valid(&shuffled, &h, start())
        );
        Ok(())
    })
}

pub fn ingest_additivity(cases: u32) -> Result<(), String> {
    let strategy = (
        prop::collection::vec(record(), 0..100),
        prop::collection::vec(record(), 0..100),
        horizon(),
    );
    run(cases, strategy, |(a, b, h)| {
        let joined: Vec<_> = a.iter().chain(&b).cloned().collect();
        let sum = count_valid(&a, &h, start()) + count_valid(&b, &h, start());
        prop_assert_eq!(count_valid(&joined, &h, start()), sum);
        Ok(())
    })
}

pub fn scenario_file_round_trip(cases: u32) -> Result<(), String> {
    let rate = prop_oneof![
        Just(Ratio::new(0i64, 1)),
        (1i64..=999_999).prop_map(|ppm| Ratio::new(ppm, 1_000_000)),
        (1i64..=98, 99i64..=100).prop_map(|(n, d)| Ratio::new(n, d)),
    ];
    let strategy = (
        prop::collection::vec(multi_period(), 0..4),
        prop::collection::vec(rate, 4),
    );
    run(cases, strategy, |(mut scenarios, rates)| {
        for (i, s) in scenarios.iter_mut().enumerate() {
            s.name = format!("scenario {i}");
            if rates[i] > Ratio::from_integer(0) {
                s.discount = DiscountPolicy::wacc(rates[i])
                    .map_err(err)?
                    .with_discounted_denominator(s.discount.discount_denominator);
            }
        }
        let text = scenarios_to_json(&scenarios);
        let parsed = parse_scenarios(&text).map_err(err)?;
        prop_assert_eq!(&parsed, &scenarios);
        prop_assert_eq!(scenarios_to_json(&parsed), text);
        Ok(())
    })
}
