//! One-at-a-time parameter sweeps, break-even volumes and tornado spreads.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::decimal::format_ratio;
use crate::error::{Error, Result};
use crate::lcoai::compute_lcoai;
use crate::money::{div_round, Money, PerInferenceRate};
use crate::scenario::CostScenario;

/// Default upper bound for break-even searches, in inferences.
pub const DEFAULT_SEARCH_MAX: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweepParameter {
    Volume,
    OpexRate,
    CapexMultiplier,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::Volume => "volume",
            SweepParameter::OpexRate => "opex_rate",
            SweepParameter::CapexMultiplier => "capex_multiplier",
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "volume" => Ok(SweepParameter::Volume),
            "opex" | "opex_rate" => Ok(SweepParameter::OpexRate),
            "capex" | "capex_multiplier" => Ok(SweepParameter::CapexMultiplier),
            other => Err(Error::InvalidSweep(format!("unknown parameter `{other}`"))),
        }
    }
}

/// One value of a swept parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepValue {
    /// Total valid inferences over the horizon.
    Volume(u64),
    OpexRate(PerInferenceRate),
    CapexMultiplier(Ratio<i64>),
}

impl SweepValue {
    pub fn parameter(&self) -> SweepParameter {
        match self {
            SweepValue::Volume(_) => SweepParameter::Volume,
            SweepValue::OpexRate(_) => SweepParameter::OpexRate,
            SweepValue::CapexMultiplier(_) => SweepParameter::CapexMultiplier,
        }
    }
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Volume(v) => write!(f, "{v}"),
            SweepValue::OpexRate(r) => f.write_str(&r.as_money().to_decimal_string()),
            SweepValue::CapexMultiplier(m) => f.write_str(&format_ratio(*m)),
        }
    }
}

/// Ordered points for a single swept parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SweepSpec {
    Volume(Vec<u64>),
    OpexRate(Vec<PerInferenceRate>),
    CapexMultiplier(Vec<Ratio<i64>>),
}

impl SweepSpec {
    pub fn parameter(&self) -> SweepParameter {
        match self {
            SweepSpec::Volume(_) => SweepParameter::Volume,
            SweepSpec::OpexRate(_) => SweepParameter::OpexRate,
            SweepSpec::CapexMultiplier(_) => SweepParameter::CapexMultiplier,
        }
    }

    pub fn values(&self) -> Vec<SweepValue> {
        match self {
            SweepSpec::Volume(p) => p.iter().copied().map(SweepValue::Volume).collect(),
            SweepSpec::OpexRate(p) => p.iter().copied().map(SweepValue::OpexRate).collect(),
            SweepSpec::CapexMultiplier(p) => {
                p.iter().copied().map(SweepValue::CapexMultiplier).collect()
            }
        }
    }

    /// `start, start + step, ...` up to and including `end`.
    pub fn volume_range(start: u64, end: u64, step: u64) -> Result<Self> {
        arithmetic_range(start as i128, end as i128, step as i128)
            .map(|p| SweepSpec::Volume(p.into_iter().map(|v| v as u64).collect()))
    }

    pub fn opex_range(
        start: PerInferenceRate,
        end: PerInferenceRate,
        step: PerInferenceRate,
    ) -> Result<Self> {
        let points = arithmetic_range(
            start.micros() as i128,
            end.micros() as i128,
            step.micros() as i128,
        )?;
        points
            .into_iter()
            .map(|v| PerInferenceRate::try_from_micros(v as i64))
            .collect::<Result<_>>()
            .map(SweepSpec::OpexRate)
    }

    pub fn capex_range(start: Ratio<i64>, end: Ratio<i64>, step: Ratio<i64>) -> Result<Self> {
        if step <= Ratio::zero() {
            return Err(Error::InvalidSweep("step must be positive".into()));
        }
        if start > end {
            return Err(Error::InvalidSweep("range start exceeds end".into()));
        }
        let mut points = Vec::new();
        let mut k = 0i64;
        loop {
            let v = start + step * k;
            if v > end {
                break;
            }
            points.push(v);
            k += 1;
        }
        Ok(SweepSpec::CapexMultiplier(points))
    }

    /// Points must be non-empty and strictly increasing. Volume points may
    /// be zero (they yield an undefined entry); multipliers must be positive.
    pub fn validate(&self) -> Result<()> {
        fn increasing<T: PartialOrd>(points: &[T]) -> Result<()> {
            if points.is_empty() {
                return Err(Error::InvalidSweep("no points".into()));
            }
            if points.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidSweep(
                    "points must be strictly increasing".into(),
                ));
            }
            Ok(())
        }
        match self {
            SweepSpec::Volume(p) => increasing(p),
            SweepSpec::OpexRate(p) => increasing(p),
            SweepSpec::CapexMultiplier(p) => {
                increasing(p)?;
                if p[0] <= Ratio::zero() {
                    return Err(Error::InvalidSweep(
                        "CAPEX multipliers must be positive".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

fn arithmetic_range(start: i128, end: i128, step: i128) -> Result<Vec<i128>> {
    if step <= 0 {
        return Err(Error::InvalidSweep("step must be positive".into()));
    }
    if start > end {
        return Err(Error::InvalidSweep("range start exceeds end".into()));
    }
    Ok((0..)
        .map(|k| start + k * step)
        .take_while(|&v| v <= end)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepPoint {
    pub value: SweepValue,
    /// `None` where the metric is undefined (zero volume).
    pub per_thousand: Option<Money>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepResult {
    pub scenario_name: String,
    pub parameter: SweepParameter,
    pub series: Vec<SweepPoint>,
}

/// The scenario obtained by setting one parameter of `base` to `value`.
pub fn scenario_at(base: &CostScenario, value: SweepValue) -> Result<CostScenario> {
    match value {
        SweepValue::Volume(v) => Ok(base.with_total_volume(v)),
        SweepValue::OpexRate(r) => Ok(base.with_opex_rate(r)),
        SweepValue::CapexMultiplier(k) => base.with_capex_scaled(k),
    }
}

pub fn sweep(scenario: &CostScenario, spec: &SweepSpec) -> Result<SweepResult> {
    scenario.validate()?;
    spec.validate()?;
    let series = spec
        .values()
        .into_iter()
        .map(|value| {
            let derived = scenario_at(scenario, value)?;
            let per_thousand = match compute_lcoai(&derived) {
                Ok(r) => Some(r.per_thousand),
                Err(Error::UndefinedMetric { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(SweepPoint {
                value,
                per_thousand,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult {
        scenario_name: scenario.name.clone(),
        parameter: spec.parameter(),
        series,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BreakEvenMethod {
    ClosedForm,
    Bisection,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BreakEvenResult {
    pub scenario_a: String,
    pub scenario_b: String,
    /// Smallest volume at which `cheaper_above` is strictly cheaper.
    pub crossover_volume: Option<u64>,
    pub cheaper_below: String,
    pub cheaper_above: String,
    /// No crossing was found up to the search bound; behaviour beyond it is
    /// unknown.
    pub search_exhausted: bool,
    pub method: BreakEvenMethod,
}

/// Volume at which the scenario with the higher fixed cost becomes strictly
/// cheaper than the other.
///
/// Single-period undiscounted pairs are solved in closed form; anything else
/// is searched by bisection over `[1, search_max]`, which assumes at most one
/// crossing.
pub fn break_even(a: &CostScenario, b: &CostScenario, search_max: u64) -> Result<BreakEvenResult> {
    check_comparable(a, b, search_max)?;
    if a.is_single_period_undiscounted() && b.is_single_period_undiscounted() {
        closed_form(a, b)
    } else {
        bisect(a, b, search_max)
    }
}

/// Bisection route regardless of regime.
pub fn break_even_bisect(
    a: &CostScenario,
    b: &CostScenario,
    search_max: u64,
) -> Result<BreakEvenResult> {
    check_comparable(a, b, search_max)?;
    bisect(a, b, search_max)
}

fn check_comparable(a: &CostScenario, b: &CostScenario, search_max: u64) -> Result<()> {
    a.validate()?;
    b.validate()?;
    if search_max == 0 {
        return Err(Error::InvalidSweep("search bound must be positive".into()));
    }
    if a.horizon != b.horizon {
        return Err(Error::IncompatibleScenarios {
            a: a.name.clone(),
            b: b.name.clone(),
            reason: "horizons differ".into(),
        });
    }
    Ok(())
}

/// Fixed cost (micro-dollars) and marginal rate of a single-period scenario.
fn linear_cost(s: &CostScenario) -> Result<(i128, i128)> {
    let capex: Money = crate::lcoai::amortize_capex(&s.capex, &s.horizon)?
        .into_iter()
        .sum();
    let fixed = capex.checked_add(s.opex.fixed_per_period)?;
    Ok((
        fixed.micros() as i128,
        s.opex.per_inference.micros() as i128,
    ))
}

fn closed_form(a: &CostScenario, b: &CostScenario) -> Result<BreakEvenResult> {
    let (ca, oa) = linear_cost(a)?;
    let (cb, ob) = linear_cost(b)?;
    let d_fixed = ca - cb;
    let d_rate = oa - ob;
    let result = |crossover, below: &CostScenario, above: &CostScenario| BreakEvenResult {
        scenario_a: a.name.clone(),
        scenario_b: b.name.clone(),
        crossover_volume: crossover,
        cheaper_below: below.name.clone(),
        cheaper_above: above.name.clone(),
        search_exhausted: false,
        method: BreakEvenMethod::ClosedForm,
    };
    // (high fixed, low fixed, fixed gap, rate gap) when a crossing exists
    let crossing = if d_fixed > 0 && d_rate < 0 {
        Some((a, b, d_fixed, -d_rate))
    } else if d_fixed < 0 && d_rate > 0 {
        Some((b, a, -d_fixed, d_rate))
    } else {
        None
    };
    match crossing {
        Some((high, low, gap, rate_gap)) => {
            let v = gap / rate_gap + 1;
            if v <= 1 {
                return Ok(result(None, high, high));
            }
            let v = u64::try_from(v).map_err(|_| Error::Overflow)?;
            Ok(result(Some(v), low, high))
        }
        None => {
            let winner = if d_fixed > 0 || d_rate > 0 { b } else { a };
            Ok(result(None, winner, winner))
        }
    }
}

fn cost_order(a: &CostScenario, b: &CostScenario, volume: u64) -> Result<Ordering> {
    let ra = compute_lcoai(&a.with_total_volume(volume))?;
    let rb = compute_lcoai(&b.with_total_volume(volume))?;
    Ok(ra.exact_per_inference().cmp(rb.exact_per_inference()))
}

fn bisect(a: &CostScenario, b: &CostScenario, search_max: u64) -> Result<BreakEvenResult> {
    let at_low = cost_order(a, b, 1)?;
    let at_high = cost_order(a, b, search_max)?;
    let result =
        |crossover, below: &CostScenario, above: &CostScenario, exhausted| BreakEvenResult {
            scenario_a: a.name.clone(),
            scenario_b: b.name.clone(),
            crossover_volume: crossover,
            cheaper_below: below.name.clone(),
            cheaper_above: above.name.clone(),
            search_exhausted: exhausted,
            method: BreakEvenMethod::Bisection,
        };
    let (above, other, wanted) = match at_high {
        Ordering::Less => (a, b, Ordering::Less),
        Ordering::Greater => (b, a, Ordering::Greater),
        Ordering::Equal => {
            let winner = if at_low == Ordering::Greater { b } else { a };
            return Ok(result(None, winner, winner, at_low != Ordering::Equal));
        }
    };
    if at_low == wanted {
        return Ok(result(None, above, above, true));
    }
    // invariant: not strictly cheaper at lo, strictly cheaper at hi
    let (mut lo, mut hi) = (1u64, search_max);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if cost_order(a, b, mid)? == wanted {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(result(Some(hi), other, above, false))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TornadoParameter {
    Capex,
    OpexRate,
    FixedOpex,
    Volume,
}

impl TornadoParameter {
    pub const ALL: [TornadoParameter; 4] = [
        TornadoParameter::Capex,
        TornadoParameter::OpexRate,
        TornadoParameter::FixedOpex,
        TornadoParameter::Volume,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TornadoParameter::Capex => "capex",
            TornadoParameter::OpexRate => "opex_rate",
            TornadoParameter::FixedOpex => "fixed_opex",
            TornadoParameter::Volume => "volume",
        }
    }
}

impl fmt::Display for TornadoParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TornadoBar {
    pub parameter: TornadoParameter,
    /// Per-1,000 LCOAI with the parameter at `(1 - swing)` times baseline.
    pub low: Money,
    /// Per-1,000 LCOAI with the parameter at `(1 + swing)` times baseline.
    pub high: Money,
}

impl TornadoBar {
    pub fn spread(&self) -> i64 {
        (self.high - self.low).micros().abs()
    }
}

/// Per-1,000 LCOAI at `(1 ± swing)` times each parameter's baseline, widest
/// spread first.
pub fn tornado(
    scenario: &CostScenario,
    swing: Ratio<i64>,
    parameters: &[TornadoParameter],
) -> Result<Vec<TornadoBar>> {
    if swing <= Ratio::zero() || swing >= Ratio::from_integer(1) {
        return Err(Error::InvalidSweep(
            "swing must lie strictly between 0 and 1".into(),
        ));
    }
    let mut params = parameters.to_vec();
    params.sort();
    params.dedup();
    let one = Ratio::from_integer(1);
    let mut bars = params
        .into_iter()
        .map(|parameter| {
            let at = |factor: Ratio<i64>| -> Result<Money> {
                let derived = scale_parameter(scenario, parameter, factor)?;
                Ok(compute_lcoai(&derived)?.per_thousand)
            };
            Ok(TornadoBar {
                parameter,
                low: at(one - swing)?,
                high: at(one + swing)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    bars.sort_by_key(|bar| std::cmp::Reverse(bar.spread()));
    Ok(bars)
}

fn scale_parameter(
    scenario: &CostScenario,
    parameter: TornadoParameter,
    factor: Ratio<i64>,
) -> Result<CostScenario> {
    Ok(match parameter {
        TornadoParameter::Capex => scenario.with_capex_scaled(factor)?,
        TornadoParameter::OpexRate => {
            scenario.with_opex_rate(scenario.opex.per_inference.scale(factor)?)
        }
        TornadoParameter::FixedOpex => {
            let mut out = scenario.clone();
            out.opex.fixed_per_period = out.opex.fixed_per_period.scale(factor)?;
            out
        }
        TornadoParameter::Volume => {
            let total = scenario.volume.total() as i128;
            let scaled = div_round(total * *factor.numer() as i128, *factor.denom() as i128);
            scenario.with_total_volume(u64::try_from(scaled).map_err(|_| Error::Overflow)?)
        }
    })
}

/// Exact per-inference cost difference `a - b` at `volume`, in micro-dollars.
/// Positive means `b` is cheaper.
pub fn cost_gap_at(a: &CostScenario, b: &CostScenario, volume: u64) -> Result<Ratio<BigInt>> {
    let ra = compute_lcoai(&a.with_total_volume(volume))?;
    let rb = compute_lcoai(&b.with_total_volume(volume))?;
    Ok(ra.exact_per_inference() - rb.exact_per_inference())
}

/// Whether `a` is strictly cheaper than `b` at `volume`.
pub fn strictly_cheaper(a: &CostScenario, b: &CostScenario, volume: u64) -> Result<bool> {
    Ok(cost_gap_at(a, b, volume)?.is_negative())
}
