//! Levelized cost per valid inference.
//!
//! The metric is total charged CAPEX plus total OPEX over the horizon,
//! divided by the number of valid inferences served in it. CAPEX is charged
//! at commissioning and is never discounted; under a WACC policy each
//! period's OPEX (and optionally its inference count) carries the factor
//! `1 / (1 + r)^years`, where `years` is the elapsed time at the period end.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::money::{round_big, Money, PerInferenceRate};
use crate::scenario::{AssetLife, CapexItem, CostScenario, DiscountMode, DiscountPolicy, Horizon};

/// Horizons at or below this many months are normally left undiscounted.
pub const SHORT_HORIZON_MONTHS: u32 = 24;

/// Per-period CAPEX charges for `items` over `horizon`.
///
/// An item written off over the horizon is spread evenly over every period.
/// An item with a longer asset life contributes only the fraction of its
/// amount that falls inside the horizon; a shorter one is charged in full
/// over the periods its life spans. Micro-dollar residue from uneven
/// division is charged in the last period that carries the item.
pub fn amortize_capex(items: &[CapexItem], horizon: &Horizon) -> Result<Vec<Money>> {
    let periods = horizon.periods() as usize;
    if periods == 0 {
        return Err(Error::InvalidHorizon(
            "at least one period is required".into(),
        ));
    }
    let span = horizon.span_months() as i128;
    let len = horizon.period_length_months() as i128;
    let mut stream = vec![Money::ZERO; periods];
    for item in items {
        item.validate()?;
        let life = match item.asset_life {
            AssetLife::Horizon => span,
            AssetLife::Months(m) => m as i128,
        };
        let amount = item.amount.micros() as i128;
        let charged = if life >= span {
            crate::money::div_round(amount * span, life)
        } else {
            amount
        };
        let active_total = life.min(span);
        let mut assigned = 0i128;
        let mut last_active = 0;
        for (p, slot) in stream.iter_mut().enumerate() {
            let start = p as i128 * len;
            let active = (active_total - start).clamp(0, len);
            if active == 0 {
                break;
            }
            let share = charged * active / active_total;
            *slot += Money::from_micros(share as i64);
            assigned += share;
            last_active = p;
        }
        stream[last_active] += Money::from_micros((charged - assigned) as i64);
    }
    Ok(stream)
}

/// Present-value factor for cash flows at the end of period `period_index`
/// (1-based; index 0 is commissioning and always has factor 1).
///
/// Exact when the elapsed time is a whole number of years. Fractional years
/// fall back to a binary-float approximation of the fractional power,
/// converted back to an exact rational.
pub fn discount_factor(
    policy: &DiscountPolicy,
    period_length_months: u32,
    period_index: u32,
) -> BigRational {
    if policy.mode == DiscountMode::None || period_index == 0 || policy.annual_rate.is_zero() {
        return BigRational::one();
    }
    let growth = big(Ratio::from_integer(1) + policy.annual_rate);
    let months = period_index as u64 * period_length_months as u64;
    let whole_years = (months / 12) as u32;
    let mut compound = Pow::pow(&growth, whole_years);
    let rem = months % 12;
    if rem != 0 {
        let base = growth.to_f64().unwrap_or(1.0);
        let partial = base.powf(rem as f64 / 12.0);
        compound *= BigRational::from_float(partial).unwrap_or_else(BigRational::one);
    }
    compound.recip()
}

fn big(r: Ratio<i64>) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Decomposed LCOAI for one scenario.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LcoaiResult {
    pub scenario_name: String,
    /// CAPEX charged within the horizon (after amortization).
    pub total_capex_charged: Money,
    /// OPEX over the horizon; present value when discounted.
    pub total_opex: Money,
    /// Raw count of valid inferences over the horizon.
    pub total_inferences: u128,
    pub per_inference: PerInferenceRate,
    pub per_thousand: Money,
    /// A non-zero WACC was applied.
    pub discounted: bool,
    /// Discounting was applied to a horizon the usual convention leaves
    /// undiscounted.
    pub short_horizon_discount: bool,
    exact_per_inference: BigRational,
}

impl LcoaiResult {
    /// Unrounded micro-dollars per inference.
    pub fn exact_per_inference(&self) -> &BigRational {
        &self.exact_per_inference
    }

    /// Charged CAPEX plus OPEX.
    pub fn total_cost(&self) -> Money {
        self.total_capex_charged + self.total_opex
    }
}

pub fn compute_lcoai(scenario: &CostScenario) -> Result<LcoaiResult> {
    scenario.validate()?;
    let undefined = || Error::UndefinedMetric {
        scenario: scenario.name.clone(),
    };
    if scenario.volume.total() == 0 {
        return Err(undefined());
    }

    let horizon = &scenario.horizon;
    let policy = &scenario.discount;
    let capex_charged: Money = amortize_capex(&scenario.capex, horizon)?.into_iter().sum();

    let mut opex_pv = BigRational::zero();
    let mut inferences = BigRational::zero();
    for (i, &volume) in scenario.volume.per_period().iter().enumerate() {
        let factor = discount_factor(policy, horizon.period_length_months(), i as u32 + 1);
        let opex = scenario.opex.period_cost(volume)?;
        opex_pv += &factor * BigRational::from_integer(BigInt::from(opex.micros()));
        let count = BigRational::from_integer(BigInt::from(volume));
        inferences += if policy.discount_denominator {
            &factor * count
        } else {
            count
        };
    }
    if inferences.is_zero() {
        return Err(undefined());
    }

    let numerator = BigRational::from_integer(BigInt::from(capex_charged.micros())) + &opex_pv;
    let exact = numerator / inferences;
    let per_inference = PerInferenceRate::try_from_micros(round_big(&exact)?)?;
    let discounted = policy.mode == DiscountMode::Wacc && !policy.annual_rate.is_zero();

    Ok(LcoaiResult {
        scenario_name: scenario.name.clone(),
        total_capex_charged: capex_charged,
        total_opex: Money::from_micros(round_big(&opex_pv)?),
        total_inferences: scenario.volume.total(),
        per_inference,
        per_thousand: per_inference.per_thousand(),
        discounted,
        short_horizon_discount: discounted && horizon.span_months() <= SHORT_HORIZON_MONTHS,
        exact_per_inference: exact,
    })
}
