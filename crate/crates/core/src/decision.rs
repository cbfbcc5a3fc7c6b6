//! Rankings, savings against a non-AI baseline, and fine-tuning thresholds.

use std::collections::HashSet;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::lcoai::{compute_lcoai, LcoaiResult};
use crate::money::{Money, PerInferenceRate};
use crate::scenario::CostScenario;

/// One line of a comparison table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonRow {
    pub scenario_name: String,
    /// Nominal CAPEX before amortization.
    pub capex_total: Money,
    pub opex_rate: PerInferenceRate,
    pub volume: u128,
    pub opex_total: Money,
    pub per_thousand: Money,
}

/// Rank scenarios by per-1,000 LCOAI, cheapest first. Ties go to the lower
/// CAPEX, then to the name.
pub fn compare(scenarios: &[CostScenario]) -> Result<Vec<ComparisonRow>> {
    let mut seen = HashSet::new();
    for s in scenarios {
        if !seen.insert(s.name.as_str()) {
            return Err(Error::DuplicateName(s.name.clone()));
        }
    }
    let mut rows = scenarios
        .iter()
        .map(|s| {
            let r = compute_lcoai(s)?;
            Ok(ComparisonRow {
                scenario_name: s.name.clone(),
                capex_total: s.capex_total(),
                opex_rate: s.opex.per_inference,
                volume: r.total_inferences,
                opex_total: r.total_opex,
                per_thousand: r.per_thousand,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.per_thousand
            .cmp(&b.per_thousand)
            .then(a.capex_total.cmp(&b.capex_total))
            .then_with(|| a.scenario_name.cmp(&b.scenario_name))
    });
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaselineComparison {
    pub baseline_cost_per_thousand: Money,
    pub lcoai_per_thousand: Money,
    /// Negative when the AI deployment costs more than the baseline.
    pub savings_per_thousand: Money,
    /// `savings / baseline`; `None` for a zero baseline.
    pub savings_ratio: Option<Ratio<i64>>,
}

pub fn baseline_savings(
    lcoai: &LcoaiResult,
    baseline_per_thousand: Money,
) -> Result<BaselineComparison> {
    savings_between(lcoai.per_thousand, baseline_per_thousand)
}

/// Savings of `lcoai_per_thousand` against `baseline_per_thousand`.
pub fn savings_between(
    lcoai_per_thousand: Money,
    baseline_per_thousand: Money,
) -> Result<BaselineComparison> {
    if baseline_per_thousand.is_negative() {
        return Err(Error::NegativeValue {
            what: "baseline cost".into(),
        });
    }
    let savings = baseline_per_thousand - lcoai_per_thousand;
    let savings_ratio = (baseline_per_thousand != Money::ZERO)
        .then(|| Ratio::new(savings.micros(), baseline_per_thousand.micros()));
    Ok(BaselineComparison {
        baseline_cost_per_thousand: baseline_per_thousand,
        lcoai_per_thousand,
        savings_per_thousand: savings,
        savings_ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FineTuneDecision {
    pub base_rate: PerInferenceRate,
    pub tuned_rate: PerInferenceRate,
    pub tuning_capex: Money,
    /// Smallest volume at which the tuned model is strictly cheaper; `None`
    /// when the tuned rate is no better than the base rate.
    pub threshold_volume: Option<u64>,
}

pub fn fine_tune_threshold(
    base_rate: PerInferenceRate,
    tuned_rate: PerInferenceRate,
    tuning_capex: Money,
) -> Result<FineTuneDecision> {
    if tuning_capex.is_negative() {
        return Err(Error::NegativeValue {
            what: "tuning CAPEX".into(),
        });
    }
    let threshold_volume = if tuned_rate >= base_rate {
        None
    } else {
        // capex / V + tuned < base  <=>  V > capex / (base - tuned)
        let gap = (base_rate.micros() - tuned_rate.micros()) as i128;
        let v = tuning_capex.micros() as i128 / gap + 1;
        Some(u64::try_from(v).map_err(|_| Error::Overflow)?)
    };
    Ok(FineTuneDecision {
        base_rate,
        tuned_rate,
        tuning_capex,
        threshold_volume,
    })
}
