//! Deployment scenario description.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::money::{Money, PerInferenceRate};

/// How long a CAPEX item is written off over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum AssetLife {
    /// Charged in full over the analysis horizon.
    #[default]
    Horizon,
    /// Straight-line over the given number of months.
    Months(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapexItem {
    pub label: String,
    pub amount: Money,
    pub asset_life: AssetLife,
}

impl CapexItem {
    pub fn new(label: impl Into<String>, amount: Money, asset_life: AssetLife) -> Result<Self> {
        let item = CapexItem {
            label: label.into(),
            amount,
            asset_life,
        };
        item.validate()?;
        Ok(item)
    }

    /// A one-off item written off over the horizon.
    pub fn upfront(label: impl Into<String>, amount: Money) -> Result<Self> {
        Self::new(label, amount, AssetLife::Horizon)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidCapex {
            label: self.label.clone(),
            reason: reason.into(),
        };
        if self.amount.is_negative() {
            return Err(invalid("amount is negative"));
        }
        if self.asset_life == AssetLife::Months(0) {
            return Err(invalid("asset life must be at least one month"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpexModel {
    pub per_inference: PerInferenceRate,
    pub fixed_per_period: Money,
}

impl OpexModel {
    pub fn per_inference(rate: PerInferenceRate) -> Self {
        OpexModel {
            per_inference: rate,
            fixed_per_period: Money::ZERO,
        }
    }

    /// OPEX incurred in one period serving `inferences`.
    pub fn period_cost(&self, inferences: u64) -> Result<Money> {
        self.per_inference
            .cost_of(inferences)?
            .checked_add(self.fixed_per_period)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fixed_per_period.is_negative() {
            return Err(Error::NegativeValue {
                what: "fixed OPEX per period".into(),
            });
        }
        Ok(())
    }
}

/// Valid inferences expected in each period of the horizon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumeProjection {
    per_period: Vec<u64>,
}

impl VolumeProjection {
    pub fn new(per_period: Vec<u64>) -> Self {
        VolumeProjection { per_period }
    }

    pub fn single(volume: u64) -> Self {
        VolumeProjection {
            per_period: vec![volume],
        }
    }

    pub fn per_period(&self) -> &[u64] {
        &self.per_period
    }

    pub fn len(&self) -> usize {
        self.per_period.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_period.is_empty()
    }

    pub fn total(&self) -> u128 {
        self.per_period.iter().map(|&v| v as u128).sum()
    }

    /// Rescale so the entries sum to `target`, keeping their proportions.
    /// Rounding residue lands in the final period; an all-zero projection is
    /// filled uniformly.
    pub fn rescaled(&self, target: u64) -> Self {
        let n = self.per_period.len();
        if n == 0 {
            return self.clone();
        }
        let total = self.total();
        let mut out: Vec<u64> = if total == 0 {
            vec![target / n as u64; n]
        } else {
            self.per_period
                .iter()
                .map(|&v| (v as u128 * target as u128 / total) as u64)
                .collect()
        };
        let assigned: u64 = out.iter().sum();
        out[n - 1] += target - assigned;
        VolumeProjection { per_period: out }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Horizon {
    periods: u32,
    period_length_months: u32,
}

impl Horizon {
    pub fn new(periods: u32, period_length_months: u32) -> Result<Self> {
        if periods == 0 {
            return Err(Error::InvalidHorizon(
                "at least one period is required".into(),
            ));
        }
        if period_length_months == 0 {
            return Err(Error::InvalidHorizon(
                "period length must be at least one month".into(),
            ));
        }
        Ok(Horizon {
            periods,
            period_length_months,
        })
    }

    /// One twelve-month period.
    pub fn one_year() -> Self {
        Horizon {
            periods: 1,
            period_length_months: 12,
        }
    }

    pub fn periods(&self) -> u32 {
        self.periods
    }

    pub fn period_length_months(&self) -> u32 {
        self.period_length_months
    }

    pub fn span_months(&self) -> u32 {
        self.periods * self.period_length_months
    }
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon::one_year()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DiscountMode {
    #[default]
    None,
    Wacc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscountPolicy {
    pub mode: DiscountMode,
    /// Annual WACC; ignored unless `mode` is [`DiscountMode::Wacc`].
    pub annual_rate: Ratio<i64>,
    /// Also discount the inference count, LCOE style.
    pub discount_denominator: bool,
}

impl DiscountPolicy {
    pub fn none() -> Self {
        DiscountPolicy {
            mode: DiscountMode::None,
            annual_rate: Ratio::from_integer(0),
            discount_denominator: false,
        }
    }

    pub fn wacc(annual_rate: Ratio<i64>) -> Result<Self> {
        let policy = DiscountPolicy {
            mode: DiscountMode::Wacc,
            annual_rate,
            discount_denominator: false,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn with_discounted_denominator(mut self, on: bool) -> Self {
        self.discount_denominator = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == DiscountMode::None {
            return Ok(());
        }
        if self.annual_rate < Ratio::from_integer(0) {
            return Err(Error::InvalidDiscount("annual rate is negative".into()));
        }
        if self.annual_rate >= Ratio::from_integer(1) {
            return Err(Error::InvalidDiscount(
                "annual rate must be below 100%".into(),
            ));
        }
        Ok(())
    }
}

impl Default for DiscountPolicy {
    fn default() -> Self {
        DiscountPolicy::none()
    }
}

/// A named deployment alternative.
///
/// Zero total volume is allowed here; it only fails when the LCOAI is
/// computed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostScenario {
    pub name: String,
    pub capex: Vec<CapexItem>,
    pub opex: OpexModel,
    pub volume: VolumeProjection,
    pub horizon: Horizon,
    pub discount: DiscountPolicy,
}

impl CostScenario {
    pub fn new(
        name: impl Into<String>,
        capex: Vec<CapexItem>,
        opex: OpexModel,
        volume: VolumeProjection,
        horizon: Horizon,
        discount: DiscountPolicy,
    ) -> Result<Self> {
        let scenario = CostScenario {
            name: name.into(),
            capex,
            opex,
            volume,
            horizon,
            discount,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// One-year, undiscounted scenario with a single upfront CAPEX item and
    /// purely per-inference OPEX.
    pub fn simple(
        name: impl Into<String>,
        capex: Money,
        rate: PerInferenceRate,
        annual_volume: u64,
    ) -> Result<Self> {
        Self::new(
            name,
            vec![CapexItem::upfront("capex", capex)?],
            OpexModel::per_inference(rate),
            VolumeProjection::single(annual_volume),
            Horizon::one_year(),
            DiscountPolicy::none(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::EmptyName);
        }
        for item in &self.capex {
            item.validate()?;
        }
        self.opex.validate()?;
        if self.volume.len() != self.horizon.periods() as usize {
            return Err(Error::VolumeLength {
                expected: self.horizon.periods() as usize,
                got: self.volume.len(),
            });
        }
        self.discount.validate()
    }

    /// Nominal CAPEX, before amortization.
    pub fn capex_total(&self) -> Money {
        self.capex.iter().map(|item| item.amount).sum()
    }

    /// Copy with every CAPEX item scaled by `factor`.
    pub fn with_capex_scaled(&self, factor: Ratio<i64>) -> Result<Self> {
        let mut out = self.clone();
        for item in &mut out.capex {
            item.amount = item.amount.scale(factor)?;
        }
        Ok(out)
    }

    pub fn with_opex_rate(&self, rate: PerInferenceRate) -> Self {
        let mut out = self.clone();
        out.opex.per_inference = rate;
        out
    }

    pub fn with_total_volume(&self, total: u64) -> Self {
        let mut out = self.clone();
        out.volume = self.volume.rescaled(total);
        out
    }

    /// True when cost is `C + rate * V` over a single undiscounted period,
    /// which admits closed-form break-even analysis.
    pub fn is_single_period_undiscounted(&self) -> bool {
        self.horizon.periods() == 1
            && (self.discount.mode == DiscountMode::None
                || self.discount.annual_rate == Ratio::from_integer(0))
    }
}
