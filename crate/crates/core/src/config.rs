//! JSON scenario files.
//!
//! ```json
//! {"version": 1, "scenarios": [{
//!   "name": "OpenAI GPT-4.1 (API-based)",
//!   "capex": [{"label": "integration", "amount_usd": "50000", "asset_life_months": "horizon"}],
//!   "opex": {"per_inference_usd": "0.01"},
//!   "volume": {"per_period": [10000000]},
//!   "horizon": {"periods": 1, "period_length_months": 12},
//!   "discount": {"mode": "none"}
//! }]}
//! ```
//!
//! Money is decimal-string USD with at most six fractional digits. `horizon`
//! defaults to one 12-month period, `discount` to none, `asset_life_months`
//! to `"horizon"`.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::{format_ratio, parse_ratio};
use crate::money::{Money, PerInferenceRate};
use crate::scenario::{
    AssetLife, CapexItem, CostScenario, DiscountMode, DiscountPolicy, Horizon, OpexModel,
    VolumeProjection,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("unsupported scenario file version {0} (expected {SCHEMA_VERSION})")]
    UnsupportedVersion(u64),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl ConfigError {
    fn at(path: impl fmt::Display, message: impl fmt::Display) -> Self {
        ConfigError::Invalid {
            path: path.to_string(),
            message: message.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub scenarios: Vec<ScenarioDef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDef {
    pub name: String,
    #[serde(default)]
    pub capex: Vec<CapexDef>,
    pub opex: OpexDef,
    pub volume: VolumeDef,
    #[serde(default)]
    pub horizon: HorizonDef,
    #[serde(default)]
    pub discount: DiscountDef,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapexDef {
    pub label: String,
    pub amount_usd: String,
    #[serde(default)]
    pub asset_life_months: AssetLifeDef,
}

/// `asset_life_months`: a month count or the string `"horizon"`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AssetLifeDef {
    Months(u32),
    #[default]
    Horizon,
}

impl Serialize for AssetLifeDef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            AssetLifeDef::Months(m) => s.serialize_u32(*m),
            AssetLifeDef::Horizon => s.serialize_str("horizon"),
        }
    }
}

impl<'de> Deserialize<'de> for AssetLifeDef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Visitor;

        impl serde::de::Visitor<'_> for Visitor {
            type Value = AssetLifeDef;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a month count or \"horizon\"")
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<AssetLifeDef, E> {
                u32::try_from(v)
                    .map(AssetLifeDef::Months)
                    .map_err(|_| E::custom("asset life is too long"))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<AssetLifeDef, E> {
                u64::try_from(v)
                    .map_err(|_| E::custom("asset life must not be negative"))
                    .and_then(|v| self.visit_u64(v))
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<AssetLifeDef, E> {
                if v == "horizon" {
                    Ok(AssetLifeDef::Horizon)
                } else {
                    Err(E::invalid_value(serde::de::Unexpected::Str(v), &self))
                }
            }
        }

        d.deserialize_any(Visitor)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpexDef {
    pub per_inference_usd: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_per_period_usd: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeDef {
    pub per_period: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonDef {
    pub periods: u32,
    #[serde(default = "twelve")]
    pub period_length_months: u32,
}

fn twelve() -> u32 {
    12
}

impl Default for HorizonDef {
    fn default() -> Self {
        HorizonDef {
            periods: 1,
            period_length_months: 12,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeDef {
    #[default]
    None,
    Wacc,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscountDef {
    pub mode: ModeDef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annual_rate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discount_denominator: Option<bool>,
}

impl ScenarioDef {
    fn to_scenario(&self, path: &str) -> Result<CostScenario, ConfigError> {
        let capex = self
            .capex
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let at = format!("{path}.capex[{i}]");
                let amount: Money = c
                    .amount_usd
                    .parse()
                    .map_err(|e| ConfigError::at(format!("{at}.amount_usd"), e))?;
                let life = match c.asset_life_months {
                    AssetLifeDef::Horizon => AssetLife::Horizon,
                    AssetLifeDef::Months(m) => AssetLife::Months(m),
                };
                CapexItem::new(c.label.clone(), amount, life).map_err(|e| ConfigError::at(&at, e))
            })
            .collect::<Result<Vec<_>, _>>()?;

        let per_inference: PerInferenceRate = self
            .opex
            .per_inference_usd
            .parse()
            .map_err(|e| ConfigError::at(format!("{path}.opex.per_inference_usd"), e))?;
        let fixed_per_period = match &self.opex.fixed_per_period_usd {
            Some(text) => text
                .parse()
                .map_err(|e| ConfigError::at(format!("{path}.opex.fixed_per_period_usd"), e))?,
            None => Money::ZERO,
        };

        let horizon = Horizon::new(self.horizon.periods, self.horizon.period_length_months)
            .map_err(|e| ConfigError::at(format!("{path}.horizon"), e))?;

        let discount = match self.discount.mode {
            ModeDef::None => DiscountPolicy::none(),
            ModeDef::Wacc => {
                let at = format!("{path}.discount.annual_rate");
                let text = self
                    .discount
                    .annual_rate
                    .as_deref()
                    .ok_or_else(|| ConfigError::at(&at, "required when mode is \"wacc\""))?;
                let rate = parse_ratio(text).map_err(|e| ConfigError::at(&at, e))?;
                DiscountPolicy::wacc(rate).map_err(|e| ConfigError::at(&at, e))?
            }
        }
        .with_discounted_denominator(self.discount.discount_denominator.unwrap_or(false));

        CostScenario::new(
            self.name.clone(),
            capex,
            OpexModel {
                per_inference,
                fixed_per_period,
            },
            VolumeProjection::new(self.volume.per_period.clone()),
            horizon,
            discount,
        )
        .map_err(|e| ConfigError::at(path, e))
    }

    pub fn from_scenario(s: &CostScenario) -> Self {
        ScenarioDef {
            name: s.name.clone(),
            capex: s
                .capex
                .iter()
                .map(|c| CapexDef {
                    label: c.label.clone(),
                    amount_usd: c.amount.to_decimal_string(),
                    asset_life_months: match c.asset_life {
                        AssetLife::Horizon => AssetLifeDef::Horizon,
                        AssetLife::Months(m) => AssetLifeDef::Months(m),
                    },
                })
                .collect(),
            opex: OpexDef {
                per_inference_usd: s.opex.per_inference.as_money().to_decimal_string(),
                fixed_per_period_usd: (s.opex.fixed_per_period != Money::ZERO)
                    .then(|| s.opex.fixed_per_period.to_decimal_string()),
            },
            volume: VolumeDef {
                per_period: s.volume.per_period().to_vec(),
            },
            horizon: HorizonDef {
                periods: s.horizon.periods(),
                period_length_months: s.horizon.period_length_months(),
            },
            discount: DiscountDef {
                mode: match s.discount.mode {
                    DiscountMode::None => ModeDef::None,
                    DiscountMode::Wacc => ModeDef::Wacc,
                },
                annual_rate: (s.discount.mode == DiscountMode::Wacc)
                    .then(|| format_ratio(s.discount.annual_rate)),
                discount_denominator: s.discount.discount_denominator.then_some(true),
            },
        }
    }
}

impl ScenarioFile {
    pub fn from_scenarios(scenarios: &[CostScenario]) -> Self {
        ScenarioFile {
            version: SCHEMA_VERSION,
            scenarios: scenarios.iter().map(ScenarioDef::from_scenario).collect(),
        }
    }

    pub fn to_scenarios(&self) -> Result<Vec<CostScenario>, ConfigError> {
        let mut names = HashSet::new();
        self.scenarios
            .iter()
            .enumerate()
            .map(|(i, def)| {
                let path = format!("scenarios[{i}]");
                let scenario = def.to_scenario(&path)?;
                if !names.insert(scenario.name.clone()) {
                    return Err(ConfigError::at(
                        format!("{path}.name"),
                        format!("duplicate scenario name `{}`", scenario.name),
                    ));
                }
                Ok(scenario)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("scenario file serializes");
        text.push('\n');
        text
    }
}

/// Parse scenario file text.
pub fn parse_scenarios(text: &str) -> Result<Vec<CostScenario>, ConfigError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ConfigError::at("$", e))?;
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => return Err(ConfigError::UnsupportedVersion(v)),
        None => return Err(ConfigError::at("version", "missing or not an integer")),
    }
    let file: ScenarioFile = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::at(path, e.into_inner())
    })?;
    file.to_scenarios()
}

pub fn load_scenarios(path: impl AsRef<Path>) -> Result<Vec<CostScenario>, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    parse_scenarios(&text)
}

/// Serialize scenarios in the current schema.
pub fn scenarios_to_json(scenarios: &[CostScenario]) -> String {
    ScenarioFile::from_scenarios(scenarios).to_json()
}
