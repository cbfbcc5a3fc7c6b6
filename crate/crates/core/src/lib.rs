//! Levelized cost of AI (LCOAI): amortized CAPEX plus OPEX per valid
//! inference, reported in USD per 1,000 inferences.
//!
//! All money is exact integer micro-dollars ([`Money`]). The crate covers the
//! cost model itself ([`compute_lcoai`]), one-at-a-time sensitivity sweeps and
//! break-even volumes ([`sensitivity`]), decision helpers ([`decision`]),
//! valid-inference counting from telemetry logs ([`ingest`]), JSON scenario
//! files ([`config`]) and table rendering ([`report`]).
//!
//! ```
//! use lcoai_core::{compute_lcoai, CostScenario, Money, PerInferenceRate};
//!
//! let gpt = CostScenario::simple(
//!     "GPT-4.1",
//!     Money::from_dollars(50_000),
//!     "0.01".parse::<PerInferenceRate>().unwrap(),
//!     10_000_000,
//! )
//! .unwrap();
//! let result = compute_lcoai(&gpt).unwrap();
//! assert_eq!(result.per_thousand.to_string(), "$15.00");
//! ```

pub mod config;
pub mod decimal;
pub mod decision;
mod error;
pub mod ingest;
pub mod lcoai;
pub mod money;
pub mod report;
pub mod scenario;
pub mod sensitivity;

pub use config::{load_scenarios, parse_scenarios, scenarios_to_json, ConfigError, ScenarioFile};
pub use decision::{
    baseline_savings, compare, fine_tune_threshold, BaselineComparison, ComparisonRow,
    FineTuneDecision,
};
pub use error::{Error, Result};
pub use ingest::{count_valid, parse_log, InferenceRecord, ParseMode, VolumeCount};
pub use lcoai::{amortize_capex, compute_lcoai, discount_factor, LcoaiResult};
pub use money::{Money, PerInferenceRate};
pub use report::{ReportTable, TableFormat};
pub use scenario::{
    AssetLife, CapexItem, CostScenario, DiscountMode, DiscountPolicy, Horizon, OpexModel,
    VolumeProjection,
};
pub use sensitivity::{
    break_even, sweep, tornado, BreakEvenResult, SweepParameter, SweepResult, SweepSpec,
    SweepValue, TornadoParameter,
};
