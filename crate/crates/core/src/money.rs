//! Exact fixed-point currency.
//!
//! Every amount is an integer count of micro-dollars. Rounding, wherever it
//! happens, is half away from zero at micro-dollar granularity.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};

use crate::decimal::{self, DecimalError};
use crate::error::{Error, Result};

/// Micro-dollars per dollar.
pub const MICROS_PER_USD: i64 = 1_000_000;

/// Divide `num` by `den` (non-zero) rounding half away from zero.
pub fn div_round(num: i128, den: i128) -> i128 {
    assert!(den != 0, "division by zero");
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    let q = num / den;
    let r = num % den;
    if 2 * r.abs() >= den {
        q + num.signum()
    } else {
        q
    }
}

/// Round a rational half away from zero to an `i64`.
pub(crate) fn round_big(value: &BigRational) -> Result<i64> {
    value.round().to_integer().to_i64().ok_or(Error::Overflow)
}

/// A USD amount in micro-dollars.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_micros(micros: i64) -> Self {
        Money(micros)
    }

    pub const fn from_dollars(dollars: i64) -> Self {
        Money(dollars * MICROS_PER_USD)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn checked_add(self, other: Money) -> Result<Money> {
        self.0
            .checked_add(other.0)
            .map(Money)
            .ok_or(Error::Overflow)
    }

    pub fn checked_mul(self, factor: u64) -> Result<Money> {
        let factor = i64::try_from(factor).map_err(|_| Error::Overflow)?;
        self.0.checked_mul(factor).map(Money).ok_or(Error::Overflow)
    }

    /// Multiply by a non-negative rational, rounding the result.
    pub fn scale(self, factor: Ratio<i64>) -> Result<Money> {
        if factor < Ratio::zero() {
            return Err(Error::NegativeValue {
                what: "scale factor".into(),
            });
        }
        let num = self.0 as i128 * *factor.numer() as i128;
        let scaled = div_round(num, *factor.denom() as i128);
        i64::try_from(scaled)
            .map(Money)
            .map_err(|_| Error::Overflow)
    }

    /// Spread this amount over `count` inferences.
    pub fn per_inference(self, count: u64) -> Result<PerInferenceRate> {
        if count == 0 {
            return Err(Error::UndefinedMetric {
                scenario: String::new(),
            });
        }
        let rate = div_round(self.0 as i128, count as i128);
        PerInferenceRate::try_from_micros(i64::try_from(rate).map_err(|_| Error::Overflow)?)
    }

    /// Canonical decimal dollars without trailing zeros, e.g. `"0.0048"`.
    pub fn to_decimal_string(self) -> String {
        decimal::format_scaled(self.0 as i128, 6)
    }

    /// Dollar-sign rendering with thousands separators at `places` decimals.
    pub fn format_usd(self, places: u32) -> String {
        let text = decimal::format_fixed(self.0 as i128, 6, places, true);
        match text.strip_prefix('-') {
            Some(rest) => format!("-${rest}"),
            None => format!("${text}"),
        }
    }
}

impl FromStr for Money {
    type Err = DecimalError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let micros = decimal::parse_scaled(s, 6)?;
        i64::try_from(micros)
            .map(Money)
            .map_err(|_| DecimalError::OutOfRange(s.to_string()))
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_usd(2))
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

/// Micro-dollars charged per single inference. Never negative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PerInferenceRate(i64);

impl PerInferenceRate {
    pub const ZERO: PerInferenceRate = PerInferenceRate(0);

    pub fn try_from_micros(micros: i64) -> Result<Self> {
        if micros < 0 {
            return Err(Error::NegativeValue {
                what: "per-inference rate".into(),
            });
        }
        Ok(PerInferenceRate(micros))
    }

    /// # Panics
    /// If `micros` is negative. Intended for constants.
    pub const fn from_micros(micros: i64) -> Self {
        assert!(micros >= 0, "negative per-inference rate");
        PerInferenceRate(micros)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    /// Cost of `count` inferences at this rate.
    pub fn cost_of(self, count: u64) -> Result<Money> {
        Money(self.0).checked_mul(count)
    }

    /// The same rate expressed per 1,000 inferences.
    pub fn per_thousand(self) -> Money {
        Money(self.0 * 1000)
    }

    pub fn scale(self, factor: Ratio<i64>) -> Result<Self> {
        Money(self.0).scale(factor).map(|m| PerInferenceRate(m.0))
    }

    pub fn as_money(self) -> Money {
        Money(self.0)
    }

    /// Four decimals minimum, up to six when the rate needs them (`$0.0048`,
    /// `$0.00075`).
    pub fn format_usd(self) -> String {
        let mut text = decimal::format_fixed(self.0 as i128, 6, 6, true);
        while text.ends_with('0') && text.len() - text.find('.').unwrap() > 5 {
            text.pop();
        }
        format!("${text}")
    }
}

impl FromStr for PerInferenceRate {
    type Err = DecimalError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let money: Money = s.parse()?;
        if money.is_negative() {
            return Err(DecimalError::Negative(s.to_string()));
        }
        Ok(PerInferenceRate(money.0))
    }
}

impl fmt::Display for PerInferenceRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_usd())
    }
}
