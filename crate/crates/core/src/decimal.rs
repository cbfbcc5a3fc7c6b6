//! Decimal text <-> scaled integer conversion.

use num_rational::Ratio;
use thiserror::Error;

use crate::money::div_round;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecimalError {
    #[error("`{0}` is not a decimal number")]
    Malformed(String),
    #[error("`{0}` has more than {1} fractional digits")]
    TooPrecise(String, u32),
    #[error("`{0}` is out of range")]
    OutOfRange(String),
    #[error("`{0}` must not be negative")]
    Negative(String),
}

/// Parse `[-+]digits[.digits]` into an integer scaled by `10^scale`.
pub fn parse_scaled(text: &str, scale: u32) -> Result<i128, DecimalError> {
    let malformed = || DecimalError::Malformed(text.to_string());
    let s = text.trim();
    let (negative, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return Err(malformed());
    }
    let frac_trimmed = frac_part.trim_end_matches('0');
    if frac_trimmed.len() > scale as usize {
        return Err(DecimalError::TooPrecise(text.to_string(), scale));
    }
    let out_of_range = || DecimalError::OutOfRange(text.to_string());
    let mut value: i128 = 0;
    for b in int_part.bytes() {
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add((b - b'0') as i128))
            .ok_or_else(out_of_range)?;
    }
    let mut frac: i128 = 0;
    for i in 0..scale as usize {
        let digit = frac_trimmed.as_bytes().get(i).map_or(0, |b| b - b'0');
        frac = frac * 10 + digit as i128;
    }
    let value = value
        .checked_mul(10i128.pow(scale))
        .and_then(|v| v.checked_add(frac))
        .ok_or_else(out_of_range)?;
    Ok(if negative { -value } else { value })
}

/// Shortest exact decimal text for a value scaled by `10^scale`.
pub fn format_scaled(value: i128, scale: u32) -> String {
    let unit = 10i128.pow(scale);
    let sign = if value < 0 { "-" } else { "" };
    let abs = value.unsigned_abs();
    let int = abs / unit as u128;
    let frac = abs % unit as u128;
    if frac == 0 {
        return format!("{sign}{int}");
    }
    let digits = format!("{frac:0width$}", width = scale as usize);
    format!("{sign}{int}.{}", digits.trim_end_matches('0'))
}

/// Render a value scaled by `10^scale` rounded to `places` decimals.
pub fn format_fixed(value: i128, scale: u32, places: u32, group_thousands: bool) -> String {
    let rounded = if places >= scale {
        value * 10i128.pow(places - scale)
    } else {
        div_round(value, 10i128.pow(scale - places))
    };
    let unit = 10u128.pow(places);
    let abs = rounded.unsigned_abs();
    let int = abs / unit;
    let frac = abs % unit;
    let int_text = if group_thousands {
        group(int)
    } else {
        int.to_string()
    };
    let sign = if rounded < 0 { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int_text}")
    } else {
        format!("{sign}{int_text}.{frac:0width$}", width = places as usize)
    }
}

/// `28846154` -> `28,846,154`.
pub fn group(value: u128) -> String {
    let digits = value.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// Parse a non-negative rational given either as a decimal (`"0.07"`) or as
/// a fraction (`"1/3"`).
pub fn parse_ratio(text: &str) -> Result<Ratio<i64>, DecimalError> {
    let s = text.trim();
    let ratio = if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n
            .trim()
            .parse()
            .map_err(|_| DecimalError::Malformed(text.into()))?;
        let d: i64 = d
            .trim()
            .parse()
            .map_err(|_| DecimalError::Malformed(text.into()))?;
        if d == 0 {
            return Err(DecimalError::Malformed(text.into()));
        }
        Ratio::new(n, d)
    } else {
        const SCALE: u32 = 12;
        let scaled = parse_scaled(s, SCALE)?;
        let scaled = i64::try_from(scaled).map_err(|_| DecimalError::OutOfRange(text.into()))?;
        Ratio::new(scaled, 10i64.pow(SCALE))
    };
    if ratio < Ratio::from_integer(0) {
        return Err(DecimalError::Negative(text.into()));
    }
    Ok(ratio)
}

/// Inverse of [`parse_ratio`]: decimal text when the value terminates,
/// `p/q` otherwise.
pub fn format_ratio(ratio: Ratio<i64>) -> String {
    let mut den = *ratio.denom();
    let mut places = 0u32;
    for factor in [2i64, 5] {
        while den % factor == 0 {
            den /= factor;
        }
    }
    if den != 1 {
        return format!("{}/{}", ratio.numer(), ratio.denom());
    }
    let mut scale = 1i128;
    while (scale % *ratio.denom() as i128) != 0 {
        scale *= 10;
        places += 1;
    }
    let scaled = *ratio.numer() as i128 * (scale / *ratio.denom() as i128);
    format_scaled(scaled, places)
}
