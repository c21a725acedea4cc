//! Exact scaled-integer arithmetic.
//!
//! Every distance, backlog, and delay in this crate is an integer count of
//! scale units (default scale: 10^6 units per base unit, i.e. micro-units).
//! Demands and capacities are plain integers. There is no floating point and
//! no tolerance parameter anywhere in the solvers; values that cannot be
//! represented at the configured scale are rejected at parse time.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default number of scale units per base unit.
pub const DEFAULT_SCALE: u64 = 1_000_000;

/// Maximum relative quantization error tolerated when parsing a decimal
/// that is not exactly representable at the configured scale, expressed as
/// 1 / `QUANTIZATION_REJECT_DENOM`.
pub const QUANTIZATION_REJECT_DENOM: i128 = 1_000_000_000;

/// An exact quantity in scale units.
///
/// Arithmetic is checked: overflow is a hard internal failure, never a
/// silent wrap.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Quantity(pub i64);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuantityError {
    #[error("malformed decimal literal {0:?}")]
    Malformed(String),
    #[error("decimal {0:?} is not representable at scale {1} (relative quantization error exceeds 1e-9)")]
    Quantization(String, u64),
    #[error("decimal {0:?} overflows the quantity range at scale {1}")]
    Overflow(String, u64),
}

impl Quantity {
    pub const ZERO: Quantity = Quantity(0);

    pub fn raw(self) -> i64 {
        self.0
    }

    pub fn abs(self) -> Quantity {
        Quantity(self.0.checked_abs().expect("quantity abs overflow"))
    }

    pub fn checked_add(self, rhs: Quantity) -> Quantity {
        Quantity(self.0.checked_add(rhs.0).expect("quantity add overflow"))
    }

    pub fn checked_sub(self, rhs: Quantity) -> Quantity {
        Quantity(self.0.checked_sub(rhs.0).expect("quantity sub overflow"))
    }

    /// Multiplies by a unitless integer count (demand units, region counts).
    pub fn scale_by(self, count: u64) -> Quantity {
        let wide = self.0 as i128 * count as i128;
        Quantity(i64::try_from(wide).expect("quantity mul overflow"))
    }

    /// Parses a decimal string into scale units, rejecting values whose
    /// quantization error at `scale` is relatively larger than 1e-9.
    pub fn parse_decimal(text: &str, scale: u64) -> Result<Quantity, QuantityError> {
        let malformed = || QuantityError::Malformed(text.to_string());
        let trimmed = text.trim();
        let (negative, digits) = match trimmed.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, trimmed.strip_prefix('+').unwrap_or(trimmed)),
        };
        if digits.is_empty() {
            return Err(malformed());
        }
        let mut parts = digits.splitn(2, '.');
        let int_part = parts.next().unwrap_or("");
        let frac_part = parts.next().unwrap_or("");
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(malformed());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(malformed());
        }
        if frac_part.len() > 38 {
            // Far beyond any representable precision; reject rather than risk
            // silently truncating digits that matter.
            return Err(QuantityError::Quantization(text.to_string(), scale));
        }

        // value = mantissa / 10^frac_len; scaled = mantissa * scale / 10^frac_len
        let mut mantissa: i128 = 0;
        for c in int_part.chars().chain(frac_part.chars()) {
            mantissa = mantissa
                .checked_mul(10)
                .and_then(|m| m.checked_add((c as u8 - b'0') as i128))
                .ok_or_else(|| QuantityError::Overflow(text.to_string(), scale))?;
        }
        let denom = 10i128
            .checked_pow(frac_part.len() as u32)
            .ok_or_else(|| QuantityError::Overflow(text.to_string(), scale))?;
        let numer = mantissa
            .checked_mul(scale as i128)
            .ok_or_else(|| QuantityError::Overflow(text.to_string(), scale))?;
        let quotient = numer / denom;
        let remainder = numer % denom;
        // Round half away from zero; sign handled at the end (mantissa >= 0).
        let rounded = if remainder * 2 >= denom {
            quotient + 1
        } else {
            quotient
        };
        if remainder != 0 {
            // Relative error check: |numer - rounded*denom| / denom vs rounded.
            let err_numer = (numer - rounded * denom).abs();
            if rounded == 0 || err_numer * QUANTIZATION_REJECT_DENOM > rounded * denom {
                return Err(QuantityError::Quantization(text.to_string(), scale));
            }
        }
        let signed = if negative { -rounded } else { rounded };
        i64::try_from(signed)
            .map(Quantity)
            .map_err(|_| QuantityError::Overflow(text.to_string(), scale))
    }

    /// Renders the quantity as an exact decimal in base units, trimming
    /// trailing zeros. The inverse of [`Quantity::parse_decimal`].
    pub fn decimal_string(self, scale: u64) -> String {
        let negative = self.0 < 0;
        let magnitude = (self.0 as i128).unsigned_abs();
        let scale = scale as u128;
        let int_part = magnitude / scale;
        let frac_part = magnitude % scale;
        let mut out = String::new();
        if negative {
            out.push('-');
        }
        out.push_str(&int_part.to_string());
        if frac_part != 0 {
            let width = scale.ilog10() as usize;
            let mut frac = format!("{frac_part:0width$}");
            while frac.ends_with('0') {
                frac.pop();
            }
            out.push('.');
            out.push_str(&frac);
        }
        out
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.decimal_string(DEFAULT_SCALE))
    }
}

/// Sums demand-weighted quantities exactly, panicking on overflow.
pub fn weighted_sum(terms: impl IntoIterator<Item = (u64, Quantity)>) -> Quantity {
    let mut total: i128 = 0;
    for (weight, q) in terms {
        total = total
            .checked_add(weight as i128 * q.0 as i128)
            .expect("weighted sum overflow");
    }
    Quantity(i64::try_from(total).expect("weighted sum exceeds quantity range"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exact_decimals() {
        assert_eq!(
            Quantity::parse_decimal("0.4", DEFAULT_SCALE).unwrap(),
            Quantity(400_000)
        );
        assert_eq!(
            Quantity::parse_decimal("-1.25", DEFAULT_SCALE).unwrap(),
            Quantity(-1_250_000)
        );
        assert_eq!(
            Quantity::parse_decimal("007", DEFAULT_SCALE).unwrap(),
            Quantity(7_000_000)
        );
        assert_eq!(
            Quantity::parse_decimal(".5", DEFAULT_SCALE).unwrap(),
            Quantity(500_000)
        );
    }

    #[test]
    fn rejects_unrepresentable_decimals() {
        let err = Quantity::parse_decimal("0.1234567", DEFAULT_SCALE).unwrap_err();
        assert!(matches!(err, QuantityError::Quantization(..)));
        // A sub-scale digit on a huge magnitude is relatively tiny: accepted.
        let q = Quantity::parse_decimal("4000000.0000001", DEFAULT_SCALE).unwrap();
        assert_eq!(q, Quantity(4_000_000_000_000));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", "-", ".", "1.2.3", "1e5", "x", "--2"] {
            assert!(
                matches!(
                    Quantity::parse_decimal(bad, DEFAULT_SCALE),
                    Err(QuantityError::Malformed(_))
                ),
                "expected malformed: {bad:?}"
            );
        }
    }

    #[test]
    fn formats_trim_trailing_zeros() {
        assert_eq!(Quantity(400_000).decimal_string(DEFAULT_SCALE), "0.4");
        assert_eq!(Quantity(-1_250_000).decimal_string(DEFAULT_SCALE), "-1.25");
        assert_eq!(Quantity(0).decimal_string(DEFAULT_SCALE), "0");
        assert_eq!(Quantity(1).decimal_string(DEFAULT_SCALE), "0.000001");
        assert_eq!(Quantity(7_000_000).decimal_string(DEFAULT_SCALE), "7");
    }

    #[test]
    fn round_trips_scaled_values() {
        for raw in [0i64, 1, -1, 400_000, 123_456_789, -987_654_321_000] {
            let q = Quantity(raw);
            let text = q.decimal_string(DEFAULT_SCALE);
            assert_eq!(Quantity::parse_decimal(&text, DEFAULT_SCALE).unwrap(), q);
        }
    }

    #[test]
    fn weighted_sum_is_exact() {
        let total = weighted_sum([(3, Quantity(500_000)), (2, Quantity(250_000))]);
        assert_eq!(total, Quantity(2_000_000));
    }
}
