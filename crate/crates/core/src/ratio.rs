//! Exact rational helpers. Scores, likelihoods and thresholds are ratios of
//! small counts, so they are kept exact and only rendered at the edges.

use num_traits::ToPrimitive;

use crate::error::{Error, Result};

pub type Ratio = num_rational::Ratio<u64>;

/// Parses `"0.9"`, `"1"`, `".05"` or `"16/17"` into an exact ratio.
pub fn parse_ratio(text: &str) -> Result<Ratio> {
    let text = text.trim();
    let bad = || Error::InvalidParameter(format!("not a non-negative number: `{text}`"));
    if let Some((num, den)) = text.split_once('/') {
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(Error::InvalidParameter(format!(
                "zero denominator in `{text}`"
            )));
        }
        return Ok(Ratio::new(num, den));
    }
    let (int_part, frac_part) = text.split_once('.').unwrap_or((text, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) || frac_part.len() > 18 {
        return Err(bad());
    }
    let int: u64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| bad())?
    };
    let scale = 10u64.pow(frac_part.len() as u32);
    let frac: u64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().map_err(|_| bad())?
    };
    let num = int
        .checked_mul(scale)
        .and_then(|v| v.checked_add(frac))
        .ok_or_else(bad)?;
    Ok(Ratio::new(num, scale))
}

pub fn to_f64(r: Ratio) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Shortest decimal form of the ratio's nearest double, e.g. `0.9` or `0.8`.
pub fn display(r: Ratio) -> String {
    format!("{}", to_f64(r))
}
