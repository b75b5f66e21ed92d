//! Number formatting shared by report writers.

/// Formats a fraction as a percentage with two decimals, rounding half to
/// even. The value is first rounded to 1e-6 percent so binary noise such as
/// `85.09 - 84.85 = 0.24000000000000909` does not move the last digit.
pub fn format_percent(fraction: f64) -> String {
    format_fixed2(fraction * 100.0)
}

/// Like [`format_percent`] but always carries a sign, for deltas.
pub fn format_signed_percent(fraction: f64) -> String {
    format_signed_fixed2(fraction * 100.0)
}

/// [`format_fixed2`] with a leading `+` on positive values.
pub fn format_signed_fixed2(value: f64) -> String {
    let s = format_fixed2(value);
    if s.starts_with('-') || s == "0.00" || !value.is_finite() {
        s
    } else {
        format!("+{s}")
    }
}

/// Two-decimal rendering of an already scaled value, round-half-even.
pub fn format_fixed2(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    let micro = (value * 1e6).round() as i128;
    let negative = micro < 0;
    let micro = micro.abs();
    let mut hundredths = micro / 10_000;
    let rest = micro % 10_000;
    if rest > 5_000 || (rest == 5_000 && hundredths % 2 == 1) {
        hundredths += 1;
    }
    let sign = if negative && hundredths != 0 { "-" } else { "" };
    format!("{sign}{}.{:02}", hundredths / 100, hundredths % 100)
}
