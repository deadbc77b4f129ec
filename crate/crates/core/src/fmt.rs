//! Number formatting for report output: text reports round to a fixed number
//! of significant digits, CSV/JSON keep the shortest exact representation.

/// Format with `digits` significant digits, plain notation where reasonable.
pub fn sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let digits = digits.max(1);
    let exp = v.abs().log10().floor() as i32;
    if exp < -4 || exp >= digits as i32 + 3 {
        format!("{:.*e}", digits - 1, v)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, v)
    }
}

/// Six significant digits, the default for human-readable tables.
pub fn sig6(v: f64) -> String {
    sig(v, 6)
}
