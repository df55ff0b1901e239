//! Fixed-precision text output for curves and reports.
//!
//! Numbers are written with 12 significant digits so that fixtures stay
//! byte-stable across runs.

use std::fmt::Write as _;

use crate::optimizer::TradeoffPoint;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Header line of the curve CSV.
pub const CURVE_CSV_HEADER: &str = "rho,risk_bits,lambda";

/// Formats `x` with `digits` significant digits in the style of C's `%g`:
/// trailing zeros trimmed, scientific notation outside `[1e-5, 10^digits)`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds `x` to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.max(1) - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Curve as CSV: `rho,risk_bits,lambda` then one row per point.
pub fn curve_csv(points: &[TradeoffPoint]) -> String {
    let mut out = String::with_capacity(32 * (points.len() + 1));
    out.push_str(CURVE_CSV_HEADER);
    out.push('\n');
    for pt in points {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_sig(pt.rho.value(), SIGNIFICANT_DIGITS),
            format_sig(pt.risk, SIGNIFICANT_DIGITS),
            format_sig(pt.lambda, SIGNIFICANT_DIGITS)
        );
    }
    out
}
