//! Number formatting shared by reports and CSV output.

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros removed,
/// scientific notation for exponents below -4 or at least 12. Negative zero prints as `0`.
pub fn sig12(x: f64) -> String {
    general(x, 12)
}

/// `%.{digits}g` formatting.
pub fn general(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // The exponent after rounding decides the notation.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(0.65), "0.65");
        assert_eq!(sig12(2.0 / 3.0), "0.666666666667");
        assert_eq!(sig12(123456.5), "123456.5");
        assert_eq!(sig12(1e12), "1e+12");
        assert_eq!(sig12(999999999999.9), "1e+12");
        assert_eq!(sig12(1.5e-5), "1.5e-05");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(0.0001), "0.0001");
        assert_eq!(sig12(-3.25), "-3.25");
        assert_eq!(sig12((17.0f64 / 3.0).ln()), "1.73460105539");
        assert_eq!(general(100.0, 3), "100");
        assert_eq!(general(1234.0, 3), "1.23e+03");
    }
}
