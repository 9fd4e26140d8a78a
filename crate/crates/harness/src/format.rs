//! Number formatting shared by every CSV writer.

/// Renders `x` with exactly nine significant digits. Magnitudes in
/// `[1e-4, 1e9)` are written positionally, others in scientific notation.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = mantissa.strip_prefix('-').map_or(("", mantissa), |m| ("-", m));
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        let (int, frac) = digits.split_at(split);
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    } else {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    };
    format!("{sign}{body}")
}

/// Finishes an in-memory CSV writer.
pub fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String, csv::Error> {
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv fields are UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(sig9(2.0131), "2.01310000");
        assert_eq!(sig9(-0.00123456789123), "-0.00123456789");
        assert_eq!(sig9(123456789.4), "123456789");
        assert_eq!(sig9(9.9999999999), "10.0000000");
        assert_eq!(sig9(1.5e-11), "1.50000000e-11");
        assert_eq!(sig9(3.0e12), "3.00000000e12");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(f64::NAN), "nan");
    }

    #[test]
    fn round_trips_to_nine_digits() {
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 5.960123456e3, -7.25e-3] {
            let back: f64 = sig9(x).parse().unwrap();
            assert!((back - x).abs() <= 5e-9 * x.abs());
        }
    }
}
