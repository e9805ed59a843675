//! Deterministic text output shared by every CSV writer.

use std::fmt::Write;

/// Format like C's `%.{digits}g`: `digits` significant digits, trailing
/// zeros removed, scientific notation outside `[1e-4, 10^digits)`.
pub fn fmt_g(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `%.12g`, the precision used by every table this crate writes.
pub fn g12(x: f64) -> String {
    fmt_g(x, 12)
}

/// Minimal CSV builder: a header row followed by data rows.
#[derive(Debug, Clone)]
pub struct Csv {
    out: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Self { out, columns: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        let _ = writeln!(self.out, "{}", cells.join(","));
    }

    pub fn finish(self) -> String {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_c_printf() {
        assert_eq!(g12(2.0), "2");
        assert_eq!(g12(0.5), "0.5");
        assert_eq!(g12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(g12(1e-5), "1e-05");
        assert_eq!(g12(0.0001), "0.0001");
        assert_eq!(g12(123456789012.0), "123456789012");
        assert_eq!(g12(1234567890123.0), "1.23456789012e+12");
        assert_eq!(g12(-13.000000000000002), "-13");
        assert_eq!(g12(9.9999999999999), "10");
        assert_eq!(fmt_g(1.0 / 3.0, 3), "0.333");
    }

    #[test]
    fn csv_rows() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&["1".into(), "2".into()]);
        assert_eq!(c.finish(), "a,b\n1,2\n");
    }
}
