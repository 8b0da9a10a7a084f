//! JSON envelope and CSV rendering.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

/// Formats `x` to `digits` significant digits.
///
/// Rounding follows the standard library's float formatting, which works on
/// the exact binary value and breaks exact decimal ties toward the even
/// digit. Magnitudes in `[1e-4, 10^digits)` print in positional notation,
/// others in scientific notation.
pub fn format_sig(x: f64, digits: u32) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1) as usize;
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    // Positional: shift the mantissa digits by the exponent.
    let negative = mantissa.starts_with('-');
    let raw: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = 1 + exp;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), raw)
    } else if point as usize >= raw.len() {
        format!("{}{}", raw, "0".repeat(point as usize - raw.len()))
    } else {
        format!("{}.{}", &raw[..point as usize], &raw[point as usize..])
    };
    let body = trim_zeros(&body);
    if negative {
        format!("-{body}")
    } else {
        body.to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Empty,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Text(x.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, precision: u32) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Text(s) => quote(s),
                    Cell::Num(x) => format_sig(*x, precision),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool_version: &'static str,
    config: &'a Value,
    results: &'a Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
}

pub fn render_json(config: &Value, results: &Value, timestamp: bool) -> String {
    let env = Envelope {
        tool_version: env!("CARGO_PKG_VERSION"),
        config,
        results,
        timestamp: timestamp.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        }),
    };
    let mut s = serde_json::to_string_pretty(&env).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn emit(text: &str, path: Option<&std::path::Path>, stdout: &mut dyn Write) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => stdout.write_all(text.as_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.609787, 3), "0.61");
        assert_eq!(format_sig(540.0, 6), "540");
        assert_eq!(format_sig(51.448275862, 6), "51.4483");
        assert_eq!(format_sig(-2.5e-7, 2), "-2.5e-7");
        assert_eq!(format_sig(1234567.0, 3), "1.23e6");
        assert_eq!(format_sig(0.000123456, 3), "0.000123");
        assert_eq!(format_sig(0.0, 6), "0");
    }

    #[test]
    fn ties_go_to_even() {
        // 0.125 and 0.375 are exact in binary
        assert_eq!(format_sig(0.125, 2), "0.12");
        assert_eq!(format_sig(0.375, 2), "0.38");
        assert_eq!(format_sig(2.5, 1), "2");
        assert_eq!(format_sig(3.5, 1), "4");
    }

    #[test]
    fn csv_quoting() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), 1.5.into()]);
        t.push(vec![Cell::Empty, "q\"".into()]);
        assert_eq!(t.render(6), "a,b\n\"x,y\",1.5\n,\"q\"\"\"\n");
    }
}
