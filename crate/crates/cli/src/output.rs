use std::io::{self, Write};

use num_complex::Complex64;
use num_rational::Rational64;
use serde_json::Value;

/// Significant-digit rounding shared by CSV and JSON output.
#[derive(Debug, Clone, Copy)]
pub struct Precision(pub usize);

impl Precision {
    /// Scientific notation with `precision` significant digits. At 17 digits
    /// the text parses back to the identical `f64`.
    pub fn text(&self, x: f64) -> String {
        format!("{:.*e}", self.0 - 1, x)
    }

    /// `x` rounded to the configured digits; `null` when not finite.
    pub fn num(&self, x: f64) -> Value {
        if !x.is_finite() {
            return Value::Null;
        }
        let rounded: f64 = self.text(x).parse().expect("formatted float parses");
        serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
    }

    pub fn complex(&self, z: Complex64) -> Value {
        Value::Array(vec![self.num(z.re), self.num(z.im)])
    }

    pub fn complex_list(&self, zs: &[Complex64]) -> Value {
        Value::Array(zs.iter().map(|&z| self.complex(z)).collect())
    }
}

pub fn ratio(r: Rational64) -> Value {
    Value::String(r.to_string())
}

pub fn print_json(value: &Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(text.as_bytes())
}

/// CSV with a header row; every cell is already formatted.
pub fn print_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!(e.to_string()))?;
    emit(&bytes)
}

/// Write to stdout; a closed pipe downstream is not an error.
fn emit(bytes: &[u8]) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(bytes).and_then(|()| out.flush()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}
