//! Result documents, number formatting, and emission.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::error::{io, CliResult};

/// Formats `x` with 17 significant digits: positional notation for
/// exponents in `[-5, 17)`, scientific otherwise. Round-trips exactly.
pub fn fmt17(x: f64) -> String {
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
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').map_or(sci.len(), |i| i + 1)..].parse().unwrap_or(0);
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        sci
    }
}

/// Pretty JSON with every float written by [`fmt17`].
struct Json17<'a>(PrettyFormatter<'a>);

impl Formatter for Json17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt17(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` as pretty JSON with 17-digit floats and a trailing
/// newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> CliResult<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Json17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| io(format!("cannot serialize result: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| io(e.to_string()))
}

pub fn to_value<T: Serialize>(value: &T) -> CliResult<Value> {
    serde_json::to_value(value).map_err(|e| io(format!("cannot serialize result: {e}")))
}

/// A rectangular table with named columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        self.rows.push(row);
    }

    /// Key/value table from the scalar fields of a JSON object; nested
    /// values are written as compact JSON.
    pub fn from_object(v: &Value) -> Self {
        let mut t = Self::new(&["name", "value"]);
        if let Value::Object(map) = v {
            for (k, x) in map {
                t.push(vec![Value::String(k.clone()), x.clone()]);
            }
        }
        t
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Column-oriented JSON: `{column: [values...]}`, in column order.
    pub fn to_columns(&self) -> Value {
        let mut map = serde_json::Map::new();
        for (j, c) in self.columns.iter().enumerate() {
            map.insert(
                c.clone(),
                Value::Array(self.rows.iter().map(|r| r[j].clone()).collect()),
            );
        }
        Value::Object(map)
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => u.to_string(),
            (None, Some(i), _) => i.to_string(),
            (_, _, Some(f)) => fmt17(f),
            _ => n.to_string(),
        },
        Value::String(s) => quote(s),
        other => quote(&other.to_string()),
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.5, 1.0 / 3.0, 2f64.powf(-2f64.sqrt()), 1e-7, 123456.789, 6.02e23, -0.1] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            let digits: String = s
                .split('e')
                .next()
                .unwrap()
                .chars()
                .filter(|c| c.is_ascii_digit())
                .collect();
            assert_eq!(digits.trim_start_matches('0').len(), 17, "{s}");
        }
        assert_eq!(fmt17(0.5), "0.50000000000000000");
        assert_eq!(fmt17(1.0), "1.0000000000000000");
        assert_eq!(fmt17(1e-7), "9.9999999999999995e-8");
    }

    #[test]
    fn json_uses_the_fixed_format() {
        let s = to_json(&serde_json::json!({"a": 0.25, "n": 3, "x": [1.5]})).unwrap();
        assert!(s.contains("\"a\": 0.25000000000000000"));
        assert!(s.contains("\"n\": 3"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"], 0.25);
    }

    #[test]
    fn csv_quotes_and_formats() {
        let mut t = Table::new(&["k", "v"]);
        t.push(vec![Value::String("a,b".into()), num(0.5)]);
        t.push(vec![Value::String("n".into()), Value::from(7u64)]);
        assert_eq!(t.to_csv(), "k,v\n\"a,b\",0.50000000000000000\nn,7\n");
    }
}
