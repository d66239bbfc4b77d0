//! Deterministic writers: every float carries 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

struct SigFormatter;

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SigFormatter);
    value.serialize(&mut ser).expect("serializing to memory");
    buf.push(b'\n');
    buf
}

/// A CSV table preceded by one `#` comment line.
pub struct Table {
    pub comment: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::F(v) => fmt_f64(*v),
            Cell::I(v) => v.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

pub fn to_csv(table: &Table) -> Vec<u8> {
    let mut buf = format!("# {}\n", table.comment).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&table.header).expect("writing to memory");
        for row in &table.rows {
            w.write_record(row.iter().map(Cell::text)).expect("writing to memory");
        }
        w.flush().expect("writing to memory");
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(24.0), "2.4000000000000000e1");
        let json = String::from_utf8(to_json(&serde_json::json!({"x": [1.5, -2.0], "n": 3}))).unwrap();
        assert_eq!(json, "{\"n\":3,\"x\":[1.5000000000000000e0,-2.0000000000000000e0]}\n");
        let back: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["x"][0].as_f64(), Some(1.5));
    }

    #[test]
    fn csv_quoting() {
        let t = Table {
            comment: "kind=test".into(),
            header: vec!["name".into(), "value".into()],
            rows: vec![vec![Cell::S("a,b".into()), Cell::F(1.0)]],
        };
        let text = String::from_utf8(to_csv(&t)).unwrap();
        assert_eq!(text, "# kind=test\nname,value\n\"a,b\",1.0000000000000000e0\n");
    }
}
