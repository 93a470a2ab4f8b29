//! JSON serialization with 17 significant digits on every float, so numeric
//! output round-trips exactly and identical runs diff byte-for-byte.

use mmot_core::cost::Cost;
use serde_json::ser::Formatter;
use std::io;

struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json_string(value: &serde_json::Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    serde::Serialize::serialize(value, &mut ser).expect("in-memory serialization");
    String::from_utf8(out).expect("serializer emits UTF-8")
}

/// Extended-real values serialize as a number or the string `"inf"`.
pub fn value_or_inf(cost: Cost) -> serde_json::Value {
    match cost.finite() {
        Some(v) => serde_json::json!(v),
        None => serde_json::json!("inf"),
    }
}
