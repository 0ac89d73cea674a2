use std::io;

use gwi_core::{BigRational, CountVector};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::ser::Formatter;

/// Compact JSON with every float written as `{:.16e}` (17 significant
/// digits), so output is byte-stable and round-trips exactly.
#[derive(Debug, Default, Clone, Copy)]
pub struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser).expect("report serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// `"num/den"`, denominator always present.
pub fn rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// A map keyed by states `"a,b,…"` that keeps the numeric state order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMap<V>(pub Vec<(CountVector, V)>);

impl<V: Serialize> Serialize for StateMap<V> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (x, v) in &self.0 {
            map.serialize_entry(&x.to_string(), v)?;
        }
        map.end()
    }
}

pub fn state(x: &CountVector) -> String {
    x.to_string()
}
