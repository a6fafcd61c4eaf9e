//! Float formatting shared by the JSON and CSV writers.
//!
//! Every float is written with 17 significant digits so `f64` values survive a
//! text round trip bit for bit.

use std::io::{self, Write};

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::Result;

/// Compact JSON formatter writing floats as `{:.16e}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

/// Serialize with [`Sig17`] float formatting.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Square matrix as CSV: a header row of node coordinates, then one row per node.
pub fn write_matrix_csv<W: Write>(mut w: W, nodes: &[f64], m: &DMatrix<f64>) -> io::Result<()> {
    write_row(&mut w, nodes.iter().copied())?;
    for r in 0..m.nrows() {
        write_row(&mut w, m.row(r).iter().copied())?;
    }
    w.flush()
}

pub(crate) fn write_row<W: Write>(w: &mut W, row: impl Iterator<Item = f64>) -> io::Result<()> {
    let line: Vec<String> = row.map(fmt_f64).collect();
    writeln!(w, "{}", line.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(to_json_string(&[1.5f64]).unwrap(), "[1.5000000000000000e0]");
    }

    #[test]
    fn matrix_csv_layout() {
        let mut out = Vec::new();
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        write_matrix_csv(&mut out, &[0.0, 1.0], &m).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1.0000000000000000e0,2.0"));
    }

    proptest! {
        #[test]
        fn json_round_trip_is_lossless(xs in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 0..50)) {
            let text = to_json_string(&xs).unwrap();
            let back: Vec<f64> = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.len(), xs.len());
            for (a, b) in back.iter().zip(&xs) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
