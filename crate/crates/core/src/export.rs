//! CSV writers shared by the path, clock, scenario and ledger exports.
//!
//! Numbers are written in scientific notation with 17 significant digits so
//! every `f64` round-trips exactly; infinities are written as `inf`.

use std::io::{self, Write};

pub fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

/// Writes `header` followed by one row per index, each column drawn from the
/// matching slice.
pub fn write_columns<W: Write>(mut out: W, header: &[&str], columns: &[&[f64]]) -> io::Result<()> {
    debug_assert_eq!(header.len(), columns.len());
    let rows = columns.first().map_or(0, |c| c.len());
    debug_assert!(columns.iter().all(|c| c.len() == rows));
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for i in 0..rows {
        line.clear();
        for (j, col) in columns.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&fmt_num(col[i]));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
