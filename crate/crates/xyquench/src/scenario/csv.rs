use std::io::{self, Write};

use super::GridResult;

/// Shortest representation of `v` rounded to 12 significant digits; `-0` prints as `0`.
pub fn format_value(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let r: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        return "0".into();
    }
    if (1e-5..1e16).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Writes `measure,x,t,value` rows with `\n` line endings.
pub fn write_csv<W: Write>(result: &GridResult, mut out: W) -> io::Result<()> {
    out.write_all(b"measure,x,t,value\n")?;
    for r in &result.rows {
        writeln!(out, "{},{},{},{}", r.measure, r.x, format_value(r.t), format_value(r.value))?;
    }
    out.flush()
}
