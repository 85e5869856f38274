//! CSV output for iteration traces.
//!
//! Header: `iter,wall_seconds,rel_err_ls,rel_err_G,grad_norm,step_norm`.
//! Optional columns are left empty when the reference was not supplied.
//! Floats use Rust's shortest round-trip formatting, so files are
//! reproducible bit for bit.

use std::io::Write;
use std::path::Path;

use dihs_core::solver::IterationTrace;

use crate::{Error, Result};

pub const TRACE_HEADER: [&str; 6] = [
    "iter",
    "wall_seconds",
    "rel_err_ls",
    "rel_err_G",
    "grad_norm",
    "step_norm",
];

pub fn format_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trace_to<W: Write>(w: W, trace: &IterationTrace) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        out.write_record([
            r.iter.to_string(),
            r.wall_seconds.to_string(),
            format_opt(r.rel_err_ls),
            format_opt(r.rel_err_g),
            r.grad_norm.to_string(),
            r.step_norm.to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

pub fn write_trace(path: impl AsRef<Path>, trace: &IterationTrace) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace_to(file, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dihs_core::solver::IterationRecord;

    #[test]
    fn missing_columns_are_empty() {
        let trace = IterationTrace {
            records: vec![IterationRecord {
                iter: 1,
                wall_seconds: 0.0,
                rel_err_ls: Some(0.5),
                rel_err_g: None,
                grad_norm: 2.0,
                step_norm: 0.25,
            }],
        };
        let mut buf = Vec::new();
        write_trace_to(&mut buf, &trace).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "iter,wall_seconds,rel_err_ls,rel_err_G,grad_norm,step_norm\n1,0,0.5,,2,0.25\n"
        );
    }
}
