//! Per-step diagnostics as CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

pub const SERIES_HEADER: &str = "step,t,energy,eps_c,eps_d,cg_iters,residual";

/// One row of the series file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesRow {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    pub eps_c: f64,
    pub eps_d: f64,
    pub cg_iters: usize,
    pub residual: f64,
}

/// Appends rows to a CSV file, flushing every `flush_every` rows.
pub struct SeriesWriter<W: Write = BufWriter<File>> {
    out: W,
    flush_every: usize,
    pending: usize,
    rows: usize,
}

impl SeriesWriter {
    pub fn create(path: &Path, flush_every: usize) -> Result<Self> {
        Self::new(BufWriter::new(File::create(path)?), flush_every)
    }
}

impl<W: Write> SeriesWriter<W> {
    pub fn new(mut out: W, flush_every: usize) -> Result<Self> {
        writeln!(out, "{SERIES_HEADER}")?;
        Ok(Self { out, flush_every: flush_every.max(1), pending: 0, rows: 0 })
    }

    pub fn log_step(&mut self, r: &SeriesRow) -> Result<()> {
        writeln!(
            self.out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            r.step, r.t, r.energy, r.eps_c, r.eps_d, r.cg_iters, r.residual
        )?;
        self.rows += 1;
        self.pending += 1;
        if self.pending >= self.flush_every {
            self.out.flush()?;
            self.pending = 0;
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Parses a series file written by [`SeriesWriter`].
pub fn read_series(text: &str) -> Result<Vec<SeriesRow>> {
    use crate::error::Error;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == SERIES_HEADER => {}
        _ => return Err(Error::Parse { path: "<series>".into(), line: 1, msg: "unexpected header".into() }),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let bad = |msg: String| Error::Parse { path: "<series>".into(), line: i + 1, msg };
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 7 {
                return Err(bad(format!("expected 7 fields, found {}", f.len())));
            }
            let u = |s: &str| s.parse::<usize>().map_err(|e| bad(e.to_string()));
            let x = |s: &str| s.parse::<f64>().map_err(|e| bad(e.to_string()));
            Ok(SeriesRow {
                step: u(f[0])?,
                t: x(f[1])?,
                energy: x(f[2])?,
                eps_c: x(f[3])?,
                eps_d: x(f[4])?,
                cg_iters: u(f[5])?,
                residual: x(f[6])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_then_rows() {
        let mut w = SeriesWriter::new(Vec::new(), 10).unwrap();
        w.log_step(&SeriesRow { step: 0, t: 0.0, energy: 1.0, eps_c: 0.0, eps_d: 0.0, cg_iters: 0, residual: 0.0 }).unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("step,t,energy,eps_c,eps_d,cg_iters,residual\n0,0.0000000000000000e0,"));
    }

    #[test]
    fn thousand_rows_round_trip_bit_exactly() {
        let mut w = SeriesWriter::new(Vec::new(), 7).unwrap();
        let rows: Vec<SeriesRow> = (0..1000)
            .map(|i| {
                let t = i as f64 * 0.1;
                SeriesRow { step: i, t, energy: (t + 0.3).sin() / 3.0, eps_c: 1e-17 * t, eps_d: t.exp(), cg_iters: i % 13, residual: 1.0 / (t + 7.0) }
            })
            .collect();
        rows.iter().for_each(|r| w.log_step(r).unwrap());
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        assert_eq!(text.lines().count(), 1001);
        assert_eq!(read_series(&text).unwrap(), rows);
    }
}
