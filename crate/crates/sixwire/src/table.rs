//! Tabular output. Every numeric column name ends in a unit suffix
//! (`_MHz`, `_eV`, `_1` for dimensionless, ...).

use std::io::Write;
use std::path::Path;

use anyhow::{ensure, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Shortest round-trip representation; plain notation for moderate
/// magnitudes, exponent form otherwise.
pub fn format_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-3..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(headers: &[S]) -> Self {
        Table { headers: headers.iter().map(|h| h.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.headers.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[k] {
                    Cell::Num(x) => *x,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.headers)?;
        for row in &self.rows {
            ensure!(row.len() == self.headers.len(), "row width {} != header width {}", row.len(), self.headers.len());
            out.write_record(row.iter().map(|c| match c {
                Cell::Num(x) => format_num(*x),
                Cell::Text(s) => s.clone(),
            }))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        match path {
            Some(p) => {
                let f = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
                self.write_csv(std::io::BufWriter::new(f))
            }
            None => self.write_csv(std::io::stdout().lock()),
        }
    }
}

/// Reads a two-column numeric CSV with a header row.
pub fn read_xy_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        ensure!(rec.len() >= 2, "line {}: expected two columns", k + 2);
        let x: f64 = rec[0].trim().parse().with_context(|| format!("line {}: bad number `{}`", k + 2, &rec[0]))?;
        let y: f64 = rec[1].trim().parse().with_context(|| format!("line {}: bad number `{}`", k + 2, &rec[1]))?;
        out.push((x, y));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -2.5, 1.6e-10, 3.135e6, 1e7, 123.456789012345] {
            assert_eq!(format_num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_num(1.6e-10), "1.6e-10");
        assert_eq!(format_num(2.5), "2.5");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["name", "f_MHz"]);
        t.push(vec!["a".into(), 3.5.into()]);
        assert_eq!(t.to_csv_string(), "name,f_MHz\na,3.5\n");
        assert_eq!(t.column("f_MHz"), Some(vec![3.5]));
    }
}
