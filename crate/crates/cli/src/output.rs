use std::path::{Path, PathBuf};

use serde_json::{Map, Value as Json};

use crate::CliError;

/// Result table of one run; every row has one cell per header entry.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header");
        self.rows.push(row);
    }

    pub fn push_reals(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| num(x)).collect());
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

/// Shortest round-trip decimal; scientific notation outside [1e-4, 1e15).
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Everything a subcommand produces besides its configuration.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub table: Table,
    /// Scalar results copied into the sidecar.
    pub summary: Map<String, Json>,
    /// Text printed on stdout.
    pub text: String,
}

impl Report {
    pub fn put(&mut self, key: &str, value: impl Into<Json>) {
        let v = value.into();
        let v = match v {
            Json::Number(ref n) if n.as_f64().is_some_and(|x| !x.is_finite()) => Json::Null,
            v => v,
        };
        self.summary.insert(key.to_string(), v);
    }
}

pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Writes `<name>.csv` and the flat `<name>.json` sidecar into `dir`.
pub fn write(dir: &Path, name: &str, report: &Report, config: Map<String, Json>, meta: Map<String, Json>) -> Result<Written, CliError> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{name}.csv"));
    let json = dir.join(format!("{name}.json"));
    std::fs::write(&csv, report.table.to_csv()?)?;
    let mut side = meta;
    for (k, v) in config.into_iter().chain(report.summary.clone()) {
        let previous = side.insert(k.clone(), v);
        debug_assert!(previous.is_none(), "sidecar key '{k}' written twice");
    }
    std::fs::write(&json, serde_json::to_string_pretty(&Json::Object(side))? + "\n")?;
    Ok(Written { csv, json })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_with_a_dot() {
        for x in [0.0, 1.0, -0.25, 0.998123456789, 1e-7, 3.5e20, 12345.678] {
            let s = num(x);
            assert!(!s.contains(','));
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1e-7), "1e-7");
        assert_eq!(num(0.5), "0.5");
    }

    #[test]
    fn csv_quotes_fields_and_ends_rows_with_crlf() {
        let mut t = Table::new(["name", "statement"]);
        t.push(vec!["a".into(), "x >> 1, y".into()]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(s, "name,statement\r\na,\"x >> 1, y\"\r\n");
    }
}
