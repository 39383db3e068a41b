use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use ratioci::PairedSample;
use serde::Serialize;

use crate::error::CliError;

/// Numeric columns of a headed CSV file, by name, in file order.
pub struct Table {
    pub names: Vec<String>,
    pub columns: HashMap<String, Vec<f64>>,
}

impl Table {
    pub fn rows(&self) -> usize {
        self.names.first().map_or(0, |n| self.columns[n].len())
    }

    pub fn column(&self, name: &str, path: &Path) -> Result<&[f64], CliError> {
        self.columns
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| CliError::input(path, format!("no column named `{name}` (have {})", self.names.join(", "))))
    }
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(path, e))?;
    let names: Vec<String> = rdr.headers().map_err(|e| CliError::input(path, e))?.iter().map(str::to_string).collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(CliError::input(path, "missing header row"));
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::input(path, e))?;
        let line = i + 2;
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| CliError::input(path, format!("line {line}: `{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(CliError::input(path, format!("line {line}: non-finite value `{field}`")));
            }
            columns[j].push(v);
        }
    }
    let mut map = HashMap::new();
    for (name, col) in names.iter().zip(columns) {
        if map.insert(name.clone(), col).is_some() {
            return Err(CliError::input(path, format!("duplicate column `{name}`")));
        }
    }
    Ok(Table { names, columns: map })
}

/// Paired data from a CSV file with `x` and `y` columns.
pub fn read_pairs(path: &Path) -> Result<PairedSample, CliError> {
    let table = read_table(path)?;
    let xs = table.column("x", path)?.to_vec();
    let ys = table.column("y", path)?.to_vec();
    if xs.len() < 2 {
        return Err(CliError::input(path, format!("need at least 2 data rows, found {}", xs.len())));
    }
    PairedSample::new(xs, ys).map_err(|e| CliError::input(path, e))
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    s.push('\n');
    Ok(s)
}

pub fn emit(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(p) => File::create(p)?.write_all(text.as_bytes())?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
