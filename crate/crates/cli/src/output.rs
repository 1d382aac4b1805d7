//! CSV vectors (`index,re,im`) and number formatting.

use std::path::{Path, PathBuf};

use tsampling::C64;

use crate::CliError;

/// 17 significant digits, enough to read back the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn cnum(z: C64) -> String {
    format!("{} {} {}i", num(z.re), if z.im.is_sign_negative() { '-' } else { '+' }, num(z.im.abs()))
}

pub fn write_vector(path: &Path, entries: impl IntoIterator<Item = (i64, C64)>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "re", "im"])?;
    for (i, z) in entries {
        w.write_record([i.to_string(), num(z.re), num(z.im)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vector(path: &Path) -> Result<Vec<(i64, C64)>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    if header.iter().map(str::trim).ne(["index", "re", "im"]) {
        return Err(CliError::Usage(format!("{}: header must be index,re,im", path.display())));
    }
    let bad = |line: usize| CliError::Usage(format!("{}: malformed row {line}", path.display()));
    let mut out = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != 3 {
            return Err(bad(line + 2));
        }
        let index = record[0].trim().parse::<i64>().map_err(|_| bad(line + 2))?;
        let re = record[1].trim().parse::<f64>().map_err(|_| bad(line + 2))?;
        let im = record[2].trim().parse::<f64>().map_err(|_| bad(line + 2))?;
        out.push((index, C64::new(re, im)));
    }
    Ok(out)
}

/// Values of a CSV vector whose indices run `0..n` in order.
pub fn read_dense(path: &Path) -> Result<Vec<C64>, CliError> {
    let entries = read_vector(path)?;
    if entries.iter().enumerate().any(|(i, (k, _))| *k != i as i64) {
        return Err(CliError::Usage(format!("{}: indices must run 0, 1, 2, …", path.display())));
    }
    Ok(entries.into_iter().map(|(_, z)| z).collect())
}

/// `<stem><suffix>.csv`, where the stem is `out` without a `.csv` extension.
pub fn derived_path(out: &Path, suffix: &str) -> PathBuf {
    let s = out.to_string_lossy();
    let stem = s.strip_suffix(".csv").unwrap_or(&s);
    PathBuf::from(format!("{stem}{suffix}.csv"))
}
