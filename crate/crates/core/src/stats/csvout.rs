use std::path::Path;

use crate::error::{io_err, Error, Result};
use crate::fsutil::write_atomic;

/// Significant digits of every number written to a report CSV.
pub const SIG_DIGITS: usize = 6;

/// Formats `x` with [`SIG_DIGITS`] significant digits, in plain decimal
/// notation unless the magnitude is extreme.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // Let the scientific formatter do the rounding, then read back the
    // exponent so values such as 9.999999 land on the right precision.
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let exp: i32 = sci.split_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if !(-5..15).contains(&exp) {
        return sci;
    }
    let rounded: f64 = sci.parse().unwrap_or(x);
    let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
    format!("{rounded:.decimals$}")
}

/// Writes a header and rows of pre-formatted cells atomically.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io {
        context: format!("buffer {}", path.display()),
        source: e.into_error(),
    })?;
    write_atomic(path, &bytes)
}

/// Reads a `key,mse` CSV such as the one written by a compare run or by an
/// external evaluator.
pub fn read_mse_csv(path: &Path) -> Result<Vec<(String, f64)>> {
    let file = std::fs::File::open(path).map_err(io_err(format!("open {}", path.display())))?;
    let mut r = csv::Reader::from_reader(file);
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::Decode {
            file: path.to_path_buf(),
            reason: format!("missing column {name:?}"),
        })
    };
    let (k, m) = (col("key")?, col("mse")?);
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |why: String| Error::Decode { file: path.to_path_buf(), reason: format!("row {}: {why}", line + 1) };
        let key = rec.get(k).ok_or_else(|| bad("missing key".into()))?.to_string();
        let value: f64 = rec
            .get(m)
            .ok_or_else(|| bad("missing mse".into()))?
            .trim()
            .parse()
            .map_err(|e| bad(format!("{e}")))?;
        out.push((key, value));
    }
    Ok(out)
}
