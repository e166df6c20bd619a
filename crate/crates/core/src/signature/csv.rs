//! Signature table text format: a `# gauss-signature nv=<nv> layout=uv`
//! header followed by `label,v0,...` rows (label -1 when unknown).

use std::path::Path;

use super::GaussSignature;
use crate::error::{Error, Result};

/// Rows of a signature file.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureTable {
    pub nv: usize,
    pub rows: Vec<(i64, GaussSignature)>,
}

/// Formats like C's `%.9g`.
pub fn format_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

pub fn signature_csv_string(nv: usize, rows: &[(i64, &GaussSignature)]) -> String {
    let mut s = format!("# gauss-signature nv={nv} layout=uv\n");
    for (label, sig) in rows {
        s.push_str(&label.to_string());
        for v in &sig.values {
            s.push(',');
            s.push_str(&format_g9(*v));
        }
        s.push('\n');
    }
    s
}

pub fn write_signature_csv(path: impl AsRef<Path>, nv: usize, rows: &[(i64, &GaussSignature)]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, signature_csv_string(nv, rows)).map_err(|e| Error::io(path, e))
}

pub fn read_signature_csv(path: impl AsRef<Path>) -> Result<SignatureTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_signature_csv(&text, &path.display().to_string())
}

pub fn parse_signature_csv(text: &str, name: &str) -> Result<SignatureTable> {
    let err = |line: usize, msg: String| Error::Format {
        path: name.to_string(),
        location: format!("line {line}"),
        message: msg,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty signature file".into()))?;
    let nv = header
        .strip_prefix("# gauss-signature nv=")
        .and_then(|r| r.strip_suffix(" layout=uv"))
        .and_then(|n| n.parse::<usize>().ok())
        .ok_or_else(|| err(1, format!("bad header {header:?}")))?;
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label: i64 = fields
            .next()
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| err(i + 1, "bad label".into()))?;
        let values: Vec<f64> = fields
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(i + 1, "bad value".into()))?;
        if values.len() != nv {
            return Err(err(i + 1, format!("{} values, header says nv={nv}", values.len())));
        }
        rows.push((label, GaussSignature { nv, values }));
    }
    Ok(SignatureTable { nv, rows })
}
