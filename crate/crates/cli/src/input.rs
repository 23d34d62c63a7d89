//! Reading observations: one value per line, or a single-column CSV whose
//! first line may be a header. Blank lines and lines starting with `#` are
//! skipped.

use std::fs;
use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use betagof::beta_model::Sample;
use betagof::datasets;

pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut seen_line = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first_line = !seen_line;
        seen_line = true;
        let mut fields = line.split(',').map(str::trim);
        let field = fields.next().unwrap_or("");
        if fields.any(|f| !f.is_empty()) {
            bail!("line {}: expected a single column, got '{line}'", lineno + 1);
        }
        let field = field.trim_matches('"');
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => bail!("line {}: '{field}' is not a finite number", lineno + 1),
            Err(_) if first_line => continue,
            Err(_) => bail!("line {}: '{field}' is not a number", lineno + 1),
        }
    }
    Ok(values)
}

/// Values from a file (`-` for standard input).
pub fn read_file(path: &Path) -> Result<Vec<f64>> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .context("reading standard input")?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    parse_values(&text).with_context(|| format!("in {}", path.display()))
}

/// A sample and a label for reports.
pub fn load(data: Option<&str>, file: Option<&Path>) -> Result<(Sample, String)> {
    match (data, file) {
        (Some(name), None) => {
            let s = datasets::by_name(name).with_context(|| {
                format!(
                    "unknown dataset '{name}' (available: {})",
                    datasets::NAMES.join(", ")
                )
            })?;
            Ok((s, name.to_string()))
        }
        (None, Some(path)) => {
            let values = read_file(path)?;
            Ok((Sample::new(values)?, path.display().to_string()))
        }
        _ => bail!("give exactly one of --data NAME or --file PATH"),
    }
}
