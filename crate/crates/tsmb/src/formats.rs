//! Dataset file formats: the `.ts` sequence format and labeled CSV.
//!
//! Both formats describe the same thing — one labeled univariate series per
//! line — and load into the same [`Dataset`]. Parsing is strict: missing
//! values, non-finite numbers, empty labels and series shorter than two
//! observations are errors that name the offending line, never silently
//! repaired.

use std::fs;
use std::path::Path;

use tsmb_core::dataset::{Dataset, LabeledSeries};

/// Errors raised while reading or writing dataset files.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    /// Filesystem-level failure.
    #[error("{path}: {source}")]
    Io {
        /// The file involved.
        path: String,
        /// The underlying error.
        #[source]
        source: std::io::Error,
    },
    /// A file contained no series.
    #[error("{path}: no series found")]
    Empty {
        /// The file involved.
        path: String,
    },
    /// A line could not be parsed.
    #[error("{path}:{line}: {message}")]
    Parse {
        /// The file involved.
        path: String,
        /// 1-based line number.
        line: usize,
        /// What went wrong.
        message: String,
    },
}

/// Supported dataset encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// The `.ts` format: `@`-prefixed header lines, then after `@data` one
    /// `v1,v2,...:label` line per series.
    Ts,
    /// CSV with the label in the first field: `label,v1,v2,...`.
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ts" => Ok(Format::Ts),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?} (expected ts or csv)")),
        }
    }
}

impl Format {
    /// Guesses the format from a path's extension; defaults to CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("ts") => Format::Ts,
            _ => Format::Csv,
        }
    }
}

fn parse_value(token: &str, path: &str, line: usize) -> Result<f64, FormatError> {
    let token = token.trim();
    if token == "?" {
        return Err(FormatError::Parse {
            path: path.into(),
            line,
            message: "missing values ('?') are not supported".into(),
        });
    }
    let value: f64 = token.parse().map_err(|_| FormatError::Parse {
        path: path.into(),
        line,
        message: format!("not a number: {token:?}"),
    })?;
    if !value.is_finite() {
        return Err(FormatError::Parse {
            path: path.into(),
            line,
            message: format!("non-finite value: {token:?}"),
        });
    }
    Ok(value)
}

fn build_series(
    label: &str,
    values: Vec<f64>,
    index: usize,
    path: &str,
    line: usize,
) -> Result<LabeledSeries, FormatError> {
    if label.is_empty() {
        return Err(FormatError::Parse { path: path.into(), line, message: "empty label".into() });
    }
    LabeledSeries::at_index(label, values, index).map_err(|e| FormatError::Parse {
        path: path.into(),
        line,
        message: e.to_string(),
    })
}

/// Parses `.ts` text: lines before `@data` are headers (`@...`), comments
/// (`#...`) or blank; after it, every non-blank line is `v1,v2,...:label`.
/// Multivariate lines (more than one `:`) are rejected.
pub fn parse_ts(text: &str, path: &str) -> Result<Vec<LabeledSeries>, FormatError> {
    let mut in_data = false;
    let mut series = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !in_data {
            if let Some(rest) = trimmed.strip_prefix('@') {
                let keyword = rest.split_whitespace().next().unwrap_or("");
                if keyword.eq_ignore_ascii_case("data") {
                    in_data = true;
                }
                continue;
            }
            return Err(FormatError::Parse {
                path: path.into(),
                line,
                message: "expected a header line ('@...') or '@data' before series data".into(),
            });
        }
        let Some((values_part, label)) = trimmed.rsplit_once(':') else {
            return Err(FormatError::Parse {
                path: path.into(),
                line,
                message: "expected 'v1,v2,...:label'".into(),
            });
        };
        if values_part.contains(':') {
            return Err(FormatError::Parse {
                path: path.into(),
                line,
                message: "multivariate series (more than one ':') are not supported".into(),
            });
        }
        let values = values_part
            .split(',')
            .map(|t| parse_value(t, path, line))
            .collect::<Result<Vec<f64>, _>>()?;
        series.push(build_series(label.trim(), values, series.len(), path, line)?);
    }
    if !in_data {
        return Err(FormatError::Parse {
            path: path.into(),
            line: text.lines().count().max(1),
            message: "no '@data' section found".into(),
        });
    }
    if series.is_empty() {
        return Err(FormatError::Empty { path: path.into() });
    }
    Ok(series)
}

/// Parses labeled CSV: `label,v1,v2,...` per record. Quoted labels are fine;
/// whitespace around fields is ignored.
pub fn parse_csv(text: &str, path: &str) -> Result<Vec<LabeledSeries>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut series = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| FormatError::Parse {
            path: path.into(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let label = record.get(0).unwrap_or("");
        let values = record
            .iter()
            .skip(1)
            .map(|t| parse_value(t, path, line))
            .collect::<Result<Vec<f64>, _>>()?;
        series.push(build_series(label, values, series.len(), path, line)?);
    }
    if series.is_empty() {
        return Err(FormatError::Empty { path: path.into() });
    }
    Ok(series)
}

/// Serializes series as labeled CSV, the inverse of [`parse_csv`]: values are
/// written with enough digits to reparse to the identical floats.
pub fn write_csv(series: &[LabeledSeries]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for s in series {
        let mut record = Vec::with_capacity(1 + s.len());
        record.push(s.label().to_string());
        record.extend(s.values().iter().map(f64::to_string));
        writer.write_record(&record).expect("writing to memory cannot fail");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory cannot fail"))
        .expect("csv output is UTF-8")
}

fn read_to_string(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path)
        .map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

/// Parses one file in the given (or extension-guessed) format.
pub fn load_series(path: &Path, format: Option<Format>) -> Result<Vec<LabeledSeries>, FormatError> {
    let text = read_to_string(path)?;
    let name = path.display().to_string();
    match format.unwrap_or_else(|| Format::from_path(path)) {
        Format::Ts => parse_ts(&text, &name),
        Format::Csv => parse_csv(&text, &name),
    }
}

/// Loads a train/test pair into a [`Dataset`].
///
/// The name defaults to the train file's stem with a trailing `_TRAIN`
/// stripped (so `Plane_TRAIN.ts` becomes `Plane`).
pub fn load_dataset(
    train_path: &Path,
    test_path: &Path,
    format: Option<Format>,
    name: Option<&str>,
) -> Result<Dataset, FormatError> {
    let train = load_series(train_path, format)?;
    let test = load_series(test_path, format)?;
    let derived;
    let name = match name {
        Some(n) => n,
        None => {
            let stem = train_path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
            derived = stem
                .strip_suffix("_TRAIN")
                .or_else(|| stem.strip_suffix("_train"))
                .unwrap_or(stem)
                .to_string();
            &derived
        }
    };
    Dataset::new(name, train, test).map_err(|e| FormatError::Parse {
        path: train_path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })
}
