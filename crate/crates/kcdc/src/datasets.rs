//! Pair-file ingestion, the Tübingen cause-effect corpus, and benchmark
//! reporting.
//!
//! All numeric inputs share one format: whitespace-separated floating-point
//! columns, one observation per row. The TCEP layout adds `pairmeta.txt`
//! with rows `pair_id cause_first cause_last effect_first effect_last weight`
//! (1-based column indices) next to `pair0001.txt`, `pair0002.txt`, ...

use crate::score::Decision;
use crate::synth::PairDataset;
use crate::{KcdcError, Result};
use ndarray::Array2;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Multivariate pairs of TCEP v1.0, excluded to match scalar-only protocols.
pub const TCEP_MULTIVARIATE_PAIRS: [u32; 5] = [52, 53, 54, 55, 71];

/// One row of `pairmeta.txt`. Column indices are 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcepMetaRow {
    pub pair_id: u32,
    pub cause_first: usize,
    pub cause_last: usize,
    pub effect_first: usize,
    pub effect_last: usize,
    pub weight: f64,
}

/// Read a whitespace-separated numeric table. Every row must have the same
/// number of columns.
pub fn read_pair_file(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path).map_err(|e| KcdcError::io(path.display().to_string(), e))?;
    parse_numeric_table(&text, &path.display().to_string())
}

fn parse_numeric_table(text: &str, path: &str) -> Result<Array2<f64>> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0usize;
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| KcdcError::MalformedRow {
                path: path.to_string(),
                line: idx + 1,
                reason: format!("`{tok}` is not a number"),
            })?;
            values.push(v);
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(KcdcError::MalformedRow {
                    path: path.to_string(),
                    line: idx + 1,
                    reason: format!("expected {c} columns, found {count}"),
                })
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| KcdcError::MalformedMeta {
        path: path.to_string(),
        reason: "file contains no data rows".into(),
    })?;
    Ok(Array2::from_shape_vec((rows, cols), values).expect("row lengths verified"))
}

/// Write a numeric table in the same format `read_pair_file` accepts.
/// Values round-trip bit-exactly.
pub fn write_pair_file(path: &Path, x: &Array2<f64>, y: &Array2<f64>) -> Result<()> {
    assert_eq!(x.nrows(), y.nrows(), "row counts must match");
    let mut out = String::new();
    for i in 0..x.nrows() {
        let mut first = true;
        for v in x.row(i).iter().chain(y.row(i).iter()) {
            if !first {
                out.push(' ');
            }
            // {:?} prints the shortest representation that parses back exactly
            write!(out, "{v:?}").expect("string write cannot fail");
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| KcdcError::io(path.display().to_string(), e))
}

/// Parse `pairmeta.txt` content.
pub fn parse_pairmeta(text: &str, path: &str) -> Result<Vec<TcepMetaRow>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 6 {
            return Err(KcdcError::MalformedRow {
                path: path.to_string(),
                line: idx + 1,
                reason: format!("expected 6 fields, found {}", toks.len()),
            });
        }
        let field = |i: usize, what: &str| -> Result<f64> {
            toks[i].parse().map_err(|_| KcdcError::MalformedRow {
                path: path.to_string(),
                line: idx + 1,
                reason: format!("bad {what} `{}`", toks[i]),
            })
        };
        let row = TcepMetaRow {
            pair_id: field(0, "pair id")? as u32,
            cause_first: field(1, "cause first column")? as usize,
            cause_last: field(2, "cause last column")? as usize,
            effect_first: field(3, "effect first column")? as usize,
            effect_last: field(4, "effect last column")? as usize,
            weight: field(5, "weight")?,
        };
        if row.weight < 0.0 {
            return Err(KcdcError::MalformedRow {
                path: path.to_string(),
                line: idx + 1,
                reason: format!("negative weight {}", row.weight),
            });
        }
        if row.cause_first == 0
            || row.effect_first == 0
            || row.cause_last < row.cause_first
            || row.effect_last < row.effect_first
        {
            return Err(KcdcError::MalformedRow {
                path: path.to_string(),
                line: idx + 1,
                reason: "invalid column range".into(),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

fn slice_columns(data: &Array2<f64>, first: usize, last: usize) -> Array2<f64> {
    data.slice(ndarray::s![.., (first - 1)..last]).to_owned()
}

/// Load the TCEP corpus from `directory`. Column ranges come from the meta
/// file; truth is XtoY by the cause/effect column convention. Files with more
/// columns than the meta references are accepted with a warning on stderr.
pub fn load_tcep(directory: &Path, exclude_multivariate: bool) -> Result<Vec<PairDataset>> {
    let meta_path = directory.join("pairmeta.txt");
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| {
        KcdcError::io(
            meta_path.display().to_string(),
            std::io::Error::new(
                e.kind(),
                format!(
                    "{e}; download the Tübingen cause-effect pairs (v1.0) into {} \
                     from https://webdav.tuebingen.mpg.de/cause-effect/",
                    directory.display()
                ),
            ),
        )
    })?;
    let meta = parse_pairmeta(&meta_text, &meta_path.display().to_string())?;

    let mut pairs = Vec::new();
    for row in meta {
        if exclude_multivariate && TCEP_MULTIVARIATE_PAIRS.contains(&row.pair_id) {
            continue;
        }
        let file = directory.join(format!("pair{:04}.txt", row.pair_id));
        if !file.exists() {
            eprintln!(
                "warning: {} listed in pairmeta.txt but missing; pair skipped",
                file.display()
            );
            continue;
        }
        let data = read_pair_file(&file)?;
        let cols = data.ncols();
        let max_used = row.cause_last.max(row.effect_last);
        if max_used > cols {
            return Err(KcdcError::ColumnRangeOutOfBounds {
                pair_id: row.pair_id,
                columns: cols,
                cause_first: row.cause_first,
                cause_last: row.cause_last,
                effect_first: row.effect_first,
                effect_last: row.effect_last,
            });
        }
        if ranges_overlap(&row) {
            return Err(KcdcError::MalformedMeta {
                path: meta_path.display().to_string(),
                reason: format!("pair {}: cause and effect column ranges overlap", row.pair_id),
            });
        }
        if max_used < cols {
            eprintln!(
                "warning: pair {} has {} columns, meta references only {}; extras ignored",
                row.pair_id, cols, max_used
            );
        }
        pairs.push(PairDataset {
            x: slice_columns(&data, row.cause_first, row.cause_last),
            y: slice_columns(&data, row.effect_first, row.effect_last),
            truth: Some(Decision::XtoY),
            weight: row.weight,
            id: format!("pair{:04}", row.pair_id),
        });
    }
    Ok(pairs)
}

fn ranges_overlap(row: &TcepMetaRow) -> bool {
    row.cause_first <= row.effect_last && row.effect_first <= row.cause_last
}

/// Weighted accuracy over decided pairs; undecided pairs earn zero credit and
/// are reported separately. Returns (accuracy, undecided_rate).
pub fn weighted_accuracy(results: &[(Decision, Decision, f64)]) -> Result<(f64, f64)> {
    if results.is_empty() {
        return Err(KcdcError::EmptyDecisions);
    }
    let total: f64 = results.iter().map(|(_, _, w)| w).sum();
    if total <= 0.0 {
        return Err(KcdcError::ZeroTotalWeight);
    }
    let correct: f64 = results
        .iter()
        .filter(|(d, t, _)| d == t && *d != Decision::Undecided)
        .map(|(_, _, w)| w)
        .sum();
    let undecided: f64 = results
        .iter()
        .filter(|(d, _, _)| *d == Decision::Undecided)
        .map(|(_, _, w)| w)
        .sum();
    // `+ 0.0` normalizes the -0.0 that summing an empty iterator produces
    Ok(((correct + 0.0) / total, (undecided + 0.0) / total))
}

/// Turn a time series into a lagged cause-effect pair: x holds rows
/// 1..T-lag, y rows 1+lag..T, truth XtoY (time flows forward).
pub fn lag_pairs(series: &Array2<f64>, lag: usize) -> Result<PairDataset> {
    let t = series.nrows();
    assert!(lag >= 1, "lag must be positive");
    if t <= lag {
        return Err(KcdcError::LagTooLarge { len: t, lag });
    }
    let x = series.slice(ndarray::s![..t - lag, ..]).to_owned();
    let y = series.slice(ndarray::s![lag.., ..]).to_owned();
    Ok(PairDataset {
        x,
        y,
        truth: Some(Decision::XtoY),
        weight: 1.0,
        id: format!("lag{lag}"),
    })
}

/// One scored pair inside a benchmark report.
#[derive(Debug, Clone, Serialize)]
pub struct PairOutcome {
    pub id: String,
    pub decision: Decision,
    pub truth: Option<Decision>,
    pub confidence: f64,
    pub weight: f64,
}

/// Aggregated benchmark result.
#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkReport {
    pub per_pair: Vec<PairOutcome>,
    pub weighted_accuracy: f64,
    pub undecided_rate: f64,
    pub config_description: String,
}

impl BenchmarkReport {
    pub fn from_outcomes(per_pair: Vec<PairOutcome>, config_description: String) -> Result<Self> {
        let triples: Vec<(Decision, Decision, f64)> = per_pair
            .iter()
            .map(|o| (o.decision, o.truth.unwrap_or(Decision::Undecided), o.weight))
            .collect();
        let (weighted_accuracy, undecided_rate) = weighted_accuracy(&triples)?;
        Ok(BenchmarkReport {
            per_pair,
            weighted_accuracy,
            undecided_rate,
            config_description,
        })
    }
}
