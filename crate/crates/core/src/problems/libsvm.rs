//! LIBSVM sparse text format: `label idx:val idx:val ...`, one sample per line.

use std::io::BufRead;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LibsvmError {
    #[error("line {line}: non-numeric token '{token}'")]
    NonNumeric { line: usize, token: String },
    #[error("line {line}: malformed feature '{token}' (expected idx:val)")]
    Malformed { line: usize, token: String },
    #[error("line {line}: indices not increasing ({prev} then {next})")]
    NotIncreasing { line: usize, prev: usize, next: usize },
    #[error("line {line}: feature index must be >= 1")]
    ZeroIndex { line: usize },
    #[error("line {line}: label {label} is not one of +1, -1, 0, 1")]
    BadLabel { line: usize, label: f64 },
    #[error("read error: {0}")]
    Io(String),
}

/// Labeled sparse samples with labels in `{+1, -1}`. Feature indices are
/// stored 1-based as in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetLibsvm {
    pub labels: Vec<f64>,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub num_features: usize,
}

impl DatasetLibsvm {
    pub fn num_samples(&self) -> usize {
        self.labels.len()
    }

    /// `a_i' x` for 0-based dense `x`.
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        self.rows[i].iter().map(|&(j, v)| v * x[j - 1]).sum()
    }

    pub fn row_norm_sq(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, v)| v * v).sum()
    }

    /// Dense rows from a matrix given as samples.
    pub fn from_dense(labels: Vec<f64>, features: &[Vec<f64>]) -> Self {
        let num_features = features.iter().map(Vec::len).max().unwrap_or(0);
        let rows = features
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j + 1, *v))
                    .collect()
            })
            .collect();
        DatasetLibsvm {
            labels,
            rows,
            num_features,
        }
    }
}

fn parse_num(token: &str, line: usize) -> Result<f64, LibsvmError> {
    token.parse::<f64>().map_err(|_| LibsvmError::NonNumeric {
        line,
        token: token.to_string(),
    })
}

/// Parse LIBSVM text. Everything after `#` on a line is ignored, blank
/// lines are skipped, and a 0/1 label set is mapped to -1/+1. The feature
/// count is the largest index seen.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<DatasetLibsvm, LibsvmError> {
    let mut raw_labels = Vec::new();
    let mut rows = Vec::new();
    let mut num_features = 0;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| LibsvmError::Io(e.to_string()))?;
        let content = line.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let label = parse_num(label_tok, lineno)?;
        if ![1.0, -1.0, 0.0].contains(&label) {
            return Err(LibsvmError::BadLabel { line: lineno, label });
        }
        let mut row = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| LibsvmError::Malformed {
                line: lineno,
                token: tok.to_string(),
            })?;
            let idx: usize = idx.parse().map_err(|_| LibsvmError::NonNumeric {
                line: lineno,
                token: idx.to_string(),
            })?;
            if idx == 0 {
                return Err(LibsvmError::ZeroIndex { line: lineno });
            }
            if idx <= prev {
                return Err(LibsvmError::NotIncreasing {
                    line: lineno,
                    prev,
                    next: idx,
                });
            }
            prev = idx;
            row.push((idx, parse_num(val, lineno)?));
        }
        num_features = num_features.max(prev);
        raw_labels.push((lineno, label));
        rows.push(row);
    }
    let zero_one = raw_labels.iter().any(|&(_, l)| l == 0.0);
    let mut labels = Vec::with_capacity(raw_labels.len());
    for (lineno, l) in raw_labels {
        labels.push(match (zero_one, l) {
            (true, 0.0) => -1.0,
            (true, 1.0) => 1.0,
            (true, _) => return Err(LibsvmError::BadLabel { line: lineno, label: l }),
            (false, l) => l,
        });
    }
    Ok(DatasetLibsvm {
        labels,
        rows,
        num_features,
    })
}

pub fn parse_libsvm_str(text: &str) -> Result<DatasetLibsvm, LibsvmError> {
    parse_libsvm(text.as_bytes())
}

/// Two Gaussian classes centered at `+center` (label +1) and `-center`
/// (label -1), where `center` has norm `separation` along a fixed random
/// direction, with isotropic noise of standard deviation `spread`.
pub fn gaussian_blobs(n: usize, d: usize, separation: f64, spread: f64, seed: u64) -> DatasetLibsvm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let dir: Vec<f64> = (0..d).map(|_| std_normal.sample(&mut rng)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    let center: Vec<f64> = dir.iter().map(|v| separation * v / norm).collect();
    let mut labels = Vec::with_capacity(n);
    let mut feats = Vec::with_capacity(n);
    for i in 0..n {
        let b = if i % 2 == 0 { 1.0 } else { -1.0 };
        let row: Vec<f64> = center
            .iter()
            .map(|c| b * c + spread * std_normal.sample(&mut rng))
            .collect();
        labels.push(b);
        feats.push(row);
    }
    let mut ds = DatasetLibsvm::from_dense(labels, &feats);
    ds.num_features = d;
    ds
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sparse_row() {
        let ds = parse_libsvm_str("1 1:0.5 3:-2").unwrap();
        assert_eq!(ds.labels, vec![1.0]);
        assert_eq!(ds.rows[0], vec![(1, 0.5), (3, -2.0)]);
        assert_eq!(ds.num_features, 3);
    }

    #[test]
    fn empty_feature_list_is_legal() {
        let ds = parse_libsvm_str("-1").unwrap();
        assert_eq!(ds.labels, vec![-1.0]);
        assert!(ds.rows[0].is_empty());
    }

    #[test]
    fn non_increasing_indices_report_line() {
        let err = parse_libsvm_str("1 1:1\n+1 2:1 1:1").unwrap_err();
        assert!(err.to_string().contains("indices not increasing"));
        assert!(matches!(err, LibsvmError::NotIncreasing { line: 2, .. }));
    }

    #[test]
    fn zero_one_labels_and_comments() {
        let ds = parse_libsvm_str("# header\n0 2:1 # trailing\n\n1 1:3\n").unwrap();
        assert_eq!(ds.labels, vec![-1.0, 1.0]);
        assert_eq!(ds.num_features, 2);
    }

    #[test]
    fn bad_tokens_are_errors() {
        assert!(matches!(
            parse_libsvm_str("abc 1:2"),
            Err(LibsvmError::NonNumeric { line: 1, .. })
        ));
        assert!(matches!(
            parse_libsvm_str("1 1:x"),
            Err(LibsvmError::NonNumeric { line: 1, .. })
        ));
        assert!(matches!(
            parse_libsvm_str("3 1:1"),
            Err(LibsvmError::BadLabel { line: 1, .. })
        ));
        assert!(matches!(
            parse_libsvm_str("1 0:1"),
            Err(LibsvmError::ZeroIndex { line: 1 })
        ));
    }

    #[test]
    fn blobs_are_balanced_and_reproducible() {
        let a = gaussian_blobs(50, 4, 10.0, 1.0, 7);
        let b = gaussian_blobs(50, 4, 10.0, 1.0, 7);
        assert_eq!(a, b);
        assert_eq!(a.labels.iter().filter(|l| **l > 0.0).count(), 25);
        assert_eq!(a.num_features, 4);
    }
}
