//! Score variables, sign encodings and codebook decoding.

use std::collections::HashMap;

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-view projections `e^[v] = Ω_c^[v] H` and their weighted mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreBlock {
    pub per_view: Vec<Array2<f64>>,
    pub mean: Array2<f64>,
    pub beta: Vec<f64>,
}

/// Uniform view weights `1/V`.
pub fn uniform_beta(views: usize) -> Vec<f64> {
    vec![1.0 / views as f64; views]
}

pub fn validate_beta(beta: &[f64], views: usize) -> Result<()> {
    if beta.len() != views {
        return Err(Error::Config(format!(
            "{} beta weights given for {views} views",
            beta.len()
        )));
    }
    if let Some(b) = beta.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(Error::Config(format!(
            "beta weights must be non-negative, got {b}"
        )));
    }
    let total: f64 = beta.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "beta weights must sum to 1, got {total}"
        )));
    }
    Ok(())
}

/// `centered · h`, one row at a time in a fixed summation order so that the
/// same row always produces the same scores regardless of block shape.
pub fn project(centered: ArrayView2<'_, f64>, h: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if centered.ncols() != h.nrows() {
        return Err(Error::Dimension(format!(
            "kernel block has {} columns, hidden features have {} rows",
            centered.ncols(),
            h.nrows()
        )));
    }
    let (m, q, n) = (centered.nrows(), h.ncols(), h.nrows());
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let row = centered.row(i);
            (0..q)
                .map(|l| (0..n).map(|j| row[j] * h[[j, l]]).sum())
                .collect()
        })
        .collect();
    let mut out = Array2::zeros((m, q));
    for (i, r) in rows.into_iter().enumerate() {
        for (l, v) in r.into_iter().enumerate() {
            out[[i, l]] = v;
        }
    }
    Ok(out)
}

/// Computes `e^[v] = Ω_c^[v] H` for each view and `e_mean = Σ_v β_v e^[v]`.
pub fn scores(omega_c: &[Array2<f64>], h: ArrayView2<'_, f64>, beta: &[f64]) -> Result<ScoreBlock> {
    validate_beta(beta, omega_c.len())?;
    let per_view = omega_c
        .iter()
        .map(|m| project(m.view(), h))
        .collect::<Result<Vec<_>>>()?;
    combine_scores(per_view, beta)
}

pub(crate) fn combine_scores(per_view: Vec<Array2<f64>>, beta: &[f64]) -> Result<ScoreBlock> {
    let shape = per_view
        .first()
        .ok_or_else(|| Error::Config("at least one view is required".into()))?
        .raw_dim();
    let mut mean = Array2::zeros(shape);
    for (e, b) in per_view.iter().zip(beta) {
        if e.raw_dim() != shape {
            return Err(Error::Dimension("per-view scores differ in shape".into()));
        }
        mean.zip_mut_with(e, |m, x| *m += b * x);
    }
    Ok(ScoreBlock {
        per_view,
        mean,
        beta: beta.to_vec(),
    })
}

/// Entry-wise sign with `sign(0) = +1`.
pub fn sign_encode(e: ArrayView2<'_, f64>) -> Array2<i8> {
    e.mapv(|v| if v >= 0.0 || v.is_nan() { 1 } else { -1 })
}

/// The `k` most frequent training sign patterns.
///
/// Sorted by descending count; equal counts are ordered lexicographically
/// with `+1` before `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebook {
    pub codewords: Vec<Vec<i8>>,
    pub counts: Vec<usize>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Code length (`k - 1`).
    pub fn bits(&self) -> usize {
        self.codewords.first().map_or(0, Vec::len)
    }
}

// +1 sorts before -1.
fn lex_key(word: &[i8]) -> Vec<i8> {
    word.iter().map(|&b| -b).collect()
}

pub fn build_codebook(signs: ArrayView2<'_, i8>, k: usize) -> Result<Codebook> {
    if k < 2 {
        return Err(Error::Config(format!("need k >= 2 clusters, got {k}")));
    }
    if signs.nrows() < k {
        return Err(Error::Config(format!(
            "{} samples cannot form {k} clusters",
            signs.nrows()
        )));
    }
    let mut counts: HashMap<Vec<i8>, usize> = HashMap::new();
    for row in signs.axis_iter(Axis(0)) {
        *counts.entry(row.to_vec()).or_insert(0) += 1;
    }
    if counts.len() < k {
        return Err(Error::InsufficientCodewords {
            found: counts.len(),
            needed: k,
        });
    }
    let mut ranked: Vec<(Vec<i8>, usize)> = counts.into_iter().collect();
    ranked.sort_by(|(wa, ca), (wb, cb)| cb.cmp(ca).then_with(|| lex_key(wa).cmp(&lex_key(wb))));
    ranked.truncate(k);
    let (codewords, counts) = ranked.into_iter().unzip();
    Ok(Codebook { codewords, counts })
}

/// Cluster labels with the Hamming distance to the chosen codeword.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub hamming: Vec<usize>,
}

impl ClusterAssignment {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Nearest-codeword decoding; ties go to the lower codeword index.
pub fn assign(signs: ArrayView2<'_, i8>, codebook: &Codebook) -> Result<ClusterAssignment> {
    if codebook.is_empty() {
        return Err(Error::Config("empty codebook".into()));
    }
    if signs.ncols() != codebook.bits() {
        return Err(Error::Dimension(format!(
            "sign vectors have {} bits, codewords have {}",
            signs.ncols(),
            codebook.bits()
        )));
    }
    let (labels, hamming) = signs
        .axis_iter(Axis(0))
        .map(|row| {
            codebook
                .codewords
                .iter()
                .enumerate()
                .map(|(p, c)| (p, row.iter().zip(c).filter(|(a, b)| a != b).count()))
                .min_by_key(|&(p, d)| (d, p))
                .expect("non-empty codebook")
        })
        .unzip();
    Ok(ClusterAssignment { labels, hamming })
}
