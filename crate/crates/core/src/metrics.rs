//! External clustering validation: contingency tables, ARI and NMI.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Cross-tabulation of two labelings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contingency {
    /// `table[r][c]` counts samples with the r-th distinct label of `a` and
    /// the c-th distinct label of `b` (labels in ascending order).
    pub table: Vec<Vec<usize>>,
    pub row_sums: Vec<usize>,
    pub col_sums: Vec<usize>,
    pub n: usize,
}

impl Contingency {
    pub fn new(a: &[usize], b: &[usize]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Dimension(format!(
                "labelings have lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        let index = |labels: &[usize]| -> BTreeMap<usize, usize> {
            let mut m = BTreeMap::new();
            for &l in labels {
                m.entry(l).or_insert(0);
            }
            for (i, v) in m.values_mut().enumerate() {
                *v = i;
            }
            m
        };
        let (ra, rb) = (index(a), index(b));
        let mut table = vec![vec![0; rb.len()]; ra.len()];
        for (x, y) in a.iter().zip(b) {
            table[ra[x]][rb[y]] += 1;
        }
        let row_sums = table.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..rb.len())
            .map(|c| table.iter().map(|r| r[c]).sum())
            .collect();
        Ok(Contingency {
            table,
            row_sums,
            col_sums,
            n: a.len(),
        })
    }
}

fn comb2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

fn check_len(a: &[usize], b: &[usize]) -> Result<Contingency> {
    let c = Contingency::new(a, b)?;
    if c.n < 2 {
        return Err(Error::Config(format!(
            "need at least 2 samples, got {}",
            c.n
        )));
    }
    Ok(c)
}

/// Hubert–Arabie adjusted Rand index.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    let c = check_len(a, b)?;
    let index: f64 = c.table.iter().flatten().map(|&x| comb2(x)).sum();
    let sum_a: f64 = c.row_sums.iter().map(|&x| comb2(x)).sum();
    let sum_b: f64 = c.col_sums.iter().map(|&x| comb2(x)).sum();
    let expected = sum_a * sum_b / comb2(c.n);
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        // Both partitions trivial (all singletons or a single cluster each).
        return Ok(if index == max { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information, `I(A;B) / sqrt(H(A) H(B))`, in nats.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    let c = check_len(a, b)?;
    let n = c.n as f64;
    let ha = entropy(&c.row_sums, n);
    let hb = entropy(&c.col_sums, n);
    if ha == 0.0 || hb == 0.0 {
        return Ok(if ha == hb { 1.0 } else { 0.0 });
    }
    let mut mi = 0.0;
    for (r, row) in c.table.iter().enumerate() {
        for (col, &nij) in row.iter().enumerate() {
            if nij == 0 {
                continue;
            }
            let nij = nij as f64;
            mi += nij / n * (n * nij / (c.row_sums[r] as f64 * c.col_sums[col] as f64)).ln();
        }
    }
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}
