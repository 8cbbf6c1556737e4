//! Two-cluster Gaussian-mixture benchmarks with two-dimensional views.
//!
//! For each sample the cluster is drawn first (`uniform < prior_0` selects
//! cluster 0), then every view draws one normal pair `z` and emits
//! `mean + L z` with `L` the lower Cholesky factor of that view's cluster
//! covariance. All views share the sample's cluster.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::rng::SeededRng;
use super::ViewDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    /// Three views, balanced clusters.
    Synth1,
    /// Two views, 80/20 imbalanced clusters.
    Synth2,
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthKind::Synth1 => "synth1",
            SynthKind::Synth2 => "synth2",
        })
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "synth1" => Ok(SynthKind::Synth1),
            "synth2" => Ok(SynthKind::Synth2),
            other => Err(Error::Config(format!("unknown dataset `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub n: usize,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(kind: SynthKind, n: usize, seed: u64) -> Self {
        SynthSpec { kind, n, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

const fn comp(mean: [f64; 2], cov: [[f64; 2]; 2]) -> MixtureComponent {
    MixtureComponent { mean, cov }
}

// [view][cluster]
const SYNTH1: [[MixtureComponent; 2]; 3] = [
    [
        comp([1.0, 1.0], [[1.0, 0.5], [0.5, 1.5]]),
        comp([3.0, 4.0], [[0.3, 0.2], [0.2, 0.6]]),
    ],
    [
        comp([1.0, 2.0], [[1.0, -0.2], [-0.2, 1.0]]),
        comp([2.0, 2.0], [[0.6, 0.1], [0.1, 0.5]]),
    ],
    [
        comp([1.0, 1.0], [[1.2, 0.2], [0.2, 1.0]]),
        comp([3.0, 3.0], [[1.0, 0.4], [0.4, 0.7]]),
    ],
];

const SYNTH2: [[MixtureComponent; 2]; 2] = [
    [
        comp([1.0, 1.0], [[0.1, 0.0], [0.0, 0.3]]),
        comp([2.0, 2.0], [[1.5, 0.4], [0.4, 1.2]]),
    ],
    [
        comp([2.0, 2.0], [[0.3, 0.0], [0.0, 0.6]]),
        comp([1.0, 1.0], [[1.0, 0.5], [0.5, 0.9]]),
    ],
];

impl SynthKind {
    /// Mixture components indexed `[view][cluster]`.
    pub fn components(&self) -> Vec<[MixtureComponent; 2]> {
        match self {
            SynthKind::Synth1 => SYNTH1.to_vec(),
            SynthKind::Synth2 => SYNTH2.to_vec(),
        }
    }

    /// Prior probability of each cluster.
    pub fn priors(&self) -> [f64; 2] {
        match self {
            SynthKind::Synth1 => [0.5, 0.5],
            SynthKind::Synth2 => [0.8, 0.2],
        }
    }
}

fn cholesky(c: &[[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let l00 = c[0][0].sqrt();
    if l00.is_nan() || l00 <= 0.0 {
        return Err(Error::Internal(
            "covariance is not positive definite".into(),
        ));
    }
    let l10 = c[1][0] / l00;
    let rem = c[1][1] - l10 * l10;
    if rem.is_nan() || rem <= 0.0 {
        return Err(Error::Internal(
            "covariance is not positive definite".into(),
        ));
    }
    Ok([[l00, 0.0], [l10, rem.sqrt()]])
}

pub fn generate_synth(spec: &SynthSpec) -> Result<ViewDataset> {
    if spec.n < 2 {
        return Err(Error::Config(format!(
            "need at least 2 samples, got {}",
            spec.n
        )));
    }
    let comps = spec.kind.components();
    let factors = comps
        .iter()
        .map(|view| Ok([cholesky(&view[0].cov)?, cholesky(&view[1].cov)?]))
        .collect::<Result<Vec<_>>>()?;
    let prior0 = spec.kind.priors()[0];

    let mut rng = SeededRng::new(spec.seed);
    let mut views: Vec<Array2<f64>> = vec![Array2::zeros((spec.n, 2)); comps.len()];
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let c = usize::from(rng.uniform() >= prior0);
        labels.push(c);
        for (v, x) in views.iter_mut().enumerate() {
            let (z0, z1) = rng.normal_pair();
            let l = &factors[v][c];
            let m = comps[v][c].mean;
            x[[i, 0]] = m[0] + l[0][0] * z0;
            x[[i, 1]] = m[1] + (l[1][0] * z0 + l[1][1] * z1);
        }
    }
    ViewDataset::new(views, Some(labels))
}
