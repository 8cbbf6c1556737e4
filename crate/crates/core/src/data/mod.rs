//! Multi-view datasets, synthetic generators, CSV ingestion and model
//! persistence.

mod archive;
mod csv_io;
mod rng;
mod synth;

use ndarray::{Array2, Axis};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use archive::{load_model, read_model, save_model, write_model, FORMAT_VERSION, MAGIC};
pub use csv_io::{
    load_csv_views, read_labels_csv, read_matrix_csv, write_labels_csv, write_matrix_csv,
};
pub use rng::{sample_subset, SeededRng};
pub use synth::{generate_synth, MixtureComponent, SynthKind, SynthSpec};

/// `V` views of the same `N` samples, with optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewDataset {
    views: Vec<Array2<f64>>,
    labels: Option<Vec<usize>>,
    names: Vec<String>,
}

impl ViewDataset {
    pub fn new(views: Vec<Array2<f64>>, labels: Option<Vec<usize>>) -> Result<Self> {
        let names = (1..=views.len()).map(|v| format!("view{v}")).collect();
        Self::with_names(views, labels, names)
    }

    pub fn with_names(
        views: Vec<Array2<f64>>,
        labels: Option<Vec<usize>>,
        names: Vec<String>,
    ) -> Result<Self> {
        let first = views
            .first()
            .ok_or_else(|| Error::Config("a dataset needs at least one view".into()))?;
        let n = first.nrows();
        for (v, x) in views.iter().enumerate() {
            if x.nrows() != n {
                return Err(Error::Dimension(format!(
                    "view {} has {} samples, view 1 has {n}",
                    v + 1,
                    x.nrows()
                )));
            }
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::Dimension(format!(
                    "{} labels given for {n} samples",
                    l.len()
                )));
            }
        }
        if names.len() != views.len() {
            return Err(Error::Config(format!(
                "{} view names given for {} views",
                names.len(),
                views.len()
            )));
        }
        Ok(ViewDataset {
            views,
            labels,
            names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.views[0].nrows()
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn views(&self) -> &[Array2<f64>] {
        &self.views
    }

    pub fn view(&self, v: usize) -> &Array2<f64> {
        &self.views[v]
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Rows `indices` of every view (and of the labels), in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<ViewDataset> {
        let n = self.n_samples();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::Dimension(format!(
                "row {bad} out of range for {n} samples"
            )));
        }
        Ok(ViewDataset {
            views: self
                .views
                .iter()
                .map(|x| x.select(Axis(0), indices))
                .collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            names: self.names.clone(),
        })
    }

    /// Reorders the views.
    pub fn permute_views(&self, order: &[usize]) -> Result<ViewDataset> {
        let mut seen = vec![false; self.n_views()];
        for &v in order {
            if v >= seen.len() || std::mem::replace(&mut seen[v], true) {
                return Err(Error::Config(format!(
                    "{order:?} is not a view permutation"
                )));
            }
        }
        if order.len() != self.n_views() {
            return Err(Error::Config(format!(
                "{order:?} is not a view permutation"
            )));
        }
        Ok(ViewDataset {
            views: order.iter().map(|&v| self.views[v].clone()).collect(),
            labels: self.labels.clone(),
            names: order.iter().map(|&v| self.names[v].clone()).collect(),
        })
    }

    /// SHA-256 (hex) over every view as row-major little-endian f64, in view
    /// order, followed by the labels as little-endian u64 when present.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        for x in &self.views {
            for v in x.iter() {
                hasher.update(v.to_le_bytes());
            }
        }
        if let Some(labels) = &self.labels {
            for &l in labels {
                hasher.update((l as u64).to_le_bytes());
            }
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
