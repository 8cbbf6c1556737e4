//! Model archive.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! offset 0   8 bytes  magic "TMVKSCR\0"
//! offset 8   u64      metadata length L
//! offset 16  L bytes  UTF-8 JSON metadata
//! then                arrays, each row-major f64, in metadata order
//! ```
//!
//! The metadata carries `format_version`, the hyperparameters, codebooks,
//! subset indices and an `arrays` list of `{name, rows, cols}` entries. The
//! array section must be exactly as long as the declared shapes require.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::encoding::Codebook;
use crate::error::{Error, Result};
use crate::kernels::{CenteringMode, CenteringStats, DegreeMatrix, KernelSpec};
use crate::model::{TmvkscrModel, TrainedView};
use crate::spectral::FusionConfig;

pub const MAGIC: &[u8; 8] = b"TMVKSCR\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ArrayEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ViewMeta {
    name: String,
    kernel: KernelSpec,
    grand_mean: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Metadata {
    format_version: u32,
    k: usize,
    centering: CenteringMode,
    fusion: FusionConfig,
    beta: Vec<f64>,
    views: Vec<ViewMeta>,
    codebook: Codebook,
    view_codebooks: Vec<Option<Codebook>>,
    subset_indices: Option<Vec<usize>>,
    arrays: Vec<ArrayEntry>,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

fn entry(name: String, a: &Array2<f64>) -> ArrayEntry {
    ArrayEntry {
        name,
        rows: a.nrows(),
        cols: a.ncols(),
    }
}

fn column(a: &Array1<f64>) -> Array2<f64> {
    a.clone().insert_axis(ndarray::Axis(1))
}

/// Serializes a model into the archive format.
pub fn write_model<W: Write>(model: &TmvkscrModel, mut w: W) -> Result<()> {
    let mut arrays: Vec<(String, Array2<f64>)> = vec![
        ("h".into(), model.h.clone()),
        ("lambdas".into(), column(&model.lambdas)),
    ];
    for (v, tv) in model.views.iter().enumerate() {
        arrays.push((format!("view{v}.inputs"), tv.inputs.clone()));
        arrays.push((format!("view{v}.weights"), column(&tv.stats.weights)));
        arrays.push((format!("view{v}.row_means"), column(&tv.stats.row_means)));
        arrays.push((
            format!("view{v}.degrees"),
            column(&tv.degrees.values().to_owned()),
        ));
    }
    let meta = Metadata {
        format_version: FORMAT_VERSION,
        k: model.k,
        centering: model.centering,
        fusion: model.fusion.clone(),
        beta: model.beta.clone(),
        views: model
            .views
            .iter()
            .zip(&model.view_names)
            .map(|(tv, name)| ViewMeta {
                name: name.clone(),
                kernel: tv.kernel,
                grand_mean: tv.stats.grand_mean,
            })
            .collect(),
        codebook: model.codebook.clone(),
        view_codebooks: model.view_codebooks.clone(),
        subset_indices: model.subset_indices.clone(),
        arrays: arrays.iter().map(|(n, a)| entry(n.clone(), a)).collect(),
    };
    let json = serde_json::to_vec(&meta).map_err(|e| Error::Internal(e.to_string()))?;
    let io = |e| Error::Internal(format!("write failed: {e}"));
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&(json.len() as u64).to_le_bytes())
        .map_err(io)?;
    w.write_all(&json).map_err(io)?;
    let mut buf = Vec::new();
    for (_, a) in &arrays {
        for v in a.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf).map_err(io)?;
    Ok(())
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptModel(msg.into())
}

/// Parses an archive produced by [`write_model`].
pub fn read_model<R: Read>(mut r: R) -> Result<TmvkscrModel> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| corrupt(format!("read failed: {e}")))?;
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(corrupt("missing archive header"));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let json_end = 16usize
        .checked_add(len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| corrupt("metadata extends past end of file"))?;
    let json = &bytes[16..json_end];
    let probe: VersionProbe =
        serde_json::from_slice(json).map_err(|e| corrupt(format!("bad metadata: {e}")))?;
    if probe.format_version != FORMAT_VERSION {
        return Err(Error::FormatVersion {
            found: probe.format_version,
            expected: FORMAT_VERSION,
        });
    }
    let meta: Metadata =
        serde_json::from_slice(json).map_err(|e| corrupt(format!("bad metadata: {e}")))?;

    let payload = &bytes[json_end..];
    let needed: usize = meta.arrays.iter().map(|a| a.rows * a.cols * 8).sum();
    if payload.len() < needed {
        return Err(corrupt(format!(
            "array section truncated: {} of {needed} bytes",
            payload.len()
        )));
    }
    if payload.len() > needed {
        return Err(corrupt(format!(
            "{} trailing bytes after array section",
            payload.len() - needed
        )));
    }
    let mut offset = 0;
    let mut arrays = std::collections::HashMap::new();
    for a in &meta.arrays {
        let count = a.rows * a.cols;
        let values: Vec<f64> = payload[offset..offset + count * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        offset += count * 8;
        let arr =
            Array2::from_shape_vec((a.rows, a.cols), values).map_err(|e| corrupt(e.to_string()))?;
        arrays.insert(a.name.clone(), arr);
    }
    let mut take = |name: &str| {
        arrays
            .remove(name)
            .ok_or_else(|| corrupt(format!("missing array `{name}`")))
    };
    let vector = |a: Array2<f64>, name: &str| -> Result<Array1<f64>> {
        if a.ncols() != 1 {
            return Err(corrupt(format!("`{name}` must be a column")));
        }
        Ok(a.column(0).to_owned())
    };

    let h = take("h")?;
    let lambdas = vector(take("lambdas")?, "lambdas")?;
    let n = h.nrows();
    if meta.k < 2 || h.ncols() != meta.k - 1 || lambdas.len() < meta.k - 1 {
        return Err(corrupt("hidden features disagree with k"));
    }
    let mut views = Vec::with_capacity(meta.views.len());
    let mut names = Vec::with_capacity(meta.views.len());
    for (v, vm) in meta.views.into_iter().enumerate() {
        let inputs = take(&format!("view{v}.inputs"))?;
        let weights = vector(take(&format!("view{v}.weights"))?, "weights")?;
        let row_means = vector(take(&format!("view{v}.row_means"))?, "row_means")?;
        let degrees = vector(take(&format!("view{v}.degrees"))?, "degrees")?;
        if [
            inputs.nrows(),
            weights.len(),
            row_means.len(),
            degrees.len(),
        ]
        .iter()
        .any(|&len| len != n)
        {
            return Err(corrupt(format!(
                "view {v} arrays disagree with {n} training samples"
            )));
        }
        views.push(TrainedView {
            kernel: vm.kernel,
            inputs,
            stats: CenteringStats {
                weights,
                row_means,
                grand_mean: vm.grand_mean,
            },
            degrees: DegreeMatrix::from_vec(degrees).map_err(|e| corrupt(e.to_string()))?,
        });
        names.push(vm.name);
    }
    if views.is_empty()
        || meta.beta.len() != views.len()
        || meta.view_codebooks.len() != views.len()
    {
        return Err(corrupt("view count disagrees across metadata fields"));
    }
    Ok(TmvkscrModel {
        views,
        view_names: names,
        centering: meta.centering,
        fusion: meta.fusion,
        k: meta.k,
        beta: meta.beta,
        h,
        lambdas,
        codebook: meta.codebook,
        view_codebooks: meta.view_codebooks,
        subset_indices: meta.subset_indices,
    })
}

pub fn save_model(model: &TmvkscrModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_model(model, &mut buf)?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TmvkscrModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_model(bytes.as_slice())
}
