//! Fused multi-view eigenproblem.
//!
//! The centered view kernels are combined into one `N × N` operator
//!
//! ```text
//! A = ρ Σ_v κ_v Ω_c^[v] + (1 - ρ) ⊙_v Ω_c^[v]
//! ```
//!
//! and the hidden features are the leading eigenvectors of
//! `(1/η) diag(dsum)^{-1} A`, with `dsum = Σ_v d^[v]`. The generalized problem
//! is solved through the symmetric matrix
//! `S = diag(dsum)^{-1/2} A diag(dsum)^{-1/2}`; with `u` a unit eigenvector
//! of `S`, `h = diag(dsum)^{-1/2} u` satisfies `hᵀ diag(dsum) h = 1`.

use faer::{Mat, Side};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::DegreeMatrix;

/// Matrix/tensor mixing and per-view weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    /// Weight of the additive (matrix) term; `1 - rho` goes to the Hadamard term.
    pub rho: f64,
    /// Per-view weights of the additive term.
    pub kappa: Vec<f64>,
    /// Global scale; only rescales eigenvalues.
    #[serde(default = "default_eta")]
    pub eta: f64,
}

fn default_eta() -> f64 {
    1.0
}

impl FusionConfig {
    pub fn new(rho: f64, kappa: Vec<f64>) -> Self {
        FusionConfig {
            rho,
            kappa,
            eta: 1.0,
        }
    }

    /// `κ = 1` for every view.
    pub fn uniform(rho: f64, views: usize) -> Self {
        Self::new(rho, vec![1.0; views])
    }

    pub fn validate(&self, views: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Config(format!(
                "rho must lie in [0, 1], got {}",
                self.rho
            )));
        }
        if self.kappa.len() != views {
            return Err(Error::Config(format!(
                "{} kappa weights given for {views} views",
                self.kappa.len()
            )));
        }
        if let Some(k) = self.kappa.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
            return Err(Error::Config(format!(
                "kappa weights must be positive, got {k}"
            )));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::Config(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        Ok(())
    }
}

/// `A = ρ Σ_v κ_v Ω_c^[v] + (1 - ρ) ⊙_v Ω_c^[v]`.
pub fn fuse_kernels(omega_c: &[Array2<f64>], cfg: &FusionConfig) -> Result<Array2<f64>> {
    let first = omega_c
        .first()
        .ok_or_else(|| Error::Config("at least one view is required".into()))?;
    cfg.validate(omega_c.len())?;
    let n = first.nrows();
    for (v, m) in omega_c.iter().enumerate() {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension(format!(
                "view {v} kernel is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    let rho = cfg.rho;
    Ok(Array2::from_shape_fn((n, n), |(i, j)| {
        let mut sum = 0.0;
        let mut prod = 1.0;
        for (m, k) in omega_c.iter().zip(&cfg.kappa) {
            let x = m[[i, j]];
            sum += k * x;
            prod *= x;
        }
        rho * sum + (1.0 - rho) * prod
    }))
}

/// Element-wise sum of per-view degree vectors.
pub fn degree_sum(degrees: &[DegreeMatrix]) -> Result<Array1<f64>> {
    let first = degrees
        .first()
        .ok_or_else(|| Error::Config("at least one view is required".into()))?;
    let mut dsum = first.values().to_owned();
    for d in &degrees[1..] {
        if d.len() != dsum.len() {
            return Err(Error::Dimension("degree vectors differ in length".into()));
        }
        dsum += &d.values();
    }
    Ok(dsum)
}

/// Leading eigenpairs of the fused problem.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    /// `N × q` hidden features, one column per component.
    pub h: Array2<f64>,
    /// Descending eigenvalues.
    pub lambdas: Array1<f64>,
    pub dsum: Array1<f64>,
}

impl EigenSolution {
    pub fn components(&self) -> usize {
        self.h.ncols()
    }

    /// Keeps only the first `q` components.
    pub fn truncated(&self, q: usize) -> EigenSolution {
        let q = q.min(self.components());
        EigenSolution {
            h: self.h.slice(ndarray::s![.., ..q]).to_owned(),
            lambdas: self.lambdas.slice(ndarray::s![..q]).to_owned(),
            dsum: self.dsum.clone(),
        }
    }
}

struct SymmetricEigen {
    values: Vec<f64>,
    vectors: Mat<f64>,
}

// Ascending eigenvalues, orthonormal eigenvectors. Only the lower triangle
// of `a` is read.
fn symmetric_eigen(a: ArrayView2<'_, f64>) -> Result<SymmetricEigen> {
    let n = a.nrows();
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[[i, j]]);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Internal(format!("symmetric eigensolver failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let values = (0..n).map(|i| s[i]).collect();
    Ok(SymmetricEigen {
        values,
        vectors: evd.U().to_owned(),
    })
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub fn spectral_norm(a: ArrayView2<'_, f64>) -> Result<f64> {
    check_square(&a)?;
    let eig = symmetric_eigen(a)?;
    Ok(eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

fn check_square(a: &ArrayView2<'_, f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

// Descending order; near-equal eigenvalues keep the solver's index order.
fn descending_order(values: &[f64], tol: f64) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && (values[order[j]] - values[order[j + 1]]).abs() <= tol {
            j += 1;
        }
        order[i..=j].sort_unstable();
        i = j + 1;
    }
    order
}

/// Computes the top-`q` eigenpairs of `(1/η) diag(dsum)^{-1} A`.
///
/// Eigenvectors are normalized to `hᵀ diag(dsum) h = 1` and signed so that
/// the entry of largest magnitude is positive.
pub fn solve_latent(
    a: ArrayView2<'_, f64>,
    dsum: ArrayView1<'_, f64>,
    q: usize,
    eta: f64,
) -> Result<EigenSolution> {
    check_square(&a)?;
    let n = a.nrows();
    if dsum.len() != n {
        return Err(Error::Dimension(format!(
            "degree sum has length {}, operator is {n}x{n}",
            dsum.len()
        )));
    }
    if q == 0 || q > n {
        return Err(Error::Config(format!(
            "requested {q} components from a size-{n} problem"
        )));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::Config(format!("eta must be positive, got {eta}")));
    }
    if let Some((index, &value)) = dsum
        .iter()
        .enumerate()
        .find(|(_, v)| v.is_nan() || **v <= 0.0)
    {
        return Err(Error::NonPositiveDegree { index, value });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSpectrum(
            "fused operator has non-finite entries".into(),
        ));
    }
    if a.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateSpectrum(
            "fused operator is identically zero".into(),
        ));
    }

    let isq = dsum.mapv(|d| 1.0 / d.sqrt());
    // isq_i * isq_j is commutative, so S stays exactly symmetric.
    let s = Array2::from_shape_fn((n, n), |(i, j)| a[[i, j]] * (isq[i] * isq[j]));
    let eig = symmetric_eigen(s.view())?;

    let top = eig.values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let scale = if top.abs() > 0.0 {
        top.abs()
    } else {
        eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    };
    let order = descending_order(&eig.values, 1e-12 * scale);

    let mut h = Array2::zeros((n, q));
    let mut lambdas = Array1::zeros(q);
    for (l, &idx) in order.iter().take(q).enumerate() {
        lambdas[l] = eig.values[idx] / eta;
        let mut col: Array1<f64> = (0..n).map(|i| eig.vectors[(i, idx)] * isq[i]).collect();
        let pivot = col
            .iter()
            .enumerate()
            .fold((0, 0.0_f64), |(bi, bv), (i, v)| {
                if v.abs() > bv {
                    (i, v.abs())
                } else {
                    (bi, bv)
                }
            })
            .0;
        if col[pivot] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
        h.column_mut(l).assign(&col);
    }
    Ok(EigenSolution {
        h,
        lambdas,
        dsum: dsum.to_owned(),
    })
}

/// Dual-substituted objective
/// `J = Σ_l [ -(1/2η) hᵀ A h + (λ/2) hᵀ (Σ_v D^[v]) h ]`,
/// which vanishes at every exact eigenpair.
pub fn objective_value(
    solution: &EigenSolution,
    omega_c: &[Array2<f64>],
    degrees: &[DegreeMatrix],
    cfg: &FusionConfig,
) -> Result<f64> {
    let a = fuse_kernels(omega_c, cfg)?;
    let dsum = degree_sum(degrees)?;
    objective_with_operator(solution, a.view(), dsum.view(), cfg.eta)
}

/// Same as [`objective_value`] with the fused operator already formed.
pub fn objective_with_operator(
    solution: &EigenSolution,
    a: ArrayView2<'_, f64>,
    dsum: ArrayView1<'_, f64>,
    eta: f64,
) -> Result<f64> {
    let n = a.nrows();
    if solution.h.nrows() != n || dsum.len() != n || solution.lambdas.len() != solution.h.ncols() {
        return Err(Error::Dimension(
            "objective inputs disagree in shape".into(),
        ));
    }
    let mut j = 0.0;
    for (h, &lambda) in solution.h.axis_iter(Axis(1)).zip(solution.lambdas.iter()) {
        let hah = h.dot(&a.dot(&h));
        let hdh: f64 = h.iter().zip(dsum.iter()).map(|(x, d)| x * x * d).sum();
        j += -hah / (2.0 * eta) + 0.5 * lambda * hdh;
    }
    Ok(j)
}

/// Largest number of entries a materialized feature tensor may have.
pub const TENSOR_GUARD: usize = 1_000_000;

/// Gram matrix `⟨Ψ_i, Ψ_j⟩` of the rank-1 feature tensors
/// `Ψ_i = φ_c^[1](x_i) ⊗ … ⊗ φ_c^[V](x_i)`, built by materializing every
/// tensor. Feature maps are mean-centered first. Test oracle only.
pub fn materialized_tensor_gram(feature_maps: &[Array2<f64>]) -> Result<Array2<f64>> {
    let centered = centered_features(feature_maps)?;
    let size = centered
        .iter()
        .try_fold(1usize, |acc, f| acc.checked_mul(f.ncols()))
        .filter(|s| *s <= TENSOR_GUARD)
        .ok_or_else(|| Error::Resource(format!("feature tensor exceeds {TENSOR_GUARD} entries")))?;
    let n = centered[0].nrows();
    let tensors: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut t = vec![1.0];
            for f in &centered {
                let row = f.row(i);
                let mut next = Vec::with_capacity(t.len() * row.len());
                for a in &t {
                    for b in row.iter() {
                        next.push(a * b);
                    }
                }
                t = next;
            }
            debug_assert_eq!(t.len(), size);
            t
        })
        .collect();
    Ok(Array2::from_shape_fn((n, n), |(i, j)| {
        tensors[i].iter().zip(&tensors[j]).map(|(a, b)| a * b).sum()
    }))
}

fn centered_features(feature_maps: &[Array2<f64>]) -> Result<Vec<Array2<f64>>> {
    let first = feature_maps
        .first()
        .ok_or_else(|| Error::Config("at least one feature map is required".into()))?;
    let n = first.nrows();
    if n == 0 || feature_maps.iter().any(|f| f.nrows() != n) {
        return Err(Error::Dimension(
            "feature maps must share a non-zero row count".into(),
        ));
    }
    Ok(feature_maps
        .iter()
        .map(|f| {
            let mean = f.mean_axis(Axis(0)).expect("non-empty");
            f - &mean
        })
        .collect())
}

/// Checks the tensor/Hadamard duality: the inner products of the
/// materialized outer-product tensors must equal the element-wise product
/// of the per-view centered linear Gram matrices within `1e-12`.
pub fn hadamard_equals_tensor_oracle(feature_maps: &[Array2<f64>]) -> Result<bool> {
    let tensor = materialized_tensor_gram(feature_maps)?;
    let centered = centered_features(feature_maps)?;
    let n = tensor.nrows();
    let mut hadamard = Array2::<f64>::ones((n, n));
    for f in &centered {
        hadamard *= &f.dot(&f.t());
    }
    Ok(tensor
        .iter()
        .zip(hadamard.iter())
        .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0)))
}
