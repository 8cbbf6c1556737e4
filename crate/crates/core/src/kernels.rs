//! Kernel functions, Gram matrices, degree matrices and feature-space centering.
//!
//! Centering is expressed through a weight vector `s` (non-negative, summing
//! to one). The centered Gram is `(I - 1 s^T) Ω (I - s 1^T)`, which is the
//! Gram matrix of the feature maps after subtracting the weighted mean
//! `Σ_i s_i φ(x_i)`. Two weightings are supported: the plain mean
//! (`s = 1/N`) and the degree-weighted mean (`s ∝ D^{-1} 1`) used by kernel
//! spectral clustering.
//!
//! With `r = s^T Ω` and `c = s^T Ω s`, entries are evaluated as
//! `Ω_ij - (r_i + r_j) + c`. Test rows use the same expression with
//! `t_a = Ω_test[a, :] · s` in place of `r_i`, so a training row pushed
//! through the test path reproduces its centered row bit for bit.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel function configuration for one view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `exp(-‖x - y‖² / σ²)`.
    Rbf { sigma2: f64 },
    /// `x · y`.
    Linear,
    /// Cosine-normalized polynomial `(x·y + t)^d / sqrt((x·x + t)^d (y·y + t)^d)`.
    NormalizedPoly { degree: u32, t: f64 },
}

impl KernelSpec {
    pub fn rbf(sigma2: f64) -> Self {
        KernelSpec::Rbf { sigma2 }
    }

    pub fn normalized_poly(degree: u32, t: f64) -> Self {
        KernelSpec::NormalizedPoly { degree, t }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { sigma2 } if !(sigma2.is_finite() && sigma2 > 0.0) => Err(
                Error::Config(format!("RBF sigma2 must be finite and > 0, got {sigma2}")),
            ),
            KernelSpec::NormalizedPoly { degree: 0, .. } => Err(Error::Config(
                "normalized polynomial degree must be >= 1".into(),
            )),
            KernelSpec::NormalizedPoly { t, .. } if !(t.is_finite() && t >= 0.0) => {
                Err(Error::Config(format!(
                    "normalized polynomial t must be finite and >= 0, got {t}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Evaluates the kernel on one pair of points.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!(
                "kernel arguments have lengths {} and {}",
                x.len(),
                y.len()
            )));
        }
        self.eval_unchecked(x, y)
    }

    // Callers guarantee equal lengths. Every branch is symmetric in (x, y)
    // at the bit level: squared differences, commutative products, and
    // sums taken in the same coordinate order.
    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match *self {
            KernelSpec::Rbf { sigma2 } => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                Ok((-sq / sigma2).exp())
            }
            KernelSpec::Linear => Ok(dot(x, y)),
            KernelSpec::NormalizedPoly { degree, t } => {
                let p = degree as i32;
                let xx = (dot(x, x) + t).powi(p);
                let yy = (dot(y, y) + t).powi(p);
                if xx == 0.0 || yy == 0.0 {
                    return Err(Error::DegenerateKernel(
                        "normalized polynomial kernel at a zero-norm point with t = 0".into(),
                    ));
                }
                Ok((dot(x, y) + t).powi(p) / (xx * yy).sqrt())
            }
        }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn row_slice<'a>(x: &'a ArrayView2<'_, f64>, i: usize, buf: &'a mut Vec<f64>) -> &'a [f64] {
    let row = x.row(i);
    match row.to_slice() {
        Some(s) => s,
        None => {
            buf.clear();
            buf.extend(row.iter().copied());
            buf
        }
    }
}

fn check_finite(x: &ArrayView2<'_, f64>, what: &str) -> Result<()> {
    if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
        let cols = x.ncols().max(1);
        return Err(Error::Config(format!(
            "{what} has a non-finite value at row {}, column {}",
            pos / cols,
            pos % cols
        )));
    }
    Ok(())
}

/// Dense `N × N` Gram matrix. Exactly symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    omega: Array2<f64>,
}

impl KernelMatrix {
    /// Wraps an existing matrix; it must be square and exactly symmetric.
    pub fn from_array(omega: Array2<f64>) -> Result<Self> {
        if omega.nrows() != omega.ncols() {
            return Err(Error::Dimension(format!(
                "kernel matrix must be square, got {}x{}",
                omega.nrows(),
                omega.ncols()
            )));
        }
        let n = omega.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if omega[[i, j]] != omega[[j, i]] {
                    return Err(Error::Config(format!(
                        "kernel matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(KernelMatrix { omega })
    }

    pub fn n(&self) -> usize {
        self.omega.nrows()
    }

    pub fn omega(&self) -> ArrayView2<'_, f64> {
        self.omega.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.omega
    }
}

/// Builds `Ω_ij = K(x_i, x_j)` for the rows of `x`.
///
/// Each unordered pair is evaluated once and mirrored. Rows are spread over
/// the rayon pool; the result does not depend on the thread count.
pub fn gram_matrix(spec: &KernelSpec, x: ArrayView2<'_, f64>) -> Result<KernelMatrix> {
    spec.validate()?;
    let n = x.nrows();
    if n < 2 {
        return Err(Error::Config(format!(
            "Gram matrix needs at least 2 samples, got {n}"
        )));
    }
    check_finite(&x, "input matrix")?;
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (mut bi, mut bj) = (Vec::new(), Vec::new());
            let xi = row_slice(&x, i, &mut bi).to_vec();
            (i..n)
                .map(|j| spec.eval_unchecked(&xi, row_slice(&x, j, &mut bj)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut omega = Array2::zeros((n, n));
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + off;
            omega[[i, j]] = v;
            omega[[j, i]] = v;
        }
    }
    Ok(KernelMatrix { omega })
}

/// Test-versus-train kernel block `Ω_test[a, j] = K(x_test_a, x_train_j)`.
pub fn cross_gram(
    spec: &KernelSpec,
    x_test: ArrayView2<'_, f64>,
    x_train: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    spec.validate()?;
    if x_test.ncols() != x_train.ncols() {
        return Err(Error::Dimension(format!(
            "test inputs have {} features, training inputs have {}",
            x_test.ncols(),
            x_train.ncols()
        )));
    }
    check_finite(&x_test, "test input matrix")?;
    let (nte, n) = (x_test.nrows(), x_train.nrows());
    let rows: Vec<Vec<f64>> = (0..nte)
        .into_par_iter()
        .map(|a| {
            let (mut ba, mut bj) = (Vec::new(), Vec::new());
            let xa = row_slice(&x_test, a, &mut ba).to_vec();
            (0..n)
                .map(|j| spec.eval_unchecked(&xa, row_slice(&x_train, j, &mut bj)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut out = Array2::zeros((nte, n));
    for (a, row) in rows.into_iter().enumerate() {
        out.row_mut(a).assign(&Array1::from(row));
    }
    Ok(out)
}

/// Diagonal of the degree matrix, `d_i = Σ_j Ω_ji`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeMatrix {
    d: Array1<f64>,
}

impl DegreeMatrix {
    pub fn from_vec(d: Array1<f64>) -> Result<Self> {
        if let Some((index, &value)) = d.iter().enumerate().find(|(_, v)| v.is_nan() || **v <= 0.0)
        {
            return Err(Error::NonPositiveDegree { index, value });
        }
        Ok(DegreeMatrix { d })
    }

    pub fn values(&self) -> ArrayView1<'_, f64> {
        self.d.view()
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }
}

/// Column sums of the (uncentered) Gram matrix.
pub fn degree_matrix(k: &KernelMatrix) -> Result<DegreeMatrix> {
    DegreeMatrix::from_vec(k.omega.sum_axis(Axis(0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenteringMode {
    /// Uniform weights `1/N`.
    Plain,
    /// Weights proportional to inverse degrees.
    #[default]
    DegreeWeighted,
}

/// Cached centering quantities, reused for test kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteringStats {
    /// Centering weights `s`, summing to one.
    pub weights: Array1<f64>,
    /// `s^T Ω`.
    pub row_means: Array1<f64>,
    /// `s^T Ω s`.
    pub grand_mean: f64,
}

impl CenteringStats {
    pub fn n(&self) -> usize {
        self.weights.len()
    }
}

/// Centering weights for the requested mode.
pub fn centering_weights(
    n: usize,
    mode: CenteringMode,
    degree: Option<&DegreeMatrix>,
) -> Result<Array1<f64>> {
    match mode {
        CenteringMode::Plain => Ok(Array1::from_elem(n, 1.0 / n as f64)),
        CenteringMode::DegreeWeighted => {
            let d = degree.ok_or_else(|| {
                Error::Config("degree-weighted centering requires a degree matrix".into())
            })?;
            if d.len() != n {
                return Err(Error::Dimension(format!(
                    "degree matrix has length {}, kernel has {n} samples",
                    d.len()
                )));
            }
            let inv = d.d.mapv(|v| 1.0 / v);
            let total = inv.sum();
            Ok(inv / total)
        }
    }
}

/// Centers a Gram matrix in feature space, returning the centered matrix and
/// the statistics needed to center test kernels consistently.
pub fn center_gram(
    k: &KernelMatrix,
    mode: CenteringMode,
    degree: Option<&DegreeMatrix>,
) -> Result<(Array2<f64>, CenteringStats)> {
    let n = k.n();
    let s = centering_weights(n, mode, degree)?;
    let omega = &k.omega;
    let row_means: Array1<f64> = (0..n)
        .map(|j| (0..n).map(|i| s[i] * omega[[i, j]]).sum())
        .collect();
    let grand_mean: f64 = row_means.iter().zip(s.iter()).map(|(r, w)| r * w).sum();
    let centered = Array2::from_shape_fn((n, n), |(i, j)| {
        omega[[i, j]] - (row_means[i] + row_means[j]) + grand_mean
    });
    Ok((
        centered,
        CenteringStats {
            weights: s,
            row_means,
            grand_mean,
        },
    ))
}

/// Centers an `N_te × N` test kernel block with the training statistics:
/// `(Ω_test - 1 (s^T Ω)) (I - s 1^T)`.
pub fn center_gram_test(
    k_test: ArrayView2<'_, f64>,
    stats: &CenteringStats,
) -> Result<Array2<f64>> {
    let n = stats.n();
    if k_test.ncols() != n {
        return Err(Error::Dimension(format!(
            "test kernel has {} columns, training set has {n} samples",
            k_test.ncols()
        )));
    }
    let s = &stats.weights;
    let r = &stats.row_means;
    let c = stats.grand_mean;
    let mut out = Array2::zeros(k_test.raw_dim());
    for (a, mut out_row) in out.axis_iter_mut(Axis(0)).enumerate() {
        let row = k_test.row(a);
        let ta: f64 = (0..n).map(|j| row[j] * s[j]).sum();
        for j in 0..n {
            out_row[j] = row[j] - (ta + r[j]) + c;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn e(x: f64) -> f64 {
        x.exp()
    }

    #[test]
    fn eval_examples() {
        let rbf = KernelSpec::rbf(1.0);
        assert_eq!(rbf.eval(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            rbf.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap(),
            e(-1.0),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            rbf.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap(),
            0.367879,
            epsilon = 1e-6
        );
        let np = KernelSpec::normalized_poly(2, 1.0);
        assert_abs_diff_eq!(
            np.eval(&[3.0, 4.0], &[3.0, 4.0]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(
            KernelSpec::Linear.eval(&[1.0, 2.0], &[3.0, -1.0]).unwrap(),
            1.0
        );
    }

    #[test]
    fn eval_errors() {
        assert!(matches!(
            KernelSpec::Linear.eval(&[1.0], &[1.0, 2.0]),
            Err(Error::Dimension(_))
        ));
        let np = KernelSpec::normalized_poly(1, 0.0);
        assert!(matches!(
            np.eval(&[0.0, 0.0], &[1.0, 1.0]),
            Err(Error::DegenerateKernel(_))
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(KernelSpec::rbf(0.0).validate().is_err());
        assert!(KernelSpec::rbf(-1.0).validate().is_err());
        assert!(KernelSpec::rbf(f64::NAN).validate().is_err());
        assert!(KernelSpec::normalized_poly(0, 1.0).validate().is_err());
        assert!(KernelSpec::normalized_poly(2, -0.1).validate().is_err());
        assert!(KernelSpec::normalized_poly(2, 0.0).validate().is_ok());
    }

    #[test]
    fn gram_examples() {
        let k = gram_matrix(&KernelSpec::Linear, Array2::eye(2).view()).unwrap();
        assert_eq!(k.omega(), Array2::<f64>::eye(2));

        let x = array![[0.3, 0.7], [0.3, 0.7]];
        let k = gram_matrix(&KernelSpec::rbf(0.05), x.view()).unwrap();
        assert_eq!(k.omega(), Array2::<f64>::ones((2, 2)));

        let x = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let k = gram_matrix(&KernelSpec::rbf(1.0), x.view()).unwrap();
        let o = k.omega();
        assert_abs_diff_eq!(o[[0, 1]], e(-1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(o[[0, 2]], e(-1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(o[[1, 2]], e(-2.0), epsilon = 1e-15);
        for i in 0..3 {
            assert_eq!(o[[i, i]], 1.0);
        }
    }

    #[test]
    fn gram_rejects_single_sample_and_nan() {
        assert!(gram_matrix(&KernelSpec::Linear, array![[1.0, 2.0]].view()).is_err());
        assert!(gram_matrix(&KernelSpec::Linear, array![[1.0], [f64::NAN]].view()).is_err());
    }

    #[test]
    fn degree_examples() {
        let ones = KernelMatrix::from_array(Array2::ones((3, 3))).unwrap();
        assert_eq!(
            degree_matrix(&ones).unwrap().values(),
            array![3.0, 3.0, 3.0]
        );
        let eye = KernelMatrix::from_array(Array2::eye(4)).unwrap();
        assert_eq!(
            degree_matrix(&eye).unwrap().values(),
            array![1.0, 1.0, 1.0, 1.0]
        );

        let x = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let k = gram_matrix(&KernelSpec::rbf(1.0), x.view()).unwrap();
        let d = degree_matrix(&k).unwrap();
        assert_abs_diff_eq!(d.values()[0], 1.0 + 2.0 * e(-1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(d.values()[1], 1.0 + e(-1.0) + e(-2.0), epsilon = 1e-15);
        assert_abs_diff_eq!(d.values()[2], 1.0 + e(-1.0) + e(-2.0), epsilon = 1e-15);
    }

    #[test]
    fn degree_rejects_non_positive() {
        let k = KernelMatrix::from_array(array![[1.0, -2.0], [-2.0, 1.0]]).unwrap();
        assert!(matches!(
            degree_matrix(&k),
            Err(Error::NonPositiveDegree { index: 0, .. })
        ));
    }

    #[test]
    fn centering_examples() {
        let ones = KernelMatrix::from_array(Array2::ones((4, 4))).unwrap();
        let (c, _) = center_gram(&ones, CenteringMode::Plain, None).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-15));

        let eye = KernelMatrix::from_array(Array2::eye(2)).unwrap();
        let (c, _) = center_gram(&eye, CenteringMode::Plain, None).unwrap();
        assert_eq!(c, array![[0.5, -0.5], [-0.5, 0.5]]);

        let x = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let k = gram_matrix(&KernelSpec::rbf(1.0), x.view()).unwrap();
        let d = degree_matrix(&k).unwrap();
        let (c, stats) = center_gram(&k, CenteringMode::DegreeWeighted, Some(&d)).unwrap();
        assert_abs_diff_eq!(stats.weights.sum(), 1.0, epsilon = 1e-12);
        let cs = c.dot(&stats.weights);
        let sc = stats.weights.dot(&c);
        for i in 0..3 {
            assert!(cs[i].abs() < 1e-12 && sc[i].abs() < 1e-12);
        }
    }

    #[test]
    fn degree_weighted_needs_degrees() {
        let eye = KernelMatrix::from_array(Array2::eye(2)).unwrap();
        assert!(matches!(
            center_gram(&eye, CenteringMode::DegreeWeighted, None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn test_centering_reproduces_training_rows() {
        let x = array![[0.1, 0.9], [1.2, 0.4], [0.5, 0.5], [2.0, 1.0]];
        let k = gram_matrix(&KernelSpec::rbf(0.7), x.view()).unwrap();
        let (c, stats) = center_gram(&k, CenteringMode::Plain, None).unwrap();
        let row = k.omega().slice(ndarray::s![1..2, ..]).to_owned();
        let ct = center_gram_test(row.view(), &stats).unwrap();
        assert_eq!(ct.row(0), c.row(1));
    }

    #[test]
    fn test_centering_constant_kernel() {
        let ones = KernelMatrix::from_array(Array2::ones((3, 3))).unwrap();
        let (_, stats) = center_gram(&ones, CenteringMode::Plain, None).unwrap();
        let ct = center_gram_test(Array2::ones((2, 3)).view(), &stats).unwrap();
        assert!(ct.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn test_centering_matches_explicit_features() {
        // Linear kernel: features are the inputs, so centering can be done
        // explicitly with μ = s^T X and compared.
        let x = array![[0.3, -1.2], [1.5, 0.2], [-0.7, 0.9]];
        let t = array![[0.4, 0.4], [-1.1, 2.3]];
        let k = gram_matrix(&KernelSpec::Linear, x.view()).unwrap();
        let (_, stats) = center_gram(&k, CenteringMode::Plain, None).unwrap();
        let kt = cross_gram(&KernelSpec::Linear, t.view(), x.view()).unwrap();
        let got = center_gram_test(kt.view(), &stats).unwrap();

        let mu = stats.weights.dot(&x);
        let xc = &x - &mu;
        let tc = &t - &mu;
        let expected = tc.dot(&xc.t());
        for (a, b) in got.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn test_centering_shape_error() {
        let eye = KernelMatrix::from_array(Array2::eye(3)).unwrap();
        let (_, stats) = center_gram(&eye, CenteringMode::Plain, None).unwrap();
        assert!(matches!(
            center_gram_test(Array2::ones((2, 4)).view(), &stats),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn cross_gram_dimension_error() {
        let a = Array2::<f64>::zeros((2, 3));
        let b = Array2::<f64>::zeros((2, 2));
        assert!(matches!(
            cross_gram(&KernelSpec::Linear, a.view(), b.view()),
            Err(Error::Dimension(_))
        ));
    }
}
