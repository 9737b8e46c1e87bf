use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::frontend::{ChannelAxis, FeatureMatrix};

/// Eigenbasis of a clean-feature covariance. Column `j` of `eigvecs` is the
/// eigenvector of the `j`-th largest eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct KltBasis {
    pub mean: Vec<f64>,
    /// Column-major `J x J`.
    pub eigvecs: Vec<f64>,
    pub eigvals: Vec<f64>,
}

impl KltBasis {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn eigvec(&self, j: usize) -> &[f64] {
        let d = self.dim();
        &self.eigvecs[j * d..(j + 1) * d]
    }

    /// Identity rotation that still removes `mean`.
    pub fn identity(mean: Vec<f64>) -> Self {
        let d = mean.len();
        let mut eigvecs = vec![0.0; d * d];
        for j in 0..d {
            eigvecs[j * d + j] = 1.0;
        }
        Self {
            mean,
            eigvecs,
            eigvals: vec![0.0; d],
        }
    }
}

fn channel_means(feats: &FeatureMatrix) -> Vec<f64> {
    let n = feats.n_frames() as f64;
    feats.rows().map(|r| r.iter().sum::<f64>() / n).collect()
}

fn centred(feats: &FeatureMatrix, mean: &[f64]) -> Mat<f64> {
    let raw = MatRef::from_row_major_slice(feats.values(), feats.n_channels(), feats.n_frames());
    Mat::from_fn(raw.nrows(), raw.ncols(), |j, t| raw[(j, t)] - mean[j])
}

/// Sample covariance (divisor `T - 1`) across channels, row-major `J x J`.
pub fn covariance(feats: &FeatureMatrix) -> Result<Vec<f64>> {
    let t = feats.n_frames();
    if t < 2 {
        return Err(Error::SignalTooShort {
            needed: 2,
            got: t,
            unit: "frames",
        });
    }
    let mean = channel_means(feats);
    let c = cov_matrix(&centred(feats, &mean), t);
    let j = feats.n_channels();
    Ok((0..j * j).map(|i| c[(i / j, i % j)]).collect())
}

fn cov_matrix(xc: &Mat<f64>, t: usize) -> Mat<f64> {
    let mut c = xc * xc.transpose();
    c *= faer::Scale(1.0 / (t as f64 - 1.0));
    c
}

/// Fits the decorrelating transform on clean features (channels x frames).
pub fn klt_fit(clean: &FeatureMatrix) -> Result<KltBasis> {
    let (d, t) = (clean.n_channels(), clean.n_frames());
    if t < 2 {
        return Err(Error::SignalTooShort {
            needed: 2,
            got: t,
            unit: "frames",
        });
    }
    let mean = channel_means(clean);
    let cov = cov_matrix(&centred(clean, &mean), t);
    if (0..d).any(|i| (0..d).any(|j| !cov[(i, j)].is_finite())) {
        return Err(Error::DegenerateInput("feature covariance is not finite".into()));
    }
    let evd = cov
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::DegenerateInput(format!("eigendecomposition failed: {e:?}")))?;
    let (s, u) = (evd.S().column_vector(), evd.U());

    // faer returns ascending eigenvalues; the basis is stored descending.
    let mut eigvals = Vec::with_capacity(d);
    let mut eigvecs = Vec::with_capacity(d * d);
    for col in (0..d).rev() {
        eigvals.push(s[col].max(0.0));
        let v: Vec<f64> = (0..d).map(|i| u[(i, col)]).collect();
        let mut pivot = 0;
        for i in 1..d {
            if v[i].abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        eigvecs.extend(v.iter().map(|x| x * sign));
    }
    Ok(KltBasis { mean, eigvecs, eigvals })
}

/// Projects each frame onto the basis: `eigvecs^T (frame - mean)`.
pub fn klt_apply(basis: &KltBasis, feats: &FeatureMatrix) -> Result<FeatureMatrix> {
    let d = basis.dim();
    if feats.n_channels() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: feats.n_channels(),
        });
    }
    let t = feats.n_frames();
    let xc = centred(feats, &basis.mean);
    let v = MatRef::from_column_major_slice(&basis.eigvecs, d, d);
    let out = v.transpose() * &xc;
    let mut values = Vec::with_capacity(d * t);
    for j in 0..d {
        values.extend((0..t).map(|c| out[(j, c)]));
    }
    Ok(FeatureMatrix::from_parts_unchecked(values, d, feats.frame_rate(), ChannelAxis::Eigen))
}
