//! Data model and preprocessing: centering and whitening.
//!
//! Signals are dense `N x M` matrices of 64-bit reals, rows holding
//! components and columns holding samples. Whitening maps centered
//! observations to zero-mean unit-covariance coordinates, where the
//! separating matrix can be constrained to orthonormal rows.

use ndarray::{Array1, Array2};

use crate::contrast::upsilon;
use crate::error::{OicaError, Result};
use crate::linalg::sym_eig;

/// Dense 2-D array of 64-bit reals, row-major; rows are components or
/// candidates, columns are samples.
pub type RealMatrix = Array2<f64>;

/// Default relative eigenvalue floor for rank-deficiency detection.
pub const DEFAULT_EIG_FLOOR: f64 = 1e-12;

/// Checks the basic matrix invariants: at least one row and column, all
/// entries finite.
pub fn validate_matrix(m: &RealMatrix) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(OicaError::InvalidMatrix(format!(
            "empty shape {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if let Some((idx, _)) = m.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(OicaError::InvalidMatrix(format!(
            "non-finite entry at flat index {idx}"
        )));
    }
    Ok(())
}

/// Per-channel mean and the whitening transform derived from the sample
/// covariance of the centered data.
#[derive(Debug, Clone)]
pub struct WhiteningModel {
    /// Row means removed by centering (signal units).
    pub mean: Array1<f64>,
    /// `V`, mapping centered data to unit-covariance coordinates.
    pub whiten: RealMatrix,
    /// `V^-1`, mapping whitened data back.
    pub dewhiten: RealMatrix,
    /// Covariance eigenvalues, descending (variance units).
    pub eigenvalues: Array1<f64>,
}

/// A (possibly synthetic) dataset: observed signals plus optional ground
/// truth used by the evaluation metrics.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// `N x M` observed signals.
    pub observed: RealMatrix,
    /// Mixing matrix `A` when known (`observed = mixing . sources`).
    pub mixing: Option<RealMatrix>,
    /// Source signals when known.
    pub sources: Option<RealMatrix>,
    /// Population kurtosis of each source row (0 for Gaussian rows).
    pub true_kurtoses: Option<Vec<f64>>,
}

impl Dataset {
    /// Source indices sorted by descending non-Gaussianity of the true
    /// kurtoses. This is the ground-truth extraction order assumed by the
    /// ordering-error metric. Ties break by row index.
    pub fn nongaussianity_order(&self) -> Option<Vec<usize>> {
        let kurtoses = self.true_kurtoses.as_ref()?;
        let score: Vec<f64> = kurtoses
            .iter()
            .map(|&k| upsilon(k).unwrap_or(f64::INFINITY))
            .collect();
        let mut order: Vec<usize> = (0..score.len()).collect();
        order.sort_by(|&i, &j| score[j].partial_cmp(&score[i]).unwrap().then(i.cmp(&j)));
        Some(order)
    }
}

/// Removes the mean of each row. Returns the centered matrix and the
/// removed means.
pub fn center(x: &RealMatrix) -> (RealMatrix, Array1<f64>) {
    let m = x.ncols() as f64;
    let mean: Array1<f64> = x.sum_axis(ndarray::Axis(1)) / m;
    let mut xc = x.clone();
    for (mut row, mu) in xc.rows_mut().into_iter().zip(mean.iter()) {
        row.mapv_inplace(|v| v - mu);
    }
    (xc, mean)
}

/// Whitens centered data via the symmetric eigendecomposition of its
/// sample covariance (divisor `M`): `V = D^{-1/2} E^T`.
///
/// Fails with [`OicaError::RankDeficient`] when any covariance eigenvalue
/// falls below `eig_floor` times the largest one, signalling that the data
/// does not span all `N` dimensions.
pub fn whiten(xc: &RealMatrix, eig_floor: f64) -> Result<(RealMatrix, WhiteningModel)> {
    validate_matrix(xc)?;
    let n = xc.nrows();
    let m = xc.ncols();
    if m <= n {
        return Err(OicaError::DimensionMismatch(format!(
            "whitening needs more samples than channels (N={n}, M={m})"
        )));
    }
    let cov = xc.dot(&xc.t()) / m as f64;
    let (eigenvalues, vectors) = sym_eig(&cov);
    let max_eig = eigenvalues[0].max(0.0);
    let floor = eig_floor * max_eig;
    if let Some(&bad) = eigenvalues.iter().find(|&&v| v < floor || v <= 0.0) {
        return Err(OicaError::RankDeficient {
            value: bad,
            floor,
        });
    }
    let inv_sqrt = Array2::from_diag(&eigenvalues.mapv(|v| 1.0 / v.sqrt()));
    let sqrt = Array2::from_diag(&eigenvalues.mapv(f64::sqrt));
    let whiten = inv_sqrt.dot(&vectors.t());
    let dewhiten = vectors.dot(&sqrt);
    let xw = whiten.dot(xc);
    Ok((
        xw,
        WhiteningModel {
            mean: Array1::zeros(n),
            whiten,
            dewhiten,
            eigenvalues,
        },
    ))
}

/// Centers and whitens raw observations in one step; the returned model
/// carries the removed row means.
pub fn preprocess(x: &RealMatrix, eig_floor: f64) -> Result<(RealMatrix, WhiteningModel)> {
    validate_matrix(x)?;
    let (xc, mean) = center(x);
    let (xw, mut model) = whiten(&xc, eig_floor)?;
    model.mean = mean;
    Ok((xw, model))
}

/// Maps a separating matrix found in whitened coordinates back to the raw
/// signal space: returns `W_white . V`.
pub fn compose_unmixing(w_white: &RealMatrix, model: &WhiteningModel) -> Result<RealMatrix> {
    if w_white.ncols() != model.whiten.nrows() {
        return Err(OicaError::DimensionMismatch(format!(
            "separating matrix has {} columns, whitening is {}x{}",
            w_white.ncols(),
            model.whiten.nrows(),
            model.whiten.ncols()
        )));
    }
    Ok(w_white.dot(&model.whiten))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn gauss_matrix(n: usize, m: usize, seed: u64) -> RealMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        RealMatrix::from_shape_fn((n, m), |_| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn center_zero_matrix_unchanged() {
        let x = RealMatrix::zeros((2, 4));
        let (xc, mean) = center(&x);
        assert_eq!(xc, x);
        assert_eq!(mean, array![0.0, 0.0]);
    }

    #[test]
    fn center_constant_row() {
        let x = array![[1.0, 1.0, 1.0, 1.0]];
        let (xc, mean) = center(&x);
        assert_eq!(mean[0], 1.0);
        assert!(xc.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn center_hand_case() {
        let x = array![[1.0, 2.0, 3.0]];
        let (xc, mean) = center(&x);
        assert_eq!(mean[0], 2.0);
        assert_eq!(xc, array![[-1.0, 0.0, 1.0]]);
    }

    #[test]
    fn center_row_sums_vanish() {
        let x = gauss_matrix(4, 1000, 3);
        let (xc, _) = center(&x);
        let maxabs = x.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        for row in xc.rows() {
            let s: f64 = row.sum();
            assert!(s.abs() <= 1e-9 * 1000.0 * maxabs);
        }
    }

    #[test]
    fn uncenter_is_identity() {
        let x = gauss_matrix(3, 50, 4);
        let (xc, mean) = center(&x);
        for (i, row) in xc.rows().into_iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert!((v + mean[i] - x[[i, j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn whiten_unit_covariance() {
        let x = gauss_matrix(4, 20_000, 5);
        let (xc, _) = center(&x);
        let (xw, model) = whiten(&xc, DEFAULT_EIG_FLOOR).unwrap();
        let m = xw.ncols() as f64;
        let cov = xw.dot(&xw.t()) / m;
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((cov[[i, j]] - expect).abs() < 1e-8);
            }
        }
        // dewhiten . whiten = I
        let prod = model.dewhiten.dot(&model.whiten);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[[i, j]] - expect).abs() < 1e-10);
            }
        }
        // V . cov(Xc) . V^T = I
        let cov_c = xc.dot(&xc.t()) / m;
        let check = model.whiten.dot(&cov_c).dot(&model.whiten.t());
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((check[[i, j]] - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn whiten_scaled_rows_recovers_unit_covariance() {
        // white noise with rows scaled by (2, 1): covariance diag(4, 1)
        let mut x = gauss_matrix(2, 50_000, 6);
        // orthogonalize empirically first so scaling is clean
        let (xc, _) = center(&x);
        let (xw0, _) = whiten(&xc, DEFAULT_EIG_FLOOR).unwrap();
        x = xw0;
        for (i, s) in [2.0, 1.0].iter().enumerate() {
            x.row_mut(i).mapv_inplace(|v| v * s);
        }
        let (xw, _) = whiten(&x, DEFAULT_EIG_FLOOR).unwrap();
        let cov = xw.dot(&xw.t()) / xw.ncols() as f64;
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((cov[[i, j]] - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn whiten_duplicated_rows_rank_deficient() {
        let base = gauss_matrix(1, 500, 7);
        let mut x = RealMatrix::zeros((2, 500));
        x.row_mut(0).assign(&base.row(0));
        x.row_mut(1).assign(&base.row(0));
        let (xc, _) = center(&x);
        match whiten(&xc, DEFAULT_EIG_FLOOR) {
            Err(OicaError::RankDeficient { .. }) => {}
            other => panic!("expected RankDeficient, got {other:?}"),
        }
    }

    #[test]
    fn whitening_whitened_data_is_orthogonal() {
        let x = gauss_matrix(3, 30_000, 8);
        let (xc, _) = center(&x);
        let (xw, _) = whiten(&xc, DEFAULT_EIG_FLOOR).unwrap();
        let (_, model2) = whiten(&xw, DEFAULT_EIG_FLOOR).unwrap();
        let v = &model2.whiten;
        let g = v.dot(&v.t());
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g[[i, j]] - expect).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn compose_unmixing_identity_cases() {
        let x = gauss_matrix(3, 5000, 9);
        let (_, model) = preprocess(&x, DEFAULT_EIG_FLOOR).unwrap();
        let eye = RealMatrix::eye(3);
        let composed = compose_unmixing(&eye, &model).unwrap();
        for (a, b) in composed.iter().zip(model.whiten.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn compose_unmixing_matches_two_step_application() {
        let x = gauss_matrix(3, 5000, 10);
        let (xc, _) = center(&x);
        let (xw, model) = whiten(&xc, DEFAULT_EIG_FLOOR).unwrap();
        let w = gauss_matrix(3, 3, 11);
        let direct = compose_unmixing(&w, &model).unwrap().dot(&xc);
        let two_step = w.dot(&xw);
        for (a, b) in direct.iter().zip(two_step.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn compose_unmixing_dimension_mismatch() {
        let x = gauss_matrix(3, 5000, 12);
        let (_, model) = preprocess(&x, DEFAULT_EIG_FLOOR).unwrap();
        let w = RealMatrix::eye(4);
        assert!(matches!(
            compose_unmixing(&w, &model),
            Err(OicaError::DimensionMismatch(_))
        ));
    }
}
