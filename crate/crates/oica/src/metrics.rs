//! Evaluation measures: the ordering error against a ground-truth mixing
//! matrix and run-to-run fluctuation of the separating vectors.

use ndarray::ArrayView1;

use crate::error::{OicaError, Result};
use crate::linalg::norm;
use crate::signal::RealMatrix;

/// Rank-band size used for the grouped fluctuation averages.
pub const DEFAULT_RANK_BAND: usize = 20;

/// Per-rank fluctuation averages across repeated runs, with grouped
/// summaries over rank bands.
#[derive(Debug, Clone)]
pub struct FluctuationReport {
    /// Mean divergence of component `i` over all ordered run pairs.
    pub per_component: Vec<f64>,
    /// `(label, mean)` over rank bands: all, top band, middle band, rest.
    /// Bands that would be empty are omitted.
    pub group_averages: Vec<(String, f64)>,
}

/// Fraction of entries of `W . A` deviating from the identity pattern.
///
/// `A`'s columns must already be sorted by descending ground-truth
/// non-Gaussianity. Each row of the product has its sign flipped when its
/// largest-magnitude entry is negative, so a perfect separation with
/// flipped signs still scores zero. An entry counts as an error when it
/// differs from the identity by more than `tau`.
pub fn ordering_error(w: &RealMatrix, a: &RealMatrix, tau: f64) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n || w.nrows() != n || w.ncols() != n {
        return Err(OicaError::DimensionMismatch(format!(
            "ordering error needs square NxN inputs, got W {}x{}, A {}x{}",
            w.nrows(),
            w.ncols(),
            n,
            a.ncols()
        )));
    }
    let mut p = w.dot(a);
    for mut row in p.rows_mut() {
        let mut best = 0;
        for k in 1..n {
            if row[k].abs() > row[best].abs() {
                best = k;
            }
        }
        if row[best] < 0.0 {
            row.mapv_inplace(|v| -v);
        }
    }
    let mut errors = 0usize;
    for j in 0..n {
        for k in 0..n {
            let target = if j == k { 1.0 } else { 0.0 };
            if (p[[j, k]] - target).abs() > tau {
                errors += 1;
            }
        }
    }
    Ok(errors as f64 / (n * n) as f64)
}

/// `1 - |cos|` divergence between two directions; 0 for parallel or
/// antiparallel vectors, 1 for orthogonal ones.
pub fn cosine_divergence(u: ArrayView1<f64>, v: ArrayView1<f64>) -> Result<f64> {
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(OicaError::ZeroVector);
    }
    let cos = u.dot(&v) / (nu * nv);
    Ok((1.0 - cos.abs()).clamp(0.0, 1.0))
}

/// Average cosine divergence of corresponding rows over all ordered pairs
/// of runs, with grouped rank-band summaries (band size 20).
pub fn fluctuation(runs: &[RealMatrix]) -> Result<FluctuationReport> {
    fluctuation_banded(runs, DEFAULT_RANK_BAND)
}

/// As [`fluctuation`] with an explicit rank-band size.
pub fn fluctuation_banded(runs: &[RealMatrix], band: usize) -> Result<FluctuationReport> {
    if runs.len() < 2 {
        return Err(OicaError::DimensionMismatch(
            "fluctuation needs at least two runs".into(),
        ));
    }
    let shape = runs[0].dim();
    if runs.iter().any(|r| r.dim() != shape) {
        return Err(OicaError::DimensionMismatch(
            "all runs must have the same shape".into(),
        ));
    }
    let t = runs.len();
    let n = shape.0;
    let pairs = (t * (t - 1)) as f64;
    let mut per_component = vec![0.0; n];
    for i in 0..n {
        let mut sum = 0.0;
        for a in 0..t {
            for b in 0..t {
                if a == b {
                    continue;
                }
                sum += cosine_divergence(runs[a].row(i), runs[b].row(i))?;
            }
        }
        per_component[i] = sum / pairs;
    }

    let mean = |slice: &[f64]| slice.iter().sum::<f64>() / slice.len() as f64;
    let mut group_averages = vec![("all".to_string(), mean(&per_component))];
    if n > 0 && band > 0 {
        let top_end = band.min(n);
        group_averages.push(("top".to_string(), mean(&per_component[..top_end])));
        if n > band {
            let mid_end = (2 * band).min(n);
            group_averages.push(("mid".to_string(), mean(&per_component[band..mid_end])));
            if n > 2 * band {
                group_averages.push(("rest".to_string(), mean(&per_component[2 * band..])));
            }
        }
    }
    Ok(FluctuationReport {
        per_component,
        group_averages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn perfect_inverse_scores_zero() {
        let a = array![[2.0, 1.0], [1.0, 1.0]];
        let w = array![[1.0, -1.0], [-1.0, 2.0]]; // A^-1
        assert_eq!(ordering_error(&w, &a, 0.1).unwrap(), 0.0);
        let neg = w.mapv(|v| -v);
        assert_eq!(ordering_error(&neg, &a, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn row_swap_counts_four_entries() {
        let a = RealMatrix::eye(3);
        // W = permuted identity swapping rows 1,2
        let w = array![[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        let e = ordering_error(&w, &a, 0.1).unwrap();
        assert!((e - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn row_sign_flip_invariance() {
        let a = array![[1.0, 2.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]];
        let w = array![[0.9, 0.1, 0.0], [0.0, 1.0, 0.05], [0.0, 0.0, 1.0]];
        let base = ordering_error(&w, &a, 0.1).unwrap();
        let mut flipped = w.clone();
        flipped.row_mut(1).mapv_inplace(|v| -v);
        assert_eq!(ordering_error(&flipped, &a, 0.1).unwrap(), base);
    }

    #[test]
    fn dimension_mismatch() {
        let a = RealMatrix::eye(3);
        let w = RealMatrix::eye(2);
        assert!(matches!(
            ordering_error(&w, &a, 0.1),
            Err(OicaError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn cosine_divergence_cases() {
        let u = array![1.0, 0.0];
        assert_eq!(cosine_divergence(u.view(), u.view()).unwrap(), 0.0);
        let neg = array![-1.0, 0.0];
        assert_eq!(cosine_divergence(u.view(), neg.view()).unwrap(), 0.0);
        let orth = array![0.0, 2.0];
        assert_eq!(cosine_divergence(u.view(), orth.view()).unwrap(), 1.0);
        let zero = array![0.0, 0.0];
        assert!(matches!(
            cosine_divergence(u.view(), zero.view()),
            Err(OicaError::ZeroVector)
        ));
    }

    #[test]
    fn identical_runs_zero_fluctuation() {
        let w = array![[1.0, 0.0], [0.0, 1.0]];
        let rep = fluctuation(&[w.clone(), w.clone(), w]).unwrap();
        assert!(rep.per_component.iter().all(|&v| v == 0.0));
        assert_eq!(rep.group_averages[0].1, 0.0);
    }

    #[test]
    fn orthogonal_rows_max_fluctuation() {
        let a = array![[1.0, 0.0], [0.0, 1.0]];
        let b = array![[0.0, 1.0], [0.0, 1.0]];
        let rep = fluctuation(&[a, b]).unwrap();
        assert_eq!(rep.per_component[0], 1.0);
        assert_eq!(rep.per_component[1], 0.0);
    }

    #[test]
    fn sixty_degree_pairs() {
        // three runs whose row 0 directions are pairwise 60 degrees apart
        let dirs = [0.0f64, 60.0, 120.0];
        let runs: Vec<RealMatrix> = dirs
            .iter()
            .map(|deg| {
                let r = deg.to_radians();
                array![[r.cos(), r.sin()]]
            })
            .collect();
        let rep = fluctuation(&runs).unwrap();
        assert!((rep.per_component[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fluctuation_invariant_under_sign_flip_and_run_order() {
        let a = array![[0.8, 0.6], [0.6, -0.8]];
        let b = array![[1.0, 0.0], [0.0, 1.0]];
        let base = fluctuation(&[a.clone(), b.clone()]).unwrap();
        let mut a_flipped = a.clone();
        a_flipped.row_mut(0).mapv_inplace(|v| -v);
        let flipped = fluctuation(&[a_flipped, b.clone()]).unwrap();
        assert_eq!(base.per_component, flipped.per_component);
        let reordered = fluctuation(&[b, a]).unwrap();
        assert_eq!(base.per_component, reordered.per_component);
    }

    #[test]
    fn needs_two_runs() {
        let a = RealMatrix::eye(2);
        assert!(fluctuation(&[a]).is_err());
    }
}
