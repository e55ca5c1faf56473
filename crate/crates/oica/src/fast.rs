//! Batched ordering ICA: all `L` candidate runs of one component iterate
//! together as rows of a single matrix, converged rows are removed from
//! the batch as they finish, and the orthogonality constraint is enforced
//! by reducing the signal matrix to an orthonormal basis of the complement
//! of the extracted components instead of projecting every iterate.
//!
//! With `d = N - i + 1` remaining dimensions at step `i`, the per-iteration
//! work shrinks proportionally to `d`, and the explicit per-candidate loop
//! of the deflation algorithm collapses into two matrix products.

use std::time::Instant;

use ndarray::{Array1, Array2, Axis};

use crate::config::OrderingConfig;
use crate::contrast::{gaussianity_threshold, kurtosis_alpha, upsilon};
use crate::error::{OicaError, Result};
use crate::linalg::{norm, signed_min_distance, sym_eig};
use crate::reference::DEGENERACY_FLOOR;
use crate::result::SeparationResult;
use crate::rng::{candidate_rng, random_unit_vector};
use crate::signal::RealMatrix;

/// Eigenvalue floor below which the complement Gram matrix counts as
/// singular.
pub const COMPLEMENT_EIG_FLOOR: f64 = 1e-10;

/// Orthonormal basis of the subspace orthogonal to the extracted rows.
#[derive(Debug, Clone)]
pub struct ComplementBasis {
    /// `(N - i + 1) x N` matrix with orthonormal rows spanning the
    /// complement: `G G^T = I`, `G W^T = 0`, `G^T G = I - W^T W`.
    pub g: RealMatrix,
    pub reduced_dim: usize,
}

/// Symmetric inverse square root via eigendecomposition: returns `R` with
/// `R S R = I`, `R` symmetric. Fails with
/// [`OicaError::IllConditionedComplement`] when the smallest eigenvalue is
/// below `floor`.
pub fn sym_inv_sqrt(s: &RealMatrix, floor: f64) -> Result<RealMatrix> {
    let d = s.nrows();
    for i in 0..d {
        for j in 0..d {
            if (s[[i, j]] - s[[j, i]]).abs() > 1e-10 {
                return Err(OicaError::InvalidMatrix(format!(
                    "not symmetric at ({i},{j})"
                )));
            }
        }
    }
    let (vals, vecs) = sym_eig(s);
    let min = vals[d - 1];
    if min < floor {
        return Err(OicaError::IllConditionedComplement { value: min });
    }
    let inv_sqrt = Array2::from_diag(&vals.mapv(|v| 1.0 / v.sqrt()));
    Ok(vecs.dot(&inv_sqrt).dot(&vecs.t()))
}

fn orthonormalize_rows(f_rows: &RealMatrix) -> Result<RealMatrix> {
    let gram = f_rows.dot(&f_rows.t());
    let r = sym_inv_sqrt(&gram, COMPLEMENT_EIG_FLOOR)?;
    Ok(r.dot(f_rows))
}

/// Builds the complement basis for extracted rows `w` ((i-1) x N).
///
/// The projector `F = I - W^T W` is truncated to its top `N - i + 1` rows
/// and orthonormalized through the symmetric inverse square root of its
/// Gram matrix. When those leading rows fail to span the complement (their
/// Gram matrix is singular), the rows of `F` are instead selected greedily
/// by descending diagonal magnitude before orthonormalization.
pub fn complement_basis(w: &RealMatrix, n: usize) -> Result<ComplementBasis> {
    let extracted = w.nrows();
    if extracted >= n {
        return Err(OicaError::DimensionMismatch(format!(
            "no complement left: {extracted} rows extracted of {n}"
        )));
    }
    let d = n - extracted;
    if extracted == 0 {
        return Ok(ComplementBasis {
            g: RealMatrix::eye(n),
            reduced_dim: n,
        });
    }
    let f = RealMatrix::eye(n) - w.t().dot(w);
    let f_top = f.slice(ndarray::s![..d, ..]).to_owned();
    match orthonormalize_rows(&f_top) {
        Ok(g) => Ok(ComplementBasis { g, reduced_dim: d }),
        Err(OicaError::IllConditionedComplement { .. }) => {
            // pivot on the projector's diagonal: rows with the largest
            // diagonal have the largest component outside span(W)
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| f[[b, b]].partial_cmp(&f[[a, a]]).unwrap().then(a.cmp(&b)));
            let mut picked = RealMatrix::zeros((d, n));
            for (r, &src) in idx.iter().take(d).enumerate() {
                picked.row_mut(r).assign(&f.row(src));
            }
            let g = orthonormalize_rows(&picked)?;
            Ok(ComplementBasis { g, reduced_dim: d })
        }
        Err(e) => Err(e),
    }
}

/// One batched Newton update: `Z = B X`, `B' = (Z o Z o Z) X^T / M - 3B`,
/// rows normalized. Fails with [`OicaError::DegenerateRow`] if a row's
/// pre-normalization norm vanishes.
pub fn batch_newton_step(b: &RealMatrix, x_red: &RealMatrix) -> Result<RealMatrix> {
    let (updated, degenerate) = batch_newton_step_lossy(b, x_red);
    if let Some(&row) = degenerate.first() {
        return Err(OicaError::DegenerateRow { row });
    }
    Ok(updated)
}

/// As [`batch_newton_step`], but reports degenerate row indices instead of
/// failing; degenerate rows are returned unnormalized.
fn batch_newton_step_lossy(b: &RealMatrix, x_red: &RealMatrix) -> (RealMatrix, Vec<usize>) {
    let m = x_red.ncols() as f64;
    let z = b.dot(x_red);
    let z3 = z.mapv(|v| v * v * v);
    let mut updated = z3.dot(&x_red.t()) / m - &(b * 3.0);
    let mut degenerate = Vec::new();
    for (idx, mut row) in updated.rows_mut().into_iter().enumerate() {
        let n = norm(row.view());
        if n < DEGENERACY_FLOOR {
            degenerate.push(idx);
        } else {
            row.mapv_inplace(|v| v / n);
        }
    }
    (updated, degenerate)
}

/// Splits batch rows by the sign-invariant convergence test: row `l` is
/// newly converged iff `min(|b_l - b'_l|, |b_l + b'_l|) <= eps`.
pub fn partition_converged(
    b_new: &RealMatrix,
    b_prev: &RealMatrix,
    eps: f64,
) -> (Vec<usize>, Vec<usize>) {
    debug_assert_eq!(b_new.dim(), b_prev.dim());
    let mut still_active = Vec::new();
    let mut newly_converged = Vec::new();
    for l in 0..b_new.nrows() {
        if signed_min_distance(b_new.row(l), b_prev.row(l)) <= eps {
            newly_converged.push(l);
        } else {
            still_active.push(l);
        }
    }
    (still_active, newly_converged)
}

/// Working state of the batched inner loop of one component.
#[derive(Debug, Clone)]
pub struct CandidateBatch {
    /// Active rows, unit norm, in reduced coordinates.
    pub b_active: RealMatrix,
    /// Converged rows with the iteration count at which each finished.
    pub b_conv: Vec<(Array1<f64>, usize)>,
    /// Iteration counter.
    pub t: usize,
    /// Rows lost to degeneracy (probability-zero events, counted for
    /// diagnostics).
    pub degenerate: usize,
}

impl CandidateBatch {
    /// Initializes `L` unit-norm rows in `dim` reduced coordinates from
    /// the per-candidate streams of component `i`.
    pub fn init(seed: u64, component: usize, candidates: usize, dim: usize) -> Self {
        let mut b_active = RealMatrix::zeros((candidates, dim));
        for l in 0..candidates {
            let mut rng = candidate_rng(seed, component, l);
            b_active.row_mut(l).assign(&random_unit_vector(&mut rng, dim));
        }
        Self {
            b_active,
            b_conv: Vec::with_capacity(candidates),
            t: 0,
            degenerate: 0,
        }
    }

    /// One batched update plus converged-row removal.
    pub fn step(&mut self, x_red: &RealMatrix, eps: f64) {
        let b_prev = self.b_active.clone();
        let (b_new, degenerate_rows) = batch_newton_step_lossy(&self.b_active, x_red);
        let (mut still, newly) = partition_converged(&b_new, &b_prev, eps);
        for &l in &newly {
            if degenerate_rows.contains(&l) {
                continue;
            }
            self.b_conv.push((b_new.row(l).to_owned(), self.t + 1));
        }
        self.degenerate += degenerate_rows.len();
        still.retain(|l| !degenerate_rows.contains(l));
        self.b_active = b_new.select(Axis(0), &still);
        self.t += 1;
    }
}

/// Batched ordering ICA over the reduced signal matrix.
///
/// Per component `i`: builds the complement basis `G`, reduces the signal
/// to `X~ = G X`, iterates the batched Newton update with converged-row
/// removal until the batch empties or `t = K`, evaluates the contrast of
/// every finished candidate in one product, and applies the Gaussianity
/// test to the winner. The winning reduced row maps back as `b G`.
///
/// Rows still active at `t = K` join the selection flagged as
/// non-converged (matching the deflation algorithm) unless
/// `strict_converged_only` is set, in which case they are dropped; if that
/// leaves no candidate, the component is treated as Gaussian and
/// extraction stops.
pub fn ordering_ica_fast(xw: &RealMatrix, config: &OrderingConfig) -> Result<SeparationResult> {
    if config.candidates == 0 {
        return Err(OicaError::InvalidMatrix("L must be at least 1".into()));
    }
    let n = xw.nrows();
    let m = xw.ncols();
    let l_total = config.candidates;
    let total_start = Instant::now();

    let mut w = RealMatrix::zeros((0, n));
    let mut upsilons = Vec::new();
    let mut iterations = Vec::new();
    let mut converged_candidates = Vec::new();
    let mut component_seconds = Vec::new();
    let mut stop_index = None;
    let mut stop_upsilon = None;

    for i in 1..=n {
        let comp_start = Instant::now();
        let basis = complement_basis(&w, n)?;
        let d = basis.reduced_dim;
        let x_red = if i == 1 {
            xw.clone()
        } else {
            basis.g.dot(xw)
        };

        let mut batch = CandidateBatch::init(config.seed, i, l_total, d);
        while batch.t < config.max_iterations && batch.b_active.nrows() > 0 {
            batch.step(&x_red, config.tolerance);
        }
        let converged_count = batch.b_conv.len();

        // rows still active at t = K: kept (flagged non-converged) by
        // default, dropped in strict mode
        let mut eligible: Vec<(Array1<f64>, bool)> = batch
            .b_conv
            .iter()
            .map(|(row, _)| (row.clone(), true))
            .collect();
        if !config.strict_converged_only {
            for row in batch.b_active.rows() {
                eligible.push((row.to_owned(), false));
            }
        }

        if eligible.is_empty() {
            if batch.degenerate >= l_total {
                return Err(OicaError::AllCandidatesDegenerate {
                    candidates: batch.degenerate,
                });
            }
            // strict mode with nothing converged: nothing attracted any
            // candidate within K iterations, so the remainder is treated
            // as Gaussian
            stop_index = Some(i);
            component_seconds.push(comp_start.elapsed().as_secs_f64());
            break;
        }

        // contrast of every finished candidate in one batch product
        let mut b_conv = RealMatrix::zeros((eligible.len(), d));
        for (r, (row, _)) in eligible.iter().enumerate() {
            b_conv.row_mut(r).assign(row);
        }
        let z = b_conv.dot(&x_red);
        let mut best: Option<(f64, usize)> = None;
        for (r, zrow) in z.rows().into_iter().enumerate() {
            let ups = upsilon(kurtosis_alpha(zrow))?;
            match best {
                Some((best_ups, _)) if best_ups >= ups => {}
                _ => best = Some((ups, r)),
            }
        }
        let (best_ups, p) = best.unwrap();

        if config.gaussianity_test && best_ups < gaussianity_threshold(n, i, m) {
            stop_index = Some(i);
            stop_upsilon = Some(best_ups);
            component_seconds.push(comp_start.elapsed().as_secs_f64());
            break;
        }

        let new_row: Array1<f64> = if i == 1 {
            eligible[p].0.clone()
        } else {
            eligible[p].0.dot(&basis.g)
        };
        let mut grown = RealMatrix::zeros((w.nrows() + 1, n));
        grown.slice_mut(ndarray::s![..w.nrows(), ..]).assign(&w);
        grown.row_mut(w.nrows()).assign(&new_row);
        w = grown;

        upsilons.push(best_ups);
        iterations.push(batch.t);
        converged_candidates.push(converged_count);
        component_seconds.push(comp_start.elapsed().as_secs_f64());
    }

    Ok(SeparationResult {
        w,
        upsilons,
        iterations,
        converged_candidates,
        stop_index,
        stop_upsilon,
        component_seconds,
        total_seconds: total_start.elapsed().as_secs_f64(),
    })
}
