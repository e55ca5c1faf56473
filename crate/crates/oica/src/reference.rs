//! Single-threaded deflation ordering ICA: the correctness oracle for the
//! batched algorithm.
//!
//! Components are extracted one by one. For each component, `L` randomly
//! initialized fixed-point Newton runs are performed under an explicit
//! orthogonality projection against the rows already extracted, the run
//! with the largest contrast wins, and extraction stops once the winner
//! falls below the Gaussianity threshold.

use std::time::Instant;

use ndarray::Array1;

use crate::config::OrderingConfig;
use crate::contrast::{gaussianity_threshold, kurtosis_alpha, upsilon};
use crate::error::{OicaError, Result};
use crate::fast::complement_basis;
use crate::linalg::{norm, signed_min_distance};
use crate::result::SeparationResult;
use crate::rng::{candidate_rng, random_unit_vector};
use crate::signal::RealMatrix;

/// Norm below which a projected candidate is considered annihilated.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// Outcome of a single fixed-point run.
#[derive(Debug, Clone)]
pub struct OneUnitResult {
    /// Unit-norm direction in whitened coordinates.
    pub w: Array1<f64>,
    /// Recovered component `w^T X`.
    pub y: Array1<f64>,
    /// Newton iterations performed.
    pub iterations: usize,
    /// Whether the sign-invariant test `min(|w - w'|, |w + w'|) <= eps`
    /// was met before the iteration cap.
    pub converged: bool,
}

/// Deflation state carried between component extractions.
#[derive(Debug, Clone)]
pub struct DeflationState {
    /// Rows extracted so far, orthonormal.
    pub w: RealMatrix,
    /// Projection matrix `W^T W`, recomputed from `w` at each step.
    pub e: RealMatrix,
    /// 1-based index of the component being extracted.
    pub component_index: usize,
}

impl DeflationState {
    pub fn new(n: usize) -> Self {
        Self {
            w: RealMatrix::zeros((0, n)),
            e: RealMatrix::zeros((n, n)),
            component_index: 1,
        }
    }

    /// Appends a row and recomputes the projection matrix.
    pub fn push(&mut self, row: &Array1<f64>) {
        let mut w = RealMatrix::zeros((self.w.nrows() + 1, self.w.ncols()));
        w.slice_mut(ndarray::s![..self.w.nrows(), ..]).assign(&self.w);
        w.row_mut(self.w.nrows()).assign(row);
        self.e = w.t().dot(&w);
        self.w = w;
        self.component_index += 1;
    }
}

/// One fixed-point Newton run of the kurtosis contrast.
///
/// Iterates update, projection against `E = W^T W`, and normalization from
/// `w0`, at most `k` times, stopping when the sign-invariant distance to
/// the previous iterate drops to `eps`. Fails with
/// [`OicaError::DegenerateCandidate`] when a projection annihilates the
/// vector (the start lay in the span of extracted components).
pub fn fastica_one_unit(
    w0: &Array1<f64>,
    xw: &RealMatrix,
    e: &RealMatrix,
    k: usize,
    eps: f64,
) -> Result<OneUnitResult> {
    let m = xw.ncols() as f64;
    let mut w = w0 - &e.dot(w0);
    let n0 = norm(w.view());
    if n0 < DEGENERACY_FLOOR {
        return Err(OicaError::DegenerateCandidate);
    }
    w /= n0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < k {
        let w_prev = w.clone();
        let y = w.dot(xw);
        let y3 = y.mapv(|v| v * v * v);
        w = xw.dot(&y3) / m - &(w * 3.0);
        w = &w - &e.dot(&w);
        let nw = norm(w.view());
        if nw < DEGENERACY_FLOOR {
            return Err(OicaError::DegenerateCandidate);
        }
        w /= nw;
        iterations += 1;
        if signed_min_distance(w.view(), w_prev.view()) <= eps {
            converged = true;
            break;
        }
    }
    let y = w.dot(xw);
    Ok(OneUnitResult {
        w,
        y,
        iterations,
        converged,
    })
}

/// Ordering ICA by sequential deflation over `L` candidate runs per
/// component, with the Gaussianity stopping test.
///
/// Deterministic in `(xw, config)`: candidate `l` of component `i` always
/// draws from the stream derived for `(seed, i, l)`. Degenerate candidates
/// are discarded from the selection; if all `L` degenerate the run fails
/// with [`OicaError::AllCandidatesDegenerate`].
pub fn ordering_ica_reference(xw: &RealMatrix, config: &OrderingConfig) -> Result<SeparationResult> {
    if config.candidates == 0 {
        return Err(OicaError::InvalidMatrix("L must be at least 1".into()));
    }
    let n = xw.nrows();
    let m = xw.ncols();
    let total_start = Instant::now();

    let mut state = DeflationState::new(n);
    let mut upsilons = Vec::new();
    let mut iterations = Vec::new();
    let mut converged_candidates = Vec::new();
    let mut component_seconds = Vec::new();
    let mut stop_index = None;
    let mut stop_upsilon = None;

    for i in 1..=n {
        let comp_start = Instant::now();
        let basis = if config.matched_init {
            Some(complement_basis(&state.w, n)?)
        } else {
            None
        };
        let mut best: Option<(f64, OneUnitResult)> = None;
        let mut converged_count = 0usize;
        let mut degenerate = 0usize;
        for l in 0..config.candidates {
            let mut rng = candidate_rng(config.seed, i, l);
            let w0 = match &basis {
                Some(b) => {
                    let b0 = random_unit_vector(&mut rng, b.reduced_dim);
                    b.g.t().dot(&b0)
                }
                None => random_unit_vector(&mut rng, n),
            };
            let run = match fastica_one_unit(&w0, xw, &state.e, config.max_iterations, config.tolerance)
            {
                Ok(run) => run,
                Err(OicaError::DegenerateCandidate) => {
                    degenerate += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if run.converged {
                converged_count += 1;
            }
            let alpha = kurtosis_alpha(run.y.view());
            let ups = upsilon(alpha)?;
            match &best {
                Some((best_ups, _)) if *best_ups >= ups => {}
                _ => best = Some((ups, run)),
            }
        }
        let (best_ups, best_run) = best.ok_or(OicaError::AllCandidatesDegenerate {
            candidates: degenerate,
        })?;
        if config.gaussianity_test && best_ups < gaussianity_threshold(n, i, m) {
            stop_index = Some(i);
            stop_upsilon = Some(best_ups);
            component_seconds.push(comp_start.elapsed().as_secs_f64());
            break;
        }
        state.push(&best_run.w);
        upsilons.push(best_ups);
        iterations.push(best_run.iterations);
        converged_candidates.push(converged_count);
        component_seconds.push(comp_start.elapsed().as_secs_f64());
    }

    Ok(SeparationResult {
        w: state.w,
        upsilons,
        iterations,
        converged_candidates,
        stop_index,
        stop_upsilon,
        component_seconds,
        total_seconds: total_start.elapsed().as_secs_f64(),
    })
}
