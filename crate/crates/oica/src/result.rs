//! Output of a separation run.

use std::fmt;

use crate::signal::RealMatrix;

/// Which algorithm produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Reference,
    Fast,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Reference => "reference",
            Algorithm::Fast => "fast",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "reference" => Some(Algorithm::Reference),
            "fast" => Some(Algorithm::Fast),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Separating matrix and per-component diagnostics.
///
/// `w` lives in whitened coordinates with rows ordered by extraction;
/// compose with the whitening matrix to unmix raw signals.
#[derive(Debug, Clone)]
pub struct SeparationResult {
    /// Extracted rows, orthonormal, ordered by descending contrast.
    pub w: RealMatrix,
    /// Winning candidate's contrast per extracted component.
    pub upsilons: Vec<f64>,
    /// Newton iterations spent per extracted component (the winning
    /// candidate's count for the reference algorithm, the batch loop
    /// count for the fast one).
    pub iterations: Vec<usize>,
    /// Candidates that met the convergence test per component.
    pub converged_candidates: Vec<usize>,
    /// 1-based component index at which the Gaussianity test fired, or
    /// `None` if every component was extracted.
    pub stop_index: Option<usize>,
    /// Contrast of the best candidate at the stopping step.
    pub stop_upsilon: Option<f64>,
    /// Wall-clock seconds spent per component (timing only; not part of
    /// the deterministic output).
    pub component_seconds: Vec<f64>,
    /// Total wall-clock seconds of the algorithm loop.
    pub total_seconds: f64,
}

impl SeparationResult {
    /// Number of extracted components.
    pub fn extracted(&self) -> usize {
        self.w.nrows()
    }
}
