//! Synthetic benchmark data: generalized-Gaussian sources with unit
//! variance, Gaussian noise rows, and a random well-conditioned mixing
//! matrix.
//!
//! The generalized Gaussian has density proportional to
//! `exp(-(|u|/beta)^rho)`; `rho = 2` is Gaussian, smaller `rho` gives
//! heavier tails (positive kurtosis), larger `rho` flatter ones (negative
//! kurtosis). `beta` is always chosen for unit variance.

use ndarray::Array1;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{OicaError, Result};
use crate::linalg::sym_eig;
use crate::rng::{mixing_rng, source_rng};
use crate::signal::{Dataset, RealMatrix};

/// Condition-number cap for generated mixing matrices.
const MIXING_CONDITION_LIMIT: f64 = 1e6;
const MIXING_MAX_ATTEMPTS: usize = 100;

/// Recipe for a synthetic dataset: one generalized-Gaussian row per shape
/// parameter, plus standard-normal noise rows, mixed by a random matrix.
#[derive(Debug, Clone)]
pub struct SourceSpec {
    /// Shape parameters, one source row each; all must be positive.
    pub rhos: Vec<f64>,
    /// Number of standard-normal rows appended after the shaped rows.
    pub gaussian_count: usize,
    /// Samples per row.
    pub samples: usize,
    pub seed: u64,
    /// Test hook: skip the random mixing matrix and use the identity.
    pub identity_mixing: bool,
}

/// Scale giving the generalized Gaussian unit variance:
/// `sqrt(Gamma(1/rho) / Gamma(3/rho))`.
///
/// Computed through log-gamma; the gamma ratios overflow f64 long before
/// the smallest grid shapes otherwise.
pub fn gg_beta(rho: f64) -> f64 {
    assert!(rho > 0.0);
    (0.5 * (ln_gamma(1.0 / rho) - ln_gamma(3.0 / rho))).exp()
}

/// Population kurtosis of the unit-variance generalized Gaussian:
/// `Gamma(5/rho) Gamma(1/rho) / Gamma(3/rho)^2 - 3`.
///
/// ```
/// use oica::sourcegen::{gg_kurtosis, paper_rho_grid};
///
/// assert!(gg_kurtosis(2.0).abs() < 1e-12);          // Gaussian
/// assert!((gg_kurtosis(1.0) - 3.0).abs() < 1e-12);  // Laplace
/// let grid = paper_rho_grid();
/// assert_eq!(grid.len(), 20);
/// ```
pub fn gg_kurtosis(rho: f64) -> f64 {
    assert!(rho > 0.0);
    (ln_gamma(5.0 / rho) + ln_gamma(1.0 / rho) - 2.0 * ln_gamma(3.0 / rho)).exp() - 3.0
}

/// Draws `m` i.i.d. generalized-Gaussian samples via the gamma transform
/// `u = s . beta . g^(1/rho)` with `s` a random sign and
/// `g ~ Gamma(1/rho, 1)`.
pub fn gg_sample(rho: f64, m: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    assert!(rho > 0.0);
    let beta = gg_beta(rho);
    let gamma = Gamma::new(1.0 / rho, 1.0).expect("valid gamma shape");
    Array1::from_shape_fn(m, |_| {
        let g: f64 = gamma.sample(rng);
        let sign = if rng.gen::<f64>() < 0.5 { -1.0 } else { 1.0 };
        sign * beta * g.powf(1.0 / rho)
    })
}

/// The 20-value benchmark shape grid `2 * 2^(i/4)` for
/// `i in {-10..-1, 1..10}`, ascending. Ten values below 2 (positive
/// kurtosis) and ten above (negative kurtosis); exactly 2 is excluded.
pub fn paper_rho_grid() -> Vec<f64> {
    (-10..=10)
        .filter(|&i| i != 0)
        .map(|i| 2.0 * 2.0f64.powf(i as f64 / 4.0))
        .collect()
}

fn condition_number(a: &RealMatrix) -> f64 {
    let (vals, _) = sym_eig(&a.t().dot(a));
    let max = vals[0].max(0.0);
    let min = vals[vals.len() - 1];
    if min <= 0.0 {
        f64::INFINITY
    } else {
        (max / min).sqrt()
    }
}

/// Generates sources, a mixing matrix, and the observed mixture
/// `X = A . S`.
///
/// Source row `r` draws from its own stream, so changing one shape
/// parameter never perturbs the other rows. Mixing matrices with condition
/// number at or above 1e6 are rejected and redrawn, up to 100 attempts.
pub fn gen_dataset(spec: &SourceSpec) -> Result<Dataset> {
    let n = spec.rhos.len() + spec.gaussian_count;
    if n == 0 {
        return Err(OicaError::InvalidMatrix("no source rows requested".into()));
    }
    if spec.samples == 0 {
        return Err(OicaError::InvalidMatrix("sample count must be positive".into()));
    }
    for &rho in &spec.rhos {
        if !(rho > 0.0) {
            return Err(OicaError::InvalidMatrix(format!("rho must be positive, got {rho}")));
        }
    }

    let mut sources = RealMatrix::zeros((n, spec.samples));
    let mut true_kurtoses = Vec::with_capacity(n);
    for (r, &rho) in spec.rhos.iter().enumerate() {
        let mut rng = source_rng(spec.seed, r);
        sources.row_mut(r).assign(&gg_sample(rho, spec.samples, &mut rng));
        true_kurtoses.push(gg_kurtosis(rho));
    }
    for g in 0..spec.gaussian_count {
        let r = spec.rhos.len() + g;
        let mut rng = source_rng(spec.seed, r);
        sources
            .row_mut(r)
            .assign(&Array1::from_shape_fn(spec.samples, |_| {
                StandardNormal.sample(&mut rng)
            }));
        true_kurtoses.push(0.0);
    }

    let mixing = if spec.identity_mixing {
        RealMatrix::eye(n)
    } else {
        let mut found = None;
        for attempt in 0..MIXING_MAX_ATTEMPTS {
            let mut rng = mixing_rng(spec.seed, attempt);
            let a = RealMatrix::from_shape_fn((n, n), |_| StandardNormal.sample(&mut rng));
            if condition_number(&a) < MIXING_CONDITION_LIMIT {
                found = Some(a);
                break;
            }
        }
        found.ok_or(OicaError::MixingGenerationFailed {
            attempts: MIXING_MAX_ATTEMPTS,
        })?
    };

    let observed = mixing.dot(&sources);
    Ok(Dataset {
        observed,
        mixing: Some(mixing),
        sources: Some(sources),
        true_kurtoses: Some(true_kurtoses),
    })
}
