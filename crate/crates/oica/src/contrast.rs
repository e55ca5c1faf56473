//! Scalar contrast machinery: the kurtosis estimate, the non-Gaussianity
//! contrast, and the Gaussianity-test threshold.
//!
//! For a zero-mean unit-variance component `y` the kurtosis estimate is
//! `alpha = sum(y^4)/M - 3` and the contrast is
//! `upsilon(alpha) = alpha - 2 ln(alpha/2 + 1)`, which is nonnegative and
//! vanishes exactly for Gaussian kurtosis.
//!
//! ```
//! use ndarray::Array1;
//! use oica::contrast::{kurtosis_alpha, upsilon};
//!
//! let y = Array1::from_vec(vec![1.0, -1.0, 1.0, -1.0]); // two-point signal
//! let alpha = kurtosis_alpha(y.view());
//! assert_eq!(alpha, -2.0);              // most sub-Gaussian possible
//! assert!(upsilon(-1.0).unwrap() > 0.0);
//! assert_eq!(upsilon(0.0).unwrap(), 0.0);
//! ```

use ndarray::ArrayView1;

use crate::error::{OicaError, Result};

/// Kurtosis estimates closer to -2 than this margin are rejected as
/// degenerate (a two-point distribution).
pub const ALPHA_DOMAIN_MARGIN: f64 = 1e-12;

/// Sample kurtosis estimate `sum(y^4)/M - 3`.
///
/// For any zero-mean unit-variance sample the result is at least -2.
pub fn kurtosis_alpha(y: ArrayView1<f64>) -> f64 {
    let m = y.len() as f64;
    let s4: f64 = y.iter().map(|&v| {
        let v2 = v * v;
        v2 * v2
    }).sum();
    s4 / m - 3.0
}

/// The non-Gaussianity contrast `alpha - 2 ln(alpha/2 + 1)`.
///
/// Defined for `alpha > -2`; values at or below `-2 + 1e-12` signal a
/// degenerate (near two-point) component and raise
/// [`OicaError::DomainError`] rather than returning infinity, so that a
/// silent infinity can never corrupt candidate selection.
pub fn upsilon(alpha: f64) -> Result<f64> {
    if alpha <= -2.0 + ALPHA_DOMAIN_MARGIN {
        return Err(OicaError::DomainError { alpha });
    }
    // analytically nonnegative (zero only at alpha = 0); clamp away the
    // tiny negative values floating-point cancellation produces near zero
    Ok((alpha - 2.0 * (alpha / 2.0 + 1.0).ln()).max(0.0))
}

/// Stopping threshold of the Gaussianity test: `2(N-i+2)(N-i+1)/M`.
///
/// Once the best candidate's contrast falls below this value at extraction
/// step `i` (1-based), the remaining components are declared Gaussian.
pub fn gaussianity_threshold(n: usize, i: usize, m: usize) -> f64 {
    assert!(i >= 1 && i <= n, "component index out of range");
    assert!(m >= 1);
    let a = (n - i + 2) as f64;
    let b = (n - i + 1) as f64;
    2.0 * a * b / m as f64
}
