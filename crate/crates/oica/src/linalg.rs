//! Small dense linear-algebra helpers: a cyclic Jacobi eigensolver for
//! symmetric matrices and a few vector utilities.
//!
//! Signal dimensions in this crate are modest (tens of channels), so a
//! dependency-free Jacobi sweep is both fast enough and fully deterministic.

use ndarray::{Array1, Array2, ArrayView1};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues sorted in
/// descending order and eigenvectors as the corresponding columns.
/// Each eigenvector's sign is fixed so that its largest-magnitude entry is
/// positive, which makes the decomposition reproducible across platforms.
pub fn sym_eig(a: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "sym_eig requires a square matrix");
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);

    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-15 * frob.max(1e-300);

    for _sweep in 0..100 {
        let off: f64 = {
            let mut s = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    s += m[[p, q]] * m[[p, q]];
                }
            }
            (2.0 * s).sqrt()
        };
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap());

    let mut eigenvalues = Array1::<f64>::zeros(n);
    let mut eigenvectors = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues[dst] = m[[src, src]];
        let mut col = v.column(src).to_owned();
        // sign convention: largest-|entry| positive
        let mut best = 0;
        for k in 1..n {
            if col[k].abs() > col[best].abs() {
                best = k;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|x| -x);
        }
        eigenvectors.column_mut(dst).assign(&col);
    }
    (eigenvalues, eigenvectors)
}

pub fn norm(v: ArrayView1<f64>) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sign-invariant distance between unit vectors: min(|a-b|, |a+b|).
pub fn signed_min_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let mut dm = 0.0;
    let mut dp = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        dm += (x - y) * (x - y);
        dp += (x + y) * (x + y);
    }
    dm.min(dp).sqrt()
}
