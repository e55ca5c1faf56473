//! Step-level checks that the batched solver walks exactly the deflation
//! solver's trajectories when their candidate initializations are matched.
//!
//! With `W` the extracted rows and `G` the orthonormal complement basis,
//! `G^T G = I - W^T W` is the orthogonal projector onto the complement.
//! For a reduced candidate `b` and its full-space image `w = G^T b`, the
//! reduced component equals the full one (`b(GX) = wX`), and mapping the
//! reduced Newton update back through `G^T` lands on the projected
//! full-space update with the same norm. Hence the iterates agree for
//! every step, not just in the limit.

use ndarray::Array1;

use oica::config::OrderingConfig;
use oica::fast::{batch_newton_step, complement_basis, ordering_ica_fast};
use oica::reference::{fastica_one_unit, ordering_ica_reference};
use oica::rng::{candidate_rng, random_unit_vector};
use oica::signal::{preprocess, RealMatrix, DEFAULT_EIG_FLOOR};
use oica::sourcegen::{gen_dataset, SourceSpec};

fn instance(n: usize, m: usize, seed: u64) -> RealMatrix {
    let mut rhos = vec![1.0, 6.0];
    rhos.extend(std::iter::repeat(0.7).take(n.saturating_sub(3)));
    let spec = SourceSpec {
        rhos,
        gaussian_count: 1,
        samples: m,
        seed,
        identity_mixing: false,
    };
    let ds = gen_dataset(&spec).unwrap();
    preprocess(&ds.observed, DEFAULT_EIG_FLOOR).unwrap().0
}

#[test]
fn reduced_step_matches_projected_full_step() {
    // extract a couple of rows first, then compare one reduced batch step
    // against the projected one-unit step for several starts
    for (n, seed) in [(4usize, 1u64), (5, 2), (6, 3)] {
        let xw = instance(n, 4000, seed);
        let cfg = OrderingConfig::new(8, 11);
        let full = ordering_ica_fast(&xw, &cfg).unwrap();
        let rows = full.w.nrows().min(n - 2).max(1);
        let w = full.w.slice(ndarray::s![..rows, ..]).to_owned();
        let e = w.t().dot(&w);
        let basis = complement_basis(&w, n).unwrap();
        let x_red = basis.g.dot(&xw);

        for l in 0..6usize {
            let mut rng = candidate_rng(99, 1, l);
            let b0 = random_unit_vector(&mut rng, basis.reduced_dim);
            let w0: Array1<f64> = basis.g.t().dot(&b0);

            let mut b = RealMatrix::zeros((1, basis.reduced_dim));
            b.row_mut(0).assign(&b0);
            let mut w_full = w0.clone();
            for _step in 0..5 {
                b = batch_newton_step(&b, &x_red).unwrap();
                // k=1, eps=0 forces exactly one projected update
                let one = fastica_one_unit(&w_full, &xw, &e, 1, 0.0).unwrap();
                w_full = one.w;
                let lifted: Array1<f64> = basis.g.t().dot(&b.row(0).to_owned());
                let dev = lifted
                    .iter()
                    .zip(w_full.iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                assert!(dev < 1e-9, "n={n} l={l}: step deviation {dev}");
            }
        }
    }
}

#[test]
fn matched_init_full_runs_agree() {
    for seed in 0..5u64 {
        let xw = instance(5, 5000, 40 + seed);
        let mut cfg = OrderingConfig::new(3, seed);
        cfg.matched_init = true;
        let rf = ordering_ica_reference(&xw, &cfg).unwrap();
        let ff = ordering_ica_fast(&xw, &cfg).unwrap();
        assert_eq!(rf.stop_index, ff.stop_index);
        assert_eq!(rf.w.nrows(), ff.w.nrows());
        assert_eq!(rf.upsilons.len(), ff.upsilons.len());
        for (ur, uf) in rf.upsilons.iter().zip(&ff.upsilons) {
            assert!((ur - uf).abs() < 1e-9, "upsilon {ur} vs {uf}");
        }
        for (a, b) in rf.w.rows().into_iter().zip(ff.w.rows()) {
            let direct = a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            let flipped = a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| (x + y).abs())
                .fold(0.0f64, f64::max);
            assert!(direct.min(flipped) < 1e-6);
        }
    }
}
