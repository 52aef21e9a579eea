//! Spectral gap of a reversible chain.
//!
//! The gap is the second smallest eigenvalue of
//! `S = D^{1/2} (-L) D^{-1/2}` with `D = diag(pi)`, which is symmetric by
//! detailed balance. Small chains use a dense solver; larger ones run
//! Lanczos on `S` restricted to the complement of `sqrt(pi)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::chain::MarkovChain;

use super::sampling::{rng_for, Purpose};

/// Largest chain handled by the dense solver.
pub const DENSE_LIMIT: usize = 5000;
/// Residual tolerance of the iterative solver, relative to the operator scale.
pub const LANCZOS_TOL: f64 = 1e-10;
const LANCZOS_MAX_STEPS: usize = 600;

fn symmetric_entry(chain: &MarkovChain, x: usize, y: usize, q: f64) -> f64 {
    let pi = chain.pi();
    let back = chain.rate(y, x);
    // average the two sides so rounding cannot break symmetry
    -0.5 * (q * (pi[x] / pi[y]).sqrt() + back * (pi[y] / pi[x]).sqrt())
}

/// All eigenvalues of `-L` in increasing order, from the dense solver.
pub fn spectrum(chain: &MarkovChain) -> Vec<f64> {
    let n = chain.len();
    let mut s = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        s[(x, x)] = chain.exit_rate(x);
        for &(y, q) in chain.row(x) {
            s[(x, y)] = symmetric_entry(chain, x, y, q);
        }
    }
    let mut values: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// The smallest nonzero eigenvalue of `-L`, clamped at 0.
pub fn spectral_gap(chain: &MarkovChain) -> f64 {
    if chain.len() < 2 {
        return 0.0;
    }
    let gap = if chain.len() <= DENSE_LIMIT {
        spectrum(chain)[1]
    } else {
        lanczos_gap(chain)
    };
    gap.max(0.0)
}

fn apply(chain: &MarkovChain, v: &[f64]) -> Vec<f64> {
    (0..chain.len())
        .map(|x| {
            let mut acc = chain.exit_rate(x) * v[x];
            for &(y, q) in chain.row(x) {
                acc += symmetric_entry(chain, x, y, q) * v[y];
            }
            acc
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Lanczos with full reorthogonalization, deflating the kernel `sqrt(pi)`.
pub(crate) fn lanczos_gap(chain: &MarkovChain) -> f64 {
    let n = chain.len();
    let root: Vec<f64> = chain.pi().iter().map(|p| p.sqrt()).collect();
    let scale = (0..n).map(|x| 2.0 * chain.exit_rate(x)).fold(1.0, f64::max);
    let mut rng = rng_for(0, Purpose::Lanczos, 0);
    let mut v: Vec<f64> = (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let deflate = |v: &mut Vec<f64>| {
        let c = dot(v, &root);
        axpy(v, -c, &root);
    };
    deflate(&mut v);
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|e| *e /= norm);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let steps = LANCZOS_MAX_STEPS.min(n - 1);
    let mut estimate = f64::INFINITY;
    for k in 0..steps {
        let mut w = apply(chain, &basis[k]);
        let a = dot(&w, &basis[k]);
        alpha.push(a);
        for _ in 0..2 {
            deflate(&mut w);
            for b in &basis {
                let c = dot(&w, b);
                axpy(&mut w, -c, b);
            }
        }
        let b = dot(&w, &w).sqrt();
        let (theta, last) = smallest_ritz(&alpha, &beta);
        estimate = theta;
        if (b * last).abs() <= LANCZOS_TOL * scale || b <= LANCZOS_TOL * scale {
            break;
        }
        beta.push(b);
        w.iter_mut().for_each(|e| *e /= b);
        basis.push(w);
    }
    estimate
}

/// Smallest eigenvalue of the tridiagonal matrix and the last component of
/// its eigenvector.
fn smallest_ritz(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let y: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
    (theta, y[m - 1])
}
