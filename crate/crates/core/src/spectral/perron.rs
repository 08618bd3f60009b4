//! Perron–Frobenius eigen-triples of nonnegative irreducible matrices.
//!
//! The general path is a shifted power iteration run on the matrix and its
//! transpose at the same time. Iterates are renormalized to unit sup-norm at
//! every step and the shift `σ = λ̂/2` damps eigenvalues on the spectral circle,
//! which otherwise stall the iteration on nearly periodic supports.
//!
//! Reversible chains with many states use a restarted Lanczos solver on the
//! symmetrization `Π^{t/2} P^(t) Π^{-t/2}`, which converges in roughly the
//! square root of the iterations power iteration needs on slowly mixing graphs
//! (lattices, rings).

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

use super::chain::{strongly_connected, MarkovChain};

/// Residual target, relative to `λ` and the sup-norm of the iterate.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;
/// Minimum iteration budget for the power method.
pub const MIN_ITERATIONS: usize = 20_000;
/// Reversible chains above this size are solved with Lanczos.
pub const DIRECT_POWER_LIMIT: usize = 16;

const LANCZOS_BASIS: usize = 64;
const LANCZOS_RESTARTS: usize = 2_000;
/// Residual accepted from the Lanczos path when checked against `P^(t)` itself.
const ACCEPT_RESIDUAL: f64 = 1e-10;

/// Perron eigenvalue and positive eigenvectors of a Hadamard power `P^(t)`.
///
/// `left` sums to one and `left · right = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralTriple {
    pub t: f64,
    pub lambda: f64,
    /// `ln lambda`, kept separately since `lambda` itself can overflow for
    /// large `|t|`.
    pub log_lambda: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// Iteration cap for an `m`-state matrix at exponent `t`.
pub fn iteration_cap(m: usize, t: f64) -> usize {
    let scaled = 100.0 * m as f64 * (1.0 + t.abs());
    (scaled.min(1e9) as usize).max(MIN_ITERATIONS)
}

/// Perron triple of an arbitrary nonnegative irreducible matrix. `t` is
/// recorded in the result and used only for the iteration budget.
pub fn perron(matrix: &CsrMatrix, t: f64) -> Result<SpectralTriple> {
    if matrix.dim() == 0 {
        return Err(Error::NotSquare {
            rows: 0,
            bad_row: 0,
            cols: 0,
        });
    }
    let mut top = 0.0f64;
    for (i, j, v) in matrix.entries() {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::NegativeEntry {
                row: i,
                col: j,
                value: v,
            });
        }
        top = top.max(v);
    }
    let pattern = CsrMatrix::from_rows(
        (0..matrix.dim())
            .map(|i| matrix.row(i).filter(|&(_, v)| v > 0.0).collect())
            .collect(),
    );
    if !strongly_connected(&pattern) {
        return Err(Error::NotIrreducible);
    }
    let scaled = pattern.map_entries(|_, _, v| v / top);
    perron_scaled(&scaled, t, top.ln(), None)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn relative_residual(image: &[f64], v: &[f64], lambda: f64) -> f64 {
    let r = image
        .iter()
        .zip(v)
        .fold(0.0f64, |m, (y, x)| m.max((y - lambda * x).abs()));
    r / (lambda * sup_norm(v))
}

/// Power iteration on `scaled = P^(t) · exp(-shift)`.
pub(crate) fn perron_scaled(
    scaled: &CsrMatrix,
    t: f64,
    shift: f64,
    warm: Option<&SpectralTriple>,
) -> Result<SpectralTriple> {
    let m = scaled.dim();
    let usable = |v: &Vec<f64>| v.len() == m && v.iter().all(|x| x.is_finite() && *x > 0.0);
    let (mut left, mut right) = match warm {
        Some(w) if usable(&w.left) && usable(&w.right) => (w.left.clone(), w.right.clone()),
        _ => (vec![1.0; m], vec![1.0; m]),
    };
    let nl = sup_norm(&left);
    left.iter_mut().for_each(|x| *x /= nl);
    let nr = sup_norm(&right);
    right.iter_mut().for_each(|x| *x /= nr);

    let cap = iteration_cap(m, t);
    let mut image_r = vec![0.0; m];
    let mut image_l = vec![0.0; m];
    let mut residual = f64::INFINITY;
    for _ in 0..cap {
        scaled.mul_vec(&right, &mut image_r);
        scaled.vec_mul(&left, &mut image_l);
        let lambda = dot(&left, &image_r) / dot(&left, &right);
        residual = relative_residual(&image_r, &right, lambda)
            .max(relative_residual(&image_l, &left, lambda));
        if residual <= RESIDUAL_TOLERANCE {
            return Ok(finish(t, shift, lambda, left, right));
        }
        let sigma = 0.5 * lambda;
        for (x, y) in right.iter_mut().zip(&image_r) {
            *x = y + sigma * *x;
        }
        for (x, y) in left.iter_mut().zip(&image_l) {
            *x = y + sigma * *x;
        }
        let nr = sup_norm(&right);
        right.iter_mut().for_each(|x| *x /= nr);
        let nl = sup_norm(&left);
        left.iter_mut().for_each(|x| *x /= nl);
    }
    Err(Error::Convergence {
        what: "Perron power iteration",
        iterations: cap,
        residual,
    })
}

fn finish(t: f64, shift: f64, lambda_scaled: f64, mut left: Vec<f64>, mut right: Vec<f64>) -> SpectralTriple {
    let s: f64 = left.iter().sum();
    left.iter_mut().for_each(|x| *x /= s);
    let ab = dot(&left, &right);
    right.iter_mut().for_each(|x| *x /= ab);
    let log_lambda = shift + lambda_scaled.ln();
    SpectralTriple {
        t,
        lambda: log_lambda.exp(),
        log_lambda,
        left,
        right,
    }
}

/// Lanczos path for reversible chains.
pub(crate) fn perron_reversible(
    chain: &MarkovChain,
    t: f64,
    warm: Option<&SpectralTriple>,
) -> Result<SpectralTriple> {
    let m = chain.num_states();
    let log_pi: Vec<f64> = chain.stationary().iter().map(|p| p.ln()).collect();
    let half = 0.5 * t;
    let exponent = |i: usize, j: usize, l: f64| t * l + half * (log_pi[i] - log_pi[j]);
    let sym_shift = chain
        .log_transitions()
        .entries()
        .map(|(i, j, l)| exponent(i, j, l))
        .fold(f64::NEG_INFINITY, f64::max);
    let sym = chain
        .log_transitions()
        .map_entries(|i, j, l| (exponent(i, j, l) - sym_shift).exp());

    let start: Vec<f64> = match warm {
        Some(w) if w.left.len() == m && w.right.len() == m => w
            .left
            .iter()
            .zip(&w.right)
            .map(|(a, b)| (a * b).max(0.0).sqrt())
            .collect(),
        _ => vec![1.0; m],
    };
    let (theta, u) = lanczos_top(&sym, start)?;

    let weights = |sign: f64| -> Vec<f64> {
        let e: Vec<f64> = log_pi.iter().map(|l| sign * half * l).collect();
        let top = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        u.iter().zip(&e).map(|(x, l)| x * (l - top).exp()).collect()
    };
    let right = weights(-1.0);
    let left = weights(1.0);

    let (scaled, shift) = chain.scaled_power(t);
    let lambda_scaled = (sym_shift - shift + theta.ln()).exp();
    let mut image = vec![0.0; m];
    scaled.mul_vec(&right, &mut image);
    let mut residual = relative_residual(&image, &right, lambda_scaled);
    scaled.vec_mul(&left, &mut image);
    residual = residual.max(relative_residual(&image, &left, lambda_scaled));
    if residual <= ACCEPT_RESIDUAL && u.iter().all(|&x| x > 0.0) {
        Ok(finish(t, shift, lambda_scaled, left, right))
    } else {
        let seed = finish(t, shift, lambda_scaled, left, right);
        perron_scaled(&scaled, t, shift, Some(&seed))
    }
}

/// Largest eigenpair of a symmetric nonnegative matrix by restarted Lanczos
/// with full reorthogonalization. Returns the eigenvector with unit 2-norm and
/// positive sum.
fn lanczos_top(sym: &CsrMatrix, start: Vec<f64>) -> Result<(f64, Vec<f64>)> {
    let m = sym.dim();
    let k = LANCZOS_BASIS.min(m);
    let mut v = start;
    let norm = dot(&v, &v).sqrt();
    if !(norm > 0.0) {
        v = vec![1.0; m];
    }
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    let mut w = vec![0.0; m];
    let mut residual = f64::INFINITY;
    for _ in 0..LANCZOS_RESTARTS {
        let mut basis: Vec<Vec<f64>> = vec![v.clone()];
        let mut alpha = Vec::with_capacity(k);
        let mut beta = Vec::with_capacity(k);
        for j in 0..k {
            sym.mul_vec(&basis[j], &mut w);
            alpha.push(dot(&basis[j], &w));
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = dot(&w, &w).sqrt();
            if j + 1 == k || b <= 1e-14 * alpha[j].abs().max(f64::MIN_POSITIVE) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }

        let n = alpha.len();
        let mut tri = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            tri[(i, i)] = alpha[i];
            if i + 1 < n {
                tri[(i, i + 1)] = beta[i];
                tri[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(tri);
        let (top, theta) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, x)| if x > acc.1 { (i, x) } else { acc });
        let y = eig.eigenvectors.column(top);

        let mut u = vec![0.0; m];
        for (coef, q) in y.iter().zip(&basis) {
            u.iter_mut().zip(q).for_each(|(x, qi)| *x += coef * qi);
        }
        if u.iter().sum::<f64>() < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
        let nu = dot(&u, &u).sqrt();
        u.iter_mut().for_each(|x| *x /= nu);

        sym.mul_vec(&u, &mut w);
        residual = w
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - theta * b).powi(2))
            .sum::<f64>()
            .sqrt()
            / theta;
        if residual <= RESIDUAL_TOLERANCE {
            return Ok((theta, u));
        }
        v = u;
    }
    Err(Error::Convergence {
        what: "Lanczos",
        iterations: LANCZOS_RESTARTS * k,
        residual,
    })
}
