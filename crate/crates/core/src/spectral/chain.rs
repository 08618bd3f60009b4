use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

use super::perron::{self, SpectralTriple};

/// Rows may deviate from 1 by at most this much before being rejected.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// A validated irreducible, aperiodic, row-stochastic transition matrix.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    p: CsrMatrix,
    log_p: CsrMatrix,
    pi: Vec<f64>,
    reversible: bool,
    regular_degree: Option<usize>,
}

/// Validates a dense transition matrix. See [`MarkovChain::from_csr`].
pub fn validate_chain(p: &[Vec<f64>]) -> Result<MarkovChain> {
    let m = p.len();
    if m == 0 {
        return Err(Error::NotSquare {
            rows: 0,
            bad_row: 0,
            cols: 0,
        });
    }
    for (i, row) in p.iter().enumerate() {
        if row.len() != m {
            return Err(Error::NotSquare {
                rows: m,
                bad_row: i,
                cols: row.len(),
            });
        }
        for (j, &v) in row.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    MarkovChain::from_csr(CsrMatrix::from_dense(p))
}

impl MarkovChain {
    /// Validates a sparse transition matrix. Explicitly stored zeros are dropped
    /// from the support. Rows within [`ROW_SUM_TOLERANCE`] of 1 are rescaled to
    /// sum to 1.
    pub fn from_csr(p: CsrMatrix) -> Result<Self> {
        let m = p.dim();
        if m == 0 {
            return Err(Error::NotSquare {
                rows: 0,
                bad_row: 0,
                cols: 0,
            });
        }
        let mut rows = Vec::with_capacity(m);
        for i in 0..m {
            let mut row = Vec::with_capacity(p.row_len(i));
            let mut sum = 0.0;
            for (j, v) in p.row(i) {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                if v > 0.0 {
                    row.push((j, v));
                    sum += v;
                }
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowSum { row: i, sum });
            }
            if sum != 1.0 {
                row.iter_mut().for_each(|(_, v)| *v /= sum);
            }
            rows.push(row);
        }
        let p = CsrMatrix::from_rows(rows);
        if !strongly_connected(&p) {
            return Err(Error::NotIrreducible);
        }
        let period = period(&p);
        if period != 1 {
            return Err(Error::NotAperiodic { period });
        }

        let log_p = p.map_entries(|_, _, v| v.ln());
        let regular_degree = uniform_regular_degree(&p);
        let mut chain = MarkovChain {
            p,
            log_p,
            pi: Vec::new(),
            reversible: false,
            regular_degree,
        };
        match detailed_balance_distribution(&chain.p) {
            Some(pi) => {
                chain.pi = pi;
                chain.reversible = true;
            }
            None => {
                let triple = perron::perron_scaled(&chain.p, 1.0, 0.0, None)?;
                chain.pi = triple.left;
            }
        }
        Ok(chain)
    }

    pub fn num_states(&self) -> usize {
        self.p.dim()
    }

    pub fn transitions(&self) -> &CsrMatrix {
        &self.p
    }

    /// `log p_ij` on the support.
    pub fn log_transitions(&self) -> &CsrMatrix {
        &self.log_p
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.p.get(i, j)
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn in_support(&self, i: usize, j: usize) -> bool {
        self.p.get(i, j) > 0.0
    }

    pub fn support(&self) -> Vec<Vec<bool>> {
        let m = self.num_states();
        let mut s = vec![vec![false; m]; m];
        for (i, j, _) in self.p.entries() {
            s[i][j] = true;
        }
        s
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.p.to_dense()
    }

    /// Whether detailed balance holds with the stationary distribution.
    pub fn is_reversible(&self) -> bool {
        self.reversible
    }

    /// `Some(K)` when every row has exactly `K` nonzero entries, all equal to `1/K`.
    pub fn uniform_regular_degree(&self) -> Option<usize> {
        self.regular_degree
    }

    /// `P^(t)` scaled by `exp(-shift)` so that its largest entry is 1, along
    /// with `shift`. Entries are computed in log space.
    pub(crate) fn scaled_power(&self, t: f64) -> (CsrMatrix, f64) {
        let shift = self
            .log_p
            .entries()
            .map(|(_, _, l)| t * l)
            .fold(f64::NEG_INFINITY, f64::max);
        let shift = if t == 0.0 { 0.0 } else { shift };
        (
            self.log_p.map_entries(|_, _, l| (t * l - shift).exp()),
            shift,
        )
    }

    /// Perron triple of `P^(t)`, optionally warm-started from a nearby triple.
    pub fn spectral_triple(&self, t: f64, warm: Option<&SpectralTriple>) -> Result<SpectralTriple> {
        if self.reversible && self.num_states() > perron::DIRECT_POWER_LIMIT {
            perron::perron_reversible(self, t, warm)
        } else {
            let (b, shift) = self.scaled_power(t);
            perron::perron_scaled(&b, t, shift, warm)
        }
    }
}

fn reachable(p: &CsrMatrix, from: usize) -> Vec<bool> {
    let mut seen = vec![false; p.dim()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        for (v, _) in p.row(u) {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

pub(crate) fn strongly_connected(p: &CsrMatrix) -> bool {
    reachable(p, 0).iter().all(|&s| s) && reachable(&p.transpose(), 0).iter().all(|&s| s)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of a strongly connected graph: gcd of `level(u) + 1 - level(v)` over
/// all edges, with BFS levels from node 0.
pub(crate) fn period(p: &CsrMatrix) -> usize {
    let n = p.dim();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for (v, _) in p.row(u) {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g = 0;
    for (u, v, _) in p.entries() {
        let diff = (level[u] + 1).abs_diff(level[v]);
        g = gcd(g, diff);
    }
    g
}

fn uniform_regular_degree(p: &CsrMatrix) -> Option<usize> {
    let k = p.row_len(0);
    let target = 1.0 / k as f64;
    for i in 0..p.dim() {
        if p.row_len(i) != k {
            return None;
        }
        if p.row(i).any(|(_, v)| (v - target).abs() > 4.0 * f64::EPSILON * target) {
            return None;
        }
    }
    Some(k)
}

/// Stationary distribution from detailed balance along a BFS tree, if the
/// chain is reversible. `None` otherwise.
fn detailed_balance_distribution(p: &CsrMatrix) -> Option<Vec<f64>> {
    let n = p.dim();
    let mut log_w = vec![f64::NAN; n];
    log_w[0] = 0.0;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for (v, puv) in p.row(u) {
            if log_w[v].is_nan() {
                let pvu = p.get(v, u);
                if pvu == 0.0 {
                    return None;
                }
                log_w[v] = log_w[u] + puv.ln() - pvu.ln();
                queue.push_back(v);
            }
        }
    }
    let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut pi: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    for (i, j, pij) in p.entries() {
        let forward = pi[i] * pij;
        let backward = pi[j] * p.get(j, i);
        if (forward - backward).abs() > 1e-12 * forward.max(backward) {
            return None;
        }
    }
    Some(pi)
}
