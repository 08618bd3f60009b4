//! Likelihood-ratio detection of a random walk in white Gaussian noise.
//!
//! Under `H0` every entry of the `M × N` data matrix is standard normal. Under
//! `H1` a walk `s_1 … s_N` of the chain is hidden in the data: column `n` has
//! mean `β` at row `s_n` and zero elsewhere.
//!
//! The likelihood ratio is the matrix product `πᵀ D_1 P D_2 … P D_N 1` with
//! `D_n = diag(exp(β y_{i,n} − β²/2))`. [`LikelihoodFilter`] propagates the row
//! vector one column at a time, rescaling it to unit sup-norm after every step
//! and carrying the logarithms of the scale factors.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{fmt_f64, read_numeric_csv, write_csv};
use crate::rng::{stream, stream_rng};
use crate::spectral::MarkovChain;

/// Largest number of state sequences [`brute_force_llr`] will sum over.
pub const MAX_BRUTE_FORCE_PATHS: f64 = 1e7;
/// Thresholds used by [`estimate_roc`].
pub const ROC_POINTS: usize = 99;

/// `M × N` measurements, stored column by column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observations {
    m: usize,
    n: usize,
    y: Vec<f64>,
    /// Hidden path (0-based) for data simulated under `H1`.
    pub truth: Option<Vec<usize>>,
}

impl Observations {
    /// From column-major data.
    pub fn from_columns(m: usize, n: usize, y: Vec<f64>) -> Result<Self> {
        if y.len() != m * n {
            return Err(Error::DimensionMismatch {
                expected: format!("{m}x{n} = {} values", m * n),
                found: format!("{} values", y.len()),
            });
        }
        Ok(Self { m, n, y, truth: None })
    }

    /// From `M` rows of `N` values each.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: format!("{n} columns"),
                found: format!("{} columns in row {}", r.len(), i + 1),
            });
        }
        let mut y = vec![0.0; m * n];
        for (i, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                y[c * m + i] = v;
            }
        }
        Self::from_columns(m, n, y)
    }

    pub fn with_truth(mut self, truth: Vec<usize>) -> Result<Self> {
        if truth.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: format!("{} states", self.n),
                found: format!("{} states", truth.len()),
            });
        }
        if let Some(&s) = truth.iter().find(|&&s| s >= self.m) {
            return Err(Error::StateOutOfRange { state: s, m: self.m });
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    /// Horizon `N`.
    pub fn horizon(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.y[col * self.m + row]
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.y[col * self.m..(col + 1) * self.m]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.y.chunks_exact(self.m.max(1)).take(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.m).map(|i| (0..self.n).map(|c| self.get(i, c)).collect()).collect()
    }

    /// `M` lines of `N` comma-separated values, no header.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        for row in self.to_rows() {
            let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv(reader: impl BufRead) -> Result<Self> {
        Self::from_rows(&read_numeric_csv(reader)?)
    }
}

/// Standard-normal columns of `H0` data in the order [`simulate_h0`] draws them.
pub struct NoiseColumns {
    rng: ChaCha8Rng,
    col: Vec<f64>,
}

impl NoiseColumns {
    pub fn new(m: usize, seed: u64) -> Self {
        Self {
            rng: stream_rng(seed, 0, stream::H0),
            col: vec![0.0; m],
        }
    }

    pub fn next_column(&mut self) -> &[f64] {
        for v in self.col.iter_mut() {
            *v = StandardNormal.sample(&mut self.rng);
        }
        &self.col
    }
}

/// `M × N` i.i.d. standard normals.
pub fn simulate_h0(m: usize, n: usize, seed: u64) -> Observations {
    let mut cols = NoiseColumns::new(m, seed);
    let mut y = Vec::with_capacity(m * n);
    for _ in 0..n {
        y.extend_from_slice(cols.next_column());
    }
    Observations { m, n, y, truth: None }
}

fn sample_index(rng: &mut impl Rng, weights: impl Iterator<Item = (usize, f64)>) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Noise plus `β` at the walker's position; `s_1 ~ π`, then transitions by `P`.
/// Each column draws the state first, then its `M` noise values.
pub fn simulate_h1(chain: &MarkovChain, beta: f64, n: usize, seed: u64) -> Observations {
    let m = chain.num_states();
    let mut rng = stream_rng(seed, 0, stream::H1);
    let mut y = Vec::with_capacity(m * n);
    let mut truth = Vec::with_capacity(n);
    for c in 0..n {
        let s = if c == 0 {
            sample_index(&mut rng, chain.stationary().iter().copied().enumerate())
        } else {
            sample_index(&mut rng, chain.transitions().row(truth[c - 1]))
        };
        truth.push(s);
        for _ in 0..m {
            y.push(StandardNormal.sample(&mut rng));
        }
        y[c * m + s] += beta;
    }
    Observations {
        m,
        n,
        y,
        truth: Some(truth),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlrResult {
    /// `ln L / N`.
    pub ell: f64,
    /// `ln L`.
    pub log_l: f64,
    pub n: usize,
}

impl LlrResult {
    fn new(log_l: f64, n: usize) -> Self {
        let ell = if n == 0 { 0.0 } else { log_l / n as f64 };
        Self { ell, log_l, n }
    }
}

/// Forward recursion for `ln L`, fed one column at a time.
#[derive(Debug, Clone)]
pub struct LikelihoodFilter<'a> {
    chain: &'a MarkovChain,
    beta: f64,
    v: Vec<f64>,
    scratch: Vec<f64>,
    log_scale: f64,
    steps: usize,
}

impl<'a> LikelihoodFilter<'a> {
    pub fn new(chain: &'a MarkovChain, beta: f64) -> Self {
        let m = chain.num_states();
        Self {
            chain,
            beta,
            v: chain.stationary().to_vec(),
            scratch: vec![0.0; m],
            log_scale: 0.0,
            steps: 0,
        }
    }

    pub fn push(&mut self, column: &[f64]) -> Result<()> {
        let m = self.v.len();
        if column.len() != m {
            return Err(Error::DimensionMismatch {
                expected: format!("{m} rows"),
                found: format!("{} rows", column.len()),
            });
        }
        self.steps += 1;
        if self.beta == 0.0 {
            return Ok(());
        }
        if self.steps > 1 {
            self.chain.transitions().vec_mul(&self.v, &mut self.scratch);
            std::mem::swap(&mut self.v, &mut self.scratch);
        }
        let b = self.beta;
        let half = 0.5 * b * b;
        let shift = column.iter().fold(f64::NEG_INFINITY, |acc, &y| acc.max(b * y)) - half;
        let mut sup = 0.0f64;
        for (v, &y) in self.v.iter_mut().zip(column) {
            *v *= (b * y - half - shift).exp();
            sup = sup.max(*v);
        }
        if !(sup > 0.0 && sup.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "likelihood vector degenerate at step {}",
                self.steps
            )));
        }
        self.v.iter_mut().for_each(|v| *v /= sup);
        self.log_scale += shift + sup.ln();
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `ln L` of the columns pushed so far.
    pub fn log_l(&self) -> f64 {
        if self.beta == 0.0 || self.steps == 0 {
            return 0.0;
        }
        self.log_scale + self.v.iter().sum::<f64>().ln()
    }

    pub fn result(&self) -> LlrResult {
        LlrResult::new(self.log_l(), self.steps)
    }
}

fn check_rows(chain: &MarkovChain, obs: &Observations) -> Result<()> {
    if obs.num_rows() != chain.num_states() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} rows (one per state)", chain.num_states()),
            found: format!("{} rows", obs.num_rows()),
        });
    }
    Ok(())
}

/// Renormalized matrix-product likelihood ratio; `O(nnz(P)·N)` time.
pub fn log_likelihood_ratio(chain: &MarkovChain, beta: f64, obs: &Observations) -> Result<LlrResult> {
    check_rows(chain, obs)?;
    let mut filter = LikelihoodFilter::new(chain, beta);
    for col in obs.columns() {
        filter.push(col)?;
    }
    Ok(filter.result())
}

/// `ln Σ_s P(s)·exp(β Σ_n y_{s_n,n} − Nβ²/2)` summed over all `M^N` state
/// sequences.
pub fn brute_force_llr(chain: &MarkovChain, beta: f64, obs: &Observations) -> Result<LlrResult> {
    check_rows(chain, obs)?;
    let (m, n) = (obs.num_rows(), obs.horizon());
    let count = (m as f64).powi(n as i32);
    if count > MAX_BRUTE_FORCE_PATHS {
        return Err(Error::TooManyPaths {
            count,
            limit: MAX_BRUTE_FORCE_PATHS,
        });
    }
    if beta == 0.0 || n == 0 {
        return Ok(LlrResult::new(0.0, n));
    }
    let mut acc = LogSumExp::default();
    let mut path = vec![0usize; n];
    let pi = chain.stationary();
    loop {
        let mut w = pi[path[0]].ln() + beta * obs.get(path[0], 0);
        for c in 1..n {
            let p = chain.prob(path[c - 1], path[c]);
            if p == 0.0 {
                w = f64::NEG_INFINITY;
                break;
            }
            w += p.ln() + beta * obs.get(path[c], c);
        }
        acc.add(w);
        // odometer, last coordinate fastest
        let mut c = n;
        loop {
            if c == 0 {
                let log_l = acc.value() - 0.5 * n as f64 * beta * beta;
                return Ok(LlrResult::new(log_l, n));
            }
            c -= 1;
            path[c] += 1;
            if path[c] < m {
                break;
            }
            path[c] = 0;
        }
    }
}

#[derive(Debug, Default)]
struct LogSumExp {
    max: f64,
    sum: f64,
    any: bool,
}

impl LogSumExp {
    fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if !self.any {
            self.max = x;
            self.sum = 1.0;
            self.any = true;
        } else if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    fn value(&self) -> f64 {
        if self.any {
            self.max + self.sum.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    H0,
    H1,
}

/// `H1` iff `ℓ_N > τ`; a tie decides `H0`.
pub fn neyman_pearson(llr: &LlrResult, tau: f64) -> Decision {
    if llr.ell > tau {
        Decision::H1
    } else {
        Decision::H0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub tau: f64,
    pub pf: f64,
    pub pm: f64,
}

/// `trials` runs under each hypothesis; trial `i` uses seed `seed ^ i`. The
/// thresholds are the `k/100` quantiles (`k = 1..=99`, linear interpolation)
/// of the `H0` statistics.
pub fn estimate_roc(chain: &MarkovChain, beta: f64, n: usize, trials: usize, seed: u64) -> Result<Vec<RocPoint>> {
    if trials < 10 {
        return Err(Error::InvalidArgument(format!("need at least 10 trials, got {trials}")));
    }
    let m = chain.num_states();
    let pairs = (0..trials as u64)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let s = seed ^ i;
            let h0 = h0_statistic(chain, beta, m, n, s)?;
            let h1 = log_likelihood_ratio(chain, beta, &simulate_h1(chain, beta, n, s))?.ell;
            Ok((h0, h1))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut h0: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let h1: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    h0.sort_by(f64::total_cmp);
    let frac = |xs: &[f64], f: &dyn Fn(f64) -> bool| xs.iter().filter(|&&x| f(x)).count() as f64 / xs.len() as f64;
    Ok((1..=ROC_POINTS)
        .map(|k| {
            let tau = quantile(&h0, k as f64 / (ROC_POINTS + 1) as f64);
            RocPoint {
                tau,
                pf: frac(&h0, &|x| x > tau),
                pm: frac(&h1, &|x| x <= tau),
            }
        })
        .collect())
}

/// `ℓ_N` of `H0` data generated column by column, identical to running
/// [`log_likelihood_ratio`] on [`simulate_h0`]`(m, n, seed)`.
pub(crate) fn h0_statistic(chain: &MarkovChain, beta: f64, m: usize, n: usize, seed: u64) -> Result<f64> {
    let mut cols = NoiseColumns::new(m, seed);
    let mut filter = LikelihoodFilter::new(chain, beta);
    for _ in 0..n {
        filter.push(cols.next_column())?;
    }
    Ok(filter.result().ell)
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// CSV with columns `tau,pf,pm`.
pub fn write_roc_csv(w: impl Write, points: &[RocPoint]) -> Result<()> {
    write_csv(w, &["tau", "pf", "pm"], points.iter().map(|p| vec![p.tau, p.pf, p.pm]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::validate_chain;

    fn triangle_like() -> MarkovChain {
        validate_chain(&[vec![0.0, 0.55, 0.45], vec![0.5, 0.0, 0.5], vec![0.3, 0.3, 0.4]]).unwrap()
    }

    #[test]
    fn h0_moments_and_determinism() {
        let obs = simulate_h0(10, 100_000, 3);
        assert_eq!(obs, simulate_h0(10, 100_000, 3));
        let k = 1_000_000.0;
        let mean: f64 = obs.y.iter().sum::<f64>() / k;
        let var: f64 = obs.y.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
        assert!(mean.abs() < 4.0 / k.sqrt());
        // sd of the sample variance is about √(2/k)
        assert!((var - 1.0).abs() < 4.0 * (2.0 / k).sqrt());
    }

    #[test]
    fn h1_signal_on_truth() {
        let c = triangle_like();
        let a = simulate_h1(&c, 0.0, 50, 9);
        let b = simulate_h1(&c, 100.0, 50, 9);
        let truth = b.truth.clone().unwrap();
        assert_eq!(a.truth.as_ref(), Some(&truth));
        for col in 0..50 {
            for row in 0..3 {
                let d = b.get(row, col) - a.get(row, col);
                let expect = if row == truth[col] { 100.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn h1_transition_frequencies() {
        let c = triangle_like();
        let truth = simulate_h1(&c, 0.0, 100_000, 1).truth.unwrap();
        let mut counts = [[0usize; 3]; 3];
        for w in truth.windows(2) {
            counts[w[0]][w[1]] += 1;
        }
        for i in 0..3 {
            let total: usize = counts[i].iter().sum();
            for j in 0..3 {
                let p = c.prob(i, j);
                let f = counts[i][j] as f64 / total as f64;
                let sd = (p * (1.0 - p) / total as f64).sqrt();
                assert!((f - p).abs() <= 4.0 * sd + 1e-12, "{i}->{j}: {f} vs {p}");
            }
        }
    }

    #[test]
    fn beta_zero_is_exactly_zero() {
        let c = triangle_like();
        let obs = simulate_h0(3, 20, 0);
        let r = log_likelihood_ratio(&c, 0.0, &obs).unwrap();
        assert_eq!(r.ell, 0.0);
        assert_eq!(neyman_pearson(&r, 0.0), Decision::H0);
        let short = simulate_h0(3, 8, 0);
        assert_eq!(brute_force_llr(&c, 0.0, &short).unwrap().ell, 0.0);
    }

    #[test]
    fn single_state_closed_form() {
        let c = validate_chain(&[vec![1.0]]).unwrap();
        let obs = simulate_h0(1, 500, 4);
        let beta = 1.3;
        let sum: f64 = obs.y.iter().sum();
        let expect = beta * sum / 500.0 - 0.5 * beta * beta;
        let r = log_likelihood_ratio(&c, beta, &obs).unwrap();
        assert!((r.ell - expect).abs() < 1e-12 * expect.abs().max(1.0));
        let small = Observations::from_columns(1, 6, obs.y[..6].to_vec()).unwrap();
        let bf = brute_force_llr(&c, beta, &small).unwrap();
        let fw = log_likelihood_ratio(&c, beta, &small).unwrap();
        assert!((bf.log_l - fw.log_l).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force() {
        let c = triangle_like();
        let obs = simulate_h1(&c, 1.5, 6, 11);
        let a = log_likelihood_ratio(&c, 1.5, &obs).unwrap();
        let b = brute_force_llr(&c, 1.5, &obs).unwrap();
        assert!((a.log_l - b.log_l).abs() <= 1e-9 * a.log_l.abs().max(1.0));
    }

    #[test]
    fn renormalization_survives_huge_signals() {
        let c = triangle_like();
        let beta = 3.0;
        // all entries shifted by +300: exp(β y) alone overflows
        let mut obs = simulate_h0(3, 10_000, 5);
        obs.y.iter_mut().for_each(|y| *y += 300.0);
        let r = log_likelihood_ratio(&c, beta, &obs).unwrap();
        assert!(r.ell.is_finite());
        let short = Observations::from_columns(3, 100, obs.y[..300].to_vec()).unwrap();
        let fw = log_likelihood_ratio(&c, beta, &short).unwrap();
        let reference = log_space_forward(&c, beta, &short);
        assert!((fw.log_l - reference).abs() <= 1e-9 * reference.abs());
        assert!((fw.ell - reference / 100.0).abs() <= 1e-9);
    }

    /// Forward recursion kept entirely in log space.
    fn log_space_forward(c: &MarkovChain, beta: f64, obs: &Observations) -> f64 {
        let m = c.num_states();
        let half = 0.5 * beta * beta;
        let mut a: Vec<f64> = (0..m)
            .map(|i| c.stationary()[i].ln() + beta * obs.get(i, 0) - half)
            .collect();
        for col in 1..obs.horizon() {
            let next: Vec<f64> = (0..m)
                .map(|j| {
                    let mut acc = LogSumExp::default();
                    for i in 0..m {
                        let p = c.prob(i, j);
                        if p > 0.0 {
                            acc.add(a[i] + p.ln());
                        }
                    }
                    acc.value() + beta * obs.get(j, col) - half
                })
                .collect();
            a = next;
        }
        let mut acc = LogSumExp::default();
        a.iter().for_each(|&x| acc.add(x));
        acc.value()
    }

    #[test]
    fn streamed_statistic_is_identical() {
        let c = triangle_like();
        let direct = log_likelihood_ratio(&c, 2.0, &simulate_h0(3, 300, 17)).unwrap().ell;
        assert_eq!(h0_statistic(&c, 2.0, 3, 300, 17).unwrap().to_bits(), direct.to_bits());
    }

    #[test]
    fn dimension_checks() {
        let c = triangle_like();
        let obs = simulate_h0(4, 5, 0);
        assert!(matches!(
            log_likelihood_ratio(&c, 1.0, &obs),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Observations::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        let obs = simulate_h0(3, 9, 0);
        let long = Observations::from_columns(3, 15, vec![0.0; 45]).unwrap();
        assert!(matches!(brute_force_llr(&c, 1.0, &long), Err(Error::TooManyPaths { .. })));
        assert!(obs.clone().with_truth(vec![0; 8]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let obs = simulate_h0(3, 7, 2);
        let mut out = Vec::new();
        obs.write_csv(&mut out).unwrap();
        assert_eq!(Observations::read_csv(out.as_slice()).unwrap(), obs);
    }

    #[test]
    fn decisions() {
        let r = LlrResult::new(5.0, 10);
        assert_eq!(neyman_pearson(&r, 0.0), Decision::H1);
        assert_eq!(neyman_pearson(&r, 0.5), Decision::H0);
    }

    #[test]
    fn roc_is_reproducible() {
        let c = triangle_like();
        let a = estimate_roc(&c, 1.0, 30, 40, 8).unwrap();
        assert_eq!(a, estimate_roc(&c, 1.0, 30, 40, 8).unwrap());
        assert_eq!(a.len(), ROC_POINTS);
        assert!(a.windows(2).all(|w| w[0].tau <= w[1].tau));
        assert!(estimate_roc(&c, 1.0, 30, 5, 8).is_err());
    }
}
