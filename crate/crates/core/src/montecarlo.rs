//! Monte Carlo estimate of the error exponent.
//!
//! Under `H0`, `−ℓ_N` converges almost surely to the exponent `η`. The
//! estimator averages `−ℓ_N` over independent trials; trial `i` draws its data
//! from seed `seed ^ i`, and the mean is a pairwise sum over trials in index
//! order, so results do not depend on the number of worker threads.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{h0_statistic, LikelihoodFilter, NoiseColumns};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::rng::pairwise_sum;
use crate::spectral::MarkovChain;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub eta_hat: f64,
    /// Sample standard deviation over `√trials`.
    pub stderr: f64,
    pub trials: usize,
    pub n: usize,
    /// `−ℓ_N` of each trial, in trial order.
    pub trace: Option<Vec<f64>>,
}

pub fn estimate_exponent(
    chain: &MarkovChain,
    beta: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<ExponentEstimate> {
    if trials < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 trials, got {trials}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let m = chain.num_states();
    let values = (0..trials as u64)
        .into_par_iter()
        .map(|i| h0_statistic(chain, beta, m, n, seed ^ i).map(|ell| 0.0 - ell))
        .collect::<Result<Vec<f64>>>()?;
    let k = trials as f64;
    let mean = pairwise_sum(&values) / k;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let sd = (pairwise_sum(&sq) / (k - 1.0)).sqrt();
    Ok(ExponentEstimate {
        eta_hat: mean,
        stderr: sd / k.sqrt(),
        trials,
        n,
        trace: Some(values),
    })
}

/// `−ℓ_n` of one growing `H0` sample path, recorded at each checkpoint.
pub fn convergence_trace(
    chain: &MarkovChain,
    beta: f64,
    n_max: usize,
    checkpoints: &[usize],
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be strictly ascending".into()));
    }
    if checkpoints.first() == Some(&0) || checkpoints.last().is_some_and(|&c| c > n_max) {
        return Err(Error::InvalidArgument(format!("checkpoints must lie in 1..={n_max}")));
    }
    let mut cols = NoiseColumns::new(chain.num_states(), seed);
    let mut filter = LikelihoodFilter::new(chain, beta);
    let mut out = Vec::with_capacity(checkpoints.len());
    for &c in checkpoints {
        while filter.steps() < c {
            filter.push(cols.next_column())?;
        }
        out.push((c, 0.0 - filter.result().ell));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub eta_hat: f64,
    pub stderr: f64,
    pub n: usize,
    pub trials: usize,
}

/// One estimate per `β`, all with the same seed.
pub fn sweep(chain: &MarkovChain, betas: &[f64], n: usize, trials: usize, seed: u64) -> Result<Vec<SweepRow>> {
    betas
        .iter()
        .map(|&beta| {
            let e = estimate_exponent(chain, beta, n, trials, seed)?;
            Ok(SweepRow {
                beta,
                eta_hat: e.eta_hat,
                stderr: e.stderr,
                n,
                trials,
            })
        })
        .collect()
}

/// CSV with columns `beta,eta_hat,stderr,n,trials`.
pub fn write_sweep_csv(mut w: impl Write, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "beta,eta_hat,stderr,n,trials")?;
    for r in rows {
        let (b, e, s) = (fmt_f64(r.beta), fmt_f64(r.eta_hat), fmt_f64(r.stderr));
        writeln!(w, "{b},{e},{s},{},{}", r.n, r.trials)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::validate_chain;

    fn chain() -> MarkovChain {
        validate_chain(&[vec![0.0, 0.55, 0.45], vec![0.5, 0.0, 0.5], vec![0.3, 0.3, 0.4]]).unwrap()
    }

    #[test]
    fn zero_signal() {
        let e = estimate_exponent(&chain(), 0.0, 50, 10, 1).unwrap();
        assert_eq!(e.eta_hat.to_bits(), 0.0f64.to_bits());
        assert_eq!(e.stderr, 0.0);
        let tr = convergence_trace(&chain(), 0.0, 100, &[10, 50, 100], 1).unwrap();
        assert!(tr.iter().all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn estimate_within_trace_range() {
        let e = estimate_exponent(&chain(), 1.5, 200, 20, 4).unwrap();
        let tr = e.trace.as_ref().unwrap();
        let lo = tr.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = tr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo <= e.eta_hat && e.eta_hat <= hi);
        assert!(e.stderr > 0.0);
        assert_eq!(e, estimate_exponent(&chain(), 1.5, 200, 20, 4).unwrap());
    }

    #[test]
    fn trace_matches_full_runs() {
        let c = chain();
        let tr = convergence_trace(&c, 1.2, 400, &[100, 400], 9).unwrap();
        let full = -crate::detector::log_likelihood_ratio(&c, 1.2, &crate::detector::simulate_h0(3, 400, 9))
            .unwrap()
            .ell;
        assert_eq!(tr[1].1.to_bits(), full.to_bits());
        assert!(convergence_trace(&c, 1.2, 400, &[100, 50], 9).is_err());
        assert!(convergence_trace(&c, 1.2, 400, &[500], 9).is_err());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let c = chain();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_exponent(&c, 2.0, 100, 37, 5).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn sweep_csv() {
        let rows = sweep(&chain(), &[0.0, 1.0], 20, 4, 0).unwrap();
        let mut out = Vec::new();
        write_sweep_csv(&mut out, &rows).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("beta,eta_hat,stderr,n,trials\n"));
        assert_eq!(s.lines().count(), 3);
    }
}
