//! Markov-chain spectral quantities: Hadamard powers `P^(t)`, the Perron root
//! `λ_t` and its log-derivative, entropy rate, and the extremal slopes
//! `ρ_min`/`ρ_max`.
//!
//! Zero transitions never enter a logarithm: every sum below runs over the
//! support of `P` only.

mod chain;
pub mod cycles;
mod perron;

use serde::{Deserialize, Serialize};

pub use chain::{validate_chain, MarkovChain, ROW_SUM_TOLERANCE};
pub use perron::{iteration_cap, perron, SpectralTriple, RESIDUAL_TOLERANCE};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// `|t|` beyond which slopes are evaluated at the clamp instead.
pub const T_CLAMP: f64 = 64.0;

/// Entrywise `p_ij^t` on the support; zero elsewhere (also for `t = 0`).
pub fn hadamard_power(chain: &MarkovChain, t: f64) -> CsrMatrix {
    if t == 1.0 {
        return chain.transitions().clone();
    }
    chain.log_transitions().map_entries(|_, _, l| (t * l).exp())
}

/// `ln λ_t`.
pub fn log_lambda(chain: &MarkovChain, t: f64) -> Result<f64> {
    if t == 1.0 {
        return Ok(0.0);
    }
    Ok(chain.spectral_triple(t, None)?.log_lambda)
}

/// `d/dt ln λ_t = aᵀ[(ln P)∘P^(t)]b / aᵀP^(t)b` from the Perron triple at `t`.
pub fn log_lambda_deriv(chain: &MarkovChain, t: f64) -> Result<f64> {
    let triple = chain.spectral_triple(t, None)?;
    Ok(slope_from_triple(chain, &triple))
}

/// Slope of `ln λ_t` from an already computed triple at `triple.t`.
pub fn slope_from_triple(chain: &MarkovChain, triple: &SpectralTriple) -> f64 {
    let t = triple.t;
    let shift = chain
        .log_transitions()
        .entries()
        .map(|(_, _, l)| t * l)
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = if t == 0.0 { 0.0 } else { shift };
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, j, l) in chain.log_transitions().entries() {
        let w = triple.left[i] * (t * l - shift).exp() * triple.right[j];
        num += w * l;
        den += w;
    }
    num / den
}

/// Evaluates `(ln λ_t, d/dt ln λ_t)` repeatedly, warm-starting each solve
/// from the previous eigenvectors.
#[derive(Debug, Clone)]
pub struct LambdaTracker<'a> {
    chain: &'a MarkovChain,
    last: Option<SpectralTriple>,
}

impl<'a> LambdaTracker<'a> {
    pub fn new(chain: &'a MarkovChain) -> Self {
        Self { chain, last: None }
    }

    pub fn starting_from(chain: &'a MarkovChain, triple: SpectralTriple) -> Self {
        Self {
            chain,
            last: Some(triple),
        }
    }

    pub fn triple(&mut self, t: f64) -> Result<&SpectralTriple> {
        let next = self.chain.spectral_triple(t, self.last.as_ref())?;
        Ok(self.last.insert(next))
    }

    /// `(ln λ_t, ρ_t)`.
    pub fn eval(&mut self, t: f64) -> Result<(f64, f64)> {
        let chain = self.chain;
        let triple = self.triple(t)?;
        let log_lambda = if t == 1.0 { 0.0 } else { triple.log_lambda };
        Ok((log_lambda, slope_from_triple(chain, triple)))
    }
}

/// Entropy rate `H = -Σ_i π_i Σ_j p_ij ln p_ij` in nats.
pub fn entropy_rate(chain: &MarkovChain) -> f64 {
    let pi = chain.stationary();
    let mut h = 0.0;
    for i in 0..chain.num_states() {
        let row: f64 = chain.transitions().row(i).map(|(_, p)| -p * p.ln()).sum();
        h += pi[i] * row;
    }
    h.max(0.0)
}

/// Extremal slopes of `ln λ_t` (nats per step).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoRange {
    pub rho_min: f64,
    pub rho_max: f64,
}

impl RhoRange {
    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.rho_min && rho <= self.rho_max
    }
}

/// `ρ_min`/`ρ_max` as the minimum and maximum mean of `ln p_ij` over simple
/// cycles of the transition graph.
///
/// For a uniform walk on a `K`-regular graph every cycle has mean `-ln K`;
/// that value is returned directly, since cycles of different lengths round
/// differently.
pub fn rho_extremes(chain: &MarkovChain) -> RhoRange {
    if let Some(k) = chain.uniform_regular_degree() {
        let rho = (1.0 / k as f64).ln();
        return RhoRange {
            rho_min: rho,
            rho_max: rho,
        };
    }
    let w = chain.log_transitions();
    RhoRange {
        rho_min: cycles::min_mean_cycle(w).0,
        rho_max: cycles::max_mean_cycle(w).0,
    }
}

/// Exponential growth rate of the number of allowed paths, `ln λ_0`.
pub fn path_count_rate(chain: &MarkovChain) -> Result<f64> {
    if let Some(k) = chain.uniform_regular_degree() {
        return Ok((k as f64).ln());
    }
    log_lambda(chain, 0.0)
}

/// `ln π_{s_1} + Σ ln p_{s_n s_{n+1}}` for a 0-based state sequence;
/// `-∞` if the path uses a forbidden transition.
pub fn path_log_prob(chain: &MarkovChain, states: &[usize]) -> Result<f64> {
    let m = chain.num_states();
    if states.is_empty() {
        return Err(Error::InvalidArgument("empty state sequence".into()));
    }
    if let Some(&bad) = states.iter().find(|&&s| s >= m) {
        return Err(Error::StateOutOfRange { state: bad, m });
    }
    let mut lp = chain.stationary()[states[0]].ln();
    for w in states.windows(2) {
        let p = chain.prob(w[0], w[1]);
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        lp += p.ln();
    }
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> MarkovChain {
        validate_chain(&[vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap()
    }

    fn uniform_cycle(n: usize) -> MarkovChain {
        let mut p = vec![vec![0.0; n]; n];
        for i in 0..n {
            p[i][(i + 1) % n] = 0.5;
            p[i][(i + n - 1) % n] = 0.5;
        }
        validate_chain(&p).unwrap()
    }

    #[test]
    fn hadamard_examples() {
        let c = two_state();
        assert_eq!(hadamard_power(&c, 1.0).to_dense(), c.to_dense());
        assert_eq!(
            hadamard_power(&c, 0.0).to_dense(),
            vec![vec![1.0, 1.0], vec![1.0, 1.0]]
        );
        let sq = hadamard_power(&c, 2.0).to_dense();
        let expect = [[0.81, 0.01], [0.25, 0.25]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((sq[i][j] - expect[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn log_lambda_two_state_quadratic_oracle() {
        // λ² - 1.06 λ + (0.81·0.25 - 0.01·0.25) = 0
        let tr: f64 = 0.81 + 0.25;
        let det = 0.81 * 0.25 - 0.01 * 0.25;
        let root = (tr + (tr * tr - 4.0 * det).sqrt()) / 2.0;
        let got = log_lambda(&two_state(), 2.0).unwrap();
        assert!((got - root.ln()).abs() < 1e-12, "{got} vs {}", root.ln());
    }

    #[test]
    fn log_lambda_at_one_is_zero() {
        let c = two_state();
        let tr = c.spectral_triple(1.0, None).unwrap();
        assert!(tr.log_lambda.abs() < 1e-12);
        assert!((tr.left[0] - 5.0 / 6.0).abs() < 1e-10);
        assert!(tr.right.iter().all(|x| (x - 1.0).abs() < 1e-10));
    }

    #[test]
    fn odd_cycle_regular_walk() {
        let c = uniform_cycle(101);
        assert_eq!(c.uniform_regular_degree(), Some(2));
        let l0 = log_lambda(&c, 0.0).unwrap();
        assert!((l0 - 2f64.ln()).abs() < 1e-12);
        for t in [-1.5, 0.0, 0.5, 2.0] {
            let d = log_lambda_deriv(&c, t).unwrap();
            assert!((d + 2f64.ln()).abs() < 1e-9, "t={t}: {d}");
        }
        assert!((entropy_rate(&c) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_two_state() {
        let h = entropy_rate(&two_state());
        let direct = -(5.0 / 6.0) * (0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln())
            - (1.0 / 6.0) * (0.5f64.ln());
        assert!((h - direct).abs() < 1e-14);
        assert!((h - 0.386427).abs() < 1e-6);
        let d1 = log_lambda_deriv(&two_state(), 1.0).unwrap();
        assert!((d1 + h).abs() < 1e-9);
    }

    #[test]
    fn rho_two_state() {
        let r = rho_extremes(&two_state());
        assert!((r.rho_max - 0.9f64.ln()).abs() < 1e-15);
        assert!((r.rho_min - (0.1f64.ln() + 0.5f64.ln()) / 2.0).abs() < 1e-15);
        assert!((r.rho_min + 1.49787).abs() < 1e-5);
        let lo = log_lambda_deriv(&two_state(), -T_CLAMP).unwrap();
        let hi = log_lambda_deriv(&two_state(), T_CLAMP).unwrap();
        assert!(r.rho_min <= lo + 1e-12 && hi <= r.rho_max + 1e-12);
        assert!((lo - r.rho_min).abs() < 1e-6 && (hi - r.rho_max).abs() < 1e-6);
    }

    #[test]
    fn path_probabilities() {
        let c = two_state();
        let lp = path_log_prob(&c, &[0, 1, 0]).unwrap();
        let expect = (5.0f64 / 6.0).ln() + 0.1f64.ln() + 0.5f64.ln();
        assert!((lp - expect).abs() < 1e-14);
        assert!((path_log_prob(&c, &[1]).unwrap() - (1.0f64 / 6.0).ln()).abs() < 1e-14);
        assert!(matches!(
            path_log_prob(&c, &[0, 2]),
            Err(Error::StateOutOfRange { state: 2, m: 2 })
        ));
        let cyc = uniform_cycle(5);
        assert_eq!(path_log_prob(&cyc, &[0, 2]).unwrap(), f64::NEG_INFINITY);
        let lp = path_log_prob(&cyc, &[0, 1, 2, 1]).unwrap();
        assert!((lp - ((0.2f64).ln() + 3.0 * 0.5f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn path_count_rate_complete_graph() {
        let p = vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.2, 0.2], vec![0.1, 0.1, 0.8]];
        let c = validate_chain(&p).unwrap();
        assert!((path_count_rate(&c).unwrap() - 3f64.ln()).abs() < 1e-12);
    }
}
