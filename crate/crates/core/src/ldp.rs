//! Large deviations of the path empirical measure.
//!
//! Every allowed path `s` of length `n` carries the pair
//! `(ln P(s)/n, x_s/n)`. The growth rate of the number of paths in a window
//! around `(ρ, ξ)` is the entropy density
//! `s(ρ, ξ) = s(ρ) − ξ²/2` on `|ξ| ≤ √(2 s(ρ))`, with
//! `s(ρ) = inf_t { ln λ_t − tρ }`; the rate function is `I = ln λ_0 − s`.

use std::collections::BTreeMap;
use std::io::Write;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_csv;
use crate::rng::{stream, stream_rng};
use crate::spectral::{path_count_rate, rho_extremes, LambdaTracker, MarkovChain, RhoRange, T_CLAMP};

/// Absolute tolerance on the slope when solving `d/dt ln λ_t = ρ`.
pub const SLOPE_TOLERANCE: f64 = 1e-10;
/// Interior points of an [`EntropyCurve`] (endpoints are added on top).
pub const CURVE_POINTS: usize = 201;
/// Default bin width for the empirical check.
pub const DEFAULT_BIN_WIDTH: f64 = 0.1;
/// Default minimum bin occupancy for the empirical check.
pub const DEFAULT_MIN_COUNT: usize = 100;
/// Largest number of paths [`enumerate_path_measure`] will visit.
pub const MAX_PATHS: f64 = 1e7;

/// `s(ρ)` and the exponent `t*` at which the infimum is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub s: f64,
    pub t_star: Option<f64>,
}

impl EntropyPoint {
    const EMPTY: Self = Self {
        s: f64::NEG_INFINITY,
        t_star: None,
    };
}

/// Microcanonical entropy density `s(ρ)`.
///
/// Inside `(ρ_min, ρ_max)` the minimizing `t*` is found by bisection on the
/// nondecreasing slope over `[−64, 64]`. The endpoints take the limiting value
/// at the clamp. Uniform walks on `K`-regular graphs have the single-point
/// domain `{−ln K}`.
pub fn entropy_density(chain: &MarkovChain, rho: f64) -> Result<EntropyPoint> {
    let range = rho_extremes(chain);
    entropy_density_in(chain, &range, rho)
}

fn entropy_density_in(chain: &MarkovChain, range: &RhoRange, rho: f64) -> Result<EntropyPoint> {
    if let Some(k) = chain.uniform_regular_degree() {
        let log_k = (k as f64).ln();
        return Ok(if (rho + log_k).abs() <= 1e-12 * log_k.max(1.0) {
            EntropyPoint {
                s: log_k,
                t_star: None,
            }
        } else {
            EntropyPoint::EMPTY
        });
    }
    if !range.contains(rho) {
        return Ok(EntropyPoint::EMPTY);
    }
    let mut tracker = LambdaTracker::new(chain);
    let (t, log_lambda) = if rho == range.rho_min {
        (-T_CLAMP, tracker.eval(-T_CLAMP)?.0)
    } else if rho == range.rho_max {
        (T_CLAMP, tracker.eval(T_CLAMP)?.0)
    } else {
        solve_slope(&mut tracker, rho)?
    };
    Ok(EntropyPoint {
        s: (log_lambda - t * rho).max(0.0),
        t_star: Some(t),
    })
}

/// `t` with `d/dt ln λ_t = rho` (clamped to `[−64, 64]`) and `ln λ_t` there.
fn solve_slope(tracker: &mut LambdaTracker<'_>, rho: f64) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (-T_CLAMP, T_CLAMP);
    let (l_lo, d_lo) = tracker.eval(lo)?;
    if d_lo >= rho {
        return Ok((lo, l_lo));
    }
    let (l_hi, d_hi) = tracker.eval(hi)?;
    if d_hi <= rho {
        return Ok((hi, l_hi));
    }
    let mut best = (lo, l_lo, d_lo - rho);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (l, d) = tracker.eval(mid)?;
        let gap = d - rho;
        if gap.abs() < best.2.abs() {
            best = (mid, l, gap);
        }
        if gap.abs() <= SLOPE_TOLERANCE || hi - lo <= 1e-14 {
            return Ok((mid, l));
        }
        if gap < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((best.0, best.1))
}

/// `I₁(ρ) = ln λ_0 − s(ρ)`; `+∞` off the effective domain.
pub fn rate1(chain: &MarkovChain, rho: f64) -> Result<f64> {
    let s = entropy_density(chain, rho)?.s;
    Ok(if s.is_finite() {
        (path_count_rate(chain)? - s).max(0.0)
    } else {
        f64::INFINITY
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub rho: f64,
    pub xi: f64,
    /// `I(ρ, ξ)`, `+∞` off the effective domain.
    pub i_value: f64,
    /// `s(ρ, ξ)`, `−∞` off the effective domain.
    pub s2_value: f64,
}

/// Two-dimensional rate function `I(ρ, ξ) = I₁(ρ) + ξ²/2`, finite exactly on
/// `|ξ| ≤ √(2 s(ρ))`.
pub fn rate2(chain: &MarkovChain, rho: f64, xi: f64) -> Result<RatePoint> {
    let s = entropy_density(chain, rho)?.s;
    let log_lambda0 = path_count_rate(chain)?;
    Ok(rate_point(rho, xi, s, log_lambda0))
}

fn rate_point(rho: f64, xi: f64, s: f64, log_lambda0: f64) -> RatePoint {
    let half_sq = 0.5 * xi * xi;
    // Points on the boundary |ξ| = √(2s) are accepted up to rounding.
    if s.is_finite() && half_sq <= s * (1.0 + 1e-9) + 1e-15 {
        let s2 = (s - half_sq).max(0.0);
        RatePoint {
            rho,
            xi,
            i_value: (log_lambda0 - s2).max(0.0),
            s2_value: s2,
        }
    } else {
        RatePoint {
            rho,
            xi,
            i_value: f64::INFINITY,
            s2_value: f64::NEG_INFINITY,
        }
    }
}

/// `s(ρ)` on a grid over `[ρ_min, ρ_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyCurve {
    pub rho_grid: Vec<f64>,
    pub s_values: Vec<f64>,
    /// `NaN` where `t*` is not unique (regular walks).
    pub t_values: Vec<f64>,
}

/// Both endpoints plus [`CURVE_POINTS`] evenly spaced interior points. A
/// uniform regular walk yields its single point.
pub fn entropy_curve(chain: &MarkovChain) -> Result<EntropyCurve> {
    let range = rho_extremes(chain);
    let grid: Vec<f64> = if chain.uniform_regular_degree().is_some() {
        vec![range.rho_min]
    } else {
        let width = range.rho_max - range.rho_min;
        let mut g = vec![range.rho_min];
        g.extend((1..=CURVE_POINTS).map(|k| range.rho_min + width * k as f64 / (CURVE_POINTS + 1) as f64));
        g.push(range.rho_max);
        g
    };
    let mut s_values = Vec::with_capacity(grid.len());
    let mut t_values = Vec::with_capacity(grid.len());
    for &rho in &grid {
        let p = entropy_density_in(chain, &range, rho)?;
        s_values.push(p.s);
        t_values.push(p.t_star.unwrap_or(f64::NAN));
    }
    Ok(EntropyCurve {
        rho_grid: grid,
        s_values,
        t_values,
    })
}

impl EntropyCurve {
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let rows = (0..self.rho_grid.len()).map(|i| vec![self.rho_grid[i], self.s_values[i], self.t_values[i]]);
        write_csv(w, &["rho", "s", "t_star"], rows)
    }
}

/// The pairs `(ln P(s)/n, x_s/n)` over every allowed path of length `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub points: Vec<(f64, f64)>,
    pub n: usize,
    pub bin_width: f64,
}

impl EmpiricalMeasure {
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        write_csv(w, &["rho", "xi"], self.points.iter().map(|&(r, x)| vec![r, x]))
    }
}

/// Number of allowed length-`n` paths, `1ᵀ (P^(0))^{n−1} 1`.
pub fn count_paths(chain: &MarkovChain, n: usize) -> f64 {
    let m = chain.num_states();
    let mut v = vec![1.0; m];
    let mut next = vec![0.0; m];
    let a = chain.transitions().map_entries(|_, _, _| 1.0);
    for _ in 1..n {
        a.mul_vec(&v, &mut next);
        std::mem::swap(&mut v, &mut next);
    }
    v.iter().sum()
}

/// Depth-first enumeration of every allowed path of length `n ≥ 1`, each
/// paired with an independent field value `x_s ~ N(0, n)`. Paths are visited
/// in lexicographic order and the field values drawn in that order from one
/// seeded stream.
pub fn enumerate_path_measure(chain: &MarkovChain, n: usize, seed: u64) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let total = count_paths(chain, n);
    if total > MAX_PATHS {
        return Err(Error::TooManyPaths {
            count: total,
            limit: MAX_PATHS,
        });
    }
    let mut rng = stream_rng(seed, 0, stream::PATH_FIELD);
    let sd = (n as f64).sqrt();
    let inv_n = 1.0 / n as f64;
    let pi = chain.stationary();
    let p = chain.log_transitions();
    let mut points = Vec::with_capacity(total as usize);
    // (state, depth, log-probability so far)
    let mut stack: Vec<(usize, usize, f64)> = (0..chain.num_states()).rev().map(|i| (i, 1, pi[i].ln())).collect();
    while let Some((state, depth, lp)) = stack.pop() {
        if depth == n {
            let z: f64 = StandardNormal.sample(&mut rng);
            points.push((lp * inv_n, sd * z * inv_n));
            continue;
        }
        let children: Vec<(usize, f64)> = p.row(state).collect();
        for &(next, l) in children.iter().rev() {
            stack.push((next, depth + 1, lp + l));
        }
    }
    Ok(EmpiricalMeasure {
        points,
        n,
        bin_width: DEFAULT_BIN_WIDTH,
    })
}

/// One occupied bin of the empirical measure and the rate-function prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinCheck {
    pub rho_lo: f64,
    pub xi_lo: f64,
    pub count: usize,
    /// `(1/n) ln(count / #paths)`.
    pub empirical: f64,
    /// `sup_{bin} s(ρ, ξ) − ln λ_0`, i.e. `−inf_{bin} I`.
    pub predicted: f64,
}

impl BinCheck {
    pub fn discrepancy(&self) -> f64 {
        (self.empirical - self.predicted).abs()
    }
}

/// Bins the measure on a `bin_width` lattice anchored at the origin and
/// compares every bin holding at least `min_count` paths with the rate
/// function.
pub fn check_measure(
    chain: &MarkovChain,
    measure: &EmpiricalMeasure,
    bin_width: f64,
    min_count: usize,
) -> Result<Vec<BinCheck>> {
    let mut bins: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for &(r, x) in &measure.points {
        let key = ((r / bin_width).floor() as i64, (x / bin_width).floor() as i64);
        *bins.entry(key).or_default() += 1;
    }
    let total = measure.points.len() as f64;
    let n = measure.n as f64;
    let range = rho_extremes(chain);
    let log_lambda0 = path_count_rate(chain)?;
    let rho_peak = {
        let mut tracker = LambdaTracker::new(chain);
        tracker.eval(0.0)?.1
    };
    let mut out = Vec::new();
    for (&(ri, xi), &count) in &bins {
        if count < min_count {
            continue;
        }
        let rho_lo = ri as f64 * bin_width;
        let xi_lo = xi as f64 * bin_width;
        let s_max = sup_entropy(chain, &range, rho_peak, log_lambda0, rho_lo, rho_lo + bin_width)?;
        let xi_min = if xi_lo <= 0.0 && xi_lo + bin_width >= 0.0 {
            0.0
        } else {
            xi_lo.abs().min((xi_lo + bin_width).abs())
        };
        let predicted = if s_max.is_finite() && xi_min * xi_min <= 2.0 * s_max {
            s_max - 0.5 * xi_min * xi_min - log_lambda0
        } else {
            f64::NEG_INFINITY
        };
        out.push(BinCheck {
            rho_lo,
            xi_lo,
            count,
            empirical: (count as f64 / total).ln() / n,
            predicted,
        });
    }
    Ok(out)
}

/// `sup s(ρ)` over `[a, b]`, using concavity of `s` and its peak at `ρ_0`.
fn sup_entropy(
    chain: &MarkovChain,
    range: &RhoRange,
    rho_peak: f64,
    log_lambda0: f64,
    a: f64,
    b: f64,
) -> Result<f64> {
    if let Some(k) = chain.uniform_regular_degree() {
        let rho = -(k as f64).ln();
        return Ok(if a <= rho && rho <= b { log_lambda0 } else { f64::NEG_INFINITY });
    }
    let lo = a.max(range.rho_min);
    let hi = b.min(range.rho_max);
    if lo > hi {
        return Ok(f64::NEG_INFINITY);
    }
    if lo <= rho_peak && rho_peak <= hi {
        return Ok(log_lambda0);
    }
    let nearest = if rho_peak < lo { lo } else { hi };
    Ok(entropy_density_in(chain, range, nearest)?.s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{entropy_rate, validate_chain};

    fn two_state() -> MarkovChain {
        validate_chain(&[vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap()
    }

    fn triangle() -> MarkovChain {
        validate_chain(&[vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5], vec![0.5, 0.5, 0.0]]).unwrap()
    }

    #[test]
    fn entropy_at_minus_h() {
        let c = two_state();
        let h = entropy_rate(&c);
        let p = entropy_density(&c, -h).unwrap();
        assert!((p.s - h).abs() < 1e-8);
        assert!((p.t_star.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn entropy_peak_at_rho0() {
        let c = two_state();
        let mut tr = LambdaTracker::new(&c);
        let (l0, rho0) = tr.eval(0.0).unwrap();
        let p = entropy_density(&c, rho0).unwrap();
        assert!((p.s - l0).abs() < 1e-9);
        assert!(p.t_star.unwrap().abs() < 1e-6);
        assert!(rate1(&c, rho0).unwrap().abs() < 1e-9);
        let r = rate2(&c, rho0, 0.0).unwrap();
        assert!(r.i_value.abs() < 1e-9);
        assert!((r.s2_value - l0).abs() < 1e-9);
    }

    #[test]
    fn outside_domain() {
        let c = two_state();
        assert_eq!(entropy_density(&c, 0.1).unwrap().s, f64::NEG_INFINITY);
        assert_eq!(rate1(&c, -5.0).unwrap(), f64::INFINITY);
        let h = entropy_rate(&c);
        let r = rate2(&c, -h, (2.0 * h).sqrt() * 1.01).unwrap();
        assert_eq!(r.i_value, f64::INFINITY);
        assert_eq!(r.s2_value, f64::NEG_INFINITY);
    }

    #[test]
    fn boundary_of_xi() {
        let c = two_state();
        let h = entropy_rate(&c);
        let l0 = path_count_rate(&c).unwrap();
        let r = rate2(&c, -h, (2.0 * h).sqrt()).unwrap();
        assert!((r.i_value - l0).abs() < 1e-8);
        assert!(r.s2_value.abs() < 1e-8);
    }

    #[test]
    fn regular_walk_single_point() {
        let c = triangle();
        let l2 = 2f64.ln();
        assert_eq!(entropy_density(&c, -l2).unwrap().s, l2);
        assert_eq!(entropy_density(&c, -l2 + 1e-3).unwrap().s, f64::NEG_INFINITY);
        assert_eq!(rate1(&c, -l2).unwrap(), 0.0);
        let curve = entropy_curve(&c).unwrap();
        assert_eq!(curve.rho_grid.len(), 1);
    }

    #[test]
    fn curve_shape() {
        let c = two_state();
        let curve = entropy_curve(&c).unwrap();
        assert_eq!(curve.rho_grid.len(), CURVE_POINTS + 2);
        assert!(curve.s_values.iter().all(|&s| s >= -1e-9));
        for w in curve.s_values.windows(3) {
            // concavity on an even grid (endpoints are limits, skip them)
            if w.iter().all(|s| s.is_finite()) {
                assert!(w[1] >= 0.5 * (w[0] + w[2]) - 1e-8);
            }
        }
        let mut out = Vec::new();
        curve.write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("rho,s,t_star\n"));
    }

    #[test]
    fn enumeration_counts() {
        let c = triangle();
        let m = enumerate_path_measure(&c, 12, 0).unwrap();
        assert_eq!(m.points.len(), 6144);
        assert_eq!(count_paths(&c, 12), 6144.0);
        let expect = -(11.0 / 12.0) * 2f64.ln() - 3f64.ln() / 12.0;
        assert!(m.points.iter().all(|&(r, _)| (r - expect).abs() < 1e-12));
        let again = enumerate_path_measure(&c, 12, 0).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn single_state_enumeration() {
        let c = validate_chain(&[vec![1.0]]).unwrap();
        let m = enumerate_path_measure(&c, 7, 3).unwrap();
        assert_eq!(m.points.len(), 1);
        assert_eq!(m.points[0].0, 0.0);
    }

    #[test]
    fn enumeration_limit() {
        let p = vec![vec![0.25; 4]; 4];
        let c = validate_chain(&p).unwrap();
        assert!(matches!(
            enumerate_path_measure(&c, 13, 0),
            Err(Error::TooManyPaths { .. })
        ));
    }
}
