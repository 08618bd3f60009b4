//! Error-exponent bounds.
//!
//! Upper: the genie bound `β²/2`. Lower: the sum detector `β²/(2M)` and the
//! random-energy bound `χ(β)`, which is zero up to `β = √(2H)` and is given
//! parametrically above it by
//!
//! ```text
//! β_t = (√2/t)·√(ln λ_t − tρ_t)
//! χ_t = ((1−2t)/t²)·ln λ_t − ((1−t)/t)·ρ_t,    t ∈ (0, 1]
//! ```

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_csv;
use crate::spectral::{
    entropy_rate, path_count_rate, rho_extremes, slope_from_triple, LambdaTracker, MarkovChain, SpectralTriple,
};

/// Smallest `t` of the parametric curve.
pub const T_FLOOR: f64 = 1e-6;
/// Points of the bracketing scan over `[T_FLOOR, 1]` (log-spaced).
pub const SCAN_POINTS: usize = 512;
/// Root tolerance in `t`.
pub const T_TOLERANCE: f64 = 1e-12;

pub fn genie_upper(beta: f64) -> f64 {
    0.5 * beta * beta
}

pub fn sum_detector_lower(beta: f64, m: usize) -> f64 {
    0.5 * beta * beta / m as f64
}

/// `√(2H)`.
pub fn threshold_beta(chain: &MarkovChain) -> f64 {
    (2.0 * entropy_rate(chain)).sqrt()
}

/// Closed-form bound for the uniform walk on a `K`-regular graph.
pub fn physics_lower_regular(k: usize, beta: f64) -> f64 {
    let log_k = (k as f64).ln();
    let thr = (2.0 * log_k).sqrt();
    if beta <= thr {
        0.0
    } else {
        (0.5 * beta * beta - beta * thr + log_k).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametricPoint {
    pub t: f64,
    pub beta_t: f64,
    pub chi: f64,
    pub rho_t: f64,
}

impl ParametricPoint {
    fn new(t: f64, log_lambda: f64, rho: f64) -> Self {
        let beta_t = std::f64::consts::SQRT_2 / t * (log_lambda - t * rho).max(0.0).sqrt();
        let chi = (1.0 - 2.0 * t) / (t * t) * log_lambda - (1.0 - t) / t * rho;
        Self {
            t,
            beta_t,
            chi,
            rho_t: rho,
        }
    }

    fn from_triple(chain: &MarkovChain, triple: &SpectralTriple) -> Self {
        let log_lambda = if triple.t == 1.0 { 0.0 } else { triple.log_lambda };
        Self::new(triple.t, log_lambda, slope_from_triple(chain, triple))
    }
}

/// One point of the parametric curve, `t ∈ [T_FLOOR, 1]`.
pub fn parametric_curve(chain: &MarkovChain, t: f64) -> Result<ParametricPoint> {
    if !(T_FLOOR..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t = {t} outside [{T_FLOOR}, 1]")));
    }
    let (l, r) = LambdaTracker::new(chain).eval(t)?;
    Ok(ParametricPoint::new(t, l, r))
}

/// Value of the random-energy lower bound at one `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsValue {
    pub value: f64,
    /// Parameter of the selected root; `None` below threshold or for the
    /// closed form.
    pub t: Option<f64>,
    /// `β` lies beyond `β_{T_FLOOR}`; `value` is the high-SNR asymptote
    /// `β²/2 − β√(2 ln λ_0) − ρ_max`, still a valid lower bound.
    pub asymptotic: bool,
}

impl PhysicsValue {
    fn exact(value: f64, t: Option<f64>) -> Self {
        Self {
            value,
            t,
            asymptotic: false,
        }
    }
}

/// Random-energy bound of one chain with the bracketing scan cached, so that
/// sweeps over `β` pay for the scan once.
#[derive(Debug, Clone)]
pub struct PhysicsBound<'a> {
    chain: &'a MarkovChain,
    threshold: f64,
    regular: Option<usize>,
    scan: Vec<(ParametricPoint, SpectralTriple)>,
    log_lambda0: f64,
    rho_max: f64,
}

impl<'a> PhysicsBound<'a> {
    /// Uniform regular walks use the closed form; other chains get the scan.
    pub fn new(chain: &'a MarkovChain) -> Result<Self> {
        match chain.uniform_regular_degree() {
            Some(k) => Ok(Self {
                chain,
                threshold: threshold_beta(chain),
                regular: Some(k),
                scan: Vec::new(),
                log_lambda0: (k as f64).ln(),
                rho_max: -(k as f64).ln(),
            }),
            None => Self::parametric(chain),
        }
    }

    /// Always solves the parametric equations, even where a closed form exists.
    pub fn parametric(chain: &'a MarkovChain) -> Result<Self> {
        let mut out = Self {
            chain,
            threshold: threshold_beta(chain),
            regular: None,
            scan: Vec::new(),
            log_lambda0: 0.0,
            rho_max: 0.0,
        };
        // From t = 1 down to the floor, each solve warm-started from the last.
        let ratio = T_FLOOR.ln() / (SCAN_POINTS - 1) as f64;
        let mut tracker = LambdaTracker::new(chain);
        let mut scan = Vec::with_capacity(SCAN_POINTS);
        for k in 0..SCAN_POINTS {
            let t = if k + 1 == SCAN_POINTS { T_FLOOR } else { (ratio * k as f64).exp() };
            let triple = tracker.triple(t)?.clone();
            scan.push((ParametricPoint::from_triple(chain, &triple), triple));
        }
        scan.reverse();
        out.scan = scan;
        out.log_lambda0 = path_count_rate(chain)?;
        out.rho_max = rho_extremes(chain).rho_max;
        Ok(out)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// The scan in increasing `t`.
    pub fn scan(&self) -> impl Iterator<Item = &ParametricPoint> {
        self.scan.iter().map(|(p, _)| p)
    }

    /// Largest `β` reachable on `[T_FLOOR, 1]`; infinite for the closed form.
    pub fn beta_max(&self) -> f64 {
        if self.scan.is_empty() {
            return f64::INFINITY;
        }
        self.scan.iter().map(|(p, _)| p.beta_t).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn eval(&self, beta: f64) -> Result<PhysicsValue> {
        if !(beta >= 0.0) {
            return Err(Error::InvalidArgument(format!("beta must be nonnegative, got {beta}")));
        }
        if let Some(k) = self.regular {
            return Ok(PhysicsValue::exact(physics_lower_regular(k, beta), None));
        }
        if beta <= self.threshold {
            return Ok(PhysicsValue::exact(0.0, None));
        }
        if beta >= self.beta_max() {
            let v = 0.5 * beta * beta - beta * (2.0 * self.log_lambda0).sqrt() - self.rho_max;
            return Ok(PhysicsValue {
                value: v.max(0.0),
                t: None,
                asymptotic: true,
            });
        }
        // Every scan interval where β_t − β changes sign holds a root; keep
        // the smallest χ among them.
        let mut best: Option<ParametricPoint> = None;
        for w in self.scan.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let (fa, fb) = (a.0.beta_t - beta, b.0.beta_t - beta);
            let root = if fa == 0.0 {
                a.0
            } else if fa * fb < 0.0 {
                self.solve(a, b, beta)?
            } else {
                continue;
            };
            if best.map_or(true, |p| root.chi < p.chi) {
                best = Some(root);
            }
        }
        // The last scan point is t = 1 with β_1 = √(2H) < β, so some interval
        // must change sign.
        let p = best.ok_or(Error::Inversion {
            beta,
            reason: "no sign change of beta_t - beta on the scan".into(),
        })?;
        let value = p.chi.clamp(0.0, genie_upper(beta));
        Ok(PhysicsValue::exact(value, Some(p.t)))
    }

    /// Illinois-modified regula falsi on one bracketing interval.
    fn solve(
        &self,
        lo: &(ParametricPoint, SpectralTriple),
        hi: &(ParametricPoint, SpectralTriple),
        beta: f64,
    ) -> Result<ParametricPoint> {
        let mut tracker = LambdaTracker::starting_from(self.chain, lo.1.clone());
        let (mut a, mut fa) = (lo.0, lo.0.beta_t - beta);
        let (mut b, mut fb) = (hi.0, hi.0.beta_t - beta);
        let mut side = 0i8;
        for _ in 0..200 {
            if b.t - a.t <= T_TOLERANCE {
                break;
            }
            let mut t = (a.t * fb - b.t * fa) / (fb - fa);
            if !(t > a.t && t < b.t) {
                t = 0.5 * (a.t + b.t);
            }
            let (l, r) = tracker.eval(t)?;
            let p = ParametricPoint::new(t, l, r);
            let f = p.beta_t - beta;
            if f == 0.0 || f.abs() <= 4.0 * f64::EPSILON * beta {
                return Ok(p);
            }
            if (f > 0.0) == (fa > 0.0) {
                a = p;
                fa = f;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = p;
                fb = f;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
        }
        Ok(if fa.abs() < fb.abs() { a } else { b })
    }
}

/// `χ(β)`; builds a fresh scan, so prefer [`PhysicsBound`] for sweeps.
pub fn physics_lower(chain: &MarkovChain, beta: f64) -> Result<f64> {
    if let Some(k) = chain.uniform_regular_degree() {
        return Ok(physics_lower_regular(k, beta));
    }
    if beta <= threshold_beta(chain) {
        return Ok(0.0);
    }
    Ok(PhysicsBound::new(chain)?.eval(beta)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentBounds {
    pub beta: f64,
    pub genie_ub: f64,
    pub sum_lb: f64,
    pub physics_lb: f64,
    pub threshold_beta: f64,
    pub phi_tilde: f64,
    pub asymptotic: bool,
}

impl PhysicsBound<'_> {
    pub fn all_bounds(&self, beta: f64) -> Result<ExponentBounds> {
        let phys = self.eval(beta)?;
        let genie = genie_upper(beta);
        Ok(ExponentBounds {
            beta,
            genie_ub: genie,
            sum_lb: sum_detector_lower(beta, self.chain.num_states()),
            physics_lb: phys.value,
            threshold_beta: self.threshold,
            phi_tilde: genie - phys.value,
            asymptotic: phys.asymptotic,
        })
    }
}

pub fn all_bounds(chain: &MarkovChain, beta: f64) -> Result<ExponentBounds> {
    PhysicsBound::new(chain)?.all_bounds(beta)
}

/// CSV with columns `beta,genie_ub,sum_lb,physics_lb,threshold_beta`.
pub fn write_bounds_csv(w: impl Write, rows: &[ExponentBounds]) -> Result<()> {
    write_csv(
        w,
        &["beta", "genie_ub", "sum_lb", "physics_lb", "threshold_beta"],
        rows.iter()
            .map(|b| vec![b.beta, b.genie_ub, b.sum_lb, b.physics_lb, b.threshold_beta]),
    )
}
