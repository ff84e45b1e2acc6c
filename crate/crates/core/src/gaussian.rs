//! Gaussian doubly degraded two-relay network: closed-form rates of the
//! multihop protocol (A) and the short-range protocol (B) for jointly
//! Gaussian superposition inputs, and a deterministic grid optimizer.
//!
//! Inputs are `X_0 = U_0 + a11 U_1 + a12 U_2`, `X_1 = U_1 + a22 U_2`,
//! `X_2 = U_2` with independent `U_i ~ N(0, Q_i)`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Slack allowed on the power constraints.
pub const POWER_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaussianError {
    #[error("noise variances and powers must be strictly positive and finite")]
    NonPositive,
    #[error("input parameters exceed the power budget of terminal {terminal} ({used} > {budget})")]
    PowerViolation { terminal: usize, used: f64, budget: f64 },
    #[error("component powers must be nonnegative")]
    NegativePower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianNet {
    /// Noise variances at relay 1, relay 2 and the destination.
    pub noise: [f64; 3],
    /// Power limits of the source, relay 1 and relay 2.
    pub power: [f64; 3],
}

impl GaussianNet {
    pub fn new(noise: [f64; 3], power: [f64; 3]) -> Result<Self, GaussianError> {
        if noise.iter().chain(&power).all(|&x| x.is_finite() && x > 0.0) {
            Ok(GaussianNet { noise, power })
        } else {
            Err(GaussianError::NonPositive)
        }
    }

    fn total_noise(&self) -> f64 {
        self.noise.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InputParams {
    pub q: [f64; 3],
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl InputParams {
    /// Power spent by each terminal.
    pub fn powers(&self) -> [f64; 3] {
        let [q0, q1, q2] = self.q;
        [
            q0 + self.a11 * self.a11 * q1 + self.a12 * self.a12 * q2,
            q1 + self.a22 * self.a22 * q2,
            q2,
        ]
    }

    pub fn check(&self, net: &GaussianNet) -> Result<(), GaussianError> {
        if self.q.iter().any(|&q| q < 0.0) {
            return Err(GaussianError::NegativePower);
        }
        for (terminal, (&used, &budget)) in self.powers().iter().zip(&net.power).enumerate() {
            if used > budget + POWER_SLACK {
                return Err(GaussianError::PowerViolation { terminal, used, budget });
            }
        }
        Ok(())
    }
}

fn capacity(snr: f64) -> f64 {
    0.5 * (1.0 + snr).log2()
}

/// Rate at the destination when all three inputs cooperate coherently.
fn cooperative(net: &GaussianNet, p: &InputParams) -> f64 {
    let [q0, q1, q2] = p.q;
    let b1 = 1.0 + p.a11;
    let b2 = 1.0 + p.a12 + p.a22;
    capacity((q0 + b1 * b1 * q1 + b2 * b2 * q2) / net.total_noise())
}

/// Protocol A: both relays decode the source message.
pub fn rate_protocol_a(net: &GaussianNet, p: &InputParams) -> Result<f64, GaussianError> {
    p.check(net)?;
    Ok(capacity(p.q[0] / net.noise[0])
        .min(capacity(p.q[1] / net.noise[1]))
        .min(cooperative(net, p)))
}

/// Protocol B: the second relay decodes only the first relay's message.
pub fn rate_protocol_b(net: &GaussianNet, p: &InputParams) -> Result<f64, GaussianError> {
    p.check(net)?;
    let relayed = capacity(p.q[0] / net.total_noise()) + capacity(p.q[1] / net.noise[1]);
    Ok(capacity(p.q[0] / net.noise[0])
        .min(relayed)
        .min(cooperative(net, p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GaussianProtocol {
    A,
    B,
}

impl GaussianProtocol {
    pub fn rate(self, net: &GaussianNet, p: &InputParams) -> Result<f64, GaussianError> {
        match self {
            GaussianProtocol::A => rate_protocol_a(net, p),
            GaussianProtocol::B => rate_protocol_b(net, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    /// Grid points per dimension, at least 8.
    pub resolution: usize,
    /// Superposition coefficients are searched in `[-alpha_range, alpha_range]`.
    pub alpha_range: f64,
    /// Refinement stops once the step falls below this value.
    pub min_step: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            resolution: 16,
            alpha_range: 2.0,
            min_step: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub params: InputParams,
    pub rate: f64,
}

/// Search coordinates: `[a11, a12, a22, f0, f1, f2]`, where `f_i` is the
/// fraction of the power left for `Q_i` once the later components are paid.
type Point = [f64; 6];

fn decode(net: &GaussianNet, x: &Point) -> Option<InputParams> {
    let [a11, a12, a22, f0, f1, f2] = *x;
    let q2 = f2 * net.power[2];
    let left1 = net.power[1] - a22 * a22 * q2;
    if left1 < 0.0 {
        return None;
    }
    let q1 = f1 * left1;
    let left0 = net.power[0] - a11 * a11 * q1 - a12 * a12 * q2;
    if left0 < 0.0 {
        return None;
    }
    Some(InputParams {
        q: [f0 * left0, q1, q2],
        a11,
        a12,
        a22,
    })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Larger rate first; equal rates resolved towards the smaller point.
fn better(a: &(f64, Point), b: &(f64, Point)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| {
        b.1.iter()
            .zip(&a.1)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Coarse grid search followed by coordinate refinement. The result is a
/// lower bound on the true optimum and does not depend on thread scheduling.
pub fn optimize<F>(net: &GaussianNet, rate: F, options: OptimizeOptions) -> Optimum
where
    F: Fn(&GaussianNet, &InputParams) -> Result<f64, GaussianError> + Sync,
{
    let n = options.resolution.max(8);
    let mut alphas = linspace(-options.alpha_range, options.alpha_range, n);
    if !alphas.contains(&0.0) {
        alphas.push(0.0);
        alphas.sort_by(f64::total_cmp);
    }
    let fractions = linspace(0.0, 1.0, n);
    let eval = |x: &Point| -> f64 {
        decode(net, x)
            .and_then(|p| rate(net, &p).ok())
            .unwrap_or(f64::NEG_INFINITY)
    };

    let mut alpha_triples = Vec::with_capacity(alphas.len().pow(3));
    for &a in &alphas {
        for &b in &alphas {
            for &c in &alphas {
                alpha_triples.push([a, b, c]);
            }
        }
    }
    let start = alpha_triples
        .par_iter()
        .map(|&[a11, a12, a22]| {
            let mut best = (f64::NEG_INFINITY, [a11, a12, a22, 0.0, 0.0, 0.0]);
            for &f0 in &fractions {
                for &f1 in &fractions {
                    for &f2 in &fractions {
                        let x = [a11, a12, a22, f0, f1, f2];
                        let cand = (eval(&x), x);
                        if better(&cand, &best).is_gt() {
                            best = cand;
                        }
                    }
                }
            }
            best
        })
        .max_by(better)
        .expect("grid is nonempty");

    let bounds = [
        (-options.alpha_range, options.alpha_range),
        (-options.alpha_range, options.alpha_range),
        (-options.alpha_range, options.alpha_range),
        (0.0, 1.0),
        (0.0, 1.0),
        (0.0, 1.0),
    ];
    let (mut value, mut x) = start;
    let mut step = 1.0 / (n - 1) as f64;
    while step >= options.min_step {
        let mut improved = false;
        for i in 0..6 {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[i] = (y[i] + dir * step * (bounds[i].1 - bounds[i].0)).clamp(bounds[i].0, bounds[i].1);
                let v = eval(&y);
                if v > value {
                    value = v;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    let params = decode(net, &x).expect("best point is feasible");
    Optimum {
        params,
        rate: value.max(0.0),
    }
}

/// Optimized rates of both protocols on one network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianComparison {
    pub a: Optimum,
    pub b: Optimum,
}

pub fn compare_protocols(net: &GaussianNet, options: OptimizeOptions) -> GaussianComparison {
    GaussianComparison {
        a: optimize(net, rate_protocol_a, options),
        b: optimize(net, rate_protocol_b, options),
    }
}
