//! Seven-factor disentangled propagator applied in closed form.
//!
//! `exp(-iHt)` factorizes exactly (reading right to left) into
//! `exp(dk d2 d3)`, `exp(d3/2 d3^2)`, `exp(dk' x3 d1)`, `exp(dk d2 d3)`,
//! `exp(d3/2 d3^2)`, `exp(d2 d2^2)` and `exp(-Dx1 d1^2)`, where `d_k`
//! denotes `d/dx_k`. Each factor maps a Gaussian quadratic form to another
//! one, so propagation needs no grid and no time stepping.

use nalgebra::{Matrix3, Matrix6};

use crate::config::MeasurementConfig;
use crate::error::{Error, Result};
use crate::gaussian::{make_initial_state, QuadraticGaussian};
use crate::idx;
use crate::symplectic::symplectic_form;
use crate::C64;

/// One factor of the disentangled propagator, written as a differential
/// operator on `psi(x1, x2, x3)`. Modes are 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PropagatorFactor {
    /// `exp(c d_k^2)`; multiplies the momentum amplitude by `exp(-c p_k^2)`.
    MomentumQuadratic { mode: usize, coefficient: C64 },
    /// `exp(c d_2 d_3)`; multiplies the momentum amplitude by `exp(-c p2 p3)`.
    MomentumCross { coefficient: C64 },
    /// `exp(c x3 d_1)`, i.e. `psi(x1, x2, x3) -> psi(x1 + c x3, x2, x3)`.
    PositionShear { coefficient: f64 },
}

const I: C64 = C64 { re: 0.0, im: 1.0 };

impl PropagatorFactor {
    /// `Q` such that the factor multiplies the momentum amplitude by
    /// `exp(-p^T Q p)`; `None` for the shear.
    pub fn momentum_form(&self) -> Option<Matrix3<C64>> {
        let mut q = Matrix3::zeros();
        match *self {
            PropagatorFactor::MomentumQuadratic { mode, coefficient } => {
                q[(mode, mode)] = coefficient;
            }
            PropagatorFactor::MomentumCross { coefficient } => {
                q[(1, 2)] = coefficient * 0.5;
                q[(2, 1)] = coefficient * 0.5;
            }
            PropagatorFactor::PositionShear { .. } => return None,
        }
        Some(q)
    }

    /// Real symmetric `G_k` with factor `= exp(-i r^T G_k r / 2)`. Only the
    /// unitary part (imaginary coefficients for momentum factors) survives.
    pub fn generator(&self) -> Matrix6<f64> {
        let mut g = Matrix6::zeros();
        match *self {
            PropagatorFactor::MomentumQuadratic { mode, coefficient } => {
                g[(idx::p(mode), idx::p(mode))] = 2.0 * coefficient.im;
            }
            PropagatorFactor::MomentumCross { coefficient } => {
                g[(idx::P2, idx::P3)] = coefficient.im;
                g[(idx::P3, idx::P2)] = coefficient.im;
            }
            PropagatorFactor::PositionShear { coefficient } => {
                g[(idx::X3, idx::P1)] = -coefficient;
                g[(idx::P1, idx::X3)] = -coefficient;
            }
        }
        g
    }

    /// Heisenberg map of the factor, `I + Omega G_k` (every generator here
    /// is nilpotent of order two).
    pub fn symplectic_map(&self) -> Matrix6<f64> {
        Matrix6::identity() + symplectic_form() * self.generator()
    }

    /// Multiplier of a momentum factor at momentum `p`.
    pub fn momentum_multiplier(&self, p: [f64; 3]) -> Option<C64> {
        match *self {
            PropagatorFactor::MomentumQuadratic { mode, coefficient } => {
                Some((-coefficient * (p[mode] * p[mode])).exp())
            }
            PropagatorFactor::MomentumCross { coefficient } => Some((-coefficient * (p[1] * p[2])).exp()),
            PropagatorFactor::PositionShear { .. } => None,
        }
    }

    /// Multiplier of the shear in the mixed `(p1, x3)` representation.
    pub fn shear_multiplier(&self, p1: f64, x3: f64) -> Option<C64> {
        match *self {
            PropagatorFactor::PositionShear { coefficient } => Some((I * (coefficient * x3 * p1)).exp()),
            _ => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        match *self {
            PropagatorFactor::MomentumQuadratic { coefficient, .. } | PropagatorFactor::MomentumCross { coefficient } => {
                coefficient == C64::new(0.0, 0.0)
            }
            PropagatorFactor::PositionShear { coefficient } => coefficient == 0.0,
        }
    }
}

/// `Dx1 = -it/(2 m1) + i t^3 kappa^2 / (12 m3)`, the grouped `p1^2` coefficient.
pub fn delta_x1(config: &MeasurementConfig, t: f64) -> C64 {
    let k = config.kappa();
    I * (-t / (2.0 * config.m1()) + t * t * t * k * k / (12.0 * config.m3()))
}

/// The seven factors in application order.
pub fn factorize(config: &MeasurementConfig, t: f64) -> [PropagatorFactor; 7] {
    let k = config.kappa();
    let delta_k = I * (t * k / 2.0);
    let half_delta3 = I * (t / (4.0 * config.m3()));
    let delta2 = I * (t / (2.0 * config.m2()));
    let cross = PropagatorFactor::MomentumCross { coefficient: delta_k };
    let mode3 = PropagatorFactor::MomentumQuadratic { mode: 2, coefficient: half_delta3 };
    [
        cross,
        mode3,
        PropagatorFactor::PositionShear { coefficient: -t * k },
        cross,
        mode3,
        PropagatorFactor::MomentumQuadratic { mode: 1, coefficient: delta2 },
        PropagatorFactor::MomentumQuadratic { mode: 0, coefficient: -delta_x1(config, t) },
    ]
}

/// `S_n ... S_1` for the factors in application order.
pub fn factor_product_map(factors: &[PropagatorFactor]) -> Matrix6<f64> {
    factors.iter().fold(Matrix6::identity(), |acc, f| f.symplectic_map() * acc)
}

fn eigenvalues2(m: [[C64; 2]; 2]) -> [C64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr - det * 4.0).sqrt();
    [(tr + disc) * 0.5, (tr - disc) * 0.5]
}

/// Applies one factor to a normalizable state.
///
/// Momentum factors: `A' = (I + 4 A Q)^-1 A` and the amplitude is divided by
/// `sqrt(det(I + 4 A Q))`, with the root continued from `Q = 0`. The nonzero
/// eigenvalues `mu` of `4 A Q` move along straight lines `s mu`, so the
/// continued root is the product of principal roots of `1 + mu`.
pub fn apply_factor(state: &QuadraticGaussian, factor: &PropagatorFactor) -> Result<QuadraticGaussian> {
    if !state.is_normalizable() {
        return Err(Error::DegenerateState);
    }
    let out = match *factor {
        PropagatorFactor::PositionShear { coefficient } => {
            let mut j = Matrix3::<C64>::identity();
            j[(0, 2)] = C64::from(coefficient);
            QuadraticGaussian::new(state.amplitude, j.transpose() * state.a * j)
        }
        _ => {
            let q = factor.momentum_form().expect("momentum factor");
            let a = state.a;
            let m = Matrix3::<C64>::identity() + a * q * C64::from(4.0);
            let a_new = m.lu().solve(&a).ok_or(Error::DegenerateState)?;
            let mus: [C64; 2] = match *factor {
                PropagatorFactor::MomentumQuadratic { mode, coefficient } => {
                    [coefficient * a[(mode, mode)] * 4.0, C64::new(0.0, 0.0)]
                }
                PropagatorFactor::MomentumCross { coefficient } => {
                    let c2 = coefficient * 2.0;
                    eigenvalues2([[c2 * a[(2, 1)], c2 * a[(2, 2)]], [c2 * a[(1, 1)], c2 * a[(1, 2)]]])
                }
                PropagatorFactor::PositionShear { .. } => unreachable!(),
            };
            let root = mus.iter().fold(C64::new(1.0, 0.0), |acc, mu| acc * (C64::new(1.0, 0.0) + mu).sqrt());
            QuadraticGaussian::new(state.amplitude / root, (a_new + a_new.transpose()) * C64::from(0.5))
        }
    };
    if !out.is_normalizable() || !out.amplitude.is_finite() {
        return Err(Error::DegenerateState);
    }
    Ok(out)
}

/// Applies the factors in order. A failing stage is reported with its
/// 1-based position in `factors`.
pub fn propagate_factors(initial: &QuadraticGaussian, factors: &[PropagatorFactor]) -> Result<QuadraticGaussian> {
    let mut state = *initial;
    for (k, f) in factors.iter().enumerate() {
        state = apply_factor(&state, f).map_err(|_| Error::StagedSingularity { stage: k + 1 })?;
    }
    Ok(state)
}

/// Intermediate widths of the staged derivation and the state after every
/// factor (in application order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StagedTrace {
    pub t: f64,
    pub sigma1: C64,
    pub sigma2: C64,
    /// Width of the `x1` factor after the `p1^2` factor: `b - 4 Dx1`.
    pub sigma3: C64,
    pub sigma4: C64,
    pub sigma5: C64,
    pub alpha: C64,
    pub beta: C64,
    pub lambda: C64,
    pub delta_x1: C64,
    pub stages: [QuadraticGaussian; 7],
}

fn trace_scalars(config: &MeasurementConfig, t: f64) -> [C64; 9] {
    let b = config.b();
    let k = config.kappa();
    let delta_k = I * (t * k / 2.0);
    let delta3 = I * (t / (2.0 * config.m3()));
    let delta2 = I * (t / (2.0 * config.m2()));
    let delta_kp = -t * k;
    let dx1 = delta_x1(config, t);
    let sigma1 = C64::from(config.delta_q() * config.delta_q()) - delta_k * delta_k * b;
    let sigma2 = sigma1 + delta3 * 0.5;
    let sigma3 = C64::from(b) - dx1 * 4.0;
    let two_b_dk = delta_k * (2.0 * b);
    let beta = (two_b_dk * two_b_dk + sigma2 * (4.0 * b)).sqrt();
    let alpha = two_b_dk / beta;
    let sigma4 = sigma2 + beta * beta * delta2;
    let one = C64::new(1.0, 0.0);
    let lambda = ((one - alpha * alpha) / (sigma2 * 4.0) + C64::from(delta_kp * delta_kp) / sigma3
        + alpha * alpha / (sigma4 * 4.0))
        .sqrt();
    let sigma5 = one + lambda * lambda * delta3 * 2.0;
    [sigma1, sigma2, sigma3, sigma4, sigma5, alpha, beta, lambda, dx1]
}

/// Full staged evolution of the initial state to time `t`.
pub fn propagate_staged(config: &MeasurementConfig, t: f64) -> Result<(QuadraticGaussian, StagedTrace)> {
    let factors = factorize(config, t);
    let mut state = make_initial_state(config);
    let mut stages = [state; 7];
    for (k, f) in factors.iter().enumerate() {
        state = apply_factor(&state, f).map_err(|_| Error::StagedSingularity { stage: k + 1 })?;
        stages[k] = state;
    }
    let [sigma1, sigma2, sigma3, sigma4, sigma5, alpha, beta, lambda, delta_x1] = trace_scalars(config, t);
    let trace = StagedTrace { t, sigma1, sigma2, sigma3, sigma4, sigma5, alpha, beta, lambda, delta_x1, stages };
    Ok((state, trace))
}

/// Exact evolved state at `config.t()`.
pub fn exact_state(config: &MeasurementConfig) -> Result<QuadraticGaussian> {
    propagate_staged(config, config.t()).map(|(s, _)| s)
}
