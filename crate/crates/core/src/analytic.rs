//! Closed-form coefficient functions of the evolved state
//! `N(t) exp(-(e1 x1^2 + e2 x2^2 + e3 x3^2 + e4 x1 x2 + e5 x1 x3 + e6 x2 x3))`.
//!
//! The polynomials are transcribed verbatim, in one place
//! ([`gamma_theta`]). They are normalized, pure Gaussians for every `t`,
//! but they are not the state generated by the Hamiltonian: they coincide
//! with the staged propagation in which the second `exp(d3/2 d3^2)` factor
//! is dropped and the sign of `Dx1` is reversed
//! ([`coefficient_equivalent_sequence`]). Use [`crate::staged`] or
//! [`crate::symplectic`] for the physical evolution.

use alloc::vec::Vec;
use nalgebra::Matrix3;

use crate::config::MeasurementConfig;
use crate::error::{Error, Result};
use crate::gaussian::QuadraticGaussian;
use crate::mutation::Mutation;
use crate::staged::{delta_x1, factorize, PropagatorFactor};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Relative floor on `|Theta(t)| / |Theta(0)|`.
pub const THETA_FLOOR: f64 = 1e-14;

/// Samples used to continue the phase of `Theta` from `0` to `t`.
const BRANCH_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionCoefficients {
    pub eps: [C64; 6],
    pub big_n: C64,
    pub gamma: [C64; 6],
    pub theta: C64,
    pub t: f64,
}

/// `(Gamma_1..Gamma_6, Theta)` at time `t`.
pub fn gamma_theta(config: &MeasurementConfig, t: f64) -> ([C64; 6], C64) {
    let (b, k, dq2) = (config.b(), config.kappa(), config.delta_q() * config.delta_q());
    let (m1, m2, m3) = (config.m1(), config.m2(), config.m3());
    let (k2, t2, t3, t4) = (k * k, t * t, t * t * t, t * t * t * t);
    let r = C64::from;

    let g1 = r(3.0 * m1 * m3)
        * ((r(-2.0 * b * t) + (I + 4.0 * b * k2 * m3 * t) * m2) * t + (r(m2) + I * (2.0 * b * t)) * (4.0 * m3 * dq2));
    let g2 = r(b * m2) * (r(3.0 * b * m1 * m3) + I * (-6.0 * m3 * t + k2 * m1 * t3)) * (I * t + 4.0 * m3 * dq2);
    let g3 = r(m3)
        * (I * (6.0 * b * b * m1 * m3 * t)
            + (I * (2.0 * k2 * m1 * t2) + (I * -3.0 + 6.0 * k2 * m1 * t * dq2) * m3) * (2.0 * m2 * t)
            + (r(12.0 * m3 * t2)
                + (r(3.0 * m2 * (m3 + k2 * k2 * m3 * t4)) - (r(t) - I * (3.0 * m3 * dq2)) * (8.0 * k2 * t3)) * m1)
                * b);
    let g4 = r(6.0 * b * k2 * m1 * m2 * m3 * t2) * (r(-t) + I * (4.0 * m3 * dq2));
    let g5 = r(-6.0 * k * m1 * m3 * t)
        * ((I * m2 + 2.0 * b * (-1.0 + k2 * m2 * m3) * t) * t + (r(m2) + I * (2.0 * b * t)) * (4.0 * m3 * dq2));
    let g6 = r(2.0 * b * k * m2 * m3 * t)
        * (I * (-6.0 * b * m1 * m3) + (r(5.0 * k2 * m1 * t2) + (r(-12.0) - I * (12.0 * k2 * m1 * t * dq2)) * m3) * t);
    let theta = I * (b * t)
        * (3.0 * m1 * m2 * m3 + 12.0 * m3 * (1.0 - 2.0 * k2 * m2 * m3) * t2 + k2 * m1 * (-2.0 + 7.0 * k2 * m2 * m3) * t4)
        + r(4.0 * b * m3 * (3.0 * m1 * m2 * m3 + 12.0 * m3 * t2 + k2 * m1 * (-2.0 + 3.0 * k2 * m2 * m3) * t4) * dq2)
        + r(m2 * t * (6.0 * m3 - k2 * m1 * t2)) * (r(t) - I * (4.0 * m3 * dq2))
        + r(6.0 * b * b * m1 * m3 * t) * (r((-1.0 + 2.0 * k2 * m2 * m3) * t) + I * (4.0 * m3 * dq2));
    ([g1, g2, g3, g4, g5, g6], theta)
}

/// Phase of `Theta` continued along `[0, t]` from its real positive value at 0.
fn continued_theta_phase(config: &MeasurementConfig, t: f64) -> f64 {
    let mut prev = 0.0;
    let mut acc = 0.0;
    for i in 1..=BRANCH_SAMPLES {
        let s = t * (i as f64) / (BRANCH_SAMPLES as f64);
        let arg = gamma_theta(config, s).1.arg();
        let mut d = arg - prev;
        while d > core::f64::consts::PI {
            d -= 2.0 * core::f64::consts::PI;
        }
        while d < -core::f64::consts::PI {
            d += 2.0 * core::f64::consts::PI;
        }
        acc += d;
        prev = arg;
    }
    acc
}

pub fn eval_coefficients(config: &MeasurementConfig, t: f64) -> Result<EvolutionCoefficients> {
    eval_coefficients_with(config, t, Mutation::None)
}

/// As [`eval_coefficients`], with an optional injected fault.
pub fn eval_coefficients_with(config: &MeasurementConfig, t: f64, mutation: Mutation) -> Result<EvolutionCoefficients> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter { name: "t", value: t });
    }
    let (mut gamma, theta) = gamma_theta(config, t);
    for (j, g) in gamma.iter_mut().enumerate() {
        *g *= mutation.gamma_sign(j + 1);
    }
    let scale = gamma_theta(config, 0.0).1.norm();
    if theta.norm().is_nan() || theta.norm() < THETA_FLOOR * scale {
        return Err(Error::SingularCoefficients { t, theta_abs: theta.norm() });
    }
    let eps = gamma.map(|g| g / theta);
    let (b, dq2) = (config.b(), config.delta_q() * config.delta_q());
    let pi3 = core::f64::consts::PI * core::f64::consts::PI * core::f64::consts::PI;
    let prefactor = 2.0 * libm::pow(2.0 * b * b * dq2 / pi3, 0.25);
    let numerator = 3.0 * config.m1() * config.m2() * config.m3() * config.m3();
    let phase = continued_theta_phase(config, t);
    let root = libm::sqrt(numerator / theta.norm()) * C64::from_polar(1.0, -0.5 * phase);
    Ok(EvolutionCoefficients { eps, big_n: root * prefactor, gamma, theta, t })
}

pub fn coefficients_to_state(c: &EvolutionCoefficients) -> QuadraticGaussian {
    let [e1, e2, e3, e4, e5, e6] = c.eps;
    let a = Matrix3::new(e1, e4 * 0.5, e5 * 0.5, e4 * 0.5, e2, e6 * 0.5, e5 * 0.5, e6 * 0.5, e3);
    QuadraticGaussian::new(c.big_n, a)
}

pub fn evolve_analytic(config: &MeasurementConfig, t: f64) -> Result<QuadraticGaussian> {
    evolve_analytic_with(config, t, Mutation::None)
}

pub fn evolve_analytic_with(config: &MeasurementConfig, t: f64, mutation: Mutation) -> Result<QuadraticGaussian> {
    eval_coefficients_with(config, t, mutation).map(|c| coefficients_to_state(&c))
}

/// Factor sequence whose staged propagation reproduces the closed-form
/// coefficients: the physical sequence without its fifth factor and with
/// `Dx1 -> -Dx1` in the last one.
pub fn coefficient_equivalent_sequence(config: &MeasurementConfig, t: f64) -> Vec<PropagatorFactor> {
    let f = factorize(config, t);
    let mut seq: Vec<PropagatorFactor> = f[..4].to_vec();
    seq.push(f[5]);
    seq.push(PropagatorFactor::MomentumQuadratic { mode: 0, coefficient: delta_x1(config, t) });
    seq
}
