//! Physical parameters of the three-mode model.

use crate::error::{Error, Result};

/// All physical parameters, in units with `hbar = 1`.
///
/// Values of this type are always valid: every constructor checks that
/// `kappa`, `delta_q`, `b` and the masses are strictly positive and finite
/// and that `t` is non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MeasurementConfig {
    kappa: f64,
    delta_q: f64,
    b: f64,
    m1: f64,
    m2: f64,
    m3: f64,
    t: f64,
}

/// Builder for [`MeasurementConfig`]; unset `b` and `t` take their defaults
/// `2 * delta_q^2` and `1 / kappa`.
#[derive(Debug, Clone, Copy)]
pub struct ConfigBuilder {
    kappa: f64,
    delta_q: f64,
    b: Option<f64>,
    masses: [f64; 3],
    t: Option<f64>,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

impl ConfigBuilder {
    pub fn b(mut self, b: f64) -> Self {
        self.b = Some(b);
        self
    }

    pub fn b_opt(mut self, b: Option<f64>) -> Self {
        self.b = b;
        self
    }

    pub fn masses(mut self, m1: f64, m2: f64, m3: f64) -> Self {
        self.masses = [m1, m2, m3];
        self
    }

    pub fn m1(mut self, m: f64) -> Self {
        self.masses[0] = m;
        self
    }

    pub fn m2(mut self, m: f64) -> Self {
        self.masses[1] = m;
        self
    }

    pub fn m3(mut self, m: f64) -> Self {
        self.masses[2] = m;
        self
    }

    pub fn t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn t_opt(mut self, t: Option<f64>) -> Self {
        self.t = t;
        self
    }

    pub fn build(self) -> Result<MeasurementConfig> {
        let kappa = positive("kappa", self.kappa)?;
        let delta_q = positive("delta_q", self.delta_q)?;
        let b = positive("b", self.b.unwrap_or(2.0 * delta_q * delta_q))?;
        let m1 = positive("m1", self.masses[0])?;
        let m2 = positive("m2", self.masses[1])?;
        let m3 = positive("m3", self.masses[2])?;
        let t = self.t.unwrap_or(1.0 / kappa);
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter { name: "t", value: t });
        }
        Ok(MeasurementConfig { kappa, delta_q, b, m1, m2, m3, t })
    }
}

impl MeasurementConfig {
    /// Starts a builder with unit masses and default `b` and `t`.
    pub fn builder(kappa: f64, delta_q: f64) -> ConfigBuilder {
        ConfigBuilder { kappa, delta_q, b: None, masses: [1.0; 3], t: None }
    }

    /// Unit masses, balanced `b`, `t = 1/kappa`.
    pub fn new(kappa: f64, delta_q: f64) -> Result<Self> {
        Self::builder(kappa, delta_q).build()
    }

    /// Builder pre-filled with this configuration's values.
    pub fn to_builder(&self) -> ConfigBuilder {
        ConfigBuilder {
            kappa: self.kappa,
            delta_q: self.delta_q,
            b: Some(self.b),
            masses: [self.m1, self.m2, self.m3],
            t: Some(self.t),
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn delta_q(&self) -> f64 {
        self.delta_q
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn m3(&self) -> f64 {
        self.m3
    }

    pub fn masses(&self) -> [f64; 3] {
        [self.m1, self.m2, self.m3]
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Measurement time `tau = 1/kappa`.
    pub fn tau(&self) -> f64 {
        1.0 / self.kappa
    }

    /// `delta_p^2 = 1 / (4 delta_q^2)`; the system state saturates Kennard's bound.
    pub fn delta_p_sq(&self) -> f64 {
        0.25 / (self.delta_q * self.delta_q)
    }

    pub fn is_balanced(&self) -> bool {
        self.b == 2.0 * self.delta_q * self.delta_q
    }

    /// Same configuration with `b = 2 delta_q^2`.
    pub fn balanced(mut self) -> Self {
        self.b = 2.0 * self.delta_q * self.delta_q;
        self
    }

    /// Same configuration evaluated at time `t`.
    pub fn at_time(self, t: f64) -> Result<Self> {
        self.to_builder().t(t).build()
    }

    /// Same configuration evaluated at its measurement time `1/kappa`.
    pub fn at_tau(mut self) -> Self {
        self.t = 1.0 / self.kappa;
        self
    }

    pub fn squeezing(&self) -> InitialSqueezing {
        InitialSqueezing {
            s1: libm::sqrt(2.0 / self.b),
            s2: libm::sqrt(2.0 * self.b),
            s3: 1.0 / (core::f64::consts::SQRT_2 * self.delta_q),
        }
    }
}

/// Squeezing factors of the three initial modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialSqueezing {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl InitialSqueezing {
    /// Initial position variances `S_i^-2 / 2`.
    pub fn position_variances(&self) -> [f64; 3] {
        [self.s1, self.s2, self.s3].map(|s| 0.5 / (s * s))
    }
}
