//! Parameter sweeps over the closed-form report.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::config::MeasurementConfig;
use crate::error::{Error, Result};
use crate::statistics::uncertainty_products;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Kappa,
    B,
    DeltaQ,
    M1,
    M2,
    M3,
    T,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Kappa => "kappa",
            SweepParam::B => "b",
            SweepParam::DeltaQ => "delta_q",
            SweepParam::M1 => "m1",
            SweepParam::M2 => "m2",
            SweepParam::M3 => "m3",
            SweepParam::T => "t",
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "kappa" => SweepParam::Kappa,
            "b" => SweepParam::B,
            "delta_q" | "delta-q" => SweepParam::DeltaQ,
            "m1" => SweepParam::M1,
            "m2" => SweepParam::M2,
            "m3" => SweepParam::M3,
            "t" => SweepParam::T,
            _ => return Err(Error::InvalidSweep("unknown parameter")),
        })
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    param: SweepParam,
    from: f64,
    to: f64,
    points: usize,
    scale: SweepScale,
}

impl SweepSpec {
    pub fn new(param: SweepParam, from: f64, to: f64, points: usize, scale: SweepScale) -> Result<Self> {
        if !(from.is_finite() && to.is_finite()) || from >= to {
            return Err(Error::InvalidSweep("need finite from < to"));
        }
        if points < 2 {
            return Err(Error::InvalidSweep("need at least 2 points"));
        }
        if scale == SweepScale::Log && from <= 0.0 {
            return Err(Error::InvalidSweep("log scale needs from > 0"));
        }
        Ok(Self { param, from, to, points, scale })
    }

    pub fn param(&self) -> SweepParam {
        self.param
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Sample values, endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.from;
                }
                if i == self.points - 1 {
                    return self.to;
                }
                let u = i as f64 / last;
                match self.scale {
                    SweepScale::Linear => self.from + (self.to - self.from) * u,
                    SweepScale::Log => self.from * libm::pow(self.to / self.from, u),
                }
            })
            .collect()
    }
}

/// One sweep point; column order matches [`SweepRow::HEADER`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub var_x1: f64,
    pub var_x2: f64,
    pub var_x3: f64,
    pub var_p3: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub product_pointers: f64,
    pub product_retro: f64,
    pub product_pred: f64,
}

impl SweepRow {
    pub const HEADER: [&'static str; 14] = [
        "param",
        "var_x1",
        "var_x2",
        "var_x3",
        "var_p3",
        "eta1",
        "eta2",
        "eta3",
        "delta1",
        "delta2",
        "delta3",
        "product_pointers",
        "product_retro",
        "product_pred",
    ];

    pub fn values(&self) -> [f64; 14] {
        [
            self.param,
            self.var_x1,
            self.var_x2,
            self.var_x3,
            self.var_p3,
            self.eta1,
            self.eta2,
            self.eta3,
            self.delta1,
            self.delta2,
            self.delta3,
            self.product_pointers,
            self.product_retro,
            self.product_pred,
        ]
    }
}

/// Configuration at one sweep value. Sweeping `kappa` also moves `t` to
/// `1/kappa`; `balanced` re-imposes `b = 2 delta_q^2` at every point.
pub fn config_at(base: &MeasurementConfig, param: SweepParam, value: f64, balanced: bool) -> Result<MeasurementConfig> {
    let c = match param {
        SweepParam::Kappa => MeasurementConfig::builder(value, base.delta_q())
            .b(base.b())
            .masses(base.m1(), base.m2(), base.m3())
            .build()?,
        SweepParam::DeltaQ => MeasurementConfig::builder(base.kappa(), value)
            .b(base.b())
            .masses(base.m1(), base.m2(), base.m3())
            .t(base.t())
            .build()?,
        SweepParam::B => base.to_builder().b(value).build()?,
        SweepParam::M1 => base.to_builder().m1(value).build()?,
        SweepParam::M2 => base.to_builder().m2(value).build()?,
        SweepParam::M3 => base.to_builder().m3(value).build()?,
        SweepParam::T => base.to_builder().t(value).build()?,
    };
    Ok(if balanced { c.balanced() } else { c })
}

pub fn run_sweep(spec: &SweepSpec, base: &MeasurementConfig, balanced: bool) -> Result<Vec<SweepRow>> {
    if balanced && spec.param == SweepParam::B {
        return Err(Error::InvalidSweep("cannot sweep b with balanced pointers"));
    }
    spec.values()
        .into_iter()
        .map(|v| {
            let c = config_at(base, spec.param, v, balanced)?;
            let r = uncertainty_products(&c, false);
            Ok(SweepRow {
                param: v,
                var_x1: r.var_x1,
                var_x2: r.var_x2,
                var_x3: r.var_x3,
                var_p3: r.var_p3,
                eta1: r.eta1,
                eta2: r.eta2,
                eta3: r.eta3,
                delta1: r.delta1,
                delta2: r.delta2,
                delta3: r.delta3,
                product_pointers: r.product_pointers,
                product_retro: r.product_retro,
                product_pred: r.product_pred,
            })
        })
        .collect()
}
