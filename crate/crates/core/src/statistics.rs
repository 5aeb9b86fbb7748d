//! Closed-form uncertainty results at the measurement time `tau = 1/kappa`,
//! and the corresponding oracle values.
//!
//! The closed forms are literal; several of them disagree with the exact
//! dynamics (see [`closed_form_vs_oracle`]). The oracle values are
//! authoritative.

use alloc::vec::Vec;

use crate::config::MeasurementConfig;
use crate::idx::{P3, X1, X2, X3};
use crate::mutation::Mutation;
use crate::symplectic::{error_operator_stats, oracle_covariance};

/// Absolute slack used when comparing products with their lower bounds.
pub const MARGIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NoiseFunctions {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PointerVariances {
    pub var_x1: f64,
    pub var_x2: f64,
    pub var_x3: f64,
    pub var_p3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ErrorVariances {
    pub var_exi: f64,
    pub var_epi: f64,
    pub var_exf: f64,
    pub var_epf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DeltaFunctions {
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
}

/// Products minus their lower bounds `1`, `1/4`, `1/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundMargins {
    pub pointers: f64,
    pub retro: f64,
    pub pred: f64,
}

impl BoundMargins {
    pub fn all_satisfied(&self) -> bool {
        [self.pointers, self.retro, self.pred].iter().all(|m| *m >= -MARGIN_TOLERANCE)
    }
}

pub fn eta_functions(config: &MeasurementConfig) -> NoiseFunctions {
    eta_functions_with(config, Mutation::None)
}

pub fn eta_functions_with(config: &MeasurementConfig, mutation: Mutation) -> NoiseFunctions {
    let (b, k2, dq2) = (config.b(), config.kappa() * config.kappa(), config.delta_q() * config.delta_q());
    let (m1, m2, m3) = (config.m1(), config.m2(), config.m3());
    let d = m1 - 6.0 * m3;
    NoiseFunctions {
        eta1: mutation.eta_sign(1) * d * d / (36.0 * b * m1 * m1 * m3 * m3 * k2),
        eta2: mutation.eta_sign(2) / (16.0 * dq2 * m3 * m3 * k2),
        eta3: mutation.eta_sign(3) * b / (m2 * m2 * k2),
    }
}

pub fn closed_form_variances(config: &MeasurementConfig) -> PointerVariances {
    closed_form_variances_with(config, Mutation::None)
}

pub fn closed_form_variances_with(config: &MeasurementConfig, mutation: Mutation) -> PointerVariances {
    let eta = eta_functions_with(config, mutation);
    let (b, dq2, dp2) = (config.b(), config.delta_q() * config.delta_q(), config.delta_p_sq());
    PointerVariances {
        var_x1: dq2 + b / 2.0 + eta.eta1 + eta.eta2,
        var_x2: dp2 + 1.0 / (2.0 * b) + eta.eta3,
        var_x3: dq2 + b + eta.eta2,
        var_p3: dp2 + 1.0 / b,
    }
}

/// `(2<x1 x3>, 2<x2 p3>)` in closed form.
pub fn double_covariance_closed_form(config: &MeasurementConfig) -> (f64, f64) {
    double_covariance_closed_form_with(config, Mutation::None)
}

pub fn double_covariance_closed_form_with(config: &MeasurementConfig, mutation: Mutation) -> (f64, f64) {
    let eta = eta_functions_with(config, mutation);
    let (b, dq2, dp2) = (config.b(), config.delta_q() * config.delta_q(), config.delta_p_sq());
    (2.0 * dq2 + b + 2.0 * eta.eta2, 1.0 / b + 2.0 * dp2)
}

pub fn error_variances(config: &MeasurementConfig) -> ErrorVariances {
    error_variances_with(config, Mutation::None)
}

pub fn error_variances_with(config: &MeasurementConfig, mutation: Mutation) -> ErrorVariances {
    let eta = eta_functions_with(config, mutation);
    let b = config.b();
    ErrorVariances {
        var_exi: b / 2.0 + eta.eta1 + eta.eta2,
        var_epi: 1.0 / (2.0 * b) + eta.eta3,
        var_exf: b / 2.0 + eta.eta1,
        var_epf: 1.0 / (2.0 * b) + eta.eta3,
    }
}

/// Excess functions for the balanced pointers; independent of `b`.
pub fn delta_functions(config: &MeasurementConfig) -> DeltaFunctions {
    let (k2, dq2) = (config.kappa() * config.kappa(), config.delta_q() * config.delta_q());
    let dq4 = dq2 * dq2;
    let dq8 = dq4 * dq4;
    let (m1, m2, m3) = (config.m1(), config.m2(), config.m3());
    let numerator = |c1: f64, c2: f64, c3: f64, s: f64| {
        let common = s * dq4 + k2 * m2 * m2;
        c1 * m1 * m1 * common - c2 * m1 * common * m3 + c3 * (s * dq4 + k2 * (16.0 * dq8 * m1 * m1 + m2 * m2)) * m3 * m3
    };
    let base = dq2 * k2 * m1 * m2 * m3;
    let base24 = 24.0 * base;
    DeltaFunctions {
        delta1: numerator(11.0, 24.0, 72.0, 4.0) / (288.0 * base * base),
        delta2: numerator(11.0, 24.0, 72.0, 8.0) / (base24 * base24),
        delta3: numerator(1.0, 12.0, 36.0, 8.0) / (288.0 * base * base),
    }
}

/// Closed-form results of one configuration, flattened for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AccuracyReport {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub config: MeasurementConfig,
    pub var_x1: f64,
    pub var_x2: f64,
    pub var_x3: f64,
    pub var_p3: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub cov_x1x3: f64,
    pub cov_x2p3: f64,
    pub var_exi: f64,
    pub var_epi: f64,
    pub var_exf: f64,
    pub var_epf: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub product_pointers: f64,
    pub product_retro: f64,
    pub product_pred: f64,
    pub margin_pointers: f64,
    pub margin_retro: f64,
    pub margin_pred: f64,
}

impl AccuracyReport {
    pub fn eta(&self) -> NoiseFunctions {
        NoiseFunctions { eta1: self.eta1, eta2: self.eta2, eta3: self.eta3 }
    }

    pub fn deltas(&self) -> DeltaFunctions {
        DeltaFunctions { delta1: self.delta1, delta2: self.delta2, delta3: self.delta3 }
    }

    pub fn cov_terms(&self) -> (f64, f64) {
        (self.cov_x1x3, self.cov_x2p3)
    }

    pub fn bound_margins(&self) -> BoundMargins {
        BoundMargins { pointers: self.margin_pointers, retro: self.margin_retro, pred: self.margin_pred }
    }
}

/// Full closed-form report; `balanced` forces `b = 2 delta_q^2` first.
pub fn uncertainty_products(config: &MeasurementConfig, balanced: bool) -> AccuracyReport {
    uncertainty_products_with(config, balanced, Mutation::None)
}

pub fn uncertainty_products_with(config: &MeasurementConfig, balanced: bool, mutation: Mutation) -> AccuracyReport {
    let config = if balanced { config.balanced() } else { *config };
    let eta = eta_functions_with(&config, mutation);
    let v = closed_form_variances_with(&config, mutation);
    let (cov_x1x3, cov_x2p3) = double_covariance_closed_form_with(&config, mutation);
    let e = error_variances_with(&config, mutation);
    let d = delta_functions(&config);
    let product_pointers = v.var_x1 * v.var_x2;
    let product_retro = e.var_exi * e.var_epi;
    let product_pred = e.var_exf * e.var_epf;
    AccuracyReport {
        config,
        var_x1: v.var_x1,
        var_x2: v.var_x2,
        var_x3: v.var_x3,
        var_p3: v.var_p3,
        eta1: eta.eta1,
        eta2: eta.eta2,
        eta3: eta.eta3,
        cov_x1x3,
        cov_x2p3,
        var_exi: e.var_exi,
        var_epi: e.var_epi,
        var_exf: e.var_exf,
        var_epf: e.var_epf,
        delta1: d.delta1,
        delta2: d.delta2,
        delta3: d.delta3,
        product_pointers,
        product_retro,
        product_pred,
        margin_pointers: product_pointers - 1.0,
        margin_retro: product_retro - 0.25,
        margin_pred: product_pred - 0.25,
    }
}

/// Exact statistics at `config.t()` from the symplectic oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OracleStatistics {
    pub t: f64,
    pub var_x1: f64,
    pub var_x2: f64,
    pub var_x3: f64,
    pub var_p3: f64,
    pub cov_x1x3: f64,
    pub cov_x2p3: f64,
    pub var_exi: f64,
    pub var_epi: f64,
    pub var_exf: f64,
    pub var_epf: f64,
    pub product_pointers: f64,
    pub product_retro: f64,
    pub product_pred: f64,
    pub margin_pointers: f64,
    pub margin_retro: f64,
    pub margin_pred: f64,
}

impl OracleStatistics {
    pub fn bound_margins(&self) -> BoundMargins {
        BoundMargins { pointers: self.margin_pointers, retro: self.margin_retro, pred: self.margin_pred }
    }
}

pub fn oracle_statistics(config: &MeasurementConfig) -> OracleStatistics {
    let s = oracle_covariance(config);
    let e = error_operator_stats(config);
    let product_pointers = s.variance(X1) * s.variance(X2);
    let product_retro = e.var_exi * e.var_epi;
    let product_pred = e.var_exf * e.var_epf;
    OracleStatistics {
        t: config.t(),
        var_x1: s.variance(X1),
        var_x2: s.variance(X2),
        var_x3: s.variance(X3),
        var_p3: s.variance(P3),
        cov_x1x3: 2.0 * s.get(X1, X3),
        cov_x2p3: 2.0 * s.get(X2, P3),
        var_exi: e.var_exi,
        var_epi: e.var_epi,
        var_exf: e.var_exf,
        var_epf: e.var_epf,
        product_pointers,
        product_retro,
        product_pred,
        margin_pointers: product_pointers - 1.0,
        margin_retro: product_retro - 0.25,
        margin_pred: product_pred - 0.25,
    }
}

/// One closed-form quantity next to its oracle value at `t = 1/kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldComparison {
    pub name: &'static str,
    pub closed_form: f64,
    pub oracle: f64,
}

impl FieldComparison {
    pub fn residual(&self) -> f64 {
        (self.closed_form - self.oracle).abs()
    }
}

/// Every closed-form field that has an oracle counterpart. Delta functions
/// are compared with the oracle products at balanced `b`.
pub fn closed_form_vs_oracle(config: &MeasurementConfig, mutation: Mutation) -> Vec<FieldComparison> {
    let at_tau = config.at_tau();
    let r = uncertainty_products_with(&at_tau, false, mutation);
    let o = oracle_statistics(&at_tau);
    let balanced = at_tau.balanced();
    let rb = uncertainty_products_with(&balanced, false, mutation);
    let ob = oracle_statistics(&balanced);
    let f = |name, closed_form, oracle| FieldComparison { name, closed_form, oracle };
    alloc::vec![
        f("var_x1", r.var_x1, o.var_x1),
        f("var_x2", r.var_x2, o.var_x2),
        f("var_x3", r.var_x3, o.var_x3),
        f("var_p3", r.var_p3, o.var_p3),
        f("cov_x1x3", r.cov_x1x3, o.cov_x1x3),
        f("cov_x2p3", r.cov_x2p3, o.cov_x2p3),
        f("var_exi", r.var_exi, o.var_exi),
        f("var_epi", r.var_epi, o.var_epi),
        f("var_exf", r.var_exf, o.var_exf),
        f("var_epf", r.var_epf, o.var_epf),
        f("product_pointers", r.product_pointers, o.product_pointers),
        f("product_retro", r.product_retro, o.product_retro),
        f("product_pred", r.product_pred, o.product_pred),
        f("delta1", rb.delta1, ob.product_pointers - 1.0),
        f("delta2", rb.delta2, ob.product_retro - 0.25),
        f("delta3", rb.delta3, ob.product_pred - 0.25),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> MeasurementConfig {
        MeasurementConfig::builder(1.0, 1.0).b(2.0).build().unwrap()
    }

    fn at_kappa(kappa: f64) -> MeasurementConfig {
        MeasurementConfig::builder(kappa, 1.0).b(2.0).build().unwrap()
    }

    #[test]
    fn eta_unit() {
        let e = eta_functions(&unit());
        assert_relative_eq!(e.eta1, 25.0 / 72.0, epsilon = 1e-15);
        assert_relative_eq!(e.eta2, 1.0 / 16.0, epsilon = 1e-15);
        assert_relative_eq!(e.eta3, 2.0, epsilon = 1e-15);
        let c = MeasurementConfig::builder(1.0, 1.0).masses(6.0, 1.0, 1.0).build().unwrap();
        assert_eq!(eta_functions(&c).eta1, 0.0);
        let big = eta_functions(&at_kappa(1e6));
        assert!(big.eta1 < 1e-11 && big.eta2 < 1e-11 && big.eta3 < 1e-11);
    }

    #[test]
    fn variances_unit() {
        let v = closed_form_variances(&unit());
        assert_relative_eq!(v.var_x1, 2.0 + 25.0 / 72.0 + 1.0 / 16.0, epsilon = 1e-15);
        assert_relative_eq!(v.var_x2, 2.5, epsilon = 1e-15);
        assert_relative_eq!(v.var_p3, 0.75, epsilon = 1e-15);
        let strong = closed_form_variances(&at_kappa(100.0));
        assert!((strong.var_x1 - 2.0).abs() < 1e-3);
        assert!((strong.var_x2 - 0.5).abs() < 1e-3);
        assert!((strong.var_x3 - 3.0).abs() < 1e-3);
        assert_eq!(strong.var_p3, 0.75);
    }

    #[test]
    fn error_variances_unit() {
        let e = error_variances(&unit());
        assert_relative_eq!(e.var_exi, 1.0 + 25.0 / 72.0 + 1.0 / 16.0, epsilon = 1e-15);
        assert_relative_eq!(e.var_epi, 2.25, epsilon = 1e-15);
        assert_relative_eq!(e.var_exf, 1.0 + 25.0 / 72.0, epsilon = 1e-15);
        assert_eq!(e.var_epi, e.var_epf);
    }

    #[test]
    fn deltas_unit() {
        let d = delta_functions(&unit());
        assert_relative_eq!(d.delta1, 1447.0 / 288.0, epsilon = 1e-14);
        assert_relative_eq!(d.delta2, 1683.0 / 576.0, epsilon = 1e-14);
        assert_relative_eq!(d.delta3, 801.0 / 288.0, epsilon = 1e-14);
        let big = delta_functions(&at_kappa(1e4));
        assert!(big.delta1 < 1e-7 && big.delta2 < 1e-7 && big.delta3 < 1e-7);
    }

    #[test]
    fn delta1_unit_mass_closed_form() {
        for kappa in [0.3, 1.0, 7.0, 100.0] {
            let d = delta_functions(&at_kappa(kappa));
            let k2 = kappa * kappa;
            assert_relative_eq!(d.delta1, (236.0 + 1211.0 * k2) / (288.0 * k2 * k2), max_relative = 1e-14);
        }
    }

    #[test]
    fn report_unit_balanced() {
        let r = uncertainty_products(&unit(), true);
        assert_relative_eq!(r.product_retro, 0.25 + 1683.0 / 576.0, epsilon = 1e-13);
        assert_relative_eq!(r.product_pointers - 1.0, r.delta1, epsilon = 1e-13);
        assert_relative_eq!(r.product_pred - 0.25, r.delta3, epsilon = 1e-13);
        assert!(r.bound_margins().all_satisfied());
    }

    #[test]
    fn oracle_agrees_where_formulas_hold() {
        let cmp = closed_form_vs_oracle(&unit(), Mutation::None);
        let get = |n: &str| cmp.iter().find(|c| c.name == n).unwrap();
        for name in ["var_x1", "var_x2", "var_p3", "cov_x2p3", "var_exi", "var_epi", "var_epf", "delta1", "delta2"] {
            assert!(get(name).residual() < 1e-12, "{name}");
        }
        assert_relative_eq!(get("var_x3").oracle, 3.375, epsilon = 1e-13);
        assert_relative_eq!(get("var_exf").oracle, 1.9513888888888888, epsilon = 1e-13);
        for name in ["var_x3", "cov_x1x3", "var_exf", "product_pred", "delta3"] {
            assert!(get(name).residual() > 0.1, "{name}");
        }
    }

    #[test]
    fn eta_mutation_negates_one() {
        let e = eta_functions_with(&unit(), Mutation::NegateEta(2));
        assert_relative_eq!(e.eta2, -1.0 / 16.0, epsilon = 1e-15);
        assert_relative_eq!(e.eta1, 25.0 / 72.0, epsilon = 1e-15);
    }
}
