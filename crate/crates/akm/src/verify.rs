//! Cross-oracle verification suite behind `akm verify`.
//!
//! Every check reports its worst residual over the configuration grid and
//! the configuration where it occurred. Checks marked with a known issue
//! fail on an unmodified build because the quantity they compare is
//! inconsistent with the exact dynamics; they are still counted as
//! failures.

use std::collections::BTreeSet;

use akm_core::analytic::{eval_coefficients_with, evolve_analytic_with, coefficient_equivalent_sequence};
use akm_core::idx::{P3, X1, X2, X3};
use akm_core::mutation::Mutation;
use akm_core::phase_space::{pointer_joint_density, sample_pointers};
use akm_core::staged::{factor_product_map, factorize, propagate_factors, propagate_staged, StagedTrace};
use akm_core::statistics::{
    closed_form_vs_oracle, eta_functions_with, oracle_statistics, uncertainty_products_with, MARGIN_TOLERANCE,
};
use akm_core::symplectic::{
    commutator, error_operator_stats, hamiltonian_matrix, oracle_covariance, propagator_matrix,
};
use akm_core::{make_initial_state, MeasurementConfig, C64};
use serde::Serialize;

use crate::grid::{aligned_distance, discretize, field_moments, propagate_grid, GridSpec};
use crate::io::ConfigFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_issue: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub config: ConfigFile,
    pub t: f64,
    pub sigma1: [f64; 2],
    pub sigma2: [f64; 2],
    pub sigma3: [f64; 2],
    pub sigma4: [f64; 2],
    pub sigma5: [f64; 2],
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub lambda: [f64; 2],
    pub delta_x1: [f64; 2],
}

impl TraceSummary {
    fn new(config: &MeasurementConfig, tr: &StagedTrace) -> Self {
        let z = |c: C64| [c.re, c.im];
        Self {
            config: ConfigFile::from_config(config),
            t: tr.t,
            sigma1: z(tr.sigma1),
            sigma2: z(tr.sigma2),
            sigma3: z(tr.sigma3),
            sigma4: z(tr.sigma4),
            sigma5: z(tr.sigma5),
            alpha: z(tr.alpha),
            beta: z(tr.beta),
            lambda: z(tr.lambda),
            delta_x1: z(tr.delta_x1),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub passed: bool,
    pub failing: Vec<String>,
    pub checks: Vec<Check>,
    pub trace: Option<TraceSummary>,
}

impl VerifyReport {
    pub fn failing_set(&self) -> BTreeSet<String> {
        self.failing.iter().cloned().collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const APPENDIX_DEFECT: &str =
    "closed-form evolution coefficients equal a modified factor sequence, not the exact propagator";
const CLOSED_FORM_DEFECT: &str = "closed form disagrees with the exact covariance at t = 1/kappa";
const CROSS_MOMENT_DEFECT: &str = "eps_xi and eps_xf correlate with p3 at order dp^2/(kappa m3)";

/// Worst-case accumulator for one check.
struct Worst {
    residual: f64,
    config: Option<MeasurementConfig>,
    detail: Option<String>,
}

impl Worst {
    fn new() -> Self {
        Self { residual: 0.0, config: None, detail: None }
    }

    fn update(&mut self, residual: f64, config: &MeasurementConfig) {
        if residual.is_nan() || residual > self.residual {
            self.residual = residual;
            self.config = Some(*config);
        }
    }

    fn fail(&mut self, config: &MeasurementConfig, why: String) {
        self.residual = f64::INFINITY;
        self.config = Some(*config);
        self.detail = Some(why);
    }

    fn finish(self, name: impl Into<String>, tolerance: f64, known_issue: Option<&'static str>) -> Check {
        Check {
            name: name.into(),
            passed: self.residual <= tolerance,
            residual: self.residual,
            tolerance,
            config: self.config.as_ref().map(ConfigFile::from_config),
            known_issue,
            detail: self.detail,
        }
    }
}

/// `3 x 3 x 3` grid over `(kappa, b, delta_q)` with unequal masses and
/// `t = 1/kappa`.
pub fn quick_configs() -> Vec<MeasurementConfig> {
    let mut out = Vec::new();
    for kappa in [0.5, 2.0, 20.0] {
        for b in [0.5, 2.0, 4.0] {
            for dq in [0.5, 1.0, 2.0] {
                let c = MeasurementConfig::builder(kappa, dq).b(b).masses(0.8, 1.3, 1.7).build();
                out.push(c.expect("grid configs are valid"));
            }
        }
    }
    out
}

pub fn unit_config() -> MeasurementConfig {
    MeasurementConfig::builder(1.0, 1.0).b(2.0).build().expect("valid")
}

fn quick_checks(mutation: Mutation) -> Vec<Check> {
    let configs = quick_configs();
    let mut checks = Vec::new();

    let mut symp = Worst::new();
    let mut product = Worst::new();
    let mut staged = Worst::new();
    let mut an_symp = Worst::new();
    let mut an_staged = Worst::new();
    let mut an_seq = Worst::new();
    let mut an_norm = Worst::new();
    let mut st_norm = Worst::new();
    let mut commut = Worst::new();
    for c in &configs {
        let t = c.t();
        let map = propagator_matrix(&hamiltonian_matrix(c), t);
        symp.update(map.symplecticity_defect(), c);
        let fp = factor_product_map(&factorize(c, t));
        product.update((fp - map.s).abs().max(), c);
        let oracle = oracle_covariance(c);

        // Pointer readings commute; the system pair stays canonical.
        let r = |i| map.row(i);
        commut.update(commutator(&r(X1), &r(X2)).abs().max((commutator(&r(X3), &r(P3)) - 1.0).abs()), c);

        let staged_state = match propagate_staged(c, t) {
            Ok((s, _)) => Some(s),
            Err(e) => {
                staged.fail(c, e.to_string());
                None
            }
        };
        if let Some(s) = staged_state {
            match s.second_moments() {
                Ok(m) => staged.update(m.max_abs_diff(&oracle), c),
                Err(e) => staged.fail(c, e.to_string()),
            }
            match s.normalization() {
                Ok(n) => st_norm.update((n - 1.0).abs(), c),
                Err(e) => st_norm.fail(c, e.to_string()),
            }
        }

        match evolve_analytic_with(c, t, mutation) {
            Ok(a) => {
                match a.second_moments() {
                    Ok(m) => {
                        an_symp.update(m.max_abs_diff(&oracle), c);
                        if let Some(s) = staged_state.and_then(|s| s.second_moments().ok()) {
                            an_staged.update(m.max_abs_diff(&s), c);
                        }
                    }
                    Err(e) => {
                        an_symp.fail(c, e.to_string());
                        an_staged.fail(c, e.to_string());
                    }
                }
                match a.normalization() {
                    Ok(n) => an_norm.update((n - 1.0).abs(), c),
                    Err(e) => an_norm.fail(c, e.to_string()),
                }
                match propagate_factors(&make_initial_state(c), &coefficient_equivalent_sequence(c, t)) {
                    Ok(p) => an_seq.update(a.max_abs_diff(&p), c),
                    Err(e) => an_seq.fail(c, e.to_string()),
                }
            }
            Err(e) => {
                let why = e.to_string();
                for w in [&mut an_symp, &mut an_staged, &mut an_norm, &mut an_seq] {
                    w.fail(c, why.clone());
                }
            }
        }
        // The coefficients themselves must be finite.
        if let Err(e) = eval_coefficients_with(c, t, mutation) {
            an_seq.fail(c, e.to_string());
        }
    }
    checks.push(symp.finish("symplecticity", 1e-12, None));
    checks.push(product.finish("factor-product-identity", 1e-12, None));
    checks.push(staged.finish("staged-vs-symplectic", 1e-9, None));
    checks.push(an_symp.finish("analytic-vs-symplectic", 1e-9, Some(APPENDIX_DEFECT)));
    checks.push(an_staged.finish("analytic-vs-staged", 1e-9, Some(APPENDIX_DEFECT)));
    checks.push(an_seq.finish("analytic-matches-equivalent-sequence", 1e-10, None));
    checks.push(an_norm.finish("analytic-normalization", 1e-10, None));
    checks.push(st_norm.finish("staged-normalization", 1e-10, None));
    checks.push(commut.finish("commutators", 1e-12, None));

    checks.extend(statistics_checks(&configs, mutation));
    checks.extend(monotonicity_checks(mutation));
    checks
}

fn statistics_checks(configs: &[MeasurementConfig], mutation: Mutation) -> Vec<Check> {
    let mut checks = Vec::new();
    let names: Vec<&'static str> = closed_form_vs_oracle(&configs[0], mutation).iter().map(|f| f.name).collect();
    let mut fields: Vec<Worst> = names.iter().map(|_| Worst::new()).collect();
    let mut deltas = Worst::new();
    let mut margins_cf = Worst::new();
    let mut margins_or = Worst::new();
    let mut means = Worst::new();
    let mut cross = Worst::new();
    for c in configs {
        for (w, f) in fields.iter_mut().zip(closed_form_vs_oracle(c, mutation)) {
            w.update(f.residual(), c);
        }
        let rb = uncertainty_products_with(c, true, mutation);
        let d = (rb.product_pointers - 1.0 - rb.delta1)
            .abs()
            .max((rb.product_retro - 0.25 - rb.delta2).abs())
            .max((rb.product_pred - 0.25 - rb.delta3).abs());
        deltas.update(d, c);
        // Residual is the violation below the bound, zero when satisfied.
        let r = uncertainty_products_with(c, false, mutation).bound_margins();
        margins_cf.update((-r.pointers.min(r.retro).min(r.pred)).max(0.0), c);
        let o = oracle_statistics(&c.at_tau()).bound_margins();
        margins_or.update((-o.pointers.min(o.retro).min(o.pred)).max(0.0), c);
        let s = error_operator_stats(c);
        means.update(s.means.iter().fold(0.0f64, |m, v| m.max(v.abs())), c);
        cross.update(s.cross_moments.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())), c);
    }
    for (name, w) in names.iter().zip(fields) {
        let known = matches!(*name, "var_x3" | "cov_x1x3" | "var_exf" | "product_pred" | "delta3");
        checks.push(w.finish(format!("closed-form-vs-oracle:{name}"), 1e-10, known.then_some(CLOSED_FORM_DEFECT)));
    }
    checks.push(deltas.finish("delta-identities", 1e-10, None));
    checks.push(margins_cf.finish("margins-closed-form", MARGIN_TOLERANCE, None));
    checks.push(margins_or.finish("margins-oracle", MARGIN_TOLERANCE, None));
    checks.push(means.finish("optimality-means", 1e-12, None));
    checks.push(cross.finish("optimality-cross-moments", 1e-12, Some(CROSS_MOMENT_DEFECT)));
    checks
}

/// `eta_j` and `Delta_k` strictly decreasing on a log grid in `kappa`.
fn monotonicity_checks(mutation: Mutation) -> Vec<Check> {
    let mut w = Worst::new();
    let mut prev: Option<[f64; 6]> = None;
    for i in 0..=40 {
        let kappa = 10f64.powf(-1.0 + 4.0 * i as f64 / 40.0);
        let c = MeasurementConfig::new(kappa, 1.0).expect("valid").balanced();
        let e = eta_functions_with(&c, mutation);
        let r = uncertainty_products_with(&c, true, mutation);
        let now = [e.eta1, e.eta2, e.eta3, r.delta1, r.delta2, r.delta3];
        if let Some(p) = prev {
            // Residual: largest non-decrease, zero when strictly decreasing.
            let worst = p.iter().zip(&now).map(|(a, b)| if b < a { 0.0 } else { b - a + f64::MIN_POSITIVE }).fold(0.0, f64::max);
            w.update(worst, &c);
        }
        prev = Some(now);
    }
    vec![w.finish("monotone-in-kappa", 0.0, None)]
}

fn full_checks() -> Vec<Check> {
    let mut checks = Vec::new();
    let c = unit_config();

    let fine = GridSpec::new(128, 16.0).expect("valid grid");
    let mut vs_staged = Worst::new();
    let mut unitarity = Worst::new();
    let mut moments = Worst::new();
    let mut marginal = Worst::new();
    let run = discretize(&make_initial_state(&c), &fine).and_then(|f| {
        let out = propagate_grid(&f, &c, c.t())?;
        Ok((f, out))
    });
    match run {
        Ok((f, out)) => {
            unitarity.update((out.norm_sq() - f.norm_sq()).abs(), &c);
            let m = field_moments(&out);
            moments.update(m.max_abs_diff(&oracle_covariance(&c)), &c);
            match akm_core::staged::exact_state(&c).map_err(Into::into).and_then(|s| {
                let d = discretize(&s, &fine)?;
                Ok::<_, crate::grid::GridError>((s, d))
            }) {
                Ok((s, exact)) => {
                    vs_staged.update(aligned_distance(&out, &exact), &c);
                    match pointer_joint_density(&s) {
                        Ok(g) => {
                            let cov = m.pair_block(X1, X2);
                            marginal.update((g.cov() - cov).abs().max(), &c);
                        }
                        Err(e) => marginal.fail(&c, e.to_string()),
                    }
                }
                Err(e) => vs_staged.fail(&c, e.to_string()),
            }
        }
        Err(e) => {
            for w in [&mut vs_staged, &mut unitarity, &mut moments, &mut marginal] {
                w.fail(&c, e.to_string());
            }
        }
    }
    checks.push(vs_staged.finish("grid-vs-staged", 1e-6, None));
    checks.push(unitarity.finish("grid-unitarity", 1e-8, None));
    checks.push(moments.finish("grid-moments-vs-oracle", 1e-6, None));
    checks.push(marginal.finish("grid-pointer-marginal", 1e-6, None));

    // The stated coarse grid, compared with the literal analytic state.
    let coarse = GridSpec::new(64, 12.0).expect("valid grid").with_boundary_tolerance(f64::INFINITY);
    let mut vs_analytic = Worst::new();
    let analytic = evolve_analytic_with(&c, c.t(), Mutation::None).map_err(crate::grid::GridError::from);
    match analytic.and_then(|a| {
        let f = discretize(&make_initial_state(&c), &coarse)?;
        let out = propagate_grid(&f, &c, c.t())?;
        Ok((out, discretize(&a, &coarse)?))
    }) {
        Ok((out, target)) => {
            vs_analytic.update(aligned_distance(&out, &target), &c);
            vs_analytic.detail = Some(format!("boundary/peak density {:.2e}", out.boundary_ratio()));
        }
        Err(e) => vs_analytic.fail(&c, e.to_string()),
    }
    checks.push(vs_analytic.finish("grid-vs-analytic", 1e-6, Some(APPENDIX_DEFECT)));

    checks.push(monte_carlo_check());
    checks
}

pub const MONTE_CARLO_SEED: u64 = 20_240_417;
pub const MONTE_CARLO_SAMPLES: usize = 4000;

/// Relative diagonal error and off-diagonal error in units of
/// `sqrt(s11 s22)`, worst over both couplings; passes below 0.05.
pub fn monte_carlo_residual(config: &MeasurementConfig) -> akm_core::Result<f64> {
    let state = akm_core::staged::exact_state(config)?;
    let g = pointer_joint_density(&state)?;
    let pts = sample_pointers(&g, MONTE_CARLO_SAMPLES, MONTE_CARLO_SEED)?;
    let cov = empirical_covariance(&pts);
    let a = g.cov();
    let scale = (a[(0, 0)] * a[(1, 1)]).sqrt();
    Ok(((cov[0] - a[(0, 0)]) / a[(0, 0)])
        .abs()
        .max(((cov[2] - a[(1, 1)]) / a[(1, 1)]).abs())
        .max((cov[1] - a[(0, 1)]).abs() / scale))
}

/// `(s11, s12, s22)` with the `n - 1` denominator.
pub fn empirical_covariance(points: &[[f64; 2]]) -> [f64; 3] {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let mut s = [0.0; 3];
    for p in points {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        s[0] += dx * dx;
        s[1] += dx * dy;
        s[2] += dy * dy;
    }
    s.map(|v| v / (n - 1.0))
}

fn monte_carlo_check() -> Check {
    let mut w = Worst::new();
    for kappa in [100.0, 0.5] {
        let c = MeasurementConfig::builder(kappa, 1.0).b(2.0).build().expect("valid");
        match monte_carlo_residual(&c) {
            Ok(r) => w.update(r, &c),
            Err(e) => w.fail(&c, e.to_string()),
        }
    }
    w.finish("monte-carlo-covariance", 0.05, None)
}

pub fn run(level: Level, mutation: Mutation) -> VerifyReport {
    let mut checks = quick_checks(mutation);
    if level == Level::Full {
        checks.extend(full_checks());
    }
    let c = unit_config();
    let trace = propagate_staged(&c, c.t()).ok().map(|(_, tr)| TraceSummary::new(&c, &tr));
    let failing: Vec<String> = checks.iter().filter(|k| !k.passed).map(|k| k.name.clone()).collect();
    VerifyReport { level, passed: failing.is_empty(), failing, checks, trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_failures_are_the_known_issues() {
        let r = run(Level::Quick, Mutation::None);
        for k in &r.checks {
            assert_eq!(k.passed, k.known_issue.is_none(), "{}: residual {:e}", k.name, k.residual);
        }
        assert!(!r.passed);
        assert!(r.trace.is_some());
    }

    #[test]
    fn gamma_flip_breaks_the_transcription_check() {
        let r = run(Level::Quick, Mutation::NegateGamma(5));
        assert!(r.failing.iter().any(|n| n == "analytic-vs-symplectic"));
        assert!(r.failing.iter().any(|n| n == "analytic-matches-equivalent-sequence"));
    }

    #[test]
    fn empirical_covariance_of_fixed_points() {
        let s = empirical_covariance(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 2.0], [0.0, -2.0]]);
        assert_eq!(s, [2.0 / 3.0, 0.0, 8.0 / 3.0]);
    }
}
