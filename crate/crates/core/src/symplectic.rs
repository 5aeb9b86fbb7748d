//! Exact Heisenberg-picture oracle: for the quadratic Hamiltonian
//! `H = r^T G r / 2` the canonical vector evolves as `r(t) = exp(Omega G t) r`.

use nalgebra::{Matrix2, Matrix6, Vector6};

use crate::config::MeasurementConfig;
use crate::expm::expm;
use crate::gaussian::CanonicalCovariance;
use crate::idx::{P1, P2, P3, X1, X2, X3};

/// `H = r^T G r / 2` over `(x1, p1, x2, p2, x3, p3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticHamiltonian {
    pub g: Matrix6<f64>,
}

/// Linear map `r -> S r` realising `U^dagger r U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticMap {
    pub s: Matrix6<f64>,
    pub t: f64,
}

/// Block-diagonal canonical form, `[[0, 1], [-1, 0]]` per mode.
pub fn symplectic_form() -> Matrix6<f64> {
    let j = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let mut omega = Matrix6::zeros();
    for k in 0..3 {
        omega.fixed_view_mut::<2, 2>(2 * k, 2 * k).copy_from(&j);
    }
    omega
}

impl QuadraticHamiltonian {
    /// Kinetic terms `p_i^2 / (2 m_i)` plus couplings `kappa (x3 p1 + p2 p3)`.
    /// `kappa = 0` is allowed here and gives three free particles.
    pub fn from_parameters(kappa: f64, masses: [f64; 3]) -> Self {
        let mut g = Matrix6::zeros();
        g[(P1, P1)] = 1.0 / masses[0];
        g[(P2, P2)] = 1.0 / masses[1];
        g[(P3, P3)] = 1.0 / masses[2];
        g[(X3, P1)] = kappa;
        g[(P1, X3)] = kappa;
        g[(P2, P3)] = kappa;
        g[(P3, P2)] = kappa;
        Self { g }
    }

    /// `Omega G`, the generator of the linear Heisenberg equations.
    pub fn generator(&self) -> Matrix6<f64> {
        symplectic_form() * self.g
    }
}

pub fn hamiltonian_matrix(config: &MeasurementConfig) -> QuadraticHamiltonian {
    QuadraticHamiltonian::from_parameters(config.kappa(), config.masses())
}

/// `S = exp(Omega G t)`.
pub fn propagator_matrix(h: &QuadraticHamiltonian, t: f64) -> SymplecticMap {
    SymplecticMap { s: expm(&(h.generator() * t)), t }
}

impl SymplecticMap {
    pub fn identity() -> Self {
        Self { s: Matrix6::identity(), t: 0.0 }
    }

    /// Largest elementwise `|S^T Omega S - Omega|`.
    pub fn symplecticity_defect(&self) -> f64 {
        let omega = symplectic_form();
        (self.s.transpose() * omega * self.s - omega).amax()
    }

    /// Heisenberg coefficients of canonical operator `i` at time `t`.
    pub fn row(&self, i: usize) -> Vector6<f64> {
        self.s.row(i).transpose()
    }
}

/// `sigma(t) = S sigma0 S^T`, `mean(t) = S mean0`.
pub fn evolve_covariance(map: &SymplecticMap, sigma0: &CanonicalCovariance) -> CanonicalCovariance {
    let sigma = map.s * sigma0.sigma * map.s.transpose();
    CanonicalCovariance { mean: map.s * sigma0.mean, sigma: (sigma + sigma.transpose()) * 0.5 }
}

/// Oracle covariance of the configuration at `config.t()`.
pub fn oracle_covariance(config: &MeasurementConfig) -> CanonicalCovariance {
    let map = propagator_matrix(&hamiltonian_matrix(config), config.t());
    evolve_covariance(&map, &CanonicalCovariance::initial(config))
}

/// `<[a.r, b.r]> / i = a^T Omega b`.
pub fn commutator(a: &Vector6<f64>, b: &Vector6<f64>) -> f64 {
    (a.transpose() * symplectic_form() * b)[(0, 0)]
}

/// Coefficient vectors (over the initial canonical operators) of the four
/// error operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorOperators {
    /// `x1(t) - x3(0)`
    pub exi: Vector6<f64>,
    /// `x2(t) - p3(0)`
    pub epi: Vector6<f64>,
    /// `x1(t) - x3(t)`
    pub exf: Vector6<f64>,
    /// `x2(t) - p3(t)`
    pub epf: Vector6<f64>,
}

impl ErrorOperators {
    pub fn new(map: &SymplecticMap) -> Self {
        let e = |i: usize| Vector6::from_fn(|k, _| if k == i { 1.0 } else { 0.0 });
        Self {
            exi: map.row(X1) - e(X3),
            epi: map.row(X2) - e(P3),
            exf: map.row(X1) - map.row(X3),
            epf: map.row(X2) - map.row(P3),
        }
    }

    pub fn as_array(&self) -> [Vector6<f64>; 4] {
        [self.exi, self.epi, self.exf, self.epf]
    }
}

/// Oracle statistics of the error operators at `config.t()`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorOperatorStats {
    pub var_exi: f64,
    pub var_epi: f64,
    pub var_exf: f64,
    pub var_epf: f64,
    /// Means in the order `(exi, epi, exf, epf)`.
    pub means: [f64; 4],
    /// Symmetrized `<eps_A B>` with `B` in `(x3, p3)` at `t = 0`, rows in
    /// the order of `means`.
    pub cross_moments: [[f64; 2]; 4],
}

pub fn error_operator_stats(config: &MeasurementConfig) -> ErrorOperatorStats {
    let map = propagator_matrix(&hamiltonian_matrix(config), config.t());
    let ops = ErrorOperators::new(&map).as_array();
    let s0 = CanonicalCovariance::initial(config);
    let var = |c: &Vector6<f64>| (c.transpose() * s0.sigma * c)[(0, 0)];
    let mut means = [0.0; 4];
    let mut cross = [[0.0; 2]; 4];
    for (k, c) in ops.iter().enumerate() {
        means[k] = c.dot(&s0.mean);
        cross[k][0] = (c.transpose() * s0.sigma.column(X3))[(0, 0)];
        cross[k][1] = (c.transpose() * s0.sigma.column(P3))[(0, 0)];
    }
    ErrorOperatorStats {
        var_exi: var(&ops[0]),
        var_epi: var(&ops[1]),
        var_exf: var(&ops[2]),
        var_epf: var(&ops[3]),
        means,
        cross_moments: cross,
    }
}

/// `(2<x1 x3>, 2<x2 p3>)` at `config.t()`, symmetrized.
pub fn double_covariance_terms(config: &MeasurementConfig) -> (f64, f64) {
    let s = oracle_covariance(config);
    (2.0 * s.get(X1, X3), 2.0 * s.get(X2, P3))
}
