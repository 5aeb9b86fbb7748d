//! Pointer-reading density, its sampler, and system Wigner functions.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::MeasurementConfig;
use crate::error::{Error, Result};
use crate::gaussian::QuadraticGaussian;
use crate::idx::{P3, X1, X2, X3};
use crate::symplectic::oracle_covariance;
use crate::C64;

/// Bivariate normal density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian2D {
    mean: Vector2<f64>,
    cov: Matrix2<f64>,
}

impl Gaussian2D {
    pub fn new(mean: Vector2<f64>, cov: Matrix2<f64>) -> Result<Self> {
        let finite = cov.iter().chain(mean.iter()).all(|v| v.is_finite());
        let asym = (cov[(0, 1)] - cov[(1, 0)]).abs();
        let scale = cov[(0, 0)].abs().max(cov[(1, 1)].abs());
        if !finite || asym > 1e-12 * scale || cov[(0, 0)] <= 0.0 || cov.determinant() <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        let cov = (cov + cov.transpose()) * 0.5;
        Ok(Self { mean, cov })
    }

    pub fn centered(cov: Matrix2<f64>) -> Result<Self> {
        Self::new(Vector2::zeros(), cov)
    }

    pub fn mean(&self) -> Vector2<f64> {
        self.mean
    }

    pub fn cov(&self) -> Matrix2<f64> {
        self.cov
    }

    pub fn determinant(&self) -> f64 {
        self.cov.determinant()
    }

    pub fn correlation(&self) -> f64 {
        self.cov[(0, 1)] / libm::sqrt(self.cov[(0, 0)] * self.cov[(1, 1)])
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        let v = Vector2::new(x, y) - self.mean;
        let inv = self.cov.try_inverse().expect("positive definite");
        let q = (v.transpose() * inv * v)[(0, 0)];
        libm::exp(-0.5 * q) / (2.0 * PI * libm::sqrt(self.determinant()))
    }

    pub fn peak(&self) -> f64 {
        1.0 / (2.0 * PI * libm::sqrt(self.determinant()))
    }
}

/// Joint density of the pointer positions `(x1, x2)`, the exact marginal of
/// `|psi|^2` over `x3`.
pub fn pointer_joint_density(state: &QuadraticGaussian) -> Result<Gaussian2D> {
    let m = state.second_moments()?;
    Gaussian2D::new(
        Vector2::new(m.mean[X1], m.mean[X2]),
        Matrix2::new(m.get(X1, X1), m.get(X1, X2), m.get(X2, X1), m.get(X2, X2)),
    )
}

/// `n` deterministic draws: `mean + L z`, `L` the Cholesky factor of the
/// covariance and `z` standard normal deviates from `ChaCha20Rng::seed_from_u64(seed)`,
/// consumed two per sample in order.
pub fn sample_pointers(density: &Gaussian2D, n: usize, seed: u64) -> Result<Vec<[f64; 2]>> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", value: 0.0 });
    }
    let l = density.cov.cholesky().ok_or(Error::NotPositiveDefinite)?.l();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let z = Vector2::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        let x = density.mean + l * z;
        out.push([x[0], x[1]]);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WignerTime {
    Initial,
    Post,
}

/// Gaussian Wigner function of the system mode, as a phase-space density
/// over `(x3, p3)`. `Post` uses the reduced state at `t = 1/kappa`.
pub fn wigner_system(config: &MeasurementConfig, when: WignerTime) -> Gaussian2D {
    let cov = match when {
        WignerTime::Initial => Matrix2::new(config.delta_q() * config.delta_q(), 0.0, 0.0, config.delta_p_sq()),
        WignerTime::Post => oracle_covariance(&config.at_tau()).pair_block(X3, P3),
    };
    Gaussian2D::centered(cov).expect("covariances of physical states are positive definite")
}

/// `W(x3, p3)`; integrates to one, peak `1/pi` for pure states.
pub fn wigner_eval(g: &Gaussian2D, x3: f64, p3: f64) -> f64 {
    g.density(x3, p3)
}

fn trapezoid(half_width: f64, points: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = 2.0 * half_width / ((points - 1) as f64);
    let mut acc = 0.5 * (f(-half_width) + f(half_width));
    for i in 1..points - 1 {
        acc += f(-half_width + h * i as f64);
    }
    acc * h
}

const QUADRATURE_POINTS: usize = 4001;

/// Direct quadrature of the initial system Wigner transform
/// `(1/pi) int phi*(x + s) phi(x - s) exp(2 i p s) ds`.
pub fn wigner_initial_quadrature(config: &MeasurementConfig, x3: f64, p3: f64) -> f64 {
    let dq2 = config.delta_q() * config.delta_q();
    let norm = libm::pow(2.0 * PI * dq2, -0.5);
    let phi2 = |a: f64, b: f64| norm * libm::exp(-(a * a + b * b) / (4.0 * dq2));
    let half_width = 14.0 * config.delta_q();
    trapezoid(half_width, QUADRATURE_POINTS, |s| phi2(x3 + s, x3 - s) * libm::cos(2.0 * p3 * s)) / PI
}

/// `rho(y, y') = int psi*(x1, x2, y) psi(x1, x2, y') dx1 dx2`, done
/// analytically for the quadratic form.
pub fn reduced_density_matrix(state: &QuadraticGaussian, y: f64, yp: f64) -> C64 {
    let a = state.a;
    let m = Matrix2::new(2.0 * a[(0, 0)].re, 2.0 * a[(0, 1)].re, 2.0 * a[(1, 0)].re, 2.0 * a[(1, 1)].re);
    let minv = m.try_inverse().expect("normalizable state");
    let v = [a[(0, 2)].conj() * y + a[(0, 2)] * yp, a[(1, 2)].conj() * y + a[(1, 2)] * yp];
    let mut quad = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            quad += v[i] * v[j] * minv[(i, j)];
        }
    }
    let expo = quad - a[(2, 2)].conj() * (y * y) - a[(2, 2)] * (yp * yp);
    state.amplitude.norm_sqr() * PI / libm::sqrt(m.determinant()) * expo.exp()
}

/// Wigner function of the reduced system mode by quadrature over the
/// reduced density matrix.
pub fn wigner_reduced_quadrature(state: &QuadraticGaussian, x3: f64, p3: f64) -> Result<f64> {
    let m = state.second_moments()?;
    let width = libm::sqrt(m.variance(X3)).max(0.5 / libm::sqrt(m.variance(P3)));
    let half_width = 14.0 * width;
    let re = trapezoid(half_width, QUADRATURE_POINTS, |s| {
        let r = reduced_density_matrix(state, x3 + s, x3 - s) * C64::from_polar(1.0, 2.0 * p3 * s);
        r.re
    });
    Ok(re / PI)
}

/// `W` on a `grid_n x grid_n` lattice over `[-range, range]^2`, row-major
/// with `x3` outer. Entries are `[x3, p3, W]`.
pub fn wigner_grid(g: &Gaussian2D, grid_n: usize, range: f64) -> Result<Vec<[f64; 3]>> {
    if grid_n < 2 {
        return Err(Error::InvalidParameter { name: "grid_n", value: grid_n as f64 });
    }
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::InvalidParameter { name: "range", value: range });
    }
    let h = 2.0 * range / (grid_n - 1) as f64;
    let axis = |i: usize| if i + 1 == grid_n { range } else { -range + h * i as f64 };
    let mut out = Vec::with_capacity(grid_n * grid_n);
    for i in 0..grid_n {
        for j in 0..grid_n {
            let (x, p) = (axis(i), axis(j));
            out.push([x, p, wigner_eval(g, x, p)]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::make_initial_state;
    use crate::staged::exact_state;
    use approx::assert_relative_eq;

    fn fig2(kappa: f64) -> MeasurementConfig {
        MeasurementConfig::builder(kappa, 1.0).b(2.0).build().unwrap()
    }

    #[test]
    fn initial_pointer_density() {
        let c = fig2(1.0);
        let g = pointer_joint_density(&make_initial_state(&c)).unwrap();
        assert_relative_eq!(g.cov()[(0, 0)], 0.5, epsilon = 1e-15);
        assert_relative_eq!(g.cov()[(1, 1)], 0.125, epsilon = 1e-15);
        assert_eq!(g.correlation(), 0.0);
    }

    #[test]
    fn correlation_falls_with_coupling() {
        let weak = pointer_joint_density(&exact_state(&fig2(0.5)).unwrap()).unwrap();
        let strong = pointer_joint_density(&exact_state(&fig2(100.0)).unwrap()).unwrap();
        assert!((strong.cov()[(0, 0)] - 2.0).abs() < 1e-3);
        assert!((strong.cov()[(1, 1)] - 0.5).abs() < 1e-3);
        assert!(weak.cov()[(0, 1)].abs() > strong.cov()[(0, 1)].abs());
        assert_relative_eq!(strong.cov()[(0, 1)], 11.0 / 12.0 / 100.0, epsilon = 1e-9);
    }

    #[test]
    fn sampler_contract() {
        let g = Gaussian2D::centered(Matrix2::new(2.0, 0.3, 0.3, 0.5)).unwrap();
        assert_eq!(sample_pointers(&g, 1, 9).unwrap().len(), 1);
        assert_eq!(sample_pointers(&g, 50, 9).unwrap(), sample_pointers(&g, 50, 9).unwrap());
        assert_ne!(sample_pointers(&g, 50, 9).unwrap(), sample_pointers(&g, 50, 10).unwrap());
        assert!(sample_pointers(&g, 0, 9).is_err());
        assert!(Gaussian2D::centered(Matrix2::new(1.0, 2.0, 2.0, 1.0)).is_err());
    }

    #[test]
    fn initial_wigner() {
        let c = fig2(1.0);
        let w = wigner_system(&c, WignerTime::Initial);
        assert_relative_eq!(wigner_eval(&w, 0.0, 0.0), 1.0 / PI, epsilon = 1e-15);
        for i in 0..20 {
            let (x, p) = (-2.5 + 0.27 * i as f64, 1.1 - 0.13 * i as f64);
            let q = wigner_initial_quadrature(&c, x, p);
            assert!((q - wigner_eval(&w, x, p)).abs() < 1e-8, "({x}, {p})");
        }
    }

    #[test]
    fn post_wigner_is_mixed() {
        let c = fig2(1.0);
        let w = wigner_system(&c, WignerTime::Post);
        assert!(w.determinant() > 0.25);
        assert!(wigner_eval(&w, 0.0, 0.0) < 1.0 / PI);
        let strong = wigner_system(&fig2(100.0), WignerTime::Post);
        assert!((strong.cov()[(0, 0)] - 3.0).abs() < 1e-3);
        assert!((strong.cov()[(1, 1)] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn reduced_quadrature_matches_gaussian() {
        for kappa in [0.5, 1.0, 3.0] {
            let c = fig2(kappa);
            let state = exact_state(&c).unwrap();
            let w = wigner_system(&c, WignerTime::Post);
            for (x, p) in [(0.0, 0.0), (1.2, -0.4), (-2.0, 0.9), (0.3, 1.5)] {
                let q = wigner_reduced_quadrature(&state, x, p).unwrap();
                assert!((q - wigner_eval(&w, x, p)).abs() < 1e-8, "kappa {kappa} ({x}, {p}): {q}");
            }
        }
    }

    #[test]
    fn reduced_trace_is_one() {
        let state = exact_state(&fig2(0.7)).unwrap();
        let sd = libm::sqrt(state.second_moments().unwrap().variance(X3));
        let tr = trapezoid(14.0 * sd, QUADRATURE_POINTS, |y| reduced_density_matrix(&state, y, y).re);
        assert_relative_eq!(tr, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn wigner_grid_integrates_to_one() {
        let c = MeasurementConfig::builder(1.0, 1.0).b(2.0).build().unwrap();
        for when in [WignerTime::Initial, WignerTime::Post] {
            let g = wigner_system(&c, when);
            let cells = wigner_grid(&g, 201, 6.0).unwrap();
            assert_eq!(cells.len(), 201 * 201);
            assert_eq!(cells[0][..2], [-6.0, -6.0]);
            assert_eq!(cells[1][..2], [-6.0, -5.94]);
            let h = 12.0 / 200.0;
            let total: f64 = cells.iter().map(|c| c[2]).sum::<f64>() * h * h;
            let peak = cells.iter().map(|c| c[2]).fold(0.0, f64::max);
            match when {
                WignerTime::Initial => {
                    assert!((total - 1.0).abs() < 1e-4);
                    assert!((peak - 1.0 / PI).abs() < 1e-12);
                }
                // Var(x3) = 3.375 leaves ~1e-3 of the mass outside |x3| < 6.
                WignerTime::Post => {
                    assert!(total < 1.0 && total > 0.99);
                    assert!(peak < 1.0 / PI);
                }
            }
        }
        assert!(wigner_grid(&wigner_system(&c, WignerTime::Initial), 1, 6.0).is_err());
        assert!(wigner_grid(&wigner_system(&c, WignerTime::Initial), 10, -1.0).is_err());
    }
}
