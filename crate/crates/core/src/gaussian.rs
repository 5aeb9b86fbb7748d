//! Pure three-mode Gaussian states and their exact second moments.

use nalgebra::{Matrix2, Matrix3, Matrix6, Vector6};

use crate::config::MeasurementConfig;
use crate::error::{Error, Result};
use crate::idx;
use crate::C64;

/// Relative eigenvalue floor used to decide positive definiteness.
pub const PD_RELATIVE_TOLERANCE: f64 = 1e-12;

/// `psi(x) = amplitude * exp(-x^T A x)` over `x = (x1, x2, x3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticGaussian {
    pub amplitude: C64,
    pub a: Matrix3<C64>,
}

/// Symmetrized second central moments and means over `(x1, p1, x2, p2, x3, p3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalCovariance {
    pub mean: Vector6<f64>,
    pub sigma: Matrix6<f64>,
}

/// Initial product state: squeezed pointer vacua times the system Gaussian.
pub fn make_initial_state(config: &MeasurementConfig) -> QuadraticGaussian {
    let s = config.squeezing();
    let quarter_pi = libm::pow(core::f64::consts::PI, 0.25);
    let amplitude = [s.s1, s.s2, s.s3]
        .iter()
        .map(|&si| libm::sqrt(si) / quarter_pi)
        .product::<f64>();
    let a = Matrix3::from_diagonal(&nalgebra::Vector3::new(
        C64::from(0.5 * s.s1 * s.s1),
        C64::from(0.5 * s.s2 * s.s2),
        C64::from(0.5 * s.s3 * s.s3),
    ));
    QuadraticGaussian { amplitude: C64::from(amplitude), a }
}

/// True when the real symmetric matrix has all eigenvalues above the
/// relative floor.
pub fn is_positive_definite3(m: &Matrix3<f64>) -> bool {
    if !m.iter().all(|v| v.is_finite()) {
        return false;
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let max = eig.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |acc, v| acc.min(*v));
    max > 0.0 && min > PD_RELATIVE_TOLERANCE * max
}

impl QuadraticGaussian {
    pub fn new(amplitude: C64, a: Matrix3<C64>) -> Self {
        Self { amplitude, a }
    }

    pub fn real_part(&self) -> Matrix3<f64> {
        self.a.map(|z| z.re)
    }

    pub fn imag_part(&self) -> Matrix3<f64> {
        self.a.map(|z| z.im)
    }

    pub fn is_normalizable(&self) -> bool {
        is_positive_definite3(&self.real_part())
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let d = self.a - self.a.transpose();
        d.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// `psi(x)`.
    pub fn eval(&self, x: [f64; 3]) -> C64 {
        let mut q = C64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                q += self.a[(i, j)] * (x[i] * x[j]);
            }
        }
        self.amplitude * (-q).exp()
    }

    /// `int |psi|^2 d^3x = |amplitude|^2 pi^{3/2} / sqrt(det(2 Re A))`.
    pub fn normalization(&self) -> Result<f64> {
        let r = self.real_part();
        if !is_positive_definite3(&r) {
            return Err(Error::DegenerateState);
        }
        let det = (r * 2.0).determinant();
        let pi32 = libm::pow(core::f64::consts::PI, 1.5);
        Ok(self.amplitude.norm_sqr() * pi32 / libm::sqrt(det))
    }

    /// Exact symmetrized moments of the (normalized) state.
    ///
    /// With `A = R + iY`: `Sxx = (4R)^-1`, `Spp = R + 4 Y Sxx Y`,
    /// `sym<x p^T> = -2 Sxx Y`. Means vanish for a centred quadratic form.
    pub fn second_moments(&self) -> Result<CanonicalCovariance> {
        let r = self.real_part();
        if !is_positive_definite3(&r) {
            return Err(Error::DegenerateState);
        }
        let r = (r + r.transpose()) * 0.5;
        let y = self.imag_part();
        let y = (y + y.transpose()) * 0.5;
        let sxx = (r * 4.0).try_inverse().ok_or(Error::DegenerateState)?;
        let sxx = (sxx + sxx.transpose()) * 0.5;
        let spp = r + y * sxx * y * 4.0;
        let spp = (spp + spp.transpose()) * 0.5;
        let sxp = -(sxx * y) * 2.0;
        let mut sigma = Matrix6::zeros();
        for i in 0..3 {
            for j in 0..3 {
                sigma[(idx::x(i), idx::x(j))] = sxx[(i, j)];
                sigma[(idx::p(i), idx::p(j))] = spp[(i, j)];
                sigma[(idx::x(i), idx::p(j))] = sxp[(i, j)];
                sigma[(idx::p(j), idx::x(i))] = sxp[(i, j)];
            }
        }
        Ok(CanonicalCovariance { mean: Vector6::zeros(), sigma })
    }

    /// Largest elementwise `|A - B|`.
    pub fn max_abs_diff(&self, other: &QuadraticGaussian) -> f64 {
        (self.a - other.a).iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

impl CanonicalCovariance {
    /// `diag(b/4, 1/b, 1/(4b), b, delta_q^2, delta_p^2)`.
    pub fn initial(config: &MeasurementConfig) -> Self {
        let b = config.b();
        let d = Vector6::new(
            b / 4.0,
            1.0 / b,
            1.0 / (4.0 * b),
            b,
            config.delta_q() * config.delta_q(),
            config.delta_p_sq(),
        );
        Self { mean: Vector6::zeros(), sigma: Matrix6::from_diagonal(&d) }
    }

    /// `sigma[(i, j)]` by canonical index.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sigma[(i, j)]
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.sigma[(i, i)]
    }

    /// 2x2 block over the index pair `(i, j)`.
    pub fn pair_block(&self, i: usize, j: usize) -> Matrix2<f64> {
        Matrix2::new(
            self.sigma[(i, i)],
            self.sigma[(i, j)],
            self.sigma[(j, i)],
            self.sigma[(j, j)],
        )
    }

    /// `(x_k, p_k)` block of mode `k` (0-based).
    pub fn mode_block(&self, k: usize) -> Matrix2<f64> {
        self.pair_block(idx::x(k), idx::p(k))
    }

    pub fn position_block(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.sigma[(idx::x(i), idx::x(j))])
    }

    pub fn determinant(&self) -> f64 {
        self.sigma.determinant()
    }

    /// Largest elementwise difference of the covariances.
    pub fn max_abs_diff(&self, other: &CanonicalCovariance) -> f64 {
        (self.sigma - other.sigma).amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> MeasurementConfig {
        MeasurementConfig::builder(1.0, 1.0).b(2.0).build().unwrap()
    }

    #[test]
    fn initial_quadratic_form() {
        let psi = make_initial_state(&unit());
        let expected = [0.5, 2.0, 0.25];
        for i in 0..3 {
            assert_relative_eq!(psi.a[(i, i)].re, expected[i], epsilon = 1e-15);
            for j in 0..3 {
                assert_eq!(psi.a[(i, j)].im, 0.0);
                if i != j {
                    assert_eq!(psi.a[(i, j)].re, 0.0);
                }
            }
        }
        assert_relative_eq!(psi.normalization().unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn initial_moments() {
        let c = unit();
        let m = make_initial_state(&c).second_moments().unwrap();
        let expected = CanonicalCovariance::initial(&c);
        assert!(m.max_abs_diff(&expected) < 1e-14);
        assert_relative_eq!(m.variance(idx::X1), 0.5, epsilon = 1e-15);
        assert_relative_eq!(m.variance(idx::X2), 0.125, epsilon = 1e-15);
        assert_relative_eq!(m.variance(idx::X3), 1.0, epsilon = 1e-15);
        assert_relative_eq!(m.variance(idx::P3), 0.25, epsilon = 1e-15);
        assert_relative_eq!(m.determinant(), 1.0 / 64.0, epsilon = 1e-15);
    }

    #[test]
    fn amplitude_scaling() {
        let mut psi = make_initial_state(&unit());
        psi.amplitude *= 2.0;
        assert_relative_eq!(psi.normalization().unwrap(), 4.0, epsilon = 1e-13);
    }

    #[test]
    fn free_packet_moments() {
        // exp(-x^2 / (b + 2it/m)) is the free evolution of exp(-x^2/b).
        let (b, t, m) = (2.0, 0.7, 1.3);
        let a00 = C64::new(1.0, 0.0) / C64::new(b, 2.0 * t / m);
        let a = Matrix3::from_diagonal(&nalgebra::Vector3::new(a00, C64::from(1.0), C64::from(1.0)));
        let m6 = QuadraticGaussian::new(C64::from(1.0), a).second_moments().unwrap();
        let vp = 1.0 / b;
        assert_relative_eq!(m6.get(idx::X1, idx::P1), t / m * vp, epsilon = 1e-14);
        assert_relative_eq!(m6.variance(idx::X1), b / 4.0 + vp * t * t / (m * m), epsilon = 1e-14);
        assert_relative_eq!(m6.variance(idx::P1), vp, epsilon = 1e-14);
    }

    #[test]
    fn degenerate_rejected() {
        let mut psi = make_initial_state(&unit());
        psi.a[(1, 1)] = C64::new(-1.0, 0.3);
        assert_eq!(psi.second_moments(), Err(Error::DegenerateState));
        assert_eq!(psi.normalization(), Err(Error::DegenerateState));
        psi.a[(1, 1)] = C64::new(1e-16, 0.0);
        assert!(!psi.is_normalizable());
    }
}
