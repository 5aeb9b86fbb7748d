//! Spectral grid realisation of the seven-factor propagator.
//!
//! Momentum factors act as multiplications in the full momentum
//! representation and the `x3 -> x1` shear as a phase in the mixed
//! `(p1, x2, x3)` representation, so one pass is exact for any `t` up to
//! discretisation error. Samples are stored x1-fastest.
//!
//! FFTs run over independent axis lines in parallel; every line uses the
//! same plan and is written by exactly one task, so results are
//! bitwise-identical for any thread count.

use std::f64::consts::PI;
use std::sync::Arc;

use akm_core::gaussian::CanonicalCovariance;
use akm_core::staged::{factorize, PropagatorFactor};
use akm_core::{MeasurementConfig, QuadraticGaussian, C64};
use nalgebra::{Matrix6, Vector6};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Default ratio of boundary density to peak density that is tolerated.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GridError {
    #[error("grid needs a power-of-two n >= 32 and L > 0 (got n = {n}, L = {half_width})")]
    InvalidGrid { n: usize, half_width: f64 },
    #[error("support overflow: boundary density is {ratio:e} of peak (tolerance {tolerance:e}); enlarge the grid")]
    SupportOverflow { ratio: f64, tolerance: f64 },
    #[error(transparent)]
    Model(#[from] akm_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    half_width: f64,
    boundary_tolerance: f64,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64) -> Result<Self, GridError> {
        if n < 32 || !n.is_power_of_two() || !(half_width.is_finite() && half_width > 0.0) {
            return Err(GridError::InvalidGrid { n, half_width });
        }
        Ok(Self { n, half_width, boundary_tolerance: BOUNDARY_TOLERANCE })
    }

    /// Same grid with a different support check threshold; `f64::INFINITY`
    /// disables the check.
    pub fn with_boundary_tolerance(mut self, tolerance: f64) -> Self {
        self.boundary_tolerance = tolerance;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn boundary_tolerance(&self) -> f64 {
        self.boundary_tolerance
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// `x_i = -L + i dx`.
    pub fn positions(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.n).map(|i| -self.half_width + dx * i as f64).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn momenta(&self) -> Vec<f64> {
        let n = self.n as isize;
        let dp = 2.0 * PI / (self.n as f64 * self.spacing());
        (0..n).map(|k| if k < n / 2 { k } else { k - n }).map(|k| dp * k as f64).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        i1 + self.n * (i2 + self.n * i3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub values: Vec<C64>,
    pub grid: GridSpec,
}

impl ComplexField {
    /// Discrete `sum |psi|^2 dV`.
    pub fn norm_sq(&self) -> f64 {
        self.values.par_iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    /// Largest `|psi|^2` on the outermost layer of cells relative to the
    /// largest `|psi|^2` anywhere.
    pub fn boundary_ratio(&self) -> f64 {
        let n = self.grid.n;
        let peak = self.values.par_iter().map(|z| z.norm_sqr()).reduce(|| 0.0, f64::max);
        let edge = (0..self.values.len())
            .into_par_iter()
            .filter(|&k| {
                let (i1, i2, i3) = (k % n, (k / n) % n, k / (n * n));
                [i1, i2, i3].iter().any(|&i| i == 0 || i == n - 1)
            })
            .map(|k| self.values[k].norm_sqr())
            .reduce(|| 0.0, f64::max);
        if peak > 0.0 {
            edge / peak
        } else {
            0.0
        }
    }

    fn check_support(&self) -> Result<(), GridError> {
        let ratio = self.boundary_ratio();
        if ratio > self.grid.boundary_tolerance {
            return Err(GridError::SupportOverflow { ratio, tolerance: self.grid.boundary_tolerance });
        }
        Ok(())
    }
}

/// Pointwise samples of `state`; fails if the state is not contained in
/// the domain.
pub fn discretize(state: &QuadraticGaussian, grid: &GridSpec) -> Result<ComplexField, GridError> {
    if !state.is_normalizable() {
        return Err(akm_core::Error::DegenerateState.into());
    }
    let x = grid.positions();
    let n = grid.n;
    let mut values = vec![C64::new(0.0, 0.0); grid.cell_count()];
    values.par_chunks_mut(n * n).enumerate().for_each(|(i3, plane)| {
        for i2 in 0..n {
            for i1 in 0..n {
                plane[i1 + n * i2] = state.eval([x[i1], x[i2], x[i3]]);
            }
        }
    });
    let field = ComplexField { values, grid: *grid };
    field.check_support()?;
    Ok(field)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

struct Transformer {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Transformer {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    fn line(&self, buf: &mut [C64], dir: Direction) {
        match dir {
            Direction::Forward => self.forward.process(buf),
            Direction::Inverse => {
                self.inverse.process(buf);
                let s = 1.0 / self.n as f64;
                buf.iter_mut().for_each(|z| *z *= s);
            }
        }
    }

    /// Transform along `axis` (0 = x1, 1 = x2, 2 = x3).
    fn axis(&self, values: &mut [C64], axis: usize, dir: Direction) {
        let n = self.n;
        match axis {
            0 => values.par_chunks_mut(n).for_each(|line| self.line(line, dir)),
            1 => values.par_chunks_mut(n * n).for_each(|plane| {
                let mut buf = vec![C64::new(0.0, 0.0); n];
                for i1 in 0..n {
                    for i2 in 0..n {
                        buf[i2] = plane[i1 + n * i2];
                    }
                    self.line(&mut buf, dir);
                    for i2 in 0..n {
                        plane[i1 + n * i2] = buf[i2];
                    }
                }
            }),
            _ => {
                // Gather x3 lines contiguously, transform, scatter back.
                let mut lines = vec![C64::new(0.0, 0.0); values.len()];
                lines.par_chunks_mut(n).enumerate().for_each(|(k, line)| {
                    for (i3, z) in line.iter_mut().enumerate() {
                        *z = values[k + n * n * i3];
                    }
                });
                lines.par_chunks_mut(n).for_each(|line| self.line(line, dir));
                values.par_chunks_mut(n * n).enumerate().for_each(|(i3, plane)| {
                    for (k, z) in plane.iter_mut().enumerate() {
                        *z = lines[k * n + i3];
                    }
                });
            }
        }
    }
}

fn multiply_momentum(values: &mut [C64], grid: &GridSpec, p: &[f64], factor: &PropagatorFactor) {
    let n = grid.n;
    values.par_chunks_mut(n * n).enumerate().for_each(|(k3, plane)| {
        for k2 in 0..n {
            for k1 in 0..n {
                let m = factor.momentum_multiplier([p[k1], p[k2], p[k3]]).expect("momentum factor");
                plane[k1 + n * k2] *= m;
            }
        }
    });
}

fn multiply_shear(values: &mut [C64], grid: &GridSpec, p: &[f64], x: &[f64], factor: &PropagatorFactor) {
    let n = grid.n;
    values.par_chunks_mut(n * n).enumerate().for_each(|(i3, plane)| {
        for k1 in 0..n {
            let m = factor.shear_multiplier(p[k1], x[i3]).expect("shear factor");
            for i2 in 0..n {
                plane[k1 + n * i2] *= m;
            }
        }
    });
}

/// Applies the seven propagator factors for time `t` to `field`.
pub fn propagate_grid(field: &ComplexField, config: &MeasurementConfig, t: f64) -> Result<ComplexField, GridError> {
    let grid = field.grid;
    let p = grid.momenta();
    let x = grid.positions();
    let fft = Transformer::new(grid.n);
    let factors = factorize(config, t);
    let mut v = field.values.clone();
    for axis in 0..3 {
        fft.axis(&mut v, axis, Direction::Forward);
    }
    for f in &factors[..2] {
        multiply_momentum(&mut v, &grid, &p, f);
    }
    fft.axis(&mut v, 1, Direction::Inverse);
    fft.axis(&mut v, 2, Direction::Inverse);
    multiply_shear(&mut v, &grid, &p, &x, &factors[2]);
    fft.axis(&mut v, 1, Direction::Forward);
    fft.axis(&mut v, 2, Direction::Forward);
    for f in &factors[3..] {
        multiply_momentum(&mut v, &grid, &p, f);
    }
    for axis in 0..3 {
        fft.axis(&mut v, axis, Direction::Inverse);
    }
    let out = ComplexField { values: v, grid };
    out.check_support()?;
    Ok(out)
}

/// `min_u ||u a - b||` over unit complex `u`, in the discrete L2 norm.
pub fn aligned_distance(a: &ComplexField, b: &ComplexField) -> f64 {
    assert_eq!(a.grid, b.grid, "fields must share a grid");
    let overlap: C64 = a.values.par_iter().zip(b.values.par_iter()).map(|(x, y)| x.conj() * y).sum();
    let u = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    let d2: f64 = a.values.par_iter().zip(b.values.par_iter()).map(|(x, y)| (x * u - y).norm_sqr()).sum();
    (d2 * a.grid.cell_volume()).sqrt()
}

/// Symmetrized moments of a field. Positions by quadrature, momenta in the
/// momentum representation, and `<x_i p_j>` as `Re <psi| x_i (p_j psi)>`
/// with `p_j psi` from a single-axis spectral derivative.
pub fn field_moments(field: &ComplexField) -> CanonicalCovariance {
    let grid = field.grid;
    let n = grid.n;
    let x = grid.positions();
    let p = grid.momenta();
    let fft = Transformer::new(n);
    let coords = |k: usize| [k % n, (k / n) % n, k / (n * n)];
    let norm: f64 = field.values.iter().map(|z| z.norm_sqr()).sum();

    let mut derivs = Vec::with_capacity(3);
    for axis in 0..3 {
        let mut d = field.values.clone();
        fft.axis(&mut d, axis, Direction::Forward);
        d.par_iter_mut().enumerate().for_each(|(k, z)| *z *= p[coords(k)[axis]]);
        fft.axis(&mut d, axis, Direction::Inverse);
        derivs.push(d);
    }
    let mut spectrum = field.values.clone();
    for axis in 0..3 {
        fft.axis(&mut spectrum, axis, Direction::Forward);
    }
    let snorm: f64 = spectrum.iter().map(|z| z.norm_sqr()).sum();

    let mut raw = Matrix6::<f64>::zeros();
    let mut mean = Vector6::<f64>::zeros();
    for (k, psi) in field.values.iter().enumerate() {
        let c = coords(k);
        let w = psi.norm_sqr() / norm;
        let pos = [x[c[0]], x[c[1]], x[c[2]]];
        for i in 0..3 {
            mean[2 * i] += w * pos[i];
            mean[2 * i + 1] += (psi.conj() * derivs[i][k]).re / norm;
            for j in 0..3 {
                raw[(2 * i, 2 * j)] += w * pos[i] * pos[j];
                raw[(2 * i, 2 * j + 1)] += (psi.conj() * derivs[j][k]).re * pos[i] / norm;
            }
        }
        let s = spectrum[k];
        let ws = s.norm_sqr() / snorm;
        let mom = [p[c[0]], p[c[1]], p[c[2]]];
        for i in 0..3 {
            for j in 0..3 {
                raw[(2 * i + 1, 2 * j + 1)] += ws * mom[i] * mom[j];
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            raw[(2 * j + 1, 2 * i)] = raw[(2 * i, 2 * j + 1)];
        }
    }
    let sigma = raw - mean * mean.transpose();
    CanonicalCovariance { mean, sigma: (sigma + sigma.transpose()) * 0.5 }
}
