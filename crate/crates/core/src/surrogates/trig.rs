use std::f64::consts::PI;

use nalgebra::{DVector, Matrix2, Vector2};
use num_complex::Complex64;

/// `2 Re{ g(t)^H c }` with `g(t)_l = exp(j 2π/λ a_l·t)`, written as
/// `2 Σ |c_l| cos(2π/λ a_l·t − ∠c_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSum {
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
    pub directions: Vec<Vector2<f64>>,
    pub wavelength: f64,
}

impl TrigSum {
    pub fn new(coeffs: &DVector<Complex64>, directions: Vec<Vector2<f64>>, wavelength: f64) -> Self {
        assert_eq!(coeffs.len(), directions.len());
        Self {
            amplitudes: coeffs.iter().map(|c| c.norm()).collect(),
            phases: coeffs.iter().map(|c| c.arg()).collect(),
            directions,
            wavelength,
        }
    }

    fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    fn angle(&self, l: usize, t: &Vector2<f64>) -> f64 {
        self.wavenumber() * self.directions[l].dot(t) - self.phases[l]
    }

    pub fn value(&self, t: &Vector2<f64>) -> f64 {
        (0..self.amplitudes.len()).map(|l| 2.0 * self.amplitudes[l] * self.angle(l, t).cos()).sum()
    }

    pub fn gradient(&self, t: &Vector2<f64>) -> Vector2<f64> {
        let k = self.wavenumber();
        (0..self.amplitudes.len())
            .map(|l| self.directions[l] * (-2.0 * k * self.amplitudes[l] * self.angle(l, t).sin()))
            .sum()
    }

    pub fn hessian(&self, t: &Vector2<f64>) -> Matrix2<f64> {
        let k = self.wavenumber();
        (0..self.amplitudes.len())
            .map(|l| {
                let a = self.directions[l];
                a * a.transpose() * (-2.0 * k * k * self.amplitudes[l] * self.angle(l, t).cos())
            })
            .sum()
    }

    /// Uniform curvature bound `(16π²/λ²) Σ |c_l|`, dominating the Hessian
    /// in spectral norm at every position.
    pub fn curvature_bound(&self) -> f64 {
        16.0 * PI * PI / (self.wavelength * self.wavelength) * self.amplitudes.iter().sum::<f64>()
    }
}
