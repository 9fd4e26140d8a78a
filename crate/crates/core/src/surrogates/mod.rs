//! Convex surrogates of the non-convex constraints, with their derivative data.

mod bilinear;
mod distance;
mod rx;
mod srcr;
mod trig;
mod tx;

pub use bilinear::BilinearBound;
pub use distance::{distance_linearization, LinearCut};
pub use rx::RxExpansion;
pub use srcr::{srcr_data, SrcrCut};
pub use trig::TrigSum;
pub use tx::TxExpansion;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SurrogateError {
    #[error("relaxation cut needs a matrix with positive trace")]
    ZeroTrace,
    #[error("expansion point coincides with antenna {other} (distance {distance:e} m)")]
    DegenerateDistance { other: usize, distance: f64 },
}

/// Concave (`curvature < 0`) or convex quadratic model
/// `value + gradient·(t - center) + curvature/2 ‖t - center‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticModel {
    pub center: nalgebra::Vector2<f64>,
    pub value: f64,
    pub gradient: nalgebra::Vector2<f64>,
    pub curvature: f64,
}

impl QuadraticModel {
    pub fn eval(&self, t: &nalgebra::Vector2<f64>) -> f64 {
        let d = t - self.center;
        self.value + self.gradient.dot(&d) + 0.5 * self.curvature * d.norm_squared()
    }
}
