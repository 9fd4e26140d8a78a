use fasopt_conic::max_eigpair;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::SurrogateError;

/// Linear cut `u^H W u ≥ ϑ Tr(W)` and the relaxation level for the next round.
#[derive(Debug, Clone)]
pub struct SrcrCut {
    pub direction: DVector<Complex64>,
    pub theta: f64,
    pub next_theta: f64,
    pub rank_one_ratio: f64,
}

/// Cut data at the iterate `w` with current level `theta` and step `alpha`.
pub fn srcr_data(w: &DMatrix<Complex64>, theta: f64, alpha: f64) -> Result<SrcrCut, SurrogateError> {
    let trace = w.trace().re;
    if !(trace > 0.0) {
        return Err(SurrogateError::ZeroTrace);
    }
    let pair = max_eigpair(w);
    let ratio = (pair.value / trace).clamp(0.0, 1.0);
    Ok(SrcrCut {
        direction: pair.vector,
        theta,
        next_theta: (ratio + alpha).min(1.0),
        rank_one_ratio: ratio,
    })
}
