use fasopt_conic::max_eigpair;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Ratio below which an extracted beam is flagged as a lossy rank-one approximation.
pub const RANK_ONE_FLAG: f64 = 0.99;

#[derive(Debug, Error, PartialEq)]
pub enum BeamError {
    #[error("cannot extract a beam from a zero matrix")]
    ZeroMatrix,
}

/// Dominant rank-one factor of a PSD matrix.
#[derive(Debug, Clone)]
pub struct RankOne {
    pub vector: DVector<Complex64>,
    /// `λ_max / Tr`.
    pub ratio: f64,
    pub flagged: bool,
}

pub fn extract_rank_one(w: &DMatrix<Complex64>) -> Result<RankOne, BeamError> {
    let trace = w.trace().re;
    if !(trace > 0.0) {
        return Err(BeamError::ZeroMatrix);
    }
    let pair = max_eigpair(w);
    let value = pair.value.max(0.0);
    let ratio = (value / trace).min(1.0);
    Ok(RankOne {
        vector: pair.vector * Complex64::new(value.sqrt(), 0.0),
        ratio,
        flagged: ratio < RANK_ONE_FLAG,
    })
}

pub fn outer(w: &DVector<Complex64>) -> DMatrix<Complex64> {
    w * w.adjoint()
}

/// Lifted matrices with their extracted vectors.
#[derive(Debug, Clone)]
pub struct BeamformingSet {
    pub lifted: Vec<DMatrix<Complex64>>,
    pub vectors: Vec<DVector<Complex64>>,
    pub rank_one_ratio: Vec<f64>,
}

impl BeamformingSet {
    pub fn from_vectors(vectors: Vec<DVector<Complex64>>) -> Self {
        let lifted: Vec<_> = vectors.iter().map(outer).collect();
        let rank_one_ratio = vec![1.0; vectors.len()];
        Self { lifted, vectors, rank_one_ratio }
    }

    /// Keeps `lifted` and extracts one vector per matrix; zero matrices give zero beams.
    pub fn from_lifted(lifted: Vec<DMatrix<Complex64>>) -> Self {
        let mut vectors = Vec::with_capacity(lifted.len());
        let mut rank_one_ratio = Vec::with_capacity(lifted.len());
        for w in &lifted {
            match extract_rank_one(w) {
                Ok(r) => {
                    vectors.push(r.vector);
                    rank_one_ratio.push(r.ratio);
                }
                Err(BeamError::ZeroMatrix) => {
                    vectors.push(DVector::zeros(w.nrows()));
                    rank_one_ratio.push(1.0);
                }
            }
        }
        Self { lifted, vectors, rank_one_ratio }
    }

    /// Rank-one matrices `w_k w_k^H` of the extracted vectors.
    pub fn rank_one_matrices(&self) -> Vec<DMatrix<Complex64>> {
        self.vectors.iter().map(outer).collect()
    }

    pub fn total_power(&self) -> f64 {
        self.vectors.iter().map(|w| w.norm_squared()).sum()
    }

    pub fn lifted_power(&self) -> f64 {
        self.lifted.iter().map(|w| w.trace().re).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.vectors.iter().all(|w| w.norm_squared() == 0.0)
    }
}
