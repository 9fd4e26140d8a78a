use nalgebra::Vector2;

use super::SurrogateError;

/// Half-plane `normal · t ≥ offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearCut {
    pub normal: Vector2<f64>,
    pub offset: f64,
}

impl LinearCut {
    pub fn slack(&self, t: &Vector2<f64>) -> f64 {
        self.normal.dot(t) - self.offset
    }
}

/// First-order lower models of `‖t − t_v‖ ≥ D` around `expansion` for every
/// other antenna: `u_vᵀ (t − t_v) ≥ D` with `u_v` the unit vector from `t_v`.
/// `skip` excludes the antenna being moved.
pub fn distance_linearization(
    expansion: &Vector2<f64>,
    others: &[Vector2<f64>],
    skip: usize,
    min_spacing: f64,
) -> Result<Vec<LinearCut>, SurrogateError> {
    let mut cuts = Vec::with_capacity(others.len().saturating_sub(1));
    for (v, tv) in others.iter().enumerate() {
        if v == skip {
            continue;
        }
        let diff = expansion - tv;
        let distance = diff.norm();
        if !(distance > 0.0) {
            return Err(SurrogateError::DegenerateDistance { other: v, distance });
        }
        let normal = diff / distance;
        cuts.push(LinearCut { normal, offset: min_spacing + normal.dot(tv) });
    }
    Ok(cuts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn at_expansion_reads_true_distance() {
        let p = Vector2::new(0.1, 0.05);
        let others = [p, Vector2::new(-0.1, 0.0)];
        let cuts = distance_linearization(&p, &others, 0, 0.0625).unwrap();
        assert_eq!(cuts.len(), 1);
        let true_dist = (p - others[1]).norm();
        assert!((cuts[0].slack(&p) - (true_dist - 0.0625)).abs() < 1e-15);
    }

    #[test]
    fn coincident_points_error() {
        let p = Vector2::new(0.1, 0.05);
        let err = distance_linearization(&p, &[Vector2::zeros(), p], 0, 0.1).unwrap_err();
        assert!(matches!(err, SurrogateError::DegenerateDistance { other: 1, .. }));
    }
}
