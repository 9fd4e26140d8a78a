/// Convex upper bound of `τ μ` built at `(τ̄, μ̄)`:
/// `¼(τ+μ)² − ¼(τ̄−μ̄)² − ½(τ̄−μ̄)(τ−τ̄−μ+μ̄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearBound {
    pub tau_bar: f64,
    pub mu_bar: f64,
}

impl BilinearBound {
    pub fn new(tau_bar: f64, mu_bar: f64) -> Self {
        Self { tau_bar, mu_bar }
    }

    pub fn eval(&self, tau: f64, mu: f64) -> f64 {
        let d = self.tau_bar - self.mu_bar;
        0.25 * (tau + mu).powi(2) - 0.25 * d * d - 0.5 * d * (tau - self.tau_bar - mu + self.mu_bar)
    }

    /// Affine part `c0 + cτ τ + cμ μ` so that `eval = ¼(τ+μ)² + affine`.
    pub fn affine_part(&self) -> (f64, f64, f64) {
        let d = self.tau_bar - self.mu_bar;
        let c0 = -0.25 * d * d + 0.5 * d * (self.tau_bar - self.mu_bar);
        (c0, -0.5 * d, 0.5 * d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tight_at_expansion() {
        let b = BilinearBound::new(1.7, 0.4);
        assert!((b.eval(1.7, 0.4) - 1.7 * 0.4).abs() < 1e-15);
    }

    #[test]
    fn hand_value() {
        assert_eq!(BilinearBound::new(1.0, 1.0).eval(2.0, 3.0), 6.25);
    }

    #[test]
    fn affine_split_matches_eval() {
        let b = BilinearBound::new(0.3, 2.2);
        let (c0, ct, cm) = b.affine_part();
        let (t, m) = (1.1, -0.7);
        assert!((0.25 * (t + m) * (t + m) + c0 + ct * t + cm * m - b.eval(t, m)).abs() < 1e-14);
    }
}
