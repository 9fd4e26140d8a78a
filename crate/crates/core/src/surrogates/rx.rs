//! Expansion of user `k`'s signal and interference terms in its receive
//! antenna position, transmit side held fixed.

use fasopt_conic::max_eigpair;
use nalgebra::{DMatrix, DVector, Vector2};
use num_complex::Complex64;

use super::{QuadraticModel, TrigSum};
use crate::channel::{receive_frv, transmit_frm};
use crate::config::SystemConfig;
use crate::layout::{AntennaLayout, Position};
use crate::scenario::ChannelScenario;

#[derive(Debug, Clone)]
pub struct RxExpansion {
    pub user: usize,
    pub center: Position,
    /// `b_k b_k^H` with `b_k = Σ G w_k`.
    pub signal_matrix: DMatrix<Complex64>,
    /// Interference-plus-distortion matrix `B`.
    pub interference_matrix: DMatrix<Complex64>,
    /// Desired power at the center.
    pub varpi: f64,
    pub lambda_max: f64,
    /// Constant of the majorizer, including thermal noise.
    pub c_const: f64,
    pub n_paths: usize,
    pub gamma: TrigSum,
    pub gamma_tilde: TrigSum,
}

impl RxExpansion {
    pub fn build(s: &ChannelScenario, layout: &AntennaLayout, ws: &[DVector<Complex64>], cfg: &SystemConfig, k: usize) -> Self {
        let rho = cfg.hi_rx[k];
        let eta = cfg.hi_tx;
        let g_mat = transmit_frm(s, k, &layout.tx);
        let sigma = &s.path_response[k];
        let lr = sigma.nrows();
        let center = layout.rx[k];
        let fp = receive_frv(s, k, &center).values;
        let sg = sigma * &g_mat;
        let b: Vec<DVector<Complex64>> = ws.iter().map(|w| &sg * w).collect();
        let signal_matrix = &b[k] * b[k].adjoint();

        let mut interference = DMatrix::<Complex64>::zeros(lr, lr);
        let mut power_diag = DVector::<f64>::zeros(cfg.n_tx);
        for (i, (bi, w)) in b.iter().zip(ws).enumerate() {
            let weight = if i == k { rho } else { 1.0 + rho };
            interference += bi * bi.adjoint() * Complex64::new(weight, 0.0);
            for j in 0..cfg.n_tx {
                power_diag[j] += w[j].norm_sqr();
            }
        }
        let scaled = DMatrix::from_fn(lr, cfg.n_tx, |r, c| sg[(r, c)] * power_diag[c]);
        interference += scaled * sg.adjoint() * Complex64::new((1.0 + rho) * eta, 0.0);
        let interference = (&interference + interference.adjoint()) * Complex64::new(0.5, 0.0);

        let varpi = (fp.adjoint() * &signal_matrix * &fp)[0].re;
        let lambda_max = max_eigpair(&interference).value.max(0.0);
        let shifted = DMatrix::<Complex64>::identity(lr, lr) * Complex64::new(lambda_max, 0.0) - &interference;
        let c_const = (1.0 + rho) * cfg.noise_power + lambda_max * lr as f64 + (fp.adjoint() * &shifted * &fp)[0].re;

        let dirs: Vec<Vector2<f64>> = (0..lr).map(|m| s.users[k].rx_direction(m)).collect();
        let gamma = TrigSum::new(&(&signal_matrix * &fp), dirs.clone(), s.wavelength);
        let gamma_tilde = TrigSum::new(&(-(&shifted * &fp)), dirs, s.wavelength);
        Self {
            user: k,
            center,
            signal_matrix,
            interference_matrix: interference,
            varpi,
            lambda_max,
            c_const,
            n_paths: lr,
            gamma,
            gamma_tilde,
        }
    }

    fn quad(m: &DMatrix<Complex64>, f: &DVector<Complex64>) -> f64 {
        (f.adjoint() * m * f)[0].re
    }

    pub fn signal_at(&self, s: &ChannelScenario, r: &Position) -> f64 {
        Self::quad(&self.signal_matrix, &receive_frv(s, self.user, r).values)
    }

    pub fn delta_at(&self, s: &ChannelScenario, r: &Position, cfg: &SystemConfig) -> f64 {
        let f = receive_frv(s, self.user, r).values;
        Self::quad(&self.interference_matrix, &f) + (1.0 + cfg.hi_rx[self.user]) * cfg.noise_power
    }

    pub fn lower_model(&self) -> QuadraticModel {
        QuadraticModel {
            center: self.center,
            value: self.gamma.value(&self.center),
            gradient: self.gamma.gradient(&self.center),
            curvature: -self.gamma.curvature_bound(),
        }
    }

    pub fn signal_lower_bound(&self, r: &Position) -> f64 {
        self.lower_model().eval(r) - self.varpi
    }

    pub fn upper_model(&self) -> QuadraticModel {
        QuadraticModel {
            center: self.center,
            value: self.gamma_tilde.value(&self.center),
            gradient: self.gamma_tilde.gradient(&self.center),
            curvature: self.gamma_tilde.curvature_bound(),
        }
    }

    pub fn delta_majorizer(&self, r: &Position) -> f64 {
        self.gamma_tilde.value(r) + self.c_const
    }

    pub fn delta_upper_bound(&self, r: &Position) -> f64 {
        self.upper_model().eval(r) + self.c_const
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogates::tx::tests::fixture;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn expansion_matches_sinr_terms() {
        use crate::beams::outer;
        use crate::channel::assemble_channel;
        use crate::hi::{delta_k, trace_product, Impairments};
        let (cfg, s, mut layout, ws) = fixture(7);
        let mats: Vec<_> = ws.iter().map(outer).collect();
        for k in 0..cfg.n_users {
            let e = RxExpansion::build(&s, &layout, &ws, &cfg, k);
            let r = layout.rx[k] + Vector2::new(-0.04, 0.017);
            layout.rx[k] = r;
            let ch = assemble_channel(&s, k, &layout);
            let signal = trace_product(&ch.gram, &mats[k]);
            let delta = delta_k(&ch.gram, &mats, k, Impairments::for_user(&cfg, k)).unwrap().total();
            layout.rx[k] = e.center;
            assert!((e.signal_at(&s, &r) - signal).abs() < 1e-9 * signal);
            assert!((e.delta_at(&s, &r, &cfg) - delta).abs() < 1e-9 * delta);
        }
    }

    #[test]
    fn bounds_are_tight_and_valid() {
        let (cfg, s, layout, ws) = fixture(19);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in 0..cfg.n_users {
            let e = RxExpansion::build(&s, &layout, &ws, &cfg, k);
            let c = e.center;
            let sig = e.signal_at(&s, &c);
            let del = e.delta_at(&s, &c, &cfg);
            assert!((e.signal_lower_bound(&c) - sig).abs() < 1e-9 * sig);
            assert!((e.delta_upper_bound(&c) - del).abs() < 1e-9 * del);
            for _ in 0..100 {
                let r = c + Vector2::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
                let tol = 1e-9 * (sig + del);
                assert!(e.signal_lower_bound(&r) <= e.signal_at(&s, &r) + tol);
                assert!(e.delta_majorizer(&r) + tol >= e.delta_at(&s, &r, &cfg));
                assert!(e.delta_upper_bound(&r) + tol >= e.delta_majorizer(&r));
            }
        }
    }
}
