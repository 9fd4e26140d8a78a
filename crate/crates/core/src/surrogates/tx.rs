//! Expansion of user `k`'s signal and interference terms in the position of
//! transmit antenna `n`, all other antennas held fixed.

use fasopt_conic::max_eigpair;
use nalgebra::{DMatrix, DVector, Vector2};
use num_complex::Complex64;

use super::{QuadraticModel, TrigSum};
use crate::channel::{receive_frv, transmit_frv};
use crate::config::SystemConfig;
use crate::layout::{AntennaLayout, Position};
use crate::scenario::ChannelScenario;

#[derive(Debug, Clone)]
pub struct TxExpansion {
    pub user: usize,
    pub antenna: usize,
    /// Position of antenna `n` the expansion is built at.
    pub center: Position,
    /// `Σ^H f f^H Σ`.
    pub phi: DMatrix<Complex64>,
    /// Cross term between antenna `n` and the rest, desired signal.
    pub beta: DVector<Complex64>,
    /// `|w_k(n)|²`.
    pub weight_sq: f64,
    /// Desired power carried by the other antennas.
    pub lambda_rest: f64,
    /// Desired power through antenna `n` alone at the center.
    pub omega: f64,
    /// Linearized desired-signal coefficient.
    pub xi: DVector<Complex64>,
    pub chi: DVector<Complex64>,
    /// Interference and noise not involving antenna `n`.
    pub pi_rest: f64,
    /// Coefficient matrix of the antenna-`n` quadratic interference term.
    pub phi_hat: DMatrix<Complex64>,
    pub lambda_max: f64,
    /// Constant of the majorizer.
    pub c_const: f64,
    pub zeta: DVector<Complex64>,
    pub n_paths: usize,
    pub upsilon: TrigSum,
    pub xi_hat: TrigSum,
}

impl TxExpansion {
    /// `ws` are the (rank-one) beam vectors.
    pub fn build(
        s: &ChannelScenario,
        layout: &AntennaLayout,
        ws: &[DVector<Complex64>],
        cfg: &SystemConfig,
        k: usize,
        n: usize,
    ) -> Self {
        let g_all: Vec<DVector<Complex64>> = layout.tx.iter().map(|t| transmit_frv(s, k, t).values).collect();
        Self::from_responses(s, &g_all, &layout.rx[k], ws, cfg, k, n, layout.tx[n])
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_responses(
        s: &ChannelScenario,
        g_all: &[DVector<Complex64>],
        rx: &Position,
        ws: &[DVector<Complex64>],
        cfg: &SystemConfig,
        k: usize,
        n: usize,
        center: Position,
    ) -> Self {
        let rho = cfg.hi_rx[k];
        let eta = cfg.hi_tx;
        let l = g_all[0].len();
        let f = receive_frv(s, k, rx).values;
        let a = s.path_response[k].adjoint() * f;
        let phi = &a * a.adjoint();
        let gp = &g_all[n];

        // rest_i = Σ_{j≠n} g_j w_i(j)
        let rest: Vec<DVector<Complex64>> = ws
            .iter()
            .map(|w| {
                let mut acc = DVector::zeros(l);
                for (j, g) in g_all.iter().enumerate() {
                    if j != n {
                        acc += g * w[j];
                    }
                }
                acc
            })
            .collect();
        let quad = |v: &DVector<Complex64>| (v.adjoint() * &phi * v)[0].re;

        let wk_n = ws[k][n];
        let beta = &phi * &rest[k] * wk_n.conj();
        let lambda_rest = quad(&rest[k]);
        let phi_tilde = &phi * Complex64::new(wk_n.norm_sqr(), 0.0);
        let omega = (gp.adjoint() * &phi_tilde * gp)[0].re;
        let xi = phi_tilde.adjoint() * gp + &beta;

        let mut chi = DVector::zeros(l);
        let mut pi_rest = (1.0 + rho) * cfg.noise_power;
        let mut coeff = 0.0;
        let hi = rho + eta + rho * eta;
        for (i, w) in ws.iter().enumerate() {
            let term = &phi * &rest[i] * w[n].conj();
            let q = quad(&rest[i]);
            let other = if i == k { 0.0 } else { 1.0 };
            chi += &term * Complex64::new(other + rho, 0.0);
            pi_rest += (other + rho) * q;
            for (j, g) in g_all.iter().enumerate() {
                if j != n {
                    pi_rest += (1.0 + rho) * eta * w[j].norm_sqr() * quad(g);
                }
            }
            coeff += other * w[n].norm_sqr() + hi * w[n].norm_sqr();
        }
        let phi_hat = &phi * Complex64::new(coeff, 0.0);
        let lambda_max = max_eigpair(&phi_hat).value.max(0.0);
        let theta_minus = DMatrix::<Complex64>::identity(l, l) * Complex64::new(lambda_max, 0.0) - &phi_hat;
        let c_const = lambda_max * l as f64 + (gp.adjoint() * &theta_minus * gp)[0].re;
        let zeta = &chi - &theta_minus * gp;

        let dirs: Vec<Vector2<f64>> = (0..l).map(|p| s.users[k].tx_direction(p)).collect();
        let upsilon = TrigSum::new(&xi, dirs.clone(), s.wavelength);
        let xi_hat = TrigSum::new(&zeta, dirs, s.wavelength);
        Self {
            user: k,
            antenna: n,
            center,
            phi,
            beta,
            weight_sq: wk_n.norm_sqr(),
            lambda_rest,
            omega,
            xi,
            chi,
            pi_rest,
            phi_hat,
            lambda_max,
            c_const,
            zeta,
            n_paths: l,
            upsilon,
            xi_hat,
        }
    }

    /// Desired power as a function of antenna `n`'s position, exact.
    pub fn signal_at(&self, s: &ChannelScenario, t: &Position) -> f64 {
        let g = transmit_frv(s, self.user, t).values;
        self.weight_sq * (g.adjoint() * &self.phi * &g)[0].re + 2.0 * (g.adjoint() * &self.beta)[0].re + self.lambda_rest
    }

    /// Interference-plus-noise as a function of antenna `n`'s position, exact.
    pub fn delta_at(&self, s: &ChannelScenario, t: &Position) -> f64 {
        let g = transmit_frv(s, self.user, t).values;
        (g.adjoint() * &self.phi_hat * &g)[0].re + 2.0 * (g.adjoint() * &self.chi)[0].re + self.pi_rest
    }

    /// Concave lower model of the linearized desired term around the center.
    pub fn lower_model(&self) -> QuadraticModel {
        QuadraticModel {
            center: self.center,
            value: self.upsilon.value(&self.center),
            gradient: self.upsilon.gradient(&self.center),
            curvature: -self.upsilon.curvature_bound(),
        }
    }

    /// Lower bound of the desired power: `Υ̂(t) + Λ − ω`.
    pub fn signal_lower_bound(&self, t: &Position) -> f64 {
        self.lower_model().eval(t) + self.lambda_rest - self.omega
    }

    /// Majorized interference term around the center (convex).
    pub fn upper_model(&self) -> QuadraticModel {
        QuadraticModel {
            center: self.center,
            value: self.xi_hat.value(&self.center),
            gradient: self.xi_hat.gradient(&self.center),
            curvature: self.xi_hat.curvature_bound(),
        }
    }

    /// Upper bound of the interference-plus-noise: `Ξ̃(t) + C + Π`.
    pub fn delta_upper_bound(&self, t: &Position) -> f64 {
        self.upper_model().eval(t) + self.c_const + self.pi_rest
    }

    /// MM majorizer before the second-order step: `Ξ̂(t) + C + Π`.
    pub fn delta_majorizer(&self, t: &Position) -> f64 {
        self.xi_hat.value(t) + self.c_const + self.pi_rest
    }
}
