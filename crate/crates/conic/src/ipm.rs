//! Homogeneous self-dual predictor-corrector iteration.

use nalgebra::{DMatrix, DVector};

use crate::cones::{identity, jordan, jordan_inv, layout, max_step, Block, Scaling};
use crate::problem::{Cone, ConicProblem, ConicSolution, ProblemError, SolveStatus, SolverSettings};

/// Solves with default settings.
pub fn solve(p: &ConicProblem) -> Result<ConicSolution, ProblemError> {
    solve_with(p, &SolverSettings::default())
}

pub fn solve_with(p: &ConicProblem, settings: &SolverSettings) -> Result<ConicSolution, ProblemError> {
    p.validate()?;
    let reduced = Reduced::new(p);
    let mut sol = Ipm::new(&reduced, settings).run();
    // Re-expand s and z onto the original row layout; free rows get zero dual.
    let mut s = DVector::zeros(p.n_cone_rows());
    let mut z = DVector::zeros(p.n_cone_rows());
    for (k, &orig) in reduced.kept_rows.iter().enumerate() {
        s[orig] = sol.s[k];
        z[orig] = sol.z[k];
    }
    for &orig in &reduced.free_rows {
        s[orig] = p.h[orig] - p.g.row(orig).dot(&sol.x.transpose());
    }
    sol.s = s;
    sol.z = z;
    Ok(sol)
}

/// Problem with free rows removed.
struct Reduced {
    c: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    g: DMatrix<f64>,
    h: DVector<f64>,
    blocks: Vec<Block>,
    kept_rows: Vec<usize>,
    free_rows: Vec<usize>,
}

impl Reduced {
    fn new(p: &ConicProblem) -> Self {
        let mut kept_rows = Vec::new();
        let mut free_rows = Vec::new();
        let mut cones = Vec::new();
        let mut offset = 0;
        for cone in &p.cones {
            let r = cone.rows();
            match cone {
                Cone::Free(_) => free_rows.extend(offset..offset + r),
                _ => {
                    kept_rows.extend(offset..offset + r);
                    cones.push(*cone);
                }
            }
            offset += r;
        }
        let n = p.n_vars();
        let mut g = DMatrix::zeros(kept_rows.len(), n);
        let mut h = DVector::zeros(kept_rows.len());
        for (k, &orig) in kept_rows.iter().enumerate() {
            g.set_row(k, &p.g.row(orig));
            h[k] = p.h[orig];
        }
        let a = if p.a.nrows() == 0 { DMatrix::zeros(0, n) } else { p.a.clone() };
        Self {
            c: p.c.clone(),
            a,
            b: p.b.clone(),
            g,
            h,
            blocks: layout(&cones),
            kept_rows,
            free_rows,
        }
    }
}

struct Ipm<'a> {
    p: &'a Reduced,
    set: &'a SolverSettings,
    n: usize,
    neq: usize,
    m: usize,
    degree: usize,
    e: DVector<f64>,
    resx0: f64,
    resy0: f64,
}

/// Iterate of the embedding.
#[derive(Clone)]
struct Point {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    s: DVector<f64>,
    tau: f64,
    kappa: f64,
}

struct Dir {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    s: DVector<f64>,
    tau: f64,
    kappa: f64,
}

/// Factored reduced KKT system for one scaling.
struct Kkt {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    mat: DMatrix<f64>,
}

struct Residuals {
    rx: DVector<f64>,
    ry: DVector<f64>,
    rz: DVector<f64>,
    rt: f64,
}

struct Stats {
    pres: f64,
    dres: f64,
    pcost: f64,
    dcost: f64,
    gap: f64,
    relgap: f64,
}

impl<'a> Ipm<'a> {
    fn new(p: &'a Reduced, set: &'a SolverSettings) -> Self {
        let n = p.c.len();
        let neq = p.b.len();
        let m = p.h.len();
        let degree = p.blocks.iter().map(|b| b.kind.degree()).sum();
        let e = identity(&p.blocks, m);
        let resx0 = p.c.norm().max(1.0);
        let resy0 = (p.b.norm_squared() + p.h.norm_squared()).sqrt().max(1.0);
        Self { p, set, n, neq, m, degree, e, resx0, resy0 }
    }

    fn residuals(&self, pt: &Point) -> Residuals {
        let p = self.p;
        let rx = p.a.tr_mul(&pt.y) + p.g.tr_mul(&pt.z) + &p.c * pt.tau;
        let ry = &p.b * pt.tau - &p.a * &pt.x;
        let rz = &pt.s + &p.g * &pt.x - &p.h * pt.tau;
        let rt = pt.kappa + p.c.dot(&pt.x) + p.b.dot(&pt.y) + p.h.dot(&pt.z);
        Residuals { rx, ry, rz, rt }
    }

    fn stats(&self, pt: &Point) -> Stats {
        let p = self.p;
        let t = pt.tau;
        let x = &pt.x / t;
        let y = &pt.y / t;
        let z = &pt.z / t;
        let s = &pt.s / t;
        let ry = &p.a * &x - &p.b;
        let rz = &p.g * &x + &s - &p.h;
        let pres = (ry.norm_squared() + rz.norm_squared()).sqrt() / self.resy0;
        let dres = (p.a.tr_mul(&y) + p.g.tr_mul(&z) + &p.c).norm() / self.resx0;
        let pcost = p.c.dot(&x);
        let dcost = -p.b.dot(&y) - p.h.dot(&z);
        let gap = s.dot(&z);
        let relgap = gap / pcost.abs().min(dcost.abs()).max(1.0);
        Stats { pres, dres, pcost, dcost, gap, relgap }
    }

    /// Factors the scaled system `[[0, A', Ĝ'], [A, 0, 0], [Ĝ, 0, -I]]` with
    /// `Ĝ = W^{-T} G`; avoids forming the squared normal matrix `Ĝ'Ĝ`.
    fn factor(&self, w: &Scaling) -> Option<Kkt> {
        let p = self.p;
        let (n, neq, m) = (self.n, self.neq, self.m);
        let gt = w.winv_t_mat(&p.blocks, &p.g);
        let dim = n + neq + m;
        let mut mat = DMatrix::zeros(dim, dim);
        if neq > 0 {
            mat.view_mut((0, n), (n, neq)).copy_from(&p.a.transpose());
            mat.view_mut((n, 0), (neq, n)).copy_from(&p.a);
        }
        mat.view_mut((0, n + neq), (n, m)).copy_from(&gt.transpose());
        mat.view_mut((n + neq, 0), (m, n)).copy_from(&gt);
        for i in n + neq..dim {
            mat[(i, i)] = -1.0;
        }
        let scale = mat.amax().max(1.0);
        let mut reg = mat.clone();
        for i in 0..n {
            reg[(i, i)] += 1e-12 * scale;
        }
        for i in n..n + neq {
            reg[(i, i)] -= 1e-12 * scale;
        }
        let lu = reg.lu();
        if !lu.is_invertible() {
            return None;
        }
        Some(Kkt { lu, mat })
    }

    /// Solves `A'dy + G'dz = bx, A dx = by, G dx - W'W dz = bz`.
    fn kkt_solve(
        &self,
        kkt: &Kkt,
        w: &Scaling,
        bx: &DVector<f64>,
        by: &DVector<f64>,
        bz: &DVector<f64>,
    ) -> Option<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        let (n, neq, m) = (self.n, self.neq, self.m);
        let mut rhs = DVector::zeros(n + neq + m);
        rhs.rows_mut(0, n).copy_from(bx);
        rhs.rows_mut(n, neq).copy_from(by);
        rhs.rows_mut(n + neq, m).copy_from(&w.winv_t(&self.p.blocks, bz));
        let mut sol = kkt.lu.solve(&rhs)?;
        let target = 1e-15 * rhs.amax().max(1e-300);
        for _ in 0..5 {
            let r = &rhs - &kkt.mat * &sol;
            if r.amax() <= target {
                break;
            }
            sol += kkt.lu.solve(&r)?;
        }
        if sol.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let dx = sol.rows(0, n).clone_owned();
        let dy = sol.rows(n, neq).clone_owned();
        let dz = w.winv(&self.p.blocks, &sol.rows(n + neq, m).clone_owned());
        Some((dx, dy, dz))
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        pt: &Point,
        w: &Scaling,
        kkt: &Kkt,
        d2: &(DVector<f64>, DVector<f64>, DVector<f64>),
        res: &Residuals,
        lin: f64,
        rc: &DVector<f64>,
        rk: f64,
    ) -> Option<Dir> {
        let p = self.p;
        let blocks = &p.blocks;
        let lrc = jordan_inv(blocks, &w.lambda, rc);
        let bx = &res.rx * (-lin);
        let by = &res.ry * lin;
        let bz = &res.rz * (-lin) - w.wt(blocks, &lrc);
        let (dx1, dy1, dz1) = self.kkt_solve(kkt, w, &bx, &by, &bz)?;
        let (dx2, dy2, dz2) = d2;
        let num = -lin * res.rt - rk / pt.tau - (p.c.dot(&dx1) + p.b.dot(&dy1) + p.h.dot(&dz1));
        let den = p.c.dot(dx2) + p.b.dot(dy2) + p.h.dot(dz2) - pt.kappa / pt.tau;
        if den == 0.0 || !den.is_finite() {
            return None;
        }
        let dtau = num / den;
        let dx = dx1 + dx2 * dtau;
        let dy = dy1 + dy2 * dtau;
        let dz = dz1 + dz2 * dtau;
        // from the linearized primal equation rather than the complementarity
        // row, so the primal residual contracts to rounding accuracy
        let ds = &res.rz * (-lin) - &p.g * &dx + &p.h * dtau;
        let dkappa = (rk - pt.kappa * dtau) / pt.tau;
        let ok = dtau.is_finite() && dkappa.is_finite() && ds.iter().chain(dz.iter()).all(|v| v.is_finite());
        ok.then_some(Dir { x: dx, y: dy, z: dz, s: ds, tau: dtau, kappa: dkappa })
    }

    fn step_length(&self, pt: &Point, d: &Dir, cap: f64) -> f64 {
        let blocks = &self.p.blocks;
        let mut a = max_step(blocks, &pt.s, &d.s, cap).min(max_step(blocks, &pt.z, &d.z, cap));
        if d.tau < 0.0 {
            a = a.min(-pt.tau / d.tau);
        }
        if d.kappa < 0.0 {
            a = a.min(-pt.kappa / d.kappa);
        }
        a
    }

    fn run(&self) -> ConicSolution {
        let p = self.p;
        let blocks = &p.blocks;
        let mut pt = Point {
            x: DVector::zeros(self.n),
            y: DVector::zeros(self.neq),
            z: self.e.clone(),
            s: self.e.clone(),
            tau: 1.0,
            kappa: 1.0,
        };
        let mut iter = 0;
        loop {
            let st = self.stats(&pt);
            let res = self.residuals(&pt);
            let mu = (pt.s.dot(&pt.z) + pt.tau * pt.kappa) / (self.degree as f64 + 1.0);
            if self.set.verbose {
                eprintln!(
                    "{iter:3} pcost {:+.6e} dcost {:+.6e} gap {:.2e} pres {:.2e} dres {:.2e} tau {:.2e} kappa {:.2e}",
                    st.pcost, st.dcost, st.gap, st.pres, st.dres, pt.tau, pt.kappa
                );
            }
            if st.pres <= self.set.feastol && st.dres <= self.set.feastol && st.relgap <= self.set.gaptol {
                return self.finish(&pt, SolveStatus::Optimal, iter);
            }
            if let Some(status) = self.certificate(&pt) {
                return self.finish(&pt, status, iter);
            }
            if iter >= self.set.max_iters {
                return self.finish(&pt, SolveStatus::MaxIters, iter);
            }
            if !mu.is_finite() || mu <= 0.0 {
                return self.finish(&pt, SolveStatus::NumericalFailure, iter);
            }

            let Ok(w) = Scaling::new(blocks, &pt.s, &pt.z) else {
                return self.finish(&pt, SolveStatus::NumericalFailure, iter);
            };
            let Some(kkt) = self.factor(&w) else {
                return self.finish(&pt, SolveStatus::NumericalFailure, iter);
            };
            let Some(d2) = self.kkt_solve(&kkt, &w, &(-&p.c), &p.b, &p.h) else {
                return self.finish(&pt, SolveStatus::NumericalFailure, iter);
            };

            let ll = jordan(blocks, &w.lambda, &w.lambda);
            let rc_aff = -&ll;
            let rk_aff = -pt.tau * pt.kappa;
            let Some(aff) = self.direction(&pt, &w, &kkt, &d2, &res, 1.0, &rc_aff, rk_aff) else {
                return self.finish(&pt, SolveStatus::NumericalFailure, iter);
            };
            let alpha_aff = self.step_length(&pt, &aff, 1.0);
            let sigma = (1.0 - alpha_aff).powi(3);

            let cross = jordan(blocks, &w.winv_t(blocks, &aff.s), &w.w(blocks, &aff.z));
            let rc = -ll - cross + &self.e * (sigma * mu);
            let rk = -pt.tau * pt.kappa - aff.tau * aff.kappa + sigma * mu;
            let Some(dir) = self.direction(&pt, &w, &kkt, &d2, &res, 1.0 - sigma, &rc, rk) else {
                return self.finish(&pt, SolveStatus::NumericalFailure, iter);
            };
            let alpha = (self.set.step_fraction * self.step_length(&pt, &dir, f64::INFINITY)).min(1.0);
            if !(alpha > 1e-12) {
                return self.finish(&pt, SolveStatus::NumericalFailure, iter);
            }

            let next = Point {
                x: &pt.x + &dir.x * alpha,
                y: &pt.y + &dir.y * alpha,
                z: &pt.z + &dir.z * alpha,
                s: &pt.s + &dir.s * alpha,
                tau: pt.tau + dir.tau * alpha,
                kappa: pt.kappa + dir.kappa * alpha,
            };
            if !(next.tau > 0.0 && next.kappa > 0.0) {
                return self.finish(&pt, SolveStatus::NumericalFailure, iter);
            }
            pt = next;
            iter += 1;
        }
    }

    fn certificate(&self, pt: &Point) -> Option<SolveStatus> {
        let p = self.p;
        let tol = self.set.feastol;
        let dual_lin = p.h.dot(&pt.z) + p.b.dot(&pt.y);
        if dual_lin < 0.0 {
            let r = (p.a.tr_mul(&pt.y) + p.g.tr_mul(&pt.z)).norm() / self.resx0;
            if r / -dual_lin <= tol {
                return Some(SolveStatus::Infeasible);
            }
        }
        let cx = p.c.dot(&pt.x);
        if cx < 0.0 {
            let ax = &p.a * &pt.x;
            let gs = &p.g * &pt.x + &pt.s;
            let r = (ax.norm_squared() + gs.norm_squared()).sqrt() / self.resy0;
            if r / -cx <= tol {
                return Some(SolveStatus::Unbounded);
            }
        }
        None
    }

    fn finish(&self, pt: &Point, status: SolveStatus, iterations: usize) -> ConicSolution {
        let p = self.p;
        match status {
            SolveStatus::Infeasible => {
                let scale = -(p.h.dot(&pt.z) + p.b.dot(&pt.y));
                let y = &pt.y / scale;
                let z = &pt.z / scale;
                let dres = (p.a.tr_mul(&y) + p.g.tr_mul(&z)).norm() / self.resx0;
                ConicSolution {
                    status,
                    x: DVector::from_element(self.n, f64::NAN),
                    s: DVector::from_element(self.m, f64::NAN),
                    y,
                    z,
                    objective: f64::INFINITY,
                    dual_objective: f64::INFINITY,
                    primal_residual: f64::NAN,
                    dual_residual: dres,
                    gap: f64::NAN,
                    relative_gap: f64::NAN,
                    iterations,
                }
            }
            SolveStatus::Unbounded => {
                let scale = -p.c.dot(&pt.x);
                let x = &pt.x / scale;
                let s = &pt.s / scale;
                let ax = &p.a * &x;
                let gs = &p.g * &x + &s;
                let pres = (ax.norm_squared() + gs.norm_squared()).sqrt() / self.resy0;
                ConicSolution {
                    status,
                    x,
                    s,
                    y: DVector::from_element(self.neq, f64::NAN),
                    z: DVector::from_element(self.m, f64::NAN),
                    objective: f64::NEG_INFINITY,
                    dual_objective: f64::NEG_INFINITY,
                    primal_residual: pres,
                    dual_residual: f64::NAN,
                    gap: f64::NAN,
                    relative_gap: f64::NAN,
                    iterations,
                }
            }
            _ => {
                let st = self.stats(pt);
                let t = pt.tau;
                ConicSolution {
                    status,
                    x: &pt.x / t,
                    y: &pt.y / t,
                    z: &pt.z / t,
                    s: &pt.s / t,
                    objective: st.pcost,
                    dual_objective: st.dcost,
                    primal_residual: st.pres,
                    dual_residual: st.dres,
                    gap: st.gap,
                    relative_gap: st.relgap,
                    iterations,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[f64], g: &[f64], h: &[f64]) -> ConicProblem {
        let n = c.len();
        let m = h.len();
        ConicProblem {
            c: DVector::from_column_slice(c),
            a: DMatrix::zeros(0, n),
            b: DVector::zeros(0),
            g: DMatrix::from_row_slice(m, n, g),
            h: DVector::from_column_slice(h),
            cones: vec![Cone::NonNeg(m)],
        }
    }

    #[test]
    fn maximize_bounded_scalar() {
        // max x s.t. x <= 1, x >= 0
        let p = lp(&[-1.0], &[1.0, -1.0], &[1.0, 0.0]);
        let sol = solve(&p).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.x[0] - 1.0).abs() < 1e-6);
        assert!((sol.objective + 1.0).abs() < 1e-6);
    }

    #[test]
    fn detects_infeasible() {
        // x <= -1 and x >= 0
        let p = lp(&[1.0], &[1.0, -1.0], &[-1.0, 0.0]);
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
        let cert = p.g.tr_mul(&sol.z).norm();
        assert!(cert < 1e-6);
        assert!((p.h.dot(&sol.z) + 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_unbounded() {
        // min -x s.t. x >= 0
        let p = lp(&[-1.0], &[-1.0], &[0.0]);
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn equality_and_free_rows() {
        // min x0 + x1 s.t. x0 + x1 = 2 (eq), x >= 0, free row x0 - x1 <= anything
        let p = ConicProblem {
            c: DVector::from_vec(vec![1.0, 2.0]),
            a: DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            b: DVector::from_vec(vec![2.0]),
            g: DMatrix::from_row_slice(3, 2, &[1.0, -1.0, -1.0, 0.0, 0.0, -1.0]),
            h: DVector::from_vec(vec![5.0, 0.0, 0.0]),
            cones: vec![Cone::Free(1), Cone::NonNeg(2)],
        };
        let sol = solve(&p).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.x[0] - 2.0).abs() < 1e-6 && sol.x[1].abs() < 1e-6);
        assert!((sol.s[0] - 3.0).abs() < 1e-6);
    }
}
