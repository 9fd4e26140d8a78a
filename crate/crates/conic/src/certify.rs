//! Random certified instances and a brute-force oracle, shared by the solver
//! tests and the validation suite.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::svec::{smat, svec};
use crate::{Cone, ConicProblem};

/// Box-Muller standard normal sample.
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// A point strictly inside `cone`.
pub fn interior_point(rng: &mut impl Rng, cone: Cone) -> Vec<f64> {
    match cone {
        Cone::NonNeg(d) => (0..d).map(|_| rng.random_range(0.1..2.0)).collect(),
        Cone::SecondOrder(d) => {
            let tail: Vec<f64> = (0..d - 1).map(|_| standard_normal(rng)).collect();
            let norm = tail.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut v = vec![norm + rng.random_range(0.1..1.0)];
            v.extend(tail);
            v
        }
        Cone::Psd(n) => {
            let b = DMatrix::from_fn(n, n, |_, _| standard_normal(rng));
            let m = &b * b.transpose() + DMatrix::identity(n, n) * 0.1;
            svec(&m).as_slice().to_vec()
        }
        Cone::Free(d) => (0..d).map(|_| standard_normal(rng)).collect(),
    }
}

/// Random feasible, bounded problem built from strictly interior primal and dual points.
pub fn random_problem(rng: &mut impl Rng) -> ConicProblem {
    let n = rng.random_range(2..=20);
    let mut cones = Vec::new();
    let mut rows = 0;
    while rows < n + 2 {
        let cone = match rng.random_range(0..3) {
            0 => Cone::NonNeg(rng.random_range(1..=4)),
            1 => Cone::SecondOrder(rng.random_range(2..=5)),
            _ => Cone::Psd(rng.random_range(2..=3)),
        };
        rows += cone.rows();
        cones.push(cone);
    }
    let neq = rng.random_range(0..=n / 3);
    let g = DMatrix::from_fn(rows, n, |_, _| standard_normal(rng));
    let a = DMatrix::from_fn(neq, n, |_, _| standard_normal(rng));
    let x0 = DVector::from_fn(n, |_, _| standard_normal(rng));
    let y0 = DVector::from_fn(neq, |_, _| standard_normal(rng));
    let mut s0 = Vec::new();
    let mut z0 = Vec::new();
    for &c in &cones {
        s0.extend(interior_point(rng, c));
        z0.extend(interior_point(rng, c));
    }
    let s0 = DVector::from_vec(s0);
    let z0 = DVector::from_vec(z0);
    let h = &g * &x0 + s0;
    let b = &a * &x0;
    let c = -(g.tr_mul(&z0) + a.tr_mul(&y0));
    ConicProblem { c, a, b, g, h, cones }
}

/// Membership test with absolute slack `tol`.
pub fn in_cone(cone: Cone, v: &[f64], tol: f64) -> bool {
    match cone {
        Cone::Free(_) => true,
        Cone::NonNeg(_) => v.iter().all(|&x| x >= -tol),
        Cone::SecondOrder(_) => v[0] >= v[1..].iter().map(|x| x * x).sum::<f64>().sqrt() - tol,
        Cone::Psd(n) => smat(v, n).symmetric_eigenvalues().min() >= -tol,
    }
}

/// `h - Gx ∈ K` with no slack (equality rows are ignored).
pub fn feasible(p: &ConicProblem, x: &DVector<f64>) -> bool {
    let s = &p.h - &p.g * x;
    let mut off = 0;
    p.cones.iter().all(|&c| {
        let ok = in_cone(c, &s.as_slice()[off..off + c.rows()], 0.0);
        off += c.rows();
        ok
    })
}

/// Repeated grid refinement around the best feasible point found so far.
pub fn grid_oracle(p: &ConicProblem, half_width: f64) -> f64 {
    let d = p.n_vars();
    let per_dim: usize = if d == 2 { 81 } else { 31 };
    let mut center = DVector::zeros(d);
    let mut width = half_width;
    let mut best = f64::INFINITY;
    for _ in 0..40 {
        let mut best_x = center.clone();
        let total = per_dim.pow(d as u32);
        for k in 0..total {
            let mut idx = k;
            let x = DVector::from_fn(d, |_, _| {
                let i = idx % per_dim;
                idx /= per_dim;
                -1.0 + 2.0 * i as f64 / (per_dim - 1) as f64
            });
            let x = &center + x * width;
            if feasible(p, &x) {
                let v = p.c.dot(&x);
                if v < best {
                    best = v;
                    best_x = x;
                }
            }
        }
        center = best_x;
        width *= 0.5;
    }
    best
}

/// Low-dimensional instance with a box `|x_i| <= 2` and random cuts through the interior.
pub fn boxed_problem(rng: &mut impl Rng, d: usize) -> ConicProblem {
    let mut g_rows: Vec<Vec<f64>> = Vec::new();
    let mut h = Vec::new();
    for i in 0..d {
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; d];
            row[i] = sign;
            g_rows.push(row);
            h.push(2.0);
        }
    }
    let mut cones = vec![Cone::NonNeg(2 * d)];
    let x0 = DVector::from_fn(d, |_, _| rng.random_range(-0.5..0.5));
    let kind = rng.random_range(0..3);
    let cone = match kind {
        0 => Cone::NonNeg(3),
        1 => Cone::SecondOrder(d + 1),
        _ => Cone::Psd(2),
    };
    let g = DMatrix::from_fn(cone.rows(), d, |_, _| standard_normal(rng));
    let s0 = DVector::from_vec(interior_point(rng, cone)) * 0.5;
    let hc = &g * &x0 + s0;
    for r in 0..cone.rows() {
        g_rows.push(g.row(r).iter().copied().collect());
        h.push(hc[r]);
    }
    cones.push(cone);
    let m = g_rows.len();
    let flat: Vec<f64> = g_rows.into_iter().flatten().collect();
    ConicProblem {
        c: DVector::from_fn(d, |_, _| standard_normal(rng)),
        a: DMatrix::zeros(0, d),
        b: DVector::zeros(0),
        g: DMatrix::from_row_slice(m, d, &flat),
        h: DVector::from_vec(h),
        cones,
    }
}
