use fasopt_conic::certify::{boxed_problem, grid_oracle, random_problem, standard_normal};
use fasopt_conic::{
    dump_problem, hermitian_lift, load_problem, max_eigpair, solve, Affine, ProblemBuilder,
    SolveStatus,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_instances_are_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..60 {
        let p = random_problem(&mut rng);
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "trial {trial}: {}", dump_problem(&p));
        assert!(sol.primal_residual <= 1e-7 && sol.dual_residual <= 1e-7);
        assert!(sol.relative_gap <= 1e-6);
        let diff = (sol.objective - sol.dual_objective).abs() / sol.objective.abs().max(1.0);
        assert!(diff <= 1e-6, "trial {trial}: pcost {} dcost {}", sol.objective, sol.dual_objective);
    }
}

#[test]
fn low_dimensional_instances_match_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..12 {
        let d = 2 + trial % 2;
        let p = boxed_problem(&mut rng, d);
        let sol = solve(&p).unwrap();
        assert!(sol.is_optimal(), "trial {trial}");
        let oracle = grid_oracle(&p, 2.0);
        assert!((sol.objective - oracle).abs() <= 1e-4, "trial {trial}: solver {} grid {}", sol.objective, oracle);
    }
}

/// min c'x over a ball intersected with two halfspaces, by enumerating active sets.
fn ball_cut_oracle(c: &DVector<f64>, center: &DVector<f64>, r: f64, cuts: &[(DVector<f64>, f64)]) -> f64 {
    let feasible = |x: &DVector<f64>| {
        (x - center).norm() <= r * (1.0 + 1e-12) && cuts.iter().all(|(a, b)| a.dot(x) <= b + 1e-12)
    };
    let mut best = f64::INFINITY;
    let subsets: Vec<Vec<usize>> = vec![vec![], vec![0], vec![1], vec![0, 1]];
    for active in subsets {
        // minimize c'x on {||x - center|| <= r, a_i'x = b_i}: project onto the affine set.
        let k = active.len();
        let n = c.len();
        let am = DMatrix::from_fn(k, n, |i, j| cuts[active[i]].0[j]);
        let bv = DVector::from_fn(k, |i, _| cuts[active[i]].1);
        let (proj_center, pc) = if k == 0 {
            (center.clone(), c.clone())
        } else {
            let gram = (&am * am.transpose()).try_inverse().unwrap();
            let p_center = center - am.transpose() * (&gram * (&am * center - &bv));
            let p_c = c - am.transpose() * (&gram * (&am * c));
            (p_center, p_c)
        };
        let dist2 = (&proj_center - center).norm_squared();
        if dist2 > r * r {
            continue;
        }
        let rr = (r * r - dist2).sqrt();
        let x = if pc.norm() > 0.0 { &proj_center - &pc * (rr / pc.norm()) } else { proj_center };
        if feasible(&x) {
            best = best.min(c.dot(&x));
        }
    }
    best
}

#[test]
fn six_variable_socp_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..20 {
        let n = 6;
        let center = DVector::from_fn(n, |_, _| standard_normal(&mut rng));
        let r = rng.random_range(0.5..2.0);
        let c = DVector::from_fn(n, |_, _| standard_normal(&mut rng));
        // cuts pass near the center so they are often active
        let cuts: Vec<(DVector<f64>, f64)> = (0..2)
            .map(|_| {
                let a = DVector::from_fn(n, |_, _| standard_normal(&mut rng));
                let b = a.dot(&center) + rng.random_range(0.05..0.5) * a.norm() * r;
                (a, b)
            })
            .collect();
        let mut pb = ProblemBuilder::new();
        let x = pb.vars(n);
        pb.soc(r, (0..n).map(|i| Affine::from(x[i]) - center[i]).collect());
        for (a, b) in &cuts {
            let mut e = Affine::default();
            for i in 0..n {
                e.add_term(x[i], a[i]);
            }
            pb.le(e, *b);
        }
        let mut obj = Affine::default();
        for i in 0..n {
            obj.add_term(x[i], c[i]);
        }
        pb.minimize(obj);
        let sol = pb.solve().unwrap();
        assert!(sol.raw.is_optimal());
        let oracle = ball_cut_oracle(&c, &center, r, &cuts);
        assert!((sol.objective - oracle).abs() <= 1e-4, "trial {trial}: {} vs {}", sol.objective, oracle);
    }
}

#[test]
fn infeasible_socp_is_certified() {
    // ||x|| <= 1 and x0 >= 2
    let mut pb = ProblemBuilder::new();
    let x = pb.vars(2);
    pb.soc(1.0, vec![x[0].into(), x[1].into()]);
    pb.le(2.0, x[0]);
    pb.minimize(x[1]);
    let p = pb.build();
    let sol = solve(&p).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible);
    assert!(p.g.tr_mul(&sol.z).norm() <= 1e-6);
}

#[test]
fn lift_of_pauli_y_has_paired_spectrum() {
    let j = Complex64::new(0.0, 1.0);
    let m = DMatrix::from_row_slice(2, 2, &[Complex64::new(0.0, 0.0), -j, j, Complex64::new(0.0, 0.0)]);
    let mut eig: Vec<f64> = hermitian_lift(&m).unwrap().symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    for (got, want) in eig.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let b = DMatrix::from_fn(n, n, |_, _| Complex64::new(standard_normal(rng), standard_normal(rng)));
    (&b + b.adjoint()).scale(0.5)
}

#[test]
fn max_eigpair_beats_rayleigh_quotients() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let m = random_hermitian(&mut rng, 5);
        let p = max_eigpair(&m);
        let resid = (&m * &p.vector - &p.vector * Complex64::new(p.value, 0.0)).norm();
        assert!(resid <= 1e-9 * m.norm());
        for _ in 0..100 {
            let u = DVector::from_fn(5, |_, _| Complex64::new(standard_normal(&mut rng), standard_normal(&mut rng)));
            let u = &u / Complex64::new(u.norm(), 0.0);
            let rq = (u.adjoint() * &m * &u)[0].re;
            assert!(p.value >= rq - 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lift_trace_convention(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_hermitian(&mut rng, n);
        let b = random_hermitian(&mut rng, n);
        let lhs = (hermitian_lift(&a).unwrap() * hermitian_lift(&b).unwrap()).trace() / 2.0;
        let rhs = (&a * &b).trace().re;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn lift_preserves_psd(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| Complex64::new(standard_normal(&mut rng), standard_normal(&mut rng)));
        let m = &b * b.adjoint();
        let min = hermitian_lift(&m).unwrap().symmetric_eigenvalues().min();
        prop_assert!(min >= -1e-10 * m.norm());
    }

    #[test]
    fn optimal_returns_satisfy_weak_duality(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng);
        let sol = solve(&p).unwrap();
        prop_assert!(sol.is_optimal());
        // minimization: dual objective bounds the primal from below
        let tol = 1e-6 * sol.objective.abs().max(1.0);
        prop_assert!(sol.dual_objective <= sol.objective + tol);
    }

    #[test]
    fn positive_objective_scaling_keeps_argmin(seed in any::<u64>(), k in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 4;
        let center = DVector::from_fn(n, |_, _| standard_normal(&mut rng));
        let c = DVector::from_fn(n, |_, _| standard_normal(&mut rng));
        let build = |scale: f64| {
            let mut pb = ProblemBuilder::new();
            let x = pb.vars(n);
            pb.soc(1.0, (0..n).map(|i| Affine::from(x[i]) - center[i]).collect());
            let mut obj = Affine::default();
            for i in 0..n {
                obj.add_term(x[i], scale * c[i]);
            }
            pb.minimize(obj);
            pb.solve().unwrap()
        };
        let a = build(1.0);
        let b = build(k);
        prop_assert!(a.raw.is_optimal() && b.raw.is_optimal());
        prop_assert!((&a.raw.x - &b.raw.x).norm() <= 1e-6);
    }

    #[test]
    fn nearby_problem_reproduces_objective(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng);
        let mut q = p.clone();
        // move h by the returned slack's order of precision
        q.h.iter_mut().for_each(|v| *v += 1e-9 * standard_normal(&mut rng));
        let a = solve(&p).unwrap();
        let b = solve(&q).unwrap();
        prop_assert!(a.is_optimal() && b.is_optimal());
        prop_assert!((a.objective - b.objective).abs() <= 1e-6 * a.objective.abs().max(1.0));
    }

    #[test]
    fn dump_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng);
        prop_assert_eq!(load_problem(&dump_problem(&p)).unwrap(), p);
    }
}
