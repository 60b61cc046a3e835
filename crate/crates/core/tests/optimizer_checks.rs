use kitepath::model;
use kitepath::optimizer::{self, ConstraintKind, PlanConfig, PlanProblem};
use kitepath::{Error, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn problem(r: f64, shape: Shape) -> PlanProblem {
    optimizer::build_problem(r, &PlanConfig { shape, ..PlanConfig::default() }).unwrap()
}

fn best_seed(p: &PlanProblem) -> [f64; 3] {
    optimizer::seed_grid(p, 1)[0]
}

fn random_feasible(p: &PlanProblem, rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let b = &p.bounds;
        let x: [f64; 3] = std::array::from_fn(|i| rng.gen_range(b.lower[i]..b.upper[i]));
        if optimizer::evaluate(p, x).constraints.max_violation() <= 0.0 {
            return x;
        }
    }
}

/// Scaled objective gradient by central differences with its own step.
fn independent_gradient(p: &PlanProblem, x: [f64; 3]) -> [f64; 3] {
    let loyd = model::loyd_power(&p.env, &p.kite);
    let f = |y: [f64; 3]| -optimizer::evaluate(p, y).objective / loyd;
    std::array::from_fn(|i| {
        let h = 1e-5 * x[i].abs().max(1.0);
        let (mut up, mut down) = (x, x);
        up[i] += h;
        down[i] -= h;
        (f(up) - f(down)) / (2.0 * h)
    })
}

#[test]
fn solver_gradient_matches_an_independent_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for (r, shape) in [(100.0, Shape::ELLIPSE), (150.0, Shape::FIGURE_EIGHT), (200.0, Shape::ELLIPSE)] {
        let p = problem(r, shape);
        for _ in 0..17 {
            let x = random_feasible(&p, &mut rng);
            let g = optimizer::objective_gradient(&p, x);
            let oracle = independent_gradient(&p, x);
            let scale = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..3 {
                let tol = 1e-3 * oracle[i].abs().max(1e-3 * scale);
                assert!((g[i] - oracle[i]).abs() <= tol, "x = {x:?}, component {i}: {} vs {}", g[i], oracle[i]);
            }
            checked += 1;
        }
    }
    assert!(checked >= 50);
}

#[test]
fn converged_solutions_hold_on_a_ten_times_finer_grid() {
    for shape in [Shape::ELLIPSE, Shape::FIGURE_EIGHT] {
        for r in [100.0, 125.0, 150.0, 175.0, 200.0] {
            let p = problem(r, shape);
            let sol = optimizer::solve(&p, best_seed(&p)).unwrap();
            assert!(sol.converged);
            assert!(sol.max_violation <= 1e-6);
            let fine = optimizer::verify_fine(&p, sol.params(), 10);
            assert!(fine <= 1e-4, "{shape:?} r = {r}: {fine}");
        }
    }
}

#[test]
fn solution_improves_on_a_feasible_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = problem(150.0, Shape::ELLIPSE);
    for _ in 0..5 {
        let x0 = random_feasible(&p, &mut rng);
        let start = optimizer::evaluate(&p, x0).objective;
        let sol = optimizer::solve(&p, x0).unwrap();
        assert!(sol.start_feasible);
        assert!(sol.p_avg >= start - 1e-9, "{} < {start}", sol.p_avg);
    }
}

#[test]
fn solve_is_deterministic() {
    let p = problem(135.0, Shape::FIGURE_EIGHT);
    let x0 = best_seed(&p);
    let a = optimizer::solve(&p, x0).unwrap();
    let b = optimizer::solve(&p, x0).unwrap();
    assert_eq!(a.params().map(f64::to_bits), b.params().map(f64::to_bits));
    assert_eq!(a, b);
}

#[test]
fn five_seeds_reach_the_same_optimum() {
    let p = problem(150.0, Shape::ELLIPSE);
    let seeds = optimizer::seed_grid(&p, 5);
    assert_eq!(seeds.len(), 5);
    let sols: Vec<_> = seeds.iter().map(|&x| optimizer::solve(&p, x).unwrap()).filter(|s| s.converged).collect();
    assert!(!sols.is_empty());
    let best = sols.iter().map(|s| s.p_avg).fold(f64::NEG_INFINITY, f64::max);
    for s in &sols {
        assert!(s.p_avg >= 0.99 * best, "{} vs {best}", s.p_avg);
    }
    let multi = optimizer::multi_start(&p, &seeds).unwrap();
    assert_eq!(multi.p_avg, best);
    let single = optimizer::multi_start(&p, &seeds[..1]).unwrap();
    assert_eq!(single, optimizer::solve(&p, seeds[0]).unwrap());
}

#[test]
fn unreachable_curvature_cap_exhausts_all_starts() {
    let mut p = problem(150.0, Shape::ELLIPSE);
    p.kappa_max = 1e-5;
    let seeds = [[0.4, 0.1, 0.2], [0.5, 0.2, 0.4], [0.3, 0.05, 0.6]];
    match optimizer::multi_start(&p, &seeds) {
        Err(Error::NoConvergedSolution(n)) => assert_eq!(n, 3),
        other => panic!("expected NoConvergedSolution, got {other:?}"),
    }
}

#[test]
fn tiny_ranges_violate_the_curvature_cap() {
    let p = problem(100.0, Shape::ELLIPSE);
    let min = optimizer::MIN_RANGE;
    let x = [p.beta_min + min, min, min];
    let ev = optimizer::evaluate(&p, x);
    assert!(ev.constraints.floor.abs() < 1e-15);
    assert!(ev.max_kappa > 10.0 * p.kappa_max, "{}", ev.max_kappa);
}

#[test]
fn without_curvature_and_floor_the_path_drops_to_the_horizon() {
    let min = optimizer::MIN_RANGE;
    let mut dbetas = Vec::new();
    for (r, constrained_ratio) in [(100.0, 0.61), (200.0, 0.83)] {
        let mut p = problem(r, Shape::ELLIPSE);
        p.kappa_max = f64::INFINITY;
        p.beta_min = 0.0;
        p.bounds.lower[0] = min;
        let sol = optimizer::multi_start(&p, &[]).unwrap();
        let [b0, db, dp] = sol.params();
        assert!((b0 - db).abs() < 1e-5, "r = {r}: lowest elevation {}", b0 - db);
        assert!(sol.loyd_ratio > constrained_ratio + 0.05, "{}", sol.loyd_ratio);
        // roll from tight turns keeps the azimuth range open
        assert!(dp > 10.0 * min);
        dbetas.push(db);
    }
    // a short tether flattens the path onto the horizon; a long one does not
    assert!((dbetas[0] - min).abs() < 1e-6, "{}", dbetas[0]);
    assert!(dbetas[1] > 10.0 * min);
}

#[test]
fn tether_force_and_rated_power_limits_bind() {
    let base = PlanConfig::default();
    let free = optimizer::solve(&problem(150.0, Shape::ELLIPSE), best_seed(&problem(150.0, Shape::ELLIPSE))).unwrap();

    let capped = PlanConfig { f_tether_max: Some(600.0), ..base.clone() };
    let p = optimizer::build_problem(150.0, &capped).unwrap();
    let sol = optimizer::multi_start(&p, &[]).unwrap();
    let rows = optimizer::evaluate(&p, sol.params()).constraints.tether_force.unwrap();
    assert!(rows.iter().all(|g| *g <= 600.0 * 1e-6));
    assert!(sol.active_constraints.contains(&ConstraintKind::TetherForce));
    assert!(sol.p_avg < free.p_avg);

    let rated = PlanConfig { p_rated: Some(2000.0), ..base };
    let p = optimizer::build_problem(150.0, &rated).unwrap();
    let sol = optimizer::multi_start(&p, &[]).unwrap();
    let rows = optimizer::evaluate(&p, sol.params()).constraints.rated_power.unwrap();
    assert!(rows.iter().all(|g| *g <= 2000.0 * 1e-6));
    assert!(sol.p_avg <= 2000.0 * (1.0 + 1e-6));
    assert!(sol.active_constraints.contains(&ConstraintKind::RatedPower));
}

#[test]
fn floor_is_active_and_ceiling_inactive() {
    for shape in [Shape::ELLIPSE, Shape::FIGURE_EIGHT] {
        for r in [100.0, 150.0, 200.0] {
            let p = problem(r, shape);
            let sol = optimizer::solve(&p, best_seed(&p)).unwrap();
            let active = &sol.active_constraints;
            assert!(active.contains(&ConstraintKind::Floor), "{shape:?} {r}: {active:?}");
            assert!(!active.contains(&ConstraintKind::Ceiling));
            let [b0, db, _] = sol.params();
            assert!((b0 - db - p.beta_min).abs() <= 1e-3);
        }
    }
}

#[test]
fn curvature_cap_binds_only_for_short_figure_eights() {
    for r in [100.0, 150.0, 200.0] {
        let p = problem(r, Shape::ELLIPSE);
        let sol = optimizer::solve(&p, best_seed(&p)).unwrap();
        assert!(!sol.active_constraints.contains(&ConstraintKind::Curvature), "ellipse r = {r}");
    }
    let short = problem(100.0, Shape::FIGURE_EIGHT);
    let sol = optimizer::multi_start(&short, &[]).unwrap();
    assert!(sol.active_constraints.contains(&ConstraintKind::Curvature));
    for r in [150.0, 200.0] {
        let p = problem(r, Shape::FIGURE_EIGHT);
        let sol = optimizer::solve(&p, best_seed(&p)).unwrap();
        assert!(!sol.active_constraints.contains(&ConstraintKind::Curvature), "eight r = {r}");
    }
}

#[test]
fn objective_stays_below_the_rolled_origin_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = problem(120.0, Shape::FIGURE_EIGHT);
    let loyd = model::loyd_power(&p.env, &p.kite);
    for _ in 0..30 {
        let x = random_feasible(&p, &mut rng);
        assert!(optimizer::evaluate(&p, x).objective <= 1.015 * loyd);
    }
}
