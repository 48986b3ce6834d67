use covplan::access_opt::{build_reduced_miqp, solve_full_miqp, solve_miqp, Budget, SolveStatus};
use covplan::assignment::TrailAssignment;
use covplan::geometry::{Point, PolygonWithHoles};
use covplan::pipeline::{initial_assignment, plan_trails, Config};
use covplan::trails::Trail;

fn triangle(x: f64, id: usize) -> Trail {
    Trail::from_ring(vec![Point::new(x, 0.0), Point::new(x + 1.0, 0.0), Point::new(x + 0.5, 0.8)], 0, id).unwrap()
}

fn routes(r: Vec<Vec<usize>>) -> TrailAssignment {
    TrailAssignment {
        routes: r,
        access_points: Vec::new(),
        route_lengths: Vec::new(),
        transition_lengths: Vec::new(),
        longest_tour: 0.0,
    }
}

#[test]
fn triangles_in_a_row_are_visited_in_line_order() {
    // listed out of line order so the identity permutation is not the answer
    let trails = vec![triangle(0.0, 0), triangle(6.0, 1), triangle(3.0, 2)];
    let full = solve_full_miqp(&trails, 1, 3, 1e6, &Budget::default()).unwrap();
    assert_eq!(full.status, SolveStatus::Optimal);
    let order = &full.routes[0];
    assert!(order == &vec![0, 2, 1] || order == &vec![1, 2, 0], "{order:?}");

    // enumeration over the 3! orders, each solved as a reduced problem
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let best = perms
        .iter()
        .map(|p| solve_miqp(&build_reduced_miqp(&routes(vec![p.to_vec()]), &trails).unwrap(), None, &Budget::default()).objective)
        .fold(f64::INFINITY, f64::min);
    assert!((full.objective - best).abs() < 1e-9, "{} vs {best}", full.objective);
    // one shared access point on the middle triangle, best at x = 3.5
    assert!((best - 12.5).abs() < 1e-9, "{best}");
}

#[test]
fn objective_at_rkga_points_is_the_squared_transition_sum() {
    let mut cfg = Config::default();
    cfg.fleet.uav_count = 2;
    cfg.rkga.population = 20;
    cfg.rkga.generations = 5;
    let cell = PolygonWithHoles::rectangle(0.0, 0.0, 80.0, 50.0);
    let trails = plan_trails(&cell, 0, &cfg).unwrap();
    assert!(trails.len() >= 4);
    let a = initial_assignment(&trails, &cfg, 2).unwrap();
    let prob = build_reduced_miqp(&a, &trails).unwrap();
    let direct: f64 = a
        .routes
        .iter()
        .flat_map(|r| r.windows(2).map(|w| a.access_points[w[0]].dist_sq(a.access_points[w[1]])).collect::<Vec<_>>())
        .sum();
    assert!((prob.objective(&a.access_points) - direct).abs() < 1e-9 * (1.0 + direct));
    let sol = solve_miqp(&prob, Some(&a.access_points), &Budget::default());
    assert!(sol.objective <= direct + 1e-9);
    assert!((prob.objective(&sol.access_points) - sol.objective).abs() < 1e-9 * (1.0 + direct));
}
