use super::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square(x: f64, y: f64, s: f64, id: usize) -> Trail {
    Trail::from_ring(
        vec![Point::new(x, y), Point::new(x + s, y), Point::new(x + s, y + s), Point::new(x, y + s)],
        0,
        id,
    )
    .unwrap()
}

fn one_route(n: usize) -> TrailAssignment {
    TrailAssignment {
        routes: vec![(0..n).collect()],
        access_points: Vec::new(),
        route_lengths: Vec::new(),
        transition_lengths: Vec::new(),
        longest_tour: 0.0,
    }
}

fn random_polygon(rng: &mut ChaCha8Rng, sides: usize, id: usize) -> Trail {
    let c = Point::new(rng.random_range(0.0..20.0), rng.random_range(0.0..20.0));
    let r = rng.random_range(1.0..4.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let ring = (0..sides)
        .map(|k| {
            let a = phase + std::f64::consts::TAU * k as f64 / sides as f64;
            c + Point::new(a.cos(), a.sin()) * r
        })
        .collect();
    Trail::from_ring(ring, 0, id).unwrap()
}

/// Optimum for fixed segment choices by exact coordinate descent on segment parameters.
fn fixed_choice_value(segs: &[(Point, Point)]) -> f64 {
    let m = segs.len();
    let mut t = vec![0.5; m];
    let at = |t: &[f64], i: usize| segs[i].0.lerp(segs[i].1, t[i]);
    for _ in 0..4000 {
        for i in 0..m {
            let d = segs[i].1 - segs[i].0;
            let mut nb = Vec::new();
            if i > 0 {
                nb.push(at(&t, i - 1));
            }
            if i + 1 < m {
                nb.push(at(&t, i + 1));
            }
            if nb.is_empty() {
                continue;
            }
            // minimise Σ |p0 + s·d - q|² over s ∈ [0, 1]
            let target = nb.iter().fold(Point::default(), |acc, &q| acc + q) * (1.0 / nb.len() as f64);
            t[i] = ((target - segs[i].0).dot(d) / d.dot(d)).clamp(0.0, 1.0);
        }
    }
    (0..m.saturating_sub(1)).map(|i| at(&t, i).dist_sq(at(&t, i + 1))).sum()
}

fn brute_force(trails: &[Trail]) -> f64 {
    let sets: Vec<Vec<(Point, Point)>> = trails.iter().map(|t| t.segments().collect()).collect();
    let mut idx = vec![0usize; sets.len()];
    let mut best = f64::INFINITY;
    loop {
        let segs: Vec<(Point, Point)> = idx.iter().zip(&sets).map(|(&k, s)| s[k]).collect();
        best = best.min(fixed_choice_value(&segs));
        let mut j = 0;
        while j < idx.len() {
            idx[j] += 1;
            if idx[j] < sets[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == idx.len() {
            return best;
        }
    }
}

#[test]
fn two_squares_gap_of_two() {
    let trails = vec![square(0.0, 0.0, 1.0, 0), square(3.0, 0.0, 1.0, 1)];
    let prob = build_reduced_miqp(&one_route(2), &trails).unwrap();
    let sol = solve_miqp(&prob, None, &Budget::default());
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.objective - 4.0).abs() < 1e-9, "{}", sol.objective);
    assert!((sol.access_points[0].x - 1.0).abs() < 1e-9);
    assert!((sol.access_points[1].x - 3.0).abs() < 1e-9);
}

#[test]
fn single_trail_costs_nothing() {
    let trails = vec![square(0.0, 0.0, 1.0, 0)];
    let prob = build_reduced_miqp(&one_route(1), &trails).unwrap();
    let sol = solve_miqp(&prob, None, &Budget::default());
    assert_eq!(sol.objective, 0.0);
    assert_eq!(sol.binaries.iter().filter(|b| **b).count(), 1);
}

#[test]
fn empty_routes_rejected() {
    let trails = vec![square(0.0, 0.0, 1.0, 0)];
    let mut a = one_route(1);
    a.routes = vec![Vec::new()];
    assert!(build_reduced_miqp(&a, &trails).is_err());
}

#[test]
fn matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..12 {
        let n = 2 + case % 2;
        let trails: Vec<Trail> = (0..n).map(|i| random_polygon(&mut rng, 3 + (case + i) % 2, i)).collect();
        let prob = build_reduced_miqp(&one_route(n), &trails).unwrap();
        let sol = solve_miqp(&prob, None, &Budget::default());
        let oracle = brute_force(&trails);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(
            (sol.objective - oracle).abs() <= 1e-6 * (1.0 + oracle),
            "case {case}: b&b {} vs oracle {oracle}",
            sol.objective
        );
    }
}

#[test]
fn relaxation_bounds_completions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trails: Vec<Trail> = (0..3).map(|i| random_polygon(&mut rng, 4, i)).collect();
    let prob = build_reduced_miqp(&one_route(3), &trails).unwrap();
    let (root, _) = qp_relax(&prob, &vec![None; prob.num_binaries]).unwrap();
    let sol = solve_miqp(&prob, None, &Budget::default());
    assert!(root <= sol.objective + 1e-9);
    for _ in 0..50 {
        // random partial fixing; any completion consistent with it must cost at least the bound
        let mut fix = vec![None; prob.num_binaries];
        let mut pick = Vec::new();
        for d in &prob.disjunctions {
            let k = rng.random_range(0..d.binaries.len());
            pick.push(k);
            if rng.random_bool(0.5) {
                fix[d.binaries[k]] = Some(true);
            }
        }
        let (bound, _) = qp_relax(&prob, &fix).unwrap();
        let segs: Vec<(Point, Point)> = prob
            .disjunctions
            .iter()
            .zip(&pick)
            .map(|(d, &k)| (d.segments[k].p0, d.segments[k].p1))
            .collect();
        assert!(bound <= fixed_choice_value(&segs) + 1e-7, "{bound}");
    }
    let mut none = vec![None; prob.num_binaries];
    for &l in &prob.disjunctions[0].binaries {
        none[l] = Some(false);
    }
    assert_eq!(qp_relax(&prob, &none).unwrap().0, f64::INFINITY);
}

#[test]
fn solution_points_on_selected_segments() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let trails: Vec<Trail> = (0..4).map(|i| random_polygon(&mut rng, 5, i)).collect();
    let prob = build_reduced_miqp(&one_route(4), &trails).unwrap();
    let sol = solve_miqp(&prob, None, &Budget::default());
    for d in &prob.disjunctions {
        let on: Vec<usize> = (0..d.binaries.len()).filter(|&k| sol.binaries[d.binaries[k]]).collect();
        assert_eq!(on.len(), 1);
        let s = &d.segments[on[0]];
        let (q, _) = closest_point_on_segment(sol.access_points[d.var], s.p0, s.p1);
        assert!(q.dist(sol.access_points[d.var]) <= 1e-7);
        let h: Vec<bool> = d.binaries.iter().map(|&l| sol.binaries[l]).collect();
        assert!(prob.lifted_admits(d.var, &h, sol.access_points[d.var], 1e-7));
    }
}

#[test]
fn never_worse_than_incumbent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let trails: Vec<Trail> = (0..4).map(|i| random_polygon(&mut rng, 4, i)).collect();
    let prob = build_reduced_miqp(&one_route(4), &trails).unwrap();
    let inc: Vec<Point> = trails.iter().map(|t| t.ring[0]).collect();
    let tight = Budget {
        max_nodes: 1,
        time_limit: None,
    };
    for b in [tight, Budget::default()] {
        let sol = solve_miqp(&prob, Some(&inc), &b);
        assert!(sol.objective <= prob.objective(&inc) + 1e-12);
    }
}

#[test]
fn lifted_rows_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let trails: Vec<Trail> = (0..2).map(|i| random_polygon(&mut rng, 4, i)).collect();
    let prob = build_reduced_miqp(&one_route(2), &trails).unwrap();
    for _ in 0..400 {
        let d = &prob.disjunctions[rng.random_range(0..2)];
        let k = rng.random_range(0..d.segments.len());
        let s = &d.segments[k];
        let mut h = vec![false; d.segments.len()];
        h[k] = true;
        let on = s.p0.lerp(s.p1, rng.random_range(0.0..=1.0));
        assert!(prob.lifted_admits(d.var, &h, on, 1e-9));
        let off = Point::new(rng.random_range(-5.0..25.0), rng.random_range(-5.0..25.0));
        let (q, _) = closest_point_on_segment(off, s.p0, s.p1);
        assert_eq!(prob.lifted_admits(d.var, &h, off, 1e-9), q.dist(off) <= 1e-9);
        assert!(!prob.lifted_admits(d.var, &vec![false; d.segments.len()], on, 1e-9));
    }
}

#[test]
fn point_trails_are_fixed() {
    let a = Trail::from_ring(vec![Point::new(5.0, 0.5)], 0, 0).unwrap();
    let trails = vec![square(0.0, 0.0, 1.0, 0), a];
    let prob = build_reduced_miqp(&one_route(2), &trails).unwrap();
    let sol = solve_miqp(&prob, None, &Budget::default());
    assert!((sol.objective - 16.0).abs() < 1e-9);
    assert_eq!(sol.access_points[1], Point::new(5.0, 0.5));
}

#[test]
fn dump_lists_every_section() {
    let trails = vec![square(0.0, 0.0, 1.0, 0), square(3.0, 0.0, 1.0, 1)];
    let prob = build_reduced_miqp(&one_route(2), &trails).unwrap();
    let text = prob.dump();
    assert!(text.starts_with("covplan-miqp 1\nvars 2 binaries 8 lifted 28\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("seg ")).count(), 8);
    assert_eq!(text.lines().filter(|l| l.starts_with("term ")).count(), 1);
    // per trail: 2 sum rows, 7 per segment, 1 choice row
    assert_eq!(text.lines().filter(|l| l.starts_with("row ")).count(), 2 * (2 + 4 * 7 + 1));
}

#[test]
fn full_miqp_small_cases() {
    let trails = vec![square(0.0, 0.0, 1.0, 0), square(3.0, 0.0, 1.0, 1)];
    let b = Budget::default();
    let one = solve_full_miqp(&trails, 1, 2, 100.0, &b).unwrap();
    assert!((one.objective - 4.0).abs() < 1e-9);
    assert_eq!(one.status, SolveStatus::Optimal);
    assert_eq!(one.binary_count, 2 * (8 + 1));
    let two = solve_full_miqp(&trails, 2, 1, 100.0, &b).unwrap();
    assert_eq!(two.objective, 0.0);
    assert_eq!(two.routes.iter().filter(|r| r.len() == 1).count(), 2);
    // padded horizon changes nothing
    let padded = solve_full_miqp(&trails, 1, 4, 100.0, &b).unwrap();
    assert!((padded.objective - 4.0).abs() < 1e-9);
    assert!(solve_full_miqp(&trails, 1, 1, 100.0, &b).is_err());
    // battery forces the split
    let split = solve_full_miqp(&trails, 2, 2, 5.0, &b).unwrap();
    assert_eq!(split.objective, 0.0);
    assert!(matches!(solve_full_miqp(&trails, 1, 2, 5.0, &b), Err(Error::Infeasible { .. })));
}

#[test]
fn full_miqp_matches_reduced_on_fixed_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let trails: Vec<Trail> = (0..3).map(|i| random_polygon(&mut rng, 3, i)).collect();
    let full = solve_full_miqp(&trails, 1, 3, 1e6, &Budget::default()).unwrap();
    let prob = build_reduced_miqp(&one_route(3), &trails).unwrap();
    let mut a = one_route(3);
    a.routes = full.routes.clone();
    let reduced = solve_miqp(&build_reduced_miqp(&a, &trails).unwrap(), None, &Budget::default());
    assert!((full.objective - reduced.objective).abs() < 1e-9);
    assert!(full.objective <= solve_miqp(&prob, None, &Budget::default()).objective + 1e-9);
}
