//! Worked examples for each public operation.

use otuniq::decompose::{
    decompose, decompose_potential, extend_potential, restrict_full_mass, restrict_partial, ComponentDecomposition,
    DecompositionMethod, Partition,
};
use otuniq::duality::{c_transform, double_transform_residual, subdifferential_of, verify_duality, Direction};
use otuniq::solver::face::dual_face_oracle;
use otuniq::solver::solve;
use otuniq::solver::tight_graph::tight_graph_connectivity_oracle;
use otuniq::uniqueness::{
    ambiguity_witness, build_contact_links, certify, link_blocks, marginal_degeneracy_check, plan_degeneracy_check,
    propagate_offsets, AmbiguityOptions, ComponentFlowGraph, FlowEdge, MarginalDegeneracy, Verdict,
};
use otuniq::{CostSpec, DiscreteMeasure, PlanEntry, PotentialPair, Problem, Profile, TransportPlan};

fn line(points: &[f64]) -> Vec<Vec<f64>> {
    points.iter().map(|&x| vec![x]).collect()
}

fn centers(n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n).map(|k| vec![lo + (hi - lo) * (k as f64 + 0.5) / n as f64]).collect()
}

fn two_interval_points() -> Vec<Vec<f64>> {
    centers(20, 0.0, 1.0).into_iter().chain(centers(20, 2.0, 3.0)).collect()
}

fn matrix_problem(values: Vec<Vec<f64>>) -> Problem {
    let n = values.len();
    let m = values[0].len();
    let mu = DiscreteMeasure::uniform(line(&(0..n).map(|k| k as f64).collect::<Vec<_>>())).unwrap();
    let nu = DiscreteMeasure::uniform(line(&(0..m).map(|k| k as f64).collect::<Vec<_>>())).unwrap();
    Problem::new(mu, nu, CostSpec::ExplicitMatrix { values }).unwrap()
}

fn separated_clusters() -> Problem {
    let points = line(&[0.0, 0.5, 1.0, 3.0, 3.5, 4.0]);
    let mu = DiscreteMeasure::uniform(points.clone()).unwrap();
    let nu = DiscreteMeasure::uniform(points).unwrap();
    let profile = Profile::Tabulated { knots: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 1.0]] };
    Problem::new(mu, nu, CostSpec::ProfileOfDistance { profile }).unwrap()
}

fn cluster_decomposition(problem: &Problem, epsilon: f64) -> ComponentDecomposition {
    ComponentDecomposition::from_measures(problem.source(), problem.target(), DecompositionMethod::EpsilonGraph { epsilon })
        .unwrap()
}

// c-transform

#[test]
fn zero_function_transform_is_nearest_squared_distance() {
    let mu = DiscreteMeasure::uniform(line(&[0.0, 1.0, 2.5])).unwrap();
    let nu = DiscreteMeasure::uniform(line(&[0.4, 2.0])).unwrap();
    let p = Problem::new(mu, nu, CostSpec::squared_euclidean()).unwrap();
    let f = c_transform(&[0.0, 0.0], &p, Direction::ToSource).unwrap();
    let expected = [0.16, 0.36, 0.25];
    for (a, b) in f.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn transform_shifts_against_the_input() {
    let p = matrix_problem(vec![vec![0.0, 2.0], vec![3.0, 1.0]]);
    let base = c_transform(&[0.3, -0.2], &p, Direction::ToSource).unwrap();
    let shifted = c_transform(&[1.3, 0.8], &p, Direction::ToSource).unwrap();
    for (a, b) in base.iter().zip(&shifted) {
        assert!((a - 1.0 - b).abs() < 1e-12);
    }
}

#[test]
fn two_by_two_matrix_transform() {
    let p = matrix_problem(vec![vec![0.0, 2.0], vec![3.0, 1.0]]);
    assert_eq!(c_transform(&[0.0, 0.0], &p, Direction::ToSource).unwrap(), vec![0.0, 1.0]);
}

#[test]
fn double_transform_residual_of_a_transform_vanishes() {
    let p = matrix_problem(vec![vec![0.0, 2.0, 5.0], vec![3.0, 1.0, 0.5], vec![2.0, 2.0, 2.0]]);
    let f = c_transform(&[0.2, -0.4, 1.0], &p, Direction::ToSource).unwrap();
    assert!(double_transform_residual(&f, &p).unwrap() <= p.tight_tol());
}

#[test]
fn value_off_the_envelope_shows_up_only_at_that_point() {
    let p = matrix_problem(vec![vec![0.0, 2.0, 5.0], vec![3.0, 1.0, 0.5], vec![2.0, 2.0, 2.0]]);
    let mut f = c_transform(&[0.2, -0.4, 1.0], &p, Direction::ToSource).unwrap();
    f[1] -= 10.0;
    let g = c_transform(&f, &p, Direction::ToTarget).unwrap();
    let fcc = c_transform(&g, &p, Direction::ToSource).unwrap();
    assert!((fcc[0] - f[0]).abs() < 1e-12);
    assert!((fcc[2] - f[2]).abs() < 1e-12);
    assert!(fcc[1] - f[1] > 1.0);
    assert!((double_transform_residual(&f, &p).unwrap() - (fcc[1] - f[1])).abs() < 1e-12);
}

// Subdifferential and duality

#[test]
fn identity_problem_zero_pair_is_tight_on_the_diagonal() {
    let points = line(&[0.0, 1.0, 3.0]);
    let p = Problem::new(
        DiscreteMeasure::uniform(points.clone()).unwrap(),
        DiscreteMeasure::uniform(points).unwrap(),
        CostSpec::lp(2.0, 1.0),
    )
    .unwrap();
    let sub = subdifferential_of(&PotentialPair { f: vec![0.0; 3], g: vec![0.0; 3] }, &p).unwrap();
    for i in 0..3 {
        assert!(sub.contains(i, i));
    }
    assert!(!sub.contains(0, 2));
}

#[test]
fn tight_set_matches_brute_force_scan() {
    let p = matrix_problem(vec![vec![1.0, 4.0, 2.5], vec![0.5, 2.0, 3.0], vec![2.0, 1.0, 0.0]]);
    let r = solve(&p).unwrap();
    let sub = subdifferential_of(&r.pair, &p).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let slack = p.cost(i, j) - r.pair.f[i] - r.pair.g[j];
            assert_eq!(sub.contains(i, j), slack.abs() <= p.tight_tol(), "({i},{j})");
        }
    }
    assert!(r.plan.entries().iter().all(|e| sub.contains(e.i, e.j)));
}

#[test]
fn perturbed_pair_loses_optimality() {
    let p = matrix_problem(vec![vec![1.0, 4.0, 2.5], vec![0.5, 2.0, 3.0], vec![2.0, 1.0, 0.0]]);
    let r = solve(&p).unwrap();
    assert!(verify_duality(&r.plan, &r.pair, &p).unwrap().optimal);
    let mut pair = r.pair.clone();
    pair.f[1] += 0.1;
    let report = verify_duality(&r.plan, &pair, &p).unwrap();
    assert!(!report.feasible || report.gap > p.tolerances().gap_abs(report.primal_cost));
    assert!(!report.optimal);
}

// Solver

#[test]
fn single_point_identity_costs_nothing() {
    let mu = DiscreteMeasure::uniform(vec![vec![1.0, 2.0]]).unwrap();
    let p = Problem::new(mu.clone(), mu, CostSpec::squared_euclidean()).unwrap();
    let r = solve(&p).unwrap();
    assert_eq!(r.cost, 0.0);
    assert_eq!(r.pair.f, vec![0.0]);
    assert_eq!(r.pair.g, vec![0.0]);
}

#[test]
fn two_by_two_matrix_plan_is_diagonal() {
    let p = matrix_problem(vec![vec![0.0, 2.0], vec![3.0, 1.0]]);
    let r = solve(&p).unwrap();
    assert!((r.cost - 0.5).abs() < 1e-12);
    assert!((r.plan.mass(0, 0) - 0.5).abs() < 1e-12);
    assert!((r.plan.mass(1, 1) - 0.5).abs() < 1e-12);
    assert_eq!(r.plan.entries().len(), 2);
}

#[test]
fn metric_cost_identity_coupling_on_two_intervals() {
    let points = two_interval_points();
    let mu = DiscreteMeasure::uniform(points.clone()).unwrap();
    let p = Problem::new(mu.clone(), mu, CostSpec::lp(2.0, 1.0)).unwrap();
    let r = solve(&p).unwrap();
    assert!(r.cost.abs() < 1e-12);
    for i in 0..40 {
        assert!((r.plan.mass(i, i) - 1.0 / 40.0).abs() < 1e-12);
    }
}

// Oracles

#[test]
fn unequal_interval_masses_have_a_point_face() {
    let mu = DiscreteMeasure::new(line(&[0.0, 0.5, 1.0, 2.0, 2.5]), vec![0.4 / 3.0, 0.4 / 3.0, 0.4 / 3.0, 0.3, 0.3])
        .unwrap();
    let nu = DiscreteMeasure::uniform(line(&[0.0, 0.5, 2.0, 2.5])).unwrap();
    let p = Problem::new(mu, nu, CostSpec::squared_euclidean()).unwrap();
    let cert = certify(&p, &cluster_decomposition(&p, 0.6)).unwrap();
    assert_eq!(cert.verdict, Verdict::Unique);
    let face = dual_face_oracle(&p, &cert.pair).unwrap();
    assert!(face.max_spread <= face.threshold);
}

#[test]
fn separated_clusters_spread_twice_the_gap() {
    let p = separated_clusters();
    let r = solve(&p).unwrap();
    let face = dual_face_oracle(&p, &r.pair).unwrap();
    for k in 3..6 {
        let (lo, hi) = face.intervals[k].unwrap();
        assert!((hi - lo - 2.0).abs() <= face.threshold, "{lo} {hi}");
    }
    let tight = tight_graph_connectivity_oracle(&p, &r.pair);
    assert_eq!(tight.components.len(), 2);
    assert!(!tight.unique);
}

#[test]
fn single_target_has_zero_spread() {
    let mu = DiscreteMeasure::uniform(line(&[0.0, 1.0, 4.0])).unwrap();
    let nu = DiscreteMeasure::new(line(&[2.0]), vec![1.0]).unwrap();
    let p = Problem::new(mu, nu, CostSpec::squared_euclidean()).unwrap();
    let r = solve(&p).unwrap();
    let face = dual_face_oracle(&p, &r.pair).unwrap();
    assert!(face.max_spread <= face.threshold);
    assert!(tight_graph_connectivity_oracle(&p, &r.pair).unique);
}

#[test]
fn single_source_is_a_connected_star() {
    let mu = DiscreteMeasure::new(line(&[0.0]), vec![1.0]).unwrap();
    let nu = DiscreteMeasure::uniform(line(&[1.0, 2.0, 3.0, 7.0])).unwrap();
    let p = Problem::new(mu, nu, CostSpec::squared_euclidean()).unwrap();
    let r = solve(&p).unwrap();
    let tight = tight_graph_connectivity_oracle(&p, &r.pair);
    assert!(tight.unique);
    assert_eq!(tight.usable_edges.len(), 4);
}

// Decomposition

#[test]
fn epsilon_chain_hops() {
    let mu = DiscreteMeasure::uniform(line(&[0.1, 0.5, 2.2, 2.9])).unwrap();
    let part = decompose(&mu, DecompositionMethod::EpsilonGraph { epsilon: 0.8 }).unwrap();
    assert_eq!(part.groups, vec![vec![0, 1], vec![2, 3]]);
}

#[test]
fn shared_label_gives_one_component() {
    let mu = DiscreteMeasure::uniform(line(&[0.0, 5.0, 9.0])).unwrap().with_labels(vec![0, 0, 0]).unwrap();
    let part = decompose(&mu, DecompositionMethod::ExplicitLabels).unwrap();
    assert_eq!(part.groups, vec![vec![0, 1, 2]]);
}

#[test]
fn two_interval_discretization_has_two_components() {
    let mu = DiscreteMeasure::uniform(two_interval_points()).unwrap();
    let part = decompose(&mu, DecompositionMethod::EpsilonGraph { epsilon: 0.2 }).unwrap();
    assert_eq!(part.len(), 2);
    assert_eq!(part.groups[0].len(), 20);
}

// Restriction

fn three_clusters() -> Problem {
    let mu = DiscreteMeasure::new(
        line(&[0.0, 0.3, 5.0, 5.4, 10.0, 10.2]),
        vec![0.1, 0.15, 0.2, 0.2, 0.05, 0.3],
    )
    .unwrap();
    let nu = DiscreteMeasure::new(line(&[0.1, 0.2, 5.1, 5.3, 10.1]), vec![0.15, 0.1, 0.25, 0.15, 0.35]).unwrap();
    Problem::new(mu, nu, CostSpec::squared_euclidean()).unwrap()
}

#[test]
fn full_restriction_reproduces_the_problem() {
    let p = three_clusters();
    let r = solve(&p).unwrap();
    let all: Vec<usize> = (0..p.n()).collect();
    let restricted = restrict_partial(&p, &r.plan, &all).unwrap();
    assert_eq!(restricted.sources, all);
    assert_eq!(restricted.targets, (0..p.m()).collect::<Vec<_>>());
    for j in 0..p.m() {
        assert!((restricted.problem.target().weight(j) - p.target().weight(j)).abs() < 1e-12);
    }
}

#[test]
fn restricted_mass_equals_component_mass() {
    let p = three_clusters();
    let r = solve(&p).unwrap();
    let restricted = restrict_partial(&p, &r.plan, &[2, 3]).unwrap();
    assert!((restricted.mass - 0.4).abs() < 1e-12);
}

#[test]
fn restricted_pairs_are_optimal_per_component() {
    let p = three_clusters();
    let r = solve(&p).unwrap();
    let d = cluster_decomposition(&p, 1.0);
    let pot = decompose_potential(&r.pair, &d, &p, &r.plan).unwrap();
    assert_eq!(pot.components.len(), 3);
    for c in &pot.components {
        assert!(c.duality.optimal, "component {}", c.component);
    }
}

#[test]
fn single_component_potential_is_the_original() {
    let p = three_clusters();
    let r = solve(&p).unwrap();
    let d = ComponentDecomposition::new(Partition::from_groups(vec![(0..p.n()).collect()], p.n()), Partition::singletons(p.m()));
    let pot = decompose_potential(&r.pair, &d, &p, &r.plan).unwrap();
    assert_eq!(pot.components[0].f, r.pair.f);
}

#[test]
fn full_mass_restriction_without_zero_points_is_identity() {
    let p = three_clusters();
    let restricted = restrict_full_mass(&p, &(0..p.n()).collect::<Vec<_>>(), &(0..p.m()).collect::<Vec<_>>()).unwrap();
    assert_eq!(restricted.problem.n(), p.n());
    assert_eq!(restricted.problem.source().weights(), p.source().weights());
}

#[test]
fn zero_weight_padding_keeps_the_verdict() {
    let base = three_clusters();
    let mut points = base.source().points().to_vec();
    let mut weights = base.source().weights().to_vec();
    points.push(vec![20.0]);
    weights.push(0.0);
    let padded = Problem::new(
        DiscreteMeasure::new(points, weights).unwrap(),
        base.target().clone(),
        CostSpec::squared_euclidean(),
    )
    .unwrap();
    let a = certify(&base, &ComponentDecomposition::singletons(base.n(), base.m())).unwrap();
    let b = certify(&padded, &ComponentDecomposition::singletons(padded.n(), padded.m())).unwrap();
    assert_eq!(a.verdict, b.verdict);
    let kept = restrict_full_mass(&padded, &(0..base.n()).collect::<Vec<_>>(), &(0..base.m()).collect::<Vec<_>>())
        .unwrap();
    let sub = solve(&kept.problem).unwrap();
    let extended = extend_potential(&kept, &sub.pair, &padded);
    for i in 0..base.n() {
        if base.source().weight(i) > 0.0 {
            assert!((extended.f[i] - sub.pair.f[i]).abs() <= padded.tight_tol(), "point {i}");
        }
    }
}

// Degeneracy

#[test]
fn equal_halves_collide() {
    let m = marginal_degeneracy_check(&[0.5, 0.5], &[0.5, 0.5], 1e-9).unwrap();
    assert!(matches!(m, MarginalDegeneracy::Colliding { .. }));
}

#[test]
fn unequal_halves_do_not_collide() {
    let m = marginal_degeneracy_check(&[0.4, 0.6], &[0.5, 0.5], 1e-9).unwrap();
    assert!(matches!(m, MarginalDegeneracy::Nondegenerate { .. }));
}

#[test]
fn single_components_never_collide() {
    let m = marginal_degeneracy_check(&[1.0], &[1.0], 1e-9).unwrap();
    assert!(matches!(m, MarginalDegeneracy::Nondegenerate { .. }));
}

fn flow(source_mass: Vec<f64>, target_mass: Vec<f64>, edges: &[(usize, usize, f64)]) -> ComponentFlowGraph {
    ComponentFlowGraph {
        source_mass,
        target_mass,
        edges: edges.iter().map(|&(source, target, mass)| FlowEdge { source, target, mass }).collect(),
    }
}

#[test]
fn isolated_cluster_pairs_are_degenerate() {
    let g = flow(vec![0.5, 0.5], vec![0.5, 0.5], &[(0, 0, 0.5), (1, 1, 0.5)]);
    assert!(plan_degeneracy_check(&g).is_degenerate());
}

#[test]
fn chain_is_nondegenerate() {
    let g = flow(vec![0.5, 0.5], vec![0.3, 0.7], &[(0, 0, 0.3), (0, 1, 0.2), (1, 1, 0.5)]);
    assert!(!plan_degeneracy_check(&g).is_degenerate());
}

#[test]
fn one_source_component_is_nondegenerate() {
    let g = flow(vec![1.0], vec![0.2, 0.3, 0.5], &[(0, 0, 0.2), (0, 1, 0.3), (0, 2, 0.5)]);
    assert!(!plan_degeneracy_check(&g).is_degenerate());
}

// Links and offsets

fn semi_discrete(b: f64) -> Problem {
    let mu = DiscreteMeasure::uniform(line(&[0.1, 0.35, 0.6, 0.9])).unwrap();
    let nu = DiscreteMeasure::new(line(&[0.0, 1.0]), vec![b, 1.0 - b]).unwrap();
    Problem::new(mu, nu, CostSpec::squared_euclidean()).unwrap()
}

#[test]
fn shared_target_creates_a_link() {
    let p = semi_discrete(0.3);
    let r = solve(&p).unwrap();
    let links = build_contact_links(&p, &r.plan, &ComponentDecomposition::singletons(4, 2));
    assert!(links.iter().any(|l| (l.first, l.second) == (0, 1) || (l.first, l.second) == (1, 2)));
}

#[test]
fn diagonal_plan_has_no_links() {
    let p = matrix_problem(vec![vec![0.0, 2.0], vec![3.0, 1.0]]);
    let r = solve(&p).unwrap();
    assert!(build_contact_links(&p, &r.plan, &ComponentDecomposition::singletons(2, 2)).is_empty());
}

#[test]
fn semi_discrete_links_connect_off_quarter_masses() {
    for k in 1..20 {
        let b = k as f64 / 20.0;
        let p = semi_discrete(b);
        let r = solve(&p).unwrap();
        let links = build_contact_links(&p, &r.plan, &ComponentDecomposition::singletons(4, 2));
        let blocks = link_blocks(&links, &[true; 4]);
        let quarter = k % 5 == 0;
        assert_eq!(blocks.len() == 1, !quarter, "b = {b}");
    }
}

#[test]
fn single_component_offset_is_zero() {
    let p = semi_discrete(0.3);
    let pots = vec![Some(vec![0.0, 0.0, 0.0, 0.0])];
    let prop = propagate_offsets(&p, &[], &pots, &[true]).unwrap();
    assert_eq!(prop.offsets, vec![Some(0.0)]);
}

#[test]
fn shared_contact_offset_is_a_cost_difference() {
    let p = semi_discrete(0.3);
    let plan = TransportPlan::from_entries(
        4,
        2,
        [
            PlanEntry { i: 0, j: 0, mass: 0.25 },
            PlanEntry { i: 1, j: 0, mass: 0.05 },
            PlanEntry { i: 1, j: 1, mass: 0.2 },
            PlanEntry { i: 2, j: 1, mass: 0.25 },
            PlanEntry { i: 3, j: 1, mass: 0.25 },
        ],
        0.0,
    );
    let d = ComponentDecomposition::singletons(4, 2);
    let links = build_contact_links(&p, &plan, &d);
    let pots: Vec<Option<Vec<f64>>> = (0..4).map(|_| Some(vec![0.0; 4])).collect();
    let prop = propagate_offsets(&p, &links, &pots, &[true; 4]).unwrap();
    let a = prop.offsets.iter().map(|o| o.unwrap()).collect::<Vec<_>>();
    assert!(((a[0] - a[1]) - (p.cost(0, 0) - p.cost(1, 0))).abs() < 1e-12);
    assert!(((a[1] - a[2]) - (p.cost(1, 1) - p.cost(2, 1))).abs() < 1e-12);
}

#[test]
fn glued_potential_matches_the_solver() {
    let p = three_clusters();
    let cert = certify(&p, &cluster_decomposition(&p, 1.0)).unwrap();
    if cert.verdict == Verdict::Unique {
        assert!(cert.glue_deviation.unwrap() <= p.tight_tol());
    }
    let p = semi_discrete(0.3);
    let cert = certify(&p, &ComponentDecomposition::singletons(4, 2)).unwrap();
    assert_eq!(cert.verdict, Verdict::Unique);
    assert!(cert.glue_deviation.unwrap() <= p.tight_tol());
}

// Certificates and witnesses

#[test]
fn symmetric_two_intervals_are_non_unique() {
    let points = two_interval_points();
    let mu = DiscreteMeasure::uniform(points.clone()).unwrap();
    let p = Problem::new(mu.clone(), mu, CostSpec::squared_euclidean()).unwrap();
    let d = cluster_decomposition(&p, 0.2).assert_sources_connected().assert_targets_connected();
    let cert = certify(&p, &d).unwrap();
    assert_eq!(cert.verdict, Verdict::NonUnique);
    assert_eq!(cert.freedom_dim, 1);
    let w = cert.witness.unwrap();
    assert!(w.first_report.optimal && w.second_report.optimal);
    assert!(cert.assumptions.iter().all(|a| a.treatment.starts_with("finite-scale analogue") || a.treatment.starts_with("not used")));
}

#[test]
fn asymmetric_two_intervals_are_unique() {
    let points = two_interval_points();
    let weights: Vec<f64> = (0..40).map(|k| if k < 20 { 0.02 } else { 0.03 }).collect();
    let mu = DiscreteMeasure::new(points.clone(), weights).unwrap();
    let nu = DiscreteMeasure::uniform(points).unwrap();
    let p = Problem::new(mu, nu, CostSpec::squared_euclidean()).unwrap();
    let d = cluster_decomposition(&p, 0.2).assert_sources_connected().assert_targets_connected();
    assert_eq!(certify(&p, &d).unwrap().verdict, Verdict::Unique);
}

#[test]
fn semi_discrete_verdicts() {
    let d = ComponentDecomposition::singletons(4, 2);
    assert_eq!(certify(&semi_discrete(0.3), &d).unwrap().verdict, Verdict::Unique);
    assert_eq!(certify(&semi_discrete(0.5), &d).unwrap().verdict, Verdict::NonUnique);
}

#[test]
fn witness_family_contains_zero_and_the_boundary() {
    let p = separated_clusters();
    let d = cluster_decomposition(&p, 0.6);
    let w = ambiguity_witness(&p, &d, &AmbiguityOptions { samples: 25, seed: None, oracle: true }).unwrap();
    assert_eq!(w.delta, 1.0);
    let zero = w.samples.iter().find(|s| s.a == 0.0 && s.b == 0.0).expect("zero sample");
    assert!(zero.pair.f.iter().all(|&v| v == 0.0));
    assert!(zero.report.optimal);
    let edge = w.samples.iter().find(|s| s.a == 0.0 && (s.b - 1.0).abs() < 1e-12).expect("boundary sample");
    assert!(edge.report.optimal);
    assert!(w.all_verified);
    assert_eq!(w.matches_two_delta, Some(true));
}

