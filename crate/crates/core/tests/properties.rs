//! Property tests against independent brute-force oracles.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use otuniq::decompose::{decompose, ComponentDecomposition, DecompositionMethod};
use otuniq::duality::{c_transform, verify_duality, Direction};
use otuniq::regularity::{asymptotic_region, dominated_region, regular_grid};
use otuniq::solver::exact::solve_exact;
use otuniq::solver::face::dual_face_oracle;
use otuniq::solver::solve;
use otuniq::solver::tight_graph::tight_graph_connectivity_oracle;
use otuniq::uniqueness::{certify, Verdict};
use otuniq::{ClosedFormCost, CostSpec, DiscreteMeasure, Problem};
use proptest::prelude::*;

/// Weights as positive integer units summing to `total`.
fn units(len: usize, total: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(1u32..=4, len).prop_map(move |raw| {
        // Rescale into exact units by largest remainder.
        let sum: u32 = raw.iter().sum();
        let mut out: Vec<u32> = raw.iter().map(|&r| (r * total / sum).max(1)).collect();
        let mut s: i64 = out.iter().map(|&v| v as i64).sum();
        let mut k = 0;
        while s != total as i64 {
            let idx = k % out.len();
            if s < total as i64 {
                out[idx] += 1;
                s += 1;
            } else if out[idx] > 1 {
                out[idx] -= 1;
                s -= 1;
            }
            k += 1;
        }
        out
    })
}

fn matrix(n: usize, m: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec(prop::collection::vec(0u32..20, m), n)
}

fn problem_from(cost: &[Vec<u32>], su: &[u32], tu: &[u32], total: u32) -> Problem {
    let line = |k: usize| (0..k).map(|i| vec![i as f64]).collect::<Vec<_>>();
    let mu = DiscreteMeasure::new(line(su.len()), su.iter().map(|&u| u as f64 / total as f64).collect()).unwrap();
    let nu = DiscreteMeasure::new(line(tu.len()), tu.iter().map(|&u| u as f64 / total as f64).collect()).unwrap();
    let values = cost.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    Problem::new(mu, nu, CostSpec::ExplicitMatrix { values }).unwrap()
}

/// Minimum cost over all vertices of the transportation polytope, by peeling
/// leaves of every candidate spanning set of `n + m - 1` cells.
fn brute_force_optimum(cost: &[Vec<u32>], su: &[u32], tu: &[u32]) -> i64 {
    let (n, m) = (su.len(), tu.len());
    let cells = n * m;
    let k = n + m - 1;
    let mut best = i64::MAX;
    for mask in 0u32..(1 << cells) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut s: Vec<i64> = su.iter().map(|&v| v as i64).collect();
        let mut d: Vec<i64> = tu.iter().map(|&v| v as i64).collect();
        let mut left: Vec<usize> = (0..cells).filter(|&c| mask & (1 << c) != 0).collect();
        let mut flow = vec![0i64; cells];
        let mut ok = true;
        while !left.is_empty() {
            let pos = left.iter().position(|&c| {
                let (i, j) = (c / m, c % m);
                left.iter().filter(|&&o| o / m == i).count() == 1 || left.iter().filter(|&&o| o % m == j).count() == 1
            });
            let Some(pos) = pos else {
                ok = false;
                break;
            };
            let c = left.remove(pos);
            let (i, j) = (c / m, c % m);
            let row_leaf = left.iter().all(|&o| o / m != i);
            let x = if row_leaf { s[i] } else { d[j] };
            if x < 0 {
                ok = false;
                break;
            }
            flow[c] = x;
            s[i] -= x;
            d[j] -= x;
        }
        if ok && s.iter().all(|&v| v == 0) && d.iter().all(|&v| v == 0) {
            let total: i64 = (0..cells).map(|c| flow[c] * cost[c / m][c % m] as i64).sum();
            best = best.min(total);
        }
    }
    best
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=4, 1usize..=4).prop_filter("at most 12 cells", |(n, m)| n * m <= 12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn simplex_matches_vertex_enumeration(
        (n, m, cost, su, tu) in shape().prop_flat_map(|(n, m)| (Just(n), Just(m), matrix(n, m), units(n, 12), units(m, 12)))
    ) {
        let p = problem_from(&cost, &su, &tu, 12);
        let r = solve(&p).unwrap();
        let best = brute_force_optimum(&cost, &su, &tu) as f64 / 12.0;
        prop_assert!((r.cost - best).abs() <= 1e-9 * (1.0 + best), "{} vs {}", r.cost, best);
        let report = verify_duality(&r.plan, &r.pair, &p).unwrap();
        prop_assert!(report.optimal);
        prop_assert_eq!(r.pair.f[r.anchor], 0.0);
        let _ = (n, m);
    }

    #[test]
    fn exact_solver_agrees_with_floating_point(
        (cost, su, tu) in shape().prop_flat_map(|(n, m)| (matrix(n, m), units(n, 12), units(m, 12)))
    ) {
        let q = |v: u32, d: u32| BigRational::new(BigInt::from(v), BigInt::from(d));
        let supply: Vec<BigRational> = su.iter().map(|&v| q(v, 12)).collect();
        let demand: Vec<BigRational> = tu.iter().map(|&v| q(v, 12)).collect();
        let c: Vec<Vec<BigRational>> = cost.iter().map(|r| r.iter().map(|&v| q(v, 1)).collect()).collect();
        let exact = solve_exact(&supply, &demand, &c, 100_000).unwrap();
        let best = brute_force_optimum(&cost, &su, &tu);
        prop_assert_eq!(exact.cost.clone(), q(best as u32, 12));
        let p = problem_from(&cost, &su, &tu, 12);
        let r = solve(&p).unwrap();
        prop_assert!((r.cost - exact.cost.to_f64().unwrap()).abs() <= 1e-12 * (1.0 + r.cost));
    }

    #[test]
    fn c_transform_calculus(
        (cost, f, bump, k) in (1usize..=6, 1usize..=6).prop_flat_map(|(n, m)| (
            matrix(n, m),
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(0.0f64..3.0, n),
            -5.0f64..5.0,
        ))
    ) {
        let n = cost.len();
        let m = cost[0].len();
        let mu = DiscreteMeasure::uniform((0..n).map(|i| vec![i as f64]).collect()).unwrap();
        let nu = DiscreteMeasure::uniform((0..m).map(|j| vec![j as f64]).collect()).unwrap();
        let values = cost.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let p = Problem::new(mu, nu, CostSpec::ExplicitMatrix { values }).unwrap();
        let fc = c_transform(&f, &p, Direction::ToTarget).unwrap();
        for i in 0..n {
            for j in 0..m {
                prop_assert!(f[i] + fc[j] <= p.cost(i, j) + 1e-12);
            }
        }
        let fcc = c_transform(&fc, &p, Direction::ToSource).unwrap();
        for i in 0..n {
            prop_assert!(fcc[i] >= f[i] - 1e-12);
        }
        let fccc = c_transform(&fcc, &p, Direction::ToTarget).unwrap();
        for j in 0..m {
            prop_assert!((fccc[j] - fc[j]).abs() <= p.tight_tol());
        }
        let raised: Vec<f64> = f.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let rc = c_transform(&raised, &p, Direction::ToTarget).unwrap();
        for j in 0..m {
            prop_assert!(rc[j] <= fc[j]);
        }
        let shifted: Vec<f64> = f.iter().map(|v| v + k).collect();
        let sc = c_transform(&shifted, &p, Direction::ToTarget).unwrap();
        for j in 0..m {
            prop_assert!((sc[j] - (fc[j] - k)).abs() <= 16.0 * f64::EPSILON * (1.0 + fc[j].abs() + k.abs()));
        }
    }

    #[test]
    fn epsilon_partitions_coarsen(
        points in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 1..20),
        small in 0.05f64..1.0,
        factor in 1.0f64..4.0,
    ) {
        let mu = match DiscreteMeasure::uniform(points) {
            Ok(mu) => mu,
            Err(_) => return Ok(()),
        };
        let fine = decompose(&mu, DecompositionMethod::EpsilonGraph { epsilon: small }).unwrap();
        let coarse = decompose(&mu, DecompositionMethod::EpsilonGraph { epsilon: small * factor }).unwrap();
        prop_assert!(coarse.len() <= fine.len());
        for g in &fine.groups {
            let c = coarse.membership[g[0]];
            prop_assert!(g.iter().all(|&i| coarse.membership[i] == c));
        }
        let covered: usize = fine.groups.iter().map(|g| g.len()).sum();
        prop_assert_eq!(covered, mu.len());
    }

    #[test]
    fn certificate_agrees_with_both_oracles(
        (cost, su, tu) in (1usize..=5, 1usize..=5).prop_flat_map(|(n, m)| (matrix(n, m), units(n, 8), units(m, 8)))
    ) {
        let p = problem_from(&cost, &su, &tu, 8);
        let cert = certify(&p, &ComponentDecomposition::singletons(p.n(), p.m())).unwrap();
        prop_assert_ne!(cert.verdict, Verdict::Inconclusive);
        let face = dual_face_oracle(&p, &cert.pair).unwrap();
        let tight = tight_graph_connectivity_oracle(&p, &cert.pair);
        let unique = cert.verdict == Verdict::Unique;
        prop_assert_eq!(unique, face.unique, "face spread {}", face.max_spread);
        prop_assert_eq!(unique, tight.unique);
        if let Some(w) = &cert.witness {
            prop_assert!(w.first_report.optimal && w.second_report.optimal);
        }
        prop_assert_eq!(cert.verdict == Verdict::NonUnique, cert.freedom_dim > 0);
    }

    #[test]
    fn dominated_region_is_the_pointwise_inequality(
        x in prop::collection::vec(-2.0f64..2.0, 2),
        y in prop::collection::vec(-2.0f64..2.0, 2),
        q in prop::sample::select(vec![1.0, 2.0, 3.0]),
        pw in prop::sample::select(vec![1.0, 2.0, 3.0]),
    ) {
        let cost = ClosedFormCost::LpNormPower { q, p: pw };
        let grid = regular_grid(&[-3.0, -3.0], &[3.0, 3.0], &[13, 13]);
        let region = dominated_region(&x, &y, &cost, &grid);
        let level = cost.eval(&x, &y);
        for (pt, &member) in grid.iter().zip(&region.members) {
            prop_assert_eq!(member, cost.eval(pt, &y) <= level);
        }
    }

    #[test]
    fn squared_euclidean_limit_sits_in_the_closed_half_space(
        x in prop::collection::vec(-1.0f64..1.0, 2),
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let u = [angle.cos(), angle.sin()];
        let cost = ClosedFormCost::LpNormPower { q: 2.0, p: 2.0 };
        let grid = regular_grid(&[x[0] - 1.0, x[1] - 1.0], &[x[0] + 1.0, x[1] + 1.0], &[21, 21]);
        let radii: Vec<f64> = (0..=12).map(|k| 10f64.powf(k as f64 / 2.0)).collect();
        let region = asymptotic_region(&x, &u, &cost, &radii, &grid).unwrap();
        for (pt, member) in grid.iter().zip(region.limit_members()) {
            let s = (pt[0] - x[0]) * u[0] + (pt[1] - x[1]) * u[1];
            if s > 0.05 {
                prop_assert!(member);
            }
            if member {
                prop_assert!(s >= 0.0);
            }
        }
    }
}
