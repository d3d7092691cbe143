mod common;

use common::{arb_graph, arb_strongly_connected, build, r};
use ocm_core::alt::{lawler_iteration_bound, lawler_solve, tree_solve};
use ocm_core::howard::howard_solve;
use ocm_core::howard_par::howard_par_solve;
use ocm_core::oracle::dp_min_cycle_mean;
use ocm_core::scc::{solve_decomposed, RegionSolver, SccAlgorithm};
use ocm_core::{solve, Algorithm, Engine, Graph, Objective, Rational, SccMode, SolveOptions};
use proptest::prelude::*;

fn eps() -> Rational {
    Rational::new(1, 1_000_000_000)
}

#[test]
fn float_and_exact_agree() {
    let g = build(
        4,
        vec![(0, 1, 3), (1, 2, -2), (2, 0, 4), (2, 3, 1), (3, 1, 2)],
    );
    let exact = howard_solve(&g).unwrap().mu_star;
    let gf: Graph<f64> = g.map_weights(|w| *w.numer() as f64 / *w.denom() as f64);
    let float = howard_solve(&gf).unwrap().mu_star;
    // Cycles {0, 1, 2} and {1, 2, 3} have means 5/3 and 1/3.
    assert!((float - 1.0 / 3.0).abs() < 1e-9);
    assert_eq!(exact, Rational::new(1, 3));
    let g32: Graph<f32> = gf.map_weights(|w| w as f32);
    assert!((howard_solve(&g32).unwrap().mu_star - 1.0 / 3.0).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn strongly_connected_solvers_match_oracle(g in arb_strongly_connected(10, 20)) {
        let oracle = dp_min_cycle_mean(&g).unwrap().unwrap();
        let seq = howard_solve(&g).unwrap();
        prop_assert_eq!(seq.mu_star, oracle);
        prop_assert!(seq.critical.is_valid_in(&g));
        prop_assert_eq!(seq.critical.record.mean, oracle);
        for engine in [Engine::sequential(), Engine::parallel(2).unwrap(), Engine::shuffled(5)] {
            let par = howard_par_solve(&g, &engine).unwrap();
            prop_assert_eq!(par.mu_star, Some(oracle));
        }
        let tree = tree_solve(&g).unwrap().unwrap();
        prop_assert_eq!(tree.mu_star, oracle);
        prop_assert_eq!(tree.cycle.reduced_weight(oracle), r(0));
    }

    #[test]
    fn any_graph_solvers_match_oracle(g in arb_graph(10, 25)) {
        let oracle = dp_min_cycle_mean(&g).unwrap();
        let e = Engine::sequential();
        for solver in [RegionSolver::Sequential, RegionSolver::Parallel] {
            for scc in [SccAlgorithm::Tarjan, SccAlgorithm::Parallel] {
                prop_assert_eq!(solve_decomposed(&g, scc, solver, &e).unwrap().mu_star, oracle);
            }
        }
        prop_assert_eq!(tree_solve(&g).unwrap().map(|t| t.mu_star), oracle);
        let off = solve(&g, &SolveOptions { scc: SccMode::Off, ..SolveOptions::new(Algorithm::Howard, eps()) }, &e);
        prop_assert_eq!(off.unwrap().mu_star, oracle);
    }

    #[test]
    fn lawler_brackets_and_respects_bound(g in arb_graph(8, 20)) {
        let oracle = dp_min_cycle_mean(&g).unwrap();
        match (lawler_solve(&g, eps()).unwrap(), oracle) {
            (None, None) => {}
            (Some(res), Some(mu)) => {
                prop_assert!(res.lower <= mu && mu <= res.upper);
                prop_assert!(res.upper - res.lower < eps());
                // Distinct cycle means differ by at least 1/n^2 > epsilon.
                prop_assert_eq!(res.upper, mu);
                let w_min = g.min_weight().unwrap().to_integer() as f64;
                let w_max = g.max_weight().unwrap().to_integer() as f64;
                prop_assert!(res.iterations <= lawler_iteration_bound(w_min, w_max, 1e-9));
            }
            (l, o) => prop_assert!(false, "lawler {:?} vs oracle {:?}", l.map(|x| x.upper), o),
        }
    }

    #[test]
    fn max_objective_is_negated_min(g in arb_graph(8, 20)) {
        let e = Engine::sequential();
        let base = SolveOptions::new(Algorithm::Howard, eps());
        let max = solve(&g, &SolveOptions { objective: Objective::Maximize, ..base }, &e).unwrap().mu_star;
        let neg_min = solve(&g.negate_weights(), &base, &e).unwrap().mu_star.map(|m| -m);
        prop_assert_eq!(max, neg_min);
    }

    #[test]
    fn shift_and_scale_covariance(g in arb_graph(8, 20), c in -5i64..=5, k in 1i64..=4) {
        let mu = howard_like(&g);
        let shifted = howard_like(&g.map_weights(|w| w + r(c)));
        let scaled = howard_like(&g.map_weights(|w| w * r(k)));
        prop_assert_eq!(shifted, mu.map(|m| m + r(c)));
        prop_assert_eq!(scaled, mu.map(|m| m * r(k)));
    }
}

fn howard_like(g: &Graph<Rational>) -> Option<Rational> {
    solve(
        g,
        &SolveOptions::new(Algorithm::Howard, eps()),
        &Engine::sequential(),
    )
    .unwrap()
    .mu_star
}
