//! Randomized small instances: every incumbent must survive the independent
//! worst-case row check and a scenario simulation.

mod common;

use common::random_instance;
use ddro::milp::SolveStatus;
use ddro::policy::RecourseMode;
use ddro::reformulation::ReformulationConfig;
use ddro::studies::{run, RunConfig};
use ddro::verify::{worst_simulated_cost, GridOptions, CERT_TOL};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_incumbents_are_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut solved = 0;
    for id in 0..50 {
        let p = random_instance(&mut rng, id);
        assert!(ddro::problem::validate_problem(&p).is_empty(), "instance {id} malformed");
        let recourse = if id % 2 == 0 { RecourseMode::Mixed } else { RecourseMode::Continuous };
        let cfg = RunConfig {
            reformulation: ReformulationConfig {
                recourse,
                ..ReformulationConfig::default()
            },
            verify: true,
            ..RunConfig::default()
        };
        let r = run(&p, &cfg).unwrap();
        // y = 1 everywhere with an affine x is always feasible
        assert_eq!(r.report.status, SolveStatus::Optimal, "instance {id}");
        let check = r.check.as_ref().unwrap();
        let worst = check.max_value().unwrap_or(f64::NEG_INFINITY);
        assert!(worst <= CERT_TOL, "instance {id}: row value {worst}\n{}", check.to_table());
        assert!(r.admissibility.as_ref().unwrap().is_admissible(), "instance {id}");

        let objective = r.report.objective.unwrap();
        let sim = worst_simulated_cost(
            &p,
            r.first.as_ref().unwrap(),
            r.policy.as_ref().unwrap(),
            Some(check),
            &GridOptions {
                samples: 200,
                ..GridOptions::default()
            },
        )
        .unwrap();
        assert_eq!(sim.infeasible, 0, "instance {id}");
        assert!(sim.cost <= objective + 1e-6 * (1.0 + objective.abs()), "instance {id}: simulated {} > {objective}", sim.cost);
        solved += 1;
    }
    assert_eq!(solved, 50);
}
