use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{InnerCheck, VerifyError, CERT_TOL};
use crate::policy::{evaluate_policy, FirstStageDecision, PolicyCoefficients, Trajectory};
use crate::problem::MultistageProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub stage: usize,
    pub row: usize,
    pub name: String,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    /// Realized cost from the instance's cost row, when it has one.
    pub cost: Option<f64>,
    pub violations: Vec<Violation>,
    /// The realization lies in the uncertainty set given the decisions taken.
    pub in_set: bool,
    /// Every binary decision is within tolerance of 0 or 1.
    pub integral: bool,
    /// `x[s-1]`, `y[s-1]` per stage.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

impl Simulation {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty() && self.integral
    }
}

fn check_support(problem: &MultistageProblem, xi: &Trajectory) -> Result<(), VerifyError> {
    if xi.len() != problem.num_stages() {
        return Err(VerifyError::Shape {
            got: xi.len(),
            expected: problem.num_stages(),
        });
    }
    for pid in problem.structure.params_upto(problem.num_stages()) {
        let v = xi[pid.stage - 1].get(pid.index - 1).copied().unwrap_or(f64::NAN);
        let s = problem.support(pid);
        if !s.contains(v, 1e-9) {
            return Err(VerifyError::OutOfSupport {
                param: problem.param_name(pid),
                value: v,
                min: s.min,
                max: s.max,
            });
        }
    }
    Ok(())
}

/// Runs the policy along one realization in observation order and checks
/// every original row.
pub fn simulate_policy(
    problem: &MultistageProblem,
    first: &FirstStageDecision,
    policy: &PolicyCoefficients,
    xi: &Trajectory,
) -> Result<Simulation, VerifyError> {
    check_support(problem, xi)?;
    let tt = problem.num_stages();
    let mut x = vec![first.x.clone()];
    let mut y = vec![first.y_rounded()];
    for t in 2..=tt {
        let (xt, yt) = evaluate_policy(policy, xi, t)?;
        x.push(xt);
        y.push(yt);
    }
    let integral = y.iter().flatten().all(|v| (v - v.round()).abs() <= CERT_TOL);
    let flat: Vec<f64> = xi.iter().flatten().copied().collect();
    let in_set = problem.uncertainty.contains(tt, &flat, &y, CERT_TOL);
    let mut violations = Vec::new();
    for t in 2..=tt {
        for n in 0..problem.structure.n(t) {
            let lhs = problem.row_activity(t, n, xi, &x, &y);
            if lhs > CERT_TOL {
                violations.push(Violation {
                    stage: t,
                    row: n,
                    name: problem.stage(t).row_name(n),
                    amount: lhs,
                });
            }
        }
    }
    let cost = problem.meta.cost_row.map(|r| {
        let mut x0 = x.clone();
        if let Some(v) = x0[0].first_mut() {
            *v = 0.0;
        }
        problem.row_activity(r.stage, r.row - 1, xi, &x0, &y)
    });
    Ok(Simulation {
        cost,
        violations,
        in_set,
        integral,
        x,
        y,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    /// Random box samples added to the grid before set filtering.
    pub samples: usize,
    pub seed: u64,
    /// Largest full Cartesian product of per-parameter grids; larger grids
    /// fall back to one-parameter moves around anchor points.
    pub max_product: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: 7,
            max_product: 4096,
        }
    }
}

/// Support ends, breakpoints and left limits at breakpoints.
fn param_grid(lo: f64, hi: f64, bp: &[f64]) -> Vec<f64> {
    let mut g = vec![lo];
    let eps = 1e-7 * (hi - lo).max(1.0);
    for &p in bp {
        g.push(p - eps);
        g.push(p);
    }
    g.push(hi);
    g.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    g
}

fn to_trajectory(problem: &MultistageProblem, flat: &[f64]) -> Trajectory {
    let mut out = Vec::new();
    let mut k = 0;
    for t in 1..=problem.num_stages() {
        let n = problem.structure.k(t);
        out.push(flat[k..k + n].to_vec());
        k += n;
    }
    out
}

/// Realizations for simulation: vertex combinations (all of them when the
/// product is small, otherwise one parameter at a time around the anchors
/// and the support corners) plus random box samples. Points outside the set
/// under the policy's own decisions are dropped.
pub fn scenario_grid(
    problem: &MultistageProblem,
    first: &FirstStageDecision,
    policy: &PolicyCoefficients,
    anchors: &[Trajectory],
    opts: &GridOptions,
) -> Vec<Trajectory> {
    let tt = problem.num_stages();
    let params = problem.structure.params_upto(tt);
    let grids: Vec<Vec<f64>> = params
        .iter()
        .map(|&p| {
            let s = problem.support(p);
            param_grid(s.min, s.max, policy.breakpoints.get(p))
        })
        .collect();
    let product = grids.iter().try_fold(1usize, |acc, g| acc.checked_mul(g.len()));
    let mut flats: Vec<Vec<f64>> = Vec::new();
    match product {
        Some(n) if n <= opts.max_product => {
            let mut idx = vec![0usize; grids.len()];
            loop {
                flats.push(idx.iter().zip(&grids).map(|(&i, g)| g[i]).collect());
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < grids[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
        _ => {
            let mut bases: Vec<Vec<f64>> = anchors.iter().map(|a| a.iter().flatten().copied().collect()).collect();
            bases.push(grids.iter().map(|g| g[0]).collect());
            bases.push(grids.iter().map(|g| *g.last().unwrap()).collect());
            for b in &bases {
                flats.push(b.clone());
                for (k, g) in grids.iter().enumerate() {
                    for &v in g {
                        let mut p = b.clone();
                        p[k] = v;
                        flats.push(p);
                    }
                }
            }
        }
    }
    for a in anchors {
        flats.push(a.iter().flatten().copied().collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.samples {
        flats.push(
            params
                .iter()
                .map(|&p| {
                    let s = problem.support(p);
                    if s.width() > 0.0 {
                        rng.gen_range(s.min..=s.max)
                    } else {
                        s.min
                    }
                })
                .collect(),
        );
    }
    flats
        .into_iter()
        .map(|f| to_trajectory(problem, &f))
        .filter(|xi| {
            simulate_policy(problem, first, policy, xi)
                .map(|s| s.in_set)
                .unwrap_or(false)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub cost: f64,
    pub trajectory: Trajectory,
    pub scenarios: usize,
    /// Scenarios with a row violation or a fractional binary.
    pub infeasible: usize,
}

/// Largest simulated cost over the scenario grid, anchored at the maximizers
/// found by `check` at the last stage.
pub fn worst_simulated_cost(
    problem: &MultistageProblem,
    first: &FirstStageDecision,
    policy: &PolicyCoefficients,
    check: Option<&InnerCheck>,
    opts: &GridOptions,
) -> Result<WorstCase, VerifyError> {
    if problem.meta.cost_row.is_none() {
        return Err(VerifyError::NoCostRow);
    }
    let tt = problem.num_stages();
    let anchors: Vec<Trajectory> = check
        .map(|c| {
            c.rows
                .iter()
                .filter(|r| r.stage == tt && !r.worst_xi.is_empty())
                .map(|r| to_trajectory(problem, &clamp(problem, &r.worst_xi)))
                .collect()
        })
        .unwrap_or_default();
    let grid = scenario_grid(problem, first, policy, &anchors, opts);
    let mut worst = WorstCase {
        cost: f64::NEG_INFINITY,
        trajectory: Vec::new(),
        scenarios: grid.len(),
        infeasible: 0,
    };
    for xi in grid {
        let sim = simulate_policy(problem, first, policy, &xi)?;
        if !sim.feasible() {
            worst.infeasible += 1;
        }
        let c = sim.cost.expect("cost row present");
        if c > worst.cost {
            worst.cost = c;
            worst.trajectory = xi;
        }
    }
    Ok(worst)
}

/// LP maximizers can sit a hair outside the support.
fn clamp(problem: &MultistageProblem, flat: &[f64]) -> Vec<f64> {
    let params = problem.structure.params_upto(problem.num_stages());
    flat.iter()
        .zip(params)
        .map(|(&v, p)| {
            let s = problem.support(p);
            v.clamp(s.min, s.max)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_left_limits() {
        let g = param_grid(0.0, 10.0, &[5.0]);
        assert_eq!(g.len(), 4);
        assert!(g[1] < 5.0 && g[1] > 4.99);
    }
}
