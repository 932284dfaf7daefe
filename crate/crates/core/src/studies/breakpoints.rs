use super::DesignData;
use crate::problem::MultistageProblem;
use crate::uncertainty::{Breakpoints, Support};

const DEDUP_TOL: f64 = 1e-9;

/// `n` points at fractions `k / (n + 1)` of the support.
pub fn equidistant_points(s: Support, n: usize) -> Vec<f64> {
    if s.width() <= 0.0 {
        return Vec::new();
    }
    (1..=n).map(|k| s.min + s.width() * k as f64 / (n + 1) as f64).collect()
}

/// `n` equidistant breakpoints for every non-constant parameter.
pub fn equidistant_breakpoints(p: &MultistageProblem, n: usize) -> Breakpoints {
    let mut bp = Breakpoints::none(&p.uncertainty);
    for pid in p.uncertain_params() {
        bp.set(pid, equidistant_points(p.support(pid), n));
    }
    bp
}

/// Demand breakpoints from unit capacity limits: every `c_min` and every
/// `c_max - q` where `q` runs over the shortfall support ends and its
/// breakpoints, kept when strictly inside the demand range.
pub fn tailored_demand_points(d: &DesignData, shortfall: &Breakpoints) -> Vec<f64> {
    let Ok((lo, hi)) = d.demand() else {
        return Vec::new();
    };
    let mut cand = Vec::new();
    for (i, u) in d.units.iter().enumerate() {
        cand.push(u.c_min);
        let pts = shortfall.get(DesignData::shortfall_param(i));
        cand.push(u.c_max);
        cand.extend(pts.iter().map(|q| u.c_max - q));
        cand.push(u.c_max - u.c_hat_max);
    }
    cand.retain(|&v| v > lo + DEDUP_TOL && v < hi - DEDUP_TOL);
    cand.sort_by(f64::total_cmp);
    cand.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL);
    cand
}

/// Keeps the shortfall breakpoints of `shortfall` and adds tailored demand
/// breakpoints.
pub fn tailored_breakpoints(p: &MultistageProblem, d: &DesignData, shortfall: &Breakpoints) -> Breakpoints {
    let mut bp = Breakpoints::none(&p.uncertainty);
    for i in 0..d.units.len() {
        let pid = DesignData::shortfall_param(i);
        bp.set(pid, shortfall.get(pid).to_vec());
    }
    bp.set(d.demand_param(), tailored_demand_points(d, shortfall));
    bp
}

/// Demand breakpoints where the optimal Case B plan switches: unit 2 alone
/// up to its worst-case capacity, then unit 3 at minimum output, then unit 3
/// taking the remainder.
pub fn case_b_breakpoints(p: &MultistageProblem, d: &DesignData, c2_worst: f64) -> Breakpoints {
    let (u2, u3) = (&d.units[1], &d.units[2]);
    let first = u2.c_max - c2_worst;
    let mut bp = Breakpoints::none(&p.uncertainty);
    let s = p.support(d.demand_param());
    let pts: Vec<f64> = [first, u3.c_min + first]
        .into_iter()
        .filter(|&v| v > s.min + DEDUP_TOL && v < s.max - DEDUP_TOL)
        .collect();
    bp.set(d.demand_param(), pts);
    bp
}
