//! Reproduction runs for the case-study tables, driven by the bundled data
//! and the expected values in `data/expected.json`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{
    build_design_problem, build_planning_problem, case_b_breakpoints, equidistant_breakpoints, run, tailored_breakpoints,
    DesignCase, DesignData, PipelineError, PlanningData, RunConfig, RunResult, SetVariant,
};
use crate::milp::{bound_experiment, BackendChoice, BoundRule, SolveOptions, SolveStatus};
use crate::policy::RecourseMode;
use crate::problem::MultistageProblem;
use crate::reformulation::{BigMConfig, ReformulationConfig, ReformulationError};
use crate::uncertainty::Breakpoints;
use crate::verify::case_b_closed_form;

const EXPECTED: &str = include_str!("../../data/expected.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Entry {
    pub case: String,
    pub recourse: RecourseMode,
    /// `None` means infeasible.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Entry {
    pub method: String,
    pub per_param: usize,
    pub total: usize,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3Entry {
    pub periods: usize,
    pub recourse: RecourseMode,
    pub value: Option<f64>,
}

/// Published reference values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub table1: Vec<Table1Entry>,
    pub table1_breakpoints: usize,
    pub table2: Vec<Table2Entry>,
    pub table2_tau: f64,
    pub table2_set: SetVariant,
    pub table3: Vec<Table3Entry>,
    pub table3_gamma_bar: f64,
    pub table3_breakpoints: usize,
    /// Multiplier bound for the planning runs.
    pub table3_big_m: f64,
}

pub fn expected() -> Expected {
    serde_json::from_str(EXPECTED).expect("bundled expected values parse")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReproOptions {
    pub solve: SolveOptions,
    pub backend: BackendChoice,
    /// `None` keeps each study's own bound: the library default for the
    /// design studies, `table3_big_m` for planning.
    pub big_m: Option<BigMConfig>,
    pub verify: bool,
}

impl Default for ReproOptions {
    fn default() -> Self {
        Self {
            solve: SolveOptions::default(),
            backend: BackendChoice::Linked,
            big_m: None,
            verify: true,
        }
    }
}

impl ReproOptions {
    pub fn run_config(&self, recourse: RecourseMode) -> RunConfig {
        self.config_with(recourse, BigMConfig::default())
    }

    pub fn planning_config(&self, recourse: RecourseMode) -> RunConfig {
        self.config_with(recourse, BigMConfig::uniform(expected().table3_big_m))
    }

    fn config_with(&self, recourse: RecourseMode, study: BigMConfig) -> RunConfig {
        RunConfig {
            reformulation: ReformulationConfig {
                recourse,
                info: None,
                big_m: self.big_m.clone().unwrap_or(study),
            },
            solve: self.solve.clone(),
            backend: self.backend.clone(),
            verify: self.verify,
        }
    }
}

/// Multiplier bound a study instance is solved with unless overridden.
pub fn study_big_m(p: &MultistageProblem) -> BigMConfig {
    if p.meta.name == "planning" {
        BigMConfig::uniform(expected().table3_big_m)
    } else {
        BigMConfig::default()
    }
}

/// One reproduced table cell with its model statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproRow {
    pub table: String,
    pub label: String,
    /// Reference objective; `None` when the reference is "infeasible".
    pub expected: Option<f64>,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub wall_time: f64,
    pub rows: usize,
    pub columns: usize,
    pub binaries: usize,
    pub breakpoints: usize,
    pub certified: Option<bool>,
}

impl ReproRow {
    pub fn from_run(table: &str, label: String, expected: Option<f64>, r: &RunResult, wall_time: f64) -> Self {
        Self {
            table: table.to_string(),
            label,
            expected,
            status: r.report.status,
            objective: r.report.objective,
            bound: r.report.bound,
            wall_time,
            rows: r.manifest.rows,
            columns: r.manifest.columns,
            binaries: r.manifest.binaries,
            breakpoints: r.manifest.breakpoints,
            certified: r.certified(),
        }
    }

    pub fn rel_error(&self) -> Option<f64> {
        match (self.expected, self.objective) {
            (Some(e), Some(o)) => Some((o - e).abs() / e.abs().max(1.0)),
            _ => None,
        }
    }

    /// Infeasible references need an infeasible status; values need an
    /// incumbent within `tol` relative.
    pub fn matches(&self, tol: f64) -> bool {
        match self.expected {
            None => self.status == SolveStatus::Infeasible,
            Some(_) => self.rel_error().is_some_and(|e| e <= tol),
        }
    }
}

pub fn to_csv(rows: &[ReproRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
    let mut s = String::from(
        "table,label,expected,status,objective,bound,rel_error,wall_time_s,rows,columns,binaries,breakpoints,certified\n",
    );
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{:?},{},{},{},{:.3},{},{},{},{},{}\n",
            r.table,
            r.label,
            r.expected.map(|v| v.to_string()).unwrap_or_else(|| "infeasible".into()),
            r.status,
            opt(r.objective),
            opt(r.bound),
            r.rel_error().map(|e| format!("{e:.6}")).unwrap_or_default(),
            r.wall_time,
            r.rows,
            r.columns,
            r.binaries,
            r.breakpoints,
            r.certified.map(|c| c.to_string()).unwrap_or_default(),
        ));
    }
    s
}

pub fn recourse_label(m: RecourseMode) -> &'static str {
    match m {
        RecourseMode::Continuous => "continuous",
        RecourseMode::Mixed => "mixed",
    }
}

pub fn timed_run(p: &MultistageProblem, cfg: &RunConfig) -> Result<(RunResult, f64), PipelineError> {
    let t = Instant::now();
    let r = run(p, cfg)?;
    Ok((r, t.elapsed().as_secs_f64()))
}

fn parse_case(s: &str) -> DesignCase {
    if s.eq_ignore_ascii_case("a") {
        DesignCase::A
    } else {
        DesignCase::B
    }
}

/// Three-unit design instance for a case with `bp` built from the problem.
pub fn design_case_problem(case: DesignCase, bp: impl Fn(&MultistageProblem, &DesignData) -> Breakpoints) -> Result<MultistageProblem, PipelineError> {
    let d = DesignData::three_unit().with_case(case);
    let mut p = build_design_problem(&d)?;
    p.breakpoints = bp(&p, &d);
    Ok(p)
}

/// Three-unit design: Cases A and B with continuous-only and mixed recourse.
pub fn table1(opts: &ReproOptions) -> Result<Vec<ReproRow>, PipelineError> {
    let exp = expected();
    let n = exp.table1_breakpoints;
    let mut out = Vec::new();
    for e in &exp.table1 {
        let p = design_case_problem(parse_case(&e.case), |p, _| equidistant_breakpoints(p, n))?;
        let (r, secs) = timed_run(&p, &opts.run_config(e.recourse))?;
        let label = format!("case {} {} equidistant:{n}", e.case, recourse_label(e.recourse));
        out.push(ReproRow::from_run("table1", label, e.value, &r, secs));
    }
    Ok(out)
}

/// Case A with mixed recourse under breakpoints fine enough for the first
/// demand piece to be served by unit 2 alone.
pub fn table1_case_a_refined(opts: &ReproOptions, equidistant: usize) -> Result<Vec<ReproRow>, PipelineError> {
    let exp = expected();
    let value = exp
        .table1
        .iter()
        .find(|e| e.case == "A" && e.recourse == RecourseMode::Mixed)
        .and_then(|e| e.value);
    let mut out = Vec::new();
    let p = design_case_problem(DesignCase::A, |p, _| equidistant_breakpoints(p, equidistant))?;
    let (r, secs) = timed_run(&p, &opts.run_config(RecourseMode::Mixed))?;
    out.push(ReproRow::from_run("table1", format!("case A mixed equidistant:{equidistant}"), value, &r, secs));
    let p = design_case_problem(DesignCase::A, |p, d| tailored_breakpoints(p, d, &Breakpoints::none(&p.uncertainty)))?;
    let (r, secs) = timed_run(&p, &opts.run_config(RecourseMode::Mixed))?;
    out.push(ReproRow::from_run("table1", "case A mixed tailored".into(), value, &r, secs));
    Ok(out)
}

/// Eight-unit design instance with the reference budget set.
pub fn table2_problem(per_param: Option<usize>) -> Result<MultistageProblem, PipelineError> {
    let exp = expected();
    let d = DesignData::eight_unit().with_set(exp.table2_set, exp.table2_tau);
    let mut p = build_design_problem(&d)?;
    p.breakpoints = match per_param {
        Some(n) => equidistant_breakpoints(&p, n),
        None => tailored_breakpoints(&p, &d, &Breakpoints::none(&p.uncertainty)),
    };
    Ok(p)
}

/// Eight-unit design rows whose total breakpoint count is in `totals` (all when
/// empty).
pub fn table2(opts: &ReproOptions, totals: &[usize]) -> Result<Vec<ReproRow>, PipelineError> {
    let exp = expected();
    let mut out = Vec::new();
    for e in &exp.table2 {
        if !totals.is_empty() && !totals.contains(&e.total) {
            continue;
        }
        let tailored = e.method == "tailored";
        let p = table2_problem(if tailored { None } else { Some(e.per_param) })?;
        let (r, secs) = timed_run(&p, &opts.run_config(RecourseMode::Mixed))?;
        let label = if tailored {
            format!("tailored {}", e.total)
        } else {
            format!("equidistant {}", e.total)
        };
        out.push(ReproRow::from_run("table2", label, e.value, &r, secs));
    }
    Ok(out)
}

/// Case B optimum against the closed form for each budget level and set,
/// with demand breakpoints at the analytic switching points.
pub fn fig6(opts: &ReproOptions, taus: &[f64], variants: &[SetVariant]) -> Result<Vec<ReproRow>, PipelineError> {
    let mut out = Vec::new();
    for &v in variants {
        for &tau in taus {
            let base = DesignData::three_unit();
            let cf = case_b_closed_form(tau, &base, v);
            let d = base.with_case(DesignCase::B).with_set(v, tau);
            let mut p = build_design_problem(&d)?;
            p.breakpoints = case_b_breakpoints(&p, &d, cf.c2_worst);
            let (r, secs) = timed_run(&p, &opts.run_config(RecourseMode::Mixed))?;
            let label = format!("{v:?} tau={tau:.1}");
            out.push(ReproRow::from_run("fig6", label, Some(cf.z), &r, secs));
        }
    }
    Ok(out)
}

/// Planning instance with `periods` periods, upgrade scale `gamma_bar` and
/// equidistant breakpoints.
pub fn planning_problem(periods: usize, gamma_bar: f64, breakpoints: usize) -> Result<MultistageProblem, PipelineError> {
    let d = PlanningData::bundled().with_horizon(periods).with_gamma_bar(gamma_bar);
    let mut p = build_planning_problem(&d)?;
    p.breakpoints = equidistant_breakpoints(&p, breakpoints);
    Ok(p)
}

/// Planning cells for the requested horizons and recourse modes.
pub fn table3(opts: &ReproOptions, periods: &[usize], modes: &[RecourseMode]) -> Result<Vec<ReproRow>, PipelineError> {
    let exp = expected();
    let mut out = Vec::new();
    for e in &exp.table3 {
        if !periods.contains(&e.periods) || !modes.contains(&e.recourse) {
            continue;
        }
        let p = planning_problem(e.periods, exp.table3_gamma_bar, exp.table3_breakpoints)?;
        let (r, secs) = timed_run(&p, &opts.planning_config(e.recourse))?;
        let label = format!("T={} {}", e.periods, recourse_label(e.recourse));
        out.push(ReproRow::from_run("table3", label, e.value, &r, secs));
    }
    Ok(out)
}

/// Re-solve timings after rewriting every big-M from the incumbent duals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub periods: usize,
    pub rule: String,
    pub base_objective: Option<f64>,
    pub base_time: f64,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub wall_time: f64,
    /// Duals whose bound became zero.
    pub fixed_to_zero: usize,
    /// Duals within 1% of their new bound.
    pub boundary_active: usize,
}

impl BoundRow {
    pub fn same_objective(&self, tol: f64) -> bool {
        match (self.base_objective, self.objective) {
            (Some(a), Some(b)) => (a - b).abs() / a.abs().max(1.0) <= tol,
            _ => false,
        }
    }
}

pub fn bound_rows_csv(rows: &[BoundRow]) -> String {
    let mut s = String::from("periods,rule,base_objective,base_time_s,status,objective,time_s,fixed_to_zero,boundary_active\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{:.3},{:?},{},{:.3},{},{}\n",
            r.periods,
            r.rule,
            r.base_objective.map(|v| format!("{v:.4}")).unwrap_or_default(),
            r.base_time,
            r.status,
            r.objective.map(|v| format!("{v:.4}")).unwrap_or_default(),
            r.wall_time,
            r.fixed_to_zero,
            r.boundary_active
        ));
    }
    s
}

/// Solve the mixed-recourse planning instance, then re-solve under
/// each bound rewrite.
pub fn table4(opts: &ReproOptions, periods: usize, rules: &[BoundRule]) -> Result<Vec<BoundRow>, PipelineError> {
    let exp = expected();
    let p = planning_problem(periods, exp.table3_gamma_bar, exp.table3_breakpoints)?;
    let mut cfg = opts.planning_config(RecourseMode::Mixed);
    cfg.verify = false;
    let (base, base_time) = timed_run(&p, &cfg)?;
    bound_rows(opts, periods, &base, base_time, rules)
}

/// Bound rewrites of an already solved run.
pub fn bound_rows(
    opts: &ReproOptions,
    periods: usize,
    base: &RunResult,
    base_time: f64,
    rules: &[BoundRule],
) -> Result<Vec<BoundRow>, PipelineError> {
    let Some(x) = base.report.solution.as_deref() else {
        return Err(PipelineError::Reformulation(ReformulationError::NoIncumbent));
    };
    let backend = opts.backend.backend();
    let mut out = Vec::new();
    for &rule in rules {
        let t = Instant::now();
        let (rep, _, reg) = bound_experiment(&base.model, &base.artifacts.bounds, x, rule, backend.as_ref(), &opts.solve)?;
        out.push(BoundRow {
            periods,
            rule: rule.label().to_string(),
            base_objective: base.report.objective,
            base_time,
            status: rep.status,
            objective: rep.objective,
            wall_time: t.elapsed().as_secs_f64(),
            fixed_to_zero: reg.duals.iter().filter(|d| d.big_m == 0.0).count(),
            boundary_active: rep.boundary_active.len(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma_bar: f64,
    pub recourse: RecourseMode,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    /// `1` per upgraded unit, unit 1 first.
    pub upgrades: String,
}

/// Upgrade-cost sweep on the planning instance.
pub fn sweep_gamma(opts: &ReproOptions, periods: usize, gammas: &[f64], modes: &[RecourseMode]) -> Result<Vec<SweepRow>, PipelineError> {
    let exp = expected();
    let mut out = Vec::new();
    for &g in gammas {
        for &m in modes {
            let p = planning_problem(periods, g, exp.table3_breakpoints)?;
            let mut cfg = opts.planning_config(m);
            cfg.verify = false;
            let r = run(&p, &cfg)?;
            let upgrades = r
                .first
                .as_ref()
                .map(|f| f.y_rounded().iter().map(|&v| if v > 0.5 { '1' } else { '0' }).collect())
                .unwrap_or_default();
            out.push(SweepRow {
                gamma_bar: g,
                recourse: m,
                status: r.report.status,
                objective: r.report.objective,
                upgrades,
            });
        }
    }
    Ok(out)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("gamma_bar,recourse,status,objective,upgrades\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{:?},{},{}\n",
            r.gamma_bar,
            recourse_label(r.recourse),
            r.status,
            r.objective.map(|v| format!("{v:.4}")).unwrap_or_default(),
            r.upgrades
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expected_values_load() {
        let e = expected();
        assert_eq!(e.table1.len(), 4);
        assert_eq!(e.table2.iter().filter(|r| r.value.is_none()).count(), 2);
        assert_eq!(e.table3.len(), 8);
    }

    #[test]
    fn infeasible_reference_needs_infeasible_status() {
        let mut r = ReproRow {
            table: "t".into(),
            label: "l".into(),
            expected: None,
            status: SolveStatus::Infeasible,
            objective: None,
            bound: None,
            wall_time: 0.0,
            rows: 0,
            columns: 0,
            binaries: 0,
            breakpoints: 0,
            certified: None,
        };
        assert!(r.matches(0.01));
        r.status = SolveStatus::Optimal;
        r.objective = Some(1.0);
        assert!(!r.matches(0.01));
        r.expected = Some(100.0);
        r.objective = Some(100.9);
        assert!(r.matches(0.01));
        r.objective = Some(101.1);
        assert!(!r.matches(0.01));
    }
}
