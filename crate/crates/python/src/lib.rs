//! Python bindings: build case-study instances, set breakpoints, solve,
//! certify and export.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use engine::milp::{export_lp, BackendChoice, SolveOptions};
use engine::policy::{check_binary_admissibility, PolicyFile, RecourseMode};
use engine::problem::MultistageProblem;
use engine::reformulation::{build_manifest, reformulate, BigMConfig, ReformulationConfig};
use engine::studies::reproduce::study_big_m;
use engine::studies::{
    build_design_problem, build_planning_problem, equidistant_breakpoints, run, tailored_breakpoints, DesignCase,
    DesignData, RunConfig, SetVariant, StudyData,
};
use engine::uncertainty::{lift_binary, lift_continuous, Breakpoints, Support};
use engine::verify::{case_b_closed_form, inner_max_check};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn recourse(s: &str) -> PyResult<RecourseMode> {
    RecourseMode::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown recourse `{s}`")))
}

fn variant(s: &str) -> PyResult<SetVariant> {
    SetVariant::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown set variant `{s}`")))
}

/// A multistage robust problem instance.
#[pyclass(name = "Problem", module = "ddro")]
struct PyProblem {
    inner: MultistageProblem,
    design: Option<DesignData>,
}

#[pymethods]
impl PyProblem {
    /// Builds a bundled study (`design-3unit`, `design-8unit`, `planning`) or
    /// a study data file.
    #[staticmethod]
    #[pyo3(signature = (name, case=None, set=None, tau=None, periods=None, gamma_bar=None))]
    fn study(
        name: &str,
        case: Option<&str>,
        set: Option<&str>,
        tau: Option<f64>,
        periods: Option<usize>,
        gamma_bar: Option<f64>,
    ) -> PyResult<Self> {
        match StudyData::resolve(name).map_err(err)? {
            StudyData::Design(mut d) => {
                match case.map(str::to_ascii_lowercase).as_deref() {
                    Some("a") => d = d.with_case(DesignCase::A),
                    Some("b") => d = d.with_case(DesignCase::B),
                    Some(c) => return Err(PyValueError::new_err(format!("unknown case `{c}`"))),
                    None if d.d_min.is_none() => d = d.with_case(DesignCase::B),
                    None => {}
                }
                if set.is_some() || tau.is_some() {
                    let v = match set {
                        Some(s) => variant(s)?,
                        None => d.variant,
                    };
                    let t = tau.unwrap_or(d.tau);
                    d = d.with_set(v, t);
                }
                let inner = build_design_problem(&d).map_err(err)?;
                Ok(Self { inner, design: Some(d) })
            }
            StudyData::Planning(mut d) => {
                if let Some(t) = periods {
                    d = d.with_horizon(t);
                }
                if let Some(g) = gamma_bar {
                    d = d.with_gamma_bar(g);
                }
                let mut inner = build_planning_problem(&d).map_err(err)?;
                inner.breakpoints = equidistant_breakpoints(&inner, 1);
                Ok(Self { inner, design: None })
            }
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = MultistageProblem::from_json(text).map_err(err)?;
        Ok(Self { inner, design: None })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.meta.name.clone()
    }

    #[getter]
    fn num_stages(&self) -> usize {
        self.inner.num_stages()
    }

    /// Names of the non-constant uncertain parameters.
    fn parameters(&self) -> Vec<String> {
        self.inner
            .uncertain_params()
            .into_iter()
            .filter(|p| !p.is_constant())
            .map(|p| self.inner.param_name(p))
            .collect()
    }

    /// `equidistant:N`, `tailored` or `none`.
    fn set_breakpoints(&mut self, spec: &str) -> PyResult<()> {
        let p = &self.inner;
        self.inner.breakpoints = match spec {
            "none" => Breakpoints::none(&p.uncertainty),
            "tailored" => {
                let d = self
                    .design
                    .as_ref()
                    .ok_or_else(|| PyValueError::new_err("tailored breakpoints need design study data"))?;
                tailored_breakpoints(p, d, &Breakpoints::none(&p.uncertainty))
            }
            s => match s.strip_prefix("equidistant:").and_then(|n| n.parse().ok()) {
                Some(n) => equidistant_breakpoints(p, n),
                None => return Err(PyValueError::new_err(format!("bad breakpoint spec `{s}`"))),
            },
        };
        Ok(())
    }

    /// Breakpoints per parameter, in the order of `parameters()`.
    fn breakpoints(&self) -> Vec<Vec<f64>> {
        self.inner
            .uncertain_params()
            .into_iter()
            .filter(|p| !p.is_constant())
            .map(|p| self.inner.breakpoints.get(p).to_vec())
            .collect()
    }

    /// Writes the reformulated MILP as an LP file and returns the manifest as
    /// JSON.
    #[pyo3(signature = (path, recourse="mixed", big_m=None))]
    fn export_lp(&self, path: &str, recourse: &str, big_m: Option<f64>) -> PyResult<String> {
        let cfg = ReformulationConfig {
            recourse: self::recourse(recourse)?,
            info: None,
            big_m: big_m.map(BigMConfig::uniform).unwrap_or_else(|| study_big_m(&self.inner)),
        };
        let (model, art) = reformulate(&self.inner, &cfg).map_err(err)?;
        export_lp(&model, std::path::Path::new(path)).map_err(err)?;
        let mut m = build_manifest(&model, &art);
        m.path = path.to_string();
        serde_json::to_string_pretty(&m).map_err(err)
    }

    /// Reformulates, solves and (optionally) certifies.
    #[pyo3(signature = (recourse="mixed", gap=0.01, time_limit=None, big_m=None, verify=true, solver="highs"))]
    fn solve(
        &self,
        recourse: &str,
        gap: f64,
        time_limit: Option<f64>,
        big_m: Option<f64>,
        verify: bool,
        solver: &str,
    ) -> PyResult<SolveResult> {
        let cfg = RunConfig {
            reformulation: ReformulationConfig {
                recourse: self::recourse(recourse)?,
                info: None,
                big_m: big_m.map(BigMConfig::uniform).unwrap_or_else(|| study_big_m(&self.inner)),
            },
            solve: SolveOptions {
                gap,
                time_limit,
                ..SolveOptions::default()
            },
            backend: BackendChoice::parse(solver),
            verify,
        };
        let r = run(&self.inner, &cfg).map_err(err)?;
        let policy = match (&r.policy, &r.first) {
            (Some(p), Some(f)) => Some(
                serde_json::to_string(&PolicyFile {
                    instance: self.inner.meta.name.clone(),
                    objective: r.report.objective,
                    first_stage: f.clone(),
                    policy: p.clone(),
                })
                .map_err(err)?,
            ),
            _ => None,
        };
        Ok(SolveResult {
            status: format!("{:?}", r.report.status).to_lowercase(),
            objective: r.report.objective,
            bound: r.report.bound,
            gap: r.report.gap,
            wall_time: r.report.wall_time,
            rows: r.manifest.rows,
            columns: r.manifest.columns,
            binaries: r.manifest.binaries,
            certified: r.certified(),
            first_stage_x: r.first.as_ref().map(|f| f.x.clone()),
            first_stage_y: r.first.as_ref().map(|f| f.y.clone()),
            policy_json: policy,
        })
    }

    /// Certifies an exported policy. Returns `(certified, max_row_value)`.
    fn verify(&self, policy_json: &str) -> PyResult<(bool, Option<f64>)> {
        let f: PolicyFile = serde_json::from_str(policy_json).map_err(err)?;
        let adm = check_binary_admissibility(&f.policy, &self.inner, &f.first_stage);
        let check = inner_max_check(&self.inner, &f.first_stage, &f.policy).map_err(err)?;
        Ok((adm.is_admissible() && check.certified(), check.max_value()))
    }

    fn __repr__(&self) -> String {
        format!("Problem(name={:?}, stages={})", self.inner.meta.name, self.inner.num_stages())
    }
}

#[pyclass(module = "ddro", get_all)]
struct SolveResult {
    status: String,
    objective: Option<f64>,
    bound: Option<f64>,
    gap: Option<f64>,
    wall_time: f64,
    rows: usize,
    columns: usize,
    binaries: usize,
    certified: Option<bool>,
    first_stage_x: Option<Vec<f64>>,
    first_stage_y: Option<Vec<f64>>,
    policy_json: Option<String>,
}

#[pymethods]
impl SolveResult {
    fn __repr__(&self) -> String {
        format!(
            "SolveResult(status={:?}, objective={:?}, certified={:?})",
            self.status, self.objective, self.certified
        )
    }
}

/// Piecewise-linear lifting of a continuous parameter.
#[pyfunction(name = "lift_continuous")]
fn py_lift_continuous(xi: f64, breakpoints: Vec<f64>, lo: f64, hi: f64) -> PyResult<Vec<f64>> {
    lift_continuous(xi, &breakpoints, Support::new(lo, hi)).map_err(err)
}

/// Piece indicators of a parameter.
#[pyfunction(name = "lift_binary")]
fn py_lift_binary(xi: f64, breakpoints: Vec<f64>, lo: f64, hi: f64) -> PyResult<Vec<f64>> {
    lift_binary(xi, &breakpoints, Support::new(lo, hi)).map_err(err)
}

/// Analytic Case B optimum of the three-unit design study.
#[pyfunction(name = "case_b_closed_form")]
fn py_case_b_closed_form(tau: f64, set: &str) -> PyResult<f64> {
    Ok(case_b_closed_form(tau, &DesignData::three_unit(), variant(set)?).z)
}

#[pymodule]
fn ddro(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<SolveResult>()?;
    m.add_function(wrap_pyfunction!(py_lift_continuous, m)?)?;
    m.add_function(wrap_pyfunction!(py_lift_binary, m)?)?;
    m.add_function(wrap_pyfunction!(py_case_b_closed_form, m)?)?;
    Ok(())
}
