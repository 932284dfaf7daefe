use std::ffi::{c_void, CString};
use std::os::raw::c_int;
use std::sync::Mutex;
use std::time::Instant;

use highs_sys as ffi;

use super::model::{MilpModel, Sense, VarKind};
use super::{polish_with, MilpBackend, MilpError, SolveOptions, SolveReport, SolveStatus};

// HiGHS shares a global task scheduler between instances; concurrent solves from
// separate threads are serialized here.
static SOLVER_LOCK: Mutex<()> = Mutex::new(());

/// HiGHS linked into the process through its C API.
#[derive(Debug, Clone, Default)]
pub struct HighsBackend;

impl HighsBackend {
    pub fn new() -> Self {
        HighsBackend
    }
}

struct Handle(*mut c_void);

impl Handle {
    fn new() -> Result<Self, MilpError> {
        let p = unsafe { ffi::Highs_create() };
        if p.is_null() {
            return Err(MilpError::BackendMissing("Highs_create returned null".into()));
        }
        Ok(Handle(p))
    }

    fn set_bool(&self, name: &str, v: bool) {
        let n = CString::new(name).unwrap();
        unsafe { ffi::Highs_setBoolOptionValue(self.0, n.as_ptr(), v as c_int) };
    }

    fn set_int(&self, name: &str, v: i32) {
        let n = CString::new(name).unwrap();
        unsafe { ffi::Highs_setIntOptionValue(self.0, n.as_ptr(), v as c_int) };
    }

    fn set_double(&self, name: &str, v: f64) {
        let n = CString::new(name).unwrap();
        unsafe { ffi::Highs_setDoubleOptionValue(self.0, n.as_ptr(), v) };
    }

    fn info(&self, name: &str) -> Option<f64> {
        let n = CString::new(name).unwrap();
        let mut v = 0.0;
        let st = unsafe { ffi::Highs_getDoubleInfoValue(self.0, n.as_ptr(), &mut v) };
        (st == ffi::kHighsStatusOk as c_int).then_some(v)
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { ffi::Highs_destroy(self.0) };
    }
}

struct Csr {
    start: Vec<c_int>,
    index: Vec<c_int>,
    value: Vec<f64>,
    row_lower: Vec<f64>,
    row_upper: Vec<f64>,
}

fn to_csr(model: &MilpModel, inf: f64) -> Csr {
    let mut csr = Csr {
        start: Vec::with_capacity(model.rows.len()),
        index: Vec::new(),
        value: Vec::new(),
        row_lower: Vec::with_capacity(model.rows.len()),
        row_upper: Vec::with_capacity(model.rows.len()),
    };
    for r in &model.rows {
        csr.start.push(csr.index.len() as c_int);
        // merge duplicates defensively; HiGHS rejects repeated indices in a row
        let mut terms = r.terms.clone();
        terms.sort_by_key(|(v, _)| *v);
        let mut last: Option<usize> = None;
        for (v, c) in terms {
            if last == Some(v.0) {
                *csr.value.last_mut().unwrap() += c;
            } else {
                csr.index.push(v.0 as c_int);
                csr.value.push(c);
                last = Some(v.0);
            }
        }
        let (lo, hi) = match r.sense {
            Sense::Le => (-inf, r.rhs),
            Sense::Ge => (r.rhs, inf),
            Sense::Eq => (r.rhs, r.rhs),
        };
        csr.row_lower.push(lo);
        csr.row_upper.push(hi);
    }
    csr
}

fn clamp_inf(x: f64, inf: f64) -> f64 {
    if x >= inf {
        inf
    } else if x <= -inf {
        -inf
    } else {
        x
    }
}

fn run_once(model: &MilpModel, opts: &SolveOptions) -> Result<SolveReport, MilpError> {
    model.validate()?;
    let h = Handle::new()?;
    h.set_bool("output_flag", opts.verbose);
    h.set_double("mip_rel_gap", opts.gap.max(0.0));
    if let Some(t) = opts.time_limit {
        h.set_double("time_limit", t);
    }
    if let Some(th) = opts.threads {
        h.set_int("threads", th as i32);
    }
    let inf = unsafe { ffi::Highs_getInfinity(h.0) };
    let n = model.vars.len();
    let mut cost = vec![0.0; n];
    for (v, c) in &model.objective {
        cost[v.0] += c;
    }
    let lower: Vec<f64> = model.vars.iter().map(|v| clamp_inf(v.lower, inf)).collect();
    let upper: Vec<f64> = model.vars.iter().map(|v| clamp_inf(v.upper, inf)).collect();
    let csr = to_csr(model, inf);
    let is_mip = model.num_binaries() > 0;
    let integrality: Vec<c_int> = model
        .vars
        .iter()
        .map(|v| match v.kind {
            VarKind::Binary => ffi::kHighsVarTypeInteger as c_int,
            VarKind::Continuous => ffi::kHighsVarTypeContinuous as c_int,
        })
        .collect();
    let nnz = csr.index.len();
    let status = unsafe {
        let ptr_or_null = |v: &Vec<c_int>| if v.is_empty() { std::ptr::null() } else { v.as_ptr() };
        let fptr_or_null = |v: &Vec<f64>| if v.is_empty() { std::ptr::null() } else { v.as_ptr() };
        if is_mip {
            ffi::Highs_passMip(
                h.0,
                n as c_int,
                model.rows.len() as c_int,
                nnz as c_int,
                ffi::kHighsMatrixFormatRowwise as c_int,
                ffi::kHighsObjSenseMinimize as c_int,
                model.objective_offset,
                cost.as_ptr(),
                lower.as_ptr(),
                upper.as_ptr(),
                fptr_or_null(&csr.row_lower),
                fptr_or_null(&csr.row_upper),
                ptr_or_null(&csr.start),
                ptr_or_null(&csr.index),
                fptr_or_null(&csr.value),
                integrality.as_ptr(),
            )
        } else {
            ffi::Highs_passLp(
                h.0,
                n as c_int,
                model.rows.len() as c_int,
                nnz as c_int,
                ffi::kHighsMatrixFormatRowwise as c_int,
                ffi::kHighsObjSenseMinimize as c_int,
                model.objective_offset,
                cost.as_ptr(),
                lower.as_ptr(),
                upper.as_ptr(),
                fptr_or_null(&csr.row_lower),
                fptr_or_null(&csr.row_upper),
                ptr_or_null(&csr.start),
                ptr_or_null(&csr.index),
                fptr_or_null(&csr.value),
            )
        }
    };
    if status == ffi::kHighsStatusError as c_int {
        return Err(MilpError::InvalidModel("HiGHS rejected the model".into()));
    }
    let t0 = Instant::now();
    unsafe { ffi::Highs_zeroAllClocks(h.0) };
    let run = unsafe { ffi::Highs_run(h.0) };
    let wall = t0.elapsed().as_secs_f64();
    if run == ffi::kHighsStatusError as c_int {
        return Err(MilpError::BackendCrash("Highs_run returned an error status".into()));
    }
    let ms = unsafe { ffi::Highs_getModelStatus(h.0) };
    let has_primal = {
        let n = CString::new("primal_solution_status").unwrap();
        let mut v: c_int = 0;
        unsafe { ffi::Highs_getIntInfoValue(h.0, n.as_ptr(), &mut v) };
        v == ffi::kHighsSolutionStatusFeasible as c_int
    };
    let status = match ms {
        x if x == ffi::kHighsModelStatusOptimal as c_int => SolveStatus::Optimal,
        x if x == ffi::kHighsModelStatusInfeasible as c_int => SolveStatus::Infeasible,
        x if x == ffi::kHighsModelStatusUnbounded as c_int => SolveStatus::Unbounded,
        x if x == ffi::kHighsModelStatusUnboundedOrInfeasible as c_int => {
            // HiGHS cannot always tell the two apart; a MILP whose relaxation is
            // unbounded-or-infeasible is reported as infeasible unless a point exists.
            if has_primal {
                SolveStatus::Unbounded
            } else {
                SolveStatus::Infeasible
            }
        }
        x if x == ffi::kHighsModelStatusModelEmpty as c_int => SolveStatus::Optimal,
        x if x == ffi::kHighsModelStatusTimeLimit as c_int
            || x == ffi::kHighsModelStatusIterationLimit as c_int
            || x == ffi::kHighsModelStatusSolutionLimit as c_int
            || x == ffi::kHighsModelStatusInterrupt as c_int
            || x == ffi::kHighsModelStatusObjectiveBound as c_int
            || x == ffi::kHighsModelStatusObjectiveTarget as c_int
            || x == ffi::kHighsModelStatusUnknown as c_int =>
        {
            SolveStatus::Limit
        }
        other => return Err(MilpError::BackendCrash(format!("HiGHS model status {other}"))),
    };
    let mut report = SolveReport::new(status, None, None, wall);
    if has_primal && matches!(status, SolveStatus::Optimal | SolveStatus::Limit) {
        let mut col = vec![0.0; n];
        let mut row = vec![0.0; model.rows.len()];
        let mut dummy_c = vec![0.0; n];
        let mut dummy_r = vec![0.0; model.rows.len()];
        unsafe {
            ffi::Highs_getSolution(h.0, col.as_mut_ptr(), dummy_c.as_mut_ptr(), row.as_mut_ptr(), dummy_r.as_mut_ptr())
        };
        let obj = model.objective_value(&col);
        let bound = if is_mip {
            h.info("mip_dual_bound")
        } else if status == SolveStatus::Optimal {
            Some(obj)
        } else {
            None
        };
        report = SolveReport::new(status, Some(obj), bound, wall);
        report.solution = Some(col);
    }
    Ok(report)
}

impl MilpBackend for HighsBackend {
    fn name(&self) -> String {
        "highs (linked)".into()
    }

    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<SolveReport, MilpError> {
        let _guard = SOLVER_LOCK.lock().unwrap_or_else(|e| e.into_inner());
        let mut report = run_once(model, opts)?;
        if opts.polish && model.num_binaries() > 0 {
            if let Some(x) = report.solution.as_ref() {
                let lp_opts = SolveOptions {
                    polish: false,
                    time_limit: None,
                    ..opts.clone()
                };
                if let Some((obj, sol)) = polish_with(model, x, |m| run_once(m, &lp_opts)) {
                    if model.max_violation(&sol) <= model.max_violation(x).max(1e-7) {
                        report.objective = Some(obj);
                        report.gap = super::relative_gap(report.objective, report.bound);
                        report.solution = Some(sol);
                    }
                }
            }
        }
        Ok(report)
    }
}
