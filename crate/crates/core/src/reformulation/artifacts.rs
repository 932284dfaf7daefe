use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rules::PolicyVars;
use super::{Linearizer, ReformulationConfig};
use crate::milp::{BoundRegistry, MilpModel, NameMap, VarId, VarKind};
use crate::policy::{InfoStructure, RecourseMode};
use crate::problem::MultistageProblem;
use crate::uncertainty::{Breakpoints, Support};

/// A block of dual variables, stored row-major over `shape`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualFamily {
    pub name: String,
    pub stage: usize,
    pub shape: Vec<usize>,
    pub nonnegative: bool,
    pub vars: Vec<VarId>,
}

impl DualFamily {
    pub fn new(name: &str, stage: usize, shape: Vec<usize>, nonnegative: bool, vars: Vec<VarId>) -> Self {
        Self {
            name: name.to_string(),
            stage,
            shape,
            nonnegative,
            vars,
        }
    }
}

/// Everything needed to read a policy back out of a solution and to audit
/// the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReformulationArtifacts {
    pub instance: String,
    /// `two-stage` or `multistage`.
    pub path: String,
    pub recourse: RecourseMode,
    pub info: InfoStructure,
    pub support: Vec<Vec<Support>>,
    pub breakpoints: Breakpoints,
    pub x1: Vec<VarId>,
    pub y1: Vec<VarId>,
    pub rules: PolicyVars,
    pub families: Vec<DualFamily>,
    pub bounds: BoundRegistry,
    pub num_products: usize,
}

impl ReformulationArtifacts {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        p: &MultistageProblem,
        path: &str,
        cfg: &ReformulationConfig,
        info: InfoStructure,
        x1: Vec<VarId>,
        y1: Vec<VarId>,
        rules: PolicyVars,
        families: Vec<DualFamily>,
        lin: Linearizer,
    ) -> Self {
        Self {
            instance: p.meta.name.clone(),
            path: path.to_string(),
            recourse: cfg.recourse,
            info,
            support: p.uncertainty.support.clone(),
            breakpoints: p.breakpoints.clone(),
            x1,
            y1,
            rules,
            families,
            num_products: lin.num_products(),
            bounds: lin.registry,
        }
    }

    pub fn objective_var(&self) -> VarId {
        self.x1[0]
    }

    pub fn family(&self, name: &str, stage: usize) -> Option<&DualFamily> {
        self.families.iter().find(|f| f.name == name && f.stage == stage)
    }
}

/// Audit summary written next to an exported model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub instance: String,
    pub path: String,
    pub recourse: RecourseMode,
    pub rows: usize,
    pub columns: usize,
    pub binaries: usize,
    pub continuous: usize,
    pub nonzeros: usize,
    pub breakpoints: usize,
    pub row_families: BTreeMap<String, usize>,
    pub column_families: BTreeMap<String, usize>,
    pub dual_families: Vec<(String, usize, Vec<usize>)>,
    pub products: usize,
    /// `(dual name, family, big-M)`
    pub big_m: Vec<(String, String, f64)>,
    pub names: NameMap,
}

fn family_of(name: &str) -> String {
    match name.find('[') {
        Some(k) => name[..k].to_string(),
        None => name.to_string(),
    }
}

pub fn build_manifest(model: &MilpModel, art: &ReformulationArtifacts) -> Manifest {
    let mut row_families = BTreeMap::new();
    for r in &model.rows {
        *row_families.entry(family_of(&r.name)).or_insert(0) += 1;
    }
    let mut column_families = BTreeMap::new();
    for v in &model.vars {
        let f = if v.name.contains('*') { "product".to_string() } else { family_of(&v.name) };
        *column_families.entry(f).or_insert(0) += 1;
    }
    let binaries = model.num_binaries();
    Manifest {
        instance: art.instance.clone(),
        path: art.path.clone(),
        recourse: art.recourse,
        rows: model.rows.len(),
        columns: model.vars.len(),
        binaries,
        continuous: model.vars.iter().filter(|v| v.kind == VarKind::Continuous).count(),
        nonzeros: model.num_nonzeros(),
        breakpoints: art.breakpoints.total(),
        row_families,
        column_families,
        dual_families: art.families.iter().map(|f| (f.name.clone(), f.stage, f.shape.clone())).collect(),
        products: art.num_products,
        big_m: art
            .bounds
            .duals
            .iter()
            .map(|d| (model.var(d.var).name.clone(), d.family.clone(), d.big_m))
            .collect(),
        names: NameMap::build(model),
    }
}
