use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::MilpError;

/// Index of a variable inside a [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(v, c)| c * x[v.0]).sum()
    }

    /// Signed violation at `x`; nonpositive when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => lhs - self.rhs,
            Sense::Ge => self.rhs - lhs,
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Affine expression `sum c_j x_j + constant` with merged duplicate terms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: BTreeMap<VarId, f64>,
    constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn term(v: VarId, c: f64) -> Self {
        let mut e = Self::new();
        e.add(v, c);
        e
    }

    pub fn add(&mut self, v: VarId, c: f64) -> &mut Self {
        if c != 0.0 {
            *self.terms.entry(v).or_insert(0.0) += c;
        }
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    /// `self += scale * other`
    pub fn add_scaled(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        if scale == 0.0 {
            return self;
        }
        for (v, c) in &other.terms {
            self.add(*v, scale * c);
        }
        self.constant += scale * other.constant;
        self
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, f64)> + '_ {
        self.terms
            .iter()
            .filter(|(_, c)| **c != 0.0)
            .map(|(v, c)| (*v, *c))
    }

    pub fn is_empty(&self) -> bool {
        self.terms().next().is_none()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.constant + self.terms().map(|(v, c)| c * x[v.0]).sum::<f64>()
    }
}

/// A deterministic mixed-binary linear program `min c'x + offset` over named
/// variables and rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    pub name: String,
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    pub objective: Vec<(VarId, f64)>,
    pub objective_offset: f64,
    #[serde(skip)]
    index: HashMap<String, VarId>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Adds a variable. Binary variables always get bounds `[0, 1]`.
    ///
    /// Panics on a duplicate name: names are generated by this crate and a
    /// clash is a programming error.
    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let name = name.into();
        let id = VarId(self.vars.len());
        let (lower, upper) = match kind {
            VarKind::Binary => (0.0, 1.0),
            VarKind::Continuous => (lower, upper),
        };
        let prev = self.index.insert(name.clone(), id);
        assert!(prev.is_none(), "duplicate variable name {name}");
        self.vars.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        id
    }

    pub fn continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    pub fn free(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, VarKind::Continuous, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    /// Adds `expr (sense) rhs`; the expression constant is moved to the right.
    pub fn add_row(&mut self, name: impl Into<String>, expr: &LinExpr, sense: Sense, rhs: f64) -> usize {
        let terms: Vec<(VarId, f64)> = expr.terms().collect();
        self.rows.push(Row {
            name: name.into(),
            terms,
            sense,
            rhs: rhs - expr.constant_part(),
        });
        self.rows.len() - 1
    }

    pub fn set_objective(&mut self, expr: &LinExpr) {
        self.objective = expr.terms().collect();
        self.objective_offset = expr.constant_part();
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        if self.index.len() != self.vars.len() {
            // deserialized models have an empty index
            return self.vars.iter().position(|v| v.name == name).map(VarId);
        }
        self.index.get(name).copied()
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn var_mut(&mut self, id: VarId) -> &mut Variable {
        &mut self.vars[id.0]
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.terms.len()).sum()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().map(|(v, c)| c * x[v.0]).sum::<f64>()
    }

    /// Largest bound or row violation of `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = self
            .vars
            .iter()
            .zip(x)
            .map(|(v, &xv)| (v.lower - xv).max(xv - v.upper))
            .fold(0.0_f64, f64::max);
        self.rows.iter().map(|r| r.violation(x)).fold(bounds, f64::max)
    }

    pub fn validate(&self) -> Result<(), MilpError> {
        let n = self.vars.len();
        let bad = |msg: String| Err(MilpError::InvalidModel(msg));
        for v in &self.vars {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return bad(format!("variable {} has invalid bounds [{}, {}]", v.name, v.lower, v.upper));
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return bad(format!("binary {} has bounds outside [0, 1]", v.name));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return bad(format!("row {} has non-finite rhs", r.name));
            }
            for (v, c) in &r.terms {
                if v.0 >= n {
                    return bad(format!("row {} references undeclared variable {}", r.name, v.0));
                }
                if !c.is_finite() {
                    return bad(format!("row {} has non-finite coefficient", r.name));
                }
            }
        }
        for (v, c) in &self.objective {
            if v.0 >= n || !c.is_finite() {
                return bad("objective references an undeclared variable or non-finite cost".into());
            }
        }
        Ok(())
    }

    pub fn rebuild_index(&mut self) {
        self.index = self
            .vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), VarId(i)))
            .collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_bounds_forced() {
        let mut m = MilpModel::new("t");
        let z = m.add_var("z", VarKind::Binary, -5.0, 7.0);
        assert_eq!((m.var(z).lower, m.var(z).upper), (0.0, 1.0));
    }

    #[test]
    fn row_constant_moves_to_rhs() {
        let mut m = MilpModel::new("t");
        let x = m.free("x");
        let mut e = LinExpr::term(x, 2.0);
        e.add_constant(3.0);
        m.add_row("r", &e, Sense::Le, 10.0);
        assert_eq!(m.rows[0].rhs, 7.0);
        assert_eq!(m.rows[0].terms, vec![(x, 2.0)]);
    }

    #[test]
    fn duplicate_terms_merge() {
        let mut e = LinExpr::new();
        let v = VarId(0);
        e.add(v, 1.0).add(v, 2.5).add(VarId(1), 1.0).add(VarId(1), -1.0);
        let t: Vec<_> = e.terms().collect();
        assert_eq!(t, vec![(v, 3.5)]);
    }

    #[test]
    fn validate_rejects_nan() {
        let mut m = MilpModel::new("t");
        let x = m.free("x");
        m.add_row("r", &LinExpr::term(x, f64::NAN), Sense::Le, 1.0);
        assert!(m.validate().is_err());
    }
}
