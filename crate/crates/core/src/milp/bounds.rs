use serde::{Deserialize, Serialize};

use super::model::{MilpModel, VarId};
use super::{MilpBackend, MilpError, SolveOptions, SolveReport};

/// One linearized product `aux = dual * binary` and the two rows whose
/// coefficients depend on the dual's big-M.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductLink {
    pub aux: VarId,
    pub binary: VarId,
    /// `aux - M binary <= 0`
    pub upper_row: usize,
    /// `aux - dual - M binary >= -M`
    pub lower_row: usize,
}

/// A nonnegative dual variable with an artificial upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedDual {
    pub var: VarId,
    pub family: String,
    pub big_m: f64,
    pub products: Vec<ProductLink>,
}

/// Every dual variable that received a big-M, with the rows that use it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundRegistry {
    pub duals: Vec<BoundedDual>,
}

impl BoundRegistry {
    /// Names of duals whose value is within `frac` of their bound.
    pub fn boundary_active(&self, model: &MilpModel, x: &[f64], frac: f64) -> Vec<String> {
        self.duals
            .iter()
            .filter(|d| d.big_m > 0.0 && x[d.var.0] >= (1.0 - frac) * d.big_m)
            .map(|d| model.var(d.var).name.clone())
            .collect()
    }

    /// Rewrites the big-M of one dual everywhere it appears.
    pub fn set_big_m(&mut self, model: &mut MilpModel, k: usize, m: f64) {
        let d = &mut self.duals[k];
        d.big_m = m;
        model.var_mut(d.var).upper = m;
        for p in &d.products {
            model.var_mut(p.aux).upper = m;
            set_coef(model, p.upper_row, p.binary, -m);
            set_coef(model, p.lower_row, p.binary, -m);
            model.rows[p.lower_row].rhs = -m;
        }
    }
}

fn set_coef(model: &mut MilpModel, row: usize, v: VarId, c: f64) {
    let r = &mut model.rows[row];
    match r.terms.iter_mut().find(|(id, _)| *id == v) {
        Some(t) => t.1 = c,
        None => r.terms.push((v, c)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundRule {
    /// `M = value`
    Exact,
    /// `M = 2 value`
    Double,
    /// `M = 2 value + 0.01`
    DoublePlus,
}

impl BoundRule {
    pub fn apply(self, value: f64) -> f64 {
        let v = value.max(0.0);
        match self {
            BoundRule::Exact => v,
            BoundRule::Double => 2.0 * v,
            BoundRule::DoublePlus => 2.0 * v + 0.01,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BoundRule::Exact => "M=L",
            BoundRule::Double => "M=2L",
            BoundRule::DoublePlus => "M=2L+0.01",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" | "M=L" | "lambda" => Some(BoundRule::Exact),
            "double" | "M=2L" | "2lambda" => Some(BoundRule::Double),
            "double-plus" | "M=2L+0.01" | "2lambda+0.01" => Some(BoundRule::DoublePlus),
            _ => None,
        }
    }
}

/// Replaces every registered big-M with a value derived from the incumbent's
/// dual values and re-solves. Tiny negative values from solver tolerances are
/// treated as zero.
pub fn bound_experiment(
    model: &MilpModel,
    registry: &BoundRegistry,
    incumbent: &[f64],
    rule: BoundRule,
    backend: &dyn MilpBackend,
    opts: &SolveOptions,
) -> Result<(SolveReport, MilpModel, BoundRegistry), MilpError> {
    let mut m = model.clone();
    let mut reg = registry.clone();
    for k in 0..reg.duals.len() {
        let mut value = incumbent[reg.duals[k].var.0];
        if value < 1e-9 {
            value = 0.0;
        }
        reg.set_big_m(&mut m, k, rule.apply(value));
    }
    let mut report = backend.solve(&m, opts)?;
    if let Some(x) = report.solution.as_ref() {
        report.boundary_active = reg.boundary_active(&m, x, 0.01);
    }
    Ok((report, m, reg))
}

#[cfg(test)]
mod tests {
    use super::super::model::{LinExpr, Sense};
    use super::*;

    fn linked() -> (MilpModel, BoundRegistry) {
        let mut m = MilpModel::new("b");
        let w = m.continuous("w", 0.0, 100.0);
        let z = m.binary("z");
        let v = m.continuous("v", 0.0, 100.0);
        let mut e = LinExpr::term(v, 1.0);
        e.add(z, -100.0);
        let r1 = m.add_row("g1", &e, Sense::Le, 0.0);
        let mut e = LinExpr::term(v, 1.0);
        e.add(w, -1.0);
        m.add_row("g2", &e, Sense::Le, 0.0);
        let mut e = LinExpr::term(v, 1.0);
        e.add(w, -1.0).add(z, -100.0);
        let r3 = m.add_row("g3", &e, Sense::Ge, -100.0);
        let reg = BoundRegistry {
            duals: vec![BoundedDual {
                var: w,
                family: "mu".into(),
                big_m: 100.0,
                products: vec![ProductLink {
                    aux: v,
                    binary: z,
                    upper_row: r1,
                    lower_row: r3,
                }],
            }],
        };
        (m, reg)
    }

    #[test]
    fn rewrite_updates_rows_and_bounds() {
        let (mut m, mut reg) = linked();
        reg.set_big_m(&mut m, 0, 7.0);
        assert_eq!(m.vars[0].upper, 7.0);
        assert_eq!(m.vars[2].upper, 7.0);
        assert!(m.rows[0].terms.contains(&(VarId(1), -7.0)));
        assert!(m.rows[2].terms.contains(&(VarId(1), -7.0)));
        assert_eq!(m.rows[2].rhs, -7.0);
    }

    #[test]
    fn zero_duals_get_fixed() {
        let (m, reg) = linked();
        let x = vec![0.0, 1.0, 0.0];
        let mut m2 = m.clone();
        let mut reg2 = reg.clone();
        reg2.set_big_m(&mut m2, 0, BoundRule::Exact.apply(x[0]));
        assert_eq!((m2.vars[0].lower, m2.vars[0].upper), (0.0, 0.0));
    }

    #[test]
    fn rules() {
        assert_eq!(BoundRule::Exact.apply(3.0), 3.0);
        assert_eq!(BoundRule::Double.apply(3.0), 6.0);
        assert_eq!(BoundRule::DoublePlus.apply(0.0), 0.01);
        assert_eq!(BoundRule::Exact.apply(-1e-12), 0.0);
    }
}
