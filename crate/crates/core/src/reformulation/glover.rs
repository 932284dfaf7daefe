use std::collections::HashMap;

use super::ReformulationError;
use crate::milp::{BoundRegistry, BoundedDual, LinExpr, MilpModel, ProductLink, Sense, VarId, VarKind};

/// Replaces `w * z` with a new variable `v`, for `w` in `[0, m]` and binary
/// `z`:
///
/// ```text
/// v <= m z,   v <= w,   v >= w - m (1 - z),   0 <= v <= m
/// ```
pub fn glover_linearize(model: &mut MilpModel, w: VarId, z: VarId, m: f64, name: &str) -> Result<(VarId, ProductLink), ReformulationError> {
    let wv = model.var(w);
    if !(m.is_finite() && m >= 0.0) || wv.lower != 0.0 || wv.upper > m {
        return Err(ReformulationError::MissingBound(wv.name.clone()));
    }
    if model.var(z).kind != VarKind::Binary {
        return Err(ReformulationError::MissingBound(format!("{} is not binary", model.var(z).name)));
    }
    let v = model.continuous(name, 0.0, m);
    let mut e = LinExpr::term(v, 1.0);
    e.add(z, -m);
    let upper_row = model.add_row(format!("gl_z[{name}]"), &e, Sense::Le, 0.0);
    let mut e = LinExpr::term(v, 1.0);
    e.add(w, -1.0);
    model.add_row(format!("gl_w[{name}]"), &e, Sense::Le, 0.0);
    let mut e = LinExpr::term(v, 1.0);
    e.add(w, -1.0).add(z, -m);
    let lower_row = model.add_row(format!("gl_lo[{name}]"), &e, Sense::Ge, -m);
    Ok((
        v,
        ProductLink {
            aux: v,
            binary: z,
            upper_row,
            lower_row,
        },
    ))
}

/// Bounds dual variables on first use and shares one auxiliary variable per
/// (dual, binary) pair.
#[derive(Debug, Default)]
pub struct Linearizer {
    cache: HashMap<(VarId, VarId), VarId>,
    index: HashMap<VarId, usize>,
    pub registry: BoundRegistry,
}

impl Linearizer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Gives `dual` the upper bound `m` and records it.
    pub fn bound(&mut self, model: &mut MilpModel, dual: VarId, family: &str, m: f64) {
        if self.index.contains_key(&dual) {
            return;
        }
        model.var_mut(dual).upper = m;
        self.index.insert(dual, self.registry.duals.len());
        self.registry.duals.push(BoundedDual {
            var: dual,
            family: family.to_string(),
            big_m: m,
            products: Vec::new(),
        });
    }

    pub fn is_bounded(&self, dual: VarId) -> bool {
        self.index.contains_key(&dual)
    }

    /// The variable standing for `dual * binary`.
    pub fn product(&mut self, model: &mut MilpModel, dual: VarId, binary: VarId) -> Result<VarId, ReformulationError> {
        if let Some(&v) = self.cache.get(&(dual, binary)) {
            return Ok(v);
        }
        let k = *self
            .index
            .get(&dual)
            .ok_or_else(|| ReformulationError::MissingBound(model.var(dual).name.clone()))?;
        let m = self.registry.duals[k].big_m;
        let name = format!("{}*{}", model.var(dual).name, model.var(binary).name);
        let (v, link) = glover_linearize(model, dual, binary, m, &name)?;
        self.registry.duals[k].products.push(link);
        self.cache.insert((dual, binary), v);
        Ok(v)
    }

    pub fn num_products(&self) -> usize {
        self.cache.len()
    }
}
