use super::artifacts::{DualFamily, ReformulationArtifacts};
use super::rules::PolicyVars;
use super::{ensure_valid, Linearizer, ReformulationConfig, ReformulationError};
use crate::milp::{LinExpr, MilpModel, Sense, VarId};
use crate::problem::{as_two_stage, MultistageProblem};
use crate::uncertainty::build_lifted_vertex_set;

/// Two-stage counterpart. Per robust row `n`: multipliers `mu[n]` on the set
/// rows, epigraph variables `rho[n]` per parameter, one aggregate row and one
/// row per lifted vertex. Per adjustable binary: two further dual systems
/// keeping the rule inside `[0, 1]`.
pub fn dualize_two_stage(p: &MultistageProblem, cfg: &ReformulationConfig) -> Result<(MilpModel, ReformulationArtifacts), ReformulationError> {
    ensure_valid(p)?;
    let view = as_two_stage(p)?;
    let info = cfg.info_for(p);
    let mut model = MilpModel::new(format!("{} two-stage counterpart", p.meta.name));
    let x1: Vec<VarId> = (0..view.p).map(|c| model.free(format!("x[1,{}]", c + 1))).collect();
    let y1: Vec<VarId> = (0..view.q).map(|q| model.binary(format!("y[1,{}]", q + 1))).collect();
    let rules = PolicyVars::create(&mut model, p, &info, cfg.recourse);
    let sv = rules.stage(2).clone();
    let verts = build_lifted_vertex_set(&p.uncertainty, &p.breakpoints, 2)?;
    let mut lin = Linearizer::new();
    let mut families = Vec::new();

    for (n, b) in view.first.b.iter().enumerate() {
        let mut e = LinExpr::new();
        for (c, &a) in view.first.a[n].iter().enumerate() {
            e.add(x1[c], a);
        }
        for (q, &d) in view.first.d[n].iter().enumerate() {
            e.add(y1[q], d);
        }
        model.add_row(format!("first[{}]", n + 1), &e, Sense::Le, *b);
    }

    let kk = view.k();
    let mm = view.w.len();
    let u_terms: Vec<Vec<(usize, f64)>> = view
        .u
        .iter()
        .map(|r| r.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(q, &c)| (q, c)).collect())
        .collect();
    let m_mu = cfg.big_m.for_family("mu");

    let mut mu_all = Vec::new();
    let mut rho_all = Vec::new();
    for (n, row) in view.rows.iter().enumerate() {
        let tag = n + 1;
        let mu: Vec<VarId> = (0..mm)
            .map(|m| model.continuous(format!("mu[{tag},{}]", m + 1), 0.0, f64::INFINITY))
            .collect();
        let rho: Vec<VarId> = (0..kk).map(|k| model.free(format!("rho[{tag},{}]", view.param(k)))).collect();

        let mut e = LinExpr::new();
        for &r in &rho {
            e.add(r, 1.0);
        }
        for m in 0..mm {
            for &(q, u) in &u_terms[m] {
                lin.bound(&mut model, mu[m], "mu", m_mu);
                let v = lin.product(&mut model, mu[m], y1[q])?;
                e.add(v, u);
            }
        }
        model.add_row(format!("agg[{tag}]"), &e, Sense::Le, 0.0);

        for (k, pv) in verts.params.iter().enumerate() {
            let pid = pv.param;
            let block = sv.block(pid);
            let nvert = if pv.is_constant() { 1 } else { pv.vertices.len() };
            for (l, v) in pv.vertices.iter().take(nvert).enumerate() {
                let mut e = LinExpr::new();
                for (c, &a) in row.a[k].iter().enumerate() {
                    e.add(x1[c], a * v.v);
                }
                for (q, &d) in row.d[k].iter().enumerate() {
                    e.add(y1[q], d * v.v);
                }
                e.add_constant(-row.b[k] * v.v);
                for m in 0..mm {
                    let w = view.w[m][k];
                    if w != 0.0 {
                        e.add(mu[m], -w * v.v);
                    }
                }
                if let Some(b) = block {
                    b.add_x(&mut e, &row.a_tilde, v, 1.0);
                    b.add_y(&mut e, &row.d_tilde, v, 1.0);
                }
                e.add(rho[k], -1.0);
                model.add_row(format!("vtx[{tag},{pid},{}]", l + 1), &e, Sense::Le, 0.0);
            }
        }
        mu_all.extend(mu);
        rho_all.extend(rho);
    }
    let nn = view.rows.len();
    families.push(DualFamily::new("mu", 2, vec![nn, mm], true, mu_all));
    families.push(DualFamily::new("rho", 2, vec![nn, kk], false, rho_all));

    if !sv.constant_only && view.q2 > 0 {
        for (side, lower) in [("lo", true), ("hi", false)] {
            let psi_name = format!("psi_{side}");
            let m_psi = cfg.big_m.for_family(&psi_name);
            let mut psi_all = Vec::new();
            let mut omega_all = Vec::new();
            for q in 0..view.q2 {
                let tag = q + 1;
                let psi: Vec<VarId> = (0..mm)
                    .map(|m| model.continuous(format!("{psi_name}[{tag},{}]", m + 1), 0.0, f64::INFINITY))
                    .collect();
                let omega: Vec<VarId> = (0..kk)
                    .map(|k| model.free(format!("omega_{side}[{tag},{}]", view.param(k))))
                    .collect();
                let mut e = LinExpr::new();
                for &o in &omega {
                    e.add(o, 1.0);
                }
                for m in 0..mm {
                    for &(q1, u) in &u_terms[m] {
                        lin.bound(&mut model, psi[m], &psi_name, m_psi);
                        let v = lin.product(&mut model, psi[m], y1[q1])?;
                        e.add(v, if lower { -u } else { u });
                    }
                }
                if lower {
                    model.add_row(format!("int_lo_agg[{tag}]"), &e, Sense::Ge, 0.0);
                } else {
                    model.add_row(format!("int_hi_agg[{tag}]"), &e, Sense::Le, 1.0);
                }
                for (k, pv) in verts.params.iter().enumerate() {
                    let pid = pv.param;
                    let nvert = if pv.is_constant() { 1 } else { pv.vertices.len() };
                    for (l, v) in pv.vertices.iter().take(nvert).enumerate() {
                        let mut e = LinExpr::new();
                        if let Some(b) = sv.block(pid) {
                            b.add_y_single(&mut e, q, v, 1.0);
                        }
                        e.add(omega[k], -1.0);
                        let s = if lower { 1.0 } else { -1.0 };
                        for m in 0..mm {
                            let w = view.w[m][k];
                            if w != 0.0 {
                                e.add(psi[m], s * w * v.v);
                            }
                        }
                        let name = format!("int_{side}_vtx[{tag},{pid},{}]", l + 1);
                        if lower {
                            model.add_row(name, &e, Sense::Ge, 0.0);
                        } else {
                            model.add_row(name, &e, Sense::Le, 0.0);
                        }
                    }
                }
                psi_all.extend(psi);
                omega_all.extend(omega);
            }
            families.push(DualFamily::new(&psi_name, 2, vec![view.q2, mm], true, psi_all));
            families.push(DualFamily::new(&format!("omega_{side}"), 2, vec![view.q2, kk], false, omega_all));
        }
    }

    model.set_objective(&LinExpr::term(x1[0], 1.0));
    let art = ReformulationArtifacts::new(p, "two-stage", cfg, info, x1, y1, rules, families, lin);
    Ok((model, art))
}
