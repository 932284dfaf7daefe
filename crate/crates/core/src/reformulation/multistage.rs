use super::artifacts::{DualFamily, ReformulationArtifacts};
use super::rules::PolicyVars;
use super::{ensure_valid, Linearizer, ReformulationConfig, ReformulationError};
use crate::milp::{LinExpr, MilpModel, Sense, VarId};
use crate::policy::InfoStructure;
use crate::problem::MultistageProblem;
use crate::uncertainty::{build_lifted_vertex_set, LiftedVertexSet, SetRowRef};

/// Set-row multiplier products contributed by substituting earlier binary
/// rules into the right-hand side of the set: `(row m, binary column, coef)`.
type Subst = Vec<(usize, VarId, f64)>;

struct StageContext<'a> {
    set_rows: Vec<SetRowRef<'a>>,
    verts: LiftedVertexSet,
    /// `subst[k][l]` for parameter position `k` and vertex `l`.
    subst: Vec<Vec<Subst>>,
    /// `(row m, q, coef)` right-hand-side terms on first-stage binaries.
    u1: Vec<(usize, usize, f64)>,
}

impl<'a> StageContext<'a> {
    fn build(p: &'a MultistageProblem, rules: &PolicyVars, info: &InfoStructure, t: usize) -> Result<Self, ReformulationError> {
        let set_rows = p.uncertainty.rows_upto(t);
        let verts = build_lifted_vertex_set(&p.uncertainty, &p.breakpoints, t)?;
        let mut u1 = Vec::new();
        for (m, r) in set_rows.iter().enumerate() {
            for (s, q, c) in r.u_terms() {
                if s == 1 {
                    u1.push((m, q, c));
                }
            }
        }
        let mut subst = Vec::new();
        for pv in &verts.params {
            let pid = pv.param;
            let mut per_vertex = Vec::new();
            for v in &pv.vertices {
                let mut terms = Vec::new();
                for s in 2..t {
                    if !info.admits(s, pid) {
                        continue;
                    }
                    let Some(b) = rules.stage(s).block(pid) else { continue };
                    if !b.has_y() {
                        continue;
                    }
                    for (m, r) in set_rows.iter().enumerate() {
                        for (s2, q, c) in r.u_terms() {
                            if s2 != s {
                                continue;
                            }
                            for (j, &h) in v.hat.iter().enumerate() {
                                if h == 0.0 {
                                    continue;
                                }
                                for (bin, sign) in b.y_parts(q, j) {
                                    terms.push((m, bin, c * h * sign));
                                }
                            }
                        }
                    }
                }
                per_vertex.push(terms);
            }
            subst.push(per_vertex);
        }
        Ok(Self {
            set_rows,
            verts,
            subst,
            u1,
        })
    }

    fn w(&self, m: usize, k: usize) -> f64 {
        self.set_rows[m].w.get(k).copied().unwrap_or(0.0)
    }
}

/// Multistage counterpart. Per stage `t` and robust row `n`: multipliers
/// `phi[t,n]` on every set row active at `t`, epigraph variables `delta[t,n]`
/// per observed parameter, one aggregate row and one row per lifted vertex.
/// Binary rules with non-constant columns get two further dual systems per
/// binary (`theta`, `pi`) keeping them inside `[0, 1]`.
pub fn dualize_multistage(p: &MultistageProblem, cfg: &ReformulationConfig) -> Result<(MilpModel, ReformulationArtifacts), ReformulationError> {
    ensure_valid(p)?;
    let st = &p.structure;
    let tt = st.num_stages();
    let info = cfg.info_for(p);
    let mut model = MilpModel::new(format!("{} multistage counterpart", p.meta.name));
    let x1: Vec<VarId> = (0..st.p(1)).map(|c| model.free(format!("x[1,{}]", c + 1))).collect();
    let y1: Vec<VarId> = (0..st.q(1)).map(|q| model.binary(format!("y[1,{}]", q + 1))).collect();
    let rules = PolicyVars::create(&mut model, p, &info, cfg.recourse);
    let mut lin = Linearizer::new();
    let mut families = Vec::new();

    let first = &p.blocks.first;
    for (n, b) in first.b.iter().enumerate() {
        let mut e = LinExpr::new();
        for (c, &a) in first.a[n].iter().enumerate() {
            e.add(x1[c], a);
        }
        for (q, &d) in first.d[n].iter().enumerate() {
            e.add(y1[q], d);
        }
        model.add_row(format!("first[{}]", n + 1), &e, Sense::Le, *b);
    }

    let m_phi = cfg.big_m.for_family("phi");
    for t in 2..=tt {
        let ctx = StageContext::build(p, &rules, &info, t)?;
        let blk = p.stage(t);
        let mm = ctx.set_rows.len();
        let kk = ctx.verts.params.len();
        let mut phi_all = Vec::new();
        let mut delta_all = Vec::new();
        for n in 0..st.n(t) {
            let tag = format!("{t},{}", n + 1);
            let phi: Vec<VarId> = (0..mm)
                .map(|m| model.continuous(format!("phi[{tag},{}]", m + 1), 0.0, f64::INFINITY))
                .collect();
            let delta: Vec<VarId> = ctx
                .verts
                .params
                .iter()
                .map(|pv| model.free(format!("delta[{tag},{}]", pv.param)))
                .collect();

            let mut e = LinExpr::new();
            for &d in &delta {
                e.add(d, 1.0);
            }
            for &(m, q, u) in &ctx.u1 {
                lin.bound(&mut model, phi[m], "phi", m_phi);
                let v = lin.product(&mut model, phi[m], y1[q])?;
                e.add(v, u);
            }
            model.add_row(format!("agg[{tag}]"), &e, Sense::Le, 0.0);

            for (k, pv) in ctx.verts.params.iter().enumerate() {
                let pid = pv.param;
                let pb = blk.param(pid);
                let nvert = if pv.is_constant() { 1 } else { pv.vertices.len() };
                for (l, v) in pv.vertices.iter().take(nvert).enumerate() {
                    let mut e = LinExpr::new();
                    for (c, &a) in pb.a[n].iter().enumerate() {
                        e.add(x1[c], a * v.v);
                    }
                    for (q, &d) in pb.d[n].iter().enumerate() {
                        e.add(y1[q], d * v.v);
                    }
                    e.add_constant(-pb.b[n] * v.v);
                    for (m, &ph) in phi.iter().enumerate() {
                        let w = ctx.w(m, k);
                        if w != 0.0 {
                            e.add(ph, -w * v.v);
                        }
                    }
                    e.add(delta[k], -1.0);
                    for s in 2..=t {
                        if !info.admits(s, pid) {
                            continue;
                        }
                        if let Some(b) = rules.stage(s).block(pid) {
                            b.add_x(&mut e, &blk.recourse_x[s - 2][n], v, 1.0);
                            b.add_y(&mut e, &blk.recourse_y[s - 2][n], v, 1.0);
                        }
                    }
                    for &(m, bin, c) in &ctx.subst[k][l] {
                        lin.bound(&mut model, phi[m], "phi", m_phi);
                        let aux = lin.product(&mut model, phi[m], bin)?;
                        e.add(aux, c);
                    }
                    model.add_row(format!("vtx[{tag},{pid},{}]", l + 1), &e, Sense::Le, 0.0);
                }
            }
            phi_all.extend(phi);
            delta_all.extend(delta);
        }
        families.push(DualFamily::new("phi", t, vec![st.n(t), mm], true, phi_all));
        families.push(DualFamily::new("delta", t, vec![st.n(t), kk], false, delta_all));

        let sv = rules.stage(t);
        if sv.constant_only || st.q(t) == 0 {
            continue;
        }
        for (side, lower) in [("lo", true), ("hi", false)] {
            let theta_name = format!("theta_{side}");
            let m_theta = cfg.big_m.for_family(&theta_name);
            let mut theta_all = Vec::new();
            let mut pi_all = Vec::new();
            for q in 0..st.q(t) {
                let tag = format!("{t},{}", q + 1);
                let theta: Vec<VarId> = (0..mm)
                    .map(|m| model.continuous(format!("{theta_name}[{tag},{}]", m + 1), 0.0, f64::INFINITY))
                    .collect();
                let pi: Vec<VarId> = ctx
                    .verts
                    .params
                    .iter()
                    .map(|pv| model.free(format!("pi_{side}[{tag},{}]", pv.param)))
                    .collect();
                let s = if lower { 1.0 } else { -1.0 };
                let mut e = LinExpr::new();
                for &x in &pi {
                    e.add(x, 1.0);
                }
                for &(m, q1, u) in &ctx.u1 {
                    lin.bound(&mut model, theta[m], &theta_name, m_theta);
                    let v = lin.product(&mut model, theta[m], y1[q1])?;
                    e.add(v, -s * u);
                }
                if lower {
                    model.add_row(format!("int_lo_agg[{tag}]"), &e, Sense::Ge, 0.0);
                } else {
                    model.add_row(format!("int_hi_agg[{tag}]"), &e, Sense::Le, 1.0);
                }
                for (k, pv) in ctx.verts.params.iter().enumerate() {
                    let pid = pv.param;
                    let nvert = if pv.is_constant() { 1 } else { pv.vertices.len() };
                    for (l, v) in pv.vertices.iter().take(nvert).enumerate() {
                        let mut e = LinExpr::new();
                        if let Some(b) = sv.block(pid) {
                            b.add_y_single(&mut e, q, v, 1.0);
                        }
                        e.add(pi[k], -1.0);
                        for (m, &th) in theta.iter().enumerate() {
                            let w = ctx.w(m, k);
                            if w != 0.0 {
                                e.add(th, s * w * v.v);
                            }
                        }
                        for &(m, bin, c) in &ctx.subst[k][l] {
                            lin.bound(&mut model, theta[m], &theta_name, m_theta);
                            let aux = lin.product(&mut model, theta[m], bin)?;
                            e.add(aux, -s * c);
                        }
                        let name = format!("int_{side}_vtx[{tag},{pid},{}]", l + 1);
                        if lower {
                            model.add_row(name, &e, Sense::Ge, 0.0);
                        } else {
                            model.add_row(name, &e, Sense::Le, 0.0);
                        }
                    }
                }
                theta_all.extend(theta);
                pi_all.extend(pi);
            }
            families.push(DualFamily::new(&theta_name, t, vec![st.q(t), mm], true, theta_all));
            families.push(DualFamily::new(&format!("pi_{side}"), t, vec![st.q(t), kk], false, pi_all));
        }
    }

    model.set_objective(&LinExpr::term(x1[0], 1.0));
    let art = ReformulationArtifacts::new(p, "multistage", cfg, info, x1, y1, rules, families, lin);
    Ok((model, art))
}
