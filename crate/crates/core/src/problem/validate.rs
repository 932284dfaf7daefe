use serde::{Deserialize, Serialize};

use super::{Matrix, MultistageProblem, ParamId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IssueKind {
    Dimension,
    Missing,
    Breakpoint,
    Support,
    Convention,
    Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub kind: IssueKind,
    pub message: String,
}

struct Audit(Vec<ValidationIssue>);

impl Audit {
    fn push(&mut self, kind: IssueKind, message: String) {
        self.0.push(ValidationIssue { kind, message });
    }

    fn vec(&mut self, what: &str, v: &[f64], len: usize) {
        if v.len() != len {
            self.push(IssueKind::Dimension, format!("{what}: length {} != {len}", v.len()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            self.push(IssueKind::Value, format!("{what}: non-finite entry"));
        }
    }

    fn mat(&mut self, what: &str, m: &Matrix, rows: usize, cols: usize) {
        if m.len() != rows {
            self.push(IssueKind::Dimension, format!("{what}: {} rows != {rows}", m.len()));
            return;
        }
        for (k, r) in m.iter().enumerate() {
            if r.len() != cols {
                self.push(IssueKind::Dimension, format!("{what}: row {} has {} columns != {cols}", k + 1, r.len()));
                return;
            }
        }
        if m.iter().flatten().any(|x| !x.is_finite()) {
            self.push(IssueKind::Value, format!("{what}: non-finite entry"));
        }
    }
}

/// Shape and convention audit. An empty list means the instance is
/// well-formed.
pub fn validate_problem(p: &MultistageProblem) -> Vec<ValidationIssue> {
    let mut a = Audit(Vec::new());
    let st = &p.structure;
    let tt = st.num_stages();
    if tt < 2 {
        a.push(IssueKind::Dimension, format!("need at least 2 stages, got {tt}"));
        return a.0;
    }
    if st.k(1) != 1 {
        a.push(IssueKind::Convention, format!("stage 1 must observe exactly the constant parameter, has {}", st.k(1)));
    }
    if st.p(1) == 0 {
        a.push(IssueKind::Convention, "stage 1 needs the epigraph variable".into());
    }

    let n1 = st.n(1);
    a.mat("A1", &p.blocks.first.a, n1, st.p(1));
    a.mat("D1", &p.blocks.first.d, n1, st.q(1));
    a.vec("b1", &p.blocks.first.b, n1);

    if p.blocks.stages.len() != tt - 1 {
        a.push(
            IssueKind::Missing,
            format!("{} stage blocks for {} stages", p.blocks.stages.len(), tt),
        );
    }
    for (k, blk) in p.blocks.stages.iter().enumerate() {
        let t = k + 2;
        if blk.stage != t {
            a.push(IssueKind::Missing, format!("stage block {} labelled {}", t, blk.stage));
            continue;
        }
        if t > tt {
            break;
        }
        let n = st.n(t);
        if blk.params.len() != t {
            a.push(IssueKind::Missing, format!("stage {t}: parameter blocks for {} stages, expected {t}", blk.params.len()));
        }
        for (s0, per) in blk.params.iter().enumerate().take(t) {
            if per.len() != st.k(s0 + 1) {
                a.push(
                    IssueKind::Missing,
                    format!("stage {t}: {} blocks for stage-{} parameters, expected {}", per.len(), s0 + 1, st.k(s0 + 1)),
                );
            }
            for (i0, pb) in per.iter().enumerate() {
                let id = ParamId::new(s0 + 1, i0 + 1);
                a.mat(&format!("A[{t}]{id}"), &pb.a, n, st.p(1));
                a.mat(&format!("D[{t}]{id}"), &pb.d, n, st.q(1));
                a.vec(&format!("b[{t}]{id}"), &pb.b, n);
            }
        }
        if blk.recourse_x.len() != t - 1 || blk.recourse_y.len() != t - 1 {
            a.push(IssueKind::Missing, format!("stage {t}: recourse blocks for stages 2..={t} expected"));
        }
        for (s0, m) in blk.recourse_x.iter().enumerate().take(t - 1) {
            a.mat(&format!("recourse_x[{t}][{}]", s0 + 2), m, n, st.p(s0 + 2));
        }
        for (s0, m) in blk.recourse_y.iter().enumerate().take(t - 1) {
            a.mat(&format!("recourse_y[{t}][{}]", s0 + 2), m, n, st.q(s0 + 2));
        }
    }

    let set = &p.uncertainty;
    if set.support.len() != tt {
        a.push(IssueKind::Support, format!("supports for {} stages, expected {tt}", set.support.len()));
    } else {
        for t in 1..=tt {
            if set.support[t - 1].len() != st.k(t) {
                a.push(
                    IssueKind::Support,
                    format!("stage {t}: {} supports for {} parameters", set.support[t - 1].len(), st.k(t)),
                );
            }
            for (i0, s) in set.support[t - 1].iter().enumerate() {
                if !(s.min.is_finite() && s.max.is_finite()) || s.min > s.max {
                    a.push(IssueKind::Support, format!("support of {} is [{}, {}]", ParamId::new(t, i0 + 1), s.min, s.max));
                }
            }
        }
        if set.support[0].first().map(|s| (s.min, s.max)) != Some((1.0, 1.0)) {
            a.push(IssueKind::Convention, "constant parameter must have support [1, 1]".into());
        }
    }
    let mut seen = vec![false; tt + 1];
    for s in &set.stages {
        if s.stage < 2 || s.stage > tt {
            a.push(IssueKind::Dimension, format!("set rows attached to stage {}", s.stage));
            continue;
        }
        if seen[s.stage] {
            a.push(IssueKind::Dimension, format!("set rows for stage {} given twice", s.stage));
        }
        seen[s.stage] = true;
        let kk: usize = (1..=s.stage).map(|t| st.k(t)).sum();
        let m = s.w.len();
        a.mat(&format!("W[{}]", s.stage), &s.w, m, kk);
        if s.u.len() != s.stage - 1 {
            a.push(
                IssueKind::Missing,
                format!("U[{}]: {} blocks, expected {}", s.stage, s.u.len(), s.stage - 1),
            );
        }
        for (t0, u) in s.u.iter().enumerate().take(s.stage - 1) {
            a.mat(&format!("U[{}][{}]", s.stage, t0 + 1), u, m, st.q(t0 + 1));
        }
    }

    if set.support.len() == tt {
        for msg in p.breakpoints.audit(set) {
            a.push(IssueKind::Breakpoint, msg);
        }
        if !p.breakpoints.get(ParamId::CONSTANT).is_empty() {
            a.push(IssueKind::Breakpoint, "constant parameter cannot have breakpoints".into());
        }
    }

    if let Some(r) = p.meta.cost_row {
        if r.stage < 2 || r.stage > tt || r.row == 0 || r.row > st.n(r.stage) {
            a.push(IssueKind::Dimension, format!("cost row ({}, {}) out of range", r.stage, r.row));
        }
    }
    if let Some(d) = &p.meta.delta_t {
        if d.len() != tt {
            a.push(IssueKind::Dimension, format!("delta_t has {} entries for {tt} stages", d.len()));
        }
    }
    a.0
}
