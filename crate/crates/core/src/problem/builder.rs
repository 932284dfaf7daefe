use super::{zeros, Meta, MultistageProblem, ParamId, RowRef, StageDims, StageNames, StageStructure};
use crate::uncertainty::{SetStage, Support};

/// Sparse left-hand side of a robust row `lhs <= 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RowTerms {
    /// `coef * xi_p * x_1[c]`
    pub x1: Vec<(ParamId, usize, f64)>,
    /// `coef * xi_p * y_1[q]`
    pub y1: Vec<(ParamId, usize, f64)>,
    /// `coef * xi_p`; the constant parameter carries plain constants.
    pub xi: Vec<(ParamId, f64)>,
    /// `coef * x_s[c]` as `(s, c, coef)`
    pub x: Vec<(usize, usize, f64)>,
    pub y: Vec<(usize, usize, f64)>,
}

impl RowTerms {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn x1(mut self, c: usize, v: f64) -> Self {
        self.x1.push((ParamId::CONSTANT, c, v));
        self
    }

    pub fn x1_times(mut self, p: ParamId, c: usize, v: f64) -> Self {
        self.x1.push((p, c, v));
        self
    }

    pub fn y1(mut self, q: usize, v: f64) -> Self {
        self.y1.push((ParamId::CONSTANT, q, v));
        self
    }

    pub fn y1_times(mut self, p: ParamId, q: usize, v: f64) -> Self {
        self.y1.push((p, q, v));
        self
    }

    pub fn xi(mut self, p: ParamId, v: f64) -> Self {
        self.xi.push((p, v));
        self
    }

    pub fn constant(self, v: f64) -> Self {
        self.xi(ParamId::CONSTANT, v)
    }

    pub fn x(mut self, s: usize, c: usize, v: f64) -> Self {
        self.x.push((s, c, v));
        self
    }

    pub fn y(mut self, s: usize, q: usize, v: f64) -> Self {
        self.y.push((s, q, v));
        self
    }

    /// `-lhs`, for writing `lhs >= 0` or the other half of an equality.
    pub fn negated(&self) -> Self {
        let neg3 = |v: &[(usize, usize, f64)]| v.iter().map(|&(a, b, c)| (a, b, -c)).collect();
        Self {
            x1: self.x1.iter().map(|&(p, c, v)| (p, c, -v)).collect(),
            y1: self.y1.iter().map(|&(p, c, v)| (p, c, -v)).collect(),
            xi: self.xi.iter().map(|&(p, v)| (p, -v)).collect(),
            x: neg3(&self.x),
            y: neg3(&self.y),
        }
    }
}

/// Parameters and decisions introduced at one stage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageSpec {
    pub params: Vec<(String, Support)>,
    pub continuous: Vec<String>,
    pub binaries: Vec<String>,
}

struct SetRowSpec {
    name: String,
    w: Vec<(ParamId, f64)>,
    u: Vec<(usize, usize, f64)>,
}

/// Accumulates sparse rows and produces a dense [`MultistageProblem`].
pub struct ProblemBuilder {
    name: String,
    stages: Vec<StageSpec>,
    first_rows: Vec<(String, RowTerms)>,
    rows: Vec<Vec<(String, RowTerms)>>,
    set_rows: Vec<Vec<SetRowSpec>>,
    cost_row: Option<RowRef>,
    delta_t: Option<Vec<Option<usize>>>,
    description: String,
}

impl ProblemBuilder {
    /// `stages[0]` describes stage 1; its parameter list must be empty since
    /// the constant is added automatically.
    pub fn new(name: &str, stages: Vec<StageSpec>) -> Self {
        let t = stages.len();
        Self {
            name: name.to_string(),
            stages,
            first_rows: Vec::new(),
            rows: (0..t).map(|_| Vec::new()).collect(),
            set_rows: (0..t).map(|_| Vec::new()).collect(),
            cost_row: None,
            delta_t: None,
            description: String::new(),
        }
    }

    pub fn description(&mut self, d: &str) -> &mut Self {
        self.description = d.to_string();
        self
    }

    pub fn first_row(&mut self, name: &str, terms: RowTerms) -> &mut Self {
        self.first_rows.push((name.to_string(), terms));
        self
    }

    /// Adds `lhs <= 0` to stage `t` and returns its 1-based reference.
    pub fn row(&mut self, t: usize, name: &str, terms: RowTerms) -> RowRef {
        self.rows[t - 1].push((name.to_string(), terms));
        RowRef {
            stage: t,
            row: self.rows[t - 1].len(),
        }
    }

    /// Adds the set row `sum w_p xi_p <= sum u y_s[q]` to the set of stage `t`.
    pub fn set_row(&mut self, t: usize, name: &str, w: Vec<(ParamId, f64)>, u: Vec<(usize, usize, f64)>) -> &mut Self {
        self.set_rows[t - 1].push(SetRowSpec {
            name: name.to_string(),
            w,
            u,
        });
        self
    }

    pub fn cost_row(&mut self, r: RowRef) -> &mut Self {
        self.cost_row = Some(r);
        self
    }

    pub fn delta_t(&mut self, d: Vec<Option<usize>>) -> &mut Self {
        self.delta_t = Some(d);
        self
    }

    pub fn build(self) -> MultistageProblem {
        let tt = self.stages.len();
        let dims: Vec<StageDims> = self
            .stages
            .iter()
            .enumerate()
            .map(|(s, spec)| StageDims {
                params: if s == 0 { 1 } else { spec.params.len() },
                continuous: spec.continuous.len(),
                binaries: spec.binaries.len(),
                rows: if s == 0 { self.first_rows.len() } else { self.rows[s].len() },
            })
            .collect();
        let structure = StageStructure { stages: dims };
        let mut supports = vec![vec![Support::new(1.0, 1.0)]];
        supports.extend(self.stages[1..].iter().map(|s| s.params.iter().map(|p| p.1).collect()));
        let mut p = MultistageProblem::empty(&self.name, structure, supports);

        for (n, (_, r)) in self.first_rows.iter().enumerate() {
            let f = &mut p.blocks.first;
            for &(_, c, v) in &r.x1 {
                f.a[n][c] += v;
            }
            for &(_, q, v) in &r.y1 {
                f.d[n][q] += v;
            }
            for &(_, v) in &r.xi {
                f.b[n] -= v;
            }
        }
        for t in 2..=tt {
            let blk = p.stage_mut(t);
            for (n, (name, r)) in self.rows[t - 1].iter().enumerate() {
                blk.row_names.push(name.clone());
                for &(pid, c, v) in &r.x1 {
                    blk.param_mut(pid).a[n][c] += v;
                }
                for &(pid, q, v) in &r.y1 {
                    blk.param_mut(pid).d[n][q] += v;
                }
                for &(pid, v) in &r.xi {
                    blk.param_mut(pid).b[n] -= v;
                }
                for &(s, c, v) in &r.x {
                    blk.recourse_x[s - 2][n][c] += v;
                }
                for &(s, q, v) in &r.y {
                    blk.recourse_y[s - 2][n][q] += v;
                }
            }
        }
        for t in 2..=tt {
            let rows = &self.set_rows[t - 1];
            if rows.is_empty() {
                continue;
            }
            let cols = p.structure.params_upto(t);
            let mut w = zeros(rows.len(), cols.len());
            let mut u: Vec<_> = (1..t).map(|s| zeros(rows.len(), p.structure.q(s))).collect();
            for (m, r) in rows.iter().enumerate() {
                for &(pid, v) in &r.w {
                    let k = p.uncertainty.position(pid);
                    w[m][k] += v;
                }
                for &(s, q, v) in &r.u {
                    u[s - 1][m][q] += v;
                }
            }
            p.uncertainty.stages.push(SetStage {
                stage: t,
                w,
                u,
                row_names: rows.iter().map(|r| r.name.clone()).collect(),
            });
        }

        p.meta = Meta {
            name: self.name,
            description: self.description,
            cost_row: self.cost_row,
            delta_t: self.delta_t,
            names: self
                .stages
                .iter()
                .enumerate()
                .map(|(s, spec)| StageNames {
                    params: if s == 0 {
                        vec!["1".to_string()]
                    } else {
                        spec.params.iter().map(|p| p.0.clone()).collect()
                    },
                    continuous: spec.continuous.clone(),
                    binaries: spec.binaries.clone(),
                })
                .collect(),
        };
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::validate_problem;

    #[test]
    fn sparse_rows_land_in_blocks() {
        let d = ParamId::new(2, 1);
        let mut b = ProblemBuilder::new(
            "toy",
            vec![
                StageSpec {
                    continuous: vec!["obj".into()],
                    binaries: vec!["z".into()],
                    ..Default::default()
                },
                StageSpec {
                    params: vec![("d".into(), Support::new(1.0, 5.0))],
                    continuous: vec!["x".into()],
                    binaries: vec!["y".into()],
                },
            ],
        );
        // x >= d
        b.row(2, "demand", RowTerms::new().x(2, 0, -1.0).xi(d, 1.0));
        // 3 y + x - obj <= 0
        let c = b.row(2, "cost", RowTerms::new().y(2, 0, 3.0).x(2, 0, 1.0).x1(0, -1.0));
        b.cost_row(c);
        b.set_row(2, "cap", vec![(d, 1.0)], vec![(1, 0, 4.0)]);
        let p = b.build();
        assert!(validate_problem(&p).is_empty(), "{:?}", validate_problem(&p));
        let blk = p.stage(2);
        assert_eq!(blk.param(d).b, vec![-1.0, 0.0]);
        assert_eq!(blk.recourse_x[0], vec![vec![-1.0], vec![1.0]]);
        assert_eq!(blk.param(ParamId::CONSTANT).a[1], vec![-1.0]);
        assert_eq!(p.uncertainty.stages[0].w, vec![vec![0.0, 1.0]]);
        assert_eq!(p.uncertainty.stages[0].u[0], vec![vec![4.0]]);
        assert_eq!(p.meta.cost_row, Some(RowRef { stage: 2, row: 2 }));
        let lhs = p.row_activity(2, 0, &[vec![1.0], vec![4.0]], &[vec![0.0], vec![3.0]], &[vec![0.0], vec![0.0]]);
        assert_eq!(lhs, 1.0);
    }
}
