use serde::{Deserialize, Serialize};

use super::StudyError;
use crate::policy::InfoStructure;
use crate::problem::{MultistageProblem, ParamId, ProblemBuilder, RowTerms, StageSpec};
use crate::uncertainty::Support;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningUnit {
    /// Variable production cost.
    pub alpha: f64,
    /// Fixed operating cost per period.
    pub beta: f64,
    pub c_min: f64,
    pub c_max: f64,
    /// Upgrade cost as a multiple of `gamma_bar`.
    pub gamma_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningPeriod {
    /// Inventory holding cost.
    pub eta: f64,
    /// Purchase cost.
    pub theta: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub tau: f64,
    /// Largest shortfall per unit when upgraded.
    pub c_hat_max_1: Vec<f64>,
    /// Largest shortfall per unit when not upgraded.
    pub c_hat_max_2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningData {
    pub name: String,
    #[serde(default)]
    pub cost_unit: String,
    pub units: Vec<PlanningUnit>,
    pub periods: Vec<PlanningPeriod>,
    pub s_max: f64,
    #[serde(default)]
    pub s_init: f64,
    pub gamma_bar: f64,
    /// Number of periods used; all listed periods when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

impl PlanningData {
    pub fn with_horizon(mut self, t: usize) -> Self {
        self.horizon = Some(t);
        self
    }

    pub fn with_gamma_bar(mut self, g: f64) -> Self {
        self.gamma_bar = g;
        self
    }

    pub fn horizon(&self) -> usize {
        self.horizon.unwrap_or(self.periods.len())
    }

    pub fn gamma(&self, i: usize) -> f64 {
        self.gamma_bar * self.units[i].gamma_scale
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        let ni = self.units.len();
        let tt = self.horizon();
        if ni == 0 || tt == 0 || tt > self.periods.len() {
            return Err(StudyError::Data(format!(
                "need at least one unit and 1..={} periods, got {tt}",
                self.periods.len()
            )));
        }
        for (t, per) in self.periods.iter().take(tt).enumerate() {
            if per.c_hat_max_1.len() != ni || per.c_hat_max_2.len() != ni {
                return Err(StudyError::Data(format!("period {}: shortfall data for {ni} units expected", t + 1)));
            }
            for i in 0..ni {
                if !(0.0 <= per.c_hat_max_1[i] && per.c_hat_max_1[i] < per.c_hat_max_2[i]) {
                    return Err(StudyError::Data(format!(
                        "period {}, unit {}: upgraded shortfall must be below the plain one",
                        t + 1,
                        i + 1
                    )));
                }
            }
            if per.d_min > per.d_max {
                return Err(StudyError::Data(format!("period {}: d_min exceeds d_max", t + 1)));
            }
        }
        Ok(())
    }
}

/// Stage where period `t`'s demand is observed and units are switched on.
fn demand_stage(t: usize) -> usize {
    2 * t
}

/// Stage where period `t`'s shortfalls are observed and production happens.
fn production_stage(t: usize) -> usize {
    2 * t + 1
}

/// Per-stage windows restricting every rule to the current period's data.
pub fn planning_info(periods: usize) -> InfoStructure {
    InfoStructure::per_stage(planning_windows(periods))
}

fn planning_windows(periods: usize) -> Vec<Option<usize>> {
    let mut w = vec![None];
    for _ in 0..periods {
        w.push(Some(0));
        w.push(Some(1));
    }
    w
}

/// Multiperiod planning instance with `2T + 1` stages. Stage 1: epigraph
/// variable and upgrades `z`. Stage `2t`: demand `d_t` observed, operating
/// binaries `y_t` and the products `w_t = z * y_t`. Stage `2t + 1`:
/// shortfalls observed, production `x_t`, purchase `p_t`, inventory `s_t`.
pub fn build_planning_problem(d: &PlanningData) -> Result<MultistageProblem, StudyError> {
    d.validate()?;
    let ni = d.units.len();
    let tt = d.horizon();
    let mut stages = vec![StageSpec {
        continuous: vec!["obj".into()],
        binaries: (1..=ni).map(|i| format!("z{i}")).collect(),
        ..Default::default()
    }];
    for t in 1..=tt {
        let per = &d.periods[t - 1];
        let mut bins: Vec<String> = (1..=ni).map(|i| format!("y{t}_{i}")).collect();
        bins.extend((1..=ni).map(|i| format!("w{t}_{i}")));
        stages.push(StageSpec {
            params: vec![(format!("d{t}"), Support::new(per.d_min, per.d_max))],
            binaries: bins,
            ..Default::default()
        });
        let mut cont: Vec<String> = (1..=ni).map(|i| format!("x{t}_{i}")).collect();
        cont.push(format!("p{t}"));
        cont.push(format!("s{t}"));
        stages.push(StageSpec {
            params: (0..ni)
                .map(|i| (format!("c_hat{t}_{}", i + 1), Support::new(0.0, per.c_hat_max_2[i])))
                .collect(),
            continuous: cont,
            ..Default::default()
        });
    }
    let mut b = ProblemBuilder::new(&d.name, stages);
    b.description(&format!("production planning, {tt} periods, gamma_bar {}", d.gamma_bar));
    b.delta_t(planning_windows(tt));

    let (xp, xs) = (ni, ni + 1);
    for t in 1..=tt {
        let sd = demand_stage(t);
        let sp = production_stage(t);
        let per = &d.periods[t - 1];
        for i in 0..ni {
            let (y, w) = (i, ni + i);
            let k = format!("{t},{}", i + 1);
            b.row(sd, &format!("w_le_z[{k}]"), RowTerms::new().y(sd, w, 1.0).y1(i, -1.0));
            b.row(sd, &format!("w_le_y[{k}]"), RowTerms::new().y(sd, w, 1.0).y(sd, y, -1.0));
            b.row(
                sd,
                &format!("w_ge[{k}]"),
                RowTerms::new().y1(i, 1.0).y(sd, y, 1.0).y(sd, w, -1.0).constant(-1.0),
            );
        }

        let mut bal = RowTerms::new().x(sp, xs, 1.0).x(sp, xp, -1.0).xi(ParamId::new(sd, 1), 1.0);
        if t == 1 {
            bal = bal.constant(-d.s_init);
        } else {
            bal = bal.x(production_stage(t - 1), xs, -1.0);
        }
        for i in 0..ni {
            bal = bal.x(sp, i, -1.0);
        }
        b.row(sp, &format!("balance_le[{t}]"), bal.clone());
        b.row(sp, &format!("balance_ge[{t}]"), bal.negated());
        for (i, u) in d.units.iter().enumerate() {
            let k = format!("{t},{}", i + 1);
            b.row(
                sp,
                &format!("capacity[{k}]"),
                RowTerms::new().x(sp, i, 1.0).xi(ParamId::new(sp, i + 1), 1.0).constant(-u.c_max),
            );
            b.row(sp, &format!("max_out[{k}]"), RowTerms::new().x(sp, i, 1.0).y(sd, i, -u.c_max));
            b.row(sp, &format!("min_out[{k}]"), RowTerms::new().x(sp, i, -1.0).y(sd, i, u.c_min));
            b.row(sp, &format!("x_nonneg[{k}]"), RowTerms::new().x(sp, i, -1.0));
        }
        b.row(sp, &format!("p_nonneg[{t}]"), RowTerms::new().x(sp, xp, -1.0));
        b.row(sp, &format!("s_nonneg[{t}]"), RowTerms::new().x(sp, xs, -1.0));
        b.row(sp, &format!("s_max[{t}]"), RowTerms::new().x(sp, xs, 1.0).constant(-d.s_max));

        let mut budget_u = Vec::new();
        for i in 0..ni {
            let (hi1, hi2) = (per.c_hat_max_1[i], per.c_hat_max_2[i]);
            let u = vec![(sd, i, hi2), (sd, ni + i, hi1 - hi2)];
            budget_u.extend(u.iter().map(|&(s, q, c)| (s, q, per.tau * c)));
            b.set_row(sp, &format!("shortfall_cap[{t},{}]", i + 1), vec![(ParamId::new(sp, i + 1), 1.0)], u);
        }
        let w = (0..ni).map(|i| (ParamId::new(sp, i + 1), 1.0)).collect();
        b.set_row(sp, &format!("budget[{t}]"), w, budget_u);
    }

    let last = production_stage(tt);
    let mut cost = RowTerms::new().x1(0, -1.0);
    for i in 0..ni {
        cost = cost.y1(i, d.gamma(i));
    }
    for t in 1..=tt {
        let per = &d.periods[t - 1];
        let (sd, sp) = (demand_stage(t), production_stage(t));
        for (i, u) in d.units.iter().enumerate() {
            cost = cost.x(sp, i, u.alpha).y(sd, i, u.beta);
        }
        cost = cost.x(sp, xp, per.theta).x(sp, xs, per.eta);
    }
    let c = b.row(last, "cost", cost);
    b.cost_row(c);
    Ok(b.build())
}
