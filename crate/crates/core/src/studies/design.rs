use serde::{Deserialize, Serialize};

use super::StudyError;
use crate::problem::{MultistageProblem, ParamId, ProblemBuilder, RowTerms, StageSpec};
use crate::uncertainty::Support;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignUnit {
    /// Capital cost.
    pub alpha: f64,
    /// Fixed production cost.
    pub beta: f64,
    /// Variable production cost.
    pub gamma: f64,
    pub c_min: f64,
    pub c_max: f64,
    /// Largest capacity shortfall.
    pub c_hat_max: f64,
}

/// Uncertainty set for the capacity shortfalls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetVariant {
    /// `c_hat <= c_hat_max * z`
    #[default]
    Box,
    /// `sum c_hat <= tau * sum c_hat_max`, independent of the design.
    Fixed,
    /// `sum c_hat <= tau * sum c_hat_max * z` and `c_hat <= c_hat_max * z`.
    DecisionDependent,
}

impl SetVariant {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "box" => Some(Self::Box),
            "fixed" => Some(Self::Fixed),
            "decision-dependent" | "dd" => Some(Self::DecisionDependent),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignCase {
    /// Demand from the smallest minimum capacity up to every unit at its
    /// guaranteed capacity.
    A,
    /// Demand covered by unit 1 alone.
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignData {
    pub name: String,
    #[serde(default)]
    pub cost_unit: String,
    pub units: Vec<DesignUnit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max: Option<f64>,
    #[serde(default = "one")]
    pub tau: f64,
    #[serde(default)]
    pub variant: SetVariant,
}

fn one() -> f64 {
    1.0
}

impl DesignData {
    pub fn with_case(mut self, case: DesignCase) -> Self {
        let (lo, hi) = match case {
            DesignCase::A => (
                self.units.iter().map(|u| u.c_min).fold(f64::INFINITY, f64::min),
                self.units.iter().map(|u| u.c_max - u.c_hat_max).sum(),
            ),
            DesignCase::B => (self.units[0].c_min, self.units[0].c_max - self.units[0].c_hat_max),
        };
        self.d_min = Some(lo);
        self.d_max = Some(hi);
        self
    }

    pub fn with_demand(mut self, lo: f64, hi: f64) -> Self {
        self.d_min = Some(lo);
        self.d_max = Some(hi);
        self
    }

    pub fn with_set(mut self, variant: SetVariant, tau: f64) -> Self {
        self.variant = variant;
        self.tau = tau;
        self
    }

    pub fn demand(&self) -> Result<(f64, f64), StudyError> {
        match (self.d_min, self.d_max) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(StudyError::Data(format!("{}: demand range not set", self.name))),
        }
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        if self.units.is_empty() {
            return Err(StudyError::Data("no units".into()));
        }
        for (i, u) in self.units.iter().enumerate() {
            if u.c_hat_max < 0.0 || u.c_min > u.c_max - u.c_hat_max {
                return Err(StudyError::Data(format!(
                    "unit {}: need 0 <= c_hat_max and c_min <= c_max - c_hat_max",
                    i + 1
                )));
            }
        }
        let (lo, hi) = self.demand()?;
        if lo > hi {
            return Err(StudyError::Data(format!("d_min {lo} exceeds d_max {hi}")));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(StudyError::Data(format!("tau {} outside [0, 1]", self.tau)));
        }
        Ok(())
    }

    /// Parameter of unit `i`'s shortfall (0-based `i`).
    pub fn shortfall_param(i: usize) -> ParamId {
        ParamId::new(2, i + 1)
    }

    pub fn demand_param(&self) -> ParamId {
        ParamId::new(2, self.units.len() + 1)
    }
}

/// Two-stage design instance. Stage 1 holds the epigraph variable and the
/// build decisions `z`; stage 2 observes the shortfalls and the demand and
/// decides production amounts `x` and operating binaries `y`.
pub fn build_design_problem(d: &DesignData) -> Result<MultistageProblem, StudyError> {
    d.validate()?;
    let (d_min, d_max) = d.demand()?;
    let ni = d.units.len();
    let mut stage1 = StageSpec {
        continuous: vec!["obj".into()],
        ..Default::default()
    };
    let mut stage2 = StageSpec::default();
    for (i, u) in d.units.iter().enumerate() {
        stage1.binaries.push(format!("z{}", i + 1));
        stage2.params.push((format!("c_hat{}", i + 1), Support::new(0.0, u.c_hat_max)));
        stage2.continuous.push(format!("x{}", i + 1));
        stage2.binaries.push(format!("y{}", i + 1));
    }
    stage2.params.push(("d".into(), Support::new(d_min, d_max)));
    let mut b = ProblemBuilder::new(&d.name, vec![stage1, stage2]);
    b.description(&format!("flexible production design, {:?} set, tau {}", d.variant, d.tau));
    let dp = d.demand_param();

    let mut cost = RowTerms::new().x1(0, -1.0);
    for (i, u) in d.units.iter().enumerate() {
        cost = cost.y1(i, u.alpha).y(2, i, u.beta).x(2, i, u.gamma);
    }
    let c = b.row(2, "cost", cost);
    b.cost_row(c);

    let mut supply = RowTerms::new().xi(dp, -1.0);
    for i in 0..ni {
        supply = supply.x(2, i, 1.0);
    }
    b.row(2, "demand_le", supply.clone());
    b.row(2, "demand_ge", supply.negated());

    for (i, u) in d.units.iter().enumerate() {
        let k = i + 1;
        b.row(2, &format!("built[{k}]"), RowTerms::new().y(2, i, 1.0).y1(i, -1.0));
        b.row(2, &format!("min_out[{k}]"), RowTerms::new().x(2, i, -1.0).y(2, i, u.c_min));
        b.row(2, &format!("max_out[{k}]"), RowTerms::new().x(2, i, 1.0).y(2, i, -u.c_max));
        b.row(
            2,
            &format!("capacity[{k}]"),
            RowTerms::new().x(2, i, 1.0).xi(DesignData::shortfall_param(i), 1.0).constant(-u.c_max),
        );
        b.row(2, &format!("nonneg[{k}]"), RowTerms::new().x(2, i, -1.0));
    }

    let per_unit_cap = matches!(d.variant, SetVariant::Box | SetVariant::DecisionDependent);
    if per_unit_cap {
        for (i, u) in d.units.iter().enumerate() {
            b.set_row(
                2,
                &format!("shortfall_cap[{}]", i + 1),
                vec![(DesignData::shortfall_param(i), 1.0)],
                vec![(1, i, u.c_hat_max)],
            );
        }
    }
    let all: Vec<(ParamId, f64)> = (0..ni).map(|i| (DesignData::shortfall_param(i), 1.0)).collect();
    match d.variant {
        SetVariant::Box => {}
        SetVariant::Fixed => {
            let budget: f64 = d.units.iter().map(|u| u.c_hat_max).sum::<f64>() * d.tau;
            let mut w = all;
            w.push((ParamId::CONSTANT, -budget));
            b.set_row(2, "budget", w, vec![]);
        }
        SetVariant::DecisionDependent => {
            let u = d.units.iter().enumerate().map(|(i, u)| (1, i, d.tau * u.c_hat_max)).collect();
            b.set_row(2, "budget", all, u);
        }
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{as_two_stage, validate_problem};

    #[test]
    fn case_bounds_follow_definitions() {
        let a = DesignData::three_unit().with_case(DesignCase::A);
        assert_eq!(a.demand().unwrap(), (2.0, 290.0));
        let b = DesignData::three_unit().with_case(DesignCase::B);
        assert_eq!(b.demand().unwrap(), (20.0, 110.0));
    }

    #[test]
    fn three_unit_instance_is_well_formed() {
        for v in [SetVariant::Box, SetVariant::Fixed, SetVariant::DecisionDependent] {
            let d = DesignData::three_unit().with_case(DesignCase::B).with_set(v, 0.5);
            let p = build_design_problem(&d).unwrap();
            assert!(validate_problem(&p).is_empty());
            let view = as_two_stage(&p).unwrap();
            assert_eq!(view.rows.len(), p.structure.n(2));
            assert_eq!(p.structure.k(2), 4);
        }
    }

    #[test]
    fn eight_unit_has_nine_uncertain_parameters() {
        let d = DesignData::eight_unit();
        let p = build_design_problem(&d).unwrap();
        assert_eq!(p.uncertain_params().len(), 9);
        assert_eq!(d.demand().unwrap(), (43.1, 406.5));
    }

    #[test]
    fn rejects_inconsistent_units() {
        let mut d = DesignData::three_unit().with_case(DesignCase::B);
        d.units[0].c_min = 200.0;
        assert!(build_design_problem(&d).is_err());
        let d = DesignData::three_unit();
        assert!(build_design_problem(&d).is_err());
    }

    #[test]
    fn analytic_plan_satisfies_rows_at_worst_case() {
        // Units 2 and 3 built, demand at its maximum with unit 2 at its worst
        // shortfall: unit 2 runs flat out, unit 3 covers the rest.
        let d = DesignData::three_unit().with_case(DesignCase::B);
        let p = build_design_problem(&d).unwrap();
        let xi = vec![vec![1.0], vec![0.0, 20.0, 5.0, 110.0]];
        let x = vec![vec![465.0], vec![0.0, 45.0, 65.0]];
        let y = vec![vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 1.0]];
        for n in 0..p.structure.n(2) {
            assert!(p.row_activity(2, n, &xi, &x, &y) <= 1e-9, "row {}", p.stage(2).row_name(n));
        }
        assert!(p.uncertainty.contains(2, &[1.0, 0.0, 20.0, 5.0, 110.0], &y, 1e-9));
        assert!(!p.uncertainty.contains(2, &[1.0, 1.0, 20.0, 5.0, 110.0], &y, 1e-9));
    }
}
