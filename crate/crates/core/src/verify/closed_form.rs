use serde::{Deserialize, Serialize};

use crate::studies::{DesignCase, DesignData, SetVariant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub d_max: f64,
    /// Worst-case shortfall of unit 2.
    pub c2_worst: f64,
    /// Optimal worst-case cost.
    pub z: f64,
}

/// Optimal worst-case cost of Case B (three units, units 2 and 3 built,
/// unit 2 preferred) under a budgeted shortfall set. The adversary spends
/// the budget on unit 2, pushing production onto the dearer unit 3 at the
/// largest demand.
pub fn case_b_closed_form(tau: f64, data: &DesignData, variant: SetVariant) -> ClosedForm {
    let d = data.clone().with_case(DesignCase::B);
    let d_max = d.d_max.expect("case B sets the demand range");
    let (u2, u3) = (&d.units[1], &d.units[2]);
    let c2_worst = match variant {
        SetVariant::Box => u2.c_hat_max,
        SetVariant::Fixed => u2.c_hat_max.min(tau * d.units.iter().map(|u| u.c_hat_max).sum::<f64>()),
        SetVariant::DecisionDependent => u2.c_hat_max.min(tau * (u2.c_hat_max + u3.c_hat_max)),
    };
    let x2 = u2.c_max - c2_worst;
    let x3 = d_max - x2;
    let z = u2.alpha + u3.alpha + u2.beta + u3.beta + u2.gamma * x2 + u3.gamma * x3;
    ClosedForm { d_max, c2_worst, z }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> DesignData {
        DesignData::three_unit()
    }

    #[test]
    fn fixed_half_budget_matches_table_value() {
        let cf = case_b_closed_form(0.5, &data(), SetVariant::Fixed);
        assert_eq!(cf.d_max, 110.0);
        assert_eq!(cf.c2_worst, 20.0);
        assert_eq!(cf.z, 465.0);
    }

    #[test]
    fn decision_dependent_point_four() {
        let cf = case_b_closed_form(0.4, &data(), SetVariant::DecisionDependent);
        assert!((cf.c2_worst - 10.0).abs() < 1e-12);
        assert!((cf.z - 445.0).abs() < 1e-9);
    }

    #[test]
    fn full_budget_agrees() {
        let a = case_b_closed_form(1.0, &data(), SetVariant::Fixed);
        let b = case_b_closed_form(1.0, &data(), SetVariant::DecisionDependent);
        assert_eq!(a.z, b.z);
    }

    #[test]
    fn matches_reduced_formula() {
        // -15 + 4 d_max + 2 c2_worst for the bundled three-unit data.
        for k in 1..=10 {
            let tau = k as f64 / 10.0;
            for v in [SetVariant::Fixed, SetVariant::DecisionDependent] {
                let cf = case_b_closed_form(tau, &data(), v);
                assert!((cf.z - (-15.0 + 4.0 * cf.d_max + 2.0 * cf.c2_worst)).abs() < 1e-9);
            }
            let f = case_b_closed_form(tau, &data(), SetVariant::Fixed);
            let dd = case_b_closed_form(tau, &data(), SetVariant::DecisionDependent);
            assert!(f.z >= dd.z);
        }
    }
}
