use super::{PolicyCoefficients, PolicyError};
use crate::problem::ParamId;
use crate::uncertainty::{lift_binary, lift_continuous};

/// Realizations `xi[t-1][i-1]`; stage 1 holds the constant `1`.
pub type Trajectory = Vec<Vec<f64>>;

/// Continuous and binary decisions of stage `t` under the rules. Binary
/// outputs are returned as reals; integrality is checked separately.
pub fn evaluate_policy(c: &PolicyCoefficients, xi: &[Vec<f64>], t: usize) -> Result<(Vec<f64>, Vec<f64>), PolicyError> {
    let sp = c.stage(t).ok_or(PolicyError::UnknownStage(t))?;
    let mut x = vec![0.0; sp.continuous];
    let mut y = vec![0.0; sp.binaries];
    for b in &sp.blocks {
        let p = b.param;
        if !c.info.admits(t, p) {
            return Err(PolicyError::MissingBlock { stage: t, param: p });
        }
        let v = value(xi, p)?;
        let support = c.support[p.stage - 1][p.index - 1];
        let bp = c.breakpoints.get(p);
        let bar = lift_continuous(v, bp, support)?;
        let hat = lift_binary(v, bp, support)?;
        for (k, xk) in x.iter_mut().enumerate() {
            *xk += dot(&b.xbar[k], &bar) + dot(&b.xhat[k], &hat);
        }
        for (q, yq) in y.iter_mut().enumerate() {
            *yq += b.ydot[q].iter().zip(&b.yddot[q]).zip(&hat).map(|((d, dd), h)| (d - dd) * h).sum::<f64>();
        }
    }
    Ok((x, y))
}

fn value(xi: &[Vec<f64>], p: ParamId) -> Result<f64, PolicyError> {
    if p.is_constant() {
        return Ok(1.0);
    }
    xi.get(p.stage - 1)
        .and_then(|s| s.get(p.index - 1))
        .copied()
        .ok_or(PolicyError::MissingValue(p))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::super::{InfoStructure, RuleBlock, StagePolicy};
    use super::*;
    use crate::uncertainty::{Breakpoints, Support};

    /// One parameter on [1, 5] with a breakpoint at 3; two continuous and two
    /// binary decisions switching at the breakpoint.
    pub(crate) fn switching_policy() -> PolicyCoefficients {
        let p = ParamId::new(2, 1);
        let mut bp = Breakpoints::default();
        bp.set(ParamId::CONSTANT, vec![]);
        bp.set(p, vec![3.0]);
        let mut cst = RuleBlock::zeros(ParamId::CONSTANT, 2, 2, 1, 1);
        let mut blk = RuleBlock::zeros(p, 2, 2, 2, 1);
        // y1 = 1 - hat, y2 = hat
        cst.ydot[0][0] = 1.0;
        blk.yddot[0][0] = 1.0;
        blk.ydot[1][0] = 1.0;
        // x1 = bar1 - 3 hat; bar1 = min(xi, 3)
        blk.xbar[0][0] = 1.0;
        blk.xhat[0][0] = -3.0;
        // x2 = bar2 + 3 hat
        blk.xbar[1][1] = 1.0;
        blk.xhat[1][0] = 3.0;
        PolicyCoefficients {
            info: InfoStructure::full(2),
            support: vec![vec![Support::new(1.0, 1.0)], vec![Support::new(1.0, 5.0)]],
            breakpoints: bp,
            stages: vec![StagePolicy {
                stage: 2,
                continuous: 2,
                binaries: 2,
                blocks: vec![cst, blk],
            }],
        }
    }

    #[test]
    fn zero_rules_give_zero() {
        let mut c = switching_policy();
        for b in &mut c.stages[0].blocks {
            *b = RuleBlock::zeros(b.param, 2, 2, b.xbar[0].len(), b.ydot[0].len());
        }
        let (x, y) = evaluate_policy(&c, &[vec![1.0], vec![4.2]], 2).unwrap();
        assert_eq!((x, y), (vec![0.0, 0.0], vec![0.0, 0.0]));
    }

    #[test]
    fn constant_rule() {
        let mut c = switching_policy();
        let b = &mut c.stages[0].blocks;
        b[1] = RuleBlock::zeros(ParamId::new(2, 1), 2, 2, 2, 1);
        b[0] = RuleBlock::zeros(ParamId::CONSTANT, 2, 2, 1, 1);
        b[0].xbar[0][0] = 7.5;
        for v in [1.0, 2.9, 3.0, 5.0] {
            let (x, _) = evaluate_policy(&c, &[vec![1.0], vec![v]], 2).unwrap();
            assert_eq!(x[0], 7.5);
        }
    }

    #[test]
    fn switching_rule_below_and_above() {
        let c = switching_policy();
        let (x, y) = evaluate_policy(&c, &[vec![1.0], vec![2.0]], 2).unwrap();
        assert_eq!(y, vec![1.0, 0.0]);
        assert_eq!(x, vec![2.0, 0.0]);
        let (x, y) = evaluate_policy(&c, &[vec![1.0], vec![4.0]], 2).unwrap();
        assert_eq!(y, vec![0.0, 1.0]);
        assert_eq!(x, vec![0.0, 4.0]);
        // closed from the left
        let (_, y) = evaluate_policy(&c, &[vec![1.0], vec![3.0]], 2).unwrap();
        assert_eq!(y, vec![0.0, 1.0]);
    }

    #[test]
    fn errors() {
        let c = switching_policy();
        assert!(matches!(
            evaluate_policy(&c, &[vec![1.0], vec![6.0]], 2),
            Err(PolicyError::Uncertainty(_))
        ));
        assert!(matches!(evaluate_policy(&c, &[vec![1.0]], 2), Err(PolicyError::MissingValue(_))));
        let mut masked = c.clone();
        masked.info.mask.push((2, ParamId::new(2, 1)));
        assert!(matches!(
            evaluate_policy(&masked, &[vec![1.0], vec![2.0]], 2),
            Err(PolicyError::MissingBlock { .. })
        ));
    }
}
