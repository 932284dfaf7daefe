use super::{ReformulationArtifacts, ReformulationError};
use crate::policy::{FirstStageDecision, PolicyCoefficients, RuleBlock, StagePolicy};

/// Reads rule coefficients and first-stage decisions from a solution vector.
/// Binary columns are rounded.
pub fn extract_policy(
    solution: Option<&[f64]>,
    art: &ReformulationArtifacts,
) -> Result<(PolicyCoefficients, FirstStageDecision), ReformulationError> {
    let x = solution.ok_or(ReformulationError::NoIncumbent)?;
    let needed = art
        .x1
        .iter()
        .chain(&art.y1)
        .map(|v| v.0 + 1)
        .max()
        .unwrap_or(0);
    if x.len() < needed {
        return Err(ReformulationError::SolutionSize {
            got: x.len(),
            expected: needed,
        });
    }
    let first = FirstStageDecision {
        x: art.x1.iter().map(|v| x[v.0]).collect(),
        y: art.y1.iter().map(|v| x[v.0].round()).collect(),
    };
    let mut stages = Vec::new();
    for sv in &art.rules.stages {
        let mut blocks = Vec::new();
        for bv in &sv.blocks {
            let s = bv.shape;
            let mut b = RuleBlock::zeros(s.param, sv.continuous, sv.binaries, s.r, s.g);
            for c in 0..sv.continuous {
                for j in 0..s.r {
                    b.xbar[c][j] = x[bv.xbar[c][j].0];
                }
                if let Some(row) = bv.xhat.get(c) {
                    for j in 0..s.g {
                        b.xhat[c][j] = x[row[j].0];
                    }
                }
            }
            for q in 0..sv.binaries {
                if let Some(row) = bv.ydot.get(q) {
                    for (j, v) in row.iter().enumerate() {
                        b.ydot[q][j] = x[v.0].round();
                    }
                }
                if let Some(row) = bv.yddot.get(q) {
                    for (j, v) in row.iter().enumerate() {
                        b.yddot[q][j] = x[v.0].round();
                    }
                }
            }
            blocks.push(b);
        }
        stages.push(StagePolicy {
            stage: sv.stage,
            continuous: sv.continuous,
            binaries: sv.binaries,
            blocks,
        });
    }
    let policy = PolicyCoefficients {
        info: art.info.clone(),
        support: art.support.clone(),
        breakpoints: art.breakpoints.clone(),
        stages,
    };
    Ok((policy, first))
}
