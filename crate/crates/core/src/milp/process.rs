use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use super::lp_format::write_lp;
use super::model::MilpModel;
use super::{polish_with, relative_gap, MilpBackend, MilpError, SolveOptions, SolveReport, SolveStatus};

/// Runs an external `highs` executable on an exported LP file.
#[derive(Debug, Clone)]
pub struct HighsCliBackend {
    exe: PathBuf,
}

impl HighsCliBackend {
    pub fn new(exe: impl Into<PathBuf>) -> Self {
        Self { exe: exe.into() }
    }

    /// Looks for `highs` on `PATH` or in the `DDRO_HIGHS` environment variable.
    pub fn discover() -> Option<Self> {
        if let Ok(p) = std::env::var("DDRO_HIGHS") {
            let p = PathBuf::from(p);
            if p.is_file() {
                return Some(Self::new(p));
            }
        }
        let path = std::env::var_os("PATH")?;
        std::env::split_paths(&path)
            .map(|d| d.join("highs"))
            .find(|p| p.is_file())
            .map(Self::new)
    }

    pub fn exe(&self) -> &Path {
        &self.exe
    }

    fn run_file(&self, model: &MilpModel, opts: &SolveOptions) -> Result<SolveReport, MilpError> {
        if !self.exe.is_file() {
            return Err(MilpError::BackendMissing(format!("{} does not exist", self.exe.display())));
        }
        let dir = tempfile::tempdir()?;
        let lp = dir.path().join("model.lp");
        let sol = dir.path().join("model.sol");
        let optf = dir.path().join("options.txt");
        let (text, names) = write_lp(model)?;
        std::fs::write(&lp, text)?;
        let mut o = format!("mip_rel_gap = {}\n", opts.gap.max(0.0));
        if let Some(t) = opts.time_limit {
            o.push_str(&format!("time_limit = {t}\n"));
        }
        if let Some(th) = opts.threads {
            o.push_str(&format!("threads = {th}\n"));
        }
        std::fs::write(&optf, o)?;
        let t0 = Instant::now();
        let out = Command::new(&self.exe)
            .arg("--model_file")
            .arg(&lp)
            .arg("--solution_file")
            .arg(&sol)
            .arg("--options_file")
            .arg(&optf)
            .output()
            .map_err(|e| MilpError::BackendMissing(format!("{}: {e}", self.exe.display())))?;
        let wall = t0.elapsed().as_secs_f64();
        let stdout = String::from_utf8_lossy(&out.stdout);
        if opts.verbose {
            log::info!("{stdout}");
        }
        if !sol.exists() {
            return Err(MilpError::BackendCrash(format!(
                "no solution file written (exit {:?}): {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            )));
        }
        let parsed = parse_solution(&std::fs::read_to_string(&sol)?)?;
        let status = parsed.status;
        let mut report = SolveReport::new(status, None, None, wall);
        if let Some(values) = parsed.columns {
            let mut x = vec![0.0; model.vars.len()];
            let index: HashMap<&str, usize> = names.columns.iter().enumerate().map(|(k, n)| (n.as_str(), k)).collect();
            for (name, v) in values {
                let k = *index
                    .get(name.as_str())
                    .ok_or_else(|| MilpError::Parse(format!("unknown column {name}")))?;
                x[k] = v;
            }
            let obj = model.objective_value(&x);
            let bound = if model.num_binaries() > 0 {
                parse_dual_bound(&stdout)
            } else if status == SolveStatus::Optimal {
                Some(obj)
            } else {
                None
            };
            report = SolveReport::new(status, Some(obj), bound, wall);
            report.solution = Some(x);
        }
        Ok(report)
    }
}

struct ParsedSolution {
    status: SolveStatus,
    columns: Option<Vec<(String, f64)>>,
}

fn parse_solution(text: &str) -> Result<ParsedSolution, MilpError> {
    let mut lines = text.lines();
    let mut status_line = None;
    while let Some(l) = lines.next() {
        if l.trim() == "Model status" {
            status_line = lines.next().map(str::trim);
            break;
        }
    }
    let status = match status_line {
        Some("Optimal") | Some("Empty") => SolveStatus::Optimal,
        Some("Infeasible") => SolveStatus::Infeasible,
        Some("Unbounded") => SolveStatus::Unbounded,
        Some("Primal infeasible or unbounded") => SolveStatus::Infeasible,
        Some(s) if s.contains("limit") || s.contains("Interrupted") || s == "Unknown" => SolveStatus::Limit,
        Some(s) => return Err(MilpError::Parse(format!("unrecognized model status `{s}`"))),
        None => return Err(MilpError::Parse("missing model status".into())),
    };
    let mut feasible = false;
    let mut columns = None;
    let mut it = text.lines().skip_while(|l| !l.starts_with("# Primal solution values"));
    it.next();
    if let Some(l) = it.next() {
        feasible = l.trim() == "Feasible";
    }
    if feasible {
        for l in it.by_ref() {
            if let Some(n) = l.strip_prefix("# Columns ") {
                let n: usize = n.trim().parse().map_err(|_| MilpError::Parse("bad column count".into()))?;
                let mut cols = Vec::with_capacity(n);
                for _ in 0..n {
                    let row = it.next().ok_or_else(|| MilpError::Parse("truncated columns".into()))?;
                    let mut parts = row.split_whitespace();
                    let name = parts.next().unwrap_or_default().to_string();
                    let v: f64 = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| MilpError::Parse(format!("bad column line `{row}`")))?;
                    cols.push((name, v));
                }
                columns = Some(cols);
                break;
            }
        }
    }
    Ok(ParsedSolution { status, columns })
}

fn parse_dual_bound(stdout: &str) -> Option<f64> {
    stdout
        .lines()
        .filter_map(|l| l.trim().strip_prefix("Dual bound"))
        .filter_map(|r| r.trim().parse().ok())
        .last()
}

impl MilpBackend for HighsCliBackend {
    fn name(&self) -> String {
        format!("highs executable at {}", self.exe.display())
    }

    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<SolveReport, MilpError> {
        let mut report = self.run_file(model, opts)?;
        if opts.polish && model.num_binaries() > 0 {
            if let Some(x) = report.solution.as_ref() {
                let lp_opts = SolveOptions {
                    polish: false,
                    ..opts.clone()
                };
                if let Some((obj, sol)) = polish_with(model, x, |m| self.run_file(m, &lp_opts)) {
                    if model.max_violation(&sol) <= model.max_violation(x).max(1e-7) {
                        report.objective = Some(obj);
                        report.gap = relative_gap(report.objective, report.bound);
                        report.solution = Some(sol);
                    }
                }
            }
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_optimal_file() {
        let text = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 6.5\n# Columns 2\nx 1.5\ny 0\n# Rows 1\nr0 1.5\n";
        let p = parse_solution(text).unwrap();
        assert_eq!(p.status, SolveStatus::Optimal);
        assert_eq!(p.columns.unwrap(), vec![("x".to_string(), 1.5), ("y".to_string(), 0.0)]);
    }

    #[test]
    fn parses_infeasible_file() {
        let text = "Model status\nInfeasible\n\n# Primal solution values\nNone\n";
        let p = parse_solution(text).unwrap();
        assert_eq!(p.status, SolveStatus::Infeasible);
        assert!(p.columns.is_none());
    }

    #[test]
    fn dual_bound_from_log() {
        let log = "Solving report\n  Status            Optimal\n  Primal bound      6.5\n  Dual bound        6.25\n";
        assert_eq!(parse_dual_bound(log), Some(6.25));
    }

    #[test]
    fn missing_executable() {
        let b = HighsCliBackend::new("/nonexistent/highs");
        let m = MilpModel::new("x");
        assert!(matches!(b.solve(&m, &SolveOptions::default()), Err(MilpError::BackendMissing(_))));
    }
}
