use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{MilpModel, Sense, VarKind};
use super::MilpError;

const MAX_LINE: usize = 200;

/// Reversible mapping between model names and the LP-safe identifiers written
/// to file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NameMap {
    pub columns: Vec<String>,
    pub rows: Vec<String>,
    /// LP identifier -> original name, only for names that had to change.
    pub renamed: BTreeMap<String, String>,
}

impl NameMap {
    pub fn build(model: &MilpModel) -> Self {
        let mut used = HashSet::new();
        let mut renamed = BTreeMap::new();
        let mut mangle_all = |names: &mut dyn Iterator<Item = &str>, prefix: char| -> Vec<String> {
            names
                .map(|orig| {
                    let mut s = sanitize(orig, prefix);
                    if used.contains(&s) {
                        let base = s.clone();
                        let mut k = 1;
                        while used.contains(&s) {
                            s = format!("{base}_{k}");
                            k += 1;
                        }
                    }
                    used.insert(s.clone());
                    if s != orig {
                        renamed.insert(s.clone(), orig.to_string());
                    }
                    s
                })
                .collect()
        };
        let columns = mangle_all(&mut model.vars.iter().map(|v| v.name.as_str()), 'c');
        let rows = mangle_all(&mut model.rows.iter().map(|r| r.name.as_str()), 'r');
        Self {
            columns,
            rows,
            renamed,
        }
    }

    pub fn original<'a>(&'a self, lp_name: &'a str) -> &'a str {
        self.renamed.get(lp_name).map(String::as_str).unwrap_or(lp_name)
    }
}

fn sanitize(name: &str, prefix: char) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    let bad_start = match s.as_bytes() {
        [] => true,
        [c, ..] if c.is_ascii_digit() => true,
        // `e1` or `E7` would be read as an exponent
        [b'e' | b'E', d, ..] if d.is_ascii_digit() => true,
        [b'e' | b'E'] => true,
        _ => false,
    };
    if bad_start {
        s.insert(0, prefix);
        s.insert(1, '_');
    }
    // keywords that would confuse section parsing
    let lower = s.to_ascii_lowercase();
    if matches!(
        lower.as_str(),
        "st" | "s_t" | "bounds" | "binary" | "binaries" | "bin" | "general" | "generals" | "end" | "free" | "inf" | "infinity" | "subject" | "minimize" | "maximize"
    ) {
        s.insert(0, prefix);
        s.insert(1, '_');
    }
    s
}

fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn push_terms(out: &mut String, line: &mut String, terms: &[(super::VarId, f64)], names: &NameMap) {
    if terms.is_empty() {
        line.push_str(" 0 ");
        line.push_str(&names.columns[0]);
        return;
    }
    for (i, (v, c)) in terms.iter().enumerate() {
        let sign = if *c < 0.0 { '-' } else { '+' };
        let piece = if i == 0 && *c >= 0.0 {
            format!(" {} {}", num(c.abs()), names.columns[v.0])
        } else {
            format!(" {} {} {}", sign, num(c.abs()), names.columns[v.0])
        };
        if line.len() + piece.len() > MAX_LINE {
            out.push_str(line);
            out.push('\n');
            line.clear();
            line.push(' ');
        }
        line.push_str(&piece);
    }
}

/// Renders the model as CPLEX-LP text. Identical models give identical bytes.
pub fn write_lp(model: &MilpModel) -> Result<(String, NameMap), MilpError> {
    model.validate()?;
    if model.vars.is_empty() {
        return Err(MilpError::InvalidModel("model has no variables".into()));
    }
    let names = NameMap::build(model);
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name.replace('\n', " "));
    out.push_str("Minimize\n");
    let mut line = String::from(" obj:");
    push_terms(&mut out, &mut line, &model.objective, &names);
    if model.objective_offset != 0.0 {
        let o = model.objective_offset;
        let _ = write!(line, " {} {}", if o < 0.0 { '-' } else { '+' }, num(o.abs()));
    }
    out.push_str(&line);
    out.push('\n');

    out.push_str("Subject To\n");
    for (k, row) in model.rows.iter().enumerate() {
        let mut line = format!(" {}:", names.rows[k]);
        push_terms(&mut out, &mut line, &row.terms, &names);
        let sense = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = write!(line, " {} {}", sense, num(row.rhs));
        out.push_str(&line);
        out.push('\n');
    }

    out.push_str("Bounds\n");
    for (k, v) in model.vars.iter().enumerate() {
        if v.kind == VarKind::Binary {
            continue;
        }
        let n = &names.columns[k];
        match (v.lower, v.upper) {
            (l, u) if l == f64::NEG_INFINITY && u == f64::INFINITY => {
                let _ = writeln!(out, " {n} free");
            }
            (l, u) if l == u => {
                let _ = writeln!(out, " {n} = {}", num(l));
            }
            (l, u) if l == 0.0 && u == f64::INFINITY => {}
            (l, u) => {
                let _ = writeln!(out, " {} <= {n} <= {}", num(l), num(u));
            }
        }
    }
    let binaries: Vec<&str> = model
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(k, _)| names.columns[k].as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for b in binaries {
            let _ = writeln!(out, " {b}");
        }
    }
    out.push_str("End\n");
    Ok((out, names))
}

/// Writes the model to `path` in LP format and returns the name map.
pub fn export_lp(model: &MilpModel, path: &Path) -> Result<NameMap, MilpError> {
    let (text, names) = write_lp(model)?;
    std::fs::write(path, text)?;
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::super::model::LinExpr;
    use super::*;

    #[test]
    fn sanitize_rules() {
        assert_eq!(sanitize("mu[n1,m2]", 'c'), "mu_n1_m2_");
        assert_eq!(sanitize("e12", 'c'), "c_e12");
        assert_eq!(sanitize("3x", 'r'), "r_3x");
        assert_eq!(sanitize("End", 'r'), "r_End");
        assert_eq!(sanitize("x_e1", 'c'), "x_e1");
    }

    #[test]
    fn mangling_is_unique_and_reversible() {
        let mut m = MilpModel::new("t");
        m.free("a[1]");
        m.free("a_1_");
        let names = NameMap::build(&m);
        assert_eq!(names.columns[0], "a_1_");
        assert_eq!(names.columns[1], "a_1__1");
        assert_eq!(names.original("a_1_"), "a[1]");
        assert_eq!(names.original("a_1__1"), "a_1_");
    }

    #[test]
    fn writes_sections() {
        let mut m = MilpModel::new("demo");
        let x = m.continuous("x", 1.0, f64::INFINITY);
        let y = m.binary("y");
        let f = m.free("f");
        let mut e = LinExpr::term(x, 1.0);
        e.add(y, -2.5);
        m.add_row("c1", &e, Sense::Le, 4.0);
        m.add_row("c2", &LinExpr::term(f, 1.0), Sense::Eq, -1.0);
        m.set_objective(&LinExpr::term(x, 1.0));
        let (text, _) = write_lp(&m).unwrap();
        let expected = "\\ demo\nMinimize\n obj: 1 x\nSubject To\n c1: 1 x - 2.5 y <= 4\n c2: 1 f = -1\nBounds\n 1 <= x <= inf\n f free\nBinary\n y\nEnd\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn long_rows_wrap() {
        let mut m = MilpModel::new("w");
        let mut e = LinExpr::new();
        for k in 0..100 {
            let v = m.free(format!("variable_number_{k}"));
            e.add(v, 1.0 + k as f64);
        }
        m.add_row("big", &e, Sense::Ge, 0.0);
        let (text, _) = write_lp(&m).unwrap();
        assert!(text.lines().all(|l| l.len() <= MAX_LINE + 40));
        assert!(text.lines().count() > 10);
    }
}
