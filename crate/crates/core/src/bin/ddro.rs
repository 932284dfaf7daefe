use std::error::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ddro::milp::{export_lp, BackendChoice, BoundRule, SolveOptions};
use ddro::policy::{check_binary_admissibility, InfoStructure, PolicyFile, RecourseMode};
use ddro::problem::{load_problem, save_problem, MultistageProblem};
use ddro::reformulation::{build_manifest, reformulate, BigMConfig, ReformulationConfig};
use ddro::studies::reproduce::{self, ReproOptions};
use ddro::studies::{
    build_design_problem, build_planning_problem, equidistant_breakpoints, run, tailored_breakpoints, DesignCase,
    RunConfig, SetVariant, StudyData,
};
use ddro::uncertainty::{build_lifted_vertex_set, Breakpoints};
use ddro::verify::inner_max_check;

type Res<T> = Result<T, Box<dyn Error>>;

/// Exit code when a policy fails certification.
const NOT_CERTIFIED: u8 = 4;

#[derive(Parser)]
#[command(name = "ddro", version, about = "Decision rules for multistage robust MILPs with decision-dependent uncertainty")]
struct Cli {
    #[command(flatten)]
    g: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Global {
    /// Built-in data set (design-3unit, design-8unit, planning), a study data
    /// file or a problem instance file.
    #[arg(long, global = true, default_value = "design-3unit")]
    instance: String,
    /// equidistant:N, tailored, none, or a JSON breakpoint file. Defaults to
    /// the instance's own breakpoints.
    #[arg(long, global = true)]
    breakpoints: Option<String>,
    #[arg(long, global = true, value_enum, default_value = "mixed")]
    recourse: Recourse,
    /// full, a uniform window N, or a comma list per stage with `-` for full
    /// history (e.g. `-,0,1,0,1`).
    #[arg(long = "delta-t", global = true)]
    delta_t: Option<String>,
    #[arg(long, global = true, default_value_t = 0.01)]
    gap: f64,
    #[arg(long = "big-m", global = true)]
    big_m: Option<f64>,
    /// Seconds.
    #[arg(long = "time-limit", global = true)]
    time_limit: Option<f64>,
    /// `highs` for the linked library or a path to a solver executable.
    #[arg(long, global = true, default_value = "highs")]
    solver: String,
    /// Demand range for the three-unit design data.
    #[arg(long, global = true, value_enum)]
    case: Option<Case>,
    /// Uncertainty set of the design study.
    #[arg(long, global = true)]
    set: Option<String>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Planning horizon in periods.
    #[arg(long, global = true)]
    periods: Option<usize>,
    #[arg(long = "gamma-bar", global = true)]
    gamma_bar: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Recourse {
    Continuous,
    Mixed,
}

impl From<Recourse> for RecourseMode {
    fn from(r: Recourse) -> Self {
        match r {
            Recourse::Continuous => RecourseMode::Continuous,
            Recourse::Mixed => RecourseMode::Mixed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    A,
    B,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Table1,
    Table2,
    Table3,
    Fig6,
    Table4,
}

#[derive(Subcommand)]
enum Command {
    /// Write the problem instance as JSON.
    Build,
    /// Write the deterministic MILP as an LP file plus a manifest.
    Reformulate {
        /// Manifest path; defaults to `<out>.manifest.json`.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Reformulate, solve and export the policy.
    Solve {
        /// Write first-stage decisions and rule coefficients here.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Certify the incumbent before exiting.
        #[arg(long)]
        verify: bool,
    },
    /// Certify an exported policy against the instance.
    Verify {
        #[arg(long)]
        policy: PathBuf,
    },
    /// Re-run a case-study table and write a CSV.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
        /// Restrict Table 2 to these total breakpoint counts.
        #[arg(long, value_delimiter = ',')]
        totals: Vec<usize>,
        /// Budget levels for the Fig. 6 sweep.
        #[arg(long, value_delimiter = ',')]
        taus: Vec<f64>,
        /// Skip the worst-case certification of each incumbent.
        #[arg(long)]
        no_verify: bool,
    },
    /// Objective and upgrade decisions over a range of upgrade costs.
    SweepGamma {
        #[arg(long, value_delimiter = ',', default_value = "0,25,50,75,100,125,150,175,200")]
        gammas: Vec<f64>,
    },
    /// Dump the lifted vertex sets of one stage.
    Vertices {
        #[arg(long, default_value_t = 2)]
        stage: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> Res<u8> {
    let g = &cli.g;
    match &cli.cmd {
        Command::Build => {
            let p = load_instance(g)?;
            match &g.out {
                Some(path) => save_problem(&p, path)?,
                None => println!("{}", p.to_json()),
            }
            Ok(0)
        }
        Command::Reformulate { manifest } => {
            let p = load_instance(g)?;
            let (model, art) = reformulate(&p, &reformulation_config(g, &p)?)?;
            let out = g.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.lp", p.meta.name)));
            export_lp(&model, &out)?;
            let mut m = build_manifest(&model, &art);
            m.path = out.display().to_string();
            let mpath = manifest.clone().unwrap_or_else(|| out.with_extension("manifest.json"));
            std::fs::write(&mpath, serde_json::to_string_pretty(&m)? + "\n")?;
            eprintln!(
                "{}: {} rows, {} columns, {} binary -> {}",
                p.meta.name,
                m.rows,
                m.columns,
                m.binaries,
                out.display()
            );
            Ok(0)
        }
        Command::Solve { policy, verify } => {
            let p = load_instance(g)?;
            let cfg = RunConfig {
                reformulation: reformulation_config(g, &p)?,
                solve: solve_options(g),
                backend: BackendChoice::parse(&g.solver),
                verify: *verify,
            };
            let r = run(&p, &cfg)?;
            let rep = &r.report;
            emit(
                g,
                &format!(
                    "instance,status,objective,bound,gap,wall_time_s,rows,columns,binaries,certified\n{},{:?},{},{},{},{:.3},{},{},{},{}\n",
                    p.meta.name,
                    rep.status,
                    fmt_opt(rep.objective),
                    fmt_opt(rep.bound),
                    fmt_opt(rep.gap),
                    rep.wall_time,
                    r.manifest.rows,
                    r.manifest.columns,
                    r.manifest.binaries,
                    r.certified().map(|c| c.to_string()).unwrap_or_default()
                ),
            )?;
            if let (Some(path), Some(pol), Some(first)) = (policy, &r.policy, &r.first) {
                PolicyFile {
                    instance: p.meta.name.clone(),
                    objective: rep.objective,
                    first_stage: first.clone(),
                    policy: pol.clone(),
                }
                .save(path)?;
            }
            if r.certified() == Some(false) {
                return Ok(NOT_CERTIFIED);
            }
            Ok(rep.status.exit_code() as u8)
        }
        Command::Verify { policy } => {
            let p = load_instance(g)?;
            let f = PolicyFile::load(policy)?;
            let adm = check_binary_admissibility(&f.policy, &p, &f.first_stage);
            let check = inner_max_check(&p, &f.first_stage, &f.policy)?;
            emit(g, &check.to_table())?;
            for issue in &adm.issues {
                eprintln!("admissibility: {issue:?}");
            }
            eprintln!(
                "max row value {:.3e}; {} violated; admissible {}",
                check.max_value().unwrap_or(f64::NAN),
                check.violated().len(),
                adm.is_admissible()
            );
            Ok(if adm.is_admissible() && check.certified() { 0 } else { NOT_CERTIFIED })
        }
        Command::Reproduce {
            target,
            totals,
            taus,
            no_verify,
        } => {
            let opts = ReproOptions {
                solve: solve_options(g),
                backend: BackendChoice::parse(&g.solver),
                big_m: g.big_m.map(BigMConfig::uniform),
                verify: !no_verify,
            };
            let csv = match target {
                Target::Table1 => {
                    let mut rows = reproduce::table1(&opts)?;
                    rows.extend(reproduce::table1_case_a_refined(&opts, 6)?);
                    reproduce::to_csv(&rows)
                }
                Target::Table2 => reproduce::to_csv(&reproduce::table2(&opts, totals)?),
                Target::Table3 => {
                    let periods = match g.periods {
                        Some(t) => vec![t],
                        None => vec![2, 3, 4, 5],
                    };
                    let modes = match g.recourse {
                        Recourse::Continuous => vec![RecourseMode::Continuous],
                        Recourse::Mixed => vec![RecourseMode::Continuous, RecourseMode::Mixed],
                    };
                    reproduce::to_csv(&reproduce::table3(&opts, &periods, &modes)?)
                }
                Target::Fig6 => {
                    let taus = if taus.is_empty() {
                        (1..=10).map(|k| k as f64 / 10.0).collect()
                    } else {
                        taus.clone()
                    };
                    let variants = match &g.set {
                        Some(s) => vec![parse_set(s)?],
                        None => vec![SetVariant::Fixed, SetVariant::DecisionDependent],
                    };
                    reproduce::to_csv(&reproduce::fig6(&opts, &taus, &variants)?)
                }
                Target::Table4 => {
                    let rules = [BoundRule::Exact, BoundRule::Double, BoundRule::DoublePlus];
                    reproduce::bound_rows_csv(&reproduce::table4(&opts, g.periods.unwrap_or(2), &rules)?)
                }
            };
            emit(g, &csv)?;
            Ok(0)
        }
        Command::SweepGamma { gammas } => {
            let opts = ReproOptions {
                solve: solve_options(g),
                backend: BackendChoice::parse(&g.solver),
                big_m: g.big_m.map(BigMConfig::uniform),
                verify: false,
            };
            let rows = reproduce::sweep_gamma(&opts, g.periods.unwrap_or(2), gammas, &[g.recourse.into()])?;
            emit(g, &reproduce::sweep_csv(&rows))?;
            Ok(0)
        }
        Command::Vertices { stage } => {
            let p = load_instance(g)?;
            let v = build_lifted_vertex_set(&p.uncertainty, &p.breakpoints, *stage)?;
            emit(g, &v.to_table())?;
            Ok(0)
        }
    }
}

fn emit(g: &Global, text: &str) -> Res<()> {
    match &g.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn parse_set(s: &str) -> Res<SetVariant> {
    SetVariant::parse(s).ok_or_else(|| format!("unknown set variant `{s}`").into())
}

fn big_m(g: &Global, p: &MultistageProblem) -> BigMConfig {
    match g.big_m {
        Some(m) => BigMConfig::uniform(m),
        None => reproduce::study_big_m(p),
    }
}

fn solve_options(g: &Global) -> SolveOptions {
    SolveOptions {
        gap: g.gap,
        time_limit: g.time_limit,
        ..SolveOptions::default()
    }
}

fn reformulation_config(g: &Global, p: &MultistageProblem) -> Res<ReformulationConfig> {
    Ok(ReformulationConfig {
        recourse: g.recourse.into(),
        info: g.delta_t.as_deref().map(|s| parse_delta_t(s, p.num_stages())).transpose()?,
        big_m: big_m(g, p),
    })
}

fn parse_delta_t(s: &str, stages: usize) -> Res<InfoStructure> {
    if s == "full" {
        return Ok(InfoStructure::full(stages));
    }
    if !s.contains(',') {
        return Ok(InfoStructure::uniform(stages, Some(s.parse()?)));
    }
    let w = s
        .split(',')
        .map(|t| match t.trim() {
            "-" | "full" => Ok(None),
            n => n.parse::<usize>().map(Some),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if w.len() != stages {
        return Err(format!("--delta-t lists {} stages, instance has {stages}", w.len()).into());
    }
    Ok(InfoStructure::per_stage(w))
}

/// Study data are built into a problem; problem files are loaded as-is.
fn load_instance(g: &Global) -> Res<MultistageProblem> {
    let path = Path::new(&g.instance);
    let is_problem_file = path.is_file() && {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        v.get("blocks").is_some()
    };
    let (mut p, design) = if is_problem_file {
        (load_problem(path)?, None)
    } else {
        match StudyData::resolve(&g.instance)? {
            StudyData::Design(mut d) => {
                if let Some(c) = g.case {
                    d = d.with_case(match c {
                        Case::A => DesignCase::A,
                        Case::B => DesignCase::B,
                    });
                } else if d.d_min.is_none() {
                    d = d.with_case(DesignCase::B);
                }
                if g.set.is_some() || g.tau.is_some() {
                    let v = match &g.set {
                        Some(s) => parse_set(s)?,
                        None => d.variant,
                    };
                    let tau = g.tau.unwrap_or(d.tau);
                    d = d.with_set(v, tau);
                }
                (build_design_problem(&d)?, Some(d))
            }
            StudyData::Planning(mut d) => {
                if let Some(t) = g.periods {
                    d = d.with_horizon(t);
                }
                if let Some(gb) = g.gamma_bar {
                    d = d.with_gamma_bar(gb);
                }
                let mut p = build_planning_problem(&d)?;
                p.breakpoints = equidistant_breakpoints(&p, 1);
                (p, None)
            }
        }
    };
    if let Some(spec) = &g.breakpoints {
        p.breakpoints = match spec.as_str() {
            "none" => Breakpoints::none(&p.uncertainty),
            "tailored" => {
                let d = design.as_ref().ok_or("tailored breakpoints need design study data")?;
                tailored_breakpoints(&p, d, &Breakpoints::none(&p.uncertainty))
            }
            s if s.starts_with("equidistant:") => equidistant_breakpoints(&p, s["equidistant:".len()..].parse()?),
            file => serde_json::from_str(&std::fs::read_to_string(file)?)?,
        };
    }
    Ok(p)
}
