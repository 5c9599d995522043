use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dyadic_bellman::candidate::{candidate_eval, candidate_surface};
use dyadic_bellman::extremal::{convergence_report, dp_max_levelset, dp_table, DpError, DpLimits};
use dyadic_bellman::supersolution::top_level_coverage;
use dyadic_bellman::{
    check_supersolution, construct_admissible, random_carleson, BellmanFunction, BellmanPoint, Candidate,
    CandidateParams, CarlesonSeq, CheckGrid, CheckReport, ConstructionStyle, Counterexample, DyadicRational,
    GeneralRational, SpecialCase, Violation,
};

mod config;

const EXIT_VIOLATIONS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

/// Exact evaluation, construction and verification for the dyadic
/// level-set Bellman function.
#[derive(Parser, Debug)]
#[command(name = "dyadic-bellman", version, args_override_self = true)]
struct Cli {
    /// `key = value` file supplying defaults for any flag
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output format (each command has its own default)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the artifact here (atomically) instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate a Bellman function at one point
    Eval(EvalArgs),
    /// Build a Carleson sequence with a prescribed root average
    Construct(ConstructArgs),
    /// Run the exhaustive supersolution checks
    Check(CheckArgs),
    /// Maximize the level-set measure at finite depth
    Search(SearchArgs),
    /// Export a table of candidate values or DP values
    Table(TableArgs),
    /// Validate a sequence file
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    Candidate,
    C1,
    C2,
    C32,
    Counterexample,
}

fn rational(s: &str) -> Result<GeneralRational, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn dyadic(s: &str) -> Result<DyadicRational, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct EvalArgs {
    /// Carleson parameter, at least 1
    #[arg(long = "C", value_parser = rational)]
    c: Option<GeneralRational>,
    #[arg(long = "A", value_parser = rational)]
    a: GeneralRational,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    lambda: GeneralRational,
    #[arg(long, value_enum, default_value = "candidate")]
    target: Target,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Style {
    Roof,
    Partition,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct ConstructArgs {
    #[arg(long = "C", value_parser = rational)]
    c: GeneralRational,
    /// Target root average (ignored with --random)
    #[arg(long = "A", value_parser = rational, required_unless_present = "random")]
    a: Option<GeneralRational>,
    #[arg(long)]
    depth: u32,
    #[arg(long, value_enum, default_value = "roof")]
    style: Style,
    /// Draw a random C-Carleson sequence instead
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct CheckArgs {
    #[arg(long = "C", value_parser = rational)]
    c: Option<GeneralRational>,
    /// Grid `A = j / 2^grid-exp`
    #[arg(long, default_value_t = 6)]
    grid_exp: u32,
    #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
    lambda_min: i64,
    /// Defaults to ceil(C) + 6
    #[arg(long, allow_hyphen_values = true)]
    lambda_max: Option<i64>,
    /// Extra non-integer lambda values
    #[arg(long = "lambda", value_parser = rational, allow_hyphen_values = true)]
    extra_lambda: Vec<GeneralRational>,
    #[arg(long, value_enum, default_value = "candidate")]
    target: Target,
    /// Violations listed per check
    #[arg(long, default_value_t = 16)]
    max_report: usize,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct SearchArgs {
    #[arg(long = "C", value_parser = rational)]
    c: GeneralRational,
    #[arg(long)]
    depth: u32,
    /// Root average, representable at the given depth
    #[arg(long = "A", value_parser = dyadic)]
    a: DyadicRational,
    #[arg(long, allow_hyphen_values = true)]
    m: i64,
    /// Also report F_D and its gap for every depth up to this one
    #[arg(long, value_name = "DMAX")]
    report_convergence: Option<u32>,
    /// Write the extremal sequence here
    #[arg(long, value_name = "PATH")]
    emit_witness: Option<PathBuf>,
    #[arg(long, default_value_t = dyadic_bellman::extremal::DEFAULT_MAX_DEPTH)]
    max_depth: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TableKind {
    Candidate,
    Dp,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct TableArgs {
    #[arg(long, value_enum, default_value = "candidate")]
    kind: TableKind,
    #[arg(long = "C", value_parser = rational)]
    c: GeneralRational,
    #[arg(long, default_value_t = 4)]
    grid_exp: u32,
    #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
    lambda_min: i64,
    #[arg(long, allow_hyphen_values = true)]
    lambda_max: Option<i64>,
    /// DP depth
    #[arg(long, default_value_t = 6)]
    depth: u32,
    #[arg(long, default_value_t = 4)]
    m_max: u32,
    #[arg(long, default_value_t = dyadic_bellman::extremal::DEFAULT_MAX_DEPTH)]
    max_depth: u32,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct ValidateArgs {
    /// A carleson-seq/1 JSON file
    path: PathBuf,
    #[arg(long = "C", value_parser = rational)]
    c: GeneralRational,
}

/// What a run produced: the bytes to emit and whether violations were found.
struct Outcome {
    body: String,
    violations: bool,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { body, violations: false }
    }
}

struct Run<'a> {
    resolved: &'a [(String, String)],
    format: Format,
}

impl Run<'_> {
    fn provenance(&self, grid: Option<String>) -> Value {
        let mut cfg = serde_json::Map::new();
        for (k, v) in self.resolved {
            if k != "config" && k != "output" {
                cfg.insert(k.clone(), Value::String(v.clone()));
            }
        }
        let mut p = serde_json::Map::new();
        p.insert("tool".into(), json!(format!("dyadic-bellman {}", env!("CARGO_PKG_VERSION"))));
        p.insert("config".into(), Value::Object(cfg));
        if let Some(g) = grid {
            p.insert("grid".into(), json!(g));
        }
        Value::Object(p)
    }

    fn csv_header(&self, grid: Option<String>) -> String {
        let mut s = format!("# tool: dyadic-bellman {}\n", env!("CARGO_PKG_VERSION"));
        let cfg: Vec<String> = self
            .resolved
            .iter()
            .filter(|(k, _)| k != "config" && k != "output")
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        s.push_str(&format!("# config: {}\n", cfg.join(" ")));
        if let Some(g) = grid {
            s.push_str(&format!("# grid: {g}\n"));
        }
        s
    }
}

/// Dyadic values cross the boundary in the same `p/q` form as every other
/// rational.
fn q(d: &DyadicRational) -> String {
    d.to_general().to_string()
}

fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// The sequence document followed by a `provenance` key.
fn sequence_artifact(seq: &CarlesonSeq, provenance: &Value) -> String {
    let doc = seq.to_json();
    let body = doc.strip_suffix('}').expect("object");
    format!("{body}, \"provenance\": {}}}\n", serde_json::to_string(provenance).expect("serializable"))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn target_function(target: Target, c: Option<&GeneralRational>) -> Result<(Box<dyn BellmanFunction>, GeneralRational)> {
    let special = match target {
        Target::C1 => Some(SpecialCase::C1),
        Target::C2 => Some(SpecialCase::C2),
        Target::C32 => Some(SpecialCase::C32),
        _ => None,
    };
    if let Some(sc) = special {
        if let Some(c) = c {
            if *c != sc.c() {
                bail!("--C {c} conflicts with --target {}, which fixes C = {}", sc.name(), sc.c());
            }
        }
        return Ok((Box::new(sc), sc.c()));
    }
    let c = c.ok_or_else(|| anyhow!("--C is required for this target"))?.clone();
    let f: Box<dyn BellmanFunction> = match target {
        Target::Counterexample => Box::new(Counterexample),
        _ => Box::new(Candidate::new(c.clone()).map_err(|e| anyhow!("--C: {e}"))?),
    };
    Ok((f, c))
}

fn eval(run: &Run, args: &EvalArgs) -> Result<Outcome> {
    let (f, c) = target_function(args.target, args.c.as_ref())?;
    if args.a.numer() < &0.into() || args.a > c {
        bail!("--A must lie in [0, {c}], got {}", args.a);
    }
    let value = f.eval(&args.a, &args.lambda)?;
    Ok(Outcome::ok(match run.format {
        Format::Text => format!("{value}\n"),
        Format::Json => pretty(&json!({
            "function": f.name(),
            "A": args.a.to_string(),
            "lambda": args.lambda.to_string(),
            "value": value.to_string(),
            "provenance": run.provenance(None),
        })),
        Format::Csv => {
            run.csv_header(None)
                + &csv_rows(&["A", "lambda", "value"], [vec![args.a.to_string(), args.lambda.to_string(), value.to_string()]])?
        }
    }))
}

fn describe_sequence(seq: &CarlesonSeq, c: &GeneralRational) -> String {
    let report = seq.validate(c);
    let mut s = String::new();
    s.push_str(&format!("depth: {}\n", seq.depth()));
    s.push_str(&format!("selected: {}\n", seq.selected().len()));
    s.push_str(&format!("average at root: {}\n", q(&report.average_at_root)));
    s.push_str(&format!(
        "Carleson constant: {} (attained at {})\n",
        q(&report.carleson_constant),
        report.worst_witness
    ));
    s.push_str(&format!("{c}-Carleson: {}\n", if report.is_c_carleson { "yes" } else { "no" }));
    let gens: Vec<String> = seq.generation_measures().iter().map(q).collect();
    s.push_str(&format!("generation measures: [{}]\n", gens.join(", ")));
    for m in 0..=seq.depth() as i64 + 1 {
        s.push_str(&format!(
            "V_{m} = {}\n",
            q(&seq.level_set_measure(&GeneralRational::from_integer(m)))
        ));
    }
    s
}

fn construct(run: &Run, args: &ConstructArgs) -> Result<Outcome> {
    let seq = if args.random {
        random_carleson(args.depth, &args.c, args.seed)?
    } else {
        let a = args.a.as_ref().expect("required unless --random");
        let style = match args.style {
            Style::Roof => ConstructionStyle::Roof,
            Style::Partition => ConstructionStyle::Partition,
        };
        construct_admissible(a, &args.c, args.depth, style)?
    };
    Ok(Outcome::ok(match run.format {
        Format::Json => sequence_artifact(&seq, &run.provenance(None)),
        Format::Text => describe_sequence(&seq, &args.c),
        Format::Csv => {
            let rows = seq.selected().iter().map(|a| vec![a.level.to_string(), a.index.to_string()]);
            run.csv_header(None) + &csv_rows(&["level", "index"], rows)?
        }
    }))
}

fn violation_json(v: &Violation) -> Value {
    json!({
        "kind": v.kind.to_string(),
        "points": v.points.iter().map(|p| json!([p.a.to_string(), p.lambda.to_string()])).collect::<Vec<_>>(),
        "lhs": v.lhs.to_string(),
        "rhs": v.rhs.to_string(),
    })
}

fn check_json(r: &CheckReport) -> Value {
    let coverage: serde_json::Map<String, Value> = r.coverage.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    json!({
        "instances": r.instances_checked,
        "violation_count": r.violation_count,
        "violations": r.violations.iter().map(violation_json).collect::<Vec<_>>(),
        "coverage": coverage,
    })
}

fn violation_text(v: &Violation) -> String {
    let pts: Vec<String> = v.points.iter().map(|p| p.to_string()).collect();
    format!("  {} at {}: {} < {}\n", v.kind, pts.join(" -> "), v.lhs, v.rhs)
}

fn check(run: &Run, args: &CheckArgs) -> Result<Outcome> {
    let (f, c) = target_function(args.target, args.c.as_ref())?;
    let lambda_max = match args.lambda_max {
        Some(m) => m,
        None => i64::try_from(c.ceil()).map_err(|_| anyhow!("C too large"))? + 6,
    };
    if lambda_max < args.lambda_min {
        bail!("--lambda-max {lambda_max} is below --lambda-min {}", args.lambda_min);
    }
    if args.grid_exp > 16 {
        bail!("--grid-exp must be at most 16, got {}", args.grid_exp);
    }
    let mut grid = CheckGrid::with_integer_lambdas(c.clone(), args.grid_exp, args.lambda_min, lambda_max, &args.extra_lambda);
    grid.max_reported = args.max_report;
    let report = check_supersolution(f.as_ref(), &grid)?;
    let violations = !report.is_clean();

    let json_report = || {
        json!({
            "function": f.name(),
            "clean": !violations,
            "checks": {
                "obstacle": check_json(&report.obstacle),
                "concavity": check_json(&report.concavity),
                "jump": check_json(&report.jump),
                "main": check_json(&report.main.report),
            },
            "main_equivalence_holds": report.main.equivalence_holds,
            "reduction_consistent": report.reduction_consistent,
            "provenance": run.provenance(Some(grid.describe())),
        })
    };
    let body = match run.format {
        Format::Json => pretty(&json_report()),
        Format::Csv => {
            let rows = report.all_violations().map(|v| {
                let pts: Vec<String> = v.points.iter().map(|p| p.to_string()).collect();
                vec![v.kind.to_string(), pts.join(" -> "), v.lhs.to_string(), v.rhs.to_string()]
            });
            run.csv_header(Some(grid.describe())) + &csv_rows(&["kind", "points", "lhs", "rhs"], rows)?
        }
        Format::Text => {
            let mut s = format!("function: {}\ngrid: {}\n", f.name(), grid.describe());
            for r in [&report.obstacle, &report.concavity, &report.jump, &report.main.report] {
                s.push_str(&format!(
                    "{:<10} {:>12} instances, {} violations\n",
                    r.kind.to_string(),
                    r.instances_checked,
                    r.violation_count
                ));
            }
            s.push_str(&format!(
                "main inequality fails iff concavity or jump fails: {}\n",
                if report.reduction_consistent && report.main.equivalence_holds { "yes" } else { "no" }
            ));
            let mut coverage = top_level_coverage(&report.concavity.coverage);
            coverage.extend(top_level_coverage(&report.jump.coverage));
            let cov: Vec<String> = coverage.iter().map(|(k, v)| format!("{k}={v}")).collect();
            s.push_str(&format!("coverage: {}\n", cov.join(" ")));
            if violations {
                s.push_str("violations:\n");
                for v in report.all_violations() {
                    s.push_str(&violation_text(v));
                }
            }
            s.push_str(if violations { "result: FAIL\n" } else { "result: PASS\n" });
            s
        }
    };
    Ok(Outcome { body, violations })
}

fn limits(max_depth: u32) -> DpLimits {
    DpLimits {
        max_depth,
        ..DpLimits::from_env()
    }
}

fn search(run: &Run, args: &SearchArgs) -> Result<Outcome> {
    let lim = limits(args.max_depth);
    let (value, witness) = dp_max_levelset(&args.c, args.depth, &args.a, args.m, lim)?;
    let params = CandidateParams::new(args.c.clone())?;
    let bound = candidate_eval(&params, &BellmanPoint::new(args.a.to_general(), GeneralRational::from_integer(args.m)))?;
    let gap = &bound - &value.to_general();
    let convergence = match args.report_convergence {
        Some(d_max) => Some(convergence_report(&args.c, &args.a, args.m, d_max, lim)?),
        None => None,
    };
    if let Some(path) = &args.emit_witness {
        write_atomic(path, &sequence_artifact(&witness, &run.provenance(None)))?;
    }
    let header = format!("F_{}({}, {})", args.depth, q(&args.a), args.m);
    let body = match run.format {
        Format::Text => {
            let mut s = format!("{header} = {}\ncandidate bound: {bound}\ngap: {gap}\n", q(&value));
            let sel: Vec<String> = witness.selected().iter().map(|a| a.to_string()).collect();
            s.push_str(&format!("witness: {{{}}}\n", sel.join(", ")));
            if let Some(rows) = &convergence {
                s.push_str("depth  F_D  gap\n");
                for r in rows {
                    s.push_str(&format!("{:>5}  {}  {}\n", r.depth, q(&r.value), r.gap));
                }
            }
            s
        }
        Format::Json => pretty(&json!({
            "C": args.c.to_string(),
            "depth": args.depth,
            "A": q(&args.a),
            "m": args.m,
            "value": q(&value),
            "bound": bound.to_string(),
            "gap": gap.to_string(),
            "witness": witness.selected().iter().map(|a| json!([a.level, a.index])).collect::<Vec<_>>(),
            "convergence": convergence.as_ref().map(|rows| rows.iter().map(|r| json!({
                "depth": r.depth, "value": q(&r.value), "gap": r.gap.to_string()
            })).collect::<Vec<_>>()),
            "provenance": run.provenance(None),
        })),
        Format::Csv => {
            let rows: Vec<Vec<String>> = match &convergence {
                Some(rows) => rows
                    .iter()
                    .map(|r| vec![r.depth.to_string(), q(&r.value), r.bound.to_string(), r.gap.to_string()])
                    .collect(),
                None => vec![vec![args.depth.to_string(), q(&value), bound.to_string(), gap.to_string()]],
            };
            run.csv_header(None) + &csv_rows(&["depth", "value", "bound", "gap"], rows)?
        }
    };
    Ok(Outcome::ok(body))
}

fn table(run: &Run, args: &TableArgs) -> Result<Outcome> {
    let (grid, header, rows): (String, [&str; 3], Vec<Vec<String>>) = match args.kind {
        TableKind::Candidate => {
            let params = CandidateParams::new(args.c.clone())?;
            let hi = match args.lambda_max {
                Some(m) => m,
                None => i64::try_from(args.c.ceil()).map_err(|_| anyhow!("C too large"))? + 6,
            };
            if args.grid_exp > 16 {
                bail!("--grid-exp must be at most 16, got {}", args.grid_exp);
            }
            let rows = candidate_surface(&params, args.grid_exp, (args.lambda_min, hi))
                .into_iter()
                .map(|r| vec![r.a.to_string(), r.lambda.to_string(), r.value.to_string()])
                .collect();
            (
                format!("A in {{j/2^{}}} cap [0, {}]; lambda in {}..={}", args.grid_exp, args.c, args.lambda_min, hi),
                ["A", "lambda", "value"],
                rows,
            )
        }
        TableKind::Dp => {
            let t = dp_table(&args.c, args.depth, args.m_max, limits(args.max_depth))?;
            let rows = t
                .cells(args.depth)
                .into_iter()
                .map(|(a, m, v)| vec![q(&a), m.to_string(), q(&v)])
                .collect();
            (
                format!("a in {{j/2^{}}} cap [0, min(C, {})]; m in 0..={}", args.depth, args.depth + 1, args.m_max),
                ["a", "m", "value"],
                rows,
            )
        }
    };
    let body = match run.format {
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut o = serde_json::Map::new();
                    for (k, v) in header.iter().zip(r) {
                        o.insert(k.to_string(), json!(v));
                    }
                    Value::Object(o)
                })
                .collect();
            pretty(&json!({ "rows": rows, "provenance": run.provenance(Some(grid)) }))
        }
        _ => run.csv_header(Some(grid)) + &csv_rows(&header, rows)?,
    };
    Ok(Outcome::ok(body))
}

fn validate(run: &Run, args: &ValidateArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&args.path).with_context(|| format!("reading {}", args.path.display()))?;
    let seq = CarlesonSeq::from_json(&text).with_context(|| format!("in {}", args.path.display()))?;
    let report = seq.validate(&args.c);
    let body = match run.format {
        Format::Json => pretty(&json!({
            "depth": seq.depth(),
            "average_at_root": q(&report.average_at_root),
            "carleson_constant": q(&report.carleson_constant),
            "worst_witness": [report.worst_witness.level, report.worst_witness.index],
            "is_c_carleson": report.is_c_carleson,
            "generation_measures": seq.generation_measures().iter().map(q).collect::<Vec<_>>(),
            "level_sets": (0..=seq.depth() as i64 + 1)
                .map(|m| json!([m, q(&seq.level_set_measure(&GeneralRational::from_integer(m)))]))
                .collect::<Vec<_>>(),
            "provenance": run.provenance(None),
        })),
        _ => describe_sequence(&seq, &args.c),
    };
    Ok(Outcome {
        body,
        violations: !report.is_c_carleson,
    })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<DpError>() {
        Some(DpError::ResourceLimit { .. } | DpError::DepthLimit { .. }) => EXIT_RESOURCE,
        _ => EXIT_USAGE,
    }
}

fn run(args: Vec<OsString>) -> Result<ExitCode> {
    let cmd = Cli::command();
    let merged = config::merge_args(&cmd, args)?;
    let matches = match cmd.clone().try_get_matches_from(merged) {
        Ok(m) => m,
        Err(e) => {
            let code = e.exit_code();
            e.print()?;
            return Ok(ExitCode::from(code as u8));
        }
    };
    let cli = Cli::from_arg_matches(&matches)?;
    let resolved = config::resolved(&cmd, &matches);
    let mut stderr = std::io::stderr();
    for (k, v) in &resolved {
        writeln!(stderr, "config: {k} = {v}")?;
    }
    let default_format = match cli.command {
        Cmd::Construct(_) => Format::Json,
        Cmd::Table(_) => Format::Csv,
        _ => Format::Text,
    };
    let run = Run {
        resolved: &resolved,
        format: cli.format.unwrap_or(default_format),
    };
    let out = match &cli.command {
        Cmd::Eval(a) => eval(&run, a),
        Cmd::Construct(a) => construct(&run, a),
        Cmd::Check(a) => check(&run, a),
        Cmd::Search(a) => search(&run, a),
        Cmd::Table(a) => table(&run, a),
        Cmd::Validate(a) => validate(&run, a),
    }?;
    match &cli.output {
        Some(path) => write_atomic(path, &out.body)?,
        None => std::io::stdout().write_all(out.body.as_bytes())?,
    }
    Ok(if out.violations {
        ExitCode::from(EXIT_VIOLATIONS)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
