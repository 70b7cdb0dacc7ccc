//! The `biasgraph` command.
//!
//! Exit codes: 0 when the query was answered, 1 for unreadable or invalid
//! models and failed queries, 2 for usage errors.
//!
//! With `--json` every subcommand prints one JSON object with a `command`
//! key plus the keys listed in the README.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use biasgraph_core::paths::restatus;
use biasgraph_core::sim::{
    build_scm, check_table, ci_test, sample, select, CoefficientSource, FaithfulnessReport, Predicate, SampleTable,
};
use biasgraph_core::{
    check_criterion, d_separated, enumerate_paths, has_disparity, is_bias, unfair_nodes, Criterion, CriterionOutcome,
    Dag, Error, PathTrace, SufficiencyMode,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::coeffs::parse_coefficients;
use crate::dot::{export_dot, DotOptions};
use crate::model::{serialize_model, ModelSpec};
use crate::parse::parse_model;

#[derive(Debug, Parser)]
#[command(
    name = "biasgraph",
    version,
    about = "Bias, disparity and d-separation queries on causal graphs"
)]
struct Cli {
    /// Print one JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a model file and summarize it.
    Check { file: PathBuf },
    /// List every path between two nodes with its open/closed status.
    Paths {
        file: PathBuf,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        /// Extra conditioning nodes, comma separated.
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
    },
    /// Decide d-separation of two nodes.
    Dsep {
        file: PathBuf,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
    },
    /// Is there a bias of X in Y (an unjustified edge X -> Y)?
    Bias {
        file: PathBuf,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
    },
    /// Is there a disparity of X in Y (a directed path through an unjustified edge)?
    Disparity {
        file: PathBuf,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
    },
    /// List every node with a disparity with respect to X.
    Unfair {
        file: PathBuf,
        #[arg(long)]
        x: Option<String>,
    },
    /// Evaluate the independence, separation and sufficiency criteria for the predictor.
    Fairness {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = CriterionArg::All)]
        criterion: CriterionArg,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        yhat: Option<String>,
    },
    /// Sample a linear-Gaussian model and test conditional independence.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Coefficient file; random coefficients drawn from the seed otherwise.
        #[arg(long)]
        coeffs: Option<PathBuf>,
        /// Row filter: `NODE>c`, `NODE<c`, `NODE top q` or `NODE bottom q`. Repeatable.
        #[arg(long)]
        select: Vec<String>,
        /// `X,Y` or `X,Y|A,B`. Defaults to the interest and outcome roles.
        #[arg(long)]
        test: Option<String>,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        /// Also compare every d-separation verdict with a Fisher-z test.
        #[arg(long)]
        faithfulness: bool,
        /// Largest conditioning set for `--faithfulness`.
        #[arg(long, default_value_t = 2)]
        max_given: usize,
    },
    /// Render the model in another format.
    Export {
        file: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        no_predictor: bool,
        #[arg(long)]
        left_to_right: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CriterionArg {
    Independence,
    Separation,
    Sufficiency,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Dot,
    /// Canonical model file.
    Cg,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Model(String),
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::Model(err.to_string())
    }
}

struct Report {
    text: String,
    json: Value,
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{}", e.render());
            return 2;
        }
    };
    match dispatch(cli.command) {
        Ok(report) => {
            let written = if cli.json {
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&report.json).expect("json values serialize")
                )
            } else {
                out.write_all(report.text.as_bytes())
            };
            if written.is_err() {
                return 1;
            }
            0
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "usage error: {msg}");
            2
        }
        Err(Failure::Model(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn load(path: &Path) -> Result<ModelSpec, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Model(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| Failure::Model(format!("{}: {e}", path.display())))
}

fn role(flag: Option<String>, declared: &Option<String>, flag_name: &str, role_name: &str) -> Result<String, Failure> {
    flag.or_else(|| declared.clone()).ok_or_else(|| {
        Failure::Usage(format!(
            "{flag_name} is required because the model declares no `{role_name}` line"
        ))
    })
}

fn dispatch(command: Command) -> Result<Report, Failure> {
    match command {
        Command::Check { file } => check(&load(&file)?),
        Command::Paths { file, from, to, given } => {
            let spec = load(&file)?;
            let x = role(from, &spec.interest, "--from", "interest")?;
            let y = role(to, &spec.outcome, "--to", "outcome")?;
            paths(&spec, &x, &y, &given)
        }
        Command::Dsep { file, x, y, given } => {
            let spec = load(&file)?;
            let x = role(x, &spec.interest, "--x", "interest")?;
            let y = role(y, &spec.outcome, "--y", "outcome")?;
            dsep(&spec, &x, &y, &given)
        }
        Command::Bias { file, x, y } => {
            let spec = load(&file)?;
            let x = role(x, &spec.interest, "--x", "interest")?;
            let y = role(y, &spec.outcome, "--y", "outcome")?;
            bias(&spec, &x, &y)
        }
        Command::Disparity { file, x, y } => {
            let spec = load(&file)?;
            let x = role(x, &spec.interest, "--x", "interest")?;
            let y = role(y, &spec.outcome, "--y", "outcome")?;
            disparity(&spec, &x, &y)
        }
        Command::Unfair { file, x } => {
            let spec = load(&file)?;
            let x = role(x, &spec.interest, "--x", "interest")?;
            unfair(&spec, &x)
        }
        Command::Fairness {
            file,
            criterion,
            x,
            y,
            yhat,
        } => {
            let spec = load(&file)?;
            let x = role(x, &spec.interest, "--x", "interest")?;
            let y = role(y, &spec.outcome, "--y", "outcome")?;
            let declared = spec.predictor.as_ref().map(|p| p.name.clone());
            let yhat = role(yhat, &declared, "--yhat", "predictor")?;
            fairness(&spec, criterion, &x, &y, &yhat)
        }
        Command::Simulate {
            file,
            samples,
            seed,
            coeffs,
            select,
            test,
            alpha,
            faithfulness,
            max_given,
        } => {
            let spec = load(&file)?;
            let predicates = select.iter().map(|s| parse_select(s)).collect::<Result<Vec<_>, _>>()?;
            let test = test.as_deref().map(parse_test).transpose()?;
            let options = SimOptions {
                samples,
                seed,
                coeffs,
                predicates,
                test,
                alpha,
                faithfulness,
                max_given,
            };
            simulate(&spec, &options)
        }
        Command::Export {
            file,
            format,
            no_predictor,
            left_to_right,
        } => {
            let spec = load(&file)?;
            let (name, rendered) = match format {
                Format::Dot => (
                    "dot",
                    export_dot(
                        &spec,
                        &DotOptions {
                            show_predictor: !no_predictor,
                            left_to_right,
                        },
                    ),
                ),
                Format::Cg => ("cg", serialize_model(&spec)),
            };
            Ok(Report {
                json: json!({"command": "export", "format": name, "output": rendered}),
                text: rendered,
            })
        }
    }
}

fn check(spec: &ModelSpec) -> Result<Report, Failure> {
    let dag = &spec.dag;
    let biased = dag.edges().iter().filter(|e| e.unjustified).count();
    let mut text = format!(
        "model {}: {} nodes, {} edges ({} unjustified)\n",
        spec.name,
        dag.len(),
        dag.edges().len(),
        biased
    );
    if let Some(x) = &spec.interest {
        writeln!(text, "interest: {x}").unwrap();
    }
    if let Some(y) = &spec.outcome {
        writeln!(text, "outcome: {y}").unwrap();
    }
    if let Some(p) = &spec.predictor {
        let features: Vec<&str> = p.predictor_set.iter().map(String::as_str).collect();
        write!(text, "predictor: {} from {}", p.name, features.join(", ")).unwrap();
        text.push_str(if p.deterministic { " (deterministic)\n" } else { "\n" });
    }
    let json = json!({
        "command": "check",
        "model": spec.name,
        "nodes": dag.nodes().iter().map(|n| json!({
            "name": n.name,
            "unobserved": n.unobserved,
            "conditioned": n.conditioned,
            "force": n.force,
        })).collect::<Vec<_>>(),
        "edges": dag.edges().iter().map(|e| json!({
            "source": e.source,
            "target": e.target,
            "unjustified": e.unjustified,
        })).collect::<Vec<_>>(),
        "interest": spec.interest,
        "outcome": spec.outcome,
        "predictor": spec.predictor.as_ref().map(|p| json!({
            "name": p.name,
            "features": p.predictor_set,
            "deterministic": p.deterministic,
        })),
    });
    Ok(Report { text, json })
}

fn path_json(trace: &PathTrace) -> Value {
    json!({
        "path": trace.to_string(),
        "nodes": trace.nodes,
        "roles": trace.roles,
        "status": trace.status,
        "blocking_nodes": trace.blocking_nodes,
    })
}

fn set_text<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    let items: Vec<&str> = items.into_iter().collect();
    format!("{{{}}}", items.join(", "))
}

fn paths(spec: &ModelSpec, x: &str, y: &str, given: &[String]) -> Result<Report, Failure> {
    let dag = spec.analysis_dag()?;
    let mut conditioned = dag.conditioned();
    for g in given {
        if !dag.contains(g) {
            return Err(Error::UnknownNode(g.clone()).into());
        }
        conditioned.insert(g);
    }
    let traces = enumerate_paths(&dag, x, y)?
        .iter()
        .map(|p| restatus(&dag, p, &conditioned))
        .collect::<Result<Vec<_>, _>>()?;
    let open = traces.iter().filter(|t| t.status.is_open()).count();

    let mut text = format!(
        "paths from {x} to {y} given {}\n",
        set_text(conditioned.iter().copied())
    );
    for t in &traces {
        if t.status.is_open() {
            writeln!(text, "  {t}  open").unwrap();
        } else {
            let blockers = t.blocking_nodes.iter().map(String::as_str);
            writeln!(text, "  {t}  closed at {}", set_text(blockers)).unwrap();
        }
    }
    writeln!(text, "{} paths, {open} open", traces.len()).unwrap();
    let json = json!({
        "command": "paths",
        "from": x,
        "to": y,
        "given": conditioned,
        "paths": traces.iter().map(path_json).collect::<Vec<_>>(),
        "open": open,
    });
    Ok(Report { text, json })
}

fn dsep(spec: &ModelSpec, x: &str, y: &str, given: &[String]) -> Result<Report, Failure> {
    let dag = spec.analysis_dag()?;
    let given: BTreeSet<&str> = given.iter().map(String::as_str).collect();
    let verdict = d_separated(&dag, x, y, &given)?;
    let word = if verdict.separated {
        "d-separated"
    } else {
        "d-connected"
    };
    let mut text = format!(
        "{word}: {x} and {y} given {}\n",
        set_text(verdict.conditioning_set.iter().map(String::as_str))
    );
    for t in &verdict.open_paths {
        writeln!(text, "open path: {t}").unwrap();
    }
    let json = json!({
        "command": "dsep",
        "x": x,
        "y": y,
        "given": verdict.conditioning_set,
        "separated": verdict.separated,
        "open_paths": verdict.open_paths.iter().map(path_json).collect::<Vec<_>>(),
    });
    Ok(Report { text, json })
}

fn bias(spec: &ModelSpec, x: &str, y: &str) -> Result<Report, Failure> {
    let dag = spec.analysis_dag()?;
    let present = is_bias(&dag, x, y)?;
    let reason = match dag.edge(x, y) {
        Some(e) if e.unjustified => format!("{x} -> {y} is unjustified"),
        Some(_) => format!("{x} -> {y} is justified"),
        None => format!("no edge {x} -> {y}"),
    };
    let text = format!("BIAS: {} ({reason})\n", yes_no(present));
    let json = json!({"command": "bias", "x": x, "y": y, "bias": present, "edge": dag.edge(x, y).is_some()});
    Ok(Report { text, json })
}

fn yes_no(flag: bool) -> &'static str {
    if flag {
        "yes"
    } else {
        "no"
    }
}

fn disparity(spec: &ModelSpec, x: &str, y: &str) -> Result<Report, Failure> {
    let dag = spec.analysis_dag()?;
    let verdict = has_disparity(&dag, x, y)?;
    let mut text = format!("DISPARITY: {}\n", yes_no(verdict.present));
    for w in &verdict.witnesses {
        writeln!(text, "witness: {w}").unwrap();
    }
    let json = json!({
        "command": "disparity",
        "x": x,
        "y": y,
        "disparity": verdict.present,
        "witnesses": verdict.witnesses.iter().map(|w| json!({
            "path": w.to_string(),
            "nodes": w.nodes,
            "biased_edges": w.biased_edges().map(|(a, b)| [a, b]).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });
    Ok(Report { text, json })
}

fn unfair(spec: &ModelSpec, x: &str) -> Result<Report, Failure> {
    let dag = spec.analysis_dag()?;
    let nodes = unfair_nodes(&dag, x)?;
    let listed = if nodes.is_empty() {
        "none".to_string()
    } else {
        nodes.iter().copied().collect::<Vec<_>>().join(", ")
    };
    let text = format!("unfair with respect to {x}: {listed}\n");
    let json = json!({"command": "unfair", "x": x, "unfair": nodes});
    Ok(Report { text, json })
}

fn fairness(spec: &ModelSpec, which: CriterionArg, x: &str, y: &str, yhat: &str) -> Result<Report, Failure> {
    let dag = spec.analysis_dag()?;
    let structural = Criterion::Sufficiency(SufficiencyMode::Structural);
    let deterministic = Criterion::Sufficiency(SufficiencyMode::Deterministic);
    let criteria = match which {
        CriterionArg::Independence => vec![Criterion::Independence],
        CriterionArg::Separation => vec![Criterion::Separation],
        CriterionArg::Sufficiency => vec![structural, deterministic],
        CriterionArg::All => vec![
            Criterion::Independence,
            Criterion::Separation,
            structural,
            deterministic,
        ],
    };
    let outcomes = criteria
        .into_iter()
        .map(|c| check_criterion(&dag, c, x, y, yhat))
        .collect::<Result<Vec<CriterionOutcome>, _>>()?;
    let in_outcome = has_disparity(&dag, x, y)?.present;
    let in_prediction = has_disparity(&dag, x, yhat)?.present;

    let mut text = format!("fairness of {yhat} for {x} (outcome {y})\n");
    for o in &outcomes {
        write!(text, "{}: {}", o.criterion, o.verdict).unwrap();
        if let Some(first) = o.open_paths.first() {
            write!(text, " (open path: {first})").unwrap();
        }
        text.push('\n');
    }
    writeln!(text, "disparity in {y}: {}", yes_no(in_outcome)).unwrap();
    writeln!(text, "disparity in {yhat}: {}", yes_no(in_prediction)).unwrap();
    let json = json!({
        "command": "fairness",
        "x": x,
        "y": y,
        "yhat": yhat,
        "criteria": outcomes.iter().map(|o| json!({
            "criterion": o.criterion.to_string(),
            "verdict": o.verdict,
            "open_paths": o.open_paths.iter().map(path_json).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "disparity_in_outcome": in_outcome,
        "disparity_in_prediction": in_prediction,
    });
    Ok(Report { text, json })
}

/// Parses `NODE>c`, `NODE<c`, `NODE top q` or `NODE bottom q`.
fn parse_select(raw: &str) -> Result<(String, Predicate), Failure> {
    let bad = || {
        Failure::Usage(format!(
            "cannot read selection `{raw}`; expected NODE>c, NODE<c, NODE top q or NODE bottom q"
        ))
    };
    let number = |s: &str| s.trim().parse::<f64>().ok().filter(|v| !v.is_nan()).ok_or_else(bad);
    if let Some((node, value)) = raw.split_once('>') {
        return Ok((node.trim().to_string(), Predicate::Above(number(value)?)));
    }
    if let Some((node, value)) = raw.split_once('<') {
        return Ok((node.trim().to_string(), Predicate::Below(number(value)?)));
    }
    match raw.split_whitespace().collect::<Vec<_>>()[..] {
        [node, "top", q] => Ok((node.to_string(), Predicate::Top(number(q)?))),
        [node, "bottom", q] => Ok((node.to_string(), Predicate::Bottom(number(q)?))),
        _ => Err(bad()),
    }
}

struct TestSpec {
    x: String,
    y: String,
    given: Vec<String>,
}

/// Parses `X,Y` or `X,Y|A,B`.
fn parse_test(raw: &str) -> Result<TestSpec, Failure> {
    let bad = || Failure::Usage(format!("cannot read test `{raw}`; expected X,Y or X,Y|A,B"));
    let (pair, given) = raw.split_once('|').unwrap_or((raw, ""));
    let pair: Vec<&str> = pair.split(',').map(str::trim).collect();
    let [x, y] = pair[..] else {
        return Err(bad());
    };
    let given: Vec<String> = given
        .split(',')
        .map(str::trim)
        .filter(|g| !g.is_empty())
        .map(String::from)
        .collect();
    if x.is_empty() || y.is_empty() {
        return Err(bad());
    }
    Ok(TestSpec {
        x: x.into(),
        y: y.into(),
        given,
    })
}

struct SimOptions {
    samples: usize,
    seed: u64,
    coeffs: Option<PathBuf>,
    predicates: Vec<(String, Predicate)>,
    test: Option<TestSpec>,
    alpha: f64,
    faithfulness: bool,
    max_given: usize,
}

fn column_summary(table: &SampleTable) -> Vec<(String, f64, f64, bool)> {
    let all: Vec<usize> = (0..table.names().len()).collect();
    let cov = table.covariance(&all);
    table
        .names()
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mean = table.mean(name).unwrap_or(f64::NAN);
            (name.clone(), mean, cov[(i, i)].sqrt(), table.is_observed(name))
        })
        .collect()
}

fn simulate(spec: &ModelSpec, opt: &SimOptions) -> Result<Report, Failure> {
    let dag: Dag = spec.analysis_dag()?;
    let source = match &opt.coeffs {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Model(format!("cannot read {}: {e}", path.display())))?;
            parse_coefficients(&text)
                .map_err(|e| Failure::Model(format!("{}: {e}", path.display())))?
                .into_source()
        }
        None => CoefficientSource::Random { seed: opt.seed },
    };
    let scm = build_scm(&dag, source)?;
    let mut table = sample(&scm, opt.samples, opt.seed)?;
    let mut text = format!("simulated {} rows (seed {})\n", table.n(), opt.seed);
    for (node, predicate) in &opt.predicates {
        table = select(&table, node, *predicate)?;
        writeln!(text, "selected {node} {predicate}: {} rows", table.n()).unwrap();
    }

    let default_test = match (&spec.interest, &spec.outcome) {
        (Some(x), Some(y)) => Some(TestSpec {
            x: x.clone(),
            y: y.clone(),
            given: Vec::new(),
        }),
        _ => None,
    };
    let test = match opt.test.as_ref().or(default_test.as_ref()) {
        Some(t) => {
            let given: BTreeSet<&str> = t.given.iter().map(String::as_str).collect();
            let result = ci_test(&table, &t.x, &t.y, &given, opt.alpha)?;
            writeln!(
                text,
                "corr({}, {} | {}) = {:.4}, z = {:.3}, independent at alpha {}: {}",
                t.x,
                t.y,
                set_text(given.iter().copied()),
                result.r,
                result.z,
                opt.alpha,
                yes_no(result.independent)
            )
            .unwrap();
            Some(json!({
                "x": t.x,
                "y": t.y,
                "given": given,
                "r": result.r,
                "z": result.z,
                "alpha": result.alpha,
                "independent": result.independent,
                "n_effective": result.n_effective,
            }))
        }
        None => None,
    };

    let columns = column_summary(&table);
    if test.is_none() {
        for (name, mean, sd, observed) in &columns {
            let note = if *observed { "" } else { " (unobserved)" };
            writeln!(text, "  {name}: mean {mean:.4}, sd {sd:.4}{note}").unwrap();
        }
    }

    let faithfulness = if opt.faithfulness {
        let report: FaithfulnessReport = check_table(&dag, &table, opt.alpha, opt.max_given)?;
        writeln!(
            text,
            "faithfulness: {} checks, {} agree, {} false dependencies, {} missed dependencies",
            report.checks.len(),
            report.agreements(),
            report.false_dependencies(),
            report.missed_dependencies()
        )
        .unwrap();
        for c in report.checks.iter().filter(|c| !c.agrees()) {
            let structural = if c.d_separated { "d-separated" } else { "d-connected" };
            let given = set_text(c.given.iter().map(String::as_str));
            writeln!(
                text,
                "  mismatch: {} and {} given {given} are {structural}, r = {:.4}",
                c.x, c.y, c.test.r
            )
            .unwrap();
        }
        Some(json!({
            "checks": report.checks.len(),
            "agreements": report.agreements(),
            "false_dependencies": report.false_dependencies(),
            "missed_dependencies": report.missed_dependencies(),
            "mismatches": report.checks.iter().filter(|c| !c.agrees()).map(|c| json!({
                "x": c.x,
                "y": c.y,
                "given": c.given,
                "d_separated": c.d_separated,
                "r": c.test.r,
            })).collect::<Vec<_>>(),
        }))
    } else {
        None
    };

    let json = json!({
        "command": "simulate",
        "samples": opt.samples,
        "seed": opt.seed,
        "rows": table.n(),
        "selections": table.selections(),
        "coefficients": scm.coefficients.iter().map(|((s, t), c)| json!({
            "source": s,
            "target": t,
            "value": c,
        })).collect::<Vec<_>>(),
        "columns": columns.iter().map(|(name, mean, sd, observed)| json!({
            "name": name,
            "mean": mean,
            "sd": sd,
            "observed": observed,
        })).collect::<Vec<_>>(),
        "test": test,
        "faithfulness": faithfulness,
    });
    Ok(Report { text, json })
}
