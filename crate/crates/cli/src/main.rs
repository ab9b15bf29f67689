//! JSON-in/JSON-out command line front end.
//!
//! Reads a problem file (function plus query), runs one operation, and
//! prints the result as JSON.  Exit codes: 0 on success, 2 on input
//! validation errors, 3 on mathematical precondition failures.

mod jsonio;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cpwl_core::cpwl::{CpwlFunction, Value};
use cpwl_core::exactla::{format_rational, QVector};
use cpwl_core::graphgeo::{self, GraphPoint};
use cpwl_core::oracle::{self, VerifyOptions};
use cpwl_core::{closedforms, secondorder};

use jsonio::{
    activity_json, build_function, cone_union_json, generated_json, generated_union_json,
    halfspace_json, parse_vector, subdiff_json, verify_json, witness_json, ProblemFileJson,
    QueryJson,
};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Math(String),
    Io(String),
}

impl From<cpwl_core::Error> for CliError {
    fn from(e: cpwl_core::Error) -> Self {
        if e.is_math_precondition() {
            CliError::Math(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "cpwl", version, about = "Exact generalized differentiation of convex piecewise linear functions")]
struct Cli {
    /// Problem file (JSON); stdin when omitted
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output file; stdout when omitted
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Pretty-print the JSON result
    #[arg(long, global = true)]
    pretty: bool,
    /// Worker threads for the enumeration internals
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Evaluate the function at x
    Eval,
    /// Active pieces K(x) and active constraints I(x)
    Activity,
    /// First-order subdifferential at x
    Subdiff,
    /// Decompose a subgradient v at x into multipliers
    Decompose,
    /// Prenormal cone to the subdifferential graph at (x, v)
    Prenormal,
    /// Precoderivative value at (x, v) along u
    Precoderivative,
    /// Limiting normal cone to the subdifferential graph at (x, v)
    NormalCone,
    /// Second-order subdifferential domain at (x, v)
    Dom2,
    /// Second-order subdifferential value at (x, v) along u
    Value2,
    /// Affine independence qualification at x
    Aiqc,
    /// Exact second-order sum rule check at (x, v) along u
    SumRule,
    /// Closed-form families (component max, sup-norm, box, 1-norm)
    ClosedForm {
        #[arg(long, value_enum)]
        family: Family,
    },
    /// Formula-vs-oracle verification report
    Verify,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Family {
    Cmax,
    Infnorm,
    Box,
    Onenorm,
}

impl Command {
    fn kind_name(&self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Activity => "activity",
            Command::Subdiff => "subdiff",
            Command::Decompose => "decompose",
            Command::Prenormal => "prenormal",
            Command::Precoderivative => "precoderivative",
            Command::NormalCone => "normal-cone",
            Command::Dom2 => "dom2",
            Command::Value2 => "value2",
            Command::Aiqc => "aiqc",
            Command::SumRule => "sum-rule",
            Command::ClosedForm { .. } => "closed-form",
            Command::Verify => "verify",
        }
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io(e.to_string())),
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::Io(e.to_string()))?;
            Ok(buf)
        }
    }
}

struct Query(QueryJson);

impl Query {
    fn vector(&self, name: &str) -> Result<QVector, CliError> {
        let lits = match name {
            "x" => &self.0.x,
            "v" => &self.0.v,
            "u" => &self.0.u,
            "w" => &self.0.w,
            _ => unreachable!(),
        };
        match lits {
            Some(l) => parse_vector(l),
            None => Err(CliError::Input(format!("query field `{name}` is required"))),
        }
    }
}

fn graph_point(f: &CpwlFunction, q: &Query) -> Result<GraphPoint, CliError> {
    Ok(GraphPoint::new(f, q.vector("x")?, q.vector("v")?)?)
}

fn run_command(cmd: &Command, input: &str) -> Result<serde_json::Value, CliError> {
    let problem: ProblemFileJson =
        serde_json::from_str(input).map_err(|e| CliError::Input(e.to_string()))?;
    let query = Query(problem.query.unwrap_or_default());
    if let Some(kind) = &query.0.kind {
        if kind != cmd.kind_name() {
            return Err(CliError::Input(format!(
                "query kind `{kind}` does not match subcommand `{}`",
                cmd.kind_name()
            )));
        }
    }
    let f = build_function(&problem.function)?;

    let result = match cmd {
        Command::Eval => {
            let x = query.vector("x")?;
            match f.evaluate(&x)? {
                Value::Finite(r) => json!({ "value": format_rational(&r) }),
                Value::PlusInfinity => json!({ "value": "inf" }),
            }
        }
        Command::Activity => {
            let x = query.vector("x")?;
            serde_json::to_value(activity_json(&f.activity(&x)?)).unwrap()
        }
        Command::Subdiff => {
            let x = query.vector("x")?;
            serde_json::to_value(subdiff_json(&f.subdifferential(&x)?)).unwrap()
        }
        Command::Decompose => {
            let g = graph_point(&f, &query)?;
            serde_json::to_value(witness_json(&g.witness)).unwrap()
        }
        Command::Prenormal => {
            let g = graph_point(&f, &query)?;
            let product = graphgeo::prenormal_cone_graph(&f, &g)?;
            json!({
                "f": generated_json(&product.first)?,
                "g": halfspace_json(&product.second),
            })
        }
        Command::Precoderivative => {
            let g = graph_point(&f, &query)?;
            let u = query.vector("u")?;
            match graphgeo::precoderivative(&f, &g, &u)? {
                None => json!({ "empty": true }),
                Some(c) => json!({ "empty": false, "value": generated_json(&c)? }),
            }
        }
        Command::NormalCone => {
            let g = graph_point(&f, &query)?;
            let union = secondorder::limiting_normal_cone(&f, &g)?;
            serde_json::to_value(cone_union_json(&union)?).unwrap()
        }
        Command::Dom2 => {
            let g = graph_point(&f, &query)?;
            let domain = secondorder::second_order_domain(&f, &g)?;
            serde_json::to_value(halfspace_json(&domain)).unwrap()
        }
        Command::Value2 => {
            let g = graph_point(&f, &query)?;
            let u = query.vector("u")?;
            let union = secondorder::second_order_value(&f, &g, &u)?;
            serde_json::to_value(generated_union_json(&union)?).unwrap()
        }
        Command::Aiqc => {
            let x = query.vector("x")?;
            json!({ "aiqc": secondorder::aiqc(&f, &x)? })
        }
        Command::SumRule => {
            let g = graph_point(&f, &query)?;
            let u = query.vector("u")?;
            json!({ "holds": secondorder::sum_rule_check(&f, &g, &u)? })
        }
        Command::ClosedForm { family } => run_closed_form(*family, &query)?,
        Command::Verify => {
            let mut options = VerifyOptions::default();
            if let Some(seed) = query.0.seed {
                options.seed = seed;
            }
            if let Some(probes) = query.0.probes {
                options.random_probes = probes;
            }
            let report = oracle::run_verification(&f, options)?;
            serde_json::to_value(verify_json(&report)).unwrap()
        }
    };
    Ok(result)
}

/// Closed-form families work directly on the query vectors; the function
/// block is still validated but only its dimension is consulted.
fn run_closed_form(family: Family, query: &Query) -> Result<serde_json::Value, CliError> {
    Ok(match family {
        Family::Cmax => {
            let x = query.vector("x")?;
            let v = query.vector("v")?;
            let u = query.vector("u")?;
            let value = closedforms::component_max_value(&x, &v, &u)?;
            json!({ "value": halfspace_json(&value) })
        }
        Family::Infnorm => {
            let v = query.vector("v")?;
            let u = query.vector("u")?;
            let domain = closedforms::inf_norm_domain(&v)?;
            let (bound, equality) = closedforms::inf_norm_value_bound(&v, &u)?;
            json!({
                "domain": halfspace_json(&domain),
                "value": generated_json(&bound)?,
                "equality": equality,
            })
        }
        Family::Box => {
            let v = query.vector("v")?;
            let x = query.vector("x")?;
            let u = query.vector("u")?;
            let (domain, value, _) = closedforms::box_indicator_domain_and_value(&v, &x, &u)?;
            json!({
                "domain": halfspace_json(&domain),
                "value": generated_json(&value)?,
            })
        }
        Family::Onenorm => {
            let x = query.vector("x")?;
            let v = query.vector("v")?;
            let w = query.vector("w")?;
            let (domain, value, _) = closedforms::one_norm_domain_and_value(&x, &v, &w)?;
            json!({
                "domain": halfspace_json(&domain),
                "value": halfspace_json(&value),
            })
        }
    })
}

fn write_output(
    path: &Option<PathBuf>,
    payload: &serde_json::Value,
    pretty: bool,
) -> Result<(), CliError> {
    let mut text = if pretty {
        serde_json::to_string_pretty(payload)
    } else {
        serde_json::to_string(payload)
    }
    .map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(e.to_string())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.parallel.max(1))
        .build_global();

    let outcome = read_input(&cli.input).and_then(|input| run_command(&cli.command, &input));
    match outcome {
        Ok(payload) => {
            if let Err(e) = write_output(&cli.output, &payload, cli.pretty) {
                eprintln!("error: {e:?}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let (code, slug, message) = match &err {
                CliError::Input(m) => (2, "invalid-input", m.clone()),
                CliError::Math(m) => (3, "precondition", m.clone()),
                CliError::Io(m) => (1, "io", m.clone()),
            };
            let payload = json!({ "error": { "code": slug, "message": message } });
            let _ = write_output(&cli.output, &payload, cli.pretty);
            ExitCode::from(code)
        }
    }
}
