//! `jetalg` command-line front end.
//!
//! Exit codes: 0 verdict true or success, 1 verdict false, 2 usage or parse
//! error, 3 hypothesis violation.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use jetalg::corpus::{self, CorpusEntry};
use jetalg::lenard::{
    conserved_densities, extend, nl_power, order_growth, verify_commuting, Hierarchy, LenardError, LenardScheme,
    SEED_OFFSET_NOTE,
};
use jetalg::nonlocal::parity_class;
use jetalg::registry::{checks, schemes, CheckInput};
use jetalg::schema::OperatorSpec;
use jetalg::{lie_bracket, parse_function, DiffPoly, NonlocalOp};

#[derive(Parser)]
#[command(name = "jetalg", version, about = "Exact checks for recursion operators and Lenard-Magri hierarchies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Worker threads for bracket checks and corpus runs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct OpArg {
    /// Operator JSON file, corpus entry file, or built-in corpus name.
    #[arg(long)]
    op: String,
}

#[derive(Args)]
struct ChainArgs {
    #[command(flatten)]
    op: OpArg,
    /// Start of the chain: S_0 for the symmetry scheme, F_0 for the pair scheme.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    /// `symmetry` or `pair`.
    #[arg(long)]
    scheme: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    CheckHereditary(OpArg),
    CheckIntegrable {
        #[command(flatten)]
        op: OpArg,
        /// Test the pair (A, B) of L = A B^-1 instead.
        #[arg(long)]
        pair: bool,
    },
    CheckRecursion {
        #[command(flatten)]
        op: OpArg,
        #[arg(long)]
        seed: String,
    },
    Hierarchy {
        #[command(flatten)]
        chain: ChainArgs,
        /// Check all brackets and the order growth.
        #[arg(long)]
        verify: bool,
    },
    Densities {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, default_value_t = 1)]
        power: usize,
    },
    Power {
        #[command(flatten)]
        op: OpArg,
        #[arg(long)]
        power: usize,
    },
    /// `{F, G} = X_F(G) - X_G(F)`.
    Bracket {
        f: String,
        g: String,
    },
    Parse {
        expr: String,
    },
    /// Recomputes the verdicts of every built-in corpus entry.
    Corpus,
}

enum Failure {
    Usage(String),
    Violation(String),
}

type Outcome = Result<(Value, bool), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn lenard_failure(e: LenardError) -> Failure {
    if e.is_violation() {
        Failure::Violation(e.to_string())
    } else {
        Failure::Usage(e.to_string())
    }
}

struct Loaded {
    op: NonlocalOp,
    spec: OperatorSpec,
    entry: Option<CorpusEntry>,
}

fn load(arg: &OpArg) -> Result<Loaded, Failure> {
    let text = if Path::new(&arg.op).exists() {
        fs::read_to_string(&arg.op).map_err(|e| usage(format!("{}: {e}", arg.op)))?
    } else if let Some((_, text)) = corpus::BUILTIN.iter().find(|(name, _)| *name == arg.op) {
        text.to_string()
    } else {
        return Err(usage(format!("{}: no such file or built-in operator", arg.op)));
    };
    let (spec, entry) = corpus::load(&text).map_err(usage)?;
    let op = spec.to_operator().map_err(usage)?;
    Ok(Loaded { op, spec, entry })
}

fn parse(text: &str) -> Result<DiffPoly, Failure> {
    parse_function(text).map_err(|e| usage(format!("{text:?}: {e}")))
}

fn check(name: &str, op: &NonlocalOp, function: Option<&DiffPoly>) -> Outcome {
    let registry = checks();
    let verdict = registry.get(name).expect("built-in check").run(&CheckInput { op, function }).map_err(usage)?;
    Ok((verdict.to_json(), verdict.result))
}

fn verdict_json(key: &str, (cert, ok): (Value, bool)) -> (Value, bool) {
    let out = json!({ key: ok, "reason": cert["reason"], "certificate": cert });
    (out, ok)
}

fn chain(args: &ChainArgs, loaded: &Loaded) -> Result<Hierarchy, Failure> {
    let entry = loaded.entry.as_ref();
    let name = args.scheme.clone().or_else(|| entry.map(|e| e.scheme.clone())).unwrap_or_else(|| "symmetry".into());
    let registry = schemes();
    let factory = registry.get(&name).ok_or_else(|| usage(format!("unknown scheme {name:?}")))?;
    let scheme: Arc<dyn LenardScheme> = factory.build(&loaded.op).map_err(lenard_failure)?;
    let start = match args.seed.as_deref().or_else(|| entry.and_then(|e| e.start.as_deref())) {
        Some(s) => parse(s)?,
        None => scheme.default_starts().into_iter().next().ok_or_else(|| usage("operator has no seed; pass --seed"))?,
    };
    let steps = args.steps.or(entry.map(|e| e.steps)).unwrap_or(3);
    let h = Hierarchy::new(scheme, &start).map_err(lenard_failure)?;
    extend(&h, steps).map_err(lenard_failure)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::CheckHereditary(op) => Ok(verdict_json("hereditary", check("hereditary", &load(op)?.op, None)?)),
        Command::CheckIntegrable { op, pair } => {
            let name = if *pair { "integrable-pair" } else { "integrable" };
            Ok(verdict_json("integrable", check(name, &load(op)?.op, None)?))
        }
        Command::CheckRecursion { op, seed } => {
            let f = parse(seed)?;
            Ok(verdict_json("recursion", check("recursion", &load(op)?.op, Some(&f))?))
        }
        Command::Hierarchy { chain: args, verify } => {
            let loaded = load(&args.op)?;
            let mut h = chain(args, &loaded)?;
            if !*verify {
                let mut v = h.to_json(None);
                v["note"] = json!(SEED_OFFSET_NOTE);
                return Ok((v, true));
            }
            let report = verify_commuting(&mut h);
            let mut v = h.to_json(Some(&report));
            v["order_growth"] = json!(order_growth(&h));
            v["note"] = json!(SEED_OFFSET_NOTE);
            let grading = loaded.spec.grading().map_err(usage)?;
            if let Ok(pc) = parity_class(&loaded.op, &grading) {
                v["parity_class"] = json!(pc);
            }
            Ok((v, report.pairwise_zero))
        }
        Command::Densities { chain: args, power } => {
            let loaded = load(&args.op)?;
            let h = chain(args, &loaded)?;
            let records = conserved_densities(&loaded.op, *power, &h.chain).map_err(lenard_failure)?;
            let ok = records.iter().all(|r| r.failed_against.is_empty());
            let chain: Vec<String> = h.chain.iter().map(|s| s.to_string()).collect();
            Ok((json!({ "power": power, "chain": chain, "densities": records }), ok))
        }
        Command::Power { op, power } => {
            let lk = nl_power(&load(op)?.op, *power).map_err(lenard_failure)?;
            let spec = OperatorSpec::from_operator(&lk).map_err(usage)?;
            let qs: Vec<String> = lk.qs().iter().map(|q| q.to_string()).collect();
            Ok((json!({ "power": power, "operator": lk.to_string(), "spec": spec, "qs": qs }), true))
        }
        Command::Bracket { f, g } => {
            let b = lie_bracket(&parse(f)?, &parse(g)?);
            Ok((json!({ "bracket": b.to_string(), "zero": b.is_zero() }), true))
        }
        Command::Parse { expr } => {
            let p = parse(expr)?;
            Ok((json!({ "canonical": p.to_string(), "order": p.diff_order() }), true))
        }
        Command::Corpus => {
            let results: Vec<Value> = corpus::builtin()
                .par_iter()
                .map(|e| match e.evaluate() {
                    Ok(got) => {
                        json!({ "name": e.name, "expected": e.expected, "computed": got, "match": got == e.expected })
                    }
                    Err(err) => json!({ "name": e.name, "error": err.to_string(), "match": false }),
                })
                .collect();
            let ok = results.iter().all(|r| r["match"] == json!(true));
            Ok((json!({ "entries": results, "all_match": ok }), ok))
        }
    }
}

fn text(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Object(_) | Value::Array(_) if !is_empty(x) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        text(x, indent + 2, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(x))),
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                match x {
                    Value::Object(_) | Value::Array(_) if !is_empty(x) => {
                        out.push_str(&format!("{pad}-\n"));
                        text(x, indent + 2, out);
                    }
                    _ => out.push_str(&format!("{pad}- {}\n", scalar(x))),
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar(v))),
    }
}

fn is_empty(v: &Value) -> bool {
    match v {
        Value::Object(m) => m.is_empty(),
        Value::Array(a) => a.is_empty(),
        _ => false,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --jobs: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok((v, ok)) => {
            let out = match cli.format {
                Format::Json => serde_json::to_string_pretty(&v).expect("JSON values serialize") + "\n",
                Format::Text => {
                    let mut out = String::new();
                    text(&v, 0, &mut out);
                    out
                }
            };
            // A closed pipe downstream is not an error of ours.
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Violation(msg)) => {
            println!("{}", json!({ "hypothesis_violation": msg }));
            ExitCode::from(3)
        }
    }
}
