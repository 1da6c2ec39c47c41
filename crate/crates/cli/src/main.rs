use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use leibniz::verifier::{catalog, catalog_entry, run_entry, IdentityReport};
use leibniz::{
    eval_jet, expand_derivative, nth_differential, parse_decls, parse_expr, parse_jets, partial_differential, render,
    total_differential, DependencyDecls, DiffConfig, DiffError, EvalError, Execution, Expr, ParseError, SuiteOptions,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "leibniz", version, about = "Differentials as algebraic objects, checked with exact infinitesimals")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Declarations file (`base`, `var`, `depends`, `function` lines).
    #[arg(long, global = true)]
    decls: Option<PathBuf>,

    /// Truncation order for infinitesimal arithmetic.
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(i64).range(3..))]
    trunc: i64,

    /// Seed for random jet assignments.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Random jet assignments per identity.
    #[arg(long, global = true, default_value_t = 5)]
    count: usize,

    /// Print LaTeX instead of the text syntax.
    #[arg(long, global = true)]
    latex: bool,

    /// Print one JSON record per result.
    #[arg(long, global = true, conflicts_with = "latex")]
    structured: bool,
}

#[derive(Subcommand)]
enum Command {
    /// n-th differential of an expression.
    Diff {
        expr: String,
        #[arg(long, default_value_t = 1)]
        order: u32,
    },
    /// Expanded n-th derivative with respect to a variable.
    Derive {
        expr: String,
        #[arg(long)]
        wrt: String,
        #[arg(short = 'n', long = "order", default_value_t = 1)]
        n: u32,
    },
    /// Partial differential with the listed variables varying; total differential when
    /// none are listed.
    Partial { expr: String, vary: Vec<String> },
    /// Evaluate under a jet assignment and print the series, standard part and principal part.
    Eval {
        expr: String,
        #[arg(long)]
        jets: PathBuf,
    },
    /// Check a catalog identity, or `all`.
    Verify { name: String },
    /// Normalize and print an expression.
    Render { expr: String },
}

enum Failure {
    Usage(String),
    Check(String),
}

impl Failure {
    fn parse(src: &str, e: ParseError) -> Self {
        Failure::Usage(format_parse_error(src, &e))
    }
}

fn format_parse_error(src: &str, e: &ParseError) -> String {
    let line = src.lines().nth(e.line.saturating_sub(1)).unwrap_or("");
    let caret = " ".repeat(e.column.saturating_sub(1)) + "^";
    format!("{e}\n  {line}\n  {caret}")
}

fn diff_failure(e: DiffError) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_decls(cli: &Cli) -> Result<DependencyDecls, Failure> {
    match &cli.decls {
        None => Ok(DependencyDecls::new()),
        Some(p) => {
            let src = read(p)?;
            parse_decls(&src).map_err(|e| Failure::Usage(format!("{}: {}", p.display(), format_parse_error(&src, &e))))
        }
    }
}

fn emit_expr(cli: &Cli, input: &str, e: &Expr) {
    if cli.structured {
        let rec = json!({
            "input": input,
            "text": render::text(e),
            "latex": render::latex(e),
            "grade": e.grade().to_string(),
        });
        println!("{rec}");
    } else if cli.latex {
        println!("{}", render::latex(e));
    } else {
        println!("{}", render::text(e));
    }
}

fn emit_report(cli: &Cli, r: &IdentityReport) {
    if cli.structured {
        let mut v = serde_json::to_value(r).expect("report serializes");
        v["expectation_met"] = json!(r.expectation_met());
        println!("{v}");
    } else {
        print!("{}", r.to_text());
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = DiffConfig::default();
    let decls = load_decls(cli)?;
    let parse = |src: &str| parse_expr(src, &decls).map_err(|e| Failure::parse(src, e));
    match &cli.command {
        Command::Diff { expr, order } => {
            let e = parse(expr)?;
            let d = nth_differential(&e, *order, &decls, &cfg).map_err(diff_failure)?;
            emit_expr(cli, expr, &d);
        }
        Command::Derive { expr, wrt, n } => {
            let e = parse(expr)?;
            let d = expand_derivative(&e, wrt, *n, &decls, &cfg).map_err(diff_failure)?;
            emit_expr(cli, expr, &d);
        }
        Command::Partial { expr, vary } => {
            let e = parse(expr)?;
            let d = if vary.is_empty() {
                total_differential(&e, &decls, &cfg)
            } else {
                partial_differential(&e, vary, &decls, &cfg)
            }
            .map_err(diff_failure)?;
            emit_expr(cli, expr, &d);
        }
        Command::Render { expr } => {
            let e = parse(expr)?;
            emit_expr(cli, expr, &e);
        }
        Command::Eval { expr, jets } => {
            let src = read(jets)?;
            let (merged, assignment) = parse_jets(&src, &decls)
                .map_err(|e| Failure::Usage(format!("{}: {}", jets.display(), format_parse_error(&src, &e))))?;
            let e = parse_expr(expr, &merged).map_err(|e| Failure::parse(expr, e))?;
            let value = eval_jet(&e, &assignment.with_trunc(cli.trunc), &merged).map_err(|err| match err {
                EvalError::UnboundVariable(_) | EvalError::UnboundFunction(_) => Failure::Usage(err.to_string()),
                other => Failure::Check(other.to_string()),
            })?;
            let st = value.standard_part().map_err(|e| Failure::Check(EvalError::from(e).to_string()))?;
            let pt = value.principal_part();
            if cli.structured {
                let rec = json!({
                    "input": expr,
                    "value": value.to_string(),
                    "st": st.to_string(),
                    "pt": pt.to_string(),
                    "valuation": value.valuation().to_string(),
                });
                println!("{rec}");
            } else {
                println!("{value}");
                println!("st = {st}");
                println!("pt = {pt}");
            }
        }
        Command::Verify { name } => {
            let entries = if name == "all" {
                catalog()
            } else {
                vec![catalog_entry(name).ok_or_else(|| {
                    let names: Vec<&str> = catalog().iter().map(|e| e.name).collect();
                    Failure::Usage(format!("unknown identity `{name}`; known: {}, all", names.join(", ")))
                })?]
            };
            let opts =
                SuiteOptions { seed: cli.seed, count: cli.count, trunc: cli.trunc, execution: Execution::Parallel };
            let all = catalog();
            let mut ok = true;
            for entry in &entries {
                let index = all.iter().position(|e| e.name == entry.name).expect("catalog entry");
                let report = run_entry(index, entry, &opts, &cfg);
                ok &= report.expectation_met();
                emit_report(cli, &report);
            }
            if !ok {
                return Err(Failure::Check("some identities did not meet their expected outcome".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
