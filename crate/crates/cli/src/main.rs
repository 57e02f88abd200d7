use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bellforge::cases::{all_case_names, run_cases, run_recipe, CaseOptions, CaseResult};
use bellforge::construct::build;
use bellforge::linalg::set_dense_qubit_cap;
use bellforge::recipe::parse_recipe;
use bellforge::report::{emit_construction_table, emit_table, fmt_with_surd, TableFormat};
use bellforge::uncertainty::uncertainty_sweep;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bellforge", version, about = "Bell inequalities from pseudo Pauli operators")]
struct Cli {
    /// Seed for see-saw restarts and random sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "BELLFORGE_THREADS")]
    threads: Option<usize>,
    /// Largest qubit count rendered as a dense matrix.
    #[arg(long, global = true)]
    cap_qubits: Option<usize>,
    /// See-saw restarts per case.
    #[arg(long, global = true, default_value_t = 16)]
    restarts: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a recipe file and write its bounds report as JSON.
    Build {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run named cases (or recipe files) against their expected values.
    Verify {
        #[arg(long = "case", required_unless_present = "all")]
        cases: Vec<String>,
        #[arg(long, conflicts_with = "cases")]
        all: bool,
        /// Print every check, not only failures.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Emit a table of case results.
    Table {
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
        #[arg(long, value_enum, default_value_t = Layout::Summary)]
        layout: Layout,
        /// Cases to include; all when omitted.
        #[arg(long = "case")]
        cases: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo check of the quadratic uncertainty relation.
    UncertaintySweep {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// List case names.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Layout {
    Summary,
    Construction,
}

fn is_recipe_path(name: &str) -> bool {
    name.ends_with(".json") || Path::new(name).is_file()
}

fn load_recipe(path: &Path) -> Result<bellforge::construct::BellRecipe> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_recipe(&text).with_context(|| format!("in {}", path.display()))
}

fn run_named(names: &[String], opts: &CaseOptions) -> Result<Vec<CaseResult>> {
    let (files, catalog): (Vec<String>, Vec<String>) = names.iter().cloned().partition(|n| is_recipe_path(n));
    let mut out = Vec::new();
    for (name, r) in run_cases(&catalog, opts) {
        out.push(r.with_context(|| format!("case {name}"))?);
    }
    for f in files {
        let recipe = load_recipe(Path::new(&f))?;
        out.push(run_recipe(&f, &recipe, opts)?);
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_case(r: &CaseResult, verbose: bool) {
    let tag = if r.passed { "PASS" } else { "FAIL" };
    println!("[{tag}] {} ({})", r.name, r.title);
    for c in &r.checks {
        if verbose || !c.passed {
            let mark = if c.passed { "ok " } else { "BAD" };
            println!(
                "    {mark} {}: observed {} vs {} ({:?}) [{}]",
                c.quantity, c.observed, c.target, c.relation, c.anchor
            );
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(cap) = cli.cap_qubits {
        set_dense_qubit_cap(cap);
    }
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let opts = CaseOptions {
        seed: cli.seed,
        restarts: cli.restarts,
        ..CaseOptions::default()
    };
    match cli.command {
        Command::Build { config, out } => {
            let recipe = load_recipe(&config)?;
            let c = build(&recipe)?;
            let result = run_recipe(&config.display().to_string(), &recipe, &opts)?;
            let doc = json!({
                "expression": c.expression,
                "settings": c.settings,
                "bindings": c.bindings,
                "beta_q": c.beta_q,
                "result": result,
            });
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            write_or_print(out.as_deref(), &text)?;
            if out.is_some() {
                eprintln!("{}", result.expressions[0]);
                if let Some(b) = &result.bounds {
                    eprintln!(
                        "classical [{}, {}], quantum >= {}",
                        fmt_with_surd(b.classical_min),
                        fmt_with_surd(b.classical_max),
                        fmt_with_surd(b.quantum_lower)
                    );
                }
            }
            Ok(result.passed)
        }
        Command::Verify { cases, all, verbose } => {
            let names = if all { all_case_names() } else { cases };
            let results = run_named(&names, &opts)?;
            for r in &results {
                print_case(r, verbose);
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} cases, {} failed", results.len(), failed);
            Ok(failed == 0)
        }
        Command::Table {
            format,
            layout,
            cases,
            out,
        } => {
            let names = if cases.is_empty() { all_case_names() } else { cases };
            let results = run_named(&names, &opts)?;
            let text = match (layout, format) {
                (Layout::Construction, Format::Md) => emit_construction_table(&results),
                (Layout::Construction, _) => bail!("the construction layout is markdown only"),
                (Layout::Summary, f) => emit_table(
                    &results,
                    match f {
                        Format::Md => TableFormat::Markdown,
                        Format::Csv => TableFormat::Csv,
                        Format::Json => TableFormat::Json,
                    },
                )?,
            };
            write_or_print(out.as_deref(), &text)?;
            Ok(results.iter().all(|r| r.passed))
        }
        Command::UncertaintySweep { samples } => {
            let s = uncertainty_sweep(samples, cli.seed)?;
            println!("{}", serde_json::to_string_pretty(&s)?);
            Ok(s.relation_holds && s.lemma_holds)
        }
        Command::List => {
            for n in all_case_names() {
                println!("{n}");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
