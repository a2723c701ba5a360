//! `folio`: parse, normalize, analyze, rewrite, evaluate, and build gadget
//! instances for relational first-order sentences over finite structures.
//!
//! Exit codes: 0 success (or `eval` true), 1 `eval` false, 2 input or schema
//! error, 3 size limit exceeded, 4 selftest violation.

mod io;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use folio_core::engine::{bounded_var_eval_with_stats, fpt_model_check};
use folio_core::gadgets::{accordion_step, clique_gadget};
use folio_core::logic::{naive_eval, print_formula, Assignment, Formula, Signature};
use folio_core::normalize::{is_layered, is_organized, lay_traced, organize_traced, RewriteStep};
use folio_core::thickness::{analyze, block_hypergraph, minimize_variables, positively_combined_subformulas};

const EXIT_FALSE: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_SELFTEST: u8 = 4;

#[derive(Parser)]
#[command(name = "folio", version, about = "Analyze and model-check relational first-order sentences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Org,
    Lay,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Naive,
    Bounded,
    Fpt,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a query and report its basic measures
    Parse {
        #[arg(long)]
        query: PathBuf,
        /// structure file whose signature types the query
        #[arg(long)]
        db: Option<PathBuf>,
        /// explicit signature JSON (otherwise inferred one-sorted)
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Rewrite a query into organized or layered normal form
    Normalize {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        db: Option<PathBuf>,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Form::Lay)]
        form: Form,
        /// verify the normal-form grammar on every leaf
        #[arg(long)]
        check: bool,
        /// emit rewrite steps as JSON lines on stderr
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = 64)]
        max_nodes: usize,
    },
    /// Thickness analysis of a query
    Thickness {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        db: Option<PathBuf>,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        /// emit the block hypergraphs of the layered form as DOT
        #[arg(long)]
        dot: bool,
        #[arg(long, default_value_t = 64)]
        max_nodes: usize,
        /// cap on treewidth-search vertices (query variables), at most 20
        #[arg(long, default_value_t = 20)]
        tw_limit: usize,
    },
    /// Rewrite a query to an equivalent one using thickness-many variables
    Rewrite {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        db: Option<PathBuf>,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 64)]
        max_nodes: usize,
        /// cap on treewidth-search vertices (query variables), at most 20
        #[arg(long, default_value_t = 20)]
        tw_limit: usize,
    },
    /// Evaluate a sentence on a finite structure
    Eval {
        #[arg(long, value_enum, default_value_t = Engine::Fpt)]
        engine: Engine,
        /// structure: JSON file or a directory of per-relation CSVs
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        query: PathBuf,
        /// emit {max_table_rows, node_count, wall_ms} as JSON
        #[arg(long)]
        stats: bool,
        /// cross-check the result against the naive oracle
        #[arg(long)]
        verify: bool,
    },
    /// Build hardness-gadget instances
    Gadget {
        #[command(subcommand)]
        gadget: GadgetCommand,
    },
    /// Run the seeded randomized invariant suites
    Selftest {
        /// seed (also via FOLIO_SEED; default 61456)
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        /// deliberately corrupt one suite to prove the harness reports
        #[arg(long, hide = true)]
        inject_mutant: bool,
    },
}

#[derive(Subcommand)]
enum GadgetCommand {
    /// Structure whose satisfaction of the query detects a k-clique
    Clique {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        query: PathBuf,
        /// edge-list text: one `u v` per line
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One accordion step: transform a psi-structure into a phi-structure
    Accordion {
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        /// structure over psi's signature
        #[arg(long)]
        db: PathBuf,
        /// signature for parsing phi (defaults to the db signature extended
        /// by inference)
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    // die quietly when stdout is a closed pipe (e.g. `folio ... | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<folio_core::Error>()
                .map(|e| match e {
                    folio_core::Error::SizeLimit(_) => EXIT_LIMIT,
                    _ => EXIT_ERROR,
                })
                .unwrap_or(EXIT_ERROR);
            ExitCode::from(code)
        }
    }
}

fn load_query(
    query: &std::path::Path,
    db: &Option<PathBuf>,
    sig: &Option<PathBuf>,
) -> Result<(Formula, Signature)> {
    let text = io::load_query_text(query)?;
    let explicit = match (sig, db) {
        (Some(path), _) => Some(io::load_signature(path)?),
        (None, Some(path)) => Some(io::load_structure(path)?.signature().clone()),
        (None, None) => None,
    };
    io::parse_query(&text, explicit.as_ref())
}

fn enforce_node_limit(f: &Formula, max_nodes: usize) -> Result<()> {
    let n = f.node_count();
    if n > max_nodes {
        return Err(folio_core::Error::SizeLimit(format!(
            "query has {n} AST nodes, limit {max_nodes} (raise with --max-nodes)"
        ))
        .into());
    }
    Ok(())
}

/// The hypergraphs the thickness pipeline searches have the query's
/// variables as vertices, so the vertex limit is enforced upfront.
fn enforce_tw_limit(f: &Formula, tw_limit: usize) -> Result<()> {
    if tw_limit == 0 || tw_limit > folio_core::hypergraph::DEFAULT_TREEWIDTH_LIMIT {
        return Err(anyhow!(
            "--tw-limit must be between 1 and {}",
            folio_core::hypergraph::DEFAULT_TREEWIDTH_LIMIT
        ));
    }
    let n = f.all_variables().len();
    if n > tw_limit {
        return Err(folio_core::Error::SizeLimit(format!(
            "query uses {n} variables, treewidth-search limit {tw_limit}"
        ))
        .into());
    }
    Ok(())
}

fn print_trace(trace: &[RewriteStep]) {
    for step in trace {
        eprintln!("{}", serde_json::to_string(step).expect("steps serialize"));
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Parse { query, db, sig, json } => {
            let (f, _) = load_query(&query, &db, &sig)?;
            let free: Vec<String> = f.free_vars().into_iter().map(|v| v.name).collect();
            if json {
                let report = serde_json::json!({
                    "formula": print_formula(&f),
                    "free": free,
                    "width": f.width(),
                    "node_count": f.node_count(),
                    "variable_loose": f.is_variable_loose(),
                    "symbol_loose": f.is_symbol_loose(),
                    "positive": f.is_positive(),
                });
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!("{}", print_formula(&f));
                println!("free: {{{}}}", free.join(", "));
                println!("width: {}", f.width());
                println!(
                    "loose: {} (variables {}, symbols {})",
                    f.is_loose(),
                    f.is_variable_loose(),
                    f.is_symbol_loose()
                );
                println!("positive: {}", f.is_positive());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Normalize {
            query,
            db,
            sig,
            form,
            check,
            trace,
            max_nodes,
        } => {
            let (f, _) = load_query(&query, &db, &sig)?;
            enforce_node_limit(&f, max_nodes)?;
            let mut steps = Vec::new();
            let collector = trace.then_some(&mut steps);
            let out = match form {
                Form::Org => organize_traced(&f, collector)?,
                Form::Lay => lay_traced(&f, collector)?,
            };
            if trace {
                print_trace(&steps);
            }
            println!("{}", print_formula(&out));
            if check {
                let ok = positively_combined_subformulas(&out)
                    .iter()
                    .all(|(_, leaf)| match form {
                        Form::Org => is_organized(leaf),
                        Form::Lay => is_layered(leaf),
                    });
                if !ok {
                    return Err(anyhow!("normal-form check failed on a leaf"));
                }
                println!(
                    "check: all leaves {}",
                    match form {
                        Form::Org => "organized",
                        Form::Lay => "layered",
                    }
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Thickness {
            query,
            db,
            sig,
            json,
            dot,
            max_nodes,
            tw_limit,
        } => {
            let (f, _) = load_query(&query, &db, &sig)?;
            enforce_node_limit(&f, max_nodes)?;
            enforce_tw_limit(&f, tw_limit)?;
            let report = analyze(&f)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!("thickness: {}", report.thickness);
                println!("width: {} -> {}", report.width_before, report.width_after);
                println!("variables after rewrite: {}", report.variables_used_after);
                for node in &report.per_node {
                    let path = node
                        .path
                        .iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(".");
                    println!(
                        "node [{path}]: local {} quantified {}",
                        node.local, node.quantified
                    );
                }
            }
            if dot {
                let layed = folio_core::normalize::lay(&f)?;
                for (path, leaf) in positively_combined_subformulas(&layed) {
                    for (sub_path, sub) in leaf.subformulas() {
                        if matches!(sub, Formula::Quant { .. }) {
                            let h = block_hypergraph(sub)?;
                            eprintln!("# block at {:?}/{:?}", path, sub_path);
                            eprintln!("{}", h.primal_graph().to_dot());
                            let ord = h.elimination_ordering_with_prefix(&sub.free_vars())?;
                            eprintln!("{}", ord.to_dot());
                        }
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rewrite {
            query,
            db,
            sig,
            json,
            max_nodes,
            tw_limit,
        } => {
            let (f, _) = load_query(&query, &db, &sig)?;
            enforce_node_limit(&f, max_nodes)?;
            enforce_tw_limit(&f, tw_limit)?;
            let out = minimize_variables(&f)?;
            if json {
                let report = analyze(&f)?;
                let value = serde_json::json!({
                    "formula": print_formula(&out),
                    "report": report,
                });
                println!("{}", serde_json::to_string_pretty(&value)?);
            } else {
                println!("{}", print_formula(&out));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            engine,
            db,
            query,
            stats,
            verify,
        } => {
            let structure = io::load_structure(&db)?;
            let text = io::load_query_text(&query)?;
            let (f, _) = io::parse_query(&text, Some(structure.signature()))?;
            if !f.free_vars().is_empty() {
                return Err(anyhow!(
                    "eval expects a sentence; free variables: {:?}",
                    f.free_vars().into_iter().map(|v| v.name).collect::<Vec<_>>()
                ));
            }
            let empty = Assignment::new();
            let (result, stats_json) = match engine {
                Engine::Naive => {
                    let start = std::time::Instant::now();
                    let value = naive_eval(&structure, &f, &empty)?;
                    let wall = start.elapsed().as_millis();
                    (
                        value,
                        serde_json::json!({
                            "max_table_rows": 0,
                            "node_count": f.node_count(),
                            "wall_ms": wall,
                        }),
                    )
                }
                Engine::Bounded => {
                    let (table, s) = bounded_var_eval_with_stats(&structure, &f)?;
                    (table.as_bool(), serde_json::to_value(&s)?)
                }
                Engine::Fpt => {
                    let out = fpt_model_check(&structure, &f)?;
                    (out.result, serde_json::to_value(&out.stats)?)
                }
            };
            if verify {
                let oracle = naive_eval(&structure, &f, &empty)?;
                if oracle != result {
                    return Err(anyhow!(
                        "engine disagreed with the naive oracle: {result} vs {oracle}"
                    ));
                }
            }
            println!("{result}");
            if stats {
                println!("{stats_json}");
            }
            Ok(if result {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FALSE)
            })
        }
        Command::Gadget { gadget } => match gadget {
            GadgetCommand::Clique {
                k,
                query,
                graph,
                sig,
                out,
            } => {
                let (theta, _) = load_query(&query, &None, &sig)?;
                let g = io::load_graph(&graph)?;
                let b = clique_gadget(k, &theta, &g)?;
                emit_structure(&b, out.as_deref())?;
                Ok(ExitCode::SUCCESS)
            }
            GadgetCommand::Accordion {
                psi,
                phi,
                db,
                sig,
                out,
            } => {
                let a = io::load_structure(&db)?;
                let psi_text = io::load_query_text(&psi)?;
                let (psi_f, _) = io::parse_query(&psi_text, Some(a.signature()))?;
                let phi_text = io::load_query_text(&phi)?;
                let phi_sig = match sig {
                    Some(path) => io::load_signature(&path)?,
                    None => a.signature().clone(),
                };
                let (phi_f, _) = io::parse_query(&phi_text, Some(&phi_sig))?;
                let b = accordion_step(&psi_f, &phi_f, &a)?;
                emit_structure(&b, out.as_deref())?;
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Selftest {
            seed,
            cases,
            inject_mutant,
        } => {
            let seed = seed
                .or_else(|| {
                    std::env::var("FOLIO_SEED")
                        .ok()
                        .and_then(|s| s.parse().ok())
                })
                .unwrap_or(0xF010);
            if cases == 0 {
                println!("warning: --cases 0, nothing checked (vacuous pass)");
                return Ok(ExitCode::SUCCESS);
            }
            let outcome = selftest::run(seed, cases, inject_mutant)?;
            for (name, n, violations) in &outcome.suites {
                println!("suite {name}: {n} cases, {violations} violations");
            }
            if outcome.violations() > 0 {
                eprintln!("selftest failed with {} violations", outcome.violations());
                return Ok(ExitCode::from(EXIT_SELFTEST));
            }
            println!("selftest passed (seed {seed})");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn emit_structure(s: &folio_core::logic::Structure, out: Option<&std::path::Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(&s.to_json())?;
    match out {
        Some(path) => {
            std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?
        }
        None => println!("{json}"),
    }
    Ok(())
}
