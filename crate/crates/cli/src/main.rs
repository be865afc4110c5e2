mod examples;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hfx::laws::{self, Config, Mutation};

use examples::{Example, Files, Runner};

#[derive(Parser)]
#[command(
    name = "hfx",
    version,
    about = "Replays worked examples and runs the law suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the examples in section order.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Run one example and print its output.
    Run {
        name: String,
        /// JSON object mapping file paths to contents.
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Compare against the golden transcript.
        #[arg(long)]
        check: bool,
    },
    /// Run the law suites.
    Laws {
        #[arg(long, default_value_t = laws::DEFAULT_SEED)]
        seed: u64,
        /// Cases per suite, overriding the defaults.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        json: bool,
        /// Inject a known defect: swap-or, reverse-iters or flip-tell.
        #[arg(long, default_value = "none", value_parser = parse_mutation)]
        mutation: Mutation,
    },
}

fn parse_mutation(s: &str) -> Result<Mutation, String> {
    Mutation::parse(s).ok_or_else(|| format!("unknown mutation `{s}`"))
}

const USAGE: u8 = 2;

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List { json } => list(json),
        Command::Run {
            name,
            fixture,
            check,
        } => run_example(&name, fixture.as_deref(), check),
        Command::Laws {
            seed,
            n,
            json,
            mutation,
        } => run_laws(Config { seed, n, mutation }, json),
    }
}

fn list(json: bool) -> ExitCode {
    let reg = examples::registry();
    if json {
        let rows: Vec<_> = reg
            .iter()
            .map(|e| serde_json::json!({ "name": e.name, "section": e.section }))
            .collect();
        println!("{}", serde_json::Value::Array(rows));
    } else {
        for e in &reg {
            let note = if e.needs_fixture() {
                "  (needs --fixture)"
            } else {
                ""
            };
            println!("{:<12} {}{}", e.name, e.section, note);
        }
    }
    ExitCode::SUCCESS
}

fn load_fixture(path: &Path) -> Result<Files, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn render(example: &Example, fixture: Option<&Path>) -> Result<String, (u8, String)> {
    let out = match example.runner {
        Runner::Pure(f) => f(),
        Runner::Io(f) => {
            let path = fixture
                .ok_or_else(|| (USAGE, format!("{} needs --fixture <path>", example.name)))?;
            f(load_fixture(path).map_err(|e| (USAGE, e))?)
        }
    };
    out.map_err(|e| (1, format!("{}: {e}", example.name)))
}

fn run_example(name: &str, fixture: Option<&Path>, check: bool) -> ExitCode {
    let Some(example) = examples::find(name) else {
        eprintln!("unknown example `{name}`; try `hfx list`");
        return ExitCode::from(USAGE);
    };
    let out = match render(&example, fixture) {
        Ok(out) => out,
        Err((code, msg)) => {
            eprintln!("{msg}");
            return ExitCode::from(code);
        }
    };
    print!("{out}");
    if check && out != example.golden {
        eprintln!("{name}: output differs from golden");
        eprint!("{}", examples::diff(example.golden, &out));
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

fn run_laws(cfg: Config, json: bool) -> ExitCode {
    let summary = laws::run(&cfg);
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&summary).expect("summary serializes")
        );
    } else {
        for s in &summary.suites {
            let status = if s.passed() { "ok" } else { "FAIL" };
            println!(
                "{:<22} {:>5} cases  {:>4} failures  {:<4} {:.2?}",
                s.name, s.cases, s.failures, status, s.elapsed
            );
            if let Some(w) = &s.witness {
                println!("    {w}");
            }
        }
        println!(
            "seed {} mutation {}: {} failures",
            summary.seed,
            summary.mutation.name(),
            summary.failures
        );
    }
    if summary.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
