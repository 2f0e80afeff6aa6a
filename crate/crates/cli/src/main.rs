//! `sigkit`: JSON in, JSON out.
//!
//! Exit codes: 0 verified, 1 property violated (report on stdout),
//! 2 malformed input or structural error, 3 bound too small to decide,
//! 4 internal inconsistency.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sigkit::Error;

#[derive(Parser, Debug)]
#[command(name = "sigkit", version, about = "Finite signatures, polynomial and analytic functors, free multicategories and opetopes")]
struct Cli {
    /// Seed for generated fixtures, used when no input file is given.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a represented functor on a slice object.
    Eval {
        #[arg(long, value_enum)]
        kind: FunctorKind,
        #[arg(long)]
        input: PathBuf,
        /// Slice object `{"total", "base", "typing"}`; the terminal object if absent.
        #[arg(long, conflicts_with = "counts")]
        slice: Option<PathBuf>,
        /// Fibre sizes over the base, e.g. `1,2`.
        #[arg(long, value_delimiter = ',')]
        counts: Option<Vec<usize>>,
    },
    /// Tensor two signatures.
    Tensor {
        #[arg(long, value_enum)]
        kind: TensorKind,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Keep only operations up to this arity.
        #[arg(long, value_parser = positive)]
        max_arity: Option<usize>,
    },
    /// Truncated free monoid on a signature.
    Free {
        #[arg(long, value_enum)]
        kind: FreeKind,
        #[arg(long, value_parser = positive)]
        depth: usize,
        #[arg(long, value_parser = positive)]
        arity_bound: usize,
        #[arg(long)]
        input: PathBuf,
    },
    /// Opetopes of one dimension up to a size bound.
    Opetopes {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        size: usize,
        /// Also write the cells as a DOT graph.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check a property of a functor or of a transformation.
    Check {
        #[arg(long, value_enum)]
        property: Property,
        /// How to read `--input`: a diagram or signature for
        /// `weak-wide-pb`, a morphism of them otherwise.
        #[arg(long, value_enum, requires = "input")]
        kind: Option<FunctorKind>,
        #[arg(long, requires = "kind", conflicts_with = "builtin")]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        builtin: Option<Builtin>,
        #[arg(long, default_value_t = 2, value_parser = positive)]
        legs: usize,
        #[arg(long, env = "SIGKIT_BOUND", default_value_t = 3, value_parser = positive)]
        bound: usize,
    },
    /// Apply a comparison functor, or verify a comparison theorem.
    Compare {
        #[arg(long, value_enum, required_unless_present = "verify")]
        functor: Option<ComparisonKind>,
        #[arg(long, value_enum)]
        verify: Option<Verify>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Random morphisms used for naturality.
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, env = "SIGKIT_BOUND", default_value_t = 3, value_parser = positive)]
        bound: usize,
    },
    /// Recover a symmetric signature from a tabulated functor.
    Recover {
        #[arg(long, value_enum, requires = "input")]
        kind: Option<FunctorKind>,
        #[arg(long, requires = "kind", conflicts_with = "builtin")]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        builtin: Option<Builtin>,
        #[arg(long, env = "SIGKIT_BOUND", default_value_t = 3, value_parser = positive)]
        bound: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FunctorKind {
    Poly,
    Analytic,
    Tgraph,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TensorKind {
    Total,
    Single,
    Sym,
    Tgraph,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FreeKind {
    Strict,
    Amalg,
    Sym,
    #[value(name = "tgraph:list")]
    TgraphList,
    #[value(name = "tgraph:id")]
    TgraphId,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Property {
    WeakWidePb,
    Cartesian,
    WeaklyCartesian,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Builtin {
    /// A finitary functor that is not analytic.
    Gumm,
    /// `X → X × X` over one sort.
    Diagonal,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ComparisonKind {
    Ksig,
    Kdiag,
    IotaA,
    IotaS,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Verify {
    Phi,
    Psi,
    EmbFull,
}

enum Outcome {
    Verified(Value),
    Violated(Value),
    Undecided(Value),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Structural(_) | Error::Validation(_) => 2,
        Error::NotAnalytic(_) => 1,
        Error::Inconclusive(_) => 3,
        Error::Inconsistent(_) => 4,
    }
}

fn print(v: &Value) {
    let text = serde_json::to_string_pretty(v).expect("values serialize");
    // a closed pipe downstream is not our failure
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command, cli.seed) {
        Ok(Outcome::Verified(v)) => {
            print(&v);
            ExitCode::SUCCESS
        }
        Ok(Outcome::Violated(v)) => {
            print(&v);
            ExitCode::from(1)
        }
        Ok(Outcome::Undecided(v)) => {
            print(&v);
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.to_string() }));
            ExitCode::from(exit_code(&e))
        }
    }
}
