mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quantalg::{Error, Limits};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "quantalg",
    version,
    about = "Finite quantitative algebras over extended metric spaces"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(flatten)]
    pub caps: Caps,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
pub struct Caps {
    /// Variable assignments enumerated by equation checks.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_assignments: Option<u64>,
    /// Alternation passes of the congruence closure.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_passes: Option<u64>,
    /// Terms materialized by bounded free-algebra computations.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_terms: Option<u64>,
}

impl Caps {
    fn limits(&self) -> Limits {
        let mut l = Limits::default();
        if let Some(v) = self.max_assignments {
            l.max_assignments = v.into();
        }
        if let Some(v) = self.max_passes {
            l.max_passes = Some(v as usize);
        }
        if let Some(v) = self.max_terms {
            l.max_terms = v.into();
        }
        l
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the axioms of a space, algebra or subcongruence document.
    Validate {
        #[arg(value_enum)]
        kind: DocKind,
        file: String,
        /// Validate a space as a pseudometric (zero distances allowed).
        #[arg(long)]
        pseudo: bool,
    },
    /// Check a quantitative equation on an algebra.
    CheckEq { algebra: String, equation: String },
    /// Check every equation of a variety on an algebra.
    InVariety { algebra: String, variety: String },
    /// Kernel subcongruence of a nonexpanding map, or its ε-kernel pair.
    Kernel {
        map: String,
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Quotient of an algebra by the congruence generated by distance bounds.
    Quotient {
        algebra: String,
        constraints: String,
    },
    /// Coequalizer of two parallel homomorphisms.
    Coequalize { f: String, g: String },
    /// Colimit (quotient space) of a subcongruence, with its effectivity check.
    Colimit { subcongruence: String },
    /// Product with the maximum metric, of spaces or of algebras.
    Product {
        #[arg(required = true)]
        files: Vec<String>,
    },
    /// Product with the sum metric.
    Tensor {
        #[arg(required = true)]
        files: Vec<String>,
    },
    /// Disjoint union; points in different summands are infinitely far apart.
    Coproduct {
        #[arg(required = true)]
        files: Vec<String>,
    },
    /// Factor a homomorphism through its image.
    Factorize { hom: String },
    /// Distance between two terms over a space of generators.
    TermDist {
        space: String,
        lhs: String,
        rhs: String,
    },
    /// Depth-bounded approximation of a free algebra of a variety.
    FreeBounded {
        variety: String,
        space: String,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Check that products, subalgebras and images of members stay members.
    Birkhoff {
        variety: String,
        a: String,
        b: String,
        /// Homomorphisms out of A whose images are checked.
        homs: Vec<String>,
    },
    /// The truncated-addition monoid on {0..n}.
    DemoCounterexample {
        #[arg(long, default_value_t = 3)]
        demo_n: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DocKind {
    Space,
    Algebra,
    Subcongruence,
}

/// Failure of a command, with its exit status.
#[derive(Debug)]
pub enum Failure {
    Library(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Library(Error::Invalid { .. }) => 1,
            Failure::Library(Error::Structural(_)) | Failure::Io(_) => 2,
            Failure::Library(Error::CapExceeded { .. } | Error::NonConvergence { .. }) => 3,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let body = match self {
            Failure::Io(msg) => json!({ "kind": "io", "message": msg }),
            Failure::Library(e) => {
                let message = e.to_string();
                match e {
                    Error::Structural(_) => json!({ "kind": "structural", "message": message }),
                    Error::Invalid { kind, details } => {
                        json!({ "kind": "invalid", "subject": kind, "details": details, "message": message })
                    }
                    Error::CapExceeded { what, needed, cap } => json!({
                        "kind": "cap_exceeded", "what": what,
                        "needed": needed.to_string(), "cap": cap.to_string(), "message": message
                    }),
                    Error::NonConvergence {
                        passes,
                        previous,
                        last,
                    } => json!({
                        "kind": "non_convergence", "passes": passes,
                        "previous": previous, "last": last, "message": message
                    }),
                }
            }
        };
        json!({ "error": body })
    }
}

fn wants_json(args: &[String]) -> bool {
    args.windows(2)
        .any(|w| w[0] == "--format" && w[1] == "json")
        || args.iter().any(|a| a == "--format=json")
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if wants_json(&args) {
                let body =
                    json!({ "error": { "kind": "usage", "message": e.to_string().trim_end() } });
                eprintln!("{}", serde_json::to_string_pretty(&body).expect("json"));
            } else {
                let _ = e.print();
            }
            return ExitCode::from(2);
        }
    };
    let limits = cli.caps.limits();
    match commands::run(&cli.command, &limits) {
        Ok(out) => {
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&out.json).expect("json") + "\n",
                Format::Text => out.text,
            };
            // a closed pipe is not an error for a report writer
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(if out.holds { 0 } else { 1 })
        }
        Err(f) => {
            match cli.format {
                Format::Json => eprintln!(
                    "{}",
                    serde_json::to_string_pretty(&f.to_json()).expect("json")
                ),
                Format::Text => match &f {
                    Failure::Io(msg) => eprintln!("error: {msg}"),
                    Failure::Library(e) => eprintln!("error: {e}"),
                },
            }
            ExitCode::from(f.code())
        }
    }
}
