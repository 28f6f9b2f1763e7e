//! The `qcp` command line: graph spec files in, reports out.

pub mod report;
pub mod spec;

use std::io::Read;

use clap::{Args, Parser, Subcommand};
use qcp_core::{certify_simplicity, qck_separation, Config, Error, SimplicityParams};

use report::{Params, ReportFile};
use spec::{GraphSpecFile, SpecError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qcp", version, about = "Edge correspondences and simplicity certificates for finite quantum graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Graph spec file, or `-` for stdin.
    #[arg(default_value = "-")]
    pub input: String,
    /// Emit the JSON report instead of a table.
    #[arg(long)]
    pub json: bool,
    #[arg(long, env = "QCP_TOL", default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct Search {
    /// Longest structured family tried for Condition (S).
    #[arg(long, default_value_t = 8)]
    pub m_max: usize,
    /// Largest tensor power scanned for periodicity.
    #[arg(long, default_value_t = 4)]
    pub period_max: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// δ-form, Schur idempotence and complete positivity checks.
    Validate(Common),
    /// Validation plus edge correspondence statistics.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: Search,
    },
    /// Simplicity verdict for the edge Cuntz–Pimsner algebra.
    Certify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: Search,
    },
    /// Whether the edge algebra is provably not the quantum Cuntz–Krieger algebra.
    Separate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: Search,
    },
    /// Toeplitz and Cuntz–Krieger identities on the truncated Fock module.
    FockVerify {
        #[command(flatten)]
        common: Common,
        /// Top tensor level N of the truncation.
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Print a built-in graph spec.
    Example {
        /// matrix, complete, trivial, rank_one, classical or main_example.
        name: String,
        /// Block size for main_example, vertex count for classical.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Comma-separated block sizes.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        blocks: Vec<usize>,
    },
}

/// What the binary prints and returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn fail(code: i32, msg: impl Into<String>) -> Self {
        Self { code, stdout: String::new(), stderr: msg.into() }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::BudgetExceeded(_) => EXIT_BUDGET,
        _ => EXIT_VALIDATION,
    }
}

fn read_input(path: &str, stdin: &mut dyn Read) -> std::io::Result<String> {
    let mut text = String::new();
    if path == "-" {
        stdin.read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path)?;
    }
    Ok(text)
}

fn config(common: &Common) -> Config {
    Config { tol: common.tol, seed: common.seed, ..Config::default() }
}

pub fn run(cli: Cli, stdin: &mut dyn Read) -> Outcome {
    let (common, command) = match &cli.command {
        Command::Example { name, n, blocks } => {
            return match spec::example(name, blocks, *n) {
                Ok(s) => Outcome::ok(s.to_json()),
                Err(msg) => Outcome::fail(EXIT_VALIDATION, msg),
            };
        }
        Command::Validate(c) => (c, "validate"),
        Command::Analyze { common, .. } => (common, "analyze"),
        Command::Certify { common, .. } => (common, "certify"),
        Command::Separate { common, .. } => (common, "separate"),
        Command::FockVerify { common, .. } => (common, "fock-verify"),
    };
    if !(common.tol.is_finite() && common.tol > 0.0) {
        return Outcome::fail(EXIT_PARSE, format!("tolerance must be positive, got {}", common.tol));
    }
    let text = match read_input(&common.input, stdin) {
        Ok(t) => t,
        Err(e) => return Outcome::fail(EXIT_PARSE, format!("cannot read {}: {e}", common.input)),
    };
    let cfg = config(common);
    let input: GraphSpecFile = match spec::parse_spec(&text) {
        Ok(s) => s,
        Err(e) => return Outcome::fail(EXIT_PARSE, e.to_string()),
    };
    let graph = match input.to_graph(&cfg) {
        Ok(g) => g,
        Err(e @ SpecError::Parse(_)) => return Outcome::fail(EXIT_PARSE, e.to_string()),
        Err(SpecError::Validation(e)) => return Outcome::fail(exit_code(&e), format!("validation error: {e}")),
    };

    let mut report = ReportFile {
        schema_version: report::SCHEMA_VERSION,
        command,
        input,
        params: Params { tol: cfg.tol, seed: cfg.seed, m_max: None, period_max: None, levels: None },
        validation: report::validation(&graph, &cfg),
        correspondence: None,
        verdict: None,
        separation: None,
        fock: None,
    };
    match &cli.command {
        Command::Analyze { search, .. } => {
            report.params.period_max = Some(search.period_max);
            report.correspondence = report::correspondence(&graph, search.period_max, &cfg);
        }
        Command::Certify { search, .. } | Command::Separate { search, .. } => {
            let params = SimplicityParams { m_max: search.m_max, period_max: search.period_max };
            report.params.m_max = Some(params.m_max);
            report.params.period_max = Some(params.period_max);
            if command == "certify" {
                report.verdict = Some(certify_simplicity(&graph, &params, &cfg));
            } else {
                report.separation = Some(qck_separation(&graph, &params, &cfg));
            }
        }
        Command::FockVerify { levels, .. } => {
            report.params.levels = Some(*levels);
            match report::fock(&graph, *levels, &cfg) {
                Ok(f) => report.fock = Some(f),
                Err(e) => return Outcome::fail(exit_code(&e), e.to_string()),
            }
        }
        Command::Validate(_) | Command::Example { .. } => {}
    }
    Outcome::ok(if common.json { report.to_json() } else { report::render_text(&report) })
}
