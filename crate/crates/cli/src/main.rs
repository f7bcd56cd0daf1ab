//! `epda`: setup, registration, signing, verification, role daemons and
//! benchmarks.
//!
//! Every command prints exactly one JSON object on stdout. Logs go to
//! stderr. Exit codes:
//!
//! | code | meaning                                  |
//! |------|------------------------------------------|
//! | 0    | success / accept                         |
//! | 1    | reject                                   |
//! | 2    | usage error                              |
//! | 3    | I/O error (including missing files)      |
//! | 4    | malformed cryptographic material         |

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "epda", version, about = "Certificateless ring signatures for anonymous sensing uploads")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    /// BLS12-381, 128-bit security.
    Default,
    /// Tiny Type-A curve for exhaustive testing only. Not secure.
    Toy,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Parameter profile.
    #[arg(long, value_enum, default_value = "default")]
    pub profile: Profile,
    /// Increase log verbosity (repeatable). Logs go to stderr.
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate system parameters and the network-manager secret.
    Setup {
        #[command(flatten)]
        common: Common,
        /// Directory to write params.bin and nm.secret into.
        #[arg(long)]
        out: PathBuf,
    },
    /// Register a client identity and write its key files.
    Register {
        #[command(flatten)]
        common: Common,
        /// Key directory holding params.bin (and nm.secret when offline).
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        id: String,
        /// Network-manager address. Without it the manager's steps run
        /// locally from nm.secret.
        #[arg(long)]
        endpoint: Option<String>,
        /// Roster file to add the new entry to (offline mode).
        #[arg(long)]
        roster: Option<PathBuf>,
    },
    /// Sign a data file on behalf of a ring.
    Sign {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        keys: PathBuf,
        /// Signer identity; its key file must be in the key directory.
        #[arg(long)]
        id: String,
        /// Roster file to resolve ring members against. With --endpoint and
        /// no --roster, the provider's roster is fetched.
        #[arg(long)]
        roster: Option<PathBuf>,
        /// Comma-separated ring identities. Defaults to a random ring of
        /// --n members, or the whole roster.
        #[arg(long, value_delimiter = ',')]
        ring: Option<Vec<String>>,
        /// Ring size for random selection.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        data: PathBuf,
        /// Where to write the signature.
        #[arg(long)]
        sig: PathBuf,
        /// Service-provider address to upload the signed report to.
        #[arg(long)]
        endpoint: Option<String>,
    },
    /// Check a signature against a ring and data file.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        roster: PathBuf,
        /// Comma-separated ring identities. Defaults to the whole roster.
        #[arg(long, value_delimiter = ',')]
        ring: Option<Vec<String>>,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        sig: PathBuf,
        /// Also require the signature timestamp to be within this many
        /// seconds of now.
        #[arg(long)]
        window: Option<u64>,
    },
    /// Run the network manager.
    ServeNm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        keys: PathBuf,
        /// Address to listen on, e.g. 127.0.0.1:7001 (port 0 picks one).
        #[arg(long)]
        endpoint: String,
        /// Comma-separated service-provider addresses to push roster
        /// entries to.
        #[arg(long, value_delimiter = ',')]
        push: Vec<String>,
    },
    /// Run a service provider.
    ServeSp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        endpoint: String,
        /// Roster snapshot file; its log lives next to it.
        #[arg(long)]
        roster: PathBuf,
        /// Freshness window in seconds.
        #[arg(long, default_value_t = epda_core::protocol::DEFAULT_WINDOW_SECONDS)]
        window: u64,
    },
    /// Time key generation, signing and verification.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ring sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Setup { common, .. }
            | Command::Register { common, .. }
            | Command::Sign { common, .. }
            | Command::Verify { common, .. }
            | Command::ServeNm { common, .. }
            | Command::ServeSp { common, .. }
            | Command::Bench { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Setup { .. } => "setup",
            Command::Register { .. } => "register",
            Command::Sign { .. } => "sign",
            Command::Verify { .. } => "verify",
            Command::ServeNm { .. } => "serve-nm",
            Command::ServeSp { .. } => "serve-sp",
            Command::Bench { .. } => "bench",
        }
    }
}

/// A failed command, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Reject(String),
    Usage(String),
    Io(String),
    Crypto(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Reject(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
            Failure::Crypto(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Reject(_) => "reject",
            Failure::Usage(_) => "usage",
            Failure::Io(_) => "io",
            Failure::Crypto(_) => "crypto",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Reject(m) | Failure::Usage(m) | Failure::Io(m) | Failure::Crypto(m) => m,
        }
    }
}

pub type Outcome = Result<Value, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            println!("{}", json!({ "result": "usage", "error": e.kind().to_string(), "exit_code": 2 }));
            return ExitCode::from(2);
        }
    };
    let common = cli.command.common().clone();
    let level = match common.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().target(env_logger::Target::Stderr).init();

    let name = cli.command.name();
    let outcome = match common.profile {
        Profile::Default => commands::run::<epda_core::pairing_suite::Bls12>(cli.command),
        Profile::Toy => commands::run::<epda_core::pairing_suite::ToyTypeA>(cli.command),
    };
    match outcome {
        Ok(mut value) => {
            value["command"] = json!(name);
            println!("{value}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            log::error!("{name}: {}", failure.message());
            let value = json!({
                "command": name,
                "result": failure.kind(),
                "error": failure.message(),
                "exit_code": failure.code(),
            });
            println!("{value}");
            ExitCode::from(failure.code())
        }
    }
}
