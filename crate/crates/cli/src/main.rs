//! `ecf` — create, read, and manage encrypted container files.
//!
//! Exit codes:
//! - 0 success
//! - 1 I/O or other runtime failure
//! - 2 usage error
//! - 10..14 the five decryption checks, in procedure order: file hash,
//!   body authentication, public header hash, recipient signature,
//!   private body hash
//! - 15 malformed or unsupported container
//! - 20 recipient policy: not a recipient, duplicates, unknown or
//!   ambiguous selectors, self-removal
//! - 30 keystore problems, including a wrong password

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "ecf",
    version,
    about = "Encrypted container files: share secrets with a chosen set of recipients",
    after_help = "The default keystore path can be set via the ECF_KEYSTORE environment variable."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args)]
pub struct KeystoreArgs {
    /// Path to the password-protected keystore file.
    #[arg(long, env = "ECF_KEYSTORE", value_name = "FILE")]
    pub keystore: PathBuf,
    /// Read the keystore password from this environment variable instead of
    /// prompting; intended for unattended jobs.
    #[arg(long, value_name = "VAR")]
    pub password_env: Option<String>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a key pair and store it in a password-protected keystore.
    Keygen {
        #[command(flatten)]
        keystore: KeystoreArgs,
        /// Display name to associate with the printed fingerprint.
        #[arg(long)]
        name: Option<String>,
        /// Overwrite an existing keystore file.
        #[arg(long)]
        force: bool,
        /// Argon2id passes over the memory block.
        #[arg(long, default_value_t = 3)]
        kdf_iterations: u32,
        /// Argon2id memory in KiB.
        #[arg(long, default_value_t = 65536)]
        kdf_memory: u32,
        /// Argon2id lanes.
        #[arg(long, default_value_t = 4)]
        kdf_parallelism: u32,
    },
    /// Create a container with the caller as its only recipient.
    Create {
        /// Output container path.
        file: PathBuf,
        #[command(flatten)]
        keystore: KeystoreArgs,
        /// Recipient name recorded in the container, e.g. an email address.
        #[arg(long)]
        name: String,
        /// Read content from this file instead of standard input.
        #[arg(long, value_name = "FILE")]
        content: Option<PathBuf>,
        /// Cipher suite identifier (hex or decimal).
        #[arg(long, value_parser = parse_suite_id, default_value = "0x01010102")]
        suite: u32,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
    /// Decrypt a container and write its content to standard output.
    Cat {
        file: PathBuf,
        #[command(flatten)]
        keystore: KeystoreArgs,
        /// Skip the per-recipient name signature checks (faster on large
        /// recipient sets, e.g. inside a trusted pipeline).
        #[arg(long)]
        no_verify_recipients: bool,
        /// Write content here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Write this key's recipient entry for exchange with others.
    Export {
        #[command(flatten)]
        keystore: KeystoreArgs,
        /// Self-chosen recipient name embedded in the entry.
        #[arg(long)]
        name: String,
        /// Output path for the recipient entry.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
    /// Add a recipient (from an exported entry file) to a container.
    AddRecipient {
        file: PathBuf,
        #[command(flatten)]
        keystore: KeystoreArgs,
        /// Exported recipient entry to add.
        #[arg(long, value_name = "FILE")]
        entry: PathBuf,
        /// Accept a name that is already present in the recipient set.
        #[arg(long)]
        allow_duplicate_names: bool,
    },
    /// Remove a recipient from a container.
    RemoveRecipient {
        file: PathBuf,
        #[command(flatten)]
        keystore: KeystoreArgs,
        /// Select the recipient by name.
        #[arg(long, group = "selector")]
        name: Option<String>,
        /// Select the recipient by the public key in this entry file.
        #[arg(long, value_name = "FILE", group = "selector")]
        entry: Option<PathBuf>,
    },
    /// Replace the content of a container, keeping its recipients.
    SetContent {
        file: PathBuf,
        #[command(flatten)]
        keystore: KeystoreArgs,
        /// Read content from this file instead of standard input.
        #[arg(long, value_name = "FILE")]
        content: Option<PathBuf>,
    },
    /// Print the public facts about a container.
    Info { file: PathBuf },
    /// Measure encryption and decryption across a parameter grid.
    Bench(BenchArgs),
}

#[derive(Args)]
pub struct BenchArgs {
    /// Comma-separated cipher suite identifiers; all suites when omitted.
    #[arg(long, value_delimiter = ',', value_parser = parse_suite_id)]
    pub suites: Vec<u32>,
    /// Content sizes in MiB. Together with --counts this selects a custom
    /// grid; without either, the standard experiment set runs.
    #[arg(long, value_delimiter = ',')]
    pub sizes_mib: Vec<usize>,
    /// Recipient counts for the custom grid.
    #[arg(long, value_delimiter = ',')]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 2)]
    pub warmup: usize,
    /// Deception-block padding in the custom grid.
    #[arg(long, value_enum, default_value_t = FlagSetting::Both)]
    pub deception: FlagSetting,
    /// Recipient signature validation in the custom grid.
    #[arg(long, value_enum, default_value_t = FlagSetting::Both)]
    pub validation: FlagSetting,
    /// Extend the standard experiment set to 1000 MiB contents and 1000
    /// recipients. Slow; needs several GiB of memory.
    #[arg(long)]
    pub full_scale: bool,
    /// Write the CSV here instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Evaluate the performance goals against the measured rows and print
    /// the report to standard error.
    #[arg(long)]
    pub check: bool,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
pub enum FlagSetting {
    On,
    Off,
    Both,
}

impl FlagSetting {
    pub fn expand(self) -> Vec<bool> {
        match self {
            FlagSetting::On => vec![true],
            FlagSetting::Off => vec![false],
            FlagSetting::Both => vec![true, false],
        }
    }
}

fn parse_suite_id(text: &str) -> Result<u32, String> {
    let id = if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        u32::from_str_radix(hex, 16).map_err(|_| format!("not a hex identifier: {text}"))?
    } else {
        text.parse()
            .map_err(|_| format!("not a suite identifier: {text}"))?
    };
    ecf_core::lookup_suite(id)
        .map(|suite| suite.id)
        .map_err(|_| {
            let known = ecf_core::SUITES
                .iter()
                .map(|s| format!("{:#010x} ({})", s.id, s.name))
                .collect::<Vec<_>>()
                .join(", ");
            format!("unknown cipher suite {text}; known suites: {known}")
        })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
