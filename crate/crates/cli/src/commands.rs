//! Command implementations and the error-to-exit-code mapping.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use rand_core::OsRng;
use thiserror::Error;

use ecf_bench::{check_goals, run_bench, write_csv, BenchConfig, BenchRow};
use ecf_core::{
    add_recipient, decrypt, export_recipient_entry, fingerprint, load_key, lookup_suite, parse,
    remove_recipient, save_key, set_content, Container, ContainerError, DecryptOptions,
    EncryptOptions, KdfConfig, KeystoreError, KeystoreOptions, PrivateKey, RecipientEntry,
    RecipientSelector, SUITES,
};

use crate::{BenchArgs, Command, KeystoreArgs};

const MIB: usize = 1024 * 1024;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error(transparent)]
    Keystore(#[from] KeystoreError),
    #[error("{0}")]
    Password(String),
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("benchmark failed: {0}")]
    Bench(#[from] ecf_bench::BenchError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Container(err) => match err {
                ContainerError::FileHashMismatch => 10,
                ContainerError::AeadFailure => 11,
                ContainerError::PublicHeaderHashMismatch => 12,
                ContainerError::RecipientSignatureInvalid { .. } => 13,
                ContainerError::PrivateHashMismatch => 14,
                ContainerError::BadMagicVersion(_)
                | ContainerError::UnsupportedSuite(_)
                | ContainerError::LengthMismatch(_)
                | ContainerError::TruncatedFile { .. }
                | ContainerError::MalformedBody(_) => 15,
                _ => 20,
            },
            CliError::Keystore(_) | CliError::Password(_) => 30,
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Bench(_) => 1,
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Keygen {
            keystore,
            name,
            force,
            kdf_iterations,
            kdf_memory,
            kdf_parallelism,
        } => cmd_keygen(
            &keystore,
            name.as_deref(),
            force,
            KdfConfig {
                iterations: kdf_iterations,
                memory_kib: kdf_memory,
                parallelism: kdf_parallelism,
            },
        ),
        Command::Create {
            file,
            keystore,
            name,
            content,
            suite,
            force,
        } => cmd_create(&file, &keystore, &name, content.as_deref(), suite, force),
        Command::Cat {
            file,
            keystore,
            no_verify_recipients,
            out,
        } => cmd_cat(&file, &keystore, no_verify_recipients, out.as_deref()),
        Command::Export {
            keystore,
            name,
            out,
            force,
        } => cmd_export(&keystore, &name, &out, force),
        Command::AddRecipient {
            file,
            keystore,
            entry,
            allow_duplicate_names,
        } => cmd_add_recipient(&file, &keystore, &entry, allow_duplicate_names),
        Command::RemoveRecipient {
            file,
            keystore,
            name,
            entry,
        } => cmd_remove_recipient(&file, &keystore, name, entry.as_deref()),
        Command::SetContent {
            file,
            keystore,
            content,
        } => cmd_set_content(&file, &keystore, content.as_deref()),
        Command::Info { file } => cmd_info(&file),
        Command::Bench(args) => cmd_bench(&args),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing

fn read_password(args: &KeystoreArgs, confirm: bool) -> Result<String, CliError> {
    if let Some(var) = &args.password_env {
        return std::env::var(var).map_err(|_| {
            CliError::Password(format!("environment variable {var} is not set or not UTF-8"))
        });
    }
    let password = rpassword::prompt_password("Password: ")
        .map_err(io_err("cannot read password from terminal"))?;
    if confirm {
        let again = rpassword::prompt_password("Confirm password: ")
            .map_err(io_err("cannot read password from terminal"))?;
        if password != again {
            return Err(CliError::Password("passwords do not match".into()));
        }
    }
    Ok(password)
}

fn unlock(args: &KeystoreArgs) -> Result<PrivateKey, CliError> {
    let bytes = fs::read(&args.keystore)
        .map_err(io_err(format!("cannot read keystore {}", args.keystore.display())))?;
    let password = read_password(args, false)?;
    Ok(load_key(&bytes, &password)?)
}

/// Writes via a temporary file in the target directory plus a rename, so a
/// crash never leaves a half-written file behind.
fn write_atomic(path: &Path, bytes: &[u8], secret: bool) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    let context = format!("cannot write {}", path.display());
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(context.clone()))?;
    tmp.write_all(bytes).map_err(io_err(context.clone()))?;
    #[cfg(unix)]
    if !secret {
        use std::os::unix::fs::PermissionsExt;
        let _ = tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644));
    }
    #[cfg(not(unix))]
    let _ = secret;
    tmp.persist(path)
        .map_err(|err| CliError::Io { context, source: err.error })?;
    Ok(())
}

fn read_content(source: Option<&Path>) -> Result<Vec<u8>, CliError> {
    match source {
        Some(path) => fs::read(path).map_err(io_err(format!("cannot read {}", path.display()))),
        None => {
            let mut content = Vec::new();
            io::stdin()
                .read_to_end(&mut content)
                .map_err(io_err("cannot read content from standard input"))?;
            Ok(content)
        }
    }
}

fn load_container(path: &Path) -> Result<Container, CliError> {
    let bytes =
        fs::read(path).map_err(io_err(format!("cannot read container {}", path.display())))?;
    Ok(parse(&bytes)?)
}

fn load_entry(path: &Path) -> Result<RecipientEntry, CliError> {
    let bytes =
        fs::read(path).map_err(io_err(format!("cannot read entry {}", path.display())))?;
    RecipientEntry::from_bytes(&bytes).map_err(|err| {
        CliError::Usage(format!("{} is not a recipient entry: {err}", path.display()))
    })
}

fn refuse_overwrite(path: &Path, force: bool) -> Result<(), CliError> {
    if path.exists() && !force {
        return Err(CliError::Usage(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_keygen(
    keystore: &KeystoreArgs,
    name: Option<&str>,
    force: bool,
    kdf: KdfConfig,
) -> Result<(), CliError> {
    refuse_overwrite(&keystore.keystore, force)?;
    let password = read_password(keystore, true)?;
    let mut rng = OsRng;
    let key = PrivateKey::generate(&mut rng);
    let options = KeystoreOptions {
        kdf,
        ..Default::default()
    };
    let bytes = save_key(&key, &password, &options, &mut rng)?;
    write_atomic(&keystore.keystore, &bytes, true)?;
    eprintln!("keystore written to {}", keystore.keystore.display());
    match name {
        Some(name) => println!("fingerprint: {} ({name})", fingerprint(&key.public_key_bytes())),
        None => println!("fingerprint: {}", fingerprint(&key.public_key_bytes())),
    }
    Ok(())
}

fn cmd_create(
    file: &Path,
    keystore: &KeystoreArgs,
    name: &str,
    content: Option<&Path>,
    suite_id: u32,
    force: bool,
) -> Result<(), CliError> {
    refuse_overwrite(file, force)?;
    let key = unlock(keystore)?;
    let entry = export_recipient_entry(&key, name)?;
    let content = read_content(content)?;
    let suite = lookup_suite(suite_id).map_err(|_| ContainerError::UnsupportedSuite(suite_id))?;
    let container = ecf_core::encrypt(
        suite,
        &[entry],
        &content,
        &EncryptOptions::default(),
        &mut OsRng,
    )?;
    write_atomic(file, &container.to_bytes(), false)?;
    eprintln!(
        "created {} ({} bytes, suite {})",
        file.display(),
        content.len(),
        suite.name
    );
    Ok(())
}

fn cmd_cat(
    file: &Path,
    keystore: &KeystoreArgs,
    no_verify_recipients: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let container = load_container(file)?;
    let key = unlock(keystore)?;
    let opened = decrypt(
        &key,
        &container,
        &DecryptOptions {
            verify_signatures: !no_verify_recipients,
        },
    )?;
    if !opened.is_blob() {
        eprintln!(
            "warning: unknown content type {:#010x}, emitting raw bytes",
            opened.content_type
        );
    }
    match out {
        Some(path) => write_atomic(path, &opened.content, false)?,
        None => {
            let stdout = io::stdout();
            let mut handle = stdout.lock();
            handle
                .write_all(&opened.content)
                .and_then(|_| handle.flush())
                .map_err(io_err("cannot write content to standard output"))?;
        }
    }
    Ok(())
}

fn cmd_export(
    keystore: &KeystoreArgs,
    name: &str,
    out: &Path,
    force: bool,
) -> Result<(), CliError> {
    refuse_overwrite(out, force)?;
    let key = unlock(keystore)?;
    let entry = export_recipient_entry(&key, name)?;
    write_atomic(out, &entry.to_bytes(), false)?;
    eprintln!("recipient entry written to {}", out.display());
    println!("fingerprint: {} ({name})", entry.fingerprint());
    Ok(())
}

fn cmd_add_recipient(
    file: &Path,
    keystore: &KeystoreArgs,
    entry_path: &Path,
    allow_duplicate_names: bool,
) -> Result<(), CliError> {
    let container = load_container(file)?;
    let entry = load_entry(entry_path)?;
    let key = unlock(keystore)?;
    let options = EncryptOptions {
        allow_duplicate_names,
        ..Default::default()
    };
    let updated = add_recipient(
        &key,
        &container,
        &entry,
        &options,
        &DecryptOptions::default(),
        &mut OsRng,
    )?;
    write_atomic(file, &updated.to_bytes(), false)?;
    eprintln!(
        "added {} ({}) to {}",
        entry.name,
        entry.fingerprint(),
        file.display()
    );
    Ok(())
}

fn cmd_remove_recipient(
    file: &Path,
    keystore: &KeystoreArgs,
    name: Option<String>,
    entry_path: Option<&Path>,
) -> Result<(), CliError> {
    let selector = match (name, entry_path) {
        (Some(name), None) => RecipientSelector::ByName(name),
        (None, Some(path)) => RecipientSelector::ByPublicKey(load_entry(path)?.public_key),
        _ => {
            return Err(CliError::Usage(
                "select the recipient with exactly one of --name or --entry".into(),
            ))
        }
    };
    let container = load_container(file)?;
    let key = unlock(keystore)?;
    let updated = remove_recipient(
        &key,
        &container,
        &selector,
        false,
        &EncryptOptions::default(),
        &DecryptOptions::default(),
        &mut OsRng,
    )?;
    write_atomic(file, &updated.to_bytes(), false)?;
    eprintln!("recipient removed from {}", file.display());
    Ok(())
}

fn cmd_set_content(
    file: &Path,
    keystore: &KeystoreArgs,
    content: Option<&Path>,
) -> Result<(), CliError> {
    let container = load_container(file)?;
    let key = unlock(keystore)?;
    let content = read_content(content)?;
    let updated = set_content(
        &key,
        &container,
        &content,
        &EncryptOptions::default(),
        &DecryptOptions::default(),
        &mut OsRng,
    )?;
    write_atomic(file, &updated.to_bytes(), false)?;
    eprintln!("content of {} replaced ({} bytes)", file.display(), content.len());
    Ok(())
}

/// Prints public facts only: everything here is readable without any key.
fn cmd_info(file: &Path) -> Result<(), CliError> {
    let container = load_container(file)?;
    let header = &container.header;
    let suite = container.suite()?;
    println!("container version: {:#010x}", header.version);
    println!("cipher suite:      {:#010x} ({})", suite.id, suite.name);
    println!("public length:     {} bytes", header.public_length);
    println!("private length:    {} bytes", header.private_length);
    println!("header slots (m):  {}", header.slot_count());
    println!(
        "total size:        {} bytes",
        header.public_length as u64 + header.private_length as u64 + suite.params.hash_len as u64
    );
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let suites = if args.suites.is_empty() {
        SUITES.iter().map(|s| s.id).collect()
    } else {
        args.suites.clone()
    };

    let mut configs = Vec::new();
    if args.sizes_mib.is_empty() && args.counts.is_empty() {
        // Standard experiment set: content-size sweep, recipient sweep with
        // and without deception blocks, and the validation cost sweep.
        let mut sizes = vec![MIB, 10 * MIB, 100 * MIB];
        let mut counts = vec![5, 10, 20, 50, 100];
        if args.full_scale {
            sizes.push(1000 * MIB);
            counts.push(1000);
        }
        configs.push(BenchConfig {
            suites: suites.clone(),
            content_sizes: sizes,
            recipient_counts: vec![5],
            deception: true,
            validation: true,
            repetitions: args.reps,
            warmup: args.warmup,
        });
        for deception in [true, false] {
            configs.push(BenchConfig {
                suites: suites.clone(),
                content_sizes: vec![MIB],
                recipient_counts: counts.clone(),
                deception,
                validation: true,
                repetitions: args.reps,
                warmup: args.warmup,
            });
        }
        configs.push(BenchConfig {
            suites: suites.clone(),
            content_sizes: vec![MIB],
            recipient_counts: counts,
            deception: true,
            validation: false,
            repetitions: args.reps,
            warmup: args.warmup,
        });
    } else {
        let sizes: Vec<usize> = if args.sizes_mib.is_empty() {
            vec![MIB]
        } else {
            args.sizes_mib.iter().map(|mib| mib * MIB).collect()
        };
        let counts = if args.counts.is_empty() {
            vec![5]
        } else {
            args.counts.clone()
        };
        for deception in args.deception.expand() {
            for validation in args.validation.expand() {
                configs.push(BenchConfig {
                    suites: suites.clone(),
                    content_sizes: sizes.clone(),
                    recipient_counts: counts.clone(),
                    deception,
                    validation,
                    repetitions: args.reps,
                    warmup: args.warmup,
                });
            }
        }
    }

    let mut rows: Vec<BenchRow> = Vec::new();
    for (index, config) in configs.iter().enumerate() {
        eprintln!("running grid {}/{} ...", index + 1, configs.len());
        rows.extend(run_bench(config)?);
    }

    match &args.out {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(io_err(format!("cannot create {}", path.display())))?;
            write_csv(&rows, file)?;
            eprintln!("{} rows written to {}", rows.len(), path.display());
        }
        None => {
            let stdout = io::stdout();
            write_csv(&rows, stdout.lock())?;
        }
    }

    if args.check {
        let report = check_goals(&rows);
        eprint!("{report}");
    }
    Ok(())
}
