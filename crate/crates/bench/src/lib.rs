//! Wall-clock measurement of container encryption and decryption across the
//! parameter grid (cipher suite, content size, recipient count, deception
//! blocks, signature validation), plus checks of the portable performance
//! goals.
//!
//! Timings cover the full operation as a user sees it: encryption includes
//! serialization to bytes, decryption includes parsing from bytes. Results
//! aggregate to the mean over the configured repetitions after warmup and
//! are emitted as CSV rows.

use std::fmt;
use std::io;
use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use ecf_core::{
    decrypt, encrypt, lookup_suite, parse, ContainerError, DecryptOptions, EncryptOptions,
    PrivateKey, RecipientEntry, SlotStrategy,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("container operation failed during benchmarking: {0}")]
    Container(#[from] ContainerError),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed CSV field: {0}")]
    MalformedCsv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchOp {
    Encrypt,
    Decrypt,
}

impl fmt::Display for BenchOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchOp::Encrypt => write!(f, "encrypt"),
            BenchOp::Decrypt => write!(f, "decrypt"),
        }
    }
}

/// One parameter grid. Deception and validation are fixed per run; run the
/// grid twice to compare a flag's on/off settings.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub suites: Vec<u32>,
    /// Content sizes in bytes.
    pub content_sizes: Vec<usize>,
    pub recipient_counts: Vec<usize>,
    /// Pad the header with deception blocks (the library default) or write
    /// exactly one block per recipient.
    pub deception: bool,
    /// Verify recipient name signatures during decryption.
    pub validation: bool,
    pub repetitions: usize,
    pub warmup: usize,
}

impl BenchConfig {
    fn validate(&self) -> Result<(), BenchError> {
        if self.repetitions < 3 {
            return Err(BenchError::InvalidConfig("repetitions must be at least 3"));
        }
        if self.suites.is_empty() {
            return Err(BenchError::InvalidConfig("no cipher suites selected"));
        }
        if self.content_sizes.is_empty() {
            return Err(BenchError::InvalidConfig("no content sizes selected"));
        }
        if self.recipient_counts.is_empty() || self.recipient_counts.contains(&0) {
            return Err(BenchError::InvalidConfig(
                "recipient counts must be non-empty and positive",
            ));
        }
        Ok(())
    }
}

/// One measured cell of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub suite: u32,
    pub op: BenchOp,
    /// Content size in bytes.
    pub size: usize,
    /// Number of real recipients.
    pub n: usize,
    pub deception: bool,
    pub validation: bool,
    pub mean_seconds: f64,
}

/// Runs the full grid serially and returns one row per (suite, size, count,
/// operation) combination.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    config.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(0xBE_EC_F0);

    // One content buffer serves every size as a prefix slice.
    let max_size = *config.content_sizes.iter().max().expect("non-empty");
    let mut content_pool = vec![0u8; max_size];
    rng.fill_bytes(&mut content_pool);

    let encrypt_options = EncryptOptions {
        slot_strategy: if config.deception {
            SlotStrategy::Obfuscated
        } else {
            SlotStrategy::None
        },
        ..Default::default()
    };
    let decrypt_options = DecryptOptions {
        verify_signatures: config.validation,
    };

    let mut rows = Vec::new();
    for &suite_id in &config.suites {
        let suite = lookup_suite(suite_id).map_err(ContainerError::from)?;
        for &n in &config.recipient_counts {
            let mut keys = Vec::with_capacity(n);
            let mut entries = Vec::with_capacity(n);
            for i in 0..n {
                let key = PrivateKey::generate(&mut rng);
                let name = format!("bench-user-{i}@example.org");
                entries.push(RecipientEntry {
                    public_key: key.public_key_bytes().to_vec(),
                    name: name.clone(),
                    signature: key.sign(name.as_bytes()).to_vec(),
                });
                keys.push(key);
            }
            for &size in &config.content_sizes {
                let content = &content_pool[..size];

                let mut encrypt_total = 0.0;
                let mut bytes = Vec::new();
                for round in 0..config.warmup + config.repetitions {
                    let start = Instant::now();
                    let container = encrypt(suite, &entries, content, &encrypt_options, &mut rng)?;
                    let serialized = container.to_bytes();
                    let elapsed = start.elapsed().as_secs_f64();
                    if round >= config.warmup {
                        encrypt_total += elapsed;
                    }
                    bytes = serialized;
                }
                rows.push(BenchRow {
                    suite: suite_id,
                    op: BenchOp::Encrypt,
                    size,
                    n,
                    deception: config.deception,
                    validation: config.validation,
                    mean_seconds: encrypt_total / config.repetitions as f64,
                });

                let mut decrypt_total = 0.0;
                for round in 0..config.warmup + config.repetitions {
                    let start = Instant::now();
                    let container = parse(&bytes)?;
                    let opened = decrypt(&keys[0], &container, &decrypt_options)?;
                    let elapsed = start.elapsed().as_secs_f64();
                    assert_eq!(opened.content.len(), size);
                    if round >= config.warmup {
                        decrypt_total += elapsed;
                    }
                }
                rows.push(BenchRow {
                    suite: suite_id,
                    op: BenchOp::Decrypt,
                    size,
                    n,
                    deception: config.deception,
                    validation: config.validation,
                    mean_seconds: decrypt_total / config.repetitions as f64,
                });
            }
        }
    }
    Ok(rows)
}

const CSV_HEADER: [&str; 7] = ["suite", "op", "size", "n", "deception", "validation", "mean_seconds"];

fn flag(value: bool) -> &'static str {
    if value {
        "on"
    } else {
        "off"
    }
}

/// Writes rows as CSV with a header line.
pub fn write_csv<W: io::Write>(rows: &[BenchRow], writer: W) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(CSV_HEADER)?;
    for row in rows {
        out.write_record([
            format!("{:#010x}", row.suite),
            row.op.to_string(),
            row.size.to_string(),
            row.n.to_string(),
            flag(row.deception).to_string(),
            flag(row.validation).to_string(),
            format!("{:.6}", row.mean_seconds),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn to_csv_string(rows: &[BenchRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

/// Parses rows written by [`write_csv`].
pub fn read_csv<R: io::Read>(reader: R) -> Result<Vec<BenchRow>, BenchError> {
    let mut input = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for record in input.records() {
        let record = record?;
        let field = |i: usize| -> Result<&str, BenchError> {
            record
                .get(i)
                .ok_or_else(|| BenchError::MalformedCsv(format!("missing column {i}")))
        };
        let suite_text = field(0)?;
        let suite = u32::from_str_radix(suite_text.trim_start_matches("0x"), 16)
            .map_err(|_| BenchError::MalformedCsv(format!("bad suite id {suite_text:?}")))?;
        let op = match field(1)? {
            "encrypt" => BenchOp::Encrypt,
            "decrypt" => BenchOp::Decrypt,
            other => return Err(BenchError::MalformedCsv(format!("bad op {other:?}"))),
        };
        let parse_flag = |text: &str| match text {
            "on" => Ok(true),
            "off" => Ok(false),
            other => Err(BenchError::MalformedCsv(format!("bad flag {other:?}"))),
        };
        rows.push(BenchRow {
            suite,
            op,
            size: field(2)?
                .parse()
                .map_err(|_| BenchError::MalformedCsv("bad size".into()))?,
            n: field(3)?
                .parse()
                .map_err(|_| BenchError::MalformedCsv("bad n".into()))?,
            deception: parse_flag(field(4)?)?,
            validation: parse_flag(field(5)?)?,
            mean_seconds: field(6)?
                .parse()
                .map_err(|_| BenchError::MalformedCsv("bad mean".into()))?,
        });
    }
    Ok(rows)
}

/// Outcome of one performance goal.
#[derive(Debug, Clone)]
pub struct GoalResult {
    pub name: &'static str,
    /// Gated goals are release criteria; ungated ones are informational
    /// trends.
    pub gated: bool,
    /// `None` when the rows lack the data points the goal needs.
    pub passed: Option<bool>,
    pub detail: String,
}

impl fmt::Display for GoalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match self.passed {
            Some(true) => "[PASS]",
            Some(false) => "[FAIL]",
            None => "[SKIP]",
        };
        let kind = if self.gated { "goal" } else { "trend" };
        write!(f, "{verdict} {kind} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct GoalReport {
    pub goals: Vec<GoalResult>,
}

impl GoalReport {
    /// True when every gated goal has data and passed.
    pub fn gated_goals_pass(&self) -> bool {
        self.goals
            .iter()
            .filter(|g| g.gated)
            .all(|g| g.passed == Some(true))
    }
}

impl fmt::Display for GoalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for goal in &self.goals {
            writeln!(f, "{goal}")?;
        }
        Ok(())
    }
}

const MIB: usize = 1024 * 1024;
const SUITE_I: u32 = ecf_core::SUITE_AES256GCM_SHA256;
const SUITE_II: u32 = ecf_core::SUITE_AES256GCM_SHA512;
const SUITE_III: u32 = ecf_core::SUITE_AEGIS256_SHA256;
const SUITE_IV: u32 = ecf_core::SUITE_AEGIS256_SHA512;

/// Worst (largest) mean over rows matching the given cell, across flag
/// settings unless constrained.
fn worst_mean(
    rows: &[BenchRow],
    suite: u32,
    op: BenchOp,
    size: usize,
    n: usize,
    deception: Option<bool>,
    validation: Option<bool>,
) -> Option<f64> {
    rows.iter()
        .filter(|r| {
            r.suite == suite
                && r.op == op
                && r.size == size
                && r.n == n
                && deception.is_none_or(|d| r.deception == d)
                && validation.is_none_or(|v| r.validation == v)
        })
        .map(|r| r.mean_seconds)
        .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

/// Checks the portable performance goals against measured rows.
///
/// Latency ceilings come from the design target of staying under 100 ms for
/// typical confidential data, tightened threefold where typical hardware
/// comfortably allows it; the remaining goals check trends (size linearity,
/// hash-function ordering, deception-block neutrality) rather than absolute
/// numbers.
pub fn check_goals(rows: &[BenchRow]) -> GoalReport {
    let mut goals = Vec::new();

    // 1 MiB, n = 5, suite II: under 30 ms each (hard ceiling 100 ms).
    for op in [BenchOp::Encrypt, BenchOp::Decrypt] {
        let name: &'static str = match op {
            BenchOp::Encrypt => "encrypt 1 MiB / 5 recipients below 30 ms",
            BenchOp::Decrypt => "decrypt 1 MiB / 5 recipients below 30 ms",
        };
        let result = match worst_mean(rows, SUITE_II, op, MIB, 5, None, None) {
            Some(mean) => GoalResult {
                name,
                gated: true,
                // The 30 ms limit subsumes the 100 ms design ceiling.
                passed: Some(mean < 0.030),
                detail: format!("measured {:.1} ms (limit 30 ms, ceiling 100 ms)", mean * 1e3),
            },
            None => GoalResult {
                name,
                gated: true,
                passed: None,
                detail: "no matching rows".into(),
            },
        };
        goals.push(result);
    }

    // 1 MiB, n = 50, suite II: under 45 ms each.
    for op in [BenchOp::Encrypt, BenchOp::Decrypt] {
        let name: &'static str = match op {
            BenchOp::Encrypt => "encrypt 1 MiB / 50 recipients below 45 ms",
            BenchOp::Decrypt => "decrypt 1 MiB / 50 recipients below 45 ms",
        };
        let result = match worst_mean(rows, SUITE_II, op, MIB, 50, None, None) {
            Some(mean) => GoalResult {
                name,
                gated: true,
                passed: Some(mean < 0.045),
                detail: format!("measured {:.1} ms (limit 45 ms)", mean * 1e3),
            },
            None => GoalResult {
                name,
                gated: true,
                passed: None,
                detail: "no matching rows".into(),
            },
        };
        goals.push(result);
    }

    // Scaling 10 MiB -> 100 MiB stays linear: ratio within [5, 20].
    for op in [BenchOp::Encrypt, BenchOp::Decrypt] {
        let name: &'static str = match op {
            BenchOp::Encrypt => "encrypt scaling 10->100 MiB within [5, 20]",
            BenchOp::Decrypt => "decrypt scaling 10->100 MiB within [5, 20]",
        };
        let small = worst_mean(rows, SUITE_II, op, 10 * MIB, 5, None, None);
        let large = worst_mean(rows, SUITE_II, op, 100 * MIB, 5, None, None);
        let result = match (small, large) {
            (Some(small), Some(large)) => {
                let ratio = large / small;
                GoalResult {
                    name,
                    gated: true,
                    passed: Some((5.0..=20.0).contains(&ratio)),
                    detail: format!("ratio {ratio:.1}"),
                }
            }
            _ => GoalResult {
                name,
                gated: true,
                passed: None,
                detail: "no matching rows".into(),
            },
        };
        goals.push(result);
    }

    // SHA-512 suites beat their SHA-256 siblings at 100 MiB.
    let mut ratios = Vec::new();
    let mut complete = true;
    for (sha256_suite, sha512_suite) in [(SUITE_I, SUITE_II), (SUITE_III, SUITE_IV)] {
        for op in [BenchOp::Encrypt, BenchOp::Decrypt] {
            let slow = worst_mean(rows, sha256_suite, op, 100 * MIB, 5, None, None);
            let fast = worst_mean(rows, sha512_suite, op, 100 * MIB, 5, None, None);
            match (slow, fast) {
                (Some(slow), Some(fast)) => ratios.push(slow / fast),
                _ => complete = false,
            }
        }
    }
    goals.push(if complete && !ratios.is_empty() {
        GoalResult {
            name: "SHA-512 suites faster than SHA-256 suites at 100 MiB",
            gated: true,
            passed: Some(ratios.iter().all(|r| *r > 1.0)),
            detail: format!(
                "speedup ratios {:?}",
                ratios.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>()
            ),
        }
    } else {
        GoalResult {
            name: "SHA-512 suites faster than SHA-256 suites at 100 MiB",
            gated: true,
            passed: None,
            detail: "no matching rows".into(),
        }
    });

    // Deception blocks leave decryption unaffected (within 25 percent).
    let deception_cell = rows
        .iter()
        .filter(|r| r.op == BenchOp::Decrypt && r.deception)
        .filter(|on| {
            rows.iter().any(|off| {
                !off.deception
                    && off.op == BenchOp::Decrypt
                    && (off.suite, off.size, off.n, off.validation)
                        == (on.suite, on.size, on.n, on.validation)
            })
        })
        .max_by_key(|r| (r.size, r.n));
    goals.push(match deception_cell {
        Some(on) => {
            let off = worst_mean(
                rows,
                on.suite,
                BenchOp::Decrypt,
                on.size,
                on.n,
                Some(false),
                Some(on.validation),
            )
            .expect("matching off row exists");
            let delta = (on.mean_seconds - off).abs() / off;
            GoalResult {
                name: "deception blocks do not affect decryption",
                gated: true,
                passed: Some(delta < 0.25),
                detail: format!(
                    "on {:.2} ms vs off {:.2} ms, delta {:.0}%",
                    on.mean_seconds * 1e3,
                    off * 1e3,
                    delta * 100.0
                ),
            }
        }
        None => GoalResult {
            name: "deception blocks do not affect decryption",
            gated: true,
            passed: None,
            detail: "no matching on/off row pair".into(),
        },
    });

    // Informational: decryption no slower than encryption per cell.
    let mut pairs = 0usize;
    let mut decrypt_not_slower = 0usize;
    for enc in rows.iter().filter(|r| r.op == BenchOp::Encrypt) {
        if let Some(dec) = worst_mean(
            rows,
            enc.suite,
            BenchOp::Decrypt,
            enc.size,
            enc.n,
            Some(enc.deception),
            Some(enc.validation),
        ) {
            pairs += 1;
            // Allow 10 percent measurement noise.
            if dec <= enc.mean_seconds * 1.10 {
                decrypt_not_slower += 1;
            }
        }
    }
    goals.push(GoalResult {
        name: "decryption at most as expensive as encryption",
        gated: false,
        passed: if pairs == 0 {
            None
        } else {
            Some(decrypt_not_slower == pairs)
        },
        detail: format!("{decrypt_not_slower}/{pairs} cells"),
    });

    // Informational: the cost of signature validation grows with n.
    let mut validation_deltas: Vec<(usize, f64)> = Vec::new();
    for on in rows
        .iter()
        .filter(|r| r.op == BenchOp::Decrypt && r.validation && r.size == MIB)
    {
        if let Some(off) = worst_mean(
            rows,
            on.suite,
            BenchOp::Decrypt,
            on.size,
            on.n,
            Some(on.deception),
            Some(false),
        ) {
            validation_deltas.push((on.n, on.mean_seconds - off));
        }
    }
    validation_deltas.sort_by_key(|(n, _)| *n);
    goals.push(if validation_deltas.len() >= 2 {
        let (n_min, delta_min) = validation_deltas[0];
        let (n_max, delta_max) = validation_deltas[validation_deltas.len() - 1];
        GoalResult {
            name: "signature validation cost grows with recipient count",
            gated: false,
            passed: Some(n_max > n_min && delta_max > delta_min),
            detail: format!(
                "delta {:.2} ms at n={n_min} vs {:.2} ms at n={n_max}",
                delta_min * 1e3,
                delta_max * 1e3
            ),
        }
    } else {
        GoalResult {
            name: "signature validation cost grows with recipient count",
            gated: false,
            passed: None,
            detail: "no matching on/off row pairs".into(),
        }
    });

    GoalReport { goals }
}
