//! Command-line front end: `scan`, `selector`, `checksum`, `derive`, `mine`
//! and `bench`.
//!
//! Exit codes: 0 clean / found, 1 findings present / not found, 2 operational
//! error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use globset::{Glob, GlobMatcher};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::address_kind::{resolve_live, AddressKindMap, NodeClient};
use crate::eth_primitives::{
    compute_selector, derive_create_address, eip55_classify, eip55_encode, Address, CaseClass,
    FunctionHeader, Nonce, PrimitiveError, Selector,
};
use crate::homograph::ConfusableMap;
use crate::scanner::{
    address_literals, scan, tokenize, AttackClass, Evidence, Finding, ScanConfig, Severity, Span,
};
use crate::selector_miner::{mine_parallel, search_space_size, throughput_bench, MiningTask};

pub const SCHEMA_VERSION: &str = "sescan-report/1";
pub const DEFAULT_GLOB: &str = "*.sol";
pub const DEFAULT_ALPHABET: &str = "abcdefghijklmnopqrstuvwxyz";

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sescan", version, about = "Detect social-engineering attack patterns in Solidity sources")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Write the report (or command output) to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Drop findings below this severity [default: medium]
    #[arg(long, global = true)]
    pub severity_floor: Option<Severity>,
    /// Comma-separated attack classes to report [default: A1,...,A6]
    #[arg(long, global = true, value_delimiter = ',')]
    pub classes: Option<Vec<AttackClass>>,
    /// Address-kind snapshot file (`address,kind` lines).
    #[arg(long, global = true)]
    pub snapshot: Option<String>,
    /// JSON-RPC endpoint for live `eth_getCode` lookups.
    #[arg(long, global = true)]
    pub rpc: Option<String>,
    /// Worker threads [default: available parallelism]
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan files or directories and print a JSON report.
    Scan(ScanArgs),
    /// Print the 4-byte selector of a function header.
    Selector { header: String },
    /// Classify an address's EIP-55 checksum and print its checksummed form.
    Checksum { address: String },
    /// Print the CREATE address of `sender` at `nonce`.
    Derive { sender: String, nonce: String },
    /// Search for a function name whose selector matches a target.
    Mine(MineArgs),
    /// Measure selector evaluations per second.
    Bench {
        #[arg(long, default_value_t = 2.0)]
        seconds: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    pub paths: Vec<PathBuf>,
    /// File-name pattern for directory walks [default: *.sol]
    #[arg(long)]
    pub glob: Option<String>,
    /// Reuse the `config_echo` of an earlier report; explicit flags win.
    #[arg(long)]
    pub config_from: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MineArgs {
    /// Target selector, 8 hex digits with optional 0x.
    pub target: String,
    #[arg(long, default_value = DEFAULT_ALPHABET)]
    pub alphabet: String,
    #[arg(long, default_value_t = 4)]
    pub max_len: usize,
    #[arg(long, default_value_t = 32)]
    pub match_bits: u32,
    #[arg(long, default_value_t = u64::MAX)]
    pub budget: u64,
    /// Argument list appended to every candidate name.
    #[arg(long = "args", default_value = "(uint256)")]
    pub arg_signature: String,
    /// Report progress on stderr once per second.
    #[arg(long)]
    pub progress: bool,
}

/// Effective scan settings, echoed into every report. Feeding it back via
/// `--config-from` reproduces the report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub paths: Vec<String>,
    pub glob: String,
    pub severity_floor: Severity,
    pub classes: Vec<AttackClass>,
    pub snapshot: Option<String>,
    pub rpc: Option<String>,
    pub confusable_table: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileFinding {
    pub file: String,
    pub attack_class: AttackClass,
    pub severity: Severity,
    pub span: Span,
    pub message: String,
    pub evidence: Evidence,
}

impl FileFinding {
    fn new(file: &str, f: Finding) -> Self {
        FileFinding {
            file: file.to_string(),
            attack_class: f.attack_class,
            severity: f.severity,
            span: f.span,
            message: f.message,
            evidence: f.evidence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileError {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub scanned_files: usize,
    pub findings: Vec<FileFinding>,
    pub per_class_counts: BTreeMap<AttackClass, usize>,
    pub errors: Vec<FileError>,
    pub config_echo: ConfigEcho,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.scanned_files == 0 {
            EXIT_ERROR
        } else if self.findings.is_empty() {
            EXIT_CLEAN
        } else {
            EXIT_FINDINGS
        }
    }
}

fn jobs(global: &GlobalArgs) -> usize {
    global
        .jobs
        .filter(|&j| j > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Resolves the effective settings: explicit flags, then `--config-from`,
/// then defaults.
pub fn effective_config(global: &GlobalArgs, args: &ScanArgs) -> Result<ConfigEcho, String> {
    let base = match &args.config_from {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("reading {}: {e}", path.display()))?;
            let report: Report = serde_json::from_str(&text)
                .map_err(|e| format!("parsing {}: {e}", path.display()))?;
            Some(report.config_echo)
        }
        None => None,
    };
    let mut classes = global
        .classes
        .clone()
        .or_else(|| base.as_ref().map(|b| b.classes.clone()))
        .unwrap_or_else(|| AttackClass::ALL.to_vec());
    classes.sort();
    classes.dedup();
    let paths = if args.paths.is_empty() {
        base.as_ref().map(|b| b.paths.clone()).unwrap_or_default()
    } else {
        args.paths.iter().map(|p| p.display().to_string()).collect()
    };
    Ok(ConfigEcho {
        paths,
        glob: args
            .glob
            .clone()
            .or_else(|| base.as_ref().map(|b| b.glob.clone()))
            .unwrap_or_else(|| DEFAULT_GLOB.to_string()),
        severity_floor: global
            .severity_floor
            .or_else(|| base.as_ref().map(|b| b.severity_floor))
            .unwrap_or(Severity::Medium),
        classes,
        snapshot: global.snapshot.clone().or_else(|| base.as_ref().and_then(|b| b.snapshot.clone())),
        rpc: global.rpc.clone().or_else(|| base.as_ref().and_then(|b| b.rpc.clone())),
        confusable_table: ConfusableMap::bundled().version_tag().to_string(),
    })
}

/// Expands the input paths into a sorted, de-duplicated file list. Explicit
/// files are always taken; directories are walked and filtered by `glob`.
fn collect_files(
    paths: &[String],
    glob: &GlobMatcher,
    errors: &mut Vec<FileError>,
) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for p in paths {
        let path = Path::new(p);
        if path.is_file() {
            files.push(path.to_path_buf());
        } else if path.is_dir() {
            for entry in walkdir::WalkDir::new(path).sort_by_file_name() {
                match entry {
                    Ok(e) if e.file_type().is_file() && glob.is_match(e.file_name()) => {
                        files.push(e.into_path())
                    }
                    Ok(_) => {}
                    Err(e) => errors.push(FileError {
                        path: e.path().map(|p| p.display().to_string()).unwrap_or_else(|| p.clone()),
                        message: e.to_string(),
                    }),
                }
            }
        } else {
            errors.push(FileError {
                path: p.clone(),
                message: "no such file or directory".to_string(),
            });
        }
    }
    files.sort();
    files.dedup();
    files
}

pub fn run_scan(echo: &ConfigEcho, jobs: usize) -> Report {
    let mut errors = Vec::new();
    let empty = |errors: Vec<FileError>| Report {
        schema_version: SCHEMA_VERSION.to_string(),
        scanned_files: 0,
        findings: Vec::new(),
        per_class_counts: AttackClass::ALL.iter().map(|&c| (c, 0)).collect(),
        errors,
        config_echo: echo.clone(),
    };

    let glob = match Glob::new(&echo.glob) {
        Ok(g) => g.compile_matcher(),
        Err(e) => {
            errors.push(FileError {
                path: echo.glob.clone(),
                message: format!("bad glob: {e}"),
            });
            return empty(errors);
        }
    };
    let mut kinds = match &echo.snapshot {
        Some(path) => match AddressKindMap::load_snapshot(Path::new(path)) {
            Ok(m) => m,
            Err(e) => {
                errors.push(FileError {
                    path: path.clone(),
                    message: e.to_string(),
                });
                return empty(errors);
            }
        },
        None => AddressKindMap::default(),
    };

    let files = collect_files(&echo.paths, &glob, &mut errors);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build();
    let read = |path: &PathBuf| -> (String, Result<String, String>) {
        let name = path.display().to_string();
        let contents = std::fs::read(path)
            .map_err(|e| e.to_string())
            .and_then(|bytes| {
                String::from_utf8(bytes).map_err(|e| {
                    format!("not valid UTF-8 (first bad byte at offset {})", e.utf8_error().valid_up_to())
                })
            });
        (name, contents)
    };
    let sources: Vec<(String, Result<String, String>)> = match &pool {
        Ok(pool) => pool.install(|| files.par_iter().map(read).collect()),
        Err(_) => files.iter().map(read).collect(),
    };

    if let Some(endpoint) = &echo.rpc {
        let mut addrs = Vec::new();
        for (_, src) in &sources {
            if let Ok(src) = src {
                addrs.extend(address_literals(&tokenize(src)));
            }
        }
        let client = NodeClient::new(endpoint, Duration::from_secs(10));
        for (addr, err) in resolve_live(&mut kinds, &client, &addrs, jobs) {
            errors.push(FileError {
                path: endpoint.clone(),
                message: format!("{addr}: {err}"),
            });
        }
    }

    let config = ScanConfig::new(
        Arc::new(ConfusableMap::bundled().clone()),
        kinds,
        echo.classes.iter().copied(),
        echo.severity_floor,
    );
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            errors.push(FileError {
                path: String::new(),
                message: e.to_string(),
            });
            return empty(errors);
        }
    };

    let scan_one = |(name, src): &(String, Result<String, String>)| match src {
        Ok(text) => Ok(scan(text, &config)
            .into_iter()
            .map(|f| FileFinding::new(name, f))
            .collect::<Vec<_>>()),
        Err(e) => Err(FileError {
            path: name.clone(),
            message: e.clone(),
        }),
    };
    let results: Vec<Result<Vec<FileFinding>, FileError>> = match &pool {
        Ok(pool) => pool.install(|| sources.par_iter().map(scan_one).collect()),
        Err(_) => sources.iter().map(scan_one).collect(),
    };

    let mut report = empty(Vec::new());
    for r in results {
        match r {
            Ok(found) => {
                report.scanned_files += 1;
                for f in &found {
                    *report.per_class_counts.entry(f.attack_class).or_insert(0) += 1;
                }
                report.findings.extend(found);
            }
            Err(e) => errors.push(e),
        }
    }
    report.errors = errors;
    report
}

fn write_output(global: &GlobalArgs, stdout: &mut dyn Write, text: &str) -> std::io::Result<()> {
    match &global.out {
        Some(path) => std::fs::write(path, text),
        None => stdout.write_all(text.as_bytes()),
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let global = &cli.global;
    let emit = |stdout: &mut dyn Write, stderr: &mut dyn Write, text: &str, code: i32| -> i32 {
        match write_output(global, stdout, text) {
            Ok(()) => code,
            Err(e) => {
                let _ = writeln!(stderr, "error: writing output: {e}");
                EXIT_ERROR
            }
        }
    };
    let fail = |stderr: &mut dyn Write, msg: &dyn std::fmt::Display| -> i32 {
        let _ = writeln!(stderr, "error: {msg}");
        EXIT_ERROR
    };

    match &cli.command {
        Command::Scan(args) => {
            let echo = match effective_config(global, args) {
                Ok(e) => e,
                Err(e) => return fail(stderr, &e),
            };
            let report = run_scan(&echo, jobs(global));
            for e in &report.errors {
                let _ = writeln!(stderr, "warning: {}: {}", e.path, e.message);
            }
            let code = report.exit_code();
            emit(stdout, stderr, &report.to_json(), code)
        }
        Command::Selector { header } => match FunctionHeader::parse(header) {
            Ok(h) => emit(stdout, stderr, &format!("{}\n", compute_selector(&h)), EXIT_CLEAN),
            Err(e) => fail(stderr, &e),
        },
        Command::Checksum { address } => {
            let c = eip55_classify(address);
            match c.address {
                Some(addr) if c.case_class != CaseClass::Malformed => {
                    let text = format!("{}\n{}\n", c.case_class, eip55_encode(&addr).text);
                    emit(stdout, stderr, &text, EXIT_CLEAN)
                }
                _ => {
                    let _ = emit(stdout, stderr, "malformed\n", EXIT_ERROR);
                    fail(stderr, &PrimitiveError::MalformedAddress(address.clone()))
                }
            }
        }
        Command::Derive { sender, nonce } => {
            let sender = match Address::parse_hex(sender) {
                Ok(a) => a,
                Err(e) => return fail(stderr, &e),
            };
            let nonce = match nonce.parse::<u64>() {
                Ok(n) => Nonce(n),
                Err(_) => return fail(stderr, &PrimitiveError::InvalidNonce(nonce.clone())),
            };
            let addr = derive_create_address(&sender, nonce);
            emit(stdout, stderr, &format!("{addr}\n"), EXIT_CLEAN)
        }
        Command::Mine(args) => run_mine(global, args, stdout, stderr),
        Command::Bench { seconds } => {
            if !(seconds.is_finite() && *seconds > 0.0) {
                return fail(stderr, &"--seconds must be positive");
            }
            let r = throughput_bench(Duration::from_secs_f64(*seconds));
            let text = format!(
                "{:.0} selectors/s ({} in {:.2}s, one thread)\nexpected full 32-bit match: {:.0}s per thread\n",
                r.per_second,
                r.candidates,
                r.elapsed.as_secs_f64(),
                r.expected_seconds_for_bits(32)
            );
            emit(stdout, stderr, &text, EXIT_CLEAN)
        }
    }
}

fn run_mine(global: &GlobalArgs, args: &MineArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let target = match Selector::parse_hex(&args.target) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let task = match MiningTask::new(
        target,
        args.match_bits,
        &args.alphabet,
        args.max_len,
        &args.arg_signature,
        args.budget,
    ) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let counter = AtomicU64::new(0);
    let done = AtomicBool::new(false);
    let total = search_space_size(&task).min(task.budget);
    let result = std::thread::scope(|s| {
        if args.progress {
            s.spawn(|| {
                let mut ticks = 0u32;
                while !done.load(Ordering::Relaxed) {
                    std::thread::sleep(Duration::from_millis(100));
                    ticks += 1;
                    if ticks.is_multiple_of(10) {
                        eprintln!(
                            "mined {} of {} candidates",
                            counter.load(Ordering::Relaxed),
                            total
                        );
                    }
                }
            });
        }
        let r = mine_parallel(&task, jobs(global), Some(&counter));
        done.store(true, Ordering::Relaxed);
        r
    });
    let result = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let _ = writeln!(
        stderr,
        "tried {} candidates in {:.2}s",
        result.candidates_tried,
        result.elapsed.as_secs_f64()
    );
    let mut write = |text: String, code: i32| match write_output(global, stdout, &text) {
        Ok(()) => code,
        Err(_) => EXIT_ERROR,
    };
    match result.found {
        Some(h) => write(format!("{} {}\n", h.canonical(), compute_selector(&h)), EXIT_CLEAN),
        None => write("NOT FOUND\n".to_string(), EXIT_FINDINGS),
    }
}
