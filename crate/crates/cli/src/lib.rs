//! The `centriscan` command line: file discovery, config loading, report
//! output and exit-code policy.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use centriscan_core::{
    render_report, scan_sources, AnalyzerConfig, DiagnosticLevel, FailThreshold, Format,
    ReportDiagnostic, ScanReport, SourceFile,
};
use clap::{Parser, Subcommand, ValueEnum};
use walkdir::WalkDir;

/// No finding at or above the failure threshold.
pub const EXIT_OK: i32 = 0;
/// At least one finding at or above the failure threshold.
pub const EXIT_FINDINGS: i32 = 1;
/// Usage, input or configuration error.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "centriscan",
    version,
    about = "Detect centralization risk in Solidity and TEAL sources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scan files or directories (recursively) for .sol and .teal sources.
    Scan(ScanArgs),
}

#[derive(Debug, clap::Args)]
struct ScanArgs {
    /// Files or directories to scan.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Config file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lowest severity that makes the exit code 1; overrides the config file.
    #[arg(long, value_enum)]
    fail_on: Option<FailOnArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FailOnArg {
    Major,
    Warning,
    Info,
    None,
}

impl From<FailOnArg> for FailThreshold {
    fn from(v: FailOnArg) -> Self {
        match v {
            FailOnArg::Major => FailThreshold::Major,
            FailOnArg::Warning => FailThreshold::Warning,
            FailOnArg::Info => FailThreshold::Info,
            FailOnArg::None => FailThreshold::None,
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match cli.command {
        Command::Scan(args) => scan(args, out, err),
    }
}

fn scan(args: ScanArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut config = match AnalyzerConfig::load(args.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "centriscan: config error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(t) = args.fail_on {
        config.fail_threshold = t.into();
    }
    for p in &args.paths {
        if !p.exists() {
            let _ = writeln!(
                err,
                "centriscan: {}: no such file or directory",
                p.display()
            );
            return EXIT_USAGE;
        }
    }
    let (paths, mut problems) = discover(&args.paths);
    let mut sources = Vec::with_capacity(paths.len());
    for p in paths {
        let name = display_path(&p);
        match fs::read(&p) {
            Ok(bytes) => sources.push(SourceFile::new(name, bytes)),
            Err(e) => problems.push(ReportDiagnostic::file_level(
                &name,
                DiagnosticLevel::Warning,
                format!("cannot read file: {e}"),
            )),
        }
    }
    let mut report = scan_sources(&sources, &config);
    report.diagnostics.extend(problems);
    report.normalize();
    emit(&report, args.format, out, err);
    exit_code(&report, config.fail_threshold)
}

/// Exit code for a finished scan.
pub fn exit_code(report: &ScanReport, threshold: FailThreshold) -> i32 {
    if report
        .findings
        .iter()
        .any(|f| threshold.is_tripped_by(f.severity))
    {
        EXIT_FINDINGS
    } else {
        EXIT_OK
    }
}

fn emit(report: &ScanReport, format: FormatArg, out: &mut dyn Write, err: &mut dyn Write) {
    match format {
        FormatArg::Json => {
            let _ = out.write_all(render_report(report, Format::Json).as_bytes());
        }
        FormatArg::Text => {
            let _ = out.write_all(render_report(report, Format::Text).as_bytes());
            for d in &report.diagnostics {
                let _ = writeln!(err, "{d}");
            }
            let c = report.counts;
            let _ = writeln!(
                err,
                "{} file(s) scanned: {} major, {} warning, {} info",
                report.files_scanned, c.major, c.warning, c.info
            );
        }
    }
}

fn display_path(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

fn is_source(p: &Path) -> bool {
    matches!(p.extension().and_then(|e| e.to_str()), Some("sol" | "teal"))
}

/// Explicitly named files are kept whatever their extension; directories
/// contribute their `.sol` and `.teal` files. Traversal errors become
/// diagnostics.
fn discover(roots: &[PathBuf]) -> (BTreeSet<PathBuf>, Vec<ReportDiagnostic>) {
    let mut files = BTreeSet::new();
    let mut problems = Vec::new();
    for root in roots {
        if !root.is_dir() {
            files.insert(root.clone());
            continue;
        }
        for entry in WalkDir::new(root).sort_by_file_name() {
            match entry {
                Ok(e) if e.file_type().is_file() && is_source(e.path()) => {
                    files.insert(e.into_path());
                }
                Ok(_) => {}
                Err(e) => {
                    let at = e.path().map_or_else(|| display_path(root), display_path);
                    problems.push(ReportDiagnostic::file_level(
                        &at,
                        DiagnosticLevel::Warning,
                        format!("cannot traverse: {e}"),
                    ));
                }
            }
        }
    }
    (files, problems)
}
