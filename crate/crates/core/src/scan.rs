//! Per-file pipelines and multi-file report assembly.

use std::path::Path;

use rayon::prelude::*;

use crate::config::AnalyzerConfig;
use crate::diagnostic::{decode_source, DiagnosticLevel};
use crate::report::{
    classify_solidity, classify_teal, Finding, Language, ReportDiagnostic, ScanReport,
};
use crate::{solidity, teal};

/// An input file: display path plus raw contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub path: String,
    pub bytes: Vec<u8>,
}

impl SourceFile {
    pub fn new(path: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            path: path.into(),
            bytes: bytes.into(),
        }
    }

    /// Language by file extension; `None` for anything else.
    pub fn language(&self) -> Option<Language> {
        match Path::new(&self.path).extension()?.to_str()? {
            "sol" => Some(Language::Solidity),
            "teal" => Some(Language::Teal),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileAnalysis {
    pub path: String,
    /// `None` when the file was skipped for its extension.
    pub language: Option<Language>,
    pub findings: Vec<Finding>,
    pub diagnostics: Vec<ReportDiagnostic>,
}

/// Run the pipeline matching `file`'s extension.
pub fn analyze_file(file: &SourceFile, config: &AnalyzerConfig) -> FileAnalysis {
    let language = file.language();
    let (findings, diagnostics) = match language {
        Some(Language::Solidity) => analyze_solidity(file, config),
        Some(Language::Teal) => analyze_teal(file, config),
        None => (
            Vec::new(),
            vec![ReportDiagnostic::file_level(
                &file.path,
                DiagnosticLevel::Note,
                "skipped: not a .sol or .teal file",
            )],
        ),
    };
    FileAnalysis {
        path: file.path.clone(),
        language,
        findings,
        diagnostics,
    }
}

fn analyze_solidity(
    file: &SourceFile,
    config: &AnalyzerConfig,
) -> (Vec<Finding>, Vec<ReportDiagnostic>) {
    let path = file.path.as_str();
    let unit = solidity::parse_bytes(&file.bytes, path);
    let mut diags: Vec<ReportDiagnostic> = unit
        .diagnostics
        .iter()
        .map(|d| ReportDiagnostic::from_diagnostic(path, d))
        .collect();
    let mut findings = Vec::new();
    for contract in &unit.contracts {
        let bases = solidity::inherited_contracts(&unit.contracts, contract);
        let symbols = solidity::collect_state_vars_with_bases(contract, &bases);
        let guards = solidity::find_sender_guards(contract, config);
        let mut modifiers = solidity::ModifierTable::new(contract, &guards);
        for base in &bases {
            modifiers.inherit(base, &solidity::find_sender_guards(base, config));
        }
        let funds = solidity::find_fund_modifications(contract, &symbols, config);
        let (detections, pair_diags) =
            solidity::pair_detections(contract, &guards, &funds, &modifiers);
        diags.extend(
            symbols
                .diagnostics
                .iter()
                .chain(&pair_diags)
                .map(|d| ReportDiagnostic::from_diagnostic(path, d)),
        );
        findings.extend(classify_solidity(&detections, path));
    }
    (findings, diags)
}

fn analyze_teal(
    file: &SourceFile,
    config: &AnalyzerConfig,
) -> (Vec<Finding>, Vec<ReportDiagnostic>) {
    let path = file.path.as_str();
    let (text, decode_diag) = decode_source(&file.bytes);
    let program = teal::parse_teal(&text, path);
    let cfg = teal::build_cfg(&program);
    let facts = teal::abstract_exec_program(&cfg, &program, config);
    let (guards, guard_diags) = teal::find_guard_points(&program, &cfg, &facts, config);
    let points = teal::find_fund_mod_points(&program, &facts);
    let result = teal::compute_guardedness(&cfg, &guards, &points);
    let diags = decode_diag
        .iter()
        .chain(&program.diagnostics)
        .chain(&cfg.diagnostics)
        .chain(facts.iter().flat_map(|f| &f.diagnostics))
        .chain(&guard_diags)
        .chain(&result.diagnostics)
        .map(|d| ReportDiagnostic::from_diagnostic(path, d))
        .collect();
    (classify_teal(&guards, &result, path), diags)
}

/// Merge per-file analyses into one sorted report.
pub fn assemble_report(analyses: Vec<FileAnalysis>, config: &AnalyzerConfig) -> ScanReport {
    let files_scanned = analyses.iter().filter(|a| a.language.is_some()).count();
    let mut findings = Vec::new();
    let mut diagnostics = Vec::new();
    for a in analyses {
        findings.extend(a.findings);
        diagnostics.extend(a.diagnostics);
    }
    ScanReport::new(config, files_scanned, findings, diagnostics)
}

/// Analyze `files` in parallel and build a report. The result does not
/// depend on the order of `files`, as long as paths are distinct.
pub fn scan_sources(files: &[SourceFile], config: &AnalyzerConfig) -> ScanReport {
    let mut analyses: Vec<FileAnalysis> =
        files.par_iter().map(|f| analyze_file(f, config)).collect();
    // diagnostic sorting is stable, so fix the per-file order first
    analyses.sort_by(|a, b| a.path.cmp(&b.path));
    assemble_report(analyses, config)
}
