//! Classification of raw detections into findings, and report rendering.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::config::AnalyzerConfig;
use crate::diagnostic::{Diagnostic, DiagnosticLevel, Location};
use crate::solidity::{
    FundModKind, FundModSite, GuardForm as SolGuardForm, GuardSite, RawDetection,
};
use crate::teal::{
    FundModPoint, GuardForm as TealGuardForm, GuardPoint, Guardedness, GuardednessResult,
};

/// Ordered so that `Info < Warning < Major`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Severity {
    Info,
    Warning,
    Major,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Info => "INFO",
            Severity::Warning => "WARNING",
            Severity::Major => "MAJOR",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FindingKind {
    /// A privileged access check guarding fund-modifying logic.
    CentralizationRisk,
    /// A privileged access check with no fund-modifying logic behind it.
    PrivilegedFunction,
    /// Fund-modifying logic reachable without any privileged access check.
    UnprotectedFundModification,
}

impl FindingKind {
    pub fn severity(self) -> Severity {
        match self {
            FindingKind::CentralizationRisk => Severity::Major,
            FindingKind::UnprotectedFundModification => Severity::Warning,
            FindingKind::PrivilegedFunction => Severity::Info,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FindingKind::CentralizationRisk => "CENTRALIZATION_RISK",
            FindingKind::PrivilegedFunction => "PRIVILEGED_FUNCTION",
            FindingKind::UnprotectedFundModification => "UNPROTECTED_FUND_MODIFICATION",
        }
    }
}

impl fmt::Display for FindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Solidity,
    Teal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceRole {
    Guard,
    FundModification,
}

impl EvidenceRole {
    pub fn as_str(self) -> &'static str {
        match self {
            EvidenceRole::Guard => "guard",
            EvidenceRole::FundModification => "fund_modification",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Evidence {
    pub role: EvidenceRole,
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub text: String,
}

impl Evidence {
    fn new(role: EvidenceRole, file: &str, location: Location, text: String) -> Self {
        Self {
            role,
            file: file.to_string(),
            line: location.line,
            column: location.column,
            text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub severity: Severity,
    pub language: Language,
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub message: String,
    pub evidence: Vec<Evidence>,
}

impl Finding {
    fn new(
        kind: FindingKind,
        language: Language,
        file: &str,
        location: Location,
        message: String,
        evidence: Vec<Evidence>,
    ) -> Self {
        Self {
            kind,
            severity: kind.severity(),
            language,
            file: file.to_string(),
            line: location.line,
            column: location.column,
            message,
            evidence,
        }
    }

    pub fn location(&self) -> Location {
        Location::new(self.line, self.column)
    }

    fn sort_key(&self) -> (&str, u32, u32, FindingKind, &str) {
        (&self.file, self.line, self.column, self.kind, &self.message)
    }
}

fn guard_form_name(form: SolGuardForm) -> &'static str {
    match form {
        SolGuardForm::ModifierGuard => "modifier guard",
        SolGuardForm::RequireGuard => "require guard",
        SolGuardForm::IfGuard => "if guard",
    }
}

fn sol_guard_evidence(file: &str, g: &GuardSite) -> Evidence {
    let scope = match g.form {
        SolGuardForm::ModifierGuard => format!(" in modifier `{}`", g.scope_name),
        _ => String::new(),
    };
    Evidence::new(
        EvidenceRole::Guard,
        file,
        g.location,
        format!("{}{scope}: {}", guard_form_name(g.form), g.text),
    )
}

fn sol_fund_evidence(file: &str, s: &FundModSite) -> Evidence {
    let text = match s.kind {
        FundModKind::BalanceMappingWrite => format!("balance mapping write: {}[...]", s.target),
        FundModKind::NativeTransfer => format!("native transfer: {}", s.target),
        FundModKind::SelfDestruct => format!("contract destruction: {}", s.target),
    };
    Evidence::new(EvidenceRole::FundModification, file, s.location, text)
}

/// Findings for one Solidity file.
///
/// Per function: privileged-scoped fund sites give one
/// `CENTRALIZATION_RISK`; fund sites outside any guard give one
/// `UNPROTECTED_FUND_MODIFICATION`; a privileged function whose guards
/// cover no fund site gives one `PRIVILEGED_FUNCTION`.
pub fn classify_solidity(detections: &[RawDetection], file: &str) -> Vec<Finding> {
    let mut out = Vec::new();
    for d in detections {
        let name = format!("{}.{}", d.contract, d.function);
        let (covered, exposed): (Vec<&FundModSite>, Vec<&FundModSite>) =
            d.fund_sites.iter().partition(|s| s.privileged_scope);
        let guards: Vec<Evidence> = d
            .guard_sites
            .iter()
            .map(|g| sol_guard_evidence(file, g))
            .collect();
        if d.privileged && !covered.is_empty() {
            let mut evidence = guards.clone();
            evidence.extend(covered.iter().map(|s| sol_fund_evidence(file, s)));
            out.push(Finding::new(
                FindingKind::CentralizationRisk,
                Language::Solidity,
                file,
                d.function_location,
                format!(
                    "`{name}` modifies funds behind a privileged sender check ({} fund site{})",
                    covered.len(),
                    plural(covered.len())
                ),
                evidence,
            ));
        } else if d.privileged {
            out.push(Finding::new(
                FindingKind::PrivilegedFunction,
                Language::Solidity,
                file,
                d.function_location,
                format!("`{name}` is restricted to a privileged sender"),
                guards,
            ));
        }
        if !exposed.is_empty() {
            out.push(Finding::new(
                FindingKind::UnprotectedFundModification,
                Language::Solidity,
                file,
                d.function_location,
                format!(
                    "`{name}` modifies funds without a privileged sender check ({} fund site{})",
                    exposed.len(),
                    plural(exposed.len())
                ),
                exposed.iter().map(|s| sol_fund_evidence(file, s)).collect(),
            ));
        }
    }
    out
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

fn teal_guard_evidence(file: &str, g: &GuardPoint) -> Evidence {
    let form = match g.form {
        TealGuardForm::AssertGuard => "assert guard",
        TealGuardForm::BranchGuard { .. } => "branch guard",
    };
    let weakened = if g.weakened {
        " (weakened by `||`)"
    } else {
        ""
    };
    Evidence::new(
        EvidenceRole::Guard,
        file,
        g.location,
        format!("{form}: txn Sender == {}{weakened}", g.privileged_source),
    )
}

fn teal_fund_evidence(file: &str, p: &FundModPoint) -> Evidence {
    Evidence::new(
        EvidenceRole::FundModification,
        file,
        p.location,
        format!("{} {:?}", p.opcode, p.key_text()),
    )
}

/// Findings for one TEAL program.
///
/// Per fund point: guarded gives `CENTRALIZATION_RISK` with the guards on
/// its paths, unguarded gives `UNPROTECTED_FUND_MODIFICATION`, unreachable
/// gives nothing. With no fund points at all, each guard gives one
/// `PRIVILEGED_FUNCTION`.
pub fn classify_teal(
    guards: &[GuardPoint],
    result: &GuardednessResult,
    file: &str,
) -> Vec<Finding> {
    let mut out = Vec::new();
    for pg in &result.points {
        let p = &pg.point;
        match &pg.guardedness {
            Guardedness::Guarded { guards: idx } => {
                let mut evidence: Vec<Evidence> = idx
                    .iter()
                    .map(|&i| teal_guard_evidence(file, &guards[i]))
                    .collect();
                evidence.push(teal_fund_evidence(file, p));
                out.push(Finding::new(
                    FindingKind::CentralizationRisk,
                    Language::Teal,
                    file,
                    p.location,
                    format!(
                        "`{}` of {:?} is reachable only after a privileged sender check",
                        p.opcode,
                        p.key_text()
                    ),
                    evidence,
                ));
            }
            Guardedness::Unguarded { witness } => {
                let path = witness
                    .iter()
                    .map(|b| format!("B{b}"))
                    .collect::<Vec<_>>()
                    .join(" -> ");
                out.push(Finding::new(
                    FindingKind::UnprotectedFundModification,
                    Language::Teal,
                    file,
                    p.location,
                    format!(
                        "`{}` of {:?} is reachable without a privileged sender check (path {path})",
                        p.opcode,
                        p.key_text()
                    ),
                    vec![teal_fund_evidence(file, p)],
                ));
            }
            Guardedness::Unreachable => {}
        }
    }
    if result.points.is_empty() {
        for g in guards {
            out.push(Finding::new(
                FindingKind::PrivilegedFunction,
                Language::Teal,
                file,
                g.location,
                format!("program requires the sender to be {}", g.privileged_source),
                vec![teal_guard_evidence(file, g)],
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SeverityCounts {
    pub major: usize,
    pub warning: usize,
    pub info: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportDiagnostic {
    pub file: String,
    pub line: u32,
    pub message: String,
    #[serde(skip)]
    pub column: u32,
    #[serde(skip)]
    pub level: DiagnosticLevel,
}

impl ReportDiagnostic {
    pub fn from_diagnostic(file: &str, d: &Diagnostic) -> Self {
        Self {
            file: file.to_string(),
            line: d.location.line,
            column: d.location.column,
            message: d.message.clone(),
            level: d.level,
        }
    }

    /// A file-level problem (e.g. unreadable input), reported at line 0.
    pub fn file_level(file: &str, level: DiagnosticLevel, message: impl Into<String>) -> Self {
        Self {
            file: file.to_string(),
            line: 0,
            column: 0,
            message: message.into(),
            level,
        }
    }
}

impl fmt::Display for ReportDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}:{}:{}: {}",
            self.level, self.file, self.line, self.column, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub version: String,
    pub config_fingerprint: String,
    pub files_scanned: usize,
    pub findings: Vec<Finding>,
    pub counts: SeverityCounts,
    pub diagnostics: Vec<ReportDiagnostic>,
}

impl ScanReport {
    /// Assemble a report; findings and diagnostics may arrive in any order.
    pub fn new(
        config: &AnalyzerConfig,
        files_scanned: usize,
        findings: Vec<Finding>,
        diagnostics: Vec<ReportDiagnostic>,
    ) -> Self {
        let mut report = Self {
            version: crate::VERSION.to_string(),
            config_fingerprint: config.fingerprint(),
            files_scanned,
            findings,
            counts: SeverityCounts::default(),
            diagnostics,
        };
        report.normalize();
        report
    }

    /// Sort findings and diagnostics and recompute counts.
    pub fn normalize(&mut self) {
        self.findings
            .sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        // stable: keeps per-file emission order for equal positions
        self.diagnostics
            .sort_by(|a, b| (&a.file, a.line, a.column).cmp(&(&b.file, b.line, b.column)));
        let mut counts = SeverityCounts::default();
        for f in &self.findings {
            match f.severity {
                Severity::Major => counts.major += 1,
                Severity::Warning => counts.warning += 1,
                Severity::Info => counts.info += 1,
            }
        }
        self.counts = counts;
    }

    pub fn add_diagnostic(&mut self, d: ReportDiagnostic) {
        self.diagnostics.push(d);
        self.normalize();
    }

    pub fn max_severity(&self) -> Option<Severity> {
        self.findings.iter().map(|f| f.severity).max()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown report format `{0}` (expected `text` or `json`)")]
pub struct UnknownFormat(pub String);

impl FromStr for Format {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            other => Err(UnknownFormat(other.to_string())),
        }
    }
}

/// Render findings. Text output omits diagnostics (callers print those to
/// stderr); JSON output embeds them.
pub fn render_report(report: &ScanReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::new();
            for f in &report.findings {
                s.push_str(&format!(
                    "{} {} {}:{}:{} {}\n",
                    f.severity, f.kind, f.file, f.line, f.column, f.message
                ));
                for e in &f.evidence {
                    s.push_str(&format!(
                        "    {} {}:{}:{} {}\n",
                        e.role.as_str(),
                        e.file,
                        e.line,
                        e.column,
                        e.text
                    ));
                }
            }
            s
        }
    }
}
