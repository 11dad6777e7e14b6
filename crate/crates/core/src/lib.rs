//! Static detection of centralization risk in smart contracts.
//!
//! Centralization risk is the combination of a privileged access pattern
//! (a check that only a specific caller may proceed) with logic that moves
//! or rewrites funds. Two front ends are provided:
//!
//! - [`solidity`]: a tolerant lexer/parser for the subset of Solidity that
//!   access-control and balance patterns live in, plus AST detectors.
//! - [`teal`]: a TEAL assembly parser, basic-block CFG, per-block abstract
//!   stack interpretation, and an all-paths guardedness analysis.
//!
//! Both feed [`report::classify_solidity`] and [`report::classify_teal`], which turns raw detections into
//! severity-graded [`Finding`]s. [`scan`] wires everything together for a
//! set of files.
//!
//! ```
//! use centriscan_core::{AnalyzerConfig, SourceFile, scan_sources};
//!
//! let src = r#"
//! contract Vault {
//!     address owner;
//!     mapping(address => uint) bals;
//!     modifier only_owner { require(msg.sender == owner); _; }
//!     function drain(address a) public only_owner { bals[a] = 0; }
//! }"#;
//! let report = scan_sources(
//!     &[SourceFile::new("Vault.sol", src.as_bytes().to_vec())],
//!     &AnalyzerConfig::default(),
//! );
//! assert_eq!(report.counts.major, 1);
//! ```

pub mod config;
pub mod diagnostic;
pub mod report;
pub mod scan;
pub mod solidity;
pub mod teal;

pub use config::{AnalyzerConfig, ConfigError, FailThreshold};
pub use diagnostic::{Diagnostic, DiagnosticLevel, Location};
pub use report::{
    classify_solidity, classify_teal, render_report, Evidence, EvidenceRole, Finding, FindingKind,
    Format, Language, ReportDiagnostic, ScanReport, Severity, SeverityCounts,
};
pub use scan::{analyze_file, assemble_report, scan_sources, FileAnalysis, SourceFile};

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
