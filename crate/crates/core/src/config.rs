//! Analyzer configuration and its line-oriented file format.
//!
//! ```text
//! # comments start with '#'
//! owner_keys = gov, council
//! balance_keys = MyBalance, Funds
//! balance_substring = true
//! fail_threshold = warning
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::report::Severity;

pub const DEFAULT_OWNER_KEYS: &[&str] = &["manager", "Creator", "creator", "owner", "admin"];
pub const DEFAULT_BALANCE_KEYS: &[&str] = &["MyBalance"];

/// Lowest severity that makes a scan exit non-zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailThreshold {
    Major,
    Warning,
    Info,
    None,
}

impl FailThreshold {
    /// Whether a finding at `severity` trips this threshold.
    pub fn is_tripped_by(self, severity: Severity) -> bool {
        match self {
            FailThreshold::None => false,
            FailThreshold::Major => severity >= Severity::Major,
            FailThreshold::Warning => severity >= Severity::Warning,
            FailThreshold::Info => true,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FailThreshold::Major => "major",
            FailThreshold::Warning => "warning",
            FailThreshold::Info => "info",
            FailThreshold::None => "none",
        }
    }
}

impl FromStr for FailThreshold {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "major" => Ok(FailThreshold::Major),
            "warning" => Ok(FailThreshold::Warning),
            "info" => Ok(FailThreshold::Info),
            "none" => Ok(FailThreshold::None),
            other => Err(format!(
                "invalid threshold `{other}` (expected major, warning, info or none)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown config key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {reason}")]
    InvalidValue {
        line: usize,
        key: String,
        reason: String,
    },
}

impl ConfigError {
    /// Offending line number, when the error came from file content.
    pub fn line(&self) -> Option<usize> {
        match self {
            ConfigError::Io { .. } => None,
            ConfigError::Malformed { line, .. }
            | ConfigError::UnknownKey { line, .. }
            | ConfigError::InvalidValue { line, .. } => Some(*line),
        }
    }
}

/// Effective settings for both pipelines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzerConfig {
    /// Global-state keys whose value is treated as a privileged address (TEAL).
    pub owner_keys: Vec<Vec<u8>>,
    /// Exact state keys treated as balances (TEAL).
    pub balance_keys: Vec<Vec<u8>>,
    /// Also treat any key containing "balance" (case-insensitive) as a balance.
    pub balance_substring: bool,
    /// `if (msg.sender != x) revert();` counts as a guard.
    pub revert_guard: bool,
    /// `transfer`/`send`/value-bearing `call` count as fund modifications.
    pub native_transfer: bool,
    /// `selfdestruct(...)` counts as a fund modification.
    pub selfdestruct: bool,
    /// `gtxn i Sender` / `gtxns Sender` are treated like `txn Sender`.
    pub gtxn_sender: bool,
    /// `tx.origin` is treated like `msg.sender`.
    pub tx_origin: bool,
    /// `mapping(address => mapping(address => uint))` writes count as balance writes.
    pub nested_mappings: bool,
    pub fail_threshold: FailThreshold,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self {
            owner_keys: DEFAULT_OWNER_KEYS
                .iter()
                .map(|k| k.as_bytes().to_vec())
                .collect(),
            balance_keys: DEFAULT_BALANCE_KEYS
                .iter()
                .map(|k| k.as_bytes().to_vec())
                .collect(),
            balance_substring: true,
            revert_guard: true,
            native_transfer: true,
            selfdestruct: true,
            gtxn_sender: true,
            tx_origin: false,
            nested_mappings: false,
            fail_threshold: FailThreshold::Major,
        }
    }
}

impl AnalyzerConfig {
    pub fn is_owner_key(&self, key: &[u8]) -> bool {
        self.owner_keys.iter().any(|k| k == key)
    }

    pub fn is_balance_key(&self, key: &[u8]) -> bool {
        if self.balance_keys.iter().any(|k| k == key) {
            return true;
        }
        self.balance_substring
            && key
                .windows(b"balance".len())
                .any(|w| w.eq_ignore_ascii_case(b"balance"))
    }

    /// Parse config file content on top of the defaults.
    ///
    /// List-valued keys replace the default list rather than extending it.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Malformed {
                    line,
                    text: raw.trim().to_string(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(ConfigError::Malformed {
                    line,
                    text: raw.trim().to_string(),
                });
            }
            let invalid = |reason: String| ConfigError::InvalidValue {
                line,
                key: key.to_string(),
                reason,
            };
            match key {
                "owner_keys" => cfg.owner_keys = parse_list(value),
                "balance_keys" => cfg.balance_keys = parse_list(value),
                "balance_substring" => {
                    cfg.balance_substring = parse_bool(value).map_err(invalid)?
                }
                "revert_guard" => cfg.revert_guard = parse_bool(value).map_err(invalid)?,
                "native_transfer" => cfg.native_transfer = parse_bool(value).map_err(invalid)?,
                "selfdestruct" => cfg.selfdestruct = parse_bool(value).map_err(invalid)?,
                "gtxn_sender" => cfg.gtxn_sender = parse_bool(value).map_err(invalid)?,
                "tx_origin" => cfg.tx_origin = parse_bool(value).map_err(invalid)?,
                "nested_mappings" => cfg.nested_mappings = parse_bool(value).map_err(invalid)?,
                "fail_threshold" => cfg.fail_threshold = value.parse().map_err(invalid)?,
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }
        Ok(cfg)
    }

    /// Defaults when `path` is `None`, otherwise the parsed file.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                Self::parse(&text)
            }
        }
    }

    /// Canonical `key = value` rendering of every setting, in fixed order.
    pub fn to_canonical_string(&self) -> String {
        let list = |keys: &[Vec<u8>]| {
            keys.iter()
                .map(|k| String::from_utf8_lossy(k).into_owned())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = String::new();
        let _ = writeln!(out, "owner_keys = {}", list(&self.owner_keys));
        let _ = writeln!(out, "balance_keys = {}", list(&self.balance_keys));
        let _ = writeln!(out, "balance_substring = {}", self.balance_substring);
        let _ = writeln!(out, "revert_guard = {}", self.revert_guard);
        let _ = writeln!(out, "native_transfer = {}", self.native_transfer);
        let _ = writeln!(out, "selfdestruct = {}", self.selfdestruct);
        let _ = writeln!(out, "gtxn_sender = {}", self.gtxn_sender);
        let _ = writeln!(out, "tx_origin = {}", self.tx_origin);
        let _ = writeln!(out, "nested_mappings = {}", self.nested_mappings);
        let _ = writeln!(out, "fail_threshold = {}", self.fail_threshold.as_str());
        out
    }

    /// Short hex digest of the canonical rendering.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_canonical_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_list(value: &str) -> Vec<Vec<u8>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.trim_matches('"').as_bytes().to_vec())
        .collect()
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(format!("expected a boolean, found `{other}`")),
    }
}
