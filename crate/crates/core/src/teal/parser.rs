use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use super::opcodes::{stack_effect, StackEffect};
use crate::diagnostic::{Diagnostic, Location};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instruction {
    pub opcode: String,
    /// Immediate arguments verbatim; quoted strings keep their quotes.
    pub immediates: Vec<String>,
    pub line: u32,
    pub column: u32,
    pub stack_effect: StackEffect,
}

impl Instruction {
    pub fn location(&self) -> Location {
        Location::new(self.line, self.column)
    }

    /// Label names this instruction may jump to.
    pub fn branch_targets(&self) -> &[String] {
        match self.opcode.as_str() {
            "b" | "bz" | "bnz" => &self.immediates[..self.immediates.len().min(1)],
            "switch" | "match" => &self.immediates,
            _ => &[],
        }
    }

    pub fn render(&self) -> String {
        if self.immediates.is_empty() {
            self.opcode.clone()
        } else {
            format!("{} {}", self.opcode, self.immediates.join(" "))
        }
    }
}

#[derive(Debug, Clone)]
pub struct TealProgram {
    pub path: String,
    pub version: Option<u32>,
    pub instructions: Vec<Instruction>,
    /// Label → index of the instruction it precedes (may equal `instructions.len()`).
    pub labels: BTreeMap<String, usize>,
    /// Decoded `intcblock` constants (first block in the program).
    pub int_constants: Vec<Option<u64>>,
    /// Decoded `bytecblock` constants (first block in the program).
    pub byte_constants: Vec<Option<Vec<u8>>>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Split a line into whitespace-separated fields, keeping `"..."` strings
/// (with escapes) as one field and dropping a trailing `//` comment.
/// Returns `(column, field)` pairs.
fn fields(line: &str) -> Vec<(u32, String)> {
    let mut out = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            break;
        }
        let start = i;
        let mut in_str = false;
        while i < chars.len() {
            let c = chars[i];
            if in_str {
                if c == '\\' {
                    i += 1;
                } else if c == '"' {
                    in_str = false;
                }
            } else if c.is_whitespace() || (c == '/' && chars.get(i + 1) == Some(&'/')) {
                break;
            } else if c == '"' {
                in_str = true;
            }
            i += 1;
        }
        let end = i.min(chars.len());
        out.push((start as u32 + 1, chars[start..end].iter().collect()));
    }
    out
}

/// Decode a TEAL `"..."` string literal body.
pub fn decode_string_literal(lit: &str) -> Option<Vec<u8>> {
    let body = lit.strip_prefix('"')?.strip_suffix('"')?;
    let mut out = Vec::new();
    let mut chars = body.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            let mut buf = [0u8; 4];
            out.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
            continue;
        }
        match chars.next()? {
            'n' => out.push(b'\n'),
            'r' => out.push(b'\r'),
            't' => out.push(b'\t'),
            '0' => out.push(0),
            '\\' => out.push(b'\\'),
            '"' => out.push(b'"'),
            'x' => {
                let hi = chars.next()?.to_digit(16)?;
                let lo = chars.next()?.to_digit(16)?;
                out.push((hi * 16 + lo) as u8);
            }
            _ => return None,
        }
    }
    Some(out)
}

/// Decode a byte-constant immediate list: `"str"`, `0x..`, `base64 X`,
/// `b64(X)`, ... Returns `None` for forms that are not decoded.
pub fn decode_bytes(immediates: &[String]) -> Option<Vec<u8>> {
    use base64::Engine as _;
    let first = immediates.first()?;
    if first.starts_with('"') {
        return decode_string_literal(first);
    }
    if let Some(hex) = first.strip_prefix("0x") {
        if hex.len() % 2 != 0 {
            return None;
        }
        return (0..hex.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(hex.get(i..i + 2)?, 16).ok())
            .collect();
    }
    let b64 = match first.as_str() {
        "base64" | "b64" => immediates.get(1)?.as_str(),
        s => s
            .strip_prefix("base64(")
            .or_else(|| s.strip_prefix("b64("))
            .and_then(|r| r.strip_suffix(')'))?,
    };
    base64::engine::general_purpose::STANDARD.decode(b64).ok()
}

/// Decode an integer immediate, including named transaction-type and
/// on-completion constants.
pub fn decode_int(imm: &str) -> Option<u64> {
    let named = match imm {
        "NoOp" | "unknown" => Some(0),
        "OptIn" | "pay" => Some(1),
        "CloseOut" | "keyreg" => Some(2),
        "ClearState" | "acfg" => Some(3),
        "UpdateApplication" | "axfer" => Some(4),
        "DeleteApplication" | "afrz" => Some(5),
        "appl" => Some(6),
        _ => None,
    };
    if named.is_some() {
        return named;
    }
    let s = imm.replace('_', "");
    if let Some(hex) = s.strip_prefix("0x") {
        u64::from_str_radix(hex, 16).ok()
    } else if s.len() > 1 && s.starts_with('0') {
        u64::from_str_radix(&s[1..], 8).ok()
    } else {
        s.parse().ok()
    }
}

/// Parse TEAL assembly. Total: every input yields a program.
pub fn parse_teal(source: &str, path: &str) -> TealProgram {
    let mut prog = TealProgram {
        path: path.to_string(),
        version: None,
        instructions: Vec::new(),
        labels: BTreeMap::new(),
        int_constants: Vec::new(),
        byte_constants: Vec::new(),
        diagnostics: Vec::new(),
    };
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx as u32 + 1;
        let mut fs = fields(line);
        if fs.is_empty() {
            continue;
        }
        if fs[0].1.starts_with('#') {
            if fs[0].1 == "#pragma" && fs.get(1).is_some_and(|f| f.1 == "version") {
                match fs.get(2).and_then(|f| f.1.parse().ok()) {
                    Some(v) => prog.version = Some(v),
                    None => prog.diagnostics.push(Diagnostic::warning(
                        Location::new(line_no, fs[0].0),
                        "malformed `#pragma version`",
                    )),
                }
            }
            continue;
        }
        if fs[0].1.len() > 1 && fs[0].1.ends_with(':') && !fs[0].1.starts_with('"') {
            let (col, label) = fs.remove(0);
            let name = label.trim_end_matches(':').to_string();
            let here = prog.instructions.len();
            match prog.labels.entry(name) {
                Entry::Occupied(e) => prog.diagnostics.push(Diagnostic::warning(
                    Location::new(line_no, col),
                    format!("duplicate label `{}`; first definition kept", e.key()),
                )),
                Entry::Vacant(e) => {
                    e.insert(here);
                }
            }
            if fs.is_empty() {
                continue;
            }
        }
        let (column, opcode) = fs.remove(0);
        let immediates: Vec<String> = fs.into_iter().map(|(_, f)| f).collect();
        let effect = match stack_effect(&opcode, &immediates) {
            Some(e) => e,
            None => {
                prog.diagnostics.push(Diagnostic::note(
                    Location::new(line_no, column),
                    format!("unrecognized opcode `{opcode}`; stack effect unknown"),
                ));
                StackEffect::Unknown
            }
        };
        if opcode == "intcblock" && prog.int_constants.is_empty() {
            prog.int_constants = immediates.iter().map(|i| decode_int(i)).collect();
        }
        if opcode == "bytecblock" && prog.byte_constants.is_empty() {
            prog.byte_constants = immediates
                .iter()
                .map(|i| decode_bytes(std::slice::from_ref(i)))
                .collect();
        }
        prog.instructions.push(Instruction {
            opcode,
            immediates,
            line: line_no,
            column,
            stack_effect: effect,
        });
    }
    for ins in &prog.instructions {
        for target in ins.branch_targets() {
            if !prog.labels.contains_key(target) {
                prog.diagnostics.push(Diagnostic::warning(
                    ins.location(),
                    format!("branch target `{target}` is not a label; edge dropped"),
                ));
            }
        }
        if matches!(ins.opcode.as_str(), "b" | "bz" | "bnz" | "callsub")
            && ins.immediates.is_empty()
        {
            prog.diagnostics.push(Diagnostic::warning(
                ins.location(),
                format!("`{}` without a target label", ins.opcode),
            ));
        }
    }
    prog
}
