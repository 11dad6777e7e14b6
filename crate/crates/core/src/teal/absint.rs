//! Per-block abstract stack interpretation.
//!
//! Values track where an address came from (`txn Sender`, global state
//! under an owner key, the creator address, a literal) and whether a
//! boolean is a comparison of the sender against such a privileged source.

use std::fmt;

use super::cfg::Cfg;
use super::opcodes::StackEffect;
use super::parser::{decode_bytes, decode_int, Instruction, TealProgram};
use crate::config::AnalyzerConfig;
use crate::diagnostic::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Eq,
    Neq,
}

impl Polarity {
    fn flip(self) -> Self {
        match self {
            Polarity::Eq => Polarity::Neq,
            Polarity::Neq => Polarity::Eq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AbstractValue {
    Sender,
    GlobalField(String),
    GlobalGet(Vec<u8>),
    ByteConst(Vec<u8>),
    IntConst(u64),
    AddrConst(String),
    SenderCmp {
        privileged_source: Box<AbstractValue>,
        polarity: Polarity,
        /// Combined with another condition through `||`.
        weakened: bool,
    },
    Unknown,
}

impl AbstractValue {
    pub fn is_sender_cmp(&self) -> bool {
        matches!(self, AbstractValue::SenderCmp { .. })
    }
}

fn show_bytes(b: &[u8]) -> String {
    match std::str::from_utf8(b) {
        Ok(s) if s.chars().all(|c| !c.is_control()) => format!("{s:?}"),
        _ => format!(
            "0x{}",
            b.iter().map(|x| format!("{x:02x}")).collect::<String>()
        ),
    }
}

impl fmt::Display for AbstractValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractValue::Sender => f.write_str("txn Sender"),
            AbstractValue::GlobalField(name) => f.write_str(name),
            AbstractValue::GlobalGet(key) => write!(f, "app_global_get[{}]", show_bytes(key)),
            AbstractValue::ByteConst(b) => f.write_str(&show_bytes(b)),
            AbstractValue::IntConst(v) => write!(f, "{v}"),
            AbstractValue::AddrConst(a) => write!(f, "addr {a}"),
            AbstractValue::SenderCmp {
                privileged_source,
                polarity,
                ..
            } => {
                let op = if *polarity == Polarity::Eq {
                    "=="
                } else {
                    "!="
                };
                write!(f, "txn Sender {op} {privileged_source}")
            }
            AbstractValue::Unknown => f.write_str("?"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstrFact {
    pub index: usize,
    pub pushed: Vec<AbstractValue>,
    /// Set on `assert` of an equality sender comparison.
    pub guard_point: bool,
    /// Balance key written by `app_local_put`/`app_global_put`.
    pub fund_key: Option<Vec<u8>>,
    /// Set when an `||`-combined comparison reaches a guard.
    pub weakened: bool,
}

impl InstrFact {
    pub fn fund_mod(&self) -> bool {
        self.fund_key.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockFacts {
    pub block: usize,
    pub instrs: Vec<InstrFact>,
    pub exit_stack: Vec<AbstractValue>,
    /// The model lost track of stack depth (unmodeled opcode or underflow).
    pub unknown_depth: bool,
    /// Value popped by the block's final `bz`/`bnz`/`return`, if any.
    pub terminal_value: Option<AbstractValue>,
    pub diagnostics: Vec<Diagnostic>,
}

impl BlockFacts {
    /// Block ends in `bz`/`bnz` on a sender comparison.
    pub fn is_conditional_guard_source(&self, program: &TealProgram, cfg: &Cfg) -> bool {
        let last = &program.instructions[cfg.blocks[self.block].last()];
        matches!(last.opcode.as_str(), "bz" | "bnz")
            && self
                .terminal_value
                .as_ref()
                .is_some_and(AbstractValue::is_sender_cmp)
    }
}

struct Machine<'a> {
    stack: Vec<AbstractValue>,
    /// Values below the local stack are unknown but present (non-entry blocks).
    open_bottom: bool,
    unknown_depth: bool,
    config: &'a AnalyzerConfig,
    program: &'a TealProgram,
    diagnostics: Vec<Diagnostic>,
}

impl Machine<'_> {
    fn pop(&mut self, ins: &Instruction) -> AbstractValue {
        if self.unknown_depth {
            return AbstractValue::Unknown;
        }
        match self.stack.pop() {
            Some(v) => v,
            None if self.open_bottom => AbstractValue::Unknown,
            None => {
                self.diagnostics.push(Diagnostic::warning(
                    ins.location(),
                    format!("stack underflow at `{}`", ins.opcode),
                ));
                self.unknown_depth = true;
                AbstractValue::Unknown
            }
        }
    }

    fn pop_n(&mut self, ins: &Instruction, n: usize) -> Vec<AbstractValue> {
        let mut v: Vec<_> = (0..n).map(|_| self.pop(ins)).collect();
        v.reverse();
        v
    }

    fn push(&mut self, v: AbstractValue, pushed: &mut Vec<AbstractValue>) {
        let v = if self.unknown_depth {
            AbstractValue::Unknown
        } else {
            v
        };
        pushed.push(v.clone());
        if !self.unknown_depth {
            self.stack.push(v);
        }
    }

    fn is_privileged(&self, v: &AbstractValue) -> bool {
        match v {
            AbstractValue::GlobalGet(key) => self.config.is_owner_key(key),
            AbstractValue::GlobalField(name) => name == "CreatorAddress",
            AbstractValue::AddrConst(_) => true,
            _ => false,
        }
    }

    fn compare(&self, a: AbstractValue, b: AbstractValue, polarity: Polarity) -> AbstractValue {
        let source = match (&a, &b) {
            (AbstractValue::Sender, other) | (other, AbstractValue::Sender)
                if self.is_privileged(other) =>
            {
                other.clone()
            }
            _ => return AbstractValue::Unknown,
        };
        AbstractValue::SenderCmp {
            privileged_source: Box::new(source),
            polarity,
            weakened: false,
        }
    }

    fn step(&mut self, index: usize, ins: &Instruction) -> InstrFact {
        let mut fact = InstrFact {
            index,
            pushed: Vec::new(),
            guard_point: false,
            fund_key: None,
            weakened: false,
        };
        let mut pushed = Vec::new();
        let imm0 = ins.immediates.first().map(String::as_str);
        match ins.opcode.as_str() {
            "int" | "pushint" => {
                let v = imm0
                    .and_then(decode_int)
                    .map_or(AbstractValue::Unknown, AbstractValue::IntConst);
                self.push(v, &mut pushed);
            }
            "byte" | "pushbytes" => {
                let v = decode_bytes(&ins.immediates)
                    .map_or(AbstractValue::Unknown, AbstractValue::ByteConst);
                self.push(v, &mut pushed);
            }
            "addr" => {
                let v = imm0.map_or(AbstractValue::Unknown, |a| {
                    AbstractValue::AddrConst(a.to_string())
                });
                self.push(v, &mut pushed);
            }
            op @ ("intc" | "intc_0" | "intc_1" | "intc_2" | "intc_3") => {
                let i = op
                    .strip_prefix("intc_")
                    .or(imm0)
                    .and_then(|s| s.parse::<usize>().ok());
                let v = i
                    .and_then(|i| self.program.int_constants.get(i).copied().flatten())
                    .map_or(AbstractValue::Unknown, AbstractValue::IntConst);
                self.push(v, &mut pushed);
            }
            op @ ("bytec" | "bytec_0" | "bytec_1" | "bytec_2" | "bytec_3") => {
                let i = op
                    .strip_prefix("bytec_")
                    .or(imm0)
                    .and_then(|s| s.parse::<usize>().ok());
                let v = i
                    .and_then(|i| self.program.byte_constants.get(i).cloned().flatten())
                    .map_or(AbstractValue::Unknown, AbstractValue::ByteConst);
                self.push(v, &mut pushed);
            }
            "txn" => {
                let v = if imm0 == Some("Sender") {
                    AbstractValue::Sender
                } else {
                    AbstractValue::Unknown
                };
                self.push(v, &mut pushed);
            }
            "gtxn" => {
                let sender = self.config.gtxn_sender
                    && ins.immediates.get(1).map(String::as_str) == Some("Sender");
                let v = if sender {
                    AbstractValue::Sender
                } else {
                    AbstractValue::Unknown
                };
                self.push(v, &mut pushed);
            }
            "gtxns" => {
                self.pop(ins);
                let v = if self.config.gtxn_sender && imm0 == Some("Sender") {
                    AbstractValue::Sender
                } else {
                    AbstractValue::Unknown
                };
                self.push(v, &mut pushed);
            }
            "global" => {
                let v = imm0.map_or(AbstractValue::Unknown, |g| {
                    AbstractValue::GlobalField(g.to_string())
                });
                self.push(v, &mut pushed);
            }
            "app_global_get" => {
                let key = self.pop(ins);
                let v = match key {
                    AbstractValue::ByteConst(k) => AbstractValue::GlobalGet(k),
                    _ => AbstractValue::Unknown,
                };
                self.push(v, &mut pushed);
            }
            op @ ("==" | "!=") => {
                let b = self.pop(ins);
                let a = self.pop(ins);
                let polarity = if op == "==" {
                    Polarity::Eq
                } else {
                    Polarity::Neq
                };
                let v = self.compare(a, b, polarity);
                self.push(v, &mut pushed);
            }
            op @ ("&&" | "||") => {
                let b = self.pop(ins);
                let a = self.pop(ins);
                let v = match (a, b) {
                    (
                        AbstractValue::SenderCmp {
                            privileged_source,
                            polarity,
                            weakened,
                        },
                        _,
                    )
                    | (
                        _,
                        AbstractValue::SenderCmp {
                            privileged_source,
                            polarity,
                            weakened,
                        },
                    ) => AbstractValue::SenderCmp {
                        privileged_source,
                        polarity,
                        weakened: weakened || op == "||",
                    },
                    _ => AbstractValue::Unknown,
                };
                self.push(v, &mut pushed);
            }
            "!" => {
                let v = match self.pop(ins) {
                    AbstractValue::SenderCmp {
                        privileged_source,
                        polarity,
                        weakened,
                    } => AbstractValue::SenderCmp {
                        privileged_source,
                        polarity: polarity.flip(),
                        weakened,
                    },
                    AbstractValue::IntConst(x) => AbstractValue::IntConst((x == 0) as u64),
                    _ => AbstractValue::Unknown,
                };
                self.push(v, &mut pushed);
            }
            "assert" => {
                if let AbstractValue::SenderCmp {
                    polarity: Polarity::Eq,
                    weakened,
                    ..
                } = self.pop(ins)
                {
                    fact.guard_point = true;
                    fact.weakened = weakened;
                }
            }
            op @ ("app_local_put" | "app_global_put") => {
                self.pop(ins);
                let key = self.pop(ins);
                if op == "app_local_put" {
                    self.pop(ins);
                }
                match key {
                    AbstractValue::ByteConst(k) => {
                        if self.config.is_balance_key(&k) {
                            fact.fund_key = Some(k);
                        }
                    }
                    _ => self.diagnostics.push(Diagnostic::note(
                        ins.location(),
                        format!("`{op}` with a key that is not a known constant; not checked for balance writes"),
                    )),
                }
            }
            "dup" => {
                let a = self.pop(ins);
                self.push(a.clone(), &mut pushed);
                self.push(a, &mut pushed);
            }
            "dup2" => {
                let v = self.pop_n(ins, 2);
                for x in v.iter().chain(v.iter()) {
                    self.push(x.clone(), &mut pushed);
                }
            }
            "swap" => {
                let v = self.pop_n(ins, 2);
                self.push(v[1].clone(), &mut pushed);
                self.push(v[0].clone(), &mut pushed);
            }
            "dig" | "cover" | "uncover" | "bury" | "dupn" => self.permute(ins, &mut pushed),
            _ => match ins.stack_effect {
                StackEffect::Known { pops, pushes } => {
                    self.pop_n(ins, pops);
                    for _ in 0..pushes {
                        self.push(AbstractValue::Unknown, &mut pushed);
                    }
                }
                StackEffect::Unknown => {
                    self.unknown_depth = true;
                    self.stack.clear();
                }
            },
        }
        fact.pushed = pushed;
        fact
    }

    /// Stack shuffles that take a depth immediate.
    fn permute(&mut self, ins: &Instruction, pushed: &mut Vec<AbstractValue>) {
        let Some(n) = ins.immediates.first().and_then(|s| s.parse::<usize>().ok()) else {
            self.unknown_depth = true;
            self.stack.clear();
            return;
        };
        match ins.opcode.as_str() {
            "dig" => {
                let v = self.pop_n(ins, n + 1);
                let copy = v[0].clone();
                for x in v {
                    self.push(x, pushed);
                }
                self.push(copy, pushed);
            }
            "cover" => {
                // top moves below the next n values
                let mut v = self.pop_n(ins, n + 1);
                let top = v.pop().unwrap_or(AbstractValue::Unknown);
                v.insert(0, top);
                for x in v {
                    self.push(x, pushed);
                }
            }
            "uncover" => {
                let mut v = self.pop_n(ins, n + 1);
                let deep = v.remove(0);
                v.push(deep);
                for x in v {
                    self.push(x, pushed);
                }
            }
            "bury" => {
                // top replaces the value n deep, then is popped
                let mut v = self.pop_n(ins, n + 1);
                let top = v.pop().unwrap_or(AbstractValue::Unknown);
                if !v.is_empty() {
                    v[0] = top;
                }
                for x in v {
                    self.push(x, pushed);
                }
            }
            _ => {
                let a = self.pop(ins);
                for _ in 0..=n {
                    self.push(a.clone(), pushed);
                }
            }
        }
    }
}

/// Run the abstract machine over one block. The entry block starts with an
/// empty stack; other blocks start with unknown contents of unknown height.
pub fn abstract_exec_block(
    cfg: &Cfg,
    block: usize,
    program: &TealProgram,
    config: &AnalyzerConfig,
) -> BlockFacts {
    let mut m = Machine {
        stack: Vec::new(),
        open_bottom: cfg.entry != Some(block),
        unknown_depth: false,
        config,
        program,
        diagnostics: Vec::new(),
    };
    let range = cfg.blocks[block].range();
    let last = range.end - 1;
    let mut instrs = Vec::with_capacity(range.len());
    let mut terminal_value = None;
    for i in range {
        let ins = &program.instructions[i];
        if i == last && matches!(ins.opcode.as_str(), "bz" | "bnz" | "return") {
            let v = m.pop(ins);
            terminal_value = Some(v);
            instrs.push(InstrFact {
                index: i,
                pushed: Vec::new(),
                guard_point: false,
                fund_key: None,
                weakened: false,
            });
            continue;
        }
        instrs.push(m.step(i, ins));
    }
    BlockFacts {
        block,
        instrs,
        exit_stack: m.stack,
        unknown_depth: m.unknown_depth,
        terminal_value,
        diagnostics: m.diagnostics,
    }
}

/// Facts for every block of `cfg`, in block order.
pub fn abstract_exec_program(
    cfg: &Cfg,
    program: &TealProgram,
    config: &AnalyzerConfig,
) -> Vec<BlockFacts> {
    (0..cfg.blocks.len())
        .map(|b| abstract_exec_block(cfg, b, program, config))
        .collect()
}
