//! Solidity front end and detectors.
//!
//! The parser recognizes contract-level declarations plus the statement and
//! expression forms that sender checks and balance writes are built from.
//! Everything else is kept as opaque text.

pub mod ast;
pub mod detectors;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod symbols;

pub use ast::{
    CallOption, ContractDecl, ContractKind, Expr, FunctionDecl, FunctionKind, ModifierDecl,
    SourceUnit, StateVar, Stmt, StmtKind, TypeDesc,
};
pub use detectors::{
    find_fund_modifications, find_sender_guards, inherited_contracts, pair_detections, FundModKind,
    FundModSite, GuardForm, GuardScope, GuardSite, GuardingIf, ModifierTable, RawDetection,
};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse_bytes, parse_source, parse_str};
pub use symbols::{collect_state_vars, collect_state_vars_with_bases, SymbolTable};
