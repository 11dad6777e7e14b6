//! Tolerant recursive-descent parser for a Solidity subset.
//!
//! Never fails: constructs outside the subset are consumed by
//! bracket/semicolon-matched recovery and kept as [`StmtKind::Opaque`].

use super::ast::*;
use super::lexer::{is_elementary_type, tokenize, Token, TokenKind};
use crate::diagnostic::{decode_source, Diagnostic, Location};

const MAX_DEPTH: u32 = 128;

const SPECIFIER_KEYWORDS: &[&str] = &[
    "public",
    "external",
    "internal",
    "private",
    "view",
    "pure",
    "payable",
    "virtual",
    "constant",
    "nonpayable",
];

const STATE_VAR_QUALIFIERS: &[&str] = &[
    "public",
    "private",
    "internal",
    "constant",
    "immutable",
    "transient",
];

const DATA_LOCATIONS: &[&str] = &["memory", "storage", "calldata"];

const NUMBER_UNITS: &[&str] = &[
    "wei", "gwei", "szabo", "finney", "ether", "seconds", "minutes", "hours", "days", "weeks",
    "years",
];

const OPAQUE_BINARY_OPS: &[&str] = &[
    "<", ">", "<=", ">=", "+", "-", "*", "/", "%", "**", "<<", ">>", ">>>", "&", "|", "^",
];

const COMPOUND_ASSIGN_OPS: &[&str] = &[
    "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>=", "**=",
];

/// Tokenize and parse `source`.
pub fn parse_str(source: &str, path: &str) -> SourceUnit {
    parse_source(&tokenize(source), path)
}

/// Parse raw bytes, replacing invalid UTF-8 with a diagnostic.
pub fn parse_bytes(bytes: &[u8], path: &str) -> SourceUnit {
    let (text, diag) = decode_source(bytes);
    let mut unit = parse_str(&text, path);
    if let Some(d) = diag {
        unit.diagnostics.insert(0, d);
    }
    unit
}

/// Build a [`SourceUnit`] from tokens produced by [`tokenize`].
pub fn parse_source(tokens: &[Token], path: &str) -> SourceUnit {
    let toks: Vec<&Token> = tokens
        .iter()
        .filter(|t| t.kind != TokenKind::Comment)
        .collect();
    let eof = toks
        .last()
        .map(|t| t.location())
        .unwrap_or(Location::new(1, 1));
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
        eof,
        diags: Vec::new(),
    };
    let contracts = p.source_unit();
    SourceUnit {
        path: path.to_string(),
        contracts,
        diagnostics: p.diags,
    }
}

struct Parser<'t> {
    toks: Vec<&'t Token>,
    pos: usize,
    depth: u32,
    eof: Location,
    diags: Vec<Diagnostic>,
}

impl<'t> Parser<'t> {
    // ---- token helpers ----

    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<&'t Token> {
        self.toks.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let t = self.peek()?;
        self.pos += 1;
        Some(t)
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn at_word(&self, w: &str) -> bool {
        self.peek().is_some_and(|t| t.is_word(w))
    }

    fn at_ident(&self) -> bool {
        self.peek().is_some_and(|t| t.kind == TokenKind::Identifier)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn loc(&self) -> Location {
        self.peek().map(|t| t.location()).unwrap_or(self.eof)
    }

    fn note(&mut self, loc: Location, msg: impl Into<String>) {
        self.diags.push(Diagnostic::note(loc, msg));
    }

    fn warn(&mut self, loc: Location, msg: impl Into<String>) {
        self.diags.push(Diagnostic::warning(loc, msg));
    }

    /// Source text of tokens `[start, end)`, with single spaces where the
    /// original had whitespace or comments between tokens.
    fn text(&self, start: usize, end: usize) -> String {
        let mut out = String::new();
        let end = end.min(self.toks.len());
        for i in start..end {
            if i > start && self.toks[i - 1].span.end != self.toks[i].span.start {
                out.push(' ');
            }
            out.push_str(&self.toks[i].text);
        }
        out
    }

    fn is_open(t: &Token) -> bool {
        t.kind == TokenKind::Punctuation && matches!(t.text.as_str(), "(" | "[" | "{")
    }

    fn is_close(t: &Token) -> bool {
        t.kind == TokenKind::Punctuation && matches!(t.text.as_str(), ")" | "]" | "}")
    }

    /// Consume a bracketed group starting at the current opening token.
    fn skip_balanced(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.bump() {
            if Self::is_open(t) {
                depth += 1;
            } else if Self::is_close(t) {
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    return;
                }
            }
        }
    }

    /// Skip one statement or declaration: through a `;` at nesting depth 0,
    /// or through a `}` that closes a group opened at depth 0 (continuing
    /// across `else`/`catch`/`while`). Stops before an unmatched `}`.
    /// Consumes at least one token unless at EOF or at an unmatched `}`.
    fn skip_statement(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            if depth == 0 && t.is_punct("}") {
                return;
            }
            self.pos += 1;
            if Self::is_open(t) {
                depth += 1;
            } else if Self::is_close(t) {
                depth = depth.saturating_sub(1);
                if depth == 0 && t.is_punct("}") {
                    let continues = self.peek().is_some_and(|n| {
                        n.is_word("else") || n.is_word("catch") || n.is_word("while")
                    });
                    if !continues {
                        return;
                    }
                }
            } else if depth == 0 && t.is_punct(";") {
                return;
            }
        }
    }

    // ---- declarations ----

    fn source_unit(&mut self) -> Vec<ContractDecl> {
        let mut contracts = Vec::new();
        while let Some(t) = self.peek() {
            if t.is_word("contract") || t.is_word("library") || t.is_word("interface") {
                if let Some(c) = self.contract(false) {
                    contracts.push(c);
                }
            } else if t.is_word("abstract") {
                self.bump();
                if self.at_word("contract") {
                    if let Some(c) = self.contract(true) {
                        contracts.push(c);
                    }
                } else {
                    self.note(t.location(), "expected `contract` after `abstract`");
                }
            } else if [
                "pragma", "import", "using", "struct", "enum", "error", "event", "type",
            ]
            .iter()
            .any(|w| t.is_word(w))
            {
                self.skip_statement();
            } else if t.is_word("function") {
                self.skip_statement();
                self.note(t.location(), "free function outside a contract ignored");
            } else {
                let start = self.pos;
                self.skip_statement();
                if self.pos == start {
                    // stray `}` at top level
                    self.bump();
                }
                self.note(t.location(), "unexpected tokens at file level skipped");
            }
        }
        contracts
    }

    fn contract(&mut self, is_abstract: bool) -> Option<ContractDecl> {
        let kw = self.bump()?;
        let kind = match kw.text.as_str() {
            "library" => ContractKind::Library,
            "interface" => ContractKind::Interface,
            _ => ContractKind::Contract,
        };
        let _ = is_abstract;
        let Some(name_tok) = self.peek().filter(|t| t.kind == TokenKind::Identifier) else {
            self.warn(
                kw.location(),
                format!("expected a name after `{}`", kw.text),
            );
            self.skip_statement();
            return None;
        };
        self.bump();
        let mut bases = Vec::new();
        if self.at_word("is") {
            self.bump();
            while let Some(t) = self.peek() {
                if t.is_punct("{") {
                    break;
                }
                if t.kind == TokenKind::Identifier {
                    let mut name = t.text.clone();
                    self.bump();
                    while self.at_punct(".")
                        && self
                            .peek_at(1)
                            .is_some_and(|n| n.kind == TokenKind::Identifier)
                    {
                        self.bump();
                        name = self.bump().map(|n| n.text.clone()).unwrap_or(name);
                    }
                    bases.push(name);
                    if self.at_punct("(") {
                        self.skip_balanced();
                    }
                } else if t.is_punct(",") {
                    self.bump();
                } else {
                    self.note(t.location(), "unexpected token in inheritance list");
                    if Self::is_open(t) {
                        self.skip_balanced();
                    } else {
                        self.bump();
                    }
                }
            }
        }
        let mut contract = ContractDecl {
            name: name_tok.text.clone(),
            kind,
            bases,
            state_vars: Vec::new(),
            modifiers: Vec::new(),
            functions: Vec::new(),
            opaque_items: Vec::new(),
            location: kw.location(),
        };
        if !self.eat_punct("{") {
            self.warn(
                self.loc(),
                format!("expected `{{` to open contract `{}`", contract.name),
            );
            return Some(contract);
        }
        loop {
            let Some(t) = self.peek() else {
                self.warn(
                    self.eof,
                    format!("unterminated contract `{}`", contract.name),
                );
                break;
            };
            if t.is_punct("}") {
                self.bump();
                break;
            }
            self.contract_member(&mut contract);
        }
        Some(contract)
    }

    fn contract_member(&mut self, contract: &mut ContractDecl) {
        let Some(t) = self.peek() else { return };
        let next_is_paren = self.peek_at(1).is_some_and(|n| n.is_punct("("));
        if t.is_word("function")
            || t.is_word("constructor")
            || ((t.is_word("fallback") || t.is_word("receive")) && next_is_paren)
        {
            if let Some(f) = self.function() {
                contract.functions.push(f);
            }
        } else if t.is_word("modifier") {
            if let Some(m) = self.modifier() {
                contract.modifiers.push(m);
            }
        } else if ["event", "error", "struct", "enum", "using", "type"]
            .iter()
            .any(|w| t.is_word(w))
        {
            self.skip_statement();
        } else {
            let start = self.pos;
            if let Some(var) = self.state_var() {
                contract.state_vars.push(var);
                return;
            }
            self.pos = start;
            self.skip_statement();
            if self.pos == start {
                self.bump();
            }
            let text = self.text(start, self.pos);
            self.note(
                t.location(),
                "unsupported contract member kept as opaque text",
            );
            contract.opaque_items.push(text);
        }
    }

    fn function(&mut self) -> Option<FunctionDecl> {
        let kw = self.bump()?;
        let location = kw.location();
        let (kind, name) = match kw.text.as_str() {
            "constructor" => (FunctionKind::Constructor, String::new()),
            "fallback" => (FunctionKind::Fallback, String::new()),
            "receive" => (FunctionKind::Receive, String::new()),
            _ => match self.peek() {
                Some(t) if t.is_word("fallback") || t.is_word("receive") => {
                    self.bump();
                    let kind = if t.text == "receive" {
                        FunctionKind::Receive
                    } else {
                        FunctionKind::Fallback
                    };
                    (kind, String::new())
                }
                Some(t) if t.kind == TokenKind::Identifier => {
                    self.bump();
                    (FunctionKind::Function, t.text.clone())
                }
                // legacy unnamed fallback: `function () payable { ... }`
                Some(t) if t.is_punct("(") => (FunctionKind::Fallback, String::new()),
                _ => {
                    self.warn(location, "expected a function name");
                    self.skip_statement();
                    return None;
                }
            },
        };
        if self.at_punct("(") {
            self.skip_balanced();
        } else {
            self.warn(self.loc(), "expected a parameter list");
        }
        let modifier_invocations = self.specifiers();
        let body = self.decl_body();
        Some(FunctionDecl {
            name,
            kind,
            modifier_invocations,
            body,
            location,
        })
    }

    fn modifier(&mut self) -> Option<ModifierDecl> {
        let kw = self.bump()?;
        let Some(name) = self.peek().filter(|t| t.kind == TokenKind::Identifier) else {
            self.warn(kw.location(), "expected a modifier name");
            self.skip_statement();
            return None;
        };
        self.bump();
        if self.at_punct("(") {
            self.skip_balanced();
        }
        let _ = self.specifiers();
        let body = self.decl_body();
        Some(ModifierDecl {
            name: name.text.clone(),
            body,
            location: kw.location(),
        })
    }

    /// Specifier list between a parameter list and the body. Returns the
    /// identifiers that name modifiers (or base constructors).
    fn specifiers(&mut self) -> Vec<String> {
        let mut invocations = Vec::new();
        while let Some(t) = self.peek() {
            if t.is_punct("{") || t.is_punct(";") || t.is_punct("}") {
                break;
            }
            if t.is_word("returns") || t.is_word("override") {
                self.bump();
                if self.at_punct("(") {
                    self.skip_balanced();
                }
            } else if SPECIFIER_KEYWORDS.iter().any(|k| t.is_word(k)) {
                self.bump();
            } else if t.kind == TokenKind::Identifier {
                self.bump();
                let mut name = t.text.clone();
                while self.at_punct(".")
                    && self
                        .peek_at(1)
                        .is_some_and(|n| n.kind == TokenKind::Identifier)
                {
                    self.bump();
                    if let Some(n) = self.bump() {
                        name = n.text.clone();
                    }
                }
                invocations.push(name);
                if self.at_punct("(") {
                    self.skip_balanced();
                }
            } else {
                self.note(
                    t.location(),
                    format!("unexpected `{}` in declaration header", t.text),
                );
                if Self::is_open(t) {
                    self.skip_balanced();
                } else {
                    self.bump();
                }
            }
        }
        invocations
    }

    /// `{ ... }` body or `;` for bodiless declarations.
    fn decl_body(&mut self) -> Vec<Stmt> {
        if self.eat_punct(";") {
            return Vec::new();
        }
        if self.at_punct("{") {
            return self.block();
        }
        self.warn(self.loc(), "expected a body");
        Vec::new()
    }

    fn state_var(&mut self) -> Option<StateVar> {
        let location = self.loc();
        let type_desc = self.type_name()?;
        loop {
            if self.at_word("override") {
                self.bump();
                if self.at_punct("(") {
                    self.skip_balanced();
                }
            } else if STATE_VAR_QUALIFIERS.iter().any(|q| self.at_word(q)) {
                self.bump();
            } else {
                break;
            }
        }
        if !self.at_ident() {
            return None;
        }
        let name = self.bump()?.text.clone();
        if self.at_punct("=") {
            self.skip_statement();
        } else if !self.eat_punct(";") {
            return None;
        }
        Some(StateVar {
            name,
            type_desc,
            location,
        })
    }

    fn type_name(&mut self) -> Option<TypeDesc> {
        let start = self.pos;
        let t = self.peek()?;
        let base = if t.is_word("mapping") && self.peek_at(1).is_some_and(|n| n.is_punct("(")) {
            self.bump();
            self.bump();
            let key = self.type_name()?;
            if self.at_ident() {
                self.bump();
            }
            if !self.eat_punct("=>") {
                return None;
            }
            let value = self.type_name()?;
            if self.at_ident() {
                self.bump();
            }
            if !self.eat_punct(")") {
                return None;
            }
            TypeDesc::Mapping {
                key: key.to_string(),
                value: Box::new(value),
            }
        } else if t.kind == TokenKind::Keyword && is_elementary_type(&t.text) {
            self.bump();
            if t.text == "address" && self.at_word("payable") {
                self.bump();
                TypeDesc::Elementary("address payable".into())
            } else {
                TypeDesc::Elementary(t.text.clone())
            }
        } else if t.kind == TokenKind::Identifier {
            self.bump();
            while self.at_punct(".")
                && self
                    .peek_at(1)
                    .is_some_and(|n| n.kind == TokenKind::Identifier)
            {
                self.bump();
                self.bump();
            }
            TypeDesc::Other(self.text(start, self.pos))
        } else {
            return None;
        };
        if self.at_punct("[") {
            while self.at_punct("[") {
                self.skip_balanced();
            }
            return Some(TypeDesc::Other(self.text(start, self.pos)));
        }
        Some(base)
    }

    /// Lookahead: does a `Type [location] name` declaration start here?
    fn at_declaration(&mut self) -> bool {
        let start = self.pos;
        let is_decl = (|| {
            let t = self.peek()?;
            if t.kind == TokenKind::Keyword && !is_elementary_type(&t.text) && !t.is_word("mapping")
            {
                return None;
            }
            self.type_name()?;
            while DATA_LOCATIONS.iter().any(|l| self.at_word(l)) {
                self.bump();
            }
            self.at_ident().then_some(())
        })()
        .is_some();
        self.pos = start;
        is_decl
    }

    // ---- statements ----

    fn block(&mut self) -> Vec<Stmt> {
        let mut out = Vec::new();
        let open = self.loc();
        if !self.eat_punct("{") {
            return out;
        }
        loop {
            match self.peek() {
                None => {
                    self.warn(open, "unterminated block");
                    break;
                }
                Some(t) if t.is_punct("}") => {
                    self.bump();
                    break;
                }
                Some(_) => self.statement(&mut out),
            }
        }
        out
    }

    /// Body of `if`/loops: a block, or a single statement.
    fn body(&mut self) -> Vec<Stmt> {
        let mut out = Vec::new();
        if self.at_punct("{") {
            self.depth += 1;
            out = self.block();
            self.depth -= 1;
        } else if self.peek().is_some_and(|t| !t.is_punct("}")) {
            self.statement(&mut out);
        }
        out
    }

    fn opaque_from(&mut self, start: usize, out: &mut Vec<Stmt>) {
        self.pos = start;
        let location = self.loc();
        self.skip_statement();
        if self.pos == start {
            if self.peek().is_none() {
                return;
            }
            // unmatched `}` is handled by the caller; anything else must advance
            self.bump();
        }
        let text = self.text(start, self.pos);
        self.note(location, "unsupported statement kept as opaque text");
        out.push(Stmt {
            kind: StmtKind::Opaque(text),
            location,
        });
    }

    /// Parse one statement, appending zero or more [`Stmt`]s. Nested blocks
    /// and loop bodies are flattened into `out`.
    fn statement(&mut self, out: &mut Vec<Stmt>) {
        let start = self.pos;
        let Some(t) = self.peek() else { return };
        let location = t.location();
        if self.depth >= MAX_DEPTH {
            self.warn(location, "nesting too deep; statement kept as opaque text");
            self.opaque_from(start, out);
            return;
        }
        self.depth += 1;
        let ok = self.statement_inner(t, location, out);
        self.depth -= 1;
        if !ok {
            self.opaque_from(start, out);
        }
    }

    fn statement_inner(&mut self, t: &'t Token, location: Location, out: &mut Vec<Stmt>) -> bool {
        let next = self.peek_at(1);
        let next_is = |p: &str| next.is_some_and(|n| n.is_punct(p));
        let push = |out: &mut Vec<Stmt>, kind| out.push(Stmt { kind, location });

        if t.is_punct(";") {
            self.bump();
            return true;
        }
        if t.is_punct("{") {
            out.extend(self.block());
            return true;
        }
        if t.is_word("unchecked") && next_is("{") {
            self.bump();
            out.extend(self.block());
            return true;
        }
        if t.is_word("if") {
            return self.if_statement(location, out);
        }
        if (t.is_word("for") || t.is_word("while")) && next_is("(") {
            self.bump();
            self.skip_balanced();
            out.extend(self.body());
            return true;
        }
        if t.is_word("do") {
            self.bump();
            let body = self.body();
            if !self.at_word("while") {
                return false;
            }
            self.bump();
            if self.at_punct("(") {
                self.skip_balanced();
            }
            self.eat_punct(";");
            out.extend(body);
            return true;
        }
        if t.text == "_" && t.kind == TokenKind::Identifier && next_is(";") {
            self.bump();
            self.bump();
            push(out, StmtKind::Placeholder);
            return true;
        }
        if t.is_word("require") && next_is("(") {
            self.bump();
            let Some(mut args) = self.call_args() else {
                return false;
            };
            if args.is_empty() || !self.eat_punct(";") {
                return false;
            }
            push(out, StmtKind::Require(args.swap_remove(0)));
            return true;
        }
        if t.is_word("revert") || t.is_word("throw") {
            self.skip_statement();
            push(out, StmtKind::Revert);
            return true;
        }
        if t.is_word("return") {
            self.bump();
            if self.eat_punct(";") {
                push(out, StmtKind::Return(None));
                return true;
            }
            let Some(e) = self.expr() else { return false };
            if !self.eat_punct(";") {
                return false;
            }
            push(out, StmtKind::Return(Some(e)));
            return true;
        }
        if t.is_word("emit") {
            self.bump();
            let Some(e) = self.expr() else { return false };
            if !self.eat_punct(";") {
                return false;
            }
            push(out, StmtKind::Call(e));
            return true;
        }
        if t.is_word("delete") {
            self.bump();
            let Some(e) = self.expr() else { return false };
            if !self.eat_punct(";") {
                return false;
            }
            push(
                out,
                StmtKind::Assign {
                    lvalue: e,
                    rvalue: Expr::Literal("0".into()),
                    compound: false,
                },
            );
            return true;
        }
        if t.is_punct("++") || t.is_punct("--") {
            self.bump();
            let Some(e) = self.postfix() else {
                return false;
            };
            if !self.eat_punct(";") {
                return false;
            }
            push(
                out,
                StmtKind::Assign {
                    lvalue: e,
                    rvalue: Expr::Literal("1".into()),
                    compound: true,
                },
            );
            return true;
        }
        if self.at_declaration() {
            return self.declaration(location, out);
        }
        if t.kind == TokenKind::Keyword
            && !is_elementary_type(&t.text)
            && !["payable", "type", "new", "true", "false"]
                .iter()
                .any(|w| t.is_word(w))
        {
            // assembly, try, break, continue, ...
            return false;
        }
        self.expression_statement(location, out)
    }

    fn if_statement(&mut self, location: Location, out: &mut Vec<Stmt>) -> bool {
        self.bump();
        if !self.eat_punct("(") {
            return false;
        }
        let Some(condition) = self.expr() else {
            return false;
        };
        if !self.eat_punct(")") {
            return false;
        }
        let then_body = self.body();
        let else_body = if self.at_word("else") {
            self.bump();
            self.body()
        } else {
            Vec::new()
        };
        out.push(Stmt {
            kind: StmtKind::If {
                condition,
                then_body,
                else_body,
            },
            location,
        });
        true
    }

    fn declaration(&mut self, location: Location, out: &mut Vec<Stmt>) -> bool {
        let start = self.pos;
        if self.type_name().is_none() {
            return false;
        }
        while DATA_LOCATIONS.iter().any(|l| self.at_word(l)) {
            self.bump();
        }
        let Some(name) = self.bump() else {
            return false;
        };
        if self.eat_punct("=") {
            let Some(rvalue) = self.expr() else {
                return false;
            };
            if !self.eat_punct(";") {
                return false;
            }
            out.push(Stmt {
                kind: StmtKind::Assign {
                    lvalue: Expr::Identifier(name.text.clone()),
                    rvalue,
                    compound: false,
                },
                location,
            });
            return true;
        }
        if !self.eat_punct(";") {
            return false;
        }
        let text = self.text(start, self.pos);
        self.note(
            location,
            "declaration without initializer kept as opaque text",
        );
        out.push(Stmt {
            kind: StmtKind::Opaque(text),
            location,
        });
        true
    }

    fn expression_statement(&mut self, location: Location, out: &mut Vec<Stmt>) -> bool {
        let Some(lhs) = self.expr() else { return false };
        let kind = if self.eat_punct("=") {
            let Some(rvalue) = self.expr() else {
                return false;
            };
            StmtKind::Assign {
                lvalue: lhs,
                rvalue,
                compound: false,
            }
        } else if COMPOUND_ASSIGN_OPS.iter().any(|op| self.at_punct(op)) {
            self.bump();
            let Some(rvalue) = self.expr() else {
                return false;
            };
            StmtKind::Assign {
                lvalue: lhs,
                rvalue,
                compound: true,
            }
        } else if self.at_punct("++") || self.at_punct("--") {
            self.bump();
            StmtKind::Assign {
                lvalue: lhs,
                rvalue: Expr::Literal("1".into()),
                compound: true,
            }
        } else if matches!(lhs, Expr::CallExpr { .. }) {
            StmtKind::Call(lhs)
        } else {
            return false;
        };
        if !self.eat_punct(";") {
            return false;
        }
        out.push(Stmt { kind, location });
        true
    }

    // ---- expressions ----

    fn expr(&mut self) -> Option<Expr> {
        if self.depth >= MAX_DEPTH {
            return None;
        }
        self.depth += 1;
        let r = self.ternary();
        self.depth -= 1;
        r
    }

    fn ternary(&mut self) -> Option<Expr> {
        let start = self.pos;
        let cond = self.or()?;
        if !self.at_punct("?") {
            return Some(cond);
        }
        self.bump();
        self.expr()?;
        if !self.eat_punct(":") {
            return None;
        }
        self.expr()?;
        Some(Expr::Opaque(self.text(start, self.pos)))
    }

    fn or(&mut self) -> Option<Expr> {
        let mut lhs = self.and()?;
        while self.eat_punct("||") {
            let rhs = self.and()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Some(lhs)
    }

    fn and(&mut self) -> Option<Expr> {
        let mut lhs = self.equality()?;
        while self.eat_punct("&&") {
            let rhs = self.equality()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Some(lhs)
    }

    fn equality(&mut self) -> Option<Expr> {
        let mut lhs = self.binary()?;
        loop {
            if self.eat_punct("==") {
                let rhs = self.binary()?;
                lhs = Expr::Eq(Box::new(lhs), Box::new(rhs));
            } else if self.eat_punct("!=") {
                let rhs = self.binary()?;
                lhs = Expr::Neq(Box::new(lhs), Box::new(rhs));
            } else {
                return Some(lhs);
            }
        }
    }

    /// Arithmetic, bitwise and relational operators collapse into opaque text.
    fn binary(&mut self) -> Option<Expr> {
        let start = self.pos;
        let first = self.unary()?;
        let mut any = false;
        while OPAQUE_BINARY_OPS.iter().any(|op| self.at_punct(op)) {
            self.bump();
            self.unary()?;
            any = true;
        }
        Some(if any {
            Expr::Opaque(self.text(start, self.pos))
        } else {
            first
        })
    }

    fn unary(&mut self) -> Option<Expr> {
        let start = self.pos;
        let t = self.peek()?;
        let prefix = ["!", "-", "~", "++", "--", "+"]
            .iter()
            .any(|p| t.is_punct(p))
            || t.is_word("delete");
        if prefix {
            if self.depth >= MAX_DEPTH {
                return None;
            }
            self.bump();
            self.depth += 1;
            let inner = self.unary();
            self.depth -= 1;
            inner?;
            let mut e = Expr::Opaque(self.text(start, self.pos));
            // `x++` after a prefix form stays opaque
            while self.at_punct("++") || self.at_punct("--") {
                self.bump();
                e = Expr::Opaque(self.text(start, self.pos));
            }
            return Some(e);
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Option<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.at_punct(".") {
                let field = self
                    .peek_at(1)
                    .filter(|n| matches!(n.kind, TokenKind::Identifier | TokenKind::Keyword))?;
                self.bump();
                self.bump();
                e = Expr::Member(Box::new(e), field.text.clone());
            } else if self.at_punct("[") {
                let start = self.pos;
                self.bump();
                let save = self.pos;
                let index = self.expr().filter(|_| self.at_punct("]"));
                match index {
                    Some(i) => {
                        self.bump();
                        e = Expr::Index(Box::new(e), Box::new(i));
                    }
                    None => {
                        self.pos = save - 1;
                        self.skip_balanced();
                        let inner = self.text(start + 1, self.pos.saturating_sub(1));
                        e = Expr::Index(Box::new(e), Box::new(Expr::Opaque(inner)));
                    }
                }
            } else if self.at_punct("{")
                && self
                    .peek_at(1)
                    .is_some_and(|n| matches!(n.kind, TokenKind::Identifier | TokenKind::Keyword))
                && self.peek_at(2).is_some_and(|n| n.is_punct(":"))
            {
                let options = self.call_options()?;
                if !self.at_punct("(") {
                    return None;
                }
                let args = self.call_args()?;
                e = Expr::CallExpr {
                    callee: Box::new(e),
                    options,
                    args,
                };
            } else if self.at_punct("(") {
                let args = self.call_args()?;
                e = match e {
                    Expr::Identifier(ref n) if n == "address" && args.len() == 1 => {
                        Expr::AddressCast(Box::new(args.into_iter().next()?))
                    }
                    callee => Expr::CallExpr {
                        callee: Box::new(callee),
                        options: Vec::new(),
                        args,
                    },
                };
            } else {
                return Some(e);
            }
        }
    }

    fn call_options(&mut self) -> Option<Vec<CallOption>> {
        self.bump();
        let mut options = Vec::new();
        loop {
            let name = self.bump()?;
            if !matches!(name.kind, TokenKind::Identifier | TokenKind::Keyword) {
                return None;
            }
            if !self.eat_punct(":") {
                return None;
            }
            let value = self.expr()?;
            options.push(CallOption {
                name: name.text.clone(),
                value,
            });
            if self.eat_punct("}") {
                return Some(options);
            }
            if !self.eat_punct(",") {
                return None;
            }
        }
    }

    /// `( args )`. Unparseable argument lists become a single opaque argument.
    fn call_args(&mut self) -> Option<Vec<Expr>> {
        let open = self.pos;
        if !self.eat_punct("(") {
            return None;
        }
        let mut args = Vec::new();
        let parsed = (|| {
            if self.eat_punct(")") {
                return Some(());
            }
            loop {
                args.push(self.expr()?);
                if self.eat_punct(")") {
                    return Some(());
                }
                if !self.eat_punct(",") {
                    return None;
                }
            }
        })();
        if parsed.is_none() {
            self.pos = open;
            self.skip_balanced();
            let inner = self.text(open + 1, self.pos.saturating_sub(1));
            args = vec![Expr::Opaque(inner)];
        }
        Some(args)
    }

    fn primary(&mut self) -> Option<Expr> {
        let start = self.pos;
        let t = self.peek()?;
        match t.kind {
            TokenKind::Identifier => {
                if t.text == "msg"
                    && self.peek_at(1).is_some_and(|n| n.is_punct("."))
                    && self.peek_at(2).is_some_and(|n| n.is_word("sender"))
                {
                    self.pos += 3;
                    return Some(Expr::MsgSender);
                }
                if (t.text == "hex" || t.text == "unicode")
                    && self
                        .peek_at(1)
                        .is_some_and(|n| n.kind == TokenKind::StringLiteral)
                {
                    self.pos += 2;
                    return Some(Expr::Literal(self.text(start, self.pos)));
                }
                self.bump();
                Some(Expr::Identifier(t.text.clone()))
            }
            TokenKind::NumberLiteral => {
                self.bump();
                if self.peek().is_some_and(|n| {
                    n.kind == TokenKind::Identifier && NUMBER_UNITS.contains(&n.text.as_str())
                }) {
                    self.bump();
                }
                Some(Expr::Literal(self.text(start, self.pos)))
            }
            TokenKind::StringLiteral => {
                self.bump();
                while self
                    .peek()
                    .is_some_and(|n| n.kind == TokenKind::StringLiteral)
                {
                    self.bump();
                }
                Some(Expr::Literal(self.text(start, self.pos)))
            }
            TokenKind::Keyword => {
                if t.is_word("true") || t.is_word("false") {
                    self.bump();
                    return Some(Expr::Literal(t.text.clone()));
                }
                if t.is_word("new") {
                    self.bump();
                    self.type_name()?;
                    return Some(Expr::Opaque(self.text(start, self.pos)));
                }
                let callable =
                    is_elementary_type(&t.text) || t.is_word("payable") || t.is_word("type");
                if callable && self.peek_at(1).is_some_and(|n| n.is_punct("(")) {
                    self.bump();
                    return Some(Expr::Identifier(t.text.clone()));
                }
                if is_elementary_type(&t.text) && self.peek_at(1).is_some_and(|n| n.is_punct("[")) {
                    // `uint[](n)` style array type in expression position
                    self.bump();
                    while self.at_punct("[") {
                        self.skip_balanced();
                    }
                    return Some(Expr::Opaque(self.text(start, self.pos)));
                }
                None
            }
            TokenKind::Punctuation if t.is_punct("(") => {
                self.bump();
                if let Some(inner) = self.expr() {
                    if self.eat_punct(")") {
                        return Some(match inner {
                            Expr::Opaque(_) => Expr::Opaque(self.text(start, self.pos)),
                            other => other,
                        });
                    }
                }
                self.pos = start;
                self.skip_balanced();
                Some(Expr::Opaque(self.text(start, self.pos)))
            }
            TokenKind::Punctuation if t.is_punct("[") => {
                self.skip_balanced();
                Some(Expr::Opaque(self.text(start, self.pos)))
            }
            _ => None,
        }
    }
}
