//! Sender-guard and fund-modification detection over the Solidity AST.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{ContractDecl, Expr, Stmt, StmtKind};
use super::symbols::SymbolTable;
use crate::config::AnalyzerConfig;
use crate::diagnostic::{Diagnostic, Location};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GuardForm {
    /// Sender check inside a modifier body.
    ModifierGuard,
    /// `require(msg.sender == x)` (or `if (msg.sender != x) revert`) in a function body.
    RequireGuard,
    /// `if (msg.sender == x) { ... }` in a function body.
    IfGuard,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GuardScope {
    Modifier(String),
    /// Index into [`ContractDecl::functions`].
    Function(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardSite {
    pub form: GuardForm,
    /// Rendered non-sender side of the comparison.
    pub owner_expr: String,
    /// Rendered guarding statement head, e.g. `require(msg.sender == owner)`.
    pub text: String,
    pub location: Location,
    pub scope: GuardScope,
    /// Enclosing function or modifier name.
    pub scope_name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FundModKind {
    BalanceMappingWrite,
    NativeTransfer,
    SelfDestruct,
}

/// An `if` whose then-branch lexically encloses a fund modification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardingIf {
    pub condition: String,
    pub location: Location,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundModSite {
    pub kind: FundModKind,
    /// Mapping name for balance writes, rendered callee for calls.
    pub target: String,
    pub location: Location,
    pub function_index: usize,
    pub function: String,
    /// Outermost first.
    pub guarding_if_chain: Vec<GuardingIf>,
    /// Set by [`pair_detections`]: a guard covers this site.
    pub privileged_scope: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDetection {
    pub contract: String,
    pub function: String,
    pub function_location: Location,
    pub privileged: bool,
    pub fund_sites: Vec<FundModSite>,
    pub guard_sites: Vec<GuardSite>,
}

fn is_sender(e: &Expr, config: &AnalyzerConfig) -> bool {
    match e {
        Expr::MsgSender => true,
        Expr::AddressCast(inner) => is_sender(inner, config),
        Expr::Member(base, field) if config.tx_origin && field == "origin" => {
            matches!(base.as_ref(), Expr::Identifier(b) if b == "tx")
        }
        _ => false,
    }
}

/// First `sender == X` (or `sender != X` when `negated`) reachable through
/// `&&`/`||`; returns `X`.
fn sender_comparison<'e>(e: &'e Expr, negated: bool, config: &AnalyzerConfig) -> Option<&'e Expr> {
    match e {
        Expr::Eq(l, r) if !negated => owner_side(l, r, config),
        Expr::Neq(l, r) if negated => owner_side(l, r, config),
        Expr::And(l, r) | Expr::Or(l, r) => {
            sender_comparison(l, negated, config).or_else(|| sender_comparison(r, negated, config))
        }
        _ => None,
    }
}

fn owner_side<'e>(l: &'e Expr, r: &'e Expr, config: &AnalyzerConfig) -> Option<&'e Expr> {
    match (is_sender(l, config), is_sender(r, config)) {
        (true, false) => Some(r),
        (false, true) => Some(l),
        _ => None,
    }
}

fn walk_stmts<'a>(stmts: &'a [Stmt], visit: &mut impl FnMut(&'a Stmt)) {
    for s in stmts {
        visit(s);
        if let StmtKind::If {
            then_body,
            else_body,
            ..
        } = &s.kind
        {
            walk_stmts(then_body, visit);
            walk_stmts(else_body, visit);
        }
    }
}

/// Classify one statement as a guard, ignoring scope.
fn guard_in_stmt(stmt: &Stmt, config: &AnalyzerConfig) -> Option<(GuardForm, String, String)> {
    match &stmt.kind {
        StmtKind::Require(cond) => {
            let owner = sender_comparison(cond, false, config)?;
            Some((
                GuardForm::RequireGuard,
                owner.to_string(),
                format!("require({cond})"),
            ))
        }
        StmtKind::If {
            condition,
            then_body,
            ..
        } => {
            if let Some(owner) = sender_comparison(condition, false, config) {
                return Some((
                    GuardForm::IfGuard,
                    owner.to_string(),
                    format!("if ({condition})"),
                ));
            }
            let reverts = then_body.iter().any(|s| matches!(s.kind, StmtKind::Revert));
            if config.revert_guard && reverts {
                let owner = sender_comparison(condition, true, config)?;
                return Some((
                    GuardForm::RequireGuard,
                    owner.to_string(),
                    format!("if ({condition}) revert"),
                ));
            }
            None
        }
        _ => None,
    }
}

/// Sender checks in every modifier and function of `contract`, in source order.
pub fn find_sender_guards(contract: &ContractDecl, config: &AnalyzerConfig) -> Vec<GuardSite> {
    let mut sites = Vec::new();
    for m in &contract.modifiers {
        walk_stmts(&m.body, &mut |s| {
            if let Some((_, owner_expr, text)) = guard_in_stmt(s, config) {
                sites.push(GuardSite {
                    form: GuardForm::ModifierGuard,
                    owner_expr,
                    text,
                    location: s.location,
                    scope: GuardScope::Modifier(m.name.clone()),
                    scope_name: m.name.clone(),
                });
            }
        });
    }
    for (idx, f) in contract.functions.iter().enumerate() {
        walk_stmts(&f.body, &mut |s| {
            if let Some((form, owner_expr, text)) = guard_in_stmt(s, config) {
                sites.push(GuardSite {
                    form,
                    owner_expr,
                    text,
                    location: s.location,
                    scope: GuardScope::Function(idx),
                    scope_name: f.display_name().to_string(),
                });
            }
        });
    }
    sites.sort_by_key(|g| g.location);
    sites
}

fn balance_target(lvalue: &Expr, symbols: &SymbolTable, config: &AnalyzerConfig) -> Option<String> {
    let Expr::Index(base, _) = lvalue else {
        return None;
    };
    match base.as_ref() {
        Expr::Identifier(v) if symbols.is_address_to_uint_mapping(v) => Some(v.clone()),
        Expr::Index(inner, _) if config.nested_mappings => match inner.as_ref() {
            Expr::Identifier(v) if symbols.is_nested_address_to_uint_mapping(v) => Some(v.clone()),
            _ => None,
        },
        _ => None,
    }
}

fn fund_call(e: &Expr, config: &AnalyzerConfig) -> Option<(FundModKind, String)> {
    let Expr::CallExpr {
        callee,
        options,
        args,
    } = e
    else {
        return None;
    };
    match callee.as_ref() {
        Expr::Identifier(name)
            if config.selfdestruct && (name == "selfdestruct" || name == "suicide") =>
        {
            Some((FundModKind::SelfDestruct, name.clone()))
        }
        Expr::Member(_, field) if config.native_transfer => {
            let native = match field.as_str() {
                "transfer" | "send" => args.len() == 1,
                "call" => options.iter().any(|o| o.name == "value"),
                // legacy `addr.call.value(v)(data)`
                "value" => {
                    matches!(callee.as_ref(), Expr::Member(b, _) if matches!(b.as_ref(), Expr::Member(_, f) if f == "call"))
                }
                _ => false,
            };
            native.then(|| (FundModKind::NativeTransfer, callee.to_string()))
        }
        _ => None,
    }
}

fn collect_fund_sites(
    stmts: &[Stmt],
    chain: &mut Vec<GuardingIf>,
    ctx: &FundCtx<'_>,
    out: &mut Vec<FundModSite>,
) {
    for s in stmts {
        let mut push = |kind, target: String| {
            out.push(FundModSite {
                kind,
                target,
                location: s.location,
                function_index: ctx.function_index,
                function: ctx.function.to_string(),
                guarding_if_chain: chain.clone(),
                privileged_scope: false,
            })
        };
        if let StmtKind::Assign { lvalue, .. } = &s.kind {
            if let Some(var) = balance_target(lvalue, ctx.symbols, ctx.config) {
                push(FundModKind::BalanceMappingWrite, var);
            }
        }
        for e in s.exprs() {
            e.walk(&mut |sub| {
                if let Some((kind, target)) = fund_call(sub, ctx.config) {
                    push(kind, target);
                }
            });
        }
        if let StmtKind::If {
            condition,
            then_body,
            else_body,
        } = &s.kind
        {
            chain.push(GuardingIf {
                condition: condition.to_string(),
                location: s.location,
            });
            collect_fund_sites(then_body, chain, ctx, out);
            chain.pop();
            collect_fund_sites(else_body, chain, ctx, out);
        }
    }
}

struct FundCtx<'a> {
    symbols: &'a SymbolTable,
    config: &'a AnalyzerConfig,
    function_index: usize,
    function: &'a str,
}

/// Balance-mapping writes, native transfers and `selfdestruct` calls in
/// every function of `contract`, in source order.
pub fn find_fund_modifications(
    contract: &ContractDecl,
    symbols: &SymbolTable,
    config: &AnalyzerConfig,
) -> Vec<FundModSite> {
    let mut out = Vec::new();
    for (idx, f) in contract.functions.iter().enumerate() {
        let ctx = FundCtx {
            symbols,
            config,
            function_index: idx,
            function: f.display_name(),
        };
        collect_fund_sites(&f.body, &mut Vec::new(), &ctx, &mut out);
    }
    out.sort_by_key(|s| s.location);
    out
}

/// Modifier name → sender guards inside it, for a contract and the bases
/// it inherits from in the same file.
#[derive(Debug, Clone, Default)]
pub struct ModifierTable {
    entries: BTreeMap<String, Vec<GuardSite>>,
    base_contracts: BTreeSet<String>,
}

impl ModifierTable {
    pub fn new(contract: &ContractDecl, guards: &[GuardSite]) -> Self {
        let mut table = Self::default();
        table.add(contract, guards);
        table.base_contracts.extend(contract.bases.iter().cloned());
        table
    }

    /// Add modifiers from an inherited contract; existing names shadow them.
    pub fn inherit(&mut self, base: &ContractDecl, base_guards: &[GuardSite]) {
        self.add(base, base_guards);
    }

    fn add(&mut self, contract: &ContractDecl, guards: &[GuardSite]) {
        for m in &contract.modifiers {
            if self.entries.contains_key(&m.name) {
                continue;
            }
            let sites = guards
                .iter()
                .filter(|g| g.scope == GuardScope::Modifier(m.name.clone()))
                .cloned()
                .collect();
            self.entries.insert(m.name.clone(), sites);
        }
    }

    pub fn guards(&self, modifier: &str) -> Option<&[GuardSite]> {
        self.entries.get(modifier).map(Vec::as_slice)
    }
}

/// Same-file contracts that `contract` inherits from, nearest first.
pub fn inherited_contracts<'a>(
    contracts: &'a [ContractDecl],
    contract: &ContractDecl,
) -> Vec<&'a ContractDecl> {
    let mut seen: BTreeSet<&str> = BTreeSet::from([contract.name.as_str()]);
    let mut queue: Vec<&str> = contract.bases.iter().rev().map(String::as_str).collect();
    let mut out = Vec::new();
    while let Some(name) = queue.pop() {
        if !seen.insert(name) {
            continue;
        }
        if let Some(base) = contracts.iter().find(|c| c.name == name) {
            out.push(base);
            queue.extend(base.bases.iter().rev().map(String::as_str));
        }
    }
    out
}

/// Combine guards and fund sites per function.
///
/// A function is privileged when it has any guard site, either in its own
/// body or through an invoked modifier. A fund site is privileged-scoped
/// when the function has a function-wide guard (require or modifier) or
/// the site sits in the then-branch of an `if` sender guard.
pub fn pair_detections(
    contract: &ContractDecl,
    guards: &[GuardSite],
    fund_sites: &[FundModSite],
    modifiers: &ModifierTable,
) -> (Vec<RawDetection>, Vec<Diagnostic>) {
    let mut detections = Vec::new();
    let mut diagnostics = Vec::new();
    for (idx, f) in contract.functions.iter().enumerate() {
        let mut guard_sites: Vec<GuardSite> = guards
            .iter()
            .filter(|g| g.scope == GuardScope::Function(idx))
            .cloned()
            .collect();
        for name in &f.modifier_invocations {
            match modifiers.guards(name) {
                Some(sites) => guard_sites.extend(sites.iter().cloned()),
                None if modifiers.base_contracts.contains(name) => {}
                None => diagnostics.push(Diagnostic::note(
                    f.location,
                    format!(
                        "modifier `{name}` on `{}` is not defined in this file; treated as no guard",
                        f.display_name()
                    ),
                )),
            }
        }
        guard_sites.sort_by_key(|g| g.location);
        guard_sites.dedup_by(|a, b| a.location == b.location && a.scope == b.scope);

        let function_wide = guard_sites
            .iter()
            .any(|g| matches!(g.form, GuardForm::RequireGuard | GuardForm::ModifierGuard));
        let if_guards: BTreeSet<Location> = guard_sites
            .iter()
            .filter(|g| g.form == GuardForm::IfGuard)
            .map(|g| g.location)
            .collect();
        let sites: Vec<FundModSite> = fund_sites
            .iter()
            .filter(|s| s.function_index == idx)
            .map(|s| FundModSite {
                privileged_scope: function_wide
                    || s.guarding_if_chain
                        .iter()
                        .any(|c| if_guards.contains(&c.location)),
                ..s.clone()
            })
            .collect();
        if sites.is_empty() && guard_sites.is_empty() {
            continue;
        }
        detections.push(RawDetection {
            contract: contract.name.clone(),
            function: f.display_name().to_string(),
            function_location: f.location,
            privileged: !guard_sites.is_empty(),
            fund_sites: sites,
            guard_sites,
        });
    }
    (detections, diagnostics)
}
