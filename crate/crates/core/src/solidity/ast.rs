use std::fmt;

use crate::diagnostic::{Diagnostic, Location};

#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub path: String,
    pub contracts: Vec<ContractDecl>,
    pub diagnostics: Vec<Diagnostic>,
}

impl SourceUnit {
    pub fn contract(&self, name: &str) -> Option<&ContractDecl> {
        self.contracts.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractKind {
    Contract,
    Library,
    Interface,
}

#[derive(Debug, Clone)]
pub struct ContractDecl {
    pub name: String,
    pub kind: ContractKind,
    /// Names listed after `is`, in declaration order.
    pub bases: Vec<String>,
    pub state_vars: Vec<StateVar>,
    pub modifiers: Vec<ModifierDecl>,
    pub functions: Vec<FunctionDecl>,
    /// Raw text of members outside the recognized subset.
    pub opaque_items: Vec<String>,
    pub location: Location,
}

impl ContractDecl {
    pub fn modifier(&self, name: &str) -> Option<&ModifierDecl> {
        self.modifiers.iter().find(|m| m.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeDesc {
    Elementary(String),
    Mapping {
        key: String,
        value: Box<TypeDesc>,
    },
    /// User-defined, array, or function types, kept verbatim.
    Other(String),
}

impl fmt::Display for TypeDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeDesc::Elementary(t) | TypeDesc::Other(t) => f.write_str(t),
            TypeDesc::Mapping { key, value } => write!(f, "mapping({key} => {value})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVar {
    pub name: String,
    pub type_desc: TypeDesc,
    pub location: Location,
}

#[derive(Debug, Clone)]
pub struct ModifierDecl {
    pub name: String,
    pub body: Vec<Stmt>,
    pub location: Location,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    Function,
    Constructor,
    Fallback,
    Receive,
}

#[derive(Debug, Clone)]
pub struct FunctionDecl {
    /// Empty for constructors, `fallback` and `receive`.
    pub name: String,
    pub kind: FunctionKind,
    /// Modifier (or base constructor) names, visibility and mutability excluded.
    pub modifier_invocations: Vec<String>,
    pub body: Vec<Stmt>,
    pub location: Location,
}

impl FunctionDecl {
    /// Name used in messages: the declared name, or `constructor`/`fallback`/`receive`.
    pub fn display_name(&self) -> &str {
        match self.kind {
            FunctionKind::Function => &self.name,
            FunctionKind::Constructor => "constructor",
            FunctionKind::Fallback => "fallback",
            FunctionKind::Receive => "receive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub location: Location,
}

#[derive(Debug, Clone)]
pub enum StmtKind {
    Require(Expr),
    If {
        condition: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    Assign {
        lvalue: Expr,
        rvalue: Expr,
        compound: bool,
    },
    Call(Expr),
    Revert,
    Return(Option<Expr>),
    /// The `_;` in a modifier body.
    Placeholder,
    /// Statement outside the recognized subset, as raw text.
    Opaque(String),
}

impl Stmt {
    /// Location-insensitive structural equality.
    pub fn same_shape(&self, other: &Stmt) -> bool {
        use StmtKind::*;
        match (&self.kind, &other.kind) {
            (Require(a), Require(b)) | (Call(a), Call(b)) => a == b,
            (
                If {
                    condition: c1,
                    then_body: t1,
                    else_body: e1,
                },
                If {
                    condition: c2,
                    then_body: t2,
                    else_body: e2,
                },
            ) => c1 == c2 && same_shape_all(t1, t2) && same_shape_all(e1, e2),
            (
                Assign {
                    lvalue: l1,
                    rvalue: r1,
                    compound: k1,
                },
                Assign {
                    lvalue: l2,
                    rvalue: r2,
                    compound: k2,
                },
            ) => l1 == l2 && r1 == r2 && k1 == k2,
            (Revert, Revert) | (Placeholder, Placeholder) => true,
            (Return(a), Return(b)) => a == b,
            (Opaque(a), Opaque(b)) => a == b,
            _ => false,
        }
    }

    /// Every expression directly owned by this statement (not nested statements).
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Require(e) | StmtKind::Call(e) | StmtKind::Return(Some(e)) => vec![e],
            StmtKind::If { condition, .. } => vec![condition],
            StmtKind::Assign { lvalue, rvalue, .. } => vec![lvalue, rvalue],
            _ => Vec::new(),
        }
    }
}

pub fn same_shape_all(a: &[Stmt], b: &[Stmt]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_shape(y))
}

/// `{value: x}` style option on a call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallOption {
    pub name: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    MsgSender,
    Identifier(String),
    Member(Box<Expr>, String),
    Index(Box<Expr>, Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    Neq(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    CallExpr {
        callee: Box<Expr>,
        options: Vec<CallOption>,
        args: Vec<Expr>,
    },
    AddressCast(Box<Expr>),
    Literal(String),
    Opaque(String),
}

impl Expr {
    /// Pre-order walk over this expression and all sub-expressions.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        match self {
            Expr::Member(base, _) | Expr::AddressCast(base) => base.walk(visit),
            Expr::Index(a, b)
            | Expr::Eq(a, b)
            | Expr::Neq(a, b)
            | Expr::And(a, b)
            | Expr::Or(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            Expr::CallExpr {
                callee,
                options,
                args,
            } => {
                callee.walk(visit);
                for o in options {
                    o.value.walk(visit);
                }
                for a in args {
                    a.walk(visit);
                }
            }
            Expr::MsgSender | Expr::Identifier(_) | Expr::Literal(_) | Expr::Opaque(_) => {}
        }
    }
}
