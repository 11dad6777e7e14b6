use std::collections::BTreeMap;

use super::ast::{ContractDecl, StateVar, TypeDesc};
use crate::diagnostic::Diagnostic;

/// State variables of one contract, keyed by name.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    vars: BTreeMap<String, StateVar>,
    pub diagnostics: Vec<Diagnostic>,
}

impl SymbolTable {
    pub fn get(&self, name: &str) -> Option<&StateVar> {
        self.vars.get(name)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// `mapping(address => uint*)`, single level.
    pub fn is_address_to_uint_mapping(&self, name: &str) -> bool {
        self.get(name)
            .is_some_and(|v| is_address_to_uint(&v.type_desc))
    }

    /// `mapping(address => mapping(address => uint*))`.
    pub fn is_nested_address_to_uint_mapping(&self, name: &str) -> bool {
        self.get(name).is_some_and(|v| match &v.type_desc {
            TypeDesc::Mapping { key, value } => key == "address" && is_address_to_uint(value),
            _ => false,
        })
    }
}

fn is_address_to_uint(t: &TypeDesc) -> bool {
    match t {
        TypeDesc::Mapping { key, value } => {
            key == "address"
                && matches!(value.as_ref(), TypeDesc::Elementary(v) if v.starts_with("uint"))
        }
        _ => false,
    }
}

/// Build the state-variable table. Duplicate names keep the last
/// declaration and produce a diagnostic.
pub fn collect_state_vars(contract: &ContractDecl) -> SymbolTable {
    let mut table = SymbolTable::default();
    for var in &contract.state_vars {
        if let Some(prev) = table.vars.insert(var.name.clone(), var.clone()) {
            table.diagnostics.push(Diagnostic::warning(
                var.location,
                format!(
                    "state variable `{}` redeclared (previous declaration at {})",
                    var.name, prev.location
                ),
            ));
        }
    }
    table
}

/// State variables of `contract` plus those inherited from `bases`
/// (nearest first). Own declarations shadow inherited ones.
pub fn collect_state_vars_with_bases(
    contract: &ContractDecl,
    bases: &[&ContractDecl],
) -> SymbolTable {
    let mut table = collect_state_vars(contract);
    for base in bases {
        for var in &base.state_vars {
            table
                .vars
                .entry(var.name.clone())
                .or_insert_with(|| var.clone());
        }
    }
    table
}
