//! Stack effects for TEAL opcodes (v2 through v8).

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackEffect {
    Known { pops: usize, pushes: usize },
    Unknown,
}

const fn k(pops: usize, pushes: usize) -> Option<StackEffect> {
    Some(StackEffect::Known { pops, pushes })
}

/// Branch opcodes that end a basic block and name label targets.
pub fn is_branch(op: &str) -> bool {
    matches!(op, "b" | "bz" | "bnz" | "switch" | "match")
}

/// Opcodes after which control never falls through.
pub fn is_terminator(op: &str) -> bool {
    matches!(op, "return" | "err" | "retsub")
}

/// Stack effect of `op` given its immediates; `None` for unrecognized opcodes.
pub fn stack_effect(op: &str, immediates: &[String]) -> Option<StackEffect> {
    let n_imm = |i: usize| immediates.get(i).and_then(|s| s.parse::<usize>().ok());
    match op {
        "int" | "pushint" | "byte" | "pushbytes" | "addr" | "method" | "intc" | "intc_0"
        | "intc_1" | "intc_2" | "intc_3" | "bytec" | "bytec_0" | "bytec_1" | "bytec_2"
        | "bytec_3" | "arg" | "arg_0" | "arg_1" | "arg_2" | "arg_3" | "txn" | "gtxn" | "txna"
        | "gtxna" | "itxn" | "itxna" | "gitxn" | "gitxna" | "global" | "load" | "gload"
        | "gaid" | "frame_dig" => k(0, 1),
        "intcblock" | "bytecblock" | "b" | "err" | "itxn_begin" | "itxn_next" | "itxn_submit"
        | "proto" | "retsub" => k(0, 0),
        "pushints" | "pushbytess" => k(0, immediates.len()),
        "args" | "gtxns" | "gtxnsa" | "txnas" | "gtxnas" | "itxnas" | "gitxnas" | "loads"
        | "gloads" | "gaids" | "!" | "~" | "len" | "itob" | "btoi" | "sqrt" | "bitlen"
        | "sha256" | "keccak256" | "sha512_256" | "sha3_256" | "substring" | "extract"
        | "base64_decode" | "b~" | "bsqrt" | "bzero" | "block" | "balance" | "min_balance"
        | "app_global_get" | "box_del" | "json_ref_unary" => k(1, 1),
        "gtxnsas" | "gloadss" | "+" | "-" | "/" | "*" | "%" | "<" | ">" | "<=" | ">=" | "&&"
        | "||" | "==" | "!=" | "|" | "&" | "^" | "exp" | "shl" | "shr" | "concat" | "getbit"
        | "getbyte" | "extract_uint16" | "extract_uint32" | "extract_uint64" | "replace2"
        | "json_ref" | "b+" | "b-" | "b/" | "b*" | "b<" | "b>" | "b<=" | "b>=" | "b==" | "b!="
        | "b%" | "b|" | "b&" | "b^" | "app_opted_in" | "app_local_get" | "box_create" => k(2, 1),
        "mulw" | "addw" | "expw" | "app_global_get_ex" | "asset_holding_get" => k(2, 2),
        "divw" | "ed25519verify" | "ed25519verify_bare" | "substring3" | "setbit" | "setbyte"
        | "extract3" | "replace3" | "select" | "box_extract" => k(3, 1),
        "vrf_verify" | "app_local_get_ex" => k(3, 2),
        "divmodw" => k(4, 4),
        "ecdsa_verify" => k(5, 1),
        "ecdsa_pk_decompress"
        | "asset_params_get"
        | "app_params_get"
        | "acct_params_get"
        | "box_len"
        | "box_get" => k(1, 2),
        "ecdsa_pk_recover" => k(4, 2),
        "bnz" | "bz" | "return" | "pop" | "store" | "assert" | "itxn_field" | "log"
        | "app_global_del" | "frame_bury" | "switch" => k(1, 0),
        "stores" | "app_global_put" | "app_local_del" | "box_put" | "box_resize" => k(2, 0),
        "app_local_put" | "box_replace" => k(3, 0),
        "box_splice" => k(4, 0),
        "dup" => k(1, 2),
        "dup2" => k(2, 4),
        "swap" => k(2, 2),
        "dig" => n_imm(0).map(|n| StackEffect::Known {
            pops: n + 1,
            pushes: n + 2,
        }),
        "bury" => n_imm(0).map(|n| StackEffect::Known {
            pops: n + 1,
            pushes: n,
        }),
        "cover" | "uncover" => n_imm(0).map(|n| StackEffect::Known {
            pops: n + 1,
            pushes: n + 1,
        }),
        "popn" => n_imm(0).map(|n| StackEffect::Known { pops: n, pushes: 0 }),
        "dupn" => n_imm(0).map(|n| StackEffect::Known {
            pops: 1,
            pushes: n + 1,
        }),
        "match" => k(immediates.len() + 1, 0),
        "callsub" => Some(StackEffect::Unknown),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn common_effects() {
        assert_eq!(stack_effect("app_global_get", &[]), k(1, 1));
        assert_eq!(stack_effect("app_local_put", &[]), k(3, 0));
        assert_eq!(stack_effect("==", &[]), k(2, 1));
        assert_eq!(stack_effect("dig", &["2".into()]), k(3, 4));
        assert_eq!(
            stack_effect("pushbytess", &["\"a\"".into(), "0x01".into()]),
            k(0, 2)
        );
        assert_eq!(
            stack_effect("callsub", &["f".into()]),
            Some(StackEffect::Unknown)
        );
        assert_eq!(stack_effect("frobnicate", &[]), None);
        assert_eq!(stack_effect("dig", &["x".into()]), None);
    }
}
