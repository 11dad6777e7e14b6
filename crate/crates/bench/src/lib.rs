//! Deterministic synthetic corpora for throughput benchmarks and stress
//! tests. Files are returned as `(path, contents)` pairs so the generator
//! has no dependency on the analyzer itself.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// `files` sources of roughly `lines` lines each, alternating Solidity
/// and TEAL (every fourth file is TEAL). Same seed, same corpus.
pub fn synthetic_corpus(files: usize, lines: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..files)
        .map(|i| {
            if i % 4 == 3 {
                (
                    format!("synthetic/p{i:04}.teal"),
                    teal_program(&mut rng, lines),
                )
            } else {
                (
                    format!("synthetic/c{i:04}.sol"),
                    solidity_contract(&mut rng, i, lines),
                )
            }
        })
        .collect()
}

/// A contract with guarded and unguarded balance writes, transfers, plain
/// setters and some constructs the analyzer only skips over.
pub fn solidity_contract(rng: &mut impl Rng, index: usize, lines: usize) -> String {
    let mut s = format!(
        "pragma solidity ^0.8.0;\n\ncontract Synthetic{index} {{\n    address owner;\n    address admin;\n    uint total;\n    mapping(address => uint) bals;\n    mapping(address => bool) flags;\n\n    event Moved(address indexed who, uint amount);\n\n    modifier onlyOwner {{\n        require(msg.sender == owner, \"owner\");\n        _;\n    }}\n\n"
    );
    let mut f = 0;
    while s.lines().count() + 12 < lines {
        let body = match rng.gen_range(0..6) {
            0 => format!(
                "    function credit{f}(address a, uint v) public onlyOwner {{\n        bals[a] = bals[a].add(v);\n        total += v;\n        emit Moved(a, v);\n    }}\n\n"
            ),
            1 => format!(
                "    function withdraw{f}(uint v) external {{\n        require(bals[msg.sender] >= v);\n        bals[msg.sender] -= v;\n        payable(msg.sender).transfer(v);\n    }}\n\n"
            ),
            2 => format!(
                "    function toggle{f}(address a) public {{\n        if (msg.sender == admin) {{\n            flags[a] = !flags[a];\n        }} else {{\n            revert(\"admin\");\n        }}\n    }}\n\n"
            ),
            3 => format!(
                "    function sum{f}(uint[] memory xs) public pure returns (uint acc) {{\n        for (uint i = 0; i < xs.length; i++) {{\n            acc = acc + xs[i] * 2;\n        }}\n        return acc;\n    }}\n\n"
            ),
            4 => format!(
                "    function sweep{f}(address to) public {{\n        if (msg.sender != owner) revert();\n        (bool ok, ) = to.call{{value: address(this).balance}}(\"\");\n        require(ok);\n    }}\n\n"
            ),
            _ => format!(
                "    function check{f}(uint v) public view returns (bool) {{\n        uint limit = total / 2;\n        return v < limit && flags[msg.sender];\n    }}\n\n"
            ),
        };
        s.push_str(&body);
        f += 1;
    }
    s.push_str("}\n");
    s
}

/// A TEAL approval program: a dispatcher, guarded and unguarded
/// handlers, and balance/non-balance state writes.
pub fn teal_program(rng: &mut impl Rng, lines: usize) -> String {
    let mut s = String::from("#pragma version 6\ntxn ApplicationID\nint 0\n==\nbnz handler_0\n");
    let mut h = 0;
    let mut handlers = String::new();
    while s.lines().count() + handlers.lines().count() + 16 < lines {
        let next = h + 1;
        let body = match rng.gen_range(0..4) {
            0 => format!(
                "handler_{h}:\nbyte \"manager\"\napp_global_get\ntxn Sender\n==\nassert\nint 0\nbyte \"MyBalance\"\nint 100\napp_local_put\nb handler_{next}\n"
            ),
            1 => format!(
                "handler_{h}:\nbyte \"Creator\"\napp_global_get\ntxn Sender\n==\nbz fail\nbyte \"Total\"\nint 7\napp_global_put\nb handler_{next}\n"
            ),
            2 => format!(
                "handler_{h}:\ntxn NumAppArgs\nint 2\n==\nbz handler_{next}\nint 0\nbyte \"MyBalance\"\ntxna ApplicationArgs 1\nbtoi\napp_local_put\nb handler_{next}\n"
            ),
            _ => format!(
                "handler_{h}:\nint 0\nbyte \"counter\"\napp_local_get\nint 1\n+\nstore 0\nint 0\nbyte \"counter\"\nload 0\napp_local_put\nb handler_{next}\n"
            ),
        };
        handlers.push_str(&body);
        h += 1;
    }
    s.push_str(&format!("b handler_{h}\n"));
    s.push_str(&handlers);
    s.push_str(&format!("handler_{h}:\nint 1\nreturn\nfail:\nerr\n"));
    s
}
