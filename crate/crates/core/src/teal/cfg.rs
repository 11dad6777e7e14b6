use std::collections::BTreeSet;
use std::ops::Range;

use super::opcodes::{is_branch, is_terminator};
use super::parser::TealProgram;
use crate::diagnostic::Diagnostic;

/// Half-open range of instruction indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicBlock {
    pub start: usize,
    pub end: usize,
}

impl BasicBlock {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn last(&self) -> usize {
        self.end - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Fallthrough,
    BranchTaken,
    BranchNotTaken,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Default)]
pub struct Cfg {
    pub blocks: Vec<BasicBlock>,
    pub edges: Vec<Edge>,
    /// `None` only for an empty program.
    pub entry: Option<usize>,
    /// `callsub` sites as (calling block, subroutine entry block); metadata only.
    pub call_edges: Vec<(usize, usize)>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Cfg {
    pub fn successors(&self, block: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.from == block)
    }

    /// Outgoing edges per block, in edge order.
    pub fn adjacency(&self) -> Vec<Vec<Edge>> {
        let mut adj = vec![Vec::new(); self.blocks.len()];
        for e in &self.edges {
            adj[e.from].push(*e);
        }
        adj
    }

    /// Block containing instruction `index`.
    pub fn block_of(&self, index: usize) -> Option<usize> {
        let i = self.blocks.partition_point(|b| b.end <= index);
        (i < self.blocks.len() && self.blocks[i].start <= index).then_some(i)
    }

    /// Blocks reachable from the entry over all edges.
    pub fn reachable(&self) -> Vec<bool> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.blocks.len()];
        let mut stack: Vec<usize> = self.entry.into_iter().collect();
        while let Some(b) = stack.pop() {
            if std::mem::replace(&mut seen[b], true) {
                continue;
            }
            stack.extend(adj[b].iter().map(|e| e.to).filter(|&t| !seen[t]));
        }
        seen
    }
}

/// Partition the program into basic blocks. Leaders are the first
/// instruction, every label target, and every instruction following a
/// branch (`b`, `bz`, `bnz`, `switch`, `match`) or terminator (`return`,
/// `err`, `retsub`). `assert` does not end a block.
pub fn build_cfg(program: &TealProgram) -> Cfg {
    let n = program.instructions.len();
    let mut cfg = Cfg::default();
    if n == 0 {
        return cfg;
    }
    let mut leaders: BTreeSet<usize> = BTreeSet::from([0]);
    leaders.extend(program.labels.values().copied().filter(|&i| i < n));
    for (i, ins) in program.instructions.iter().enumerate() {
        if (is_branch(&ins.opcode) || is_terminator(&ins.opcode)) && i + 1 < n {
            leaders.insert(i + 1);
        }
    }
    let starts: Vec<usize> = leaders.into_iter().collect();
    for (k, &start) in starts.iter().enumerate() {
        let end = starts.get(k + 1).copied().unwrap_or(n);
        cfg.blocks.push(BasicBlock { start, end });
    }
    cfg.entry = Some(0);

    let block_at = |index: usize| starts.binary_search(&index).ok();
    let target_block = |label: &str| program.labels.get(label).and_then(|&i| block_at(i));
    for (b, block) in cfg.blocks.iter().enumerate() {
        let last = &program.instructions[block.last()];
        let next = (b + 1 < starts.len()).then_some(b + 1);
        let op = last.opcode.as_str();
        if is_branch(op) {
            for label in last.branch_targets() {
                match target_block(label) {
                    Some(t) => cfg.edges.push(Edge {
                        from: b,
                        to: t,
                        kind: EdgeKind::BranchTaken,
                    }),
                    None if program.labels.contains_key(label) => {
                        cfg.diagnostics.push(Diagnostic::note(
                            last.location(),
                            format!("branch to `{label}` at end of program; edge omitted"),
                        ));
                    }
                    None => {}
                }
            }
            if op != "b" {
                if let Some(t) = next {
                    cfg.edges.push(Edge {
                        from: b,
                        to: t,
                        kind: EdgeKind::BranchNotTaken,
                    });
                }
            }
        } else if !is_terminator(op) {
            if let Some(t) = next {
                cfg.edges.push(Edge {
                    from: b,
                    to: t,
                    kind: EdgeKind::Fallthrough,
                });
            }
        }
        for i in block.range() {
            let ins = &program.instructions[i];
            if ins.opcode == "callsub" {
                if let Some(t) = ins.immediates.first().and_then(|l| target_block(l)) {
                    cfg.call_edges.push((b, t));
                }
            }
        }
    }
    cfg
}
