//! Guard points, fund-modification points, and all-paths guardedness.

use std::collections::VecDeque;

use super::absint::{AbstractValue, BlockFacts, Polarity};
use super::cfg::{Cfg, Edge, EdgeKind};
use super::parser::TealProgram;
use crate::config::AnalyzerConfig;
use crate::diagnostic::{Diagnostic, Location};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuardForm {
    /// `assert` on a sender comparison.
    AssertGuard,
    /// `bz`/`bnz` on a sender comparison whose failing side reaches only
    /// failure terminators. Edges of `fail_kind` lead to `fail_target`.
    BranchGuard {
        fail_target: usize,
        fail_kind: EdgeKind,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardPoint {
    pub block: usize,
    pub instr: usize,
    pub form: GuardForm,
    /// Rendered source, e.g. `app_global_get["manager"]`.
    pub privileged_source: String,
    /// The comparison was combined with another condition via `||`.
    pub weakened: bool,
    pub location: Location,
}

impl GuardPoint {
    /// Whether traversal may continue along `edge` leaving this guard's block.
    fn passes(&self, edge: &Edge) -> bool {
        match self.form {
            GuardForm::AssertGuard => false,
            GuardForm::BranchGuard { fail_kind, .. } => edge.kind == fail_kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundModPoint {
    pub block: usize,
    pub instr: usize,
    pub opcode: String,
    pub key: Vec<u8>,
    pub location: Location,
}

impl FundModPoint {
    pub fn key_text(&self) -> String {
        String::from_utf8_lossy(&self.key).into_owned()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guardedness {
    /// Every entry path crosses a guard. Holds indices of guard points that
    /// lie on some path to the point.
    Guarded { guards: Vec<usize> },
    /// Entry-to-point block path that avoids every guard.
    Unguarded { witness: Vec<usize> },
    /// The point's block is unreachable from the entry.
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointGuardedness {
    pub point: FundModPoint,
    pub guardedness: Guardedness,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GuardednessResult {
    pub points: Vec<PointGuardedness>,
    pub diagnostics: Vec<Diagnostic>,
}

fn terminal_is_failure(program: &TealProgram, cfg: &Cfg, facts: &[BlockFacts], b: usize) -> bool {
    let last = &program.instructions[cfg.blocks[b].last()];
    match last.opcode.as_str() {
        "err" => true,
        "return" => facts[b].terminal_value == Some(AbstractValue::IntConst(0)),
        _ => false,
    }
}

/// Per block: every terminator reachable from it is `err` or a `return`
/// of a known zero.
pub fn failure_blocks(program: &TealProgram, cfg: &Cfg, facts: &[BlockFacts]) -> Vec<bool> {
    let n = cfg.blocks.len();
    let adj = cfg.adjacency();
    let mut preds = vec![Vec::new(); n];
    for e in &cfg.edges {
        preds[e.to].push(e.from);
    }
    // blocks that can reach a non-failure exit
    let mut escapes = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n)
        .filter(|&b| adj[b].is_empty() && !terminal_is_failure(program, cfg, facts, b))
        .collect();
    for &b in &queue {
        escapes[b] = true;
    }
    while let Some(b) = queue.pop_front() {
        for &p in &preds[b] {
            if !escapes[p] {
                escapes[p] = true;
                queue.push_back(p);
            }
        }
    }
    escapes.into_iter().map(|e| !e).collect()
}

/// Assert guards and branch guards. Sender comparisons feeding a branch
/// whose failing side is not a failure region are noted but not returned.
pub fn find_guard_points(
    program: &TealProgram,
    cfg: &Cfg,
    facts: &[BlockFacts],
    _config: &AnalyzerConfig,
) -> (Vec<GuardPoint>, Vec<Diagnostic>) {
    let mut guards = Vec::new();
    let mut diags = Vec::new();
    let failure = failure_blocks(program, cfg, facts);
    for bf in facts {
        for fact in &bf.instrs {
            if fact.guard_point {
                let ins = &program.instructions[fact.index];
                guards.push(GuardPoint {
                    block: bf.block,
                    instr: fact.index,
                    form: GuardForm::AssertGuard,
                    privileged_source: asserted_source(program, bf, fact.index),
                    weakened: fact.weakened,
                    location: ins.location(),
                });
            }
        }
        let Some(AbstractValue::SenderCmp {
            privileged_source,
            polarity,
            weakened,
        }) = &bf.terminal_value
        else {
            continue;
        };
        let last_idx = cfg.blocks[bf.block].last();
        let last = &program.instructions[last_idx];
        // bz jumps when the condition is false, bnz when it is true
        let fail_kind = match (last.opcode.as_str(), polarity) {
            ("bz", Polarity::Eq) | ("bnz", Polarity::Neq) => EdgeKind::BranchTaken,
            ("bnz", Polarity::Eq) | ("bz", Polarity::Neq) => EdgeKind::BranchNotTaken,
            _ => continue,
        };
        let fail_edge = cfg.successors(bf.block).find(|e| e.kind == fail_kind);
        match fail_edge {
            Some(e) if failure[e.to] => guards.push(GuardPoint {
                block: bf.block,
                instr: last_idx,
                form: GuardForm::BranchGuard {
                    fail_target: e.to,
                    fail_kind,
                },
                privileged_source: privileged_source.to_string(),
                weakened: *weakened,
                location: last.location(),
            }),
            _ => diags.push(Diagnostic::note(
                last.location(),
                "sender comparison branches, but neither side is a failure-only region; not treated as a guard",
            )),
        }
    }
    for g in &guards {
        if g.weakened {
            diags.push(Diagnostic::note(
                g.location,
                "weakened guard: sender comparison is combined with another condition via `||`",
            ));
        }
    }
    guards.sort_by_key(|g| (g.block, g.instr));
    (guards, diags)
}

/// Recover the privileged source for an assert by replaying the pushed
/// values of the preceding comparison.
fn asserted_source(program: &TealProgram, bf: &BlockFacts, assert_idx: usize) -> String {
    bf.instrs
        .iter()
        .rev()
        .filter(|f| f.index < assert_idx)
        .flat_map(|f| f.pushed.iter().rev())
        .find_map(|v| match v {
            AbstractValue::SenderCmp {
                privileged_source, ..
            } => Some(privileged_source.to_string()),
            _ => None,
        })
        .unwrap_or_else(|| program.instructions[assert_idx].render())
}

/// One point per `app_local_put`/`app_global_put` writing a balance key.
pub fn find_fund_mod_points(program: &TealProgram, facts: &[BlockFacts]) -> Vec<FundModPoint> {
    let mut points: Vec<FundModPoint> = facts
        .iter()
        .flat_map(|bf| {
            bf.instrs.iter().filter_map(move |f| {
                let key = f.fund_key.clone()?;
                let ins = &program.instructions[f.index];
                Some(FundModPoint {
                    block: bf.block,
                    instr: f.index,
                    opcode: ins.opcode.clone(),
                    key,
                    location: ins.location(),
                })
            })
        })
        .collect();
    points.sort_by_key(|p| (p.block, p.instr));
    points
}

/// Decide, for each fund point, whether every path from the entry crosses
/// a guard before reaching it.
///
/// Reachability from the entry is computed in a pruned graph: traversal
/// does not leave a block holding an assert guard, and leaves a branch
/// guard's block only along its failing edge. A point is unguarded iff its
/// block is reached in the pruned graph and no assert guard precedes it
/// within the block.
pub fn compute_guardedness(
    cfg: &Cfg,
    guards: &[GuardPoint],
    points: &[FundModPoint],
) -> GuardednessResult {
    let n = cfg.blocks.len();
    let mut result = GuardednessResult::default();
    let Some(entry) = cfg.entry else {
        return result;
    };
    let adj = cfg.adjacency();
    let reachable = cfg.reachable();

    let mut block_guards: Vec<Vec<&GuardPoint>> = vec![Vec::new(); n];
    for g in guards {
        block_guards[g.block].push(g);
    }
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut reached = vec![false; n];
    reached[entry] = true;
    let mut queue = VecDeque::from([entry]);
    while let Some(b) = queue.pop_front() {
        for e in &adj[b] {
            if block_guards[b].iter().any(|g| !g.passes(e)) || reached[e.to] {
                continue;
            }
            reached[e.to] = true;
            parent[e.to] = Some(b);
            queue.push_back(e.to);
        }
    }

    for p in points {
        let guardedness = if !reachable[p.block] {
            result.diagnostics.push(Diagnostic::note(
                p.location,
                format!("`{}` is unreachable from the program entry", p.opcode),
            ));
            Guardedness::Unreachable
        } else {
            let assert_before = block_guards[p.block]
                .iter()
                .any(|g| g.form == GuardForm::AssertGuard && g.instr < p.instr);
            if reached[p.block] && !assert_before {
                let mut witness = vec![p.block];
                let mut cur = p.block;
                while let Some(prev) = parent[cur] {
                    witness.push(prev);
                    cur = prev;
                }
                witness.reverse();
                Guardedness::Unguarded { witness }
            } else {
                Guardedness::Guarded {
                    guards: guards_on_paths(cfg, &adj, &reachable, guards, p),
                }
            }
        };
        result.points.push(PointGuardedness {
            point: p.clone(),
            guardedness,
        });
    }
    result
}

/// Guards that are reachable from the entry and from which `p` is reachable.
fn guards_on_paths(
    cfg: &Cfg,
    adj: &[Vec<Edge>],
    reachable: &[bool],
    guards: &[GuardPoint],
    p: &FundModPoint,
) -> Vec<usize> {
    let mut out = Vec::new();
    for (gi, g) in guards.iter().enumerate() {
        if !reachable[g.block] {
            continue;
        }
        if g.block == p.block && g.instr < p.instr {
            out.push(gi);
            continue;
        }
        let mut seen = vec![false; cfg.blocks.len()];
        let mut stack: Vec<usize> = adj[g.block]
            .iter()
            .filter(|e| g.form == GuardForm::AssertGuard || !g.passes(e))
            .map(|e| e.to)
            .collect();
        let mut hit = false;
        while let Some(b) = stack.pop() {
            if b == p.block {
                hit = true;
                break;
            }
            if std::mem::replace(&mut seen[b], true) {
                continue;
            }
            stack.extend(adj[b].iter().map(|e| e.to));
        }
        if hit {
            out.push(gi);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::teal::absint::abstract_exec_program;
    use crate::teal::cfg::build_cfg;
    use crate::teal::parser::parse_teal;

    struct Run {
        guards: Vec<GuardPoint>,
        points: Vec<FundModPoint>,
        result: GuardednessResult,
        diags: Vec<Diagnostic>,
    }

    fn run(src: &str) -> Run {
        let p = parse_teal(src, "t.teal");
        let c = build_cfg(&p);
        let cfg = AnalyzerConfig::default();
        let f = abstract_exec_program(&c, &p, &cfg);
        let (guards, diags) = find_guard_points(&p, &c, &f, &cfg);
        let points = find_fund_mod_points(&p, &f);
        let result = compute_guardedness(&c, &guards, &points);
        Run {
            guards,
            points,
            result,
            diags,
        }
    }

    const ASSERT_GUARD: &str = "byte \"manager\"\napp_global_get\ntxn Sender\n==\nassert\n";
    const BRANCH_GUARD: &str = "byte \"Creator\"\napp_global_get\ntxn Sender\n==\nint 1\n&&\nbz failed\nint 1\nreturn\nfailed:\nerr\n";
    const BALANCE_PUT: &str = "int 0\nbyte \"MyBalance\"\nint 5\napp_local_put\n";

    #[test]
    fn assert_guard() {
        let r = run(ASSERT_GUARD);
        assert_eq!(r.guards.len(), 1);
        assert_eq!(r.guards[0].form, GuardForm::AssertGuard);
        assert_eq!(r.guards[0].privileged_source, "app_global_get[\"manager\"]");
    }

    #[test]
    fn branch_guard() {
        let r = run(BRANCH_GUARD);
        assert_eq!(r.guards.len(), 1);
        assert_eq!(
            r.guards[0].form,
            GuardForm::BranchGuard {
                fail_target: 2,
                fail_kind: EdgeKind::BranchTaken
            }
        );
    }

    #[test]
    fn bnz_with_fallthrough_failure() {
        let r = run("txn Sender\nglobal CreatorAddress\n==\nbnz ok\nerr\nok:\nint 1\nreturn\n");
        assert_eq!(
            r.guards[0].form,
            GuardForm::BranchGuard {
                fail_target: 1,
                fail_kind: EdgeKind::BranchNotTaken
            }
        );
        let r = run(
            "txn Sender\nglobal CreatorAddress\n!=\nbnz bad\nint 1\nreturn\nbad:\nint 0\nreturn\n",
        );
        assert!(matches!(
            r.guards[0].form,
            GuardForm::BranchGuard { fail_target: 2, .. }
        ));
    }

    #[test]
    fn branch_without_failure_region_is_not_a_guard() {
        let r = run("byte \"Creator\"\napp_global_get\ntxn Sender\n==\nbz other\nint 1\nreturn\nother:\nint 1\nreturn\n");
        assert!(r.guards.is_empty());
        assert_eq!(r.diags.len(), 1);
    }

    #[test]
    fn self_comparison_is_not_a_guard() {
        assert!(run("txn Sender\ntxn Sender\n==\nassert\n")
            .guards
            .is_empty());
    }

    #[test]
    fn fund_point() {
        let r = run(BALANCE_PUT);
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.points[0].key, b"MyBalance");
        assert!(
            matches!(r.result.points[0].guardedness, Guardedness::Unguarded { ref witness } if witness == &[0])
        );
    }

    #[test]
    fn non_balance_key() {
        assert!(run("byte \"color\"\nbyte \"blue\"\napp_global_put\n")
            .points
            .is_empty());
        assert_eq!(
            run("byte \"userBalance\"\nint 1\napp_global_put\n")
                .points
                .len(),
            1
        );
    }

    #[test]
    fn assert_then_put() {
        let r = run(&format!("{ASSERT_GUARD}{BALANCE_PUT}"));
        assert_eq!(
            r.result.points[0].guardedness,
            Guardedness::Guarded { guards: vec![0] }
        );
    }

    #[test]
    fn put_before_assert_is_unguarded() {
        let r = run(&format!("{BALANCE_PUT}{ASSERT_GUARD}"));
        assert!(matches!(
            r.result.points[0].guardedness,
            Guardedness::Unguarded { .. }
        ));
    }

    #[test]
    fn branch_guard_protects_pass_side() {
        let src = "byte \"Creator\"\napp_global_get\ntxn Sender\n==\nbz failed\nint 0\nbyte \"MyBalance\"\nint 5\napp_local_put\nint 1\nreturn\nfailed:\nerr\n";
        let r = run(src);
        assert!(matches!(
            r.result.points[0].guardedness,
            Guardedness::Guarded { .. }
        ));
    }

    #[test]
    fn parallel_branches() {
        // entry bz to either the guard or the put
        let src = "txn OnCompletion\nbz put\nbyte \"manager\"\napp_global_get\ntxn Sender\n==\nassert\nint 1\nreturn\nput:\nint 0\nbyte \"MyBalance\"\nint 5\napp_local_put\nint 1\nreturn\n";
        let r = run(src);
        assert_eq!(r.guards.len(), 1);
        assert_eq!(
            r.result.points[0].guardedness,
            Guardedness::Unguarded {
                witness: vec![0, 2]
            }
        );
    }

    #[test]
    fn guard_on_one_of_two_merging_paths() {
        let src = "txn OnCompletion\nbz skip\nbyte \"manager\"\napp_global_get\ntxn Sender\n==\nassert\nskip:\nint 0\nbyte \"MyBalance\"\nint 5\napp_local_put\nint 1\nreturn\n";
        let r = run(src);
        assert!(
            matches!(r.result.points[0].guardedness, Guardedness::Unguarded { ref witness } if witness == &[0, 2])
        );
    }

    #[test]
    fn unreachable_put() {
        let src = "int 1\nreturn\nint 0\nbyte \"MyBalance\"\nint 5\napp_local_put\n";
        let r = run(src);
        assert_eq!(r.result.points[0].guardedness, Guardedness::Unreachable);
        assert_eq!(r.result.diagnostics.len(), 1);
    }

    #[test]
    fn loops_terminate() {
        let src = "top:\nint 0\nbyte \"MyBalance\"\nint 5\napp_local_put\nint 1\nbnz top\nint 1\nreturn\n";
        let r = run(src);
        assert!(matches!(
            r.result.points[0].guardedness,
            Guardedness::Unguarded { .. }
        ));
    }

    #[test]
    fn return_zero_counts_as_failure() {
        let src = "txn Sender\nbyte \"admin\"\napp_global_get\n==\nbnz ok\nint 0\nreturn\nok:\nint 0\nbyte \"MyBalance\"\nint 5\napp_local_put\nint 1\nreturn\n";
        let r = run(src);
        assert_eq!(r.guards.len(), 1);
        assert!(matches!(
            r.result.points[0].guardedness,
            Guardedness::Guarded { .. }
        ));
    }
}
