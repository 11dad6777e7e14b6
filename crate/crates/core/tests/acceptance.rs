//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines are always
//! printed; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use centriscan_core::diagnostic::Location;
use centriscan_core::solidity::{
    self, collect_state_vars, find_fund_modifications, find_sender_guards, FundModKind, GuardForm,
};
use centriscan_core::teal::{
    self, BasicBlock, Cfg, Edge, EdgeKind, FundModPoint, GuardForm as TealGuardForm, GuardPoint,
    Guardedness,
};
use centriscan_core::{
    analyze_file, assemble_report, render_report, scan_sources, AnalyzerConfig, EvidenceRole,
    Finding, FindingKind, Format, ScanReport, Severity, SourceFile,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

type Check = fn() -> Result<String, String>;
type SolSites = (Vec<GuardForm>, Vec<(FundModKind, String)>);
/// `(find, replace)`, applied once.
type Edit = (&'static str, &'static str);

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("solidity pattern corpus", solidity_patterns),
        ("teal pattern corpus", teal_patterns),
        ("negative corpus", negative_corpus),
        ("guardedness vs path enumeration", guardedness_oracle),
        ("robustness fuzzing", robustness),
        ("determinism", determinism),
        ("monotonicity", monotonicity),
        ("desk-scale throughput", throughput),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {}. {name}: {detail} [{}]", i + 1, ms(elapsed)),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {}. {name}: {detail} [{}]", i + 1, ms(elapsed));
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ms(d: Duration) -> String {
    format!("{:.1} ms", d.as_secs_f64() * 1e3)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || {
        format!("took {} (limit {})", ms(elapsed), ms(limit))
    })?;
    Ok(elapsed)
}

// ---------------------------------------------------------------- corpus

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

fn read(rel: &str) -> String {
    fs::read_to_string(corpus_dir().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Every corpus file as `(relative path, contents)`, sorted by path.
fn corpus_files() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for dir in ["solidity", "teal", "negative"] {
        let mut entries: Vec<_> = fs::read_dir(corpus_dir().join(dir))
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        entries.sort();
        for name in entries {
            let rel = format!("{dir}/{name}");
            out.push((rel.clone(), read(&rel)));
        }
    }
    out
}

fn scan_one(path: &str, text: &str) -> ScanReport {
    scan_sources(&[SourceFile::new(path, text)], &AnalyzerConfig::default())
}

fn kinds(findings: &[Finding]) -> Vec<FindingKind> {
    let mut k: Vec<FindingKind> = findings.iter().map(|f| f.kind).collect();
    k.sort();
    k
}

// --------------------------------------------------------- criterion 1

fn sol_sites(text: &str) -> SolSites {
    let unit = solidity::parse_str(text, "t.sol");
    let config = AnalyzerConfig::default();
    let mut guards = Vec::new();
    let mut funds = Vec::new();
    for c in &unit.contracts {
        guards.extend(find_sender_guards(c, &config).into_iter().map(|g| g.form));
        funds.extend(
            find_fund_modifications(c, &collect_state_vars(c), &config)
                .into_iter()
                .map(|s| (s.kind, s.target)),
        );
    }
    (guards, funds)
}

fn solidity_patterns() -> Result<String, String> {
    let start = Instant::now();
    let rows: [(&str, SolSites); 4] = [
        (
            "solidity/modifier_guard.sol",
            (vec![GuardForm::ModifierGuard], vec![]),
        ),
        (
            "solidity/require_guard.sol",
            (vec![GuardForm::RequireGuard], vec![]),
        ),
        ("solidity/if_guard.sol", (vec![GuardForm::IfGuard], vec![])),
        (
            "solidity/balance_write.sol",
            (
                vec![],
                vec![(FundModKind::BalanceMappingWrite, "bals".to_string())],
            ),
        ),
    ];
    for (file, want) in &rows {
        let got = sol_sites(&read(file));
        ensure(&got == want, || {
            format!("{file}: (guards, fund sites) = {got:?}")
        })?;
    }
    let report = scan_one("owner_drain.sol", &read("solidity/owner_drain.sol"));
    ensure(
        report.findings.len() == 1
            && report.findings[0].kind == FindingKind::CentralizationRisk
            && report.findings[0].severity == Severity::Major,
        || format!("owner_drain: {:?}", kinds(&report.findings)),
    )?;
    within(Duration::from_secs(1), start)?;
    Ok("each pattern gives exactly its site; modifier + balance write gives 1 MAJOR CENTRALIZATION_RISK".into())
}

// --------------------------------------------------------- criterion 2

struct TealRun {
    guards: Vec<GuardPoint>,
    points: Vec<FundModPoint>,
}

fn teal_run(text: &str) -> TealRun {
    let config = AnalyzerConfig::default();
    let program = teal::parse_teal(text, "t.teal");
    let cfg = teal::build_cfg(&program);
    let facts = teal::abstract_exec_program(&cfg, &program, &config);
    let (guards, _) = teal::find_guard_points(&program, &cfg, &facts, &config);
    let points = teal::find_fund_mod_points(&program, &facts);
    TealRun { guards, points }
}

fn teal_patterns() -> Result<String, String> {
    let start = Instant::now();
    let assert_guard = teal_run(&read("teal/assert_guard.teal"));
    ensure(
        assert_guard.guards.len() == 1
            && assert_guard.guards[0].form == TealGuardForm::AssertGuard
            && assert_guard.points.is_empty(),
        || {
            format!(
                "assert guard: {:?} / {} points",
                assert_guard.guards,
                assert_guard.points.len()
            )
        },
    )?;
    let branch_guard = teal_run(&read("teal/branch_guard.teal"));
    ensure(
        branch_guard.guards.len() == 1
            && matches!(
                branch_guard.guards[0].form,
                TealGuardForm::BranchGuard { .. }
            )
            && branch_guard.points.is_empty(),
        || {
            format!(
                "branch guard: {:?} / {} points",
                branch_guard.guards,
                branch_guard.points.len()
            )
        },
    )?;
    let balance_put = teal_run(&read("teal/balance_put.teal"));
    ensure(
        balance_put.guards.is_empty()
            && balance_put.points.len() == 1
            && balance_put.points[0].key == b"MyBalance",
        || {
            format!(
                "balance put: {} guards / {:?}",
                balance_put.guards.len(),
                balance_put.points
            )
        },
    )?;
    let both = scan_one("guard_put.teal", &read("teal/guard_put.teal"));
    ensure(
        kinds(&both.findings) == [FindingKind::CentralizationRisk],
        || format!("guard+put: {:?}", kinds(&both.findings)),
    )?;
    let alone = scan_one("put.teal", &read("teal/balance_put.teal"));
    ensure(
        kinds(&alone.findings) == [FindingKind::UnprotectedFundModification],
        || format!("put alone: {:?}", kinds(&alone.findings)),
    )?;
    within(Duration::from_secs(1), start)?;
    Ok("assert guard, branch guard, fund point; guard+put CENTRALIZATION_RISK; put alone UNPROTECTED".into())
}

// --------------------------------------------------------- criterion 3

fn negative_corpus() -> Result<String, String> {
    use FindingKind::{PrivilegedFunction as PF, UnprotectedFundModification as UFM};
    let expected: BTreeMap<&str, Vec<FindingKind>> = BTreeMap::from([
        ("bool_mapping.sol", vec![PF]),
        ("branch_without_failure.teal", vec![]),
        ("erc20_transfer.sol", vec![PF]),
        ("guard_only.sol", vec![PF]),
        ("guard_only.teal", vec![PF]),
        ("nested_mapping.sol", vec![PF]),
        ("non_balance_key.teal", vec![PF]),
        ("non_mapping_write.sol", vec![PF]),
        ("non_sender_assert.teal", vec![UFM]),
        ("non_sender_require.sol", vec![UFM]),
        ("self_comparison.sol", vec![UFM]),
        ("self_comparison.teal", vec![UFM]),
    ]);
    let files: Vec<(String, String)> = corpus_files()
        .into_iter()
        .filter(|(p, _)| p.starts_with("negative/"))
        .collect();
    ensure(files.len() >= 8, || {
        format!("only {} negative files", files.len())
    })?;
    for (path, text) in &files {
        let name = path.trim_start_matches("negative/");
        let want = expected
            .get(name)
            .ok_or_else(|| format!("{name}: no expectation recorded"))?;
        let report = scan_one(path, text);
        let got = kinds(&report.findings);
        ensure(&got == want, || {
            format!("{name}: expected {want:?}, got {got:?}")
        })?;
        for f in report.findings.iter().filter(|f| f.kind == PF) {
            ensure(f.severity == Severity::Info, || {
                format!("{name}: PF at {}", f.severity)
            })?;
        }
    }
    let privileged_only = expected.values().filter(|k| k == &&vec![PF]).count();
    Ok(format!(
        "{} programs, 0 CENTRALIZATION_RISK, {privileged_only} privileged-only cases at INFO",
        files.len()
    ))
}

// --------------------------------------------------------- criterion 4

const SLOTS: usize = 4;

struct RandomCase {
    cfg: Cfg,
    guards: Vec<GuardPoint>,
    points: Vec<FundModPoint>,
}

fn random_case(rng: &mut StdRng) -> RandomCase {
    let n = rng.gen_range(1..=12);
    let blocks: Vec<BasicBlock> = (0..n)
        .map(|b| BasicBlock {
            start: b * SLOTS,
            end: (b + 1) * SLOTS,
        })
        .collect();
    // mostly forward edges so that most blocks are reachable, plus some
    // back edges for loops
    let target = |rng: &mut StdRng, from: usize| {
        if from + 1 < n && rng.gen_bool(0.8) {
            rng.gen_range(from + 1..n)
        } else {
            rng.gen_range(0..n)
        }
    };
    let mut edges = Vec::new();
    for from in 0..n {
        match rng.gen_range(0..10) {
            0 => {}
            1..=4 => {
                let kind = if rng.gen_bool(0.5) {
                    EdgeKind::Fallthrough
                } else {
                    EdgeKind::BranchTaken
                };
                edges.push(Edge {
                    from,
                    to: target(rng, from),
                    kind,
                });
            }
            _ => {
                edges.push(Edge {
                    from,
                    to: target(rng, from),
                    kind: EdgeKind::BranchTaken,
                });
                edges.push(Edge {
                    from,
                    to: target(rng, from),
                    kind: EdgeKind::BranchNotTaken,
                });
            }
        }
    }
    let cfg = Cfg {
        blocks,
        edges,
        entry: Some(0),
        call_edges: Vec::new(),
        diagnostics: Vec::new(),
    };

    let mut guards: Vec<GuardPoint> = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let block = rng.gen_range(0..n);
        let outs: Vec<&Edge> = cfg.edges.iter().filter(|e| e.from == block).collect();
        let has_branch_guard = guards
            .iter()
            .any(|g| g.block == block && matches!(g.form, TealGuardForm::BranchGuard { .. }));
        let (form, instr) = if outs.len() == 2 && !has_branch_guard && rng.gen_bool(0.5) {
            let fail = outs[rng.gen_range(0..2)];
            (
                TealGuardForm::BranchGuard {
                    fail_target: fail.to,
                    fail_kind: fail.kind,
                },
                block * SLOTS + SLOTS - 1,
            )
        } else {
            (
                TealGuardForm::AssertGuard,
                block * SLOTS + rng.gen_range(0..SLOTS - 1),
            )
        };
        if guards.iter().any(|g| g.instr == instr) {
            continue;
        }
        guards.push(GuardPoint {
            block,
            instr,
            form,
            privileged_source: "g".into(),
            weakened: false,
            location: Location::new(instr as u32 + 1, 1),
        });
    }
    guards.sort_by_key(|g| g.instr);

    let mut points: Vec<FundModPoint> = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let block = rng.gen_range(0..n);
        let instr = block * SLOTS + rng.gen_range(0..SLOTS - 1);
        if guards.iter().any(|g| g.instr == instr) || points.iter().any(|p| p.instr == instr) {
            continue;
        }
        points.push(FundModPoint {
            block,
            instr,
            opcode: "app_local_put".into(),
            key: b"MyBalance".to_vec(),
            location: Location::new(instr as u32 + 1, 1),
        });
    }
    RandomCase {
        cfg,
        guards,
        points,
    }
}

/// Leaving `block` along `edge` crosses a guard.
fn crosses(guards: &[GuardPoint], block: usize, edge: &Edge) -> bool {
    guards.iter().any(|g| {
        g.block == block
            && match g.form {
                TealGuardForm::AssertGuard => true,
                TealGuardForm::BranchGuard { fail_kind, .. } => edge.kind != fail_kind,
            }
    })
}

fn assert_before(guards: &[GuardPoint], p: &FundModPoint) -> bool {
    guards
        .iter()
        .any(|g| g.block == p.block && g.form == TealGuardForm::AssertGuard && g.instr < p.instr)
}

/// Enumerate every entry path, visiting each block at most twice.
/// Returns whether some path reaches `p` and whether some path reaches it
/// without crossing a guard.
fn enumerate_paths(case: &RandomCase, p: &FundModPoint) -> (bool, bool) {
    struct Walk<'a> {
        case: &'a RandomCase,
        p: &'a FundModPoint,
        visits: Vec<u8>,
        reached: bool,
        avoided: bool,
    }
    impl Walk<'_> {
        fn go(&mut self, block: usize, clean: bool) {
            if block == self.p.block {
                self.reached = true;
                if clean && !assert_before(&self.case.guards, self.p) {
                    self.avoided = true;
                }
            }
            if self.reached && self.avoided {
                return;
            }
            for e in self.case.cfg.edges.iter().filter(|e| e.from == block) {
                if self.visits[e.to] >= 2 {
                    continue;
                }
                let still_clean = clean && !crosses(&self.case.guards, block, e);
                // a guarded walk can only contribute reachability
                if !still_clean && self.reached {
                    continue;
                }
                self.visits[e.to] += 1;
                self.go(e.to, still_clean);
                self.visits[e.to] -= 1;
            }
        }
    }
    let mut walk = Walk {
        case,
        p,
        visits: vec![0; case.cfg.blocks.len()],
        reached: false,
        avoided: false,
    };
    walk.visits[0] = 1;
    walk.go(0, true);
    (walk.reached, walk.avoided)
}

fn witness_is_valid(case: &RandomCase, p: &FundModPoint, witness: &[usize]) -> bool {
    witness.first() == Some(&0)
        && witness.last() == Some(&p.block)
        && !assert_before(&case.guards, p)
        && witness.windows(2).all(|w| {
            case.cfg
                .edges
                .iter()
                .any(|e| e.from == w[0] && e.to == w[1] && !crosses(&case.guards, w[0], e))
        })
}

fn guardedness_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x05ee_dcf6);
    let (mut cases, mut points) = (0, 0);
    let mut tally = [0usize; 3];
    while cases < 400 {
        let case = random_case(&mut rng);
        if case.points.is_empty() {
            continue;
        }
        cases += 1;
        let result = teal::compute_guardedness(&case.cfg, &case.guards, &case.points);
        ensure(result.points.len() == case.points.len(), || {
            "point count mismatch".into()
        })?;
        for pg in &result.points {
            points += 1;
            let (reached, avoided) = enumerate_paths(&case, &pg.point);
            let ok = match &pg.guardedness {
                Guardedness::Unreachable => {
                    tally[0] += 1;
                    !reached
                }
                Guardedness::Unguarded { witness } => {
                    tally[1] += 1;
                    avoided && witness_is_valid(&case, &pg.point, witness)
                }
                Guardedness::Guarded { guards } => {
                    tally[2] += 1;
                    reached
                        && !avoided
                        && !guards.is_empty()
                        && guards.iter().all(|&g| g < case.guards.len())
                }
            };
            ensure(ok, || {
                format!(
                    "case {cases}: edges {:?}, guards {:?}, point at block {} instr {}: got {:?}, oracle reached={reached} avoided={avoided}",
                    case.cfg.edges.iter().map(|e| (e.from, e.to, e.kind)).collect::<Vec<_>>(),
                    case.guards.iter().map(|g| (g.block, g.instr, g.form)).collect::<Vec<_>>(),
                    pg.point.block,
                    pg.point.instr,
                    pg.guardedness
                )
            })?;
        }
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!(
        "{cases} random CFGs, {points} fund points agree (unreachable {}, unguarded {}, guarded {})",
        tally[0], tally[1], tally[2]
    ))
}

// --------------------------------------------------------- criterion 5

fn mutate(rng: &mut StdRng, seed: &[u8]) -> Vec<u8> {
    let mut bytes = seed.to_vec();
    for _ in 0..rng.gen_range(1..=8) {
        if bytes.is_empty() {
            break;
        }
        let a = rng.gen_range(0..bytes.len());
        let b = rng.gen_range(a..=bytes.len().min(a + 24));
        match rng.gen_range(0..4) {
            0 => {
                bytes.drain(a..b);
            }
            1 => {
                let chunk = bytes[a..b].to_vec();
                let at = rng.gen_range(0..=bytes.len());
                bytes.splice(at..at, chunk);
            }
            2 => {
                const NOISE: &[&[u8]] = &[
                    b"{",
                    b"}",
                    b"(",
                    b")",
                    b";",
                    b"\"",
                    b"//",
                    b"/*",
                    b":",
                    b"\n",
                    b"\xff",
                    b"==",
                    b"_;",
                    b"bz",
                    b"msg.sender",
                ];
                let at = rng.gen_range(0..=bytes.len());
                bytes.splice(at..at, NOISE.choose(rng).unwrap().iter().copied());
            }
            _ => bytes[a] = rng.gen(),
        }
    }
    bytes
}

fn fuzz_input(rng: &mut StdRng, seeds: &[Vec<u8>]) -> Vec<u8> {
    let seed = seeds.choose(rng).unwrap();
    match rng.gen_range(0..3) {
        0 => (0..rng.gen_range(0..600)).map(|_| rng.gen()).collect(),
        1 => seed[..rng.gen_range(0..=seed.len())].to_vec(),
        _ => mutate(rng, seed),
    }
}

/// Report-level invariants that must hold for any input.
fn check_totality(report: &ScanReport, text_lines: usize) -> Result<(), String> {
    for f in &report.findings {
        ensure(f.severity == f.kind.severity(), || {
            format!("kind/severity mismatch: {f:?}")
        })?;
        if f.kind == FindingKind::CentralizationRisk {
            let has = |r| f.evidence.iter().any(|e| e.role == r);
            ensure(
                has(EvidenceRole::Guard) && has(EvidenceRole::FundModification),
                || format!("incomplete evidence: {f:?}"),
            )?;
        }
        ensure(f.line >= 1 && f.line as usize <= text_lines + 1, || {
            format!("location out of bounds: {f:?}")
        })?;
    }
    let c = report.counts;
    ensure(
        c.major + c.warning + c.info == report.findings.len(),
        || "counts do not add up".into(),
    )?;
    Ok(())
}

fn fuzz_frontend(ext: &str, seeds: &[Vec<u8>], seed: u64, n: usize) -> Result<usize, String> {
    let config = AnalyzerConfig::default();
    let mut rng = StdRng::seed_from_u64(seed);
    let inputs: Vec<Vec<u8>> = (0..n).map(|_| fuzz_input(&mut rng, seeds)).collect();
    let results: Vec<Result<usize, String>> = inputs
        .par_iter()
        .enumerate()
        .map(|(i, bytes)| {
            let file = SourceFile::new(format!("fuzz/{i}.{ext}"), bytes.clone());
            let analysis = catch_unwind(AssertUnwindSafe(|| analyze_file(&file, &config)))
                .map_err(|_| {
                    format!(
                        "crash on {ext} input #{i}: {:?}",
                        String::from_utf8_lossy(bytes)
                    )
                })?;
            let report = assemble_report(vec![analysis], &config);
            let lines = String::from_utf8_lossy(bytes).lines().count();
            check_totality(&report, lines).map_err(|e| format!("{ext} input #{i}: {e}"))?;
            Ok(report.findings.len())
        })
        .collect();
    results.into_iter().sum()
}

fn robustness() -> Result<String, String> {
    let corpus = corpus_files();
    let synthetic = centriscan_bench::synthetic_corpus(8, 120, 3);
    let seeds = |ext: &str| -> Vec<Vec<u8>> {
        corpus
            .iter()
            .chain(&synthetic)
            .filter(|(p, _)| p.ends_with(ext))
            .map(|(_, t)| t.clone().into_bytes())
            .collect()
    };
    // silence the default hook while deliberately catching panics
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let sol = fuzz_frontend("sol", &seeds(".sol"), 11, 10_000);
    let teal = fuzz_frontend("teal", &seeds(".teal"), 12, 10_000);
    std::panic::set_hook(hook);
    let (sol, teal) = (sol?, teal?);
    Ok(format!(
        "10000 solidity + 10000 teal inputs, 0 crashes, invariants hold ({sol} + {teal} findings)"
    ))
}

// --------------------------------------------------------- criterion 6

fn determinism() -> Result<String, String> {
    let config = AnalyzerConfig::default();
    let mut files: Vec<SourceFile> = corpus_files()
        .into_iter()
        .chain(centriscan_bench::synthetic_corpus(12, 200, 9))
        .map(|(p, t)| SourceFile::new(p, t))
        .collect();
    let first = render_report(&scan_sources(&files, &config), Format::Json);
    let second = render_report(&scan_sources(&files, &config), Format::Json);
    ensure(first == second, || "two scans differ".into())?;
    let mut rng = StdRng::seed_from_u64(6);
    for round in 0..10 {
        files.shuffle(&mut rng);
        let shuffled = render_report(&scan_sources(&files, &config), Format::Json);
        ensure(shuffled == first, || {
            format!("shuffle {round} changed the report")
        })?;
    }
    let report = scan_sources(&files, &config);
    Ok(format!(
        "{} files, {} findings; 2 runs + 10 shuffles byte-identical",
        files.len(),
        report.findings.len()
    ))
}

// --------------------------------------------------------- criterion 7

/// (file, guard deletion, second-guard insertion); each edit is a
/// `(find, replace)` pair applied once.
const MUTATIONS: &[(&str, Edit, Edit)] = &[
    (
        "solidity/modifier_guard.sol",
        ("        require(msg.sender == owner);\n", ""),
        (
            "only_owner { }",
            "only_owner { require(msg.sender == owner); }",
        ),
    ),
    (
        "solidity/require_guard.sol",
        ("        require(address(owner) == msg.sender);\n", ""),
        (
            "public {\n",
            "public {\n        require(msg.sender == owner);\n",
        ),
    ),
    (
        "solidity/if_guard.sol",
        ("        if (msg.sender == owner) {\n        }\n", ""),
        (
            "public {\n",
            "public {\n        require(msg.sender == owner);\n",
        ),
    ),
    (
        "solidity/owner_drain.sol",
        ("        require(msg.sender == owner);\n", ""),
        (
            "only_owner {\n",
            "only_owner {\n        require(owner == msg.sender);\n",
        ),
    ),
    (
        "negative/non_mapping_write.sol",
        ("        require(msg.sender == owner);\n", ""),
        (
            "onlyOwner {\n",
            "onlyOwner {\n        require(msg.sender == owner);\n",
        ),
    ),
    (
        "negative/guard_only.sol",
        ("        require(admin == msg.sender, \"not admin\");\n", ""),
        (
            "external {\n",
            "external {\n        require(msg.sender == owner);\n",
        ),
    ),
    (
        "negative/nested_mapping.sol",
        ("        require(msg.sender == owner);\n", ""),
        (
            "public {\n",
            "public {\n        if (msg.sender != admin) revert();\n",
        ),
    ),
    (
        "negative/erc20_transfer.sol",
        ("        require(msg.sender == owner);\n", ""),
        (
            "public {\n",
            "public {\n        require(msg.sender == admin);\n",
        ),
    ),
    (
        "negative/bool_mapping.sol",
        (
            "        if (msg.sender == owner) {\n            allowed[who] = true;\n        }\n",
            "        allowed[who] = true;\n",
        ),
        (
            "public {\n",
            "public {\n        require(msg.sender == owner);\n",
        ),
    ),
    (
        "teal/assert_guard.teal",
        (
            "byte \"manager\"\napp_global_get\ntxn Sender\n==\nassert\n",
            "",
        ),
        (
            "assert\n",
            "assert\ntxn Sender\nglobal CreatorAddress\n==\nassert\n",
        ),
    ),
    (
        "teal/branch_guard.teal",
        (
            "byte \"Creator\"\napp_global_get\ntxn Sender\n==\nint 1\n&&\nbz failed\n",
            "",
        ),
        (
            "byte \"Creator\"",
            "txn Sender\nglobal CreatorAddress\n==\nassert\nbyte \"Creator\"",
        ),
    ),
    (
        "teal/guard_put.teal",
        (
            "byte \"manager\"\napp_global_get\ntxn Sender\n==\nassert\n",
            "",
        ),
        (
            "assert\n",
            "assert\ntxn Sender\nglobal CreatorAddress\n==\nassert\n",
        ),
    ),
    (
        "negative/non_balance_key.teal",
        (
            "byte \"manager\"\napp_global_get\ntxn Sender\n==\nassert\n",
            "",
        ),
        (
            "assert\n",
            "assert\ntxn Sender\nglobal CreatorAddress\n==\nassert\n",
        ),
    ),
    (
        "negative/guard_only.teal",
        (
            "global CreatorAddress\ntxn Sender\n==\nbnz ok\nerr\nok:\n",
            "",
        ),
        (
            "#pragma version 5\n",
            "#pragma version 5\ntxn Sender\nbyte \"admin\"\napp_global_get\n==\nassert\n",
        ),
    ),
];

fn edit(text: &str, (find, replace): (&str, &str), file: &str) -> Result<String, String> {
    ensure(text.contains(find), || {
        format!("{file}: edit anchor {find:?} not found")
    })?;
    Ok(text.replacen(find, replace, 1))
}

/// Expected findings once every guard is gone: centralization findings
/// become unprotected ones, privileged-only findings disappear.
fn without_guards(before: &[FindingKind]) -> Vec<FindingKind> {
    let mut out: Vec<FindingKind> = before
        .iter()
        .filter_map(|k| match k {
            FindingKind::CentralizationRisk => Some(FindingKind::UnprotectedFundModification),
            FindingKind::PrivilegedFunction => None,
            FindingKind::UnprotectedFundModification => Some(*k),
        })
        .collect();
    out.sort();
    out
}

/// What an added guard must preserve. Solidity reports per function, so
/// the multiset of kinds is compared; TEAL reports guard-only programs
/// once per guard, so there the privileged inventory is compared by kind.
fn signature(path: &str, findings: &[Finding]) -> (Vec<FindingKind>, bool) {
    let k = kinds(findings);
    if path.ends_with(".teal") {
        let has_pf = k.contains(&FindingKind::PrivilegedFunction);
        (
            k.into_iter()
                .filter(|k| *k != FindingKind::PrivilegedFunction)
                .collect(),
            has_pf,
        )
    } else {
        (k, false)
    }
}

fn monotonicity() -> Result<String, String> {
    let mut guarded_files = 0;
    for (file, delete, add) in MUTATIONS {
        let text = read(file);
        let before = scan_one(file, &text);
        let before_kinds = kinds(&before.findings);
        ensure(
            before_kinds.iter().any(|k| {
                matches!(
                    k,
                    FindingKind::CentralizationRisk | FindingKind::PrivilegedFunction
                )
            }),
            || format!("{file}: no guard-dependent finding to start from"),
        )?;
        guarded_files += 1;

        let stripped = scan_one(file, &edit(&text, *delete, file)?);
        let want = without_guards(&before_kinds);
        let got = kinds(&stripped.findings);
        ensure(got == want, || {
            format!("{file}: deleting the guard gave {got:?}, expected {want:?}")
        })?;

        let doubled = scan_one(file, &edit(&text, *add, file)?);
        ensure(
            signature(file, &doubled.findings) == signature(file, &before.findings),
            || {
                format!(
                    "{file}: adding a guard changed {before_kinds:?} to {:?}",
                    kinds(&doubled.findings)
                )
            },
        )?;
    }
    let all_guarded = corpus_files()
        .iter()
        .filter(|(p, t)| {
            scan_one(p, t).findings.iter().any(|f| {
                matches!(
                    f.kind,
                    FindingKind::CentralizationRisk | FindingKind::PrivilegedFunction
                )
            })
        })
        .count();
    ensure(all_guarded == guarded_files, || {
        format!("{all_guarded} corpus files have guards but {guarded_files} are covered")
    })?;
    Ok(format!(
        "{guarded_files} guarded corpus programs: delete flips, second guard is a no-op"
    ))
}

// --------------------------------------------------------- criterion 8

fn throughput() -> Result<String, String> {
    let config = AnalyzerConfig::default();
    let files: Vec<SourceFile> = centriscan_bench::synthetic_corpus(100, 500, 42)
        .into_iter()
        .map(|(p, t)| SourceFile::new(p, t))
        .collect();
    let lines: usize = files
        .iter()
        .map(|f| String::from_utf8_lossy(&f.bytes).lines().count())
        .sum();
    let start = Instant::now();
    let report = scan_sources(&files, &config);
    let elapsed = within(Duration::from_secs(1), start)?;
    ensure(
        report.files_scanned == 100 && !report.findings.is_empty(),
        || "synthetic corpus was not analyzed".into(),
    )?;
    Ok(format!(
        "100 files / {lines} lines in {} ({} findings)",
        ms(elapsed),
        report.findings.len()
    ))
}
