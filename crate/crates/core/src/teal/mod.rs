//! TEAL front end and detectors.
//!
//! Pipeline: [`parse_teal`] → [`build_cfg`] → [`abstract_exec_block`] per
//! block → [`find_guard_points`] / [`find_fund_mod_points`] →
//! [`compute_guardedness`].

pub mod absint;
pub mod cfg;
pub mod detectors;
pub mod opcodes;
pub mod parser;

pub use absint::{
    abstract_exec_block, abstract_exec_program, AbstractValue, BlockFacts, InstrFact, Polarity,
};
pub use cfg::{build_cfg, BasicBlock, Cfg, Edge, EdgeKind};
pub use detectors::{
    compute_guardedness, failure_blocks, find_fund_mod_points, find_guard_points, FundModPoint,
    GuardForm, GuardPoint, Guardedness, GuardednessResult, PointGuardedness,
};
pub use opcodes::StackEffect;
pub use parser::{parse_teal, Instruction, TealProgram};
