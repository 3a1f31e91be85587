//! Word-level reversible registers, the desynchronization scheduler,
//! modular arithmetic building blocks and the cost ledger.

mod arith;
mod ledger;
mod registers;
mod scheduler;

pub use arith::*;
pub use ledger::{CostClass, CostLedger, CostWeights};
pub use registers::{RegId, Register, RegisterFile};
pub use scheduler::{cycle, schedule_step, uncycle, unschedule_step, DesyncMachine, SchedulerState};

use thiserror::Error;

/// Hard simulation faults. Modeled fidelity losses are never faults.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Fault {
    #[error("domain fault: {0}")]
    Domain(String),
    #[error("division by zero")]
    DivByZero,
    #[error("output register not zero on entry")]
    NonzeroTarget,
    #[error("register {register} overflows its {width}-bit width (needs {needed:?})")]
    Width { register: String, width: u64, needed: Option<u64> },
    #[error("predicate fault: {0}")]
    Predicate(String),
    #[error("irreversible: {0}")]
    Irreversible(String),
    #[error("invariant breach: {0}")]
    Invariant(String),
}
