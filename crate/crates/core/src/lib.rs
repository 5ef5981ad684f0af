//! Symbolic detection of don't-care transitions and DCT-triggered hardware
//! Trojans in synchronous sequential circuits.

pub mod circuit;
pub mod detect;
pub mod engine;
pub mod symcore;
pub mod trojanlab;

pub use circuit::{parse_blif, parse_rtl, print_rtl, Circuit, CircuitError, StateId, StateSpec};
pub use detect::{
    compute_dct, detect_trojan, diff_behaviors, oracle_analyze, DctReport, DetectError, TransitionRow, TrojanReport,
    Verdict, Witness,
};
pub use engine::{explore, Behavior, Depth, EngineError, ExploreConfig, MetaKind, Metadata, Mode, Warning};
pub use symcore::{ExprId, ExprStore, SolverError, SolverLimits};
pub use trojanlab::{gen_random_fsm, inject_trojan, FsmParams, PayloadSpec, TriggerSpec, TrojanError};
