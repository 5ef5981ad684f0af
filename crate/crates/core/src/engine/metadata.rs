use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use super::SymState;
use crate::circuit::StateId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MetaKind {
    Reach,
    States,
}

/// One observed output value on a transition.
///
/// Identity is `(src, dst, output, value)`; the witness rides along for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct Behavior {
    pub src: StateId,
    pub dst: StateId,
    pub output: String,
    pub value: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, u64>>,
}

impl Behavior {
    pub fn new(src: StateId, dst: StateId, output: impl Into<String>, value: u64) -> Self {
        Behavior {
            src,
            dst,
            output: output.into(),
            value,
            witness: None,
        }
    }

    fn key(&self) -> (StateId, StateId, &str, u64) {
        (self.src, self.dst, self.output.as_str(), self.value)
    }
}

impl PartialEq for Behavior {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Behavior {}

impl Hash for Behavior {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for Behavior {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Behavior {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Warning {
    /// The last explicit layer still discovered new states.
    DepthNotConverged { depth: u32 },
    /// Pruning keys on the projection only, but these registers feed it.
    PruningMayUnderApproximate { registers: Vec<String> },
    /// Fixpoint search hit its layer cap.
    FixpointCapReached { layers: u32 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DepthNotConverged { depth } => {
                write!(f, "DepthNotConverged: layer {depth} still discovered new states")
            }
            Warning::PruningMayUnderApproximate { registers } => write!(
                f,
                "pruning keys on the state projection but non-state registers feed it: {}",
                registers.join(", ")
            ),
            Warning::FixpointCapReached { layers } => {
                write!(f, "fixpoint exploration stopped at the {layers}-layer cap")
            }
        }
    }
}

/// Products of one exploration.
#[derive(Debug, Clone)]
pub struct Metadata {
    pub kind: MetaKind,
    pub rs: BTreeSet<StateId>,
    pub trans: BTreeSet<(StateId, StateId)>,
    pub rbs: BTreeSet<Behavior>,
    pub sym_states: Vec<SymState>,
    pub discovered_diameter: Option<u32>,
    pub paths_explored: u64,
    pub paths_pruned: u64,
    pub warnings: Vec<Warning>,
}

impl Metadata {
    pub fn new(kind: MetaKind) -> Self {
        Metadata {
            kind,
            rs: BTreeSet::new(),
            trans: BTreeSet::new(),
            rbs: BTreeSet::new(),
            sym_states: Vec::new(),
            discovered_diameter: None,
            paths_explored: 0,
            paths_pruned: 0,
            warnings: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_does_not_affect_identity() {
        let a = Behavior::new(StateId(5), StateId(0), "outValid", 1);
        let mut b = a.clone();
        b.witness = Some(BTreeMap::from([("inValid".to_string(), 1)]));
        assert_eq!(a, b);
        let set: BTreeSet<_> = [a, b].into_iter().collect();
        assert_eq!(set.len(), 1);
    }
}
