use std::collections::BTreeSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::pcg::{RecoveryMode, SolveConfig};
use crate::pstore::Media;
use crate::rma::{CostModel, SimTime};

/// Where durable memory lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// Every compute node has its own durable memory.
    Homogeneous,
    /// One dedicated persistent-recovery-data node outside the compute set.
    PrdSubcluster,
}

impl Architecture {
    pub fn for_mode(mode: RecoveryMode) -> Self {
        if mode == RecoveryMode::NvmPrd {
            Architecture::PrdSubcluster
        } else {
            Architecture::Homogeneous
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    /// Compute nodes (the PRD node, if any, is extra).
    pub nodes: usize,
    pub slots_per_node: usize,
    pub proc: usize,
    /// Compute rank → node.
    pub mapping: Vec<usize>,
    pub seed: u64,
    /// Volatile memory per node, bytes.
    pub mem_v: Option<u64>,
    /// Durable memory per node, bytes.
    pub mem_nv: Option<u64>,
    pub architecture: Architecture,
    pub node_recovery_delay: SimTime,
    pub cost: CostModel,
    pub media: Media,
}

impl ClusterConfig {
    /// `proc` ranks packed onto nodes of `slots_per_node` slots, plus one
    /// spare node for replacements.
    pub fn packed(proc: usize, slots_per_node: usize, architecture: Architecture) -> Self {
        let t = slots_per_node.max(1);
        Self {
            nodes: proc.div_ceil(t) + 1,
            slots_per_node: t,
            proc,
            mapping: (0..proc).map(|s| s / t).collect(),
            seed: 0,
            mem_v: None,
            mem_nv: None,
            architecture,
            node_recovery_delay: 100_000,
            cost: CostModel::default(),
            media: Media::Memory,
        }
    }

    /// Node index of the PRD rank.
    pub fn prd_node(&self) -> Option<usize> {
        (self.architecture == Architecture::PrdSubcluster).then_some(self.nodes)
    }

    pub fn validate(&self, solve: &SolveConfig) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.proc == 0 || self.nodes == 0 || self.slots_per_node == 0 {
            return bad("proc, nodes and slots per node must be positive".into());
        }
        if self.proc > self.nodes * self.slots_per_node {
            return bad(format!(
                "proc = {} exceeds t·N = {}",
                self.proc,
                self.nodes * self.slots_per_node
            ));
        }
        if self.mapping.len() != self.proc {
            return bad(format!("mapping has {} entries for {} ranks", self.mapping.len(), self.proc));
        }
        let mut load = vec![0; self.nodes];
        for (s, &node) in self.mapping.iter().enumerate() {
            if node >= self.nodes {
                return bad(format!("rank {s} mapped to missing node {node}"));
            }
            load[node] += 1;
        }
        if let Some(node) = load.iter().position(|&l| l > self.slots_per_node) {
            return bad(format!("node {node} hosts more than {} ranks", self.slots_per_node));
        }
        match (solve.recovery_mode, self.architecture) {
            (RecoveryMode::NvmPrd, Architecture::Homogeneous) => {
                return bad("nvm_prd needs the PRD sub-cluster architecture".into())
            }
            (RecoveryMode::NvmLocal, Architecture::PrdSubcluster) => {
                return bad("nvm_local needs durable memory on every compute node".into())
            }
            _ => {}
        }
        solve.validate(self.proc).map_err(|e| SimError::Config(e.to_string()))
    }
}

/// When in the iteration a fault strikes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultPhase {
    Compute,
    /// During the persistence round, after `cut` bytes of the victim's own
    /// transfer or durable write sequence.
    MidPersist { cut: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultEvent {
    pub iteration: u64,
    pub phase: FaultPhase,
    pub victims: BTreeSet<usize>,
}

impl FromStr for FaultEvent {
    type Err = String;

    /// `j:compute:1,4` or `j:mid_persist@CUT:2`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [j, phase, ranks] = parts[..] else {
            return Err(format!("fault '{s}' is not of the form j:phase:ranks"));
        };
        let iteration = j.parse().map_err(|_| format!("bad iteration '{j}' in fault '{s}'"))?;
        let phase = match phase.split_once('@') {
            None if phase == "compute" => FaultPhase::Compute,
            None if phase == "mid_persist" => FaultPhase::MidPersist { cut: 0 },
            Some(("mid_persist", cut)) => FaultPhase::MidPersist {
                cut: cut.parse().map_err(|_| format!("bad cut point '{cut}' in fault '{s}'"))?,
            },
            _ => return Err(format!("unknown phase '{phase}' in fault '{s}'")),
        };
        let victims = ranks
            .split(',')
            .map(|r| r.trim().parse::<usize>().map_err(|_| format!("bad rank '{r}' in fault '{s}'")))
            .collect::<Result<BTreeSet<_>, _>>()?;
        if victims.is_empty() {
            return Err(format!("fault '{s}' names no ranks"));
        }
        Ok(Self { iteration, phase, victims })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FaultPlan {
    pub events: Vec<FaultEvent>,
}

impl FaultPlan {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn parse(specs: &[impl AsRef<str>]) -> Result<Self, String> {
        Ok(Self { events: specs.iter().map(|s| s.as_ref().parse()).collect::<Result<_, _>>()? })
    }

    /// Victims must be compute ranks (the PRD rank is a single point of
    /// failure by design) and mid-persist faults need a persistence round at
    /// their iteration.
    pub fn validate(&self, cluster: &ClusterConfig, solve: &SolveConfig) -> Result<(), SimError> {
        let mut seen = BTreeSet::new();
        for e in &self.events {
            for &v in &e.victims {
                if cluster.prd_node().is_some() && v == cluster.proc {
                    return Err(SimError::InvalidPlan(format!("rank {v} is the PRD rank and cannot be a victim")));
                }
                if v >= cluster.proc {
                    return Err(SimError::InvalidPlan(format!("victim {v} is not a compute rank")));
                }
            }
            let mid = matches!(e.phase, FaultPhase::MidPersist { .. });
            if mid && !solve.is_commit_iteration(e.iteration) {
                return Err(SimError::InvalidPlan(format!(
                    "no persistence round at iteration {} for a mid-persist fault",
                    e.iteration
                )));
            }
            if !seen.insert((e.iteration, mid)) {
                return Err(SimError::InvalidPlan(format!("duplicate fault at iteration {}", e.iteration)));
            }
        }
        Ok(())
    }
}
