//! Instances and schedules: the job DAG, the hybrid network, and the
//! per-task / per-edge placement decisions.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::time::{TimeUnits, DEFAULT_TICKS_PER_SECOND};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TaskId(pub u32);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    #[serde(rename = "p")]
    pub processing_time: TimeUnits,
}

impl Task {
    pub fn new(id: u32, processing_time: u64) -> Self {
        Task {
            id: TaskId(id),
            processing_time: TimeUnits(processing_time),
        }
    }
}

/// Intermediate data flowing from `producer` to `consumer`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataEdge {
    #[serde(rename = "u")]
    pub producer: TaskId,
    #[serde(rename = "v")]
    pub consumer: TaskId,
    /// Megabits.
    #[serde(rename = "d")]
    pub data_size: u64,
    /// Delay when both endpoints share a rack.
    #[serde(rename = "r", default)]
    pub local_delay: TimeUnits,
}

impl DataEdge {
    pub fn new(producer: u32, consumer: u32, data_size: u64, local_delay: u64) -> Self {
        DataEdge {
            producer: TaskId(producer),
            consumer: TaskId(consumer),
            data_size,
            local_delay: TimeUnits(local_delay),
        }
    }

    pub fn key(&self) -> EdgeKey {
        EdgeKey {
            producer: self.producer,
            consumer: self.consumer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    pub producer: TaskId,
    pub consumer: TaskId,
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.producer, self.consumer)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobGraph {
    pub tasks: Vec<Task>,
    pub edges: Vec<DataEdge>,
}

/// A structural defect reported by [`validate_job`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Error)]
pub enum JobError {
    #[error("duplicate task id {0}")]
    DuplicateTask(TaskId),
    #[error("task {0} has non-positive processing time")]
    NonPositiveTime(TaskId),
    #[error("edge {edge} references unknown task {missing}")]
    DanglingEndpoint { edge: EdgeKey, missing: TaskId },
    #[error("self-loop on task {0}")]
    SelfLoop(TaskId),
    #[error("duplicate edge {0}")]
    DuplicateEdge(EdgeKey),
    #[error("cycle through tasks {0:?}")]
    Cycle(Vec<TaskId>),
}

/// Returns every structural defect of `job`; empty means the job is a
/// well-formed DAG with positive processing times.
pub fn validate_job(job: &JobGraph) -> Vec<JobError> {
    let mut errors = Vec::new();
    let mut ids = BTreeSet::new();
    for t in &job.tasks {
        if !ids.insert(t.id) {
            errors.push(JobError::DuplicateTask(t.id));
        }
        if t.processing_time.0 == 0 {
            errors.push(JobError::NonPositiveTime(t.id));
        }
    }
    let mut seen = BTreeSet::new();
    let mut usable = Vec::new();
    for e in &job.edges {
        let key = e.key();
        let mut ok = true;
        for end in [e.producer, e.consumer] {
            if !ids.contains(&end) {
                errors.push(JobError::DanglingEndpoint {
                    edge: key,
                    missing: end,
                });
                ok = false;
            }
        }
        if e.producer == e.consumer {
            errors.push(JobError::SelfLoop(e.producer));
            ok = false;
        }
        if !seen.insert(key) {
            errors.push(JobError::DuplicateEdge(key));
            ok = false;
        }
        if ok {
            usable.push(key);
        }
    }
    let order = kahn(&ids, &usable);
    if order.len() < ids.len() {
        let placed: BTreeSet<_> = order.into_iter().collect();
        let stuck = ids.difference(&placed).copied().collect();
        errors.push(JobError::Cycle(stuck));
    }
    errors
}

/// Kahn's algorithm with smallest-id-first tie breaking. Returns a partial
/// order when the graph has a cycle.
fn kahn(ids: &BTreeSet<TaskId>, edges: &[EdgeKey]) -> Vec<TaskId> {
    let mut indeg: HashMap<TaskId, usize> = ids.iter().map(|&id| (id, 0)).collect();
    let mut out: HashMap<TaskId, Vec<TaskId>> = HashMap::new();
    for e in edges {
        *indeg.get_mut(&e.consumer).expect("validated endpoint") += 1;
        out.entry(e.producer).or_default().push(e.consumer);
    }
    let mut heap: BinaryHeap<Reverse<TaskId>> = indeg
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&id, _)| Reverse(id))
        .collect();
    let mut order = Vec::with_capacity(ids.len());
    while let Some(Reverse(id)) = heap.pop() {
        order.push(id);
        for next in out.get(&id).into_iter().flatten() {
            let d = indeg.get_mut(next).expect("validated endpoint");
            *d -= 1;
            if *d == 0 {
                heap.push(Reverse(*next));
            }
        }
    }
    order
}

/// Topological order of the tasks; ties are broken by ascending id.
pub fn topological_order(job: &JobGraph) -> Result<Vec<TaskId>> {
    let errors = validate_job(job);
    if !errors.is_empty() {
        return Err(Error::InvalidJob(errors));
    }
    let ids = job.tasks.iter().map(|t| t.id).collect();
    let edges: Vec<_> = job.edges.iter().map(DataEdge::key).collect();
    Ok(kahn(&ids, &edges))
}

fn default_ticks() -> u64 {
    DEFAULT_TICKS_PER_SECOND
}

fn is_default_ticks(t: &u64) -> bool {
    *t == DEFAULT_TICKS_PER_SECOND
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    #[serde(rename = "racks")]
    pub rack_count: u32,
    #[serde(rename = "subchannels")]
    pub subchannel_count: u32,
    /// Mbps of the shared wired channel.
    #[serde(rename = "wired_bw")]
    pub wired_bandwidth: u64,
    /// Mbps of each wireless subchannel.
    #[serde(rename = "wireless_bw")]
    pub wireless_bandwidth: u64,
    /// Time granularity; omitted from JSON when it is the 1 ms default.
    #[serde(default = "default_ticks", skip_serializing_if = "is_default_ticks")]
    pub ticks_per_second: u64,
}

impl NetworkConfig {
    /// 10 Gbps wired and wireless links at 1 ms granularity.
    pub fn new(rack_count: u32, subchannel_count: u32) -> Self {
        NetworkConfig {
            rack_count,
            subchannel_count,
            wired_bandwidth: 10_000,
            wireless_bandwidth: 10_000,
            ticks_per_second: DEFAULT_TICKS_PER_SECOND,
        }
    }

    pub fn with_racks(&self, rack_count: u32) -> Self {
        NetworkConfig {
            rack_count,
            ..self.clone()
        }
    }

    pub fn with_subchannels(&self, subchannel_count: u32) -> Self {
        NetworkConfig {
            subchannel_count,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rack_count == 0 {
            return Err(Error::InvalidNetwork("rack count must be at least 1".into()));
        }
        if self.wired_bandwidth == 0 || self.wireless_bandwidth == 0 {
            return Err(Error::InvalidNetwork("bandwidths must be positive".into()));
        }
        if self.ticks_per_second == 0 {
            return Err(Error::InvalidNetwork("ticks_per_second must be positive".into()));
        }
        Ok(())
    }

    /// Data size (Mbit) whose wired transfer takes exactly `ticks`.
    pub fn data_size_for_wired(&self, ticks: u64) -> u64 {
        let num = ticks as u128 * self.wired_bandwidth as u128;
        (num / self.ticks_per_second as u128) as u64
    }
}

fn ceil_ticks(data_size: u64, bandwidth: u64, ticks_per_second: u64) -> TimeUnits {
    let num = data_size as u128 * ticks_per_second as u128;
    let den = bandwidth as u128;
    TimeUnits(num.div_ceil(den) as u64)
}

/// Wired and wireless transfer times of `edge`, rounded up to whole ticks.
pub fn transfer_durations(edge: &DataEdge, network: &NetworkConfig) -> (TimeUnits, TimeUnits) {
    (
        ceil_ticks(edge.data_size, network.wired_bandwidth, network.ticks_per_second),
        ceil_ticks(edge.data_size, network.wireless_bandwidth, network.ticks_per_second),
    )
}

/// Dense, id-sorted view of a validated job.
#[derive(Debug, Clone)]
pub(crate) struct JobIndex {
    pub pos: HashMap<TaskId, usize>,
    pub edge_pos: HashMap<EdgeKey, usize>,
    pub src: Vec<usize>,
    pub dst: Vec<usize>,
    /// Incoming edge indices per task.
    pub preds: Vec<Vec<usize>>,
    /// Outgoing edge indices per task.
    pub succs: Vec<Vec<usize>>,
    pub topo: Vec<usize>,
}

/// A validated job together with the network it runs on. Tasks are kept
/// sorted by id and edges by (producer, consumer).
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    job: JobGraph,
    network: NetworkConfig,
    index: JobIndex,
}

impl PartialEq for ProblemInstance {
    fn eq(&self, other: &Self) -> bool {
        self.job == other.job && self.network == other.network
    }
}

impl ProblemInstance {
    pub fn new(mut job: JobGraph, network: NetworkConfig) -> Result<Self> {
        let errors = validate_job(&job);
        if !errors.is_empty() {
            return Err(Error::InvalidJob(errors));
        }
        network.validate()?;
        job.tasks.sort_by_key(|t| t.id);
        job.edges.sort_by_key(DataEdge::key);

        let pos: HashMap<_, _> = job.tasks.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
        let n = job.tasks.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        let mut src = Vec::with_capacity(job.edges.len());
        let mut dst = Vec::with_capacity(job.edges.len());
        let mut edge_pos = HashMap::new();
        for (ei, e) in job.edges.iter().enumerate() {
            let (u, v) = (pos[&e.producer], pos[&e.consumer]);
            src.push(u);
            dst.push(v);
            succs[u].push(ei);
            preds[v].push(ei);
            edge_pos.insert(e.key(), ei);
        }
        let topo = topological_order(&job)?
            .into_iter()
            .map(|id| pos[&id])
            .collect();
        let index = JobIndex {
            pos,
            edge_pos,
            src,
            dst,
            preds,
            succs,
            topo,
        };
        Ok(ProblemInstance {
            job,
            network,
            index,
        })
    }

    pub fn job(&self) -> &JobGraph {
        &self.job
    }

    pub fn network(&self) -> &NetworkConfig {
        &self.network
    }

    pub fn tasks(&self) -> &[Task] {
        &self.job.tasks
    }

    pub fn edges(&self) -> &[DataEdge] {
        &self.job.edges
    }

    /// Same job on a different network.
    pub fn with_network(&self, network: NetworkConfig) -> Result<Self> {
        network.validate()?;
        Ok(ProblemInstance {
            job: self.job.clone(),
            network,
            index: self.index.clone(),
        })
    }

    pub(crate) fn index(&self) -> &JobIndex {
        &self.index
    }

    pub fn task(&self, id: TaskId) -> Option<&Task> {
        self.index.pos.get(&id).map(|&i| &self.job.tasks[i])
    }

    pub fn edge(&self, key: EdgeKey) -> Option<&DataEdge> {
        self.index.edge_pos.get(&key).map(|&i| &self.job.edges[i])
    }

    /// (wired, wireless) duration per edge, in edge order.
    pub fn durations(&self) -> Vec<(TimeUnits, TimeUnits)> {
        self.job
            .edges
            .iter()
            .map(|e| transfer_durations(e, &self.network))
            .collect()
    }
}

/// Where the data of one edge travels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// Intra-rack availability: no shared resource, delay `r`.
    Local,
    /// The single shared wired channel.
    Wired,
    /// Wireless subchannel `k`, 1-based.
    Wireless(u32),
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Local => f.write_str("local"),
            Channel::Wired => f.write_str("wired"),
            Channel::Wireless(k) => write!(f, "wireless{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskSlot {
    #[serde(rename = "id")]
    pub task: TaskId,
    /// 1-based rack index.
    pub rack: u32,
    pub start: TimeUnits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeSlot {
    #[serde(rename = "u")]
    pub producer: TaskId,
    #[serde(rename = "v")]
    pub consumer: TaskId,
    pub channel: Channel,
    pub start: TimeUnits,
}

impl EdgeSlot {
    pub fn key(&self) -> EdgeKey {
        EdgeKey {
            producer: self.producer,
            consumer: self.consumer,
        }
    }
}

/// Placement of every task (rack and start) and every edge (channel and
/// transfer start).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    #[serde(rename = "tasks")]
    pub task_slots: Vec<TaskSlot>,
    #[serde(rename = "edges")]
    pub edge_slots: Vec<EdgeSlot>,
}

impl Schedule {
    pub fn task_slot(&self, id: TaskId) -> Option<&TaskSlot> {
        self.task_slots.iter().find(|s| s.task == id)
    }

    pub fn edge_slot(&self, key: EdgeKey) -> Option<&EdgeSlot> {
        self.edge_slots.iter().find(|s| s.key() == key)
    }

    /// Slots sorted by task id and edge key.
    pub fn canonical(mut self) -> Self {
        self.task_slots.sort();
        self.edge_slots.sort();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(tasks: &[(u32, u64)], edges: &[(u32, u32)]) -> JobGraph {
        JobGraph {
            tasks: tasks.iter().map(|&(id, p)| Task::new(id, p)).collect(),
            edges: edges.iter().map(|&(u, v)| DataEdge::new(u, v, 0, 0)).collect(),
        }
    }

    fn ids(v: &[u32]) -> Vec<TaskId> {
        v.iter().map(|&i| TaskId(i)).collect()
    }

    #[test]
    fn well_formed_chain_has_no_errors() {
        assert!(validate_job(&job(&[(1, 1), (2, 1)], &[(1, 2)])).is_empty());
    }

    #[test]
    fn two_cycle_is_reported() {
        let errs = validate_job(&job(&[(1, 1), (2, 1)], &[(1, 2), (2, 1)]));
        assert_eq!(errs, vec![JobError::Cycle(ids(&[1, 2]))]);
    }

    #[test]
    fn zero_processing_time_is_reported() {
        let errs = validate_job(&job(&[(1, 0)], &[]));
        assert_eq!(errs, vec![JobError::NonPositiveTime(TaskId(1))]);
    }

    #[test]
    fn dangling_duplicate_and_self_loop() {
        let errs = validate_job(&job(&[(1, 1), (2, 1)], &[(1, 3), (1, 2), (1, 2), (2, 2)]));
        assert!(errs.contains(&JobError::DanglingEndpoint {
            edge: EdgeKey {
                producer: TaskId(1),
                consumer: TaskId(3)
            },
            missing: TaskId(3)
        }));
        assert!(errs.iter().any(|e| matches!(e, JobError::DuplicateEdge(_))));
        assert!(errs.contains(&JobError::SelfLoop(TaskId(2))));
    }

    #[test]
    fn topo_orders() {
        let chain = job(&[(1, 1), (2, 1), (3, 1)], &[(1, 2), (2, 3)]);
        assert_eq!(topological_order(&chain).unwrap(), ids(&[1, 2, 3]));

        let isolated = job(&[(2, 1), (1, 1)], &[]);
        assert_eq!(topological_order(&isolated).unwrap(), ids(&[1, 2]));

        let diamond = job(
            &[(1, 1), (2, 1), (3, 1), (4, 1)],
            &[(1, 2), (1, 3), (2, 4), (3, 4)],
        );
        assert_eq!(topological_order(&diamond).unwrap(), ids(&[1, 2, 3, 4]));

        let cyclic = job(&[(1, 1), (2, 1)], &[(1, 2), (2, 1)]);
        assert!(topological_order(&cyclic).is_err());
    }

    #[test]
    fn durations_round_up() {
        let net = NetworkConfig::new(2, 1);
        let big = DataEdge::new(1, 2, 50_000, 0);
        assert_eq!(transfer_durations(&big, &net).0, TimeUnits(5_000));
        let none = DataEdge::new(1, 2, 0, 0);
        assert_eq!(transfer_durations(&none, &net), (TimeUnits(0), TimeUnits(0)));
        let w = DataEdge::new(1, 2, 20_000, 0);
        assert_eq!(transfer_durations(&w, &net).1, TimeUnits(2_000));

        let odd = DataEdge::new(1, 2, 1, 0);
        assert_eq!(transfer_durations(&odd, &net).0, TimeUnits(1));
    }

    #[test]
    fn channel_json_shapes() {
        assert_eq!(serde_json::to_string(&Channel::Local).unwrap(), "\"local\"");
        assert_eq!(serde_json::to_string(&Channel::Wired).unwrap(), "\"wired\"");
        assert_eq!(
            serde_json::to_string(&Channel::Wireless(2)).unwrap(),
            "{\"wireless\":2}"
        );
    }

    #[test]
    fn instance_rejects_bad_network() {
        let j = job(&[(1, 1)], &[]);
        assert!(ProblemInstance::new(j.clone(), NetworkConfig::new(0, 0)).is_err());
        let mut net = NetworkConfig::new(1, 0);
        net.wired_bandwidth = 0;
        assert!(ProblemInstance::new(j, net).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn topo_respects_edges(n in 1u32..9, mask in any::<u64>()) {
                let mut edges = Vec::new();
                let mut bit = 0;
                for u in 0..n {
                    for v in (u + 1)..n {
                        if mask >> (bit % 64) & 1 == 1 {
                            // reversed ids so the order is not just id order
                            edges.push((n - u, n - v));
                        }
                        bit += 1;
                    }
                }
                let tasks: Vec<_> = (1..=n).map(|i| (i, 1)).collect();
                let j = job(&tasks, &edges);
                let order = topological_order(&j).unwrap();
                let at: HashMap<_, _> = order.iter().enumerate().map(|(i, &t)| (t, i)).collect();
                for e in &j.edges {
                    prop_assert!(at[&e.producer] < at[&e.consumer]);
                }
            }

            #[test]
            fn durations_monotone(d1 in 0u64..1_000_000, d2 in 0u64..1_000_000,
                                  b1 in 1u64..100_000, b2 in 1u64..100_000) {
                let (dlo, dhi) = (d1.min(d2), d1.max(d2));
                let (blo, bhi) = (b1.min(b2), b1.max(b2));
                let mut net = NetworkConfig::new(2, 1);
                net.wired_bandwidth = blo;
                net.wireless_bandwidth = bhi;
                let lo = transfer_durations(&DataEdge::new(1, 2, dlo, 0), &net);
                let hi = transfer_durations(&DataEdge::new(1, 2, dhi, 0), &net);
                prop_assert!(lo.0 <= hi.0 && lo.1 <= hi.1);
                // wider pipe is never slower
                prop_assert!(hi.1 <= hi.0);
            }
        }
    }
}
