//! Exhaustive search for the optimal makespan of tiny instances.
//!
//! Every task-to-rack map (up to rack relabeling), every channel choice for
//! each cross-rack transfer and every order of the operations sharing a rack
//! or channel is tried. For fixed choices and orders the earliest schedule is
//! a longest-path computation.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Channel, EdgeSlot, ProblemInstance, Schedule, TaskSlot};
use crate::solver::Prepared;
use crate::time::TimeUnits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub max_tasks: usize,
    pub max_edges: usize,
    pub max_racks: u32,
    pub max_subchannels: u32,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_tasks: 5,
            max_edges: 6,
            max_racks: 3,
            max_subchannels: 2,
        }
    }
}

impl OracleLimits {
    pub fn check(&self, instance: &ProblemInstance) -> Result<()> {
        let net = instance.network();
        let (n, m) = (instance.tasks().len(), instance.edges().len());
        if self.max_tasks == 0 || self.max_edges == 0 || self.max_racks == 0 {
            return Err(Error::Config("oracle limits must be positive".into()));
        }
        let over = [
            (n > self.max_tasks, format!("{n} tasks > {}", self.max_tasks)),
            (m > self.max_edges, format!("{m} edges > {}", self.max_edges)),
            (net.rack_count > self.max_racks, format!("{} racks > {}", net.rack_count, self.max_racks)),
            (
                net.subchannel_count > self.max_subchannels,
                format!("{} subchannels > {}", net.subchannel_count, self.max_subchannels),
            ),
        ];
        match over.into_iter().find(|(bad, _)| *bad) {
            Some((_, msg)) => Err(Error::OracleLimit(msg)),
            None => Ok(()),
        }
    }
}

/// Optimal makespan and one schedule attaining it. Among optima the first in
/// enumeration order (rack map, then channels, then orders) is returned.
pub fn brute_force_optimal(
    instance: &ProblemInstance,
    limits: &OracleLimits,
) -> Result<(TimeUnits, Schedule)> {
    limits.check(instance)?;
    let pr = Prepared::new(instance);
    let mut e = Enumerator {
        pr: &pr,
        best: None,
        arcs: Vec::new(),
    };
    let mut racks = vec![0usize; pr.n];
    e.racks(&mut racks, 0, 0);
    let best = e.best.expect("at least one rack map");
    Ok((TimeUnits(best.makespan), best.schedule(&pr, instance)))
}

/// Optimal makespans without and with the instance's wireless subchannels.
pub fn enumerate_gain(
    instance: &ProblemInstance,
    limits: &OracleLimits,
) -> Result<(TimeUnits, TimeUnits)> {
    let wired = instance.with_network(instance.network().with_subchannels(0))?;
    let (w, _) = brute_force_optimal(&wired, limits)?;
    let (h, _) = brute_force_optimal(instance, limits)?;
    Ok((w, h))
}

struct Best {
    makespan: u64,
    racks: Vec<usize>,
    /// Channel per edge, `None` for local or empty transfers.
    chans: Vec<Option<usize>>,
    /// Start per task node, then per transfer node.
    start: Vec<u64>,
}

impl Best {
    fn schedule(&self, pr: &Prepared, instance: &ProblemInstance) -> Schedule {
        let ids = &pr.task_ids;
        let task_slots = (0..pr.n)
            .map(|v| TaskSlot {
                task: ids[v],
                rack: self.racks[v] as u32 + 1,
                start: TimeUnits(self.start[v]),
            })
            .collect();
        let edge_slots = (0..pr.m)
            .map(|e| {
                let (u, v) = (pr.src[e], pr.dst[e]);
                let ready = self.start[u] + pr.p[u];
                let (channel, start) = match self.chans[e] {
                    _ if self.racks[u] == self.racks[v] => (Channel::Local, ready),
                    Some(0) => (Channel::Wired, self.start[pr.n + e]),
                    Some(c) => (Channel::Wireless(c as u32), self.start[pr.n + e]),
                    None => (Channel::Wired, ready),
                };
                EdgeSlot {
                    producer: ids[u],
                    consumer: ids[v],
                    channel,
                    start: TimeUnits(start),
                }
            })
            .collect();
        debug_assert_eq!(instance.tasks().len(), pr.n);
        Schedule {
            task_slots,
            edge_slots,
        }
    }
}

struct Enumerator<'a> {
    pr: &'a Prepared,
    best: Option<Best>,
    /// `start[to] >= start[from] + w`
    arcs: Vec<(usize, usize, u64)>,
}

impl Enumerator<'_> {
    /// Restricted-growth rack labels: task `v` may open at most one new rack.
    fn racks(&mut self, racks: &mut Vec<usize>, v: usize, opened: usize) {
        if v == self.pr.n {
            let cross: Vec<usize> = (0..self.pr.m)
                .filter(|&e| !self.pr.zero[e] && racks[self.pr.src[e]] != racks[self.pr.dst[e]])
                .collect();
            let mut chans = vec![None; self.pr.m];
            self.channels(racks, &cross, 0, &mut chans);
            return;
        }
        let limit = (opened + 1).min(self.pr.racks);
        for r in 0..limit {
            racks[v] = r;
            self.racks(racks, v + 1, opened.max(r + 1));
        }
    }

    fn channels(&mut self, racks: &[usize], cross: &[usize], i: usize, chans: &mut Vec<Option<usize>>) {
        if i == cross.len() {
            self.orders(racks, chans);
            return;
        }
        for c in 0..self.pr.chans {
            chans[cross[i]] = Some(c);
            self.channels(racks, cross, i + 1, chans);
        }
        chans[cross[i]] = None;
    }

    fn orders(&mut self, racks: &[usize], chans: &[Option<usize>]) {
        let pr = self.pr;
        self.arcs.clear();
        for e in 0..pr.m {
            let (u, v) = (pr.src[e], pr.dst[e]);
            if racks[u] == racks[v] {
                self.arcs.push((u, v, pr.p[u] + pr.r[e]));
            } else if let Some(c) = chans[e] {
                let t = pr.n + e;
                self.arcs.push((u, t, pr.p[u]));
                self.arcs.push((t, v, pr.dur(e, c)));
            } else {
                self.arcs.push((u, v, pr.p[u]));
            }
        }
        // operations sharing an exclusive resource; singletons need no order
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for r in 0..pr.racks {
            groups.push((0..pr.n).filter(|&v| racks[v] == r).collect());
        }
        for c in 0..pr.chans {
            groups.push((0..pr.m).filter(|&e| chans[e] == Some(c)).map(|e| pr.n + e).collect());
        }
        groups.retain(|g| g.len() >= 2);
        self.sequence(&groups, 0, racks, chans);
    }

    fn sequence(&mut self, groups: &[Vec<usize>], i: usize, racks: &[usize], chans: &[Option<usize>]) {
        if i == groups.len() {
            self.evaluate(racks, chans);
            return;
        }
        let mark = self.arcs.len();
        for perm in groups[i].iter().copied().permutations(groups[i].len()) {
            self.arcs.truncate(mark);
            for w in perm.windows(2) {
                let len = self.node_len(w[0], chans);
                self.arcs.push((w[0], w[1], len));
            }
            self.sequence(groups, i + 1, racks, chans);
        }
        self.arcs.truncate(mark);
    }

    fn node_len(&self, node: usize, chans: &[Option<usize>]) -> u64 {
        let pr = self.pr;
        if node < pr.n {
            pr.p[node]
        } else {
            let e = node - pr.n;
            pr.dur(e, chans[e].expect("ordered transfers have a channel"))
        }
    }

    fn evaluate(&mut self, racks: &[usize], chans: &[Option<usize>]) {
        let pr = self.pr;
        let nodes = pr.n + pr.m;
        let mut indeg = vec![0u32; nodes];
        let mut out: Vec<Vec<(usize, u64)>> = vec![Vec::new(); nodes];
        for &(a, b, w) in &self.arcs {
            indeg[b] += 1;
            out[a].push((b, w));
        }
        let mut start = vec![0u64; nodes];
        let mut stack: Vec<usize> = (0..nodes).filter(|&x| indeg[x] == 0).collect();
        let mut seen = 0;
        while let Some(a) = stack.pop() {
            seen += 1;
            for &(b, w) in &out[a] {
                start[b] = start[b].max(start[a] + w);
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    stack.push(b);
                }
            }
        }
        if seen < nodes {
            // the orders contradict the precedences
            return;
        }
        let makespan = (0..pr.n).map(|v| start[v] + pr.p[v]).max().unwrap_or(0);
        if self.best.as_ref().is_none_or(|b| makespan < b.makespan) {
            self.best = Some(Best {
                makespan,
                racks: racks.to_vec(),
                chans: chans.to_vec(),
                start,
            });
        }
    }
}
