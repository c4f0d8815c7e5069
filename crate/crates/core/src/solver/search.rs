//! Depth-first feasibility search for a fixed makespan cap.
//!
//! Operations (tasks and cross-rack transfers) are placed one at a time in
//! non-decreasing start order, each at the earliest time its resource and
//! predecessors allow. A task's rack is chosen either when the task itself is
//! placed or, earlier, when the first transfer into it is placed. Ties on the
//! start time are broken by a fixed operation key, so each schedule is
//! generated by exactly one ordering.
//!
//! Among optimal schedules, one that minimises the sum of all start times is
//! reproduced by that ordering, and no operation in it can be moved into an
//! idle gap that closes before the current frontier. Nodes that contain such
//! a movable operation are discarded.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Channel, EdgeSlot, ProblemInstance, Schedule, TaskId, TaskSlot};
use crate::time::TimeUnits;

const NONE: u32 = u32::MAX;
const UNSET: u64 = u64::MAX;

/// Flattened instance data used by the search.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub n: usize,
    pub m: usize,
    pub racks: usize,
    /// Channel 0 is wired; 1..chans are wireless subchannels.
    pub chans: usize,
    pub p: Vec<u64>,
    pub r: Vec<u64>,
    /// `dur[e * chans + c]`
    pub dur: Vec<u64>,
    /// Edges whose data size is zero take no channel time in any mode.
    pub zero: Vec<bool>,
    pub src: Vec<usize>,
    pub dst: Vec<usize>,
    pub preds: Vec<Vec<usize>>,
    pub succs: Vec<Vec<usize>>,
    pub topo: Vec<usize>,
    pub task_ids: Vec<TaskId>,
}

impl Prepared {
    pub fn new(instance: &ProblemInstance) -> Self {
        let idx = instance.index();
        let net = instance.network();
        let chans = 1 + net.subchannel_count as usize;
        let durations = instance.durations();
        let mut dur = Vec::with_capacity(durations.len() * chans);
        for &(q, qw) in &durations {
            dur.push(q.0);
            dur.extend(std::iter::repeat_n(qw.0, chans - 1));
        }
        Prepared {
            n: instance.tasks().len(),
            m: instance.edges().len(),
            racks: net.rack_count as usize,
            chans,
            p: instance.tasks().iter().map(|t| t.processing_time.0).collect(),
            r: instance.edges().iter().map(|e| e.local_delay.0).collect(),
            dur,
            zero: instance.edges().iter().map(|e| e.data_size == 0).collect(),
            src: idx.src.clone(),
            dst: idx.dst.clone(),
            preds: idx.preds.clone(),
            succs: idx.succs.clone(),
            topo: idx.topo.clone(),
            task_ids: instance.tasks().iter().map(|t| t.id).collect(),
        }
    }

    #[inline]
    pub fn dur(&self, e: usize, c: usize) -> u64 {
        self.dur[e * self.chans + c]
    }

    fn min_dur(&self, e: usize) -> u64 {
        self.dur[e * self.chans..(e + 1) * self.chans]
            .iter()
            .copied()
            .min()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct State {
    rack: Vec<u32>,
    start: Vec<u64>,
    chan: Vec<u32>,
    estart: Vec<u64>,
    rack_free: Vec<u64>,
    /// Tasks fixed to the rack but not yet placed.
    pinned: Vec<u32>,
    /// Racks 0..used have been handed out; the rest are interchangeable.
    used: usize,
    chan_free: Vec<u64>,
    frontier: u64,
    last_key: Option<usize>,
    unplaced: usize,
}

impl State {
    fn root(pr: &Prepared) -> Self {
        State {
            rack: vec![NONE; pr.n],
            start: vec![UNSET; pr.n],
            chan: vec![NONE; pr.m],
            estart: vec![UNSET; pr.m],
            rack_free: vec![0; pr.racks],
            pinned: vec![0; pr.racks],
            used: 0,
            chan_free: vec![0; pr.chans],
            frontier: 0,
            last_key: None,
            unplaced: pr.n,
        }
    }

    #[inline]
    fn placed(&self, v: usize) -> bool {
        self.start[v] != UNSET
    }

    #[inline]
    fn fixed(&self, v: usize) -> bool {
        self.rack[v] != NONE
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Task { v: usize, rack: usize },
    /// `fix` is set when the transfer also decides the consumer's rack.
    Transfer { e: usize, chan: usize, fix: Option<usize> },
}

#[derive(Debug, Clone, Copy)]
struct Move {
    start: u64,
    key: usize,
    op: Op,
}

pub(crate) enum Outcome {
    Found(Schedule),
    Exhausted,
    LimitHit,
}

pub(crate) struct Budget {
    pub nodes: u64,
    pub node_limit: Option<u64>,
    pub deadline: Option<Instant>,
}

impl Budget {
    fn exhausted(&self) -> bool {
        if let Some(limit) = self.node_limit {
            if self.nodes >= limit {
                return true;
            }
        }
        if let Some(deadline) = self.deadline {
            if self.nodes.is_multiple_of(1024) && Instant::now() >= deadline {
                return true;
            }
        }
        false
    }
}

pub(crate) struct Search<'a> {
    pr: &'a Prepared,
    level: u64,
    budget: &'a mut Budget,
    rng: Option<ChaCha8Rng>,
    // scratch
    est: Vec<u64>,
    fin: Vec<u64>,
    tail: Vec<u64>,
    xfer: Vec<(u64, usize)>,
    split: Vec<(u64, u64)>,
}

impl<'a> Search<'a> {
    pub fn new(pr: &'a Prepared, level: u64, budget: &'a mut Budget, seed: Option<u64>) -> Self {
        Search {
            pr,
            level,
            budget,
            rng: seed.map(ChaCha8Rng::seed_from_u64),
            est: vec![0; pr.n],
            fin: vec![0; pr.n],
            tail: vec![0; pr.n],
            xfer: Vec::new(),
            split: Vec::new(),
        }
    }

    pub fn run(&mut self) -> Outcome {
        let root = State::root(self.pr);
        if !self.bound_ok(&root) {
            return Outcome::Exhausted;
        }
        self.dfs(&root)
    }

    fn dfs(&mut self, st: &State) -> Outcome {
        if st.unplaced == 0 {
            return Outcome::Found(self.extract(st));
        }
        if self.budget.exhausted() {
            return Outcome::LimitHit;
        }
        self.budget.nodes += 1;

        // tails of this node bound every child from below
        let tail = self.tail.clone();
        let level = self.level;
        let pr = self.pr;
        let mut moves = self.moves(st);
        moves.retain(|mv| match mv.op {
            Op::Task { v, .. } => mv.start + tail[v] <= level,
            Op::Transfer { e, chan, .. } => mv.start + pr.dur(e, chan) + tail[pr.dst[e]] <= level,
        });
        moves.sort_by_key(|mv| (mv.start, mv.key, op_order(&mv.op)));
        if let Some(rng) = self.rng.as_mut() {
            // shuffle within runs of equal start
            let mut i = 0;
            while i < moves.len() {
                let j = i + moves[i..].iter().take_while(|m| m.start == moves[i].start).count();
                moves[i..j].shuffle(rng);
                i = j;
            }
        }
        for mv in moves {
            let child = self.apply(st, mv);
            if self.has_movable_op(&child) || !self.bound_ok(&child) {
                continue;
            }
            match self.dfs(&child) {
                Outcome::Exhausted => {}
                other => return other,
            }
        }
        Outcome::Exhausted
    }

    fn extract(&self, st: &State) -> Schedule {
        let pr = self.pr;
        let ids = &pr.task_ids;
        let task_slots = (0..pr.n)
            .map(|v| TaskSlot {
                task: ids[v],
                rack: st.rack[v] + 1,
                start: TimeUnits(st.start[v]),
            })
            .collect();
        let edge_slots = (0..pr.m)
            .map(|e| {
                let (u, v) = (pr.src[e], pr.dst[e]);
                let ready = st.start[u] + pr.p[u];
                let (channel, start) = if st.rack[u] == st.rack[v] {
                    (Channel::Local, ready)
                } else if st.chan[e] != NONE {
                    (chan_of(st.chan[e] as usize), st.estart[e])
                } else {
                    // zero-size data: no channel time needed
                    (Channel::Wired, ready)
                };
                EdgeSlot {
                    producer: ids[u],
                    consumer: ids[v],
                    channel,
                    start: TimeUnits(start),
                }
            })
            .collect();
        Schedule {
            task_slots,
            edge_slots,
        }
    }
}

fn op_order(op: &Op) -> (usize, usize) {
    match *op {
        Op::Task { rack, .. } => (rack, 0),
        Op::Transfer { chan, fix, .. } => (fix.unwrap_or(0), chan),
    }
}

fn chan_of(c: usize) -> Channel {
    if c == 0 {
        Channel::Wired
    } else {
        Channel::Wireless(c as u32)
    }
}

impl Search<'_> {
    fn monotone(st: &State, start: u64, key: usize) -> bool {
        start > st.frontier || (start == st.frontier && st.last_key.is_none_or(|k| key > k))
    }

    /// Latest data arrival for `v` if it ran on `rack`, or `None` while a
    /// required transfer is still unplaced. Predecessors must be placed.
    fn arrival_on(&self, st: &State, v: usize, rack: usize) -> Option<u64> {
        let pr = self.pr;
        let mut arr = 0;
        for &e in &pr.preds[v] {
            let u = pr.src[e];
            let ready = st.start[u] + pr.p[u];
            let t = if st.rack[u] as usize == rack {
                ready + pr.r[e]
            } else if pr.zero[e] {
                ready
            } else if st.estart[e] != UNSET {
                st.estart[e] + pr.dur(e, st.chan[e] as usize)
            } else {
                return None;
            };
            arr = arr.max(t);
        }
        Some(arr)
    }

    /// Racks that carry no identity beyond their free time: nothing pinned
    /// and no placed task whose outgoing edges still depend on the rack.
    fn plain_racks(&self, st: &State) -> Vec<bool> {
        let pr = self.pr;
        let mut plain: Vec<bool> = st.pinned[..st.used].iter().map(|&c| c == 0).collect();
        for u in 0..pr.n {
            if st.placed(u) && pr.succs[u].iter().any(|&e| !st.fixed(pr.dst[e])) {
                plain[st.rack[u] as usize] = false;
            }
        }
        plain
    }

    fn rack_choices(&self, st: &State, plain: &[bool], exclude: Option<usize>) -> Vec<usize> {
        let mut out = Vec::new();
        let mut seen: Vec<u64> = Vec::new();
        for i in 0..st.used {
            if Some(i) == exclude {
                continue;
            }
            if plain[i] {
                if seen.contains(&st.rack_free[i]) {
                    continue;
                }
                seen.push(st.rack_free[i]);
            }
            out.push(i);
        }
        if st.used < self.pr.racks {
            out.push(st.used);
        }
        out
    }

    /// Wired plus one representative per distinct wireless free time.
    fn chan_choices(&self, st: &State) -> Vec<usize> {
        let mut out = vec![0];
        let mut seen: Vec<u64> = Vec::new();
        for c in 1..self.pr.chans {
            if !seen.contains(&st.chan_free[c]) {
                seen.push(st.chan_free[c]);
                out.push(c);
            }
        }
        out
    }

    fn moves(&self, st: &State) -> Vec<Move> {
        let pr = self.pr;
        let mut out = Vec::new();
        let plain = self.plain_racks(st);

        for v in 0..pr.n {
            if st.placed(v) || pr.preds[v].iter().any(|&e| !st.placed(pr.src[e])) {
                continue;
            }
            let candidates = if st.fixed(v) {
                vec![st.rack[v] as usize]
            } else {
                // without a transfer into v, every non-empty edge is local
                let mut forced: Option<u32> = None;
                let mut split = false;
                for &e in &pr.preds[v] {
                    if pr.zero[e] {
                        continue;
                    }
                    let ru = st.rack[pr.src[e]];
                    match forced {
                        None => forced = Some(ru),
                        Some(f) if f != ru => {
                            split = true;
                            break;
                        }
                        _ => {}
                    }
                }
                if split {
                    continue;
                }
                match forced {
                    Some(f) => vec![f as usize],
                    None => self.rack_choices(st, &plain, None),
                }
            };
            for rack in candidates {
                let Some(arr) = self.arrival_on(st, v, rack) else {
                    continue;
                };
                let start = arr.max(st.rack_free[rack]);
                if Self::monotone(st, start, v) {
                    out.push(Move {
                        start,
                        key: v,
                        op: Op::Task { v, rack },
                    });
                }
            }
        }

        let chans = self.chan_choices(st);
        for e in 0..pr.m {
            let (u, v) = (pr.src[e], pr.dst[e]);
            if pr.zero[e] || st.estart[e] != UNSET || !st.placed(u) || st.placed(v) {
                continue;
            }
            let ru = st.rack[u] as usize;
            let fixes: Vec<Option<usize>> = if st.fixed(v) {
                if st.rack[v] as usize == ru {
                    continue;
                }
                vec![None]
            } else {
                self.rack_choices(st, &plain, Some(ru))
                    .into_iter()
                    .map(Some)
                    .collect()
            };
            let ready = st.start[u] + pr.p[u];
            let key = pr.n + e;
            for &chan in &chans {
                let start = ready.max(st.chan_free[chan]);
                if !Self::monotone(st, start, key) {
                    continue;
                }
                for &fix in &fixes {
                    out.push(Move {
                        start,
                        key,
                        op: Op::Transfer { e, chan, fix },
                    });
                }
            }
        }
        out
    }

    fn apply(&self, st: &State, mv: Move) -> State {
        let pr = self.pr;
        let mut c = st.clone();
        match mv.op {
            Op::Task { v, rack } => {
                if c.fixed(v) {
                    c.pinned[rack] -= 1;
                } else {
                    c.rack[v] = rack as u32;
                    if rack == c.used {
                        c.used += 1;
                    }
                }
                c.start[v] = mv.start;
                c.rack_free[rack] = mv.start + pr.p[v];
                c.unplaced -= 1;
            }
            Op::Transfer { e, chan, fix } => {
                if let Some(rack) = fix {
                    c.rack[pr.dst[e]] = rack as u32;
                    c.pinned[rack] += 1;
                    if rack == c.used {
                        c.used += 1;
                    }
                }
                c.chan[e] = chan as u32;
                c.estart[e] = mv.start;
                c.chan_free[chan] = mv.start + pr.dur(e, chan);
            }
        }
        c.frontier = mv.start;
        c.last_key = Some(mv.key);
        c
    }

    /// True when some fully determined operation could still finish by the
    /// frontier in an idle gap of its resource, i.e. the partial schedule is
    /// not left-justified.
    fn has_movable_op(&self, st: &State) -> bool {
        let pr = self.pr;
        let f = st.frontier;
        for v in 0..pr.n {
            if st.placed(v) || !st.fixed(v) || pr.preds[v].iter().any(|&e| !st.placed(pr.src[e])) {
                continue;
            }
            let rack = st.rack[v] as usize;
            if let Some(arr) = self.arrival_on(st, v, rack) {
                if arr.max(st.rack_free[rack]) + pr.p[v] <= f {
                    return true;
                }
            }
        }
        for e in 0..pr.m {
            let (u, v) = (pr.src[e], pr.dst[e]);
            if pr.zero[e] || st.estart[e] != UNSET || !st.placed(u) || !st.fixed(v) || st.rack[u] == st.rack[v] {
                continue;
            }
            let ready = st.start[u] + pr.p[u];
            if (0..pr.chans).any(|c| ready.max(st.chan_free[c]) + pr.dur(e, c) <= f) {
                return true;
            }
        }
        false
    }

    fn modes(&self, st: &State, e: usize) -> (bool, bool) {
        let (u, v) = (self.pr.src[e], self.pr.dst[e]);
        let known = st.fixed(u) && st.fixed(v);
        let same = known && st.rack[u] == st.rack[v];
        let local_ok = !known || same;
        let cross_ok = self.pr.racks >= 2 && !same;
        (local_ok, cross_ok)
    }

    /// Earliest start of unplaced `v` if it ran on `rack` (`None` for a rack
    /// not handed out yet), from predecessor finish bounds and the channel
    /// time its incoming cross-rack transfers still need.
    fn est_on(&mut self, st: &State, v: usize, rack: Option<usize>) -> u64 {
        let pr = self.pr;
        let f = st.frontier;
        let mut t = f.max(rack.map_or(0, |r| st.rack_free[r]));
        self.xfer.clear();
        for &e in &pr.preds[v] {
            let u = pr.src[e];
            let arrival = if st.estart[e] != UNSET {
                st.estart[e] + pr.dur(e, st.chan[e] as usize)
            } else if !st.fixed(u) {
                let mut d = pr.r[e];
                if pr.racks >= 2 {
                    d = d.min(if pr.zero[e] { 0 } else { pr.min_dur(e) });
                }
                self.fin[u] + d
            } else if Some(st.rack[u] as usize) == rack {
                self.fin[u] + pr.r[e]
            } else if pr.zero[e] {
                self.fin[u]
            } else {
                let rel = self.fin[u].max(f);
                self.xfer.push((rel, e));
                (0..pr.chans)
                    .map(|c| rel.max(st.chan_free[c]) + pr.dur(e, c))
                    .min()
                    .unwrap_or(u64::MAX)
            };
            t = t.max(arrival);
        }
        if self.xfer.len() >= 2 {
            if pr.chans == 1 {
                self.xfer.sort_unstable();
                let mut c = st.chan_free[0].max(f);
                for &(rel, e) in &self.xfer {
                    c = c.max(rel) + pr.dur(e, 0);
                }
                t = t.max(c);
            } else {
                let first = self.xfer.iter().map(|x| x.0).min().unwrap_or(f);
                let busy: u64 = st.chan_free.iter().map(|&c| c.max(first)).sum();
                let work: u64 = self.xfer.iter().map(|&(_, e)| pr.min_dur(e)).sum();
                t = t.max((busy + work).div_ceil(pr.chans as u64));
            }
        }
        t
    }

    /// Whether the inputs of `v` can all be on `rack` by `deadline`: each
    /// unplaced predecessor either runs on that rack or ships its data over
    /// the channels. Relaxed to a fractional split, so true is only a hint.
    fn inputs_fit(&mut self, st: &State, v: usize, rack: Option<usize>, deadline: u64) -> bool {
        let pr = self.pr;
        let f = st.frontier;
        let rack_from = f.max(rack.map_or(0, |r| st.rack_free[r]));
        if rack_from > deadline {
            return false;
        }
        let mut rack_room = deadline - rack_from;
        let mut wire_need = 0u64;
        let mut first = u64::MAX;
        self.split.clear();
        for &e in &pr.preds[v] {
            let u = pr.src[e];
            if st.placed(u) {
                if Some(st.rack[u] as usize) != rack && !pr.zero[e] && st.estart[e] == UNSET {
                    wire_need += pr.min_dur(e);
                    first = first.min(self.fin[u].max(f));
                }
            } else if st.fixed(u) {
                if Some(st.rack[u] as usize) == rack {
                    if pr.p[u] > rack_room {
                        return false;
                    }
                    rack_room -= pr.p[u];
                } else if !pr.zero[e] {
                    wire_need += pr.min_dur(e);
                    first = first.min(self.fin[u]);
                }
            } else if pr.racks == 1 {
                if pr.p[u] > rack_room {
                    return false;
                }
                rack_room -= pr.p[u];
            } else if !pr.zero[e] {
                // local or remote, whichever the split prefers
                self.split.push((pr.p[u], pr.min_dur(e)));
                wire_need += pr.min_dur(e);
                first = first.min(self.fin[u]);
            }
        }
        if wire_need == 0 {
            return true;
        }
        if !self.split.is_empty() {
            // inputs kept off the rack must run on the others first
            let dmin = self.split.iter().map(|s| s.1).min().unwrap_or(0);
            let until = deadline.saturating_sub(dmin);
            let mut others: u64 = (0..st.used)
                .filter(|&r| Some(r) != rack)
                .map(|r| until.saturating_sub(st.rack_free[r].max(f)))
                .sum();
            let fresh = pr.racks - st.used - usize::from(rack.is_none());
            others += fresh as u64 * until.saturating_sub(f);
            let work: u64 = self.split.iter().map(|s| s.0).sum();
            if work > rack_room + others {
                return false;
            }
        }
        // move the inputs with the most transfer time per unit of work
        self.split.sort_unstable_by(|a, b| (b.1 * a.0).cmp(&(a.1 * b.0)));
        for &(p, d) in &self.split {
            if rack_room == 0 {
                break;
            }
            if p <= rack_room {
                rack_room -= p;
                wire_need -= d;
            } else {
                wire_need -= (d * rack_room).div_ceil(p);
                rack_room = 0;
            }
        }
        let room: u64 = st
            .chan_free
            .iter()
            .map(|&c| deadline.saturating_sub(c.max(first)))
            .sum();
        wire_need <= room
    }

    fn delay_lb(&self, st: &State, e: usize) -> u64 {
        let pr = self.pr;
        if st.estart[e] != UNSET {
            return pr.dur(e, st.chan[e] as usize);
        }
        let (local_ok, cross_ok) = self.modes(st, e);
        let mut best = u64::MAX;
        if local_ok {
            best = pr.r[e];
        }
        if cross_ok {
            best = best.min(if pr.zero[e] { 0 } else { pr.min_dur(e) });
        }
        best
    }

    /// Lower-bound checks against the level; false means prune.
    fn bound_ok(&mut self, st: &State) -> bool {
        let pr = self.pr;
        let level = self.level;
        let f = st.frontier;
        let all_used = st.used == pr.racks;

        for &v in &pr.topo {
            if st.placed(v) {
                self.est[v] = st.start[v];
                self.fin[v] = st.start[v] + pr.p[v];
                if self.fin[v] > level {
                    return false;
                }
                continue;
            }
            let est = if st.fixed(v) {
                self.est_on(st, v, Some(st.rack[v] as usize))
            } else {
                let fresh = if all_used { u64::MAX } else { self.est_on(st, v, None) };
                (0..st.used).fold(fresh, |best, r| best.min(self.est_on(st, v, Some(r))))
            };
            self.est[v] = est;
            self.fin[v] = est + pr.p[v];
        }
        for &v in pr.topo.iter().rev() {
            let mut after = 0;
            for &e in &pr.succs[v] {
                after = after.max(self.delay_lb(st, e) + self.tail[pr.dst[e]]);
            }
            self.tail[v] = pr.p[v] + after;
            if !st.placed(v) && self.est[v] + self.tail[v] > level {
                return false;
            }
        }

        for v in 0..pr.n {
            if st.placed(v) || pr.preds[v].len() < 2 {
                continue;
            }
            let deadline = level - self.tail[v];
            let ok = if st.fixed(v) {
                self.inputs_fit(st, v, Some(st.rack[v] as usize), deadline)
            } else {
                (!all_used && self.inputs_fit(st, v, None, deadline))
                    || (0..st.used).any(|r| self.inputs_fit(st, v, Some(r), deadline))
            };
            if !ok {
                return false;
            }
        }

        // each rack with pinned tasks runs them one at a time
        let mut jobs: Vec<(u64, u64)> = Vec::new();
        for rack in 0..st.used {
            if st.pinned[rack] == 0 {
                continue;
            }
            jobs.clear();
            let mut min_after = u64::MAX;
            for v in 0..pr.n {
                if !st.placed(v) && st.rack[v] as usize == rack {
                    jobs.push((self.est[v], pr.p[v]));
                    min_after = min_after.min(self.tail[v] - pr.p[v]);
                }
            }
            jobs.sort_unstable();
            let mut t = st.rack_free[rack].max(f);
            for &(rel, p) in &jobs {
                t = t.max(rel) + p;
            }
            if t + min_after > level {
                return false;
            }
        }

        // pending cross-rack transfers share the channels
        jobs.clear();
        let mut need = 0;
        let mut min_after = u64::MAX;
        for e in 0..pr.m {
            let (u, v) = (pr.src[e], pr.dst[e]);
            if pr.zero[e] || st.estart[e] != UNSET || !st.fixed(u) || !st.fixed(v) || st.rack[u] == st.rack[v] {
                continue;
            }
            let rel = self.fin[u].max(f);
            jobs.push((rel, pr.dur(e, 0)));
            need += pr.min_dur(e);
            min_after = min_after.min(self.tail[v]);
        }
        if !jobs.is_empty() {
            if min_after > level {
                return false;
            }
            let deadline = level - min_after;
            if pr.chans == 1 {
                jobs.sort_unstable();
                let mut t = st.chan_free[0].max(f);
                for &(rel, d) in &jobs {
                    t = t.max(rel) + d;
                }
                if t > deadline {
                    return false;
                }
            } else {
                let first = jobs.iter().map(|j| j.0).min().unwrap_or(f);
                let cap: u64 = st
                    .chan_free
                    .iter()
                    .map(|&free| deadline.saturating_sub(free.max(first)))
                    .sum();
                if need > cap {
                    return false;
                }
            }
        }

        // total remaining work fits on the racks
        let work: u64 = (0..pr.n).filter(|&v| !st.placed(v)).map(|v| pr.p[v]).sum();
        let mut cap: u64 = st.rack_free[..st.used]
            .iter()
            .map(|&free| level.saturating_sub(free.max(f)))
            .sum();
        cap += (pr.racks - st.used) as u64 * level.saturating_sub(f);
        work <= cap
    }
}
