//! Reference heuristics: single rack, greedy list scheduling and random rack
//! assignment with greedy timing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Channel, EdgeSlot, ProblemInstance, Schedule, TaskSlot};
use crate::time::TimeUnits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    Random,
    List,
    SingleRack,
}

impl BaselineKind {
    pub fn run(self, instance: &ProblemInstance, seed: u64) -> Result<Schedule> {
        match self {
            BaselineKind::Random => Ok(random_schedule(instance, seed)),
            BaselineKind::List => Ok(list_schedule(instance)),
            BaselineKind::SingleRack => single_rack_schedule(instance),
        }
    }
}

/// Every task on rack 1, back to back in topological order.
pub fn single_rack_schedule(instance: &ProblemInstance) -> Result<Schedule> {
    let mut r = Realizer::new(instance);
    for &v in &instance.index().topo {
        r.place(v, 0);
    }
    Ok(r.finish())
}

/// Greedy earliest-finish-time list scheduling.
///
/// Tasks are taken in topological order. Each goes to the rack where it would
/// finish first, given the racks and channels already committed; ties go to
/// the lowest rack.
pub fn list_schedule(instance: &ProblemInstance) -> Schedule {
    let mut r = Realizer::new(instance);
    let racks = instance.network().rack_count as usize;
    for &v in &instance.index().topo {
        let best = (0..racks)
            .min_by_key(|&rack| (r.clone().place(v, rack), rack))
            .expect("at least one rack");
        r.place(v, best);
    }
    r.finish()
}

/// Uniformly random rack per task, then the same greedy timing as
/// [`list_schedule`].
pub fn random_schedule(instance: &ProblemInstance, seed: u64) -> Schedule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let racks = instance.network().rack_count as usize;
    // draw in id order so the assignment does not depend on the graph shape
    let assign: Vec<usize> = (0..instance.tasks().len()).map(|_| rng.gen_range(0..racks)).collect();
    let mut r = Realizer::new(instance);
    for &v in &instance.index().topo {
        r.place(v, assign[v]);
    }
    r.finish()
}

/// Appends tasks to racks and transfers to channels at their earliest
/// feasible times.
#[derive(Clone)]
struct Realizer<'a> {
    instance: &'a ProblemInstance,
    durations: std::rc::Rc<Vec<(TimeUnits, TimeUnits)>>,
    rack_free: Vec<u64>,
    /// Index 0 is wired, k is wireless subchannel k.
    chan_free: Vec<u64>,
    rack: Vec<usize>,
    start: Vec<u64>,
    edges: Vec<Option<(Channel, u64)>>,
}

impl<'a> Realizer<'a> {
    fn new(instance: &'a ProblemInstance) -> Self {
        let net = instance.network();
        let n = instance.tasks().len();
        Realizer {
            instance,
            durations: std::rc::Rc::new(instance.durations()),
            rack_free: vec![0; net.rack_count as usize],
            chan_free: vec![0; 1 + net.subchannel_count as usize],
            rack: vec![0; n],
            start: vec![0; n],
            edges: vec![None; instance.edges().len()],
        }
    }

    fn fin(&self, u: usize) -> u64 {
        self.start[u] + self.instance.tasks()[u].processing_time.0
    }

    /// Places `v` on `rack` after all of its predecessors; returns its finish.
    fn place(&mut self, v: usize, rack: usize) -> u64 {
        let idx = self.instance.index();
        let edges = self.instance.edges();
        let mut incoming: Vec<usize> = idx.preds[v].clone();
        incoming.sort_by_key(|&e| (self.fin(idx.src[e]), e));

        let mut ready = self.rack_free[rack];
        for e in incoming {
            let u = idx.src[e];
            let done = self.fin(u);
            let (q, qw) = self.durations[e];
            let (chan, start, arrival) = if self.rack[u] == rack {
                (Channel::Local, done, done + edges[e].local_delay.0)
            } else {
                let mut best = (u64::MAX, 0, 0);
                for (c, &free) in self.chan_free.iter().enumerate() {
                    let dur = if c == 0 { q.0 } else { qw.0 };
                    // empty transfers hold no channel time
                    let s = if dur == 0 { done } else { done.max(free) };
                    if s + dur < best.0 {
                        best = (s + dur, c, s);
                    }
                }
                let (end, c, s) = best;
                if end > s {
                    self.chan_free[c] = end;
                }
                let chan = if c == 0 { Channel::Wired } else { Channel::Wireless(c as u32) };
                (chan, s, end)
            };
            self.edges[e] = Some((chan, start));
            ready = ready.max(arrival);
        }
        self.rack[v] = rack;
        self.start[v] = ready;
        let fin = self.fin(v);
        self.rack_free[rack] = fin;
        fin
    }

    fn finish(self) -> Schedule {
        let idx = self.instance.index();
        let tasks = self.instance.tasks();
        Schedule {
            task_slots: (0..tasks.len())
                .map(|v| TaskSlot {
                    task: tasks[v].id,
                    rack: self.rack[v] as u32 + 1,
                    start: TimeUnits(self.start[v]),
                })
                .collect(),
            edge_slots: self
                .edges
                .iter()
                .enumerate()
                .map(|(e, slot)| {
                    let (channel, start) = slot.expect("every edge realized");
                    EdgeSlot {
                        producer: tasks[idx.src[e]].id,
                        consumer: tasks[idx.dst[e]].id,
                        channel,
                        start: TimeUnits(start),
                    }
                })
                .collect(),
        }
    }
}
