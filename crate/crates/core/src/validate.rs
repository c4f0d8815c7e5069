//! Feasibility checking of schedules against the full constraint set.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    transfer_durations, Channel, EdgeKey, EdgeSlot, JobGraph, ProblemInstance, Schedule, TaskId,
    TaskSlot,
};
use crate::time::TimeUnits;

/// Constraint family a [`Violation`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationRule {
    NonRepetition,
    RackOverlap,
    Precedence,
    TransferStart,
    TransferCompletion,
    WiredOverlap,
    WirelessOverlap,
    ChannelCoupling,
}

impl ViolationRule {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationRule::NonRepetition => "non-repetition",
            ViolationRule::RackOverlap => "rack-overlap",
            ViolationRule::Precedence => "precedence",
            ViolationRule::TransferStart => "transfer-start",
            ViolationRule::TransferCompletion => "transfer-completion",
            ViolationRule::WiredOverlap => "wired-overlap",
            ViolationRule::WirelessOverlap => "wireless-overlap",
            ViolationRule::ChannelCoupling => "channel-coupling",
        }
    }
}

impl fmt::Display for ViolationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Subject {
    Task(TaskId),
    Edge(EdgeKey),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Task(t) => write!(f, "task {t}"),
            Subject::Edge(e) => write!(f, "edge {e}"),
        }
    }
}

impl Serialize for EdgeKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Violation {
    pub rule: ViolationRule,
    pub subjects: Vec<Subject>,
    pub detail: String,
}

impl Violation {
    fn new(rule: ViolationRule, mut subjects: Vec<Subject>, detail: String) -> Self {
        subjects.sort();
        Violation {
            rule,
            subjects,
            detail,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.rule, self.detail)
    }
}

/// Job completion time: latest task finish, 0 for an empty job.
pub fn makespan(schedule: &Schedule, job: &JobGraph) -> Result<TimeUnits> {
    let mut best = TimeUnits::ZERO;
    for t in &job.tasks {
        let slot = schedule
            .task_slot(t.id)
            .ok_or(Error::MissingTaskSlot(t.id))?;
        best = best.max(slot.start + t.processing_time);
    }
    Ok(best)
}

fn overlaps(a: (u64, u64), b: (u64, u64)) -> bool {
    // half-open intervals; empty ones never overlap
    a.0 < a.1 && b.0 < b.1 && a.0 < b.1 && b.0 < a.1
}

/// Checks every constraint family and returns the violations found, sorted.
/// An empty result means the schedule is feasible.
pub fn validate_schedule(instance: &ProblemInstance, schedule: &Schedule) -> Vec<Violation> {
    use ViolationRule::*;
    let net = instance.network();
    let mut out = Vec::new();

    // Group slots so the outcome does not depend on storage order.
    let mut task_slots: BTreeMap<TaskId, Vec<TaskSlot>> = BTreeMap::new();
    for s in &schedule.task_slots {
        task_slots.entry(s.task).or_default().push(*s);
    }
    let mut edge_slots: BTreeMap<EdgeKey, Vec<EdgeSlot>> = BTreeMap::new();
    for s in &schedule.edge_slots {
        edge_slots.entry(s.key()).or_default().push(*s);
    }

    let mut tasks: BTreeMap<TaskId, (TaskSlot, u64)> = BTreeMap::new();
    for t in instance.tasks() {
        match task_slots.get_mut(&t.id) {
            None => out.push(Violation::new(
                NonRepetition,
                vec![Subject::Task(t.id)],
                format!("task {} is not assigned to any rack", t.id),
            )),
            Some(slots) => {
                slots.sort();
                if slots.len() > 1 {
                    out.push(Violation::new(
                        NonRepetition,
                        vec![Subject::Task(t.id)],
                        format!("task {} is assigned {} times", t.id, slots.len()),
                    ));
                }
                let slot = slots[0];
                if slot.rack == 0 || slot.rack > net.rack_count {
                    out.push(Violation::new(
                        NonRepetition,
                        vec![Subject::Task(t.id)],
                        format!("task {} is on rack {} outside 1..={}", t.id, slot.rack, net.rack_count),
                    ));
                }
                tasks.insert(t.id, (slot, t.processing_time.0));
            }
        }
    }
    for id in task_slots.keys() {
        if instance.task(*id).is_none() {
            out.push(Violation::new(
                NonRepetition,
                vec![Subject::Task(*id)],
                format!("slot for unknown task {id}"),
            ));
        }
    }

    let placed: Vec<_> = tasks.iter().map(|(&id, &(s, p))| (id, s, p)).collect();
    for (i, &(a, sa, pa)) in placed.iter().enumerate() {
        for &(b, sb, pb) in &placed[i + 1..] {
            if sa.rack == sb.rack
                && overlaps((sa.start.0, sa.start.0 + pa), (sb.start.0, sb.start.0 + pb))
            {
                out.push(Violation::new(
                    RackOverlap,
                    vec![Subject::Task(a), Subject::Task(b)],
                    format!("tasks {a} and {b} overlap on rack {}", sa.rack),
                ));
            }
        }
    }

    // (start, end, edge) per exclusive channel
    let mut wired: Vec<(u64, u64, EdgeKey)> = Vec::new();
    let mut wireless: BTreeMap<u32, Vec<(u64, u64, EdgeKey)>> = BTreeMap::new();

    for edge in instance.edges() {
        let key = edge.key();
        let (q, qw) = transfer_durations(edge, net);
        let (u, v) = (tasks.get(&edge.producer), tasks.get(&edge.consumer));
        if let (Some(&(su, pu)), Some(&(sv, _))) = (u, v) {
            if su.start.0 + pu > sv.start.0 {
                out.push(Violation::new(
                    Precedence,
                    vec![Subject::Task(key.producer), Subject::Task(key.consumer), Subject::Edge(key)],
                    format!("task {} starts at {} before predecessor {} finishes at {}",
                        key.consumer, sv.start, key.producer, su.start.0 + pu),
                ));
            }
        }
        let slot = match edge_slots.get_mut(&key) {
            None => {
                out.push(Violation::new(
                    ChannelCoupling,
                    vec![Subject::Edge(key)],
                    format!("edge {key} is not assigned to any channel"),
                ));
                continue;
            }
            Some(slots) => {
                slots.sort();
                if slots.len() > 1 {
                    out.push(Violation::new(
                        ChannelCoupling,
                        vec![Subject::Edge(key)],
                        format!("edge {key} is assigned {} times", slots.len()),
                    ));
                }
                slots[0]
            }
        };
        let duration = match slot.channel {
            Channel::Local => edge.local_delay.0,
            Channel::Wired => q.0,
            Channel::Wireless(k) => {
                if k == 0 || k > net.subchannel_count {
                    out.push(Violation::new(
                        ChannelCoupling,
                        vec![Subject::Edge(key)],
                        format!("edge {key} uses subchannel {k} outside 1..={}", net.subchannel_count),
                    ));
                }
                qw.0
            }
        };
        let (Some(&(su, pu)), Some(&(sv, _))) = (u, v) else {
            continue;
        };
        let same_rack = su.rack == sv.rack;
        if same_rack != (slot.channel == Channel::Local) {
            out.push(Violation::new(
                ChannelCoupling,
                vec![Subject::Task(key.producer), Subject::Task(key.consumer), Subject::Edge(key)],
                if same_rack {
                    format!("edge {key} joins tasks on rack {} but uses {}", su.rack, slot.channel)
                } else {
                    format!("edge {key} crosses racks {} and {} but is local", su.rack, sv.rack)
                },
            ));
        }
        let ready = su.start.0 + pu;
        if slot.start.0 < ready {
            out.push(Violation::new(
                TransferStart,
                vec![Subject::Task(key.producer), Subject::Edge(key)],
                format!("edge {key} starts at {} before producer finishes at {ready}", slot.start),
            ));
        }
        let arrival = slot.start.0 + duration;
        if sv.start.0 < arrival {
            out.push(Violation::new(
                TransferCompletion,
                vec![Subject::Task(key.consumer), Subject::Edge(key)],
                format!("task {} starts at {} before its data arrives at {arrival}", key.consumer, sv.start),
            ));
        }
        match slot.channel {
            Channel::Local => {}
            Channel::Wired => wired.push((slot.start.0, arrival, key)),
            Channel::Wireless(k) => wireless.entry(k).or_default().push((slot.start.0, arrival, key)),
        }
    }
    for key in edge_slots.keys() {
        if instance.edge(*key).is_none() {
            out.push(Violation::new(
                ChannelCoupling,
                vec![Subject::Edge(*key)],
                format!("slot for unknown edge {key}"),
            ));
        }
    }

    let mut flows = |rule: ViolationRule, name: String, list: &[(u64, u64, EdgeKey)]| {
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                if overlaps((a.0, a.1), (b.0, b.1)) {
                    out.push(Violation::new(
                        rule,
                        vec![Subject::Edge(a.2), Subject::Edge(b.2)],
                        format!("flows {} and {} overlap on {name}", a.2, b.2),
                    ));
                }
            }
        }
    };
    flows(WiredOverlap, "the wired channel".into(), &wired);
    for (k, list) in &wireless {
        flows(WirelessOverlap, format!("subchannel {k}"), list);
    }

    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DataEdge, NetworkConfig, Task};

    fn slot(id: u32, rack: u32, start: u64) -> TaskSlot {
        TaskSlot {
            task: TaskId(id),
            rack,
            start: TimeUnits(start),
        }
    }

    fn eslot(u: u32, v: u32, channel: Channel, start: u64) -> EdgeSlot {
        EdgeSlot {
            producer: TaskId(u),
            consumer: TaskId(v),
            channel,
            start: TimeUnits(start),
        }
    }

    fn chain(r: u64, d: u64) -> ProblemInstance {
        let mut net = NetworkConfig::new(2, 1);
        // 1 Mbit per tick
        net.wired_bandwidth = 1_000;
        net.wireless_bandwidth = 1_000;
        ProblemInstance::new(
            JobGraph {
                tasks: vec![Task::new(1, 2), Task::new(2, 2)],
                edges: vec![DataEdge::new(1, 2, d, r)],
            },
            net,
        )
        .unwrap()
    }

    fn rules(v: &[Violation]) -> Vec<ViolationRule> {
        v.iter().map(|x| x.rule).collect()
    }

    #[test]
    fn makespan_examples() {
        let job = JobGraph {
            tasks: vec![Task::new(1, 2), Task::new(2, 4)],
            edges: vec![],
        };
        let s = Schedule {
            task_slots: vec![slot(1, 1, 0), slot(2, 1, 3)],
            edge_slots: vec![],
        };
        assert_eq!(makespan(&s, &job).unwrap(), TimeUnits(7));

        let single = JobGraph {
            tasks: vec![Task::new(1, 5)],
            edges: vec![],
        };
        let s1 = Schedule {
            task_slots: vec![slot(1, 1, 0)],
            edge_slots: vec![],
        };
        assert_eq!(makespan(&s1, &single).unwrap(), TimeUnits(5));
        assert_eq!(
            makespan(&Schedule::default(), &JobGraph::default()).unwrap(),
            TimeUnits(0)
        );
        assert!(matches!(
            makespan(&Schedule::default(), &single),
            Err(Error::MissingTaskSlot(TaskId(1)))
        ));
    }

    #[test]
    fn exact_fit_local_chain() {
        let inst = chain(1, 4);
        let s = Schedule {
            task_slots: vec![slot(1, 1, 0), slot(2, 1, 3)],
            edge_slots: vec![eslot(1, 2, Channel::Local, 2)],
        };
        assert!(validate_schedule(&inst, &s).is_empty());
    }

    #[test]
    fn rack_overlap() {
        let inst = ProblemInstance::new(
            JobGraph {
                tasks: vec![Task::new(1, 2), Task::new(2, 2)],
                edges: vec![],
            },
            NetworkConfig::new(1, 0),
        )
        .unwrap();
        let s = Schedule {
            task_slots: vec![slot(1, 1, 0), slot(2, 1, 1)],
            edge_slots: vec![],
        };
        assert_eq!(rules(&validate_schedule(&inst, &s)), vec![ViolationRule::RackOverlap]);
    }

    #[test]
    fn local_across_racks_is_coupling_violation() {
        let inst = chain(0, 4);
        let s = Schedule {
            task_slots: vec![slot(1, 1, 0), slot(2, 2, 2)],
            edge_slots: vec![eslot(1, 2, Channel::Local, 2)],
        };
        assert_eq!(
            rules(&validate_schedule(&inst, &s)),
            vec![ViolationRule::ChannelCoupling]
        );
    }

    #[test]
    fn cross_rack_timing() {
        let inst = chain(0, 4);
        let ok = Schedule {
            task_slots: vec![slot(1, 1, 0), slot(2, 2, 6)],
            edge_slots: vec![eslot(1, 2, Channel::Wireless(1), 2)],
        };
        assert!(validate_schedule(&inst, &ok).is_empty());

        let early = Schedule {
            task_slots: vec![slot(1, 1, 0), slot(2, 2, 4)],
            edge_slots: vec![eslot(1, 2, Channel::Wired, 1)],
        };
        assert_eq!(
            rules(&validate_schedule(&inst, &early)),
            vec![ViolationRule::TransferStart, ViolationRule::TransferCompletion]
        );

        let bad_k = Schedule {
            task_slots: vec![slot(1, 1, 0), slot(2, 2, 6)],
            edge_slots: vec![eslot(1, 2, Channel::Wireless(2), 2)],
        };
        assert_eq!(
            rules(&validate_schedule(&inst, &bad_k)),
            vec![ViolationRule::ChannelCoupling]
        );
    }

    #[test]
    fn precedence_reported_directly() {
        let inst = chain(0, 0);
        let s = Schedule {
            task_slots: vec![slot(1, 1, 0), slot(2, 1, 1)],
            edge_slots: vec![eslot(1, 2, Channel::Local, 2)],
        };
        let r = rules(&validate_schedule(&inst, &s));
        assert!(r.contains(&ViolationRule::Precedence));
        assert!(r.contains(&ViolationRule::RackOverlap));
    }

    #[test]
    fn flow_overlaps() {
        let mut net = NetworkConfig::new(4, 1);
        net.wired_bandwidth = 1_000;
        net.wireless_bandwidth = 1_000;
        let inst = ProblemInstance::new(
            JobGraph {
                tasks: (1..=4).map(|i| Task::new(i, 1)).collect(),
                edges: vec![DataEdge::new(1, 2, 4, 0), DataEdge::new(3, 4, 4, 0)],
            },
            net,
        )
        .unwrap();
        let tasks = vec![slot(1, 1, 0), slot(2, 2, 6), slot(3, 3, 0), slot(4, 4, 6)];
        for (ch, rule) in [
            (Channel::Wired, ViolationRule::WiredOverlap),
            (Channel::Wireless(1), ViolationRule::WirelessOverlap),
        ] {
            let s = Schedule {
                task_slots: tasks.clone(),
                edge_slots: vec![eslot(1, 2, ch, 1), eslot(3, 4, ch, 2)],
            };
            assert_eq!(rules(&validate_schedule(&inst, &s)), vec![rule]);
        }
        let split = Schedule {
            task_slots: tasks,
            edge_slots: vec![
                eslot(1, 2, Channel::Wired, 1),
                eslot(3, 4, Channel::Wireless(1), 1),
            ],
        };
        assert!(validate_schedule(&inst, &split).is_empty());
    }

    #[test]
    fn missing_and_duplicate_slots() {
        let inst = chain(0, 0);
        let s = Schedule {
            task_slots: vec![slot(1, 1, 0), slot(1, 1, 0), slot(9, 1, 0)],
            edge_slots: vec![],
        };
        let r = rules(&validate_schedule(&inst, &s));
        assert_eq!(
            r.iter().filter(|&&x| x == ViolationRule::NonRepetition).count(),
            3
        );
        assert!(r.contains(&ViolationRule::ChannelCoupling));
    }

    #[test]
    fn zero_length_flows_never_conflict() {
        let inst = ProblemInstance::new(
            JobGraph {
                tasks: (1..=4).map(|i| Task::new(i, 1)).collect(),
                edges: vec![DataEdge::new(1, 2, 0, 0), DataEdge::new(3, 4, 40, 0)],
            },
            NetworkConfig::new(4, 0),
        )
        .unwrap();
        let s = Schedule {
            task_slots: vec![slot(1, 1, 0), slot(2, 2, 3), slot(3, 3, 0), slot(4, 4, 6)],
            edge_slots: vec![eslot(1, 2, Channel::Wired, 2), eslot(3, 4, Channel::Wired, 1)],
        };
        assert!(validate_schedule(&inst, &s).is_empty());
    }
}
