//! Mixed-integer linear model of the scheduling problem, with big-M
//! disjunctions, and its LP-format rendering.
//!
//! Variable names: `x_v_i` (task v on rack i), `xt_v_i` (its start if so),
//! `y_u_v_k` / `yt_u_v_k` (edge u->v on channel k, k in `b`, `c`, 1..K, and
//! its start), `psi_v_vp_i`, `sig_v_vp`, `chi_u_v_up_vp_k`, `phi_u_v_up_vp`
//! and `Cmax`. Channel `b` is wired, `c` is local.

mod lp;
mod model;

pub use lp::write_lp;
pub use model::{model_stats, Assignment, Coef, Constraint, LinearModel, ModelStats, Sense, VarKind, Variable};

use crate::bounds::{upper_bound, BoundPair};
use crate::error::{Error, Result};
use crate::model::{Channel, EdgeSlot, ProblemInstance, Schedule, TaskId, TaskSlot};
use crate::time::TimeUnits;
use crate::validate::makespan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderConfig {
    /// Strictness margin of the big-M disjunctions, in (0, 1).
    pub epsilon: Coef,
    /// Big-M constant; defaults to [`upper_bound`] of the job.
    pub big_m: Option<TimeUnits>,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            epsilon: Coef::new(1, 10),
            big_m: None,
        }
    }
}

/// Makespan minimisation with `bounds.lower <= Cmax <= bounds.upper`.
pub fn build_rp(instance: &ProblemInstance, bounds: BoundPair, cfg: &EncoderConfig) -> Result<LinearModel> {
    let BoundPair { lower, upper } = checked(bounds)?;
    Builder::new(instance, cfg, upper)?.build(lower, upper, true)
}

/// Feasibility model: same constraints, no objective, every task finishing
/// by `level`. The big-M constant stays at the job's upper bound.
pub fn build_fp(
    instance: &ProblemInstance,
    bounds: BoundPair,
    level: TimeUnits,
    cfg: &EncoderConfig,
) -> Result<LinearModel> {
    let bounds = checked(bounds)?;
    if !bounds.contains(level) {
        return Err(Error::Precondition(format!(
            "level {level} outside [{}, {}]",
            bounds.lower, bounds.upper
        )));
    }
    Builder::new(instance, cfg, bounds.upper)?.build(bounds.lower, level, false)
}

fn checked(b: BoundPair) -> Result<BoundPair> {
    BoundPair::new(b.lower, b.upper)
}

fn c(n: u64) -> Coef {
    Coef::from(n as i64)
}

fn one() -> Coef {
    Coef::from(1)
}

/// Channel labels in column order: wired, local, then subchannels.
fn channel_labels(k: u32) -> Vec<String> {
    let mut v = vec!["b".to_string(), "c".to_string()];
    v.extend((1..=k).map(|i| i.to_string()));
    v
}

struct Builder<'a> {
    inst: &'a ProblemInstance,
    m: LinearModel,
    eps: Coef,
    big: Coef,
    /// x[v][i], xt[v][i]
    x: Vec<Vec<usize>>,
    xt: Vec<Vec<usize>>,
    /// y[e][k], yt[e][k] in `channel_labels` order
    y: Vec<Vec<usize>>,
    yt: Vec<Vec<usize>>,
}

impl<'a> Builder<'a> {
    fn new(inst: &'a ProblemInstance, cfg: &EncoderConfig, cap: TimeUnits) -> Result<Self> {
        if cfg.epsilon <= Coef::from(0) || cfg.epsilon >= one() {
            return Err(Error::Config(format!("epsilon {} outside (0, 1)", cfg.epsilon)));
        }
        if inst.network().rack_count == 0 {
            return Err(Error::InvalidNetwork("at least one rack is required".into()));
        }
        let big = cfg.big_m.unwrap_or_else(|| upper_bound(inst.job()));
        if big < cap {
            return Err(Error::Config(format!("big-M {big} below the makespan cap {cap}")));
        }
        Ok(Builder {
            inst,
            m: LinearModel::new(),
            eps: cfg.epsilon,
            big: c(big.0),
            x: Vec::new(),
            xt: Vec::new(),
            y: Vec::new(),
            yt: Vec::new(),
        })
    }

    fn build(mut self, lower: TimeUnits, cap: TimeUnits, objective: bool) -> Result<LinearModel> {
        use Sense::*;
        let inst = self.inst;
        let tasks = inst.tasks();
        let edges = inst.edges();
        let racks = inst.network().rack_count as usize;
        let labels = channel_labels(inst.network().subchannel_count);
        let (big, eps) = (self.big, self.eps);
        let n = tasks.len();

        for t in tasks {
            let xs = (1..=racks)
                .map(|i| self.m.add_var(format!("x_{}_{i}", t.id), VarKind::Binary, c(0), one()))
                .collect();
            let xts = (1..=racks)
                .map(|i| self.m.add_var(format!("xt_{}_{i}", t.id), VarKind::Continuous, c(0), big))
                .collect();
            self.x.push(xs);
            self.xt.push(xts);
        }
        for e in edges {
            let (u, v) = (e.producer, e.consumer);
            let ys = labels
                .iter()
                .map(|k| self.m.add_var(format!("y_{u}_{v}_{k}"), VarKind::Binary, c(0), one()))
                .collect();
            let yts = labels
                .iter()
                .map(|k| self.m.add_var(format!("yt_{u}_{v}_{k}"), VarKind::Continuous, c(0), big))
                .collect();
            self.y.push(ys);
            self.yt.push(yts);
        }
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        let mut psi = std::collections::HashMap::new();
        let mut sig = std::collections::HashMap::new();
        for &(a, b) in &pairs {
            let (ia, ib) = (tasks[a].id, tasks[b].id);
            let ps: Vec<usize> = (1..=racks)
                .map(|i| self.m.add_var(format!("psi_{ia}_{ib}_{i}"), VarKind::Binary, c(0), one()))
                .collect();
            psi.insert((a, b), ps);
            sig.insert((a, b), self.m.add_var(format!("sig_{ia}_{ib}"), VarKind::Binary, c(0), one()));
        }
        let me = edges.len();
        let epairs: Vec<(usize, usize)> = (0..me)
            .flat_map(|a| (0..me).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        // contention columns: wired, then subchannels
        let contended: Vec<usize> = std::iter::once(0).chain(2..labels.len()).collect();
        let mut chi = std::collections::HashMap::new();
        let mut phi = std::collections::HashMap::new();
        for &(a, b) in &epairs {
            let (ea, eb) = (edges[a].key(), edges[b].key());
            let tag = format!("{}_{}_{}_{}", ea.producer, ea.consumer, eb.producer, eb.consumer);
            let cs: Vec<usize> = contended
                .iter()
                .map(|&k| self.m.add_var(format!("chi_{tag}_{}", labels[k]), VarKind::Binary, c(0), one()))
                .collect();
            chi.insert((a, b), cs);
            phi.insert((a, b), self.m.add_var(format!("phi_{tag}"), VarKind::Binary, c(0), one()));
        }
        let cmax = self.m.add_var("Cmax".into(), VarKind::Continuous, c(lower.0), c(cap.0));

        let start = |xt: &Vec<Vec<usize>>, v: usize, s: Coef| -> Vec<(usize, Coef)> {
            xt[v].iter().map(|&i| (i, s)).collect()
        };
        let estart = |yt: &Vec<Vec<usize>>, e: usize, s: Coef| -> Vec<(usize, Coef)> {
            yt[e].iter().map(|&i| (i, s)).collect()
        };

        // every task on exactly one rack
        for v in 0..n {
            let terms = self.x[v].iter().map(|&i| (i, one())).collect();
            self.m.add_constraint(format!("one_rack_per_task_{}", tasks[v].id), terms, Eq, one());
        }
        // every edge on exactly one channel
        for e in 0..me {
            let terms = self.y[e].iter().map(|&i| (i, one())).collect();
            self.m.add_constraint(format!("one_channel_per_edge_{}", edge_tag(inst, e)), terms, Eq, one());
        }
        // start variables vanish unless their indicator is set
        for v in 0..n {
            for i in 0..racks {
                let (x, xt) = (self.x[v][i], self.xt[v][i]);
                let tag = format!("{}_{}", tasks[v].id, i + 1);
                self.m.add_constraint(format!("task_start_needs_rack_{tag}"), vec![(xt, one()), (x, -(big + eps))], Le, one() - eps);
                self.m.add_constraint(format!("task_start_zero_off_rack_{tag}"), vec![(xt, one()), (x, -big)], Le, c(0));
            }
        }
        for e in 0..me {
            for k in 0..labels.len() {
                let (y, yt) = (self.y[e][k], self.yt[e][k]);
                let tag = format!("{}_{}", edge_tag(inst, e), labels[k]);
                self.m.add_constraint(format!("transfer_start_needs_channel_{tag}"), vec![(yt, one()), (y, -(big + eps))], Le, one() - eps);
                self.m.add_constraint(format!("transfer_start_zero_off_channel_{tag}"), vec![(yt, one()), (y, -big)], Le, c(0));
            }
        }
        // same-rack and same-channel indicators
        for &(a, b) in &pairs {
            let tag = format!("{}_{}", tasks[a].id, tasks[b].id);
            let ps = &psi[&(a, b)];
            self.m.add_constraint(format!("same_rack_once_{tag}"), ps.iter().map(|&p| (p, one())).collect(), Le, one());
            for i in 0..racks {
                let t = vec![(self.x[a][i], one()), (self.x[b][i], one()), (ps[i], c(2) * -one())];
                self.m.add_constraint(format!("same_rack_only_if_both_{tag}_{}", i + 1), t.clone(), Ge, c(0));
                self.m.add_constraint(format!("same_rack_if_both_{tag}_{}", i + 1), t, Le, one());
            }
        }
        for &(a, b) in &epairs {
            let tag = format!("{}_{}", edge_tag(inst, a), edge_tag(inst, b));
            let cs = &chi[&(a, b)];
            self.m.add_constraint(format!("same_channel_once_{tag}"), cs.iter().map(|&p| (p, one())).collect(), Le, one());
            for (j, &k) in contended.iter().enumerate() {
                let t = vec![(self.y[a][k], one()), (self.y[b][k], one()), (cs[j], c(2) * -one())];
                self.m.add_constraint(format!("same_channel_only_if_both_{tag}_{}", labels[k]), t.clone(), Ge, c(0));
                self.m.add_constraint(format!("same_channel_if_both_{tag}_{}", labels[k]), t, Le, one());
            }
        }
        // task order and rack non-overlap
        for &(a, b) in &pairs {
            let tag = format!("{}_{}", tasks[a].id, tasks[b].id);
            let s = sig[&(a, b)];
            let mut t = start(&self.xt, b, one());
            t.extend(start(&self.xt, a, -one()));
            t.push((s, -(big + eps)));
            self.m.add_constraint(format!("task_order_{tag}"), t, Le, -eps);
            if a < b {
                let back = sig[&(b, a)];
                self.m.add_constraint(format!("task_order_total_{tag}"), vec![(s, one()), (back, one())], Ge, one());
            }
            let mut t = start(&self.xt, a, one());
            t.extend(start(&self.xt, b, -one()));
            t.push((s, big));
            t.extend(psi[&(a, b)].iter().map(|&p| (p, big)));
            let p = c(tasks[a].processing_time.0);
            self.m.add_constraint(format!("rack_no_overlap_{tag}"), t, Le, c(2) * big - p);
        }
        // flow order and channel non-overlap
        let durations = inst.durations();
        for &(a, b) in &epairs {
            let tag = format!("{}_{}", edge_tag(inst, a), edge_tag(inst, b));
            let f = phi[&(a, b)];
            let mut t = estart(&self.yt, b, one());
            t.extend(estart(&self.yt, a, -one()));
            t.push((f, -(big + eps)));
            self.m.add_constraint(format!("flow_order_{tag}"), t, Le, -eps);
            if a < b {
                let back = phi[&(b, a)];
                self.m.add_constraint(format!("flow_order_total_{tag}"), vec![(f, one()), (back, one())], Ge, one());
            }
            let (qa, qwa) = durations[a];
            let (qb, qwb) = durations[b];
            // empty transfers never conflict
            if qa.0 > 0 && qb.0 > 0 {
                let t = vec![
                    (self.yt[a][0], one()),
                    (self.yt[b][0], -one()),
                    (f, big),
                    (chi[&(a, b)][0], big),
                ];
                self.m.add_constraint(format!("wired_no_overlap_{tag}"), t, Le, c(2) * big - c(qa.0));
            }
            if labels.len() > 2 && qwa.0 > 0 && qwb.0 > 0 {
                let mut t: Vec<(usize, Coef)> = Vec::new();
                for k in 2..labels.len() {
                    t.push((self.yt[a][k], one()));
                    t.push((self.yt[b][k], -one()));
                }
                t.push((f, big));
                t.extend(chi[&(a, b)][1..].iter().map(|&x| (x, big)));
                self.m.add_constraint(format!("wireless_no_overlap_{tag}"), t, Le, c(2) * big - c(qwa.0));
            }
        }
        // producer before transfer, transfer before consumer, locality
        for (e, edge) in edges.iter().enumerate() {
            let tag = edge_tag(inst, e);
            let (u, v) = (inst.index().src[e], inst.index().dst[e]);
            let mut t = start(&self.xt, u, one());
            t.extend(estart(&self.yt, e, -one()));
            self.m.add_constraint(format!("transfer_after_producer_{tag}"), t, Le, -c(tasks[u].processing_time.0));

            let (q, qw) = durations[e];
            let mut t = estart(&self.yt, e, one());
            t.push((self.y[e][0], c(q.0)));
            t.push((self.y[e][1], c(edge.local_delay.0)));
            t.extend((2..labels.len()).map(|k| (self.y[e][k], c(qw.0))));
            t.extend(start(&self.xt, v, -one()));
            self.m.add_constraint(format!("consumer_after_transfer_{tag}"), t, Le, c(0));

            let mut t: Vec<(usize, Coef)> = psi[&(u, v)].iter().map(|&p| (p, one())).collect();
            t.push((self.y[e][1], -one()));
            self.m.add_constraint(format!("local_iff_same_rack_{tag}"), t, Eq, c(0));
        }
        // makespan
        for v in 0..n {
            let mut t = vec![(cmax, one())];
            t.extend(start(&self.xt, v, -one()));
            self.m.add_constraint(
                format!("makespan_covers_{}", tasks[v].id),
                t,
                Ge,
                c(tasks[v].processing_time.0),
            );
        }
        if objective {
            self.m.set_objective(vec![(cmax, one())]);
        }
        Ok(self.m)
    }
}

fn edge_tag(inst: &ProblemInstance, e: usize) -> String {
    let k = inst.edges()[e].key();
    format!("{}_{}", k.producer, k.consumer)
}

fn label_of(ch: Channel) -> String {
    match ch {
        Channel::Local => "c".into(),
        Channel::Wired => "b".into(),
        Channel::Wireless(k) => k.to_string(),
    }
}

/// Values of every model variable that represent `schedule`. Order
/// indicators compare start times; ties set both directions.
pub fn encode_schedule(model: &LinearModel, instance: &ProblemInstance, schedule: &Schedule) -> Result<Assignment> {
    let mut vals = vec![Coef::from(0); model.variables.len()];
    let mut set = |name: String, value: Coef| -> Result<()> {
        let i = model
            .var(&name)
            .ok_or_else(|| Error::Precondition(format!("model has no variable {name}")))?;
        vals[i] = value;
        Ok(())
    };
    let slot = |id: TaskId| schedule.task_slot(id).ok_or(Error::MissingTaskSlot(id));
    let tasks = instance.tasks();
    for t in tasks {
        let s = slot(t.id)?;
        set(format!("x_{}_{}", t.id, s.rack), one())?;
        set(format!("xt_{}_{}", t.id, s.rack), c(s.start.0))?;
    }
    let mut edge_start = Vec::new();
    let mut edge_label = Vec::new();
    for e in instance.edges() {
        let k = e.key();
        let es = schedule
            .edge_slot(k)
            .ok_or_else(|| Error::Precondition(format!("schedule has no slot for edge {k}")))?;
        let l = label_of(es.channel);
        set(format!("y_{}_{}_{l}", k.producer, k.consumer), one())?;
        set(format!("yt_{}_{}_{l}", k.producer, k.consumer), c(es.start.0))?;
        edge_start.push(es.start.0);
        edge_label.push(l);
    }
    for a in tasks {
        for b in tasks {
            if a.id == b.id {
                continue;
            }
            let (sa, sb) = (slot(a.id)?, slot(b.id)?);
            if sa.rack == sb.rack {
                set(format!("psi_{}_{}_{}", a.id, b.id, sa.rack), one())?;
            }
            if sa.start <= sb.start {
                set(format!("sig_{}_{}", a.id, b.id), one())?;
            }
        }
    }
    let edges = instance.edges();
    for (a, ea) in edges.iter().enumerate() {
        for (b, eb) in edges.iter().enumerate() {
            if a == b {
                continue;
            }
            let tag = format!("{}_{}_{}_{}", ea.producer, ea.consumer, eb.producer, eb.consumer);
            if edge_label[a] == edge_label[b] && edge_label[a] != "c" {
                set(format!("chi_{tag}_{}", edge_label[a]), one())?;
            }
            if edge_start[a] <= edge_start[b] {
                set(format!("phi_{tag}"), one())?;
            }
        }
    }
    set("Cmax".into(), c(makespan(schedule, instance.job())?.0))?;
    Ok(vals)
}

/// Reads racks, channels and start times back out of an assignment.
pub fn decode_assignment(model: &LinearModel, instance: &ProblemInstance, values: &[Coef]) -> Result<Schedule> {
    let get = |name: String| -> Result<Coef> {
        model
            .var(&name)
            .map(|i| values[i])
            .ok_or_else(|| Error::Precondition(format!("model has no variable {name}")))
    };
    let time = |x: Coef| -> Result<TimeUnits> {
        if !x.is_integer() || x < Coef::from(0) {
            return Err(Error::Precondition(format!("start time {x} is not a whole tick")));
        }
        Ok(TimeUnits(x.to_integer() as u64))
    };
    let racks = instance.network().rack_count;
    let mut task_slots = Vec::new();
    for t in instance.tasks() {
        let mut rack = None;
        let mut s = Coef::from(0);
        for i in 1..=racks {
            if get(format!("x_{}_{i}", t.id))? == one() {
                rack = Some(i);
            }
            s += get(format!("xt_{}_{i}", t.id))?;
        }
        let rack = rack.ok_or_else(|| Error::Precondition(format!("task {} has no rack", t.id)))?;
        task_slots.push(TaskSlot { task: t.id, rack, start: time(s)? });
    }
    let labels = channel_labels(instance.network().subchannel_count);
    let mut edge_slots = Vec::new();
    for e in instance.edges() {
        let (u, v) = (e.producer, e.consumer);
        let mut channel = None;
        let mut s = Coef::from(0);
        for (k, l) in labels.iter().enumerate() {
            if get(format!("y_{u}_{v}_{l}"))? == one() {
                channel = Some(match k {
                    0 => Channel::Wired,
                    1 => Channel::Local,
                    _ => Channel::Wireless(k as u32 - 1),
                });
            }
            s += get(format!("yt_{u}_{v}_{l}"))?;
        }
        let channel = channel.ok_or_else(|| Error::Precondition(format!("edge {} has no channel", e.key())))?;
        edge_slots.push(EdgeSlot { producer: u, consumer: v, channel, start: time(s)? });
    }
    Ok(Schedule { task_slots, edge_slots })
}
