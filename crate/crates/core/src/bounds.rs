//! Makespan bounds from the job structure alone.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{topological_order, JobGraph, ProblemInstance};
use crate::time::TimeUnits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundPair {
    pub lower: TimeUnits,
    pub upper: TimeUnits,
}

impl BoundPair {
    pub fn new(lower: TimeUnits, upper: TimeUnits) -> Result<Self> {
        if lower > upper {
            return Err(Error::Precondition(format!(
                "lower bound {lower} exceeds upper bound {upper}"
            )));
        }
        Ok(BoundPair { lower, upper })
    }

    pub fn contains(&self, t: TimeUnits) -> bool {
        self.lower <= t && t <= self.upper
    }
}

/// Makespan of running every task back to back on one rack: the sum of all
/// processing times and local delays.
pub fn upper_bound(job: &JobGraph) -> TimeUnits {
    job.tasks.iter().map(|t| t.processing_time).sum::<TimeUnits>()
        + job.edges.iter().map(|e| e.local_delay).sum()
}

/// Longest path through the DAG where an edge (u, v) costs p_u + r_(u,v),
/// plus the processing time of the last task.
pub fn longest_branch(job: &JobGraph) -> Result<TimeUnits> {
    longest_path(job, |e| e.local_delay.0)
}

fn longest_path(job: &JobGraph, delay: impl Fn(&crate::model::DataEdge) -> u64) -> Result<TimeUnits> {
    let order = topological_order(job)?;
    let p: std::collections::HashMap<_, _> =
        job.tasks.iter().map(|t| (t.id, t.processing_time.0)).collect();
    let mut dist: std::collections::HashMap<_, u64> = order.iter().map(|&id| (id, 0)).collect();
    let mut incoming: std::collections::HashMap<_, Vec<_>> = Default::default();
    for e in &job.edges {
        incoming.entry(e.consumer).or_default().push(e);
    }
    let mut best = 0;
    for id in &order {
        let d = incoming
            .get(id)
            .into_iter()
            .flatten()
            .map(|e| dist[&e.producer] + p[&e.producer] + delay(e))
            .max()
            .unwrap_or(0);
        dist.insert(*id, d);
        best = best.max(d + p[id]);
    }
    Ok(TimeUnits(best))
}

/// `(longest_branch, upper_bound)`.
pub fn bound_pair(job: &JobGraph) -> Result<BoundPair> {
    let lower = longest_branch(job)?;
    let upper = upper_bound(job);
    debug_assert!(lower <= upper);
    BoundPair::new(lower, upper)
}

/// A lower bound that stays valid when local delays exceed transfer times:
/// each edge costs the cheapest mode the network allows, and with fewer racks
/// than tasks the total work spread over all racks is also a bound.
///
/// Equals [`longest_branch`] whenever every `r` is at most the matching
/// transfer time and there are enough racks.
pub fn network_lower_bound(instance: &ProblemInstance) -> TimeUnits {
    let net = instance.network();
    let durations = instance.durations();
    let edges = instance.edges();
    let cheapest: std::collections::HashMap<_, u64> = edges
        .iter()
        .zip(&durations)
        .map(|(e, &(q, qw))| {
            let mut c = e.local_delay.0;
            if net.rack_count >= 2 {
                c = c.min(q.0);
                if net.subchannel_count >= 1 {
                    c = c.min(qw.0);
                }
            }
            (e.key(), c)
        })
        .collect();
    let path = longest_path(instance.job(), |e| cheapest[&e.key()]).expect("validated instance");
    let work: u64 = instance.tasks().iter().map(|t| t.processing_time.0).sum();
    let spread = work.div_ceil(net.rack_count as u64);
    path.max(TimeUnits(spread))
}

/// Interval the exact search bisects: from [`network_lower_bound`] to
/// [`upper_bound`].
pub fn search_bounds(instance: &ProblemInstance) -> BoundPair {
    BoundPair {
        lower: network_lower_bound(instance),
        upper: upper_bound(instance.job()),
    }
}
