//! Shared fixtures for the integration tests.
#![allow(dead_code)]

pub mod lp;

use hybridsched::{DataEdge, JobGraph, NetworkConfig, ProblemInstance, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Network where one Mbit takes one tick on the wired channel and
/// `wireless_ticks_per_mbit` ticks on each subchannel.
pub fn unit_network(racks: u32, k: u32, wireless_ticks_per_mbit: u64) -> NetworkConfig {
    let mut net = NetworkConfig::new(racks, k);
    net.wired_bandwidth = 1_000;
    net.wireless_bandwidth = 1_000 / wireless_ticks_per_mbit;
    net
}

pub fn instance(p: &[u64], edges: &[(u32, u32, u64, u64)], net: NetworkConfig) -> ProblemInstance {
    let job = JobGraph {
        tasks: p.iter().enumerate().map(|(i, &p)| Task::new(i as u32 + 1, p)).collect(),
        edges: edges.iter().map(|&(u, v, d, r)| DataEdge::new(u, v, d, r)).collect(),
    };
    ProblemInstance::new(job, net).unwrap()
}

/// Two independent unit chains; each edge takes 4 ticks on either medium or
/// 100 ticks locally. Four racks.
pub fn parallel_chains(k: u32) -> ProblemInstance {
    instance(&[1, 1, 1, 1], &[(1, 2, 4, 100), (3, 4, 4, 100)], unit_network(4, k, 1))
}

#[derive(Debug, Clone, Copy)]
pub struct TinySpec {
    pub max_tasks: usize,
    pub max_edges: usize,
    pub max_racks: u32,
    pub max_k: u32,
    /// Local delays never exceed the wired transfer time.
    pub cheap_local: bool,
}

impl Default for TinySpec {
    fn default() -> Self {
        TinySpec { max_tasks: 5, max_edges: 6, max_racks: 3, max_k: 1, cheap_local: false }
    }
}

/// Random instance small enough for the brute-force oracle.
pub fn tiny(seed: u64, spec: TinySpec) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=spec.max_tasks);
    let p: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=6)).collect();
    let mut pairs: Vec<(u32, u32)> = (1..=n as u32)
        .flat_map(|u| ((u + 1)..=n as u32).map(move |v| (u, v)))
        .collect();
    let keep = rng.gen_range(0.3..0.9);
    pairs.retain(|_| rng.gen_bool(keep));
    pairs.truncate(spec.max_edges);
    let edges: Vec<_> = pairs
        .into_iter()
        .map(|(u, v)| {
            let d = if rng.gen_bool(0.15) { 0 } else { rng.gen_range(1..=6) };
            let r = if spec.cheap_local { rng.gen_range(0..=d) } else { rng.gen_range(0..=8) };
            (u, v, d, r)
        })
        .collect();
    let racks = rng.gen_range(1..=spec.max_racks);
    let k = rng.gen_range(0..=spec.max_k);
    let slow = if rng.gen_bool(0.3) { 2 } else { 1 };
    let net = if spec.cheap_local { unit_network(racks, k, 1) } else { unit_network(racks, k, slow) };
    instance(&p, &edges, net)
}
