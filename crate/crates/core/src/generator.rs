//! Seeded workload families: simple MapReduce, one-stage MapReduce and
//! random DAGs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DataEdge, JobGraph, NetworkConfig, ProblemInstance, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    /// Target ratio of mean wired transfer time to mean processing time.
    #[serde(rename = "rho")]
    pub network_factor: f64,
    /// Inclusive range of processing times, in ticks.
    pub processing_range: (u64, u64),
    /// Network of the generated instance; `None` gives one rack per task and
    /// a single subchannel.
    #[serde(default)]
    pub network: Option<NetworkConfig>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            network_factor: 0.5,
            processing_range: (1, 100),
            network: None,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.network_factor > 0.0 && self.network_factor.is_finite()) {
            return Err(Error::Config(format!("network factor must be positive, got {}", self.network_factor)));
        }
        let (lo, hi) = self.processing_range;
        if lo == 0 || lo > hi {
            return Err(Error::Config(format!("bad processing range [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Upper end of the wired transfer-time draw. Transfer times are uniform
    /// on `[1, max_transfer]`, whose mean is `network_factor` times the mean
    /// processing time (up to rounding).
    pub fn max_transfer(&self) -> u64 {
        let (lo, hi) = self.processing_range;
        let mean_p = (lo + hi) as f64 / 2.0;
        ((2.0 * self.network_factor * mean_p - 1.0).round() as u64).max(1)
    }
}

/// Workflow shape, with its size parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    SimpleMapreduce { n_map: usize },
    OnestageMapreduce { n_map: usize, n_reduce: usize },
    RandomDag { n_tasks: usize, edge_prob: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::SimpleMapreduce { .. } => "simple-mapreduce",
            Family::OnestageMapreduce { .. } => "onestage-mapreduce",
            Family::RandomDag { .. } => "random-dag",
        }
    }

    pub fn generate(&self, cfg: &GenConfig) -> Result<ProblemInstance> {
        match *self {
            Family::SimpleMapreduce { n_map } => gen_simple_mapreduce(n_map, cfg),
            Family::OnestageMapreduce { n_map, n_reduce } => gen_onestage_mapreduce(n_map, n_reduce, cfg),
            Family::RandomDag { n_tasks, edge_prob } => gen_random_dag(n_tasks, edge_prob, cfg),
        }
    }
}

/// `n_map` map tasks feeding one reduce task.
pub fn gen_simple_mapreduce(n_map: usize, cfg: &GenConfig) -> Result<ProblemInstance> {
    if n_map == 0 {
        return Err(Error::Config("n_map must be at least 1".into()));
    }
    let reduce = n_map as u32 + 1;
    let pairs = (1..=n_map as u32).map(|m| (m, reduce)).collect();
    build(n_map + 1, pairs, cfg, &mut rng(cfg))
}

/// Every map task feeds every reduce task.
pub fn gen_onestage_mapreduce(n_map: usize, n_reduce: usize, cfg: &GenConfig) -> Result<ProblemInstance> {
    if n_map == 0 || n_reduce == 0 {
        return Err(Error::Config("n_map and n_reduce must be at least 1".into()));
    }
    let pairs = (1..=n_map as u32)
        .flat_map(|m| (1..=n_reduce as u32).map(move |r| (m, n_map as u32 + r)))
        .collect();
    build(n_map + n_reduce, pairs, cfg, &mut rng(cfg))
}

/// Each pair `i < j` gets an edge with probability `edge_prob`.
pub fn gen_random_dag(n_tasks: usize, edge_prob: f64, cfg: &GenConfig) -> Result<ProblemInstance> {
    if n_tasks == 0 {
        return Err(Error::Config("n_tasks must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::Config(format!("edge probability {edge_prob} outside [0, 1]")));
    }
    let mut rng = rng(cfg);
    let mut pairs = Vec::new();
    for i in 1..=n_tasks as u32 {
        for j in i + 1..=n_tasks as u32 {
            if rng.gen_bool(edge_prob) {
                pairs.push((i, j));
            }
        }
    }
    build(n_tasks, pairs, cfg, &mut rng)
}

fn rng(cfg: &GenConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn build(n: usize, pairs: Vec<(u32, u32)>, cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Result<ProblemInstance> {
    cfg.validate()?;
    let network = cfg
        .network
        .clone()
        .unwrap_or_else(|| NetworkConfig::new(n as u32, 1));
    let (lo, hi) = cfg.processing_range;
    let tasks = (1..=n as u32).map(|id| Task::new(id, rng.gen_range(lo..=hi))).collect();
    let max_q = cfg.max_transfer();
    let edges = pairs
        .into_iter()
        .map(|(u, v)| {
            let q = rng.gen_range(1..=max_q);
            DataEdge::new(u, v, network.data_size_for_wired(q), 0)
        })
        .collect();
    ProblemInstance::new(JobGraph { tasks, edges }, network)
}
