//! JSON files for instances and schedules.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DataEdge, JobGraph, NetworkConfig, ProblemInstance, Schedule, Task};

/// On-disk instance: `{"tasks": [...], "edges": [...], "network": {...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub edges: Vec<DataEdge>,
    pub network: NetworkConfig,
}

impl From<&ProblemInstance> for InstanceFile {
    fn from(inst: &ProblemInstance) -> Self {
        InstanceFile {
            tasks: inst.tasks().to_vec(),
            edges: inst.edges().to_vec(),
            network: inst.network().clone(),
        }
    }
}

impl TryFrom<InstanceFile> for ProblemInstance {
    type Error = Error;

    fn try_from(f: InstanceFile) -> Result<Self> {
        ProblemInstance::new(JobGraph { tasks: f.tasks, edges: f.edges }, f.network)
    }
}

pub fn instance_from_json(text: &str) -> Result<ProblemInstance> {
    serde_json::from_str::<InstanceFile>(text)?.try_into()
}

/// Pretty-printed, with tasks and edges in canonical order.
pub fn instance_to_json(inst: &ProblemInstance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from(inst)).expect("serializable");
    s.push('\n');
    s
}

pub fn schedule_from_json(text: &str) -> Result<Schedule> {
    Ok(serde_json::from_str(text)?)
}

pub fn schedule_to_json(schedule: &Schedule) -> String {
    let mut s = serde_json::to_string_pretty(schedule).expect("serializable");
    s.push('\n');
    s
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub fn read_instance(path: &Path) -> Result<ProblemInstance> {
    instance_from_json(&read_text(path)?)
}

pub fn read_schedule(path: &Path) -> Result<Schedule> {
    schedule_from_json(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Channel, EdgeSlot, TaskId, TaskSlot};
    use crate::time::TimeUnits;

    const CHAIN: &str = r#"{
        "tasks": [{"id": 2, "p": 3}, {"id": 1, "p": 2}],
        "edges": [{"u": 1, "v": 2, "d": 40, "r": 1}],
        "network": {"racks": 2, "subchannels": 1, "wired_bw": 10000, "wireless_bw": 10000}
    }"#;

    #[test]
    fn instance_round_trip() {
        let inst = instance_from_json(CHAIN).unwrap();
        assert_eq!(inst.tasks()[0].id, TaskId(1));
        let text = instance_to_json(&inst);
        assert!(!text.contains("ticks_per_second"));
        assert_eq!(instance_from_json(&text).unwrap(), inst);
        assert_eq!(text, instance_to_json(&instance_from_json(&text).unwrap()));
    }

    #[test]
    fn missing_local_delay_defaults_to_zero() {
        let text = CHAIN.replace(r#", "r": 1"#, "");
        assert_eq!(instance_from_json(&text).unwrap().edges()[0].local_delay, TimeUnits(0));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(matches!(instance_from_json("{"), Err(Error::Json(_))));
        let cyclic = CHAIN.replace(r#"{"u": 1, "v": 2, "d": 40, "r": 1}"#, r#"{"u": 1, "v": 2, "d": 0}, {"u": 2, "v": 1, "d": 0}"#);
        assert!(matches!(instance_from_json(&cyclic), Err(Error::InvalidJob(_))));
        let extra = CHAIN.replace(r#""tasks""#, r#""bogus": 1, "tasks""#);
        assert!(instance_from_json(&extra).is_err());
    }

    #[test]
    fn schedule_json_shape() {
        let s = Schedule {
            task_slots: vec![TaskSlot { task: TaskId(1), rack: 1, start: TimeUnits(0) }],
            edge_slots: vec![
                EdgeSlot { producer: TaskId(1), consumer: TaskId(2), channel: Channel::Wireless(1), start: TimeUnits(2) },
                EdgeSlot { producer: TaskId(1), consumer: TaskId(3), channel: Channel::Local, start: TimeUnits(2) },
            ],
        };
        let text = schedule_to_json(&s);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["tasks"][0], serde_json::json!({"id": 1, "rack": 1, "start": 0}));
        assert_eq!(v["edges"][0]["channel"], serde_json::json!({"wireless": 1}));
        assert_eq!(v["edges"][1]["channel"], serde_json::json!("local"));
        assert_eq!(schedule_from_json(&text).unwrap(), s);
    }
}
