//! JSON solution files: the two vectors plus an optional decoded view and
//! objective breakdown. Only `upper` and `lower` are read back.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use vrpdt_core::{DecodedPlan, Encoding, EvalReport, Instance, NodeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SortieView {
    pub launch: NodeId,
    pub customer: NodeId,
    pub rendezvous: NodeId,
    pub drone: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteView {
    pub truck: usize,
    pub visits: Vec<NodeId>,
    pub sorties: Vec<SortieView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportView {
    pub z: f64,
    pub pen_endurance: f64,
    pub pen_truck_load: f64,
    pub pen_drone_load: f64,
    pub pen_duration: f64,
    pub pen_lateness: f64,
    pub p_z: f64,
    pub feasible: bool,
}

impl From<&EvalReport> for ReportView {
    fn from(r: &EvalReport) -> Self {
        Self {
            z: r.z,
            pen_endurance: r.endurance_penalty,
            pen_truck_load: r.truck_load_penalty,
            pen_drone_load: r.drone_load_penalty,
            pen_duration: r.duration_penalty,
            pen_lateness: r.lateness_penalty,
            p_z: r.p_z,
            feasible: r.feasible,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub upper: Vec<NodeId>,
    pub lower: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routes: Option<Vec<RouteView>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportView>,
}

impl SolutionFile {
    pub fn new(enc: &Encoding) -> Self {
        Self { upper: enc.upper.clone(), lower: enc.flags(), routes: None, report: None }
    }

    pub fn with_plan(mut self, plan: &DecodedPlan) -> Self {
        self.routes = Some(
            plan.routes
                .iter()
                .map(|r| RouteView {
                    truck: r.truck_id,
                    visits: r.visits.clone(),
                    sorties: r
                        .sorties
                        .iter()
                        .map(|s| SortieView {
                            launch: s.launch,
                            customer: s.customer,
                            rendezvous: s.rendezvous,
                            drone: s.drone_id,
                        })
                        .collect(),
                })
                .collect(),
        );
        self
    }

    pub fn with_report(mut self, report: &EvalReport) -> Self {
        self.report = Some(report.into());
        self
    }

    pub fn encoding(&self) -> Encoding {
        Encoding::from_flags(self.upper.clone(), &self.lower)
    }

    /// The stored encoding, checked against `inst`.
    pub fn validated(&self, inst: &Instance) -> Result<Encoding> {
        anyhow::ensure!(self.lower.iter().all(|&f| f <= 1), "lower vector entries must be 0 or 1");
        let enc = self.encoding();
        enc.validate(inst)?;
        Ok(enc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}
