//! Regions of a solution model and attribution of steps to them.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{Label, NodeId, ProcessModel};
use crate::patterns::{apply_pattern, PatternInstance};
use crate::session::{replay_effects, Effect, SessionLog};

use super::deviation::{projected_states, touched_labels};
use super::{AnalysisError, DeviationReport, RegionCounts, StepMarker};

pub const REGIONS_FORMAT: &str = "patternbench-regions";

/// Label of the bucket for steps no region claims.
pub const UNATTRIBUTED: &str = "∅";

/// Named subtrees of a solution model. Regions may nest.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegionMap {
    pub regions: BTreeMap<String, NodeId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionsDoc {
    format: String,
    version: u32,
    regions: BTreeMap<String, NodeId>,
}

impl RegionMap {
    pub fn from_json(text: &str) -> Result<RegionMap, AnalysisError> {
        let doc: RegionsDoc =
            serde_json::from_str(text).map_err(|error| AnalysisError::Region("document".into(), error.to_string()))?;
        if doc.format != REGIONS_FORMAT || doc.version != 1 {
            return Err(AnalysisError::Region("document".into(), format!("unsupported format {}", doc.format)));
        }
        Ok(RegionMap { regions: doc.regions })
    }

    pub fn to_json(&self) -> String {
        let doc = RegionsDoc { format: REGIONS_FORMAT.into(), version: 1, regions: self.regions.clone() };
        serde_json::to_string_pretty(&doc).expect("regions serialize")
    }

    /// Every region must name a node of `solution` that has activities.
    pub fn validate(&self, solution: &ProcessModel) -> Result<(), AnalysisError> {
        for (name, id) in &self.regions {
            let node = solution.node(*id).ok_or_else(|| AnalysisError::Region(name.clone(), format!("no node {id}")))?;
            if node.labels().is_empty() {
                return Err(AnalysisError::Region(name.clone(), "contains no activities".into()));
            }
        }
        Ok(())
    }
}

struct Region {
    name: String,
    labels: BTreeSet<Label>,
    depth: usize,
}

struct Attribution {
    regions: Vec<Region>,
}

impl Attribution {
    fn new(map: &RegionMap, solution: &ProcessModel) -> Attribution {
        let regions = map
            .regions
            .iter()
            .map(|(name, id)| Region {
                name: name.clone(),
                labels: solution.node(*id).map(|node| node.labels().into_iter().collect()).unwrap_or_default(),
                depth: solution.root().path_to(*id).map_or(0, |path| path.len()),
            })
            .collect();
        Attribution { regions }
    }

    /// Smallest region sharing a label with `touched`; ties go to the
    /// innermost, then to the first name.
    fn region_of(&self, touched: &BTreeSet<Label>) -> String {
        self.regions
            .iter()
            .filter(|region| !region.labels.is_disjoint(touched))
            .min_by(|a, b| {
                (a.labels.len(), std::cmp::Reverse(a.depth), &a.name).cmp(&(
                    b.labels.len(),
                    std::cmp::Reverse(b.depth),
                    &b.name,
                ))
            })
            .map_or_else(|| UNATTRIBUTED.to_string(), |region| region.name.clone())
    }
}

/// Fills `per_region` of `report`: each counted detour or failed trial and
/// each step of the product witness goes to one region, or to `∅`.
pub fn map_to_regions(
    mut report: DeviationReport,
    log: &SessionLog,
    solution: &ProcessModel,
    regions: &RegionMap,
) -> Result<DeviationReport, AnalysisError> {
    regions.validate(solution)?;
    let attribution = Attribution::new(regions, solution);
    let (states, effects) = replay_effects(log)?;
    let states = projected_states(log, &states, &effects);
    let mut per_region: BTreeMap<String, RegionCounts> = BTreeMap::new();
    for step in &report.per_step {
        if !step.counted || step.marker == StepMarker::OnOptimalPath {
            continue;
        }
        let touched = step_touched(log, &states, &effects, step.event);
        per_region.entry(attribution.region_of(&touched)).or_default().process += 1;
    }
    let mut current = states.last().expect("at least the empty state").clone();
    for pattern in &report.product_witness {
        let touched = touched_labels(&current, pattern);
        per_region.entry(attribution.region_of(&touched)).or_default().product += 1;
        current = apply_pattern(&current, pattern).map_err(|error| AnalysisError::Unreachable(error.to_string()))?;
    }
    report.per_region = per_region;
    Ok(report)
}

fn step_touched(log: &SessionLog, states: &[ProcessModel], effects: &[Effect], event: usize) -> BTreeSet<Label> {
    let applied = |index: usize| -> Option<&PatternInstance> {
        match &log.events[index].action {
            crate::session::Action::Apply { pattern } => Some(pattern),
            _ => None,
        }
    };
    let index = match effects[event] {
        Effect::Undid(undone) => undone,
        _ => event,
    };
    applied(index).map(|pattern| touched_labels(&states[index], pattern)).unwrap_or_default()
}
