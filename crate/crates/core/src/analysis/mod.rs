//! Session analysis against a solution model: pattern distance, optimal
//! paths, process and product deviations, dead ends and per-region totals.

mod deviation;
mod features;
mod regions;
mod search;

use thiserror::Error;

use crate::model::{Label, ProcessModel};
use crate::patterns::{Alphabet, PatternInstance};
use crate::session::SessionError;

pub use deviation::{
    analyze_session, process_deviations, product_deviations, CountingMode, DeviationOptions, DeviationReport,
    ProcessDeviations, ProductDeviations, RegionCounts, StepMarker, StepRecord, UndoCounting,
};
pub use regions::{map_to_regions, RegionMap, REGIONS_FORMAT};
pub use search::{
    distance, distance_within, optimal_paths, DagEdge, DagState, DistanceOptions, DistanceResult, PathDag,
    DEFAULT_ENUMERATE_LIMIT, DEFAULT_STATE_BUDGET,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("state budget exhausted after {explored} states; distance is at least {lower}{}", upper_text(.upper))]
    BudgetExceeded { lower: usize, upper: Option<usize>, explored: usize },
    #[error("alphabet lacks target labels {0:?}")]
    AlphabetMissing(Vec<Label>),
    #[error("target unreachable: {0}")]
    Unreachable(String),
    #[error("region {0}: {1}")]
    Region(String, String),
    #[error(transparent)]
    Session(#[from] SessionError),
}

fn upper_text(upper: &Option<usize>) -> String {
    upper.map(|upper| format!(" and at most {upper}")).unwrap_or_default()
}

/// Whether `target` is out of reach from `state` without deleting anything.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct DeadEnd {
    pub is_dead_end: bool,
    /// Delete-free completion, on the ids of `state`, when one exists.
    pub witness: Option<Vec<PatternInstance>>,
}

/// Decides whether the only way from `state` to `target` goes through a
/// delete. Exhaustive: delete-free moves never shrink a model, so the search
/// stays within the target's size.
pub fn dead_end(state: &ProcessModel, target: &ProcessModel, alphabet: &Alphabet) -> Result<DeadEnd, AnalysisError> {
    let mut problem = search::Problem::new(target, alphabet, usize::MAX)?;
    let witness = search::reach_without_delete(state, target, &mut problem);
    Ok(DeadEnd { is_dead_end: witness.is_none(), witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::canonical_key;
    use crate::patterns::apply_all;

    fn alphabet(labels: &[&str]) -> Alphabet {
        Alphabet::new(labels.iter().map(|l| Label::new(l).unwrap()))
    }

    fn d(source: &str, target: &str, labels: &[&str]) -> DistanceResult {
        let result = distance(
            &source.parse().unwrap(),
            &target.parse().unwrap(),
            &alphabet(labels),
            &DistanceOptions::default(),
        )
        .unwrap();
        let target: ProcessModel = target.parse().unwrap();
        for path in result.paths() {
            assert_eq!(path.len(), result.d);
            let end = apply_all(&source.parse().unwrap(), path).unwrap();
            assert_eq!(canonical_key(&end), canonical_key(&target));
        }
        result
    }

    #[test]
    fn small_distances() {
        assert_eq!(d("SEQ()", "SEQ()", &[]).d, 0);
        let one = d("SEQ()", "SEQ(A)", &["A"]);
        assert_eq!((one.d, one.optimal_paths.len()), (1, 1));
        assert_eq!(d("SEQ()", "SEQ(XOR(A, _))", &["A"]).d, 2);
        let r4 = d("SEQ()", "SEQ(XOR([c] X, Y))", &["X", "Y"]);
        assert_eq!(r4.d, 4);
        assert!(!r4.truncated);
        assert!(d("SEQ()", "SEQ(AND(A, B))", &["A", "B"]).optimal_paths.len() >= 2);
        assert_eq!(d("SEQ(B, A)", "SEQ(A, B)", &["A", "B"]).d, 2);
        assert_eq!(d("SEQ(A, Z)", "SEQ(A)", &["A"]).d, 1);
    }

    #[test]
    fn missing_labels_are_rejected() {
        let error = distance(
            &ProcessModel::new_empty(),
            &"SEQ(A)".parse().unwrap(),
            &Alphabet::default(),
            &DistanceOptions::default(),
        );
        assert!(matches!(error, Err(AnalysisError::AlphabetMissing(_))));
    }

    #[test]
    fn tiny_budget_reports_bounds() {
        let options = DistanceOptions { state_budget: 3, ..DistanceOptions::default() };
        let result = distance(
            &ProcessModel::new_empty(),
            &"SEQ(A, AND(B, C), XOR(D, _))".parse().unwrap(),
            &alphabet(&["A", "B", "C", "D"]),
            &options,
        );
        match result {
            Err(AnalysisError::BudgetExceeded { lower, upper: Some(upper), .. }) => assert!(lower <= upper),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dead_ends() {
        let target: ProcessModel = "SEQ(A, B)".parse().unwrap();
        let labels = alphabet(&["A", "B"]);
        let open = dead_end(&"SEQ(A)".parse().unwrap(), &target, &labels).unwrap();
        assert!(!open.is_dead_end);
        assert_eq!(open.witness.as_ref().map(Vec::len), Some(1));
        assert!(dead_end(&"SEQ(B, A)".parse().unwrap(), &target, &labels).unwrap().is_dead_end);
        assert!(dead_end(&"SEQ(A, Z)".parse().unwrap(), &target, &labels).unwrap().is_dead_end);
        assert_eq!(dead_end(&target, &target, &labels).unwrap().witness, Some(vec![]));
    }
}
