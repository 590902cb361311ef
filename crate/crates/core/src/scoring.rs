//! Per-instance scoring of a parsed answer against ground truth.

use serde::{Deserialize, Serialize};

use crate::instance::{GroundTruth, Task};
use crate::metrics::{self, EditDistanceOptions, MatchBreakdown};
use crate::parsing::{AnswerValue, ParseStatus, ParsedAnswer};

/// Everything aggregation needs from one answered instance.
///
/// A failed parse is scored as wrong. For descriptions it is scored as an
/// empty list; for counts it carries no prediction and is left out of MSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceScore {
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edit_distance: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakdown: Option<MatchBreakdown>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jaccard: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_count: Option<u64>,
}

impl InstanceScore {
    fn plain(correct: bool) -> Self {
        Self {
            correct,
            edit_distance: None,
            breakdown: None,
            f1: None,
            jaccard: None,
            predicted_count: None,
            true_count: None,
        }
    }
}

pub fn score_instance(truth: &GroundTruth, parsed: &ParsedAnswer, opts: EditDistanceOptions) -> InstanceScore {
    match truth {
        GroundTruth::Search { present, .. } => {
            InstanceScore::plain(parsed.value == Some(AnswerValue::Bool(*present)))
        }
        GroundTruth::Count { count, .. } => {
            let predicted = match parsed.value {
                Some(AnswerValue::Count(n)) => Some(n),
                _ => None,
            };
            InstanceScore {
                predicted_count: predicted,
                true_count: Some(u64::from(*count)),
                ..InstanceScore::plain(predicted == Some(u64::from(*count)))
            }
        }
        GroundTruth::Describe { objects } => {
            let predicted = match &parsed.value {
                Some(AnswerValue::Objects(list)) => list.as_slice(),
                _ => &[],
            };
            let (distance, breakdown) = metrics::scene_edit_distance(predicted, objects, opts);
            InstanceScore {
                edit_distance: Some(distance),
                breakdown: Some(breakdown),
                f1: Some(metrics::f1(predicted, objects)),
                jaccard: Some(metrics::jaccard(predicted, objects)),
                ..InstanceScore::plain(distance == 0 && parsed.status != ParseStatus::Failed)
            }
        }
        GroundTruth::Spatial { correct, .. } => {
            InstanceScore::plain(parsed.value == Some(AnswerValue::Choice(*correct)))
        }
    }
}

/// One scored (instance, condition, model) triple for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub instance_id: String,
    pub task: Task,
    pub condition: String,
    pub model: String,
    pub metric: String,
    pub value: f64,
    pub parse_status: ParseStatus,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Target;
    use crate::scene::{Color, ObjectKind, Shape};

    #[test]
    fn failed_parse_is_wrong() {
        let truth = GroundTruth::Search {
            present: false,
            target: Target::Named("x".into()),
        };
        assert!(!score_instance(&truth, &ParsedAnswer::failed(), EditDistanceOptions::default()).correct);
        let truth = GroundTruth::Count {
            count: 0,
            target: Target::Named("x".into()),
        };
        let s = score_instance(&truth, &ParsedAnswer::failed(), EditDistanceOptions::default());
        assert!(!s.correct);
        assert_eq!(s.predicted_count, None);
    }

    #[test]
    fn failed_describe_scores_as_empty_list() {
        let rc = ObjectKind::new(Shape::Circle, Color::Red);
        let truth = GroundTruth::Describe { objects: vec![rc, rc] };
        let s = score_instance(&truth, &ParsedAnswer::failed(), EditDistanceOptions::default());
        assert_eq!(s.edit_distance, Some(4));
        assert_eq!(s.f1, Some(0.0));
    }
}
