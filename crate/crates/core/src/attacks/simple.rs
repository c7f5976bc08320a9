//! Threshold attacks that read a single column of the score records.

use crate::attacks::AttackOutput;
use crate::error::Result;
use crate::scores::ScoreRecord;

/// Loss-threshold attack: the membership score is the target model's
/// log-probability of the true class. Members tend to have lower loss.
pub fn yeom_attack(records: &[ScoreRecord]) -> Result<AttackOutput> {
    AttackOutput::new(
        "yeom",
        records.iter().map(|r| r.sample_id).collect(),
        records.iter().map(|r| r.s_target).collect(),
        records.iter().map(|r| r.is_member).collect(),
    )
}

/// Difficulty-calibrated threshold attack: thresholds the target score
/// minus the reference score, discounting samples that any model finds
/// easy.
pub fn watson_attack(records: &[ScoreRecord]) -> Result<AttackOutput> {
    AttackOutput::new(
        "watson",
        records.iter().map(|r| r.sample_id).collect(),
        records.iter().map(|r| r.s_cal).collect(),
        records.iter().map(|r| r.is_member).collect(),
    )
}
