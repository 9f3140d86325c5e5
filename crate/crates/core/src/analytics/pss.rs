//! Perceived Stress Scale, 10 items scored 0..4.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Participants at or above this total are included.
pub const SCREEN_THRESHOLD: u32 = 14;

/// 1-based positively worded items, scored as `4 - raw`.
pub const REVERSED: [usize; 4] = [4, 5, 7, 8];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PssResponse {
    pub participant_id: String,
    pub items: [i64; 10],
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("participant {participant}: item P{item} = {value} is outside 0..4")]
pub struct PssError {
    pub participant: String,
    pub item: usize,
    pub value: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Screening {
    Included,
    Excluded,
}

pub fn score_pss10(r: &PssResponse) -> Result<u32, PssError> {
    let mut total = 0;
    for (i, &raw) in r.items.iter().enumerate() {
        if !(0..=4).contains(&raw) {
            return Err(PssError {
                participant: r.participant_id.clone(),
                item: i + 1,
                value: raw,
            });
        }
        total += if REVERSED.contains(&(i + 1)) {
            4 - raw
        } else {
            raw
        };
    }
    Ok(total as u32)
}

pub fn screen_participant(pss: u32) -> Screening {
    if pss >= SCREEN_THRESHOLD {
        Screening::Included
    } else {
        Screening::Excluded
    }
}
