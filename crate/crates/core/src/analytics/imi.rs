//! Intrinsic Motivation Inventory: 37 items on a 1..7 scale, six dimensions.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::stats::{cohens_d, pooled_sd, t_test_pooled_two_tailed, GroupSummary, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimension {
    IE,
    PC,
    EI,
    PT,
    CH,
    VU,
}

impl Dimension {
    /// Report order.
    pub const ALL: [Dimension; 6] = [
        Dimension::IE,
        Dimension::PC,
        Dimension::EI,
        Dimension::PT,
        Dimension::CH,
        Dimension::VU,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            Dimension::IE => "IE",
            Dimension::PC => "PC",
            Dimension::EI => "EI",
            Dimension::PT => "PT",
            Dimension::CH => "CH",
            Dimension::VU => "VU",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Dimension::IE => "Interest/Enjoyment",
            Dimension::PC => "Perceived Competence",
            Dimension::EI => "Effort/Importance",
            Dimension::PT => "Pressure/Tension",
            Dimension::CH => "Perceived Choice",
            Dimension::VU => "Value/Usefulness",
        }
    }

    pub fn item_count(&self) -> usize {
        match self {
            Dimension::IE => 7,
            Dimension::PC => 6,
            Dimension::EI => 5,
            Dimension::PT => 5,
            Dimension::CH => 7,
            Dimension::VU => 7,
        }
    }

    /// 1-based numbers of the reverse-keyed items.
    pub fn reversed(&self) -> &'static [usize] {
        match self {
            Dimension::IE => &[3, 4],
            Dimension::PC => &[6],
            Dimension::EI => &[2, 5],
            Dimension::PT => &[1, 3],
            Dimension::CH => &[2, 3, 4, 5, 7],
            Dimension::VU => &[],
        }
    }

    pub fn item_keys(&self) -> impl Iterator<Item = String> + '_ {
        (1..=self.item_count()).map(move |i| format!("{}{i}", self.code()))
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// All 37 item keys in questionnaire and CSV column order.
pub fn all_item_keys() -> Vec<String> {
    Dimension::ALL.iter().flat_map(|d| d.item_keys()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    /// Played the game.
    E,
    /// Control.
    C,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImiResponse {
    pub participant_id: String,
    pub group: Group,
    /// Raw answers keyed `IE1`..`VU7`.
    pub items: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImiError {
    #[error("participant {participant}: item {key} is missing")]
    MissingItem { participant: String, key: String },
    #[error("participant {participant}: item {key} = {value} is outside 1..7")]
    OutOfRange {
        participant: String,
        key: String,
        value: i64,
    },
    #[error("group {0:?} has fewer than two participants")]
    GroupTooSmall(Group),
}

pub fn reverse_item(raw: i64) -> i64 {
    8 - raw
}

/// Per-dimension item means after reverse keying.
pub fn score_imi(r: &ImiResponse) -> Result<BTreeMap<Dimension, f64>, ImiError> {
    let mut out = BTreeMap::new();
    for d in Dimension::ALL {
        let mut sum = 0i64;
        for (i, key) in d.item_keys().enumerate() {
            let raw = *r.items.get(&key).ok_or_else(|| ImiError::MissingItem {
                participant: r.participant_id.clone(),
                key: key.clone(),
            })?;
            if !(1..=7).contains(&raw) {
                return Err(ImiError::OutOfRange {
                    participant: r.participant_id.clone(),
                    key,
                    value: raw,
                });
            }
            sum += if d.reversed().contains(&(i + 1)) {
                reverse_item(raw)
            } else {
                raw
            };
        }
        out.insert(d, sum as f64 / d.item_count() as f64);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DimensionReport {
    pub dimension: Dimension,
    pub mean_e: f64,
    pub sd_e: f64,
    pub mean_c: f64,
    pub sd_c: f64,
    pub t: f64,
    pub df: u32,
    pub p: f64,
    /// `None` when the pooled SD is zero.
    pub d: Option<f64>,
    pub degenerate: bool,
}

/// One row from two group summaries.
pub fn dimension_report(
    dimension: Dimension,
    e: &GroupSummary,
    c: &GroupSummary,
) -> Result<DimensionReport, StatsError> {
    let tt = t_test_pooled_two_tailed(e, c)?;
    let sp = pooled_sd(e.sd, c.sd, e.n, c.n)?;
    Ok(DimensionReport {
        dimension,
        mean_e: e.mean,
        sd_e: e.sd,
        mean_c: c.mean,
        sd_c: c.sd,
        t: tt.t,
        df: tt.df,
        p: tt.p,
        d: cohens_d(e.mean, c.mean, sp).ok(),
        degenerate: tt.degenerate,
    })
}

/// Score every response and compare the groups on each dimension.
pub fn build_group_report(dataset: &[ImiResponse]) -> Result<Vec<DimensionReport>, ImiError> {
    let mut scores: BTreeMap<(Group, Dimension), Vec<f64>> = BTreeMap::new();
    for r in dataset {
        for (d, s) in score_imi(r)? {
            scores.entry((r.group, d)).or_default().push(s);
        }
    }
    let summary = |g: Group, d: Dimension| {
        scores
            .get(&(g, d))
            .and_then(|xs| GroupSummary::from_sample(xs).ok())
            .ok_or(ImiError::GroupTooSmall(g))
    };
    Dimension::ALL
        .iter()
        .map(|&d| {
            let (e, c) = (summary(Group::E, d)?, summary(Group::C, d)?);
            Ok(dimension_report(d, &e, &c).expect("both groups have n >= 2"))
        })
        .collect()
}

/// Conventional p formatting: `<.001` below one in a thousand, otherwise three
/// decimals without the leading zero.
pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        "<.001".to_string()
    } else {
        let s = format!("{p:.3}");
        s.strip_prefix('0').map(str::to_string).unwrap_or(s)
    }
}

/// Aligned text table, one row per dimension.
pub fn render_report(rows: &[DimensionReport]) -> String {
    let mut out = format!(
        "{:<22} {:>13} {:>13} {:>8} {:>4} {:>6} {:>6}\n",
        "Dimension", "E M (SD)", "C M (SD)", "t", "df", "p", "d"
    );
    for r in rows {
        let d = r.d.map_or("n/a".to_string(), |d| format!("{d:.2}"));
        out.push_str(&format!(
            "{:<22} {:>13} {:>13} {:>8.3} {:>4} {:>6} {:>6}\n",
            r.dimension.label(),
            format!("{:.2} ({:.2})", r.mean_e, r.sd_e),
            format!("{:.2} ({:.2})", r.mean_c, r.sd_c),
            r.t,
            r.df,
            format_p(r.p),
            d
        ));
    }
    out
}
