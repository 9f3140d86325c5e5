//! Coded qualitative answers: per-level theme shares and sunburst documents.
//!
//! Shares are taken over code instances, so a participant may contribute
//! several codes to one level and question.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Weight of each level in the inner ring.
pub const LEVEL_WEIGHT: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Question {
    /// Exploring motivation.
    Q1,
    /// Metaphorical understanding.
    Q2,
    /// Realistic resonance.
    Q3,
}

impl Question {
    pub const ALL: [Question; 3] = [Question::Q1, Question::Q2, Question::Q3];

    pub fn theme_name(&self) -> &'static str {
        match self {
            Question::Q1 => "ExploringMotivation",
            Question::Q2 => "MetaphoricalUnderstanding",
            Question::Q3 => "RealisticResonance",
        }
    }
}

impl FromStr for Question {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "Q1" => Ok(Question::Q1),
            "Q2" => Ok(Question::Q2),
            "Q3" => Ok(Question::Q3),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    L1,
    L2,
    L3,
    L4,
    L5,
}

impl Level {
    pub const ALL: [Level; 5] = [Level::L1, Level::L2, Level::L3, Level::L4, Level::L5];
}

impl FromStr for Level {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Level::ALL
            .into_iter()
            .find(|l| format!("{l:?}") == s)
            .ok_or(())
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeCode {
    pub participant_id: String,
    pub level: Level,
    pub question: Question,
    pub theme: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SunburstNode {
    pub question: Question,
    pub level: Level,
    pub theme: String,
    pub level_proportion: f64,
    pub global_proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ThemeProportions {
    /// Grouped by question then level; within a cell by descending share,
    /// ties by label.
    pub nodes: Vec<SunburstNode>,
    /// One line per question/level cell without any codes.
    pub diagnostics: Vec<String>,
}

pub fn theme_proportions(codes: &[ThemeCode]) -> ThemeProportions {
    let mut cells: BTreeMap<(Question, Level), BTreeMap<&str, u32>> = BTreeMap::new();
    for c in codes {
        *cells
            .entry((c.question, c.level))
            .or_default()
            .entry(c.theme.as_str())
            .or_default() += 1;
    }
    let mut out = ThemeProportions::default();
    for q in Question::ALL {
        for l in Level::ALL {
            let Some(counts) = cells.get(&(q, l)) else {
                out.diagnostics.push(format!("{q}/{l}: no codes"));
                continue;
            };
            let total: u32 = counts.values().sum();
            let mut cell: Vec<SunburstNode> = counts
                .iter()
                .map(|(theme, &n)| {
                    let level_proportion = n as f64 / total as f64;
                    SunburstNode {
                        question: q,
                        level: l,
                        theme: theme.to_string(),
                        level_proportion,
                        global_proportion: level_proportion / 5.0,
                    }
                })
                .collect();
            cell.sort_by(|a, b| {
                b.level_proportion
                    .total_cmp(&a.level_proportion)
                    .then_with(|| a.theme.cmp(&b.theme))
            });
            out.nodes.extend(cell);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SunburstTheme {
    pub label: String,
    pub level_proportion: f64,
    pub global_proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SunburstRing {
    pub level: Level,
    pub weight: f64,
    pub themes: Vec<SunburstTheme>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SunburstDoc {
    pub question: Question,
    pub rings: Vec<SunburstRing>,
}

/// One document per question; every level gets a ring even when it has no
/// themes.
pub fn sunburst_export(nodes: &[SunburstNode]) -> Vec<SunburstDoc> {
    Question::ALL
        .iter()
        .map(|&q| SunburstDoc {
            question: q,
            rings: Level::ALL
                .iter()
                .map(|&l| {
                    let mut themes: Vec<&SunburstNode> = nodes
                        .iter()
                        .filter(|n| n.question == q && n.level == l)
                        .collect();
                    themes.sort_by(|a, b| {
                        b.level_proportion
                            .total_cmp(&a.level_proportion)
                            .then_with(|| a.theme.cmp(&b.theme))
                    });
                    SunburstRing {
                        level: l,
                        weight: LEVEL_WEIGHT,
                        themes: themes
                            .into_iter()
                            .map(|n| SunburstTheme {
                                label: n.theme.clone(),
                                level_proportion: n.level_proportion,
                                global_proportion: n.global_proportion,
                            })
                            .collect(),
                    }
                })
                .collect(),
        })
        .collect()
}
