//! The five levels bundled with the crate, as `.lvl` text.

use crate::level::{parse_level, LevelDef};

pub const L1: &str = include_str!("../assets/levels/L1.lvl");
pub const L2: &str = include_str!("../assets/levels/L2.lvl");
pub const L3: &str = include_str!("../assets/levels/L3.lvl");
pub const L4: &str = include_str!("../assets/levels/L4.lvl");
pub const L5: &str = include_str!("../assets/levels/L5.lvl");

/// `(level_id, source)` in play order.
pub const ALL: [(&str, &str); 5] = [("L1", L1), ("L2", L2), ("L3", L3), ("L4", L4), ("L5", L5)];

pub fn source(level_id: &str) -> Option<&'static str> {
    ALL.iter().find(|(id, _)| *id == level_id).map(|(_, s)| *s)
}

/// Parse a bundled level. Panics only if the bundled text is broken, which
/// the test suite rules out.
pub fn level(level_id: &str) -> Option<LevelDef> {
    source(level_id).map(|s| parse_level(s).expect("bundled level parses"))
}
