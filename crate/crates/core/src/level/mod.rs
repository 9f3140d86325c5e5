//! Plain-text level definitions (`.lvl`): data model, parser, validator and
//! canonical serializer.
//!
//! ```text
//! # comment
//! [meta]
//! level_id = L1
//! distortion = Perfectionism
//! clinical_feature = ...
//! metaphor = ...
//! rhetoric = ...
//!
//! [physics]          # optional overrides
//! gravity = 60
//!
//! [mechanics]        # optional overrides
//! flee_delta0 = 6
//!
//! [entities]
//! spawn start 1 0
//! platform ground 0 -1 8 1
//! spike s1 4 0 1 0.5 type=fake
//! ```
//!
//! Entity lines are `kind id x y [w h] [key=value ...]`. Point kinds
//! (`spawn`, `npc_spawn`) take `x y`; every other kind takes a box given by
//! its bottom-left corner and size.

mod parse;
mod serialize;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geom::{Aabb, Vec2};
use crate::sim::PhysicsParams;

pub use parse::{parse_level, ParseError, ParseErrorKind};
pub use serialize::canonical_serialize;
pub use validate::{validate, Diagnostic, DiagnosticCode};

/// Bodies whose feet drop this far below the lowest solid are dead.
pub const KILL_MARGIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Distortion {
    Perfectionism,
    Overgeneralization,
    JumpingToConclusions,
    Magnification,
    Personalization,
}

impl Distortion {
    pub const ALL: [Distortion; 5] = [
        Distortion::Perfectionism,
        Distortion::Overgeneralization,
        Distortion::JumpingToConclusions,
        Distortion::Magnification,
        Distortion::Personalization,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Distortion::Perfectionism => "Perfectionism",
            Distortion::Overgeneralization => "Overgeneralization",
            Distortion::JumpingToConclusions => "JumpingToConclusions",
            Distortion::Magnification => "Magnification",
            Distortion::Personalization => "Personalization",
        }
    }
}

impl FromStr for Distortion {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Distortion::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or(())
    }
}

impl fmt::Display for Distortion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Level metadata: which distortion the level targets, the clinical feature,
/// the game metaphor and the message shown once the level is completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaBlock {
    pub level_id: String,
    pub distortion: Distortion,
    pub clinical_feature: String,
    pub metaphor: String,
    pub rhetoric: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Platform,
    Bridge,
    Spike,
    Star,
    Plate,
    Door,
    Exit,
    Spawn,
    NpcSpawn,
    HintZone,
    FleeTrigger,
    HesitationZone,
}

impl EntityKind {
    pub const ALL: [EntityKind; 12] = [
        EntityKind::Platform,
        EntityKind::Bridge,
        EntityKind::Spike,
        EntityKind::Star,
        EntityKind::Plate,
        EntityKind::Door,
        EntityKind::Exit,
        EntityKind::Spawn,
        EntityKind::NpcSpawn,
        EntityKind::HintZone,
        EntityKind::FleeTrigger,
        EntityKind::HesitationZone,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EntityKind::Platform => "platform",
            EntityKind::Bridge => "bridge",
            EntityKind::Spike => "spike",
            EntityKind::Star => "star",
            EntityKind::Plate => "plate",
            EntityKind::Door => "door",
            EntityKind::Exit => "exit",
            EntityKind::Spawn => "spawn",
            EntityKind::NpcSpawn => "npc_spawn",
            EntityKind::HintZone => "hint_zone",
            EntityKind::FleeTrigger => "flee_trigger",
            EntityKind::HesitationZone => "hesitation_zone",
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, EntityKind::Spawn | EntityKind::NpcSpawn)
    }

    /// Kinds that can block bodies.
    pub fn is_solid(&self) -> bool {
        matches!(
            self,
            EntityKind::Platform | EntityKind::Bridge | EntityKind::Door
        )
    }

    /// Attribute keys accepted for this kind.
    pub fn attr_keys(&self) -> &'static [&'static str] {
        match self {
            EntityKind::Platform => &["flee", "gap", "step"],
            EntityKind::Spike => &["type"],
            EntityKind::Star => &["flagged"],
            _ => &[],
        }
    }
}

impl FromStr for EntityKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        EntityKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or(())
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Geometry exactly as written in the file; boxes keep `(x, y, w, h)` so
/// that serialization reproduces the same numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    Point { x: f64, y: f64 },
    Rect { x: f64, y: f64, w: f64, h: f64 },
}

impl Geometry {
    pub fn aabb(&self) -> Aabb {
        match *self {
            Geometry::Point { x, y } => Aabb::new(Vec2::new(x, y), Vec2::new(x, y)),
            Geometry::Rect { x, y, w, h } => Aabb::from_rect(x, y, w, h),
        }
    }

    pub fn origin(&self) -> Vec2 {
        match *self {
            Geometry::Point { x, y } | Geometry::Rect { x, y, .. } => Vec2::new(x, y),
        }
    }

    pub fn numbers(&self) -> Vec<f64> {
        match *self {
            Geometry::Point { x, y } => vec![x, y],
            Geometry::Rect { x, y, w, h } => vec![x, y, w, h],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityDecl {
    pub kind: EntityKind,
    pub id: String,
    pub geometry: Geometry,
    pub attrs: BTreeMap<String, String>,
}

impl EntityDecl {
    pub fn aabb(&self) -> Aabb {
        self.geometry.aabb()
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs.get(key).map(String::as_str)
    }

    pub fn flag(&self, key: &str) -> bool {
        self.attr(key) == Some("true")
    }

    pub fn is_fake_spike(&self) -> bool {
        self.kind == EntityKind::Spike && self.attr("type") == Some("fake")
    }

    pub fn step_index(&self) -> Option<u32> {
        self.attr("step").and_then(|s| s.parse().ok())
    }
}

/// Numeric parameters of the five rule systems. Structural references
/// (flagged star, zones, plates, door, NPC spawn) come from entities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicParams {
    /// Initial flee displacement of the escaping platform.
    pub flee_delta0: f64,
    /// Reduction of the flee displacement per attempt.
    pub flee_step: f64,
    pub jump_base: f64,
    pub jump_increment: f64,
    pub jump_max: f64,
    pub gap_width: f64,
    pub v_min: f64,
    pub idle_threshold_ticks: u32,
}

impl Default for MechanicParams {
    fn default() -> Self {
        Self {
            flee_delta0: 6.0,
            flee_step: 2.0,
            jump_base: 9.0,
            jump_increment: 1.6,
            jump_max: 16.0,
            gap_width: 3.5,
            v_min: 7.0,
            idle_threshold_ticks: 90,
        }
    }
}

/// A parsed level. Entities are held in canonical `(kind, id)` order
/// regardless of their order in the source text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDef {
    pub meta: MetaBlock,
    pub physics: PhysicsParams,
    pub mechanics: MechanicParams,
    pub entities: Vec<EntityDecl>,
}

impl LevelDef {
    pub fn entities_of(&self, kind: EntityKind) -> impl Iterator<Item = &EntityDecl> {
        self.entities.iter().filter(move |e| e.kind == kind)
    }

    pub fn entity(&self, id: &str) -> Option<&EntityDecl> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn spawn(&self) -> Option<Vec2> {
        self.entities_of(EntityKind::Spawn)
            .next()
            .map(|e| e.geometry.origin())
    }

    pub fn npc_spawn(&self) -> Option<Vec2> {
        self.entities_of(EntityKind::NpcSpawn)
            .next()
            .map(|e| e.geometry.origin())
    }

    pub fn flagged_star(&self) -> Option<&EntityDecl> {
        self.entities_of(EntityKind::Star)
            .find(|e| e.flag("flagged"))
    }

    pub fn hint_zone(&self) -> Option<Aabb> {
        self.entities_of(EntityKind::HintZone)
            .next()
            .map(EntityDecl::aabb)
    }

    pub fn hesitation_zone(&self) -> Option<Aabb> {
        self.entities_of(EntityKind::HesitationZone)
            .next()
            .map(EntityDecl::aabb)
    }

    pub fn flee_trigger(&self) -> Option<Aabb> {
        self.entities_of(EntityKind::FleeTrigger)
            .next()
            .map(EntityDecl::aabb)
    }

    /// Lowest y a body's feet may reach before it counts as fallen.
    pub fn kill_plane(&self) -> f64 {
        self.entities
            .iter()
            .filter(|e| e.kind.is_solid())
            .map(|e| e.aabb().min.y)
            .fold(f64::INFINITY, f64::min)
            .min(self.spawn().map_or(0.0, |s| s.y))
            - KILL_MARGIN
    }

    /// Jump speed used by the player when no level rule overrides it, and
    /// the largest jump speed any rule can produce.
    pub fn max_jump_speed(&self) -> f64 {
        match self.meta.distortion {
            Distortion::JumpingToConclusions => self.mechanics.jump_max,
            _ => self.physics.base_jump_speed,
        }
        .max(self.physics.base_jump_speed)
    }
}
