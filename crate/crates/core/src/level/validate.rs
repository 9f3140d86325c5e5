use std::fmt;

use serde::Serialize;

use super::{Distortion, EntityKind, Geometry, LevelDef};
use crate::sim::Body;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticCode {
    MissingSpawn,
    DuplicateSpawn,
    MissingExit,
    DuplicateExit,
    InvalidPhysics,
    InvalidMechanics,
    MissingFlaggedStar,
    MissingBridge,
    MissingFleeTrigger,
    MissingFleePlatform,
    MissingSteps,
    NonAscendingStep,
    UnreachablePlatform,
    UngatedStep,
    MissingFakeSpike,
    MissingHesitationZone,
    GapMismatch,
    PlateCount,
    MissingDoor,
    MissingHintZone,
    MissingNpcSpawn,
    SpawnObstructed,
    InvalidGeometry,
    TunnelingRisk,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    pub entity: Option<String>,
}

impl Diagnostic {
    fn new(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            entity: None,
        }
    }

    fn on(mut self, id: &str) -> Self {
        self.entity = Some(id.to_string());
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.entity {
            Some(id) => write!(f, "{}: {}", id, self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Check playability constraints. An empty list means the level is clean.
pub fn validate(def: &LevelDef) -> Vec<Diagnostic> {
    use DiagnosticCode::*;
    let mut out = Vec::new();
    // the remaining checks build boxes from the geometry
    geometry(def, &mut out);
    if !out.is_empty() {
        return out;
    }

    let count = |k: EntityKind| def.entities_of(k).count();
    match count(EntityKind::Spawn) {
        0 => out.push(Diagnostic::new(MissingSpawn, "missing spawn")),
        1 => {}
        _ => out.push(Diagnostic::new(DuplicateSpawn, "duplicate spawn")),
    }
    match count(EntityKind::Exit) {
        0 => out.push(Diagnostic::new(MissingExit, "missing exit")),
        1 => {}
        _ => out.push(Diagnostic::new(DuplicateExit, "duplicate exit")),
    }
    if !def.physics.is_valid() {
        out.push(Diagnostic::new(
            InvalidPhysics,
            "physics parameters must be finite and positive",
        ));
    }

    match def.meta.distortion {
        Distortion::Perfectionism => perfectionism(def, &mut out),
        Distortion::Overgeneralization => overgeneralization(def, &mut out),
        Distortion::JumpingToConclusions => jumping_to_conclusions(def, &mut out),
        Distortion::Magnification => magnification(def, &mut out),
        Distortion::Personalization => personalization(def, &mut out),
    }
    obstructed_spawns(def, &mut out);
    tunneling(def, &mut out);
    out
}

fn geometry(def: &LevelDef, out: &mut Vec<Diagnostic>) {
    for e in &def.entities {
        let nums = e.geometry.numbers();
        let sized = match e.geometry {
            Geometry::Rect { w, h, .. } => w > 0.0 && h > 0.0,
            Geometry::Point { .. } => true,
        };
        if !sized || nums.iter().any(|v| !v.is_finite()) {
            out.push(
                Diagnostic::new(
                    DiagnosticCode::InvalidGeometry,
                    "box must be finite with positive size",
                )
                .on(&e.id),
            );
        }
    }
}

/// A body placed at a spawn point must not start inside a solid.
fn obstructed_spawns(def: &LevelDef, out: &mut Vec<Diagnostic>) {
    let spawns = def
        .entities
        .iter()
        .filter(|e| matches!(e.kind, EntityKind::Spawn | EntityKind::NpcSpawn));
    for sp in spawns {
        let body = Body::at(sp.geometry.origin()).aabb();
        if let Some(solid) = def
            .entities
            .iter()
            .find(|e| e.kind.is_solid() && e.aabb().overlaps(&body))
        {
            out.push(
                Diagnostic::new(
                    DiagnosticCode::SpawnObstructed,
                    format!("a body placed here overlaps {}", solid.id),
                )
                .on(&sp.id),
            );
        }
    }
}

fn perfectionism(def: &LevelDef, out: &mut Vec<Diagnostic>) {
    if def.flagged_star().is_none() {
        out.push(Diagnostic::new(
            DiagnosticCode::MissingFlaggedStar,
            "no flagged star",
        ));
    }
    if def.entities_of(EntityKind::Bridge).next().is_none() {
        out.push(Diagnostic::new(
            DiagnosticCode::MissingBridge,
            "no bridge to collapse",
        ));
    }
}

fn overgeneralization(def: &LevelDef, out: &mut Vec<Diagnostic>) {
    let m = &def.mechanics;
    if !(m.flee_delta0 >= 0.0 && m.flee_step > 0.0) {
        out.push(Diagnostic::new(
            DiagnosticCode::InvalidMechanics,
            "need flee_delta0 >= 0 and flee_step > 0",
        ));
    }
    if def.entities_of(EntityKind::FleeTrigger).count() != 1 {
        out.push(Diagnostic::new(
            DiagnosticCode::MissingFleeTrigger,
            "need exactly one flee trigger",
        ));
    }
    if def
        .entities_of(EntityKind::Platform)
        .filter(|e| e.flag("flee"))
        .count()
        != 1
    {
        out.push(Diagnostic::new(
            DiagnosticCode::MissingFleePlatform,
            "need exactly one fleeing platform",
        ));
    }
}

/// Closed-form apex height of a jump launched at `speed`.
fn jump_height(speed: f64, gravity: f64) -> f64 {
    speed * speed / (2.0 * gravity)
}

fn jumping_to_conclusions(def: &LevelDef, out: &mut Vec<Diagnostic>) {
    let m = &def.mechanics;
    let g = def.physics.gravity;
    if m.jump_base.partial_cmp(&m.jump_max) != Some(std::cmp::Ordering::Less) {
        out.push(Diagnostic::new(
            DiagnosticCode::InvalidMechanics,
            "jump_base must be below jump_max",
        ));
    }
    let mut steps: Vec<_> = def
        .entities_of(EntityKind::Platform)
        .filter_map(|e| e.step_index().map(|i| (i, e)))
        .collect();
    steps.sort_by_key(|(i, _)| *i);
    let contiguous = steps.iter().enumerate().all(|(n, (i, _))| *i as usize == n);
    if steps.len() < 2 || !contiguous {
        out.push(Diagnostic::new(
            DiagnosticCode::MissingSteps,
            "step platforms must be numbered 0..n with n >= 1",
        ));
        return;
    }
    for (n, pair) in steps.windows(2).enumerate() {
        let (lower, upper) = (pair[0].1, pair[1].1);
        let rise = upper.aabb().max.y - lower.aabb().max.y;
        if rise <= 0.0 {
            out.push(
                Diagnostic::new(
                    DiagnosticCode::NonAscendingStep,
                    "step is not above its predecessor",
                )
                .on(&upper.id),
            );
            continue;
        }
        let unlocked =
            crate::mechanics::jump_impulse(n as u32, m.jump_base, m.jump_increment, m.jump_max);
        if jump_height(unlocked, g) < rise {
            out.push(
                Diagnostic::new(
                    DiagnosticCode::UnreachablePlatform,
                    format!(
                        "unreachable platform: rise {rise} exceeds jump height at power level {n}"
                    ),
                )
                .on(&upper.id),
            );
        }
        if n > 0 {
            let before = crate::mechanics::jump_impulse(
                n as u32 - 1,
                m.jump_base,
                m.jump_increment,
                m.jump_max,
            );
            if jump_height(before, g) >= rise {
                out.push(
                    Diagnostic::new(
                        DiagnosticCode::UngatedStep,
                        format!("step reachable before power level {n}"),
                    )
                    .on(&upper.id),
                );
            }
        }
    }
}

fn magnification(def: &LevelDef, out: &mut Vec<Diagnostic>) {
    let m = &def.mechanics;
    if !def
        .entities_of(EntityKind::Spike)
        .any(|e| e.is_fake_spike())
    {
        out.push(Diagnostic::new(
            DiagnosticCode::MissingFakeSpike,
            "no fake spike",
        ));
    }
    if def.hesitation_zone().is_none() {
        out.push(Diagnostic::new(
            DiagnosticCode::MissingHesitationZone,
            "no hesitation zone",
        ));
    }
    if m.v_min.partial_cmp(&def.physics.run_speed) != Some(std::cmp::Ordering::Less) {
        out.push(Diagnostic::new(
            DiagnosticCode::InvalidMechanics,
            "v_min must be below run_speed",
        ));
    }
    let side = |v: &str| {
        let all: Vec<_> = def
            .entities_of(EntityKind::Platform)
            .filter(|e| e.attr("gap") == Some(v))
            .collect();
        if all.len() == 1 {
            Some(all[0].aabb())
        } else {
            None
        }
    };
    match (side("near"), side("far")) {
        (Some(near), Some(far)) => {
            let width = far.min.x - near.max.x;
            if (width - m.gap_width).abs() > 1e-9 {
                out.push(Diagnostic::new(
                    DiagnosticCode::GapMismatch,
                    format!(
                        "gap between launch and landing platforms is {width}, expected {}",
                        m.gap_width
                    ),
                ));
            }
        }
        _ => out.push(Diagnostic::new(
            DiagnosticCode::GapMismatch,
            "need exactly one gap=near and one gap=far platform",
        )),
    }
}

fn personalization(def: &LevelDef, out: &mut Vec<Diagnostic>) {
    if def.entities_of(EntityKind::Plate).count() != 2 {
        out.push(Diagnostic::new(
            DiagnosticCode::PlateCount,
            "need exactly two plates",
        ));
    }
    if def.entities_of(EntityKind::Door).count() != 1 {
        out.push(Diagnostic::new(
            DiagnosticCode::MissingDoor,
            "need exactly one door",
        ));
    }
    if def.entities_of(EntityKind::HintZone).count() != 1 {
        out.push(Diagnostic::new(
            DiagnosticCode::MissingHintZone,
            "need exactly one hint zone",
        ));
    }
    if def.entities_of(EntityKind::NpcSpawn).count() != 1 {
        out.push(Diagnostic::new(
            DiagnosticCode::MissingNpcSpawn,
            "need exactly one npc spawn",
        ));
    }
}

/// Per-tick displacement must stay below the thinnest solid on each axis.
/// Vertical speed is bounded by a fall from the highest reachable apex down
/// to the kill plane.
fn tunneling(def: &LevelDef, out: &mut Vec<Diagnostic>) {
    let p = &def.physics;
    let solids: Vec<_> = def.entities.iter().filter(|e| e.kind.is_solid()).collect();
    let Some(top) = solids.iter().map(|e| e.aabb().max.y).reduce(f64::max) else {
        return;
    };
    let top = top.max(def.spawn().map_or(top, |s| s.y));
    let kill = def.kill_plane();
    let jump = def.max_jump_speed();
    let vy2 = jump * jump + 2.0 * p.gravity * (top - kill);
    let dy2 = vy2 * p.dt * p.dt;
    let dx = p.run_speed * p.dt;
    for e in &solids {
        let b = e.aabb();
        if dy2 >= b.height() * b.height() {
            out.push(
                Diagnostic::new(
                    DiagnosticCode::TunnelingRisk,
                    "solid thinner than the largest vertical step",
                )
                .on(&e.id),
            );
        }
        if dx >= b.width() {
            out.push(
                Diagnostic::new(
                    DiagnosticCode::TunnelingRisk,
                    "solid narrower than the largest horizontal step",
                )
                .on(&e.id),
            );
        }
    }
}
