//! Fixed-timestep platformer kinematics and axis-separated collision.
//!
//! All arithmetic here is restricted to `+ - * /`, comparisons and
//! `min`/`max`, evaluated in a fixed order, so identical inputs produce
//! bitwise-identical states on every IEEE-754 platform.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geom::{Aabb, Vec2};

/// Simulation step in seconds. Fixed for every runtime.
pub const DT: f64 = 1.0 / 60.0;

/// Half extents of every controllable body (0.8 wide, 1.0 tall).
pub const BODY_HALF_EXTENTS: Vec2 = Vec2::new(0.4, 0.5);

/// Fraction of the ground acceleration available while airborne.
pub const AIR_CONTROL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub dt: f64,
    pub gravity: f64,
    pub run_speed: f64,
    pub ground_accel: f64,
    pub base_jump_speed: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            dt: DT,
            gravity: 60.0,
            run_speed: 8.0,
            ground_accel: 20.0,
            base_jump_speed: 16.0,
        }
    }
}

impl PhysicsParams {
    pub fn is_valid(&self) -> bool {
        [
            self.dt,
            self.gravity,
            self.run_speed,
            self.ground_accel,
            self.base_jump_speed,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Facing {
    Left,
    Right,
}

/// A controllable body. `pos` is the feet-center anchor, so the body box
/// spans `[pos.x - hx, pos.x + hx] x [pos.y, pos.y + 2 hy]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Body {
    pub pos: Vec2,
    pub vel: Vec2,
    pub half_extents: Vec2,
    pub grounded: bool,
    pub facing: Facing,
}

impl Body {
    pub fn at(pos: Vec2) -> Self {
        Self {
            pos,
            vel: Vec2::ZERO,
            half_extents: BODY_HALF_EXTENTS,
            grounded: false,
            facing: Facing::Right,
        }
    }

    pub fn aabb(&self) -> Aabb {
        self.aabb_at(self.pos)
    }

    pub fn aabb_at(&self, feet: Vec2) -> Aabb {
        let h = self.half_extents;
        Aabb::new(
            Vec2::new(feet.x - h.x, feet.y),
            Vec2::new(feet.x + h.x, feet.y + h.y + h.y),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.pos.is_finite() && self.vel.is_finite()
    }
}

/// Button state for one tick. Channel A drives the player, channel B the NPC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct InputFrame {
    pub a_left: bool,
    pub a_right: bool,
    pub a_jump: bool,
    pub b_left: bool,
    pub b_right: bool,
    pub b_jump: bool,
}

impl InputFrame {
    pub const IDLE: InputFrame = InputFrame {
        a_left: false,
        a_right: false,
        a_jump: false,
        b_left: false,
        b_right: false,
        b_jump: false,
    };

    /// Bits in trace order: a_left a_right a_jump b_left b_right b_jump,
    /// with a_left as the most significant of the six.
    pub fn bits(&self) -> u8 {
        [
            self.a_left,
            self.a_right,
            self.a_jump,
            self.b_left,
            self.b_right,
            self.b_jump,
        ]
        .iter()
        .fold(0u8, |acc, &b| (acc << 1) | b as u8)
    }

    pub fn from_bits(bits: u8) -> Self {
        let bit = |i: u8| bits & (1 << (5 - i)) != 0;
        Self {
            a_left: bit(0),
            a_right: bit(1),
            a_jump: bit(2),
            b_left: bit(3),
            b_right: bit(4),
            b_jump: bit(5),
        }
    }

    pub fn axis_a(&self) -> f64 {
        axis(self.a_left, self.a_right)
    }

    pub fn axis_b(&self) -> f64 {
        axis(self.b_left, self.b_right)
    }

    pub fn channel_a_idle(&self) -> bool {
        !(self.a_left || self.a_right || self.a_jump)
    }

    pub fn channel_b_active(&self) -> bool {
        self.b_left || self.b_right || self.b_jump
    }
}

fn axis(left: bool, right: bool) -> f64 {
    match (left, right) {
        (true, false) => -1.0,
        (false, true) => 1.0,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    AttemptStart,
    Jump,
    Land,
    StarCollect,
    FlagStarCollect,
    BridgeCollapse,
    PlatformFlee,
    JumpPowerUp,
    Hesitation,
    NpcSummon,
    PlatePress,
    PlateRelease,
    DoorOpen,
    DoorClose,
    Death,
    LevelComplete,
}

/// One tick-stamped event. Within a tick, events appear in phase order:
/// attempt start, kinematics (JUMP), collisions (LAND), mechanics, then
/// win/lose (LEVEL_COMPLETE, DEATH and the ATTEMPT_START of the respawn).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickEvent {
    pub tick: u64,
    pub kind: EventKind,
    pub payload: BTreeMap<String, f64>,
}

impl TickEvent {
    pub fn new(tick: u64, kind: EventKind) -> Self {
        Self {
            tick,
            kind,
            payload: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.payload.insert(key.to_string(), value);
        self
    }
}

fn approach(value: f64, target: f64, delta: f64) -> f64 {
    if value < target {
        (value + delta).min(target)
    } else {
        (value - delta).max(target)
    }
}

/// One Euler step of input-driven motion: velocity first, then position.
///
/// On the ground the horizontal velocity moves toward `axis * run_speed` at
/// `ground_accel`. In the air it moves at `AIR_CONTROL * ground_accel`, but
/// the target is clamped to the current speed, so air input can brake or
/// turn a jump short and never adds momentum. A jump only fires from the
/// ground and replaces gravity for that tick.
pub fn apply_input_kinematics(
    body: &Body,
    axis: f64,
    jump: bool,
    jump_speed: f64,
    params: &PhysicsParams,
) -> Body {
    let mut b = *body;
    let target = axis * params.run_speed;
    if b.grounded {
        b.vel.x = approach(b.vel.x, target, params.ground_accel * params.dt);
    } else {
        let cap = b.vel.x.abs();
        let air_target = target.max(-cap).min(cap);
        b.vel.x = approach(
            b.vel.x,
            air_target,
            AIR_CONTROL * params.ground_accel * params.dt,
        );
    }
    if axis > 0.0 {
        b.facing = Facing::Right;
    } else if axis < 0.0 {
        b.facing = Facing::Left;
    }
    if b.grounded && jump {
        b.vel.y = jump_speed;
        b.grounded = false;
    } else if !b.grounded {
        b.vel.y -= params.gravity * params.dt;
    }
    b.pos = Vec2::new(b.pos.x + b.vel.x * params.dt, b.pos.y + b.vel.y * params.dt);
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Contacts {
    pub floor: bool,
    pub ceiling: bool,
    pub wall_left: bool,
    pub wall_right: bool,
    /// Index into the solid list of the supporting solid, when `floor`.
    pub floor_solid: Option<usize>,
}

/// Push `body` (already integrated to its new position) out of `solids`,
/// given its position `from` at the start of the tick.
///
/// Vertical motion is resolved first with the body at its old x, then
/// horizontal motion at the resolved y. A body resting exactly on a solid
/// top (shared edge, horizontal overlap) also counts as a floor contact.
/// `grounded` is set iff there is a floor contact; the velocity component
/// along each contact axis is zeroed.
pub fn resolve_collision(body: &Body, from: Vec2, solids: &[Aabb]) -> (Body, Contacts) {
    let mut b = *body;
    let mut c = Contacts::default();
    let dy = b.pos.y - from.y;
    let dx = b.pos.x - from.x;

    // y phase at the old x
    let probe = b.aabb_at(Vec2::new(from.x, b.pos.y));
    let mut y = b.pos.y;
    for (i, s) in solids.iter().enumerate() {
        if !probe.overlaps(s) {
            continue;
        }
        if dy < 0.0 {
            if !c.floor || s.max.y > y {
                y = s.max.y;
                c.floor_solid = Some(i);
            }
            c.floor = true;
        } else if dy > 0.0 {
            let top = s.min.y - (b.half_extents.y + b.half_extents.y);
            if !c.ceiling || top < y {
                y = top;
            }
            c.ceiling = true;
        }
    }
    if c.floor || c.ceiling {
        b.vel.y = 0.0;
    }
    b.pos.y = y;

    // x phase at the resolved y
    let probe = b.aabb_at(Vec2::new(b.pos.x, y));
    let mut x = b.pos.x;
    for s in solids {
        if !probe.overlaps(s) {
            continue;
        }
        if dx > 0.0 {
            x = x.min(s.min.x - b.half_extents.x);
            c.wall_right = true;
        } else if dx < 0.0 {
            x = x.max(s.max.x + b.half_extents.x);
            c.wall_left = true;
        }
    }
    if c.wall_left || c.wall_right {
        b.vel.x = 0.0;
    }
    b.pos.x = x;

    if !c.floor && b.vel.y <= 0.0 {
        if let Some(i) = resting_support(&b, solids) {
            c.floor = true;
            c.floor_solid = Some(i);
            b.vel.y = 0.0;
        }
    }
    b.grounded = c.floor;
    (b, c)
}

/// Index of a solid whose top coincides with the body's feet while
/// overlapping it horizontally.
pub fn resting_support(body: &Body, solids: &[Aabb]) -> Option<usize> {
    let bb = body.aabb();
    solids
        .iter()
        .position(|s| s.max.y == body.pos.y && bb.overlaps_x(s))
}
