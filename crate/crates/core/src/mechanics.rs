//! The five level rule systems, one per targeted distortion.
//!
//! | Level | Distortion             | Rule                                              |
//! |-------|------------------------|---------------------------------------------------|
//! | L1    | Perfectionism          | taking the flagged star collapses the exit bridge |
//! | L2    | Overgeneralization     | target platform flees, less on every attempt      |
//! | L3    | Jumping to conclusions | jump power grows with each new platform reached   |
//! | L4    | Magnification          | giant spike is fake; stopping forfeits the jump   |
//! | L5    | Personalization        | door needs two bodies on two plates               |
//!
//! The pure rules live here; [`crate::runtime`] wires them into the tick.

use serde::{Deserialize, Serialize};

use crate::geom::Aabb;
use crate::level::EntityKind;
use crate::runtime::LevelRuntime;
use crate::sim::{Body, EventKind, Facing, InputFrame, TickEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MechanicCounters {
    /// L2 attempt index; survives respawns.
    pub attempt_index: u32,
    /// L3 jump power level; survives respawns.
    pub landed_new_platforms: u32,
    pub hesitation_count: u32,
    pub npc_summoned: bool,
    /// Cleared on respawn.
    pub flag_star_taken: bool,
    /// Consecutive idle ticks inside the hesitation zone.
    pub idle_run: u32,
}

/// Horizontal displacement of the fleeing platform on attempt `k`.
pub fn flee_offset(k: u32, delta0: f64, step: f64) -> f64 {
    (delta0 - k as f64 * step).max(0.0)
}

/// Jump launch speed after `landed_new_platforms` first landings.
pub fn jump_impulse(landed_new_platforms: u32, base: f64, increment: f64, max: f64) -> f64 {
    (base + landed_new_platforms as f64 * increment).min(max)
}

pub fn momentum_gate_clearable(speed_at_launch: f64, v_min: f64) -> bool {
    speed_at_launch >= v_min
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpikeEffect {
    None,
    Death,
}

/// Real spikes kill on overlap; fake spikes neither block nor hurt.
pub fn fake_spike_contact(body: &Body, spike: &Aabb, fake: bool) -> SpikeEffect {
    if !fake && body.aabb().overlaps(spike) {
        SpikeEffect::Death
    } else {
        SpikeEffect::None
    }
}

/// Count hesitation inside `zone`: one per facing reversal, one per
/// completed run of `idle_threshold` consecutive ticks without channel-A
/// input. Returns the number of increments this tick.
pub fn hesitation_update(
    counters: &mut MechanicCounters,
    prev_facing: Facing,
    body: &Body,
    input: &InputFrame,
    zone: &Aabb,
    idle_threshold: u32,
) -> u32 {
    if !zone.overlaps(&body.aabb()) {
        counters.idle_run = 0;
        return 0;
    }
    let mut inc = 0;
    if body.facing != prev_facing {
        inc += 1;
    }
    if input.channel_a_idle() {
        counters.idle_run += 1;
        if counters.idle_run >= idle_threshold {
            inc += 1;
            counters.idle_run = 0;
        }
    } else {
        counters.idle_run = 0;
    }
    counters.hesitation_count += inc;
    inc
}

/// The door is open exactly while both plates are pressed.
pub fn door_open(plate_a: bool, plate_b: bool) -> bool {
    plate_a && plate_b
}

/// Collect every star the player overlaps. The flagged star also collapses
/// all bridges for the rest of the attempt.
pub fn flag_star_collect(rt: &mut LevelRuntime) -> Vec<TickEvent> {
    let tick = rt.tick;
    let player = rt.player.aabb();
    let mut events = Vec::new();
    for i in 0..rt.entities.len() {
        let e = &rt.entities[i];
        if e.kind != EntityKind::Star || e.collected || !e.rect.overlaps(&player) {
            continue;
        }
        let flagged = e.flagged;
        rt.entities[i].collected = true;
        if !flagged {
            events.push(TickEvent::new(tick, EventKind::StarCollect).with("entity", i as f64));
            continue;
        }
        rt.counters.flag_star_taken = true;
        events.push(TickEvent::new(tick, EventKind::FlagStarCollect).with("entity", i as f64));
        let mut collapsed = 0;
        for b in rt
            .entities
            .iter_mut()
            .filter(|b| b.kind == EntityKind::Bridge)
        {
            b.want_solid = false;
            b.solid = false;
            collapsed += 1;
        }
        events
            .push(TickEvent::new(tick, EventKind::BridgeCollapse).with("count", collapsed as f64));
    }
    events
}

/// Any channel-B key while the player overlaps the hint zone brings the NPC
/// in at its spawn point. Channel-B input is otherwise ignored until then.
pub fn summon_npc(rt: &mut LevelRuntime, input: &InputFrame) -> Vec<TickEvent> {
    if rt.counters.npc_summoned || !input.channel_b_active() {
        return Vec::new();
    }
    let (Some(zone), Some(spawn)) = (rt.hint_zone, rt.npc_spawn) else {
        return Vec::new();
    };
    if !zone.overlaps(&rt.player.aabb()) {
        return Vec::new();
    }
    rt.npc = Some(rt.placed_body(spawn));
    rt.counters.npc_summoned = true;
    vec![TickEvent::new(rt.tick, EventKind::NpcSummon)
        .with("x", spawn.x)
        .with("y", spawn.y)]
}
