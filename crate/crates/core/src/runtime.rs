//! Mutable simulation state for one level and the per-tick step.

use std::collections::BTreeSet;
use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use crate::geom::{Aabb, Vec2};
use crate::level::{Distortion, EntityKind, LevelDef};
use crate::mechanics::{self, MechanicCounters, SpikeEffect};
use crate::sim::{
    apply_input_kinematics, resolve_collision, resting_support, Body, EventKind, Facing,
    InputFrame, TickEvent,
};

#[derive(Debug, Clone, PartialEq)]
pub struct EntityState {
    pub kind: EntityKind,
    pub id: String,
    /// Declared box; points are zero-size boxes.
    pub base: Aabb,
    /// Current box. Differs from `base` only for a fled platform.
    pub rect: Aabb,
    pub solid: bool,
    /// Solidity the rules ask for; a solid reappears only once no body
    /// overlaps it.
    pub want_solid: bool,
    pub collected: bool,
    pub pressed: bool,
    pub fake: bool,
    pub flagged: bool,
    pub flee: bool,
}

/// Render-facing view of the runtime. Field names and order are part of the
/// browser boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u64,
    pub bodies: Vec<BodySnapshot>,
    pub entities: Vec<EntitySnapshot>,
    pub counters: SnapshotCounters,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodySnapshot {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub facing: Facing,
    pub grounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySnapshot {
    pub id: String,
    pub kind: EntityKind,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub state: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnapshotCounters {
    pub attempts: u32,
    pub jump_power_level: u32,
    pub hesitation: u32,
}

#[derive(Debug, Clone)]
pub struct LevelRuntime {
    def: LevelDef,
    pub tick: u64,
    pub player: Body,
    pub npc: Option<Body>,
    pub entities: Vec<EntityState>,
    pub counters: MechanicCounters,
    /// Number of ATTEMPT_START events so far.
    pub attempts: u32,
    pub completed: bool,
    /// Solid entities the player has landed on, for the jump-power rule.
    pub visited: BTreeSet<usize>,
    pub(crate) spawn: Vec2,
    pub(crate) npc_spawn: Option<Vec2>,
    pub(crate) hint_zone: Option<Aabb>,
    kill_y: f64,
}

impl LevelRuntime {
    /// Build the initial state. The level should be validator-clean; a
    /// missing spawn falls back to the origin.
    pub fn new(def: &LevelDef) -> Self {
        let entities = def
            .entities
            .iter()
            .map(|e| {
                let b = e.aabb();
                EntityState {
                    kind: e.kind,
                    id: e.id.clone(),
                    base: b,
                    rect: b,
                    solid: e.kind.is_solid(),
                    want_solid: e.kind.is_solid(),
                    collected: false,
                    pressed: false,
                    fake: e.is_fake_spike(),
                    flagged: e.kind == EntityKind::Star && e.flag("flagged"),
                    flee: e.kind == EntityKind::Platform && e.flag("flee"),
                }
            })
            .collect();
        let spawn = def.spawn().unwrap_or(Vec2::ZERO);
        let mut rt = Self {
            def: def.clone(),
            tick: 0,
            player: Body::at(spawn),
            npc: None,
            entities,
            counters: MechanicCounters::default(),
            attempts: 0,
            completed: false,
            visited: BTreeSet::new(),
            spawn,
            npc_spawn: def.npc_spawn(),
            hint_zone: def.hint_zone(),
            kill_y: def.kill_plane(),
        };
        rt.player = rt.placed_body(spawn);
        if let Some(i) = rt.support_entity(&rt.player) {
            rt.visited.insert(i);
        }
        rt
    }

    pub fn def(&self) -> &LevelDef {
        &self.def
    }

    /// Indices of entities currently blocking bodies, in entity order.
    fn solid_indices(&self) -> Vec<usize> {
        (0..self.entities.len())
            .filter(|&i| self.entities[i].solid)
            .collect()
    }

    fn support_entity(&self, body: &Body) -> Option<usize> {
        let idx = self.solid_indices();
        let rects: Vec<Aabb> = idx.iter().map(|&i| self.entities[i].rect).collect();
        resting_support(body, &rects).map(|k| idx[k])
    }

    /// A fresh body at `feet`, grounded if it rests on a solid.
    pub(crate) fn placed_body(&self, feet: Vec2) -> Body {
        let mut b = Body::at(feet);
        b.grounded = self.support_entity(&b).is_some();
        b
    }

    fn bodies(&self) -> impl Iterator<Item = &Body> {
        std::iter::once(&self.player).chain(self.npc.iter())
    }

    fn any_body_overlaps(&self, r: &Aabb) -> bool {
        self.bodies().any(|b| b.aabb().overlaps(r))
    }

    /// Launch speed of the player's next jump.
    pub fn player_jump_speed(&self) -> f64 {
        let m = &self.def.mechanics;
        match self.def.meta.distortion {
            Distortion::JumpingToConclusions => mechanics::jump_impulse(
                self.counters.landed_new_platforms,
                m.jump_base,
                m.jump_increment,
                m.jump_max,
            ),
            _ => self.def.physics.base_jump_speed,
        }
    }

    /// Advance one tick. Returns the tick's events in canonical order; after
    /// LEVEL_COMPLETE this is a no-op returning no events.
    pub fn step(&mut self, input: &InputFrame) -> Vec<TickEvent> {
        if self.completed {
            return Vec::new();
        }
        let tick = self.tick;
        let mut events = Vec::new();
        if tick == 0 && self.attempts == 0 {
            self.attempts = 1;
            events.push(TickEvent::new(tick, EventKind::AttemptStart).with("attempt", 1.0));
        }
        let params = self.def.physics;
        let solid_idx = self.solid_indices();
        let solids: Vec<Aabb> = solid_idx.iter().map(|&i| self.entities[i].rect).collect();

        // kinematics
        let prev_player = self.player;
        let moved = apply_input_kinematics(
            &prev_player,
            input.axis_a(),
            input.a_jump,
            self.player_jump_speed(),
            &params,
        );
        if prev_player.grounded && !moved.grounded {
            events.push(
                TickEvent::new(tick, EventKind::Jump)
                    .with("body", 0.0)
                    .with("vx", moved.vel.x)
                    .with("vy", moved.vel.y),
            );
        }
        let prev_npc = self.npc;
        let moved_npc = prev_npc.map(|n| {
            let m = apply_input_kinematics(
                &n,
                input.axis_b(),
                input.b_jump,
                params.base_jump_speed,
                &params,
            );
            if n.grounded && !m.grounded {
                events.push(
                    TickEvent::new(tick, EventKind::Jump)
                        .with("body", 1.0)
                        .with("vx", m.vel.x)
                        .with("vy", m.vel.y),
                );
            }
            m
        });

        // collisions
        let (player, contacts) = resolve_collision(&moved, prev_player.pos, &solids);
        self.player = player;
        let mut landed_on = None;
        if !prev_player.grounded && player.grounded {
            let idx = contacts.floor_solid.map(|k| solid_idx[k]);
            landed_on = idx;
            events.push(
                TickEvent::new(tick, EventKind::Land)
                    .with("body", 0.0)
                    .with("entity", idx.map_or(-1.0, |i| i as f64)),
            );
        }
        if let (Some(prev), Some(m)) = (prev_npc, moved_npc) {
            let (npc, c) = resolve_collision(&m, prev.pos, &solids);
            if !prev.grounded && npc.grounded {
                let idx = c.floor_solid.map(|k| solid_idx[k]);
                events.push(
                    TickEvent::new(tick, EventKind::Land)
                        .with("body", 1.0)
                        .with("entity", idx.map_or(-1.0, |i| i as f64)),
                );
            }
            self.npc = Some(npc);
        }

        // mechanics
        events.extend(mechanics::summon_npc(self, input));
        self.flee_rule(&prev_player, &mut events);
        if let Some(i) = landed_on {
            self.landing_rule(i, &mut events);
        }
        events.extend(mechanics::flag_star_collect(self));
        self.hesitation_rule(prev_player.facing, input, &mut events);
        self.plate_and_door_rule(&mut events);
        self.restore_solids();

        // win / lose
        if self.exit_reached() {
            self.completed = true;
            events.push(
                TickEvent::new(tick, EventKind::LevelComplete)
                    .with("attempt", self.attempts as f64),
            );
        } else {
            if let Some(cause) = self.death_cause(&self.player) {
                events.push(
                    TickEvent::new(tick, EventKind::Death)
                        .with("body", 0.0)
                        .with("cause", cause),
                );
                self.respawn_player();
                self.attempts += 1;
                events.push(
                    TickEvent::new(tick, EventKind::AttemptStart)
                        .with("attempt", self.attempts as f64),
                );
            }
            if let Some(npc) = self.npc {
                if let Some(cause) = self.death_cause(&npc) {
                    events.push(
                        TickEvent::new(tick, EventKind::Death)
                            .with("body", 1.0)
                            .with("cause", cause),
                    );
                    self.npc = self.npc_spawn.map(|p| self.placed_body(p));
                }
            }
        }
        self.tick += 1;
        events
    }

    /// L2: leaving the ground inside the trigger sends the target platform
    /// away by `flee_offset(k)`; touching ground left of the trigger brings
    /// it back.
    fn flee_rule(&mut self, prev: &Body, events: &mut Vec<TickEvent>) {
        let Some(trigger) = self.def.flee_trigger() else {
            return;
        };
        let Some(pi) = self.entities.iter().position(|e| e.flee) else {
            return;
        };
        let m = self.def.mechanics;
        if prev.grounded && !self.player.grounded && trigger.overlaps(&prev.aabb()) {
            let k = self.counters.attempt_index;
            let offset = mechanics::flee_offset(k, m.flee_delta0, m.flee_step);
            let target = self.entities[pi].base.translated(Vec2::new(offset, 0.0));
            // never teleport into a body
            if !self.any_body_overlaps(&target) {
                self.entities[pi].rect = target;
            }
            self.counters.attempt_index += 1;
            events.push(
                TickEvent::new(self.tick, EventKind::PlatformFlee)
                    .with("attempt", k as f64)
                    .with("offset", offset)
                    .with("entity", pi as f64),
            );
        } else if self.player.grounded
            && self.player.pos.x < trigger.min.x
            && self.entities[pi].rect != self.entities[pi].base
        {
            let base = self.entities[pi].base;
            if !self.any_body_overlaps(&base) {
                self.entities[pi].rect = base;
            }
        }
    }

    /// L3: the first landing on each solid raises the jump power.
    fn landing_rule(&mut self, entity: usize, events: &mut Vec<TickEvent>) {
        if !self.visited.insert(entity) {
            return;
        }
        if self.def.meta.distortion == Distortion::JumpingToConclusions {
            self.counters.landed_new_platforms += 1;
            events.push(
                TickEvent::new(self.tick, EventKind::JumpPowerUp)
                    .with("level", self.counters.landed_new_platforms as f64)
                    .with("speed", self.player_jump_speed())
                    .with("entity", entity as f64),
            );
        }
    }

    fn hesitation_rule(
        &mut self,
        prev_facing: Facing,
        input: &InputFrame,
        events: &mut Vec<TickEvent>,
    ) {
        let Some(zone) = self.def.hesitation_zone() else {
            return;
        };
        let threshold = self.def.mechanics.idle_threshold_ticks;
        let inc = mechanics::hesitation_update(
            &mut self.counters,
            prev_facing,
            &self.player,
            input,
            &zone,
            threshold,
        );
        for _ in 0..inc {
            events.push(
                TickEvent::new(self.tick, EventKind::Hesitation)
                    .with("count", self.counters.hesitation_count as f64),
            );
        }
    }

    /// L5: plates are pressed while any body overlaps them; the door opens
    /// while both are pressed and closes once released and unobstructed.
    fn plate_and_door_rule(&mut self, events: &mut Vec<TickEvent>) {
        for i in 0..self.entities.len() {
            if self.entities[i].kind != EntityKind::Plate {
                continue;
            }
            let pressed = self.any_body_overlaps(&self.entities[i].rect);
            if pressed != self.entities[i].pressed {
                self.entities[i].pressed = pressed;
                let kind = if pressed {
                    EventKind::PlatePress
                } else {
                    EventKind::PlateRelease
                };
                events.push(TickEvent::new(self.tick, kind).with("entity", i as f64));
            }
        }
        let plates: Vec<bool> = self
            .entities
            .iter()
            .filter(|e| e.kind == EntityKind::Plate)
            .map(|e| e.pressed)
            .collect();
        let open = plates.len() == 2 && mechanics::door_open(plates[0], plates[1]);
        for i in 0..self.entities.len() {
            if self.entities[i].kind != EntityKind::Door {
                continue;
            }
            self.entities[i].want_solid = !open;
            let was_open = !self.entities[i].solid;
            if open && !was_open {
                self.entities[i].solid = false;
                events
                    .push(TickEvent::new(self.tick, EventKind::DoorOpen).with("entity", i as f64));
            } else if !open && was_open && !self.any_body_overlaps(&self.entities[i].rect) {
                self.entities[i].solid = true;
                events
                    .push(TickEvent::new(self.tick, EventKind::DoorClose).with("entity", i as f64));
            }
        }
    }

    fn restore_solids(&mut self) {
        for i in 0..self.entities.len() {
            let e = &self.entities[i];
            if e.kind == EntityKind::Bridge
                && e.want_solid
                && !e.solid
                && !self.any_body_overlaps(&e.rect)
            {
                self.entities[i].solid = true;
            }
        }
    }

    /// The player reaches the exit; doors must be open and plates pressed.
    fn exit_reached(&self) -> bool {
        let player = self.player.aabb();
        let at_exit = self
            .entities
            .iter()
            .any(|e| e.kind == EntityKind::Exit && e.rect.overlaps(&player));
        let gates_ok = self.entities.iter().all(|e| match e.kind {
            EntityKind::Door => !e.solid,
            EntityKind::Plate => e.pressed,
            _ => true,
        });
        at_exit && gates_ok
    }

    /// `Some(cause)` when the body dies this tick: 1 = real spike, 2 = fell.
    fn death_cause(&self, body: &Body) -> Option<f64> {
        let spiked = self.entities.iter().any(|e| {
            e.kind == EntityKind::Spike
                && mechanics::fake_spike_contact(body, &e.rect, e.fake) == SpikeEffect::Death
        });
        if spiked {
            Some(1.0)
        } else if body.pos.y < self.kill_y {
            Some(2.0)
        } else {
            None
        }
    }

    fn respawn_player(&mut self) {
        for e in &mut self.entities {
            match e.kind {
                EntityKind::Star => e.collected = false,
                EntityKind::Bridge => e.want_solid = true,
                _ => {}
            }
        }
        self.restore_solids_ignoring_player();
        self.player = self.placed_body(self.spawn);
        self.counters.flag_star_taken = false;
        self.counters.idle_run = 0;
    }

    fn restore_solids_ignoring_player(&mut self) {
        for i in 0..self.entities.len() {
            let e = &self.entities[i];
            let blocked = self.npc.is_some_and(|n| n.aabb().overlaps(&e.rect));
            if e.kind == EntityKind::Bridge && e.want_solid && !e.solid && !blocked {
                self.entities[i].solid = true;
            }
        }
    }

    /// 64-bit FNV-1a digest of all simulation state, in this field order:
    /// tick, completed, attempts, player, npc (presence then body), every
    /// entity (rect, solid, want_solid, collected, pressed), counters,
    /// visited set. Floats are hashed by their IEEE-754 bits, little endian.
    pub fn state_hash(&self) -> u64 {
        let mut h = FnvHasher::default();
        let u64le = |h: &mut FnvHasher, v: u64| h.write(&v.to_le_bytes());
        let f = |h: &mut FnvHasher, v: f64| h.write(&v.to_bits().to_le_bytes());
        let flag = |h: &mut FnvHasher, v: bool| h.write(&[v as u8]);
        let body = |h: &mut FnvHasher, b: &Body| {
            for v in [
                b.pos.x,
                b.pos.y,
                b.vel.x,
                b.vel.y,
                b.half_extents.x,
                b.half_extents.y,
            ] {
                f(h, v);
            }
            flag(h, b.grounded);
            flag(h, b.facing == Facing::Right);
        };
        u64le(&mut h, self.tick);
        flag(&mut h, self.completed);
        u64le(&mut h, self.attempts as u64);
        body(&mut h, &self.player);
        match &self.npc {
            Some(n) => {
                flag(&mut h, true);
                body(&mut h, n);
            }
            None => flag(&mut h, false),
        }
        for e in &self.entities {
            for v in [e.rect.min.x, e.rect.min.y, e.rect.max.x, e.rect.max.y] {
                f(&mut h, v);
            }
            for v in [e.solid, e.want_solid, e.collected, e.pressed] {
                flag(&mut h, v);
            }
        }
        let c = &self.counters;
        for v in [
            c.attempt_index,
            c.landed_new_platforms,
            c.hesitation_count,
            c.idle_run,
        ] {
            u64le(&mut h, v as u64);
        }
        flag(&mut h, c.npc_summoned);
        flag(&mut h, c.flag_star_taken);
        u64le(&mut h, self.visited.len() as u64);
        for &i in &self.visited {
            u64le(&mut h, i as u64);
        }
        h.finish()
    }

    pub fn snapshot(&self) -> Snapshot {
        let body = |id: &str, b: &Body| BodySnapshot {
            id: id.to_string(),
            x: b.pos.x,
            y: b.pos.y,
            vx: b.vel.x,
            vy: b.vel.y,
            facing: b.facing,
            grounded: b.grounded,
        };
        let mut bodies = vec![body("player", &self.player)];
        if let Some(n) = &self.npc {
            bodies.push(body("npc", n));
        }
        let entities = self
            .entities
            .iter()
            .map(|e| EntitySnapshot {
                id: e.id.clone(),
                kind: e.kind,
                x: e.rect.min.x,
                y: e.rect.min.y,
                w: e.rect.width(),
                h: e.rect.height(),
                state: entity_state_label(e).to_string(),
            })
            .collect();
        Snapshot {
            tick: self.tick,
            bodies,
            entities,
            counters: SnapshotCounters {
                attempts: self.attempts,
                jump_power_level: self.counters.landed_new_platforms,
                hesitation: self.counters.hesitation_count,
            },
            message: self.completed.then(|| self.def.meta.rhetoric.clone()),
        }
    }
}

fn entity_state_label(e: &EntityState) -> &'static str {
    match e.kind {
        EntityKind::Platform if e.rect != e.base => "fled",
        EntityKind::Platform => "solid",
        EntityKind::Bridge if e.solid => "solid",
        EntityKind::Bridge => "collapsed",
        EntityKind::Spike if e.fake => "fake",
        EntityKind::Spike => "real",
        EntityKind::Star if e.collected => "collected",
        EntityKind::Star if e.flagged => "flagged",
        EntityKind::Star => "available",
        EntityKind::Plate if e.pressed => "pressed",
        EntityKind::Plate => "released",
        EntityKind::Door if e.solid => "closed",
        EntityKind::Door => "open",
        _ => "static",
    }
}

/// Free-function form of [`LevelRuntime::step`].
pub fn step(runtime: &mut LevelRuntime, input: &InputFrame) -> Vec<TickEvent> {
    runtime.step(input)
}

/// Free-function form of [`LevelRuntime::state_hash`].
pub fn state_hash(runtime: &LevelRuntime) -> u64 {
    runtime.state_hash()
}
