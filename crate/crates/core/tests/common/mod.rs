//! Oracles and helpers shared by the integration test targets.
#![allow(dead_code)]

use std::collections::HashSet;
use std::path::PathBuf;

use rand::Rng;
use worldyou_core::level::{parse_level, LevelDef};
use worldyou_core::replay::InputTrace;
use worldyou_core::runtime::LevelRuntime;
use worldyou_core::sim::{Body, EventKind, Facing, InputFrame};
use worldyou_core::{geom::Vec2, shipped};

pub const RIGHT: InputFrame = InputFrame {
    a_right: true,
    ..InputFrame::IDLE
};
pub const RIGHT_JUMP: InputFrame = InputFrame {
    a_right: true,
    a_jump: true,
    ..InputFrame::IDLE
};

pub fn asset(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("assets")
        .join(rel)
}

pub fn level(id: &str) -> LevelDef {
    shipped::level(id).unwrap()
}

pub fn golden(name: &str) -> InputTrace {
    let text = std::fs::read_to_string(asset(&format!("traces/{name}.trace"))).unwrap();
    InputTrace::parse(&text).unwrap()
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(asset(&format!("fixtures/{name}"))).unwrap()
}

/// Random keyboard traffic: runs of 1..=45 ticks of a random frame.
pub fn random_trace(rng: &mut impl Rng, level_id: &str, ticks: u64) -> InputTrace {
    let mut t = InputTrace::new(level_id);
    while t.len() < ticks {
        let n = rng.gen_range(1..=45).min(ticks - t.len());
        t.push_run(InputFrame::from_bits(rng.gen_range(0..64)), n);
    }
    t
}

// ---------------------------------------------------------------------------
// parser mutations

/// A single-token edit of the bundled L4 text. `culprit` is the part of
/// `new` the resulting error must point at.
pub struct Mutation {
    pub line: usize,
    pub old: &'static str,
    pub new: &'static str,
    pub culprit: &'static str,
    pub code: &'static str,
}

const fn m(
    line: usize,
    old: &'static str,
    new: &'static str,
    culprit: &'static str,
    code: &'static str,
) -> Mutation {
    Mutation {
        line,
        old,
        new,
        culprit,
        code,
    }
}

pub const MUTATIONS: [Mutation; 22] = [
    m(1, "# Magnification", "[physics", "[physics", "E001"),
    m(2, "[meta]", "meta", "meta", "E004"),
    m(3, "level_id", "level id", "level", "E001"),
    m(
        4,
        "Magnification",
        "Catastrophizing",
        "Catastrophizing",
        "E008",
    ),
    m(7, "rhetoric", "metaphor", "metaphor", "E006"),
    m(9, "[mechanics]", "[mechanic]", "[mechanic]", "E002"),
    m(10, "3.5", "1e3", "1e3", "E007"),
    m(11, "v_min", "v_max", "v_max", "E005"),
    m(12, "90", "9o", "9o", "E007"),
    m(12, "90", "0", "0", "E008"),
    m(14, "[entities]", "[meta]", "[meta]", "E003"),
    m(15, "1 0", "1 0 3", "3", "E012"),
    m(16, "-1 -1 1 7", "-1 -1 0 7", "0", "E008"),
    m(17, "7.5", "7.5.1", "7.5.1", "E007"),
    m(17, "gap=near", "gap=mid", "mid", "E008"),
    m(17, "gap=near", "gap=near gap=far", "gap=far", "E006"),
    m(18, "type=real", "kind=real", "kind=real", "E011"),
    m(18, "real", "maybe", "maybe", "E008"),
    m(19, "platform", "platfrom", "platfrom", "E009"),
    m(20, "giant", "thorns", "thorns", "E010"),
    m(20, "giant", "gi@nt", "gi@nt", "E001"),
    m(23, "2 1 2", "2 1 2 flagged=true", "flagged=true", "E011"),
];

impl Mutation {
    /// Mutated text and the expected `(line, column)`.
    pub fn apply(&self, base: &str) -> (String, usize, usize) {
        let mut lines: Vec<String> = base.split('\n').map(str::to_string).collect();
        let line = &mut lines[self.line - 1];
        let at = line
            .find(self.old)
            .unwrap_or_else(|| panic!("{:?} not on line {}", self.old, self.line));
        line.replace_range(at..at + self.old.len(), self.new);
        let culprit_at = at + line[at..].find(self.culprit).unwrap();
        let column = line[..culprit_at].chars().count() + 1;
        (lines.join("\n"), self.line, column)
    }
}

/// `None` when the mutation is reported at the expected place.
pub fn check_mutation(mutation: &Mutation) -> Option<String> {
    let (text, line, column) = mutation.apply(shipped::L4);
    match parse_level(&text) {
        Ok(_) => Some(format!("line {line}: mutation {:?} parsed", mutation.new)),
        Err(e) if (e.line, e.column, e.kind.code()) == (line, column, mutation.code) => None,
        Err(e) => Some(format!(
            "mutation {:?}: got {}:{} {}, expected {line}:{column} {}",
            mutation.new,
            e.line,
            e.column,
            e.kind.code(),
            mutation.code
        )),
    }
}

// ---------------------------------------------------------------------------
// Student t tail by quadrature

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, eps, 60)
}

/// Two-tailed Student-t probability from the angular form of the density:
/// with `t = sqrt(df) tan(theta)` the density in `theta` is proportional to
/// `cos(theta)^(df-1)` on `(-pi/2, pi/2)`.
pub fn t_tail_by_quadrature(t: f64, df: f64) -> f64 {
    let f = move |th: f64| th.cos().max(0.0).powf(df - 1.0);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let theta0 = (t.abs() / df.sqrt()).atan();
    integrate(&f, theta0, half_pi, 1e-15) / integrate(&f, 0.0, half_pi, 1e-15)
}

// ---------------------------------------------------------------------------
// IMI scoring, one cell at a time

pub const IMI_REVERSED_CELLS: [&str; 12] = [
    "IE3", "IE4", "PC6", "EI2", "EI5", "PT1", "PT3", "CH2", "CH3", "CH4", "CH5", "CH7",
];

/// Dimension scores in report order from one CSV row (`header` and `row`
/// start at the first item column).
pub fn imi_oracle(header: &[String], row: &[i64]) -> [f64; 6] {
    let prefixes = ["IE", "PC", "EI", "PT", "CH", "VU"];
    let mut sums = [0.0f64; 6];
    let mut counts = [0.0f64; 6];
    for (col, name) in header.iter().enumerate() {
        let dim = prefixes.iter().position(|p| name.starts_with(p)).unwrap();
        let raw = row[col] as f64;
        let value = if IMI_REVERSED_CELLS.contains(&name.as_str()) {
            8.0 - raw
        } else {
            raw
        };
        sums[dim] += value;
        counts[dim] += 1.0;
    }
    let mut out = [0.0; 6];
    for i in 0..6 {
        out[i] = sums[i] / counts[i];
    }
    out
}

// ---------------------------------------------------------------------------
// level-specific searches

/// Does any run-up from standing on step `from` reach step `from + 1` with
/// the given jump power? Tries every start position on a 0.05 grid and
/// every run-up length up to 40 ticks, holding right throughout.
pub fn l3_step_reachable(from: usize, power: u32) -> bool {
    let def = level("L3");
    let step = |i: usize| def.entity(&format!("step{i}")).unwrap().aabb();
    let (lower, upper) = (step(from), step(from + 1));
    let mut base = LevelRuntime::new(&def);
    base.counters.landed_new_platforms = power;
    for k in 0..=4 {
        base.visited.insert(
            def.entities
                .iter()
                .position(|e| e.id == format!("step{k}"))
                .unwrap(),
        );
    }
    let mut x = lower.min.x.max(0.4) + 0.05;
    while x + 0.4 <= lower.max.x {
        for run_up in 0..=40u32 {
            let mut rt = base.clone();
            rt.player = Body::at(Vec2::new(x, lower.max.y));
            rt.player.grounded = true;
            for i in 0..(run_up + 120) {
                let f = if i == run_up { RIGHT_JUMP } else { RIGHT };
                rt.step(&f);
                if rt.player.grounded && rt.player.pos.y == upper.max.y {
                    return true;
                }
                if rt.attempts > 1 {
                    break;
                }
            }
        }
        x += 0.05;
    }
    false
}

pub struct GateScan {
    pub slow_tried: usize,
    pub slow_cleared: usize,
    pub fast_tried: usize,
    pub fast_cleared: usize,
}

/// Jump across the L4 pit from every launch position near the edge at every
/// ground speed the integrator can produce (multiples of accel * dt).
pub fn l4_gate_scan() -> GateScan {
    let def = level("L4");
    let near = def.entity("near").unwrap().aabb();
    let far = def.entity("far").unwrap().aabb();
    let v_min = def.mechanics.v_min;
    let base = LevelRuntime::new(&def);
    let dv = def.physics.ground_accel * def.physics.dt;
    let mut scan = GateScan {
        slow_tried: 0,
        slow_cleared: 0,
        fast_tried: 0,
        fast_cleared: 0,
    };
    let steps = (def.physics.run_speed / dv).round() as i32;
    for k in 0..=steps {
        let v = k as f64 * dv;
        let mut x = near.max.x - 1.5;
        let v0 = v;
        while x - 0.4 < near.max.x {
            let mut rt = base.clone();
            rt.player = Body::at(Vec2::new(x, near.max.y));
            rt.player.grounded = true;
            rt.player.vel.x = v0;
            rt.player.facing = Facing::Right;
            let mut cleared = false;
            let mut launch = None;
            for i in 0..240 {
                let events = rt.step(if i == 0 { &RIGHT_JUMP } else { &RIGHT });
                if let Some(j) = events.iter().find(|e| e.kind == EventKind::Jump) {
                    launch = Some(j.payload["vx"]);
                }
                if events.iter().any(|e| e.kind == EventKind::Death) {
                    break;
                }
                if rt.player.grounded && i > 0 {
                    cleared = rt.player.pos.y == far.max.y;
                    break;
                }
            }
            let Some(v) = launch else {
                x += 0.01;
                continue;
            };
            if v < v_min {
                scan.slow_tried += 1;
                scan.slow_cleared += cleared as usize;
            } else if v == def.physics.run_speed {
                scan.fast_tried += 1;
                scan.fast_cleared += cleared as usize;
            }
            x += 0.01;
        }
    }
    scan
}

pub struct SearchReport {
    pub states: usize,
    pub completed: bool,
    pub door_opened: bool,
    pub touched_plate_a: bool,
    pub touched_plate_b: bool,
}

/// Breadth-first search over everything the player alone can do on L5 in
/// `max_ticks` ticks, with channel B never pressed. States are merged on a
/// grid of `1/quantum` in position and velocity.
pub fn l5_single_body_search(max_ticks: u64, quantum: f64) -> SearchReport {
    let def = level("L5");
    let base = LevelRuntime::new(&def);
    let plate = |id: &str| def.entity(id).unwrap().aabb();
    let (plate_a, plate_b) = (plate("plate_a"), plate("plate_b"));
    let q = |v: f64| (v * quantum).round() as i64;
    let key = |b: &Body| {
        (
            q(b.pos.x),
            q(b.pos.y),
            q(b.vel.x),
            q(b.vel.y),
            b.grounded,
            b.facing == Facing::Right,
        )
    };
    let mut seen = HashSet::new();
    seen.insert(key(&base.player));
    let mut frontier = vec![base.player];
    let mut report = SearchReport {
        states: 1,
        completed: false,
        door_opened: false,
        touched_plate_a: false,
        touched_plate_b: false,
    };
    let inputs: Vec<InputFrame> = (0..8u8).map(|a| InputFrame::from_bits(a << 3)).collect();
    for _ in 0..max_ticks {
        let mut next = Vec::new();
        for body in &frontier {
            for f in &inputs {
                let mut rt = base.clone();
                rt.player = *body;
                let events = rt.step(f);
                report.completed |= rt.completed;
                report.door_opened |= events.iter().any(|e| e.kind == EventKind::DoorOpen);
                let b = rt.player.aabb();
                report.touched_plate_a |= b.overlaps(&plate_a);
                report.touched_plate_b |= b.overlaps(&plate_b);
                if seen.insert(key(&rt.player)) {
                    next.push(rt.player);
                }
            }
        }
        report.states += next.len();
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    report
}
