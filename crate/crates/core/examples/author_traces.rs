//! Regenerates the golden traces under `assets/traces` by driving the bundled
//! levels with small reactive controllers.
//!
//! cargo run -p worldyou-core --example author_traces

use std::path::Path;

use worldyou_core::replay::{replay, InputTrace};
use worldyou_core::runtime::LevelRuntime;
use worldyou_core::shipped;
use worldyou_core::sim::InputFrame;

const RIGHT: InputFrame = InputFrame {
    a_right: true,
    ..InputFrame::IDLE
};
const RIGHT_JUMP: InputFrame = InputFrame {
    a_right: true,
    a_jump: true,
    ..InputFrame::IDLE
};

fn drive(
    level: &str,
    max_ticks: u64,
    mut ctl: impl FnMut(&LevelRuntime) -> InputFrame,
) -> InputTrace {
    let def = shipped::level(level).unwrap();
    let mut rt = LevelRuntime::new(&def);
    let mut trace = InputTrace::new(level);
    while !rt.completed && rt.tick < max_ticks {
        let f = ctl(&rt);
        rt.step(&f);
        trace.push(f);
    }
    trace
}

fn run_and_jump_at(rt: &LevelRuntime, xs: &[f64]) -> InputFrame {
    let p = &rt.player;
    let x = p.pos.x;
    if p.grounded && xs.iter().any(|&j| x >= j && x < j + 0.5) {
        RIGHT_JUMP
    } else {
        RIGHT
    }
}

fn l1_skip() -> InputTrace {
    drive("L1", 3000, |rt| run_and_jump_at(rt, &[5.3]))
}

fn l1_greedy() -> InputTrace {
    drive("L1", 10_000, |rt| run_and_jump_at(rt, &[5.3, 12.5]))
}

fn l2_identical() -> InputTrace {
    drive("L2", 6000, |rt| run_and_jump_at(rt, &[9.5, 15.0]))
}

fn l3_climb() -> InputTrace {
    drive("L3", 3000, |rt| run_and_jump_at(rt, &[3.4, 6.4, 9.4, 12.4]))
}

fn l4_maintained() -> InputTrace {
    drive("L4", 3000, |rt| run_and_jump_at(rt, &[2.4, 7.7]))
}

/// Edge up to the pit, stop there, wait, then jump with only the short
/// run-up left.
fn l4_stop_then_jump() -> InputTrace {
    let mut phase = 0;
    let mut waited = 0;
    drive("L4", 600, move |rt| {
        let p = &rt.player;
        let x = p.pos.x;
        if rt.attempts > 1 {
            return InputFrame::IDLE;
        }
        let stopped = p.grounded && p.vel.x == 0.0;
        match phase {
            0 if x < 1.3 => RIGHT,
            0 => {
                if stopped {
                    phase = 1;
                }
                InputFrame::IDLE
            }
            1 if x < 3.0 => run_and_jump_at(rt, &[2.3]),
            1 => {
                if !p.grounded || x < 6.0 {
                    return RIGHT;
                }
                if stopped {
                    phase = 2;
                }
                InputFrame::IDLE
            }
            2 if waited < 120 => {
                waited += 1;
                InputFrame::IDLE
            }
            _ => run_and_jump_at(rt, &[7.7]),
        }
    })
}

fn l5_two_channel() -> InputTrace {
    drive("L5", 3000, |rt| {
        let p = &rt.player;
        match &rt.npc {
            None if p.pos.x >= 12.0 => InputFrame {
                a_left: true,
                ..InputFrame::IDLE
            },
            None => InputFrame {
                b_right: true,
                ..InputFrame::IDLE
            },
            Some(n)
                if n.pos.x < 2.3 && !rt.entities.iter().any(|e| e.id == "plate_b" && e.pressed) =>
            {
                InputFrame {
                    b_right: true,
                    ..InputFrame::IDLE
                }
            }
            Some(n) if n.vel.x != 0.0 => InputFrame::IDLE,
            Some(_) => RIGHT,
        }
    })
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/traces");
    std::fs::create_dir_all(&dir).unwrap();
    let traces: [(&str, InputTrace); 7] = [
        ("L1_skip", l1_skip()),
        ("L1_greedy", l1_greedy()),
        ("L2_identical_jump", l2_identical()),
        ("L3_climb", l3_climb()),
        ("L4_maintained_run", l4_maintained()),
        ("L4_stop_then_jump", l4_stop_then_jump()),
        ("L5_two_channel", l5_two_channel()),
    ];
    for (name, trace) in traces {
        let def = shipped::level(&trace.level_id).unwrap();
        let log = replay(&def, &trace).unwrap();
        let kinds: Vec<String> = log
            .events
            .iter()
            .filter(|e| !matches!(format!("{:?}", e.kind).as_str(), "Jump" | "Land"))
            .map(|e| format!("{}:{:?}", e.tick, e.kind))
            .collect();
        println!(
            "{name}: completed={} ticks={} attempts={} stars={}\n  {}",
            log.summary.completed,
            log.summary.ticks,
            log.summary.attempts,
            log.summary.stars_collected,
            kinds.iter().take(40).cloned().collect::<Vec<_>>().join(" ")
        );
        std::fs::write(dir.join(format!("{name}.trace")), trace.to_text()).unwrap();
    }
}
