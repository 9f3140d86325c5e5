mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use worldyou_core::analytics::imi::{all_item_keys, reverse_item, Dimension};
use worldyou_core::analytics::{
    cohens_d, pooled_sd, score_imi, sunburst_export, t_test_pooled_two_tailed, theme_proportions,
    Group, GroupSummary, ImiResponse, Level, Question, ThemeCode,
};
use worldyou_core::level::{canonical_serialize, parse_level, Geometry};
use worldyou_core::replay::{diff_logs, replay, InputTrace};
use worldyou_core::runtime::LevelRuntime;
use worldyou_core::shipped;
use worldyou_core::sim::{EventKind, InputFrame};

fn level_ix() -> impl Strategy<Value = usize> {
    0usize..5
}

fn frames() -> impl Strategy<Value = Vec<(u8, u64)>> {
    prop::collection::vec((0u8..64, 1u64..60), 1..40)
}

fn trace_of(id: &str, runs: &[(u8, u64)]) -> InputTrace {
    let mut t = InputTrace::new(id);
    for &(bits, n) in runs {
        t.push_run(InputFrame::from_bits(bits), n);
    }
    t
}

fn summary() -> impl Strategy<Value = GroupSummary> {
    (1.0f64..7.0, 0.05f64..2.5, 2usize..60).prop_map(|(m, s, n)| GroupSummary::new(m, s, n))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bodies_never_rest_inside_solids(ix in level_ix(), runs in frames()) {
        let (id, _) = shipped::ALL[ix];
        let mut rt = LevelRuntime::new(&level(id));
        for f in trace_of(id, &runs).frames() {
            rt.step(&f);
            let bodies = std::iter::once(rt.player).chain(rt.npc);
            for b in bodies {
                let r = b.aabb();
                for e in rt.entities.iter().filter(|e| e.solid) {
                    prop_assert!(!r.overlaps(&e.rect), "{} tick {}: body inside {}", id, rt.tick, e.id);
                }
            }
            if rt.completed {
                break;
            }
        }
    }

    #[test]
    fn speeds_stay_bounded(ix in level_ix(), runs in frames()) {
        let (id, _) = shipped::ALL[ix];
        let def = level(id);
        let max_up = def.max_jump_speed();
        let mut rt = LevelRuntime::new(&def);
        for f in trace_of(id, &runs).frames() {
            rt.step(&f);
            for b in std::iter::once(rt.player).chain(rt.npc) {
                prop_assert!(b.vel.x.abs() <= def.physics.run_speed);
                prop_assert!(b.vel.y <= max_up);
                prop_assert!(b.pos.y >= def.kill_plane() - 1.0);
                if b.grounded {
                    prop_assert_eq!(b.vel.y, 0.0);
                }
            }
            if rt.completed {
                break;
            }
        }
    }

    #[test]
    fn replay_is_deterministic(ix in level_ix(), runs in frames()) {
        let (id, _) = shipped::ALL[ix];
        let def = level(id);
        let t = trace_of(id, &runs);
        let a = replay(&def, &t).unwrap();
        let b = replay(&def, &t).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        prop_assert!(diff_logs(&a, &b).is_none());
        let mut r1 = LevelRuntime::new(&def);
        let mut r2 = LevelRuntime::new(&def);
        for f in t.frames() {
            r1.step(&f);
            r2.step(&f);
            prop_assert_eq!(r1.state_hash(), r2.state_hash());
        }
    }

    /// Input after tick n cannot change anything logged up to tick n.
    #[test]
    fn later_input_cannot_change_the_past(ix in level_ix(), runs in frames(), tail in frames(), cut in 1u64..500) {
        let (id, _) = shipped::ALL[ix];
        let def = level(id);
        let base = trace_of(id, &runs);
        let cut = cut.min(base.len());
        let prefix = base.truncated(cut);
        let mut other = prefix.clone();
        for &(bits, n) in &tail {
            other.push_run(InputFrame::from_bits(bits), n);
        }
        let a = replay(&def, &base).unwrap();
        let b = replay(&def, &other).unwrap();
        let before = |log: &worldyou_core::replay::TelemetryLog| {
            let events: Vec<_> = log.events.iter().filter(|e| e.tick < cut).cloned().collect();
            let checks: Vec<_> = log.checkpoints.iter().filter(|c| c.tick <= cut).cloned().collect();
            (events, checks)
        };
        prop_assert_eq!(before(&a), before(&b));
        if let Some(d) = diff_logs(&a, &b) {
            prop_assert!(d.tick >= cut, "diverged at {} before the cut {}", d.tick, cut);
        }
    }

    #[test]
    fn diff_logs_is_symmetric(ix in level_ix(), r1 in frames(), r2 in frames()) {
        let (id, _) = shipped::ALL[ix];
        let def = level(id);
        let a = replay(&def, &trace_of(id, &r1)).unwrap();
        let b = replay(&def, &trace_of(id, &r2)).unwrap();
        let ab = diff_logs(&a, &b);
        let ba = diff_logs(&b, &a);
        prop_assert_eq!(ab.as_ref().map(|d| d.tick), ba.as_ref().map(|d| d.tick));
        if let (Some(x), Some(y)) = (ab, ba) {
            prop_assert_eq!(x.events_a, y.events_b);
            prop_assert_eq!(x.hash_a, y.hash_b);
        }
    }

    #[test]
    fn trace_text_round_trips(ix in level_ix(), runs in frames()) {
        let t = trace_of(shipped::ALL[ix].0, &runs);
        let text = t.to_text();
        let back = InputTrace::parse(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back.digest(), t.digest());
    }

    #[test]
    fn telemetry_json_round_trips(ix in level_ix(), runs in frames()) {
        let (id, _) = shipped::ALL[ix];
        let log = replay(&level(id), &trace_of(id, &runs)).unwrap();
        let back = worldyou_core::replay::TelemetryLog::from_json(&log.to_json()).unwrap();
        prop_assert_eq!(back, log);
    }

    #[test]
    fn level_defs_round_trip(
        ix in level_ix(),
        coords in prop::collection::vec(-500.0f64..500.0, 64),
        sizes in prop::collection::vec(0.001f64..200.0, 64),
        physics in prop::collection::vec(0.01f64..1000.0, 4),
        metaphor in "[A-Za-z0-9][A-Za-z0-9 ,.'!?-]{0,40}[A-Za-z0-9.]",
    ) {
        let (id, _) = shipped::ALL[ix];
        let mut def = level(id);
        for (i, e) in def.entities.iter_mut().enumerate() {
            match &mut e.geometry {
                Geometry::Point { x, y } => {
                    *x = coords[2 * i];
                    *y = coords[2 * i + 1];
                }
                Geometry::Rect { x, y, w, h } => {
                    *x = coords[2 * i];
                    *y = coords[2 * i + 1];
                    *w = sizes[2 * i];
                    *h = sizes[2 * i + 1];
                }
            }
        }
        def.physics.gravity = physics[0];
        def.physics.run_speed = physics[1];
        def.physics.ground_accel = physics[2];
        def.physics.base_jump_speed = physics[3];
        def.meta.metaphor = metaphor;
        let text = canonical_serialize(&def);
        let back = parse_level(&text).unwrap();
        prop_assert_eq!(&back, &def);
        prop_assert_eq!(canonical_serialize(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn effect_size_ignores_shift_and_scale(e in summary(), c in summary(), shift in -20.0f64..20.0, scale in 0.05f64..20.0) {
        let stats = |e: &GroupSummary, c: &GroupSummary| {
            let tt = t_test_pooled_two_tailed(e, c).unwrap();
            (cohens_d(e.mean, c.mean, pooled_sd(e.sd, c.sd, e.n, c.n).unwrap()).unwrap(), tt.t, tt.p)
        };
        let map = |g: &GroupSummary| GroupSummary::new(scale * g.mean + shift, scale * g.sd, g.n);
        let (d, t, p) = stats(&e, &c);
        let (d2, t2, p2) = stats(&map(&e), &map(&c));
        prop_assert!(close(d, d2) && close(t, t2) && close(p, p2), "{:?} vs {:?}", (d, t, p), (d2, t2, p2));
    }

    #[test]
    fn swapping_groups_flips_the_sign(e in summary(), c in summary()) {
        let a = t_test_pooled_two_tailed(&e, &c).unwrap();
        let b = t_test_pooled_two_tailed(&c, &e).unwrap();
        prop_assert!(close(a.t, -b.t));
        prop_assert!(close(a.p, b.p));
        prop_assert!((0.0..=1.0).contains(&a.p));
        prop_assert_eq!(a.df as usize, e.n + c.n - 2);
    }

    #[test]
    fn reverse_keying_is_an_involution(v in 1i64..=7) {
        prop_assert_eq!(reverse_item(reverse_item(v)), v);
        prop_assert!((1..=7).contains(&reverse_item(v)));
    }

    #[test]
    fn imi_scores_match_the_cellwise_oracle(cells in prop::collection::vec(1i64..=7, 37)) {
        let keys = all_item_keys();
        let r = ImiResponse {
            participant_id: "p".into(),
            group: Group::E,
            items: keys.iter().cloned().zip(cells.iter().copied()).collect(),
        };
        let scores = score_imi(&r).unwrap();
        let oracle = imi_oracle(&keys, &cells);
        for (i, d) in Dimension::ALL.iter().enumerate() {
            prop_assert_eq!(scores[d], oracle[i]);
            prop_assert!((1.0..=7.0).contains(&scores[d]));
        }
    }

    #[test]
    fn theme_cells_sum_to_one(raw in prop::collection::vec((0usize..5, 0usize..3, 0usize..7, 0usize..30), 0..200)) {
        let codes: Vec<ThemeCode> = raw
            .iter()
            .map(|&(l, q, t, p)| ThemeCode {
                participant_id: format!("p{p}"),
                level: Level::ALL[l],
                question: Question::ALL[q],
                theme: format!("theme {t}"),
            })
            .collect();
        let props = theme_proportions(&codes);
        let mut filled = 0;
        for q in Question::ALL {
            for l in Level::ALL {
                let cell: Vec<_> = props.nodes.iter().filter(|n| n.question == q && n.level == l).collect();
                if cell.is_empty() {
                    continue;
                }
                filled += 1;
                let s: f64 = cell.iter().map(|n| n.level_proportion).sum();
                prop_assert!((s - 1.0).abs() <= 1e-12);
                for w in cell.windows(2) {
                    prop_assert!(w[0].level_proportion > w[1].level_proportion
                        || (w[0].level_proportion == w[1].level_proportion && w[0].theme < w[1].theme));
                }
                for n in &cell {
                    prop_assert!((n.global_proportion - n.level_proportion * 0.2).abs() <= 1e-15);
                }
            }
        }
        prop_assert_eq!(filled + props.diagnostics.len(), 15);
        for doc in sunburst_export(&props.nodes) {
            let w: f64 = doc.rings.iter().map(|r| r.weight).sum();
            prop_assert!((w - 1.0).abs() <= 1e-12);
            let g: f64 = doc.rings.iter().flat_map(|r| &r.themes).map(|t| t.global_proportion).sum();
            let rings = doc.rings.iter().filter(|r| !r.themes.is_empty()).count() as f64;
            prop_assert!((g - 0.2 * rings).abs() <= 1e-12);
        }
    }
}

#[test]
fn random_play_reaches_mechanic_events() {
    // guards the property tests against traces that never exercise anything
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut kinds = std::collections::BTreeSet::new();
    for (id, _) in shipped::ALL {
        for _ in 0..40 {
            let log = replay(&level(id), &random_trace(&mut rng, id, 2000)).unwrap();
            kinds.extend(log.events.iter().map(|e| e.kind));
        }
    }
    for k in [
        EventKind::Jump,
        EventKind::Land,
        EventKind::Death,
        EventKind::StarCollect,
        EventKind::PlatformFlee,
    ] {
        assert!(kinds.contains(&k), "{k:?} never happened");
    }
}
