mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use worldyou_core::level::{
    canonical_serialize, parse_level, validate, DiagnosticCode, Geometry, LevelDef,
};
use worldyou_core::runtime::LevelRuntime;
use worldyou_core::shipped;

#[test]
fn shipped_levels_are_canonical_fixpoints() {
    for (id, source) in shipped::ALL {
        let def = parse_level(source).unwrap();
        assert!(validate(&def).is_empty(), "{id}");
        let text = canonical_serialize(&def);
        let again = parse_level(&text).unwrap();
        assert_eq!(again, def, "{id}");
        assert_eq!(canonical_serialize(&again), text, "{id}");
    }
}

#[test]
fn shipped_meta_text() {
    let rows = [
        (
            "L1",
            "Perfectionism",
            "Items that do not require complete collection",
        ),
        (
            "L2",
            "Overgeneralization",
            "A platform that escapes as soon as players try to reach",
        ),
        (
            "L3",
            "JumpingToConclusions",
            "Some platforms that appear visually impossible to reach",
        ),
        (
            "L4",
            "Magnification",
            "Some obstacles that appear to be very large",
        ),
        (
            "L5",
            "Personalization",
            "A predicament that cannot be overcome alone",
        ),
    ];
    for (id, distortion, metaphor) in rows {
        let def = level(id);
        assert_eq!(def.meta.distortion.as_str(), distortion);
        assert_eq!(def.meta.metaphor, metaphor);
    }
}

#[test]
fn every_mutation_is_located() {
    assert!(MUTATIONS.len() >= 20);
    let problems: Vec<String> = MUTATIONS.iter().filter_map(check_mutation).collect();
    assert!(problems.is_empty(), "{problems:#?}");
}

#[test]
fn mutation_codes_cover_the_error_kinds() {
    let mut codes: Vec<&str> = MUTATIONS.iter().map(|m| m.code).collect();
    codes.sort();
    codes.dedup();
    assert_eq!(codes.len(), 12, "{codes:?}");
}

fn without(def: &LevelDef, id: &str) -> LevelDef {
    let mut out = def.clone();
    out.entities.retain(|e| e.id != id);
    out
}

fn codes(def: &LevelDef) -> Vec<DiagnosticCode> {
    validate(def).into_iter().map(|d| d.code).collect()
}

#[test]
fn removing_a_mechanic_piece_is_diagnosed() {
    assert!(codes(&without(&level("L1"), "crown")).contains(&DiagnosticCode::MissingFlaggedStar));
    assert!(codes(&without(&level("L2"), "approach")).contains(&DiagnosticCode::MissingFleeTrigger));
    assert!(codes(&without(&level("L4"), "giant")).contains(&DiagnosticCode::MissingFakeSpike));
    assert!(codes(&without(&level("L4"), "brink")).contains(&DiagnosticCode::MissingHesitationZone));
    assert!(codes(&without(&level("L5"), "plate_b")).contains(&DiagnosticCode::PlateCount));
    assert!(codes(&without(&level("L5"), "helper")).contains(&DiagnosticCode::MissingNpcSpawn));
    for (id, _) in shipped::ALL {
        assert!(
            codes(&without(&level(id), "start")).contains(&DiagnosticCode::MissingSpawn),
            "{id}"
        );
        assert!(
            codes(&without(&level(id), "goal")).contains(&DiagnosticCode::MissingExit)
                || id == "L5"
        );
    }
}

#[test]
fn raising_the_last_step_out_of_reach_is_diagnosed() {
    let mut def = level("L3");
    let step = def.entities.iter_mut().find(|e| e.id == "step4").unwrap();
    if let Geometry::Rect { h, .. } = &mut step.geometry {
        *h += 3.0;
    }
    assert!(codes(&def).contains(&DiagnosticCode::UnreachablePlatform));
}

#[test]
fn validator_agrees_with_the_l3_simulation() {
    for from in 0..4 {
        assert!(
            l3_step_reachable(from, from as u32),
            "step {} at power {from}",
            from + 1
        );
        if from > 0 {
            assert!(
                !l3_step_reachable(from, from as u32 - 1),
                "step {} at power {}",
                from + 1,
                from - 1
            );
        }
    }
}

fn jitter(def: &LevelDef, picks: &[(usize, usize, f64)]) -> LevelDef {
    let mut out = def.clone();
    let n = out.entities.len();
    for &(i, field, delta) in picks {
        let e = &mut out.entities[i % n];
        match &mut e.geometry {
            Geometry::Point { x, y } => *[x, y][field % 2] += delta,
            Geometry::Rect { x, y, w, h } => *[x, y, w, h][field % 4] += delta,
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parser_never_panics_on_noise(text in "[\\[\\]a-z_=0-9 .#\\n-]{0,300}") {
        let _ = parse_level(&text);
    }

    #[test]
    fn parser_never_panics_on_edited_levels(level_ix in 0usize..5, at in 0usize..2000, insert in "[ \\n=.a-z0-9\\[\\]-]{0,8}") {
        let source = shipped::ALL[level_ix].1;
        let mut cut = at % source.len();
        while !source.is_char_boundary(cut) {
            cut -= 1;
        }
        let text = format!("{}{}{}", &source[..cut], insert, &source[cut..]);
        if let Ok(def) = parse_level(&text) {
            let again = parse_level(&canonical_serialize(&def)).unwrap();
            prop_assert_eq!(again, def);
        }
    }

    /// A clean verdict on a perturbed level still yields a runtime that stays
    /// finite and out of solids under random play.
    #[test]
    fn clean_levels_simulate_soundly(
        level_ix in 0usize..5,
        picks in prop::collection::vec((0usize..40, 0usize..4, -1.5f64..1.5), 0..4),
        seed in any::<u64>(),
    ) {
        let (id, _) = shipped::ALL[level_ix];
        let def = jitter(&level(id), &picks);
        if !validate(&def).is_empty() {
            return Ok(());
        }
        let text = canonical_serialize(&def);
        prop_assert_eq!(&parse_level(&text).unwrap(), &def);
        let mut rt = LevelRuntime::new(&def);
        let trace = random_trace(&mut ChaCha8Rng::seed_from_u64(seed), id, 600);
        for f in trace.frames() {
            rt.step(&f);
            prop_assert!(rt.player.is_finite());
            let body = rt.player.aabb();
            for e in rt.entities.iter().filter(|e| e.solid) {
                prop_assert!(!body.overlaps(&e.rect), "{} inside {}", id, e.id);
            }
            if rt.completed {
                break;
            }
        }
    }
}
