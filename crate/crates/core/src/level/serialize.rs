use std::fmt::Write;

use super::LevelDef;

/// Canonical text form: fixed section order, keys sorted, entities sorted by
/// `(kind, id)`, attributes sorted, numbers in shortest round-trip decimal
/// form, LF line endings.
pub fn canonical_serialize(def: &LevelDef) -> String {
    let mut out = String::new();
    let m = &def.meta;
    out.push_str("[meta]\n");
    kv(&mut out, "clinical_feature", &m.clinical_feature);
    kv(&mut out, "distortion", m.distortion.as_str());
    kv(&mut out, "level_id", &m.level_id);
    kv(&mut out, "metaphor", &m.metaphor);
    kv(&mut out, "rhetoric", &m.rhetoric);

    let p = &def.physics;
    out.push_str("\n[physics]\n");
    kv(&mut out, "base_jump_speed", &num(p.base_jump_speed));
    kv(&mut out, "ground_accel", &num(p.ground_accel));
    kv(&mut out, "gravity", &num(p.gravity));
    kv(&mut out, "run_speed", &num(p.run_speed));

    let mc = &def.mechanics;
    out.push_str("\n[mechanics]\n");
    kv(&mut out, "flee_delta0", &num(mc.flee_delta0));
    kv(&mut out, "flee_step", &num(mc.flee_step));
    kv(&mut out, "gap_width", &num(mc.gap_width));
    kv(
        &mut out,
        "idle_threshold_ticks",
        &mc.idle_threshold_ticks.to_string(),
    );
    kv(&mut out, "jump_base", &num(mc.jump_base));
    kv(&mut out, "jump_increment", &num(mc.jump_increment));
    kv(&mut out, "jump_max", &num(mc.jump_max));
    kv(&mut out, "v_min", &num(mc.v_min));

    out.push_str("\n[entities]\n");
    let mut entities: Vec<_> = def.entities.iter().collect();
    entities.sort_by(|a, b| (a.kind.as_str(), &a.id).cmp(&(b.kind.as_str(), &b.id)));
    for e in entities {
        out.push_str(e.kind.as_str());
        out.push(' ');
        out.push_str(&e.id);
        for v in e.geometry.numbers() {
            out.push(' ');
            out.push_str(&num(v));
        }
        for (k, v) in &e.attrs {
            let _ = write!(out, " {k}={v}");
        }
        out.push('\n');
    }
    out
}

fn kv(out: &mut String, key: &str, value: &str) {
    let _ = writeln!(out, "{key} = {value}");
}

/// `Display` for `f64` already yields the shortest string that parses back
/// to the same value and never uses exponent notation.
fn num(v: f64) -> String {
    format!("{v}")
}
