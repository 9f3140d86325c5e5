use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::{Distortion, EntityDecl, EntityKind, Geometry, LevelDef, MechanicParams, MetaBlock};
use crate::sim::PhysicsParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    Syntax,
    UnknownSection,
    DuplicateSection,
    ContentOutsideSection,
    UnknownKey,
    DuplicateKey,
    MalformedNumber,
    InvalidValue,
    UnknownKind,
    DuplicateId,
    UnknownAttr,
    WrongArity,
    MissingField,
}

impl ParseErrorKind {
    pub fn code(&self) -> &'static str {
        match self {
            ParseErrorKind::Syntax => "E001",
            ParseErrorKind::UnknownSection => "E002",
            ParseErrorKind::DuplicateSection => "E003",
            ParseErrorKind::ContentOutsideSection => "E004",
            ParseErrorKind::UnknownKey => "E005",
            ParseErrorKind::DuplicateKey => "E006",
            ParseErrorKind::MalformedNumber => "E007",
            ParseErrorKind::InvalidValue => "E008",
            ParseErrorKind::UnknownKind => "E009",
            ParseErrorKind::DuplicateId => "E010",
            ParseErrorKind::UnknownAttr => "E011",
            ParseErrorKind::WrongArity => "E012",
            ParseErrorKind::MissingField => "E013",
        }
    }
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A located parse failure. `line` and `column` are 1-based; the column is
/// counted in characters and points at the first character of the
/// offending token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: [{kind}] {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Meta,
    Physics,
    Mechanics,
    Entities,
}

impl Section {
    fn from_name(name: &str) -> Option<Section> {
        match name {
            "meta" => Some(Section::Meta),
            "physics" => Some(Section::Physics),
            "mechanics" => Some(Section::Mechanics),
            "entities" => Some(Section::Entities),
            _ => None,
        }
    }
}

const META_KEYS: [&str; 5] = [
    "clinical_feature",
    "distortion",
    "level_id",
    "metaphor",
    "rhetoric",
];
const PHYSICS_KEYS: [&str; 4] = ["base_jump_speed", "ground_accel", "gravity", "run_speed"];
const MECHANICS_KEYS: [&str; 8] = [
    "flee_delta0",
    "flee_step",
    "gap_width",
    "idle_threshold_ticks",
    "jump_base",
    "jump_increment",
    "jump_max",
    "v_min",
];

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

/// Splits on whitespace, remembering each token's 1-based char column.
fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((byte, col + 1)),
            (true, Some((b, c))) => {
                out.push(Token {
                    text: &line[b..byte],
                    column: c,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some((b, c)) = start {
        out.push(Token {
            text: &line[b..],
            column: c,
        });
    }
    out
}

fn char_column(line: &str, byte: usize) -> usize {
    line[..byte].chars().count() + 1
}

fn is_decimal(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (digits, None),
    };
    let all_digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    all_digits(int) && frac.is_none_or(all_digits)
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

struct Parser {
    line: usize,
}

impl Parser {
    fn err(&self, kind: ParseErrorKind, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            kind,
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn number(&self, tok: &Token<'_>) -> Result<f64, ParseError> {
        if !is_decimal(tok.text) {
            return Err(self.err(
                ParseErrorKind::MalformedNumber,
                tok.column,
                format!("malformed number '{}'", tok.text),
            ));
        }
        tok.text
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                self.err(
                    ParseErrorKind::MalformedNumber,
                    tok.column,
                    "number out of range",
                )
            })
    }
}

/// Parse level text. Entities in the result are sorted by `(kind, id)`.
pub fn parse_level(text: &str) -> Result<LevelDef, ParseError> {
    let mut p = Parser { line: 0 };
    let mut section: Option<Section> = None;
    let mut seen_sections = BTreeSet::new();
    let mut kv: BTreeMap<Section, BTreeMap<String, (String, usize, usize)>> = BTreeMap::new();
    let mut entities: Vec<EntityDecl> = Vec::new();
    let mut ids: BTreeSet<String> = BTreeSet::new();
    let mut meta_line = 0;

    for (idx, raw) in text.split('\n').enumerate() {
        p.line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = char_column(line, line.len() - line.trim_start().len());

        if trimmed.starts_with('[') {
            let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) else {
                return Err(p.err(ParseErrorKind::Syntax, lead, "malformed section header"));
            };
            let Some(s) = Section::from_name(name) else {
                return Err(p.err(
                    ParseErrorKind::UnknownSection,
                    lead,
                    format!("unknown section '[{name}]'"),
                ));
            };
            if !seen_sections.insert(s) {
                return Err(p.err(
                    ParseErrorKind::DuplicateSection,
                    lead,
                    format!("section '[{name}]' appears twice"),
                ));
            }
            if s == Section::Meta {
                meta_line = p.line;
            }
            section = Some(s);
            continue;
        }

        match section {
            None => {
                return Err(p.err(
                    ParseErrorKind::ContentOutsideSection,
                    lead,
                    "content before the first section header",
                ))
            }
            Some(Section::Entities) => {
                let decl = parse_entity(&p, line)?;
                if !ids.insert(decl.id.clone()) {
                    let col = tokenize(line)[1].column;
                    return Err(p.err(
                        ParseErrorKind::DuplicateId,
                        col,
                        format!("duplicate entity id '{}'", decl.id),
                    ));
                }
                entities.push(decl);
            }
            Some(s) => {
                let Some(eq) = line.find('=') else {
                    return Err(p.err(ParseErrorKind::Syntax, lead, "expected 'key = value'"));
                };
                let key = line[..eq].trim();
                let value_part = &line[eq + 1..];
                let value = value_part.trim();
                let value_col = if value.is_empty() {
                    char_column(line, eq) + 1
                } else {
                    char_column(
                        line,
                        eq + 1 + (value_part.len() - value_part.trim_start().len()),
                    )
                };
                if !is_ident(key) {
                    return Err(p.err(ParseErrorKind::Syntax, lead, "expected a key before '='"));
                }
                let allowed: &[&str] = match s {
                    Section::Meta => &META_KEYS,
                    Section::Physics => &PHYSICS_KEYS,
                    Section::Mechanics => &MECHANICS_KEYS,
                    Section::Entities => unreachable!(),
                };
                if !allowed.contains(&key) {
                    return Err(p.err(
                        ParseErrorKind::UnknownKey,
                        lead,
                        format!("unknown key '{key}'"),
                    ));
                }
                let map = kv.entry(s).or_default();
                if map.contains_key(key) {
                    return Err(p.err(
                        ParseErrorKind::DuplicateKey,
                        lead,
                        format!("duplicate key '{key}'"),
                    ));
                }
                if value.is_empty() {
                    return Err(p.err(
                        ParseErrorKind::InvalidValue,
                        value_col,
                        format!("empty value for '{key}'"),
                    ));
                }
                map.insert(key.to_string(), (value.to_string(), p.line, value_col));
            }
        }
    }

    let end_line = p.line.max(1);
    let meta = build_meta(
        kv.remove(&Section::Meta).unwrap_or_default(),
        meta_line.max(1),
        end_line,
    )?;
    let physics = build_physics(kv.remove(&Section::Physics).unwrap_or_default())?;
    let mechanics = build_mechanics(kv.remove(&Section::Mechanics).unwrap_or_default())?;
    entities.sort_by(|a, b| (a.kind.as_str(), &a.id).cmp(&(b.kind.as_str(), &b.id)));
    Ok(LevelDef {
        meta,
        physics,
        mechanics,
        entities,
    })
}

fn parse_entity(p: &Parser, line: &str) -> Result<EntityDecl, ParseError> {
    let toks = tokenize(line);
    let kind: EntityKind = toks[0].text.parse().map_err(|_| {
        p.err(
            ParseErrorKind::UnknownKind,
            toks[0].column,
            format!("unknown entity kind '{}'", toks[0].text),
        )
    })?;
    let Some(id_tok) = toks.get(1) else {
        return Err(p.err(
            ParseErrorKind::WrongArity,
            toks[0].column,
            "missing entity id",
        ));
    };
    if !is_ident(id_tok.text) || id_tok.text.contains('=') {
        return Err(p.err(
            ParseErrorKind::Syntax,
            id_tok.column,
            format!("invalid entity id '{}'", id_tok.text),
        ));
    }
    let rest = &toks[2..];
    let n_nums = rest.iter().take_while(|t| !t.text.contains('=')).count();
    let want = if kind.is_point() { 2 } else { 4 };
    if n_nums != want {
        let col = rest
            .get(n_nums.min(want))
            .map_or(id_tok.column, |t| t.column);
        return Err(p.err(
            ParseErrorKind::WrongArity,
            col,
            format!("'{kind}' takes {want} numbers, found {n_nums}"),
        ));
    }
    let nums = rest[..n_nums]
        .iter()
        .map(|t| p.number(t))
        .collect::<Result<Vec<_>, _>>()?;
    let geometry = if kind.is_point() {
        Geometry::Point {
            x: nums[0],
            y: nums[1],
        }
    } else {
        for (i, t) in rest[2..4].iter().enumerate() {
            if nums[2 + i] <= 0.0 {
                return Err(p.err(
                    ParseErrorKind::InvalidValue,
                    t.column,
                    "box size must be positive",
                ));
            }
        }
        Geometry::Rect {
            x: nums[0],
            y: nums[1],
            w: nums[2],
            h: nums[3],
        }
    };

    let mut attrs = BTreeMap::new();
    for t in &rest[n_nums..] {
        let Some((key, value)) = t.text.split_once('=') else {
            return Err(p.err(
                ParseErrorKind::Syntax,
                t.column,
                format!("expected key=value, found '{}'", t.text),
            ));
        };
        if !kind.attr_keys().contains(&key) {
            return Err(p.err(
                ParseErrorKind::UnknownAttr,
                t.column,
                format!("unknown attribute '{key}' for '{kind}'"),
            ));
        }
        if attrs.contains_key(key) {
            return Err(p.err(
                ParseErrorKind::DuplicateKey,
                t.column,
                format!("duplicate attribute '{key}'"),
            ));
        }
        let ok = match key {
            "flee" | "flagged" => matches!(value, "true" | "false"),
            "type" => matches!(value, "real" | "fake"),
            "gap" => matches!(value, "near" | "far"),
            "step" => {
                !value.is_empty()
                    && value.bytes().all(|b| b.is_ascii_digit())
                    && value.parse::<u32>().is_ok()
            }
            _ => false,
        };
        if !ok {
            let col = t.column + key.chars().count() + 1;
            return Err(p.err(
                ParseErrorKind::InvalidValue,
                col,
                format!("invalid value '{value}' for '{key}'"),
            ));
        }
        attrs.insert(key.to_string(), value.to_string());
    }
    Ok(EntityDecl {
        kind,
        id: id_tok.text.to_string(),
        geometry,
        attrs,
    })
}

type KeyValues = BTreeMap<String, (String, usize, usize)>;

fn value_error(kind: ParseErrorKind, line: usize, column: usize, message: String) -> ParseError {
    ParseError {
        kind,
        line,
        column,
        message,
    }
}

fn build_meta(
    mut kv: KeyValues,
    header_line: usize,
    end_line: usize,
) -> Result<MetaBlock, ParseError> {
    for key in META_KEYS {
        if !kv.contains_key(key) {
            let line = if header_line > 0 {
                header_line
            } else {
                end_line
            };
            return Err(value_error(
                ParseErrorKind::MissingField,
                line,
                1,
                format!("missing meta key '{key}'"),
            ));
        }
    }
    let mut take = |k: &str| kv.remove(k).unwrap();
    let (d, line, col) = take("distortion");
    let distortion = d.parse::<Distortion>().map_err(|_| {
        value_error(
            ParseErrorKind::InvalidValue,
            line,
            col,
            format!("unknown distortion '{d}'"),
        )
    })?;
    let (level_id, line, col) = take("level_id");
    if !is_ident(&level_id) {
        return Err(value_error(
            ParseErrorKind::InvalidValue,
            line,
            col,
            format!("invalid level id '{level_id}'"),
        ));
    }
    Ok(MetaBlock {
        level_id,
        distortion,
        clinical_feature: take("clinical_feature").0,
        metaphor: take("metaphor").0,
        rhetoric: take("rhetoric").0,
    })
}

fn positive(kv: &KeyValues, key: &str, default: f64) -> Result<f64, ParseError> {
    number_at_least(kv, key, default, 0.0, false)
}

fn number_at_least(
    kv: &KeyValues,
    key: &str,
    default: f64,
    bound: f64,
    inclusive: bool,
) -> Result<f64, ParseError> {
    let Some((text, line, col)) = kv.get(key) else {
        return Ok(default);
    };
    let p = Parser { line: *line };
    let v = p.number(&Token { text, column: *col })?;
    if v < bound || (!inclusive && v == bound) {
        let rel = if inclusive { ">=" } else { ">" };
        return Err(p.err(
            ParseErrorKind::InvalidValue,
            *col,
            format!("'{key}' must be {rel} {bound}"),
        ));
    }
    Ok(v)
}

fn build_physics(kv: KeyValues) -> Result<PhysicsParams, ParseError> {
    let d = PhysicsParams::default();
    Ok(PhysicsParams {
        dt: d.dt,
        gravity: positive(&kv, "gravity", d.gravity)?,
        run_speed: positive(&kv, "run_speed", d.run_speed)?,
        ground_accel: positive(&kv, "ground_accel", d.ground_accel)?,
        base_jump_speed: positive(&kv, "base_jump_speed", d.base_jump_speed)?,
    })
}

fn build_mechanics(kv: KeyValues) -> Result<MechanicParams, ParseError> {
    let d = MechanicParams::default();
    let idle_threshold_ticks = match kv.get("idle_threshold_ticks") {
        None => d.idle_threshold_ticks,
        Some((text, line, col)) => text
            .parse::<u32>()
            .ok()
            .filter(|v| *v > 0 && text.bytes().all(|b| b.is_ascii_digit()))
            .ok_or_else(|| {
                let kind = if is_decimal(text) {
                    ParseErrorKind::InvalidValue
                } else {
                    ParseErrorKind::MalformedNumber
                };
                value_error(
                    kind,
                    *line,
                    *col,
                    format!("'idle_threshold_ticks' must be a positive integer, found '{text}'"),
                )
            })?,
    };
    Ok(MechanicParams {
        flee_delta0: number_at_least(&kv, "flee_delta0", d.flee_delta0, 0.0, true)?,
        flee_step: positive(&kv, "flee_step", d.flee_step)?,
        jump_base: positive(&kv, "jump_base", d.jump_base)?,
        jump_increment: number_at_least(&kv, "jump_increment", d.jump_increment, 0.0, true)?,
        jump_max: positive(&kv, "jump_max", d.jump_max)?,
        gap_width: positive(&kv, "gap_width", d.gap_width)?,
        v_min: positive(&kv, "v_min", d.v_min)?,
        idle_threshold_ticks,
    })
}
