//! Study data analysis: screening, motivation scoring, group comparison and
//! qualitative theme shares, plus the CSV readers for each input file.

pub mod imi;
pub mod pss;
pub mod stats;
pub mod themes;

use std::io::Read;

use thiserror::Error;

pub use imi::{
    build_group_report, render_report, score_imi, Dimension, DimensionReport, Group, ImiResponse,
};
pub use pss::{score_pss10, screen_participant, PssResponse, Screening};
pub use stats::{cohens_d, pooled_sd, t_test_pooled_two_tailed, GroupSummary, TTest};
pub use themes::{
    sunburst_export, theme_proportions, Level, Question, SunburstDoc, SunburstNode, ThemeCode,
};

/// A CSV problem tied to its 1-based line in the file (the header is line 1).
#[derive(Debug, Error)]
pub enum CsvError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("header must be `{expected}`")]
    Header { expected: String },
    #[error("no data rows")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CsvError {
    fn row(record: &csv::StringRecord, message: impl Into<String>) -> Self {
        CsvError::Row {
            line: record.position().map_or(0, |p| p.line()),
            message: message.into(),
        }
    }
}

pub fn imi_header() -> Vec<String> {
    let mut h = vec!["participant_id".to_string(), "group".to_string()];
    h.extend(imi::all_item_keys());
    h
}

pub fn pss_header() -> Vec<String> {
    let mut h = vec!["participant_id".to_string()];
    h.extend((1..=10).map(|i| format!("P{i}")));
    h
}

pub const THEME_HEADER: [&str; 4] = ["participant_id", "level", "question", "theme"];

fn records<R: Read>(input: R, expected: &[String]) -> Result<Vec<csv::StringRecord>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let header = rdr.headers().map_err(csv_io)?.clone();
    if header.iter().collect::<Vec<_>>() != expected.iter().map(String::as_str).collect::<Vec<_>>()
    {
        return Err(CsvError::Header {
            expected: expected.join(","),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_io)?;
        if rec.len() != expected.len() {
            return Err(CsvError::row(
                &rec,
                format!("expected {} fields, found {}", expected.len(), rec.len()),
            ));
        }
        out.push(rec);
    }
    if out.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(out)
}

fn csv_io(e: csv::Error) -> CsvError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CsvError::Io(io),
        other => CsvError::Row {
            line,
            message: format!("{other:?}"),
        },
    }
}

fn int_field(rec: &csv::StringRecord, i: usize, name: &str) -> Result<i64, CsvError> {
    rec[i]
        .trim()
        .parse()
        .map_err(|_| CsvError::row(rec, format!("{name} is not an integer: {:?}", &rec[i])))
}

pub fn read_imi_csv<R: Read>(input: R) -> Result<Vec<ImiResponse>, CsvError> {
    let header = imi_header();
    let mut out = Vec::new();
    for rec in records(input, &header)? {
        let group = match rec[1].trim() {
            "E" => Group::E,
            "C" => Group::C,
            g => {
                return Err(CsvError::row(
                    &rec,
                    format!("group must be E or C, found {g:?}"),
                ))
            }
        };
        let mut items = std::collections::BTreeMap::new();
        for (i, key) in header.iter().enumerate().skip(2) {
            let v = int_field(&rec, i, key)?;
            if !(1..=7).contains(&v) {
                return Err(CsvError::row(&rec, format!("{key} = {v} is outside 1..7")));
            }
            items.insert(key.clone(), v);
        }
        out.push(ImiResponse {
            participant_id: rec[0].to_string(),
            group,
            items,
        });
    }
    Ok(out)
}

pub fn read_pss_csv<R: Read>(input: R) -> Result<Vec<PssResponse>, CsvError> {
    let header = pss_header();
    let mut out = Vec::new();
    for rec in records(input, &header)? {
        let mut items = [0i64; 10];
        for (i, item) in items.iter_mut().enumerate() {
            let v = int_field(&rec, i + 1, &header[i + 1])?;
            if !(0..=4).contains(&v) {
                return Err(CsvError::row(
                    &rec,
                    format!("P{} = {v} is outside 0..4", i + 1),
                ));
            }
            *item = v;
        }
        out.push(PssResponse {
            participant_id: rec[0].to_string(),
            items,
        });
    }
    Ok(out)
}

pub fn read_theme_csv<R: Read>(input: R) -> Result<Vec<ThemeCode>, CsvError> {
    let header: Vec<String> = THEME_HEADER.iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    for rec in records(input, &header)? {
        let level = rec[1]
            .trim()
            .parse()
            .map_err(|_| CsvError::row(&rec, format!("unknown level {:?}", &rec[1])))?;
        let question = rec[2]
            .trim()
            .parse()
            .map_err(|_| CsvError::row(&rec, format!("unknown question {:?}", &rec[2])))?;
        let theme = rec[3].trim();
        if theme.is_empty() {
            return Err(CsvError::row(&rec, "empty theme"));
        }
        out.push(ThemeCode {
            participant_id: rec[0].to_string(),
            level,
            question,
            theme: theme.to_string(),
        });
    }
    Ok(out)
}
