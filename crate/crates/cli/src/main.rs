use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use worldyou_core::analytics::{
    self, build_group_report, render_report, score_pss10, screen_participant, stats,
    sunburst_export, theme_proportions, CsvError, Group, Screening,
};
use worldyou_core::level::{parse_level, validate, LevelDef};
use worldyou_core::replay::{replay, InputTrace};

#[derive(Parser)]
#[command(
    name = "worldyou",
    version,
    about = "Validate levels, replay input traces and analyze study data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a level file.
    Validate { level: PathBuf },
    /// Replay an input trace on a level and print a one-line summary.
    Replay {
        level: PathBuf,
        trace: PathBuf,
        /// Write the telemetry log (JSON) here.
        #[arg(long)]
        telemetry: Option<PathBuf>,
    },
    /// Compare groups on the motivation inventory and export theme charts.
    Analyze {
        imi: PathBuf,
        #[arg(long)]
        pss: Option<PathBuf>,
        #[arg(long)]
        themes: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    /// Invalid content: exit 1.
    Invalid(String),
    /// Unreadable or unwritable file: exit 3.
    Io(String),
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn csv_failure(path: &Path, e: CsvError) -> Failure {
    match e {
        CsvError::Io(e) => Failure::Io(format!("{}: {e}", path.display())),
        other => Failure::Invalid(format!("{}: {other}", path.display())),
    }
}

fn load_level(path: &Path) -> Result<LevelDef, Failure> {
    let text = read(path)?;
    parse_level(&text).map_err(|e| Failure::Invalid(format!("{}:{e}", path.display())))
}

fn cmd_validate(level: &Path) -> Outcome {
    let def = load_level(level)?;
    let diags = validate(&def);
    if diags.is_empty() {
        println!("{}: ok", level.display());
        return Ok(());
    }
    for d in &diags {
        eprintln!("{}: {:?}: {d}", level.display(), d.code);
    }
    Err(Failure::Invalid(format!("{} diagnostic(s)", diags.len())))
}

fn cmd_replay(level: &Path, trace: &Path, telemetry: Option<&Path>) -> Outcome {
    let def = load_level(level)?;
    let trace_text = read(trace)?;
    let trace = InputTrace::parse(&trace_text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", trace.display())))?;
    let log = replay(&def, &trace).map_err(|e| Failure::Invalid(e.to_string()))?;
    if let Some(out) = telemetry {
        write(out, &(log.to_json() + "\n"))?;
    }
    println!(
        "completed={} ticks={} attempts={}",
        log.summary.completed, log.summary.ticks, log.summary.attempts
    );
    Ok(())
}

fn cmd_analyze(imi: &Path, pss: Option<&Path>, themes: Option<&Path>, out: &Path) -> Outcome {
    let responses =
        analytics::read_imi_csv(read(imi)?.as_bytes()).map_err(|e| csv_failure(imi, e))?;
    let report = build_group_report(&responses)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", imi.display())))?;
    fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    let table = render_report(&report);
    print!("{table}");
    write(&out.join("imi_report.txt"), &table)?;
    write(&out.join("imi_report.json"), &json(&report))?;

    if let Some(path) = pss {
        let rows =
            analytics::read_pss_csv(read(path)?.as_bytes()).map_err(|e| csv_failure(path, e))?;
        let mut text = String::new();
        let mut entries = Vec::new();
        let mut by_group: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for r in &rows {
            let score =
                score_pss10(r).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
            let screening = screen_participant(score);
            let group = responses
                .iter()
                .find(|x| x.participant_id == r.participant_id)
                .map(|x| x.group);
            if screening == Screening::Included {
                match group {
                    Some(Group::E) => by_group[0].push(score as f64),
                    Some(Group::C) => by_group[1].push(score as f64),
                    None => {}
                }
            }
            entries.push(serde_json::json!({
                "participantId": r.participant_id,
                "score": score,
                "screening": screening,
            }));
        }
        let included = entries
            .iter()
            .filter(|e| e["screening"] == "included")
            .count();
        text.push_str(&format!(
            "screened: {} included, {} excluded\n",
            included,
            rows.len() - included
        ));
        for (label, xs) in [("E", &by_group[0]), ("C", &by_group[1])] {
            if xs.len() >= 2 {
                text.push_str(&format!(
                    "PSS-10 {label}: n={} M={:.2} SD={:.2}\n",
                    xs.len(),
                    stats::mean(xs),
                    stats::sample_sd(xs)
                ));
            }
        }
        print!("{text}");
        write(&out.join("screening.txt"), &text)?;
        write(&out.join("screening.json"), &json(&entries))?;
    }

    if let Some(path) = themes {
        let codes =
            analytics::read_theme_csv(read(path)?.as_bytes()).map_err(|e| csv_failure(path, e))?;
        let props = theme_proportions(&codes);
        for d in &props.diagnostics {
            eprintln!("{}: {d}", path.display());
        }
        for doc in sunburst_export(&props.nodes) {
            write(
                &out.join(format!("sunburst_{}.json", doc.question)),
                &json(&doc),
            )?;
        }
        println!(
            "sunburst: {} theme nodes, {} empty cells",
            props.nodes.len(),
            props.diagnostics.len()
        );
    }
    Ok(())
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate { level } => cmd_validate(level),
        Command::Replay {
            level,
            trace,
            telemetry,
        } => cmd_replay(level, trace, telemetry.as_deref()),
        Command::Analyze {
            imi,
            pss,
            themes,
            out,
        } => cmd_analyze(imi, pss.as_deref(), themes.as_deref(), out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
