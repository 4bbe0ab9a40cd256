//! Report envelope, JSON/CSV emission and exit codes.

use crate::commands::{Failure, Outcome};
use crate::config::RunConfig;
use crate::{EXIT_ASSERT, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// Report body without the timestamp. `serde_json` maps keep keys sorted.
pub fn body(cfg: &RunConfig, command: &str, outcome: &Result<Outcome, Failure>, csv: &[PathBuf]) -> Value {
    let mut v = json!({
        "command": command,
        "config": cfg,
        "versions": {
            "hardy-amalgam": hardy_amalgam::VERSION,
            "hpq": env!("CARGO_PKG_VERSION"),
        },
        "csv": csv,
    });
    let obj = v.as_object_mut().expect("object literal");
    match outcome {
        Ok(o) => {
            obj.insert("result".into(), o.result.clone());
            obj.insert("grid_id".into(), json!(o.grid_id));
            obj.insert("time_grid_id".into(), json!(o.time_grid_id));
            obj.insert(
                "assertion".into(),
                json!({
                    "enabled": cfg.assert_mode,
                    "passed": o.assertion.passed,
                    "failures": o.assertion.failures,
                }),
            );
        }
        Err(Failure::Numerical { kind, message }) => {
            obj.insert("error".into(), json!({ "kind": kind, "message": message }));
        }
        Err(Failure::Usage(e)) => {
            obj.insert("error".into(), json!({ "kind": "usage", "field": e.field, "message": e.reason }));
        }
    }
    v
}

/// `report.json` -> `report.<name>.csv`.
pub fn csv_path(out: &Path, name: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{name}.csv"))
}

/// Writes the report (and CSV curves when `out` is set) and returns the exit code.
pub fn emit(cfg: &RunConfig, command: &str, outcome: Result<Outcome, Failure>) -> std::io::Result<i32> {
    if let Err(Failure::Usage(e)) = &outcome {
        eprintln!("hpq: {e}");
        return Ok(EXIT_USAGE);
    }
    let mut written = Vec::new();
    if let (Some(out), Ok(o)) = (&cfg.out, &outcome) {
        for c in &o.curves {
            let path = csv_path(out, &c.name);
            std::fs::write(&path, &c.csv)?;
            written.push(path);
        }
    }
    let mut report = body(cfg, command, &outcome, &written);
    report
        .as_object_mut()
        .expect("object")
        .insert("timestamp".into(), json!(chrono::Utc::now().to_rfc3339()));
    let text = serde_json::to_string_pretty(&report).map_err(std::io::Error::other)? + "\n";
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(match outcome {
        Err(Failure::Numerical { kind, message }) => {
            eprintln!("hpq: {kind} error: {message}");
            EXIT_NUMERICAL
        }
        Err(Failure::Usage(_)) => EXIT_USAGE,
        Ok(o) if cfg.assert_mode && !o.assertion.passed => {
            for f in &o.assertion.failures {
                eprintln!("hpq: assertion failed: {f}");
            }
            EXIT_ASSERT
        }
        Ok(_) => EXIT_OK,
    })
}
