//! Reports on stdout and on disk.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use resetting_core::stats::VerificationReport;

use crate::{Cli, Format};

/// Counts over a list of reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    pub fn of(reports: &[VerificationReport]) -> Self {
        let passed = reports.iter().filter(|r| r.passed).count();
        Self {
            total: reports.len(),
            passed,
            failed: reports.len() - passed,
        }
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place. Missing parent directories are created.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// JSON lines: one object per report with the resolved configuration, then a
/// summary object carrying the only time-dependent field.
pub fn json_lines(
    cli: &Cli,
    reports: &[VerificationReport],
    summary: &Summary,
) -> serde_json::Result<String> {
    let config = serde_json::to_value(cli)?;
    let mut out = String::new();
    for r in reports {
        let mut v = serde_json::to_value(r)?;
        if let Value::Object(m) = &mut v {
            m.insert("config".into(), config.clone());
        }
        out.push_str(&serde_json::to_string(&v)?);
        out.push('\n');
    }
    let tail = json!({
        "summary": summary,
        "all_passed": summary.failed == 0,
        "config": config,
        "timestamp": timestamp(),
    });
    out.push_str(&serde_json::to_string(&tail)?);
    out.push('\n');
    Ok(out)
}

fn table(reports: &[VerificationReport], summary: &Summary) -> String {
    let width = reports
        .iter()
        .map(|r| r.name.chars().count())
        .max()
        .unwrap_or(4)
        .max(4);
    let mut s = format!(
        "{:<6} {:<width$} {:>13} {:>13} {:>11} {:>9}\n",
        "", "name", "statistic", "target", "tolerance", "p-value"
    );
    for r in reports {
        let p = r
            .p_value
            .map_or_else(|| "-".to_string(), |p| format!("{p:.4}"));
        s.push_str(&format!(
            "{:<6} {:<width$} {:>13.6e} {:>13.6e} {:>11.3e} {:>9}\n",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.statistic,
            r.target,
            r.tolerance,
            p
        ));
    }
    s.push_str(&format!("{} of {} passed\n", summary.passed, summary.total));
    s
}

/// Prints the reports in the requested format and writes the report file.
pub(crate) fn emit(
    cli: &Cli,
    reports: &[VerificationReport],
    summary: &Summary,
) -> std::io::Result<()> {
    if let Some(path) = &cli.report {
        let text = json_lines(cli, reports, summary)?;
        write_atomic(path, text.as_bytes())?;
    }
    if reports.is_empty() {
        return Ok(());
    }
    let mut stdout = std::io::stdout().lock();
    match cli.format {
        Format::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(reports)?),
        Format::Table => write!(stdout, "{}", table(reports, summary)),
    }
}
