use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// Everything one command produces. `tables[0]` is the main CSV table; any
/// others go to sibling files named `<stem>.<name>.csv`.
pub struct Report {
    pub json: Value,
    pub tables: Vec<(String, String)>,
}

impl Report {
    pub fn new(json: Value, main: String) -> Self {
        Self {
            json,
            tables: vec![("main".into(), main)],
        }
    }

    pub fn with_table(mut self, name: &str, csv: String) -> Self {
        self.tables.push((name.into(), csv));
        self
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("{}: not a file path", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(path, e));
    }
    Ok(())
}

fn sibling(path: &Path, part: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{part}.csv"))
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// Writes the report in `format` to `out`, or stdout when `out` is `None`.
/// Returns the data files written.
pub fn emit(
    report: &Report,
    format: Format,
    out: Option<&Path>,
    command: &str,
    config: &RunConfig,
    config_path: Option<&Path>,
    elapsed: f64,
) -> Result<Vec<PathBuf>, CliError> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        let text = match format {
            Format::Json => serde_json::to_string_pretty(&report.json).expect("json") + "\n",
            Format::Csv if report.tables.len() == 1 => report.tables[0].1.clone(),
            Format::Csv => report
                .tables
                .iter()
                .map(|(name, csv)| format!("# {name}\n{csv}"))
                .collect::<Vec<_>>()
                .join("\n"),
        };
        stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        return Ok(Vec::new());
    };
    let mut written = Vec::new();
    match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(&report.json).expect("json") + "\n";
            write_atomic(path, text.as_bytes())?;
            written.push(path.to_path_buf());
        }
        Format::Csv => {
            for (i, (name, csv)) in report.tables.iter().enumerate() {
                let p = if i == 0 { path.to_path_buf() } else { sibling(path, name) };
                write_atomic(&p, csv.as_bytes())?;
                written.push(p);
            }
        }
    }
    let unix_time = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = serde_json::json!({
        "tool": "warped",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config_path": config_path,
        "config": config,
        "format": format,
        "files": written,
        "unix_time": unix_time,
        "elapsed_seconds": elapsed,
    });
    let text = serde_json::to_string_pretty(&meta).expect("json") + "\n";
    write_atomic(&sidecar_path(path), text.as_bytes())?;
    Ok(written)
}
