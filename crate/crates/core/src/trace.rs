//! Delimited text files for closed-loop traces and aggregate statistics.
//!
//! A trace file has a header row, one row per control step and a closing
//! `#` metadata line. Reals are written with 17 significant digits so that
//! reading a file back reproduces the values bit for bit.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::{AbortRecord, ClosedLoopTrace, StatsRow, StepRecord, Termination};

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `contents` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn format_trace(trace: &ClosedLoopTrace<f64>) -> String {
    let nx = trace.final_state.len();
    let (nu, na) = trace.records.first().map_or((0, 0), |r| (r.input.len(), r.alpha.len()));
    let mut header = vec!["step".to_string()];
    header.extend((0..nx).map(|i| format!("x{i}")));
    header.extend((0..nu).map(|i| format!("u{i}")));
    header.extend((0..na).map(|i| format!("alpha{i}")));
    header.extend(["cost_mean", "cost_std", "step_seconds"].map(String::from));
    let mut out = header.join(",");
    out.push('\n');
    for (k, r) in trace.records.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(r.state.iter().chain(&r.input).chain(&r.alpha).map(|&v| real(v)));
        row.extend([r.cost_mean, r.cost_std, r.step_seconds].map(real));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    let final_state: Vec<String> = trace.final_state.iter().map(|&v| real(v)).collect();
    let abort = match trace.abort {
        Some(a) => format!("{}:{}:{}", a.step, a.mode, a.mission),
        None => "none".to_string(),
    };
    let hash = if trace.config_hash.is_empty() { "-" } else { &trace.config_hash };
    out.push_str(&format!(
        "# termination={} final_state={} abort={abort} config_hash={hash}\n",
        trace.termination,
        final_state.join(";")
    ));
    out
}

pub fn write_trace(trace: &ClosedLoopTrace<f64>, path: &Path) -> Result<()> {
    write_atomic(path, &format_trace(trace))
}

pub fn read_trace(path: &Path) -> Result<ClosedLoopTrace<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text).map_err(|message| Error::Parse { path: path.to_path_buf(), message })
}

fn parse_real(s: &str, line: usize) -> std::result::Result<f64, String> {
    s.trim().parse().map_err(|_| format!("line {line}: bad number {s:?}"))
}

pub fn parse_trace(text: &str) -> std::result::Result<ClosedLoopTrace<f64>, String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty trace file")?.split(',').collect();
    let count = |prefix: &str| {
        header.iter().filter(|h| h.strip_prefix(prefix).is_some_and(|d| d.parse::<usize>().is_ok())).count()
    };
    let (nx, nu, na) = (count("x"), count("u"), count("alpha"));
    if header.len() != 4 + nx + nu + na {
        return Err("unexpected trace header".into());
    }
    let mut records = Vec::new();
    let mut meta = None;
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if let Some(m) = line.strip_prefix("# ") {
            meta = Some(m);
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != header.len() {
            return Err(format!("line {lineno}: expected {} columns, got {}", header.len(), cols.len()));
        }
        let vals = cols[1..].iter().map(|c| parse_real(c, lineno)).collect::<std::result::Result<Vec<_>, _>>()?;
        records.push(StepRecord {
            state: vals[..nx].to_vec(),
            input: vals[nx..nx + nu].to_vec(),
            alpha: vals[nx + nu..nx + nu + na].to_vec(),
            cost_mean: vals[nx + nu + na],
            cost_std: vals[nx + nu + na + 1],
            step_seconds: vals[nx + nu + na + 2],
        });
    }
    let meta = meta.ok_or("missing metadata line")?;
    let mut termination = None;
    let mut final_state = None;
    let mut abort = None;
    let mut config_hash = String::new();
    for field in meta.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| format!("bad metadata field {field:?}"))?;
        match key {
            "termination" => termination = Some(value.parse::<Termination>().map_err(|e| e.to_string())?),
            "final_state" => {
                final_state = Some(
                    value.split(';').filter(|s| !s.is_empty()).map(|s| parse_real(s, 0)).collect::<std::result::Result<Vec<_>, _>>()?,
                )
            }
            "abort" if value == "none" => {}
            "abort" => {
                let parts: Vec<&str> = value.split(':').collect();
                let parse = |s: &str| s.parse::<usize>().map_err(|_| format!("bad abort field {value:?}"));
                if parts.len() != 3 {
                    return Err(format!("bad abort field {value:?}"));
                }
                abort = Some(AbortRecord { step: parse(parts[0])?, mode: parse(parts[1])? as u32, mission: parse(parts[2])? });
            }
            "config_hash" => config_hash = if value == "-" { String::new() } else { value.to_string() },
            other => return Err(format!("unknown metadata field {other:?}")),
        }
    }
    Ok(ClosedLoopTrace {
        records,
        final_state: final_state.ok_or("metadata lacks final_state")?,
        termination: termination.ok_or("metadata lacks termination")?,
        abort,
        config_hash,
    })
}

pub fn format_stats(rows: &[StatsRow]) -> String {
    let alts = rows.iter().map(|r| r.min_distance.len()).max().unwrap_or(0);
    let mut header: Vec<String> =
        ["group", "runs", "completed", "steps", "cost_mean", "cost_std", "step_seconds", "frequency_hz", "path_length"]
            .map(String::from)
            .to_vec();
    header.extend((1..=alts).map(|i| format!("min_distance{i}")));
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let mut row = vec![quote(&r.group), r.runs.to_string(), r.completed.to_string()];
        row.extend([r.steps, r.cost_mean, r.cost_std, r.step_seconds, r.frequency_hz, r.path_length].map(real));
        row.extend((0..alts).map(|i| r.min_distance.get(i).map_or(String::new(), |&v| real(v))));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn split_quoted(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            '"' => quoted = !quoted,
            ',' if !quoted => out.push(std::mem::take(&mut cur)),
            c => cur.push(c),
        }
    }
    out.push(cur);
    out
}

pub fn read_stats(path: &Path) -> Result<Vec<StatsRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |message: String| Error::Parse { path: path.to_path_buf(), message };
    let mut lines = text.lines();
    let header = split_quoted(lines.next().ok_or_else(|| bad("empty stats file".into()))?);
    let alts = header.len().saturating_sub(9);
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cols = split_quoted(line);
        if cols.len() != header.len() {
            return Err(bad(format!("line {}: expected {} columns", i + 2, header.len())));
        }
        let num = |j: usize| parse_real(&cols[j], i + 2).map_err(&bad);
        let int = |j: usize| cols[j].parse::<usize>().map_err(|_| bad(format!("line {}: bad count", i + 2)));
        rows.push(StatsRow {
            group: cols[0].clone(),
            runs: int(1)?,
            completed: int(2)?,
            steps: num(3)?,
            cost_mean: num(4)?,
            cost_std: num(5)?,
            step_seconds: num(6)?,
            frequency_hz: num(7)?,
            path_length: num(8)?,
            min_distance: (0..alts).map(|a| num(9 + a)).collect::<Result<_>>()?,
        });
    }
    Ok(rows)
}
