use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Method, Trajectory};
use crate::error::{Error, Result};

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    let mut f = fs::File::create(tmp).map_err(|e| io_err(tmp, e))?;
    f.write_all(bytes).map_err(|e| io_err(tmp, e))?;
    f.sync_all().map_err(|e| io_err(tmp, e))?;
    drop(f);
    fs::rename(tmp, path).map_err(|e| io_err(path, e))
}

fn num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.11e}"),
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

fn header_block(tr: &Trajectory) -> String {
    tr.metadata
        .iter()
        .map(|(k, v)| format!("# {k}={v}\n"))
        .collect()
}

fn render(tr: &Trajectory, only: Option<Method>) -> Result<String> {
    if tr.times.is_empty() || tr.series.is_empty() {
        return Err(Error::InvalidScenario("nothing to write: empty trajectory".into()));
    }
    let chosen: Vec<usize> = tr
        .series
        .iter()
        .enumerate()
        .filter(|(_, s)| only.is_none_or(|m| m == s.method))
        .map(|(i, _)| i)
        .collect();
    if chosen.is_empty() {
        return Err(Error::InvalidScenario(format!(
            "method {} was not run",
            only.map_or("", |m| m.as_str())
        )));
    }
    let mut out = header_block(tr);
    let mut cols = vec!["t".to_string()];
    for &i in &chosen {
        let tag = tr.series[i].method.column_tag();
        cols.push(format!("delta_{tag}"));
        cols.push(format!("S_{tag}"));
        if tr.series[i].method == Method::Exact {
            cols.push("S_env".into());
            cols.push("S_corr".into());
        }
    }
    cols.push("gamma".into());
    cols.push("flags".into());
    out.push_str(&cols.join(","));
    out.push('\n');
    for i in 0..tr.times.len() {
        let mut row = vec![num(Some(tr.times[i]))];
        let mut flags = Vec::new();
        for &k in &chosen {
            let s = &tr.series[k];
            row.push(num(s.delta(i)));
            row.push(num(s.entropy(i)));
            if s.method == Method::Exact {
                row.push(num(tr.s_env[i]));
                row.push(num(tr.s_corr[i]));
            }
            if s.unphysical(i) {
                flags.push(format!("unphysical:{}", s.method.as_str()));
            }
            if s.breakdown.is_some_and(|tb| tr.times[i] >= tb) {
                flags.push(format!("breakdown:{}", s.method.as_str()));
            }
        }
        row.push(num(tr.gamma[i]));
        row.push(flags.join(";"));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Combined CSV of every method: `# key=value` metadata lines, a header
/// row, then one row per sample with 12 significant digits.
pub fn emit_csv(tr: &Trajectory, path: &Path) -> Result<()> {
    write_atomic(path, render(tr, None)?.as_bytes())
}

/// CSV restricted to one method's columns.
pub fn emit_method_csv(tr: &Trajectory, method: Method, path: &Path) -> Result<()> {
    write_atomic(path, render(tr, Some(method))?.as_bytes())
}
