//! Deterministic CSV and JSON emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use tfe_core::ivp::{EventRecord, Trajectory};

use crate::CliError;

/// Shortest round-trip representation. Plain decimal for `1e-4 <= |x| < 1e16`,
/// exponent form otherwise, so no value prints more than 17 significant digits.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// CSV text with a fixed header; cells are written as given.
#[derive(Debug, Clone)]
pub struct Table {
    buf: String,
    width: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self {
            buf,
            width: header.len(),
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        debug_assert_eq!(cells.len(), self.width);
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(c.as_ref());
        }
        self.buf.push('\n');
    }

    pub fn text(&self) -> &str {
        &self.buf
    }
}

/// Trajectory rows (one per accepted step, or `resample` uniform points)
/// merged with event rows, which carry the event name in the last column. A
/// terminal event that coincides with a node flags that node instead of
/// adding a duplicate row. `map` turns `(t, state)` into the printed
/// `(abscissa, [v0, v1, v2])`; rows whose abscissa fails `keep` are dropped.
pub fn trajectory_table<const N: usize>(
    header: &[&str],
    traj: &Trajectory<N>,
    label: impl Fn(usize) -> &'static str,
    resample: usize,
    map: impl Fn(f64, &[f64; N]) -> (f64, [f64; 3]),
    keep: impl Fn(f64) -> bool,
) -> Table {
    let mut rows: Vec<(f64, [f64; N], &'static str)> = if resample >= 2 {
        traj.resample(resample).into_iter().map(|(t, s)| (t, s, "")).collect()
    } else {
        traj.nodes().map(|(t, s)| (t, *s, "")).collect()
    };
    let forward = traj.t_last() >= traj.t_start();
    for EventRecord { t, state, id } in &traj.events {
        if let Some(r) = rows.iter_mut().find(|r| r.0 == *t && r.1 == *state && r.2.is_empty()) {
            r.2 = label(*id);
            continue;
        }
        let pos = rows
            .iter()
            .position(|r| if forward { r.0 > *t } else { r.0 < *t })
            .unwrap_or(rows.len());
        rows.insert(pos, (*t, *state, label(*id)));
    }
    let mut table = Table::new(header);
    for (t, s, ev) in rows {
        let (y, v) = map(t, &s);
        if !keep(y) {
            continue;
        }
        table.row(&[num(y), num(v[0]), num(v[1]), num(v[2]), ev.to_string()]);
    }
    table
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e))
}

/// Sidecar path: the data path with its extension replaced by `json`.
pub fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("json")
}

pub fn write_json(path: &Path, v: &Map<String, Value>) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(v).expect("json map serializes");
    s.push('\n');
    write_file(path, &s)
}

/// `key=value` lines for stdout.
pub fn summary_text(summary: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in summary {
        let _ = writeln!(s, "{k}={v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [1.0, -0.1, 1.0 / 3.0, 2.6288, 1e-5, 1e-300, 6.02e23, 123456.789, f64::MAX, f64::MIN_POSITIVE] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let digits = s.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
            assert!(digits.trim_start_matches('0').len() <= 17, "{s}");
        }
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(1e-5), "1e-5");
        assert_eq!(num(0.0), "0");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.row(&["1", "2"]);
        assert_eq!(t.text(), "a,b\n1,2\n");
    }
}
