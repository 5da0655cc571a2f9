//! Machine-readable reports and the text tables printed for humans.

use std::collections::BTreeMap;
use std::fmt::Write;

use relci_core::exactlin::Matrix;
use relci_core::homalg::{BigradedTable, Functor, OperatorAction, SeriesTruncation};
use relci_core::perturb::Check;
use relci_core::Field;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub scenario: String,
    pub field: String,
    pub window: WindowOut,
    pub passed: bool,
    pub checks: Vec<CheckOut>,
    pub tables: BTreeMap<String, TableOut>,
    pub series: BTreeMap<String, SeriesOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operators: Option<BTreeMap<String, OperatorsOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isomorphisms: Option<BTreeMap<String, Vec<MatrixOut>>>,
    pub flags: Vec<String>,
    pub notes: Vec<String>,
    /// wall-clock milliseconds; only filled in with `--timing`
    pub timing_ms: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WindowOut {
    pub max_hdeg: i32,
    pub max_ideg: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOut {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl From<&Check> for CheckOut {
    fn from(c: &Check) -> Self {
        Self { name: c.name.clone(), passed: c.passed, detail: c.detail.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableOut {
    pub functor: &'static str,
    pub max_hdeg: i32,
    pub ideg_range: [i32; 2],
    pub window_limited: bool,
    /// `[i, j, dim]` for every nonzero entry
    pub entries: Vec<[i64; 3]>,
    pub totals: Vec<usize>,
}

impl From<&BigradedTable> for TableOut {
    fn from(t: &BigradedTable) -> Self {
        Self {
            functor: match t.functor {
                Functor::Tor => "tor",
                Functor::Ext => "ext",
            },
            max_hdeg: t.max_hdeg,
            ideg_range: [t.ideg_range.0, t.ideg_range.1],
            window_limited: t.window_limited,
            entries: t.entries.iter().map(|(&(i, j), &d)| [i as i64, j as i64, d as i64]).collect(),
            totals: t.totals(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeriesOut {
    pub coefficients: Vec<i64>,
    pub window_limited: bool,
}

impl From<&SeriesTruncation> for SeriesOut {
    fn from(s: &SeriesTruncation) -> Self {
        Self { coefficients: s.coefficients.clone(), window_limited: s.window_limited }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatrixOut {
    /// 1-based operator or variable index; 0 for the comparison map
    pub index: usize,
    pub source: [i32; 2],
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OperatorsOut {
    pub chi: Vec<MatrixOut>,
    pub variables: Vec<MatrixOut>,
}

pub fn matrix_out<F: Field>(field: &F, index: usize, source: (i32, i32), m: &Matrix<F::Elem>) -> MatrixOut {
    let rows = (0..m.rows()).map(|r| (0..m.cols()).map(|c| field.render(&m[(r, c)])).collect()).collect();
    MatrixOut { index, source: [source.0, source.1], rows }
}

pub fn operators_out<F: Field>(field: &F, ops: &OperatorAction<F::Elem>) -> OperatorsOut {
    let conv = |map: &BTreeMap<(usize, i32, i32), Matrix<F::Elem>>| {
        map.iter().map(|(&(k, i, j), m)| matrix_out(field, k + 1, (i, j), m)).collect()
    };
    OperatorsOut { chi: conv(&ops.chi), variables: conv(&ops.variables) }
}

impl Report {
    pub fn new(command: &str, scenario: &str, field: String, window: WindowOut) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            scenario: scenario.into(),
            field,
            window,
            passed: true,
            checks: Vec::new(),
            tables: BTreeMap::new(),
            series: BTreeMap::new(),
            operators: None,
            isomorphisms: None,
            flags: Vec::new(),
            notes: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn push_check(&mut self, c: CheckOut) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn add_table(&mut self, name: &str, t: &BigradedTable) {
        if t.window_limited {
            self.flags.push(format!("{}: window-limited (N not known to vanish above the window)", name));
        }
        self.tables.insert(name.into(), t.into());
    }

    pub fn add_series(&mut self, name: &str, s: &SeriesTruncation) {
        if s.window_limited {
            self.flags.push(format!("{}: window-limited (generators may lie outside the internal window)", name));
        }
        self.series.insert(name.into(), s.into());
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Checks and tables as plain text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} on {} over {}", self.command, self.scenario, self.field);
        for (name, t) in &self.tables {
            let _ = writeln!(out, "\n{}", name);
            out.push_str(&render_table(t));
        }
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            if c.detail.is_empty() {
                let _ = writeln!(out, "[{}] {}", mark, c.name);
            } else {
                let _ = writeln!(out, "[{}] {} ({})", mark, c.name, c.detail);
            }
        }
        for f in &self.flags {
            let _ = writeln!(out, "flag: {}", f);
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {}", n);
        }
        out
    }
}

/// Rows `i`, columns internal degree, `.` for zero.
pub fn render_table(t: &TableOut) -> String {
    let mut out = String::new();
    let (lo, hi) = (t.ideg_range[0], t.ideg_range[1]);
    let get = |i: i32, j: i32| t.entries.iter().find(|e| e[0] == i as i64 && e[1] == j as i64).map(|e| e[2]);
    let width = t.entries.iter().map(|e| e[2].to_string().len()).max().unwrap_or(1).max(hi.to_string().len()).max(lo.to_string().len());
    let _ = write!(out, "{:>4} |", "i\\j");
    for j in lo..=hi {
        let _ = write!(out, " {:>w$}", j, w = width);
    }
    out.push('\n');
    for i in 0..=t.max_hdeg {
        let _ = write!(out, "{:>4} |", i);
        for j in lo..=hi {
            match get(i, j) {
                Some(d) => {
                    let _ = write!(out, " {:>w$}", d, w = width);
                }
                None => {
                    let _ = write!(out, " {:>w$}", ".", w = width);
                }
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("series {name:?} has {got} coefficients, expected {expected}")]
pub struct LengthMismatch {
    pub name: String,
    pub got: usize,
    pub expected: usize,
}

/// One row per named series, one column per power of `t`.
pub fn emit_series_table(rows: &[(String, Vec<i64>)]) -> Result<String, LengthMismatch> {
    let len = rows.first().map(|r| r.1.len()).unwrap_or(0);
    if let Some((name, c)) = rows.iter().find(|r| r.1.len() != len) {
        return Err(LengthMismatch { name: name.clone(), got: c.len(), expected: len });
    }
    let label = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(6);
    let width = rows.iter().flat_map(|r| r.1.iter()).map(|c| c.to_string().len()).max().unwrap_or(1).max(len.saturating_sub(1).to_string().len() + 2);
    let mut out = String::new();
    let _ = write!(out, "{:<label$} |", "series");
    for k in 0..len {
        let _ = write!(out, " {:>w$}", format!("t^{}", k), w = width);
    }
    out.push('\n');
    for (name, c) in rows {
        let _ = write!(out, "{:<label$} |", name);
        for v in c {
            let _ = write!(out, " {:>w$}", v, w = width);
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_series_give_identical_rows() {
        let t = emit_series_table(&[("P_f".into(), vec![1, 2, 2]), ("P_g".into(), vec![1, 2, 2])]).unwrap();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split('|').nth(1), lines[2].split('|').nth(1));
    }

    #[test]
    fn empty_input_is_header_only() {
        assert_eq!(emit_series_table(&[]).unwrap().lines().count(), 1);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let e = emit_series_table(&[("a".into(), vec![1]), ("b".into(), vec![1, 2])]).unwrap_err();
        assert_eq!(e, LengthMismatch { name: "b".into(), got: 2, expected: 1 });
    }

    #[test]
    fn table_rendering() {
        let t = TableOut {
            functor: "tor",
            max_hdeg: 1,
            ideg_range: [0, 1],
            window_limited: false,
            entries: vec![[0, 0, 1], [1, 1, 2]],
            totals: vec![1, 2],
        };
        assert_eq!(render_table(&t), " i\\j | 0 1\n   0 | 1 .\n   1 | . 2\n");
    }
}
