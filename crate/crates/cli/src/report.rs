//! Tabular reports and their two serializations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Hartree to MHz (`E_h / h`).
pub const HARTREE_TO_MHZ: f64 = 6.579683920502e9;
/// Hartree to cm^-1 (`E_h / hc`).
pub const HARTREE_TO_WAVENUMBER: f64 = 219474.6313632;

/// Name of the column the unit conversions are derived from.
pub const ENERGY_COLUMN: &str = "hartree";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Number(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Number(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Number(n as f64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub summary: BTreeMap<String, Cell>,
}

impl Report {
    pub fn new(kind: &str, columns: &[&str]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: kind.to_owned(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Cell>) {
        self.summary.insert(key.to_owned(), value.into());
    }

    /// Appends MHz and cm^-1 columns derived from the `hartree` column.
    pub fn with_conversions(mut self) -> Self {
        let Some(col) = self.columns.iter().position(|c| c == ENERGY_COLUMN) else {
            return self;
        };
        self.columns.push("MHz".into());
        self.columns.push("cm-1".into());
        for row in &mut self.rows {
            let (mhz, wn) = match row[col] {
                Cell::Number(e) => (
                    Cell::Number(e * HARTREE_TO_MHZ),
                    Cell::Number(e * HARTREE_TO_WAVENUMBER),
                ),
                _ => (Cell::Empty, Cell::Empty),
            };
            row.push(mhz);
            row.push(wn);
        }
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    #[cfg(test)]
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Aligned plain-text table: numbers right-aligned, text left-aligned,
    /// followed by the summary as `key: value` lines.
    pub fn to_table(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(render).collect())
            .collect();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }

        let mut out = String::new();
        let header: Vec<String> = self
            .columns
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        out.push_str(header.join("  ").trim_end());
        out.push('\n');
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&rule.join("  "));
        out.push('\n');
        for (row, raw) in cells.iter().zip(&self.rows) {
            let line: Vec<String> = row
                .iter()
                .zip(raw)
                .zip(&widths)
                .map(|((c, r), &w)| match r {
                    Cell::Number(_) => format!("{c:>w$}"),
                    _ => format!("{c:<w$}"),
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        if !self.summary.is_empty() {
            out.push('\n');
            for (k, v) in &self.summary {
                out.push_str(&format!("{k}: {}\n", render(v)));
            }
        }
        out
    }
}

fn render(c: &Cell) -> String {
    match c {
        Cell::Number(x) => sig12(*x),
        Cell::Text(s) => s.clone(),
        Cell::Empty => "-".into(),
    }
}

/// Twelve significant digits; fixed notation for moderate exponents.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    if x.fract() == 0.0 && x.abs() < 1e12 {
        return format!("{x:.0}");
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..12).contains(&exp) {
        format!("{x:.*}", (11 - exp) as usize)
    } else {
        sci
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_report_is_header_only() {
        let r = Report::new("empty", &["quantity", "hartree"]);
        assert_eq!(r.to_table(), "quantity  hartree\n--------  -------\n");
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(-0.0201474160453917), "-0.0201474160454");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(123.456), "123.456000000");
        assert_eq!(sig12(9.99999999999e-3), "0.00999999999999");
        assert_eq!(sig12(9.9999999999999e-3), "0.0100000000000");
        assert_eq!(sig12(1.5e-9), "1.50000000000e-9");
        assert_eq!(sig12(42.0), "42");
        assert_eq!(sig12(0.0), "0");
    }

    #[test]
    fn columns_align() {
        let mut r = Report::new("t", &["name", "hartree"]);
        r.push(vec!["a".into(), (-1.25).into()]);
        r.push(vec!["longer".into(), 1e-20.into()]);
        let t = r.to_table();
        let lines: Vec<_> = t.lines().collect();
        assert_eq!(lines[2].len(), lines[3].len());
        assert!(lines[2].ends_with("-1.25000000000"));
    }

    #[test]
    fn conversions_follow_the_energy_column() {
        let mut r = Report::new("t", &["quantity", "hartree"]);
        r.push(vec!["e".into(), 1.0.into()]);
        r.push(vec!["n".into(), Cell::Empty]);
        let r = r.with_conversions();
        assert_eq!(r.columns, ["quantity", "hartree", "MHz", "cm-1"]);
        assert_eq!(r.rows[0][2], Cell::Number(HARTREE_TO_MHZ));
        assert_eq!(r.rows[0][3], Cell::Number(HARTREE_TO_WAVENUMBER));
        assert_eq!(r.rows[1][2], Cell::Empty);
    }

    fn cell() -> impl Strategy<Value = Cell> {
        prop_oneof![
            any::<f64>()
                .prop_filter("finite", |x| x.is_finite())
                .prop_map(Cell::Number),
            "[a-z_ ]{0,12}".prop_map(Cell::Text),
            Just(Cell::Empty),
        ]
    }

    proptest! {
        #[test]
        fn json_round_trip_is_exact(
            rows in proptest::collection::vec(proptest::collection::vec(cell(), 3), 0..6),
            note in cell(),
        ) {
            let mut r = Report::new("prop", &["a", "b", "c"]);
            for row in rows {
                r.push(row);
            }
            r.note("x", note);
            let text = r.to_json();
            let back = Report::from_json(&text).unwrap();
            prop_assert_eq!(&back, &r);
            prop_assert_eq!(back.to_json(), text);
        }
    }
}
