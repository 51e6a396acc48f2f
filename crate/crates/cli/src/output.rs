//! Tabular output in CSV, JSON-lines and human-readable form, and the
//! matching parsers.
//!
//! Every rendering starts with a metadata line carrying the output format
//! version and the command that produced it. All cells are strings: exact
//! values print as decimal integers or `num/den`, enclosures as a center and
//! a radius column.

use std::io::Write;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use indexmap::IndexMap;
use rug::float::Round;
use rug::Float;
use serde_json::Value;

use etacert::ball::Ball;

pub const OUTPUT_VERSION: u32 = 1;
const META_PREFIX: &str = "# etacert-output";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    JsonLines,
    Human,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// The cell of `column` in `row`.
    pub fn get(&self, row: usize, column: &str) -> Option<&str> {
        let i = self.columns.iter().position(|c| c == column)?;
        self.rows.get(row).map(|r| r[i].as_str())
    }
}

/// Output produced by one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rendered {
    pub command: String,
    pub table: Table,
}

pub fn render(out: &mut dyn Write, format: Format, command: &str, table: &Table) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{META_PREFIX} {OUTPUT_VERSION} {command}")?;
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(&table.columns)?;
            for r in &table.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Format::JsonLines => {
            let meta = serde_json::json!({ "etacert_output": OUTPUT_VERSION, "command": command });
            writeln!(out, "{meta}")?;
            for r in &table.rows {
                let obj: IndexMap<&str, &str> = table.columns.iter().map(String::as_str).zip(r.iter().map(String::as_str)).collect();
                writeln!(out, "{}", serde_json::to_string(&obj)?)?;
            }
        }
        Format::Human => {
            writeln!(out, "{META_PREFIX} {OUTPUT_VERSION} {command}")?;
            let widths: Vec<usize> = (0..table.columns.len())
                .map(|i| {
                    table
                        .rows
                        .iter()
                        .map(|r| r[i].chars().count())
                        .chain([table.columns[i].chars().count()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: &[String]| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join(" | ")
                    .trim_end()
                    .to_string()
            };
            writeln!(out, "{}", line(&table.columns))?;
            writeln!(
                out,
                "{}",
                widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-")
            )?;
            for r in &table.rows {
                writeln!(out, "{}", line(r))?;
            }
        }
    }
    Ok(())
}

/// Parses any rendering back into the command string and table.
pub fn parse(text: &str, format: Format) -> Result<Rendered> {
    let (first, rest) = text.split_once('\n').context("empty output")?;
    match format {
        Format::Csv | Format::Human => {
            let command = first
                .strip_prefix(META_PREFIX)
                .and_then(|s| s.trim_start().strip_prefix(&OUTPUT_VERSION.to_string()))
                .context("missing or unsupported metadata line")?
                .trim_start()
                .to_string();
            let table = if format == Format::Csv {
                let mut r = csv::Reader::from_reader(rest.as_bytes());
                let columns = r.headers()?.iter().map(String::from).collect();
                let rows = r
                    .records()
                    .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
                    .collect::<Result<_, _>>()?;
                Table { columns, rows }
            } else {
                let mut lines = rest.lines();
                let split = |l: &str| l.split(" | ").map(|c| c.trim().to_string()).collect::<Vec<_>>();
                let columns = split(lines.next().context("missing header")?);
                lines.next().context("missing rule line")?;
                let rows = lines.map(split).collect();
                Table { columns, rows }
            };
            Ok(Rendered { command, table })
        }
        Format::JsonLines => {
            let meta: Value = serde_json::from_str(first)?;
            if meta["etacert_output"] != OUTPUT_VERSION {
                bail!("unsupported output version {}", meta["etacert_output"]);
            }
            let command = meta["command"].as_str().context("missing command")?.to_string();
            let mut table: Option<Table> = None;
            for l in rest.lines().filter(|l| !l.trim().is_empty()) {
                let obj: IndexMap<String, String> = serde_json::from_str(l)?;
                let t = table.get_or_insert_with(|| Table {
                    columns: obj.keys().cloned().collect(),
                    rows: Vec::new(),
                });
                let row = t
                    .columns
                    .iter()
                    .map(|c| obj.get(c).cloned().context("missing cell"))
                    .collect::<Result<_>>()?;
                t.rows.push(row);
            }
            Ok(Rendered {
                command,
                table: table.unwrap_or(Table {
                    columns: Vec::new(),
                    rows: Vec::new(),
                }),
            })
        }
    }
}

/// `(center, radius)` strings that still enclose the ball: the center is
/// printed with as many digits as the radius justifies and the printing
/// error is added to the radius, which is rounded up.
pub fn ball_cells(b: &Ball) -> (String, String) {
    let c = b.center();
    let r = b.radius();
    if !b.is_finite() {
        return ("nan".into(), "inf".into());
    }
    if c.is_zero() && r.is_zero() {
        return ("0".into(), "0".into());
    }
    let p = c.prec().max(64);
    let digits = if r.is_zero() || c.is_zero() {
        40
    } else {
        let ratio = Float::with_val(p, c.abs_ref()) / r;
        (ratio.log10().to_f64().ceil() as i64 + 3).clamp(6, 60) as usize
    };
    let center = c.to_string_radix(10, Some(digits));
    let printed = Float::with_val(p, Float::parse(&center).expect("own output parses"));
    let err = if printed >= *c {
        Float::with_val_round(p, &printed - c, Round::Up).0
    } else {
        Float::with_val_round(p, c - &printed, Round::Up).0
    };
    // the decimal string itself is within one ulp of `printed`
    let ulp = Float::with_val(p, 1) << (printed.get_exp().unwrap_or(0) - p as i32);
    let radius = Float::with_val_round(p, r + &err, Round::Up).0;
    let radius = Float::with_val_round(p, &radius + &ulp, Round::Up).0;
    let radius = if radius.is_zero() {
        "0".to_string()
    } else {
        radius.to_string_radix_round(10, Some(4), Round::Up)
    };
    (center, radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["n", "value", "note"]);
        t.push(vec!["0".into(), "1".into(), "plain".into()]);
        t.push(vec!["2".into(), "55/8".into(), "has, comma and \"quote\"".into()]);
        t
    }

    #[test]
    fn round_trips() {
        for f in [Format::Csv, Format::JsonLines, Format::Human] {
            let mut buf = Vec::new();
            render(&mut buf, f, "exact --alpha 5/2", &sample()).unwrap();
            let back = parse(std::str::from_utf8(&buf).unwrap(), f).unwrap();
            assert_eq!(back.table, sample(), "{f:?}");
            assert_eq!(back.command, "exact --alpha 5/2");
        }
    }

    #[test]
    fn ball_cells_enclose() {
        let b = &Ball::from_i64(1, 128) / &Ball::from_i64(3, 128);
        let (c, r) = ball_cells(&b);
        let c = Float::with_val(128, Float::parse(&c).unwrap());
        let r = Float::with_val(128, Float::parse(&r).unwrap());
        let third = rug::Rational::from((1, 3));
        assert!(Float::with_val(128, &c - &r) <= third && Float::with_val(128, &c + &r) >= third);
    }
}
