//! Markdown and CSV tables.

use std::fmt;
use std::str::FromStr;

use crate::decimal::{format_fixed, group};
use crate::decision::ComparisonRow;
use crate::money::Money;
use crate::sensitivity::{SweepParameter, SweepResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TableFormat {
    #[default]
    Markdown,
    Csv,
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "markdown" | "md" => Ok(TableFormat::Markdown),
            "csv" => Ok(TableFormat::Csv),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Align {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaggedRow {
    pub expected: usize,
    pub got: usize,
}

impl fmt::Display for RaggedRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "row has {} cells, table has {} columns",
            self.got, self.expected
        )
    }
}

impl std::error::Error for RaggedRow {}

/// A rectangular table of pre-rendered cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportTable {
    columns: Vec<String>,
    align: Vec<Align>,
    rows: Vec<Vec<String>>,
}

impl ReportTable {
    pub fn new<I, S>(columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let columns: Vec<String> = columns.into_iter().map(Into::into).collect();
        let align = vec![Align::Left; columns.len()];
        ReportTable {
            columns,
            align,
            rows: Vec::new(),
        }
    }

    pub fn with_alignment(mut self, align: Vec<Align>) -> Self {
        assert_eq!(align.len(), self.columns.len(), "one alignment per column");
        self.align = align;
        self
    }

    pub fn push_row(&mut self, row: Vec<String>) -> Result<(), RaggedRow> {
        if row.len() != self.columns.len() {
            return Err(RaggedRow {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self, format: TableFormat) -> String {
        match format {
            TableFormat::Markdown => self.to_markdown(),
            TableFormat::Csv => self.to_csv(),
        }
    }

    /// GitHub pipe table, cells padded to column width.
    pub fn to_markdown(&self) -> String {
        let escape = |cell: &str| cell.replace('|', "\\|");
        let header: Vec<String> = self.columns.iter().map(|c| escape(c)).collect();
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|c| escape(c)).collect())
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|i| {
                body.iter()
                    .map(|r| r[i].chars().count())
                    .chain([header[i].chars().count(), 3])
                    .max()
                    .unwrap_or(3)
            })
            .collect();

        let line = |cells: &[String]| {
            let mut out = String::from("|");
            for ((cell, &w), align) in cells.iter().zip(&widths).zip(&self.align) {
                let pad = w - cell.chars().count();
                let padded = match align {
                    Align::Left => format!("{cell}{}", " ".repeat(pad)),
                    Align::Right => format!("{}{cell}", " ".repeat(pad)),
                };
                out.push(' ');
                out.push_str(&padded);
                out.push_str(" |");
            }
            out.push('\n');
            out
        };

        let mut out = line(&header);
        out.push('|');
        for (&w, align) in widths.iter().zip(&self.align) {
            match align {
                Align::Left => out.push_str(&format!(" {} |", "-".repeat(w))),
                Align::Right => out.push_str(&format!(" {}: |", "-".repeat(w - 1))),
            }
        }
        out.push('\n');
        for row in &body {
            out.push_str(&line(row));
        }
        out
    }

    /// RFC 4180: CRLF line endings, fields quoted only when needed.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        writer.write_record(&self.columns).expect("write to memory");
        for row in &self.rows {
            writer.write_record(row).expect("write to memory");
        }
        let bytes = writer.into_inner().expect("flush to memory");
        String::from_utf8(bytes).expect("cells are UTF-8")
    }
}

pub const COMPARISON_COLUMNS: [&str; 6] = [
    "Scenario",
    "CAPEX (USD)",
    "OPEX per Inference (USD)",
    "Annual Inference Volume",
    "Total OPEX (USD)",
    "LCOAI ($/1,000 Inferences)",
];

/// Side-by-side scenario comparison, one row per scenario in the given order.
pub fn comparison_table(rows: &[ComparisonRow]) -> ReportTable {
    let mut table = ReportTable::new(COMPARISON_COLUMNS).with_alignment(vec![
        Align::Left,
        Align::Right,
        Align::Right,
        Align::Right,
        Align::Right,
        Align::Right,
    ]);
    for row in rows {
        table
            .push_row(vec![
                row.scenario_name.clone(),
                row.capex_total.format_usd(2),
                row.opex_rate.format_usd(),
                group(row.volume),
                row.opex_total.format_usd(2),
                row.per_thousand.format_usd(2),
            ])
            .expect("six cells");
    }
    table
}

/// Plain two-decimal dollars for machine-readable output, e.g. `204.80`.
pub fn plain_usd(money: Money) -> String {
    format_fixed(money.micros() as i128, 6, 2, false)
}

/// Two-column plot series. Undefined points have an empty LCOAI cell.
pub fn sweep_table(result: &SweepResult) -> ReportTable {
    let first = match result.parameter {
        SweepParameter::Volume => "volume",
        SweepParameter::OpexRate => "opex_per_inference_usd",
        SweepParameter::CapexMultiplier => "capex_multiplier",
    };
    let mut table = ReportTable::new([first, "lcoai_per_1000_usd"])
        .with_alignment(vec![Align::Right, Align::Right]);
    for point in &result.series {
        table
            .push_row(vec![
                point.value.to_string(),
                point.per_thousand.map(plain_usd).unwrap_or_default(),
            ])
            .expect("two cells");
    }
    table
}
