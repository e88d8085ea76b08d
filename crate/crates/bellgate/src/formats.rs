//! CSV layouts for the 16-cell coincidence table and the luminosity table.
//!
//! Coincidence tables have a header `bob_angle,0,45,90,135` (Alice's angles)
//! and one row per Bob angle. A cell is either `count-accidental`, or a bare
//! number when counts and accidentals come in two separate files.

use bellgate_core::analysis::{ALICE_ANGLES, BOB_ANGLES};
use bellgate_core::{CountRecord, CountTable16};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: bad cell `{text}`")]
    Cell { line: u64, text: String },
    #[error("line {line}: bad angle `{text}`")]
    Angle { line: u64, text: String },
    #[error("angle grid must be alice {ALICE_ANGLES:?} by bob {BOB_ANGLES:?}: {0}")]
    Grid(String),
    #[error("missing row `{0}`")]
    MissingRow(&'static str),
    #[error("unknown row `{0}`")]
    UnknownRow(String),
    #[error("row `{0}`: {1}")]
    Record(String, bellgate_core::detection::DetectionError),
}

/// Integration time assumed for tables read from disk, seconds per cell.
pub const TABLE_INTEGRATION_TIME: f64 = 60.0;

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes())
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Position of `value` in `grid`, exact match only.
fn slot(grid: &[f64; 4], value: f64) -> Option<usize> {
    grid.iter().position(|&g| g == value)
}

/// Reads a 4 x 4 grid of raw cell strings, indexed `[alice][bob]`.
fn read_grid(text: &str) -> Result<[[(String, u64); 4]; 4], FormatError> {
    let mut rdr = reader(text);
    let header = rdr.headers()?.clone();
    if header.len() != 5 {
        return Err(FormatError::Grid(format!("header has {} columns", header.len())));
    }
    let mut columns = [0usize; 4];
    let mut seen = [false; 4];
    for (k, h) in header.iter().skip(1).enumerate() {
        let a: f64 = h.parse().map_err(|_| FormatError::Angle { line: 1, text: h.to_string() })?;
        let i = slot(&ALICE_ANGLES, a).ok_or_else(|| FormatError::Grid(format!("column angle {h}")))?;
        if seen[i] {
            return Err(FormatError::Grid(format!("column angle {h} repeated")));
        }
        seen[i] = true;
        columns[k] = i;
    }

    let mut grid: [[Option<(String, u64)>; 4]; 4] = Default::default();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let label = &rec[0];
        let b: f64 = label.parse().map_err(|_| FormatError::Angle { line, text: label.to_string() })?;
        let j = slot(&BOB_ANGLES, b).ok_or_else(|| FormatError::Grid(format!("row angle {label}")))?;
        if grid[0][j].is_some() {
            return Err(FormatError::Grid(format!("row angle {label} repeated")));
        }
        for (k, cell) in rec.iter().skip(1).enumerate() {
            grid[columns[k]][j] = Some((cell.to_string(), line));
        }
        rows += 1;
    }
    if rows != 4 {
        return Err(FormatError::Grid(format!("{rows} rows")));
    }
    Ok(grid.map(|col| col.map(|c| c.expect("all rows and columns present"))))
}

fn parse_count(text: &str, line: u64) -> Result<u64, FormatError> {
    text.trim().parse().map_err(|_| FormatError::Cell { line, text: text.to_string() })
}

fn parse_accidental(text: &str, line: u64) -> Result<f64, FormatError> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite() && *v >= 0.0)
        .ok_or_else(|| FormatError::Cell { line, text: text.to_string() })
}

/// Parses the single-file layout with `count-accidental` cells.
pub fn parse_table(text: &str) -> Result<CountTable16, FormatError> {
    let grid = read_grid(text)?;
    let mut counts = [[0; 4]; 4];
    let mut accidentals = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let (cell, line) = &grid[i][j];
            let (c, a) = cell.split_once('-').ok_or_else(|| FormatError::Cell { line: *line, text: cell.clone() })?;
            counts[i][j] = parse_count(c, *line)?;
            accidentals[i][j] = parse_accidental(a, *line)?;
        }
    }
    Ok(CountTable16 { counts, accidentals, integration_time: TABLE_INTEGRATION_TIME })
}

/// Parses the two-file layout: integer counts and numeric accidentals.
pub fn parse_split_tables(counts_text: &str, accidentals_text: &str) -> Result<CountTable16, FormatError> {
    let cg = read_grid(counts_text)?;
    let ag = read_grid(accidentals_text)?;
    let mut counts = [[0; 4]; 4];
    let mut accidentals = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            counts[i][j] = parse_count(&cg[i][j].0, cg[i][j].1)?;
            accidentals[i][j] = parse_accidental(&ag[i][j].0, ag[i][j].1)?;
        }
    }
    Ok(CountTable16 { counts, accidentals, integration_time: TABLE_INTEGRATION_TIME })
}

/// Shortest text for an accidental estimate, at most three decimals.
fn accidental_text(a: f64) -> String {
    let s = format!("{a:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Writes the single-file layout.
pub fn write_table(table: &CountTable16) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["bob_angle".to_string()];
    header.extend(ALICE_ANGLES.iter().map(f64::to_string));
    w.write_record(&header).expect("in-memory write");
    for (j, b) in BOB_ANGLES.iter().enumerate() {
        let mut row = vec![b.to_string()];
        for i in 0..4 {
            row.push(format!("{}-{}", table.counts[i][j], accidental_text(table.accidentals[i][j])));
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

/// Rows of the luminosity table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuminosityTable {
    pub dark: CountRecord,
    pub without_rotation: CountRecord,
    pub with_rotation: CountRecord,
}

pub const DARK_LABEL: &str = "Dark Counts";
pub const STILL_LABEL: &str = "No rotation";
pub const SPIN_LABEL: &str = "With rotation";

/// Parses `label,singles_alice_per_s,singles_bob_per_s,coincidences_per_s`.
/// Labels match case-insensitively; rates become one-second records.
pub fn parse_luminosity(text: &str) -> Result<LuminosityTable, FormatError> {
    let mut rdr = reader(text);
    let mut rows: [Option<CountRecord>; 3] = [None; 3];
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != 4 {
            return Err(FormatError::Cell { line, text: rec.iter().collect::<Vec<_>>().join(",") });
        }
        let label = &rec[0];
        let k = [DARK_LABEL, STILL_LABEL, SPIN_LABEL]
            .iter()
            .position(|l| l.eq_ignore_ascii_case(label))
            .ok_or_else(|| FormatError::UnknownRow(label.to_string()))?;
        let mut v = [0.0; 3];
        for (x, cell) in v.iter_mut().zip(rec.iter().skip(1)) {
            *x = cell.parse().map_err(|_| FormatError::Cell { line, text: cell.to_string() })?;
        }
        let record =
            CountRecord::from_rates(v[0], v[1], v[2]).map_err(|e| FormatError::Record(label.to_string(), e))?;
        rows[k] = Some(record);
    }
    Ok(LuminosityTable {
        dark: rows[0].ok_or(FormatError::MissingRow(DARK_LABEL))?,
        without_rotation: rows[1].ok_or(FormatError::MissingRow(STILL_LABEL))?,
        with_rotation: rows[2].ok_or(FormatError::MissingRow(SPIN_LABEL))?,
    })
}

/// Writes records as per-second rates in the luminosity layout.
pub fn write_luminosity(table: &LuminosityTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "singles_alice_per_s", "singles_bob_per_s", "coincidences_per_s"])
        .expect("in-memory write");
    for (label, r) in
        [(DARK_LABEL, &table.dark), (STILL_LABEL, &table.without_rotation), (SPIN_LABEL, &table.with_rotation)]
    {
        let [a, b, c] = r.per_second();
        w.write_record([label.to_string(), a.to_string(), b.to_string(), c.to_string()]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}
