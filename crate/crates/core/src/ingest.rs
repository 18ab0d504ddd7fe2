//! CSV parsing, column profiling and grain inference.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::decimal::Dec;
use crate::error::{Error, Result};
use crate::scheme::Grain;

/// Values with more fractional digits are rounded to this many before
/// grain inference.
pub const MAX_FRACTION_DIGITS: u32 = 9;

/// Largest power of ten accepted as a coarse integer grain.
const MAX_GRAIN_EXP: i32 = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Missing,
    Number(Dec),
    Text(String),
}

impl Cell {
    fn parse(raw: &str) -> Cell {
        let t = raw.trim();
        if t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("null") {
            return Cell::Missing;
        }
        match Dec::parse(t) {
            Some(d) => Cell::Number(d),
            None => Cell::Text(t.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub cells: Vec<Cell>,
}

impl Column {
    pub fn is_numeric(&self) -> bool {
        !self.cells.iter().any(|c| matches!(c, Cell::Text(_)))
            && self.cells.iter().any(|c| matches!(c, Cell::Number(_)))
    }

    /// The column as optional decimals; fails if any cell is text.
    pub fn numeric(&self) -> Result<Vec<Option<Dec>>> {
        self.cells
            .iter()
            .map(|c| match c {
                Cell::Missing => Ok(None),
                Cell::Number(d) => Ok(Some(*d)),
                Cell::Text(_) => Err(Error::NonNumeric(self.name.clone())),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<Column>,
}

impl Table {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.cells.len())
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        let wanted = normalize_name(name);
        self.columns
            .iter()
            .find(|c| normalize_name(&c.name) == wanted)
            .ok_or_else(|| Error::FieldNotFound(name.to_string()))
    }

    pub fn numeric_column(&self, name: &str) -> Result<Vec<Option<Dec>>> {
        self.column(name)?.numeric()
    }
}

fn normalize_name(name: &str) -> String {
    name.trim().to_lowercase()
}

#[derive(Debug, Clone, Copy)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            header: true,
        }
    }
}

/// Parses RFC 4180 CSV. Empty cells and `NA`/`null` (any case) are missing.
pub fn parse_csv(input: &[u8], options: CsvOptions) -> Result<Table> {
    if let Err(e) = std::str::from_utf8(input) {
        return Err(Error::Encoding(e.valid_up_to()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(input);

    let mut records = reader.records();
    let mut names: Vec<String> = Vec::new();
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    let mut row_index = 0usize;
    if options.header {
        match records.next() {
            Some(r) => {
                let r = r.map_err(|e| Error::Parse {
                    row: 0,
                    message: e.to_string(),
                })?;
                names = r.iter().map(|s| s.trim().to_string()).collect();
                row_index = 1;
            }
            None => return Ok(Table::default()),
        }
    }
    for r in records {
        let r = r.map_err(|e| Error::Parse {
            row: row_index,
            message: e.to_string(),
        })?;
        if !options.header && names.is_empty() {
            names = (1..=r.len()).map(|i| format!("column_{i}")).collect();
        }
        if r.len() != names.len() {
            return Err(Error::Parse {
                row: row_index,
                message: format!("expected {} fields, found {}", names.len(), r.len()),
            });
        }
        rows.push(r);
        row_index += 1;
    }

    let mut seen = HashSet::new();
    for n in &names {
        if !seen.insert(normalize_name(n)) {
            return Err(Error::DuplicateColumn(n.clone()));
        }
    }

    let columns = names
        .into_iter()
        .enumerate()
        .map(|(i, name)| Column {
            name,
            cells: rows.iter().map(|r| Cell::parse(&r[i])).collect(),
        })
        .collect();
    Ok(Table { columns })
}

/// Summary statistics of one numeric column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesProfile {
    pub n: usize,
    pub missing: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub sd: f64,
    pub iqr: f64,
    pub grain: Grain,
}

impl SeriesProfile {
    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    /// Convenience for callers holding plain doubles.
    pub fn from_f64s(values: &[f64]) -> Result<SeriesProfile> {
        let col = values
            .iter()
            .map(|&v| {
                Dec::from_f64(v)
                    .map(Some)
                    .ok_or_else(|| Error::InvalidValue(format!("{v} is not finite")))
            })
            .collect::<Result<Vec<_>>>()?;
        profile(&col)
    }
}

/// Linear-interpolation quantile (R type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn profile(column: &[Option<Dec>]) -> Result<SeriesProfile> {
    let present: Vec<Dec> = column.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::EmptyColumn(String::new()));
    }
    let mut xs: Vec<f64> = present.iter().map(Dec::to_f64).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    let iqr = quantile_sorted(&xs, 0.75) - quantile_sorted(&xs, 0.25);
    Ok(SeriesProfile {
        n,
        missing: column.len() - n,
        min: xs[0],
        max: xs[n - 1],
        mean,
        sd: var.sqrt(),
        iqr: iqr.max(0.0),
        grain: infer_grain(&present),
    })
}

/// `10^-d` for the deepest significant fraction digit `d`; for integer data
/// with at least two distinct values, the largest `10^k` dividing them all.
pub fn infer_grain(values: &[Dec]) -> Grain {
    let rounded: Vec<Dec> = values
        .iter()
        .map(|v| v.round_dp(MAX_FRACTION_DIGITS))
        .collect();
    let digits = rounded.iter().map(Dec::frac_digits).max().unwrap_or(0);
    if digits > 0 {
        return Grain::power_of_ten(-(digits as i32)).unwrap_or(Grain::UNIT);
    }
    let distinct: HashSet<(i128, i32)> = rounded
        .iter()
        .map(|d| {
            let n = d.normalized();
            (n.units(), n.exp())
        })
        .collect();
    if distinct.len() < 2 {
        return Grain::UNIT;
    }
    // Normalized integers carry their trailing zeros in the exponent; zero
    // is a multiple of every power.
    let k = rounded
        .iter()
        .filter(|d| !d.is_zero())
        .map(|d| d.normalized().exp())
        .min()
        .unwrap_or(0)
        .min(MAX_GRAIN_EXP);
    Grain::power_of_ten(k.max(0)).unwrap_or(Grain::UNIT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn decs(xs: &[&str]) -> Vec<Dec> {
        xs.iter().map(|s| Dec::parse(s).unwrap()).collect()
    }

    fn brute_force(xs: &[f64]) -> (f64, f64, f64, f64, f64, f64) {
        let n = xs.len() as f64;
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
        // R-7 from its 1-based definition: h = (n-1)p + 1, x[h] interpolated.
        let q = |p: f64| {
            let h = (n - 1.0) * p + 1.0;
            let j = h.floor() as usize;
            let lo = sorted[j - 1];
            let hi = sorted[j.min(sorted.len()) - 1 + usize::from(j < sorted.len())];
            lo + (h - j as f64) * (hi - lo)
        };
        (sorted[0], sorted[sorted.len() - 1], mean, sd, q(0.25), q(0.75))
    }

    #[test]
    fn single_column() {
        let t = parse_csv(b"age\n5\n7\n", CsvOptions::default()).unwrap();
        assert_eq!(t.columns.len(), 1);
        assert_eq!(t.columns[0].name, "age");
        let vals = t.numeric_column("age").unwrap();
        assert_eq!(vals, vec![Some(Dec::from_int(5)), Some(Dec::from_int(7))]);
    }

    #[test]
    fn empty_cell_is_missing() {
        let t = parse_csv(b"a,b\n1,\n2,3\n", CsvOptions::default()).unwrap();
        let b = t.numeric_column("b").unwrap();
        assert_eq!(b.iter().filter(|v| v.is_none()).count(), 1);
    }

    #[test]
    fn decimals_keep_written_digits() {
        let t = parse_csv(b"a\n1.50\n2.25\n", CsvOptions::default()).unwrap();
        let a: Vec<String> = t
            .numeric_column("a")
            .unwrap()
            .into_iter()
            .map(|d| d.unwrap().to_string())
            .collect();
        assert_eq!(a, vec!["1.50", "2.25"]);
    }

    #[test]
    fn missing_markers_and_quoting() {
        let t = parse_csv(b"x;name\nNA;\"a;b\"\nnull;c\nNull;\"d \"\"q\"\"\"\n4;e\n", CsvOptions {
            delimiter: b';',
            header: true,
        })
        .unwrap();
        let x = t.numeric_column("x").unwrap();
        assert_eq!(x.iter().filter(|v| v.is_none()).count(), 3);
        assert_eq!(t.columns[1].cells[0], Cell::Text("a;b".into()));
        assert_eq!(t.columns[1].cells[2], Cell::Text("d \"q\"".into()));
        assert!(matches!(t.numeric_column("name"), Err(Error::NonNumeric(_))));
        assert!(matches!(t.numeric_column("nope"), Err(Error::FieldNotFound(_))));
    }

    #[test]
    fn headerless_input_gets_generated_names() {
        let t = parse_csv(b"1,2\n3,4\n", CsvOptions { delimiter: b',', header: false }).unwrap();
        assert_eq!(t.columns[1].name, "column_2");
        assert_eq!(t.rows(), 2);
    }

    #[test]
    fn ragged_rows_report_index() {
        let err = parse_csv(b"a,b\n1,2\n3\n", CsvOptions::default()).unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                row: 2,
                message: "expected 2 fields, found 1".into()
            }
        );
    }

    #[test]
    fn non_utf8_is_an_encoding_error() {
        assert_eq!(parse_csv(b"a\n\xff\n", CsvOptions::default()), Err(Error::Encoding(2)));
    }

    #[test]
    fn duplicate_names_after_normalization() {
        assert!(matches!(
            parse_csv(b"Age,age \n1,2\n", CsvOptions::default()),
            Err(Error::DuplicateColumn(_))
        ));
    }

    #[test]
    fn profile_basic_arithmetic() {
        let p = SeriesProfile::from_f64s(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((p.n, p.min, p.max, p.mean), (4, 1.0, 4.0, 2.5));
    }

    #[test]
    fn profile_r7_iqr() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        let p = SeriesProfile::from_f64s(&xs).unwrap();
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(quantile_sorted(&sorted, 0.25), 25.75);
        assert_eq!(quantile_sorted(&sorted, 0.75), 75.25);
        assert_eq!(p.iqr, 49.5);
    }

    #[test]
    fn constant_series_has_no_spread() {
        let p = SeriesProfile::from_f64s(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!((p.sd, p.iqr), (0.0, 0.0));
        assert_eq!(p.grain, Grain::UNIT);
    }

    #[test]
    fn all_missing_column_errors() {
        assert!(matches!(profile(&[None, None]), Err(Error::EmptyColumn(_))));
        let p = profile(&[None, Some(Dec::from_int(3))]).unwrap();
        assert_eq!((p.n, p.missing), (1, 1));
    }

    #[test]
    fn grain_examples() {
        assert_eq!(infer_grain(&decs(&["3", "7", "12"])), Grain::UNIT);
        assert_eq!(
            infer_grain(&decs(&["1.5", "2.25"])),
            Grain::from_f64(0.01).unwrap()
        );
        assert_eq!(
            infer_grain(&decs(&["2000000", "5000000", "13000000"])),
            Grain::from_f64(1e6).unwrap()
        );
        // trailing zeros are not significant
        assert_eq!(infer_grain(&decs(&["1.50", "2.0"])), Grain::from_f64(0.1).unwrap());
        assert_eq!(infer_grain(&decs(&["0", "300", "-1200"])), Grain::from_f64(100.0).unwrap());
    }

    #[test]
    fn degenerate_grains() {
        assert_eq!(infer_grain(&decs(&["5000", "5000"])), Grain::UNIT);
        assert_eq!(infer_grain(&decs(&["0.25"])), Grain::from_f64(0.01).unwrap());
        // capped at nine fractional digits
        assert_eq!(
            infer_grain(&decs(&["0.0000000001", "0.5"])),
            Grain::from_f64(0.1).unwrap()
        );
    }

    proptest! {
        #[test]
        fn profile_matches_brute_force(xs in prop::collection::vec(-1e6f64..1e6, 1..200)) {
            let xs: Vec<f64> = xs.iter().map(|x| (x * 100.0).round() / 100.0).collect();
            let p = SeriesProfile::from_f64s(&xs).unwrap();
            let (min, max, mean, sd, q1, q3) = brute_force(&xs);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
            prop_assert_eq!(p.n, xs.len());
            prop_assert_eq!((p.min, p.max), (min, max));
            prop_assert!(close(p.mean, mean));
            prop_assert!(close(p.sd, sd));
            prop_assert!(close(p.iqr, q3 - q1), "{} vs {}", p.iqr, q3 - q1);
        }

        #[test]
        fn grain_divides_every_value(
            units in prop::collection::vec(-1_000_000i64..1_000_000, 1..50),
            exp in -6i32..7,
        ) {
            let values: Vec<Dec> = units.iter().map(|&u| Dec::new(u as i128, exp)).collect();
            let g = infer_grain(&values);
            for v in &values {
                prop_assert!(v.is_multiple_of(g.step()), "{} not a multiple of {}", v, g);
            }
        }

        #[test]
        fn scaling_by_ten_scales_grain(
            units in prop::collection::btree_set(-100_000i64..100_000, 2..40),
            exp in -5i32..5,
        ) {
            let values: Vec<Dec> = units.iter().map(|&u| Dec::new(u as i128, exp)).collect();
            let scaled: Vec<Dec> = values.iter().map(|v| v.checked_mul_int(10).unwrap()).collect();
            let g = infer_grain(&values).step();
            prop_assert_eq!(infer_grain(&scaled).step(), g.checked_mul_int(10).unwrap());
        }
    }
}
