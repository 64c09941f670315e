//! Datasets and the CSV formats they are read from.
//!
//! * pairs: header `h,r`
//! * multiple indicators: header `h1,...,hk,r` (any indicator names, `r` last)
//! * prices: header `date,price`, ISO-8601 dates

use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};

/// Paired indicator and next-period return observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    h: Vec<f64>,
    r: Vec<f64>,
}

impl Dataset {
    pub fn new(h: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if h.len() != r.len() {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r.len() as f64,
                reason: "indicator and return columns differ in length",
            });
        }
        if h.is_empty() {
            return Err(Error::Empty("dataset has no observations"));
        }
        for (i, (&a, &b)) in h.iter().zip(&r).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Data {
                    line: i as u64 + 1,
                    message: "non-finite observation".into(),
                });
            }
        }
        Ok(Self { h, r })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let (h, r) = pairs.into_iter().unzip();
        Self::new(h, r)
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.h.iter().copied().zip(self.r.iter().copied())
    }

    /// First `n` observations.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        let n = n.min(self.len());
        Self::new(self.h[..n].to_vec(), self.r[..n].to_vec())
    }
}

/// Several indicators observed alongside each return.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiDataset {
    names: Vec<String>,
    /// Row-major, `names.len()` values per row.
    h: Vec<f64>,
    r: Vec<f64>,
}

impl MultiDataset {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>, r: Vec<f64>) -> Result<Self> {
        let k = names.len();
        if k == 0 {
            return Err(Error::Empty("no indicator columns"));
        }
        if rows.len() != r.len() {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r.len() as f64,
                reason: "indicator rows and returns differ in length",
            });
        }
        let mut h = Vec::with_capacity(rows.len() * k);
        for (i, row) in rows.into_iter().enumerate() {
            let line = i as u64 + 1;
            if row.len() != k {
                return Err(Error::Data {
                    line,
                    message: format!("expected {k} indicators, found {}", row.len()),
                });
            }
            if row.iter().chain(std::iter::once(&r[i])).any(|x| !x.is_finite()) {
                return Err(Error::Data {
                    line,
                    message: "non-finite observation".into(),
                });
            }
            h.extend(row);
        }
        Ok(Self { names, h, r })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.k();
        &self.h[i * k..(i + 1) * k]
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Single-indicator dataset from column `j`.
    pub fn column(&self, j: usize) -> Result<Dataset> {
        let h = (0..self.len()).map(|i| self.row(i)[j]).collect();
        Dataset::new(h, self.r.clone())
    }
}

/// A date-stamped price series.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub prices: Vec<f64>,
}

/// Contents of any of the accepted CSV layouts, detected from the header.
#[derive(Debug, Clone)]
pub enum Input {
    Pairs(Dataset),
    Multi(MultiDataset),
    Prices(PriceSeries),
}

fn reader<R: Read>(rdr: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(rdr)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Data {
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        csv::ErrorKind::Utf8 { err, .. } => Error::Data {
            line,
            message: format!("invalid UTF-8: {err}"),
        },
        other => Error::Data {
            line,
            message: format!("{other:?}"),
        },
    }
}

fn parse_cell(field: &str, column: &str, line: u64) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Data {
        line,
        message: format!("column `{column}`: `{field}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Data {
            line,
            message: format!("column `{column}`: `{field}` is not finite"),
        });
    }
    Ok(v)
}

/// Reads any of the three layouts, choosing by header.
pub fn read_input<R: Read>(rdr: R) -> Result<Input> {
    let mut rdr = reader(rdr);
    let headers: Vec<String> = rdr.headers().map_err(csv_error)?.iter().map(str::to_owned).collect();
    let bad_header = |msg: String| Error::Data { line: 1, message: msg };
    match headers.as_slice() {
        [d, p] if d == "date" && p == "price" => read_prices_body(rdr).map(Input::Prices),
        [h, r] if h == "h" && r == "r" => {
            let (names, rows, r) = read_numeric_body(rdr, &headers)?;
            debug_assert_eq!(names.len(), 1);
            Dataset::new(rows.into_iter().map(|row| row[0]).collect(), r).map(Input::Pairs)
        }
        [.., last] if last == "r" && headers.len() >= 2 => {
            let (names, rows, r) = read_numeric_body(rdr, &headers)?;
            MultiDataset::new(names, rows, r).map(Input::Multi)
        }
        _ => Err(bad_header(format!(
            "unrecognized header `{}`; expected `h,r`, `h1,...,hk,r` or `date,price`",
            headers.join(",")
        ))),
    }
}

type NumericBody = (Vec<String>, Vec<Vec<f64>>, Vec<f64>);

fn read_numeric_body<R: Read>(mut rdr: csv::Reader<R>, headers: &[String]) -> Result<NumericBody> {
    let k = headers.len() - 1;
    let (mut rows, mut r) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(k);
        for (field, name) in rec.iter().zip(headers) {
            row.push(parse_cell(field, name, line)?);
        }
        r.push(row.pop().expect("at least two columns"));
        rows.push(row);
    }
    Ok((headers[..k].to_vec(), rows, r))
}

fn read_prices_body<R: Read>(mut rdr: csv::Reader<R>) -> Result<PriceSeries> {
    let (mut dates, mut prices) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|e| Error::Data {
            line,
            message: format!("column `date`: `{}` is not an ISO-8601 date ({e})", &rec[0]),
        })?;
        dates.push(date);
        prices.push(parse_cell(&rec[1], "price", line)?);
    }
    Ok(PriceSeries { dates, prices })
}

/// Reads a pairs CSV (`h,r`).
pub fn read_pairs<R: Read>(rdr: R) -> Result<Dataset> {
    match read_input(rdr)? {
        Input::Pairs(d) => Ok(d),
        _ => Err(Error::Data {
            line: 1,
            message: "expected header `h,r`".into(),
        }),
    }
}

/// Reads a prices CSV (`date,price`).
pub fn read_prices<R: Read>(rdr: R) -> Result<PriceSeries> {
    match read_input(rdr)? {
        Input::Prices(p) => Ok(p),
        _ => Err(Error::Data {
            line: 1,
            message: "expected header `date,price`".into(),
        }),
    }
}

/// Writes a pairs CSV with full (round-trip) precision.
pub fn write_pairs<W: Write>(w: W, data: &Dataset) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wtr.write_record(["h", "r"]).map_err(io)?;
    for (h, r) in data.pairs() {
        wtr.write_record([h.to_string(), r.to_string()]).map_err(io)?;
    }
    wtr.flush().map_err(|e| Error::Io(e.to_string()))
}
