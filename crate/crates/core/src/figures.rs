//! Tabulated and sampled versions of the closed forms, plus CSV/JSON
//! rendering of the resulting tables.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::max_er::{ir_er, ir_zero_drift, prob_positive};
use crate::max_ir::{comparison_curves, ir_asymptotic_approx, max_ir_from_zeta, zeta_closed_form};
use crate::model::StandardModel;
use crate::normal_math::a_of_theta;
use crate::notional::NotionalFunction;

/// Correlations of the information-ratio convergence table.
pub const FIG3_RHO: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 1.0];
/// Security information ratios (columns) of the same table.
pub const FIG3_OMEGA: [f64; 3] = [0.5, 1.0, 2.0];
/// Correlations of the maximum information ratio table.
pub const FIG7_RHO: [f64; 13] = [
    0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 0.999, 0.9999, 0.99999,
];
/// Correlations plotted for the optimal-IR notional.
pub const FIG5_RHO: [f64; 4] = [0.3, 0.6, 0.9, 0.99];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    /// Six significant digits.
    #[default]
    Paper,
    /// Shortest representation that round-trips.
    Full,
}

impl FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper" => Ok(Self::Paper),
            "full" => Ok(Self::Full),
            _ => Err(format!("unknown precision `{s}` (expected paper or full)")),
        }
    }
}

/// Rounds to six significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

/// Renders a number; non-finite values become `inf`, `-inf` or `nan`.
pub fn format_number(x: f64, precision: Precision) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let v = match precision {
        Precision::Paper => round_sig6(x),
        Precision::Full => x,
    };
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// A rectangular table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// Values of a numeric column; text cells are skipped.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .filter_map(|r| match r[j] {
                    Cell::Num(x) => Some(x),
                    Cell::Text(_) => None,
                })
                .collect(),
        )
    }

    pub fn to_csv(&self, precision: Precision) -> String {
        let mut out = String::new();
        let quote = |s: &str| {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_owned()
            }
        };
        out.push_str(&self.columns.iter().map(|c| quote(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => format_number(*x, precision),
                    Cell::Text(s) => quote(s),
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// An array of row objects. Non-finite numbers become `null`.
    pub fn to_json(&self, precision: Precision) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    let v = match cell {
                        Cell::Num(x) => {
                            let x = match precision {
                                Precision::Paper => round_sig6(*x),
                                Precision::Full => *x,
                            };
                            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
                        }
                        Cell::Text(s) => Value::String(s.clone()),
                    };
                    obj.insert(name.clone(), v);
                }
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableName {
    Fig3,
    Fig7,
    Table1,
}

impl FromStr for TableName {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fig3" => Ok(Self::Fig3),
            "fig7" => Ok(Self::Fig7),
            "table1" => Ok(Self::Table1),
            _ => Err(format!("unknown table `{s}` (expected fig3, fig7 or table1)")),
        }
    }
}

/// Information ratio of the maximum-expected-return strategy for each
/// `(rho, omega)` of the convergence table.
pub fn fig3_table() -> Result<Table> {
    let mut t = Table::new(&["rho", "omega_0.5", "omega_1", "omega_2"]);
    for rho in FIG3_RHO {
        let mut row = vec![Cell::Num(rho)];
        for omega in FIG3_OMEGA {
            row.push(ir_er(omega, rho)?.into());
        }
        t.push(row);
    }
    Ok(t)
}

/// Exact zero-drift maximum information ratio and its `rho -> 1`
/// approximation.
pub fn fig7_table() -> Result<Table> {
    let mut t = Table::new(&["rho", "max_ir", "approximation"]);
    for rho in FIG7_RHO {
        let exact = max_ir_from_zeta(zeta_closed_form(rho)?)?;
        t.push(vec![rho.into(), exact.into(), ir_asymptotic_approx(rho)?.into()]);
    }
    Ok(t)
}

/// Side-by-side summary of both optimal strategies for a zero-drift security.
pub fn table1(sigma: f64, rho: f64) -> Result<Table> {
    let model = StandardModel::new(0.0, sigma, rho)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
            reason: "the summary needs 0 < rho < 1",
        });
    }
    let zeta = zeta_closed_form(rho)?;
    let s = model.residual_sd();
    let er_mean = rho * sigma * crate::normal_math::SQRT_2_OVER_PI;
    let er_sd = sigma * (1.0 - 2.0 * rho * rho / std::f64::consts::PI).sqrt();
    let ir_mean = 2.0 * s * zeta;
    let ir_sd = 2.0 * s * (zeta * (1.0 - zeta)).sqrt();
    let num = 2.0 * rho * (1.0 - rho * rho).sqrt();
    let (c0, c2) = (1.0 - rho * rho, rho * rho);
    let p = |x: f64| format_number(x, Precision::Paper);
    let mut t = Table::new(&["quantity", "max_expected_return", "max_information_ratio"]);
    t.push(vec![
        "notional".into(),
        "sign(H)".into(),
        format!("{} H / ({} + {} H^2)", p(num), p(c0), p(c2)).into(),
    ]);
    t.push(vec!["expected_return".into(), er_mean.into(), ir_mean.into()]);
    t.push(vec!["std_dev".into(), er_sd.into(), ir_sd.into()]);
    t.push(vec![
        "information_ratio".into(),
        ir_zero_drift(rho)?.into(),
        max_ir_from_zeta(zeta)?.into(),
    ]);
    t.push(vec!["zeta".into(), Cell::Text(String::new()), zeta.into()]);
    t.push(vec![
        "b".into(),
        Cell::Text(String::new()),
        crate::max_ir::b_of_rho(rho).into(),
    ]);
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveName {
    Fig1,
    Fig2,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl FromStr for CurveName {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "fig1" => Self::Fig1,
            "fig2" => Self::Fig2,
            "fig4" => Self::Fig4,
            "fig5" => Self::Fig5,
            "fig6" => Self::Fig6,
            "fig7" => Self::Fig7,
            "fig8" => Self::Fig8,
            "fig9" => Self::Fig9,
            _ => return Err(format!("unknown curve `{s}` (expected fig1, fig2, fig4 ... fig9)")),
        })
    }
}

/// Uniform grid `[from, to]` with `points` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.to
                } else {
                    self.from + step * i as f64
                }
            })
            .collect()
    }
}

impl CurveName {
    /// Default x range; 201 points throughout.
    pub fn default_grid(self) -> Grid {
        let (from, to) = match self {
            Self::Fig1 | Self::Fig4 | Self::Fig6 => (0.0, 1.0),
            Self::Fig2 => (-4.0, 4.0),
            Self::Fig5 => (-5.0, 5.0),
            Self::Fig7 | Self::Fig9 => (0.0, 0.99),
            Self::Fig8 => (0.05, 0.95),
        };
        Grid { from, to, points: 201 }
    }

    // Closed interval of admissible x, with flags for open ends.
    fn domain(self) -> (f64, bool, f64, bool) {
        match self {
            Self::Fig1 | Self::Fig4 | Self::Fig6 => (0.0, false, 1.0, false),
            Self::Fig2 | Self::Fig5 => (f64::NEG_INFINITY, true, f64::INFINITY, true),
            Self::Fig7 | Self::Fig9 => (0.0, false, 1.0, true),
            Self::Fig8 => (0.0, true, 1.0, true),
        }
    }

    fn x_name(self) -> &'static str {
        match self {
            Self::Fig2 => "m",
            Self::Fig5 => "h",
            _ => "rho",
        }
    }
}

fn check_grid(name: CurveName, grid: &Grid) -> Result<()> {
    if grid.points == 0 {
        return Err(Error::InvalidGrid("at least one point is required"));
    }
    if !grid.from.is_finite() || !grid.to.is_finite() {
        return Err(Error::InvalidGrid("grid bounds must be finite"));
    }
    if grid.from > grid.to || (grid.points > 1 && grid.from == grid.to) {
        return Err(Error::InvalidGrid("grid start must be below its end"));
    }
    let (lo, lo_open, hi, hi_open) = name.domain();
    let below = if lo_open { grid.from <= lo } else { grid.from < lo };
    let above = if hi_open { grid.to >= hi } else { grid.to > hi };
    if below || above {
        return Err(Error::InvalidGrid("grid leaves the curve's domain"));
    }
    Ok(())
}

/// Samples one of the figures on `grid`. Single curves have columns `x,y`
/// (with `x` named after the variable); figures with several curves add a
/// `series` column.
pub fn curve(name: CurveName, grid: &Grid) -> Result<Table> {
    check_grid(name, grid)?;
    let xs = grid.values();
    let x = name.x_name();
    let single = |f: &dyn Fn(f64) -> Result<f64>| -> Result<Table> {
        let mut t = Table::new(&[x, "y"]);
        for &v in &xs {
            t.push(vec![v.into(), f(v)?.into()]);
        }
        Ok(t)
    };
    let multi = |series: &[(&str, &dyn Fn(f64) -> Result<f64>)]| -> Result<Table> {
        let mut t = Table::new(&[x, "y", "series"]);
        for (label, f) in series {
            for &v in &xs {
                t.push(vec![v.into(), f(v)?.into(), (*label).into()]);
            }
        }
        Ok(t)
    };
    // Zero-correlation limits of the zeta-based quantities.
    let zeta0 = |rho: f64| if rho == 0.0 { Ok(0.0) } else { zeta_closed_form(rho) };
    match name {
        CurveName::Fig1 => single(&prob_positive),
        CurveName::Fig4 => single(&ir_zero_drift),
        CurveName::Fig2 => multi(&[("A(m)", &a_of_theta), ("|m|", &|m: f64| Ok(m.abs()))]),
        CurveName::Fig5 => {
            let notionals: Vec<(String, NotionalFunction)> = FIG5_RHO
                .iter()
                .map(|&rho| {
                    let model = StandardModel::new(0.0, 1.0, rho)?;
                    Ok((format!("rho={rho}"), NotionalFunction::ClippedRatio { model }))
                })
                .collect::<Result<_>>()?;
            let sign = NotionalFunction::SignThreshold { threshold: 0.0 };
            let mut t = Table::new(&[x, "y", "series"]);
            for (label, f) in notionals
                .iter()
                .map(|(l, f)| (l.as_str(), f))
                .chain([("sign(H)", &sign)])
            {
                for &v in &xs {
                    t.push(vec![v.into(), f.eval(v).into(), label.into()]);
                }
            }
            Ok(t)
        }
        CurveName::Fig6 => multi(&[
            ("zeta", &|rho: f64| zeta0(rho)),
            ("expected_return", &|rho: f64| {
                Ok(2.0 * (1.0 - rho * rho).max(0.0).sqrt() * zeta0(rho)?)
            }),
        ]),
        CurveName::Fig7 => multi(&[
            ("max_ir", &|rho: f64| max_ir_from_zeta(zeta0(rho)?)),
            ("approximation", &ir_asymptotic_approx),
        ]),
        CurveName::Fig8 => single(&|rho: f64| Ok(comparison_curves(&[rho])?[0].er_ratio)),
        CurveName::Fig9 => single(&|rho: f64| {
            if rho == 0.0 {
                Ok(0.0)
            } else {
                Ok(comparison_curves(&[rho])?[0].ir_diff)
            }
        }),
    }
}
