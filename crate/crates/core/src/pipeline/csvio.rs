//! Plot-ready CSV artifacts with exact float round-trips.

use std::path::Path;

use crate::dynamics::FpSolution;
use crate::error::{Error, Result};
use crate::estimators::{Density, DetrendResult, Indicator, IndicatorTrack, PotentialSurface};
use crate::series::TimeSeries;
use crate::significance::{contour_segments, SensitivityGrid, SurrogateReport, CONTOUR_LEVELS};

/// Shortest text that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Missing values are empty fields.
pub fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Empty field reads as `None`.
pub fn parse_opt(s: &str) -> Result<Option<f64>> {
    let t = s.trim();
    if t.is_empty() {
        return Ok(None);
    }
    t.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Parse(format!("not a number: '{t}'")))
}

/// A parsed CSV file: header plus raw text fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column '{name}'")))
    }

    pub fn floats(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let c = self.column(name)?;
        self.rows.iter().map(|r| parse_opt(&r[c])).collect()
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new().from_path(path)?;
    let headers = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok(Table { headers, rows })
}

fn write_rows(path: &Path, headers: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(headers)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series(path: &Path, ts: &TimeSeries) -> Result<()> {
    write_rows(
        path,
        &["t", "x"],
        ts.times()
            .iter()
            .zip(ts.values())
            .map(|(&t, &x)| vec![format_float(t), format_float(x)]),
    )
}

pub fn write_detrend(path: &Path, ts: &TimeSeries, d: &DetrendResult) -> Result<()> {
    write_rows(
        path,
        &["t", "x", "trend", "residual"],
        (0..ts.len()).map(|k| {
            vec![
                format_float(ts.times()[k]),
                format_float(ts.values()[k]),
                format_float(d.trend[k]),
                format_float(d.residual[k]),
            ]
        }),
    )
}

pub const TRACK_COLUMNS: [&str; 8] = [
    "t_center",
    "kappa_acf",
    "kappa_u",
    "c_emp",
    "n2",
    "c_emp2",
    "gamma",
    "sigma2_emp",
];

/// One row per window; failed windows keep their `t_center` and leave the rest empty.
pub fn write_track(path: &Path, track: &IndicatorTrack) -> Result<()> {
    let inds = [
        Indicator::KappaAcf,
        Indicator::KappaU,
        Indicator::CEmp,
        Indicator::N2,
        Indicator::CEmp2,
        Indicator::Gamma,
        Indicator::Sigma2Emp,
    ];
    write_rows(
        path,
        &TRACK_COLUMNS,
        track.windows.iter().map(|w| {
            let mut row = vec![format_float(w.t_center)];
            let ok = w.outcome.as_ref().ok();
            row.extend(inds.iter().map(|i| format_opt(ok.and_then(|v| i.value(v)))));
            row
        }),
    )
}

pub fn write_surface(path: &Path, s: &PotentialSurface) -> Result<()> {
    let rows = s.columns.iter().flat_map(|c| {
        s.state_grid.iter().enumerate().map(move |(i, &x)| {
            let (u, dev) = match &c.profile {
                Some(p) => (p.u[i], p.deviation[i]),
                None => (None, None),
            };
            vec![
                format_float(c.t_center),
                format_float(x),
                format_opt(u),
                format_opt(dev),
                (c.supported[i] && u.is_some()).to_string(),
            ]
        })
    });
    write_rows(path, &["t", "x", "u_emp", "parabola_dev", "supported"], rows)
}

pub fn write_histograms(path: &Path, reports: &[SurrogateReport]) -> Result<()> {
    let rows = reports.iter().flat_map(|r| {
        r.surrogate_values
            .iter()
            .map(move |v| vec![r.indicator.name().to_string(), format_opt(*v)])
    });
    write_rows(path, &["indicator", "value"], rows)
}

pub fn write_summary(path: &Path, reports: &[SurrogateReport]) -> Result<()> {
    write_rows(
        path,
        &["indicator", "observed_mean", "percentile"],
        reports.iter().map(|r| {
            vec![
                r.indicator.name().to_string(),
                format_opt(r.observed),
                format_opt(r.percentile),
            ]
        }),
    )
}

/// Percentile matrix: rows are detrending bandwidth fractions, columns window fractions.
pub fn write_grid(path: &Path, grid: &SensitivityGrid, indicator: Indicator) -> Result<()> {
    let m = grid
        .matrix(indicator)
        .ok_or_else(|| Error::Parse(format!("indicator {indicator} not in grid")))?;
    let mut headers = vec!["bandwidth_fraction".to_string()];
    headers.extend(grid.window_fractions.iter().map(|&w| format_float(w)));
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    write_rows(
        path,
        &header_refs,
        grid.bandwidth_fractions.iter().zip(m).map(|(&b, row)| {
            let mut r = vec![format_float(b)];
            r.extend(row.iter().map(|v| format_opt(*v)));
            r
        }),
    )
}

/// Contour segments at every standard level, in log2 axis coordinates.
pub fn write_contours(path: &Path, grid: &SensitivityGrid) -> Result<()> {
    let mut rows = Vec::new();
    for &ind in &grid.indicators {
        for &level in &CONTOUR_LEVELS {
            for s in contour_segments(grid, ind, level) {
                rows.push(vec![
                    ind.name().to_string(),
                    format_float(level),
                    format_float(s.from.0),
                    format_float(s.from.1),
                    format_float(s.to.0),
                    format_float(s.to.1),
                ]);
            }
        }
    }
    write_rows(
        path,
        &["indicator", "level", "log2_window_0", "log2_bandwidth_0", "log2_window_1", "log2_bandwidth_1"],
        rows,
    )
}

pub fn write_fp_sweep(path: &Path, sols: &[(FpSolution, f64)]) -> Result<()> {
    write_rows(
        path,
        &["mu", "sigma", "c", "mean", "variance", "skewness", "ode_residual"],
        sols.iter().map(|(s, r)| {
            vec![
                format_float(s.mu),
                format_float(s.sigma),
                format_float(s.c),
                format_float(s.mean),
                format_float(s.variance),
                format_float(s.skewness),
                format_float(*r),
            ]
        }),
    )
}

/// Long-format densities labelled by a parameter value.
pub fn write_densities(path: &Path, label: &str, dens: &[(f64, &Density)]) -> Result<()> {
    let rows = dens.iter().flat_map(|(v, d)| {
        d.grid
            .iter()
            .zip(&d.p)
            .map(move |(&x, &p)| vec![format_float(*v), format_float(x), format_float(p)])
    });
    write_rows(path, &[label, "x", "p"], rows)
}

pub fn write_table(path: &Path, headers: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_rows(
        path,
        headers,
        rows.iter().map(|r| r.iter().map(|&v| format_float(v)).collect()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0, -0.0, 123456.789, f64::MIN_POSITIVE, 1e-5, 9.99e15] {
            let s = format_float(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {s}");
        }
        assert_eq!(format_opt(None), "");
        assert_eq!(parse_opt("").unwrap(), None);
    }
}
