use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::PathBuf;

use crate::error::{invalid, Error, Result};
use crate::series::TimeSeries;

/// Column selected by header name or zero-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl ColumnRef {
    /// Digits are read as a position unless a header of that name exists at lookup time.
    pub fn parse(s: &str) -> ColumnRef {
        match s.trim().parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.trim().to_string()),
        }
    }

    fn resolve(&self, headers: &[String]) -> Result<usize> {
        match self {
            ColumnRef::Name(n) => headers
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::Parse(format!("no column named '{n}' in {headers:?}"))),
            ColumnRef::Index(i) => {
                if let Some(p) = headers.iter().position(|h| *h == i.to_string()) {
                    return Ok(p);
                }
                if *i < headers.len() {
                    Ok(*i)
                } else {
                    Err(Error::Parse(format!("column index {i} out of range ({} columns)", headers.len())))
                }
            }
        }
    }
}

impl std::fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnRef::Name(n) => f.write_str(n),
            ColumnRef::Index(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDirection {
    Forward,
    /// Years before present; larger values are older.
    YearsBeforePresent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resample {
    /// Median spacing of the cropped raw record.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordSpec {
    pub path: PathBuf,
    pub time_column: ColumnRef,
    pub value_column: ColumnRef,
    pub direction: TimeDirection,
    /// Inclusive range in the file's own time units.
    pub crop: Option<(f64, f64)>,
    pub resample: Resample,
    /// Skip rows with missing values instead of failing.
    pub drop_missing: bool,
}

impl RecordSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            time_column: ColumnRef::Index(0),
            value_column: ColumnRef::Index(1),
            direction: TimeDirection::Forward,
            crop: None,
            resample: Resample::Auto,
            drop_missing: false,
        }
    }
}

/// Counts describing how the analysis series was derived from the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub raw_rows: usize,
    pub dropped_rows: usize,
    pub cropped_rows: usize,
    pub resample_dt: f64,
    pub output_len: usize,
    /// Output nodes that do not coincide with a raw timestamp.
    pub interpolated: usize,
    pub delimiter: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub series: TimeSeries,
    pub provenance: Provenance,
}

/// Picks the most frequent of comma, tab and semicolon in the header line.
pub fn detect_delimiter(header: &str) -> u8 {
    [b',', b'\t', b';']
        .into_iter()
        .max_by_key(|&d| (header.bytes().filter(|&b| b == d).count(), d == b','))
        .unwrap()
}

fn parse_field(s: &str) -> Option<f64> {
    let t = s.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("nan") || t.eq_ignore_ascii_case("na") {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads, orients, crops and resamples a record onto a uniform grid.
pub fn ingest(spec: &RecordSpec) -> Result<Ingested> {
    let file = File::open(&spec.path).map_err(|e| Error::Io(format!("{}: {e}", spec.path.display())))?;
    let mut first = String::new();
    BufReader::new(file).read_line(&mut first)?;
    let delimiter = detect_delimiter(&first);

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(&spec.path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let tc = spec.time_column.resolve(&headers)?;
    let vc = spec.value_column.resolve(&headers)?;

    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    let mut raw_rows = 0;
    let mut dropped = 0;
    let mut missing = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        raw_rows += 1;
        let t = rec.get(tc).and_then(parse_field);
        let v = rec.get(vc).and_then(parse_field);
        match (t, v) {
            (Some(t), Some(v)) => rows.push((line, t, v)),
            _ if spec.drop_missing => dropped += 1,
            _ => missing.push(line),
        }
    }
    if !missing.is_empty() {
        return Err(Error::InvalidSeries(format!(
            "missing or non-numeric values on lines {missing:?}"
        )));
    }

    if let Some((a, b)) = spec.crop {
        let (lo, hi) = (a.min(b), a.max(b));
        rows.retain(|r| r.1 >= lo && r.1 <= hi);
    }
    if spec.direction == TimeDirection::YearsBeforePresent {
        for r in &mut rows {
            r.1 = -r.1;
        }
    }
    if rows.len() >= 2 && rows[0].1 > rows[rows.len() - 1].1 {
        rows.reverse();
    }
    let bad: Vec<usize> = rows
        .windows(2)
        .filter(|w| !(w[1].1 > w[0].1))
        .map(|w| w[1].0)
        .collect();
    if !bad.is_empty() {
        return Err(Error::InvalidSeries(format!(
            "timestamps not strictly monotone at lines {bad:?}"
        )));
    }
    if rows.len() < 3 {
        return Err(Error::TooFewSamples {
            required: 3,
            actual: rows.len(),
        });
    }
    let times: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let values: Vec<f64> = rows.iter().map(|r| r.2).collect();

    let dt = match spec.resample {
        Resample::Auto => {
            let mut gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
            gaps.sort_by(f64::total_cmp);
            let m = gaps.len() / 2;
            if gaps.len() % 2 == 1 {
                gaps[m]
            } else {
                0.5 * (gaps[m - 1] + gaps[m])
            }
        }
        Resample::Fixed(dt) => {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(invalid("resample_dt", format!("must be positive, got {dt}")));
            }
            dt
        }
    };
    let (resampled, interpolated) = resample_linear(&times, &values, dt);
    let output_len = resampled.len();
    let series = TimeSeries::uniform(times[0], dt, resampled)?;
    Ok(Ingested {
        series,
        provenance: Provenance {
            raw_rows,
            dropped_rows: dropped,
            cropped_rows: rows.len(),
            resample_dt: dt,
            output_len,
            interpolated,
            delimiter,
        },
    })
}

/// Linear interpolation onto `t0 + k dt`; nodes within `1e-9 dt` of a raw time take the raw value.
pub fn resample_linear(times: &[f64], values: &[f64], dt: f64) -> (Vec<f64>, usize) {
    let t0 = times[0];
    let last = times[times.len() - 1];
    let tol = 1e-9 * dt;
    let n = ((last - t0) / dt + 1e-9).floor() as usize + 1;
    let mut out = Vec::with_capacity(n);
    let mut interpolated = 0;
    let mut j = 0;
    for k in 0..n {
        let t = t0 + k as f64 * dt;
        while j + 1 < times.len() && times[j + 1] <= t + tol {
            j += 1;
        }
        if (times[j] - t).abs() <= tol {
            out.push(values[j]);
        } else if j + 1 < times.len() && (times[j + 1] - t).abs() <= tol {
            out.push(values[j + 1]);
        } else if j + 1 < times.len() {
            let w = (t - times[j]) / (times[j + 1] - times[j]);
            let w = w.clamp(0.0, 1.0);
            out.push(values[j] + w * (values[j + 1] - values[j]));
            interpolated += 1;
        } else {
            out.push(values[j]);
            interpolated += 1;
        }
    }
    (out, interpolated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn detects_delimiters() {
        assert_eq!(detect_delimiter("a,b,c"), b',');
        assert_eq!(detect_delimiter("a\tb\tc"), b'\t');
        assert_eq!(detect_delimiter("a;b;c"), b';');
        assert_eq!(detect_delimiter("single"), b',');
    }

    #[test]
    fn uniform_input_is_reproduced_exactly() {
        let f = write("time;value\n0;0.1\n0.5;0.7\n1;-0.3\n1.5;2.25\n");
        let mut spec = RecordSpec::new(f.path());
        spec.time_column = ColumnRef::Name("time".into());
        spec.value_column = ColumnRef::Name("value".into());
        let r = ingest(&spec).unwrap();
        assert_eq!(r.series.values(), &[0.1, 0.7, -0.3, 2.25]);
        assert_eq!(r.provenance.interpolated, 0);
        assert_eq!(r.provenance.delimiter, b';');
    }

    #[test]
    fn years_before_present_run_forward() {
        let f = write("age\td\n3000\t1\n2000\t2\n1000\t3\n0\t4\n");
        let mut spec = RecordSpec::new(f.path());
        spec.direction = TimeDirection::YearsBeforePresent;
        spec.crop = Some((2500.0, 0.0));
        let r = ingest(&spec).unwrap();
        assert_eq!(r.series.times(), &[-2000.0, -1000.0, 0.0]);
        assert_eq!(r.series.values(), &[2.0, 3.0, 4.0]);
    }

    #[test]
    fn uneven_record_is_interpolated_within_range() {
        let f = write("t,x\n0,0\n1,10\n3,-2\n3.5,4\n7,1\n");
        let r = ingest(&RecordSpec::new(f.path())).unwrap();
        let dt = r.series.uniform_dt().unwrap();
        assert!((dt - 1.5).abs() < 1e-12);
        assert!(r.series.values().iter().all(|&v| (-2.0..=10.0).contains(&v)));
        assert!(r.provenance.interpolated > 0);
    }

    #[test]
    fn missing_values_need_the_drop_flag() {
        let f = write("t,x\n0,1\n1,\n2,3\n3,4\n");
        let mut spec = RecordSpec::new(f.path());
        assert!(matches!(ingest(&spec), Err(Error::InvalidSeries(m)) if m.contains("[3]")));
        spec.drop_missing = true;
        let r = ingest(&spec).unwrap();
        assert_eq!(r.provenance.dropped_rows, 1);
    }

    #[test]
    fn non_monotone_rows_are_listed() {
        let f = write("t,x\n0,1\n2,1\n1,1\n3,1\n");
        let e = ingest(&RecordSpec::new(f.path())).unwrap_err();
        assert!(matches!(e, Error::InvalidSeries(m) if m.contains("[4]")));
    }
}
