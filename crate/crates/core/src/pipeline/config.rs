use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::estimators::{BandwidthSelector, DetrendBandwidth, Indicator, StepSpec, TrackConfig, WindowSpec};
use crate::pipeline::csvio::format_float;
use crate::pipeline::ingest::{ColumnRef, RecordSpec, Resample, TimeDirection};
use crate::pipeline::manifest::Manifest;
use crate::significance::{log2_spaced, Statistic};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Analyze,
    Surrogate,
    Scan,
    FpSolve,
    Ensemble,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Analyze => "analyze",
            Mode::Surrogate => "surrogate",
            Mode::Scan => "scan",
            Mode::FpSolve => "fpsolve",
            Mode::Ensemble => "ensemble",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Mode::Simulate,
            Mode::Analyze,
            Mode::Surrogate,
            Mode::Scan,
            Mode::FpSolve,
            Mode::Ensemble,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| Error::Parse(format!("unknown mode '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Drifting saddle-node normal form.
    Snf,
    /// Ornstein-Uhlenbeck process.
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSettings {
    pub model: Model,
    pub mu0: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub dt: f64,
    pub n: usize,
    pub x0: f64,
    pub escape_level: f64,
    /// Decay rate of the linear model.
    pub kappa: f64,
}

impl Default for SimulateSettings {
    fn default() -> Self {
        Self {
            model: Model::Snf,
            mu0: 2.0,
            epsilon: 0.01,
            sigma: 1.0,
            dt: 0.1,
            n: 1223,
            x0: 2f64.sqrt(),
            escape_level: -1.0,
            kappa: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpSweepSettings {
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub mu_steps: usize,
    pub sigma: f64,
    pub min_points: usize,
}

impl Default for FpSweepSettings {
    fn default() -> Self {
        Self {
            mu_lo: 0.1,
            mu_hi: 4.0,
            mu_steps: 40,
            sigma: 1.0,
            min_points: crate::dynamics::DEFAULT_MIN_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSettings {
    pub mus: Vec<f64>,
    pub b: f64,
    pub sigma: f64,
    pub n_realizations: usize,
    pub dt: f64,
    pub burn_in: f64,
    pub horizon: f64,
    pub bins: usize,
    pub thin: usize,
}

impl Default for EnsembleSettings {
    fn default() -> Self {
        Self {
            mus: vec![0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0],
            b: 1.0,
            sigma: 1.0,
            n_realizations: 20_000,
            dt: 0.01,
            burn_in: 20.0,
            horizon: 40.0,
            bins: 400,
            thin: 1,
        }
    }
}

/// Everything a run needs; every field is written to the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub out_dir: PathBuf,
    pub svg: bool,
    pub seed: u64,
    pub input: Option<RecordSpec>,
    pub track: TrackConfig,
    pub n_surrogates: usize,
    pub statistic: Statistic,
    pub indicators: Vec<Indicator>,
    pub window_fractions: Vec<f64>,
    pub bandwidth_fractions: Vec<f64>,
    pub simulate: SimulateSettings,
    pub fp: FpSweepSettings,
    pub ensemble: EnsembleSettings,
}

impl RunConfig {
    /// Defaults for a mode. Surrogate and scan runs step windows by an eighth of the window.
    pub fn new(mode: Mode, out_dir: impl Into<PathBuf>) -> Self {
        let step = match mode {
            Mode::Surrogate | Mode::Scan => StepSpec::FractionOfWindow(0.125),
            _ => StepSpec::Samples(1),
        };
        Self {
            mode,
            out_dir: out_dir.into(),
            svg: false,
            seed: 0,
            input: None,
            track: TrackConfig {
                step,
                ..TrackConfig::default()
            },
            n_surrogates: 500,
            statistic: Statistic::Mean,
            indicators: Indicator::NONLINEAR.to_vec(),
            window_fractions: log2_spaced(-3.0, 0.0, 7),
            bandwidth_fractions: log2_spaced(-6.0, -1.0, 7),
            simulate: SimulateSettings::default(),
            fp: FpSweepSettings::default(),
            ensemble: EnsembleSettings::default(),
        }
    }

    pub fn to_manifest(&self) -> Manifest {
        let mut m = Manifest::new();
        m.set("mode", self.mode.name());
        m.set("out_dir", self.out_dir.display());
        m.set("svg", self.svg);
        m.set("seed", self.seed);
        match &self.input {
            Some(r) => {
                m.set("input.path", r.path.display());
                m.set("input.time_col", &r.time_column);
                m.set("input.value_col", &r.value_column);
                m.set(
                    "input.direction",
                    match r.direction {
                        TimeDirection::Forward => "forward",
                        TimeDirection::YearsBeforePresent => "bp",
                    },
                );
                m.set(
                    "input.crop",
                    r.crop
                        .map(|(a, b)| format!("{}:{}", format_float(a), format_float(b)))
                        .unwrap_or_else(|| "none".into()),
                );
                m.set(
                    "input.resample",
                    match r.resample {
                        Resample::Auto => "auto".to_string(),
                        Resample::Fixed(dt) => format_float(dt),
                    },
                );
                m.set("input.drop_missing", r.drop_missing);
            }
            None => m.set("input.path", "none"),
        }
        m.set("track.window", format_window(self.track.window));
        m.set("track.step", format_step(self.track.step));
        m.set("track.detrend", format_detrend(self.track.detrend));
        m.set("track.kde", format_kde(self.track.kde));
        m.set("track.grid_points", self.track.grid_points);
        m.set("surrogate.n", self.n_surrogates);
        m.set("surrogate.statistic", self.statistic.name());
        m.set(
            "surrogate.indicators",
            self.indicators.iter().map(|i| i.name()).collect::<Vec<_>>().join(","),
        );
        m.set("scan.window_fractions", format_list(&self.window_fractions));
        m.set("scan.bandwidth_fractions", format_list(&self.bandwidth_fractions));
        let s = &self.simulate;
        m.set(
            "simulate.model",
            match s.model {
                Model::Snf => "snf",
                Model::Linear => "linear",
            },
        );
        m.set("simulate.mu0", format_float(s.mu0));
        m.set("simulate.epsilon", format_float(s.epsilon));
        m.set("simulate.sigma", format_float(s.sigma));
        m.set("simulate.dt", format_float(s.dt));
        m.set("simulate.n", s.n);
        m.set("simulate.x0", format_float(s.x0));
        m.set("simulate.escape_level", format_float(s.escape_level));
        m.set("simulate.kappa", format_float(s.kappa));
        let f = &self.fp;
        m.set("fp.mu_lo", format_float(f.mu_lo));
        m.set("fp.mu_hi", format_float(f.mu_hi));
        m.set("fp.mu_steps", f.mu_steps);
        m.set("fp.sigma", format_float(f.sigma));
        m.set("fp.min_points", f.min_points);
        let e = &self.ensemble;
        m.set("ensemble.mu", format_list(&e.mus));
        m.set("ensemble.b", format_float(e.b));
        m.set("ensemble.sigma", format_float(e.sigma));
        m.set("ensemble.n", e.n_realizations);
        m.set("ensemble.dt", format_float(e.dt));
        m.set("ensemble.burn_in", format_float(e.burn_in));
        m.set("ensemble.horizon", format_float(e.horizon));
        m.set("ensemble.bins", e.bins);
        m.set("ensemble.thin", e.thin);
        m
    }

    pub fn from_manifest(m: &Manifest) -> Result<Self> {
        let mode: Mode = m.require("mode")?.parse()?;
        let mut c = RunConfig::new(mode, m.require("out_dir")?);
        c.svg = parse_num(m, "svg")?;
        c.seed = parse_num(m, "seed")?;
        let path = m.require("input.path")?;
        c.input = if path == "none" {
            None
        } else {
            Some(RecordSpec {
                path: PathBuf::from(path),
                time_column: ColumnRef::parse(m.require("input.time_col")?),
                value_column: ColumnRef::parse(m.require("input.value_col")?),
                direction: match m.require("input.direction")? {
                    "forward" => TimeDirection::Forward,
                    "bp" => TimeDirection::YearsBeforePresent,
                    d => return Err(Error::Parse(format!("unknown direction '{d}'"))),
                },
                crop: match m.require("input.crop")? {
                    "none" => None,
                    s => Some(parse_crop(s)?),
                },
                resample: match m.require("input.resample")? {
                    "auto" => Resample::Auto,
                    s => Resample::Fixed(parse_f64(s)?),
                },
                drop_missing: parse_num(m, "input.drop_missing")?,
            })
        };
        c.track = TrackConfig {
            window: parse_window(m.require("track.window")?)?,
            step: parse_step(m.require("track.step")?)?,
            detrend: parse_detrend(m.require("track.detrend")?)?,
            kde: parse_kde(m.require("track.kde")?)?,
            grid_points: parse_num(m, "track.grid_points")?,
        };
        c.n_surrogates = parse_num(m, "surrogate.n")?;
        c.statistic = match m.require("surrogate.statistic")? {
            "mean" => Statistic::Mean,
            "median" => Statistic::Median,
            s => return Err(Error::Parse(format!("unknown statistic '{s}'"))),
        };
        c.indicators = parse_indicators(m.require("surrogate.indicators")?)?;
        c.window_fractions = parse_list(m.require("scan.window_fractions")?)?;
        c.bandwidth_fractions = parse_list(m.require("scan.bandwidth_fractions")?)?;
        c.simulate = SimulateSettings {
            model: match m.require("simulate.model")? {
                "snf" => Model::Snf,
                "linear" => Model::Linear,
                s => return Err(Error::Parse(format!("unknown model '{s}'"))),
            },
            mu0: parse_num(m, "simulate.mu0")?,
            epsilon: parse_num(m, "simulate.epsilon")?,
            sigma: parse_num(m, "simulate.sigma")?,
            dt: parse_num(m, "simulate.dt")?,
            n: parse_num(m, "simulate.n")?,
            x0: parse_num(m, "simulate.x0")?,
            escape_level: parse_num(m, "simulate.escape_level")?,
            kappa: parse_num(m, "simulate.kappa")?,
        };
        c.fp = FpSweepSettings {
            mu_lo: parse_num(m, "fp.mu_lo")?,
            mu_hi: parse_num(m, "fp.mu_hi")?,
            mu_steps: parse_num(m, "fp.mu_steps")?,
            sigma: parse_num(m, "fp.sigma")?,
            min_points: parse_num(m, "fp.min_points")?,
        };
        c.ensemble = EnsembleSettings {
            mus: parse_list(m.require("ensemble.mu")?)?,
            b: parse_num(m, "ensemble.b")?,
            sigma: parse_num(m, "ensemble.sigma")?,
            n_realizations: parse_num(m, "ensemble.n")?,
            dt: parse_num(m, "ensemble.dt")?,
            burn_in: parse_num(m, "ensemble.burn_in")?,
            horizon: parse_num(m, "ensemble.horizon")?,
            bins: parse_num(m, "ensemble.bins")?,
            thin: parse_num(m, "ensemble.thin")?,
        };
        Ok(c)
    }
}

fn parse_num<T: FromStr>(m: &Manifest, key: &str) -> Result<T> {
    let v = m.require(key)?;
    v.parse()
        .map_err(|_| Error::Parse(format!("bad value for '{key}': '{v}'")))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: '{s}'")))
}

pub fn format_list(v: &[f64]) -> String {
    v.iter().map(|&x| format_float(x)).collect::<Vec<_>>().join(",")
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(parse_f64).collect()
}

pub fn parse_indicators(s: &str) -> Result<Vec<Indicator>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

/// `A:B` in the record's own time units.
pub fn parse_crop(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("crop must be A:B, got '{s}'")))?;
    Ok((parse_f64(a)?, parse_f64(b)?))
}

pub fn format_window(w: WindowSpec) -> String {
    match w {
        WindowSpec::Fraction(f) => format!("fraction:{}", format_float(f)),
        WindowSpec::Samples(n) => format!("samples:{n}"),
    }
}

/// `fraction:F`, `samples:N`, or a bare number: integers of at least 2 are samples,
/// anything else a fraction of the series length.
pub fn parse_window(s: &str) -> Result<WindowSpec> {
    let s = s.trim();
    if let Some(v) = s.strip_prefix("fraction:") {
        return Ok(WindowSpec::Fraction(parse_f64(v)?));
    }
    if let Some(v) = s.strip_prefix("samples:") {
        return v
            .parse()
            .map(WindowSpec::Samples)
            .map_err(|_| Error::Parse(format!("bad window '{s}'")));
    }
    match s.parse::<usize>() {
        Ok(n) if n >= 2 => Ok(WindowSpec::Samples(n)),
        _ => Ok(WindowSpec::Fraction(parse_f64(s)?)),
    }
}

pub fn format_step(s: StepSpec) -> String {
    match s {
        StepSpec::Samples(n) => format!("samples:{n}"),
        StepSpec::FractionOfWindow(f) => format!("window-fraction:{}", format_float(f)),
    }
}

/// `samples:N`, `window-fraction:F`, `w/K`, or a bare sample count.
pub fn parse_step(s: &str) -> Result<StepSpec> {
    let s = s.trim();
    if let Some(v) = s.strip_prefix("samples:") {
        return v
            .parse()
            .map(StepSpec::Samples)
            .map_err(|_| Error::Parse(format!("bad step '{s}'")));
    }
    if let Some(v) = s.strip_prefix("window-fraction:") {
        return Ok(StepSpec::FractionOfWindow(parse_f64(v)?));
    }
    if let Some(v) = s.strip_prefix("w/") {
        let k = parse_f64(v)?;
        if !(k > 0.0) {
            return Err(invalid("step", format!("bad divisor in '{s}'")));
        }
        return Ok(StepSpec::FractionOfWindow(1.0 / k));
    }
    s.parse()
        .map(StepSpec::Samples)
        .map_err(|_| Error::Parse(format!("bad step '{s}'")))
}

pub fn format_detrend(d: DetrendBandwidth) -> String {
    match d {
        DetrendBandwidth::FractionOfLength(f) => format!("fraction:{}", format_float(f)),
        DetrendBandwidth::Samples(s) => format!("samples:{}", format_float(s)),
        DetrendBandwidth::Time(t) => format!("time:{}", format_float(t)),
    }
}

/// `fraction:F`, `samples:S`, `time:T`, or a bare number: below 1 a fraction of
/// the series length, otherwise samples.
pub fn parse_detrend(s: &str) -> Result<DetrendBandwidth> {
    let s = s.trim();
    if let Some(v) = s.strip_prefix("fraction:") {
        return Ok(DetrendBandwidth::FractionOfLength(parse_f64(v)?));
    }
    if let Some(v) = s.strip_prefix("samples:") {
        return Ok(DetrendBandwidth::Samples(parse_f64(v)?));
    }
    if let Some(v) = s.strip_prefix("time:") {
        return Ok(DetrendBandwidth::Time(parse_f64(v)?));
    }
    let v = parse_f64(s)?;
    Ok(if v < 1.0 {
        DetrendBandwidth::FractionOfLength(v)
    } else {
        DetrendBandwidth::Samples(v)
    })
}

pub fn format_kde(k: BandwidthSelector) -> String {
    match k {
        BandwidthSelector::Isj => "isj".into(),
        BandwidthSelector::Silverman => "silverman".into(),
        BandwidthSelector::Fixed(h) => format!("fixed:{}", format_float(h)),
    }
}

/// `isj`, `silverman`, `fixed:H`, or a bare bandwidth.
pub fn parse_kde(s: &str) -> Result<BandwidthSelector> {
    let s = s.trim();
    match s {
        "isj" => Ok(BandwidthSelector::Isj),
        "silverman" => Ok(BandwidthSelector::Silverman),
        _ => {
            let v = s.strip_prefix("fixed:").unwrap_or(s);
            Ok(BandwidthSelector::Fixed(parse_f64(v)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_mode_round_trips_through_the_manifest() {
        for mode in ["simulate", "analyze", "surrogate", "scan", "fpsolve", "ensemble"] {
            let mut c = RunConfig::new(mode.parse().unwrap(), "/tmp/out");
            c.seed = 77;
            c.track.kde = BandwidthSelector::Fixed(0.1 + 0.2);
            let mut r = RecordSpec::new("/data/rec.csv");
            r.crop = Some((1.5e4, 3.0e3));
            r.direction = TimeDirection::YearsBeforePresent;
            r.time_column = ColumnRef::Name("age".into());
            c.input = Some(r);
            let back = RunConfig::from_manifest(&Manifest::parse(&c.to_manifest().render()).unwrap()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn shorthand_parsing() {
        assert_eq!(parse_window("0.5").unwrap(), WindowSpec::Fraction(0.5));
        assert_eq!(parse_window("400").unwrap(), WindowSpec::Samples(400));
        assert_eq!(parse_window("1").unwrap(), WindowSpec::Fraction(1.0));
        assert_eq!(parse_step("w/8").unwrap(), StepSpec::FractionOfWindow(0.125));
        assert_eq!(parse_step("3").unwrap(), StepSpec::Samples(3));
        assert_eq!(parse_detrend("0.05").unwrap(), DetrendBandwidth::FractionOfLength(0.05));
        assert_eq!(parse_detrend("25").unwrap(), DetrendBandwidth::Samples(25.0));
        assert_eq!(parse_detrend("time:2").unwrap(), DetrendBandwidth::Time(2.0));
        assert_eq!(parse_kde("0.3").unwrap(), BandwidthSelector::Fixed(0.3));
        assert_eq!(parse_crop("10:-5").unwrap(), (10.0, -5.0));
        assert!(parse_crop("10").is_err());
    }
}
