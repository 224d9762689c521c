use std::fs;
use std::path::{Path, PathBuf};

use crate::dynamics::{
    conditional_ensemble, fp_ode_residual, simulate_linear, simulate_snf, stationary_fp_solve,
    EnsembleParams, FpGrid, SnfParams,
};
use crate::error::{invalid, Error, Result};
use crate::estimators::kde::linspace;
use crate::estimators::{indicator_track, surface_from_track, track_drift_ratio, DriftRatio, Indicator, IndicatorTrack};
use crate::pipeline::config::{Mode, Model, RunConfig};
use crate::pipeline::csvio::{self, format_float, format_opt};
use crate::pipeline::ingest::{ingest, Ingested};
use crate::pipeline::manifest::Manifest;
use crate::pipeline::svg;
use crate::series::TimeSeries;
use crate::significance::{sensitivity_scan, surrogate_test, ScanConfig, SurrogateConfig, SurrogateReport};

pub const MANIFEST_FILE: &str = "manifest.txt";

/// Files written by a successful run, manifest last.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub artifacts: Vec<PathBuf>,
    pub manifest: Manifest,
}

struct Artifacts {
    dir: PathBuf,
    svg: bool,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    fn svg(&mut self, name: &str, body: impl FnOnce() -> String) -> Result<()> {
        if self.svg {
            let p = self.path(name);
            fs::write(p, body())?;
        }
        Ok(())
    }

    fn discard(&self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
    }
}

/// Executes a configured run. On failure every artifact written so far is removed.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    fs::create_dir_all(&config.out_dir)?;
    let mut art = Artifacts {
        dir: config.out_dir.clone(),
        svg: config.svg,
        written: Vec::new(),
    };
    let mut manifest = config.to_manifest();
    let result = dispatch(config, &mut art, &mut manifest).and_then(|()| {
        let p = art.path(MANIFEST_FILE);
        manifest.write(&p)
    });
    match result {
        Ok(()) => Ok(RunOutcome {
            artifacts: art.written,
            manifest,
        }),
        Err(e) => {
            art.discard();
            Err(e)
        }
    }
}

/// Re-executes the run described by a manifest file.
pub fn rerun_manifest(path: &Path, out_dir: Option<&Path>) -> Result<RunOutcome> {
    let mut config = RunConfig::from_manifest(&Manifest::read(path)?)?;
    if let Some(d) = out_dir {
        config.out_dir = d.to_path_buf();
    }
    run(&config)
}

fn dispatch(c: &RunConfig, art: &mut Artifacts, m: &mut Manifest) -> Result<()> {
    match c.mode {
        Mode::Simulate => simulate(c, art, m),
        Mode::Analyze => analyze(c, art, m),
        Mode::Surrogate => surrogate(c, art, m),
        Mode::Scan => scan(c, art, m),
        Mode::FpSolve => fpsolve(c, art),
        Mode::Ensemble => ensemble(c, art),
    }
}

fn load_input(c: &RunConfig, m: &mut Manifest) -> Result<TimeSeries> {
    let spec = c
        .input
        .as_ref()
        .ok_or_else(|| invalid("input", format!("mode '{}' needs an input record", c.mode.name())))?;
    let Ingested { series, provenance } = ingest(spec)?;
    m.set("provenance.raw_rows", provenance.raw_rows);
    m.set("provenance.dropped_rows", provenance.dropped_rows);
    m.set("provenance.cropped_rows", provenance.cropped_rows);
    m.set("provenance.resample_dt", format_float(provenance.resample_dt));
    m.set("provenance.output_len", provenance.output_len);
    m.set("provenance.interpolated", provenance.interpolated);
    m.set("provenance.delimiter", (provenance.delimiter as char).escape_default());
    Ok(series)
}

fn simulate(c: &RunConfig, art: &mut Artifacts, m: &mut Manifest) -> Result<()> {
    let s = &c.simulate;
    let ts = match s.model {
        Model::Snf => simulate_snf(&SnfParams {
            mu0: s.mu0,
            epsilon: s.epsilon,
            sigma: s.sigma,
            dt: s.dt,
            n_max: s.n,
            x0: s.x0,
            escape_level: s.escape_level,
            seed: c.seed,
        })?,
        Model::Linear => simulate_linear(s.kappa, s.sigma, s.dt, s.n, c.seed)?,
    };
    m.set("result.length", ts.len());
    m.set(
        "result.censored_index",
        ts.censored().map(|x| x.index.to_string()).unwrap_or_else(|| "none".into()),
    );
    let p = art.path("series.csv");
    csvio::write_series(&p, &ts)?;
    art.svg("series.svg", || {
        let pts = ts.times().iter().zip(ts.values()).map(|(&t, &x)| (t, Some(x))).collect();
        svg::line_plot("simulated series", "t", "x", &[("x", pts)])
    })
}

fn track_svg(track: &IndicatorTrack, indicators: &[Indicator]) -> String {
    let series: Vec<(&str, Vec<(f64, Option<f64>)>)> = indicators
        .iter()
        .map(|&i| {
            let pts = track
                .windows
                .iter()
                .zip(track.values(i))
                .map(|(w, v)| (w.t_center, v))
                .collect();
            (i.name(), pts)
        })
        .collect();
    svg::line_plot("indicator track", "window center", "value", &series)
}

fn analyze(c: &RunConfig, art: &mut Artifacts, m: &mut Manifest) -> Result<()> {
    let ts = load_input(c, m)?;
    let track = indicator_track(&ts, &c.track)?;
    m.set("result.window_len", track.window_len);
    m.set("result.step", track.step);
    m.set("result.windows", track.windows.len());
    m.set("result.failed_windows", track.windows.iter().filter(|w| w.outcome.is_err()).count());
    if let Ok(DriftRatio::Ratio { ratio, quadratic }) = track_drift_ratio(&track) {
        m.set("result.drift_ratio", format_float(ratio));
        m.set("result.quadratic_proxy", format_float(quadratic));
    }
    csvio::write_detrend(&art.path("detrend.csv"), &ts, &track.detrend)?;
    csvio::write_track(&art.path("track.csv"), &track)?;
    let surface = surface_from_track(&track, &c.track);
    csvio::write_surface(&art.path("surface.csv"), &surface)?;
    art.svg("track_nonlinear.svg", || track_svg(&track, &Indicator::NONLINEAR))?;
    art.svg("track_kappa.svg", || track_svg(&track, &[Indicator::KappaAcf, Indicator::Sigma2Emp]))?;
    art.svg("surface.svg", || {
        let z: Vec<Vec<Option<f64>>> = (0..surface.state_grid.len())
            .map(|i| {
                surface
                    .columns
                    .iter()
                    .map(|col| col.profile.as_ref().and_then(|p| p.deviation[i]))
                    .collect()
            })
            .collect();
        svg::heatmap(
            "potential deviation from parabola",
            "window center",
            "detrended state",
            &surface.time_centers,
            &surface.state_grid,
            &z,
        )
    })
}

fn surrogate_config(c: &RunConfig) -> SurrogateConfig {
    SurrogateConfig {
        track: c.track,
        indicators: c.indicators.clone(),
        n_surrogates: c.n_surrogates,
        seed: c.seed,
        statistic: c.statistic,
    }
}

fn histogram_svg(r: &SurrogateReport) -> String {
    let vals: Vec<f64> = r.surrogate_values.iter().flatten().copied().collect();
    let (lo, hi) = vals
        .iter()
        .chain(r.observed.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let bins = 25;
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0.0; bins];
    for v in &vals {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1.0;
    }
    let mut steps = Vec::new();
    for (k, &n) in counts.iter().enumerate() {
        steps.push((lo + k as f64 * width, Some(n)));
        steps.push((lo + (k + 1) as f64 * width, Some(n)));
    }
    let mut series = vec![("surrogates", steps)];
    if let Some(o) = r.observed {
        let top = counts.iter().cloned().fold(0.0, f64::max);
        series.push(("observed", vec![(o, Some(0.0)), (o, Some(top))]));
    }
    let title = format!(
        "{}: percentile {}",
        r.indicator.name(),
        r.percentile.map(|p| format!("{p:.1}")).unwrap_or_else(|| "n/a".into())
    );
    svg::line_plot(&title, r.indicator.name(), "count", &series)
}

fn surrogate(c: &RunConfig, art: &mut Artifacts, m: &mut Manifest) -> Result<()> {
    let ts = load_input(c, m)?;
    let test = surrogate_test(&ts, &surrogate_config(c))?;
    m.set("result.matched_kappa", format_float(test.matched.kappa));
    m.set("result.matched_sigma2", format_float(test.matched.sigma2));
    m.set("result.matched_length", test.matched.length);
    m.set("result.matched_dt", format_float(test.matched.dt));
    m.set("result.config_digest", format!("{:016x}", test.config_digest));
    for r in &test.reports {
        m.set(&format!("result.percentile.{}", r.indicator.name()), format_opt(r.percentile));
    }
    csvio::write_track(&art.path("track.csv"), &test.observed)?;
    csvio::write_histograms(&art.path("surrogate_histograms.csv"), &test.reports)?;
    csvio::write_summary(&art.path("surrogate_summary.csv"), &test.reports)?;
    for r in &test.reports {
        art.svg(&format!("histogram_{}.svg", r.indicator.name()), || histogram_svg(r))?;
    }
    Ok(())
}

fn scan(c: &RunConfig, art: &mut Artifacts, m: &mut Manifest) -> Result<()> {
    let ts = load_input(c, m)?;
    let cfg = ScanConfig {
        window_fractions: c.window_fractions.clone(),
        bandwidth_fractions: c.bandwidth_fractions.clone(),
        surrogate: surrogate_config(c),
    };
    let grid = sensitivity_scan(&ts, &cfg)?;
    for &ind in &grid.indicators {
        csvio::write_grid(&art.path(&format!("scan_{}.csv", ind.name())), &grid, ind)?;
        let beyond = grid.matrix(ind).map(|z| {
            let v: Vec<f64> = z.iter().flatten().flatten().copied().collect();
            v.iter().filter(|&&p| !(5.0..=95.0).contains(&p)).count() as f64 / v.len().max(1) as f64
        });
        m.set(&format!("result.fraction_outside_5_95.{}", ind.name()), format_opt(beyond));
    }
    csvio::write_contours(&art.path("contours.csv"), &grid)?;
    for &ind in &grid.indicators {
        art.svg(&format!("scan_{}.svg", ind.name()), || {
            let xs: Vec<f64> = grid.window_fractions.iter().map(|v| v.log2()).collect();
            let ys: Vec<f64> = grid.bandwidth_fractions.iter().map(|v| v.log2()).collect();
            svg::heatmap(
                &format!("{} percentile", ind.name()),
                "log2 window fraction",
                "log2 detrending bandwidth fraction",
                &xs,
                &ys,
                grid.matrix(ind).expect("indicator in grid"),
            )
        })?;
    }
    Ok(())
}

fn fpsolve(c: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let f = &c.fp;
    if f.mu_steps == 0 {
        return Err(invalid("fp.mu_steps", "must be at least 1"));
    }
    let mus = if f.mu_steps == 1 {
        vec![f.mu_lo]
    } else {
        linspace(f.mu_lo, f.mu_hi, f.mu_steps)
    };
    let sols = mus
        .iter()
        .map(|&mu| {
            let s = stationary_fp_solve(mu, f.sigma, FpGrid::Auto { min_points: f.min_points })?;
            let r = fp_ode_residual(&s);
            Ok((s, r))
        })
        .collect::<Result<Vec<_>>>()?;
    csvio::write_fp_sweep(&art.path("fp_sweep.csv"), &sols)?;
    art.svg("fp_sweep.svg", || {
        let col = |g: &dyn Fn(&crate::dynamics::FpSolution) -> f64| {
            sols.iter().map(|(s, _)| (s.mu, Some(g(s)))).collect::<Vec<_>>()
        };
        svg::line_plot(
            "stationary density moments",
            "mu",
            "value",
            &[
                ("mean", col(&|s| s.mean)),
                ("variance", col(&|s| s.variance)),
                ("skewness", col(&|s| s.skewness)),
                ("c", col(&|s| s.c)),
            ],
        )
    })
}

fn ensemble(c: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let e = &c.ensemble;
    if e.mus.is_empty() {
        return Err(Error::Parse("ensemble.mu list is empty".into()));
    }
    let results = e
        .mus
        .iter()
        .enumerate()
        .map(|(k, &mu)| {
            conditional_ensemble(&EnsembleParams {
                n_realizations: e.n_realizations,
                mu,
                sigma: e.sigma,
                b: e.b,
                dt: e.dt,
                burn_in: e.burn_in,
                horizon: e.horizon,
                seed: c.seed ^ k as u64,
                bins: e.bins,
                thin: e.thin,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<f64>> = e
        .mus
        .iter()
        .zip(&results)
        .map(|(&mu, r)| {
            vec![
                mu,
                e.b,
                r.mean,
                r.variance,
                r.skewness,
                r.errors.mean,
                r.errors.variance,
                r.errors.skewness,
                r.n_replaced as f64,
            ]
        })
        .collect();
    csvio::write_table(
        &art.path("ensemble_summary.csv"),
        &["mu", "b", "mean", "variance", "skewness", "se_mean", "se_variance", "se_skewness", "n_replaced"],
        &rows,
    )?;
    let dens: Vec<(f64, &crate::estimators::Density)> =
        e.mus.iter().zip(&results).map(|(&mu, r)| (mu, &r.density)).collect();
    csvio::write_densities(&art.path("ensemble_density.csv"), "mu", &dens)?;
    art.svg("ensemble_skewness.svg", || {
        let pts = rows.iter().map(|r| (r[0], Some(r[4]))).collect();
        svg::line_plot("conditional skewness", "mu", "skewness", &[("skewness", pts)])
    })
}
