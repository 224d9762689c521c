use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tipwell::pipeline::config::{
    parse_crop, parse_detrend, parse_indicators, parse_kde, parse_list, parse_step, parse_window,
};
use tipwell::pipeline::{rerun_manifest, run, ColumnRef, Mode, Model, RecordSpec, Resample, RunConfig, TimeDirection};
use tipwell::significance::Statistic;
use tipwell::Result;

#[derive(Parser)]
#[command(name = "tipwell", version, about = "Nonlinear early-warning indicators for noisy time series")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic series (normal form or linear).
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Detrend, estimate the indicator track and the potential surface.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        track: TrackArgs,
    },
    /// Compare indicator means with matched linear surrogates.
    Surrogate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        track: TrackArgs,
        #[command(flatten)]
        surr: SurrogateArgs,
    },
    /// Surrogate percentiles over window and detrending bandwidth fractions.
    Scan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        track: TrackArgs,
        #[command(flatten)]
        surr: SurrogateArgs,
        /// Comma-separated window fractions.
        #[arg(long)]
        window_fractions: Option<String>,
        /// Comma-separated detrending bandwidth fractions.
        #[arg(long)]
        bandwidth_fractions: Option<String>,
    },
    /// Stationary density moments and escape flux over a range of mu.
    Fpsolve {
        #[command(flatten)]
        common: Common,
        /// Range A:B of mu.
        #[arg(long)]
        mu_range: Option<String>,
        #[arg(long)]
        mu_steps: Option<usize>,
        #[arg(long)]
        sigma: Option<f64>,
        /// Minimum number of grid points.
        #[arg(long)]
        min_points: Option<usize>,
    },
    /// Density of realizations that have not escaped, for a list of mu.
    Ensemble {
        #[command(flatten)]
        common: Common,
        /// Comma-separated values of mu.
        #[arg(long)]
        mu: Option<String>,
        /// Kill depth below the unstable branch.
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        realizations: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        burn_in: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        thin: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write SVG quick-looks.
    #[arg(long)]
    svg: bool,
    /// Repeat the run recorded in a manifest; other options except --out are ignored.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    /// Delimited text file with a header row.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Time column name or zero-based index.
    #[arg(long, default_value = "0")]
    time_col: String,
    /// Value column name or zero-based index.
    #[arg(long, default_value = "1")]
    value_col: String,
    /// Time column is in years before present.
    #[arg(long)]
    bp: bool,
    /// Keep rows with time in A:B (file units).
    #[arg(long)]
    crop: Option<String>,
    /// Uniform spacing after resampling; defaults to the median raw spacing.
    #[arg(long)]
    resample_dt: Option<f64>,
    /// Skip rows with missing values.
    #[arg(long)]
    drop_missing: bool,
}

#[derive(Args)]
struct TrackArgs {
    /// Window: fraction of the series (0.5) or samples (400).
    #[arg(long)]
    window: Option<String>,
    /// Window step: samples (1) or a fraction of the window (w/8).
    #[arg(long)]
    step: Option<String>,
    /// Detrending bandwidth: fraction of the length below 1, samples otherwise, or time:T.
    #[arg(long)]
    bandwidth: Option<String>,
    /// Kernel bandwidth: isj, silverman or a number.
    #[arg(long)]
    kde_bandwidth: Option<String>,
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Args)]
struct SurrogateArgs {
    #[arg(long)]
    surrogates: Option<usize>,
    /// Comma-separated indicator names.
    #[arg(long)]
    indicators: Option<String>,
    /// Use the median over windows instead of the mean.
    #[arg(long)]
    median: bool,
}

#[derive(Args)]
struct SimArgs {
    /// snf or linear.
    #[arg(long, default_value = "snf")]
    model: String,
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Initial state; defaults to sqrt(mu0).
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    escape_level: Option<f64>,
    /// Decay rate of the linear model.
    #[arg(long)]
    kappa: Option<f64>,
}

fn base(mode: Mode, c: &Common) -> RunConfig {
    let mut cfg = RunConfig::new(mode, &c.out);
    cfg.seed = c.seed;
    cfg.svg = c.svg;
    cfg
}

fn apply_input(cfg: &mut RunConfig, a: &InputArgs) -> Result<()> {
    if let Some(path) = &a.input {
        cfg.input = Some(RecordSpec {
            path: path.clone(),
            time_column: ColumnRef::parse(&a.time_col),
            value_column: ColumnRef::parse(&a.value_col),
            direction: if a.bp {
                TimeDirection::YearsBeforePresent
            } else {
                TimeDirection::Forward
            },
            crop: a.crop.as_deref().map(parse_crop).transpose()?,
            resample: a.resample_dt.map(Resample::Fixed).unwrap_or(Resample::Auto),
            drop_missing: a.drop_missing,
        });
    }
    Ok(())
}

fn apply_track(cfg: &mut RunConfig, a: &TrackArgs) -> Result<()> {
    if let Some(w) = &a.window {
        cfg.track.window = parse_window(w)?;
    }
    if let Some(s) = &a.step {
        cfg.track.step = parse_step(s)?;
    }
    if let Some(b) = &a.bandwidth {
        cfg.track.detrend = parse_detrend(b)?;
    }
    if let Some(k) = &a.kde_bandwidth {
        cfg.track.kde = parse_kde(k)?;
    }
    if let Some(g) = a.grid_points {
        cfg.track.grid_points = g;
    }
    Ok(())
}

fn apply_surrogate(cfg: &mut RunConfig, a: &SurrogateArgs) -> Result<()> {
    if let Some(n) = a.surrogates {
        cfg.n_surrogates = n;
    }
    if let Some(i) = &a.indicators {
        cfg.indicators = parse_indicators(i)?;
    }
    if a.median {
        cfg.statistic = Statistic::Median;
    }
    Ok(())
}

fn build(cmd: &Cmd) -> Result<(RunConfig, &Common)> {
    Ok(match cmd {
        Cmd::Simulate { common, sim } => {
            let mut c = base(Mode::Simulate, common);
            let s = &mut c.simulate;
            s.model = match sim.model.as_str() {
                "snf" => Model::Snf,
                "linear" => Model::Linear,
                m => return Err(tipwell::Error::Parse(format!("unknown model '{m}'"))),
            };
            if let Some(v) = sim.mu0 {
                s.mu0 = v;
            }
            s.x0 = sim.x0.unwrap_or(s.mu0.max(0.0).sqrt());
            if let Some(v) = sim.epsilon {
                s.epsilon = v;
            }
            if let Some(v) = sim.sigma {
                s.sigma = v;
            }
            if let Some(v) = sim.dt {
                s.dt = v;
            }
            if let Some(v) = sim.n {
                s.n = v;
            }
            if let Some(v) = sim.escape_level {
                s.escape_level = v;
            }
            if let Some(v) = sim.kappa {
                s.kappa = v;
            }
            (c, common)
        }
        Cmd::Analyze { common, input, track } => {
            let mut c = base(Mode::Analyze, common);
            apply_input(&mut c, input)?;
            apply_track(&mut c, track)?;
            (c, common)
        }
        Cmd::Surrogate { common, input, track, surr } => {
            let mut c = base(Mode::Surrogate, common);
            apply_input(&mut c, input)?;
            apply_track(&mut c, track)?;
            apply_surrogate(&mut c, surr)?;
            (c, common)
        }
        Cmd::Scan {
            common,
            input,
            track,
            surr,
            window_fractions,
            bandwidth_fractions,
        } => {
            let mut c = base(Mode::Scan, common);
            apply_input(&mut c, input)?;
            apply_track(&mut c, track)?;
            apply_surrogate(&mut c, surr)?;
            if let Some(w) = window_fractions {
                c.window_fractions = parse_list(w)?;
            }
            if let Some(b) = bandwidth_fractions {
                c.bandwidth_fractions = parse_list(b)?;
            }
            (c, common)
        }
        Cmd::Fpsolve {
            common,
            mu_range,
            mu_steps,
            sigma,
            min_points,
        } => {
            let mut c = base(Mode::FpSolve, common);
            if let Some(r) = mu_range {
                (c.fp.mu_lo, c.fp.mu_hi) = parse_crop(r)?;
            }
            if let Some(v) = mu_steps {
                c.fp.mu_steps = *v;
            }
            if let Some(v) = sigma {
                c.fp.sigma = *v;
            }
            if let Some(v) = min_points {
                c.fp.min_points = *v;
            }
            (c, common)
        }
        Cmd::Ensemble {
            common,
            mu,
            b,
            sigma,
            realizations,
            dt,
            burn_in,
            horizon,
            bins,
            thin,
        } => {
            let mut c = base(Mode::Ensemble, common);
            let e = &mut c.ensemble;
            if let Some(m) = mu {
                e.mus = parse_list(m)?;
            }
            e.b = b.unwrap_or(e.b);
            e.sigma = sigma.unwrap_or(e.sigma);
            e.n_realizations = realizations.unwrap_or(e.n_realizations);
            e.dt = dt.unwrap_or(e.dt);
            e.burn_in = burn_in.unwrap_or(e.burn_in);
            e.horizon = horizon.unwrap_or(e.horizon);
            e.bins = bins.unwrap_or(e.bins);
            e.thin = thin.unwrap_or(e.thin);
            (c, common)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = build(&cli.cmd).and_then(|(cfg, common)| match &common.manifest {
        Some(m) => rerun_manifest(m, Some(&common.out)),
        None => run(&cfg),
    });
    match outcome {
        Ok(o) => {
            for p in &o.artifacts {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
