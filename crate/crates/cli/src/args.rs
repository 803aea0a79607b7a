use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use loewner_lab::report::OutputFormat;

use crate::settings::{Level, Settings};

/// Numerical laboratory for chordal Loewner evolution and SLE_κ.
#[derive(Debug, Parser)]
#[command(name = "loewner-lab", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Master seed (falls back to $LOEWNER_LAB_SEED, then 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tmax: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long = "n-max", global = true)]
    pub n_max: Option<u32>,
    /// Output file; without it data goes to stdout and the summary to stderr.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file with the same field names as the flags; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace γ(t_k) of a Brownian chain: (t, re, im).
    Trace {
        /// Height of the trace point f̂_t(i·y_min) (default √dt/8).
        #[arg(long, allow_negative_numbers = true)]
        y_min: Option<f64>,
    },
    /// Tip spectrum table, exponent points, or F_tip curves for a κ list.
    Spectrum {
        /// Emit one F_tip curve per κ (comma separated), as in the tip-spectrum figure.
        #[arg(long, value_delimiter = ',')]
        kappas: Option<Vec<f64>>,
        /// Grid points on [α_-, α_+].
        #[arg(long)]
        points: Option<usize>,
    },
    /// λ-moments of |h'_{t²}(i)| and their log-slope, or the β histogram.
    Moments {
        #[arg(long)]
        histogram: bool,
        #[arg(long)]
        bin_width: Option<f64>,
    },
    /// Dyadic counts N_{n,β} and their log₂ slope.
    Counts {
        #[arg(long)]
        n_min: Option<u32>,
    },
    /// |f̂_T'(iy)| and v_T(y) on dyadic heights 2^0 … 2^-n_max.
    TipProfile,
    /// Harmonic measure of the ε-neighbourhood of the tip.
    Hm {
        /// Use the vertical slit (V ≡ 0) instead of a Brownian path.
        #[arg(long)]
        slit: bool,
        #[arg(long)]
        eps_min: Option<f64>,
        #[arg(long)]
        eps_max: Option<f64>,
        #[arg(long)]
        eps_count: Option<usize>,
        #[arg(long)]
        circle_samples: Option<usize>,
    },
    /// Radial SDE for Θ̂ and its stationary density.
    ThetaSde {
        #[arg(long)]
        u: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        theta0: Option<f64>,
    },
    /// Flatness of the reverse (default) or forward martingale.
    Martingale {
        #[arg(long)]
        forward: bool,
        /// Reverse-flow exponent r.
        #[arg(long, allow_negative_numbers = true)]
        r: Option<f64>,
        /// Forward-flow index u > 1/2.
        #[arg(long, allow_negative_numbers = true)]
        u: Option<f64>,
    },
    /// Deterministic invariant suite; exit 3 on any violation.
    Check {
        #[arg(long, value_enum)]
        level: Option<Level>,
    },
}

impl Cli {
    /// Flags as [`Settings`], unset flags left as `None`.
    pub fn settings(&self) -> Settings {
        let c = &self.common;
        let flag = |b: bool| b.then_some(true);
        let mut s = Settings {
            kappa: c.kappa,
            seed: c.seed,
            samples: c.samples,
            steps: c.steps,
            dt: c.dt,
            tmax: c.tmax,
            beta: c.beta,
            lambda: c.lambda,
            alpha: c.alpha,
            n_max: c.n_max,
            out: c.out.clone(),
            format: c.format.map(Into::into),
            workers: c.workers,
            ..Default::default()
        };
        match &self.command {
            Command::Trace { y_min } => s.y_min = *y_min,
            Command::Spectrum { kappas, points } => {
                s.kappas = kappas.clone();
                s.points = *points;
            }
            Command::Moments { histogram, bin_width } => {
                s.histogram = flag(*histogram);
                s.bin_width = *bin_width;
            }
            Command::Counts { n_min } => s.n_min = *n_min,
            Command::TipProfile => {}
            Command::Hm {
                slit,
                eps_min,
                eps_max,
                eps_count,
                circle_samples,
            } => {
                s.slit = flag(*slit);
                s.eps_min = *eps_min;
                s.eps_max = *eps_max;
                s.eps_count = *eps_count;
                s.circle_samples = *circle_samples;
            }
            Command::ThetaSde { u, theta0 } => {
                s.u = *u;
                s.theta0 = *theta0;
            }
            Command::Martingale { forward, r, u } => {
                s.forward = flag(*forward);
                s.r = *r;
                s.u = *u;
            }
            Command::Check { level } => s.level = *level,
        }
        s
    }

    pub fn name(&self) -> &'static str {
        match self.command {
            Command::Trace { .. } => "trace",
            Command::Spectrum { .. } => "spectrum",
            Command::Moments { .. } => "moments",
            Command::Counts { .. } => "counts",
            Command::TipProfile => "tip-profile",
            Command::Hm { .. } => "hm",
            Command::ThetaSde { .. } => "theta-sde",
            Command::Martingale { .. } => "martingale",
            Command::Check { .. } => "check",
        }
    }
}
