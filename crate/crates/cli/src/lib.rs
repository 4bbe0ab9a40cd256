//! `hpq`: batch front end for the hardy-amalgam toolkit.
//!
//! Every command resolves a [`RunConfig`] (config file overlaid by flags), runs one pipeline
//! and emits a JSON report with sorted keys. One-dimensional curves are also written as CSV
//! next to the JSON file when `--out` is given.
//!
//! Exit codes: 0 pass, 1 usage, 2 assertion failure, 3 numerical error.

pub mod commands;
pub mod config;
pub mod output;

use clap::{Args, Parser, Subcommand};
pub use config::{ConfigFile, Options, RunConfig, UsageError};
use std::ffi::OsString;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ASSERT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hpq", version, about = "Hardy spaces over amalgam spaces: norms, transforms, extensions and equivalence reports")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// JSON configuration file; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Half-width of the periodic box.
    #[arg(long = "L", global = true)]
    pub l: Option<f64>,
    /// Samples per axis (even).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, requires = "q")]
    pub p: Option<f64>,
    #[arg(long, global = true, requires = "p")]
    pub q: Option<f64>,
    /// Exponent pair `p,q`; repeat for several.
    #[arg(long, global = true, value_parser = config::parse_pair)]
    pub pq: Vec<[f64; 2]>,
    #[arg(long, global = true)]
    pub tmin: Option<f64>,
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    #[arg(long, global = true)]
    pub tcount: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Function spec as JSON, or `@file.json`.
    #[arg(long, global = true)]
    pub function: Option<String>,
    /// Report path; CSV curves go next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Turn the report into pass/fail (exit 2 on failure).
    #[arg(long = "assert", global = true)]
    pub assert_mode: bool,
    /// Frozen-constant file.
    #[arg(long, global = true)]
    pub frozen: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Amalgam and Lebesgue norms of a function.
    Norm {
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        expect: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Riesz transforms and Fourier multipliers.
    Transform {
        #[arg(long)]
        op: Option<String>,
        /// Riesz axes, e.g. `1,2` for `R_1 R_2`.
        #[arg(long, value_delimiter = ',')]
        indices: Option<Vec<usize>>,
        #[arg(long)]
        symbol: Option<String>,
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Poisson or heat extension over the time grid.
    Extend {
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Cauchy-Riemann residuals of the harmonic or caloric lift.
    CrCheck {
        #[arg(long)]
        lift: Option<String>,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Maximal, Riesz and multiplier quantities (plus the nontangential one).
    Hardy {
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        aperture: Option<f64>,
    },
    /// Build and check an atom, or probe the whole atom family.
    Atoms {
        #[arg(long)]
        side: Option<f64>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        corner: Option<Vec<f64>>,
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Equivalence report over a family.
    Report {
        /// Comma-separated methods (default: all).
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        /// `reference` or `atoms` (default: reference, or the config family).
        #[arg(long)]
        family: Option<String>,
    },
    /// Measure and store frozen constants on the current grid.
    Freeze,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Norm { .. } => "norm",
            Command::Transform { .. } => "transform",
            Command::Extend { .. } => "extend",
            Command::CrCheck { .. } => "cr-check",
            Command::Hardy { .. } => "hardy",
            Command::Atoms { .. } => "atoms",
            Command::Report { .. } => "report",
            Command::Freeze => "freeze",
        }
    }

    fn options(&self) -> Options {
        let mut o = Options::default();
        match self.clone() {
            Command::Norm { window, expect, tol } => {
                o.window = window;
                o.expect = expect;
                o.tol = tol;
            }
            Command::Transform { op, indices, symbol, dump } => {
                o.op = op;
                o.indices = indices;
                o.symbol = symbol;
                o.dump = dump;
            }
            Command::Extend { kernel, dump } => {
                o.kernel = kernel;
                o.dump = dump;
            }
            Command::CrCheck { lift, mode, tol } => {
                o.lift = lift;
                o.mode = mode;
                o.tol = tol;
            }
            Command::Hardy { order, aperture } => {
                o.order = order;
                o.aperture = aperture;
            }
            Command::Atoms { side, order, corner, dump } => {
                o.side = side;
                o.order = order;
                o.corner = corner;
                o.dump = dump;
            }
            Command::Report { methods, .. } => o.methods = methods,
            Command::Freeze => {}
        }
        o
    }
}

/// Config file, then flags, then defaults.
pub fn resolve(cli: &Cli) -> Result<RunConfig, UsageError> {
    let g = &cli.global;
    let mut file = match &g.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if g.dim.is_some() {
        file.dim = g.dim;
    }
    if g.l.is_some() {
        file.l = g.l;
    }
    if g.n.is_some() {
        file.n = g.n;
    }
    if !g.pq.is_empty() {
        file.exponents = Some(g.pq.clone());
    }
    if let (Some(p), Some(q)) = (g.p, g.q) {
        file.exponents = Some(vec![[p, q]]);
    }
    if g.tmin.is_some() || g.tmax.is_some() || g.tcount.is_some() {
        let mut t = file.time.unwrap_or_default();
        t.tmin = g.tmin.unwrap_or(t.tmin);
        t.tmax = g.tmax.unwrap_or(t.tmax);
        t.count = g.tcount.unwrap_or(t.count);
        file.time = Some(t);
    }
    if g.seed.is_some() {
        file.seed = g.seed;
    }
    if let Some(s) = &g.function {
        file.function = Some(config::parse_function(s)?);
    }
    if g.out.is_some() {
        file.out = g.out.clone();
    }
    if g.frozen.is_some() {
        file.frozen = g.frozen.clone();
    }
    if g.assert_mode {
        file.assert_mode = Some(true);
    }
    if let Command::Report { family: Some(f), .. } = &cli.command {
        file.family = Some(commands::parse_family(f)?);
    }
    let mut opts = file.options.take().unwrap_or_default();
    opts.overlay(cli.command.options());
    file.options = Some(opts);
    RunConfig::resolve(file)
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("hpq: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = commands::execute(&cfg, &cli.command);
    match output::emit(&cfg, cli.command.name(), outcome) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("hpq: {e}");
            EXIT_NUMERICAL
        }
    }
}
