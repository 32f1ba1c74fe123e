use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use helixscan::detect::{classify, infer_period, segment_pseudo_helices, PseudoHelixSegment};
use helixscan::io::{ingest_series, to_csv, to_json, write_output, CsvTable, Envelope, Format, RunConfig};
use helixscan::metrics::{chaos_mod1_test, quasi_ap_check, SteadyPointTrain};
use helixscan::sweep::{self, classify_grid, find_boundary, invert_mu, vier_estimate, OrbitMu};
use helixscan::{iterate, schwarzian_scan, Error, ErrorClass, Map, Orbit, Result};

#[derive(Parser, Debug)]
#[command(name = "helixscan", version, about = "Helix and pseudo-helix analysis of ascending maps")]
struct Cli {
    /// TOML run configuration, or a JSON report whose embedded config is reused.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "json")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterate a map and dump the orbit.
    Iterate {
        #[command(flatten)]
        map: MapArgs,
        /// Number of terms, u(1) = x0 included.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Stable helix, pseudo-helix regime or chaotic.
    Classify {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        detect: DetectArgs,
    },
    /// Pseudo-helix segments and their steady orders.
    SteadyPoints {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        detect: DetectArgs,
    },
    /// Quasi-arithmetic-progression test of steady orders.
    QuasiAp {
        /// Comma-separated steady orders; otherwise computed from the series.
        #[arg(long, value_delimiter = ',')]
        orders: Vec<u64>,
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        detect: DetectArgs,
    },
    /// Schwarzian derivative over a grid.
    Schwarzian {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        x_lo: Option<f64>,
        #[arg(long)]
        x_hi: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Chaos-modulo-1 estimate over seeded initial pairs.
    ChaosTest {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        shifts: Vec<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        frac_tol: Option<f64>,
    },
    /// Classify every value of a parameter grid.
    Sweep {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        min_steady_points: Option<usize>,
        #[command(flatten)]
        detect: DetectArgs,
    },
    /// Bisect for the helix/non-helix boundary inside a bracket.
    Boundary {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long)]
        boundary_tol: Option<f64>,
        #[arg(long)]
        iter_max: Option<usize>,
        #[command(flatten)]
        detect: DetectArgs,
    },
    /// Average steady-point periodicity at one parameter value.
    Mu {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        min_steady_points: Option<usize>,
        #[command(flatten)]
        detect: DetectArgs,
    },
    /// Vier ratios near a boundary.
    Vier {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        range: RangeArgs,
        /// Known boundary; located by bisection in [lo, hi] when omitted.
        #[arg(long)]
        boundary: Option<f64>,
        #[arg(long)]
        side: Option<sweep::Side>,
        #[arg(long)]
        p0: Option<f64>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        span: Option<f64>,
        #[arg(long)]
        mu_rel_tol: Option<f64>,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long)]
        target_points: Option<usize>,
        #[arg(long)]
        max_horizon: Option<usize>,
        #[command(flatten)]
        detect: DetectArgs,
    },
    /// Read an (index, value[, delta1]) table and report on it.
    Ingest {
        /// Table to read.
        path: PathBuf,
    },
}

#[derive(Args, Debug, Default)]
struct MapArgs {
    /// Built-in family name.
    #[arg(long)]
    family: Option<String>,
    /// Custom map expression in x, alpha, beta.
    #[arg(long)]
    expr: Option<String>,
    #[arg(long)]
    lift_period: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct DetectArgs {
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    transient: Option<usize>,
    #[arg(long)]
    confirm_cycles: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    p_max: Option<usize>,
    /// Pseudo-helix period p; inferred from the series when omitted.
    #[arg(long)]
    period: Option<usize>,
    #[arg(long)]
    slack: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct SourceArgs {
    /// Analyse an ingested table instead of iterating a map.
    #[arg(long)]
    ingest: Option<String>,
}

#[derive(Args, Debug, Default)]
struct RangeArgs {
    /// Swept parameter: alpha or beta.
    #[arg(long)]
    param: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<f64>,
}

impl MapArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.family, &self.family);
        set(&mut c.expr, &self.expr);
        set(&mut c.lift_period, &self.lift_period);
        set(&mut c.alpha, &self.alpha);
        set(&mut c.beta, &self.beta);
        set(&mut c.x0, &self.x0);
    }
}

impl DetectArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.horizon, &self.horizon);
        set(&mut c.transient, &self.transient);
        set(&mut c.confirm_cycles, &self.confirm_cycles);
        set(&mut c.tol, &self.tol);
        set(&mut c.p_max, &self.p_max);
        set(&mut c.period, &self.period);
        set(&mut c.slack, &self.slack);
    }
}

impl RangeArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.param, &self.param);
        set(&mut c.lo, &self.lo);
        set(&mut c.hi, &self.hi);
    }
}

fn set<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
    if src.is_some() {
        *dst = src.clone();
    }
}

fn set_vec<T: Clone>(dst: &mut Option<Vec<T>>, src: &[T]) {
    if !src.is_empty() {
        *dst = Some(src.to_vec());
    }
}

fn require<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("`{name}` is required")))
}

fn bound_map(c: &RunConfig) -> Result<Map> {
    c.family_spec()?.bind(c.alpha, c.beta)
}

struct Output {
    format: Format,
    out: Option<PathBuf>,
}

impl Output {
    fn json_only<R: Serialize>(&self, command: &str, config: &RunConfig, result: &R) -> Result<()> {
        if self.format == Format::Csv {
            return Err(Error::InvalidArgument(format!("`{command}` has no CSV form; use --format json")));
        }
        self.write(&to_json(&Envelope { command, config, result })?)
    }

    fn table<R: Serialize + CsvTable>(&self, command: &str, config: &RunConfig, result: &R) -> Result<()> {
        match self.format {
            Format::Csv => self.write(&to_csv(result)?),
            Format::Json => self.write(&to_json(&Envelope { command, config, result })?),
        }
    }

    fn write(&self, text: &str) -> Result<()> {
        write_output(text, self.out.as_deref())
    }
}

#[derive(Serialize)]
struct SteadyPointsResult {
    period_p: usize,
    segments: Vec<PseudoHelixSegment>,
    train: SteadyPointTrain,
}

impl CsvTable for SteadyPointsResult {
    fn header(&self) -> Vec<&'static str> {
        self.segments.header()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.segments.rows()
    }
}

#[derive(Serialize)]
struct IngestReport {
    len: usize,
    provenance: helixscan::io::Provenance,
    first_value: f64,
    last_value: f64,
    /// Largest |recomputed − printed| first difference over rows that carry one.
    max_delta1_discrepancy: Option<f64>,
    rows_compared: usize,
}

#[derive(Serialize)]
struct MuResult {
    mu: f64,
}

fn series_for(c: &RunConfig) -> Result<Orbit> {
    match &c.ingest {
        Some(path) => Ok(ingest_series(Path::new(path))?.series()),
        None => {
            let map = bound_map(c)?;
            iterate(&map, require(c.x0, "x0")?, c.horizon.unwrap_or(100_000))
        }
    }
}

fn steady_points_of(c: &RunConfig) -> Result<SteadyPointsResult> {
    let series = series_for(c)?;
    let opts = c.classify_options();
    let period_p = match c.period {
        Some(p) => p,
        None => {
            let p_max = opts.p_max.min(series.len() / 4).max(1);
            infer_period(&series, p_max)?.ok_or_else(|| {
                Error::InvalidArgument("no period inferred from the series; pass --period".into())
            })?
        }
    };
    let start = if c.ingest.is_some() { 0 } else { opts.transient.min(series.len()) };
    let mut segments = segment_pseudo_helices(&series, period_p, &opts.segment)?;
    segments.retain(|s| s.steady_order() > start as u64);
    let train = SteadyPointTrain::from_orders(segments.iter().map(|s| s.steady_order()).collect());
    Ok(SteadyPointsResult { period_p, segments, train })
}

fn run(cli: Cli) -> Result<()> {
    let mut c = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    set(&mut c.seed, &cli.seed);
    let out = Output { format: cli.format, out: cli.out.clone() };

    match &cli.command {
        Command::Iterate { map, n } => {
            map.apply(&mut c);
            set(&mut c.n, n);
            let m = bound_map(&c)?;
            let series = iterate(&m, require(c.x0, "x0")?, require(c.n, "n")?)?;
            out.table("iterate", &c, &series)
        }
        Command::Classify { map, detect } => {
            map.apply(&mut c);
            detect.apply(&mut c);
            let m = bound_map(&c)?;
            let r = classify(&m, require(c.x0, "x0")?, &c.classify_options())?;
            out.json_only("classify", &c, &r)
        }
        Command::SteadyPoints { map, source, detect } => {
            map.apply(&mut c);
            set(&mut c.ingest, &source.ingest);
            detect.apply(&mut c);
            let r = steady_points_of(&c)?;
            out.table("steady-points", &c, &r)
        }
        Command::QuasiAp { orders, map, source, detect } => {
            map.apply(&mut c);
            set(&mut c.ingest, &source.ingest);
            detect.apply(&mut c);
            let orders = if orders.is_empty() { steady_points_of(&c)?.train.orders } else { orders.clone() };
            let r = quasi_ap_check(&orders)?;
            out.json_only("quasi-ap", &c, &r)
        }
        Command::Schwarzian { map, x_lo, x_hi, samples } => {
            map.apply(&mut c);
            set(&mut c.x_lo, x_lo);
            set(&mut c.x_hi, x_hi);
            set(&mut c.samples, samples);
            let m = bound_map(&c)?;
            let hi_default = f64::from(m.lift_period().unwrap_or(1));
            let r = schwarzian_scan(&m, c.x_lo.unwrap_or(0.0), c.x_hi.unwrap_or(hi_default), c.samples.unwrap_or(10_000))?;
            out.table("schwarzian", &c, &r)
        }
        Command::ChaosTest { map, pairs, horizon, burn_in, shifts, lambda, frac_tol } => {
            map.apply(&mut c);
            set(&mut c.pairs, pairs);
            set(&mut c.horizon, horizon);
            set(&mut c.burn_in, burn_in);
            set_vec(&mut c.shifts, shifts);
            set(&mut c.lambda, lambda);
            set(&mut c.frac_tol, frac_tol);
            let m = bound_map(&c)?;
            let r = chaos_mod1_test(&m, &c.chaos_options())?;
            out.json_only("chaos-test", &c, &r)
        }
        Command::Sweep { map, range, steps, min_steady_points, detect } => {
            map.apply(&mut c);
            range.apply(&mut c);
            set(&mut c.steps, steps);
            set(&mut c.min_steady_points, min_steady_points);
            detect.apply(&mut c);
            let param = c.sweep_param()?;
            let other = other_param(&c, param)?;
            let r = classify_grid(
                &c.family_spec()?,
                param,
                require(c.lo, "lo")?,
                require(c.hi, "hi")?,
                c.steps.unwrap_or(11),
                other,
                require(c.x0, "x0")?,
                &c.sweep_options(),
            )?;
            out.table("sweep", &c, &r)
        }
        Command::Boundary { map, range, boundary_tol, iter_max, detect } => {
            map.apply(&mut c);
            range.apply(&mut c);
            set(&mut c.boundary_tol, boundary_tol);
            set(&mut c.iter_max, iter_max);
            detect.apply(&mut c);
            let r = locate(&c)?;
            out.json_only("boundary", &c, &r)
        }
        Command::Mu { map, min_steady_points, detect } => {
            map.apply(&mut c);
            set(&mut c.min_steady_points, min_steady_points);
            detect.apply(&mut c);
            let m = bound_map(&c)?;
            let mu = sweep::mu(&m, require(c.x0, "x0")?, &c.classify_options(), c.min_steady_points.unwrap_or(10))?;
            out.json_only("mu", &c, &MuResult { mu })
        }
        Command::Vier {
            map,
            range,
            boundary,
            side,
            p0,
            levels,
            span,
            mu_rel_tol,
            max_steps,
            target_points,
            max_horizon,
            detect,
        } => {
            map.apply(&mut c);
            range.apply(&mut c);
            set(&mut c.boundary, boundary);
            set(&mut c.side, side);
            set(&mut c.p0, p0);
            set(&mut c.levels, levels);
            set(&mut c.span, span);
            set(&mut c.mu_rel_tol, mu_rel_tol);
            set(&mut c.max_steps, max_steps);
            set(&mut c.target_points, target_points);
            set(&mut c.max_horizon, max_horizon);
            detect.apply(&mut c);
            let r = vier(&mut c)?;
            out.table("vier", &c, &r)
        }
        Command::Ingest { path } => {
            c.ingest = Some(path.display().to_string());
            let s = ingest_series(path)?;
            let recomputed = s.series().delta1();
            let diffs: Vec<f64> = recomputed
                .iter()
                .zip(&s.printed_delta1)
                .filter_map(|(r, p)| p.map(|p| (r - p).abs()))
                .collect();
            let r = IngestReport {
                len: s.len(),
                first_value: s.values[0],
                last_value: s.values[s.len() - 1],
                max_delta1_discrepancy: diffs.iter().copied().reduce(f64::max),
                rows_compared: diffs.len(),
                provenance: s.provenance,
            };
            out.json_only("ingest", &c, &r)
        }
    }
}

fn other_param(c: &RunConfig, param: helixscan::Param) -> Result<f64> {
    let spec = c.family_spec()?;
    let (other, value) = match param {
        helixscan::Param::Alpha => (helixscan::Param::Beta, c.beta),
        helixscan::Param::Beta => (helixscan::Param::Alpha, c.alpha),
    };
    if spec.free_params.contains(&other) {
        require(value, other.name())
    } else {
        Ok(value.unwrap_or(0.0))
    }
}

fn locate(c: &RunConfig) -> Result<sweep::Boundary> {
    let param = c.sweep_param()?;
    find_boundary(
        &c.family_spec()?,
        param,
        require(c.lo, "lo")?,
        require(c.hi, "hi")?,
        other_param(c, param)?,
        require(c.x0, "x0")?,
        &c.classify_options(),
        c.boundary_tol.unwrap_or(1e-9),
        c.iter_max.unwrap_or(100),
    )
}

fn vier(c: &mut RunConfig) -> Result<sweep::VierEstimate> {
    let param = c.sweep_param()?;
    let boundary = match c.boundary {
        Some(b) => b,
        None => {
            if c.x0.is_none() {
                c.x0 = Some(0.5);
            }
            let b = locate(c)?;
            b.value
        }
    };
    let oracle = OrbitMu {
        family: c.family_spec()?,
        param,
        fixed_other: other_param(c, param)?,
        opts: c.orbit_mu_options(),
    };
    let side = require(c.side, "side")?;
    let opts = c.invert_options();
    let inverter = |target: f64| invert_mu(&oracle, boundary, side, target, &opts);
    vier_estimate(&inverter, boundary, side, c.p0.unwrap_or(50.0), c.levels.unwrap_or(4))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Numeric => 2,
                ErrorClass::Io => 3,
            })
        }
    }
}
