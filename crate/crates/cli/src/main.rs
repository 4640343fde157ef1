//! `dynkin`: value functions, belief boundaries, equilibria, simulation and
//! verification for Dynkin games with uncertain competition.

mod config;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dynkin_core::engine::{
    estimate_value, estimate_value_with_dynamics, sample_outcomes, sample_outcomes_with_dynamics, write_outcomes_csv,
    Dynamics, Estimate, OutcomeRecord, SimConfig, SimMode, Stopper,
};
use dynkin_core::equilibrium::{build_profile, EquilibriumProfile, Player};
use dynkin_core::regions::{b_inverse, boundary_b, boundary_c};
use dynkin_core::stopping::{full, solve_value_chain};
use dynkin_core::verify::{reports_json, reports_table, run_suite, Suite};
use dynkin_core::{DiffusionSpec, Error, GbmRealOptionModel, TabulatedOracle, ValueOracle};

use config::{KeyValues, SolveSpec, RUN_KEYS, SPEC_KEYS};

#[derive(Parser, Debug)]
#[command(name = "dynkin", version, about = "Dynkin games with uncertain competition")]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Globals {
    /// Drift of the GBM state.
    #[arg(long, global = true, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Volatility of the GBM state.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Discount rate.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Strike of the call payoff.
    #[arg(long = "K", global = true)]
    strike: Option<f64>,
    /// key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Tabulated value oracle (CSV `x,V,g`) used instead of the GBM closed form.
    #[arg(long, global = true)]
    oracle: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print V(x), g(x), the one-player threshold B and eta.
    Value {
        #[arg(long)]
        x: Option<f64>,
    },
    /// Write the belief boundaries b and c as CSV `x,b,c`.
    Boundaries {
        #[arg(long, default_value_t = 0.5)]
        xmin: f64,
        #[arg(long, default_value_t = 2.5)]
        xmax: f64,
        #[arg(long, default_value_t = 201)]
        n: usize,
    },
    /// Write the equilibrium profile as JSON.
    Equilibrium {
        #[arg(long)]
        p1: Option<f64>,
        #[arg(long)]
        p2: Option<f64>,
        #[arg(long)]
        x: Option<f64>,
    },
    /// Estimate both players' equilibrium payoffs.
    Simulate {
        #[arg(long)]
        p1: Option<f64>,
        #[arg(long)]
        p2: Option<f64>,
        #[arg(long)]
        x: Option<f64>,
        /// Number of simulated plays.
        #[arg(long)]
        n: Option<u64>,
        /// semi-analytic or path.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-max")]
        t_max: Option<f64>,
        /// Also write every play as CSV.
        #[arg(long)]
        outcomes: Option<PathBuf>,
    },
    /// Run verification checks; exits 1 if any fails.
    Verify {
        /// all, br, indiff, ids or safety.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Solve a one-dimensional stopping problem and write CSV `x,V,g`.
    Solve {
        #[arg(long)]
        spec: PathBuf,
    },
}

/// Failure with its process exit code.
#[derive(Debug)]
enum Failure {
    Verification(usize),
    Config(String),
    NoEquilibrium(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Config(_) => 2,
            Failure::NoEquilibrium(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoEquilibrium { .. } => Failure::NoEquilibrium(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("i/o error: {e}"))
    }
}

type Outcome<T> = Result<T, Failure>;

/// Resolved run settings: flags over the config file over defaults.
struct Settings {
    cli: Globals,
    file: KeyValues,
}

impl Settings {
    fn new(cli: Globals) -> Outcome<Self> {
        let file = match &cli.config {
            Some(path) => KeyValues::read(path, RUN_KEYS).map_err(Failure::Config)?,
            None => KeyValues::default(),
        };
        Ok(Self { cli, file })
    }

    fn pick<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Outcome<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.get(key).map_err(Failure::Config),
        }
    }

    fn need<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Outcome<T>
    where
        T::Err: std::fmt::Display,
    {
        self.pick(flag, key)?
            .ok_or_else(|| Failure::Config(format!("missing {key}: pass --{key} or set {key} in --config")))
    }

    fn model(&self) -> Outcome<GbmRealOptionModel> {
        let std = GbmRealOptionModel::standard();
        let mu = self.pick(self.cli.mu, "mu")?.unwrap_or(std.mu());
        let sigma = self.pick(self.cli.sigma, "sigma")?.unwrap_or(std.sigma());
        let r = self.pick(self.cli.r, "r")?.unwrap_or(std.r());
        let k = self.pick(self.cli.strike, "K")?.unwrap_or(std.strike());
        Ok(GbmRealOptionModel::new(mu, sigma, r, k)?)
    }

    fn oracle(&self) -> Outcome<ValueOracle> {
        match &self.cli.oracle {
            Some(path) => {
                let f = File::open(path).map_err(|e| Failure::Config(format!("cannot open {}: {e}", path.display())))?;
                Ok(TabulatedOracle::read_csv(BufReader::new(f))?.into())
            }
            None => Ok(self.model()?.into()),
        }
    }

    fn seed(&self) -> Outcome<u64> {
        Ok(self.pick(self.cli.seed, "seed")?.unwrap_or(0))
    }

    fn output(&self) -> Outcome<Box<dyn Write>> {
        open_output(self.cli.output.as_deref())
    }
}

fn open_output(path: Option<&Path>) -> Outcome<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Config(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Six significant digits.
fn human(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{v:.5e}");
    }
    let s = format!("{:.*}", (5 - mag).max(0) as usize, v);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn cmd_value(s: &Settings, x: Option<f64>) -> Outcome<()> {
    let oracle = s.oracle()?;
    let x = s.need(x, "x")?;
    if !(x > 0.0) && oracle.gbm().is_some() {
        return Err(Error::NonPositiveState(x).into());
    }
    let mut out = s.output()?;
    let b = b_inverse(&oracle, 0.0).map_or("n/a".into(), human);
    let eta = oracle.gbm().map_or("n/a".into(), |m| human(m.eta()));
    writeln!(out, "x     {}", human(x))?;
    writeln!(out, "V(x)  {}", human(oracle.value(x)))?;
    writeln!(out, "g(x)  {}", human(oracle.payoff(x)))?;
    writeln!(out, "B     {b}")?;
    writeln!(out, "eta   {eta}")?;
    out.flush()?;
    Ok(())
}

fn cmd_boundaries(s: &Settings, xmin: f64, xmax: f64, n: usize) -> Outcome<()> {
    let oracle = s.oracle()?;
    if n < 2 || !(xmin < xmax) || !(xmin > 0.0 || oracle.gbm().is_none()) {
        return Err(Failure::Config(format!("need 0 < xmin < xmax and n >= 2, got [{xmin}, {xmax}] with n = {n}")));
    }
    let mut out = s.output()?;
    writeln!(out, "x,b,c")?;
    for i in 0..n {
        let x = if i == n - 1 { xmax } else { xmin + (xmax - xmin) * i as f64 / (n - 1) as f64 };
        writeln!(out, "{},{},{}", full(x), full(boundary_b(&oracle, x)?), full(boundary_c(&oracle, x)?))?;
    }
    out.flush()?;
    Ok(())
}

fn profile_of(s: &Settings, oracle: &ValueOracle, p1: Option<f64>, p2: Option<f64>, x: Option<f64>) -> Outcome<EquilibriumProfile> {
    let (p1, p2, x) = (s.need(p1, "p1")?, s.need(p2, "p2")?, s.need(x, "x")?);
    Ok(build_profile(oracle, p1, p2, x)?)
}

fn cmd_equilibrium(s: &Settings, p1: Option<f64>, p2: Option<f64>, x: Option<f64>) -> Outcome<()> {
    let oracle = s.oracle()?;
    let profile = profile_of(s, &oracle, p1, p2, x)?;
    let mut out = s.output()?;
    let json = serde_json::to_string_pretty(&profile.record()).map_err(|e| Failure::Config(e.to_string()))?;
    writeln!(out, "{json}")?;
    out.flush()?;
    Ok(())
}

/// Swaps the players of an outcome back to the caller's order.
fn unswap(o: &OutcomeRecord) -> OutcomeRecord {
    OutcomeRecord {
        u1: o.u2,
        u2: o.u1,
        theta1: o.theta2,
        theta2: o.theta1,
        stop1: o.stop2,
        stop2: o.stop1,
        stopper: match o.stopper {
            Stopper::Player1 => Stopper::Player2,
            Stopper::Player2 => Stopper::Player1,
            other => other,
        },
        r1: o.r2,
        r2: o.r1,
        ..*o
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    s: &Settings,
    p1: Option<f64>,
    p2: Option<f64>,
    x: Option<f64>,
    n: Option<u64>,
    mode: Option<String>,
    dt: Option<f64>,
    t_max: Option<f64>,
    outcomes: Option<PathBuf>,
) -> Outcome<()> {
    let oracle = s.oracle()?;
    let profile = profile_of(s, &oracle, p1, p2, x)?;
    let d = SimConfig::default();
    let mode: SimMode = match s.pick(mode, "mode")? {
        Some(m) => m.parse()?,
        None => d.mode,
    };
    let config = SimConfig {
        n_paths: s.pick(n, "n_paths")?.unwrap_or(d.n_paths),
        seed: s.seed()?,
        dt: s.pick(dt, "dt")?.unwrap_or(d.dt),
        t_max: s.pick(t_max, "t_max")?.unwrap_or(d.t_max),
        mode,
    };
    // a tabulated oracle is simulated under the GBM dynamics given by the flags
    let dynamics = match (&oracle, mode) {
        (ValueOracle::Tabulated(_), SimMode::Path) => {
            let m = s.model()?;
            Some(Dynamics::Diffusion(DiffusionSpec::gbm(m.mu(), m.sigma(), m.r())))
        }
        _ => None,
    };
    let mut estimates: Vec<Estimate> = [Player::One, Player::Two]
        .into_iter()
        .map(|player| match &dynamics {
            Some(dy) => estimate_value_with_dynamics(&oracle, dy, &profile, player, &config),
            None => estimate_value(&oracle, &profile, player, &config),
        })
        .collect::<Result<_, _>>()?;
    if profile.relabeled {
        estimates.reverse();
        estimates[0].player = 1;
        estimates[1].player = 2;
    }
    let mut out = s.output()?;
    let json = serde_json::to_string_pretty(&estimates).map_err(|e| Failure::Config(e.to_string()))?;
    writeln!(out, "{json}")?;
    out.flush()?;
    if let Some(path) = outcomes {
        let mut records = match &dynamics {
            Some(dy) => sample_outcomes_with_dynamics(&oracle, dy, &profile, &config)?,
            None => sample_outcomes(&oracle, &profile, &config)?,
        };
        if profile.relabeled {
            records = records.iter().map(unswap).collect();
        }
        let mut w = open_output(Some(&path))?;
        write_outcomes_csv(&records, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_verify(s: &Settings, suite: &str) -> Outcome<()> {
    let suite: Suite = suite.parse()?;
    if s.cli.oracle.is_some() {
        return Err(Failure::Config("verify needs the closed-form GBM model; drop --oracle".into()));
    }
    let oracle: ValueOracle = s.model()?.into();
    let reports = run_suite(&oracle, suite, s.seed()?)?;
    let json = reports_json(&reports);
    let table = reports_table(&reports);
    match &s.cli.output {
        Some(_) => {
            let mut out = s.output()?;
            writeln!(out, "{json}")?;
            out.flush()?;
            print!("{table}");
        }
        None => {
            println!("{json}");
            eprint!("{table}");
        }
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(Failure::Verification(failed));
    }
    Ok(())
}

fn cmd_solve(s: &Settings, spec: &Path) -> Outcome<()> {
    let kv = KeyValues::read(spec, SPEC_KEYS).map_err(Failure::Config)?;
    let spec = SolveSpec::from_kv(&kv).map_err(Failure::Config)?;
    let (table, stats) = solve_value_chain(&spec.diffusion, spec.payoff(), &spec.grid)?;
    let mut out = s.output()?;
    table.write_csv(&mut out)?;
    out.flush()?;
    eprintln!(
        "converged in {} sweeps (dt {}, last change {})",
        stats.sweeps,
        human(stats.dt),
        human(stats.residual)
    );
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    let Cli { globals, command } = cli;
    let s = Settings::new(globals)?;
    match command {
        Command::Value { x } => cmd_value(&s, x),
        Command::Boundaries { xmin, xmax, n } => cmd_boundaries(&s, xmin, xmax, n),
        Command::Equilibrium { p1, p2, x } => cmd_equilibrium(&s, p1, p2, x),
        Command::Simulate { p1, p2, x, n, mode, dt, t_max, outcomes } => {
            cmd_simulate(&s, p1, p2, x, n, mode, dt, t_max, outcomes)
        }
        Command::Verify { suite } => cmd_verify(&s, &suite),
        Command::Solve { spec } => cmd_solve(&s, &spec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Verification(n) => eprintln!("error: {n} check(s) failed"),
                Failure::Config(m) | Failure::NoEquilibrium(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
