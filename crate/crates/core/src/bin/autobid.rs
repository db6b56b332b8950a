//! Command-line front end. Exit status: 0 when everything ran and every
//! checked bound held, 1 on an operational error, 2 on a violated bound.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use autobid_market::dynamics::{self, rate_report, DynamicsConfig, TraceWriter};
use autobid_market::equilibrium::{solve_market_boosted, solve_market_ce, SolverOptions};
use autobid_market::generate::{generate, ValueDistribution};
use autobid_market::incentives::{buyer_deviation_report, default_epsilon, incentive_ratio};
use autobid_market::report::{audit_csv, pne_csv, AuditRow, EquilibriumReport};
use autobid_market::seller_game::{audit_pne, PneOptions, PneStart};
use autobid_market::suite::{parse_seed_range, run_suite, seller_grid_revenue};
use autobid_market::{io, validate, Error, Matrix, ValidatedMarket};

/// Slack on the potential's monotonicity along a dynamics trace.
const PHI_SLACK: f64 = 1e-8;
/// Slack on the ergodic rate bound.
const RATE_SLACK: f64 = 1e-6;
/// Slack on audit ratios and welfare bounds.
const AUDIT_TOL: f64 = 1e-6;
/// Largest gap allowed between a seller's best response and its grid oracle.
const GRID_AGREEMENT: f64 = 1e-4;

#[derive(Parser)]
#[command(name = "autobid", version, about = "Pacing equilibria, budget dynamics and incentive audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random market file.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        buyers: usize,
        #[arg(long)]
        items: usize,
        #[arg(long)]
        sellers: usize,
        /// uniform01, lognormal or sparse(p).
        #[arg(long, default_value = "uniform01")]
        dist: ValueDistribution,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the market-wide equilibrium (boosted when the file has boosts).
    Ce {
        #[command(flatten)]
        market: MarketArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Newton step cap of the equilibrium solver.
        #[arg(long, default_value_t = 100_000)]
        max_inner: usize,
        /// Write the full report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run proportional budget dynamics and write the per-round trace.
    Dynamics {
        #[command(flatten)]
        market: MarketArg,
        /// Boost matrix file; overrides boosts in the market file.
        #[arg(long)]
        boosts: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        rounds: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol_inner: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare each buyer's equalized split with its grid best response.
    BuyerAudit(AuditArgs),
    /// Compare each seller's equilibrium revenue with its best deviation.
    SellerAudit(AuditArgs),
    /// Solve the seller game from several starts and report its fairness.
    Pne {
        #[command(flatten)]
        market: MarketArg,
        /// Improvement tolerance; defaults to 1e-7 times the total budget.
        #[arg(long)]
        tol: Option<f64>,
        /// Random starts in addition to the uniform one.
        #[arg(long, default_value_t = 4)]
        restarts: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full battery of checks over a seed range such as 1..50.
    Suite {
        #[arg(long, default_value = "1..50")]
        seeds: String,
        /// Summary CSV, one row per check.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-instance CSV.
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MarketArg {
    #[arg(long = "market")]
    path: PathBuf,
}

impl MarketArg {
    fn load(&self) -> Result<ValidatedMarket, Error> {
        validate(&io::load(&self.path)?)
    }
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    market: MarketArg,
    /// Agent index, or `all`.
    #[arg(long, default_value = "all")]
    agent: String,
    /// Budget grid for buyers; dense oracle grid for two-buyer sellers with
    /// at most two items.
    #[arg(long, default_value_t = 200)]
    resolution: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl AuditArgs {
    fn agents(&self, count: usize) -> Result<Vec<usize>, Error> {
        if self.agent == "all" {
            return Ok((0..count).collect());
        }
        match self.agent.parse::<usize>() {
            Ok(a) if a < count => Ok(vec![a]),
            _ => Err(Error::Domain(format!(
                "agent must be `all` or an index below {count}, got `{}`",
                self.agent
            ))),
        }
    }
}

/// How a command ended when it did not fail operationally.
enum Outcome {
    Pass,
    Violated(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Violated(record)) => {
            eprintln!("bound violated: {record}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Gen { seed, buyers, items, sellers, dist, out } => {
            let spec = generate(seed, buyers, items, sellers, dist)?;
            io::save(&spec, &out)?;
            println!("wrote {buyers} buyers, {items} items, {sellers} sellers to {}", out.display());
            Ok(Outcome::Pass)
        }
        Command::Ce { market, tol, max_inner, out } => {
            check_positive("tol", tol)?;
            let mk = market.load()?;
            let opts = SolverOptions { max_inner, ..SolverOptions::with_tol(tol) };
            let eq = match mk.boosts() {
                Some(c) => solve_market_boosted(&mk, c, &opts)?,
                None => solve_market_ce(&mk, &opts)?,
            };
            let report = EquilibriumReport::new(&mk, &eq, mk.boosts(), tol);
            print!("{}", report.summary());
            if let Some(path) = out {
                write(&path, &(report.to_json() + "\n"))?;
            }
            Ok(Outcome::Pass)
        }
        Command::Dynamics { market, boosts, rounds, tol_inner, out } => {
            check_positive("tol-inner", tol_inner)?;
            let mk = market.load()?;
            let boosts = match boosts {
                Some(path) => Some(io::load_boosts(path)?),
                None => mk.boosts().cloned(),
            };
            run_dynamics(&mk, boosts, rounds, tol_inner, out.as_deref())
        }
        Command::BuyerAudit(args) => {
            let mk = args.market.load()?;
            let ce = solve_market_ce(&mk, &SolverOptions::default())?;
            let rows = args
                .agents(mk.num_buyers())?
                .into_iter()
                .map(|b| Ok(AuditRow::from(&buyer_deviation_report(&mk, b, &ce.split, args.resolution, 1e-9)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            finish_audit("buyer", &rows, args.out.as_deref())
        }
        Command::SellerAudit(args) => {
            let mk = args.market.load()?;
            let ce = solve_market_ce(&mk, &SolverOptions::default())?;
            let floor = default_epsilon(&mk);
            let mut rows = Vec::new();
            for s in args.agents(mk.num_sellers())? {
                let r = incentive_ratio(&mk, s, AUDIT_TOL)?;
                let mut row = AuditRow::from(&r);
                let values = mk.seller_values(s);
                if values.rows() == 2 && values.cols() <= 2 && args.resolution > 0 {
                    let w: Vec<f64> = (0..2)
                        .map(|i| (ce.utilities.row_sum(i) - ce.utilities[(i, s)]).max(floor))
                        .collect();
                    let grid = seller_grid_revenue(&values, mk.budgets(), &w, args.resolution);
                    row.pass &= grid <= r.best_revenue + GRID_AGREEMENT;
                }
                rows.push(row);
            }
            finish_audit("seller", &rows, args.out.as_deref())
        }
        Command::Pne { market, tol, restarts, seed, out } => {
            if let Some(t) = tol {
                check_positive("tol", t)?;
            }
            let mk = market.load()?;
            let opts = PneOptions { tol, ..PneOptions::default() };
            let starts: Vec<PneStart> = std::iter::once(PneStart::Uniform)
                .chain((1..=restarts).map(|r| PneStart::Random(seed.wrapping_mul(1000).wrapping_add(r))))
                .collect();
            let audit = audit_pne(&mk, &opts, &starts, AUDIT_TOL)?;
            let f = &audit.fairness;
            println!("rounds {}  revenues {:?}", audit.solution.rounds, audit.solution.revenues);
            println!("restart spread {:e} (limit {:e})", audit.spread, 10.0 * audit.tol);
            println!("largest improvement {:e}", audit.verified.improvements.iter().cloned().fold(0.0, f64::max));
            println!("delta {}  nsw ratio {}  bound {}", f.delta, f.ratio, f.bound);
            if let Some(path) = out {
                write(&path, &pne_csv(&mk, &audit))?;
            }
            Ok(if !audit.unique() {
                Outcome::Violated(format!(
                    "seller-game equilibria disagree or are not certified: spread {}, improvements {:?}",
                    audit.spread, audit.verified.improvements
                ))
            } else if !f.pass {
                Outcome::Violated(format!("welfare ratio {} outside [{}, 1]", f.ratio, f.bound))
            } else {
                Outcome::Pass
            })
        }
        Command::Suite { seeds, out, records } => {
            let seeds = parse_seed_range(&seeds)?;
            let report = run_suite(&seeds);
            print!("{}", report.table());
            if let Some(path) = out {
                write(&path, &report.summary_csv())?;
            }
            if let Some(path) = records {
                write(&path, &report.records_csv())?;
            }
            Ok(match report.checks.iter().find(|c| !c.pass) {
                Some(c) => Outcome::Violated(format!("{} (criterion {}): {}", c.name, c.criterion, c.failure)),
                None => Outcome::Pass,
            })
        }
    }
}

fn run_dynamics(
    mk: &ValidatedMarket,
    boosts: Option<Matrix>,
    rounds: usize,
    tol_inner: f64,
    out: Option<&Path>,
) -> Result<Outcome, Error> {
    let boosted = boosts.is_some();
    let config = DynamicsConfig { rounds, tol_inner, boosts, ..DynamicsConfig::default() };
    let mut writer = out.map(TraceWriter::create).transpose()?;
    let start = dynamics::init_split(mk)?;
    let trace = dynamics::run_from(mk, start, &config, |r| match writer.as_mut() {
        Some(w) => w.append(r),
        None => Ok(()),
    })?;
    let last = trace.last().expect("at least one round ran");
    let rate = rate_report(&trace, trace.anchor_objective);
    println!(
        "rounds {}{}  phi {:e} -> {:e}  max phi increase {:e}",
        trace.records.len(),
        if trace.stopped_early { " (settled)" } else { "" },
        rate.initial_potential,
        last.phi,
        trace.max_phi_increase().max(0.0),
    );
    println!("max T*g(T) {:e}  bound phi(1) {:e}", rate.max_scaled_gap, rate.initial_potential);
    println!("final utilities {:?}", last.utilities.totals());
    println!("equilibrium     {:?}", trace.anchor_utilities);
    if boosted {
        return Ok(Outcome::Pass);
    }
    Ok(if trace.max_phi_increase() > PHI_SLACK {
        let t = trace.records.windows(2).position(|w| w[1].phi - w[0].phi > PHI_SLACK).unwrap_or(0) + 2;
        Outcome::Violated(format!("potential rose by {:e} at round {t}", trace.max_phi_increase()))
    } else if !rate.holds(RATE_SLACK) {
        Outcome::Violated(format!(
            "T*g(T) reached {:e}, above phi(1) = {:e}",
            rate.max_scaled_gap, rate.initial_potential
        ))
    } else {
        Outcome::Pass
    })
}

fn finish_audit(kind: &str, rows: &[AuditRow], out: Option<&Path>) -> Result<Outcome, Error> {
    println!("{kind:<7} {:>16} {:>16} {:>12} {:>6}  pass", "baseline", "best response", "ratio", "bound");
    for r in rows {
        println!(
            "{:<7} {:>16.9} {:>16.9} {:>12.9} {:>6}  {}",
            r.agent, r.baseline_value, r.best_response_value, r.ratio, r.bound, r.pass
        );
    }
    if let Some(path) = out {
        write(path, &audit_csv(rows))?;
    }
    Ok(match rows.iter().find(|r| !r.pass) {
        Some(r) => Outcome::Violated(format!("{kind} {r:?}")),
        None => Outcome::Pass,
    })
}

fn check_positive(name: &str, value: f64) -> Result<(), Error> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("--{name} must be positive, got {value}")))
    }
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
