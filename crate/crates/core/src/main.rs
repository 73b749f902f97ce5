use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::json;

use tower_limits::cli::{self, Output};
use tower_limits::{parse_poly, Config, Error, Mode, Polynomial};

#[derive(Parser)]
#[command(name = "tower-limits", version, about = "Polynomial dynamics modulo m and profinite limits of iterated towers")]
struct Cli {
    /// Emit one JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(flatten)]
    budgets: Budgets,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Budgets {
    /// Largest tail + cycle length of a single orbit walk.
    #[arg(long, global = true, env = "TOWER_LIMITS_BUDGET", default_value_t = 1 << 25)]
    max_steps: u64,

    /// Cap on literal iteration counts.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    literal_budget: u64,

    /// Largest modulus enumerated in full.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    ceiling: u64,

    /// Steps of exact orbit walking when testing for preperiodic starts.
    #[arg(long, global = true, default_value_t = 100_000)]
    preperiodic_budget: u64,

    #[arg(long, global = true, default_value_t = 4096)]
    max_depth: usize,
}

impl Budgets {
    fn config(&self) -> Result<Config, Error> {
        if self.max_steps == 0 || self.literal_budget == 0 || self.ceiling == 0 || self.max_depth == 0 {
            return Err(Error::InvalidArgument("budgets must be positive".into()));
        }
        Ok(Config {
            enumeration_ceiling: self.ceiling,
            max_orbit_steps: self.max_steps,
            literal_budget: self.literal_budget,
            preperiodic_budget: self.preperiodic_budget,
            max_depth: self.max_depth,
            ..Config::default()
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Functional graph of f modulo m: preperiod, period, cycles.
    Analyze {
        #[arg(allow_hyphen_values = true)]
        polynomial: String,
        #[arg(short)]
        m: u64,
        /// Also report the orbit of this start point.
        #[arg(short, allow_hyphen_values = true)]
        a: Option<i64>,
    },
    /// Period certificate for f modulo m, globally or for one orbit.
    Period {
        #[arg(allow_hyphen_values = true)]
        polynomial: String,
        #[arg(short)]
        m: u64,
        #[arg(short, allow_hyphen_values = true)]
        a: Option<i64>,
    },
    /// The chain m, λ(m), λ(λ(m)), ... down to 1.
    Chain {
        #[arg(allow_hyphen_values = true)]
        polynomial: String,
        #[arg(short)]
        m: u64,
    },
    /// Tower-stability with certificates.
    Stable {
        #[arg(allow_hyphen_values = true)]
        polynomial: String,
        /// Primes checked when no certificate is found.
        #[arg(short = 'P', default_value_t = 100)]
        prime_bound: u64,
        /// Integers searched for fixed points and collisions.
        #[arg(short = 'B', default_value_t = 1000)]
        search_bound: i64,
    },
    /// Whether b is a valid and an f-valid base.
    CheckBase {
        #[arg(allow_hyphen_values = true)]
        polynomial: String,
        #[arg(short)]
        b: u64,
    },
    /// Base-b digits of the limit of the tower of f at a.
    Limit {
        #[arg(allow_hyphen_values = true)]
        polynomial: String,
        #[arg(short, allow_hyphen_values = true)]
        a: i64,
        #[arg(short, default_value_t = 10)]
        b: u64,
        #[arg(short)]
        n: u32,
    },
    /// The tower y_0 = seed, y_(k+1) = f^(y_k)(a) modulo m.
    Tower {
        #[arg(allow_hyphen_values = true)]
        polynomial: String,
        #[arg(short, allow_hyphen_values = true)]
        a: i64,
        #[arg(short, default_value = "1")]
        seed: BigUint,
        #[arg(short)]
        m: BigUint,
        #[arg(short = 'k', default_value_t = 8)]
        steps: usize,
    },
    /// Whether f^x(a) ≡ x (mod m).
    Verify {
        #[arg(allow_hyphen_values = true)]
        polynomial: String,
        #[arg(short, allow_hyphen_values = true)]
        a: i64,
        #[arg(short)]
        x: BigUint,
        #[arg(short)]
        m: BigUint,
        /// Iterate exactly x times instead of reducing through the orbit.
        #[arg(long)]
        literal: bool,
    },
    /// Partial product of the tower-stable density over primes up to P.
    Ctow {
        #[arg(short = 'P', default_value_t = 200)]
        prime_bound: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Period { .. } => "period",
            Command::Chain { .. } => "chain",
            Command::Stable { .. } => "stable",
            Command::CheckBase { .. } => "check-base",
            Command::Limit { .. } => "limit",
            Command::Tower { .. } => "tower",
            Command::Verify { .. } => "verify",
            Command::Ctow { .. } => "ctow",
        }
    }

    fn polynomial(&self) -> Option<&str> {
        match self {
            Command::Analyze { polynomial, .. }
            | Command::Period { polynomial, .. }
            | Command::Chain { polynomial, .. }
            | Command::Stable { polynomial, .. }
            | Command::CheckBase { polynomial, .. }
            | Command::Limit { polynomial, .. }
            | Command::Tower { polynomial, .. }
            | Command::Verify { polynomial, .. } => Some(polynomial),
            Command::Ctow { .. } => None,
        }
    }
}

fn run(command: &Command, config: &Config) -> Result<Output, Error> {
    let f = match command.polynomial() {
        Some(text) => parse_poly(text)?,
        None => Polynomial::zero(),
    };
    match command {
        Command::Analyze { m, a, .. } => match (*a, *m > config.enumeration_ceiling) {
            (Some(a), true) => cli::orbit_only(&f, *m, a, config),
            _ => cli::analyze(&f, *m, *a, config),
        },
        Command::Period { m, a, .. } => cli::period(&f, *m, *a, config),
        Command::Chain { m, .. } => cli::chain(&f, *m, config),
        Command::Stable {
            prime_bound,
            search_bound,
            ..
        } => cli::stable(&f, *prime_bound, *search_bound),
        Command::CheckBase { b, .. } => cli::check_base(&f, *b, config),
        Command::Limit { a, b, n, .. } => cli::limit(&f, *a, *b, *n, config),
        Command::Tower { a, seed, m, steps, .. } => cli::tower(&f, *a, seed, m, *steps, config),
        Command::Verify { a, x, m, literal, .. } => {
            let mode = if *literal { Mode::Literal } else { Mode::Reduced };
            cli::verify(&f, *a, x, m, mode, config)
        }
        Command::Ctow { prime_bound } => Ok(cli::ctow(*prime_bound)),
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let outcome = args.budgets.config().and_then(|cfg| run(&args.command, &cfg));
    let code = match outcome {
        Ok(out) => {
            if args.json {
                println!("{}", serde_json::to_string_pretty(&out.report).expect("report serializes"));
            } else {
                print!("{}", out.human);
                for w in &out.report.warnings {
                    eprintln!("warning: {w}");
                }
            }
            out.exit_code()
        }
        Err(err) => {
            if args.json {
                let inputs = json!({ "polynomial": args.command.polynomial() });
                let v = cli::error_json(args.command.name(), inputs, &err);
                println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            } else {
                eprintln!("error: {err}");
            }
            cli::exit_code(&err)
        }
    };
    ExitCode::from(code as u8)
}
