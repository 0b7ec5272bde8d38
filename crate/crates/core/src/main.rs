//! Command-line front end.

use clap::{Args, Parser, Subcommand};

use abnormal::algebra::Rat;
use abnormal::report::{run, CarnotSub, CliError, Command, Options};

#[derive(Parser)]
#[command(
    name = "abnormal",
    version,
    about = "Exact toolkit for singular horizontal curves of polynomial distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Emit the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Seed for deterministic annihilator sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Bracket / flag depth cap.
    #[arg(long, global = true)]
    cap: Option<usize>,

    /// Singular-locus proximity threshold for integration.
    #[arg(long, global = true)]
    sigma_eps: Option<f64>,
}

#[derive(Args)]
struct ModelArg {
    /// Bundled model name or path to a model file.
    model: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a model and check every declared invariant.
    Validate(ModelArg),
    /// Print the bracket table of the frame up to the cap.
    Brackets(ModelArg),
    /// Bracket-generating flag at base points.
    Flag {
        #[command(flatten)]
        model: ModelArg,
        /// Named point to evaluate at (default: all declared points).
        #[arg(long)]
        point: Option<String>,
    },
    /// Print the constraint and bracket Hamiltonians.
    Hamiltonians(ModelArg),
    /// Print the symbolic bracket matrix.
    L2(ModelArg),
    /// Generic rank and singular-locus generators.
    Sigma(ModelArg),
    /// Classify a declared cotangent point (essential domain vs locus).
    Classify {
        #[command(flatten)]
        model: ModelArg,
        /// Named cotangent point.
        #[arg(long)]
        point: String,
    },
    /// K/J/I dimensions on stratum charts.
    Triple {
        #[command(flatten)]
        model: ModelArg,
        /// Stratum name (default: all declared strata).
        #[arg(long)]
        stratum: Option<String>,
    },
    /// Minimal-rank distribution on the base.
    Hmin {
        #[command(flatten)]
        model: ModelArg,
        /// Base coordinates, comma-separated rationals.
        #[arg(long, value_delimiter = ',')]
        x: Option<Vec<String>>,
        /// Base-stratum name to evaluate H on.
        #[arg(long)]
        base_stratum: Option<String>,
    },
    /// Symbolic characteristic-field generators.
    Charfield(ModelArg),
    /// Integrate the characteristic field from a declared point.
    Integrate {
        #[command(flatten)]
        model: ModelArg,
        /// Named cotangent start point.
        #[arg(long)]
        start: String,
        /// Duration.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Step size.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Write the full trajectory text to this path.
        #[arg(long)]
        out: Option<String>,
    },
    /// Polarized-group computations from the liealg section.
    Carnot {
        #[command(flatten)]
        model: ModelArg,
        #[command(subcommand)]
        sub: CarnotCmd,
    },
}

#[derive(Subcommand)]
enum CarnotCmd {
    /// Layer dimensions and step of the polarization.
    Flag,
    /// The minimal-rank subalgebra of the polarization.
    Vmin,
    /// The step-2 degeneration check.
    Step2,
    /// Kernel data at one covector of V-perp.
    Frakk {
        /// Covector coordinates, comma-separated rationals.
        #[arg(long, value_delimiter = ',')]
        p: Vec<String>,
    },
}

fn parse_rats(words: &[String]) -> Result<Vec<Rat>, CliError> {
    words
        .iter()
        .map(|w| {
            let (neg, body) = match w.trim().strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, w.trim()),
            };
            let mut parts = body.splitn(2, '/');
            let numer: num::BigInt = parts
                .next()
                .unwrap_or("")
                .parse()
                .map_err(|_| CliError::BadArgs(format!("bad rational '{w}'")))?;
            let denom: num::BigInt = match parts.next() {
                Some(d) => d
                    .parse()
                    .map_err(|_| CliError::BadArgs(format!("bad rational '{w}'")))?,
                None => 1.into(),
            };
            if denom == 0.into() {
                return Err(CliError::BadArgs(format!("zero denominator in '{w}'")));
            }
            let r = Rat::new(numer, denom);
            Ok(if neg { -r } else { r })
        })
        .collect()
}

fn main() {
    let cli = Cli::parse();
    let mut opts = Options::default();
    if let Some(seed) = cli.seed {
        opts.seed = seed;
    }
    if let Some(cap) = cli.cap {
        opts.cap = cap;
    }
    if let Some(eps) = cli.sigma_eps {
        opts.sigma_eps = eps;
    }
    let result = build_and_run(cli.command, &opts);
    match result {
        Ok(report) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report.to_json()).unwrap()
                );
            } else {
                print!("{}", report.text);
                for w in &report.warnings {
                    eprintln!("warning: {w}");
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

fn build_and_run(cmd: Cmd, opts: &Options) -> Result<abnormal::report::Report, CliError> {
    let (command, model) = match cmd {
        Cmd::Validate(m) => (Command::Validate, m.model),
        Cmd::Brackets(m) => (Command::Brackets, m.model),
        Cmd::Flag { model, point } => (Command::Flag { point }, model.model),
        Cmd::Hamiltonians(m) => (Command::Hamiltonians, m.model),
        Cmd::L2(m) => (Command::L2, m.model),
        Cmd::Sigma(m) => (Command::Sigma, m.model),
        Cmd::Classify { model, point } => (Command::Classify { point }, model.model),
        Cmd::Triple { model, stratum } => (Command::Triple { stratum }, model.model),
        Cmd::Hmin {
            model,
            x,
            base_stratum,
        } => {
            let x = match x {
                Some(words) => Some(parse_rats(&words)?),
                None => None,
            };
            (Command::Hmin { x, base_stratum }, model.model)
        }
        Cmd::Charfield(m) => (Command::Charfield, m.model),
        Cmd::Integrate {
            model,
            start,
            t,
            dt,
            out,
        } => (
            Command::Integrate {
                start,
                t_end: t,
                dt,
                out,
            },
            model.model,
        ),
        Cmd::Carnot { model, sub } => {
            let sub = match sub {
                CarnotCmd::Flag => CarnotSub::Flag,
                CarnotCmd::Vmin => CarnotSub::Vmin,
                CarnotCmd::Step2 => CarnotSub::Step2,
                CarnotCmd::Frakk { p } => CarnotSub::FrakK { p: parse_rats(&p)? },
            };
            (Command::Carnot(sub), model.model)
        }
    };
    run(&command, &model, opts)
}
