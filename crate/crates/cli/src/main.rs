use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use entfactor::campaign::{
    render, render_campaign, run_campaign, run_sweep, CampaignConfig, Law, OutputFormat,
    SweepConfig, DEFAULT_TOLERANCE,
};
use entfactor::channels::{apply_one_sided, Side};
use entfactor::circuits::entanglement_swap;
use entfactor::duality::choi_state;
use entfactor::entanglement::{concurrence, disentanglement_threshold, SideConfig};
use entfactor::io::{matrix_to_json, parse_channel_spec, parse_state_spec, Family};
use entfactor::states::{density_from_pure, pure_chi, DensityMatrix};

#[derive(Parser)]
#[command(
    name = "entfactor",
    version,
    about = "Concurrence, Kraus channels and entanglement-decay checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the concurrence of a two-qubit state.
    Concurrence {
        /// Builtin (phi_plus, chi:W, maximally_mixed, random_pure:SEED,
        /// random_mixed:SEED:RANK) or a JSON file with a 4x4 matrix.
        input: String,
    },
    /// Print the Choi state of a channel as JSON.
    Choi {
        #[arg(long)]
        channel: String,
    },
    /// Run a seeded verification campaign for one law.
    VerifyLaw(VerifyArgs),
    /// Tabulate a decay curve under a time-parametrized channel family.
    Sweep(SweepArgs),
    /// Find the parameter at which the Choi-concurrence bound vanishes.
    Threshold {
        /// amplitude_damping, phase_flip or depolarizing.
        #[arg(long)]
        channel: String,
        /// Apply the channel to both qubits.
        #[arg(long)]
        two_sided: bool,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Compare entanglement swapping with the direct one-sided channel.
    SwapDemo {
        #[arg(long, default_value_t = 0.5)]
        omega: f64,
        #[arg(long, default_value = "identity")]
        channel: String,
        #[arg(long, default_value = "text", value_parser = ["text", "json"])]
        format: String,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_law)]
    law: Law,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed omega values to cycle through; repeat the flag for a grid.
    #[arg(long)]
    omega: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: OutputFormat,
}

#[derive(Args)]
struct SweepArgs {
    /// amplitude_damping (gamma = 1 - exp(-G t)) or phase_flip
    /// (p = (1 - exp(-G t)) / 2).
    #[arg(long)]
    channel: String,
    #[arg(long, default_value_t = 1.0)]
    gamma_rate: f64,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    /// Initial state chi(omega); ignored when --state is given.
    #[arg(long, default_value_t = 0.5)]
    omega: f64,
    /// Initial state as a builtin spec or JSON file.
    #[arg(long)]
    state: Option<String>,
    /// Channel applied once to the right qubit to prepare the initial state.
    #[arg(long)]
    pre_channel: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: OutputFormat,
}

fn parse_law(s: &str) -> std::result::Result<Law, String> {
    s.parse().map_err(|e: entfactor::Error| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    s.parse().map_err(|e: entfactor::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every check the command performs passed.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Concurrence { input } => {
            let rho = parse_state_spec(&input)?;
            println!("{:.12}", concurrence(&rho)?);
            Ok(true)
        }
        Command::Choi { channel } => {
            let ch = parse_channel_spec(&channel)?;
            let cs = choi_state(&ch)?;
            let out = json!({
                "channel": ch.name,
                "prob": cs.prob,
                "concurrence": concurrence(&cs.state)?,
                "state": matrix_to_json(cs.state.matrix()),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
        Command::VerifyLaw(args) => {
            let cfg = CampaignConfig {
                law: args.law,
                trials: args.trials,
                seed: args.seed,
                omega_grid: args.omega,
                tolerance: args.tolerance,
            };
            let campaign = run_campaign(&cfg)?;
            print!("{}", render_campaign(&campaign, args.format)?);
            eprintln!("{}", campaign.summary);
            Ok(campaign.summary.passed)
        }
        Command::Sweep(args) => sweep(args),
        Command::Threshold {
            channel,
            two_sided,
            tolerance,
        } => {
            let family: Family = channel.parse()?;
            let sides = if two_sided {
                SideConfig::TwoSided
            } else {
                SideConfig::OneSided
            };
            let t = disentanglement_threshold(|x| family.channel(x), sides, tolerance)?;
            println!("{t:.6}");
            Ok(true)
        }
        Command::SwapDemo {
            omega,
            channel,
            format,
        } => {
            let ch = parse_channel_spec(&channel)?;
            let swap = entanglement_swap(omega, &ch)?;
            let chi = density_from_pure(&pure_chi(omega)?);
            let direct = apply_one_sided(&ch, &chi, Side::Right)?;
            let deviation = swap.state.max_diff(direct.state.matrix());
            let c_swap = concurrence(&swap.two_qubit_state()?)?;
            let c_direct = concurrence(&direct.state)?;
            if format == "json" {
                let out = json!({
                    "channel": ch.name,
                    "omega": omega,
                    "probability": swap.prob,
                    "deviation": deviation,
                    "concurrence_swap": c_swap,
                    "concurrence_direct": c_direct,
                });
                println!("{}", serde_json::to_string_pretty(&out)?);
            } else {
                println!("channel: {}", ch.name);
                println!("omega: {omega}");
                println!("probability: {:.12}", swap.prob);
                println!("deviation: {deviation:.3e}");
                println!("concurrence_swap: {c_swap:.12}");
                println!("concurrence_direct: {c_direct:.12}");
            }
            Ok(deviation <= DEFAULT_TOLERANCE)
        }
    }
}

fn sweep(args: SweepArgs) -> Result<bool> {
    let family: Family = args.channel.parse()?;
    let mut initial: DensityMatrix = match &args.state {
        Some(spec) => parse_state_spec(spec)?,
        None => density_from_pure(&pure_chi(args.omega)?),
    };
    if let Some(spec) = &args.pre_channel {
        let pre = parse_channel_spec(spec)?;
        initial = apply_one_sided(&pre, &initial, Side::Right)
            .context("preparing the initial state")?
            .state;
    }
    if args.steps == 0 {
        bail!("--steps must be at least 1");
    }
    let rows = run_sweep(&SweepConfig {
        family,
        rate: args.gamma_rate,
        t_max: args.t_max,
        steps: args.steps,
        initial,
    })?;
    print!("{}", render(&rows, args.format)?);
    let worst = rows
        .iter()
        .map(|r| (r.c_predicted - r.c_direct).abs())
        .fold(0.0, f64::max);
    eprintln!("max |c_predicted - c_direct| = {worst:e}");
    Ok(worst <= args.tolerance)
}
