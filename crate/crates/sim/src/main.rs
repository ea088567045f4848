use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use turbofec::siso::DEFAULT_UPDATE_DEPTH;
use turbofec_sim::harness::{ops_table, selftest};
use turbofec_sim::{
    run_sweep, Algorithm, ChannelKind, Code, Modulation, Rate, SimConfig, SimError, SimResult,
};

#[derive(Parser)]
#[command(name = "turbofec", version, about = "Turbo code BLER simulation over OFDM fading channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BLER against SNR; writes CSV and a JSON sidecar.
    Sweep(SweepArgs),
    /// Operations of one constituent decoding pass on a 384-bit block.
    Ops {
        #[arg(long, default_value_t = DEFAULT_UPDATE_DEPTH)]
        update_depth: usize,
    },
    /// Noiseless full-chain decode for every code, modulation and rate.
    Selftest {
        #[arg(long, default_value_t = 4)]
        blocks: u64,
    },
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "duo-binary")]
    code: Code,
    #[arg(long, default_value_t = 288)]
    size: usize,
    #[arg(long, value_enum, default_value = "1/2")]
    rate: Rate,
    #[arg(long, default_value = "qpsk")]
    modulation: Modulation,
    #[arg(long, value_enum, default_value = "epa")]
    channel: ChannelKind,
    /// km/h; defaults to 3 for EPA and 30 for EVA.
    #[arg(long)]
    speed: Option<f64>,
    #[arg(long, value_enum, default_value = "max-log-map")]
    algo: Algorithm,
    #[arg(long, default_value_t = DEFAULT_UPDATE_DEPTH)]
    update_depth: usize,
    #[arg(long, default_value_t = 8)]
    iters: usize,
    /// Comma-separated list, or start:step:stop.
    #[arg(long, default_value = "0:0.5:4")]
    snr: String,
    #[arg(long, default_value_t = 100)]
    min_errors: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_blocks: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    noiseless: bool,
    #[arg(long, default_value = "bler.csv")]
    out: PathBuf,
}

fn parse_snr(s: &str) -> SimResult<Vec<f64>> {
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| SimError::config("snr", format!("{x:?} is not a number")))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(SimError::config("snr", "range form is start:step:stop"));
        }
        let (a, step, b) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || b < a {
            return Err(SimError::config("snr", "range needs a positive step and stop >= start"));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| a + i as f64 * step).collect())
    } else {
        s.split(',').map(num).collect()
    }
}

fn run(cli: Cli) -> SimResult<()> {
    match cli.command {
        Command::Sweep(a) => {
            let mut cfg = SimConfig {
                code: a.code,
                block_size: a.size,
                rate: a.rate,
                modulation: a.modulation,
                channel: a.channel,
                speed_kmh: a.speed,
                algorithm: a.algo,
                update_depth: a.update_depth,
                iterations: a.iters,
                snr_db: parse_snr(&a.snr)?,
                noiseless: a.noiseless,
                min_errors: a.min_errors,
                max_blocks: a.max_blocks,
                seed: a.seed,
                ..SimConfig::default()
            };
            if let Some(w) = a.workers {
                cfg.workers = w;
            }
            let points = run_sweep(&cfg, Some(&a.out))?;
            println!("snr_db,blocks,blk_err,bit_err,bler");
            for p in points {
                println!("{},{},{},{},{:.4e}", p.snr_db, p.blocks, p.block_errors, p.bit_errors, p.bler);
            }
        }
        Command::Ops { update_depth } => {
            println!("{:<12}{:<14}{:>12}{:>14}", "code", "algorithm", "additions", "comparisons");
            for r in ops_table(update_depth)? {
                println!(
                    "{:<12}{:<14}{:>12.0}{:>14.0}",
                    format!("{:?}", r.code),
                    format!("{:?}", r.algorithm),
                    r.additions,
                    r.comparisons
                );
            }
        }
        Command::Selftest { blocks } => {
            let failures = selftest(&[192, 288, 384], blocks)?;
            if failures.is_empty() {
                println!("selftest passed");
            } else {
                for f in &failures {
                    eprintln!("FAIL {f}");
                }
                return Err(SimError::input(format!("{} configurations failed", failures.len())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
