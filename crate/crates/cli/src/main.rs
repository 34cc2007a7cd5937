//! Command-line driver for the radar, BER, PAPR and aliasing-check
//! experiments. Outputs are plot-ready CSV/JSON/binary files; a fixed
//! master seed makes every run byte-reproducible.

use clap::{Args, Parser, Subcommand};
use isac_core::experiment::{self, alias_run, ber, papr, radar_run, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "isac",
    version,
    about = "OFDM joint sensing/communication baseband simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON experiment configuration; bundled defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Range-Doppler maps, peak detection and ghost classification.
    Radar(CommonArgs),
    /// Monte-Carlo BER curves over the configured conditions.
    Ber(CommonArgs),
    /// PAPR CCDF comparison across the waveforms.
    Papr(CommonArgs),
    /// Verify the subcarrier-aliasing identities; nonzero exit on
    /// violation.
    AliasCheck(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Radar(a) | Command::Ber(a) | Command::Papr(a) | Command::AliasCheck(a) => a,
        }
    }
}

fn load_config(args: &CommonArgs) -> isac_core::Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> isac_core::Result<bool> {
    let args = cli.command.common().clone();
    let config = load_config(&args)?;
    std::fs::create_dir_all(&args.out)?;

    match cli.command {
        Command::Radar(_) => {
            let runs = radar_run::run_radar(&config)?;
            radar_run::write_radar_outputs(&args.out, &runs)?;
            for r in &runs {
                let rep = &r.report;
                println!(
                    "{}: floor {:.1} dB, {} peaks ({} expected locations)",
                    rep.rule,
                    rep.noise_floor_db,
                    rep.report.peaks.len(),
                    r.predictions.iter().map(|p| p.bins.len()).sum::<usize>()
                );
            }
            Ok(true)
        }
        Command::Ber(_) => {
            let records = ber::run_ber(&config, args.jobs)?;
            let path = args.out.join("ber.csv");
            ber::write_ber_csv(
                std::io::BufWriter::new(std::fs::File::create(&path)?),
                &records,
            )?;
            println!("wrote {} records to {}", records.len(), path.display());
            Ok(true)
        }
        Command::Papr(_) => {
            let result = papr::run_papr(&config)?;
            let path = args.out.join("papr.csv");
            papr::write_papr_csv(
                std::io::BufWriter::new(std::fs::File::create(&path)?),
                &result,
            )?;
            for (rule, _) in &result.ccdf {
                if let Some(t) = result.threshold_at(*rule, 1e-3) {
                    println!("{}: PAPR at CCDF 1e-3 = {:.2} dB", rule.label(), t);
                }
            }
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::AliasCheck(_) => {
            let cases = alias_run::run_alias_check(config.master_seed)?;
            for c in &cases {
                println!(
                    "Nc={:3} mu={} Na={:3} N_f={:3}: max rel err {:.3e}{}",
                    c.nc,
                    c.mu,
                    c.na,
                    c.n_f,
                    c.max_rel_err,
                    c.zero_pad_err
                        .map(|e| format!(", zero-pad err {e:.3e}"))
                        .unwrap_or_default()
                );
            }
            let ok = experiment::alias_run::all_within_tolerance(&cases);
            println!(
                "worst dual-path error {:.3e} (tolerance {:.0e}): {}",
                experiment::alias_run::worst_error(&cases),
                experiment::ALIAS_TOLERANCE,
                if ok { "ok" } else { "VIOLATION" }
            );
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            // Machine-readable error record on stderr.
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
