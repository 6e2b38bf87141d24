use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use weyl_lab::cli_io::{
    emit, parse_config, resolve_out_dir, run_propagate, run_spectrum, run_sweep, OutputFormat, ResultRecord,
    EXIT_NOT_ACHIEVED, OUT_DIR_ENV,
};

#[derive(Parser)]
#[command(
    name = "weyl-lab",
    version,
    about = "Essential spectra and phase-space localization of anisotropic symbols"
)]
struct Cli {
    /// Experiment config (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; falls back to $WEYL_LAB_OUT, then ./results
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: OutputFormat,
    /// Overrides the seed in the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Box eigenvalues against the predicted essential spectrum
    Spectrum,
    /// Localization norms, dynamical bound and symbol decay over receding regions
    Sweep,
    /// Static norm against time-evolved values over receding regions
    Propagate,
    /// Check the config and list every problem
    Validate,
}

fn summary(r: &ResultRecord) -> String {
    let mut lines = vec![format!("{} ({}, config {})", r.run_id, r.version, &r.config_hash[..12])];
    if let Some(s) = &r.spectrum {
        lines.push(format!(
            "  spectrum: {} eigenvalues, predicted {:?}, one-sided distance {:.4e}{}",
            s.eigenvalues.len(),
            s.predicted.intervals().iter().map(|i| (i.lo, i.hi)).collect::<Vec<_>>(),
            s.one_sided_hausdorff,
            if s.within_tolerance { "" } else { " (above tolerance)" }
        ));
    }
    for row in &r.rows {
        lines.push(format!(
            "  offset {:>8.3}  norm {:.4e}  dynamical {}  symbol {}",
            row.offset,
            row.localization_norm,
            row.dynamical_sup
                .map(|v| format!("{v:.4e}"))
                .unwrap_or_else(|| "-".into()),
            row.symbol_decay
                .map(|v| format!("{v:.4e}"))
                .unwrap_or_else(|| "-".into()),
        ));
    }
    if let Some(s) = &r.sweep {
        lines.push(match s.first_below {
            Some(a) => format!("  epsilon {} reached at offset {a}", s.epsilon),
            None => format!("  epsilon {} not reached (smallest norm {:.4e})", s.epsilon, s.min_norm),
        });
        if s.plateau {
            lines.push("  curve plateaus above the plateau tolerance".into());
        }
    }
    lines.join("\n")
}

fn run(cli: Cli) -> weyl_lab::Result<ExitCode> {
    let Some(path) = cli.config.as_deref() else {
        return Err(weyl_lab::Error::invalid("--config <path> is required"));
    };
    let mut validated = parse_config(path)?;
    if let Some(seed) = cli.seed {
        validated
            .normalizations
            .push(format!("seed overridden to {seed} from the command line"));
        validated.config.seed = seed;
    }
    let record = match cli.command {
        Command::Validate => {
            if !cli.quiet {
                println!("{}: ok", path.display());
                for n in &validated.normalizations {
                    println!("  {n}");
                }
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Spectrum => run_spectrum(&validated)?,
        Command::Sweep => run_sweep(&validated)?,
        Command::Propagate => run_propagate(&validated)?,
    };
    let out = resolve_out_dir(cli.out.as_deref(), std::env::var_os(OUT_DIR_ENV));
    let written = emit(&record, cli.format, &out)?;
    if !cli.quiet {
        println!("{}", summary(&record));
        for p in &written {
            println!("  wrote {}", p.display());
        }
    }
    let achieved = record.sweep.as_ref().is_none_or(|s| s.achieved);
    Ok(if achieved {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NOT_ACHIEVED as u8)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
