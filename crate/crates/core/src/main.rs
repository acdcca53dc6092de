use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vlc_secrecy::commands::{
    bounds_csv, cmd_bounds, cmd_oracle, cmd_region, cmd_sweep, cmd_tables, CmdOptions, TableSetup,
};
use vlc_secrecy::config::{parse_config, RunConfig};
use vlc_secrecy::quadrature::QuadratureSpec;
use vlc_secrecy::Error;

#[derive(Parser)]
#[command(name = "vlc-secrecy", version, about = "Secrecy-capacity bounds for visible-light wiretap channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate all bounds at one operating point.
    Bounds(Common),
    /// Evaluate bounds along the [sweep] grid and emit CSV.
    Sweep(Common),
    /// Emit the high-SNR gap tables (two CSVs).
    Tables(TablesArgs),
    /// Map insecure eavesdropper positions over the [region] grid.
    Region(Common),
    /// Compare the bounds against numerical mutual information.
    Oracle(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
}

#[derive(Args)]
struct Common {
    /// Configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to the config's [output] path, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutFormat,
    /// Include the Gaussian main-channel capacity as a reference column.
    #[arg(long)]
    shannon: bool,
    /// Absolute tolerance of the oracle's entropy quadrature.
    #[arg(long, default_value_t = 1e-8)]
    quad_tol: f64,
    /// Worker threads for sweeps and region maps.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct TablesArgs {
    /// Optional configuration supplying geometry, xi and noise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the two CSV files; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutFormat,
    #[arg(long)]
    threads: Option<usize>,
}

fn load(path: &Path) -> Result<RunConfig, Error> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn set_threads(n: Option<usize>) -> Result<(), Error> {
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::InvalidInput("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Tables(args) => {
            let OutFormat::Csv = args.format;
            set_threads(args.threads)?;
            let setup = match &args.config {
                Some(p) => TableSetup::from_config(&load(p)?),
                None => TableSetup::default(),
            };
            let (avg, peak) = cmd_tables(&setup)?;
            match &args.out {
                Some(dir) => {
                    fs::create_dir_all(dir).map_err(|source| Error::Io {
                        path: dir.clone(),
                        source,
                    })?;
                    emit(&avg, Some(&dir.join("gaps_average.csv")))?;
                    emit(&peak, Some(&dir.join("gaps_peak.csv")))?;
                }
                None => {
                    println!("# average intensity only: upper - lower_1");
                    print!("{avg}");
                    println!();
                    println!("# average and peak intensity (A = P): upper - lower_1");
                    print!("{peak}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds(c) | Command::Sweep(c) | Command::Region(c) | Command::Oracle(c)
            if !(c.quad_tol > 0.0 && c.quad_tol.is_finite()) =>
        {
            Err(Error::InvalidInput(format!("--quad-tol must be positive, got {}", c.quad_tol)))
        }
        cmd => {
            let (c, kind) = match cmd {
                Command::Bounds(c) => (c, 0),
                Command::Sweep(c) => (c, 1),
                Command::Region(c) => (c, 2),
                Command::Oracle(c) => (c, 3),
                Command::Tables(_) => unreachable!(),
            };
            let OutFormat::Csv = c.format;
            set_threads(c.threads)?;
            let cfg = load(&c.config)?;
            let opts = CmdOptions {
                shannon: c.shannon,
                quad: QuadratureSpec::with_abs_tol(c.quad_tol),
            };
            let out = c.out.clone().or_else(|| cfg.output.path.clone());
            match kind {
                0 => {
                    print!("{}", cmd_bounds(&cfg, &opts)?);
                    if let Some(p) = &out {
                        emit(&bounds_csv(&cfg, &opts)?, Some(p))?;
                    }
                }
                1 => emit(&cmd_sweep(&cfg, &opts)?, out.as_deref())?,
                2 => emit(&cmd_region(&cfg)?, out.as_deref())?,
                _ => {
                    let o = cmd_oracle(&cfg, &opts)?;
                    emit(&o.text, out.as_deref())?;
                    if !o.sandwich_ok {
                        return Ok(ExitCode::from(2));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
