use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use otfs_core::bounds::GainModel;
use otfs_sim::config::{ChannelMode, DetectorSelection, ExperimentConfig};
use otfs_sim::experiment::{n0_from_db, Simulator};
use otfs_sim::output::{self, Format};
use otfs_sim::{
    emit_ber, emit_convergence, emit_mfb, load_config, run_ber_sweep, run_convergence_study, run_mfb_sweep, snr_grid,
    with_threads, MfbMethod, SimResult,
};

#[derive(Parser, Debug)]
#[command(name = "otfs", version, about = "OTFS hybrid detector experiments")]
struct Cli {
    /// Experiment configuration (TOML). Built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ChannelOverrides {
    /// Number of paths.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, value_enum)]
    channel: Option<ChannelArg>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum ChannelArg {
    IsfftInteger,
    IztInteger,
    IztFractional,
}

impl From<ChannelArg> for ChannelMode {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::IsfftInteger => ChannelMode::IsfftInteger,
            ChannelArg::IztInteger => ChannelMode::IztInteger,
            ChannelArg::IztFractional => ChannelMode::IztFractional,
        }
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum DetectorArg {
    Hybrid,
    FullLmmse,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// BER versus SNR.
    Ber {
        #[command(flatten)]
        channel: ChannelOverrides,
        #[arg(long, value_enum)]
        detector: Option<DetectorArg>,
        /// Frame cap per SNR point.
        #[arg(long)]
        frames: Option<u64>,
        /// Comma-separated SNR grid in dB.
        #[arg(long, value_delimiter = ',')]
        snr_db: Option<Vec<f64>>,
    },
    /// Message-MSE samples and iterations to termination.
    Converge {
        #[command(flatten)]
        channel: ChannelOverrides,
    },
    /// Matched filter bound.
    Mfb {
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 0.0)]
        snr_db_start: f64,
        #[arg(long, default_value_t = 20.0)]
        snr_db_stop: f64,
        #[arg(long, default_value_t = 2.0)]
        snr_db_step: f64,
        #[arg(long, value_enum, default_value_t = MfbMethod::Closed)]
        method: MfbMethod,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        /// Scale the symbol by the combined gain itself rather than its square root.
        #[arg(long)]
        literal_gain: bool,
    },
    /// Write one frame's channel matrix as CSV.
    ChannelDump {
        #[command(flatten)]
        channel: ChannelOverrides,
        #[arg(long, default_value_t = 0)]
        frame: u64,
        /// Dump the precoded matrix.
        #[arg(long)]
        precoded: bool,
        /// Dump the active-block mask as `d,c` pairs instead.
        #[arg(long)]
        mask: bool,
    },
    /// Run the hybrid detector on one frame.
    Detect {
        #[command(flatten)]
        channel: ChannelOverrides,
        #[arg(long, default_value_t = 0)]
        frame: u64,
        #[arg(long, default_value_t = 10.0)]
        snr_db: f64,
        /// Emit `iter,eta,mse` per iteration instead of the full report.
        #[arg(long)]
        dump_iterations: bool,
    },
}

fn apply_overrides(cfg: &mut ExperimentConfig, o: &ChannelOverrides) {
    if let Some(p) = o.p {
        cfg.paths = p;
    }
    if let Some(c) = o.channel {
        cfg.channel = c.into();
    }
}

fn run(cli: Cli) -> SimResult<()> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli
        .out
        .as_deref()
        .or(cfg.output.as_deref().map(std::path::Path::new))
        .map(PathBuf::from);
    let out = out.as_deref();

    match cli.command {
        Command::Ber {
            channel,
            detector,
            frames,
            snr_db,
        } => {
            apply_overrides(&mut cfg, &channel);
            if let Some(d) = detector {
                cfg.detector = match d {
                    DetectorArg::Hybrid => DetectorSelection::Hybrid,
                    DetectorArg::FullLmmse => DetectorSelection::FullLmmse,
                    DetectorArg::Both => DetectorSelection::Both,
                };
            }
            if let Some(f) = frames {
                cfg.frames = f;
            }
            if let Some(s) = snr_db {
                cfg.snr_db = s;
            }
            cfg.validate()?;
            eprintln!("{}", cfg.banner());
            let curves = with_threads(cli.threads, || run_ber_sweep(&cfg))??;
            emit_ber(&curves, out, cli.format)
        }
        Command::Converge { channel } => {
            apply_overrides(&mut cfg, &channel);
            cfg.validate()?;
            eprintln!("{}", cfg.banner());
            let report = with_threads(cli.threads, || run_convergence_study(&cfg))??;
            emit_convergence(&report, out, cli.format)
        }
        Command::Mfb {
            p,
            snr_db_start,
            snr_db_stop,
            snr_db_step,
            method,
            trials,
            literal_gain,
        } => {
            let grid = snr_grid(snr_db_start, snr_db_stop, snr_db_step);
            let model = if literal_gain {
                GainModel::Literal
            } else {
                GainModel::MatchedFilter
            };
            let rows = with_threads(cli.threads, || run_mfb_sweep(p, &grid, method, trials, model, cfg.seed))??;
            emit_mfb(&rows, out, cli.format)
        }
        Command::ChannelDump {
            channel,
            frame,
            precoded,
            mask,
        } => {
            apply_overrides(&mut cfg, &channel);
            let sim = Simulator::new(&cfg)?;
            let paths = sim.sample_paths(frame)?;
            let h = sim.build_channel(&paths)?;
            let text = if mask {
                let hp = sim.map().precode_channel(h.matrix())?;
                let sys = sim.partition(&hp, &paths)?;
                output::mask_csv(&sys)
            } else if precoded {
                output::matrix_csv(&sim.map().precode_channel(h.matrix())?, 1e-12)
            } else {
                output::matrix_csv(h.matrix(), 1e-12)
            };
            output::write_output(out, &text)
        }
        Command::Detect {
            channel,
            frame,
            snr_db,
            dump_iterations,
        } => {
            apply_overrides(&mut cfg, &channel);
            let sim = Simulator::new(&cfg)?;
            let r = sim.realize(frame)?;
            let (report, errors) = sim.run_hybrid(&r, n0_from_db(snr_db), &cfg.hybrid, &[])?;
            eprintln!(
                "frame {frame} at {snr_db} dB: L = {}, {} iterations, {errors} bit errors",
                r.system.l(),
                report.iterations_used
            );
            let text = if dump_iterations {
                let mut s = String::from("iter,eta,mse\n");
                let mse = report.message_mse_per_iter.clone().unwrap_or_default();
                for (i, eta) in report.eta_history.iter().enumerate() {
                    let m = mse.get(i).map(|v| format!("{v:e}")).unwrap_or_default();
                    s.push_str(&format!("{},{eta},{m}\n", i + 1));
                }
                s
            } else {
                output::to_json(&report)?
            };
            output::write_output(out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
