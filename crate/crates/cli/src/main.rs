use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use sbmimo::bench::{parse_snr_grid, run_sweep, run_table1, write_csv, SweepConfig};
use sbmimo::detect::DetectorSpec;
use sbmimo::du::grad_check;
use sbmimo::trainer::{batch_loss, make_batch, save_params, train, ParamsFile, TrainConfig};
use sbmimo::ComplexDims;

#[derive(Parser)]
#[command(
    name = "sbmimo",
    about = "Simulated-bifurcation MIMO detectors: BER sweeps, training, and diagnostics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DimArgs {
    /// Transmit antennas.
    #[arg(long, default_value_t = 16)]
    nt: usize,
    /// Receive antennas.
    #[arg(long, default_value_t = 16)]
    nr: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER-vs-SNR sweep; writes a CSV.
    Sweep {
        #[command(flatten)]
        dims: DimArgs,
        /// SNR grid in dB as min:max:step (inclusive).
        #[arg(long, default_value = "0:24:2")]
        snr: String,
        /// Detector to run (repeatable): mmse, ml-sb, g-sb, lm-sb, du-lm-sb.
        #[arg(long = "detector", required = true)]
        detectors: Vec<String>,
        /// SB iteration count T.
        #[arg(long = "t-iters", default_value_t = 50)]
        t_iters: usize,
        /// LM regularizer lambda (lm-sb).
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Guide penalty lambda_g (g-sb).
        #[arg(long = "lambda-g", default_value_t = 0.5)]
        lambda_g: f64,
        /// Minimum simulated bits per (SNR, detector) point.
        #[arg(long = "min-bits", default_value_t = 100_000)]
        min_bits: u64,
        /// Minimum bit errors per point (until the trial cap).
        #[arg(long = "min-errors", default_value_t = 100)]
        min_errors: u64,
        /// Hard cap on trials per point.
        #[arg(long = "max-trials", default_value_t = 1_000_000)]
        max_trials: u64,
        /// Master seed; the CSV is a pure function of the configuration.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trained parameter file (required by du-lm-sb).
        #[arg(long)]
        params: Option<PathBuf>,
        /// Output CSV path.
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        /// Worker threads (0 = default pool).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Train the unfolded detector parameters and write them as JSON.
    Train {
        #[command(flatten)]
        dims: DimArgs,
        /// Unfolded depth T.
        #[arg(long = "t-iters", default_value_t = 10)]
        t_iters: usize,
        /// Number of parameter updates.
        #[arg(long, default_value_t = 1000)]
        updates: usize,
        /// Mini-batch size.
        #[arg(long = "batch-size", default_value_t = 2000)]
        batch_size: usize,
        /// Adam learning rate.
        #[arg(long, default_value_t = 2e-4)]
        lr: f64,
        /// Training SNR range in dB as lo:hi.
        #[arg(long = "snr-range", default_value = "0:30")]
        snr_range: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the trained parameters.
        #[arg(long = "params-out", default_value = "params.json")]
        params_out: PathBuf,
    },
    /// Compare reverse-mode gradients against finite differences.
    Gradcheck {
        #[command(flatten)]
        dims: DimArgs,
        #[arg(long = "t-iters", default_value_t = 5)]
        t_iters: usize,
        /// Number of random instances.
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the objective-value table of the built-in 3x3 example.
    Table1 {
        /// Also write the table as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_detector(
    name: &str,
    t_iters: usize,
    lambda: f64,
    lambda_g: f64,
    params: &Option<PathBuf>,
) -> anyhow::Result<DetectorSpec<f64>> {
    Ok(match name {
        "mmse" => DetectorSpec::mmse(),
        "ml-sb" => DetectorSpec::ml_sb(t_iters),
        "g-sb" => DetectorSpec::g_sb(t_iters, lambda_g),
        "lm-sb" => DetectorSpec::lm_sb(t_iters, lambda),
        "du-lm-sb" => {
            let path = params
                .clone()
                .context("--detector du-lm-sb requires --params <file>")?;
            DetectorSpec::du_lm_sb(path)
        }
        other => bail!("unknown detector {other} (expected mmse, ml-sb, g-sb, lm-sb, du-lm-sb)"),
    })
}

fn parse_range(text: &str) -> anyhow::Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        bail!("range must be lo:hi, got {text}");
    }
    let lo: f64 = parts[0].parse().context("bad range low end")?;
    let hi: f64 = parts[1].parse().context("bad range high end")?;
    if lo > hi {
        bail!("range is inverted: {text}");
    }
    Ok((lo, hi))
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Sweep {
            dims,
            snr,
            detectors,
            t_iters,
            lambda,
            lambda_g,
            min_bits,
            min_errors,
            max_trials,
            seed,
            params,
            out,
            workers,
        } => {
            let dims = ComplexDims::new(dims.nt, dims.nr)?;
            let grid = parse_snr_grid(&snr)?;
            let specs = detectors
                .iter()
                .map(|d| parse_detector(d, t_iters, lambda, lambda_g, &params))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let mut cfg = SweepConfig::new(dims, grid, specs);
            cfg.min_bits = min_bits;
            cfg.min_errors = min_errors;
            cfg.max_trials = max_trials;
            cfg.seed = seed;
            cfg.workers = workers;
            let records = run_sweep(&cfg)?;
            for r in &records {
                println!(
                    "snr {:>5} dB  {:<18} ber {:.3e}  ({} errors / {} bits, {} trials)",
                    r.snr_db, r.detector, r.ber, r.bit_errors, r.total_bits, r.trials
                );
            }
            write_csv(&records, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Train {
            dims,
            t_iters,
            updates,
            batch_size,
            lr,
            snr_range,
            seed,
            params_out,
        } => {
            let dims = ComplexDims::new(dims.nt, dims.nr)?;
            let (lo, hi) = parse_range(&snr_range)?;
            let mut cfg = TrainConfig::<f64>::standard(dims, seed);
            cfg.t = t_iters;
            cfg.num_updates = updates;
            cfg.batch_size = batch_size;
            cfg.learning_rate = lr;
            cfg.snr_range_db = (lo, hi);
            let (params, history) = train(&cfg)?;
            let final_loss = history.last().copied().unwrap_or(f64::NAN);
            // Held-out loss on a fresh batch for a quick sanity line.
            let mut rng = sbmimo::seeds::rng_from(seed, &[0x6865, 0x6c64]);
            let held_out = make_batch(&cfg, &mut rng);
            let held_loss = batch_loss(&held_out, &params, &cfg.fixed)?;
            println!(
                "trained T={} in {} updates; final batch loss {:.6}, held-out loss {:.6}",
                cfg.t, updates, final_loss, held_loss
            );
            let file = ParamsFile::from_training(&cfg, &params, final_loss);
            save_params(&file, &params_out)?;
            println!("wrote {}", params_out.display());
        }
        Command::Gradcheck {
            dims,
            t_iters,
            trials,
            seed,
        } => {
            let dims = ComplexDims::new(dims.nt, dims.nr)?;
            let mut worst_deltas: f64 = 0.0;
            let mut worst_eta: f64 = 0.0;
            let mut worst_lambda: f64 = 0.0;
            for t in 0..trials {
                let rep = grad_check(seed.wrapping_add(t), dims, t_iters)?;
                worst_deltas = worst_deltas.max(rep.max_rel_deltas);
                worst_eta = worst_eta.max(rep.max_rel_eta);
                worst_lambda = worst_lambda.max(rep.max_rel_lambda);
            }
            let overall = worst_deltas.max(worst_eta).max(worst_lambda);
            println!(
                "gradient check over {trials} instances (N={}, T={t_iters}):",
                2 * dims.n_t()
            );
            println!("  max rel err step sizes: {worst_deltas:.3e}");
            println!("  max rel err eta:        {worst_eta:.3e}");
            println!("  max rel err lambda:     {worst_lambda:.3e}");
            if overall > 1e-4 {
                bail!("gradient check failed: max relative error {overall:.3e} > 1e-4");
            }
            println!("PASS (max relative error {overall:.3e} <= 1e-4)");
        }
        Command::Table1 { out } => {
            let table = run_table1()?;
            print!("{}", table.render());
            if let Some(path) = out {
                std::fs::write(&path, table.to_json()?)?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
