use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use gbispectrum::bench::{bench_suite, fit_scaling, write_csv, BenchMode, BenchOptions, BenchRecord};
use gbispectrum::fourier::gft;
use gbispectrum::inversion::invert;
use gbispectrum::io;
use gbispectrum::recovery::{recovery_experiment, RecoveryConfig, EXPERIMENT_MAX_ITERS};
use gbispectrum::spectra::{
    canonical_plan, commutative_bispectrum, full_bispectrum, selection_plan, selective_bispectrum, triple_correlation,
};
use gbispectrum::{GroupContext, GroupKind, GroupSignal};

/// Triple correlation and G-bispectra of signals on finite groups.
#[derive(Parser)]
#[command(name = "gbsp", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Tc,
    Full,
    Selective,
    Commutative,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a seeded random signal with values in (0,1).
    RandomSignal {
        #[arg(long)]
        group: GroupKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute an invariant of a signal file.
    Compute {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover a signal from bispectrum JSON.
    Invert {
        #[arg(long)]
        spectra: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the Kronecker table as binary words, one row per irrep.
    KronTable {
        #[arg(long)]
        group: GroupKind,
    },
    /// Print the block layout of a Clebsch-Gordan matrix.
    Cg {
        #[arg(long)]
        group: GroupKind,
        /// Two irrep labels separated by a comma, e.g. `rho_1,rho_2`.
        #[arg(long)]
        pair: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the pair list used for the selective bispectrum.
    Plan {
        #[arg(long)]
        group: GroupKind,
        /// Run the lexicographic selection from this irrep instead.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Gradient-descent recovery from selective bispectra of random targets.
    Recover {
        #[arg(long)]
        group: GroupKind,
        #[arg(long, default_value_t = 15)]
        targets: usize,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        #[arg(long, default_value_t = EXPERIMENT_MAX_ITERS)]
        max_iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time the invariants over a range of group sizes.
    Bench {
        #[arg(long)]
        family: String,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "tc,full,selective,selective_fft")]
        modes: Vec<BenchMode>,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run repeats concurrently.
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

// Like println!, but a closed pipe (e.g. `| head`) ends the process quietly.
macro_rules! say {
    ($($t:tt)*) => {
        if writeln!(std::io::stdout().lock(), $($t)*).is_err() {
            std::process::exit(0);
        }
    };
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::RandomSignal { group, seed, out } => {
            io::write_signal(&out, &GroupSignal::random(&group, seed)?)?;
        }
        Cmd::Compute { mode, signal, out } => {
            let s = io::read_signal(&signal).with_context(|| format!("reading {}", signal.display()))?;
            let ctx = GroupContext::get(s.kind())?;
            let doc = match mode {
                Mode::Tc => io::triple_correlation_to_json(ctx.kind(), &triple_correlation(&ctx, &s)?),
                Mode::Full => io::bispectrum_to_json(&ctx, &full_bispectrum(&ctx, &gft(&ctx, &s)?)?),
                Mode::Commutative => io::bispectrum_to_json(&ctx, &commutative_bispectrum(&ctx, &gft(&ctx, &s)?)?),
                Mode::Selective => {
                    let plan = canonical_plan(&ctx)?;
                    io::bispectrum_to_json(&ctx, &selective_bispectrum(&ctx, &gft(&ctx, &s)?, &plan)?)
                }
            };
            io::write_json(&out, &doc)?;
        }
        Cmd::Invert { spectra, out, report } => {
            let doc = io::read_json(&spectra).with_context(|| format!("reading {}", spectra.display()))?;
            let (ctx, beta) = io::bispectrum_from_json(&doc)?;
            let res = invert(&ctx, &beta)?;
            let Some(sig) = &res.signal else {
                bail!("inversion produced no real signal");
            };
            io::write_signal(&out, sig)?;
            if let Some(r) = report {
                io::write_json(r, &io::inversion_report(&ctx, &res))?;
            }
        }
        Cmd::KronTable { group } => {
            let ctx = GroupContext::get(&group)?;
            let kt = ctx.kronecker();
            for i in 0..ctx.num_irreps() {
                say!("{}", kt.row_words(i).join(" "));
            }
        }
        Cmd::Cg { group, pair, out } => {
            let ctx = GroupContext::get(&group)?;
            let Some((a, b)) = pair.split_once(',') else {
                bail!("--pair expects two labels separated by a comma");
            };
            let i = ctx.irreps().index_of(a.trim())?;
            let j = ctx.irreps().index_of(b.trim())?;
            let cg = ctx.cg(i, j)?;
            let doc = io::cg_to_json(&ctx, &cg);
            let blocks: Vec<&str> = cg.blocks.iter().map(|&k| ctx.label(k)).collect();
            say!("{} (x) {} = {}", ctx.label(i), ctx.label(j), blocks.join(" + "));
            say!("unitarity residual {:e}", doc["unitarity_residual"].as_f64().unwrap_or(f64::NAN));
            say!("block residual {:e}", doc["block_residual"].as_f64().unwrap_or(f64::NAN));
            if let Some(o) = out {
                io::write_json(o, &doc)?;
            }
        }
        Cmd::Plan { group, seed } => {
            let ctx = GroupContext::get(&group)?;
            let plan = match seed {
                Some(l) => selection_plan(&ctx, Some(ctx.irreps().index_of(&l)?))?,
                None => canonical_plan(&ctx)?,
            };
            say!("{}", serde_json::to_string_pretty(&io::plan_to_json(&ctx, &plan))?);
        }
        Cmd::Recover { group, targets, restarts, max_iters, seed, out } => {
            let cfg = RecoveryConfig { max_iters, seed, ..Default::default() };
            let report = recovery_experiment(&group, targets, restarts, &cfg)?;
            let ok = report.targets.iter().filter(|t| t.successes > 0).count();
            say!("{ok}/{} targets recovered", report.targets.len());
            io::write_json(&out, &serde_json::to_value(&report)?)?;
        }
        Cmd::Bench { family, sizes, modes, repeats, seed, parallel, out } => {
            let opts = BenchOptions { repeats, seed, parallel, ..Default::default() };
            let records = bench_suite(&family, &sizes, &modes, &opts)?;
            write_csv(BufWriter::new(File::create(&out)?), &records)?;
            for m in &modes {
                let rs: Vec<BenchRecord> = records.iter().filter(|r| r.mode == *m).cloned().collect();
                match fit_scaling(&rs) {
                    Ok(slope) => say!("{m}: slope {slope:.3}"),
                    Err(e) => say!("{m}: {e}"),
                }
            }
        }
    }
    Ok(())
}
