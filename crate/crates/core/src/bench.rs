//! Timing harness for the invariants and log-log slope fitting.

use std::fmt;
use std::hint::black_box;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::context::GroupContext;
use crate::error::{invalid, Error, Result};
use crate::fourier::{fft_cyclic, gft, gft_abelian};
use crate::group::{GroupKind, GroupSignal};
use crate::spectra::{
    abelian_bispectrum_values, avg_pool, canonical_plan, full_bispectrum, max_pool, selective_bispectrum, triple_correlation,
    SelectionPlan,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMode {
    Tc,
    Full,
    Selective,
    SelectiveFft,
    Max,
    Avg,
}

impl BenchMode {
    pub const ALL: [BenchMode; 6] =
        [BenchMode::Tc, BenchMode::Full, BenchMode::Selective, BenchMode::SelectiveFft, BenchMode::Max, BenchMode::Avg];

    pub fn as_str(self) -> &'static str {
        match self {
            BenchMode::Tc => "tc",
            BenchMode::Full => "full",
            BenchMode::Selective => "selective",
            BenchMode::SelectiveFft => "selective_fft",
            BenchMode::Max => "max",
            BenchMode::Avg => "avg",
        }
    }
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown bench mode '{s}'")))
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub family: String,
    pub n: usize,
    pub mode: BenchMode,
    pub mean_seconds: f64,
    pub std_seconds: f64,
    pub median_seconds: f64,
    pub repeats: usize,
    pub scalar_output_count: usize,
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub repeats: usize,
    pub seed: u64,
    /// Run repeats concurrently instead of one after another.
    pub parallel: bool,
    /// Minimum wall time of one timed batch; short operations are looped.
    pub min_batch: Duration,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { repeats: 10, seed: 0, parallel: false, min_batch: Duration::from_millis(5) }
    }
}

fn kind_for(family: &str, n: usize) -> Result<GroupKind> {
    let kind = match family {
        "cyclic" => GroupKind::Cyclic(n),
        "dihedral" => GroupKind::Dihedral(n),
        _ => return invalid(format!("benchmarks support the cyclic and dihedral families, not '{family}'")),
    };
    kind.validate()?;
    Ok(kind)
}

/// Runs `mode` once and returns its scalar output count. Abelian groups go
/// through flat coefficient lists; the others through matrix coefficients.
fn run_once(ctx: &GroupContext, plan: &SelectionPlan, mode: BenchMode, s: &GroupSignal) -> Result<usize> {
    let abelian = ctx.kind().is_abelian();
    let r = ctx.num_irreps();
    Ok(match mode {
        BenchMode::Tc => black_box(triple_correlation(ctx, s)?).len(),
        BenchMode::Full if abelian => {
            let f = gft_abelian(ctx, s)?;
            black_box(abelian_bispectrum_values(ctx, &f, (0..r).flat_map(|a| (0..r).map(move |b| (a, b))))?).len()
        }
        BenchMode::Full => black_box(full_bispectrum(ctx, &gft(ctx, s)?)?).scalar_count(),
        BenchMode::Selective if abelian => {
            let f = gft_abelian(ctx, s)?;
            black_box(abelian_bispectrum_values(ctx, &f, plan.pairs.iter().copied())?).len()
        }
        BenchMode::Selective => black_box(selective_bispectrum(ctx, &gft(ctx, s)?, plan)?).scalar_count(),
        BenchMode::SelectiveFft => {
            let f = fft_cyclic(s)?;
            black_box(abelian_bispectrum_values(ctx, &f, plan.pairs.iter().copied())?).len()
        }
        BenchMode::Max => {
            black_box(max_pool(s));
            1
        }
        BenchMode::Avg => {
            black_box(avg_pool(s));
            1
        }
    })
}

fn mean_std_median(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) { 0.5 * (sorted[m - 1] + sorted[m]) } else { sorted[m] };
    (mean, var.sqrt(), median)
}

/// Times one mode on one signal. Each repeat reports the per-call time of
/// a batch of calls long enough to dwarf clock resolution.
pub fn bench_one(ctx: &GroupContext, mode: BenchMode, signal: &GroupSignal, opts: &BenchOptions) -> Result<BenchRecord> {
    if opts.repeats < 3 {
        return invalid("at least 3 repeats are required");
    }
    if mode == BenchMode::SelectiveFft && !matches!(ctx.kind(), GroupKind::Cyclic(_)) {
        return invalid(format!("selective_fft is only defined on cyclic groups, not {}", ctx.kind()));
    }
    // The plan is per-group setup, like the Clebsch-Gordan cache.
    let plan = canonical_plan(ctx)?;
    // Warmup: fills the Clebsch-Gordan cache and calibrates.
    let count = run_once(ctx, &plan, mode, signal)?;
    let mut inner = 1usize;
    loop {
        let t0 = Instant::now();
        for _ in 0..inner {
            run_once(ctx, &plan, mode, signal)?;
        }
        if t0.elapsed() >= opts.min_batch || inner >= 1 << 24 {
            break;
        }
        inner *= 2;
    }
    let time = |_: usize| -> Result<f64> {
        let t0 = Instant::now();
        for _ in 0..inner {
            run_once(ctx, &plan, mode, signal)?;
        }
        Ok(t0.elapsed().as_secs_f64() / inner as f64)
    };
    let samples = if opts.parallel {
        (0..opts.repeats).into_par_iter().map(time).collect::<Result<Vec<_>>>()?
    } else {
        (0..opts.repeats).map(time).collect::<Result<Vec<_>>>()?
    };
    let (mean, std, median) = mean_std_median(&samples);
    Ok(BenchRecord {
        family: ctx.kind().family().to_string(),
        n: match ctx.kind() {
            GroupKind::Cyclic(n) | GroupKind::Dihedral(n) => *n,
            k => k.order(),
        },
        mode,
        mean_seconds: mean,
        std_seconds: std,
        median_seconds: median,
        repeats: opts.repeats,
        scalar_output_count: count,
    })
}

/// Every mode at every size, each size on one shared random signal.
pub fn bench_suite(family: &str, sizes: &[usize], modes: &[BenchMode], opts: &BenchOptions) -> Result<Vec<BenchRecord>> {
    if sizes.is_empty() || modes.is_empty() {
        return invalid("need at least one size and one mode");
    }
    if family != "cyclic" && modes.contains(&BenchMode::SelectiveFft) {
        return invalid(format!("selective_fft is only defined on the cyclic family, not '{family}'"));
    }
    let mut out = Vec::with_capacity(sizes.len() * modes.len());
    for &n in sizes {
        let kind = kind_for(family, n)?;
        let ctx = GroupContext::get(&kind)?;
        let signal = GroupSignal::random(&kind, opts.seed)?;
        for &mode in modes {
            out.push(bench_one(&ctx, mode, &signal, opts)?);
        }
    }
    Ok(out)
}

pub fn write_csv<W: Write>(w: W, records: &[BenchRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return invalid("need at least two matching points");
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return invalid("log-log fit needs positive finite values");
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("all x values coincide");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Slope of median time against group order for the records of one mode.
pub fn fit_scaling(records: &[BenchRecord]) -> Result<f64> {
    let Some(first) = records.first() else {
        return invalid("no records");
    };
    if records.iter().any(|r| r.mode != first.mode || r.family != first.family) {
        return invalid("records mix modes or families");
    }
    if records.len() < 4 {
        return invalid(format!("need at least 4 sizes, got {}", records.len()));
    }
    let order = |r: &BenchRecord| if r.family == "dihedral" { 2 * r.n } else { r.n } as f64;
    let xs: Vec<f64> = records.iter().map(order).collect();
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(0.0, f64::max);
    if hi < 8.0 * lo {
        return invalid(format!("sizes span {lo}..{hi}, need at least an 8x range"));
    }
    let ys: Vec<f64> = records.iter().map(|r| r.median_seconds).collect();
    fit_loglog_slope(&xs, &ys)
}
