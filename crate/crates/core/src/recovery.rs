//! Signal recovery from a selective bispectrum by gradient descent, and the
//! max-pooling counterexample.
//!
//! Only abelian groups are handled: the gradient goes through the closed
//! form `beta_ab = F_a F_b conj(F_{a+b})` and the linear transform.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::context::GroupContext;
use crate::error::{invalid, Error, Result};
use crate::fourier::gft;
use crate::group::{orbit_distance, GroupKind, GroupSignal};
use crate::linalg::C64;
use crate::spectra::{canonical_plan, full_bispectrum, selective_bispectrum, BispectrumCoefficients, SelectionPlan};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Armijo {
    pub initial_step: f64,
    pub backtrack: f64,
    pub decrease: f64,
}

/// How the first trial step of each line search is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStep {
    /// Always start from `Armijo::initial_step`.
    Fixed,
    /// Barzilai-Borwein step from the last two iterates (the first
    /// iteration uses `Armijo::initial_step`).
    BarzilaiBorwein,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub armijo: Armijo,
    pub trial_step: TrialStep,
    pub seed: u64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            max_iters: 5000,
            grad_tol: 1e-8,
            armijo: Armijo { initial_step: 1.0, backtrack: 0.5, decrease: 1e-4 },
            trial_step: TrialStep::BarzilaiBorwein,
            seed: 0,
        }
    }
}

/// Iteration budget for the 15-target C_30 experiment. The selective
/// problem is minimal, so some targets cross long flat stretches.
pub const EXPERIMENT_MAX_ITERS: usize = 300_000;

impl RecoveryConfig {
    /// Defaults with the larger experiment budget.
    pub fn experiment() -> Self {
        RecoveryConfig { max_iters: EXPERIMENT_MAX_ITERS, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.armijo;
        if !(a.initial_step > 0.0 && a.initial_step.is_finite()) {
            return invalid("Armijo initial step must be positive");
        }
        if !(a.backtrack > 0.0 && a.backtrack < 1.0) {
            return invalid("Armijo backtrack factor must lie in (0,1)");
        }
        if !(a.decrease > 0.0 && a.decrease < 1.0) {
            return invalid("Armijo decrease constant must lie in (0,1)");
        }
        if self.grad_tol.is_nan() || self.grad_tol < 0.0 {
            return invalid("gradient tolerance must be non-negative");
        }
        Ok(())
    }
}

/// Pair data resolved against the dual lattice.
struct Problem<'a> {
    ctx: &'a GroupContext,
    pairs: Vec<(usize, usize, usize)>,
    target: Vec<C64>,
}

impl<'a> Problem<'a> {
    fn new(ctx: &'a GroupContext, target: &BispectrumCoefficients, plan: &SelectionPlan) -> Result<Self> {
        if target.kind() != ctx.kind() || &plan.kind != ctx.kind() {
            return invalid(format!("target, plan and group disagree ({}, {}, {})", target.kind(), plan.kind, ctx.kind()));
        }
        let dual = ctx
            .irreps()
            .dual()
            .ok_or_else(|| Error::InvalidParameter(format!("gradient recovery needs an abelian group, got {}", ctx.kind())))?;
        if target.entries().len() != plan.pairs.len() {
            return invalid(format!("target has {} pairs but the plan has {}", target.entries().len(), plan.pairs.len()));
        }
        let mut pairs = Vec::with_capacity(plan.pairs.len());
        let mut values = Vec::with_capacity(plan.pairs.len());
        for &(a, b) in &plan.pairs {
            let m = target
                .get(a, b)
                .ok_or_else(|| Error::InvalidParameter(format!("target lacks plan pair ({}, {})", ctx.label(a), ctx.label(b))))?;
            pairs.push((a, b, dual.product(a, b)));
            values.push(m[(0, 0)]);
        }
        Ok(Problem { ctx, pairs, target: values })
    }

    fn coeffs(&self, theta: &[f64]) -> Vec<C64> {
        let chars = self.ctx.characters();
        (0..self.ctx.num_irreps()).map(|k| chars.row(k).iter().zip(theta).map(|(chi, v)| chi.conj() * *v).sum()).collect()
    }

    fn loss(&self, theta: &[f64]) -> f64 {
        let f = self.coeffs(theta);
        self.pairs.iter().zip(&self.target).map(|(&(a, b, c), t)| (f[a] * f[b] * f[c].conj() - t).norm_sqr()).sum()
    }

    fn loss_and_grad(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let f = self.coeffs(theta);
        let r = self.ctx.num_irreps();
        // dL/dtheta(g) = 2 Re sum_k [ u_k conj(chi_k(g)) + w_k chi_k(g) ].
        let mut u = vec![C64::new(0.0, 0.0); r];
        let mut w = vec![C64::new(0.0, 0.0); r];
        let mut loss = 0.0;
        for (&(a, b, c), t) in self.pairs.iter().zip(&self.target) {
            let delta = f[a] * f[b] * f[c].conj() - t;
            loss += delta.norm_sqr();
            let dc = delta.conj();
            u[a] += dc * f[b] * f[c].conj();
            u[b] += dc * f[a] * f[c].conj();
            w[c] += dc * f[a] * f[b];
        }
        let chars = self.ctx.characters();
        let grad = (0..theta.len())
            .map(|g| {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..r {
                    let chi = chars.get(k, g);
                    acc += u[k] * chi.conj() + w[k] * chi;
                }
                2.0 * acc.re
            })
            .collect();
        (loss, grad)
    }
}

/// `sum_p |beta_p(theta) - target_p|^2` over the plan's pairs.
pub fn recovery_loss(
    ctx: &GroupContext,
    theta: &GroupSignal,
    target: &BispectrumCoefficients,
    plan: &SelectionPlan,
) -> Result<f64> {
    theta.check_group(ctx.group())?;
    Ok(Problem::new(ctx, target, plan)?.loss(theta.values()))
}

/// Analytic gradient of [`recovery_loss`] with respect to the signal values.
pub fn recovery_gradient(
    ctx: &GroupContext,
    theta: &GroupSignal,
    target: &BispectrumCoefficients,
    plan: &SelectionPlan,
) -> Result<Vec<f64>> {
    theta.check_group(ctx.group())?;
    Ok(Problem::new(ctx, target, plan)?.loss_and_grad(theta.values()).1)
}

#[derive(Clone, Debug)]
pub struct RecoveryRun {
    pub signal: GroupSignal,
    /// Loss before the first step and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

/// Gradient descent with Armijo backtracking from `init`.
pub fn recover(
    ctx: &GroupContext,
    target: &BispectrumCoefficients,
    plan: &SelectionPlan,
    cfg: &RecoveryConfig,
    init: &GroupSignal,
) -> Result<RecoveryRun> {
    cfg.validate()?;
    init.check_group(ctx.group())?;
    let prob = Problem::new(ctx, target, plan)?;
    let mut x = init.values().to_vec();
    let (mut fx, mut g) = prob.loss_and_grad(&x);
    let mut trace = vec![fx];
    let mut iterations = 0;
    let mut gnorm = norm(&g);
    let mut converged = gnorm <= cfg.grad_tol || fx == 0.0;
    let a = cfg.armijo;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    while !converged && iterations < cfg.max_iters {
        let g2 = gnorm * gnorm;
        let mut t = a.initial_step;
        if let (TrialStep::BarzilaiBorwein, Some((px, pg))) = (cfg.trial_step, &prev) {
            let (mut ss, mut sy) = (0.0, 0.0);
            for i in 0..x.len() {
                let si = x[i] - px[i];
                ss += si * si;
                sy += si * (g[i] - pg[i]);
            }
            if sy > 0.0 && ss > 0.0 {
                t = ss / sy;
            }
        }
        let mut accepted = None;
        // Enough halvings to reach the smallest representable step.
        for _ in 0..2000 {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
            let fc = prob.loss(&cand);
            if fc <= fx - a.decrease * t * g2 {
                accepted = Some((cand, fc));
                break;
            }
            t *= a.backtrack;
            if t == 0.0 {
                break;
            }
        }
        let Some((cand, fc)) = accepted else {
            break;
        };
        if fc > fx {
            return Err(Error::Internal("Armijo step increased the loss".into()));
        }
        prev = Some((std::mem::replace(&mut x, cand), g.clone()));
        let (f_new, g_new) = prob.loss_and_grad(&x);
        fx = f_new;
        g = g_new;
        gnorm = norm(&g);
        trace.push(fx);
        iterations += 1;
        converged = gnorm <= cfg.grad_tol || fx == 0.0;
    }
    if trace.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Internal("loss trace is not monotone".into()));
    }
    Ok(RecoveryRun { signal: GroupSignal::new(ctx.kind().clone(), x)?, trace, iterations, grad_norm: gnorm, converged })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct RestartOutcome {
    pub seed: u64,
    pub orbit_distance: f64,
    pub final_loss: f64,
    pub iterations: usize,
    pub success: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TargetOutcome {
    pub target_seed: u64,
    pub target_norm: f64,
    pub best_orbit_distance: f64,
    pub successes: usize,
    /// Largest gap between full-bispectrum moduli of the best restart and
    /// the target, relative to the largest target modulus.
    pub modulus_gap: f64,
    pub restarts: Vec<RestartOutcome>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub group: String,
    pub config: RecoveryConfig,
    pub success_threshold: f64,
    pub targets: Vec<TargetOutcome>,
}

/// Relative orbit distance below which a restart counts as a success.
pub const SUCCESS_REL: f64 = 1e-3;

/// Recovers `targets` random signals from their selective bispectra with
/// `restarts` random initializations each.
pub fn recovery_experiment(kind: &GroupKind, targets: usize, restarts: usize, cfg: &RecoveryConfig) -> Result<RecoveryReport> {
    cfg.validate()?;
    let ctx = GroupContext::get(kind)?;
    let plan = canonical_plan(&ctx)?;
    let outcomes = (0..targets as u64)
        .into_par_iter()
        .map(|t| {
            let target_seed = cfg.seed.wrapping_add(t);
            let truth = centered_random(kind, target_seed)?;
            let f = gft(&ctx, &truth)?;
            let beta = selective_bispectrum(&ctx, &f, &plan)?;
            let mut runs = Vec::with_capacity(restarts);
            let mut best: Option<(f64, GroupSignal)> = None;
            for r in 0..restarts as u64 {
                let seed = cfg.seed.wrapping_add(1_000_003 * (t + 1)).wrapping_add(r);
                let init = centered_random(kind, seed)?;
                let run = recover(&ctx, &beta, &plan, cfg, &init)?;
                let d = orbit_distance(ctx.group(), &run.signal, &truth)?;
                runs.push(RestartOutcome {
                    seed,
                    orbit_distance: d,
                    final_loss: *run.trace.last().expect("trace is never empty"),
                    iterations: run.iterations,
                    success: d < SUCCESS_REL * truth.norm(),
                });
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, run.signal));
                }
            }
            let (best_d, best_sig) = best.ok_or_else(|| Error::InvalidParameter("at least one restart is required".into()))?;
            let gap = modulus_gap(&ctx, &best_sig, &truth)?;
            Ok(TargetOutcome {
                target_seed,
                target_norm: truth.norm(),
                best_orbit_distance: best_d,
                successes: runs.iter().filter(|r| r.success).count(),
                modulus_gap: gap,
                restarts: runs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RecoveryReport { group: kind.to_string(), config: cfg.clone(), success_threshold: SUCCESS_REL, targets: outcomes })
}

/// Uniform values on `(-1/2, 1/2)`.
pub fn centered_random(kind: &GroupKind, seed: u64) -> Result<GroupSignal> {
    let s = GroupSignal::random(kind, seed)?;
    GroupSignal::new(kind.clone(), s.values().iter().map(|v| v - 0.5).collect())
}

/// `max |(|beta(a)| - |beta(b)|)| / max |beta(b)|` over the full bispectrum.
pub fn modulus_gap(ctx: &GroupContext, a: &GroupSignal, b: &GroupSignal) -> Result<f64> {
    let fa = full_bispectrum(ctx, &gft(ctx, a)?)?;
    let fb = full_bispectrum(ctx, &gft(ctx, b)?)?;
    let mut gap: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (x, y) in fa.entries().iter().zip(fb.entries()) {
        for (p, q) in x.matrix.iter().zip(y.matrix.iter()) {
            gap = gap.max((p.norm() - q.norm()).abs());
            scale = scale.max(q.norm());
        }
    }
    Ok(gap / scale.max(f64::MIN_POSITIVE))
}

#[derive(Clone, Debug)]
pub struct MaxPoolAttack {
    pub reference: GroupSignal,
    pub attack: GroupSignal,
}

/// A reference signal with maximum `target_value` and a permutation of it
/// outside the reference's orbit: max pooling cannot tell them apart.
pub fn max_pool_attack(target_value: f64, kind: &GroupKind, seed: u64) -> Result<MaxPoolAttack> {
    if !target_value.is_finite() {
        return invalid("target value must be finite");
    }
    let group = GroupContext::get(kind)?.group().clone();
    let base = GroupSignal::random(kind, seed)?;
    let top = base.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let reference = GroupSignal::new(kind.clone(), base.values().iter().map(|v| v - top + target_value).collect())?;
    let threshold = 0.1 * reference.norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut values = reference.values().to_vec();
    for _ in 0..1000 {
        values.shuffle(&mut rng);
        let attack = GroupSignal::new(kind.clone(), values.clone())?;
        if orbit_distance(&group, &attack, &reference)? > threshold {
            return Ok(MaxPoolAttack { reference, attack });
        }
    }
    invalid(format!("could not find a permutation outside the orbit on {kind}"))
}
