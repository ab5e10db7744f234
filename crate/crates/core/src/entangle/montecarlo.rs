//! Attempt-level Monte Carlo of the entanglement generation sequence.
//!
//! Each trial starts with freshly loaded atoms at both nodes and runs
//! attempts until a heralded success. After every N₁ consecutive failures a
//! cooling interval is inserted. If either atom is lost during an attempt the
//! pair is reloaded (t_load) and the block count restarts.
//!
//! Trial `i` draws from a ChaCha8 stream keyed by `(seed, i)`, and per-trial
//! outcomes are integer counts summed exactly, so results are bit-identical
//! for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ProtocolTimings;
use crate::{Error, Result};

/// Per-attempt atom-loss probability for one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossModel {
    pub per_attempt: f64,
    /// Loss probability per scattered photon (heating out of the trap).
    pub p_heat: f64,
}

impl LossModel {
    pub fn disabled() -> Self {
        Self {
            per_attempt: 0.0,
            p_heat: 0.0,
        }
    }

    /// p_loss = t_attempt/τ_bg + n_scatter·p_heat, with p_heat chosen so the
    /// loss over a block of N₁ attempts equals `p_loss_per_block`. If
    /// background loss alone already exceeds the target, p_heat is zero.
    pub fn from_timings(t: &ProtocolTimings) -> Self {
        let background = t.attempt_duration() / t.background_lifetime;
        let target = 1.0 - (1.0 - t.p_loss_per_block).powf(1.0 / f64::from(t.n1));
        let p_heat = if t.scatter_per_pump > 0.0 {
            ((target - background) / t.scatter_per_pump).max(0.0)
        } else {
            0.0
        };
        Self {
            per_attempt: (background + t.scatter_per_pump * p_heat).min(1.0),
            p_heat,
        }
    }

    /// Loss probability of one atom over a block of `n1` attempts.
    pub fn per_block(&self, n1: u32) -> f64 {
        1.0 - (1.0 - self.per_attempt).powi(n1 as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub trials: u64,
    pub seed: u64,
    pub loss: LossModel,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl SimSettings {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            loss: LossModel::disabled(),
            workers: None,
        }
    }

    pub fn with_loss(mut self, loss: LossModel) -> Self {
        self.loss = loss;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McResult {
    pub trials: u64,
    pub mean_time_to_entanglement: f64,
    pub rate: f64,
    /// Standard error of the mean time.
    pub std_error: f64,
    /// Half-width of the 95% confidence interval on the mean time.
    pub confidence_halfwidth: f64,
    pub mean_attempts: f64,
    /// Mean number of attempt blocks begun per trial.
    pub mean_epochs: f64,
    pub mean_cooling_intervals: f64,
    pub reload_events: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct TrialCounts {
    attempts: u64,
    cools: u64,
    reloads: u64,
    blocks: u64,
}

/// Exact integer moments of the per-trial counts.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    n: u128,
    attempts: u128,
    cools: u128,
    reloads: u128,
    blocks: u128,
    aa: u128,
    cc: u128,
    rr: u128,
    ac: u128,
    ar: u128,
    cr: u128,
}

impl Tally {
    fn of(t: TrialCounts) -> Self {
        let (a, c, r) = (u128::from(t.attempts), u128::from(t.cools), u128::from(t.reloads));
        Self {
            n: 1,
            attempts: a,
            cools: c,
            reloads: r,
            blocks: u128::from(t.blocks),
            aa: a * a,
            cc: c * c,
            rr: r * r,
            ac: a * c,
            ar: a * r,
            cr: c * r,
        }
    }

    fn merge(self, o: Self) -> Self {
        Self {
            n: self.n + o.n,
            attempts: self.attempts + o.attempts,
            cools: self.cools + o.cools,
            reloads: self.reloads + o.reloads,
            blocks: self.blocks + o.blocks,
            aa: self.aa + o.aa,
            cc: self.cc + o.cc,
            rr: self.rr + o.rr,
            ac: self.ac + o.ac,
            ar: self.ar + o.ar,
            cr: self.cr + o.cr,
        }
    }
}

fn run_trial(p_aa: f64, n1: u64, loss: f64, seed: u64, index: u64) -> TrialCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut c = TrialCounts::default();
    let mut in_block = 0u64;
    loop {
        if in_block == n1 {
            c.cools += 1;
            in_block = 0;
        }
        if in_block == 0 {
            c.blocks += 1;
        }
        c.attempts += 1;
        in_block += 1;
        if loss > 0.0 {
            let lost_a = rng.random::<f64>() < loss;
            let lost_b = rng.random::<f64>() < loss;
            if lost_a || lost_b {
                c.reloads += 1;
                in_block = 0;
                continue;
            }
        }
        if rng.random::<f64>() < p_aa {
            return c;
        }
    }
}

/// Runs `settings.trials` independent trials and reports the time to the
/// first heralded success.
pub fn simulate(p_aa: f64, timings: &ProtocolTimings, settings: &SimSettings) -> Result<McResult> {
    if !(p_aa > 0.0 && p_aa <= 1.0) {
        return Err(Error::invalid("p_aa", p_aa, "must lie in (0, 1]"));
    }
    if settings.trials == 0 {
        return Err(Error::invalid("trials", 0.0, "must be at least 1"));
    }
    if !(0.0..1.0).contains(&settings.loss.per_attempt) {
        return Err(Error::invalid("loss probability", settings.loss.per_attempt, "must lie in [0, 1)"));
    }
    timings.validate()?;

    let n1 = u64::from(timings.n1);
    let loss = settings.loss.per_attempt;
    let seed = settings.seed;
    let run = || {
        (0..settings.trials)
            .into_par_iter()
            .map(|i| Tally::of(run_trial(p_aa, n1, loss, seed, i)))
            .reduce(Tally::default, Tally::merge)
    };
    let tally = match settings.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|_| Error::invalid("workers", w as f64, "could not start thread pool"))?
            .install(run),
        None => run(),
    };
    Ok(summarize(&tally, timings))
}

fn summarize(t: &Tally, timings: &ProtocolTimings) -> McResult {
    let n = t.n as f64;
    let (ta, tc, tl) = (timings.attempt_duration(), timings.t_cool, timings.t_load);
    let mean = |s: u128| s as f64 / n;
    let (ma, mc, mr) = (mean(t.attempts), mean(t.cools), mean(t.reloads));
    // Covariances from exact integer moments.
    let cov = |sxy: u128, sx: u128, sy: u128| (sxy as f64 - sx as f64 * sy as f64 / n) / n;
    let var_a = cov(t.aa, t.attempts, t.attempts);
    let var_c = cov(t.cc, t.cools, t.cools);
    let var_r = cov(t.rr, t.reloads, t.reloads);
    let cov_ac = cov(t.ac, t.attempts, t.cools);
    let cov_ar = cov(t.ar, t.attempts, t.reloads);
    let cov_cr = cov(t.cr, t.cools, t.reloads);
    let var_time = (ta * ta * var_a
        + tc * tc * var_c
        + tl * tl * var_r
        + 2.0 * (ta * tc * cov_ac + ta * tl * cov_ar + tc * tl * cov_cr))
        .max(0.0);
    // Sample variance (n−1) for the standard error.
    let sample_var = if t.n > 1 { var_time * n / (n - 1.0) } else { 0.0 };
    let std_error = (sample_var / n).sqrt();
    let cool_after = if timings.cool_after_success { tc } else { 0.0 };
    let mean_time = ma * ta + mc * tc + mr * tl + cool_after;
    McResult {
        trials: t.n as u64,
        mean_time_to_entanglement: mean_time,
        rate: 1.0 / mean_time,
        std_error,
        confidence_halfwidth: 1.96 * std_error,
        mean_attempts: ma,
        mean_epochs: mean(t.blocks),
        mean_cooling_intervals: mc,
        reload_events: t.reloads as u64,
    }
}
