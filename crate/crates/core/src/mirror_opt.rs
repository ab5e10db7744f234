//! Out-coupler transmission optimization and parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{cqed_params, AtomLine, CavityGeometry, CqedParams, MirrorSet};
use crate::collection::{rb_efficiency, two_level_efficiency, FREE_SPACE_SIGMA_FRACTION};
use crate::dipole_optics::{fiber_coupling, DipolePolarization};
use crate::search::{golden_section_max, grid_scan};
use crate::{Error, Result};

/// Search range for log₁₀(T_high).
pub const LOG_T_HIGH_RANGE: (f64, f64) = (-6.0, -1.0);
/// Default relative tolerance on the optimal T_high.
pub const T_HIGH_REL_TOL: f64 = 1e-5;
const FALLBACK_GRID_POINTS: usize = 200;
const FLAT_THRESHOLD: f64 = 1e-12;

/// Which collection efficiency to maximize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    TwoLevel,
    Rb,
}

/// Cavity with its fixed mirror losses and atomic line; T_high is the free
/// parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySetup {
    pub geometry: CavityGeometry,
    pub t_low: f64,
    pub loss_rt: f64,
    pub line: AtomLine,
}

/// Everything computed at one T_high.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityEvaluation {
    pub t_high: f64,
    pub params: CqedParams,
    pub eta: f64,
    pub eta_rb: f64,
}

impl CavityEvaluation {
    pub fn objective(&self, objective: Objective) -> f64 {
        match objective {
            Objective::TwoLevel => self.eta,
            Objective::Rb => self.eta_rb,
        }
    }
}

impl CavitySetup {
    pub fn mirrors(&self, t_high: f64) -> Result<MirrorSet> {
        MirrorSet::new(t_high, self.t_low, self.loss_rt)
    }

    pub fn evaluate(&self, t_high: f64) -> Result<CavityEvaluation> {
        let mirrors = self.mirrors(t_high)?;
        let params = cqed_params(&self.geometry, &mirrors, &self.line)?;
        Ok(CavityEvaluation {
            t_high,
            params,
            eta: two_level_efficiency(&params, &mirrors, &self.line),
            eta_rb: rb_efficiency(&params, &mirrors, &self.line),
        })
    }

    pub fn efficiency(&self, t_high: f64, objective: Objective) -> Result<f64> {
        Ok(self.evaluate(t_high)?.objective(objective))
    }

    /// Same mirrors and line on a different geometry.
    pub fn with_geometry(&self, geometry: CavityGeometry) -> Self {
        Self { geometry, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub t_high_opt: f64,
    pub eta_opt: f64,
    pub evaluations: usize,
}

/// Maximizes the selected efficiency over T_high ∈ [1 ppm, 0.1].
pub fn optimize_t_high(setup: &CavitySetup, objective: Objective) -> Result<OptimizationResult> {
    optimize_t_high_with_tol(setup, objective, T_HIGH_REL_TOL)
}

/// As [`optimize_t_high`] with an explicit relative tolerance on T_high.
///
/// Golden-section search runs on log₁₀ T_high. If an interior probe does not
/// exceed both bracket ends, a 200-point log grid locates the peak first and
/// golden-section refines between its neighbours.
pub fn optimize_t_high_with_tol(setup: &CavitySetup, objective: Objective, rel_tol: f64) -> Result<OptimizationResult> {
    if !(rel_tol > 0.0) {
        return Err(Error::invalid("relative tolerance", rel_tol, "must be positive"));
    }
    let mut evaluations = 0usize;
    let mut f = |log_t: f64| {
        evaluations += 1;
        setup.efficiency(10f64.powf(log_t), objective)
    };
    let (lo, hi) = LOG_T_HIGH_RANGE;
    // A relative tolerance on T is an absolute one on log₁₀ T.
    let log_tol = rel_tol / std::f64::consts::LN_10;

    let probe = lo + 0.618_033_988_749_894_9 * (hi - lo);
    let (f_lo, f_hi, f_probe) = (f(lo)?, f(hi)?, f(probe)?);
    let (a, b) = if f_probe > f_lo && f_probe > f_hi {
        (lo, hi)
    } else {
        let (grid, i, best) = grid_scan(&mut f, lo, hi, FALLBACK_GRID_POINTS)?;
        if best < FLAT_THRESHOLD {
            return Err(Error::FlatObjective {
                max: best,
                threshold: FLAT_THRESHOLD,
            });
        }
        (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)])
    };
    // Golden-section's own stop rule is relative to |x|; scale it so the
    // absolute width in log space reaches `log_tol`.
    let scale = a.abs().max(b.abs());
    let best = golden_section_max(&mut f, a, b, log_tol / scale, 500)?;
    if best.value < FLAT_THRESHOLD {
        return Err(Error::FlatObjective {
            max: best.value,
            threshold: FLAT_THRESHOLD,
        });
    }
    Ok(OptimizationResult {
        t_high_opt: 10f64.powf(best.x),
        eta_opt: best.value,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Out-coupler transmission (dimensionless).
    THigh,
    /// Distance from the concentric point (m) at fixed mirror curvature.
    DCrit,
    /// Lens numerical aperture; the cavity setup is ignored.
    Na,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// How T_high is chosen at each point of a d_crit sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum THighPolicy {
    Fixed(f64),
    /// Re-optimize at every point.
    Reoptimize,
    /// Use the optimum found at the given d_crit (m) for all points.
    FrozenAt { d_crit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub spacing: Spacing,
    pub setup: CavitySetup,
    pub t_high: THighPolicy,
    pub objective: Objective,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) {
            return Err(Error::invalid("sweep lower bound", self.lo, "must be below the upper bound"));
        }
        if self.points < 2 {
            return Err(Error::invalid("sweep points", self.points as f64, "need at least 2"));
        }
        if self.spacing == Spacing::Log && self.lo <= 0.0 {
            return Err(Error::invalid("sweep lower bound", self.lo, "log spacing needs a positive range"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.lo;
                }
                if i == n - 1 {
                    return self.hi;
                }
                let t = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.lo + t * (self.hi - self.lo),
                    Spacing::Log => (self.lo.ln() + t * (self.hi.ln() - self.lo.ln())).exp(),
                }
            })
            .collect()
    }
}

/// One sweep point. Cavity-only columns are NaN for lens sweeps; all value
/// columns are NaN when `error` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub t_high: f64,
    pub eta: f64,
    pub eta_rb: f64,
    pub cooperativity: f64,
    pub finesse: f64,
    pub kappa: f64,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn is_valid(&self) -> bool {
        self.error.is_none()
    }

    fn invalid(x: f64, err: &Error) -> Self {
        Self {
            x,
            t_high: f64::NAN,
            eta: f64::NAN,
            eta_rb: f64::NAN,
            cooperativity: f64::NAN,
            finesse: f64::NAN,
            kappa: f64::NAN,
            error: Some(err.to_string()),
        }
    }

    fn from_cavity(x: f64, e: &CavityEvaluation) -> Self {
        Self {
            x,
            t_high: e.t_high,
            eta: e.eta,
            eta_rb: e.eta_rb,
            cooperativity: e.params.cooperativity,
            finesse: e.params.finesse,
            kappa: e.params.kappa,
            error: None,
        }
    }
}

/// Evaluates the sweep in parallel. Rows come back in grid order; a point
/// that fails its preconditions becomes an invalid row.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let frozen = match (spec.variable, spec.t_high) {
        (SweepVariable::DCrit, THighPolicy::FrozenAt { d_crit }) => {
            let g = CavityGeometry::near_concentric(spec.setup.geometry.mirror_roc(), d_crit)?;
            Some(optimize_t_high(&spec.setup.with_geometry(g), spec.objective)?.t_high_opt)
        }
        _ => None,
    };
    let rows = spec
        .grid()
        .into_par_iter()
        .map(|x| sweep_point(spec, frozen, x).unwrap_or_else(|e| SweepRow::invalid(x, &e)))
        .collect();
    Ok(rows)
}

fn sweep_point(spec: &SweepSpec, frozen: Option<f64>, x: f64) -> Result<SweepRow> {
    let setup = &spec.setup;
    match spec.variable {
        SweepVariable::THigh => Ok(SweepRow::from_cavity(x, &setup.evaluate(x)?)),
        SweepVariable::DCrit => {
            let local = setup.with_geometry(CavityGeometry::near_concentric(setup.geometry.mirror_roc(), x)?);
            let t_high = match (spec.t_high, frozen) {
                (_, Some(t)) => t,
                (THighPolicy::Fixed(t), _) => t,
                _ => optimize_t_high(&local, spec.objective)?.t_high_opt,
            };
            Ok(SweepRow::from_cavity(x, &local.evaluate(t_high)?))
        }
        SweepVariable::Na => {
            let c = fiber_coupling(DipolePolarization::SigmaPlus, x)?;
            Ok(SweepRow {
                x,
                t_high: f64::NAN,
                eta: c.efficiency,
                eta_rb: FREE_SPACE_SIGMA_FRACTION * c.efficiency,
                cooperativity: f64::NAN,
                finesse: f64::NAN,
                kappa: f64::NAN,
                error: None,
            })
        }
    }
}
