//! The `qnet` command-line front end and the table builders behind each
//! subcommand.
//!
//! Every command writes a CSV file into the output directory and prints a
//! plain-text summary. Exit codes: 0 success, 1 validation or usage error,
//! 2 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::cavity::CavityGeometry;
use crate::collection::{branching, FREE_SPACE_SIGMA_FRACTION};
use crate::config::{RangeConfig, RunConfig};
use crate::dipole_optics::fiber_coupling;
use crate::dipole_optics::DipolePolarization;
use crate::entangle::{
    analytic_entanglement_time, entanglement_rate, p_atom_atom, simulate, LossModel, McResult,
    RateConvention, SimSettings,
};
use crate::fidelity::{compose_budget, dephasing_error, temporal_overlap_error};
use crate::mirror_opt::{
    optimize_t_high, sweep, CavitySetup, Objective, SweepRow, SweepSpec, SweepVariable, THighPolicy,
};
use crate::report::{num, Table};
use crate::units::{to_hz, MHZ, MM, NM, PPM, UM};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "qnet", version, about = "Photon collection and entanglement-rate models for a neutral-atom network link")]
pub struct Cli {
    /// JSON configuration file (defaults to the shipped configuration).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV files (overrides `output_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// RNG seed for the Monte Carlo.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of Monte Carlo trials.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimized cavity parameters for each configured design.
    Table2,
    /// Data set behind one figure.
    Figure { name: FigureName },
    /// Monte Carlo of the entanglement generation sequence.
    Simulate {
        /// Use this P_aa instead of the configured design's.
        #[arg(long)]
        p_aa: Option<f64>,
        /// Worker threads (results do not depend on it).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Optimal out-coupler transmission for each design and objective.
    Optimize,
    /// Entanglement infidelity budget.
    Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    Fig2,
    Fig3,
    Fig4,
    Fig6,
    Fig7,
}

impl FigureName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
        }
    }
}

fn range_spec(r: &RangeConfig, unit: f64) -> (f64, f64, usize, crate::mirror_opt::Spacing) {
    (r.lo * unit, r.hi * unit, r.points, r.spacing)
}

/// Optimized parameters of every configured cavity design.
pub fn table2(cfg: &RunConfig) -> Result<Table> {
    let setups = cfg.cavity_setups()?;
    let line = cfg.atom_line()?;
    let mut t = Table::new([
        "design",
        "length_mm",
        "mirror_roc_mm",
        "d_crit_um",
        "waist_um",
        "t_high_ppm",
        "finesse",
        "cooperativity",
        "g_over_2pi_mhz",
        "kappa_over_2pi_mhz",
        "gamma_over_2pi_mhz",
        "two_p_sigma",
        "eta_rb",
        "p_aa",
    ]);
    let rows: Vec<Result<Vec<String>>> = setups
        .par_iter()
        .map(|(name, setup)| {
            let opt = optimize_t_high(setup, Objective::Rb)?;
            let e = setup.evaluate(opt.t_high_opt)?;
            let p = e.params;
            let g = setup.geometry;
            Ok(vec![
                name.clone(),
                num(g.length() / MM),
                num(g.mirror_roc() / MM),
                num(g.d_crit() / UM),
                num(p.waist / UM),
                num(opt.t_high_opt / PPM),
                num(p.finesse),
                num(p.cooperativity),
                num(to_hz(p.g) / MHZ),
                num(to_hz(p.kappa) / MHZ),
                num(to_hz(line.gamma()) / MHZ),
                num(branching(p.cooperativity)?.sigma_total()),
                num(e.eta_rb),
                num(p_atom_atom(e.eta_rb, &cfg.detection)?),
            ])
        })
        .collect();
    for r in rows {
        t.push(r?);
    }
    Ok(t)
}

/// Data behind one figure, in long format.
pub fn figure(name: FigureName, cfg: &RunConfig) -> Result<Table> {
    match name {
        FigureName::Fig2 => fig2(cfg),
        FigureName::Fig3 => fig3(cfg),
        FigureName::Fig4 => d_crit_figure(cfg, Objective::TwoLevel),
        FigureName::Fig6 | FigureName::Fig7 => d_crit_figure(cfg, Objective::Rb),
    }
}

fn fig2(cfg: &RunConfig) -> Result<Table> {
    let (lo, hi, points, spacing) = range_spec(&cfg.sweeps.fig2_na, 1.0);
    let spec = SweepSpec {
        variable: SweepVariable::Na,
        lo,
        hi,
        points,
        spacing,
        setup: anchor_setup(cfg, 10.0 * MM)?,
        t_high: THighPolicy::Reoptimize,
        objective: Objective::TwoLevel,
    };
    let grid = spec.grid();
    let mut t = Table::new(["na", "collection_fraction", "fiber_coupled", "overlap", "waist_over_rho_na", "valid"]);
    let rows: Vec<Vec<String>> = grid
        .par_iter()
        .map(|&na| match fiber_coupling(DipolePolarization::SigmaPlus, na) {
            Ok(c) => vec![
                num(na),
                num(c.collection),
                num(c.efficiency),
                num(c.overlap),
                num(c.waist_ratio),
                "true".into(),
            ],
            Err(_) => vec![num(na), num(f64::NAN), num(f64::NAN), num(f64::NAN), num(f64::NAN), "false".into()],
        })
        .collect();
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

/// Near-concentric setup of the given length at the anchor d_crit.
fn anchor_setup(cfg: &RunConfig, length: f64) -> Result<CavitySetup> {
    let d = cfg.anchor_d_crit();
    cfg.setup_for(CavityGeometry::new(length, (length + d) / 2.0)?)
}

fn fig3(cfg: &RunConfig) -> Result<Table> {
    let (lo, hi, points, spacing) = range_spec(&cfg.sweeps.fig3_t_high_ppm, PPM);
    let mut t = Table::new([
        "length_mm",
        "mirror_roc_mm",
        "t_high_ppm",
        "eta",
        "finesse",
        "cooperativity",
        "kappa_over_2pi_mhz",
        "valid",
    ]);
    for &l_mm in &cfg.sweeps.fig3_lengths_mm {
        let setup = anchor_setup(cfg, l_mm * MM)?;
        let rows = sweep(&SweepSpec {
            variable: SweepVariable::THigh,
            lo,
            hi,
            points,
            spacing,
            setup,
            t_high: THighPolicy::Reoptimize,
            objective: Objective::TwoLevel,
        })?;
        for r in rows {
            t.push(vec![
                num(l_mm),
                num(setup.geometry.mirror_roc() / MM),
                num(r.x / PPM),
                num(r.eta),
                num(r.finesse),
                num(r.cooperativity),
                num(to_hz(r.kappa) / MHZ),
                r.is_valid().to_string(),
            ]);
        }
    }
    Ok(t)
}

const D_CRIT_HEADER: [&str; 9] = [
    "series",
    "kind",
    "d_crit_um",
    "t_high_ppm",
    "eta",
    "eta_rb",
    "p_aa",
    "rate_per_s",
    "valid",
];

/// Cavity curves versus d_crit (re-optimized and frozen T_high) plus one
/// constant line per lens NA. η is the two-level efficiency, η_Rb the ⁸⁷Rb
/// one; P_aa and the rate follow from η_Rb with the epoch-count timing.
fn d_crit_figure(cfg: &RunConfig, objective: Objective) -> Result<Table> {
    let (lo, hi, points, spacing) = range_spec(&cfg.sweeps.d_crit_um, UM);
    let timings = cfg.timings()?;
    let mut t = Table::new(D_CRIT_HEADER);
    let rate_of = |eta_rb: f64| -> (f64, f64) {
        match p_atom_atom(eta_rb, &cfg.detection) {
            Ok(p) if p > 0.0 => (p, entanglement_rate(p, &timings, RateConvention::EpochCount).unwrap_or(f64::NAN)),
            _ => (f64::NAN, f64::NAN),
        }
    };
    let push_row = |t: &mut Table, series: &str, kind: &str, r: &SweepRow| {
        let (p, rate) = if r.is_valid() { rate_of(r.eta_rb) } else { (f64::NAN, f64::NAN) };
        t.push(vec![
            series.to_string(),
            kind.to_string(),
            num(r.x / UM),
            num(r.t_high / PPM),
            num(r.eta),
            num(r.eta_rb),
            num(p),
            num(rate),
            r.is_valid().to_string(),
        ]);
    };
    for name in &cfg.sweeps.d_crit_designs {
        let setup = cfg.cavity_setup(name)?;
        for (policy, label) in [
            (THighPolicy::Reoptimize, "reoptimized"),
            (THighPolicy::FrozenAt { d_crit: cfg.anchor_d_crit() }, "frozen"),
        ] {
            let rows = sweep(&SweepSpec {
                variable: SweepVariable::DCrit,
                lo,
                hi,
                points,
                spacing,
                setup,
                t_high: policy,
                objective,
            })?;
            let series = format!("{name}/{label}");
            for r in &rows {
                push_row(&mut t, &series, "cavity", r);
            }
        }
    }
    let grid = SweepSpec {
        variable: SweepVariable::DCrit,
        lo,
        hi,
        points,
        spacing,
        setup: anchor_setup(cfg, 10.0 * MM)?,
        t_high: THighPolicy::Reoptimize,
        objective,
    }
    .grid();
    let lenses: Vec<Result<(f64, f64)>> = cfg
        .lens_na
        .par_iter()
        .map(|&na| Ok((na, fiber_coupling(DipolePolarization::SigmaPlus, na)?.efficiency)))
        .collect();
    for lens in lenses {
        let (na, eta) = lens?;
        let series = format!("lens NA={na}");
        for &x in &grid {
            let r = SweepRow {
                x,
                t_high: f64::NAN,
                eta,
                eta_rb: FREE_SPACE_SIGMA_FRACTION * eta,
                cooperativity: f64::NAN,
                finesse: f64::NAN,
                kappa: f64::NAN,
                error: None,
            };
            push_row(&mut t, &series, "lens", &r);
        }
    }
    Ok(t)
}

/// P_aa used by `simulate`: the override if given, else the configured
/// design with optimized T_high.
pub fn simulation_p_aa(cfg: &RunConfig) -> Result<f64> {
    if let Some(p) = cfg.simulation.p_aa_override {
        return Ok(p);
    }
    let setup = cfg.cavity_setup(&cfg.simulation.design)?;
    let opt = optimize_t_high(&setup, Objective::Rb)?;
    p_atom_atom(opt.eta_opt, &cfg.detection)
}

/// Monte Carlo report for the configured scenario.
pub fn simulation(cfg: &RunConfig, workers: Option<usize>) -> Result<(f64, McResult, Table)> {
    let p_aa = simulation_p_aa(cfg)?;
    let timings = cfg.timings()?;
    let loss = if cfg.simulation.loss_enabled {
        LossModel::from_timings(&timings)
    } else {
        LossModel::disabled()
    };
    let mut settings = SimSettings::new(cfg.simulation.trials, cfg.simulation.seed).with_loss(loss);
    if let Some(w) = workers {
        settings = settings.with_workers(w);
    }
    let r = simulate(p_aa, &timings, &settings)?;
    let exact = analytic_entanglement_time(p_aa, &timings, RateConvention::Exact)?;
    let epoch_count = analytic_entanglement_time(p_aa, &timings, RateConvention::EpochCount)?;
    let mut t = Table::new([
        "p_aa",
        "trials",
        "seed",
        "loss_per_attempt",
        "mean_time_s",
        "std_error_s",
        "ci95_halfwidth_s",
        "rate_per_s",
        "mean_attempts",
        "mean_epochs",
        "mean_cooling_intervals",
        "reload_events",
        "analytic_exact_time_s",
        "analytic_epoch_count_time_s",
    ]);
    t.push(vec![
        num(p_aa),
        r.trials.to_string(),
        cfg.simulation.seed.to_string(),
        num(loss.per_attempt),
        num(r.mean_time_to_entanglement),
        num(r.std_error),
        num(r.confidence_halfwidth),
        num(r.rate),
        num(r.mean_attempts),
        num(r.mean_epochs),
        num(r.mean_cooling_intervals),
        r.reload_events.to_string(),
        num(exact),
        num(epoch_count),
    ]);
    Ok((p_aa, r, t))
}

/// Optimal T_high per design for both objectives.
pub fn optimize(cfg: &RunConfig) -> Result<Table> {
    let mut t = Table::new(["design", "objective", "t_high_ppm", "eta_opt", "evaluations"]);
    for (name, setup) in cfg.cavity_setups()? {
        for (objective, label) in [(Objective::TwoLevel, "two_level"), (Objective::Rb, "rb")] {
            let r = optimize_t_high(&setup, objective)?;
            t.push(vec![
                name.clone(),
                label.into(),
                num(r.t_high_opt / PPM),
                num(r.eta_opt),
                r.evaluations.to_string(),
            ]);
        }
    }
    Ok(t)
}

/// Budget entries and totals, followed by the physical-model estimates.
pub fn budget(cfg: &RunConfig) -> Result<Table> {
    let b = compose_budget(cfg.budget_entries())?;
    let mut t = Table::new(["source", "kind", "infidelity"]);
    for e in &b.entries {
        t.push(vec![e.name.clone(), "entry".into(), num(e.infidelity)]);
    }
    t.push(vec!["total (additive)".into(), "total".into(), num(b.total)]);
    t.push(vec![
        "total (multiplicative)".into(),
        "total".into(),
        num(1.0 - b.multiplicative_fidelity),
    ]);
    let f = &cfg.fidelity;
    let setup = cfg.cavity_setup(&f.model_design)?;
    let opt = optimize_t_high(&setup, Objective::Rb)?;
    let params = setup.evaluate(opt.t_high_opt)?.params;
    let overlap = temporal_overlap_error(&params, &setup.line, 0.0, f.displacement_nm * NM)?;
    t.push(vec![
        format!("temporal overlap, standing-wave model ({} nm)", f.displacement_nm),
        "model".into(),
        num(overlap),
    ]);
    let dephasing = dephasing_error(f.dephasing_delay_us * 1e-6, f.t2_star_ms * 1e-3)?;
    t.push(vec!["qubit dephasing model".into(), "model".into(), num(dephasing)]);
    Ok(t)
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

/// Parses `args` and runs one command. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{rendered}")
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.simulation.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.simulation.trials = trials;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Command::Simulate { p_aa: Some(p), .. } = cli.command {
        cfg.simulation.p_aa_override = Some(p);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_table(cfg: &RunConfig, file: &str, table: &Table, stdout: &mut dyn Write) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join(file);
    table.write_csv(&path)?;
    writeln!(stdout, "wrote {}", path.display())?;
    Ok(())
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Table2 => {
            let t = table2(&cfg)?;
            write!(stdout, "{}", t.render_text())?;
            write_table(&cfg, "table2.csv", &t, stdout)?;
        }
        Command::Figure { name } => {
            let t = figure(*name, &cfg)?;
            writeln!(stdout, "{}: {} rows", name.as_str(), t.rows.len())?;
            write_table(&cfg, &format!("{}.csv", name.as_str()), &t, stdout)?;
        }
        Command::Simulate { workers, .. } => {
            let (p_aa, r, t) = simulation(&cfg, *workers)?;
            writeln!(stdout, "P_aa                    {p_aa}")?;
            writeln!(stdout, "trials                  {}", r.trials)?;
            writeln!(
                stdout,
                "mean time to entangle   {} s ± {} s (95%)",
                r.mean_time_to_entanglement, r.confidence_halfwidth
            )?;
            writeln!(stdout, "rate                    {} 1/s", r.rate)?;
            writeln!(stdout, "mean attempts           {}", r.mean_attempts)?;
            writeln!(stdout, "mean epochs             {}", r.mean_epochs)?;
            writeln!(stdout, "reload events           {}", r.reload_events)?;
            write!(stdout, "{}", t.to_csv_string()?)?;
            write_table(&cfg, "simulate.csv", &t, stdout)?;
        }
        Command::Optimize => {
            let t = optimize(&cfg)?;
            write!(stdout, "{}", t.render_text())?;
            write_table(&cfg, "optimize.csv", &t, stdout)?;
        }
        Command::Budget => {
            let t = budget(&cfg)?;
            write!(stdout, "{}", t.render_text())?;
            write_table(&cfg, "budget.csv", &t, stdout)?;
        }
    }
    Ok(())
}
