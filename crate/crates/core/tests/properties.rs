use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use qnet_link::cavity::{
    cqed_params, finesse, near_concentric_waist, transverse_mode_spacing, AtomLine, CavityGeometry, MirrorSet,
};
use qnet_link::collection::{branching, rb_efficiency, rb_free_space_efficiency, two_level_efficiency};
use qnet_link::config::RunConfig;
use qnet_link::dipole_optics::{
    collection_fraction, collection_fraction_at_na, fiber_coupling, fiber_overlap, DipolePolarization,
    GaussianMode, LensSpec,
};
use qnet_link::entangle::{
    analytic_entanglement_time, entanglement_rate, p_atom_atom, simulate, DetectionChain, LossModel,
    ProtocolTimings, RateConvention, SimSettings,
};
use qnet_link::fidelity::{compose_budget, default_entries, temporal_overlap_error, BudgetEntry};
use qnet_link::mirror_opt::{
    optimize_t_high, sweep, CavitySetup, Objective, Spacing, SweepSpec, SweepVariable, THighPolicy,
};
use qnet_link::units::{MM, PPM, SPEED_OF_LIGHT, UM};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn setup(roc_mm: f64, d_crit_um: f64) -> CavitySetup {
    CavitySetup {
        geometry: CavityGeometry::near_concentric(roc_mm * MM, d_crit_um * UM).unwrap(),
        t_low: 10.0 * PPM,
        loss_rt: 40.0 * PPM,
        line: AtomLine::rb87_d2(),
    }
}

// Brute-force overlap: Cartesian field components on a polar midpoint grid.
// The σ₊ far field is the transverse part of (x̂ + iŷ), mapped to the lens
// plane by ρ = f·tanθ with amplitude cos^{3/2}θ; the fiber modes are uniform
// circular polarizations (x̂ ± iŷ) with a Gaussian envelope.
fn riemann_overlap(na: f64, waist_ratio: f64, n_rho: usize, n_phi: usize) -> f64 {
    let f = 1.0;
    let rho_max = f * na / (1.0 - na * na).sqrt();
    let w = waist_ratio * rho_max;
    let (dr, dphi) = (rho_max / n_rho as f64, 2.0 * PI / n_phi as f64);
    let i = Complex64::i();
    let mut amp = [Complex64::new(0.0, 0.0); 2];
    let (mut p_d, mut p_g) = (0.0, 0.0);
    for a in 0..n_rho {
        let rho = (a as f64 + 0.5) * dr;
        let theta = (rho / f).atan();
        let scale = theta.cos().powf(1.5);
        let env = (-(rho / w).powi(2)).exp();
        for b in 0..n_phi {
            let phi = (b as f64 + 0.5) * dphi;
            let (ct, st, cp, sp) = (theta.cos(), theta.sin(), phi.cos(), phi.sin());
            // Dipole vector d = (1, i, 0); unit vectors on the sphere.
            let th_hat = [ct * cp, ct * sp, -st];
            let ph_hat = [-sp, cp, 0.0];
            let d = [Complex64::new(1.0, 0.0), i, Complex64::new(0.0, 0.0)];
            let e_th: Complex64 = (0..3).map(|k| d[k] * th_hat[k]).sum();
            let e_ph: Complex64 = (0..3).map(|k| d[k] * ph_hat[k]).sum();
            // θ̂ maps to the radial direction of the collimated beam.
            let ex = scale * (e_th * cp - e_ph * sp);
            let ey = scale * (e_th * sp + e_ph * cp);
            let da = rho * dr * dphi;
            p_d += (ex.norm_sqr() + ey.norm_sqr()) * da;
            p_g += 2.0 * env * env * da;
            for (h, s) in [1.0, -1.0].iter().enumerate() {
                let (gx, gy) = (Complex64::new(env, 0.0), i * *s * env);
                amp[h] += (gx * ex.conj() + gy * ey.conj()) * da;
            }
        }
    }
    (amp[0].norm_sqr() + amp[1].norm_sqr()) / (p_d * p_g)
}

#[test]
fn overlap_matches_brute_force_grid() {
    let lens = LensSpec::with_na(0.9).unwrap();
    for ratio in [0.4, 0.7584, 1.3] {
        let mode = GaussianMode::new(ratio * lens.rho_na()).unwrap();
        let o = fiber_overlap(DipolePolarization::SigmaPlus, &lens, &mode).unwrap();
        let oracle = riemann_overlap(0.9, ratio, 4000, 64);
        assert!((o - oracle).abs() <= 1e-6, "ratio {ratio}: {o} vs {oracle}");
    }
}

#[test]
fn hemisphere_holds_half_of_the_emission() {
    for pol in DipolePolarization::ALL {
        let h = collection_fraction_at_na(pol, 1.0).unwrap();
        assert!((h - 0.5).abs() <= 1e-6, "{pol:?}: {h}");
    }
}

#[test]
fn sigma_cap_closed_form() {
    // (3/16)·2π·∫(1+cos²θ)sinθ dθ over the cap.
    for na in [0.1f64, 0.5, 0.9, 0.99] {
        let c = (1.0 - na * na).sqrt();
        let exact = 3.0 / 8.0 * ((1.0 - c) + (1.0 - c * c * c) / 3.0);
        let got = collection_fraction(DipolePolarization::SigmaMinus, &LensSpec::with_na(na).unwrap()).unwrap();
        assert!((got - exact).abs() < 1e-9, "{na}: {got} vs {exact}");
    }
}

#[test]
fn fiber_efficiency_monotone_on_50_points() {
    let rows: Vec<_> = (0..50)
        .map(|i| fiber_coupling(DipolePolarization::SigmaPlus, 0.02 + 0.979 * i as f64 / 49.0).unwrap())
        .collect();
    for w in rows.windows(2) {
        assert!(w[1].efficiency >= w[0].efficiency, "{:?}", w);
    }
    assert!(rows.iter().all(|r| r.efficiency <= r.collection && r.overlap <= 1.0));
}

#[test]
fn free_space_rb_efficiency_is_two_thirds_of_sigma() {
    let eta = fiber_coupling(DipolePolarization::SigmaPlus, 0.7).unwrap().efficiency;
    assert!((rb_free_space_efficiency(0.7).unwrap() - 2.0 / 3.0 * eta).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn overlap_is_focal_length_invariant(na in 0.05f64..0.98, ratio in 0.1f64..3.0, f in 1e-4f64..1e-1) {
        let a = LensSpec::new(na, f).unwrap();
        let b = LensSpec::new(na, 2.0 * f).unwrap();
        let oa = fiber_overlap(DipolePolarization::SigmaPlus, &a, &GaussianMode::new(ratio * a.rho_na()).unwrap()).unwrap();
        let ob = fiber_overlap(DipolePolarization::SigmaPlus, &b, &GaussianMode::new(ratio * b.rho_na()).unwrap()).unwrap();
        prop_assert!(rel(oa, ob) <= 1e-9, "{} vs {}", oa, ob);
        let ca = collection_fraction(DipolePolarization::SigmaPlus, &a).unwrap();
        let cb = collection_fraction(DipolePolarization::SigmaPlus, &b).unwrap();
        prop_assert!(rel(ca, cb) <= 1e-9);
    }

    #[test]
    fn pi_dipole_never_couples(na in 0.05f64..0.99, ratio in 0.05f64..5.0) {
        let lens = LensSpec::with_na(na).unwrap();
        let o = fiber_overlap(DipolePolarization::Pi, &lens, &GaussianMode::new(ratio * lens.rho_na()).unwrap()).unwrap();
        prop_assert!(o.abs() <= 1e-8);
    }

    #[test]
    fn overlap_bounded(na in 0.05f64..0.99, ratio in 0.05f64..5.0) {
        let lens = LensSpec::with_na(na).unwrap();
        for pol in [DipolePolarization::SigmaPlus, DipolePolarization::SigmaMinus] {
            let o = fiber_overlap(pol, &lens, &GaussianMode::new(ratio * lens.rho_na()).unwrap()).unwrap();
            prop_assert!((0.0..=1.0).contains(&o));
        }
    }
}

proptest! {
    #[test]
    fn finesse_symmetric_in_mirror_swap(a in 1e-6f64..0.1, b in 1e-6f64..0.1, l in 0.0f64..1e-3) {
        let m1 = MirrorSet::new(a, b, l).unwrap();
        let m2 = MirrorSet::new(b, a, l).unwrap();
        prop_assert_eq!(finesse(&m1).unwrap(), finesse(&m2).unwrap());
    }

    #[test]
    fn kappa_length_finesse_is_pi_c(roc_mm in 0.5f64..20.0, d_um in 0.1f64..500.0, t in 1e-5f64..0.05) {
        let g = CavityGeometry::near_concentric(roc_mm * MM, d_um * UM).unwrap();
        let p = cqed_params(&g, &MirrorSet::new(t, 10.0 * PPM, 40.0 * PPM).unwrap(), &AtomLine::rb87_d2()).unwrap();
        prop_assert!(rel(p.kappa * g.length() * p.finesse, PI * SPEED_OF_LIGHT) <= 1e-14);
    }

    #[test]
    fn efficiencies_are_consistent(roc_mm in 0.5f64..20.0, d_um in 0.1f64..500.0, t in 1e-5f64..0.05) {
        let line = AtomLine::rb87_d2();
        let m = MirrorSet::new(t, 10.0 * PPM, 40.0 * PPM).unwrap();
        let g = CavityGeometry::near_concentric(roc_mm * MM, d_um * UM).unwrap();
        let p = cqed_params(&g, &m, &line).unwrap();
        let eta = two_level_efficiency(&p, &m, &line);
        let eta_rb = rb_efficiency(&p, &m, &line);
        prop_assert!((0.0..=1.0).contains(&eta) && (0.0..=1.0).contains(&eta_rb));
        prop_assert!(eta_rb < eta);
        let b = branching(p.cooperativity).unwrap();
        prop_assert!(rel(eta_rb / eta, b.sigma_total()) <= 1e-12);
    }

    #[test]
    fn branching_normalized(c in 0.0f64..1e6) {
        let b = branching(c).unwrap();
        prop_assert!((b.p_plus + b.p_minus + b.p_pi - 1.0).abs() <= 1e-12);
        prop_assert_eq!(b.p_plus, b.p_minus);
    }

    #[test]
    fn exact_time_below_epoch_count_time_plus_cooling(p in 1e-4f64..1.0) {
        let t = ProtocolTimings::default();
        let exact = analytic_entanglement_time(p, &t, RateConvention::Exact).unwrap();
        let epoch_count = analytic_entanglement_time(p, &t, RateConvention::EpochCount).unwrap();
        prop_assert!(exact > 0.0 && epoch_count.is_finite());
        prop_assert!(exact <= epoch_count + t.t_cool);
    }

    #[test]
    fn p_aa_bounded_by_bell_measurement(eta in 0.0f64..=1.0, qe in 0.0f64..=1.0, km in 0.0f64..10.0) {
        let chain = DetectionChain { detector_qe: qe, fiber_length_km: km, attenuation_length_km: 1.091 };
        let p = p_atom_atom(eta, &chain).unwrap();
        prop_assert!((0.0..=0.5).contains(&p));
    }

    #[test]
    fn budget_additive_bounds_multiplicative(v in prop::collection::vec(0.0f64..0.2, 0..12)) {
        let entries = v.iter().enumerate().map(|(i, &x)| BudgetEntry::new(format!("e{i}"), x)).collect();
        let b = compose_budget(entries).unwrap();
        prop_assert!(b.total >= 1.0 - b.multiplicative_fidelity - 1e-15);
    }

    #[test]
    fn temporal_overlap_error_in_range(z1 in 0.0f64..1e-6, z2 in 0.0f64..1e-6, d_um in 0.5f64..100.0) {
        let s = setup(5.0, d_um);
        let p = s.evaluate(5730.0 * PPM).unwrap().params;
        let e = temporal_overlap_error(&p, &s.line, z1, z2).unwrap();
        prop_assert!((0.0..=0.5).contains(&e));
    }
}

#[test]
fn cooperativity_scales_with_finesse_over_waist_squared() {
    let line = AtomLine::rb87_d2();
    let m = MirrorSet::new(5000.0 * PPM, 10.0 * PPM, 40.0 * PPM).unwrap();
    let mut x = 0.1;
    let ratios: Vec<f64> = (0..20)
        .map(|i| {
            x = (x * 7.3 + 0.37) % 1.0;
            let g = CavityGeometry::near_concentric((1.0 + 9.0 * x) * MM, (0.5 + 50.0 * i as f64) * UM).unwrap();
            let p = cqed_params(&g, &m, &line).unwrap();
            p.cooperativity * p.waist * p.waist / p.finesse
        })
        .collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!((hi - lo) / lo < 1e-9);
}

#[test]
fn waist_shrinks_toward_concentric() {
    let line = AtomLine::rb87_d2();
    let mut prev = f64::INFINITY;
    for d_um in [200.0, 100.0, 30.0, 10.0, 3.0, 1.0, 0.3, 0.1] {
        let w = near_concentric_waist(&CavityGeometry::near_concentric(5.0 * MM, d_um * UM).unwrap(), &line).unwrap();
        assert!(w < prev);
        prev = w;
    }
}

#[test]
fn mode_spacing_positive_and_vanishes_at_concentric() {
    let mut prev = f64::INFINITY;
    for d_um in [1000.0, 100.0, 10.0, 1.0, 0.1, 0.01, 1e-4] {
        let dnu = transverse_mode_spacing(&CavityGeometry::near_concentric(5.0 * MM, d_um * UM).unwrap()).unwrap();
        assert!(dnu > 0.0 && dnu < prev);
        prev = dnu;
    }
    assert!(prev < 1e6, "{prev}");
}

#[test]
fn optimizer_reports_consistent_interior_maximum() {
    for (roc, d) in [(1.0, 1.0), (2.0, 10.0), (5.0, 10.0), (10.0, 50.0)] {
        let s = setup(roc, d);
        for objective in [Objective::TwoLevel, Objective::Rb] {
            let r = optimize_t_high(&s, objective).unwrap();
            let again = s.efficiency(r.t_high_opt, objective).unwrap();
            assert!((again - r.eta_opt).abs() <= 1e-9);
            assert!(s.efficiency(1e-6, objective).unwrap() < r.eta_opt);
            assert!(s.efficiency(0.1, objective).unwrap() < r.eta_opt);
        }
    }
}

#[test]
fn reoptimized_sweep_dominates_frozen_and_improves_toward_concentric() {
    let spec = |t_high| SweepSpec {
        variable: SweepVariable::DCrit,
        lo: 0.5 * UM,
        hi: 100.0 * UM,
        points: 20,
        spacing: Spacing::Log,
        setup: setup(2.0, 10.0),
        t_high,
        objective: Objective::Rb,
    };
    let reopt = sweep(&spec(THighPolicy::Reoptimize)).unwrap();
    for policy in [THighPolicy::FrozenAt { d_crit: 10.0 * UM }, THighPolicy::Fixed(3000.0 * PPM)] {
        let frozen = sweep(&spec(policy)).unwrap();
        for (r, f) in reopt.iter().zip(&frozen) {
            assert!(r.eta_rb >= f.eta_rb - 1e-9);
        }
    }
    for w in reopt.windows(2) {
        assert!(w[0].eta_rb > w[1].eta_rb);
    }
}

#[test]
fn rate_increases_with_efficiency() {
    let t = ProtocolTimings::default();
    let chain = DetectionChain::default();
    for convention in [RateConvention::EpochCount, RateConvention::Exact] {
        let mut prev = 0.0;
        for i in 1..=40 {
            let p = p_atom_atom(i as f64 / 40.0, &chain).unwrap();
            let r = entanglement_rate(p, &t, convention).unwrap();
            assert!(r >= prev, "{convention:?}");
            prev = r;
        }
    }
}

#[test]
fn temporal_overlap_error_grows_with_separation() {
    let s = setup(5.0, 10.0);
    let p = s.evaluate(5730.0 * PPM).unwrap().params;
    let quarter = s.line.wavelength() / 4.0;
    let mut prev = -1.0;
    for i in 0..=100 {
        let e = temporal_overlap_error(&p, &s.line, 0.0, quarter * i as f64 / 100.0).unwrap();
        assert!(e >= prev);
        prev = e;
    }
}

#[test]
fn negligible_budget_entries_default_to_zero() {
    let entries = default_entries();
    for name in ["atom qubit dephasing", "detector dark count", "multi-photon scattering", "off-resonant excitation"] {
        assert_eq!(entries.iter().find(|e| e.name == name).unwrap().infidelity, 0.0);
    }
    assert_eq!(RunConfig::default().budget_entries(), entries);
}

#[test]
fn mean_attempts_is_inverse_success_probability() {
    let t = ProtocolTimings::default();
    let n = 1_000_000u64;
    for p in [0.01, 0.056, 0.19] {
        let r = simulate(p, &t, &SimSettings::new(n, 5)).unwrap();
        let se = (1.0 - p).sqrt() / p / (n as f64).sqrt();
        assert!((r.mean_attempts - 1.0 / p).abs() <= 3.0 * se, "{p}: {}", r.mean_attempts);
    }
}

#[test]
fn simulation_is_independent_of_worker_count() {
    let t = ProtocolTimings::default();
    let s = SimSettings::new(50_000, 11).with_loss(LossModel::from_timings(&t));
    let a = simulate(0.03, &t, &s).unwrap();
    for w in [1, 2, 5] {
        assert_eq!(a, simulate(0.03, &t, &s.with_workers(w)).unwrap());
    }
    assert_ne!(a, simulate(0.03, &t, &SimSettings::new(50_000, 12).with_loss(s.loss)).unwrap());
}

/// Expected time with atom loss from the block-position Markov chain: state k
/// is the number of failures in the current block; every attempt costs
/// t_att, a loss costs t_load and returns to state 0.
fn lossy_mean_time(p: f64, t: &ProtocolTimings, loss: f64) -> f64 {
    let s = (1.0 - loss).powi(2);
    let n1 = t.n1 as usize;
    // T_k = a_k + b_k·T_0, filled from T_{N1} = t_cool + T_0 downward.
    let (mut a, mut b) = (t.t_cool, 1.0);
    for _ in 0..n1 {
        a = t.attempt_duration() + (1.0 - s) * t.t_load + s * (1.0 - p) * a;
        b = (1.0 - s) + s * (1.0 - p) * b;
    }
    a / (1.0 - b)
}

#[test]
fn lossy_simulation_matches_markov_chain() {
    let t = ProtocolTimings::default();
    let loss = LossModel::from_timings(&t);
    assert!((loss.per_block(t.n1) - t.p_loss_per_block).abs() < 1e-12);
    for p in [0.01, 0.056, 0.19] {
        let r = simulate(p, &t, &SimSettings::new(1_000_000, 3).with_loss(loss)).unwrap();
        let expected = lossy_mean_time(p, &t, loss.per_attempt);
        let z = (r.mean_time_to_entanglement - expected) / r.std_error;
        assert!(z.abs() <= 4.0, "{p}: z = {z}");
    }
    let no_loss = lossy_mean_time(0.056, &t, 0.0);
    let exact = analytic_entanglement_time(0.056, &t, RateConvention::Exact).unwrap();
    assert!(rel(no_loss, exact) < 1e-12);
}

#[test]
fn config_round_trips() {
    let cfg = RunConfig::default();
    let again = RunConfig::from_json_str(&cfg.to_json_string()).unwrap();
    assert_eq!(cfg, again);
}
