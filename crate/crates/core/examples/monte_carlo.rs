//! Monte Carlo of the attempt/cool/reload sequence against the closed form.
//!
//! `cargo run --release --example monte_carlo -- [trials] [seed]`

use qnet_link::entangle::{
    analytic_entanglement_time, simulate, LossModel, ProtocolTimings, RateConvention, SimSettings,
};

fn main() -> qnet_link::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let timings = ProtocolTimings::default();
    for p_aa in [0.01, 0.056, 0.19] {
        let exact = analytic_entanglement_time(p_aa, &timings, RateConvention::Exact)?;
        let ideal = simulate(p_aa, &timings, &SimSettings::new(trials, seed))?;
        let lossy = simulate(
            p_aa,
            &timings,
            &SimSettings::new(trials, seed).with_loss(LossModel::from_timings(&timings)),
        )?;
        println!("P_aa = {p_aa}");
        println!("  closed form        {:.4e} s", exact);
        println!(
            "  simulated          {:.4e} s +- {:.1e}  ({:+.2} SE)",
            ideal.mean_time_to_entanglement,
            ideal.std_error,
            (ideal.mean_time_to_entanglement - exact) / ideal.std_error
        );
        println!(
            "  with atom loss     {:.4e} s, {} reloads, rate down {:.1}%",
            lossy.mean_time_to_entanglement,
            lossy.reload_events,
            100.0 * (1.0 - lossy.rate / ideal.rate)
        );
    }
    Ok(())
}
