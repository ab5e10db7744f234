//! Choosing the out-coupling mirror transmission. Too little transmission
//! loses the photon to scatter, too much kills the cooperativity.

use qnet_link::cavity::{AtomLine, CavityGeometry};
use qnet_link::mirror_opt::{optimize_t_high, CavitySetup, Objective};
use qnet_link::units::{MM, PPM, UM};

fn main() -> qnet_link::Result<()> {
    let setup = CavitySetup {
        geometry: CavityGeometry::near_concentric(5.0 * MM, 10.0 * UM)?,
        t_low: 10.0 * PPM,
        loss_rt: 40.0 * PPM,
        line: AtomLine::rb87_d2(),
    };
    for t_ppm in [300.0, 1000.0, 3000.0, 6000.0, 10000.0, 30000.0] {
        let e = setup.evaluate(t_ppm * PPM)?;
        println!("T_high {t_ppm:>7} ppm  eta {:.4}  eta_Rb {:.4}  C {:.3}", e.eta, e.eta_rb, e.params.cooperativity);
    }
    for (objective, label) in [(Objective::TwoLevel, "two-level"), (Objective::Rb, "Rb-87")] {
        let r = optimize_t_high(&setup, objective)?;
        println!(
            "optimum ({label}): T_high = {:.1} ppm, efficiency {:.4} after {} evaluations",
            r.t_high_opt / PPM,
            r.eta_opt,
            r.evaluations
        );
    }
    Ok(())
}
