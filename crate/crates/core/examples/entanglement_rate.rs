//! Heralded atom-atom entanglement rate for cavity and lens front ends.

use qnet_link::cavity::AtomLine;
use qnet_link::entangle::{rate_sweep, DetectionChain, LinkDesign, ProtocolTimings, RateConvention};
use qnet_link::mirror_opt::CavitySetup;
use qnet_link::cavity::CavityGeometry;
use qnet_link::units::{MM, PPM, UM};

fn cavity(name: &str, geometry: CavityGeometry) -> LinkDesign {
    LinkDesign::Cavity {
        name: name.into(),
        setup: CavitySetup {
            geometry,
            t_low: 10.0 * PPM,
            loss_rt: 40.0 * PPM,
            line: AtomLine::rb87_d2(),
        },
    }
}

fn main() -> qnet_link::Result<()> {
    let designs = vec![
        cavity("short confocal", CavityGeometry::new(0.15 * MM, 0.15 * MM)?),
        cavity("medium", CavityGeometry::near_concentric(2.0 * MM, 10.0 * UM)?),
        cavity("long", CavityGeometry::near_concentric(5.0 * MM, 10.0 * UM)?),
        LinkDesign::Lens { name: "lens NA 0.7".into(), na: 0.7 },
        LinkDesign::Fixed { name: "ideal".into(), eta_rb: 1.0 },
    ];
    let timings = ProtocolTimings::default();
    let chain = DetectionChain::default();
    for convention in [RateConvention::EpochCount, RateConvention::Exact] {
        println!("{convention:?} timing model");
        for r in rate_sweep(&designs, &timings, &chain, convention) {
            println!(
                "  {:<16} eta_Rb {:.4}  P_aa {:.5}  rate {:>8.1} /s",
                r.name, r.eta_rb, r.p_aa, r.rate
            );
        }
    }
    Ok(())
}
