//! Cavity QED parameters of a near-concentric resonator as the mirror spacing
//! approaches the concentric limit.

use qnet_link::cavity::{cqed_params, transverse_mode_spacing, AtomLine, CavityGeometry, MirrorSet};
use qnet_link::units::{to_hz, MHZ, MM, PPM, UM};

fn main() -> qnet_link::Result<()> {
    let line = AtomLine::rb87_d2();
    let mirrors = MirrorSet::new(5700.0 * PPM, 10.0 * PPM, 40.0 * PPM)?;
    println!(
        "{:>8} {:>9} {:>9} {:>8} {:>10} {:>12} {:>14}",
        "d_crit", "waist", "finesse", "C", "g/2pi", "kappa/2pi", "mode spacing"
    );
    for d_um in [0.5, 1.0, 3.0, 10.0, 30.0, 100.0] {
        let geom = CavityGeometry::near_concentric(5.0 * MM, d_um * UM)?;
        let p = cqed_params(&geom, &mirrors, &line)?;
        println!(
            "{:>6}um {:>7.3}um {:>9.1} {:>8.3} {:>6.2} MHz {:>8.3} MHz {:>10.1} MHz",
            d_um,
            p.waist / UM,
            p.finesse,
            p.cooperativity,
            to_hz(p.g) / MHZ,
            to_hz(p.kappa) / MHZ,
            transverse_mode_spacing(&geom)? / MHZ,
        );
    }
    Ok(())
}
