use qnet_link::cavity::{cqed_params, AtomLine, CavityGeometry, MirrorSet};
use qnet_link::fidelity::{compose_budget, default_entries, dephasing_error, temporal_overlap_error};
use qnet_link::units::{MM, NM, PPM, UM};

fn main() -> qnet_link::Result<()> {
    let budget = compose_budget(default_entries())?;
    for e in &budget.entries {
        println!("{:<40} {:>6.2}%", e.name, 100.0 * e.infidelity);
    }
    println!("{:<40} {:>6.2}%", "total", 100.0 * budget.total);
    println!("fidelity {:.3} (product of terms: {:.4})", budget.fidelity(), budget.multiplicative_fidelity);

    // Model estimates for two of the entries.
    let line = AtomLine::rb87_d2();
    let geom = CavityGeometry::near_concentric(5.0 * MM, 10.0 * UM)?;
    let params = cqed_params(&geom, &MirrorSet::new(5700.0 * PPM, 10.0 * PPM, 40.0 * PPM)?, &line)?;
    for dz_nm in [25.0, 50.0, 100.0, 200.0] {
        let e = temporal_overlap_error(&params, &line, 0.0, dz_nm * NM)?;
        println!("photon shape mismatch, atoms {dz_nm} nm apart: {:.3}%", 100.0 * e);
    }
    println!("dephasing over 60 us with T2* = 3 ms: {:.2e}", dephasing_error(60e-6, 3e-3)?);
    Ok(())
}
