//! Free-space collection of a circular dipole with a single lens, and the
//! fraction that couples into a single-mode fiber.
//!
//! Run with `cargo run --release --example fiber_coupling`.

use qnet_link::dipole_optics::{collection_fraction_at_na, fiber_coupling, DipolePolarization};

fn main() -> qnet_link::Result<()> {
    let sigma = DipolePolarization::SigmaPlus;
    println!("{:>6} {:>10} {:>10} {:>10} {:>8}", "NA", "collected", "overlap", "fiber", "w/rho");
    for na in [0.1, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.99, 0.999] {
        let c = fiber_coupling(sigma, na)?;
        println!(
            "{na:>6} {:>10.5} {:>10.5} {:>10.5} {:>8.4}",
            c.collection, c.overlap, c.efficiency, c.waist_ratio
        );
    }
    // Full half space.
    println!("sigma into the half space: {:.6}", collection_fraction_at_na(sigma, 1.0)?);
    println!("pi into the half space:    {:.6}", collection_fraction_at_na(DipolePolarization::Pi, 1.0)?);
    Ok(())
}
