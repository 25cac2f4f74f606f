//! Regenerates the shipped log-normal host calibrations.
//!
//! Run with `cargo run --release -p gridsweep --example calibrate_hosts`.

use gridsweep::hosts::calibrate_lognormal;

fn main() -> gridsweep::Result<()> {
    let rows = [
        ("REGISTERED_CPUS", 4.30, 4.95, true),
        ("REGISTERED_RAM", 6.68, 12.15, false),
        ("REGISTERED_HDD", 257.0, 371.0, false),
        ("LAMMPS_CPUS", 6.7, 10.0, true),
        ("LAMMPS_RAM", 16.0, 22.0, false),
        ("LAMMPS_HDD", 210.0, 320.0, false),
    ];
    for (name, mean, sd, snap) in rows {
        let cal = calibrate_lognormal(mean, sd, snap)?;
        println!(
            "const {name}: LogNormalParams = LogNormalParams::new({:?}, {:?}); // {:.3} ± {:.3}, objective {:.2e}",
            cal.params.log_mu, cal.params.log_sigma, cal.mean, cal.sd, cal.objective
        );
    }
    Ok(())
}
