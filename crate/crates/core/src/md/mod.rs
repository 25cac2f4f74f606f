//! Molecular-dynamics tensile test of a small FCC crystal.
//!
//! Reduced Lennard-Jones units throughout (ε = σ = m = 1). With the default
//! 2.5σ cutoff the zero-temperature lattice constant is about 1.5496σ; taking
//! aluminium's 0.4049 nm for that spacing puts σ at roughly 0.261 nm.
//!
//! The crystal is periodic in x and z. Along y the outermost atomic planes
//! form two grips that are pulled apart at constant speed; defect content
//! is measured by common neighbour analysis on the atoms between them.

mod cna;
mod crystal;
mod dynamics;
mod neighbor;
mod potential;
mod tensile;

pub use cna::{bond_signature, classify, cna_labels, defect_concentrations, Label, Signature, DEFAULT_CNA_CUTOFF};
pub use crystal::{build_crystal, build_hcp, grip_planes_for_cutoff, thermalize, Boundary, Crystal, Region, Vec3};
pub use dynamics::Simulation;
pub use neighbor::{neighbor_vectors, pairs_within, Pair};
pub use potential::LennardJones;
pub use tensile::{checkpoint_strains, read_records_csv, run_tensile, write_records_csv, DefectRecord, RECORD_HEADER};

use crate::error::{Error, Result};

/// Lattice spacing of aluminium, nm.
pub const AL_LATTICE_NM: f64 = 0.4049;

#[derive(Debug, Clone, PartialEq)]
pub struct MdParams {
    /// Time step, reduced units.
    pub dt: f64,
    /// Reduced temperature of the initial velocities and the equilibration.
    pub temperature: f64,
    /// Grip separation speed in lattice spacings per reduced time unit.
    pub strain_rate: f64,
    pub target_strain: f64,
    pub checkpoint_dstrain: f64,
    pub lj: LennardJones,
    /// Velocity-rescaled steps before straining.
    pub equilibration_steps: usize,
    /// CNA cutoff in lattice constants.
    pub cna_cutoff: f64,
    /// Atomic planes per grip; `None` uses the thinnest grip that covers the cutoff.
    pub grip_planes: Option<usize>,
    pub seed: u64,
}

impl Default for MdParams {
    fn default() -> Self {
        Self {
            dt: 0.005,
            temperature: 0.02,
            strain_rate: 0.02,
            target_strain: 0.2,
            checkpoint_dstrain: 0.01,
            lj: LennardJones::default(),
            equilibration_steps: 500,
            cna_cutoff: DEFAULT_CNA_CUTOFF,
            grip_planes: None,
            seed: 1,
        }
    }
}

impl MdParams {
    pub fn validate(&self) -> Result<()> {
        self.lj.validate()?;
        let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Error::param(what.to_string())) };
        check(self.dt > 0.0 && self.dt.is_finite(), "dt must be > 0")?;
        check(self.temperature >= 0.0 && self.temperature.is_finite(), "temperature must be >= 0")?;
        check(self.strain_rate > 0.0 && self.strain_rate.is_finite(), "strain rate must be > 0")?;
        check(
            (0.0..=1.0).contains(&self.target_strain),
            "target strain must lie in [0, 1]",
        )?;
        check(
            self.checkpoint_dstrain >= 1e-6 && self.checkpoint_dstrain.is_finite(),
            "checkpoint strain step must be >= 1e-6",
        )?;
        check(
            self.cna_cutoff > 0.7071 && self.cna_cutoff < 1.0,
            "CNA cutoff must lie between the first and second FCC shells (0.7071, 1.0)",
        )?;
        check(self.grip_planes != Some(0), "grip needs at least one plane")?;
        Ok(())
    }
}
