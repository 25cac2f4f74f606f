use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::cna::{cna_labels, defect_concentrations};
use super::crystal::{build_crystal, grip_planes_for_cutoff, Boundary, Region, Y};
use super::dynamics::Simulation;
use super::MdParams;
use crate::error::{Error, Result};

pub const RECORD_HEADER: &str = "strain,c_fcc,c_hcp,c_unk,sigma_top,energy";

/// State of the crystal at one strain checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectRecord {
    pub strain: f64,
    pub c_fcc: f64,
    pub c_hcp: f64,
    pub c_unk: f64,
    /// Tensile stress through the top grip, reduced units.
    pub sigma_top: f64,
    /// Potential plus free-atom kinetic energy.
    pub energy: f64,
}

/// Nominal strain of every checkpoint: `0, d, 2d, …`, ending exactly at the target.
pub fn checkpoint_strains(target: f64, step: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    if target <= 0.0 {
        return out;
    }
    let n = (target / step - 1e-9).ceil() as usize;
    for k in 1..=n {
        out.push(round_strain((k as f64 * step).min(target)));
    }
    out
}

/// Rounds to 1e-9 so checkpoints print and compare cleanly.
fn round_strain(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn record(sim: &Simulation, strain: f64, cna_cutoff: f64) -> Result<DefectRecord> {
    let crystal = sim.crystal();
    let labels = cna_labels(crystal, cna_cutoff);
    let (c_fcc, c_hcp, c_unk) = defect_concentrations(&labels, &crystal.grip_mask())?;
    Ok(DefectRecord {
        strain,
        c_fcc,
        c_hcp,
        c_unk,
        sigma_top: sim.grip_stress(),
        energy: sim.total_energy(),
    })
}

/// Builds the crystal, equilibrates it with velocity rescaling, then pulls
/// the grips apart and records one [`DefectRecord`] per strain checkpoint.
///
/// Strain is the change in separation between the innermost grip planes
/// over its initial value. The grip speed is trimmed per checkpoint
/// interval so that every checkpoint falls exactly on a time step.
pub fn run_tensile(params: &MdParams, cells: [usize; 3]) -> Result<Vec<DefectRecord>> {
    params.validate()?;
    let a = params.lj.fcc_lattice_constant()?;
    let grip_planes = params
        .grip_planes
        .unwrap_or_else(|| grip_planes_for_cutoff(a, params.lj.cutoff));
    let crystal = build_crystal(cells, a, params.temperature, params.seed, Boundary::Tensile { grip_planes })?;

    let inner_top = crystal
        .positions
        .iter()
        .zip(&crystal.regions)
        .filter(|(_, r)| **r == Region::TopGrip)
        .map(|(p, _)| p[Y])
        .fold(f64::INFINITY, f64::min);
    let inner_bottom = crystal
        .positions
        .iter()
        .zip(&crystal.regions)
        .filter(|(_, r)| **r == Region::BottomGrip)
        .map(|(p, _)| p[Y])
        .fold(f64::NEG_INFINITY, f64::max);
    let separation = inner_top - inner_bottom;

    let mut sim = Simulation::new(crystal, params.lj, params.dt)?;
    let cna_cutoff = params.cna_cutoff * a;
    let at_strain = |e: Error, sim: &Simulation| match e {
        Error::BlowUp { i, j, distance, .. } => Error::BlowUp {
            strain: sim.grip_opening() / separation,
            i,
            j,
            distance,
        },
        other => other,
    };

    for _ in 0..params.equilibration_steps {
        sim.step().map_err(|e| at_strain(e, &sim))?;
        if params.temperature > 0.0 {
            sim.rescale_temperature(params.temperature);
        }
    }

    let strains = checkpoint_strains(params.target_strain, params.checkpoint_dstrain);
    let mut records = Vec::with_capacity(strains.len());
    records.push(record(&sim, 0.0, cna_cutoff)?);
    let pull = params.strain_rate * a;
    for w in strains.windows(2) {
        let opening = (w[1] - w[0]) * separation;
        let steps = ((opening / (pull * params.dt)).round() as u64).max(1);
        sim.set_grip_speed(opening / (2.0 * steps as f64 * params.dt));
        for _ in 0..steps {
            sim.step().map_err(|e| at_strain(e, &sim))?;
        }
        records.push(record(&sim, w[1], cna_cutoff)?);
    }
    Ok(records)
}

pub fn write_records_csv<W: Write>(records: &[DefectRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{RECORD_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.strain, r.c_fcc, r.c_hcp, r.c_unk, r.sigma_top, r.energy
        )?;
    }
    out.flush()
}

pub fn read_records_csv(path: &Path) -> Result<Vec<DefectRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(h)) if h.trim_end() == RECORD_HEADER => {}
        Some(Err(e)) => return Err(Error::io(path, e)),
        _ => return Err(Error::parse(path, 1, format!("expected header `{RECORD_HEADER}`"))),
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = k + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(path, lineno, format!("bad number: {e}")))?;
        let [strain, c_fcc, c_hcp, c_unk, sigma_top, energy] = fields[..] else {
            return Err(Error::parse(path, lineno, format!("expected 6 fields, got {}", fields.len())));
        };
        if out.last().is_some_and(|r: &DefectRecord| strain < r.strain) {
            return Err(Error::parse(path, lineno, "strain decreases"));
        }
        out.push(DefectRecord {
            strain,
            c_fcc,
            c_hcp,
            c_unk,
            sigma_top,
            energy,
        });
    }
    Ok(out)
}
