use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Tensile axis.
pub const Y: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Free,
    BottomGrip,
    TopGrip,
}

impl Region {
    pub fn is_grip(self) -> bool {
        self != Region::Free
    }
}

/// Atoms in an orthorhombic box. Periodic axes wrap; the others are open.
#[derive(Debug, Clone, PartialEq)]
pub struct Crystal {
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    pub box_len: Vec3,
    pub periodic: [bool; 3],
    /// Lattice constant the crystal was built with (reduced units).
    pub lattice_constant: f64,
    pub regions: Vec<Region>,
}

/// How to bound an FCC block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Periodic in x and z, open along y with grip layers of this many
    /// atomic planes at each end.
    Tensile { grip_planes: usize },
    /// Periodic in all three directions, no grips.
    Bulk,
    /// Open in all directions, no grips.
    Cluster,
}

impl Crystal {
    pub fn new(
        positions: Vec<Vec3>,
        velocities: Vec<Vec3>,
        box_len: Vec3,
        periodic: [bool; 3],
        lattice_constant: f64,
        regions: Vec<Region>,
    ) -> Result<Self> {
        let n = positions.len();
        if velocities.len() != n || regions.len() != n {
            return Err(Error::param("positions, velocities and regions differ in length"));
        }
        for axis in 0..3 {
            if periodic[axis] && !(box_len[axis] > 0.0) {
                return Err(Error::param("periodic box lengths must be > 0"));
            }
        }
        if positions.iter().chain(&velocities).flatten().any(|x| !x.is_finite()) {
            return Err(Error::param("non-finite coordinate"));
        }
        Ok(Self {
            positions,
            velocities,
            box_len,
            periodic,
            lattice_constant,
            regions,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn grip_mask(&self) -> Vec<bool> {
        self.regions.iter().map(|r| r.is_grip()).collect()
    }

    pub fn has_grips(&self) -> bool {
        self.regions.iter().any(|r| r.is_grip())
    }

    /// Cross-section normal to the tensile axis.
    pub fn cross_section(&self) -> f64 {
        self.box_len[0] * self.box_len[2]
    }

    pub fn momentum(&self) -> Vec3 {
        let mut p = [0.0; 3];
        for v in &self.velocities {
            for a in 0..3 {
                p[a] += v[a];
            }
        }
        p
    }

    /// Kinetic energy of the free atoms (grip atoms are driven externally).
    pub fn kinetic_energy(&self) -> f64 {
        self.velocities
            .iter()
            .zip(&self.regions)
            .filter(|(_, r)| !r.is_grip())
            .map(|(v, _)| 0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]))
            .sum()
    }

    fn degrees_of_freedom(&self) -> usize {
        let free = self.regions.iter().filter(|r| !r.is_grip()).count();
        // Without grips the centre-of-mass motion is pinned at zero.
        if self.has_grips() {
            3 * free
        } else {
            (3 * free).saturating_sub(3)
        }
    }

    pub fn temperature(&self) -> f64 {
        match self.degrees_of_freedom() {
            0 => 0.0,
            dof => 2.0 * self.kinetic_energy() / dof as f64,
        }
    }

    /// Scales free-atom velocities to the given kinetic temperature.
    pub fn rescale_temperature(&mut self, target: f64) {
        let t = self.temperature();
        if t <= 0.0 {
            return;
        }
        let f = (target / t).sqrt();
        for (v, r) in self.velocities.iter_mut().zip(&self.regions) {
            if !r.is_grip() {
                v.iter_mut().for_each(|x| *x *= f);
            }
        }
    }

    /// Wraps coordinates on periodic axes into `[0, L)`.
    pub fn wrap(&mut self) {
        for p in &mut self.positions {
            for a in 0..3 {
                if self.periodic[a] {
                    p[a] = p[a].rem_euclid(self.box_len[a]);
                    if p[a] >= self.box_len[a] {
                        p[a] = 0.0;
                    }
                }
            }
        }
    }
}

const FCC_BASIS: [Vec3; 4] = [[0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]];

/// Grip planes needed so free atoms never see past a grip: every plane
/// closer than the cutoff to the first free plane belongs to the grip.
pub fn grip_planes_for_cutoff(a: f64, cutoff: f64) -> usize {
    ((cutoff / (0.5 * a)).ceil() as usize).saturating_sub(1).max(1)
}

/// FCC block of `nx × ny × nz` conventional cells with Maxwell-Boltzmann
/// velocities (zero net momentum, rescaled to exactly `temperature`).
///
/// For [`Boundary::Tensile`] the grip thickness is capped so that at least
/// one free plane remains.
pub fn build_crystal(
    cells: [usize; 3],
    a: f64,
    temperature: f64,
    seed: u64,
    boundary: Boundary,
) -> Result<Crystal> {
    if cells.iter().any(|&c| c < 2) {
        return Err(Error::param(format!("crystal needs at least 2 cells per axis, got {cells:?}")));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::param("lattice constant must be > 0"));
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::param("temperature must be >= 0"));
    }
    let [nx, ny, nz] = cells;
    let planes_y = 2 * ny;
    let grip = match boundary {
        Boundary::Tensile { grip_planes } => {
            if grip_planes == 0 {
                return Err(Error::param("grip needs at least one plane"));
            }
            grip_planes.min((planes_y - 1) / 2)
        }
        _ => 0,
    };
    let mut positions = Vec::with_capacity(4 * nx * ny * nz);
    let mut regions = Vec::with_capacity(positions.capacity());
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                for b in FCC_BASIS {
                    let p = [(i as f64 + b[0]) * a, (j as f64 + b[1]) * a, (k as f64 + b[2]) * a];
                    let plane = 2 * j + (2.0 * b[1]) as usize;
                    let region = if grip == 0 {
                        Region::Free
                    } else if plane < grip {
                        Region::BottomGrip
                    } else if plane >= planes_y - grip {
                        Region::TopGrip
                    } else {
                        Region::Free
                    };
                    positions.push(p);
                    regions.push(region);
                }
            }
        }
    }
    let periodic = match boundary {
        Boundary::Tensile { .. } => [true, false, true],
        Boundary::Bulk => [true, true, true],
        Boundary::Cluster => [false, false, false],
    };
    let box_len = [nx as f64 * a, ny as f64 * a, nz as f64 * a];
    let velocities = vec![[0.0; 3]; positions.len()];
    let mut crystal = Crystal::new(positions, velocities, box_len, periodic, a, regions)?;
    thermalize(&mut crystal, temperature, seed);
    Ok(crystal)
}

/// Draws free-atom velocities from the Maxwell-Boltzmann law (unit mass),
/// removes their net momentum and rescales to `temperature` exactly.
pub fn thermalize(crystal: &mut Crystal, temperature: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = temperature.sqrt();
    let mut n_free = 0usize;
    for (v, r) in crystal.velocities.iter_mut().zip(&crystal.regions) {
        if r.is_grip() {
            *v = [0.0; 3];
        } else {
            for x in v.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *x = sd * z;
            }
            n_free += 1;
        }
    }
    if n_free == 0 {
        return;
    }
    let p = crystal.momentum();
    let mean = p.map(|x| x / n_free as f64);
    for (v, r) in crystal.velocities.iter_mut().zip(&crystal.regions) {
        if !r.is_grip() {
            for a in 0..3 {
                v[a] -= mean[a];
            }
        }
    }
    if temperature == 0.0 {
        crystal.velocities.iter_mut().for_each(|v| *v = [0.0; 3]);
    } else {
        crystal.rescale_temperature(temperature);
    }
}

/// Ideal hexagonal close-packed lattice with nearest-neighbour distance `d`
/// and `c/a = sqrt(8/3)`, periodic in all directions, at rest.
///
/// `cells` counts orthorhombic 4-atom cells of `d × √3·d × c`.
pub fn build_hcp(cells: [usize; 3], d: f64) -> Result<Crystal> {
    if cells.iter().any(|&c| c < 2) {
        return Err(Error::param("HCP block needs at least 2 cells per axis"));
    }
    let c = d * (8.0f64 / 3.0).sqrt();
    let cell = [d, 3f64.sqrt() * d, c];
    let basis: [Vec3; 4] = [
        [0.0, 0.0, 0.0],
        [0.5, 0.5, 0.0],
        [0.5, 1.0 / 6.0, 0.5],
        [0.0, 2.0 / 3.0, 0.5],
    ];
    let mut positions = Vec::new();
    for i in 0..cells[0] {
        for j in 0..cells[1] {
            for k in 0..cells[2] {
                for b in basis {
                    positions.push([
                        (i as f64 + b[0]) * cell[0],
                        (j as f64 + b[1]) * cell[1],
                        (k as f64 + b[2]) * cell[2],
                    ]);
                }
            }
        }
    }
    let n = positions.len();
    let box_len = [cells[0] as f64 * cell[0], cells[1] as f64 * cell[1], cells[2] as f64 * cell[2]];
    Crystal::new(
        positions,
        vec![[0.0; 3]; n],
        box_len,
        [true; 3],
        d * 2f64.sqrt(),
        vec![Region::Free; n],
    )
}
