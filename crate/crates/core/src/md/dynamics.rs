use super::crystal::{Crystal, Region, Vec3, Y};
use super::neighbor::{pairs_within, Pair};
use super::potential::LennardJones;
use crate::error::{Error, Result};

/// Pairs closer than this fraction of sigma mean the time step is too large.
const BLOW_UP_FRACTION: f64 = 0.5;

/// Velocity-Verlet integrator over a [`Crystal`] with a Verlet neighbour list.
///
/// Grip atoms ignore forces and move rigidly along y: the top grip at
/// `+grip_speed`, the bottom one at `-grip_speed`.
#[derive(Debug, Clone)]
pub struct Simulation {
    crystal: Crystal,
    lj: LennardJones,
    dt: f64,
    skin: f64,
    grip_speed: f64,
    pairs: Vec<Pair>,
    built_at: Vec<Vec3>,
    forces: Vec<Vec3>,
    potential: f64,
    /// y-force exerted by free atoms on the top grip.
    top_grip_force: f64,
    /// Accumulated separation change of the grips.
    grip_opening: f64,
    steps: u64,
    rebuilds: u64,
}

impl Simulation {
    pub fn new(crystal: Crystal, lj: LennardJones, dt: f64) -> Result<Self> {
        lj.validate()?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::param(format!("time step must be > 0, got {dt}")));
        }
        let n = crystal.len();
        let mut sim = Self {
            crystal,
            lj,
            dt,
            skin: 0.3 * lj.sigma,
            grip_speed: 0.0,
            pairs: Vec::new(),
            built_at: Vec::new(),
            forces: vec![[0.0; 3]; n],
            potential: 0.0,
            top_grip_force: 0.0,
            grip_opening: 0.0,
            steps: 0,
            rebuilds: 0,
        };
        sim.rebuild();
        sim.compute_forces()?;
        Ok(sim)
    }

    pub fn crystal(&self) -> &Crystal {
        &self.crystal
    }

    pub fn into_crystal(self) -> Crystal {
        self.crystal
    }

    pub fn potential_energy(&self) -> f64 {
        self.potential
    }

    pub fn total_energy(&self) -> f64 {
        self.potential + self.crystal.kinetic_energy()
    }

    pub fn forces(&self) -> &[Vec3] {
        &self.forces
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Change in grip separation since the simulation started.
    pub fn grip_opening(&self) -> f64 {
        self.grip_opening
    }

    /// Tensile stress carried through the top grip: minus the y-force the
    /// free atoms exert on it, per unit cross-section. Positive in tension.
    pub fn grip_stress(&self) -> f64 {
        -self.top_grip_force / self.crystal.cross_section()
    }

    /// Sets the speed of each grip (top moves +y, bottom -y).
    pub fn set_grip_speed(&mut self, speed: f64) {
        self.grip_speed = speed;
        for (v, r) in self.crystal.velocities.iter_mut().zip(&self.crystal.regions) {
            match r {
                Region::TopGrip => *v = [0.0, speed, 0.0],
                Region::BottomGrip => *v = [0.0, -speed, 0.0],
                Region::Free => {}
            }
        }
    }

    /// Rescales free-atom velocities to `temperature`.
    pub fn rescale_temperature(&mut self, temperature: f64) {
        self.crystal.rescale_temperature(temperature);
    }

    /// Advances one velocity-Verlet step.
    pub fn step(&mut self) -> Result<()> {
        let half = 0.5 * self.dt;
        let c = &mut self.crystal;
        for ((v, f), r) in c.velocities.iter_mut().zip(&self.forces).zip(&c.regions) {
            if !r.is_grip() {
                for a in 0..3 {
                    v[a] += half * f[a];
                }
            }
        }
        for (p, v) in c.positions.iter_mut().zip(&c.velocities) {
            for a in 0..3 {
                p[a] += self.dt * v[a];
            }
        }
        if c.has_grips() {
            self.grip_opening += 2.0 * self.grip_speed * self.dt;
        }
        if self.needs_rebuild() {
            self.rebuild();
        }
        self.compute_forces()?;
        let c = &mut self.crystal;
        for ((v, f), r) in c.velocities.iter_mut().zip(&self.forces).zip(&c.regions) {
            if !r.is_grip() {
                for a in 0..3 {
                    v[a] += half * f[a];
                }
            }
        }
        self.steps += 1;
        Ok(())
    }

    fn needs_rebuild(&self) -> bool {
        let limit = 0.25 * self.skin * self.skin;
        self.crystal.positions.iter().zip(&self.built_at).any(|(p, q)| {
            let d: f64 = (0..3).map(|a| (p[a] - q[a]).powi(2)).sum();
            d > limit
        })
    }

    fn rebuild(&mut self) {
        self.crystal.wrap();
        self.pairs = pairs_within(&self.crystal, self.lj.cutoff + self.skin);
        self.built_at = self.crystal.positions.clone();
        self.rebuilds += 1;
    }

    fn compute_forces(&mut self) -> Result<()> {
        let pos = &self.crystal.positions;
        let regions = &self.crystal.regions;
        let blow_up_sq = (BLOW_UP_FRACTION * self.lj.sigma).powi(2);
        self.forces.iter_mut().for_each(|f| *f = [0.0; 3]);
        let mut potential = 0.0;
        let mut top = 0.0;
        for p in &self.pairs {
            let (i, j) = (p.i as usize, p.j as usize);
            let d = [
                pos[i][0] - pos[j][0] - p.shift[0],
                pos[i][1] - pos[j][1] - p.shift[1],
                pos[i][2] - pos[j][2] - p.shift[2],
            ];
            let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            if r2 >= self.lj.cutoff_sq() {
                continue;
            }
            if r2 < blow_up_sq {
                return Err(Error::BlowUp {
                    strain: f64::NAN,
                    i,
                    j,
                    distance: r2.sqrt(),
                });
            }
            let (u, f_over_r) = self.lj.eval(r2);
            potential += u;
            for a in 0..3 {
                let f = f_over_r * d[a];
                self.forces[i][a] += f;
                self.forces[j][a] -= f;
            }
            match (regions[i], regions[j]) {
                (Region::Free, Region::TopGrip) => top -= f_over_r * d[Y],
                (Region::TopGrip, Region::Free) => top += f_over_r * d[Y],
                _ => {}
            }
        }
        self.potential = potential;
        self.top_grip_force = top;
        Ok(())
    }
}
