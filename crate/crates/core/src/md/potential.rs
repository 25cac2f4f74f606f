use crate::error::{Error, Result};

/// Lennard-Jones pair potential, truncated at `cutoff` and shifted so the
/// energy is continuous there. Forces are left unshifted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LennardJones {
    pub epsilon: f64,
    pub sigma: f64,
    pub cutoff: f64,
}

impl Default for LennardJones {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            sigma: 1.0,
            cutoff: 2.5,
        }
    }
}

impl LennardJones {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !(self.sigma > 0.0) || !self.cutoff.is_finite() {
            return Err(Error::param("LJ epsilon and sigma must be > 0, cutoff finite"));
        }
        if !(self.cutoff > self.sigma) {
            return Err(Error::param(format!(
                "LJ cutoff {} must exceed sigma {}",
                self.cutoff, self.sigma
            )));
        }
        Ok(())
    }

    fn raw(&self, r2: f64) -> f64 {
        let s6 = (self.sigma * self.sigma / r2).powi(3);
        4.0 * self.epsilon * (s6 * s6 - s6)
    }

    pub fn cutoff_sq(&self) -> f64 {
        self.cutoff * self.cutoff
    }

    /// Pair energy and `-dU/dr / r` at squared distance `r2` (zero beyond the cutoff).
    /// The force on atom i from j is `f_over_r * (r_i - r_j)`.
    #[inline]
    pub fn eval(&self, r2: f64) -> (f64, f64) {
        if r2 >= self.cutoff_sq() {
            return (0.0, 0.0);
        }
        let s2 = self.sigma * self.sigma / r2;
        let s6 = s2 * s2 * s2;
        let u = 4.0 * self.epsilon * (s6 * s6 - s6) - self.raw(self.cutoff_sq());
        let f_over_r = 24.0 * self.epsilon * (2.0 * s6 * s6 - s6) / r2;
        (u, f_over_r)
    }

    /// Zero-temperature FCC lattice constant: the root of d(energy per atom)/da.
    /// At this spacing the lattice is force-free and stress-free.
    pub fn fcc_lattice_constant(&self) -> Result<f64> {
        self.validate()?;
        // Near-neighbour spacing a/sqrt(2) sits close to the pair minimum.
        let r_min = 2f64.powf(1.0 / 6.0) * self.sigma;
        let (mut lo, mut hi) = (0.85 * r_min * 2f64.sqrt(), 1.15 * r_min * 2f64.sqrt());
        let (d_lo, d_hi) = (self.fcc_pressure_term(lo), self.fcc_pressure_term(hi));
        if !(d_lo < 0.0 && d_hi > 0.0) {
            return Err(Error::param(format!(
                "no FCC equilibrium for cutoff {} (sigma {})",
                self.cutoff, self.sigma
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.fcc_pressure_term(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// a · d(E/N)/da for an FCC lattice of constant `a` (sum of r·dU/dr over
    /// neighbours, halved).
    fn fcc_pressure_term(&self, a: f64) -> f64 {
        let reach = (2.0 * self.cutoff / a).ceil() as i64 + 1;
        let mut sum = 0.0;
        for i in -reach..=reach {
            for j in -reach..=reach {
                for k in -reach..=reach {
                    if (i + j + k) % 2 != 0 || (i, j, k) == (0, 0, 0) {
                        continue;
                    }
                    let r2 = 0.25 * a * a * (i * i + j * j + k * k) as f64;
                    let (_, f_over_r) = self.eval(r2);
                    sum -= f_over_r * r2;
                }
            }
        }
        0.5 * sum
    }

    /// Energy per atom of a perfect FCC lattice.
    pub fn fcc_energy_per_atom(&self, a: f64) -> f64 {
        let reach = (2.0 * self.cutoff / a).ceil() as i64 + 1;
        let mut sum = 0.0;
        for i in -reach..=reach {
            for j in -reach..=reach {
                for k in -reach..=reach {
                    if (i + j + k) % 2 != 0 || (i, j, k) == (0, 0, 0) {
                        continue;
                    }
                    sum += self.eval(0.25 * a * a * (i * i + j * j + k * k) as f64).0;
                }
            }
        }
        0.5 * sum
    }
}
