use super::crystal::{Crystal, Vec3};

/// Atom `j`'s image at `positions[j] + shift` lies within range of atom `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub i: u32,
    pub j: u32,
    pub shift: Vec3,
}

/// Image offsets to try along one axis for a pair whose wrapped coordinate
/// difference is `delta`.
fn axis_images(delta: f64, len: f64, periodic: bool, range: f64, out: &mut Vec<f64>) {
    out.clear();
    if !periodic {
        out.push(0.0);
    } else if len >= 2.0 * range {
        // Only the minimum image can be in range.
        out.push((delta / len).round() * len);
    } else {
        let reach = (range / len).ceil() as i64 + 1;
        out.extend((-reach..=reach).map(|n| n as f64 * len));
    }
}

/// Every pair (including an atom and its own periodic images) closer than
/// `range`. Each unordered pair of images appears once.
///
/// Expects positions wrapped into the box on periodic axes.
pub fn pairs_within(crystal: &Crystal, range: f64) -> Vec<Pair> {
    let r2max = range * range;
    let n = crystal.len();
    let pos = &crystal.positions;
    let mut out = Vec::new();
    let mut sx = Vec::new();
    let mut sy = Vec::new();
    let mut sz = Vec::new();
    for i in 0..n {
        for j in i..n {
            let d = [pos[i][0] - pos[j][0], pos[i][1] - pos[j][1], pos[i][2] - pos[j][2]];
            axis_images(d[0], crystal.box_len[0], crystal.periodic[0], range, &mut sx);
            axis_images(d[1], crystal.box_len[1], crystal.periodic[1], range, &mut sy);
            axis_images(d[2], crystal.box_len[2], crystal.periodic[2], range, &mut sz);
            for &x in &sx {
                for &y in &sy {
                    for &z in &sz {
                        // Self-images: keep one of each ± pair and skip the atom itself.
                        if i == j && !((x, y, z) > (0.0, 0.0, 0.0)) {
                            continue;
                        }
                        let dx = d[0] - x;
                        let dy = d[1] - y;
                        let dz = d[2] - z;
                        if dx * dx + dy * dy + dz * dz < r2max {
                            out.push(Pair {
                                i: i as u32,
                                j: j as u32,
                                shift: [x, y, z],
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Relative vectors from each atom to all neighbour images within `range`.
pub fn neighbor_vectors(crystal: &Crystal, range: f64) -> Vec<Vec<Vec3>> {
    let mut wrapped = crystal.clone();
    wrapped.wrap();
    let mut out = vec![Vec::new(); crystal.len()];
    for p in pairs_within(&wrapped, range) {
        let (i, j) = (p.i as usize, p.j as usize);
        let pi = wrapped.positions[i];
        let pj = wrapped.positions[j];
        let d = [
            pj[0] + p.shift[0] - pi[0],
            pj[1] + p.shift[1] - pi[1],
            pj[2] + p.shift[2] - pi[2],
        ];
        out[i].push(d);
        out[j].push([-d[0], -d[1], -d[2]]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::md::crystal::{build_crystal, Boundary};

    fn brute_force_count(c: &Crystal, range: f64) -> usize {
        // Enumerate a generous block of images explicitly.
        let mut count = 0;
        let reach = |axis: usize| if c.periodic[axis] { 3i64 } else { 0 };
        for i in 0..c.len() {
            for j in 0..c.len() {
                for nx in -reach(0)..=reach(0) {
                    for ny in -reach(1)..=reach(1) {
                        for nz in -reach(2)..=reach(2) {
                            if i == j && (nx, ny, nz) == (0, 0, 0) {
                                continue;
                            }
                            let s = [nx as f64 * c.box_len[0], ny as f64 * c.box_len[1], nz as f64 * c.box_len[2]];
                            let d: f64 = (0..3).map(|a| (c.positions[j][a] + s[a] - c.positions[i][a]).powi(2)).sum();
                            if d < range * range {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn fcc_has_twelve_nearest_neighbours() {
        let a = 1.55;
        let c = build_crystal([3, 3, 3], a, 0.0, 0, Boundary::Bulk).unwrap();
        let nb = neighbor_vectors(&c, 0.854 * a);
        assert!(nb.iter().all(|v| v.len() == 12));
    }

    #[test]
    fn small_box_counts_every_image() {
        // Box of 2 cells is shorter than twice the range: multiple images count.
        for boundary in [Boundary::Bulk, Boundary::Tensile { grip_planes: 1 }, Boundary::Cluster] {
            let mut c = build_crystal([2, 2, 3], 1.2, 0.3, 4, boundary).unwrap();
            // Jitter so no distance sits on the cutoff.
            for (k, p) in c.positions.iter_mut().enumerate() {
                p[0] += 0.01 * ((k * 7 % 11) as f64 - 5.0) / 5.0;
                p[1] += 0.01 * ((k * 3 % 7) as f64 - 3.0) / 3.0;
            }
            c.wrap();
            let range = 2.8;
            let pairs = pairs_within(&c, range);
            assert_eq!(2 * pairs.len(), brute_force_count(&c, range), "{boundary:?}");
        }
    }
}
