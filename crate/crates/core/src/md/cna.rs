use std::fmt;

use super::crystal::{Crystal, Vec3};
use super::neighbor::neighbor_vectors;
use crate::error::{Error, Result};

/// Midpoint between the first and second FCC shells, in lattice constants.
pub const DEFAULT_CNA_CUTOFF: f64 = 0.854;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Fcc,
    Hcp,
    Unknown,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Fcc => "FCC",
            Label::Hcp => "HCP",
            Label::Unknown => "UNK",
        })
    }
}

/// Common-neighbour signature of one bond: (common neighbours, bonds among
/// them, bonds in the largest connected cluster of those bonds).
pub type Signature = (usize, usize, usize);

fn dist2(a: &Vec3, b: &Vec3) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

/// Signature of the bond from the centre atom to `neighbors[k]`, where
/// `neighbors` are relative vectors from the centre.
pub fn bond_signature(neighbors: &[Vec3], k: usize, cutoff: f64) -> Signature {
    let c2 = cutoff * cutoff;
    let partner = neighbors[k];
    let common: Vec<&Vec3> = neighbors
        .iter()
        .enumerate()
        .filter(|&(m, v)| m != k && dist2(v, &partner) < c2)
        .map(|(_, v)| v)
        .collect();
    let mut bonds = Vec::new();
    for a in 0..common.len() {
        for b in a + 1..common.len() {
            if dist2(common[a], common[b]) < c2 {
                bonds.push((a, b));
            }
        }
    }
    (common.len(), bonds.len(), largest_bond_cluster(common.len(), &bonds))
}

/// Number of bonds in the largest connected group of bonds.
fn largest_bond_cluster(n: usize, bonds: &[(usize, usize)]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in bonds {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut per_root = vec![0usize; n];
    for &(a, _) in bonds {
        let r = find(&mut parent, a);
        per_root[r] += 1;
    }
    per_root.into_iter().max().unwrap_or(0)
}

/// Classifies one atom from the relative vectors to its neighbours.
pub fn classify(neighbors: &[Vec3], cutoff: f64) -> Label {
    if neighbors.len() != 12 {
        return Label::Unknown;
    }
    let (mut n421, mut n422) = (0, 0);
    for k in 0..12 {
        match bond_signature(neighbors, k, cutoff) {
            (4, 2, 1) => n421 += 1,
            (4, 2, 2) => n422 += 1,
            _ => return Label::Unknown,
        }
    }
    match (n421, n422) {
        (12, 0) => Label::Fcc,
        (6, 6) => Label::Hcp,
        _ => Label::Unknown,
    }
}

/// Per-atom CNA labels using neighbours closer than `cutoff` (absolute
/// length). Grip atoms are labelled too; exclude them downstream.
pub fn cna_labels(crystal: &Crystal, cutoff: f64) -> Vec<Label> {
    neighbor_vectors(crystal, cutoff)
        .iter()
        .map(|nb| classify(nb, cutoff))
        .collect()
}

/// Fractions of FCC, HCP and unknown atoms among the atoms not gripped.
/// The three add to exactly one.
pub fn defect_concentrations(labels: &[Label], grip_mask: &[bool]) -> Result<(f64, f64, f64)> {
    if labels.len() != grip_mask.len() {
        return Err(Error::param(format!(
            "{} labels but {} mask entries",
            labels.len(),
            grip_mask.len()
        )));
    }
    let (mut fcc, mut hcp, mut unk) = (0usize, 0usize, 0usize);
    for (l, _) in labels.iter().zip(grip_mask).filter(|(_, &g)| !g) {
        match l {
            Label::Fcc => fcc += 1,
            Label::Hcp => hcp += 1,
            Label::Unknown => unk += 1,
        }
    }
    let n = fcc + hcp + unk;
    if n == 0 {
        return Err(Error::param("every atom is gripped; nothing to count"));
    }
    // The last nonzero share is the complement of the others: in binary
    // floating point x + (1 - x) rounds to exactly 1 for x in [0, 1].
    let n = n as f64;
    let mut c_fcc = fcc as f64 / n;
    let mut c_hcp = hcp as f64 / n;
    let mut c_unk = 0.0;
    if unk > 0 {
        c_unk = 1.0 - (c_fcc + c_hcp);
    } else if hcp > 0 {
        c_hcp = 1.0 - c_fcc;
    } else {
        c_fcc = 1.0;
    }
    Ok((c_fcc, c_hcp, c_unk))
}
