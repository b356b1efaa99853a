//! Solid discretization: uniform point lattices, horizons, and bond graphs.
//!
//! A structure is a set of points carrying equal reference volume `dx^D`.
//! Each point interacts with every other point within a horizon radius
//! `epsilon = factor * dx`; the pair is a bond storing its reference vector,
//! influence weight, and partial-volume correction. Bond graphs are built
//! once; failure only flips per-bond alive flags.

use crate::math::{vnorm_sq, vsub, Vect};
use crate::{Result, SimError};
use std::collections::HashMap;
use std::f64::consts::PI;

/// How lattice sites are placed in a geometry.
///
/// Node-centered seeding puts sites on the bounding lattice including the
/// boundary (a `w x h` box yields `(w/dx+1)(h/dx+1)` sites) and is what the
/// benchmark resolutions use. Cell-centered seeding offsets sites by `dx/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seeding {
    NodeCentered,
    CellCentered,
}

/// Horizon radius as a multiple of lattice spacing. The stock factors
/// 1.015, 2.015, 3.015 keep every pair distance strictly away from the
/// horizon boundary so neighbor sets are unambiguous.
#[derive(Debug, Clone, Copy)]
pub struct HorizonSpec {
    pub factor: f64,
}

impl HorizonSpec {
    pub fn new(factor: f64) -> Self {
        Self { factor }
    }
    pub fn epsilon(&self, dx: f64) -> f64 {
        self.factor * dx
    }
}

/// Point lattice with per-point region tags.
///
/// `tether_set` / `load_set` index into scenario-defined constraint and
/// surface-load tables; untagged points are plain elastic material.
/// `load_weight` scales surface-load conversion (0.5 on the rim of a loaded
/// patch, trapezoidal lumping).
#[derive(Debug, Clone)]
pub struct Lattice<const D: usize> {
    pub dx: f64,
    /// Reference volume per point, dx^D.
    pub volume: f64,
    pub points: Vec<Vect<D>>,
    pub tether_set: Vec<Option<u8>>,
    pub load_set: Vec<Option<u8>>,
    pub load_weight: Vec<f64>,
}

impl<const D: usize> Lattice<D> {
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Seed a lattice inside a bounding box, keeping sites where `inside` holds.
/// Site coordinates are generated as `lo + i*dx` (or `lo + (i+1/2)*dx`) so
/// they carry no accumulated rounding.
pub fn build_lattice<const D: usize>(
    lo: Vect<D>,
    hi: Vect<D>,
    dx: f64,
    seeding: Seeding,
    inside: impl Fn(Vect<D>) -> bool,
) -> Result<Lattice<D>> {
    if !(dx > 0.0) {
        return Err(SimError::Config(format!("lattice spacing must be positive, got {dx}")));
    }
    for a in 0..D {
        if !(hi[a] - lo[a] > 0.0) {
            return Err(SimError::Config(format!(
                "degenerate region: axis {a} extent {} is not positive",
                hi[a] - lo[a]
            )));
        }
    }
    let mut counts = [0usize; D];
    for a in 0..D {
        let steps = ((hi[a] - lo[a]) / dx + 1e-9).floor() as usize;
        counts[a] = match seeding {
            Seeding::NodeCentered => steps + 1,
            Seeding::CellCentered => steps,
        };
    }
    let offset = match seeding {
        Seeding::NodeCentered => 0.0,
        Seeding::CellCentered => 0.5,
    };
    let mut points = Vec::new();
    let mut iv = [0usize; D];
    'outer: loop {
        let p: Vect<D> = std::array::from_fn(|a| lo[a] + (iv[a] as f64 + offset) * dx);
        if inside(p) {
            points.push(p);
        }
        // odometer increment, last axis fastest
        for a in (0..D).rev() {
            iv[a] += 1;
            if iv[a] < counts[a] {
                continue 'outer;
            }
            iv[a] = 0;
            if a == 0 {
                break 'outer;
            }
        }
    }
    if points.is_empty() {
        return Err(SimError::Config("degenerate region: no lattice sites inside geometry".into()));
    }
    let n = points.len();
    Ok(Lattice {
        dx,
        volume: dx.powi(D as i32),
        points,
        tether_set: vec![None; n],
        load_set: vec![None; n],
        load_weight: vec![1.0; n],
    })
}

/// Cubic B-spline influence weight on bond length, normalized per dimension.
/// Continuous at both branch points and zero outside the horizon.
pub fn influence_weight(xi_len: f64, epsilon: f64, dim: usize) -> f64 {
    let c = match dim {
        2 => 15.0 / (7.0 * PI),
        3 => 3.0 / (2.0 * PI),
        _ => panic!("influence weight defined for 2D and 3D only"),
    };
    let r = 2.0 * xi_len / epsilon;
    if r < 1.0 {
        c * (2.0 / 3.0 - r * r + r * r * r / 2.0)
    } else if r <= 2.0 {
        c * (2.0 - r).powi(3) / 6.0
    } else {
        0.0
    }
}

/// Partial-volume correction for neighbors near the horizon boundary: full
/// volume inside `epsilon - dx/2`, linear ramp to `V/2` at `epsilon`.
/// Dimension-independent by design.
pub fn corrected_volume(xi_len: f64, epsilon: f64, dx: f64, volume: f64) -> f64 {
    if xi_len <= epsilon - 0.5 * dx {
        volume
    } else if xi_len <= epsilon {
        (epsilon - (xi_len - 0.5 * dx)) / dx * volume
    } else {
        0.0
    }
}

/// Half-bond adjacency in CSR form. Bond `k` runs from its owner point to
/// `neighbor[k]`; `twin[k]` is the opposite direction of the same pair and
/// alive flags are always flipped on both halves together.
#[derive(Debug, Clone)]
pub struct BondGraph<const D: usize> {
    pub epsilon: f64,
    pub offsets: Vec<u32>,
    pub neighbor: Vec<u32>,
    /// Reference bond vector X_m - X_l.
    pub xi: Vec<Vect<D>>,
    pub xi_len: Vec<f64>,
    /// Influence weight omega(|xi|).
    pub weight: Vec<f64>,
    /// Corrected neighbor volume.
    pub cvol: Vec<f64>,
    pub twin: Vec<u32>,
    pub alive: Vec<bool>,
    /// Sum of corrected volumes over the initial (post-cut) horizon.
    pub ref_total_cvol: Vec<f64>,
}

impl<const D: usize> BondGraph<D> {
    pub fn range(&self, l: usize) -> std::ops::Range<usize> {
        self.offsets[l] as usize..self.offsets[l + 1] as usize
    }

    pub fn n_points(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn n_half_bonds(&self) -> usize {
        self.neighbor.len()
    }

    /// Kill both halves of the pair containing half-bond `k`.
    pub fn break_pair(&mut self, k: usize) {
        self.alive[k] = false;
        self.alive[self.twin[k] as usize] = false;
    }

    /// Local damage: broken fraction of the initial horizon volume.
    pub fn damage(&self, l: usize) -> f64 {
        let mut alive_vol = 0.0;
        for k in self.range(l) {
            if self.alive[k] {
                alive_vol += self.cvol[k];
            }
        }
        1.0 - alive_vol / self.ref_total_cvol[l]
    }
}

/// Inclusive 2D segment intersection test; touching endpoints count.
fn segments_intersect(p1: Vect<2>, p2: Vect<2>, q1: Vect<2>, q2: Vect<2>) -> bool {
    let d1 = vsub(p2, p1);
    let d2 = vsub(q2, q1);
    let denom = d1[0] * d2[1] - d1[1] * d2[0];
    let r = vsub(q1, p1);
    let scale = (d1[0].abs() + d1[1].abs() + d2[0].abs() + d2[1].abs()).max(1e-300);
    if denom.abs() < 1e-14 * scale * scale {
        return false; // parallel bonds never coincide with a cut in our geometries
    }
    let t = (r[0] * d2[1] - r[1] * d2[0]) / denom;
    let s = (r[0] * d1[1] - r[1] * d1[0]) / denom;
    let eps = 1e-9;
    (-eps..=1.0 + eps).contains(&t) && (-eps..=1.0 + eps).contains(&s)
}

fn build_graph_impl<const D: usize>(
    lat: &Lattice<D>,
    spec: &HorizonSpec,
    cut: impl Fn(usize, usize) -> bool,
) -> Result<BondGraph<D>> {
    let eps = spec.epsilon(lat.dx);
    let eps_sq = eps * eps;
    let n = lat.len();

    // bin points on an epsilon-sized grid; candidate pairs come only from
    // the 3^D surrounding bins
    let key = |p: Vect<D>| -> [i64; D] { std::array::from_fn(|a| (p[a] / eps).floor() as i64) };
    let mut bins: HashMap<[i64; D], Vec<u32>> = HashMap::new();
    for (i, &p) in lat.points.iter().enumerate() {
        bins.entry(key(p)).or_default().push(i as u32);
    }

    let mut offsets = Vec::with_capacity(n + 1);
    let mut neighbor: Vec<u32> = Vec::new();
    offsets.push(0u32);
    let mut scratch: Vec<u32> = Vec::new();
    for l in 0..n {
        scratch.clear();
        let kl = key(lat.points[l]);
        let mut dk = [-1i64; D];
        'cells: loop {
            let cell: [i64; D] = std::array::from_fn(|a| kl[a] + dk[a]);
            if let Some(ids) = bins.get(&cell) {
                for &m in ids {
                    if m as usize == l {
                        continue;
                    }
                    let d2 = vnorm_sq(vsub(lat.points[m as usize], lat.points[l]));
                    if d2 <= eps_sq && !cut(l, m as usize) {
                        scratch.push(m);
                    }
                }
            }
            for a in (0..D).rev() {
                dk[a] += 1;
                if dk[a] <= 1 {
                    continue 'cells;
                }
                dk[a] = -1;
                if a == 0 {
                    break 'cells;
                }
            }
        }
        if scratch.is_empty() {
            return Err(SimError::Config(format!("isolated point {l} has no bonds within horizon")));
        }
        scratch.sort_unstable();
        neighbor.extend_from_slice(&scratch);
        offsets.push(neighbor.len() as u32);
    }

    let nb = neighbor.len();
    let mut xi = Vec::with_capacity(nb);
    let mut xi_len = Vec::with_capacity(nb);
    let mut weight = Vec::with_capacity(nb);
    let mut cvol = Vec::with_capacity(nb);
    for l in 0..n {
        for k in offsets[l] as usize..offsets[l + 1] as usize {
            let m = neighbor[k] as usize;
            let v = vsub(lat.points[m], lat.points[l]);
            let len = vnorm_sq(v).sqrt();
            xi.push(v);
            xi_len.push(len);
            weight.push(influence_weight(len, eps, D));
            cvol.push(corrected_volume(len, eps, lat.dx, lat.volume));
        }
    }

    // twin lookup by binary search in the (sorted) reverse adjacency
    let mut twin = vec![0u32; nb];
    for l in 0..n {
        for k in offsets[l] as usize..offsets[l + 1] as usize {
            let m = neighbor[k] as usize;
            let slice = &neighbor[offsets[m] as usize..offsets[m + 1] as usize];
            let pos = slice
                .binary_search(&(l as u32))
                .map_err(|_| SimError::Config(format!("bond graph asymmetry between points {l} and {m}")))?;
            twin[k] = offsets[m] + pos as u32;
        }
    }

    let mut ref_total = vec![0.0; n];
    for l in 0..n {
        for k in offsets[l] as usize..offsets[l + 1] as usize {
            ref_total[l] += cvol[k];
        }
    }

    Ok(BondGraph {
        epsilon: eps,
        offsets,
        neighbor,
        xi,
        xi_len,
        weight,
        cvol,
        twin,
        alive: vec![true; nb],
        ref_total_cvol: ref_total,
    })
}

/// Build the bond graph for a lattice: all pairs with |xi| <= epsilon.
pub fn build_horizons<const D: usize>(lat: &Lattice<D>, spec: &HorizonSpec) -> Result<BondGraph<D>> {
    build_graph_impl(lat, spec, |_, _| false)
}

/// Build a 2D bond graph removing every bond whose reference segment crosses
/// one of the cut segments (each cut is a pre-crack; removed bonds never
/// existed, so they do not count as damage).
pub fn build_horizons_with_cuts(
    lat: &Lattice<2>,
    spec: &HorizonSpec,
    cuts: &[[Vect<2>; 2]],
) -> Result<BondGraph<2>> {
    build_graph_impl(lat, spec, |l, m| {
        cuts.iter()
            .any(|c| segments_intersect(lat.points[l], lat.points[m], c[0], c[1]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(dx: f64, seeding: Seeding) -> Lattice<2> {
        build_lattice([0.0, 0.0], [1.0, 1.0], dx, seeding, |_| true).unwrap()
    }

    #[test]
    fn cell_centered_unit_square_has_16_sites() {
        let lat = unit_square(0.25, Seeding::CellCentered);
        assert_eq!(lat.len(), 16);
    }

    #[test]
    fn node_centered_unit_square_has_25_sites() {
        let lat = unit_square(0.25, Seeding::NodeCentered);
        assert_eq!(lat.len(), 25);
    }

    #[test]
    fn zero_extent_rectangle_is_rejected() {
        let r = build_lattice([0.0, 0.0], [1.0, 0.0], 0.25, Seeding::NodeCentered, |_| true);
        assert!(matches!(r, Err(SimError::Config(ref m)) if m.contains("degenerate region")));
    }

    #[test]
    fn interior_neighbor_counts_match_horizon_factor() {
        // 2D: factor 1.015 -> 4 axis neighbors; 2.015 adds diagonals and
        // two-step axis neighbors -> 12
        let lat = unit_square(0.1, Seeding::NodeCentered);
        let center = lat
            .points
            .iter()
            .position(|p| (p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12)
            .unwrap();
        for (factor, want) in [(1.015, 4usize), (2.015, 12usize)] {
            let g = build_horizons(&lat, &HorizonSpec::new(factor)).unwrap();
            assert_eq!(g.range(center).len(), want, "factor {factor}");
        }
    }

    #[test]
    fn interior_neighbor_count_3d() {
        let lat = build_lattice([0.0; 3], [1.0; 3], 0.2, Seeding::NodeCentered, |_| true).unwrap();
        let center = lat
            .points
            .iter()
            .position(|p| p.iter().all(|&x| (x - 0.4).abs() < 1e-12))
            .unwrap();
        let g = build_horizons(&lat, &HorizonSpec::new(1.015)).unwrap();
        assert_eq!(g.range(center).len(), 6);
    }

    #[test]
    fn neighbor_sets_match_brute_force() {
        let lat = build_lattice([0.0, 0.0], [1.3, 0.9], 0.1, Seeding::NodeCentered, |p| {
            p[0] + p[1] < 1.9 // irregular cut corner
        })
        .unwrap();
        let spec = HorizonSpec::new(2.015);
        let g = build_horizons(&lat, &spec).unwrap();
        let eps_sq = spec.epsilon(lat.dx).powi(2);
        for l in 0..lat.len() {
            let mut brute: Vec<u32> = (0..lat.len())
                .filter(|&m| m != l && vnorm_sq(vsub(lat.points[m], lat.points[l])) <= eps_sq)
                .map(|m| m as u32)
                .collect();
            brute.sort_unstable();
            let got: Vec<u32> = g.range(l).map(|k| g.neighbor[k]).collect();
            assert_eq!(got, brute, "point {l}");
        }
    }

    #[test]
    fn twins_are_mutual() {
        let lat = unit_square(0.2, Seeding::NodeCentered);
        let g = build_horizons(&lat, &HorizonSpec::new(2.015)).unwrap();
        for l in 0..lat.len() {
            for k in g.range(l) {
                let t = g.twin[k] as usize;
                assert_eq!(g.twin[t] as usize, k);
                assert_eq!(g.neighbor[t] as usize, l);
                assert_eq!(g.xi[t], crate::math::vscale(-1.0, g.xi[k]));
            }
        }
    }

    #[test]
    fn corrected_volume_ramp() {
        // ramp value frozen by hand: (1.015 - (1.0 - 0.5))/1.0 = 0.515
        assert!((corrected_volume(1.0, 1.015, 1.0, 1.0) - 0.515).abs() < 1e-14);
        // at the horizon boundary exactly half a volume survives
        assert!((corrected_volume(2.0, 2.0, 1.0, 1.0) - 0.5).abs() < 1e-14);
        // interior bonds keep the full volume, outside bonds none
        assert_eq!(corrected_volume(0.4, 1.015, 1.0, 2.0), 2.0);
        assert_eq!(corrected_volume(2.1, 2.0, 1.0, 2.0), 0.0);
        // continuity at the ramp start
        let v0 = corrected_volume(0.515 - 1e-12, 1.015, 1.0, 1.0);
        let v1 = corrected_volume(0.515 + 1e-12, 1.015, 1.0, 1.0);
        assert!((v0 - v1).abs() < 1e-9);
    }

    #[test]
    fn influence_weight_values_and_continuity() {
        // omega(0) in 2D = (15/7pi) * 2/3 = 10/(7 pi)
        let w0 = influence_weight(0.0, 1.0, 2);
        assert!((w0 - 10.0 / (7.0 * PI)).abs() < 1e-15);
        for dim in [2usize, 3] {
            let eps = 1.3;
            for r in [1.0f64, 2.0] {
                let xi = r * eps / 2.0;
                let a = influence_weight(xi - 1e-10, eps, dim);
                let b = influence_weight(xi + 1e-10, eps, dim);
                assert!((a - b).abs() < 1e-8, "dim {dim} r {r}");
            }
            // both branches give C/6 at r = 1
            let c = match dim {
                2 => 15.0 / (7.0 * PI),
                _ => 3.0 / (2.0 * PI),
            };
            assert!((influence_weight(0.5 * eps, eps, dim) - c / 6.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cuts_remove_crossing_bonds_without_damage() {
        let lat = unit_square(0.25, Seeding::NodeCentered);
        let spec = HorizonSpec::new(1.015);
        // horizontal cut between rows y=0.5 and y=0.75, spanning x in [0.4, 1.1]
        let cut = [[0.4, 0.625], [1.1, 0.625]];
        let g = build_horizons_with_cuts(&lat, &spec, &[cut]).unwrap();
        let full = build_horizons(&lat, &spec).unwrap();
        assert!(g.n_half_bonds() < full.n_half_bonds());
        for l in 0..lat.len() {
            assert_eq!(g.damage(l), 0.0);
            for k in g.range(l) {
                let m = g.neighbor[k] as usize;
                let (pl, pm) = (lat.points[l], lat.points[m]);
                let crosses = (pl[1] - 0.625) * (pm[1] - 0.625) < 0.0
                    && pl[0] >= 0.4 - 1e-9
                    && pl[0] <= 1.1 + 1e-9;
                assert!(!crosses, "bond {l}->{m} should have been cut");
            }
        }
    }

    #[test]
    fn isolated_point_is_rejected() {
        // two points far apart relative to the horizon
        let lat = Lattice::<2> {
            dx: 0.1,
            volume: 0.01,
            points: vec![[0.0, 0.0], [1.0, 0.0]],
            tether_set: vec![None; 2],
            load_set: vec![None; 2],
            load_weight: vec![1.0; 2],
        };
        let r = build_horizons(&lat, &HorizonSpec::new(1.015));
        assert!(matches!(r, Err(SimError::Config(ref m)) if m.contains("isolated point")));
    }
}
