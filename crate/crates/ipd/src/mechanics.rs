//! State-based peridynamic mechanics in the constitutive-correspondence form.
//!
//! Per point l the shape tensor K_l = sum_m w(|xi|) xi (x) xi V_m condenses the
//! reference horizon; the nonlocal deformation gradient is
//! F_l = [sum_m w (y_m - y_l) (x) xi V_m] K_l^{-1} (summed first, then
//! multiplied). A conventional hyperelastic law maps F_l to a first
//! Piola-Kirchhoff stress, and bonds carry the pairwise force density
//! w (P_l K_l^{-1} + P_m K_m^{-1}) xi, which is antisymmetric under swapping
//! endpoints, so internal forces conserve linear momentum to round-off.
//!
//! Failure flips bond alive flags when the current stretch |y_m - y_l|/|xi|
//! exceeds a critical value; shape tensors of affected points are rebuilt
//! lazily. A point whose surviving horizon no longer spans the space (or that
//! lost every bond) becomes inert: it carries no stress but keeps advecting
//! with the flow.

use crate::lattice::{BondGraph, Lattice};
use crate::material::Material;
use crate::math::{det, inverse, madd, maccum_outer, matmul, matvec, midentity, mzero, sym_eig_range, vsub, Mat, Vect};
use crate::{Result, SimError};

/// Relative singular-value floor below which a shape tensor counts as
/// degenerate.
const DEGENERATE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Default)]
pub struct FailureReport {
    /// Pairs newly broken during this sweep.
    pub broken_pairs: usize,
    /// Reference midpoints of the newly broken pairs.
    pub broken_midpoints: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct PdSolid<const D: usize> {
    pub lattice: Lattice<D>,
    pub bonds: BondGraph<D>,
    pub material: Material,
    /// Bond-stretch failure threshold; `None` disables failure entirely.
    pub critical_stretch: Option<f64>,
    kinv: Vec<Mat<D>>,
    /// Points with no usable shape tensor: stress-free, advect only.
    inert: Vec<bool>,
    /// Nonlocal deformation gradient from the latest assembly.
    pub def_grad: Vec<Mat<D>>,
    /// det(F) from the latest assembly.
    pub jac: Vec<f64>,
    /// Internal force density per reference volume from the latest assembly.
    pub force: Vec<Vect<D>>,
    a_mat: Vec<Mat<D>>,
}

impl<const D: usize> PdSolid<D> {
    pub fn new(
        lattice: Lattice<D>,
        bonds: BondGraph<D>,
        material: Material,
        critical_stretch: Option<f64>,
    ) -> Result<Self> {
        let n = lattice.len();
        let mut solid = PdSolid {
            lattice,
            bonds,
            material,
            critical_stretch,
            kinv: vec![mzero(); n],
            inert: vec![false; n],
            def_grad: vec![midentity(); n],
            jac: vec![1.0; n],
            force: vec![[0.0; D]; n],
            a_mat: vec![mzero(); n],
        };
        let all: Vec<usize> = (0..n).collect();
        solid.refresh_shape_tensors(&all)?;
        Ok(solid)
    }

    pub fn n_points(&self) -> usize {
        self.lattice.len()
    }

    /// Shape tensor over currently alive bonds.
    pub fn shape_tensor(&self, l: usize) -> Mat<D> {
        let mut k = mzero::<D>();
        for b in self.bonds.range(l) {
            if self.bonds.alive[b] {
                maccum_outer(&mut k, self.bonds.weight[b] * self.bonds.cvol[b], self.bonds.xi[b], self.bonds.xi[b]);
            }
        }
        k
    }

    pub fn is_inert(&self, l: usize) -> bool {
        self.inert[l]
    }

    /// Rebuild cached inverse shape tensors for the given points.
    ///
    /// A degenerate tensor aborts when failure is disabled (it indicates a
    /// badly-connected discretization); with failure enabled it marks the
    /// point inert, since partial disconnection is the expected end state of
    /// rupture.
    fn refresh_shape_tensors(&mut self, points: &[usize]) -> Result<()> {
        for &l in points {
            if self.inert[l] {
                continue;
            }
            let k = self.shape_tensor(l);
            let (lo, hi) = sym_eig_range(k);
            if hi <= 0.0 || lo < DEGENERATE_REL_TOL * hi {
                if self.critical_stretch.is_some() {
                    self.inert[l] = true;
                    continue;
                }
                return Err(SimError::Config(format!(
                    "degenerate horizon: shape tensor of point {l} is singular (sv range {lo:e}..{hi:e})"
                )));
            }
            self.kinv[l] = inverse(k).ok_or_else(|| {
                SimError::Config(format!("degenerate horizon: shape tensor of point {l} is singular"))
            })?;
        }
        Ok(())
    }

    /// Current stretch of half-bond `b` given deformed positions.
    pub fn bond_stretch(&self, chi: &[Vect<D>], b: usize) -> f64 {
        let l = self.owner_of(b);
        let m = self.bonds.neighbor[b] as usize;
        let len = crate::math::vnorm(vsub(chi[m], chi[l]));
        len / self.bonds.xi_len[b]
    }

    fn owner_of(&self, b: usize) -> usize {
        // binary search over offsets: the owner is the point whose range holds b
        let mut lo = 0usize;
        let mut hi = self.n_points();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if (self.bonds.offsets[mid] as usize) <= b {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Break every alive bond stretched beyond the critical value at the
    /// supplied (half-step) configuration. Irreversible. Returns the number
    /// of broken pairs and their reference midpoints.
    pub fn apply_failure(&mut self, chi: &[Vect<D>]) -> Result<FailureReport> {
        let Some(sc) = self.critical_stretch else {
            return Ok(FailureReport::default());
        };
        let mut report = FailureReport::default();
        let mut dirty: Vec<usize> = Vec::new();
        for l in 0..self.n_points() {
            for b in self.bonds.range(l) {
                let m = self.bonds.neighbor[b] as usize;
                if m < l || !self.bonds.alive[b] {
                    continue; // each pair once
                }
                let len = crate::math::vnorm(vsub(chi[m], chi[l]));
                if !len.is_finite() {
                    return Err(SimError::Runtime(format!(
                        "solid-force: non-finite bond length between points {l} and {m}"
                    )));
                }
                let stretch = len / self.bonds.xi_len[b];
                if stretch > sc {
                    self.bonds.break_pair(b);
                    report.broken_pairs += 1;
                    let mid: Vec<f64> = (0..D)
                        .map(|a| 0.5 * (self.lattice.points[l][a] + self.lattice.points[m][a]))
                        .collect();
                    report.broken_midpoints.push(mid);
                    dirty.push(l);
                    dirty.push(m);
                }
            }
        }
        if !dirty.is_empty() {
            dirty.sort_unstable();
            dirty.dedup();
            self.refresh_shape_tensors(&dirty)?;
        }
        Ok(report)
    }

    /// Local damage of point l: broken fraction of its initial horizon volume.
    pub fn damage(&self, l: usize) -> f64 {
        self.bonds.damage(l)
    }

    /// Compute F, J, stress and internal force density at configuration chi.
    /// Inert points keep F = I, J = 1, zero stress and contribute nothing.
    pub fn assemble(&mut self, chi: &[Vect<D>]) -> Result<()> {
        let n = self.n_points();
        for l in 0..n {
            if self.inert[l] {
                self.def_grad[l] = midentity();
                self.jac[l] = 1.0;
                self.a_mat[l] = mzero();
                continue;
            }
            let mut acc = mzero::<D>();
            for b in self.bonds.range(l) {
                if !self.bonds.alive[b] {
                    continue;
                }
                let m = self.bonds.neighbor[b] as usize;
                let y = vsub(chi[m], chi[l]);
                maccum_outer(&mut acc, self.bonds.weight[b] * self.bonds.cvol[b], y, self.bonds.xi[b]);
            }
            let f = matmul(acc, self.kinv[l]);
            let j = det(f);
            if !j.is_finite() {
                return Err(SimError::Runtime(format!("solid-force: non-finite deformation gradient at point {l}")));
            }
            if j <= 0.0 {
                // a partly disconnected horizon can deform past the point
                // where a correspondence state means anything; such a point
                // is debris and carries no stress from here on. Inversion in
                // pristine material is still a hard stop: there it means the
                // integration itself has failed.
                if self.critical_stretch.is_some() && self.bonds.damage(l) > 0.0 {
                    self.inert[l] = true;
                    self.def_grad[l] = midentity();
                    self.jac[l] = 1.0;
                    self.a_mat[l] = mzero();
                    continue;
                }
                return Err(SimError::Runtime(format!(
                    "inverted element at point {l}: J = {j} (damage {:.3})",
                    self.bonds.damage(l)
                )));
            }
            self.def_grad[l] = f;
            self.jac[l] = j;
            self.a_mat[l] = match self.material.first_piola(f) {
                Ok(p) => matmul(p, self.kinv[l]),
                Err(_) if self.critical_stretch.is_some() && self.bonds.damage(l) > 0.0 => {
                    self.inert[l] = true;
                    self.def_grad[l] = midentity();
                    self.jac[l] = 1.0;
                    mzero()
                }
                Err(e) => return Err(SimError::Runtime(format!("point {l}: {e}"))),
            };
        }
        for l in 0..n {
            let mut out = [0.0; D];
            for b in self.bonds.range(l) {
                if !self.bonds.alive[b] {
                    continue;
                }
                let m = self.bonds.neighbor[b] as usize;
                let contrib = matvec(madd(self.a_mat[l], self.a_mat[m]), self.bonds.xi[b]);
                let s = self.bonds.weight[b] * self.bonds.cvol[b];
                for a in 0..D {
                    out[a] += s * contrib[a];
                }
            }
            self.force[l] = out;
        }
        Ok(())
    }

    /// Percent change of total reference volume measured through det(F).
    pub fn volume_change_pct(&self) -> f64 {
        let n = self.n_points() as f64;
        let sum: f64 = self.jac.iter().map(|j| j - 1.0).sum();
        100.0 * (sum / n).abs()
    }

    /// Volume change restricted to a point subset, for bodies whose rigid
    /// anchor regions should not dilute the metric. Point volumes are
    /// uniform, so the ratio reduces to a mean over the subset.
    pub fn volume_change_pct_of(&self, subset: &[usize]) -> f64 {
        if subset.is_empty() {
            return 0.0;
        }
        let sum: f64 = subset.iter().map(|&l| self.jac[l] - 1.0).sum();
        100.0 * (sum / subset.len() as f64).abs()
    }

    /// True when no alive bond crosses the reference plane
    /// `x[axis] = cut`, i.e. the body is completely disconnected there.
    pub fn severed_across(&self, axis: usize, cut: f64) -> bool {
        let pts = &self.lattice.points;
        for l in 0..self.n_points() {
            let yl = pts[l][axis] - cut;
            for k in self.bonds.range(l) {
                if self.bonds.alive[k]
                    && yl * (pts[self.bonds.neighbor[k] as usize][axis] - cut) < 0.0
                {
                    return false;
                }
            }
        }
        true
    }

    /// First reference coordinate along `axis` at which the body is fully
    /// disconnected, scanning the midlines between adjacent point layers.
    pub fn detachment_cut(&self, axis: usize) -> Option<f64> {
        let mut coords: Vec<f64> = self.lattice.points.iter().map(|p| p[axis]).collect();
        coords.sort_by(|a, b| a.partial_cmp(b).unwrap());
        coords.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        for w in coords.windows(2) {
            let cut = 0.5 * (w[0] + w[1]);
            if self.severed_across(axis, cut) {
                return Some(cut);
            }
        }
        None
    }
}
