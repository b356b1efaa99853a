//! Incompressible Navier-Stokes on a uniform staggered (MAC) grid.
//!
//! Velocity components live on the cell faces they are normal to, pressure at
//! cell centers. One time step advances
//!
//!   rho (v' - v)/dt + rho N = -grad p + (mu/2) lap(v' + v) + f,   div v' = 0
//!
//! with an Adams-Bashforth extrapolated advection term N and Crank-Nicolson
//! viscosity. The coupled velocity-pressure system is solved by an iterated
//! projection: each sweep does one Helmholtz solve for a velocity increment,
//! one approximate pressure Poisson solve, a Cahouet-Chabard pressure update,
//! and a divergence-cleaning velocity correction, repeating until the combined
//! momentum and continuity residuals drop below 1e-8 (relative).
//!
//! Boundary sides are no-slip walls, prescribed normal-traction sides
//! (-p + 2 mu dv_n/dn = g with zero tangential stress), or periodic pairs.
//! Traction enters the normal momentum row through a ghost pressure
//! P_b = 2 mu dv_n/dn - g, lagged across projection sweeps.

use crate::math::Vect;
use crate::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    /// Solid wall, velocity zero.
    NoSlip,
    /// Prescribed normal stress -p + 2 mu dv_n/dn = g, zero tangential stress.
    Traction,
    /// Wraps around to the opposite side (must be paired).
    Periodic,
}

/// Boundary condition kinds per axis and side (`side[axis][0]` = low face).
#[derive(Debug, Clone, Copy)]
pub struct BcSet<const D: usize> {
    pub side: [[BcKind; 2]; D],
}

impl<const D: usize> BcSet<D> {
    pub fn uniform(kind: BcKind) -> Self {
        BcSet { side: [[kind; 2]; D] }
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.side[axis][0] == BcKind::Periodic
    }

    pub fn validate(&self) -> Result<()> {
        for a in 0..D {
            let lo = self.side[a][0];
            let hi = self.side[a][1];
            if (lo == BcKind::Periodic) != (hi == BcKind::Periodic) {
                return Err(SimError::Config(format!(
                    "periodic boundary on axis {a} must apply to both sides"
                )));
            }
        }
        Ok(())
    }
}

/// Uniform Cartesian grid over a box; `n` cells per axis, spacing `h` (cm).
#[derive(Debug, Clone, Copy)]
pub struct Grid<const D: usize> {
    pub lo: Vect<D>,
    pub n: [usize; D],
    pub h: f64,
}

impl<const D: usize> Grid<D> {
    pub fn new(lo: Vect<D>, n: [usize; D], h: f64) -> Result<Self> {
        if h <= 0.0 || !h.is_finite() {
            return Err(SimError::Config(format!("grid spacing must be positive, got {h}")));
        }
        if n.iter().any(|&k| k < 2) {
            return Err(SimError::Config(format!("grid needs at least 2 cells per axis, got {n:?}")));
        }
        Ok(Grid { lo, n, h })
    }

    pub fn cells(&self) -> usize {
        self.n.iter().product()
    }

    /// Row-major cell index, axis 0 fastest.
    pub fn cidx(&self, iv: [usize; D]) -> usize {
        let mut idx = 0;
        for a in (0..D).rev() {
            idx = idx * self.n[a] + iv[a];
        }
        idx
    }

    pub fn cell_pos(&self, iv: [usize; D]) -> Vect<D> {
        std::array::from_fn(|a| self.lo[a] + (iv[a] as f64 + 0.5) * self.h)
    }

    /// Extent of axis `a` (cm).
    pub fn len(&self, a: usize) -> f64 {
        self.n[a] as f64 * self.h
    }

    /// Face-array dimensions for velocity component `a`.
    pub fn face_dims(&self, a: usize, bc: &BcSet<D>) -> [usize; D] {
        std::array::from_fn(|b| {
            if b == a && !bc.is_periodic(a) {
                self.n[b] + 1
            } else {
                self.n[b]
            }
        })
    }

    /// Physical position of face `iv` of component `a`.
    pub fn face_pos(&self, a: usize, iv: [usize; D]) -> Vect<D> {
        std::array::from_fn(|b| {
            if b == a {
                self.lo[b] + iv[b] as f64 * self.h
            } else {
                self.lo[b] + (iv[b] as f64 + 0.5) * self.h
            }
        })
    }
}

fn idx_in<const D: usize>(dims: &[usize; D], iv: [usize; D]) -> usize {
    let mut idx = 0;
    for a in (0..D).rev() {
        idx = idx * dims[a] + iv[a];
    }
    idx
}

/// Iterate a D-dimensional index box, axis 0 fastest.
pub fn for_each_index<const D: usize>(dims: [usize; D], mut f: impl FnMut([usize; D])) {
    let total: usize = dims.iter().product();
    let mut iv = [0usize; D];
    for _ in 0..total {
        f(iv);
        for a in 0..D {
            iv[a] += 1;
            if iv[a] < dims[a] {
                break;
            }
            iv[a] = 0;
        }
    }
}

/// One scalar per face, for each velocity component.
#[derive(Debug, Clone)]
pub struct FaceField<const D: usize> {
    pub dims: [[usize; D]; D],
    pub data: [Vec<f64>; D],
}

impl<const D: usize> FaceField<D> {
    pub fn new(grid: &Grid<D>, bc: &BcSet<D>) -> Self {
        let dims: [[usize; D]; D] = std::array::from_fn(|a| grid.face_dims(a, bc));
        let data = std::array::from_fn(|a| vec![0.0; dims[a].iter().product()]);
        FaceField { dims, data }
    }

    pub fn idx(&self, a: usize, iv: [usize; D]) -> usize {
        idx_in(&self.dims[a], iv)
    }

    pub fn get(&self, a: usize, iv: [usize; D]) -> f64 {
        self.data[a][idx_in(&self.dims[a], iv)]
    }

    pub fn set(&mut self, a: usize, iv: [usize; D], val: f64) {
        let i = idx_in(&self.dims[a], iv);
        self.data[a][i] = val;
    }

    pub fn fill(&mut self, val: f64) {
        for a in 0..D {
            self.data[a].fill(val);
        }
    }

    /// self += s * other
    pub fn axpy(&mut self, s: f64, other: &FaceField<D>) {
        for a in 0..D {
            for (x, y) in self.data[a].iter_mut().zip(&other.data[a]) {
                *x += s * y;
            }
        }
    }

    pub fn dot(&self, other: &FaceField<D>) -> f64 {
        let mut acc = 0.0;
        for a in 0..D {
            acc += self.data[a].iter().zip(&other.data[a]).map(|(x, y)| x * y).sum::<f64>();
        }
        acc
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..D {
            for &x in &self.data[a] {
                m = m.max(x.abs());
            }
        }
        m
    }
}

/// Convergence record for one fluid step.
#[derive(Debug, Clone, Default)]
pub struct StepStats {
    pub outer_iters: usize,
    pub mom_rel: f64,
    pub div_inf: f64,
    /// Advective CFL number max|v| dt / h observed at step start.
    pub cfl: f64,
    pub helmholtz_iters: usize,
    pub poisson_iters: usize,
}

/// Time-varying fluid unknowns plus the advection history the scheme needs.
#[derive(Debug, Clone)]
pub struct FluidState<const D: usize> {
    pub v: FaceField<D>,
    /// Cell-centered pressure.
    pub p: Vec<f64>,
    n_prev: FaceField<D>,
    have_prev: bool,
}

const MAX_OUTER: usize = 200;

pub struct FluidSolver<const D: usize> {
    pub grid: Grid<D>,
    pub bc: BcSet<D>,
    /// Density (g/cm^3).
    pub rho: f64,
    /// Dynamic viscosity (g/(cm s)).
    pub mu: f64,
    /// Current normal traction g per [axis][side] (dyn/cm^2); caller updates
    /// before each step for ramped loads.
    pub traction: [[f64; 2]; D],
    poisson: PoissonMg<D>,
}

impl<const D: usize> FluidSolver<D> {
    pub fn new(grid: Grid<D>, bc: BcSet<D>, rho: f64, mu: f64) -> Result<Self> {
        bc.validate()?;
        if rho <= 0.0 {
            return Err(SimError::Config(format!("fluid density must be positive, got {rho}")));
        }
        if mu <= 0.0 {
            return Err(SimError::Config(format!("fluid viscosity must be positive, got {mu}")));
        }
        let poisson = PoissonMg::new(grid, bc);
        Ok(FluidSolver { grid, bc, rho, mu, traction: [[0.0; 2]; D], poisson })
    }

    pub fn new_state(&self) -> FluidState<D> {
        FluidState {
            v: FaceField::new(&self.grid, &self.bc),
            p: vec![0.0; self.grid.cells()],
            n_prev: FaceField::new(&self.grid, &self.bc),
            have_prev: false,
        }
    }

    pub fn new_face_field(&self) -> FaceField<D> {
        FaceField::new(&self.grid, &self.bc)
    }

    /// A no-slip boundary face holds a fixed zero, not an unknown.
    pub fn is_unknown(&self, a: usize, iv: [usize; D]) -> bool {
        if self.bc.is_periodic(a) {
            return true;
        }
        let last = self.grid.n[a];
        if iv[a] == 0 && self.bc.side[a][0] == BcKind::NoSlip {
            return false;
        }
        if iv[a] == last && self.bc.side[a][1] == BcKind::NoSlip {
            return false;
        }
        true
    }

    /// Face value at a possibly out-of-range index, closing the stencil with
    /// boundary ghosts. `cross` enables the tangential traction ghost's
    /// coupling term (-dv_n/dtau), which needs the whole field.
    fn vel_at(&self, v: &FaceField<D>, a: usize, mut iv: [isize; D], cross: bool) -> f64 {
        // resolve periodic wrap first
        for b in 0..D {
            if self.bc.is_periodic(b) {
                let len = v.dims[a][b] as isize;
                iv[b] = iv[b].rem_euclid(len);
            }
        }
        for b in 0..D {
            let len = v.dims[a][b] as isize;
            if iv[b] >= 0 && iv[b] < len {
                continue;
            }
            debug_assert!(iv[b] == -1 || iv[b] == len, "stencil reaches beyond one ghost layer");
            if b == a {
                // beyond a boundary face: linear extrapolation through the
                // stored boundary value (odd reflection for a no-slip wall)
                let (bnd, inner) = if iv[b] < 0 { (0, 1) } else { (len - 1, len - 2) };
                let mut jv = iv;
                jv[b] = bnd;
                let vb = self.vel_at(v, a, jv, cross);
                jv[b] = inner;
                let vi = self.vel_at(v, a, jv, cross);
                return 2.0 * vb - vi;
            }
            let side = if iv[b] < 0 { 0 } else { 1 };
            let mut jv = iv;
            jv[b] = if iv[b] < 0 { 0 } else { len - 1 };
            let mirror = self.vel_at(v, a, jv, cross);
            return match self.bc.side[b][side] {
                BcKind::NoSlip => -mirror,
                BcKind::Traction => {
                    if !cross {
                        mirror
                    } else {
                        // zero tangential stress: dv_a/dx_b = -dv_b/dx_a at the wall
                        let dvb = self.wall_normal_deriv(v, a, b, side, iv);
                        if side == 0 {
                            mirror + self.grid.h * dvb
                        } else {
                            mirror - self.grid.h * dvb
                        }
                    }
                }
                BcKind::Periodic => unreachable!("wrapped above"),
            };
        }
        v.get(a, std::array::from_fn(|b| iv[b] as usize))
    }

    /// d v_b / d x_a on the wall plane of axis `b`, at the a-position of the
    /// component-a face `iv` (used by the tangential traction ghost).
    fn wall_normal_deriv(&self, v: &FaceField<D>, a: usize, b: usize, side: usize, iv: [isize; D]) -> f64 {
        let na = self.grid.n[a] as isize;
        let ia = iv[a];
        if ia <= 0 || ia >= na {
            return 0.0; // no centered difference available at the corner
        }
        let wall = if side == 0 { 0 } else { self.grid.n[b] as isize };
        let mut jv = iv;
        jv[b] = wall;
        jv[a] = ia;
        let hi = self.vel_at(v, b, jv, false);
        jv[a] = ia - 1;
        let lo = self.vel_at(v, b, jv, false);
        (hi - lo) / self.grid.h
    }

    /// Like `vel_at` but refuses to reach beyond the single ghost layer.
    fn vel_opt(&self, v: &FaceField<D>, a: usize, iv: [isize; D], cross: bool) -> Option<f64> {
        for b in 0..D {
            if self.bc.is_periodic(b) {
                continue;
            }
            let len = v.dims[a][b] as isize;
            if iv[b] < -1 || iv[b] > len {
                return None;
            }
        }
        Some(self.vel_at(v, a, iv, cross))
    }

    /// Divergence of v at cell centers; out must have grid.cells() entries.
    pub fn divergence(&self, v: &FaceField<D>, out: &mut [f64]) {
        let h = self.grid.h;
        for_each_index(self.grid.n, |iv| {
            let mut acc = 0.0;
            for a in 0..D {
                let mut jv = iv;
                let hi = if self.bc.is_periodic(a) && iv[a] + 1 == self.grid.n[a] {
                    jv[a] = 0;
                    v.get(a, jv)
                } else {
                    jv[a] = iv[a] + 1;
                    v.get(a, jv)
                };
                acc += (hi - v.get(a, iv)) / h;
            }
            out[self.grid.cidx(iv)] = acc;
        });
    }

    /// Pressure gradient on unknown faces, scaled and accumulated into `out`.
    /// At traction boundaries the outside pressure is the ghost value
    /// P_b = 2 mu dv_n/dn - g built from the supplied velocity iterate.
    fn add_pressure_gradient(&self, p: &[f64], v_iter: &FaceField<D>, scale: f64, out: &mut FaceField<D>) {
        let h = self.grid.h;
        for a in 0..D {
            let dims = out.dims[a];
            for_each_index(dims, |iv| {
                if !self.is_unknown(a, iv) {
                    return;
                }
                let last = self.grid.n[a];
                let periodic = self.bc.is_periodic(a);
                let grad = if periodic {
                    let mut cr = iv;
                    let mut cl = iv;
                    cl[a] = (iv[a] + self.grid.n[a] - 1) % self.grid.n[a];
                    cr[a] = iv[a];
                    (p[self.grid.cidx(cr)] - p[self.grid.cidx(cl)]) / h
                } else if iv[a] == 0 {
                    // low traction boundary face
                    let mut c = iv;
                    c[a] = 0;
                    let mut jn = [0isize; D];
                    for b in 0..D {
                        jn[b] = iv[b] as isize;
                    }
                    jn[a] = 1;
                    let vin = self.vel_at(v_iter, a, jn, true);
                    let vb = v_iter.get(a, iv);
                    let pb = 2.0 * self.mu * (vin - vb) / h - self.traction[a][0];
                    (p[self.grid.cidx(c)] - pb) / h
                } else if iv[a] == last {
                    let mut c = iv;
                    c[a] = last - 1;
                    let mut jn = [0isize; D];
                    for b in 0..D {
                        jn[b] = iv[b] as isize;
                    }
                    jn[a] = last as isize - 1;
                    let vin = self.vel_at(v_iter, a, jn, true);
                    let vb = v_iter.get(a, iv);
                    let pb = 2.0 * self.mu * (vb - vin) / h - self.traction[a][1];
                    (pb - p[self.grid.cidx(c)]) / h
                } else {
                    let mut cr = iv;
                    let mut cl = iv;
                    cl[a] = iv[a] - 1;
                    cr[a] = iv[a];
                    (p[self.grid.cidx(cr)] - p[self.grid.cidx(cl)]) / h
                };
                let i = out.idx(a, iv);
                out.data[a][i] += scale * grad;
            });
        }
    }

    /// Gradient of the projection potential phi (zero Dirichlet ghosts at
    /// traction sides, zero normal derivative at walls), accumulated scaled.
    /// Exactly adjoint to `divergence`, so the correction removes divergence
    /// up to the Poisson solve tolerance.
    fn add_phi_gradient(&self, phi: &[f64], scale: f64, out: &mut FaceField<D>) {
        let h = self.grid.h;
        for a in 0..D {
            let dims = out.dims[a];
            for_each_index(dims, |iv| {
                if !self.is_unknown(a, iv) {
                    return;
                }
                let last = self.grid.n[a];
                let grad = if self.bc.is_periodic(a) {
                    let mut cr = iv;
                    let mut cl = iv;
                    cl[a] = (iv[a] + self.grid.n[a] - 1) % self.grid.n[a];
                    cr[a] = iv[a];
                    (phi[self.grid.cidx(cr)] - phi[self.grid.cidx(cl)]) / h
                } else if iv[a] == 0 {
                    let mut c = iv;
                    c[a] = 0;
                    2.0 * phi[self.grid.cidx(c)] / h
                } else if iv[a] == last {
                    let mut c = iv;
                    c[a] = last - 1;
                    -2.0 * phi[self.grid.cidx(c)] / h
                } else {
                    let mut cr = iv;
                    let mut cl = iv;
                    cl[a] = iv[a] - 1;
                    cr[a] = iv[a];
                    (phi[self.grid.cidx(cr)] - phi[self.grid.cidx(cl)]) / h
                };
                let i = out.idx(a, iv);
                out.data[a][i] += scale * grad;
            });
        }
    }

    /// Vector Laplacian on unknown faces. `cross` selects the full traction
    /// tangential ghost (physical operator) or its homogeneous part (the
    /// symmetric operator the Helmholtz CG iterates with). On a traction
    /// boundary face the normal direction contributes a one-sided difference
    /// (zero normal-derivative ghost); the dominant normal viscous stress
    /// there is carried by the ghost pressure, and this closure keeps the
    /// operator symmetric.
    fn laplacian(&self, v: &FaceField<D>, cross: bool, out: &mut FaceField<D>) {
        let h2 = self.grid.h * self.grid.h;
        for a in 0..D {
            let dims = v.dims[a];
            for_each_index(dims, |iv| {
                let i = idx_in(&dims, iv);
                if !self.is_unknown(a, iv) {
                    out.data[a][i] = 0.0;
                    return;
                }
                let center = v.data[a][i];
                let mut acc = 0.0;
                let last = self.grid.n[a];
                for b in 0..D {
                    if b == a && !self.bc.is_periodic(a) && (iv[a] == 0 || iv[a] == last) {
                        let mut j = iv;
                        j[a] = if iv[a] == 0 { 1 } else { last - 1 };
                        acc += (v.get(a, j) - center) / h2;
                        continue;
                    }
                    let mut jlo = [0isize; D];
                    for c in 0..D {
                        jlo[c] = iv[c] as isize;
                    }
                    let mut jhi = jlo;
                    jlo[b] -= 1;
                    jhi[b] += 1;
                    let lo = self.vel_at(v, a, jlo, cross);
                    let hi = self.vel_at(v, a, jhi, cross);
                    acc += (lo - 2.0 * center + hi) / h2;
                }
                out.data[a][i] = acc;
            });
        }
    }

    /// Advective term N = (v . grad) v with Fromm-type upwinding and a
    /// monotonized-central limiter on the slopes.
    fn advective(&self, v: &FaceField<D>, out: &mut FaceField<D>) {
        let h = self.grid.h;
        for a in 0..D {
            let dims = v.dims[a];
            for_each_index(dims, |iv| {
                let i = idx_in(&dims, iv);
                if !self.is_unknown(a, iv) {
                    out.data[a][i] = 0.0;
                    return;
                }
                let base: [isize; D] = std::array::from_fn(|c| iv[c] as isize);
                let mut acc = 0.0;
                for b in 0..D {
                    let w = if b == a {
                        v.data[a][i]
                    } else {
                        // average the four surrounding b-faces
                        let mut s = 0.0;
                        for da in [-1isize, 0] {
                            for db in [0isize, 1] {
                                let mut j = base;
                                j[a] += da;
                                j[b] += db;
                                s += self.vel_opt(v, b, j, true).unwrap_or(0.0);
                            }
                        }
                        0.25 * s
                    };
                    let q = |k: isize| {
                        let mut j = base;
                        j[b] += k;
                        self.vel_opt(v, a, j, true)
                    };
                    let slope = |j: isize| -> f64 {
                        match (q(j - 1), q(j), q(j + 1)) {
                            (Some(l), Some(c), Some(r)) => mc_limited(c - l, r - c),
                            _ => 0.0,
                        }
                    };
                    let deriv = if w >= 0.0 {
                        let (Some(q0), Some(qm)) = (q(0), q(-1)) else { continue };
                        (q0 - qm + 0.5 * (slope(0) - slope(-1))) / h
                    } else {
                        let (Some(q0), Some(qp)) = (q(0), q(1)) else { continue };
                        (qp - q0 - 0.5 * (slope(1) - slope(0))) / h
                    };
                    acc += w * deriv;
                }
                out.data[a][i] = acc;
            });
        }
    }

    /// Helmholtz operator (rho/dt) x - (mu/2) lap x with homogeneous ghosts.
    fn helmholtz_apply(&self, dt: f64, x: &FaceField<D>, lap_buf: &mut FaceField<D>, out: &mut FaceField<D>) {
        self.laplacian(x, false, lap_buf);
        let c = self.rho / dt;
        for a in 0..D {
            for i in 0..x.data[a].len() {
                out.data[a][i] = c * x.data[a][i] - 0.5 * self.mu * lap_buf.data[a][i];
            }
        }
        // keep fixed faces exactly zero
        for a in 0..D {
            let dims = x.dims[a];
            for_each_index(dims, |iv| {
                if !self.is_unknown(a, iv) {
                    out.data[a][idx_in(&dims, iv)] = 0.0;
                }
            });
        }
    }

    /// Jacobi-preconditioned CG for the Helmholtz increment solve.
    fn cg_helmholtz(&self, dt: f64, rhs: &FaceField<D>, x: &mut FaceField<D>, tol_abs: f64) -> Result<usize> {
        let diag = self.rho / dt + 0.5 * self.mu * 2.0 * D as f64 / (self.grid.h * self.grid.h);
        let mut r = rhs.clone();
        x.fill(0.0);
        let mut lap = self.new_face_field();
        let mut z = r.clone();
        for a in 0..D {
            for v in z.data[a].iter_mut() {
                *v /= diag;
            }
        }
        let mut p = z.clone();
        let mut ap = self.new_face_field();
        let mut rz = r.dot(&z);
        let mut iters = 0;
        for _ in 0..2000 {
            if r.norm2() <= tol_abs {
                break;
            }
            self.helmholtz_apply(dt, &p, &mut lap, &mut ap);
            let pap = p.dot(&ap);
            if pap <= 0.0 || !pap.is_finite() {
                return Err(SimError::Runtime(format!(
                    "fluid-momentum: Helmholtz CG broke down (pAp = {pap:e})"
                )));
            }
            let alpha = rz / pap;
            x.axpy(alpha, &p);
            r.axpy(-alpha, &ap);
            iters += 1;
            for a in 0..D {
                for (zi, ri) in z.data[a].iter_mut().zip(&r.data[a]) {
                    *zi = ri / diag;
                }
            }
            let rz_new = r.dot(&z);
            let beta = rz_new / rz;
            rz = rz_new;
            for a in 0..D {
                for (pi, zi) in p.data[a].iter_mut().zip(&z.data[a]) {
                    *pi = zi + beta * *pi;
                }
            }
        }
        if r.norm2() > tol_abs {
            return Err(SimError::Runtime(format!(
                "fluid-momentum: Helmholtz CG stalled at residual {:e} (target {:e})",
                r.norm2(),
                tol_abs
            )));
        }
        Ok(iters)
    }

    pub fn max_abs_velocity(&self, v: &FaceField<D>) -> f64 {
        v.max_abs()
    }

    /// Kinetic energy 0.5 rho sum v^2 h^D (diagnostic; faces weighted equally).
    pub fn kinetic_energy(&self, v: &FaceField<D>) -> f64 {
        let cell = self.grid.h.powi(D as i32);
        0.5 * self.rho * v.dot(v) * cell
    }

    /// Advance one time step with the given face force density (dyn/cm^3).
    pub fn step(&mut self, st: &mut FluidState<D>, f_ext: &FaceField<D>, dt: f64) -> Result<StepStats> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(SimError::Config(format!("time step must be positive, got {dt}")));
        }
        let h = self.grid.h;
        let mut stats = StepStats { cfl: st.v.max_abs() * dt / h, ..Default::default() };

        // explicit advection, Adams-Bashforth extrapolated after the first step
        let mut n_now = self.new_face_field();
        self.advective(&st.v, &mut n_now);
        let mut n_eff = n_now.clone();
        if st.have_prev {
            for a in 0..D {
                for (ne, np) in n_eff.data[a].iter_mut().zip(&st.n_prev.data[a]) {
                    *ne = 1.5 * *ne - 0.5 * np;
                }
            }
        }
        st.n_prev = n_now;
        st.have_prev = true;

        // constant part of the momentum residual
        let mut lap_old = self.new_face_field();
        self.laplacian(&st.v, true, &mut lap_old);
        let mut rhs_const = self.new_face_field();
        let c = self.rho / dt;
        for a in 0..D {
            let dims = rhs_const.dims[a];
            for_each_index(dims, |iv| {
                let i = idx_in(&dims, iv);
                if !self.is_unknown(a, iv) {
                    return;
                }
                rhs_const.data[a][i] = c * st.v.data[a][i] + 0.5 * self.mu * lap_old.data[a][i]
                    - self.rho * n_eff.data[a][i]
                    + f_ext.data[a][i];
            });
        }
        let mut mom_scale = rhs_const.norm2().max(1e-300);

        let mut lap_cur = self.new_face_field();
        let mut resid = self.new_face_field();
        let mut dv = self.new_face_field();
        let mut div = vec![0.0; self.grid.cells()];
        let mut phi = vec![0.0; self.grid.cells()];
        let mut rhs_p = vec![0.0; self.grid.cells()];
        let mut history: Vec<(f64, f64)> = Vec::new();

        for outer in 0..MAX_OUTER {
            // residual of the implicit momentum equation at the current iterate
            self.laplacian(&st.v, true, &mut lap_cur);
            for a in 0..D {
                let n = resid.data[a].len();
                for i in 0..n {
                    resid.data[a][i] =
                        rhs_const.data[a][i] - c * st.v.data[a][i] + 0.5 * self.mu * lap_cur.data[a][i];
                }
            }
            self.add_pressure_gradient(&st.p, &st.v, -1.0, &mut resid);
            for a in 0..D {
                let dims = resid.dims[a];
                for_each_index(dims, |iv| {
                    if !self.is_unknown(a, iv) {
                        resid.data[a][idx_in(&dims, iv)] = 0.0;
                    }
                });
            }
            let rnorm = resid.norm2();
            if outer == 0 {
                // traction-driven startup can begin with a zero advective and
                // viscous budget; fold the initial imbalance into the scale
                mom_scale = mom_scale.max(rnorm);
            }
            let mom_rel = rnorm / mom_scale;
            self.divergence(&st.v, &mut div);
            let div_inf = div.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            let vmax = st.v.max_abs();
            let div_target = 1e-8 * (vmax / h + 1.0);
            if !mom_rel.is_finite() {
                return Err(SimError::Runtime(
                    "fluid-momentum: solver produced a non-finite residual".into(),
                ));
            }
            stats.outer_iters = outer;
            stats.mom_rel = mom_rel;
            stats.div_inf = div_inf;
            // a residual below the inertial load of a 1e-13 cm/s velocity field
            // is roundoff dirt; iterating on it only recirculates noise, so such
            // states count as converged regardless of the relative measure
            let n_faces: usize = resid.data.iter().map(|d| d.len()).sum();
            let noise_floor = 1e-13 * c * (n_faces as f64).sqrt();
            if div_inf <= div_target && (mom_rel <= 1e-8 || rnorm <= noise_floor) {
                return Ok(stats);
            }
            history.push((mom_rel, div_inf));

            // Helmholtz solve for the velocity increment
            let tol = (1e-3 * rnorm).max(0.2 * 1e-8 * mom_scale);
            stats.helmholtz_iters += self.cg_helmholtz(dt, &resid, &mut dv, tol)?;
            st.v.axpy(1.0, &dv);

            // pressure Poisson solve and Cahouet-Chabard update
            self.divergence(&st.v, &mut div);
            if !self.poisson.has_dirichlet {
                let mean = div.iter().sum::<f64>() / div.len() as f64;
                for d in div.iter_mut() {
                    *d -= mean;
                }
            }
            for (rp, d) in rhs_p.iter_mut().zip(&div) {
                *rp = c * d;
            }
            let div_target_now = 1e-8 * (st.v.max_abs() / h + 1.0);
            let ptol = (0.3 * c * div_target_now).max(1e-300);
            phi.fill(0.0);
            stats.poisson_iters += self.poisson.solve(&rhs_p, &mut phi, ptol)?;
            for i in 0..st.p.len() {
                st.p[i] += phi[i] - 0.5 * self.mu * div[i];
            }
            if !self.poisson.has_dirichlet {
                let mean = st.p.iter().sum::<f64>() / st.p.len() as f64;
                for p in st.p.iter_mut() {
                    *p -= mean;
                }
            }
            self.add_phi_gradient(&phi, -dt / self.rho, &mut st.v);
        }
        let tail: Vec<String> = history
            .iter()
            .rev()
            .take(5)
            .map(|(m, d)| format!("(mom {m:.3e}, div {d:.3e})"))
            .collect();
        Err(SimError::Runtime(format!(
            "fluid-momentum: projection iteration failed to converge in {MAX_OUTER} sweeps; last residuals {}",
            tail.join(", ")
        )))
    }
}

/// Monotonized-central limited slope from one-sided differences.
fn mc_limited(dl: f64, dr: f64) -> f64 {
    if dl * dr <= 0.0 {
        return 0.0;
    }
    let s = dl.signum();
    s * (2.0 * dl.abs()).min(2.0 * dr.abs()).min(0.5 * (dl + dr).abs())
}

/// Geometric multigrid preconditioner for the pressure Poisson operator
/// div(grad phi) with the projection's ghost closures: zero Dirichlet at
/// traction sides, zero normal derivative at walls, periodic wrap.
struct PoissonMg<const D: usize> {
    levels: Vec<Level<D>>,
    side: [[BcKind; 2]; D],
    has_dirichlet: bool,
}

struct Level<const D: usize> {
    n: [usize; D],
    h: f64,
}

impl<const D: usize> Level<D> {
    fn cells(&self) -> usize {
        self.n.iter().product()
    }
    fn cidx(&self, iv: [usize; D]) -> usize {
        idx_in(&self.n, iv)
    }
}

impl<const D: usize> PoissonMg<D> {
    fn new(grid: Grid<D>, bc: BcSet<D>) -> Self {
        let mut levels = vec![Level { n: grid.n, h: grid.h }];
        loop {
            let last = levels.last().unwrap();
            if last.n.iter().all(|&k| k % 2 == 0 && k / 2 >= 2) && last.cells() > 64 {
                levels.push(Level {
                    n: std::array::from_fn(|a| last.n[a] / 2),
                    h: last.h * 2.0,
                });
            } else {
                break;
            }
        }
        let has_dirichlet = (0..D).any(|a| bc.side[a].iter().any(|&k| k == BcKind::Traction));
        PoissonMg { levels, side: bc.side, has_dirichlet }
    }

    /// Off-diagonal neighbor contribution and diagonal for one cell row.
    fn row(&self, lev: &Level<D>, x: &[f64], iv: [usize; D]) -> (f64, f64) {
        let h2 = lev.h * lev.h;
        let mut off = 0.0;
        let mut diag = 0.0;
        for b in 0..D {
            for side in 0..2 {
                let nb = lev.n[b];
                let inside = if side == 0 { iv[b] > 0 } else { iv[b] + 1 < nb };
                if inside {
                    let mut jv = iv;
                    jv[b] = if side == 0 { iv[b] - 1 } else { iv[b] + 1 };
                    off += x[lev.cidx(jv)] / h2;
                    diag -= 1.0 / h2;
                } else {
                    match self.side[b][side] {
                        BcKind::Periodic => {
                            let mut jv = iv;
                            jv[b] = if side == 0 { nb - 1 } else { 0 };
                            off += x[lev.cidx(jv)] / h2;
                            diag -= 1.0 / h2;
                        }
                        BcKind::NoSlip => {} // zero normal derivative
                        BcKind::Traction => {
                            // ghost = -phi_0 (zero at the wall)
                            diag -= 2.0 / h2;
                        }
                    }
                }
            }
        }
        (off, diag)
    }

    fn apply(&self, lev: &Level<D>, x: &[f64], out: &mut [f64]) {
        for_each_index(lev.n, |iv| {
            let (off, diag) = self.row(lev, x, iv);
            out[lev.cidx(iv)] = off + diag * x[lev.cidx(iv)];
        });
    }

    /// One Gauss-Seidel sweep over cells of the given red-black color.
    fn smooth(&self, lev: &Level<D>, x: &mut [f64], rhs: &[f64], color: usize) {
        for_each_index(lev.n, |iv| {
            if iv.iter().sum::<usize>() % 2 != color {
                return;
            }
            let (off, diag) = self.row(lev, x, iv);
            if diag != 0.0 {
                x[lev.cidx(iv)] = (rhs[lev.cidx(iv)] - off) / diag;
            }
        });
    }

    fn vcycle(&self, li: usize, x: &mut [f64], rhs: &[f64]) {
        let lev = &self.levels[li];
        if li + 1 == self.levels.len() {
            self.coarse_solve(lev, x, rhs);
            return;
        }
        // symmetric V(1,1): red-black down, black-red up
        self.smooth(lev, x, rhs, 0);
        self.smooth(lev, x, rhs, 1);
        let mut res = vec![0.0; lev.cells()];
        self.apply(lev, x, &mut res);
        for i in 0..res.len() {
            res[i] = rhs[i] - res[i];
        }
        let coarse = &self.levels[li + 1];
        let mut crhs = vec![0.0; coarse.cells()];
        for_each_index(coarse.n, |civ| {
            let mut acc = 0.0;
            let children = 1usize << D;
            for corner in 0..children {
                let fiv: [usize; D] = std::array::from_fn(|a| 2 * civ[a] + ((corner >> a) & 1));
                acc += res[lev.cidx(fiv)];
            }
            crhs[coarse.cidx(civ)] = acc / children as f64;
        });
        let mut cx = vec![0.0; coarse.cells()];
        self.vcycle(li + 1, &mut cx, &crhs);
        for_each_index(coarse.n, |civ| {
            let corr = cx[coarse.cidx(civ)];
            let children = 1usize << D;
            for corner in 0..children {
                let fiv: [usize; D] = std::array::from_fn(|a| 2 * civ[a] + ((corner >> a) & 1));
                x[lev.cidx(fiv)] += corr;
            }
        });
        self.smooth(lev, x, rhs, 1);
        self.smooth(lev, x, rhs, 0);
    }

    fn coarse_solve(&self, lev: &Level<D>, x: &mut [f64], rhs: &[f64]) {
        // plain CG; the coarse problem is at most a few thousand cells
        let n = lev.cells();
        let mut rhs_loc = rhs.to_vec();
        if !self.has_dirichlet {
            let mean = rhs_loc.iter().sum::<f64>() / n as f64;
            for v in rhs_loc.iter_mut() {
                *v -= mean;
            }
        }
        x.fill(0.0);
        let mut r = rhs_loc;
        let mut p = r.clone();
        let mut ap = vec![0.0; n];
        let mut rr: f64 = r.iter().map(|v| v * v).sum();
        let rr0 = rr.max(1e-300);
        for _ in 0..4 * n + 50 {
            if rr <= 1e-28 * rr0 {
                break;
            }
            self.apply(lev, &p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap.abs() < 1e-300 {
                break;
            }
            let alpha = -rr / pap; // operator is negative (semi)definite
            for i in 0..n {
                x[i] -= alpha * p[i];
                r[i] += alpha * ap[i];
            }
            let rr_new: f64 = r.iter().map(|v| v * v).sum();
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
        }
        if !self.has_dirichlet {
            let mean = x.iter().sum::<f64>() / n as f64;
            for v in x.iter_mut() {
                *v -= mean;
            }
        }
    }

    /// Multigrid-preconditioned CG to absolute 2-norm residual `tol_abs`.
    fn solve(&self, rhs: &[f64], x: &mut [f64], tol_abs: f64) -> Result<usize> {
        let lev = &self.levels[0];
        let n = lev.cells();
        let mut rhs_loc = rhs.to_vec();
        if !self.has_dirichlet {
            let mean = rhs_loc.iter().sum::<f64>() / n as f64;
            for v in rhs_loc.iter_mut() {
                *v -= mean;
            }
        }
        // the MAC Poisson operator is negative semidefinite; CG runs on -L
        let mut r = rhs_loc.clone();
        let mut tmp = vec![0.0; n];
        self.apply(lev, x, &mut tmp);
        for i in 0..n {
            r[i] -= tmp[i];
        }
        let mut z = vec![0.0; n];
        let mut iters = 0;
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm(&r) <= tol_abs {
            return Ok(0);
        }
        let precond = |r: &[f64], z: &mut [f64]| {
            z.fill(0.0);
            self.vcycle(0, z, r);
            for v in z.iter_mut() {
                *v = -*v; // make the preconditioner positive definite
            }
        };
        precond(&r, &mut z);
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        for _ in 0..500 {
            self.apply(lev, &p, &mut tmp);
            for v in tmp.iter_mut() {
                *v = -*v;
            }
            let pap: f64 = p.iter().zip(&tmp).map(|(a, b)| a * b).sum();
            if pap.abs() < 1e-300 {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] -= alpha * p[i];
                r[i] -= alpha * tmp[i];
            }
            iters += 1;
            if !self.has_dirichlet {
                let mean = x.iter().sum::<f64>() / n as f64;
                for v in x.iter_mut() {
                    *v -= mean;
                }
            }
            if norm(&r) <= tol_abs {
                return Ok(iters);
            }
            precond(&r, &mut z);
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        if norm(&r) <= tol_abs {
            Ok(iters)
        } else {
            Err(SimError::Runtime(format!(
                "fluid-pressure: Poisson solve stalled at residual {:e} (target {:e})",
                norm(&r),
                tol_abs
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver2(n: [usize; 2], h: f64, bc: BcSet<2>, rho: f64, mu: f64) -> FluidSolver<2> {
        let grid = Grid::new([0.0, 0.0], n, h).unwrap();
        FluidSolver::new(grid, bc, rho, mu).unwrap()
    }

    fn fill_faces<const D: usize>(
        s: &FluidSolver<D>,
        f: &mut FaceField<D>,
        g: impl Fn(usize, Vect<D>) -> f64,
    ) {
        for a in 0..D {
            let dims = f.dims[a];
            for_each_index(dims, |iv| {
                let x = s.grid.face_pos(a, iv);
                let i = f.idx(a, iv);
                f.data[a][i] = g(a, x);
            });
        }
    }

    #[test]
    fn divergence_of_linear_fields() {
        let s = solver2([8, 8], 0.125, BcSet::uniform(BcKind::NoSlip), 1.0, 0.01);
        let mut v = s.new_face_field();
        // v = (x, -y) is exactly divergence free
        fill_faces(&s, &mut v, |a, x| if a == 0 { x[0] } else { -x[1] });
        let mut d = vec![0.0; s.grid.cells()];
        s.divergence(&v, &mut d);
        for val in &d {
            assert!(val.abs() < 1e-13);
        }
        // v = (x, y) has divergence 2
        fill_faces(&s, &mut v, |a, x| x[a]);
        s.divergence(&v, &mut d);
        for val in &d {
            assert!((val - 2.0).abs() < 1e-12);
        }
        // constant field
        fill_faces(&s, &mut v, |_, _| 3.7);
        s.divergence(&v, &mut d);
        for val in &d {
            assert!(val.abs() < 1e-13);
        }
    }

    fn rng(seed: u64) -> impl FnMut() -> f64 {
        use rand::{Rng, SeedableRng};
        let mut r = rand::rngs::StdRng::seed_from_u64(seed);
        move || r.gen::<f64>() - 0.5
    }

    #[test]
    fn phi_gradient_is_adjoint_to_divergence() {
        for bc in [
            BcSet::uniform(BcKind::NoSlip),
            BcSet { side: [[BcKind::Traction; 2], [BcKind::NoSlip; 2]] },
        ] {
            let s = solver2([6, 5], 0.2, bc, 1.0, 0.01);
            let mut draw = rng(42);
            let mut v = s.new_face_field();
            for a in 0..2 {
                let dims = v.dims[a];
                for_each_index(dims, |iv| {
                    let boundary = !s.bc.is_periodic(a) && (iv[a] == 0 || iv[a] == s.grid.n[a]);
                    if s.is_unknown(a, iv) && !boundary {
                        let i = v.idx(a, iv);
                        v.data[a][i] = draw();
                    }
                });
            }
            let phi: Vec<f64> = (0..s.grid.cells()).map(|_| draw()).collect();
            let mut gphi = s.new_face_field();
            s.add_phi_gradient(&phi, 1.0, &mut gphi);
            let mut d = vec![0.0; s.grid.cells()];
            s.divergence(&v, &mut d);
            let lhs = gphi.dot(&v);
            let rhs: f64 = -phi.iter().zip(&d).map(|(p, d)| p * d).sum::<f64>();
            assert!(
                (lhs - rhs).abs() <= 1e-12 * (lhs.abs() + rhs.abs()).max(1.0),
                "adjointness violated: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn poisson_operator_matches_div_grad() {
        for bc in [
            BcSet::uniform(BcKind::NoSlip),
            BcSet { side: [[BcKind::Traction; 2], [BcKind::NoSlip; 2]] },
            BcSet::uniform(BcKind::Periodic),
        ] {
            let s = solver2([8, 4], 0.25, bc, 1.0, 0.01);
            let mut draw = rng(7);
            let phi: Vec<f64> = (0..s.grid.cells()).map(|_| draw()).collect();
            let mut gphi = s.new_face_field();
            s.add_phi_gradient(&phi, 1.0, &mut gphi);
            let mut lphi_comp = vec![0.0; s.grid.cells()];
            s.divergence(&gphi, &mut lphi_comp);
            let mut lphi_dir = vec![0.0; s.grid.cells()];
            s.poisson.apply(&s.poisson.levels[0], &phi, &mut lphi_dir);
            for (a, b) in lphi_comp.iter().zip(&lphi_dir) {
                assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn poisson_solver_reaches_tolerance() {
        let s = solver2([32, 32], 0.1, BcSet::uniform(BcKind::NoSlip), 1.0, 0.01);
        let mut draw = rng(3);
        let rhs: Vec<f64> = (0..s.grid.cells()).map(|_| draw()).collect();
        let mut x = vec![0.0; s.grid.cells()];
        let iters = s.poisson.solve(&rhs, &mut x, 1e-9).unwrap();
        assert!(iters < 60, "multigrid CG should converge quickly, took {iters}");
        // verify the residual really is small (after mean removal)
        let mut rhs0 = rhs.clone();
        let mean = rhs0.iter().sum::<f64>() / rhs0.len() as f64;
        for v in rhs0.iter_mut() {
            *v -= mean;
        }
        let mut ax = vec![0.0; x.len()];
        s.poisson.apply(&s.poisson.levels[0], &x, &mut ax);
        let res: f64 = rhs0.iter().zip(&ax).map(|(b, a)| (b - a) * (b - a)).sum::<f64>().sqrt();
        assert!(res <= 1e-9 * 1.01);
    }

    #[test]
    fn quiescent_fluid_is_a_fixed_point() {
        let mut s = solver2([8, 8], 0.125, BcSet::uniform(BcKind::NoSlip), 1.0, 0.01);
        let mut st = s.new_state();
        let f = s.new_face_field();
        let stats = s.step(&mut st, &f, 0.01).unwrap();
        assert_eq!(stats.outer_iters, 0, "no work needed from rest");
        assert_eq!(st.v.max_abs(), 0.0);
        assert!(st.p.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn uniform_body_force_in_closed_box_balances_pressure() {
        let mut s = solver2([8, 8], 0.125, BcSet::uniform(BcKind::NoSlip), 1.0, 0.01);
        let mut st = s.new_state();
        let mut f = s.new_face_field();
        for a in 0..2 {
            let dims = f.dims[a];
            for_each_index(dims, |iv| {
                if a == 0 && s.is_unknown(a, iv) {
                    let i = f.idx(a, iv);
                    f.data[a][i] = 2.5;
                }
            });
        }
        for _ in 0..5 {
            s.step(&mut st, &f, 0.05).unwrap();
        }
        // velocity stays (essentially) zero; the pressure gradient carries f
        assert!(st.v.max_abs() < 1e-8, "vmax {}", st.v.max_abs());
        let g = s.grid;
        for j in 0..g.n[1] {
            for i in 0..g.n[0] - 1 {
                let dp = (st.p[g.cidx([i + 1, j])] - st.p[g.cidx([i, j])]) / g.h;
                assert!((dp - 2.5).abs() < 1e-6, "pressure gradient {dp}");
            }
        }
    }

    #[test]
    fn traction_channel_converges_to_poiseuille() {
        // channel [0,1]x[0,0.5], traction drives +x flow, walls top/bottom
        let grid = Grid::new([0.0, 0.0], [16, 8], 1.0 / 16.0).unwrap();
        let bc = BcSet { side: [[BcKind::Traction; 2], [BcKind::NoSlip; 2]] };
        let mu = 0.1;
        let mut s = FluidSolver::new(grid, bc, 1.0, mu).unwrap();
        let dp = 0.8;
        s.traction[0][0] = -dp; // sigma_xx(0) = -dp  => p(0) ~ +dp
        s.traction[0][1] = 0.0;
        let mut st = s.new_state();
        let f = s.new_face_field();
        for _ in 0..500 {
            s.step(&mut st, &f, 0.01).unwrap();
        }
        let ly = grid.len(1);
        let lx = grid.len(0);
        let umax_exact = dp * ly * ly / (8.0 * mu * lx);
        // compare the mid-channel profile against the exact parabola
        let i_mid = grid.n[0] / 2;
        for j in 0..grid.n[1] {
            let y = (j as f64 + 0.5) * grid.h;
            let exact = dp / (2.0 * mu * lx) * y * (ly - y);
            let got = st.v.get(0, [i_mid, j]);
            assert!(
                (got - exact).abs() <= 0.02 * umax_exact,
                "profile at y={y}: got {got}, exact {exact}"
            );
        }
        let div_inf = {
            let mut d = vec![0.0; grid.cells()];
            s.divergence(&st.v, &mut d);
            d.iter().fold(0.0f64, |m, x| m.max(x.abs()))
        };
        assert!(div_inf <= 1e-8 * (st.v.max_abs() / grid.h + 1.0));
    }

    #[test]
    fn taylor_green_vortex_decays_at_second_order() {
        let err = |nc: usize| -> f64 {
            let grid = Grid::new([0.0, 0.0], [nc, nc], 1.0 / nc as f64).unwrap();
            let bc = BcSet::uniform(BcKind::Periodic);
            let rho = 1.0;
            let mu = 0.01;
            let mut s = FluidSolver::new(grid, bc, rho, mu).unwrap();
            let mut st = s.new_state();
            let tp = std::f64::consts::TAU;
            fill_faces(&s, &mut st.v, |a, x| {
                if a == 0 {
                    -(tp * x[0]).cos() * (tp * x[1]).sin()
                } else {
                    (tp * x[0]).sin() * (tp * x[1]).cos()
                }
            });
            for_each_index(grid.n, |iv| {
                let x = grid.cell_pos(iv);
                st.p[grid.cidx(iv)] =
                    -0.25 * rho * ((2.0 * tp * x[0]).cos() + (2.0 * tp * x[1]).cos());
            });
            let f = s.new_face_field();
            let t_end = 0.1;
            let steps = 40;
            let dt = t_end / steps as f64;
            for _ in 0..steps {
                s.step(&mut st, &f, dt).unwrap();
            }
            let decay = (-2.0 * tp * tp * (mu / rho) * t_end).exp();
            let mut emax: f64 = 0.0;
            for a in 0..2 {
                let dims = st.v.dims[a];
                for_each_index(dims, |iv| {
                    let x = grid.face_pos(a, iv);
                    let exact = if a == 0 {
                        -(tp * x[0]).cos() * (tp * x[1]).sin() * decay
                    } else {
                        (tp * x[0]).sin() * (tp * x[1]).cos() * decay
                    };
                    emax = emax.max((st.v.get(a, iv) - exact).abs());
                });
            }
            emax
        };
        let e1 = err(16);
        let e2 = err(32);
        assert!(e2 < e1 / 3.0, "expected near 4x error reduction, got {e1} -> {e2}");
        assert!(e2 < 0.02, "absolute error too large: {e2}");
    }
}
