//! Immersed-boundary transfer between Lagrangian structure points and the
//! staggered grid.
//!
//! Regularized delta functions built from the four-point kernel move data both
//! ways: `spread` deposits structural force densities onto the faces as a
//! fluid body force, `interpolate` evaluates the fluid velocity at the
//! structure points. The two operators are adjoint with respect to the natural
//! inner products (grid sum weighted by h^D, structure sum weighted by the
//! point volume), which is what keeps the coupled scheme from creating or
//! destroying energy in the transfer.
//!
//! Near boundaries: kernel taps that stick out past a no-slip wall are
//! dropped (the wall takes the load), while reaching past a traction side or
//! leaving the domain entirely is a hard error, since mass and momentum
//! accounting there would silently break.

use crate::fluid::{BcKind, FaceField, FluidSolver};
use crate::math::Vect;
use crate::{Result, SimError};

/// Four-point immersed-boundary kernel; support |r| < 2, phi(0) = 1/2,
/// sum_k phi(r - k) = 1 and sum_k (r - k) phi(r - k) = 0 for all r.
pub fn peskin4(r: f64) -> f64 {
    let a = r.abs();
    if a <= 1.0 {
        0.125 * (3.0 - 2.0 * a + (1.0 + 4.0 * a - 4.0 * a * a).sqrt())
    } else if a <= 2.0 {
        0.125 * (5.0 - 2.0 * a - (-7.0 + 12.0 * a - 4.0 * a * a).max(0.0).sqrt())
    } else {
        0.0
    }
}

enum Tap {
    In(usize),
    Drop,
}

/// Resolve one kernel tap index against the axis extent and boundary kinds.
fn resolve_tap<const D: usize>(
    fs: &FluidSolver<D>,
    axis: usize,
    i: isize,
    len: usize,
) -> Result<Tap> {
    if fs.bc.is_periodic(axis) {
        return Ok(Tap::In(i.rem_euclid(len as isize) as usize));
    }
    if i >= 0 && (i as usize) < len {
        return Ok(Tap::In(i as usize));
    }
    let side = if i < 0 { 0 } else { 1 };
    match fs.bc.side[axis][side] {
        BcKind::NoSlip => Ok(Tap::Drop),
        BcKind::Traction => Err(SimError::Runtime(format!(
            "structure interaction kernel reaches across the traction boundary on axis {axis}"
        ))),
        BcKind::Periodic => unreachable!(),
    }
}

fn check_inside<const D: usize>(fs: &FluidSolver<D>, l: usize, x: &Vect<D>) -> Result<()> {
    for a in 0..D {
        if fs.bc.is_periodic(a) {
            continue;
        }
        let lo = fs.grid.lo[a];
        let hi = lo + fs.grid.len(a);
        // Structures are allowed to brush a no-slip wall: anchored points
        // that sit exactly on the wall wobble past it by roundoff, and the
        // dropped kernel taps account for the overlap. Half a mesh width is
        // the limit; a genuinely escaping point crosses it at once.
        let slack = |side: usize| match fs.bc.side[a][side] {
            BcKind::NoSlip => 0.5 * fs.grid.h,
            _ => 0.0,
        };
        if !x[a].is_finite() || x[a] < lo - slack(0) || x[a] > hi + slack(1) {
            return Err(SimError::Runtime(format!(
                "structure escaped the fluid domain: point {l} at {:?}",
                x
            )));
        }
    }
    Ok(())
}

/// Kernel taps of one point for component `a`: up to 4 (index, weight) pairs
/// per axis. Returns false if any tap was dropped at a no-slip wall.
fn axis_taps<const D: usize>(
    fs: &FluidSolver<D>,
    a: usize,
    x: &Vect<D>,
    dims: &[usize; D],
) -> Result<[Vec<(usize, f64)>; D]> {
    let h = fs.grid.h;
    let mut out: [Vec<(usize, f64)>; D] = std::array::from_fn(|_| Vec::with_capacity(4));
    for b in 0..D {
        // faces of component a sit on integer coordinates along a, at
        // half-integers along other axes
        let shift = if b == a { 0.0 } else { 0.5 };
        let s = (x[b] - fs.grid.lo[b]) / h - shift;
        let base = s.floor() as isize;
        for i in (base - 1)..=(base + 2) {
            let w = peskin4(i as f64 - s);
            if w == 0.0 {
                continue;
            }
            match resolve_tap(fs, b, i, dims[b])? {
                Tap::In(idx) => out[b].push((idx, w)),
                Tap::Drop => {}
            }
        }
    }
    Ok(out)
}

/// Evaluate the fluid velocity at each structure point.
pub fn interpolate<const D: usize>(
    fs: &FluidSolver<D>,
    v: &FaceField<D>,
    pts: &[Vect<D>],
) -> Result<Vec<Vect<D>>> {
    let mut out = vec![[0.0; D]; pts.len()];
    for (l, x) in pts.iter().enumerate() {
        check_inside(fs, l, x)?;
        for a in 0..D {
            let taps = axis_taps(fs, a, x, &v.dims[a])?;
            out[l][a] = sum_taps(&taps, |iv| v.get(a, iv));
        }
    }
    Ok(out)
}

/// Deposit structural force densities (per reference volume, dyn/cm^3) onto
/// the grid as a face force density. `point_volume` is the Lagrangian volume
/// each point represents (cm^D). `out` is overwritten.
pub fn spread<const D: usize>(
    fs: &FluidSolver<D>,
    pts: &[Vect<D>],
    force: &[Vect<D>],
    point_volume: f64,
    out: &mut FaceField<D>,
) -> Result<()> {
    out.fill(0.0);
    let cell = fs.grid.h.powi(D as i32);
    let scale = point_volume / cell;
    for (l, x) in pts.iter().enumerate() {
        check_inside(fs, l, x)?;
        for a in 0..D {
            if force[l][a] == 0.0 {
                continue;
            }
            let taps = axis_taps(fs, a, x, &out.dims[a])?;
            let amount = force[l][a] * scale;
            add_taps(&taps, |iv, w| {
                let i = out.idx(a, iv);
                out.data[a][i] += amount * w;
            });
        }
    }
    Ok(())
}

fn sum_taps<const D: usize>(taps: &[Vec<(usize, f64)>; D], get: impl Fn([usize; D]) -> f64) -> f64 {
    let mut acc = 0.0;
    let mut iv = [0usize; D];
    let mut w = [0.0f64; D];
    walk_taps(taps, 0, &mut iv, &mut w, &mut |iv, wt| acc += get(iv) * wt);
    acc
}

fn add_taps<const D: usize>(taps: &[Vec<(usize, f64)>; D], mut put: impl FnMut([usize; D], f64)) {
    let mut iv = [0usize; D];
    let mut w = [0.0f64; D];
    walk_taps(taps, 0, &mut iv, &mut w, &mut put);
}

fn walk_taps<const D: usize>(
    taps: &[Vec<(usize, f64)>; D],
    axis: usize,
    iv: &mut [usize; D],
    w: &mut [f64; D],
    visit: &mut impl FnMut([usize; D], f64),
) {
    if axis == D {
        let weight: f64 = w.iter().product();
        visit(*iv, weight);
        return;
    }
    for &(i, wt) in &taps[axis] {
        iv[axis] = i;
        w[axis] = wt;
        walk_taps(taps, axis + 1, iv, w, visit);
    }
}
