//! Fixed-dimension vector and matrix helpers for 2D/3D mechanics kernels.
//!
//! Row-major `[[f64; D]; D]` matrices and `[f64; D]` vectors keep hot loops
//! monomorphic and free of trait bounds. Determinants, inverses and symmetric
//! eigenvalue ranges are closed-form for D = 2, 3.

pub type Vect<const D: usize> = [f64; D];
pub type Mat<const D: usize> = [[f64; D]; D];

#[inline]
pub fn vzero<const D: usize>() -> Vect<D> {
    [0.0; D]
}

#[inline]
pub fn vadd<const D: usize>(a: Vect<D>, b: Vect<D>) -> Vect<D> {
    std::array::from_fn(|i| a[i] + b[i])
}

#[inline]
pub fn vsub<const D: usize>(a: Vect<D>, b: Vect<D>) -> Vect<D> {
    std::array::from_fn(|i| a[i] - b[i])
}

#[inline]
pub fn vscale<const D: usize>(s: f64, a: Vect<D>) -> Vect<D> {
    std::array::from_fn(|i| s * a[i])
}

#[inline]
pub fn vdot<const D: usize>(a: Vect<D>, b: Vect<D>) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn vnorm_sq<const D: usize>(a: Vect<D>) -> f64 {
    vdot(a, a)
}

#[inline]
pub fn vnorm<const D: usize>(a: Vect<D>) -> f64 {
    vnorm_sq(a).sqrt()
}

#[inline]
pub fn mzero<const D: usize>() -> Mat<D> {
    [[0.0; D]; D]
}

#[inline]
pub fn midentity<const D: usize>() -> Mat<D> {
    let mut m = mzero();
    for i in 0..D {
        m[i][i] = 1.0;
    }
    m
}

#[inline]
pub fn madd<const D: usize>(a: Mat<D>, b: Mat<D>) -> Mat<D> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] + b[i][j]))
}

#[inline]
pub fn msub<const D: usize>(a: Mat<D>, b: Mat<D>) -> Mat<D> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] - b[i][j]))
}

#[inline]
pub fn mscale<const D: usize>(s: f64, a: Mat<D>) -> Mat<D> {
    std::array::from_fn(|i| std::array::from_fn(|j| s * a[i][j]))
}

/// a[i][j] += s * x[i] * y[j]
#[inline]
pub fn maccum_outer<const D: usize>(a: &mut Mat<D>, s: f64, x: Vect<D>, y: Vect<D>) {
    for i in 0..D {
        for j in 0..D {
            a[i][j] += s * x[i] * y[j];
        }
    }
}

#[inline]
pub fn outer<const D: usize>(x: Vect<D>, y: Vect<D>) -> Mat<D> {
    std::array::from_fn(|i| std::array::from_fn(|j| x[i] * y[j]))
}

#[inline]
pub fn transpose<const D: usize>(a: Mat<D>) -> Mat<D> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

#[inline]
pub fn matmul<const D: usize>(a: Mat<D>, b: Mat<D>) -> Mat<D> {
    let mut c = mzero();
    for i in 0..D {
        for k in 0..D {
            let aik = a[i][k];
            for j in 0..D {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

#[inline]
pub fn matvec<const D: usize>(a: Mat<D>, x: Vect<D>) -> Vect<D> {
    std::array::from_fn(|i| vdot(a[i], x))
}

#[inline]
pub fn trace<const D: usize>(a: Mat<D>) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        s += a[i][i];
    }
    s
}

#[inline]
pub fn frob_norm<const D: usize>(a: Mat<D>) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        for j in 0..D {
            s += a[i][j] * a[i][j];
        }
    }
    s.sqrt()
}

pub fn det<const D: usize>(a: Mat<D>) -> f64 {
    match D {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        _ => unreachable!("only dimensions 1-3 are supported"),
    }
}

/// Closed-form inverse via adjugate. `None` when the determinant is exactly
/// representable as zero or not finite; callers apply their own conditioning
/// thresholds before trusting the result.
pub fn inverse<const D: usize>(a: Mat<D>) -> Option<Mat<D>> {
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let inv_d = 1.0 / d;
    let mut out = mzero::<D>();
    match D {
        1 => out[0][0] = inv_d,
        2 => {
            out[0][0] = a[1][1] * inv_d;
            out[0][1] = -a[0][1] * inv_d;
            out[1][0] = -a[1][0] * inv_d;
            out[1][1] = a[0][0] * inv_d;
        }
        3 => {
            out[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * inv_d;
            out[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv_d;
            out[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv_d;
            out[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * inv_d;
            out[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv_d;
            out[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv_d;
            out[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * inv_d;
            out[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv_d;
            out[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv_d;
        }
        _ => unreachable!("only dimensions 1-3 are supported"),
    }
    Some(out)
}

/// Eigenvalue range (min, max) of a symmetric matrix, closed form.
///
/// For the symmetric positive semidefinite shape tensors this equals the
/// singular value range, which is what conditioning checks need.
pub fn sym_eig_range<const D: usize>(a: Mat<D>) -> (f64, f64) {
    match D {
        1 => (a[0][0], a[0][0]),
        2 => {
            let tr = a[0][0] + a[1][1];
            let dt = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let disc = (tr * tr / 4.0 - dt).max(0.0).sqrt();
            let l1 = tr / 2.0 - disc;
            let l2 = tr / 2.0 + disc;
            (l1.min(l2), l1.max(l2))
        }
        3 => {
            // Trigonometric solution of the characteristic cubic of the
            // shifted matrix B = (A - q I)/p.
            let q = trace(a) / 3.0;
            let mut p2 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let v = if i == j { a[i][j] - q } else { a[i][j] };
                    p2 += v * v;
                }
            }
            let p = (p2 / 6.0).sqrt();
            if p < 1e-300 {
                return (q, q);
            }
            let mut b = mzero::<D>();
            for i in 0..3 {
                for j in 0..3 {
                    b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
                }
            }
            let r = (det(b) / 2.0).clamp(-1.0, 1.0);
            let phi = r.acos() / 3.0;
            let l_max = q + 2.0 * p * phi.cos();
            let l_min = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
            (l_min.min(l_max), l_min.max(l_max))
        }
        _ => unreachable!("only dimensions 1-3 are supported"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse_2d() {
        let a: Mat<2> = [[3.0, 1.0], [2.0, 5.0]];
        assert!((det(a) - 13.0).abs() < 1e-14);
        let inv = inverse(a).unwrap();
        let id = matmul(a, inv);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[i][j] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn det_and_inverse_3d() {
        let a: Mat<3> = [[2.0, 1.0, 0.5], [0.0, 3.0, 1.0], [1.0, -1.0, 4.0]];
        let inv = inverse(a).unwrap();
        let id = matmul(a, inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[i][j] - want).abs() < 1e-13, "entry {i}{j} = {}", id[i][j]);
            }
        }
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let a: Mat<2> = [[1.0, 2.0], [2.0, 4.0]];
        assert!(inverse(a).is_none());
    }

    #[test]
    fn identity_inverse_is_exact() {
        let inv = inverse(midentity::<3>()).unwrap();
        assert_eq!(inv, midentity::<3>());
    }

    #[test]
    fn sym_eig_range_2d_known() {
        // eigenvalues 1 and 3
        let a: Mat<2> = [[2.0, 1.0], [1.0, 2.0]];
        let (lo, hi) = sym_eig_range(a);
        assert!((lo - 1.0).abs() < 1e-12);
        assert!((hi - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sym_eig_range_3d_known() {
        // diag(1, 2, 5) rotated by a row permutation stays symmetric diag here
        let a: Mat<3> = [[1.0, 0.0, 0.0], [0.0, 5.0, 0.0], [0.0, 0.0, 2.0]];
        let (lo, hi) = sym_eig_range(a);
        assert!((lo - 1.0).abs() < 1e-12);
        assert!((hi - 5.0).abs() < 1e-12);
    }

    #[test]
    fn matvec_matches_manual() {
        let a: Mat<3> = [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]];
        let x = [1.0, -1.0, 2.0];
        let y = matvec(a, x);
        assert_eq!(y, [5.0, 11.0, 17.0]);
    }
}
