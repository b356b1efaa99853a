//! Stabilized hyperelastic constitutive laws.
//!
//! Both models split into an isochoric part and a logarithmic volumetric
//! penalty `kappa/2 (ln J)^2` whose stiffness comes from a numerical Poisson
//! ratio: kappa = 2 G (1 + nu) / (3 (1 - 2 nu)). The penalty enforces
//! near-incompressibility without a pressure unknown in the solid.
//!
//! 2D deformation gradients are treated as plane strain: promoted to 3x3
//! with F33 = 1, evaluated, and the stress truncated back to 2x2.

use crate::math::{det, inverse, matmul, mscale, trace, transpose, Mat};
use crate::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Material {
    NeoHookean {
        /// Shear modulus G (dyn/cm^2).
        shear: f64,
        /// Volumetric penalty stiffness kappa (dyn/cm^2).
        bulk: f64,
    },
    MooneyRivlin {
        /// First distortional coefficient c1 (dyn/cm^2).
        c1: f64,
        /// Second distortional coefficient c2 (dyn/cm^2).
        c2: f64,
        bulk: f64,
    },
}

/// Volumetric stiffness from shear modulus and numerical Poisson ratio.
/// nu >= 0.5 is the incompressible limit and has no finite penalty.
pub fn bulk_from_poisson(shear: f64, nu: f64) -> Result<f64> {
    if nu >= 0.5 {
        return Err(SimError::Config(format!(
            "incompressible limit: numerical Poisson ratio {nu} must be < 0.5"
        )));
    }
    Ok(2.0 * shear * (1.0 + nu) / (3.0 * (1.0 - 2.0 * nu)))
}

impl Material {
    pub fn neo_hookean(shear: f64, nu: f64) -> Result<Self> {
        Ok(Material::NeoHookean { shear, bulk: bulk_from_poisson(shear, nu)? })
    }

    pub fn mooney_rivlin(c1: f64, c2: f64, nu: f64) -> Result<Self> {
        let bulk = bulk_from_poisson(c1 + c2, nu)?;
        Ok(Material::MooneyRivlin { c1, c2, bulk })
    }

    /// Effective shear modulus, used by time-step stability bounds.
    pub fn shear_modulus(&self) -> f64 {
        match *self {
            Material::NeoHookean { shear, .. } => shear,
            Material::MooneyRivlin { c1, c2, .. } => c1 + c2,
        }
    }

    pub fn bulk_modulus(&self) -> f64 {
        match *self {
            Material::NeoHookean { bulk, .. } | Material::MooneyRivlin { bulk, .. } => bulk,
        }
    }

    /// Strain energy density at deformation gradient F.
    pub fn energy<const D: usize>(&self, f: Mat<D>) -> Result<f64> {
        let f3 = embed(f);
        let j = det(f3);
        if j <= 0.0 {
            return Err(SimError::Runtime(format!("inverted element: J = {j}")));
        }
        let c = matmul(transpose(f3), f3);
        let i1 = trace(c);
        let ln_j = j.ln();
        match *self {
            Material::NeoHookean { shear, bulk } => {
                Ok(0.5 * shear * (j.powf(-2.0 / 3.0) * i1 - 3.0) + 0.5 * bulk * ln_j * ln_j)
            }
            Material::MooneyRivlin { c1, c2, bulk } => {
                let i2 = i1 * i1 - trace(matmul(c, c));
                Ok(c1 * (j.powf(-2.0 / 3.0) * i1 - 3.0)
                    + c2 * (0.5 * j.powf(-4.0 / 3.0) * i2 - 3.0)
                    + 0.5 * bulk * ln_j * ln_j)
            }
        }
    }

    /// First Piola-Kirchhoff stress at deformation gradient F.
    pub fn first_piola<const D: usize>(&self, f: Mat<D>) -> Result<Mat<D>> {
        let f3 = embed(f);
        let j = det(f3);
        if j <= 0.0 {
            return Err(SimError::Runtime(format!("inverted element: J = {j}")));
        }
        let f_inv_t = transpose(inverse(f3).expect("J > 0 implies invertible F"));
        let c = matmul(transpose(f3), f3);
        let i1 = trace(c);
        let ln_j = j.ln();
        let p3 = match *self {
            Material::NeoHookean { shear, bulk } => {
                let mut p = mscale(shear * j.powf(-2.0 / 3.0), msub3(f3, mscale(i1 / 3.0, f_inv_t)));
                p = add3(p, mscale(bulk * ln_j, f_inv_t));
                p
            }
            Material::MooneyRivlin { c1, c2, bulk } => {
                let i2 = i1 * i1 - trace(matmul(c, c));
                let mut p = mscale(2.0 * c1 * j.powf(-2.0 / 3.0), msub3(f3, mscale(i1 / 3.0, f_inv_t)));
                let fc = matmul(f3, c);
                let term2 = msub3(msub3(mscale(i1, f3), fc), mscale(i2 / 3.0, f_inv_t));
                p = add3(p, mscale(2.0 * c2 * j.powf(-4.0 / 3.0), term2));
                p = add3(p, mscale(bulk * ln_j, f_inv_t));
                p
            }
        };
        Ok(truncate(p3))
    }
}

fn add3(a: Mat<3>, b: Mat<3>) -> Mat<3> {
    crate::math::madd(a, b)
}

fn msub3(a: Mat<3>, b: Mat<3>) -> Mat<3> {
    crate::math::msub(a, b)
}

/// Plane-strain promotion of a DxD deformation gradient to 3x3.
fn embed<const D: usize>(f: Mat<D>) -> Mat<3> {
    let mut f3 = crate::math::midentity::<3>();
    for i in 0..D.min(3) {
        for j in 0..D.min(3) {
            f3[i][j] = f[i][j];
        }
    }
    f3
}

/// Truncate a 3x3 stress back to the plane components.
fn truncate<const D: usize>(p: Mat<3>) -> Mat<D> {
    std::array::from_fn(|i| std::array::from_fn(|j| p[i][j]))
}
