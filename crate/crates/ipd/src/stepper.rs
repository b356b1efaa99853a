//! Coupled fluid-structure time stepping.
//!
//! One step advances the immersed structure and the fluid together with a
//! midpoint scheme. Structure points first move to a half-step configuration
//! using interpolated fluid velocity; bond failure and structural forces are
//! evaluated there and spread onto the grid; the fluid momentum solve then
//! produces the end-of-step velocity; finally the points complete the step
//! moving with the time-averaged interpolated velocity. Structure points
//! carry no independent dynamics: every bit of their motion comes from the
//! fluid velocity field, so points inside a region of uniform flow translate
//! rigidly.

use crate::coupling::{interpolate, spread};
use crate::fluid::{FaceField, FluidSolver, FluidState, StepStats};
use crate::math::Vect;
use crate::mechanics::PdSolid;
use crate::{Result, SimError};

/// Time profile of an applied load or constraint motion, as a factor in
/// [0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ramp {
    /// Full value from the first instant.
    Instant,
    /// Smooth cubic rise 3(t/T)^2 - 2(t/T)^3 with zero slope at both ends,
    /// holding 1 after `t_load`.
    Cubic { t_load: f64 },
    /// Straight-line rise to 1 at `t_load`, holding 1 afterwards.
    Linear { t_load: f64 },
    /// Quarter sine wave sin(pi t / (2 t_load)) reaching 1 with zero slope
    /// at `t_load`, holding 1 afterwards.
    HalfSine { t_load: f64 },
}

impl Ramp {
    /// Load factor at time `t` (s).
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Ramp::Instant => 1.0,
            Ramp::Cubic { t_load } => {
                if t >= t_load || t_load <= 0.0 {
                    1.0
                } else if t <= 0.0 {
                    0.0
                } else {
                    let s = t / t_load;
                    s * s * (3.0 - 2.0 * s)
                }
            }
            Ramp::Linear { t_load } => {
                if t_load <= 0.0 {
                    1.0
                } else {
                    (t / t_load).clamp(0.0, 1.0)
                }
            }
            Ramp::HalfSine { t_load } => {
                if t >= t_load || t_load <= 0.0 {
                    1.0
                } else if t <= 0.0 {
                    0.0
                } else {
                    (0.5 * std::f64::consts::PI * t / t_load).sin()
                }
            }
        }
    }
}

/// Prescribed motion of a tether set's target positions.
#[derive(Clone, Copy, Debug)]
pub enum TetherMotion<const D: usize> {
    /// Targets stay at the reference positions.
    Hold,
    /// Targets rotate rigidly about the line through `center` along
    /// coordinate `axis` (ignored in 2D, where rotation is in-plane), by
    /// `angle` (rad) scaled with `ramp`.
    Rotate { center: Vect<D>, axis: usize, angle: f64, ramp: Ramp },
}

impl<const D: usize> TetherMotion<D> {
    /// Target position at time `t` for a point with the given reference
    /// position.
    pub fn target(&self, reference: Vect<D>, t: f64) -> Vect<D> {
        match self {
            TetherMotion::Hold => reference,
            TetherMotion::Rotate { center, axis, angle, ramp } => {
                let th = angle * ramp.value(t);
                let (c, s) = (th.cos(), th.sin());
                let (i, j) = if D == 2 { (0, 1) } else { ((axis + 1) % 3, (axis + 2) % 3) };
                let u = reference[i] - center[i];
                let w = reference[j] - center[j];
                let mut out = reference;
                out[i] = center[i] + c * u - s * w;
                out[j] = center[j] + s * u + c * w;
                out
            }
        }
    }
}

/// Penalty spring anchoring a tagged point set to (possibly moving) target
/// positions. The force density applied to a member point is
/// stiffness * (target - position) - damping * velocity, restricted to the
/// masked components.
#[derive(Clone, Copy, Debug)]
pub struct Tether<const D: usize> {
    /// Tag in the lattice tether set this spec applies to.
    pub tag: u8,
    /// Per-component constraint mask; unmasked components stay free.
    pub mask: [bool; D],
    /// Spring stiffness per unit reference volume (dyn/cm / cm^D).
    pub stiffness: f64,
    /// Velocity damping per unit reference volume (g/s / cm^D).
    pub damping: f64,
    pub motion: TetherMotion<D>,
}

/// External surface traction applied to a tagged layer of structure points.
/// The traction (force per unit reference area) is converted to a force
/// density by dividing by the lattice spacing; per-point weights account for
/// partial surface cells.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceLoad<const D: usize> {
    /// Tag in the lattice load set this load applies to.
    pub tag: u8,
    /// Traction vector at full load (dyn/cm^(D-1)).
    pub traction: Vect<D>,
    pub ramp: Ramp,
}

/// Stability-guided default tether stiffness (per unit reference volume) for
/// grid spacing `h` (cm) and step `dt` (s).
pub fn tether_stiffness(rho: f64, h: f64, dt: f64) -> f64 {
    0.5 * rho * h / (dt * dt)
}

/// Near-critical tether damping for stiffness `kappa` against the inertia of
/// fluid with density `rho`.
pub fn tether_damping(kappa: f64, rho: f64) -> f64 {
    2.0 * (kappa * rho).sqrt()
}

/// Per-step outcome summary.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub fluid: StepStats,
    /// Bond pairs broken this step.
    pub broken_pairs: usize,
    /// Reference midpoints of the pairs broken this step (cm).
    pub broken_midpoints: Vec<Vec<f64>>,
    /// Largest structure point speed used in the position update (cm/s).
    pub max_point_speed: f64,
}

/// Owns the complete coupled state and advances it one step at a time.
pub struct CoupledStepper<const D: usize> {
    pub fluid: FluidSolver<D>,
    pub state: FluidState<D>,
    pub solid: PdSolid<D>,
    /// Current structure configuration (cm).
    pub positions: Vec<Vect<D>>,
    pub tethers: Vec<Tether<D>>,
    pub loads: Vec<SurfaceLoad<D>>,
    /// Boundary normal traction at full load, indexed `[axis][side]`
    /// (dyn/cm^2); applied through the fluid's traction boundaries.
    pub wall_traction: [[f64; 2]; D],
    pub wall_ramp: Ramp,
    /// Uniform structure velocity damping coefficient; zero disables.
    pub damping: f64,
    /// Time step (s), constant for the run.
    pub dt: f64,
    /// Current time (s).
    pub time: f64,
    half: Vec<Vect<D>>,
    total_force: Vec<Vect<D>>,
    grid_force: FaceField<D>,
}

impl<const D: usize> CoupledStepper<D> {
    pub fn new(fluid: FluidSolver<D>, solid: PdSolid<D>, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::Config(format!("time step must be positive, got {dt}")));
        }
        let n = solid.n_points();
        let state = fluid.new_state();
        let grid_force = fluid.new_face_field();
        Ok(CoupledStepper {
            fluid,
            state,
            positions: solid.lattice.points.clone(),
            solid,
            tethers: Vec::new(),
            loads: Vec::new(),
            wall_traction: [[0.0; 2]; D],
            wall_ramp: Ramp::Instant,
            damping: 0.0,
            dt,
            time: 0.0,
            half: vec![[0.0; D]; n],
            total_force: vec![[0.0; D]; n],
            grid_force,
        })
    }

    /// Displacement of point `l` from its reference position (cm).
    pub fn displacement(&self, l: usize) -> Vect<D> {
        let mut d = [0.0; D];
        for a in 0..D {
            d[a] = self.positions[l][a] - self.solid.lattice.points[l][a];
        }
        d
    }

    /// Advance the coupled state by one time step.
    pub fn step(&mut self) -> Result<StepReport> {
        let dt = self.dt;
        let n = self.positions.len();

        // Half-step advection with the current fluid velocity.
        let v_now = interpolate(&self.fluid, &self.state.v, &self.positions)?;
        for l in 0..n {
            for a in 0..D {
                self.half[l][a] = self.positions[l][a] + 0.5 * dt * v_now[l][a];
            }
        }
        guard_points(&self.half, "half-step advection")?;

        // Bond failure and structural force at the half-step configuration.
        let failure = if self.solid.critical_stretch.is_some() {
            self.solid.apply_failure(&self.half)?
        } else {
            Default::default()
        };
        self.solid.assemble(&self.half)?;
        let v_half = interpolate(&self.fluid, &self.state.v, &self.half)?;
        let t_half = self.time + 0.5 * dt;
        self.accumulate_forces(&v_half, t_half);
        guard_points(&self.total_force, "force evaluation")?;

        // Spread the Lagrangian force density onto the grid.
        spread(
            &self.fluid,
            &self.half,
            &self.total_force,
            self.solid.lattice.volume,
            &mut self.grid_force,
        )?;

        // Fluid momentum and pressure solve.
        let q = self.wall_ramp.value(t_half);
        for a in 0..D {
            for s in 0..2 {
                self.fluid.traction[a][s] = q * self.wall_traction[a][s];
            }
        }
        let stats = self.fluid.step(&mut self.state, &self.grid_force, dt)?;
        if !self.state.v.max_abs().is_finite() {
            return Err(SimError::Runtime(
                "non-finite state after momentum solve".into(),
            ));
        }

        // Full-step advection with the time-averaged velocity, interpolated
        // at the half-step configuration.
        let v_new = interpolate(&self.fluid, &self.state.v, &self.half)?;
        let mut vmax = 0.0f64;
        for l in 0..n {
            let mut speed2 = 0.0;
            for a in 0..D {
                let w = 0.5 * (v_half[l][a] + v_new[l][a]);
                self.positions[l][a] += dt * w;
                speed2 += w * w;
            }
            vmax = vmax.max(speed2.sqrt());
        }
        guard_points(&self.positions, "position update")?;

        self.time += dt;
        Ok(StepReport {
            fluid: stats,
            broken_pairs: failure.broken_pairs,
            broken_midpoints: failure.broken_midpoints,
            max_point_speed: vmax,
        })
    }

    /// Total Lagrangian force density at the half-step configuration:
    /// internal force plus tether, damping, and external load terms.
    fn accumulate_forces(&mut self, v_half: &[Vect<D>], t: f64) {
        let lat = &self.solid.lattice;
        for l in 0..lat.len() {
            let mut f = self.solid.force[l];
            if self.damping > 0.0 {
                for a in 0..D {
                    f[a] -= self.damping * v_half[l][a];
                }
            }
            if let Some(tag) = lat.tether_set[l] {
                for th in &self.tethers {
                    if th.tag != tag {
                        continue;
                    }
                    let target = th.motion.target(lat.points[l], t);
                    for a in 0..D {
                        if th.mask[a] {
                            f[a] += th.stiffness * (target[a] - self.half[l][a])
                                - th.damping * v_half[l][a];
                        }
                    }
                }
            }
            if let Some(tag) = lat.load_set[l] {
                for ld in &self.loads {
                    if ld.tag != tag {
                        continue;
                    }
                    let s = ld.ramp.value(t) * lat.load_weight[l] / lat.dx;
                    for a in 0..D {
                        f[a] += s * ld.traction[a];
                    }
                }
            }
            self.total_force[l] = f;
        }
    }
}

fn guard_points<const D: usize>(pts: &[Vect<D>], phase: &str) -> Result<()> {
    for p in pts {
        for a in 0..D {
            if !p[a].is_finite() {
                return Err(SimError::Runtime(format!(
                    "non-finite structure state after {phase}"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::{BcKind, BcSet, Grid};
    use crate::lattice::{build_horizons, build_lattice, HorizonSpec, Seeding};
    use crate::material::Material;

    fn block_solid(lo: [f64; 2], hi: [f64; 2], dx: f64) -> PdSolid<2> {
        let lat = build_lattice(lo, hi, dx, Seeding::CellCentered, |_| true).unwrap();
        let bonds = build_horizons(&lat, &HorizonSpec::new(1.015)).unwrap();
        let mat = Material::neo_hookean(10.0, 0.3).unwrap();
        PdSolid::new(lat, bonds, mat, None).unwrap()
    }

    fn periodic_box(n: usize) -> FluidSolver<2> {
        let grid = Grid::new([0.0, 0.0], [n, n], 1.0 / n as f64).unwrap();
        FluidSolver::new(grid, BcSet::uniform(BcKind::Periodic), 1.0, 0.01).unwrap()
    }

    fn noslip_box(n: usize) -> FluidSolver<2> {
        let grid = Grid::new([0.0, 0.0], [n, n], 1.0 / n as f64).unwrap();
        FluidSolver::new(grid, BcSet::uniform(BcKind::NoSlip), 1.0, 0.01).unwrap()
    }

    #[test]
    fn load_ramp_endpoint_conditions_hold_exactly() {
        let r = Ramp::Cubic { t_load: 5.0 };
        assert_eq!(r.value(0.0), 0.0);
        assert_eq!(r.value(5.0), 1.0);
        assert_eq!(r.value(7.0), 1.0);
        assert_eq!(r.value(2.5), 0.5);
        let d0 = (r.value(1e-7) - r.value(0.0)) / 1e-7;
        let d1 = (r.value(5.0) - r.value(5.0 - 1e-7)) / 1e-7;
        assert!(d0.abs() < 1e-6, "slope at start {d0}");
        assert!(d1.abs() < 1e-6, "slope at end {d1}");

        let lin = Ramp::Linear { t_load: 4.0 };
        assert_eq!(lin.value(2.0), 0.5);
        assert_eq!(lin.value(4.0), 1.0);
        assert_eq!(lin.value(9.0), 1.0);
        assert_eq!(Ramp::Instant.value(0.0), 1.0);

        let hs = Ramp::HalfSine { t_load: 6.0 };
        assert_eq!(hs.value(0.0), 0.0);
        assert_eq!(hs.value(6.0), 1.0);
        assert_eq!(hs.value(8.0), 1.0);
        assert!((hs.value(3.0) - 0.5f64.sqrt()).abs() < 1e-15);
        let de = (hs.value(6.0) - hs.value(6.0 - 1e-7)) / 1e-7;
        assert!(de.abs() < 1e-6, "half sine arrives with zero slope, got {de}");
    }

    #[test]
    fn quiescent_stress_free_state_is_a_fixed_point() {
        let solid = block_solid([0.25, 0.375], [0.75, 0.625], 1.0 / 32.0);
        let mut st = CoupledStepper::new(periodic_box(16), solid, 1e-3).unwrap();
        for _ in 0..3 {
            st.step().unwrap();
        }
        let mut worst = 0.0f64;
        for l in 0..st.positions.len() {
            let d = st.displacement(l);
            worst = worst.max(d[0].abs()).max(d[1].abs());
        }
        assert!(worst <= 1e-14, "structure drifted by {worst}");
        assert!(st.fluid.max_abs_velocity(&st.state.v) <= 1e-14);
    }

    #[test]
    fn uniform_flow_carries_the_structure_rigidly() {
        let solid = block_solid([0.25, 0.375], [0.75, 0.625], 1.0 / 32.0);
        let reference = solid.lattice.points.clone();
        let mut st = CoupledStepper::new(periodic_box(16), solid, 1e-3).unwrap();
        for i in 0..st.state.v.data[0].len() {
            st.state.v.data[0][i] = 1.0;
        }
        for _ in 0..5 {
            st.step().unwrap();
        }
        let mut worst = 0.0f64;
        for (l, x) in st.positions.iter().enumerate() {
            worst = worst.max((x[0] - reference[l][0] - 5e-3).abs());
            worst = worst.max((x[1] - reference[l][1]).abs());
        }
        assert!(worst <= 1e-12, "rigid translation off by {worst}");

        let chi = st.positions.clone();
        st.solid.assemble(&chi).unwrap();
        let fmax = st
            .solid
            .force
            .iter()
            .map(|f| f[0].abs().max(f[1].abs()))
            .fold(0.0f64, f64::max);
        assert!(fmax <= 1e-9, "translated block is not stress-free: {fmax}");
    }

    #[test]
    fn tether_pulls_a_displaced_block_back() {
        let solid = block_solid([0.375, 0.375], [0.625, 0.625], 1.0 / 32.0);
        let dt = 1e-3;
        let mut st = CoupledStepper::new(noslip_box(16), solid, dt).unwrap();
        let kappa = tether_stiffness(1.0, 1.0 / 16.0, dt);
        for l in 0..st.solid.lattice.len() {
            st.solid.lattice.tether_set[l] = Some(0);
        }
        st.tethers.push(Tether {
            tag: 0,
            mask: [true, true],
            stiffness: kappa,
            damping: tether_damping(kappa, 1.0),
            motion: TetherMotion::Hold,
        });
        let shift = 0.02;
        for x in st.positions.iter_mut() {
            x[0] += shift;
        }
        for _ in 0..150 {
            st.step().unwrap();
        }
        let mut worst = 0.0f64;
        for l in 0..st.positions.len() {
            let d = st.displacement(l);
            worst = worst.max((d[0] * d[0] + d[1] * d[1]).sqrt());
        }
        assert!(
            worst < 0.5 * shift,
            "tether failed to restore the block: residual {worst} vs initial {shift}"
        );
    }

    #[test]
    fn surface_load_moves_loaded_points_with_the_traction() {
        let solid = block_solid([0.25, 0.375], [0.75, 0.625], 1.0 / 32.0);
        let mut st = CoupledStepper::new(periodic_box(16), solid, 1e-3).unwrap();
        let top = 0.625 - 0.5 / 32.0;
        let mut loaded = Vec::new();
        for l in 0..st.solid.lattice.len() {
            if (st.solid.lattice.points[l][1] - top).abs() < 1e-12 {
                st.solid.lattice.load_set[l] = Some(0);
                loaded.push(l);
            }
        }
        assert!(!loaded.is_empty());
        st.loads.push(SurfaceLoad { tag: 0, traction: [0.0, -50.0], ramp: Ramp::Instant });
        st.step().unwrap();
        for &l in &loaded {
            let d = st.displacement(l);
            assert!(d[1] < 0.0, "loaded point {l} moved {d:?}, expected downward");
        }
    }

    #[test]
    fn rotation_target_traces_the_prescribed_angle() {
        let motion: TetherMotion<3> = TetherMotion::Rotate {
            center: [0.0, 1.0, 1.0],
            axis: 0,
            angle: std::f64::consts::PI,
            ramp: Ramp::Linear { t_load: 2.0 },
        };
        let x = [5.0, 2.0, 1.0];
        let quarter = motion.target(x, 0.5);
        assert!((quarter[0] - 5.0).abs() < 1e-12);
        let (dy, dz) = (quarter[1] - 1.0, quarter[2] - 1.0);
        let quarter_turn = std::f64::consts::FRAC_PI_4;
        assert!((dy - quarter_turn.cos()).abs() < 1e-12);
        assert!((dz - quarter_turn.sin()).abs() < 1e-12);
        let full = motion.target(x, 10.0);
        assert!((full[1] - 0.0).abs() < 1e-12, "half turn flips the offset");
        assert!((full[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nan_velocity_is_caught_with_a_phase_tag() {
        let solid = block_solid([0.25, 0.375], [0.75, 0.625], 1.0 / 32.0);
        let mut st = CoupledStepper::new(periodic_box(16), solid, 1e-3).unwrap();
        st.state.v.fill(f64::NAN);
        match st.step() {
            Err(SimError::Runtime(msg)) => {
                assert!(msg.contains("half-step advection"), "unexpected tag: {msg}")
            }
            other => panic!("expected a runtime error, got {other:?}"),
        }
    }
}
