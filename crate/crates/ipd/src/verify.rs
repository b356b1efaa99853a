//! Self-contained invariant suites runnable from the CLI at any time.
//!
//! Each suite measures a residual (or a convergence slope) against a fixed
//! threshold and reports it, so a reader sees magnitudes rather than bare
//! booleans. A fault-injection hook deliberately corrupts one suite's input
//! to demonstrate that the harness actually detects violations.

use crate::coupling::{interpolate, peskin4, spread};
use crate::fluid::{for_each_index, BcKind, BcSet, FluidSolver, Grid};
use crate::lattice::{build_horizons, build_lattice, HorizonSpec, Seeding};
use crate::material::Material;
use crate::math::Vect;
use crate::mechanics::PdSolid;
use crate::scenario::{build_2d, Params, ScenarioKind};
use crate::stepper::Ramp;
use crate::{Result, SimError};

/// One suite's outcome with the measured magnitude.
#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    /// Measured residual, or slope for convergence suites.
    pub measured: f64,
    pub threshold: f64,
    /// When true the measurement must reach at least the threshold
    /// (convergence slopes); otherwise it must stay at or below it.
    pub at_least: bool,
    pub passed: bool,
}

impl SuiteResult {
    fn at_most(name: &'static str, measured: f64, threshold: f64) -> SuiteResult {
        SuiteResult { name, measured, threshold, at_least: false, passed: measured <= threshold }
    }

    fn at_minimum(name: &'static str, measured: f64, threshold: f64) -> SuiteResult {
        SuiteResult { name, measured, threshold, at_least: true, passed: measured >= threshold }
    }
}

/// Full property-suite report.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let cmp = if s.at_least { ">=" } else { "<=" };
            out.push_str(&format!(
                "{} {:<24} measured {:>12.4e} {} {:.4e}\n",
                if s.passed { "PASS" } else { "FAIL" },
                s.name,
                s.measured,
                cmp,
                s.threshold
            ));
        }
        let failed = self.suites.iter().filter(|s| !s.passed).count();
        if failed == 0 {
            out.push_str(&format!("all {} suites passed\n", self.suites.len()));
        } else {
            out.push_str(&format!("{failed} of {} suites FAILED\n", self.suites.len()));
        }
        out
    }
}

pub const SUITES: [&str; 11] = [
    "adjointness",
    "partition_of_unity",
    "spread_conservation",
    "affine_exactness",
    "consistency_order",
    "force_balance",
    "stress_energy_fd",
    "post_solve_divergence",
    "oracle_equivalence",
    "quiescent_fixed_point",
    "load_ramp_endpoints",
];

/// Run every suite. `inject_fault` names one suite whose input is corrupted
/// on purpose; the run then must report that suite as failed.
pub fn run_all(inject_fault: Option<&str>) -> Result<VerifyReport> {
    if let Some(name) = inject_fault {
        if !SUITES.contains(&name) {
            return Err(SimError::Config(format!(
                "unknown suite \"{name}\"; expected one of {}",
                SUITES.join(", ")
            )));
        }
    }
    let fault = |name: &str| inject_fault == Some(name);
    let suites = vec![
        adjointness(fault("adjointness")),
        partition_of_unity(fault("partition_of_unity")),
        spread_conservation(fault("spread_conservation")),
        affine_exactness(fault("affine_exactness"))?,
        consistency_order(fault("consistency_order"))?,
        force_balance(fault("force_balance"))?,
        stress_energy_fd(fault("stress_energy_fd"))?,
        post_solve_divergence(fault("post_solve_divergence"))?,
        oracle_equivalence(fault("oracle_equivalence"))?,
        quiescent_fixed_point(fault("quiescent_fixed_point"))?,
        load_ramp_endpoints(fault("load_ramp_endpoints")),
    ];
    Ok(VerifyReport { suites })
}

/// Deterministic pseudo-random stream for test data; fixed constants keep
/// the report reproducible run to run.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64) / ((1u64 << 53) as f64)
    }

    fn signed(&mut self) -> f64 {
        2.0 * self.next() - 1.0
    }
}

fn box_solver(n: [usize; 2], h: f64) -> FluidSolver<2> {
    let grid = Grid::new([0.0, 0.0], n, h).unwrap();
    FluidSolver::new(grid, BcSet::uniform(BcKind::NoSlip), 1.0, 0.01).unwrap()
}

/// spread and interpolate must be adjoint with respect to the natural inner
/// products; the coupled scheme relies on it to conserve transferred power.
fn adjointness(fault: bool) -> SuiteResult {
    let fs = box_solver([14, 11], 0.5);
    let mut rng = Lcg(101);
    let pts: Vec<[f64; 2]> = (0..30)
        .map(|_| [1.2 + 4.0 * rng.next(), 1.2 + 3.0 * rng.next()])
        .collect();
    let force: Vec<[f64; 2]> = (0..30).map(|_| [rng.signed(), rng.signed()]).collect();
    let mut v = fs.new_face_field();
    for a in 0..2 {
        for x in v.data[a].iter_mut() {
            *x = rng.signed();
        }
    }
    let pvol = 0.25 * 0.25;
    let mut sf = fs.new_face_field();
    spread(&fs, &pts, &force, pvol, &mut sf).unwrap();
    let jv = interpolate(&fs, &v, &pts).unwrap();
    let cell = fs.grid.h * fs.grid.h;
    let lhs = sf.dot(&v) * cell;
    // the adjoint pairing weights structure terms by the point volume
    let bad = if fault { 1.0 + 1e-6 } else { 1.0 };
    let rhs: f64 = (0..pts.len())
        .map(|l| (force[l][0] * jv[l][0] + force[l][1] * jv[l][1]) * pvol * bad)
        .sum();
    let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300);
    SuiteResult::at_most("adjointness", rel, 1e-12)
}

/// The four-point kernel must sum to one over the integer lattice for every
/// offset; this is what makes interpolation reproduce constants.
fn partition_of_unity(fault: bool) -> SuiteResult {
    let scale = if fault { 1.001 } else { 1.0 };
    let mut worst = 0.0f64;
    for i in 0..=4000 {
        let r = -2.0 + 4.0 * (i as f64) / 4000.0;
        let mut s = 0.0;
        for k in -3..=3 {
            s += peskin4((r - k as f64) * scale);
        }
        worst = worst.max((s - 1.0).abs());
    }
    SuiteResult::at_most("partition_of_unity", worst, 1e-13)
}

/// Total force must survive the transfer to the grid exactly when the kernel
/// support stays inside the domain.
fn spread_conservation(fault: bool) -> SuiteResult {
    let fs = box_solver([16, 16], 0.25);
    let mut rng = Lcg(77);
    let pts: Vec<[f64; 2]> = (0..20)
        .map(|_| [1.0 + 2.0 * rng.next(), 1.0 + 2.0 * rng.next()])
        .collect();
    let force: Vec<[f64; 2]> = (0..20).map(|_| [rng.signed(), rng.signed()]).collect();
    let pvol = 0.125 * 0.125 * if fault { 1.0 + 1e-6 } else { 1.0 };
    let mut sf = fs.new_face_field();
    spread(&fs, &pts, &force, 0.125 * 0.125, &mut sf).unwrap();
    let cell = fs.grid.h * fs.grid.h;
    let mut rel = 0.0f64;
    for a in 0..2 {
        let total: f64 = sf.data[a].iter().sum::<f64>() * cell;
        let expect: f64 = force.iter().map(|f| f[a] * pvol).sum();
        rel = rel.max((total - expect).abs() / expect.abs().max(1e-300));
    }
    SuiteResult::at_most("spread_conservation", rel, 1e-12)
}

fn cubic_map_2d(x: Vect<2>) -> (Vect<2>, [[f64; 2]; 2]) {
    let (a, b, c) = (0.02, 0.015, 0.01);
    let y = [
        x[0] + a * x[0] * x[0] * x[0] + b * x[0] * x[1] * x[1],
        x[1] + c * x[1] * x[1] * x[1] - b * x[1] * x[0] * x[0],
    ];
    let grad = [
        [1.0 + 3.0 * a * x[0] * x[0] + b * x[1] * x[1], 2.0 * b * x[0] * x[1]],
        [-2.0 * b * x[0] * x[1], 1.0 + 3.0 * c * x[1] * x[1] - b * x[0] * x[0]],
    ];
    (y, grad)
}

/// The nonlocal deformation gradient must reproduce affine maps to rounding,
/// independent of horizon size or influence weights.
fn affine_exactness(fault: bool) -> Result<SuiteResult> {
    let lat = build_lattice([0.0, 0.0], [1.0, 0.75], 0.25 / 3.0, Seeding::NodeCentered, |_| true)?;
    let bonds = build_horizons(&lat, &HorizonSpec::new(2.015))?;
    let mut solid = PdSolid::new(lat, bonds, Material::neo_hookean(1.0, 0.3)?, None)?;
    let amap = [[1.08, 0.13], [-0.07, 0.94]];
    let shift = [0.3, -0.2];
    let mut rng = Lcg(5);
    let chi: Vec<Vect<2>> = solid
        .lattice
        .points
        .iter()
        .map(|x| {
            let jitter = if fault { 1e-6 * rng.signed() } else { 0.0 };
            [
                amap[0][0] * x[0] + amap[0][1] * x[1] + shift[0] + jitter,
                amap[1][0] * x[0] + amap[1][1] * x[1] + shift[1],
            ]
        })
        .collect();
    solid.assemble(&chi)?;
    let mut worst = 0.0f64;
    for l in 0..solid.n_points() {
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((solid.def_grad[l][r][c] - amap[r][c]).abs());
            }
        }
    }
    Ok(SuiteResult::at_most("affine_exactness", worst, 1e-12))
}

/// Under joint refinement of spacing and horizon the nonlocal gradient of a
/// smooth map converges at second order in the horizon radius.
fn consistency_order(fault: bool) -> Result<SuiteResult> {
    let mut errs = Vec::new();
    let mut epss = Vec::new();
    for n in [8usize, 16, 32] {
        let dx = 1.0 / n as f64;
        let lat = build_lattice([0.0, 0.0], [1.0, 1.0], dx, Seeding::NodeCentered, |_| true)?;
        let bonds = build_horizons(&lat, &HorizonSpec::new(2.015))?;
        let mut solid = PdSolid::new(lat, bonds, Material::neo_hookean(1.0, 0.3)?, None)?;
        let chi: Vec<Vect<2>> =
            solid.lattice.points.iter().map(|&x| cubic_map_2d(x).0).collect();
        solid.assemble(&chi)?;
        // fixed interior physical point present at every resolution
        let target = [0.5, 0.5];
        let l = solid
            .lattice
            .points
            .iter()
            .position(|p| (p[0] - target[0]).abs() < 1e-12 && (p[1] - target[1]).abs() < 1e-12)
            .expect("node at the probe location");
        let exact = cubic_map_2d(target).1;
        let mut e = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                e = e.max((solid.def_grad[l][r][c] - exact[r][c]).abs());
            }
        }
        if fault && n == 32 {
            e += 1e-4; // error floor that flattens the observed order
        }
        errs.push(e.max(1e-300).ln());
        epss.push((2.015 * dx).ln());
    }
    // least-squares slope of ln(error) against ln(horizon)
    let n = errs.len() as f64;
    let mx = epss.iter().sum::<f64>() / n;
    let my = errs.iter().sum::<f64>() / n;
    let cov: f64 = epss.iter().zip(&errs).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = epss.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = cov / var;
    Ok(SuiteResult::at_minimum("consistency_order", slope, 1.9))
}

/// Internal forces come in antisymmetric pairs, so the volume-weighted sum
/// over a free body must vanish.
fn force_balance(fault: bool) -> Result<SuiteResult> {
    let lat = build_lattice([0.0, 0.0], [1.0, 0.5], 1.0 / 24.0, Seeding::CellCentered, |_| true)?;
    let bonds = build_horizons(&lat, &HorizonSpec::new(2.015))?;
    let mut solid = PdSolid::new(lat, bonds, Material::neo_hookean(10.0, 0.3)?, None)?;
    let chi: Vec<Vect<2>> = solid.lattice.points.iter().map(|&x| cubic_map_2d(x).0).collect();
    solid.assemble(&chi)?;
    let mut total = [0.0f64; 2];
    let mut scale = 0.0f64;
    for l in 0..solid.n_points() {
        for a in 0..2 {
            total[a] += solid.force[l][a];
            scale += solid.force[l][a].abs();
        }
    }
    if fault {
        total[0] += scale * 1e-8;
    }
    let rel = total.iter().map(|t| t.abs()).fold(0.0f64, f64::max) / scale.max(1e-300);
    Ok(SuiteResult::at_most("force_balance", rel, 1e-10))
}

/// The first Piola stress must be the gradient of the strain energy; checked
/// by central differences for both material models in both dimensions.
fn stress_energy_fd(fault: bool) -> Result<SuiteResult> {
    let mats = [Material::neo_hookean(80.0, 0.4)?, Material::mooney_rivlin(90.0, 60.0, 0.4)?];
    let mut worst = 0.0f64;
    let mut rng = Lcg(31);
    for mat in &mats {
        worst = worst.max(fd_gradient_gap::<2>(mat, &mut rng, fault)?);
        worst = worst.max(fd_gradient_gap::<3>(mat, &mut rng, false)?);
    }
    Ok(SuiteResult::at_most("stress_energy_fd", worst, 1e-6))
}

fn fd_gradient_gap<const D: usize>(mat: &Material, rng: &mut Lcg, fault: bool) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let mut f = [[0.0f64; D]; D];
        for (r, row) in f.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = if r == c { 1.0 } else { 0.0 };
                *v += 0.2 * rng.signed();
            }
        }
        let p = mat
            .first_piola(f)
            .map_err(|e| SimError::Runtime(format!("probe deformation rejected: {e}")))?;
        let step = 1e-6;
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for r in 0..D {
            for c in 0..D {
                let mut fp = f;
                let mut fm = f;
                fp[r][c] += step;
                fm[r][c] -= step;
                let wp = mat.energy(fp).map_err(|e| SimError::Runtime(format!("{e}")))?;
                let wm = mat.energy(fm).map_err(|e| SimError::Runtime(format!("{e}")))?;
                let fd = (wp - wm) / (2.0 * step);
                let an = p[r][c] * if fault { 1.0 + 1e-4 } else { 1.0 };
                num += (fd - an) * (fd - an);
                den += an * an;
            }
        }
        worst = worst.max((num / den.max(1e-300)).sqrt());
    }
    Ok(worst)
}

/// After the iterated pressure projection the discrete velocity field must
/// be divergence-free to solver tolerance.
fn post_solve_divergence(fault: bool) -> Result<SuiteResult> {
    let grid = Grid::new([0.0, 0.0], [16, 16], 1.0 / 16.0)?;
    let mut fs = FluidSolver::new(grid, BcSet::uniform(BcKind::NoSlip), 1.0, 0.02)?;
    let mut st = fs.new_state();
    let mut f = fs.new_face_field();
    for a in 0..2 {
        let dims = f.dims[a];
        for_each_index(dims, |iv| {
            let x = fs.grid.face_pos(a, iv);
            let swirl = (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).cos();
            let i = f.idx(a, iv);
            f.data[a][i] = if a == 0 { swirl } else { -swirl } * 1e-3;
        });
    }
    fs.step(&mut st, &f, 1e-3)?;
    fs.step(&mut st, &f, 1e-3)?;
    if fault {
        let i = st.v.idx(0, [8, 8]);
        st.v.data[0][i] += 1e-6;
    }
    let mut div = vec![0.0; fs.grid.cells()];
    fs.divergence(&st.v, &mut div);
    let worst = div.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    Ok(SuiteResult::at_most("post_solve_divergence", worst, 1e-8))
}

/// Assembled internal forces must match an independently coded double-loop
/// evaluation of the same pairwise formula on a small lattice.
fn oracle_equivalence(fault: bool) -> Result<SuiteResult> {
    let lat = build_lattice([0.0, 0.0], [0.5, 0.375], 1.0 / 8.0, Seeding::NodeCentered, |_| true)?;
    let bonds = build_horizons(&lat, &HorizonSpec::new(2.015))?;
    let mat = Material::neo_hookean(25.0, 0.35)?;
    let mut solid = PdSolid::new(lat, bonds, mat, None)?;
    let chi: Vec<Vect<2>> = solid.lattice.points.iter().map(|&x| cubic_map_2d(x).0).collect();
    solid.assemble(&chi)?;

    let oracle = oracle_forces(&solid, &chi)?;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for l in 0..solid.n_points() {
        for a in 0..2 {
            let got = solid.force[l][a];
            let want = oracle[l][a] * if fault { 1.0 + 1e-9 } else { 1.0 };
            worst = worst.max((got - want).abs());
            scale = scale.max(want.abs());
        }
    }
    Ok(SuiteResult::at_most("oracle_equivalence", worst / scale.max(1e-300), 1e-13))
}

/// Direct transcription of the pairwise force density: independent loops,
/// matrices built longhand, no shared code with `assemble` beyond the bond
/// graph itself.
fn oracle_forces(solid: &PdSolid<2>, chi: &[Vect<2>]) -> Result<Vec<Vect<2>>> {
    let n = solid.n_points();
    let lat = &solid.lattice;
    let bonds = &solid.bonds;
    let mut amats = vec![[[0.0f64; 2]; 2]; n];
    for l in 0..n {
        // shape tensor
        let mut k = [[0.0f64; 2]; 2];
        for b in bonds.range(l) {
            let w = bonds.weight[b] * bonds.cvol[b];
            let xi = bonds.xi[b];
            for r in 0..2 {
                for c in 0..2 {
                    k[r][c] += w * xi[r] * xi[c];
                }
            }
        }
        let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
        let kinv = [[k[1][1] / det, -k[0][1] / det], [-k[1][0] / det, k[0][0] / det]];
        // deformation gradient
        let mut m = [[0.0f64; 2]; 2];
        for b in bonds.range(l) {
            let w = bonds.weight[b] * bonds.cvol[b];
            let mnb = bonds.neighbor[b] as usize;
            let y = [chi[mnb][0] - chi[l][0], chi[mnb][1] - chi[l][1]];
            let xi = bonds.xi[b];
            for r in 0..2 {
                for c in 0..2 {
                    m[r][c] += w * y[r] * xi[c];
                }
            }
        }
        let mut fg = [[0.0f64; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                fg[r][c] = m[r][0] * kinv[0][c] + m[r][1] * kinv[1][c];
            }
        }
        let p = solid
            .material
            .first_piola(fg)
            .map_err(|e| SimError::Runtime(format!("oracle stress: {e}")))?;
        for r in 0..2 {
            for c in 0..2 {
                amats[l][r][c] = p[r][0] * kinv[0][c] + p[r][1] * kinv[1][c];
            }
        }
        let _ = lat;
    }
    let mut out = vec![[0.0f64; 2]; n];
    for l in 0..n {
        for b in bonds.range(l) {
            let m = bonds.neighbor[b] as usize;
            let w = bonds.weight[b] * bonds.cvol[b];
            let xi = bonds.xi[b];
            for r in 0..2 {
                let t =
                    (amats[l][r][0] + amats[m][r][0]) * xi[0] + (amats[l][r][1] + amats[m][r][1]) * xi[1];
                out[l][r] += w * t;
            }
        }
    }
    Ok(out)
}

/// A quiescent stress-free coupled state must stay exactly quiescent.
fn quiescent_fixed_point(fault: bool) -> Result<SuiteResult> {
    let mut p = Params::defaults(ScenarioKind::BandDynamic, 2);
    p.load = 0.0;
    let mut setup = build_2d(&p)?;
    if fault {
        setup.stepper.positions[10][0] += 1e-13;
    }
    for _ in 0..3 {
        setup.stepper.step().map_err(|e| SimError::Runtime(format!("{e}")))?;
    }
    let mut worst = setup.stepper.fluid.max_abs_velocity(&setup.stepper.state.v);
    for l in 0..setup.stepper.positions.len() {
        let d = setup.stepper.displacement(l);
        worst = worst.max(d[0].abs()).max(d[1].abs());
    }
    Ok(SuiteResult::at_most("quiescent_fixed_point", worst, 1e-14))
}

/// Ramps must take their endpoint values exactly.
fn load_ramp_endpoints(fault: bool) -> SuiteResult {
    let probe = if fault { 1e-9 } else { 0.0 };
    let mut worst = 0.0f64;
    for ramp in [
        Ramp::Cubic { t_load: 7.0 },
        Ramp::Linear { t_load: 7.0 },
        Ramp::HalfSine { t_load: 7.0 },
    ] {
        worst = worst.max(ramp.value(probe).abs());
        worst = worst.max((ramp.value(7.0) - 1.0).abs());
        worst = worst.max((ramp.value(100.0) - 1.0).abs());
    }
    worst = worst.max((Ramp::Instant.value(0.0) - 1.0).abs());
    SuiteResult::at_most("load_ramp_endpoints", worst, 0.0)
}
