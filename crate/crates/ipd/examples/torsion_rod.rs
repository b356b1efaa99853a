//! Torsion of a soft rod, the one three-dimensional case.
//!
//! A square-section rod is held at its base while the far end is twisted
//! through 2.5 pi radians by a rotating tether constraint. Incompressibility
//! makes the rod shorten as it twists; the observable is the displacement
//! magnitude of the free-end center point (about 0.27 cm at fine
//! resolution). Coarse defaults keep the runtime to minutes; expect hours at
//! resolutions fine enough to match the benchmark figure.
//!
//! Usage: torsion_rod [resolution] [t_final_s]

use ipd::run::run_setup;
use ipd::scenario::{build_3d, Params, ScenarioKind};

fn main() -> ipd::Result<()> {
    let mut args = std::env::args().skip(1);
    let resolution: usize = args.next().map(|a| a.parse().unwrap()).unwrap_or(2);
    let t_final: f64 = args.next().map(|a| a.parse().unwrap()).unwrap_or(5.0);

    let mut p = Params::defaults(ScenarioKind::Torsion, resolution);
    p.t_final = t_final;
    let setup = build_3d(&p)?;
    println!(
        "torsion rod: {} points, twist {:.3} rad over {} s",
        setup.solid_dof(),
        p.angle_rad,
        p.t_load
    );

    let out = run_setup(setup)?;
    let dx = out.series.last("top_center_dx_cm").unwrap();
    let dy = out.series.last("top_center_dy_cm").unwrap();
    let dz = out.series.last("top_center_dz_cm").unwrap();
    let mag = (dx * dx + dy * dy + dz * dz).sqrt();
    println!("end-center displacement ({dx:+.4}, {dy:+.4}, {dz:+.4}) cm, magnitude {mag:.4} cm");
    println!(
        "volume change {:.4}%, {} steps, {:.1} s wall",
        out.series.last("volume_change_pct").unwrap(),
        out.steps,
        out.wall_seconds
    );
    Ok(())
}
