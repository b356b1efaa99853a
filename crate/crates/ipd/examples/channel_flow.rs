//! The fluid solver alone: traction-driven channel flow.
//!
//! No structure, just the staggered-grid solver. A normal-stress difference
//! between the channel ends drives flow between two no-slip walls; the
//! steady solution is the parabolic Poiseuille profile with centerline speed
//! dp L_y^2 / (8 mu L_x). The example integrates to steady state and prints
//! the largest deviation from the exact profile.

use ipd::fluid::{BcKind, BcSet, FluidSolver, Grid};

fn main() -> ipd::Result<()> {
    let (lx, ly) = (1.0, 0.5);
    let n = 32;
    let h = ly / n as f64;
    let (rho, mu, dp) = (1.0, 0.1, 4.0);

    let grid = Grid::new([0.0, 0.0], [2 * n, n], h)?;
    let mut bc = BcSet::uniform(BcKind::NoSlip);
    bc.side[0] = [BcKind::Traction, BcKind::Traction];
    let mut solver = FluidSolver::new(grid, bc, rho, mu)?;
    solver.traction[0][0] = -dp; // normal stress -p + 2 mu du/dx = -dp at inflow
    let mut state = solver.new_state();

    let f = solver.new_face_field();
    let dt = 0.2 * h;
    let mut t = 0.0;
    while t < 40.0 {
        solver.step(&mut state, &f, dt)?;
        t += dt;
    }

    let exact = |y: f64| dp / (2.0 * mu * lx) * y * (ly - y);
    let mut worst = 0.0f64;
    for j in 0..n {
        let y = (j as f64 + 0.5) * h;
        let mid = state.v.get(0, [n, j]);
        worst = worst.max((mid - exact(y)).abs());
    }
    println!(
        "centerline speed {:.5} cm/s (exact {:.5})",
        state.v.get(0, [n, n / 2]),
        exact((n / 2) as f64 * h + 0.5 * h)
    );
    println!("largest profile error {worst:.2e} cm/s after t = {t:.1} s");
    Ok(())
}
