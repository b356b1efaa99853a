//! Sensitivity of the compression benchmark to the horizon radius.
//!
//! The nonlocal deformation gradient averages over a neighborhood of
//! `horizon_factor` lattice spacings. This sweep reruns the coarse
//! compression case at three radii and tabulates the steady displacement;
//! the observable should vary only mildly, with the crudest one-spacing
//! horizon expected to be the outlier.

use ipd::config::Config;
use ipd::run::{sweep, sweep_csv, SweepAxis};

fn main() -> ipd::Result<()> {
    let mut base = Config::new("compression", 8);
    base.t_final_s = Some(150.0);

    let rows = sweep(&base, SweepAxis::Horizon, &[1.015, 2.015, 3.015])?;
    print!("{}", sweep_csv(SweepAxis::Horizon, &rows));
    Ok(())
}
