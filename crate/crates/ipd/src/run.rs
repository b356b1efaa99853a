//! Run driver: advances a scenario to its final time or steady state,
//! sampling observables on a fixed cadence and optionally persisting
//! artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::Config;
use crate::output::{vtk_fluid, vtk_structure, OutputDir, RunManifest, Series};
use crate::scenario::{build_2d, build_3d, Params, ScenarioKind, Setup};
use crate::{Result, SimError};

/// How many consecutive sub-threshold steps count as steady.
const STEADY_STEPS: usize = 100;

/// Completed run with the final state retained for inspection.
pub struct RunOutcome<const D: usize> {
    pub setup: Setup<D>,
    pub series: Series,
    pub steps: usize,
    pub reached_steady: bool,
    pub wall_seconds: f64,
    /// Largest advective CFL number seen over the run.
    pub max_cfl: f64,
    pub broken_pairs_total: usize,
    /// Time and reference midpoints of the first breakage event.
    pub first_break: Option<(f64, Vec<Vec<f64>>)>,
    pub warnings: Vec<String>,
}

fn column_names<const D: usize>(setup: &Setup<D>) -> Vec<String> {
    let comp = ["dx_cm", "dy_cm", "dz_cm"];
    let mut cols = vec!["t_s".to_string()];
    for p in &setup.tracked {
        for c in comp.iter().take(D) {
            cols.push(format!("{}_{}", p.label, c));
        }
    }
    cols.push("volume_change_pct".into());
    for p in &setup.damage_probes {
        cols.push(format!("damage_{}", p.label));
    }
    cols.push("kinetic_energy_erg".into());
    cols
}

fn sample_row<const D: usize>(setup: &Setup<D>) -> Vec<f64> {
    let st = &setup.stepper;
    let mut row = Vec::with_capacity(2 + D * setup.tracked.len() + setup.damage_probes.len());
    row.push(st.time);
    for p in &setup.tracked {
        row.extend_from_slice(&st.displacement(p.index));
    }
    row.push(st.solid.volume_change_pct_of(&setup.volume_points));
    for p in &setup.damage_probes {
        row.push(st.solid.damage(p.index));
    }
    row.push(st.fluid.kinetic_energy(&st.state.v));
    row
}

/// Run to completion without artifacts.
pub fn run_setup<const D: usize>(setup: Setup<D>) -> Result<RunOutcome<D>> {
    run_setup_with(setup, |_, _| Ok(()))
}

/// Run to completion, invoking `on_sample` after every recorded sample
/// (not the initial one) with the live setup and the step count.
pub fn run_setup_with<const D: usize>(
    mut setup: Setup<D>,
    mut on_sample: impl FnMut(&Setup<D>, usize) -> Result<()>,
) -> Result<RunOutcome<D>> {
    let start = Instant::now();
    let dt = setup.stepper.dt;
    let sample_every = if setup.output_every > 0.0 {
        ((setup.output_every / dt).round() as usize).max(1)
    } else {
        1
    };

    let mut series = Series::new(column_names(&setup));
    series.push(sample_row(&setup));

    let mut steps = 0usize;
    let mut last_sampled = 0usize;
    let mut steady_run = 0usize;
    let mut reached_steady = false;
    let mut max_cfl = 0.0f64;
    let mut cfl_warned = false;
    let mut broken_total = 0usize;
    let mut first_break: Option<(f64, Vec<Vec<f64>>)> = None;
    let mut warnings = Vec::new();

    while setup.stepper.time + 0.5 * dt < setup.t_final {
        let report = setup.stepper.step()?;
        steps += 1;
        max_cfl = max_cfl.max(report.fluid.cfl);
        if report.fluid.cfl > 0.5 && !cfl_warned {
            cfl_warned = true;
            warnings.push(format!(
                "advective CFL reached {:.3} at t = {:.6} s; results may be inaccurate",
                report.fluid.cfl, setup.stepper.time
            ));
        }
        if report.broken_pairs > 0 {
            broken_total += report.broken_pairs;
            if first_break.is_none() {
                first_break = Some((setup.stepper.time, report.broken_midpoints.clone()));
            }
        }

        if steps % sample_every == 0 {
            series.push(sample_row(&setup));
            last_sampled = steps;
            on_sample(&setup, steps)?;
        }

        if setup.steady_speed > 0.0 && setup.stepper.time > setup.t_load {
            if report.max_point_speed < setup.steady_speed {
                steady_run += 1;
                if steady_run >= STEADY_STEPS {
                    reached_steady = true;
                    break;
                }
            } else {
                steady_run = 0;
            }
        }
    }

    if steps > 0 && last_sampled != steps {
        series.push(sample_row(&setup));
        on_sample(&setup, steps)?;
    }

    Ok(RunOutcome {
        setup,
        series,
        steps,
        reached_steady,
        wall_seconds: start.elapsed().as_secs_f64(),
        max_cfl,
        broken_pairs_total: broken_total,
        first_break,
        warnings,
    })
}

/// What the CLI reports after a persisted run.
#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub scenario: String,
    pub steps: usize,
    pub final_time_s: f64,
    pub reached_steady: bool,
    pub wall_seconds: f64,
    /// Final displacement components per tracked probe.
    pub tracked: Vec<(String, Vec<f64>)>,
    pub volume_change_pct: f64,
    pub broken_pairs_total: usize,
    pub warnings: Vec<String>,
}

/// Execute a resolved scenario and write series.csv, VTK snapshots, and
/// manifest.json into `out`. Progress goes to stderr unless `quiet`.
pub fn run_to_dir(
    params: &Params,
    out: &Path,
    verify_mode: bool,
    quiet: bool,
) -> Result<RunSummary> {
    match params.kind.dim() {
        2 => run_dir_typed(params, build_2d(params)?, out, verify_mode, quiet),
        _ => run_dir_typed(params, build_3d(params)?, out, verify_mode, quiet),
    }
}

fn run_dir_typed<const D: usize>(
    params: &Params,
    setup: Setup<D>,
    out: &Path,
    verify_mode: bool,
    quiet: bool,
) -> Result<RunSummary> {
    let start = Instant::now();
    let mut dir = OutputDir::create(out)?;
    let mut snap = 0usize;
    let write_snapshot = |dir: &mut OutputDir, s: &Setup<D>, snap: &mut usize| -> Result<()> {
        dir.write(&format!("fluid_{snap:05}.vtk"), &vtk_fluid(&s.stepper.fluid, &s.stepper.state))?;
        dir.write(&format!("structure_{snap:05}.vtk"), &vtk_structure(&s.stepper.solid, &s.stepper.positions))?;
        *snap += 1;
        Ok(())
    };
    write_snapshot(&mut dir, &setup, &mut snap)?;

    let fields_dt = params.fields_every.unwrap_or(0.0);
    let mut next_field = if fields_dt > 0.0 { fields_dt } else { f64::INFINITY };
    let dt = setup.stepper.dt;
    let total_steps = (setup.t_final / dt).ceil() as usize;
    let progress_every = (total_steps / 20).max(1);
    let mut next_progress = progress_every;
    let label = params.kind.name().to_string();

    let outcome = run_setup_with(setup, |s, step| {
        if s.stepper.time + 1e-12 >= next_field {
            write_snapshot(&mut dir, s, &mut snap)?;
            while next_field <= s.stepper.time + 1e-12 {
                next_field += fields_dt;
            }
        }
        if !quiet && step >= next_progress {
            next_progress += progress_every;
            let d = s.stepper.displacement(s.tracked[0].index);
            let mag = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            eprintln!(
                "[{label}] t = {:.4}/{} s, step {step}, |d| = {mag:.4} cm",
                s.stepper.time, s.t_final
            );
        }
        Ok(())
    })?;

    // Always capture the end state, even if the cadence just fired; the
    // final pair of snapshots is what post-processing reaches for first.
    write_snapshot(&mut dir, &outcome.setup, &mut snap)?;
    dir.write("series.csv", &outcome.series.to_csv())?;

    let tracked: Vec<(String, Vec<f64>)> = outcome
        .setup
        .tracked
        .iter()
        .map(|p| (p.label.clone(), outcome.setup.stepper.displacement(p.index).to_vec()))
        .collect();
    let volume_change_pct =
        outcome.setup.stepper.solid.volume_change_pct_of(&outcome.setup.volume_points);

    let manifest = RunManifest {
        scenario: label.clone(),
        config: Config::from_params(params),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        verify_mode,
        wall_clock_s: start.elapsed().as_secs_f64(),
        steps: outcome.steps,
        time_step_s: dt,
        final_time_s: outcome.setup.stepper.time,
        reached_steady: outcome.reached_steady,
        solid_dof: outcome.setup.solid_dof(),
        warnings: outcome.warnings.clone(),
        files: Vec::new(),
    };
    dir.finish(manifest)?;

    Ok(RunSummary {
        out_dir: out.to_path_buf(),
        scenario: label,
        steps: outcome.steps,
        final_time_s: outcome.setup.stepper.time,
        reached_steady: outcome.reached_steady,
        wall_seconds: outcome.wall_seconds,
        tracked,
        volume_change_pct,
        broken_pairs_total: outcome.broken_pairs_total,
        warnings: outcome.warnings,
    })
}

/// Time of the first local maximum of |x(t)|: the peak is committed once the
/// magnitude falls below 80% of the running maximum.
pub fn first_peak_time(t: &[f64], x: &[f64]) -> Option<f64> {
    let mut best = 0.0f64;
    let mut best_t = None;
    for (&ti, &xi) in t.iter().zip(x) {
        let a = xi.abs();
        if a > best {
            best = a;
            best_t = Some(ti);
        } else if best > 0.0 && a < 0.8 * best {
            return best_t;
        }
    }
    None
}

/// Sweep axes: lattice resolution, horizon factor, or numerical Poisson
/// ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Resolution,
    Horizon,
    NuStab,
}

impl SweepAxis {
    pub fn parse(name: &str) -> Result<SweepAxis> {
        Ok(match name {
            "N" | "resolution" => SweepAxis::Resolution,
            "epsilon" | "horizon" => SweepAxis::Horizon,
            "nu_stab" => SweepAxis::NuStab,
            other => {
                return Err(SimError::Config(format!(
                    "unknown sweep axis \"{other}\"; expected N, epsilon, or nu_stab"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Resolution => "N",
            SweepAxis::Horizon => "epsilon",
            SweepAxis::NuStab => "nu_stab",
        }
    }
}

/// One sweep run's record.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub value: f64,
    /// Scenario headline observable; NaN when the run failed.
    pub observable: f64,
    pub volume_change_pct: f64,
    pub runtime_s: f64,
    /// "ok" or the error text.
    pub status: String,
}

fn headline<const D: usize>(kind: ScenarioKind, out: &RunOutcome<D>) -> f64 {
    let label = &out.setup.tracked[0].label;
    let last = |c: &str| out.series.last(&format!("{label}_{c}")).unwrap_or(f64::NAN);
    match kind {
        ScenarioKind::Compression => last("dy_cm").abs(),
        ScenarioKind::CooksMembrane => last("dy_cm"),
        ScenarioKind::Torsion => {
            let d: f64 = ["dx_cm", "dy_cm", "dz_cm"]
                .iter()
                .map(|c| last(c).powi(2))
                .sum();
            d.sqrt()
        }
        ScenarioKind::BandDynamic => {
            let t = out.series.col("t_s").unwrap_or_default();
            let x = out.series.col(&format!("{label}_dx_cm")).unwrap_or_default();
            first_peak_time(&t, &x).unwrap_or(f64::NAN)
        }
        _ => last("dx_cm").abs(),
    }
}

fn run_headline(params: &Params) -> Result<(f64, f64, f64)> {
    Ok(if params.kind.dim() == 2 {
        let out = run_setup(build_2d(params)?)?;
        let vol = out.setup.stepper.solid.volume_change_pct_of(&out.setup.volume_points);
        (headline(params.kind, &out), vol, out.wall_seconds)
    } else {
        let out = run_setup(build_3d(params)?)?;
        let vol = out.setup.stepper.solid.volume_change_pct_of(&out.setup.volume_points);
        (headline(params.kind, &out), vol, out.wall_seconds)
    })
}

/// Run the scenario once per axis value. Per-run failures are recorded in
/// the row status and the sweep continues.
pub fn sweep(base: &Config, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(SimError::Config("sweep needs at least one value".into()));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let mut cfg = base.clone();
        let prepared: Result<Params> = (|| {
            match axis {
                SweepAxis::Resolution => {
                    if value < 1.0 || value.fract() != 0.0 {
                        return Err(SimError::Config(format!(
                            "resolution sweep values must be positive integers, got {value}"
                        )));
                    }
                    cfg.resolution = value as usize;
                }
                SweepAxis::Horizon => cfg.horizon_factor = Some(value),
                SweepAxis::NuStab => cfg.nu_stab = Some(value),
            }
            cfg.resolve()
        })();
        let row = match prepared.and_then(|p| run_headline(&p)) {
            Ok((observable, volume_change_pct, runtime_s)) => SweepRow {
                value,
                observable,
                volume_change_pct,
                runtime_s,
                status: "ok".into(),
            },
            Err(e) => SweepRow {
                value,
                observable: f64::NAN,
                volume_change_pct: f64::NAN,
                runtime_s: 0.0,
                status: format!("{e}"),
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

/// RFC 4180 style sweep table.
pub fn sweep_csv(axis: SweepAxis, rows: &[SweepRow]) -> String {
    let mut out = format!("{},observable,volume_change_pct,runtime_s,status\n", axis.name());
    for r in rows {
        let status = if r.status.contains([',', '"', '\n']) {
            format!("\"{}\"", r.status.replace('"', "\"\""))
        } else {
            r.status.clone()
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.value, r.observable, r.volume_change_pct, r.runtime_s, status
        ));
    }
    out
}
