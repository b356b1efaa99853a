//! Result persistence: time-series CSV, legacy ASCII VTK snapshots, and the
//! run manifest with file checksums.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::fluid::{FluidSolver, FluidState};
use crate::math::Vect;
use crate::mechanics::PdSolid;
use crate::{Result, SimError};

/// In-memory time series with a fixed column set.
#[derive(Clone, Debug)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: Vec<String>) -> Series {
        Series { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width matches the header");
        self.rows.push(row);
    }

    /// Column values by header name.
    pub fn col(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Last value of a column.
    pub fn last(&self, name: &str) -> Option<f64> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows.last().map(|r| r[i])
    }

    /// RFC 4180 style text: header row then one record per sample. Floats
    /// use the shortest representation that round-trips, so files are
    /// byte-stable across identical runs.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn vtk_header(title: &str) -> String {
    format!("# vtk DataFile Version 3.0\n{title}\nASCII\n")
}

fn push_triple(out: &mut String, v: &[f64]) {
    for a in 0..3 {
        if a > 0 {
            out.push(' ');
        }
        write!(out, "{}", v.get(a).copied().unwrap_or(0.0)).unwrap();
    }
    out.push('\n');
}

/// Eulerian snapshot: pressure and cell-averaged velocity on the grid as a
/// legacy VTK structured-points dataset with cell data.
pub fn vtk_fluid<const D: usize>(fs: &FluidSolver<D>, st: &FluidState<D>) -> String {
    let g = &fs.grid;
    let mut out = vtk_header("fluid state");
    out.push_str("DATASET STRUCTURED_POINTS\n");
    let dims: [usize; 3] = std::array::from_fn(|a| if a < D { g.n[a] + 1 } else { 2 - D % 2 });
    let dims = if D == 2 { [g.n[0] + 1, g.n[1] + 1, 1] } else { dims };
    writeln!(out, "DIMENSIONS {} {} {}", dims[0], dims[1], dims[2]).unwrap();
    let lo: [f64; 3] = std::array::from_fn(|a| if a < D { g.lo[a] } else { 0.0 });
    writeln!(out, "ORIGIN {} {} {}", lo[0], lo[1], lo[2]).unwrap();
    writeln!(out, "SPACING {} {} {}", g.h, g.h, g.h).unwrap();
    writeln!(out, "CELL_DATA {}", g.cells()).unwrap();

    out.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    for &p in &st.p {
        writeln!(out, "{p}").unwrap();
    }

    out.push_str("VECTORS velocity double\n");
    crate::fluid::for_each_index(g.n, |iv| {
        let mut v = [0.0f64; 3];
        for a in 0..D {
            let mut hi = iv;
            hi[a] = (iv[a] + 1) % st.v.dims[a][a];
            v[a] = 0.5 * (st.v.get(a, iv) + st.v.get(a, hi));
        }
        push_triple(&mut out, &v);
    });
    out
}

/// Lagrangian snapshot: structure points with volume ratio, damage, and
/// displacement, as legacy VTK polydata.
pub fn vtk_structure<const D: usize>(solid: &PdSolid<D>, positions: &[Vect<D>]) -> String {
    let n = solid.n_points();
    let mut out = vtk_header("structure state");
    out.push_str("DATASET POLYDATA\n");
    writeln!(out, "POINTS {n} double").unwrap();
    for p in positions {
        push_triple(&mut out, p);
    }
    writeln!(out, "VERTICES {n} {}", 2 * n).unwrap();
    for l in 0..n {
        writeln!(out, "1 {l}").unwrap();
    }
    writeln!(out, "POINT_DATA {n}").unwrap();
    out.push_str("SCALARS volume_ratio double 1\nLOOKUP_TABLE default\n");
    for &j in &solid.jac {
        writeln!(out, "{j}").unwrap();
    }
    out.push_str("SCALARS damage double 1\nLOOKUP_TABLE default\n");
    for l in 0..n {
        writeln!(out, "{}", solid.damage(l)).unwrap();
    }
    out.push_str("VECTORS displacement double\n");
    for l in 0..n {
        let d: Vec<f64> = (0..D).map(|a| positions[l][a] - solid.lattice.points[l][a]).collect();
        push_triple(&mut out, &d);
    }
    out
}

/// One entry of the manifest's output inventory.
#[derive(Clone, Debug, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Reproducibility record written at the end of every run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    /// Full post-defaults configuration; parsing it back reproduces the run.
    pub config: Config,
    pub code_version: String,
    pub verify_mode: bool,
    pub wall_clock_s: f64,
    pub steps: usize,
    pub time_step_s: f64,
    pub final_time_s: f64,
    pub reached_steady: bool,
    pub solid_dof: usize,
    pub warnings: Vec<String>,
    pub files: Vec<FileRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").unwrap();
    }
    out
}

fn io_err(path: &Path, e: std::io::Error) -> SimError {
    SimError::Runtime(format!("cannot write {}: {e}", path.display()))
}

/// Write a file through a temporary sibling and rename, so readers never see
/// a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.to_path_buf();
    tmp.set_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Sink that accumulates output files in a directory and records the
/// inventory for the manifest.
pub struct OutputDir {
    pub dir: PathBuf,
    pub files: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<OutputDir> {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(OutputDir { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_atomic(&path, content.as_bytes())?;
        self.files.push(FileRecord {
            name: name.to_string(),
            bytes: content.len(),
            sha256: sha256_hex(content.as_bytes()),
        });
        Ok(())
    }

    /// Write the manifest last; it lists every previously written file.
    pub fn finish(mut self, mut manifest: RunManifest) -> Result<()> {
        manifest.files = std::mem::take(&mut self.files);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        write_atomic(&self.dir.join("manifest.json"), text.as_bytes())
    }
}
