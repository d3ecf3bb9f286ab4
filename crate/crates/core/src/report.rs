//! Deterministic artifact emission: JSON reports, CSV tables, binary
//! section dumps and run manifests.
//!
//! Floats are written in shortest round-trip form, struct fields in
//! declaration order, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::cylinder::CylinderSection;
use crate::error::{Error, Result};
use crate::npc::Geometry;

pub fn ser_matrix<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::spd::matrix_rows(m).serialize(s)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Shortest round-trip decimal; non-finite values become `nan`/`inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// CSV text from a header and numeric rows.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_f64).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes files into an output directory and remembers their hashes.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    files: Vec<ArtifactEntry>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ArtifactEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.push(ArtifactEntry {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, to_json(value)?.as_bytes())
    }

    pub fn entries(&self) -> &[ArtifactEntry] {
        &self.files
    }

    /// Writes `manifest.json` listing every artifact written so far.
    pub fn finish(mut self, manifest: RunManifest) -> Result<RunManifest> {
        let mut manifest = manifest;
        manifest.artifacts = self.files.clone();
        let text = to_json(&manifest)?;
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text.as_bytes()).map_err(|e| Error::io(&path, e))?;
        self.files.clear();
        Ok(manifest)
    }
}

/// Outcome of one named check in a run.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Provenance record for a run directory. Everything except `wall_seconds`
/// is a pure function of the configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub artifacts: Vec<ArtifactEntry>,
    pub wall_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: u64) -> Self {
        Self {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            seed,
            checks: Vec::new(),
            artifacts: Vec::new(),
            wall_seconds: 0.0,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Human-readable one-line summary of a check.
pub fn summary_line(name: &str, passed: bool, detail: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "[{}] {name}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    s
}

pub const SECTION_MAGIC: &[u8; 5] = b"NPCH1";
pub const SECTION_VERSION: u8 = 1;

fn space_tag(name: &str) -> u8 {
    match name {
        "euclidean" => 0,
        "hyperbolic2" => 1,
        "spd" => 2,
        "tree" => 3,
        _ => 255,
    }
}

/// Little-endian section dump: magic, version, space tag, `u32` rows,
/// `u32` columns, `f64` height, `u32` coordinates per point, then every
/// point's coordinates row by row.
pub fn section_to_bin<G: Geometry, I>(g: &G, s: &CylinderSection<G, I>) -> Vec<u8> {
    let coords: Vec<Vec<f64>> = s.values.iter().map(|p| g.coords(p)).collect();
    let width = coords.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(27 + 8 * width * coords.len());
    out.extend_from_slice(SECTION_MAGIC);
    out.push(SECTION_VERSION);
    out.push(space_tag(g.name()));
    out.extend_from_slice(&(s.grid.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(s.grid.n_theta as u32).to_le_bytes());
    out.extend_from_slice(&s.grid.t_max.to_le_bytes());
    out.extend_from_slice(&(width as u32).to_le_bytes());
    for c in coords {
        for x in c {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

/// Parsed contents of a section dump.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionDump {
    pub space_tag: u8,
    pub rows: usize,
    pub n_theta: usize,
    pub t_max: f64,
    pub width: usize,
    pub data: Vec<f64>,
}

impl SectionDump {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::domain(format!("bad section dump: {m}"));
        if bytes.len() < 27 || &bytes[..5] != SECTION_MAGIC {
            return Err(bad("missing header"));
        }
        if bytes[5] != SECTION_VERSION {
            return Err(bad("unsupported version"));
        }
        let u32_at =
            |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().expect("four bytes")) as usize;
        let rows = u32_at(7);
        let n_theta = u32_at(11);
        let t_max = f64::from_le_bytes(bytes[15..23].try_into().expect("eight bytes"));
        let width = u32_at(23);
        let body = &bytes[27..];
        if body.len() != 8 * rows * n_theta * width {
            return Err(bad("payload length does not match the header"));
        }
        let data = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")))
            .collect();
        Ok(Self {
            space_tag: bytes[6],
            rows,
            n_theta,
            t_max,
            width,
            data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456789.125, -0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn section_dump_round_trip() {
        use crate::cylinder::CylinderGrid;
        use crate::isometry::Mobius;
        use crate::npc::HyperbolicDisk;
        let m = Mobius::translation(1.0);
        let grid = CylinderGrid::with_aspect(1.0, 8, 1.0).unwrap();
        let s = CylinderSection::from_fn(grid, m, |t, th| {
            num_complex::Complex64::new(0.1 * t, 0.01 * th)
        });
        let bytes = section_to_bin(&HyperbolicDisk, &s);
        let d = SectionDump::parse(&bytes).unwrap();
        assert_eq!(
            (d.space_tag, d.rows, d.n_theta, d.width),
            (1, grid.rows(), 8, 2)
        );
        assert_eq!(d.data[2 * 9], 0.1 * grid.t(1));
        assert!(SectionDump::parse(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn csv_layout() {
        let text = csv(&["t", "d"], vec![vec![0.0, 1.5], vec![0.5, 0.25]]);
        assert_eq!(text, "t,d\n0,1.5\n0.5,0.25\n");
    }

    #[test]
    fn artifacts_are_hashed() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path()).unwrap();
        w.write("a.txt", b"abc").unwrap();
        assert_eq!(
            w.entries()[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        let m = w
            .finish(RunManifest::new("test", serde_json::json!({}), 0))
            .unwrap();
        assert_eq!(m.artifacts.len(), 1);
        assert!(dir.path().join("manifest.json").exists());
    }
}
