//! On-disk layout for instances and solutions.
//!
//! An instance saved under prefix `p` consists of `p.mtx` (observed data),
//! `p.expected.mtx`, optionally `p.oracle.mtx`, and a `p.json` sidecar with
//! the problem kind, generator parameters, seed and ground truth. A solution
//! is `p.mtx` (the estimate) plus `p.report.json`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{read_coordinate, write_coordinate, Scalar, SelfAdjoint};
use crate::models::{GroundTruth, ModelParams, ProblemInstance, ProblemKind};
use crate::solvers::SolveReport;

/// `prefix` with `suffix` appended to its file name.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_matrix<T: Scalar>(path: &Path, m: &SelfAdjoint<T>) -> Result<()> {
    let mut w = create(path)?;
    write_coordinate(m, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix<T: Scalar>(path: &Path) -> Result<SelfAdjoint<T>> {
    read_coordinate(BufReader::new(File::open(path)?))
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<V: Serialize + ?Sized>(path: &Path, value: &V) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<V: DeserializeOwned>(path: &Path) -> Result<V> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Sidecar describing a saved instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub kind: ProblemKind,
    pub n: usize,
    /// Entries are complex (synchronization) rather than real.
    pub complex: bool,
    pub seed: u64,
    /// Constant removed from the data before solving.
    pub shift: f64,
    pub has_oracle: bool,
    pub params: ModelParams,
    pub truth: GroundTruth,
}

/// Writes an instance and returns the files created.
pub fn save_instance<T: Scalar>(inst: &ProblemInstance<T>, prefix: &Path) -> Result<Vec<PathBuf>> {
    let mut files = vec![with_suffix(prefix, ".mtx"), with_suffix(prefix, ".expected.mtx")];
    write_matrix(&files[0], &inst.observed)?;
    write_matrix(&files[1], &inst.expected)?;
    if let Some(z) = &inst.oracle {
        let p = with_suffix(prefix, ".oracle.mtx");
        write_matrix(&p, z)?;
        files.push(p);
    }
    let meta = InstanceMeta {
        kind: inst.kind,
        n: inst.n(),
        complex: T::IS_COMPLEX,
        seed: inst.seed,
        shift: inst.shift(),
        has_oracle: inst.oracle.is_some(),
        params: inst.params.clone(),
        truth: inst.truth.clone(),
    };
    let p = with_suffix(prefix, ".json");
    write_json(&p, &meta)?;
    files.push(p);
    Ok(files)
}

pub fn load_meta(prefix: &Path) -> Result<InstanceMeta> {
    read_json(&with_suffix(prefix, ".json"))
}

pub fn load_instance<T: Scalar>(prefix: &Path) -> Result<ProblemInstance<T>> {
    let meta = load_meta(prefix)?;
    if meta.complex != T::IS_COMPLEX {
        let kind = if meta.complex { "complex" } else { "real" };
        return Err(invalid(format!("instance {} holds {kind} data", prefix.display())));
    }
    let observed: SelfAdjoint<T> = read_matrix(&with_suffix(prefix, ".mtx"))?;
    let expected: SelfAdjoint<T> = read_matrix(&with_suffix(prefix, ".expected.mtx"))?;
    crate::error::check_dim(meta.n, observed.dim())?;
    crate::error::check_dim(meta.n, expected.dim())?;
    let oracle = if meta.has_oracle { Some(read_matrix(&with_suffix(prefix, ".oracle.mtx"))?) } else { None };
    Ok(ProblemInstance {
        kind: meta.kind,
        observed,
        expected,
        oracle,
        truth: meta.truth,
        params: meta.params,
        seed: meta.seed,
    })
}

pub fn save_solution<T: Scalar>(z: &SelfAdjoint<T>, report: &SolveReport, prefix: &Path) -> Result<Vec<PathBuf>> {
    let files = vec![with_suffix(prefix, ".mtx"), with_suffix(prefix, ".report.json")];
    write_matrix(&files[0], z)?;
    write_json(&files[1], report)?;
    Ok(files)
}

pub fn load_solution<T: Scalar>(prefix: &Path) -> Result<(SelfAdjoint<T>, SolveReport)> {
    Ok((read_matrix(&with_suffix(prefix, ".mtx"))?, read_json(&with_suffix(prefix, ".report.json"))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gen_ssbm, gen_sync, SsbmParams, SyncParams};
    use num_complex::Complex64;

    #[test]
    fn instance_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("sub/inst");
        let params = SsbmParams { n: 8, k: 2, p: 0.9, q: 0.1, delta: 0.7, sizes: None };
        let inst = gen_ssbm(&params, 3).unwrap();
        let files = save_instance(&inst, &prefix).unwrap();
        assert_eq!(files.len(), 4);
        let back: ProblemInstance<f64> = load_instance(&prefix).unwrap();
        assert_eq!(back.observed, inst.observed);
        assert_eq!(back.expected, inst.expected);
        assert_eq!(back.oracle, inst.oracle);
        assert_eq!(back.truth, inst.truth);
        assert_eq!(back.params, inst.params);
        assert!(load_instance::<Complex64>(&prefix).is_err());
    }

    #[test]
    fn complex_instance_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("sync");
        let inst = gen_sync(&SyncParams::gaussian(5, 0.4), 1).unwrap();
        save_instance(&inst, &prefix).unwrap();
        let back: ProblemInstance<Complex64> = load_instance(&prefix).unwrap();
        assert_eq!(back.observed, inst.observed);
        assert!(load_meta(&prefix).unwrap().complex);
    }

    #[test]
    fn suffix_keeps_directories() {
        assert_eq!(with_suffix(Path::new("a/b.c"), ".json"), PathBuf::from("a/b.c.json"));
    }
}
