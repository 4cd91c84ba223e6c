//! Matrix and instance files.
//!
//! Matrices are stored either as headerless CSV (one row per line) or as raw
//! little-endian `f64` in row-major order behind a 24-byte header: the magic
//! `RFMAT001`, then `rows` and `cols` as little-endian `u64`. A stack of
//! matrices (karcher data) is a single file holding the magic `RFSTACK1`, a
//! `u64` count and then that many headerless `rows, cols, data` records, or a
//! directory of `.csv`/`.bin` files read in lexicographic order.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::oracle::{eigenvalue_oracle, karcher_oracle, KARCHER_TOL};
use super::spec::{InstanceSpec, ProblemKind};
use crate::error::{input, Error, Result};
use crate::manifold::{ArrayRecord, Hemisphere};
use crate::objectives::{Objective, ObjectiveKind};
use crate::problem::{BenchmarkOracle, ProblemInstance};

const MATRIX_MAGIC: &[u8; 8] = b"RFMAT001";
const STACK_MAGIC: &[u8; 8] = b"RFSTACK1";

/// Shortest decimal form that parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:e}")
    }
}

pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec?;
        if cols.is_some_and(|c| c != rec.len()) {
            return input(format!("{}: ragged row {}", path.display(), rows + 1));
        }
        cols = Some(rec.len());
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| {
                Error::Input(format!("{}: bad number '{field}'", path.display()))
            })?;
            data.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::Input(format!("{}: empty matrix", path.display())))?;
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

fn put_body(w: &mut impl Write, m: &DMatrix<f64>) -> Result<()> {
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for v in m.row(i).iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn take_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn take_body(r: &mut impl Read) -> Result<DMatrix<f64>> {
    let rows = take_u64(r)? as usize;
    let cols = take_u64(r)? as usize;
    let len = rows
        .checked_mul(cols)
        .filter(|l| *l <= 1 << 31)
        .ok_or_else(|| Error::Input(format!("implausible matrix size {rows}x{cols}")))?;
    let mut buf = vec![0u8; len * 8];
    r.read_exact(&mut buf)?;
    let data: Vec<f64> = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

fn check_magic(r: &mut impl Read, magic: &[u8; 8], path: &Path) -> Result<()> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    if &b != magic {
        return input(format!("{}: not a {} file", path.display(), String::from_utf8_lossy(magic)));
    }
    Ok(())
}

pub fn write_matrix_bin(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(MATRIX_MAGIC)?;
    put_body(&mut w, m)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix_bin(path: &Path) -> Result<DMatrix<f64>> {
    let mut r = std::io::BufReader::new(fs::File::open(path)?);
    check_magic(&mut r, MATRIX_MAGIC, path)?;
    take_body(&mut r)
}

/// Reads CSV when the extension is `.csv`, binary otherwise.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    if is_csv(path) {
        read_matrix_csv(path)
    } else {
        read_matrix_bin(path)
    }
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    if is_csv(path) {
        write_matrix_csv(path, m)
    } else {
        write_matrix_bin(path, m)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn write_matrix_stack(path: &Path, mats: &[DMatrix<f64>]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(STACK_MAGIC)?;
    w.write_all(&(mats.len() as u64).to_le_bytes())?;
    for m in mats {
        put_body(&mut w, m)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a stack file, or every `.csv`/`.bin` file of a directory in name
/// order.
pub fn read_matrix_stack(path: &Path) -> Result<Vec<DMatrix<f64>>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("csv") || e.eq_ignore_ascii_case("bin"))
            })
            .collect();
        files.sort();
        if files.is_empty() {
            return input(format!("{}: no matrix files", path.display()));
        }
        return files.iter().map(|p| read_matrix(p)).collect();
    }
    let mut r = std::io::BufReader::new(fs::File::open(path)?);
    check_magic(&mut r, STACK_MAGIC, path)?;
    let count = take_u64(&mut r)?;
    (0..count).map(|_| take_body(&mut r)).collect()
}

/// Objective from matrix data, with its reference minimum where one can be
/// computed directly.
///
/// The eigenvalue hemisphere is centred at the top eigenvector, as for
/// generated instances.
pub fn objective_from_matrices(
    kind: ProblemKind,
    mats: Vec<DMatrix<f64>>,
) -> Result<(Objective, Option<BenchmarkOracle>)> {
    match kind {
        ProblemKind::Eigenvalue => {
            let [a] = <[_; 1]>::try_from(mats)
                .map_err(|_| Error::Input("eigenvalue problem needs exactly one matrix".into()))?;
            let oracle = eigenvalue_oracle(&a)?;
            let space = Hemisphere::with_pole(&oracle.zref)?;
            Ok((Objective::rayleigh(a, space)?, Some(oracle)))
        }
        ProblemKind::Karcher => Ok((Objective::karcher(mats)?, None)),
        ProblemKind::Flat => {
            let [q] = <[_; 1]>::try_from(mats)
                .map_err(|_| Error::Input("flat problem needs exactly one matrix".into()))?;
            Ok((Objective::flat_quadratic(q)?, None))
        }
    }
}

fn kind_of(obj: &Objective) -> ProblemKind {
    match obj.kind() {
        ObjectiveKind::Rayleigh => ProblemKind::Eigenvalue,
        ObjectiveKind::Karcher => ProblemKind::Karcher,
        ObjectiveKind::FlatQuadratic => ProblemKind::Flat,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct OracleFile {
    fstar: f64,
    zref: ArrayRecord,
    method: String,
    grad_norm: f64,
    iterations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct InstanceFile {
    id: String,
    problem: ProblemKind,
    spec: Option<InstanceSpec>,
    hash: String,
    matrices: Vec<ArrayRecord>,
    pole: Option<ArrayRecord>,
    x0: ArrayRecord,
    oracle: Option<OracleFile>,
}

/// SHA-256 over the problem kind, objective matrices and starting point.
pub fn instance_hash(inst: &ProblemInstance) -> String {
    let mut h = Sha256::new();
    h.update(kind_of(&inst.objective).to_string().as_bytes());
    let mut feed = |m: &DMatrix<f64>| {
        h.update((m.nrows() as u64).to_le_bytes());
        h.update((m.ncols() as u64).to_le_bytes());
        for v in m.iter() {
            h.update(v.to_le_bytes());
        }
    };
    for m in inst.objective.matrices() {
        feed(m);
    }
    feed(inst.x0.coords());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes an instance (matrices, start, oracle) as one JSON document.
pub fn save_instance(path: &Path, inst: &ProblemInstance, spec: Option<&InstanceSpec>) -> Result<()> {
    let m = inst.objective.manifold();
    let name = m.name();
    let pole = inst
        .objective
        .hemisphere()
        .map(|h| ArrayRecord::from_point(m, &h.pole()));
    let file = InstanceFile {
        id: inst.id.clone(),
        problem: kind_of(&inst.objective),
        spec: spec.cloned(),
        hash: instance_hash(inst),
        matrices: inst
            .objective
            .matrices()
            .into_iter()
            .map(|a| ArrayRecord::from_matrix(name, a))
            .collect(),
        pole,
        x0: ArrayRecord::from_point(m, &inst.x0),
        oracle: inst.oracle.as_ref().map(|o| OracleFile {
            fstar: o.fstar,
            zref: ArrayRecord::from_point(m, &o.zref),
            method: o.method.clone(),
            grad_norm: o.grad_norm,
            iterations: o.iterations,
        }),
    };
    let w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(w, &file)?;
    Ok(())
}

/// Reads an instance written by [`save_instance`]; returns its spec when one
/// was stored. A missing oracle is recomputed.
pub fn load_instance(path: &Path) -> Result<(ProblemInstance, Option<InstanceSpec>)> {
    let file: InstanceFile = serde_json::from_reader(std::io::BufReader::new(fs::File::open(path)?))?;
    let mats = file
        .matrices
        .iter()
        .map(ArrayRecord::to_matrix)
        .collect::<Result<Vec<_>>>()?;
    let obj = match (file.problem, &file.pole) {
        (ProblemKind::Eigenvalue, Some(pole)) => {
            let [a] = <[_; 1]>::try_from(mats)
                .map_err(|_| Error::Input("eigenvalue problem needs exactly one matrix".into()))?;
            let pole = crate::manifold::Point::new(pole.to_matrix()?);
            Objective::rayleigh(a, Hemisphere::with_pole(&pole)?)?
        }
        (kind, _) => objective_from_matrices(kind, mats)?.0,
    };
    let m = obj.manifold();
    let x0 = file.x0.to_point(m)?;
    let mut inst = ProblemInstance::new(file.id, obj, x0)?;
    let oracle = match file.oracle {
        Some(o) => BenchmarkOracle {
            fstar: o.fstar,
            zref: o.zref.to_point(inst.objective.manifold())?,
            method: o.method,
            grad_norm: o.grad_norm,
            iterations: o.iterations,
        },
        None => default_oracle(&inst)?,
    };
    inst = inst.with_oracle(oracle)?;
    let hash = instance_hash(&inst);
    if hash != file.hash {
        log::warn!("{}: stored hash {} differs from content hash {hash}", path.display(), file.hash);
    }
    Ok((inst, file.spec))
}

/// Oracle for an instance built from raw matrices.
pub fn default_oracle(inst: &ProblemInstance) -> Result<BenchmarkOracle> {
    match kind_of(&inst.objective) {
        ProblemKind::Eigenvalue => eigenvalue_oracle(inst.objective.matrices()[0]),
        ProblemKind::Karcher => karcher_oracle(inst, KARCHER_TOL),
        ProblemKind::Flat => {
            Ok(BenchmarkOracle {
                fstar: 0.0,
                zref: crate::manifold::Point::new(DMatrix::zeros(inst.x0.shape().0, 1)),
                method: "closed-form".into(),
                grad_norm: 0.0,
                iterations: 0,
            })
        }
    }
}
