//! Text and JSON serialization: complexes, operators, functions,
//! decompositions, verdicts.
//!
//! Complex files are line-oriented: a `d n` header, then one top face per
//! line as vertex ids followed by a positive weight. Blank lines and lines
//! starting with `#` are skipped. Weights are renormalized on read, so a
//! write/read round trip reproduces π exactly up to that normalization.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::TheoremVerdict;
use crate::complex::SimplicialComplex;
use crate::decompose::Decomposition;
use crate::error::{HdxError, Result};
use crate::face::{Face, VertexId};
use crate::function::FaceFunction;
use crate::linmap::{Csr, LinearMap};

pub fn write_complex<W: Write>(w: &mut W, x: &SimplicialComplex) -> Result<()> {
    let d = x.dim();
    let n = x
        .faces(1)
        .map(|(_, v)| v[0].0 as usize + 1)
        .max()
        .unwrap_or(0);
    writeln!(w, "{d} {n}")?;
    let pi = x.pi(d);
    for (r, verts) in x.faces(d) {
        for v in verts {
            write!(w, "{} ", v.0)?;
        }
        writeln!(w, "{:.16e}", pi[r])?;
    }
    Ok(())
}

pub fn read_complex<R: Read>(r: R) -> Result<Arc<SimplicialComplex>> {
    let reader = BufReader::new(r);
    let mut header: Option<(usize, usize)> = None;
    let mut tops: Vec<(Face, f64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |msg: String| HdxError::Parse { line: lineno, msg };
        if header.is_none() {
            if fields.len() != 2 {
                return Err(parse_err("expected header `d n`".into()));
            }
            let d: usize = fields[0]
                .parse()
                .map_err(|_| parse_err(format!("bad dimension {:?}", fields[0])))?;
            let n: usize = fields[1]
                .parse()
                .map_err(|_| parse_err(format!("bad vertex count {:?}", fields[1])))?;
            if d == 0 || n == 0 {
                return Err(parse_err("dimension and vertex count must be positive".into()));
            }
            header = Some((d, n));
            continue;
        }
        let (d, n) = header.unwrap();
        if fields.len() != d + 1 {
            return Err(parse_err(format!(
                "expected {d} vertex ids and a weight, got {} fields",
                fields.len()
            )));
        }
        let mut ids = Vec::with_capacity(d);
        for f in &fields[..d] {
            let id: u32 = f
                .parse()
                .map_err(|_| parse_err(format!("bad vertex id {f:?}")))?;
            if id as usize >= n {
                return Err(parse_err(format!("vertex id {id} exceeds declared n={n}")));
            }
            ids.push(VertexId(id));
        }
        let weight: f64 = fields[d]
            .parse()
            .map_err(|_| parse_err(format!("bad weight {:?}", fields[d])))?;
        if !weight.is_finite() || weight <= 0.0 {
            return Err(parse_err(format!("weight must be positive, got {weight}")));
        }
        let face = Face::new(ids).map_err(|e| parse_err(e.to_string()))?;
        tops.push((face, weight));
    }
    if header.is_none() {
        return Err(HdxError::Parse {
            line: 0,
            msg: "empty complex file".into(),
        });
    }
    SimplicialComplex::from_weighted_top_faces(tops)
}

pub fn write_complex_path(path: &Path, x: &SimplicialComplex) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_complex(&mut w, x)
}

pub fn read_complex_path(path: &Path) -> Result<Arc<SimplicialComplex>> {
    read_complex(File::open(path)?)
}

/// Header `level_src level_dst rows cols nnz`, then 0-based `row col value`
/// triples in row-major order.
pub fn write_operator<W: Write>(w: &mut W, m: &LinearMap) -> Result<()> {
    let mut nnz = 0usize;
    m.for_each_entry(|_, _, _| nnz += 1);
    writeln!(
        w,
        "{} {} {} {} {}",
        m.source_level(),
        m.target_level(),
        m.nrows(),
        m.ncols(),
        nnz
    )?;
    let mut err = None;
    m.for_each_entry(|r, c, v| {
        if err.is_none() {
            if let Err(e) = writeln!(w, "{r} {c} {v:.16e}") {
                err = Some(e);
            }
        }
    });
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn read_operator<R: Read>(r: R, x: &Arc<SimplicialComplex>) -> Result<LinearMap> {
    let reader = BufReader::new(r);
    let mut header: Option<(usize, usize, usize, usize, usize)> = None;
    let mut trips: Vec<(u32, u32, f64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |msg: String| HdxError::Parse { line: lineno, msg };
        if header.is_none() {
            if fields.len() != 5 {
                return Err(parse_err(
                    "expected header `level_src level_dst rows cols nnz`".into(),
                ));
            }
            let mut vals = [0usize; 5];
            for (slot, f) in vals.iter_mut().zip(&fields) {
                *slot = f
                    .parse()
                    .map_err(|_| parse_err(format!("bad header field {f:?}")))?;
            }
            header = Some((vals[0], vals[1], vals[2], vals[3], vals[4]));
            trips.reserve(vals[4]);
            continue;
        }
        let (_, _, rows, cols, _) = header.unwrap();
        if fields.len() != 3 {
            return Err(parse_err("expected `row col value`".into()));
        }
        let row: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(format!("bad row {:?}", fields[0])))?;
        let col: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(format!("bad col {:?}", fields[1])))?;
        let val: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(format!("bad value {:?}", fields[2])))?;
        if row >= rows || col >= cols {
            return Err(parse_err(format!("entry ({row},{col}) outside {rows}x{cols}")));
        }
        trips.push((row as u32, col as u32, val));
    }
    let (src, dst, rows, cols, nnz) = header.ok_or(HdxError::Parse {
        line: 0,
        msg: "empty operator file".into(),
    })?;
    if trips.len() != nnz {
        return Err(HdxError::Parse {
            line: 0,
            msg: format!("header promises {nnz} entries, file has {}", trips.len()),
        });
    }
    LinearMap::from_csr(Arc::clone(x), src, dst, Csr::from_triplets(rows, cols, trips))
}

#[derive(Serialize, Deserialize)]
struct FunctionFile {
    level: usize,
    values: Vec<f64>,
}

pub fn write_function<W: Write>(w: &mut W, f: &FaceFunction) -> Result<()> {
    let file = FunctionFile {
        level: f.level(),
        values: f.values().to_vec(),
    };
    serde_json::to_writer_pretty(w, &file).map_err(json_err)?;
    Ok(())
}

pub fn read_function<R: Read>(r: R, x: &Arc<SimplicialComplex>) -> Result<FaceFunction> {
    let file: FunctionFile = serde_json::from_reader(r).map_err(json_err)?;
    FaceFunction::new(Arc::clone(x), file.level, file.values)
}

#[derive(Serialize)]
struct DecompositionFile<'a> {
    kind: &'a str,
    level: usize,
    residual: f64,
    /// g[i][rank] in face rank order at level i
    g: Vec<&'a [f64]>,
    /// lifts[i][rank] in face rank order at the top level
    lifts: Vec<&'a [f64]>,
}

pub fn write_decomposition<W: Write>(w: &mut W, dec: &Decomposition) -> Result<()> {
    let file = DecompositionFile {
        kind: match dec.kind {
            crate::decompose::BasisKind::BottomUp => "bottom-up",
            crate::decompose::BasisKind::HdLevelSet => "hd-level-set",
        },
        level: dec.level,
        residual: dec.residual,
        g: dec.g.iter().map(|f| f.values()).collect(),
        lifts: dec.lifts.iter().map(|f| f.values()).collect(),
    };
    serde_json::to_writer_pretty(w, &file).map_err(json_err)?;
    Ok(())
}

pub fn write_verdict<W: Write>(w: &mut W, v: &TheoremVerdict) -> Result<()> {
    serde_json::to_writer_pretty(w, v).map_err(json_err)?;
    Ok(())
}

fn json_err(e: serde_json::Error) -> HdxError {
    HdxError::Parse {
        line: e.line(),
        msg: e.to_string(),
    }
}
