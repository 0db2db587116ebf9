//! Walk-matrix cache keyed by complex content and walk word, enabled by the
//! HDX_CACHE_DIR environment variable. Entries are ordinary operator files,
//! so a stale or truncated entry is simply recomputed.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use hdx_core::walks::assemble_walk;
use hdx_core::{
    read_operator, write_complex, write_operator, LinearMap, Result, SimplicialComplex, Step,
    WalkSpec,
};

pub fn cached_assemble(x: &Arc<SimplicialComplex>, spec: &WalkSpec) -> Result<LinearMap> {
    let Some(dir) = std::env::var_os("HDX_CACHE_DIR") else {
        return assemble_walk(x, spec);
    };
    if dir.is_empty() {
        return assemble_walk(x, spec);
    }
    let dir = PathBuf::from(dir);
    let path = dir.join(format!("{}.op", cache_key(x, spec)?));
    if let Ok(file) = File::open(&path) {
        if let Ok(m) = read_operator(BufReader::new(file), x) {
            return Ok(m);
        }
    }
    let m = assemble_walk(x, spec)?;
    fs::create_dir_all(&dir)?;
    // write-then-rename so concurrent sweep workers never read a half file
    let tmp = dir.join(format!(
        "{}.{}.tmp",
        path.file_stem().unwrap().to_string_lossy(),
        std::process::id()
    ));
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        write_operator(&mut w, &m)?;
        w.flush()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(m)
}

fn cache_key(x: &SimplicialComplex, spec: &WalkSpec) -> Result<String> {
    let mut hasher = Sha256::new();
    hasher.update(b"hdx-op-v1\n");
    let mut buf = Vec::new();
    write_complex(&mut buf, x)?;
    hasher.update(&buf);
    let mut descr = format!("level={}", spec.level);
    for term in &spec.terms {
        write!(descr, ";{:.17e}:", term.coeff).unwrap();
        for step in &term.word {
            descr.push(match step {
                Step::Up => 'U',
                Step::Down => 'D',
            });
        }
    }
    hasher.update(descr.as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        write!(hex, "{b:02x}").unwrap();
    }
    Ok(hex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hdx_core::generators::complete_complex;

    #[test]
    fn keys_separate_walks_and_complexes() {
        let x = complete_complex(6, 2).unwrap();
        let y = complete_complex(7, 2).unwrap();
        // same level, opposite word order
        let lower = WalkSpec::lower(2);
        let canon = WalkSpec::canonical(2, 1);
        let kx = cache_key(&x, &lower).unwrap();
        assert_eq!(kx, cache_key(&x, &lower).unwrap());
        assert_ne!(kx, cache_key(&y, &lower).unwrap());
        assert_ne!(kx, cache_key(&x, &canon).unwrap());
    }
}
