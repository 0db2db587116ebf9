//! Experiment configuration: one JSON document shared by every subcommand.
//! Precedence is CLI flags over file fields over built-in defaults.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use rand::Rng;
use serde::Deserialize;

use hdx_core::generators::{
    anti_tribes_function, complete_complex, dictator, hypercube_complex, link_indicator,
    random_complex, random_function, random_sparse_boolean, tribe_blocks,
};
use hdx_core::{
    read_complex_path, read_function, Face, FaceFunction, HdxError, Result, SimplicialComplex,
};

/// Seed offsets so the complex and function draws come from distinct streams
/// of the same master seed.
pub const COMPLEX_STREAM: u64 = 0x636f_6d70;
pub const FUNCTION_STREAM: u64 = 0x6675_6e63;

pub const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub complex: ComplexSource,
    pub function: FunctionSource,
    pub checks: Vec<CheckSpec>,
    pub sweep: SweepAxes,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    /// default Monte Carlo sample count for checks that need one
    pub samples: Option<usize>,
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<ExperimentConfig> {
        let Some(path) = path else {
            return Ok(ExperimentConfig::default());
        };
        let file = File::open(path)?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| HdxError::Parse {
            line: e.line(),
            msg: format!("{}: {e}", path.display()),
        })
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexSource {
    /// complete | hypercube | random; ignored when `path` is set
    pub generator: Option<String>,
    pub path: Option<PathBuf>,
    pub n: Option<usize>,
    /// vertices per top face
    pub d: Option<usize>,
    /// top-face count for the random generator
    pub top_count: Option<usize>,
}

impl ComplexSource {
    /// A sweep value for n takes precedence: sweeping is the point of the axis.
    pub fn build(
        &self,
        n_override: Option<usize>,
        rng: &mut impl Rng,
    ) -> Result<Arc<SimplicialComplex>> {
        if let Some(path) = &self.path {
            if self.generator.is_some() {
                return Err(HdxError::InvalidParameter(
                    "complex source gives both a generator and a file".into(),
                ));
            }
            return read_complex_path(path);
        }
        let gen = self.generator.as_deref().unwrap_or("complete");
        let n = n_override.or(self.n);
        let need_n = || HdxError::InvalidParameter(format!("{gen} complex needs n"));
        match gen {
            "complete" => complete_complex(n.ok_or_else(need_n)?, self.d.unwrap_or(2)),
            "hypercube" => hypercube_complex(n.ok_or_else(need_n)?),
            "random" => {
                let tops = self.top_count.ok_or_else(|| {
                    HdxError::InvalidParameter("random complex needs top_count".into())
                })?;
                random_complex(n.ok_or_else(need_n)?, self.d.unwrap_or(2), tops, rng)
            }
            other => Err(HdxError::InvalidParameter(format!(
                "unknown complex generator {other:?} (complete | hypercube | random)"
            ))),
        }
    }

    pub fn stochastic(&self) -> bool {
        self.path.is_none() && self.generator.as_deref() == Some("random")
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunctionSource {
    /// random-sparse | random | constant | link-indicator | dictator | anti-tribes
    pub kind: Option<String>,
    pub path: Option<PathBuf>,
    pub level: Option<usize>,
    /// density of the random-sparse source
    pub alpha: Option<f64>,
    /// 1-based coordinate for the dictator source
    pub bit: Option<usize>,
    pub value: Option<f64>,
    /// pinned face for the link-indicator source
    pub tau: Option<Vec<u32>>,
    pub tribe_size: Option<usize>,
    pub tribe_count: Option<usize>,
}

impl FunctionSource {
    pub fn build(
        &self,
        x: &Arc<SimplicialComplex>,
        k_override: Option<usize>,
        rng: &mut impl Rng,
    ) -> Result<FaceFunction> {
        let level = k_override.or(self.level).unwrap_or(x.dim());
        if let Some(path) = &self.path {
            if self.kind.is_some() {
                return Err(HdxError::InvalidParameter(
                    "function source gives both a kind and a file".into(),
                ));
            }
            return read_function(BufReader::new(File::open(path)?), x);
        }
        match self.kind.as_deref().unwrap_or("random-sparse") {
            "random-sparse" => random_sparse_boolean(x, level, self.alpha.unwrap_or(0.5), rng),
            "random" => random_function(x, level, rng),
            "constant" => FaceFunction::constant(Arc::clone(x), level, self.value.unwrap_or(1.0)),
            "link-indicator" => {
                let tau = Face::from_ids(self.tau.as_deref().unwrap_or(&[]))?;
                link_indicator(x, &tau, level)
            }
            "dictator" => dictator(x, x.dim(), self.bit.unwrap_or(1)),
            "anti-tribes" => {
                let t = self.tribe_size.ok_or_else(|| {
                    HdxError::InvalidParameter("anti-tribes function needs tribe_size".into())
                })?;
                let m = self.tribe_count.ok_or_else(|| {
                    HdxError::InvalidParameter("anti-tribes function needs tribe_count".into())
                })?;
                let tribes = tribe_blocks(x.num_faces(1), m, t)?;
                anti_tribes_function(x, level, &tribes)
            }
            other => Err(HdxError::InvalidParameter(format!(
                "unknown function kind {other:?} (random-sparse | random | constant | \
                 link-indicator | dictator | anti-tribes)"
            ))),
        }
    }

    pub fn stochastic(&self) -> bool {
        self.path.is_none()
            && matches!(
                self.kind.as_deref().unwrap_or("random-sparse"),
                "random-sparse" | "random"
            )
    }
}

/// One theorem check. Unset parameters fall back to the sweep point, then to
/// per-check defaults; see the runner for which ids read which fields.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSpec {
    pub id: String,
    pub i: Option<usize>,
    pub j: Option<usize>,
    pub rho: Option<f64>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub big_k: Option<f64>,
    pub c: Option<f64>,
    pub c1: Option<f64>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub tribe_size: Option<usize>,
    pub tribe_count: Option<usize>,
    pub samples: Option<usize>,
    /// auto | exact | monte-carlo
    pub mode: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub i: Vec<usize>,
    pub rho: Vec<f64>,
    pub delta: Vec<f64>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct ComplexFlags {
    /// complex generator: complete | hypercube | random
    #[arg(long)]
    pub generator: Option<String>,
    /// vertex count
    #[arg(long)]
    pub n: Option<usize>,
    /// vertices per top face
    #[arg(long)]
    pub d: Option<usize>,
    /// top-face count for the random generator
    #[arg(long)]
    pub tops: Option<usize>,
    /// load the complex from a file instead of generating it
    #[arg(long)]
    pub complex_file: Option<PathBuf>,
}

impl ComplexFlags {
    pub fn apply(&self, c: &mut ComplexSource) {
        if let Some(g) = &self.generator {
            c.generator = Some(g.clone());
            c.path = None;
        }
        if let Some(p) = &self.complex_file {
            c.path = Some(p.clone());
            c.generator = None;
        }
        if self.n.is_some() {
            c.n = self.n;
        }
        if self.d.is_some() {
            c.d = self.d;
        }
        if self.tops.is_some() {
            c.top_count = self.tops;
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct FunctionFlags {
    /// function kind: random-sparse | random | constant | link-indicator | dictator | anti-tribes
    #[arg(long)]
    pub function: Option<String>,
    /// density of the random-sparse source
    #[arg(long)]
    pub alpha: Option<f64>,
    /// function level (default: top level)
    #[arg(long)]
    pub level: Option<usize>,
    /// 1-based coordinate for the dictator source
    #[arg(long)]
    pub bit: Option<usize>,
    /// value of the constant source
    #[arg(long)]
    pub value: Option<f64>,
    /// comma-separated vertex ids pinning the link-indicator source
    #[arg(long)]
    pub tau: Option<String>,
    /// load the function from a file instead of generating it
    #[arg(long)]
    pub function_file: Option<PathBuf>,
}

impl FunctionFlags {
    pub fn apply(&self, f: &mut FunctionSource) -> Result<()> {
        if let Some(k) = &self.function {
            f.kind = Some(k.clone());
            f.path = None;
        }
        if let Some(p) = &self.function_file {
            f.path = Some(p.clone());
            f.kind = None;
        }
        if self.alpha.is_some() {
            f.alpha = self.alpha;
        }
        if self.level.is_some() {
            f.level = self.level;
        }
        if self.bit.is_some() {
            f.bit = self.bit;
        }
        if self.value.is_some() {
            f.value = self.value;
        }
        if let Some(s) = &self.tau {
            f.tau = Some(parse_tau(s)?);
        }
        Ok(())
    }
}

fn parse_tau(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse().map_err(|_| {
                HdxError::InvalidParameter(format!("bad vertex id {t:?} in --tau"))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_parses_and_rejects() {
        assert_eq!(parse_tau("0,3, 7").unwrap(), vec![0, 3, 7]);
        assert_eq!(parse_tau("").unwrap(), Vec::<u32>::new());
        assert!(parse_tau("1,x").is_err());
    }

    #[test]
    fn flags_override_file_fields() {
        let mut cfg: ExperimentConfig = serde_json::from_str(
            r#"{"complex": {"generator": "random", "n": 9, "d": 2, "top_count": 12}}"#,
        )
        .unwrap();
        assert!(cfg.complex.stochastic());
        let flags = ComplexFlags {
            generator: Some("complete".into()),
            n: Some(5),
            ..Default::default()
        };
        flags.apply(&mut cfg.complex);
        assert!(!cfg.complex.stochastic());
        let mut rng = rand::rng();
        let x = cfg.complex.build(None, &mut rng).unwrap();
        assert_eq!(x.num_faces(1), 5);
        assert_eq!(x.dim(), 2);
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let r: std::result::Result<ExperimentConfig, _> =
            serde_json::from_str(r#"{"sede": 7}"#);
        assert!(r.is_err());
    }

    #[test]
    fn point_n_beats_config_n() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"complex": {"n": 4}}"#).unwrap();
        let mut rng = rand::rng();
        let x = cfg.complex.build(Some(7), &mut rng).unwrap();
        assert_eq!(x.num_faces(1), 7);
    }
}
