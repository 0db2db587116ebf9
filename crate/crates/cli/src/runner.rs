//! Check catalog and run semantics shared by `verify` and `sweep`: expand the
//! sweep grid, run every configured check at every point in a worker pool,
//! then write one JSON verdict file per point plus one CSV row per check
//! through a single writer.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use hdx_core::decompose::{bottom_up_explicit, bottom_up_recursive, HdBasis};
use hdx_core::localization::{garland_localize, garland_restrict};
use hdx_core::walks::{down, swap_walk, up};
use hdx_core::{
    anti_tribes_experiment, check_bourgain, check_expansion_theorem, check_hypercontractivity,
    check_level_i, check_noise_hypercontractivity, check_noise_sensitivity, measure_gamma,
    pseudorandomness, AntiTribesParams, FaceFunction, HdxError, Result, SimplicialComplex,
    TheoremVerdict, TribesMode, VerdictStatus, WalkSpec,
};

use crate::config::{CheckSpec, ExperimentConfig, SweepAxes, DEFAULT_SAMPLES, FUNCTION_STREAM};

pub const KNOWN_CHECKS: &[&str] = &[
    "garland",
    "pseudorandomness",
    "hypercontractivity",
    "level-i",
    "expansion",
    "bourgain",
    "noise-sensitivity",
    "noise-hypercontractivity",
    "anti-tribes",
    "swap-bound",
];

const CSV_COLUMNS: &str = "point,check,theorem,n,d,k,i,rho,delta,seed,lhs,rhs_sum,fitted_max,pass,note";

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct PointAxes {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub i: Option<usize>,
    pub rho: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Point {
    pub idx: usize,
    pub axes: PointAxes,
}

/// Cartesian product of the configured axes, n outermost, delta innermost.
/// An empty axis contributes a single unset value.
fn grid(axes: &SweepAxes) -> Vec<Point> {
    fn axis<T: Copy>(v: &[T]) -> Vec<Option<T>> {
        if v.is_empty() {
            vec![None]
        } else {
            v.iter().copied().map(Some).collect()
        }
    }
    let mut out = Vec::new();
    for &n in &axis(&axes.n) {
        for &k in &axis(&axes.k) {
            for &i in &axis(&axes.i) {
                for &rho in &axis(&axes.rho) {
                    for &delta in &axis(&axes.delta) {
                        out.push(Point {
                            idx: out.len(),
                            axes: PointAxes { n, k, i, rho, delta },
                        });
                    }
                }
            }
        }
    }
    out
}

fn stochastic_reason(cfg: &ExperimentConfig) -> Option<&'static str> {
    let needs_complex = cfg.checks.iter().any(|c| c.id != "anti-tribes");
    let needs_function = cfg
        .checks
        .iter()
        .any(|c| !matches!(c.id.as_str(), "anti-tribes" | "swap-bound"));
    if needs_complex && cfg.complex.stochastic() {
        return Some("the random complex generator is enabled");
    }
    if needs_function && cfg.function.stochastic() {
        return Some("a stochastic function source is enabled");
    }
    for c in &cfg.checks {
        if c.id == "anti-tribes"
            && c.mode.as_deref().unwrap_or("auto") != "exact"
            && c.samples.or(cfg.samples).unwrap_or(DEFAULT_SAMPLES) > 0
        {
            return Some("the anti-tribes Monte Carlo estimator is enabled");
        }
    }
    None
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    for c in &cfg.checks {
        if !KNOWN_CHECKS.contains(&c.id.as_str()) {
            return Err(HdxError::InvalidParameter(format!(
                "unknown check id {:?} (known: {})",
                c.id,
                KNOWN_CHECKS.join(", ")
            )));
        }
    }
    for v in cfg.sweep.rho.iter().chain(&cfg.sweep.delta) {
        if !v.is_finite() {
            return Err(HdxError::InvalidParameter(format!(
                "sweep axis value {v} is not finite"
            )));
        }
    }
    if let Some(reason) = stochastic_reason(cfg) {
        if cfg.seed.is_none() {
            return Err(HdxError::InvalidParameter(format!(
                "seed required: {reason}"
            )));
        }
    }
    Ok(())
}

/// Complex, function, and measured expansion for one sweep point, each built
/// on first use. An anti-tribes-only sweep at n = 60 must never materialize
/// the complete complex; laziness is what makes that configuration legal.
struct PointCtx<'a> {
    cfg: &'a ExperimentConfig,
    p: &'a Point,
    seed: u64,
    complex: Option<Arc<SimplicialComplex>>,
    function: Option<FaceFunction>,
    gamma: Option<f64>,
}

impl PointCtx<'_> {
    fn complex(&mut self) -> Result<&Arc<SimplicialComplex>> {
        if self.complex.is_none() {
            let mut rng =
                ChaCha8Rng::seed_from_u64(self.seed ^ crate::config::COMPLEX_STREAM);
            self.complex = Some(self.cfg.complex.build(self.p.axes.n, &mut rng)?);
        }
        Ok(self.complex.as_ref().unwrap())
    }

    fn function(&mut self) -> Result<&FaceFunction> {
        if self.function.is_none() {
            let x = Arc::clone(self.complex()?);
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ FUNCTION_STREAM);
            self.function = Some(self.cfg.function.build(&x, self.p.axes.k, &mut rng)?);
        }
        Ok(self.function.as_ref().unwrap())
    }

    fn gamma(&mut self) -> Result<f64> {
        if let Some(g) = self.gamma {
            return Ok(g);
        }
        let profile = measure_gamma(self.complex()?)?;
        let g = profile.gamma.ok_or_else(|| {
            HdxError::InvalidParameter("complex has no link spectra to measure".into())
        })?;
        self.gamma = Some(g);
        Ok(g)
    }
}

fn verdict(theorem: &str) -> TheoremVerdict {
    TheoremVerdict {
        theorem: theorem.into(),
        params: BTreeMap::new(),
        lhs: 0.0,
        rhs_terms: BTreeMap::new(),
        fitted_constants: BTreeMap::new(),
        pass: VerdictStatus::NotApplicable,
        witnesses: Vec::new(),
        note: String::new(),
        seed: None,
    }
}

fn run_check(ctx: &mut PointCtx, c: &CheckSpec) -> Result<TheoremVerdict> {
    let p = ctx.p.axes;
    match c.id.as_str() {
        "garland" => garland_suite(ctx),
        "pseudorandomness" => {
            let i = c.i.or(p.i).unwrap_or(1);
            let f = ctx.function()?;
            let rep = pseudorandomness(f, i)?;
            let nonneg = f.values().iter().all(|v| *v >= 0.0);
            let mut v = verdict("pseudorandomness");
            v.params.insert("i".into(), i as f64);
            v.params.insert("eps".into(), rep.eps);
            v.lhs = rep.eps_sq;
            v.rhs_terms.insert("eps_mean".into(), rep.eps_mean);
            v.witnesses.push(rep.witness);
            if nonneg {
                v.pass = if rep.eps_sq <= rep.eps_mean + 1e-12 {
                    VerdictStatus::Pass
                } else {
                    VerdictStatus::Fail
                };
                v.note = "for non-negative f the squared reading implies the mean reading".into();
            } else {
                v.pass = VerdictStatus::Pass;
                v.note = "measurement only: f takes negative values".into();
            }
            Ok(v)
        }
        "hypercontractivity" => {
            let i = c.i.or(p.i).unwrap_or(1);
            let gamma = ctx.gamma()?;
            check_hypercontractivity(ctx.function()?, i, gamma)
        }
        "level-i" => {
            let i = c.i.or(p.i).unwrap_or(1);
            check_level_i(ctx.function()?, i)
        }
        "expansion" => {
            let delta = c.delta.or(p.delta).unwrap_or(0.3);
            let height = c.i.or(p.i).unwrap_or(1);
            let gamma = ctx.gamma()?;
            let f = ctx.function()?.clone();
            let x = Arc::clone(f.complex());
            let k = f.level();
            let basis = HdBasis::new(&x, k)?;
            check_expansion_theorem(&f, &WalkSpec::canonical(k, height), &basis, delta, gamma)
        }
        "bourgain" => {
            let big_k = c.big_k.ok_or_else(|| {
                HdxError::InvalidParameter("bourgain check needs big_k".into())
            })?;
            check_bourgain(ctx.function()?, big_k)
        }
        "noise-sensitivity" => {
            let rho = c.rho.or(p.rho).unwrap_or(0.5);
            let eps = c.eps.unwrap_or(0.25);
            let gamma = ctx.gamma()?;
            check_noise_sensitivity(ctx.function()?, rho, eps, gamma)
        }
        "noise-hypercontractivity" => {
            let rho = c.rho.or(p.rho).unwrap_or(0.5);
            check_noise_hypercontractivity(ctx.function()?, rho)
        }
        "anti-tribes" => anti_tribes(ctx, c),
        "swap-bound" => swap_bound(ctx, c),
        other => Err(HdxError::InvalidParameter(format!(
            "unknown check id {other:?}"
        ))),
    }
}

/// The exact-identity suite: Garland splits, U/D adjointness, recursive vs
/// explicit bottom-up agreement, and reconstruction.
fn garland_suite(ctx: &mut PointCtx) -> Result<TheoremVerdict> {
    let f = ctx.function()?.clone();
    let x = f.complex();
    let k = f.level();
    let dim = x.dim();
    let scale = f.l2_norm().max(1.0);

    // links of top faces degenerate to {∅}, so both splits stop at dim - 1
    let cap = dim.saturating_sub(1);
    let mut restrict_gap = 0.0f64;
    for i in 0..=k.min(cap) {
        let (a, b) = garland_restrict(&f, i)?;
        restrict_gap = restrict_gap.max((a - b).abs());
    }
    let mut localize_gap = 0.0f64;
    for i in 0..=(dim - k).min(cap) {
        let (a, b) = garland_localize(&f, i)?;
        localize_gap = localize_gap.max((a - b).abs());
    }
    let adjoint_gap = if k >= 1 {
        let df = down(&f)?;
        (up(&df)?.inner(&f)? - df.inner(&df)?).abs()
    } else {
        0.0
    };
    let rec = bottom_up_recursive(&f)?;
    let exp = bottom_up_explicit(&f)?;
    let mut bu_gap = 0.0f64;
    for (a, b) in rec.g.iter().zip(&exp.g) {
        for (va, vb) in a.values().iter().zip(b.values()) {
            bu_gap = bu_gap.max((va - vb).abs());
        }
    }

    let mut v = verdict("exact-identities");
    v.params.insert("k".into(), k as f64);
    v.params.insert("dim".into(), dim as f64);
    v.rhs_terms.insert("restriction_gap".into(), restrict_gap);
    v.rhs_terms.insert("localization_gap".into(), localize_gap);
    v.rhs_terms.insert("adjoint_gap".into(), adjoint_gap);
    v.rhs_terms.insert("bottom_up_gap".into(), bu_gap);
    v.rhs_terms
        .insert("reconstruction_residual".into(), rec.residual);
    v.lhs = restrict_gap.max(localize_gap).max(adjoint_gap).max(bu_gap);
    let ok = v.lhs <= 1e-12 * scale && rec.residual <= 1e-9 * scale;
    v.pass = if ok {
        VerdictStatus::Pass
    } else {
        VerdictStatus::Fail
    };
    v.note = "Garland splits, adjointness, recursive = explicit bottom-up, sum of lifts".into();
    Ok(v)
}

fn anti_tribes(ctx: &mut PointCtx, c: &CheckSpec) -> Result<TheoremVerdict> {
    let p = ctx.p.axes;
    let cfg = ctx.cfg;
    let n = c.n.or(p.n).or(cfg.complex.n).ok_or_else(|| {
        HdxError::InvalidParameter("anti-tribes check needs n".into())
    })?;
    let k = c.k.or(p.k).or(cfg.function.level).ok_or_else(|| {
        HdxError::InvalidParameter("anti-tribes check needs k".into())
    })?;
    let big_k = c.big_k.ok_or_else(|| {
        HdxError::InvalidParameter("anti-tribes check needs big_k".into())
    })?;
    let cc = c.c.unwrap_or(1.0);
    let samples = c.samples.or(cfg.samples).unwrap_or(DEFAULT_SAMPLES);
    let mode = match c.mode.as_deref().unwrap_or("auto") {
        "auto" => TribesMode::Auto,
        "exact" => TribesMode::Exact,
        "monte-carlo" | "monte_carlo" => TribesMode::MonteCarlo,
        other => {
            return Err(HdxError::InvalidParameter(format!(
                "unknown anti-tribes mode {other:?} (auto | exact | monte-carlo)"
            )))
        }
    };
    let params = match (c.tribe_size, c.tribe_count) {
        (Some(t), Some(m)) => AntiTribesParams {
            n,
            k,
            tribe_size: t,
            tribe_count: m,
            big_k,
            c: cc,
            samples,
            seed: ctx.seed,
            mode,
        },
        (None, None) => AntiTribesParams::scaled(
            n,
            k,
            big_k,
            cc,
            c.c1.unwrap_or(1.0),
            samples,
            ctx.seed,
            mode,
        ),
        _ => {
            return Err(HdxError::InvalidParameter(
                "give both tribe_size and tribe_count, or neither".into(),
            ))
        }
    };
    anti_tribes_experiment(&params)
}

fn swap_bound(ctx: &mut PointCtx, c: &CheckSpec) -> Result<TheoremVerdict> {
    let i = c.i.or(ctx.p.axes.i).unwrap_or(1);
    let j = c.j.unwrap_or(i);
    let gamma = ctx.gamma()?;
    let (_, sigma2) = swap_walk(ctx.complex()?, i, j)?;
    let mut v = verdict("swap-walk-contraction");
    v.params.insert("i".into(), i as f64);
    v.params.insert("j".into(), j as f64);
    v.params.insert("gamma".into(), gamma);
    v.lhs = sigma2;
    let bound = i as f64 * j as f64 * gamma;
    v.rhs_terms.insert("ij_gamma".into(), bound);
    v.pass = if sigma2 <= bound + 1e-9 {
        VerdictStatus::Pass
    } else {
        VerdictStatus::Fail
    };
    Ok(v)
}

#[derive(Clone, Copy, Serialize)]
struct ComplexSummary {
    vertices: usize,
    dim: usize,
    top_faces: usize,
}

struct PointReport {
    idx: usize,
    axes: PointAxes,
    seed: u64,
    /// None when no check forced the complex into existence
    complex: Option<ComplexSummary>,
    k_used: Option<usize>,
    verdicts: Vec<(String, TheoremVerdict)>,
}

fn run_point(cfg: &ExperimentConfig, p: &Point) -> Result<PointReport> {
    // golden-ratio stride keeps per-point streams distinct and reproducible
    let seed = cfg
        .seed
        .unwrap_or(0)
        .wrapping_add((p.idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut ctx = PointCtx {
        cfg,
        p,
        seed,
        complex: None,
        function: None,
        gamma: None,
    };
    let mut verdicts = Vec::with_capacity(cfg.checks.len());
    for check in &cfg.checks {
        let mut v = run_check(&mut ctx, check)?;
        v.seed.get_or_insert(seed);
        verdicts.push((check.id.clone(), v));
    }
    let complex = ctx.complex.as_ref().map(|x| ComplexSummary {
        vertices: x.num_faces(1),
        dim: x.dim(),
        top_faces: x.num_faces(x.dim()),
    });
    let k_used = ctx.function.as_ref().map(|f| f.level());
    Ok(PointReport {
        idx: p.idx,
        axes: p.axes,
        seed,
        complex,
        k_used,
        verdicts,
    })
}

pub struct RunSummary {
    pub points: usize,
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub not_applicable: usize,
}

pub fn run(cfg: &ExperimentConfig, out_dir: &Path, sweep: bool) -> Result<RunSummary> {
    validate(cfg)?;
    let points = if sweep {
        grid(&cfg.sweep)
    } else {
        vec![Point::default()]
    };
    if points.len() > 10_000 {
        return Err(HdxError::InvalidParameter(format!(
            "sweep expands to {} points; split it up",
            points.len()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| HdxError::InvalidParameter(format!("worker pool: {e}")))?;
    let results: Vec<Result<PointReport>> =
        pool.install(|| points.par_iter().map(|p| run_point(cfg, p)).collect());
    let mut reports = Vec::with_capacity(results.len());
    for r in results {
        reports.push(r?);
    }
    let summary = write_reports(cfg, out_dir, &reports)?;
    for r in &reports {
        for (id, v) in &r.verdicts {
            let tag = match v.pass {
                VerdictStatus::Pass => "PASS",
                VerdictStatus::Fail => "FAIL",
                VerdictStatus::NotApplicable => " NA ",
            };
            println!(
                "[{tag}] point {} {}: {} lhs={:.6e}",
                r.idx, id, v.theorem, v.lhs
            );
            if v.pass == VerdictStatus::Fail && !v.note.is_empty() {
                println!("       {}", v.note);
            }
        }
    }
    println!(
        "{} point(s), {} check(s): {} passed, {} failed, {} n/a",
        summary.points, summary.rows, summary.passed, summary.failed, summary.not_applicable
    );
    println!("reports written to {}", out_dir.display());
    Ok(summary)
}

#[derive(Serialize)]
struct CheckVerdict<'a> {
    check: &'a str,
    verdict: &'a TheoremVerdict,
}

#[derive(Serialize)]
struct PointFile<'a> {
    point: &'a PointAxes,
    seed: u64,
    complex: Option<ComplexSummary>,
    verdicts: Vec<CheckVerdict<'a>>,
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

fn sanitize(s: &str) -> String {
    s.replace(',', ";").replace('\n', " ")
}

fn csv_row(cfg: &ExperimentConfig, r: &PointReport, id: &str, v: &TheoremVerdict) -> String {
    // per-row parameters win over point axes and config defaults, so rows
    // from checks like anti-tribes carry their own n and k
    let n = v
        .params
        .get("n")
        .map(|x| fmt_f(*x))
        .or_else(|| r.complex.map(|c| c.vertices.to_string()))
        .or_else(|| r.axes.n.map(|x| x.to_string()))
        .or_else(|| cfg.complex.n.map(|x| x.to_string()))
        .unwrap_or_default();
    let d = r
        .complex
        .map(|c| c.dim.to_string())
        .or_else(|| cfg.complex.d.map(|x| x.to_string()))
        .unwrap_or_default();
    let k = v
        .params
        .get("k")
        .map(|x| fmt_f(*x))
        .or_else(|| r.k_used.map(|x| x.to_string()))
        .or_else(|| r.axes.k.map(|x| x.to_string()))
        .or_else(|| cfg.function.level.map(|x| x.to_string()))
        .unwrap_or_default();
    let i = v
        .params
        .get("i")
        .map(|x| fmt_f(*x))
        .or_else(|| r.axes.i.map(|x| x.to_string()))
        .unwrap_or_default();
    let rho = v
        .params
        .get("rho")
        .map(|x| fmt_f(*x))
        .or_else(|| r.axes.rho.map(fmt_f))
        .unwrap_or_default();
    let delta = v
        .params
        .get("delta")
        .map(|x| fmt_f(*x))
        .or_else(|| r.axes.delta.map(fmt_f))
        .unwrap_or_default();
    let seed = v.seed.unwrap_or(r.seed).to_string();
    let rhs_sum = if v.rhs_terms.is_empty() {
        String::new()
    } else {
        fmt_f(v.rhs_terms.values().sum())
    };
    let fitted = v
        .fitted_constants
        .values()
        .copied()
        .fold(None::<f64>, |acc, x| Some(acc.map_or(x, |a| a.max(x))));
    let fitted = fitted.map(fmt_f).unwrap_or_default();
    let pass = match v.pass {
        VerdictStatus::Pass => "pass",
        VerdictStatus::Fail => "fail",
        VerdictStatus::NotApplicable => "na",
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.idx,
        id,
        v.theorem,
        n,
        d,
        k,
        i,
        rho,
        delta,
        seed,
        fmt_f(v.lhs),
        rhs_sum,
        fitted,
        pass,
        sanitize(&v.note)
    )
}

fn write_reports(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    reports: &[PointReport],
) -> Result<RunSummary> {
    fs::create_dir_all(out_dir)?;
    let (mut passed, mut failed, mut na) = (0usize, 0usize, 0usize);
    let mut csv = String::new();
    csv.push_str("# hdx-report-csv v1\n");
    csv.push_str(&format!("# columns: {CSV_COLUMNS}\n"));
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    // the one line determinism comparisons must strip
    csv.push_str(&format!("# generated: unix:{stamp}\n"));
    csv.push_str(CSV_COLUMNS);
    csv.push('\n');
    for r in reports {
        for (id, v) in &r.verdicts {
            match v.pass {
                VerdictStatus::Pass => passed += 1,
                VerdictStatus::Fail => failed += 1,
                VerdictStatus::NotApplicable => na += 1,
            }
            csv.push_str(&csv_row(cfg, r, id, v));
            csv.push('\n');
        }
    }
    fs::write(out_dir.join("report.csv"), &csv)?;
    for r in reports {
        let file = PointFile {
            point: &r.axes,
            seed: r.seed,
            complex: r.complex,
            verdicts: r
                .verdicts
                .iter()
                .map(|(id, v)| CheckVerdict {
                    check: id,
                    verdict: v,
                })
                .collect(),
        };
        let path = out_dir.join(format!("point_{:04}.json", r.idx));
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, &file).map_err(|e| HdxError::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
        w.write_all(b"\n")?;
        w.flush()?;
    }
    Ok(RunSummary {
        points: reports.len(),
        rows: passed + failed + na,
        passed,
        failed,
        not_applicable: na,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_from(json: &str) -> ExperimentConfig {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn grid_expands_in_row_major_order() {
        let axes: SweepAxes =
            serde_json::from_str(r#"{"n": [5, 6], "rho": [0.1, 0.9]}"#).unwrap();
        let g = grid(&axes);
        assert_eq!(g.len(), 4);
        assert_eq!((g[0].axes.n, g[0].axes.rho), (Some(5), Some(0.1)));
        assert_eq!((g[1].axes.n, g[1].axes.rho), (Some(5), Some(0.9)));
        assert_eq!((g[3].axes.n, g[3].axes.rho), (Some(6), Some(0.9)));
        assert!(g.iter().all(|p| p.axes.k.is_none()));
        assert_eq!(grid(&SweepAxes::default()).len(), 1);
    }

    #[test]
    fn seed_gate_tracks_what_actually_runs() {
        // stochastic function source but only deterministic checks touch it
        let cfg = cfg_from(
            r#"{"complex": {"n": 6}, "checks": [{"id": "garland"}]}"#,
        );
        assert!(validate(&cfg).is_err());
        let cfg = cfg_from(
            r#"{"complex": {"n": 6}, "checks": [{"id": "garland"}], "seed": 3}"#,
        );
        assert!(validate(&cfg).is_ok());
        // swap-bound never builds the function, so no seed is needed
        let cfg = cfg_from(r#"{"complex": {"n": 6}, "checks": [{"id": "swap-bound"}]}"#);
        assert!(validate(&cfg).is_ok());
        // exact anti-tribes is deterministic, Monte Carlo is not
        let cfg = cfg_from(
            r#"{"checks": [{"id": "anti-tribes", "n": 10, "k": 5, "big_k": 3.0,
                "tribe_size": 2, "tribe_count": 2, "mode": "exact"}]}"#,
        );
        assert!(validate(&cfg).is_ok());
        let cfg = cfg_from(
            r#"{"checks": [{"id": "anti-tribes", "n": 10, "k": 5, "big_k": 3.0,
                "tribe_size": 2, "tribe_count": 2, "mode": "monte-carlo"}]}"#,
        );
        assert!(validate(&cfg).is_err());
    }

    #[test]
    fn unknown_check_id_is_rejected_up_front() {
        let cfg = cfg_from(r#"{"checks": [{"id": "foo"}]}"#);
        let err = validate(&cfg).unwrap_err().to_string();
        assert!(err.contains("foo"), "{err}");
    }

    #[test]
    fn mini_run_writes_csv_and_point_files() {
        let cfg = cfg_from(
            r#"{"complex": {"n": 5, "d": 2},
                "function": {"kind": "constant", "value": 2.0},
                "checks": [{"id": "garland"}, {"id": "swap-bound"}]}"#,
        );
        let dir = tempfile::tempdir().unwrap();
        let summary = run(&cfg, dir.path(), false).unwrap();
        assert_eq!(summary.rows, 2);
        assert_eq!(summary.failed, 0);
        let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
        assert!(csv.starts_with("# hdx-report-csv v1\n"), "{csv}");
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
        let point: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("point_0000.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(point["verdicts"][0]["check"], "garland");
        assert_eq!(point["verdicts"][1]["verdict"]["pass"], "pass");
        assert_eq!(point["complex"]["vertices"], 5);
    }
}
