//! End-to-end flow: cone selection, variant generation, ranking, choice
//! network construction and mapping with and without choices.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::aig::AigNetwork;
use crate::choice::{
    build_choice_network, class_stats, remove_bad_choices, validate_choice_network, ChoiceError, ChoiceNetwork,
    ClassStats, ValidationReport,
};
use crate::cone::{extract_cone_aig, select_representative_cones, Cone, ConeError, SelectionConfig};
use crate::mapper::{map, MapConfig, MapError, MappingResult, VERIFY_RANDOM_WORDS};
use crate::mutate::{generate_candidates, CandidateVariant, MutateConfig, MutateError, SaturationLimits};
use crate::rank::{rank_candidates, RankConfig, RankError, ScoreRecord};
use crate::rng::derive_seed;
use crate::verify::{cec_exhaustive, cec_random, Verdict, VerifyError, MAX_EXHAUSTIVE_INPUTS};
use crate::Mode;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    /// Exhaustive up to 16 inputs, random beyond.
    Auto,
    Exhaustive,
    Random,
    Off,
}

impl std::str::FromStr for VerifyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(VerifyMode::Auto),
            "exhaustive" => Ok(VerifyMode::Exhaustive),
            "random" => Ok(VerifyMode::Random),
            "off" => Ok(VerifyMode::Off),
            other => Err(format!("unknown verify mode `{other}`")),
        }
    }
}

impl std::fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerifyMode::Auto => "auto",
            VerifyMode::Exhaustive => "exhaustive",
            VerifyMode::Random => "random",
            VerifyMode::Off => "off",
        })
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub k: usize,
    pub cut_limit: usize,
    pub rounds: usize,
    pub thresholds: Vec<usize>,
    pub fanout_limit: u32,
    pub alpha: f64,
    pub beta: f64,
    pub topk: usize,
    pub candidates: usize,
    pub n_words: usize,
    pub seed: u64,
    pub verify: VerifyMode,
    pub limits: SaturationLimits,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sel = SelectionConfig::default();
        RunConfig {
            mode: Mode::Delay,
            k: 6,
            cut_limit: 8,
            rounds: 2,
            thresholds: sel.thresholds,
            fanout_limit: sel.fanout_limit,
            alpha: 2.0,
            beta: 3.0,
            topk: 3,
            candidates: 10,
            n_words: 16,
            seed: 0,
            verify: VerifyMode::Auto,
            limits: SaturationLimits::default(),
        }
    }
}

impl RunConfig {
    fn selection(&self) -> SelectionConfig {
        SelectionConfig {
            mode: self.mode,
            thresholds: self.thresholds.clone(),
            fanout_limit: self.fanout_limit,
            ..SelectionConfig::default()
        }
    }

    fn map_config(&self) -> MapConfig {
        MapConfig { k: self.k, cut_limit: self.cut_limit, rounds: self.rounds }
    }

    fn rank_config(&self, seed: u64) -> RankConfig {
        RankConfig { mode: self.mode, alpha: self.alpha, beta: self.beta, topk: self.topk, n_words: self.n_words, seed }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        self.selection().validate()?;
        self.map_config().validate()?;
        if self.n_words == 0 {
            return Err(FlowError::Config("nwords must be at least 1".into()));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(FlowError::Config("alpha and beta must be finite".into()));
        }
        self.limits.validate().map_err(|e| FlowError::Config(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Mutate(#[from] MutateError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Choice(#[from] ChoiceError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("choice network failed validation with {0} violations")]
    InvalidChoices(usize),
}

/// Wall-clock time per stage. Stages are consecutive intervals, so they add
/// up to `total`.
#[derive(Clone, Copy, Debug, Default)]
pub struct StageTimings {
    pub selection: Duration,
    pub generation: Duration,
    /// Ranking plus choice network construction and validation.
    pub filtering: Duration,
    pub mapping: Duration,
    pub verification: Duration,
    pub total: Duration,
}

impl StageTimings {
    /// `key = value` lines in milliseconds.
    pub fn render(&self) -> String {
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        let mut s = String::new();
        for (k, d) in [
            ("time.selection_ms", self.selection),
            ("time.generation_ms", self.generation),
            ("time.filtering_ms", self.filtering),
            ("time.mapping_ms", self.mapping),
            ("time.verification_ms", self.verification),
            ("time.total_ms", self.total),
        ] {
            let _ = writeln!(s, "{k} = {:.3}", ms(d));
        }
        s
    }
}

/// What happened to one representative cone.
#[derive(Clone, Debug)]
pub struct ConeOutcome {
    pub cone: Cone,
    pub pool_size: usize,
    pub kept: Vec<(CandidateVariant, ScoreRecord)>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub subject: AigNetwork,
    pub cones: Vec<ConeOutcome>,
    pub choice_network: ChoiceNetwork,
    pub validation: ValidationReport,
    pub stats: ClassStats,
    pub with_choices: MappingResult,
    pub without_choices: MappingResult,
    pub verify_with: Option<Verdict>,
    pub verify_without: Option<Verdict>,
    pub timings: StageTimings,
}

fn check(subject: &AigNetwork, r: &MappingResult, how: VerifyMode, seed: u64) -> Result<Option<Verdict>, VerifyError> {
    let exhaustive = match how {
        VerifyMode::Off => return Ok(None),
        VerifyMode::Exhaustive => true,
        VerifyMode::Random => false,
        VerifyMode::Auto => subject.num_inputs() <= MAX_EXHAUSTIVE_INPUTS,
    };
    let v = if exhaustive {
        cec_exhaustive(subject, &r.netlist)?
    } else {
        cec_random(subject, &r.netlist, VERIFY_RANDOM_WORDS, seed)?
    };
    Ok(Some(v))
}

/// Sizes the worker pool used for per-cone work. Output does not depend on
/// it. Only the first call in a process takes effect.
pub fn configure_jobs(jobs: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().map_err(|e| e.to_string())
}

/// Runs the whole flow on `input`. The input is cleaned up (dangling logic
/// removed, structurally hashed) before anything else.
pub fn run(input: &AigNetwork, cfg: &RunConfig) -> Result<RunOutcome, FlowError> {
    cfg.validate()?;
    let t0 = Instant::now();
    let subject = input.cleanup();
    let cones = select_representative_cones(&subject, &cfg.selection());
    let t1 = Instant::now();

    let mcfg = MutateConfig { limits: cfg.limits.clone(), ..MutateConfig::default() };
    let pools: Vec<(AigNetwork, Vec<CandidateVariant>)> = cones
        .par_iter()
        .map(|c| -> Result<_, FlowError> {
            let rc = extract_cone_aig(&subject, c)?;
            let pool = generate_candidates(&rc, cfg.mode, cfg.candidates, derive_seed(cfg.seed, c.root as u64), &mcfg)?;
            Ok((rc, pool))
        })
        .collect::<Result<_, _>>()?;
    let t2 = Instant::now();

    let outcomes: Vec<ConeOutcome> = cones
        .par_iter()
        .zip(pools)
        .map(|(c, (rc, pool))| -> Result<_, FlowError> {
            let pool_size = pool.len();
            let rcfg = cfg.rank_config(derive_seed(cfg.seed ^ 0x5eed, c.root as u64));
            let kept = rank_candidates(&rc, pool, &rcfg)?;
            Ok(ConeOutcome { cone: c.clone(), pool_size, kept })
        })
        .collect::<Result<_, _>>()?;
    let selections: Vec<(Cone, Vec<CandidateVariant>)> =
        outcomes.iter().map(|o| (o.cone.clone(), o.kept.iter().map(|(v, _)| v.clone()).collect())).collect();
    let built = build_choice_network(&subject, &selections)?;
    let cn = remove_bad_choices(&built);
    let validation = validate_choice_network(&cn, cfg.seed);
    if !validation.is_valid() {
        return Err(FlowError::InvalidChoices(validation.violations.len()));
    }
    let stats = class_stats(&cn);
    let t3 = Instant::now();

    let mcfg = cfg.map_config();
    let with_choices = map(&cn, cfg.mode, &mcfg)?;
    let without_choices = map(&ChoiceNetwork::plain(cn.net.clone()), cfg.mode, &mcfg)?;
    let t4 = Instant::now();

    let verify_with = check(&subject, &with_choices, cfg.verify, cfg.seed)?;
    let verify_without = check(&subject, &without_choices, cfg.verify, cfg.seed)?;
    let t5 = Instant::now();

    let timings = StageTimings {
        selection: t1 - t0,
        generation: t2 - t1,
        filtering: t3 - t2,
        mapping: t4 - t3,
        verification: t5 - t4,
        total: t5 - t0,
    };
    Ok(RunOutcome {
        subject,
        cones: outcomes,
        choice_network: cn,
        validation,
        stats,
        with_choices,
        without_choices,
        verify_with,
        verify_without,
        timings,
    })
}

impl RunOutcome {
    /// True unless a verification ran and found a counterexample.
    pub fn verified_ok(&self) -> bool {
        ![&self.verify_with, &self.verify_without].iter().any(|v| v.as_ref().is_some_and(Verdict::is_counterexample))
    }

    /// Deterministic `key = value` report (no timings).
    pub fn report(&self, name: &str, cfg: &RunConfig) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("input", name.to_string());
        kv("config.mode", cfg.mode.to_string());
        kv("config.k", cfg.k.to_string());
        kv("config.cut_limit", cfg.cut_limit.to_string());
        kv("config.rounds", cfg.rounds.to_string());
        kv("config.thresholds", cfg.thresholds.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","));
        kv("config.fanout_limit", cfg.fanout_limit.to_string());
        kv("config.alpha", format!("{}", cfg.alpha));
        kv("config.beta", format!("{}", cfg.beta));
        kv("config.topk", cfg.topk.to_string());
        kv("config.candidates", cfg.candidates.to_string());
        kv("config.nwords", cfg.n_words.to_string());
        kv("config.seed", cfg.seed.to_string());
        kv("config.verify", cfg.verify.to_string());
        kv("subject.inputs", self.subject.num_inputs().to_string());
        kv("subject.outputs", self.subject.num_outputs().to_string());
        kv("subject.ands", self.subject.and_count().to_string());
        kv("subject.depth", self.subject.depth().to_string());

        let mut per_threshold: BTreeMap<(usize, String), usize> = BTreeMap::new();
        for o in &self.cones {
            *per_threshold.entry((o.cone.threshold, o.cone.kind.to_string())).or_default() += 1;
        }
        kv("cones.total", self.cones.len().to_string());
        for t in &cfg.thresholds {
            for kind in ["mffc", "lowfanout"] {
                if let Some(n) = per_threshold.get(&(*t, kind.to_string())) {
                    kv(&format!("cones.threshold.{t}.{kind}"), n.to_string());
                }
            }
        }
        for (i, o) in self.cones.iter().enumerate() {
            let c = &o.cone;
            kv(
                &format!("cone.{i}"),
                format!(
                    "root={} kind={} threshold={} size={} support={} pool={} kept={}",
                    c.root,
                    c.kind,
                    c.threshold,
                    c.size(),
                    c.support.len(),
                    o.pool_size,
                    o.kept.len()
                ),
            );
            for (j, (v, r)) in o.kept.iter().enumerate() {
                kv(
                    &format!("cone.{i}.cand.{j}"),
                    format!(
                        "provenance={} size={} depth={} total={:.6} hybrid={:.6} sim={:.6} and={:.6} pearson={:.6}{} q={:.6}",
                        v.provenance,
                        v.size,
                        v.depth,
                        r.total,
                        r.s_hybrid,
                        r.s_sim,
                        r.s_and,
                        r.s_pearson,
                        if r.pearson_degenerate { "(degenerate)" } else { "" },
                        r.q_obj
                    ),
                );
            }
        }
        kv("choices.classes", self.stats.classes.to_string());
        kv("choices.choices", self.stats.choices.to_string());
        let hist: Vec<String> = self.stats.histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        kv("choices.histogram", hist.join(","));
        kv("choices.valid", self.validation.is_valid().to_string());
        kv("map.without.depth", self.without_choices.mapped_depth.to_string());
        kv("map.without.luts", self.without_choices.lut_count.to_string());
        kv("map.with.depth", self.with_choices.mapped_depth.to_string());
        kv("map.with.luts", self.with_choices.lut_count.to_string());
        let label = |v: &Option<Verdict>| v.as_ref().map_or("skipped", Verdict::label).to_string();
        kv("verify.with", label(&self.verify_with));
        kv("verify.without", label(&self.verify_without));
        s
    }
}

/// One benchmark row.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub name: String,
    pub ands: usize,
    pub depth_without: u32,
    pub depth_with: u32,
    pub luts_without: usize,
    pub luts_with: usize,
    pub verified: bool,
    pub seconds: f64,
}

impl BenchRow {
    pub fn from_outcome(name: &str, o: &RunOutcome) -> Self {
        BenchRow {
            name: name.to_string(),
            ands: o.subject.and_count(),
            depth_without: o.without_choices.mapped_depth,
            depth_with: o.with_choices.mapped_depth,
            luts_without: o.without_choices.lut_count,
            luts_with: o.with_choices.lut_count,
            verified: o.verified_ok(),
            seconds: o.timings.total.as_secs_f64(),
        }
    }
}

/// Improvement in percent: positive when `with` is smaller.
pub fn improvement(without: f64, with: f64) -> f64 {
    if without == 0.0 {
        0.0
    } else {
        (1.0 - with / without) * 100.0
    }
}

/// Geometric mean of `with / without` ratios; pairs with a zero baseline
/// count as ratio 1.
pub fn geomean_ratio(pairs: &[(f64, f64)]) -> f64 {
    if pairs.is_empty() {
        return 1.0;
    }
    let logs: f64 = pairs.iter().map(|&(w0, w1)| if w0 == 0.0 || w1 == 0.0 { 0.0 } else { (w1 / w0).ln() }).sum();
    (logs / pairs.len() as f64).exp()
}

/// Tab-separated table with a trailing geomean row.
pub fn bench_table(rows: &[BenchRow]) -> String {
    let mut s = String::from(
        "circuit\tands\tdepth_without\tdepth_with\tdepth_impr_pct\tluts_without\tluts_with\tarea_impr_pct\tverified\tseconds\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{:.2}\t{}\t{}\t{:.2}\t{}\t{:.3}",
            r.name,
            r.ands,
            r.depth_without,
            r.depth_with,
            improvement(r.depth_without as f64, r.depth_with as f64),
            r.luts_without,
            r.luts_with,
            improvement(r.luts_without as f64, r.luts_with as f64),
            r.verified,
            r.seconds
        );
    }
    let depth: Vec<(f64, f64)> = rows.iter().map(|r| (r.depth_without as f64, r.depth_with as f64)).collect();
    let luts: Vec<(f64, f64)> = rows.iter().map(|r| (r.luts_without as f64, r.luts_with as f64)).collect();
    let (gd, ga) = (geomean_ratio(&depth), geomean_ratio(&luts));
    let _ = writeln!(
        s,
        "geomean\t-\t-\t-\t{:.2}\t-\t-\t{:.2}\t{}\t{:.3}",
        (1.0 - gd) * 100.0,
        (1.0 - ga) * 100.0,
        rows.iter().all(|r| r.verified),
        rows.iter().map(|r| r.seconds).sum::<f64>()
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn small_run_is_consistent() {
        let net = gen::ripple_adder(4);
        let cfg = RunConfig { thresholds: vec![6, 3], ..Default::default() };
        let o = run(&net, &cfg).unwrap();
        assert!(o.validation.is_valid());
        assert_eq!(o.verify_with, Some(Verdict::Equivalent));
        assert_eq!(o.verify_without, Some(Verdict::Equivalent));
        assert!(o.with_choices.mapped_depth <= o.without_choices.mapped_depth);
        let t = o.timings;
        let sum = t.selection + t.generation + t.filtering + t.mapping + t.verification;
        assert_eq!(sum, t.total);
    }

    #[test]
    fn report_is_deterministic() {
        let net = gen::random_network(10, 120, 4, 5);
        let cfg = RunConfig { thresholds: vec![20, 10, 5], seed: 7, ..Default::default() };
        let a = run(&net, &cfg).unwrap();
        let b = run(&net, &cfg).unwrap();
        assert_eq!(a.report("x", &cfg), b.report("x", &cfg));
    }

    #[test]
    fn empty_network_runs() {
        let net = AigNetwork::new();
        let o = run(&net, &RunConfig::default()).unwrap();
        assert_eq!(o.stats.classes, 0);
        assert_eq!(o.with_choices.lut_count, 0);
    }

    #[test]
    fn geomean_of_identical_is_zero_improvement() {
        assert_eq!(geomean_ratio(&[(4.0, 4.0), (7.0, 7.0)]), 1.0);
        assert!((geomean_ratio(&[(4.0, 2.0), (4.0, 8.0)]) - 1.0).abs() < 1e-12);
        assert_eq!(improvement(10.0, 5.0), 50.0);
    }

    #[test]
    fn bench_table_has_geomean_row() {
        let row = |n: &str| BenchRow {
            name: n.into(),
            ands: 3,
            depth_without: 3,
            depth_with: 2,
            luts_without: 2,
            luts_with: 2,
            verified: true,
            seconds: 0.0,
        };
        let t = bench_table(&[row("a"), row("b"), row("c")]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("geomean\t"));
    }
}
