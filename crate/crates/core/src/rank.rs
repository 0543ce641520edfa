//! Candidate scoring: structural dissimilarity against the representative
//! cone combined with an implementation-quality objective.

use std::collections::HashSet;

use thiserror::Error;

use crate::aig::{compute_depth, compute_fanout, random_patterns, simulate, AigNetwork};
use crate::mutate::CandidateVariant;
use crate::rng::rng_from;
use crate::Mode;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RankError {
    #[error("input count mismatch: {0} vs {1}")]
    InputMismatch(usize, usize),
    #[error("at least one simulation word is required")]
    NoWords,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreRecord {
    pub s_sim: f64,
    pub s_and: f64,
    pub s_pearson: f64,
    /// Set when fewer than two nodes were available for correlation.
    pub pearson_degenerate: bool,
    pub s_hybrid: f64,
    pub q_obj: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankConfig {
    pub mode: Mode,
    pub alpha: f64,
    pub beta: f64,
    pub topk: usize,
    pub n_words: usize,
    pub seed: u64,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig { mode: Mode::Delay, alpha: 2.0, beta: 3.0, topk: 3, n_words: 16, seed: 0 }
    }
}

fn normalized(words: &[u64]) -> Vec<u64> {
    if words[0] & 1 == 1 {
        words.iter().map(|w| !w).collect()
    } else {
        words.to_vec()
    }
}

/// Fraction of candidate AND nodes whose simulated function (up to
/// complement) matches no subject AND node. Inputs are ignored on both
/// sides.
pub fn sim_dissimilarity(subj: &AigNetwork, cand: &AigNetwork, n_words: usize, seed: u64) -> Result<f64, RankError> {
    if subj.num_inputs() != cand.num_inputs() {
        return Err(RankError::InputMismatch(subj.num_inputs(), cand.num_inputs()));
    }
    if n_words == 0 {
        return Err(RankError::NoWords);
    }
    let pats = random_patterns(subj.num_inputs(), n_words, &mut rng_from(seed));
    let ss = simulate(subj, &pats, n_words).expect("shape checked");
    let cs = simulate(cand, &pats, n_words).expect("shape checked");
    let seen: HashSet<Vec<u64>> = subj.and_nodes().map(|n| normalized(ss.node(n))).collect();
    let total = cand.and_count();
    if total == 0 {
        return Ok(0.0);
    }
    let misses = cand.and_nodes().filter(|&n| !seen.contains(&normalized(cs.node(n)))).count();
    Ok(misses as f64 / total as f64)
}

/// `|A_s - A_c| / max(A_s, A_c, 1)` over AND counts.
pub fn and_disparity(subj: &AigNetwork, cand: &AigNetwork) -> f64 {
    let (a, b) = (subj.and_count(), cand.and_count());
    a.abs_diff(b) as f64 / a.max(b).max(1) as f64
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let m = x.len().min(y.len());
    if m == 0 {
        return None;
    }
    let (x, y) = (&x[..m], &y[..m]);
    let mx = x.iter().sum::<f64>() / m as f64;
    let my = y.iter().sum::<f64>() / m as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// |ρ| with the zero-variance convention: equal sequences correlate fully,
/// anything else not at all. Equal sequences short-circuit to exactly 1 so
/// rounding cannot leave a self-pair slightly dissimilar.
fn abs_correlation(x: &[f64], y: &[f64]) -> f64 {
    if x == y {
        return 1.0;
    }
    pearson(x, y).map_or(0.0, f64::abs)
}

/// Score from explicit depth and fanout sequences, truncated to the shorter
/// length `m`. Returns `(score, degenerate)`; `m < 2` yields `(0, true)`.
pub fn pearson_from_sequences(d1: &[f64], f1: &[f64], d2: &[f64], f2: &[f64]) -> (f64, bool) {
    let m = d1.len().min(d2.len()).min(f1.len()).min(f2.len());
    if m < 2 {
        return (0.0, true);
    }
    let rd = abs_correlation(&d1[..m], &d2[..m]);
    let rf = abs_correlation(&f1[..m], &f2[..m]);
    ((1.0 - (rd + rf) / 2.0).clamp(0.0, 1.0), false)
}

fn depth_fanout_sequences(net: &AigNetwork) -> (Vec<f64>, Vec<f64>) {
    let depth = compute_depth(net);
    let fanout = compute_fanout(net);
    // constant node excluded; index order is topological
    (depth[1..].iter().map(|&d| d as f64).collect(), fanout[1..].iter().map(|&f| f as f64).collect())
}

/// `1 - (|ρ_depth| + |ρ_fanout|) / 2` over per-node depth and fanout
/// sequences paired by position. Returns the score and a degenerate flag.
pub fn pearson_dissimilarity(subj: &AigNetwork, cand: &AigNetwork) -> (f64, bool) {
    let (d1, f1) = depth_fanout_sequences(subj);
    let (d2, f2) = depth_fanout_sequences(cand);
    pearson_from_sequences(&d1, &f1, &d2, &f2)
}

/// Relative depth (delay mode) or size (area mode) improvement of `cand`
/// over `rc`, clamped to `[-1, 1]`.
pub fn quality_score(rc: &AigNetwork, cand: &AigNetwork, mode: Mode) -> f64 {
    let (r, c) = match mode {
        Mode::Delay => (rc.depth() as f64, cand.depth() as f64),
        Mode::Area => (rc.and_count() as f64, cand.and_count() as f64),
    };
    ((r - c) / r.max(1.0)).clamp(-1.0, 1.0)
}

pub fn score_candidate(rc: &AigNetwork, cand: &AigNetwork, cfg: &RankConfig) -> Result<ScoreRecord, RankError> {
    let s_sim = sim_dissimilarity(rc, cand, cfg.n_words, cfg.seed)?;
    let s_and = and_disparity(rc, cand);
    let (s_pearson, pearson_degenerate) = pearson_dissimilarity(rc, cand);
    let s_hybrid = (s_sim + s_and + s_pearson) / 3.0;
    let q_obj = quality_score(rc, cand, cfg.mode);
    Ok(ScoreRecord {
        s_sim,
        s_and,
        s_pearson,
        pearson_degenerate,
        s_hybrid,
        q_obj,
        total: cfg.alpha * s_hybrid + cfg.beta * q_obj,
    })
}

/// Orders `(score, size)` pairs by descending weighted total,
/// then higher `s_hybrid`, then smaller size, then input position.
pub fn rank_order(scores: &[(ScoreRecord, usize)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        let (sa, za) = scores[a];
        let (sb, zb) = scores[b];
        sb.total.total_cmp(&sa.total).then(sb.s_hybrid.total_cmp(&sa.s_hybrid)).then(za.cmp(&zb)).then(a.cmp(&b))
    });
    idx
}

/// Scores every candidate and keeps the best `topk`.
pub fn rank_candidates(
    rc: &AigNetwork,
    candidates: Vec<CandidateVariant>,
    cfg: &RankConfig,
) -> Result<Vec<(CandidateVariant, ScoreRecord)>, RankError> {
    let scores: Vec<(ScoreRecord, usize)> =
        candidates.iter().map(|c| score_candidate(rc, &c.net, cfg).map(|s| (s, c.size))).collect::<Result<_, _>>()?;
    let order = rank_order(&scores);
    let mut slots: Vec<Option<CandidateVariant>> = candidates.into_iter().map(Some).collect();
    Ok(order.into_iter().take(cfg.topk).map(|i| (slots[i].take().expect("each index once"), scores[i].0)).collect())
}
