//! Candidate pool assembly for one representative cone.

use super::extract::extract_variants;
use super::native::{native_balance, native_simplify};
use super::rules::{default_rules, saturate, RewriteRule, SaturationLimits};
use super::{cone_to_term, CandidateVariant, EGraph, MutateError, Provenance};
use crate::aig::AigNetwork;
use crate::rng::derive_seed;
use crate::verify::{cec_exhaustive, cec_random, Verdict, MAX_EXHAUSTIVE_INPUTS};
use crate::Mode;

#[derive(Clone, Debug)]
pub struct MutateConfig {
    pub limits: SaturationLimits,
    pub rules: Vec<RewriteRule>,
    /// Random-simulation words for cones too wide for exhaustive checking
    /// (16 words = 1024 patterns).
    pub check_words: usize,
}

impl Default for MutateConfig {
    fn default() -> Self {
        MutateConfig { limits: SaturationLimits::default(), rules: default_rules(), check_words: 16 }
    }
}

/// Builds up to `n` distinct variants of `rc`, none structurally identical
/// to `rc` itself. Priority order: depth extraction, size extraction,
/// balance, simplify, balance after simplify, then random tie-break
/// extractions. Every admitted variant has passed an equivalence check.
pub fn generate_candidates(
    rc: &AigNetwork,
    mode: Mode,
    n: usize,
    seed: u64,
    cfg: &MutateConfig,
) -> Result<Vec<CandidateVariant>, MutateError> {
    let term = cone_to_term(rc)?;
    let rc = rc.cleanup();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut eg = EGraph::new();
    let root = eg.add_term(&term).expect("term is non-empty");
    saturate(&mut eg, &cfg.rules, &cfg.limits);

    let ni = rc.num_inputs();
    let extract = |m: Mode, count: usize| extract_variants(&eg, root, ni, m, count, seed).unwrap_or_default();
    let mut eqsat_depth = extract(Mode::Delay, if mode == Mode::Delay { n + 1 } else { 1 });
    let mut eqsat_size = extract(Mode::Area, if mode == Mode::Area { n + 1 } else { 1 });
    let randoms: Vec<CandidateVariant> = match mode {
        Mode::Delay => eqsat_depth.split_off(eqsat_depth.len().min(1)),
        Mode::Area => eqsat_size.split_off(eqsat_size.len().min(1)),
    };

    let simplified = native_simplify(&rc);
    let mut sources: Vec<CandidateVariant> = Vec::new();
    sources.extend(eqsat_depth);
    sources.extend(eqsat_size);
    sources.push(CandidateVariant::new(native_balance(&rc), Provenance::NativeBalance));
    sources.push(CandidateVariant::new(simplified.clone(), Provenance::NativeSimplify));
    sources.push(CandidateVariant::new(native_balance(&simplified), Provenance::NativeBalance));
    sources.extend(randoms);

    let mut pool: Vec<CandidateVariant> = Vec::new();
    for (k, mut v) in sources.into_iter().enumerate() {
        if pool.len() >= n {
            break;
        }
        if mode == Mode::Area
            && matches!(v.provenance, Provenance::EqSatDepth | Provenance::EqSatSize | Provenance::EqSatRandom(_))
        {
            v = CandidateVariant::new(native_simplify(&v.net), v.provenance);
        }
        if v.net.structurally_equal(&rc) || pool.iter().any(|p| p.net.structurally_equal(&v.net)) {
            continue;
        }
        let verdict = if ni <= MAX_EXHAUSTIVE_INPUTS {
            cec_exhaustive(&rc, &v.net)
        } else {
            cec_random(&rc, &v.net, cfg.check_words, derive_seed(seed, k as u64))
        };
        if matches!(verdict, Ok(Verdict::Equivalent) | Ok(Verdict::NoMismatchObserved)) {
            pool.push(v);
        }
    }
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn single_and_has_no_distinct_variant() {
        let rc = gen::and_chain(2);
        let pool = generate_candidates(&rc, Mode::Delay, 10, 0, &MutateConfig::default()).unwrap();
        assert!(pool.len() <= 1);
    }

    #[test]
    fn twelve_node_chain_pool() {
        let rc = gen::and_chain(13);
        assert_eq!(rc.and_count(), 12);
        let pool = generate_candidates(&rc, Mode::Delay, 10, 1, &MutateConfig::default()).unwrap();
        assert!(pool.len() <= 10);
        assert!(pool.iter().any(|v| v.depth == 4), "balanced variant expected");
        assert!(pool.iter().any(|v| v.size == 12), "size-preserving reassociation expected");
        for v in &pool {
            assert_eq!(cec_exhaustive(&rc, &v.net), Ok(Verdict::Equivalent));
            assert!(!v.net.structurally_equal(&rc));
        }
    }

    #[test]
    fn pool_is_deterministic() {
        let rc = gen::random_tree(9, 4);
        let cfg = MutateConfig::default();
        let a = generate_candidates(&rc, Mode::Area, 10, 42, &cfg).unwrap();
        let b = generate_candidates(&rc, Mode::Area, 10, 42, &cfg).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!(x.net.structurally_equal(&y.net));
            assert_eq!(x.provenance, y.provenance);
        }
    }

    #[test]
    fn pool_size_respected() {
        let rc = gen::random_tree(10, 2);
        for n in [1, 3] {
            let pool = generate_candidates(&rc, Mode::Delay, n, 5, &MutateConfig::default()).unwrap();
            assert!(pool.len() <= n);
        }
    }
}
