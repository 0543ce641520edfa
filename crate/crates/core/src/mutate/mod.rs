//! Structural variant generation for representative cones.
//!
//! Variants come from equality saturation over a Boolean e-graph plus a
//! pair of native local passes (balancing and simplification).

pub mod candidates;
pub mod egraph;
pub mod extract;
pub mod native;
pub mod rules;

use std::fmt;

use thiserror::Error;

use crate::aig::{AigNetwork, Node, NodeRef};

pub use candidates::{generate_candidates, MutateConfig};
pub use egraph::{EGraph, ENode, Id, Term};
pub use extract::{extract_variants, Cost, CostTable, ExtractError};
pub use native::{native_balance, native_simplify};
pub use rules::{default_rules, saturate, RewriteRule, RuleError, SaturationLimits, SaturationReport, StopReason};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MutateError {
    #[error("cone network must have exactly one output, found {0}")]
    NotSingleOutput(usize),
}

/// Where a variant came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    EqSatDepth,
    EqSatSize,
    EqSatRandom(u64),
    NativeBalance,
    NativeSimplify,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::EqSatDepth => f.write_str("eqsat-depth"),
            Provenance::EqSatSize => f.write_str("eqsat-size"),
            Provenance::EqSatRandom(s) => write!(f, "eqsat-random:{s:016x}"),
            Provenance::NativeBalance => f.write_str("native-balance"),
            Provenance::NativeSimplify => f.write_str("native-simplify"),
        }
    }
}

/// A standalone cone network functionally equal to its representative
/// cone, with the same input order.
#[derive(Clone, Debug)]
pub struct CandidateVariant {
    pub net: AigNetwork,
    pub provenance: Provenance,
    pub size: usize,
    pub depth: u32,
}

impl CandidateVariant {
    pub fn new(net: AigNetwork, provenance: Provenance) -> Self {
        let size = net.and_count();
        let depth = net.depth();
        CandidateVariant { net, provenance, size, depth }
    }
}

/// Converts a single-output cone into a hash-consed term. Complemented
/// edges become NOT nodes; input `i` becomes variable `i`.
pub fn cone_to_term(net: &AigNetwork) -> Result<Term, MutateError> {
    if net.num_outputs() != 1 {
        return Err(MutateError::NotSingleOutput(net.num_outputs()));
    }
    let root = net.output(0);
    // reachable nodes, visited in index (topological) order
    let mut live = vec![false; net.node_count()];
    live[root.index() as usize] = true;
    for idx in (0..net.node_count() as u32).rev() {
        if live[idx as usize] {
            if let Some((a, b)) = net.fanins(idx) {
                live[a.index() as usize] = true;
                live[b.index() as usize] = true;
            }
        }
    }
    let mut term = Term::new();
    let mut ids: Vec<Option<Id>> = vec![None; net.node_count()];
    let edge = |term: &mut Term, ids: &[Option<Id>], r: NodeRef| {
        let id = ids[r.index() as usize].expect("fanin precedes node");
        if r.is_complemented() {
            term.add(ENode::Not(id))
        } else {
            id
        }
    };
    for idx in 0..net.node_count() as u32 {
        if !live[idx as usize] {
            continue;
        }
        let id = match net.node(idx) {
            Node::Const => term.add(ENode::False),
            Node::Input(pos) => term.add(ENode::Var(pos)),
            Node::And(a, b) => {
                let ea = edge(&mut term, &ids, a);
                let eb = edge(&mut term, &ids, b);
                term.add(ENode::And([ea, eb]))
            }
        };
        ids[idx as usize] = Some(id);
    }
    // the root is the highest live node, so its (possible) NOT lands last
    let r = edge(&mut term, &ids, root);
    debug_assert_eq!(term.root(), Some(r));
    Ok(term)
}

/// Rebuilds a term as a single-output AIG over `num_inputs` inputs.
pub fn term_to_aig(term: &Term, num_inputs: usize) -> AigNetwork {
    let mut net = AigNetwork::with_inputs(num_inputs);
    let mut refs: Vec<NodeRef> = Vec::with_capacity(term.nodes().len());
    for n in term.nodes() {
        let r = match *n {
            ENode::False => NodeRef::FALSE,
            ENode::Var(v) => net.input(v as usize),
            ENode::Not(a) => !refs[a.0 as usize],
            ENode::And([a, b]) => net.and(refs[a.0 as usize], refs[b.0 as usize]),
            ENode::Or([a, b]) => !net.and(!refs[a.0 as usize], !refs[b.0 as usize]),
        };
        refs.push(r);
    }
    net.add_output(refs.last().copied().unwrap_or(NodeRef::FALSE));
    net
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::verify::{cec_random, Verdict};

    #[test]
    fn complemented_fanin_becomes_not() {
        let mut net = AigNetwork::with_inputs(2);
        let (a, b) = (net.input(0), net.input(1));
        let x = net.and(!a, b);
        net.add_output(x);
        assert_eq!(cone_to_term(&net).unwrap().to_string(), "(& (! x0) x1)");
    }

    #[test]
    fn input_root_is_a_variable() {
        let mut net = AigNetwork::with_inputs(3);
        net.add_output(net.input(1));
        assert_eq!(cone_to_term(&net).unwrap().to_string(), "x1");
    }

    #[test]
    fn shared_subgraphs_are_shared_terms() {
        let mut net = AigNetwork::with_inputs(3);
        let (a, b, c) = (net.input(0), net.input(1), net.input(2));
        let ab = net.and(a, b);
        let l = net.and(ab, c);
        let r = net.and(!ab, !c);
        let o = net.and(!l, !r);
        net.add_output(o);
        let t = cone_to_term(&net).unwrap();
        // x0 x1 x2 ab l !ab !c r !l !r o
        assert_eq!(t.nodes().len(), 11);
    }

    #[test]
    fn multi_output_rejected() {
        let net = gen::ripple_adder(2);
        assert!(matches!(cone_to_term(&net), Err(MutateError::NotSingleOutput(_))));
    }

    #[test]
    fn round_trip_preserves_function() {
        for seed in 0..10 {
            let full = gen::random_network(24, 120, 1, seed);
            let t = cone_to_term(&full).unwrap();
            let back = term_to_aig(&t, full.num_inputs());
            assert_eq!(cec_random(&full, &back, 16, seed).unwrap(), Verdict::NoMismatchObserved);
        }
    }

    #[test]
    fn complemented_output_round_trips() {
        let mut net = AigNetwork::with_inputs(2);
        let (a, b) = (net.input(0), net.input(1));
        let x = net.and(a, b);
        net.add_output(!x);
        let t = cone_to_term(&net).unwrap();
        assert_eq!(t.to_string(), "(! (& x0 x1))");
        let back = term_to_aig(&t, 2);
        assert_eq!(back.output(0), !x);
    }
}
