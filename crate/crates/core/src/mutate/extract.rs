//! Cost-bounded extraction of AIG variants from an e-graph.
//!
//! Each class gets its minimum tree cost. Only e-nodes at that minimum are
//! kept, and of those only nodes whose children sit strictly lower in a
//! well-founded height order, so any per-class choice yields an acyclic
//! term. A variant is one choice per reachable class, deterministic or
//! randomly tie-broken.

use rand::Rng;
use thiserror::Error;

use super::egraph::{EGraph, ENode, Id};
use super::{CandidateVariant, Provenance};
use crate::aig::{AigNetwork, NodeRef};
use crate::rng::{derive_seed, rng_from};
use crate::Mode;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("e-graph is empty")]
    Empty,
    #[error("class {0} has no finite-cost term")]
    NoTerm(Id),
    #[error("variable {var} exceeds the input count {num_inputs}")]
    VarOutOfRange { var: u32, num_inputs: usize },
}

/// Tree cost: AND/OR count 1, NOT and leaves count 0 (complemented edges are
/// free in an AIG).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cost {
    pub depth: u32,
    pub size: u64,
}

impl Cost {
    fn key(self, mode: Mode) -> (u64, u64) {
        match mode {
            Mode::Delay => (self.depth as u64, self.size),
            Mode::Area => (self.size, self.depth as u64),
        }
    }
}

/// Per-class minimum costs and the pruned e-nodes eligible for extraction.
pub struct CostTable {
    mode: Mode,
    best: Vec<Option<Cost>>,
    allowed: Vec<Vec<ENode>>,
}

fn node_cost(n: &ENode, best: &[Option<Cost>]) -> Option<Cost> {
    match *n {
        ENode::False | ENode::Var(_) => Some(Cost { depth: 0, size: 0 }),
        ENode::Not(a) => best[a.0 as usize],
        ENode::And([a, b]) | ENode::Or([a, b]) => {
            let (ca, cb) = (best[a.0 as usize]?, best[b.0 as usize]?);
            Some(Cost { depth: 1 + ca.depth.max(cb.depth), size: ca.size.saturating_add(cb.size).saturating_add(1) })
        }
    }
}

impl CostTable {
    /// Expects a rebuilt e-graph.
    pub fn new(eg: &EGraph, mode: Mode) -> Self {
        let bound = eg.id_bound();
        let classes = eg.class_ids();
        let mut best: Vec<Option<Cost>> = vec![None; bound];
        loop {
            let mut changed = false;
            for &c in &classes {
                for n in eg.nodes(c) {
                    if let Some(k) = node_cost(n, &best) {
                        if best[c.0 as usize].is_none_or(|b| k.key(mode) < b.key(mode)) {
                            best[c.0 as usize] = Some(k);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let minimal =
            |c: Id, n: &ENode| node_cost(n, &best).map(|k| k.key(mode)) == best[c.0 as usize].map(|b| b.key(mode));
        let mut height: Vec<Option<u32>> = vec![None; bound];
        loop {
            let mut changed = false;
            for &c in &classes {
                for n in eg.nodes(c) {
                    if !minimal(c, n) {
                        continue;
                    }
                    let h = n.children().iter().try_fold(0u32, |m, k| height[k.0 as usize].map(|h| m.max(h + 1)));
                    if let Some(h) = h {
                        if height[c.0 as usize].is_none_or(|old| h < old) {
                            height[c.0 as usize] = Some(h);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let mut allowed = vec![Vec::new(); bound];
        for &c in &classes {
            let Some(hc) = height[c.0 as usize] else { continue };
            allowed[c.0 as usize] = eg
                .nodes(c)
                .iter()
                .filter(|n| minimal(c, n) && n.children().iter().all(|k| height[k.0 as usize].is_some_and(|h| h < hc)))
                .copied()
                .collect();
        }
        CostTable { mode, best, allowed }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn best(&self, eg: &EGraph, id: Id) -> Option<Cost> {
        self.best[eg.find(id).0 as usize]
    }

    /// Cost-minimal e-nodes of a class that extraction may pick.
    pub fn allowed(&self, eg: &EGraph, id: Id) -> &[ENode] {
        &self.allowed[eg.find(id).0 as usize]
    }

    /// Rebuilds the term rooted at `root` as a single-output AIG, choosing
    /// one e-node per class with `pick` (given the allowed count).
    pub fn build(
        &self,
        eg: &EGraph,
        root: Id,
        num_inputs: usize,
        mut pick: impl FnMut(usize) -> usize,
    ) -> Result<AigNetwork, ExtractError> {
        let mut net = AigNetwork::with_inputs(num_inputs);
        let mut memo: Vec<Option<NodeRef>> = vec![None; self.best.len()];
        // explicit post-order: (class, chosen node once expanded)
        let mut stack: Vec<(Id, Option<ENode>)> = vec![(eg.find(root), None)];
        while let Some((c, chosen)) = stack.pop() {
            if memo[c.0 as usize].is_some() {
                continue;
            }
            match chosen {
                None => {
                    let options = &self.allowed[c.0 as usize];
                    if options.is_empty() {
                        return Err(ExtractError::NoTerm(c));
                    }
                    let n = options[if options.len() == 1 { 0 } else { pick(options.len()) }];
                    stack.push((c, Some(n)));
                    for &k in n.children() {
                        if memo[k.0 as usize].is_none() {
                            stack.push((k, None));
                        }
                    }
                }
                Some(n) => {
                    let get = |k: Id| memo[k.0 as usize].expect("children built first");
                    let r = match n {
                        ENode::False => NodeRef::FALSE,
                        ENode::Var(v) => {
                            if v as usize >= num_inputs {
                                return Err(ExtractError::VarOutOfRange { var: v, num_inputs });
                            }
                            net.input(v as usize)
                        }
                        ENode::Not(a) => !get(a),
                        ENode::And([a, b]) => net.and(get(a), get(b)),
                        ENode::Or([a, b]) => !net.and(!get(a), !get(b)),
                    };
                    memo[c.0 as usize] = Some(r);
                }
            }
        }
        net.add_output(memo[eg.find(root).0 as usize].expect("root built"));
        Ok(net)
    }
}

/// Up to `count` structurally distinct variants of class `root`: the
/// deterministic min-cost extraction first, then randomized tie-breaks.
/// Identical `(egraph, mode, count, seed)` gives an identical list.
pub fn extract_variants(
    eg: &EGraph,
    root: Id,
    num_inputs: usize,
    mode: Mode,
    count: usize,
    seed: u64,
) -> Result<Vec<CandidateVariant>, ExtractError> {
    if eg.num_nodes() == 0 {
        return Err(ExtractError::Empty);
    }
    let table = CostTable::new(eg, mode);
    let mut out: Vec<CandidateVariant> = Vec::new();
    let push = |net: AigNetwork, prov: Provenance, out: &mut Vec<CandidateVariant>| {
        if !out.iter().any(|v| v.net.structurally_equal(&net)) {
            out.push(CandidateVariant::new(net, prov));
        }
    };
    if count == 0 {
        return Ok(out);
    }
    let det = table.build(eg, root, num_inputs, |_| 0)?;
    let prov = match mode {
        Mode::Delay => Provenance::EqSatDepth,
        Mode::Area => Provenance::EqSatSize,
    };
    push(det, prov, &mut out);
    // a few extra attempts since random picks can repeat
    for k in 0..count.saturating_mul(4) as u64 {
        if out.len() >= count {
            break;
        }
        let s = derive_seed(seed, k);
        let mut rng = rng_from(s);
        let net = table.build(eg, root, num_inputs, |n| rng.gen_range(0..n))?;
        push(net, Provenance::EqSatRandom(s), &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::rules::{default_rules, saturate, SaturationLimits};
    use super::*;
    use crate::verify::{cec_exhaustive, Verdict};

    fn chain_egraph(n: u32) -> (EGraph, Id) {
        let mut eg = EGraph::new();
        let mut acc = eg.add(ENode::Var(0));
        for i in 1..n {
            let v = eg.add(ENode::Var(i));
            acc = eg.add(ENode::And([acc, v]));
        }
        (eg, acc)
    }

    #[test]
    fn single_and_has_one_variant() {
        let (mut eg, root) = chain_egraph(2);
        saturate(&mut eg, &default_rules(), &SaturationLimits::default());
        let vs = extract_variants(&eg, root, 2, Mode::Delay, 10, 1).unwrap();
        assert_eq!(vs.len(), 1);
        assert_eq!(vs[0].size, 1);
    }

    #[test]
    fn chain_of_four_balances() {
        let (mut eg, root) = chain_egraph(4);
        saturate(&mut eg, &default_rules(), &SaturationLimits::default());
        let vs = extract_variants(&eg, root, 4, Mode::Delay, 10, 3).unwrap();
        let reference = crate::gen::and_chain(4);
        assert!(vs.iter().any(|v| v.depth == 2));
        for v in &vs {
            assert_eq!(cec_exhaustive(&reference, &v.net), Ok(Verdict::Equivalent));
        }
        assert!(vs.len() > 1);
    }

    #[test]
    fn extraction_is_deterministic() {
        let (mut eg, root) = chain_egraph(6);
        saturate(&mut eg, &default_rules(), &SaturationLimits::default());
        let a = extract_variants(&eg, root, 6, Mode::Delay, 6, 9).unwrap();
        let b = extract_variants(&eg, root, 6, Mode::Delay, 6, 9).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!(x.net.structurally_equal(&y.net));
            assert_eq!(x.provenance, y.provenance);
        }
    }

    #[test]
    fn area_mode_keeps_size() {
        let (mut eg, root) = chain_egraph(5);
        saturate(&mut eg, &default_rules(), &SaturationLimits::default());
        let vs = extract_variants(&eg, root, 5, Mode::Area, 5, 0).unwrap();
        assert!(vs.iter().all(|v| v.size == 4));
        assert_eq!(vs[0].provenance, Provenance::EqSatSize);
    }

    #[test]
    fn empty_egraph_is_an_error() {
        let eg = EGraph::new();
        assert_eq!(extract_variants(&eg, Id(0), 0, Mode::Delay, 1, 0).err(), Some(ExtractError::Empty));
    }

    #[test]
    fn cost_table_prunes_above_minimum() {
        let (mut eg, root) = chain_egraph(4);
        saturate(&mut eg, &default_rules(), &SaturationLimits::default());
        let t = CostTable::new(&eg, Mode::Delay);
        assert_eq!(t.best(&eg, root), Some(Cost { depth: 2, size: 3 }));
        assert!(!t.allowed(&eg, root).is_empty());
        assert!(t.allowed(&eg, root).len() < eg.nodes(root).len());
    }
}
