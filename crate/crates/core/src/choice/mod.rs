//! Choice networks: a subject AIG plus equivalence classes of alternative
//! implementations, one representative per class.
//!
//! Choice roots are dangling: nothing in the network reads them. The
//! quotient graph contracts every class to its representative; mapping
//! needs it to be acyclic.

mod io;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use thiserror::Error;

use crate::aig::{compute_fanout, random_patterns, simulate, AigNetwork, AigerError, NodeRef};
use crate::cone::Cone;
use crate::mutate::CandidateVariant;
use crate::rng::rng_from;

pub use io::{parse_choice_aiger, write_choice_aiger};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChoiceError {
    #[error("support node {0} does not exist in the subject network")]
    SupportOutOfRange(u32),
    #[error("variant has {got} inputs, cone support has {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("variant must have exactly one output, found {0}")]
    NotSingleOutput(usize),
    #[error(transparent)]
    Aiger(#[from] AigerError),
    #[error("choice record: {0}")]
    BadRecord(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceClass {
    pub representative: u32,
    /// Choice roots in rank order, each with its phase: the node computes
    /// the representative's function complemented when the flag is set.
    pub choices: Vec<(u32, bool)>,
}

impl EquivalenceClass {
    /// Representative first, then the choices.
    pub fn members(&self) -> impl Iterator<Item = (u32, bool)> + '_ {
        std::iter::once((self.representative, false)).chain(self.choices.iter().copied())
    }
}

#[derive(Clone, Debug)]
pub struct ChoiceNetwork {
    pub net: AigNetwork,
    pub classes: Vec<EquivalenceClass>,
    class_of: HashMap<u32, usize>,
}

impl ChoiceNetwork {
    pub fn new(net: AigNetwork, classes: Vec<EquivalenceClass>) -> Self {
        let mut cn = ChoiceNetwork { net, classes, class_of: HashMap::new() };
        cn.reindex();
        cn
    }

    /// A network without choices.
    pub fn plain(net: AigNetwork) -> Self {
        ChoiceNetwork::new(net, Vec::new())
    }

    fn reindex(&mut self) {
        self.classes.retain(|c| !c.choices.is_empty());
        self.class_of.clear();
        for (i, c) in self.classes.iter().enumerate() {
            for (m, _) in c.members() {
                self.class_of.insert(m, i);
            }
        }
    }

    pub fn class_of(&self, node: u32) -> Option<usize> {
        self.class_of.get(&node).copied()
    }

    /// Representative of the node's class, or the node itself.
    pub fn representative(&self, node: u32) -> u32 {
        self.class_of(node).map_or(node, |c| self.classes[c].representative)
    }

    pub fn is_choice_root(&self, node: u32) -> bool {
        self.class_of(node).is_some_and(|c| self.classes[c].representative != node)
    }

    pub fn num_choices(&self) -> usize {
        self.classes.iter().map(|c| c.choices.len()).sum()
    }

    fn choice_roots(&self) -> Vec<NodeRef> {
        self.classes.iter().flat_map(|c| c.choices.iter().map(|&(n, _)| NodeRef::new(n, false))).collect()
    }

    /// Nodes reachable from the outputs or from any choice root.
    fn live_nodes(&self) -> Vec<bool> {
        let mut live = vec![false; self.net.node_count()];
        let mut stack: Vec<u32> = self.net.outputs().iter().map(|o| o.index()).collect();
        stack.extend(self.choice_roots().iter().map(|r| r.index()));
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut live[n as usize], true) {
                continue;
            }
            if let Some((a, b)) = self.net.fanins(n) {
                stack.push(a.index());
                stack.push(b.index());
            }
        }
        live
    }

    /// Quotient nodes in a deterministic topological order: every class is
    /// represented by its representative, and a class comes after the
    /// quotient images of all its members' fanins. Only live nodes take
    /// part. Returns `None` when the quotient graph has a cycle.
    pub fn quotient_topo_order(&self) -> Option<Vec<u32>> {
        let live = self.live_nodes();
        let n = self.net.node_count();
        let mut indeg = vec![0u32; n];
        let mut succ: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut is_qnode = vec![false; n];
        for idx in 0..n as u32 {
            if !live[idx as usize] {
                continue;
            }
            let q = self.representative(idx);
            is_qnode[q as usize] = true;
            if let Some((a, b)) = self.net.fanins(idx) {
                for f in [a.index(), b.index()] {
                    let qf = self.representative(f);
                    succ[qf as usize].push(q);
                    indeg[q as usize] += 1;
                }
            }
        }
        let mut heap: BinaryHeap<Reverse<u32>> =
            (0..n as u32).filter(|&i| is_qnode[i as usize] && indeg[i as usize] == 0).map(Reverse).collect();
        let mut order = Vec::new();
        while let Some(Reverse(q)) = heap.pop() {
            order.push(q);
            for &s in &succ[q as usize] {
                indeg[s as usize] -= 1;
                if indeg[s as usize] == 0 {
                    heap.push(Reverse(s));
                }
            }
        }
        let total = is_qnode.iter().filter(|&&b| b).count();
        (order.len() == total).then_some(order)
    }

    /// Copies the live logic into a fresh network in index order and remaps
    /// the classes; choices that collapse onto another member are dropped.
    fn compact(&mut self) {
        let mut roots: Vec<NodeRef> = self.net.outputs().to_vec();
        roots.extend(self.choice_roots());
        let mut out = AigNetwork::with_inputs(self.net.num_inputs());
        let map = self.net.copy_cone_into(&mut out, &roots, |net, pos| net.input(pos));
        for &o in self.net.outputs() {
            out.add_output(map[o.index() as usize].expect("live").complement_if(o.is_complemented()));
        }
        let mut classes = Vec::new();
        for c in &self.classes {
            // a representative outside the output cones cannot be mapped
            let Some(rep) = map[c.representative as usize] else { continue };
            if rep.is_complemented() || !out.is_and(rep.index()) {
                continue;
            }
            let mut seen = HashSet::from([rep.index()]);
            let mut choices = Vec::new();
            for &(ch, phase) in &c.choices {
                let r = map[ch as usize].expect("choice is live");
                if out.is_and(r.index()) && seen.insert(r.index()) {
                    choices.push((r.index(), phase ^ r.is_complemented()));
                }
            }
            classes.push(EquivalenceClass { representative: rep.index(), choices });
        }
        self.net = out;
        self.classes = classes;
        self.reindex();
    }
}

/// Inlines every selected variant next to its cone. Variant inputs map to
/// the cone's support nodes, AND nodes are replayed through structural
/// hashing, and the variant root becomes a choice of the cone root's class.
/// Variants that hash onto the representative, onto an input or constant,
/// or onto a node already in some class are dropped.
pub fn build_choice_network(
    subject: &AigNetwork,
    selections: &[(Cone, Vec<CandidateVariant>)],
) -> Result<ChoiceNetwork, ChoiceError> {
    let mut net = subject.clone();
    let mut classes: Vec<EquivalenceClass> = Vec::new();
    let mut member: HashSet<u32> = HashSet::new();
    for (cone, variants) in selections {
        for &s in cone.support.iter().chain(std::iter::once(&cone.root)) {
            if s as usize >= subject.node_count() {
                return Err(ChoiceError::SupportOutOfRange(s));
            }
        }
        let rep = cone.root;
        if !subject.is_and(rep) || member.contains(&rep) {
            continue;
        }
        let mut class = EquivalenceClass { representative: rep, choices: Vec::new() };
        for v in variants {
            if v.net.num_inputs() != cone.support.len() {
                return Err(ChoiceError::ArityMismatch { expected: cone.support.len(), got: v.net.num_inputs() });
            }
            if v.net.num_outputs() != 1 {
                return Err(ChoiceError::NotSingleOutput(v.net.num_outputs()));
            }
            let out = v.net.output(0);
            let map = v.net.copy_cone_into(&mut net, &[out], |_, pos| NodeRef::new(cone.support[pos], false));
            let root = map[out.index() as usize].expect("output mapped").complement_if(out.is_complemented());
            let idx = root.index();
            if idx == rep || !net.is_and(idx) || member.contains(&idx) || class.choices.iter().any(|&(c, _)| c == idx) {
                continue;
            }
            class.choices.push((idx, root.is_complemented()));
        }
        if !class.choices.is_empty() {
            for (m, _) in class.members() {
                member.insert(m);
            }
            classes.push(class);
        }
    }
    Ok(ChoiceNetwork::new(net, classes))
}

/// Drops choices whose root has fanout and choices that would close a
/// cycle in the quotient graph, then removes dead logic and empty classes.
/// Applying it twice gives the same network as applying it once.
pub fn remove_bad_choices(cn: &ChoiceNetwork) -> ChoiceNetwork {
    let mut cn = cn.clone();
    cn.compact();

    let fanout = compute_fanout(&cn.net);
    for c in cn.classes.iter_mut() {
        c.choices.retain(|&(n, _)| fanout[n as usize] == 0);
    }
    cn.reindex();
    cn.compact();

    for ci in 0..cn.classes.len() {
        let mut k = 0;
        while k < cn.classes[ci].choices.len() {
            let (choice, _) = cn.classes[ci].choices[k];
            if reaches_own_class(&cn, ci, choice) {
                cn.classes[ci].choices.remove(k);
                cn.class_of.remove(&choice);
            } else {
                k += 1;
            }
        }
    }
    cn.reindex();
    cn.compact();
    cn
}

/// Depth-first search from the choice's fanins through the quotient graph:
/// entering a class expands the fanins of all its members.
fn reaches_own_class(cn: &ChoiceNetwork, class: usize, choice: u32) -> bool {
    let rep = cn.classes[class].representative;
    let mut seen = HashSet::new();
    let mut stack: Vec<u32> = match cn.net.fanins(choice) {
        Some((a, b)) => vec![a.index(), b.index()],
        None => return false,
    };
    while let Some(v) = stack.pop() {
        let q = cn.representative(v);
        if q == rep {
            return true;
        }
        if !seen.insert(q) {
            continue;
        }
        let members: Vec<u32> = match cn.class_of(q) {
            Some(c) => cn.classes[c].members().map(|(m, _)| m).collect(),
            None => vec![q],
        };
        for m in members {
            if let Some((a, b)) = cn.net.fanins(m) {
                stack.push(a.index());
                stack.push(b.index());
            }
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    QuotientCycle,
    ChoiceHasFanout { class: usize, node: u32 },
    PhaseMismatch { class: usize, node: u32 },
    NotAnAnd { class: usize, node: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub classes: usize,
    pub choices: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks quotient acyclicity, fanout-free choice roots and per-class
/// functional consistency on 1024 random patterns. Violations are
/// collected, not raised.
pub fn validate_choice_network(cn: &ChoiceNetwork, seed: u64) -> ValidationReport {
    let mut violations = Vec::new();
    if cn.quotient_topo_order().is_none() {
        violations.push(Violation::QuotientCycle);
    }
    let fanout = compute_fanout(&cn.net);
    let n_words = 16;
    let pats = random_patterns(cn.net.num_inputs(), n_words, &mut rng_from(seed));
    let sim = simulate(&cn.net, &pats, n_words).expect("pattern shape");
    for (ci, c) in cn.classes.iter().enumerate() {
        for (m, _) in c.members() {
            if !cn.net.is_and(m) {
                violations.push(Violation::NotAnAnd { class: ci, node: m });
            }
        }
        let rep = sim.node(c.representative);
        for &(node, phase) in &c.choices {
            if fanout[node as usize] != 0 {
                violations.push(Violation::ChoiceHasFanout { class: ci, node });
            }
            let mask = if phase { !0u64 } else { 0 };
            if sim.node(node).iter().zip(rep).any(|(x, r)| *x != r ^ mask) {
                violations.push(Violation::PhaseMismatch { class: ci, node });
            }
        }
    }
    ValidationReport { classes: cn.classes.len(), choices: cn.num_choices(), violations }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassStats {
    pub classes: usize,
    pub choices: usize,
    /// Choice count per class -> number of classes with that count.
    pub histogram: BTreeMap<usize, usize>,
}

pub fn class_stats(cn: &ChoiceNetwork) -> ClassStats {
    let mut histogram = BTreeMap::new();
    for c in &cn.classes {
        *histogram.entry(c.choices.len()).or_insert(0) += 1;
    }
    ClassStats { classes: cn.classes.len(), choices: cn.num_choices(), histogram }
}
