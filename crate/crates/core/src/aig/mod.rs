//! And-Inverter Graphs with structural hashing.
//!
//! Nodes are stored in a single vector in topological order: every AND node
//! refers only to nodes with a smaller index. Node 0 is the constant-false
//! node. Inversion lives on the edges ([`NodeRef`]), never on the nodes.

mod aiger;
mod sim;
mod stats;

use std::collections::HashMap;
use std::fmt;

pub(crate) use aiger::{aiger_variables, map_lit, write_aiger_with_outputs};
pub use aiger::{parse_aiger, parse_aiger_full, write_aiger, AigerError, ParsedAiger};
pub use sim::{
    exhaustive_patterns, random_patterns, simulate, truth_table, var_word, SimError, SimVectors, TruthTable,
    MAX_TRUTH_TABLE_LEAVES,
};
pub use stats::{compute_depth, compute_fanout};

/// An edge into the graph: a node index plus an inversion flag.
///
/// Encoded like an AIGER literal (`2 * index + complemented`), so the natural
/// ordering sorts by index first and puts the plain edge before its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef(u32);

impl NodeRef {
    pub const FALSE: NodeRef = NodeRef(0);
    pub const TRUE: NodeRef = NodeRef(1);

    pub fn new(index: u32, complemented: bool) -> Self {
        NodeRef(index << 1 | complemented as u32)
    }

    pub fn from_lit(lit: u32) -> Self {
        NodeRef(lit)
    }

    pub fn lit(self) -> u32 {
        self.0
    }

    pub fn index(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn is_const(self) -> bool {
        self.index() == 0
    }

    /// Positive edge to the same node.
    pub fn regular(self) -> Self {
        NodeRef(self.0 & !1)
    }

    pub fn complement_if(self, c: bool) -> Self {
        NodeRef(self.0 ^ c as u32)
    }
}

impl std::ops::Not for NodeRef {
    type Output = NodeRef;

    fn not(self) -> NodeRef {
        NodeRef(self.0 ^ 1)
    }
}

impl fmt::Debug for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_complemented() {
            write!(f, "!n{}", self.index())
        } else {
            write!(f, "n{}", self.index())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Node {
    Const,
    /// Primary input; the payload is its position in the input list.
    Input(u32),
    /// Two-input AND; fanins stored in canonical (ascending literal) order.
    And(NodeRef, NodeRef),
}

#[derive(Clone, Debug, Default)]
pub struct AigNetwork {
    nodes: Vec<Node>,
    inputs: Vec<u32>,
    outputs: Vec<NodeRef>,
    strash: HashMap<(NodeRef, NodeRef), u32>,
}

impl AigNetwork {
    pub fn new() -> Self {
        AigNetwork { nodes: vec![Node::Const], inputs: Vec::new(), outputs: Vec::new(), strash: HashMap::new() }
    }

    /// A network with `n` primary inputs and nothing else.
    pub fn with_inputs(n: usize) -> Self {
        let mut net = Self::new();
        for _ in 0..n {
            net.add_input();
        }
        net
    }

    pub fn add_input(&mut self) -> NodeRef {
        let idx = self.nodes.len() as u32;
        self.nodes.push(Node::Input(self.inputs.len() as u32));
        self.inputs.push(idx);
        NodeRef::new(idx, false)
    }

    pub fn add_output(&mut self, r: NodeRef) -> usize {
        debug_assert!((r.index() as usize) < self.nodes.len());
        self.outputs.push(r);
        self.outputs.len() - 1
    }

    pub fn set_output(&mut self, pos: usize, r: NodeRef) {
        self.outputs[pos] = r;
    }

    pub fn truncate_outputs(&mut self, len: usize) {
        self.outputs.truncate(len);
    }

    /// Structurally hashed AND with constant and identity folding.
    ///
    /// Folds `x & x = x`, `x & !x = 0`, `x & 0 = 0`, `x & 1 = x`, then returns
    /// the existing node for the canonical fanin pair if there is one.
    pub fn and(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if a == NodeRef::FALSE {
            return NodeRef::FALSE;
        }
        if a == NodeRef::TRUE {
            return b;
        }
        if a == b {
            return a;
        }
        if a == !b {
            return NodeRef::FALSE;
        }
        if let Some(&idx) = self.strash.get(&(a, b)) {
            return NodeRef::new(idx, false);
        }
        self.push_and(a, b)
    }

    /// Appends an AND node without folding or hash lookup. Used by the AIGER
    /// reader so that files round-trip node for node.
    pub fn add_and_raw(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.push_and(a, b)
    }

    fn push_and(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        let idx = self.nodes.len() as u32;
        debug_assert!(a.index() < idx && b.index() < idx);
        self.nodes.push(Node::And(a, b));
        self.strash.entry((a, b)).or_insert(idx);
        NodeRef::new(idx, false)
    }

    /// Looks up an AND without creating it. Applies the same folding as [`and`](Self::and).
    pub fn find_and(&self, a: NodeRef, b: NodeRef) -> Option<NodeRef> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if a == NodeRef::FALSE || a == !b {
            return Some(NodeRef::FALSE);
        }
        if a == NodeRef::TRUE {
            return Some(b);
        }
        if a == b {
            return Some(a);
        }
        self.strash.get(&(a, b)).map(|&i| NodeRef::new(i, false))
    }

    pub fn or(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        let l = self.and(a, !b);
        let r = self.and(!a, b);
        self.or(l, r)
    }

    /// `s ? t : e`
    pub fn mux(&mut self, s: NodeRef, t: NodeRef, e: NodeRef) -> NodeRef {
        let l = self.and(s, t);
        let r = self.and(!s, e);
        self.or(l, r)
    }

    pub fn node(&self, idx: u32) -> Node {
        self.nodes[idx as usize]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn fanins(&self, idx: u32) -> Option<(NodeRef, NodeRef)> {
        match self.nodes[idx as usize] {
            Node::And(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn is_and(&self, idx: u32) -> bool {
        matches!(self.nodes[idx as usize], Node::And(..))
    }

    pub fn is_input(&self, idx: u32) -> bool {
        matches!(self.nodes[idx as usize], Node::Input(_))
    }

    /// Total node count, constant node included.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn and_count(&self) -> usize {
        self.nodes.len() - 1 - self.inputs.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn inputs(&self) -> &[u32] {
        &self.inputs
    }

    pub fn input(&self, pos: usize) -> NodeRef {
        NodeRef::new(self.inputs[pos], false)
    }

    pub fn outputs(&self) -> &[NodeRef] {
        &self.outputs
    }

    pub fn output(&self, pos: usize) -> NodeRef {
        self.outputs[pos]
    }

    /// Indices of all AND nodes in topological order.
    pub fn and_nodes(&self) -> impl Iterator<Item = u32> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| matches!(n, Node::And(..))).map(|(i, _)| i as u32)
    }

    /// Maximum AND-level over all outputs.
    pub fn depth(&self) -> u32 {
        let depth = compute_depth(self);
        self.outputs.iter().map(|o| depth[o.index() as usize]).max().unwrap_or(0)
    }

    /// Rebuilds the network through [`and`](Self::and), keeping every input
    /// and only the AND nodes reachable from the outputs.
    pub fn cleanup(&self) -> AigNetwork {
        let mut out = AigNetwork::with_inputs(self.num_inputs());
        let map = self.copy_cone_into(&mut out, &self.outputs, |net, pos| net.input(pos));
        for &o in &self.outputs {
            let r = map[o.index() as usize].expect("output mapped");
            out.add_output(r.complement_if(o.is_complemented()));
        }
        out
    }

    /// Replays the logic feeding `roots` into `dst` through structural
    /// hashing. `input_map` supplies the destination literal for each input
    /// position. Returns the per-node destination literal (None for nodes
    /// outside the fanin cone of `roots`).
    pub fn copy_cone_into<F>(&self, dst: &mut AigNetwork, roots: &[NodeRef], mut input_map: F) -> Vec<Option<NodeRef>>
    where
        F: FnMut(&AigNetwork, usize) -> NodeRef,
    {
        let mut needed = vec![false; self.nodes.len()];
        let mut stack: Vec<u32> = roots.iter().map(|r| r.index()).collect();
        while let Some(n) = stack.pop() {
            if needed[n as usize] {
                continue;
            }
            needed[n as usize] = true;
            if let Node::And(a, b) = self.nodes[n as usize] {
                stack.push(a.index());
                stack.push(b.index());
            }
        }
        let mut map: Vec<Option<NodeRef>> = vec![None; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if !needed[i] {
                continue;
            }
            map[i] = Some(match *node {
                Node::Const => NodeRef::FALSE,
                Node::Input(pos) => input_map(dst, pos as usize),
                Node::And(a, b) => {
                    let fa = map[a.index() as usize].unwrap().complement_if(a.is_complemented());
                    let fb = map[b.index() as usize].unwrap().complement_if(b.is_complemented());
                    dst.and(fa, fb)
                }
            });
        }
        map
    }

    /// Order-independent structural fingerprint of the logic feeding the
    /// outputs. Two networks with the same fingerprint have the same AND
    /// structure up to node renumbering and fanin order.
    pub fn structural_signature(&self) -> u64 {
        let mut sig = vec![0u64; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            sig[i] = match *node {
                Node::Const => 0x9e37_79b9_7f4a_7c15,
                Node::Input(pos) => crate::rng::mix64(0x1234_5678 ^ pos as u64),
                Node::And(a, b) => {
                    let sa = edge_sig(&sig, a);
                    let sb = edge_sig(&sig, b);
                    let (lo, hi) = if sa <= sb { (sa, sb) } else { (sb, sa) };
                    crate::rng::mix64(lo.wrapping_mul(0x100_0000_01b3) ^ crate::rng::mix64(hi))
                }
            };
        }
        let mut acc = self.outputs.len() as u64;
        for &o in &self.outputs {
            acc = crate::rng::mix64(acc ^ edge_sig(&sig, o));
        }
        acc
    }

    /// Exact structural equality: same node list, inputs and outputs.
    pub fn structurally_equal(&self, other: &AigNetwork) -> bool {
        self.nodes == other.nodes && self.inputs == other.inputs && self.outputs == other.outputs
    }
}

fn edge_sig(sig: &[u64], r: NodeRef) -> u64 {
    let s = sig[r.index() as usize];
    if r.is_complemented() {
        crate::rng::mix64(!s)
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strash_folds_idempotence_and_complement() {
        let mut net = AigNetwork::with_inputs(2);
        let a = net.input(0);
        assert_eq!(net.and(a, a), a);
        assert_eq!(net.and(a, !a), NodeRef::FALSE);
        assert_eq!(net.and(a, NodeRef::FALSE), NodeRef::FALSE);
        assert_eq!(net.and(NodeRef::TRUE, a), a);
        assert_eq!(net.and_count(), 0);
    }

    #[test]
    fn strash_hit_returns_same_node() {
        let mut net = AigNetwork::with_inputs(2);
        let (a, b) = (net.input(0), net.input(1));
        let x = net.and(a, b);
        let count = net.node_count();
        let y = net.and(b, a);
        assert_eq!(x, y);
        assert_eq!(net.node_count(), count);
        assert_eq!(net.find_and(a, b), Some(x));
        assert_eq!(net.find_and(a, !b), None);
    }

    #[test]
    fn fanins_are_canonical() {
        let mut net = AigNetwork::with_inputs(2);
        let (a, b) = (net.input(0), net.input(1));
        let x = net.and(!b, a);
        let (f0, f1) = net.fanins(x.index()).unwrap();
        assert!(f0 < f1);
        assert_eq!((f0, f1), (a, !b));
    }

    #[test]
    fn cleanup_drops_dangling_nodes() {
        let mut net = AigNetwork::with_inputs(3);
        let (a, b, c) = (net.input(0), net.input(1), net.input(2));
        let x = net.and(a, b);
        net.and(b, c);
        net.add_output(!x);
        let clean = net.cleanup();
        assert_eq!(clean.and_count(), 1);
        assert_eq!(clean.num_inputs(), 3);
        assert!(clean.output(0).is_complemented());
    }

    #[test]
    fn signature_ignores_numbering() {
        let mut n1 = AigNetwork::with_inputs(3);
        let (a, b, c) = (n1.input(0), n1.input(1), n1.input(2));
        let x = n1.and(a, b);
        let y = n1.and(x, c);
        n1.add_output(y);

        let mut n2 = AigNetwork::with_inputs(3);
        let (a, b, c) = (n2.input(0), n2.input(1), n2.input(2));
        n2.and(b, c); // dangling, shifts numbering
        let x = n2.and(b, a);
        let y = n2.and(c, x);
        n2.add_output(y);
        assert_eq!(n1.structural_signature(), n2.structural_signature());

        let mut n3 = AigNetwork::with_inputs(3);
        let (a, b, c) = (n3.input(0), n3.input(1), n3.input(2));
        let x = n3.and(b, c);
        let y = n3.and(x, a);
        n3.add_output(y);
        assert_ne!(n1.structural_signature(), n3.structural_signature());
    }
}
