//! Bit-parallel simulation and truth tables.

use rand::Rng;
use thiserror::Error;

use super::{AigNetwork, Node, NodeRef};

/// Largest leaf count accepted by [`truth_table`] (64Ki bits).
pub const MAX_TRUTH_TABLE_LEAVES: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("expected {expected} input patterns, got {got}")]
    PatternCount { expected: usize, got: usize },
    #[error("pattern for input {input} has {got} words, expected {expected}")]
    PatternWidth { input: usize, expected: usize, got: usize },
    #[error("{0} leaves exceed the truth-table limit of {MAX_TRUTH_TABLE_LEAVES}")]
    TooManyLeaves(usize),
    #[error("leaf set does not cut the cone: reached input node {0}")]
    NotACut(u32),
}

/// Simulation words for every node of a network, node-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimVectors {
    n_words: usize,
    words: Vec<u64>,
}

impl SimVectors {
    pub fn n_words(&self) -> usize {
        self.n_words
    }

    pub fn node(&self, idx: u32) -> &[u64] {
        let s = idx as usize * self.n_words;
        &self.words[s..s + self.n_words]
    }

    /// Words of an edge, with its complement applied.
    pub fn edge(&self, r: NodeRef) -> Vec<u64> {
        let mask = if r.is_complemented() { !0 } else { 0 };
        self.node(r.index()).iter().map(|w| w ^ mask).collect()
    }
}

/// Simulates `net` on `patterns` (one `n_words` block list per input).
pub fn simulate(net: &AigNetwork, patterns: &[Vec<u64>], n_words: usize) -> Result<SimVectors, SimError> {
    if patterns.len() != net.num_inputs() {
        return Err(SimError::PatternCount { expected: net.num_inputs(), got: patterns.len() });
    }
    for (i, p) in patterns.iter().enumerate() {
        if p.len() != n_words {
            return Err(SimError::PatternWidth { input: i, expected: n_words, got: p.len() });
        }
    }
    let mut words = vec![0u64; net.node_count() * n_words];
    for (i, node) in net.nodes().iter().enumerate() {
        let dst = i * n_words;
        match *node {
            Node::Const => {}
            Node::Input(pos) => words[dst..dst + n_words].copy_from_slice(&patterns[pos as usize]),
            Node::And(a, b) => {
                let (sa, sb) = (a.index() as usize * n_words, b.index() as usize * n_words);
                let ma = if a.is_complemented() { !0u64 } else { 0 };
                let mb = if b.is_complemented() { !0u64 } else { 0 };
                for w in 0..n_words {
                    words[dst + w] = (words[sa + w] ^ ma) & (words[sb + w] ^ mb);
                }
            }
        }
    }
    Ok(SimVectors { n_words, words })
}

/// `n_words` random 64-bit blocks for each of `num_inputs` inputs.
pub fn random_patterns<R: Rng>(num_inputs: usize, n_words: usize, rng: &mut R) -> Vec<Vec<u64>> {
    (0..num_inputs).map(|_| (0..n_words).map(|_| rng.gen()).collect()).collect()
}

/// All `2^num_inputs` assignments. Bit `p` of the stream (word `p / 64`, bit
/// `p % 64`) holds assignment `p mod 2^num_inputs`, where input `i` takes bit
/// `i` of the assignment. Returns the patterns and the word count.
pub fn exhaustive_patterns(num_inputs: usize) -> (Vec<Vec<u64>>, usize) {
    let n_words = if num_inputs <= 6 { 1 } else { 1usize << (num_inputs - 6) };
    let pats = (0..num_inputs).map(|i| (0..n_words).map(|w| var_word(i, w)).collect()).collect();
    (pats, n_words)
}

/// Word `w` of the projection function of variable `i`: bit `p` of the
/// infinite stream is bit `i` of `64 * w + p`.
pub fn var_word(i: usize, w: usize) -> u64 {
    const MASKS: [u64; 6] = [
        0xaaaa_aaaa_aaaa_aaaa,
        0xcccc_cccc_cccc_cccc,
        0xf0f0_f0f0_f0f0_f0f0,
        0xff00_ff00_ff00_ff00,
        0xffff_0000_ffff_0000,
        0xffff_ffff_0000_0000,
    ];
    if i < 6 {
        MASKS[i]
    } else if (w >> (i - 6)) & 1 == 1 {
        !0
    } else {
        0
    }
}

/// A complete truth table over `num_vars` variables; bit `m` is the value
/// under the assignment whose binary expansion is `m` (variable `i` = bit `i`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    num_vars: usize,
    words: Vec<u64>,
}

impl TruthTable {
    pub fn zero(num_vars: usize) -> Self {
        TruthTable { num_vars, words: vec![0; Self::word_count(num_vars)] }
    }

    pub fn var(num_vars: usize, i: usize) -> Self {
        let mut t = TruthTable { num_vars, words: (0..Self::word_count(num_vars)).map(|w| var_word(i, w)).collect() };
        t.mask();
        t
    }

    pub fn from_words(num_vars: usize, words: Vec<u64>) -> Self {
        assert_eq!(words.len(), Self::word_count(num_vars));
        let mut t = TruthTable { num_vars, words };
        t.mask();
        t
    }

    pub fn word_count(num_vars: usize) -> usize {
        if num_vars <= 6 {
            1
        } else {
            1 << (num_vars - 6)
        }
    }

    fn mask(&mut self) {
        if self.num_vars < 6 {
            self.words[0] &= (1u64 << (1 << self.num_vars)) - 1;
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bit(&self, m: usize) -> bool {
        (self.words[m / 64] >> (m % 64)) & 1 == 1
    }

    pub fn num_bits(&self) -> usize {
        1 << self.num_vars
    }

    pub fn not(&self) -> Self {
        let mut t = TruthTable { num_vars: self.num_vars, words: self.words.iter().map(|w| !w).collect() };
        t.mask();
        t
    }

    pub fn and(&self, other: &Self) -> Self {
        assert_eq!(self.num_vars, other.num_vars);
        TruthTable { num_vars: self.num_vars, words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_one(&self) -> bool {
        self.not().is_zero()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Binary string, most significant minterm first.
    pub fn to_bit_string(&self) -> String {
        (0..self.num_bits()).rev().map(|m| if self.bit(m) { '1' } else { '0' }).collect()
    }
}

impl std::fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TruthTable({}, 0b{})", self.num_vars, self.to_bit_string())
    }
}

/// Function of `root` in terms of `leaves`.
///
/// Every path from `root` back to an input must pass through a leaf.
pub fn truth_table(net: &AigNetwork, root: NodeRef, leaves: &[u32]) -> Result<TruthTable, SimError> {
    let n = leaves.len();
    if n > MAX_TRUTH_TABLE_LEAVES {
        return Err(SimError::TooManyLeaves(n));
    }
    let mut memo: std::collections::HashMap<u32, TruthTable> = std::collections::HashMap::new();
    for (i, &l) in leaves.iter().enumerate() {
        memo.insert(l, TruthTable::var(n, i));
    }
    // iterative post-order over the cone above the leaves
    let mut stack = vec![(root.index(), false)];
    while let Some((idx, expanded)) = stack.pop() {
        if memo.contains_key(&idx) {
            continue;
        }
        match net.node(idx) {
            Node::Const => {
                memo.insert(idx, TruthTable::zero(n));
            }
            Node::Input(_) => return Err(SimError::NotACut(idx)),
            Node::And(a, b) => {
                if expanded {
                    let ta = edge_table(&memo, a);
                    let tb = edge_table(&memo, b);
                    memo.insert(idx, ta.and(&tb));
                } else {
                    stack.push((idx, true));
                    stack.push((a.index(), false));
                    stack.push((b.index(), false));
                }
            }
        }
    }
    Ok(edge_table(&memo, root))
}

fn edge_table(memo: &std::collections::HashMap<u32, TruthTable>, r: NodeRef) -> TruthTable {
    let t = &memo[&r.index()];
    if r.is_complemented() {
        t.not()
    } else {
        t.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and2(ca: bool) -> AigNetwork {
        let mut net = AigNetwork::with_inputs(2);
        let (a, b) = (net.input(0), net.input(1));
        let x = net.and(a.complement_if(ca), b);
        net.add_output(x);
        net
    }

    #[test]
    fn simulate_and() {
        let net = and2(false);
        let sim = simulate(&net, &[vec![0b1100], vec![0b1010]], 1).unwrap();
        assert_eq!(sim.node(3)[0], 0b1000);
    }

    #[test]
    fn simulate_complemented_edge() {
        let net = and2(true);
        let sim = simulate(&net, &[vec![0b1100], vec![0b1010]], 1).unwrap();
        assert_eq!(sim.node(3)[0] & 0b1111, 0b0010);
    }

    #[test]
    fn simulate_rejects_wrong_pattern_count() {
        let net = and2(false);
        assert_eq!(simulate(&net, &[vec![0]], 1), Err(SimError::PatternCount { expected: 2, got: 1 }));
    }

    #[test]
    fn truth_table_basics() {
        let net = and2(false);
        let t = truth_table(&net, net.output(0), &[1, 2]).unwrap();
        assert_eq!(t.words()[0], 0b1000);
        let id = truth_table(&net, net.input(0), &[1]).unwrap();
        assert_eq!(id.words()[0], 0b10);
        assert_eq!(truth_table(&net, net.output(0), &[1]), Err(SimError::NotACut(2)));
    }

    #[test]
    fn full_adder_carry() {
        // carry = ab + cin(a ^ b), built as majority
        let mut net = AigNetwork::with_inputs(3);
        let (a, b, c) = (net.input(0), net.input(1), net.input(2));
        let ab = net.and(a, b);
        let x = net.xor(a, b);
        let cx = net.and(c, x);
        let carry = net.or(ab, cx);
        let t = truth_table(&net, carry, &[1, 2, 3]).unwrap();
        // oracle: enumerate the 8 assignments
        let mut expect = 0u64;
        for m in 0..8 {
            let (va, vb, vc) = (m & 1, (m >> 1) & 1, (m >> 2) & 1);
            if va + vb + vc >= 2 {
                expect |= 1 << m;
            }
        }
        assert_eq!(expect, 0b1110_1000);
        assert_eq!(t.words()[0], expect);
    }

    #[test]
    fn exhaustive_patterns_enumerate_assignments() {
        let (pats, n_words) = exhaustive_patterns(8);
        assert_eq!(n_words, 4);
        for p in 0..256usize {
            for (i, pat) in pats.iter().enumerate() {
                let bit = (pat[p / 64] >> (p % 64)) & 1;
                assert_eq!(bit as usize, (p >> i) & 1);
            }
        }
    }

    #[test]
    fn truth_table_too_many_leaves() {
        let net = AigNetwork::with_inputs(17);
        let leaves: Vec<u32> = net.inputs().to_vec();
        assert_eq!(truth_table(&net, net.input(0), &leaves), Err(SimError::TooManyLeaves(17)));
    }
}
