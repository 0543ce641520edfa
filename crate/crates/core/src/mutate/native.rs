//! Native local passes: AND-tree balancing and size-safe simplification.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::aig::{compute_fanout, exhaustive_patterns, simulate, AigNetwork, Node, NodeRef};

/// Upper bound on simulation words (nodes x words) for truth-table merging.
const TT_MERGE_WORD_BUDGET: usize = 1 << 22;

/// Tracks levels of a growing network.
struct Levels(Vec<u32>);

impl Levels {
    fn of(&mut self, net: &AigNetwork, r: NodeRef) -> u32 {
        while self.0.len() < net.node_count() {
            let idx = self.0.len() as u32;
            let d = match net.fanins(idx) {
                Some((a, b)) => 1 + self.0[a.index() as usize].max(self.0[b.index() as usize]),
                None => 0,
            };
            self.0.push(d);
        }
        self.0[r.index() as usize]
    }
}

/// Conjunction of `leaves` with the shallowest tree: repeatedly pairs the
/// two shallowest operands. Duplicate leaves are merged; a complementary
/// pair folds the whole conjunction to false.
fn balanced_conjunction(net: &mut AigNetwork, levels: &mut Levels, mut leaves: Vec<NodeRef>) -> NodeRef {
    leaves.sort_unstable();
    leaves.dedup();
    if leaves.contains(&NodeRef::FALSE) || leaves.windows(2).any(|w| w[0].index() == w[1].index()) {
        return NodeRef::FALSE;
    }
    leaves.retain(|&l| l != NodeRef::TRUE);
    let mut heap: BinaryHeap<Reverse<(u32, usize, NodeRef)>> = BinaryHeap::new();
    let mut seq = 0;
    for l in leaves {
        heap.push(Reverse((levels.of(net, l), seq, l)));
        seq += 1;
    }
    loop {
        let Some(Reverse((_, _, a))) = heap.pop() else { return NodeRef::TRUE };
        let Some(Reverse((_, _, b))) = heap.pop() else { return a };
        let r = net.and(a, b);
        heap.push(Reverse((levels.of(net, r), seq, r)));
        seq += 1;
    }
}

/// Rebalances the AND trees of a cone. Trees are grown through
/// uncomplemented single-fanout AND fanins, so no logic is duplicated.
pub fn native_balance(net: &AigNetwork) -> AigNetwork {
    let src = net.cleanup();
    let fanout = compute_fanout(&src);
    let n = src.node_count();
    let expandable = |e: NodeRef| !e.is_complemented() && src.is_and(e.index()) && fanout[e.index() as usize] == 1;
    let supergate = |root: u32| -> Vec<NodeRef> {
        let (a, b) = src.fanins(root).expect("AND root");
        let mut stack = vec![a, b];
        let mut leaves = Vec::new();
        while let Some(e) = stack.pop() {
            if expandable(e) {
                let (x, y) = src.fanins(e.index()).unwrap();
                stack.push(x);
                stack.push(y);
            } else {
                leaves.push(e);
            }
        }
        leaves
    };

    // supergate roots actually needed: outputs and leaves of needed gates
    let mut needed = vec![false; n];
    for o in src.outputs() {
        needed[o.index() as usize] = true;
    }
    let mut leaves_of: Vec<Option<Vec<NodeRef>>> = vec![None; n];
    for idx in (0..n as u32).rev() {
        if needed[idx as usize] && src.is_and(idx) {
            let leaves = supergate(idx);
            for l in &leaves {
                needed[l.index() as usize] = true;
            }
            leaves_of[idx as usize] = Some(leaves);
        }
    }

    let mut out = AigNetwork::with_inputs(src.num_inputs());
    let mut levels = Levels(Vec::new());
    let mut map: Vec<NodeRef> = vec![NodeRef::FALSE; n];
    for idx in 0..n as u32 {
        map[idx as usize] = match src.node(idx) {
            Node::Const => NodeRef::FALSE,
            Node::Input(pos) => out.input(pos as usize),
            Node::And(..) => match leaves_of[idx as usize].take() {
                Some(leaves) => {
                    let mapped =
                        leaves.iter().map(|l| map[l.index() as usize].complement_if(l.is_complemented())).collect();
                    balanced_conjunction(&mut out, &mut levels, mapped)
                }
                None => continue,
            },
        };
    }
    for o in src.outputs() {
        out.add_output(map[o.index() as usize].complement_if(o.is_complemented()));
    }
    let out = out.cleanup();
    if out.depth() > src.depth() {
        src
    } else {
        out
    }
}

/// Structural folding, redundant-conjunct removal and (for cones with at
/// most 16 inputs) merging of nodes with equal truth tables. Never returns
/// more AND nodes than the input has.
pub fn native_simplify(net: &AigNetwork) -> AigNetwork {
    let base = net.cleanup();
    let mut cur = drop_redundant_conjuncts(&base);
    if cur.num_inputs() <= 16 {
        let words = if cur.num_inputs() <= 6 { 1 } else { 1usize << (cur.num_inputs() - 6) };
        if words * cur.node_count() <= TT_MERGE_WORD_BUDGET {
            cur = merge_equal_functions(&cur);
        }
    }
    if cur.and_count() > base.and_count() {
        base
    } else {
        cur
    }
}

/// `AND(a, AND(a, b))` becomes `AND(a, b)`; `AND(a, AND(!a, b))` becomes false.
fn drop_redundant_conjuncts(src: &AigNetwork) -> AigNetwork {
    let mut out = AigNetwork::with_inputs(src.num_inputs());
    let mut map = vec![NodeRef::FALSE; src.node_count()];
    for idx in 0..src.node_count() as u32 {
        map[idx as usize] = match src.node(idx) {
            Node::Const => NodeRef::FALSE,
            Node::Input(pos) => out.input(pos as usize),
            Node::And(a, b) => {
                let ma = map[a.index() as usize].complement_if(a.is_complemented());
                let mb = map[b.index() as usize].complement_if(b.is_complemented());
                absorb(&out, ma, mb).or_else(|| absorb(&out, mb, ma)).unwrap_or_else(|| out.and(ma, mb))
            }
        };
    }
    for o in src.outputs() {
        out.add_output(map[o.index() as usize].complement_if(o.is_complemented()));
    }
    out.cleanup()
}

fn absorb(net: &AigNetwork, x: NodeRef, y: NodeRef) -> Option<NodeRef> {
    if y.is_complemented() {
        return None;
    }
    let (p, q) = net.fanins(y.index())?;
    if p == x || q == x {
        Some(y)
    } else if p == !x || q == !x {
        Some(NodeRef::FALSE)
    } else {
        None
    }
}

/// Rebuilds the network keeping one node per function up to complement,
/// using exhaustive simulation.
fn merge_equal_functions(src: &AigNetwork) -> AigNetwork {
    let (pats, n_words) = exhaustive_patterns(src.num_inputs());
    let sim = simulate(src, &pats, n_words).expect("exhaustive patterns fit");
    let valid_bits = 1usize << src.num_inputs();
    let tail_mask = if valid_bits >= 64 { !0u64 } else { (1u64 << valid_bits) - 1 };
    // normalized function -> new ref with the normalized polarity
    let mut table: HashMap<Vec<u64>, NodeRef> = HashMap::new();
    let normalize = |idx: u32| -> (Vec<u64>, bool) {
        let mut w: Vec<u64> = sim.node(idx).to_vec();
        let flip = w[0] & 1 == 1;
        if flip {
            for x in w.iter_mut() {
                *x = !*x;
            }
        }
        if let Some(last) = w.last_mut() {
            if n_words == 1 {
                *last &= tail_mask;
            }
        }
        (w, flip)
    };
    let mut out = AigNetwork::with_inputs(src.num_inputs());
    let mut map = vec![NodeRef::FALSE; src.node_count()];
    let (zero, _) = normalize(0);
    table.insert(zero, NodeRef::FALSE);
    for idx in 1..src.node_count() as u32 {
        let (key, flip) = normalize(idx);
        if let Some(&r) = table.get(&key) {
            map[idx as usize] = r.complement_if(flip);
            continue;
        }
        let r = match src.node(idx) {
            Node::Const => NodeRef::FALSE,
            Node::Input(pos) => out.input(pos as usize),
            Node::And(a, b) => {
                let ma = map[a.index() as usize].complement_if(a.is_complemented());
                let mb = map[b.index() as usize].complement_if(b.is_complemented());
                out.and(ma, mb)
            }
        };
        map[idx as usize] = r;
        table.insert(key, r.complement_if(flip));
    }
    for o in src.outputs() {
        out.add_output(map[o.index() as usize].complement_if(o.is_complemented()));
    }
    out.cleanup()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::verify::{cec_exhaustive, cec_random, Verdict};

    #[test]
    fn chain_of_eight_becomes_depth_three() {
        let chain = gen::and_chain(8);
        assert_eq!(chain.depth(), 7);
        let b = native_balance(&chain);
        assert_eq!(b.depth(), 3);
        assert_eq!(b.and_count(), 7);
        assert_eq!(cec_exhaustive(&chain, &b), Ok(Verdict::Equivalent));
    }

    #[test]
    fn balanced_tree_is_a_fixpoint() {
        let t = gen::balanced_and(8);
        let b = native_balance(&t);
        assert_eq!(b.depth(), t.depth());
    }

    #[test]
    fn balance_folds_complementary_conjuncts() {
        let mut net = AigNetwork::with_inputs(2);
        let (a, b) = (net.input(0), net.input(1));
        let x = net.and(a, b);
        let y = net.add_and_raw(x, !a);
        net.add_output(y);
        let out = native_balance(&net);
        assert_eq!(out.output(0), NodeRef::FALSE);
    }

    #[test]
    fn balance_preserves_function_on_random_cones() {
        for seed in 0..100 {
            let net = gen::random_network(10, 40, 1, seed);
            let b = native_balance(&net);
            assert_eq!(cec_exhaustive(&net, &b), Ok(Verdict::Equivalent), "seed {seed}");
        }
    }

    #[test]
    fn balance_never_deepens_trees() {
        for seed in 0..50 {
            let t = gen::random_tree(12, seed);
            assert!(native_balance(&t).depth() <= t.depth());
        }
    }

    #[test]
    fn simplify_merges_duplicate_structure() {
        let mut net = AigNetwork::with_inputs(2);
        let (a, b) = (net.input(0), net.input(1));
        let x = net.add_and_raw(a, b);
        let y = net.add_and_raw(a, b);
        let z = net.add_and_raw(x, y);
        net.add_output(z);
        let s = native_simplify(&net);
        assert_eq!(s.and_count(), 1);
        assert_eq!(cec_exhaustive(&net, &s), Ok(Verdict::Equivalent));
    }

    #[test]
    fn simplify_folds_contradiction() {
        let mut net = AigNetwork::with_inputs(3);
        let (x, y, z) = (net.input(0), net.input(1), net.input(2));
        let c = net.add_and_raw(x, !x);
        let d = net.add_and_raw(c, y);
        let e = net.add_and_raw(!d, z);
        net.add_output(e);
        let s = native_simplify(&net);
        assert_eq!(s.and_count(), 0);
        assert_eq!(s.output(0), s.input(2));
    }

    #[test]
    fn simplify_drops_redundant_conjunct() {
        let mut net = AigNetwork::with_inputs(2);
        let (a, b) = (net.input(0), net.input(1));
        let ab = net.and(a, b);
        let r = net.and(a, ab);
        net.add_output(r);
        assert_eq!(native_simplify(&net).and_count(), 1);
    }

    #[test]
    fn simplify_merges_functionally_equal_nodes() {
        // a&(b|c) and (a&b)|(a&c) are the same function
        let mut net = AigNetwork::with_inputs(3);
        let (a, b, c) = (net.input(0), net.input(1), net.input(2));
        let bc = net.or(b, c);
        let f1 = net.and(a, bc);
        let ab = net.and(a, b);
        let ac = net.and(a, c);
        let f2 = net.or(ab, ac);
        let o = net.xor(f1, f2);
        net.add_output(o);
        let s = native_simplify(&net);
        assert_eq!(s.output(0), NodeRef::FALSE);
    }

    #[test]
    fn simplify_never_grows() {
        for seed in 0..100 {
            let net = gen::random_network(12, 60, 1, seed);
            let s = native_simplify(&net);
            assert!(s.and_count() <= net.and_count());
            assert_eq!(cec_exhaustive(&net, &s), Ok(Verdict::Equivalent), "seed {seed}");
        }
        let wide = gen::random_network(30, 200, 1, 1);
        let s = native_simplify(&wide);
        assert!(s.and_count() <= wide.and_count());
        assert_eq!(cec_random(&wide, &s, 16, 0), Ok(Verdict::NoMismatchObserved));
    }
}
