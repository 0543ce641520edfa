//! Small circuit generators used for the test corpus and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::aig::{AigNetwork, NodeRef};
use crate::rng::rng_from;

/// Left-deep chain `((x0 & x1) & x2) & ...` over `n` inputs.
pub fn and_chain(n: usize) -> AigNetwork {
    assert!(n >= 1);
    let mut net = AigNetwork::with_inputs(n);
    let mut acc = net.input(0);
    for i in 1..n {
        let x = net.input(i);
        acc = net.and(acc, x);
    }
    net.add_output(acc);
    net
}

/// Balanced AND tree over `n` inputs.
pub fn balanced_and(n: usize) -> AigNetwork {
    let mut net = AigNetwork::with_inputs(n);
    let mut layer: Vec<NodeRef> = (0..n).map(|i| net.input(i)).collect();
    while layer.len() > 1 {
        layer = layer.chunks(2).map(|p| if p.len() == 2 { net.and(p[0], p[1]) } else { p[0] }).collect();
    }
    net.add_output(layer[0]);
    net
}

/// Ripple-carry adder: inputs a[0..bits], b[0..bits], cin; outputs sum bits then carry.
pub fn ripple_adder(bits: usize) -> AigNetwork {
    let mut net = AigNetwork::with_inputs(2 * bits + 1);
    let mut carry = net.input(2 * bits);
    for i in 0..bits {
        let (a, b) = (net.input(i), net.input(bits + i));
        let p = net.xor(a, b);
        let s = net.xor(p, carry);
        let g = net.and(a, b);
        let t = net.and(p, carry);
        carry = net.or(g, t);
        net.add_output(s);
    }
    net.add_output(carry);
    net
}

/// Unsigned array multiplier, `bits x bits -> 2*bits`.
pub fn array_multiplier(bits: usize) -> AigNetwork {
    let mut net = AigNetwork::with_inputs(2 * bits);
    let a: Vec<NodeRef> = (0..bits).map(|i| net.input(i)).collect();
    let b: Vec<NodeRef> = (0..bits).map(|i| net.input(bits + i)).collect();
    let mut acc: Vec<NodeRef> = vec![NodeRef::FALSE; 2 * bits];
    for (j, &bj) in b.iter().enumerate() {
        let mut carry = NodeRef::FALSE;
        for (i, &ai) in a.iter().enumerate() {
            let pp = net.and(ai, bj);
            let x = acc[i + j];
            let p = net.xor(x, pp);
            let s = net.xor(p, carry);
            let g = net.and(x, pp);
            let t = net.and(p, carry);
            carry = net.or(g, t);
            acc[i + j] = s;
        }
        acc[bits + j] = carry;
    }
    for o in acc {
        net.add_output(o);
    }
    net
}

/// `2^sel_bits`-to-1 multiplexer: data inputs first, then select lines.
pub fn mux_tree(sel_bits: usize) -> AigNetwork {
    let n = 1 << sel_bits;
    let mut net = AigNetwork::with_inputs(n + sel_bits);
    let mut layer: Vec<NodeRef> = (0..n).map(|i| net.input(i)).collect();
    for s in 0..sel_bits {
        let sel = net.input(n + s);
        layer = layer.chunks(2).map(|p| net.mux(sel, p[1], p[0])).collect();
    }
    net.add_output(layer[0]);
    net
}

/// `a < b` for unsigned `bits`-wide operands, plus `a == b`.
pub fn comparator(bits: usize) -> AigNetwork {
    let mut net = AigNetwork::with_inputs(2 * bits);
    let mut lt = NodeRef::FALSE;
    let mut eq = NodeRef::TRUE;
    for i in 0..bits {
        let (a, b) = (net.input(i), net.input(bits + i));
        let bit_lt = net.and(!a, b);
        let bit_eq = !net.xor(a, b);
        // lower bits decide only when this bit is equal
        let keep = net.and(bit_eq, lt);
        lt = net.or(bit_lt, keep);
        eq = net.and(eq, bit_eq);
    }
    net.add_output(lt);
    net.add_output(eq);
    net
}

/// XOR of `n` inputs as a linear chain.
pub fn parity(n: usize) -> AigNetwork {
    let mut net = AigNetwork::with_inputs(n);
    let mut acc = net.input(0);
    for i in 1..n {
        let x = net.input(i);
        acc = net.xor(acc, x);
    }
    net.add_output(acc);
    net
}

/// Majority of `n` (odd) inputs via a sorting-free threshold count.
pub fn majority(n: usize) -> AigNetwork {
    let mut net = AigNetwork::with_inputs(n);
    // count[k] = "at least k of the inputs seen so far are one"
    let mut at_least = vec![NodeRef::TRUE];
    for i in 0..n {
        let x = net.input(i);
        let mut next = vec![NodeRef::TRUE];
        for k in 1..=i + 1 {
            let with = net.and(x, at_least[k - 1]);
            let without = at_least.get(k).copied().unwrap_or(NodeRef::FALSE);
            next.push(net.or(with, without));
        }
        at_least = next;
    }
    net.add_output(at_least[n / 2 + 1]);
    net
}

/// One-hot decoder of `bits` select lines.
pub fn decoder(bits: usize) -> AigNetwork {
    let mut net = AigNetwork::with_inputs(bits);
    for v in 0..(1usize << bits) {
        let mut acc = NodeRef::TRUE;
        for i in 0..bits {
            let x = net.input(i).complement_if((v >> i) & 1 == 0);
            acc = net.and(acc, x);
        }
        net.add_output(acc);
    }
    net
}

/// Priority encoder: index of the highest set input (`log2 n` bits) plus a valid flag.
pub fn priority_encoder(n: usize) -> AigNetwork {
    let bits = usize::BITS as usize - (n - 1).leading_zeros() as usize;
    let mut net = AigNetwork::with_inputs(n);
    let mut higher_clear = NodeRef::TRUE;
    let mut wins = vec![NodeRef::FALSE; n];
    for i in (0..n).rev() {
        let x = net.input(i);
        wins[i] = net.and(x, higher_clear);
        higher_clear = net.and(higher_clear, !x);
    }
    for b in 0..bits {
        let mut acc = NodeRef::FALSE;
        for (i, &w) in wins.iter().enumerate() {
            if (i >> b) & 1 == 1 {
                acc = net.or(acc, w);
            }
        }
        net.add_output(acc);
    }
    net.add_output(!higher_clear);
    net
}

/// Random strashed DAG. Fanins are drawn with a bias towards recent nodes so
/// that the network has some depth.
pub fn random_network(num_inputs: usize, num_ands: usize, num_outputs: usize, seed: u64) -> AigNetwork {
    let mut rng = rng_from(seed);
    let mut net = AigNetwork::with_inputs(num_inputs);
    let mut pool: Vec<NodeRef> = (0..num_inputs).map(|i| net.input(i)).collect();
    let mut attempts = 0;
    while net.and_count() < num_ands && attempts < num_ands * 20 {
        attempts += 1;
        let pick = |rng: &mut rand_chacha::ChaCha8Rng, pool: &[NodeRef]| {
            let n = pool.len();
            let window = n.min(8 + n / 3);
            let i = if rng.gen_bool(0.7) { n - 1 - rng.gen_range(0..window) } else { rng.gen_range(0..n) };
            pool[i].complement_if(rng.gen_bool(0.4))
        };
        let a = pick(&mut rng, &pool);
        let b = pick(&mut rng, &pool);
        let before = net.node_count();
        let x = net.and(a, b);
        if net.node_count() > before {
            pool.push(x);
        }
    }
    let ands: Vec<u32> = net.and_nodes().collect();
    // prefer nodes without fanout as outputs so little logic is dangling
    let fanout = crate::aig::compute_fanout(&net);
    let mut sinks: Vec<u32> = ands.iter().copied().filter(|&i| fanout[i as usize] == 0).collect();
    sinks.reverse();
    for k in 0..num_outputs {
        let idx = if let Some(s) = sinks.get(k) {
            *s
        } else if !ands.is_empty() {
            ands[rng.gen_range(0..ands.len())]
        } else {
            net.inputs()[k % num_inputs.max(1)]
        };
        let c = rng.gen_bool(0.5);
        net.add_output(NodeRef::new(idx, c));
    }
    net
}

/// Random tree: every input and every AND node has exactly one fanout.
pub fn random_tree(num_inputs: usize, seed: u64) -> AigNetwork {
    assert!(num_inputs >= 2);
    let mut rng = rng_from(seed);
    let mut net = AigNetwork::with_inputs(num_inputs);
    let mut pool: Vec<NodeRef> = (0..num_inputs).map(|i| net.input(i)).collect();
    while pool.len() > 1 {
        pool.shuffle(&mut rng);
        let a = pool.pop().unwrap().complement_if(rng.gen_bool(0.3));
        let b = pool.pop().unwrap().complement_if(rng.gen_bool(0.3));
        let x = net.and(a, b);
        pool.push(x);
    }
    net.add_output(pool[0]);
    net
}

/// Large synthetic circuit mixing wide AND/OR trees, XORs and multiplexers.
/// Wide trees give sizable fanout-free cones; the mixing gives reconvergence.
pub fn synthetic(num_inputs: usize, target_ands: usize, seed: u64) -> AigNetwork {
    let mut rng = rng_from(seed);
    let mut net = AigNetwork::with_inputs(num_inputs);
    let mut pool: Vec<NodeRef> = (0..num_inputs).map(|i| net.input(i)).collect();
    let pick = |rng: &mut rand_chacha::ChaCha8Rng, pool: &[NodeRef]| {
        let n = pool.len();
        let window = n.min(64);
        let i = if rng.gen_bool(0.75) { n - 1 - rng.gen_range(0..window) } else { rng.gen_range(0..n) };
        pool[i].complement_if(rng.gen_bool(0.5))
    };
    while net.and_count() < target_ands {
        let before = net.and_count();
        let out = match rng.gen_range(0..10) {
            0..=3 => {
                let width = rng.gen_range(4..24);
                let mut acc = pick(&mut rng, &pool);
                for _ in 1..width {
                    let x = pick(&mut rng, &pool);
                    acc = if rng.gen_bool(0.5) { net.and(acc, x) } else { net.or(acc, x) };
                }
                acc
            }
            4..=6 => {
                let (a, b) = (pick(&mut rng, &pool), pick(&mut rng, &pool));
                net.xor(a, b)
            }
            _ => {
                let (s, t, e) = (pick(&mut rng, &pool), pick(&mut rng, &pool), pick(&mut rng, &pool));
                net.mux(s, t, e)
            }
        };
        if net.and_count() > before && !out.is_const() {
            pool.push(out.regular());
        }
    }
    let fanout = crate::aig::compute_fanout(&net);
    let sinks: Vec<u32> = net.and_nodes().filter(|&i| fanout[i as usize] == 0).collect();
    for s in sinks {
        net.add_output(NodeRef::new(s, false));
    }
    net
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::{exhaustive_patterns, simulate};

    fn eval(net: &AigNetwork, assignment: u64) -> Vec<bool> {
        let pats: Vec<Vec<u64>> =
            (0..net.num_inputs()).map(|i| vec![if (assignment >> i) & 1 == 1 { !0 } else { 0 }]).collect();
        let sim = simulate(net, &pats, 1).unwrap();
        net.outputs().iter().map(|&o| sim.edge(o)[0] & 1 == 1).collect()
    }

    #[test]
    fn adder_adds() {
        let net = ripple_adder(3);
        for a in 0..8u64 {
            for b in 0..8u64 {
                for c in 0..2u64 {
                    let out = eval(&net, a | b << 3 | c << 6);
                    let sum: u64 = out.iter().enumerate().map(|(i, &v)| (v as u64) << i).sum();
                    assert_eq!(sum, a + b + c);
                }
            }
        }
    }

    #[test]
    fn multiplier_multiplies() {
        let net = array_multiplier(3);
        for a in 0..8u64 {
            for b in 0..8u64 {
                let out = eval(&net, a | b << 3);
                let p: u64 = out.iter().enumerate().map(|(i, &v)| (v as u64) << i).sum();
                assert_eq!(p, a * b);
            }
        }
    }

    #[test]
    fn comparator_and_mux() {
        let net = comparator(3);
        for a in 0..8u64 {
            for b in 0..8u64 {
                assert_eq!(eval(&net, a | b << 3), vec![a < b, a == b]);
            }
        }
        let m = mux_tree(2);
        for v in 0..64u64 {
            let sel = (v >> 4) as usize;
            assert_eq!(eval(&m, v)[0], (v >> sel) & 1 == 1);
        }
    }

    #[test]
    fn majority_and_priority() {
        let net = majority(5);
        for v in 0..32u64 {
            assert_eq!(eval(&net, v)[0], v.count_ones() >= 3);
        }
        let pe = priority_encoder(6);
        for v in 1..64u64 {
            let out = eval(&pe, v);
            let hi = 63 - v.leading_zeros() as u64;
            let idx: u64 = out[..3].iter().enumerate().map(|(i, &b)| (b as u64) << i).sum();
            assert_eq!(idx, hi);
            assert!(out[3]);
        }
    }

    #[test]
    fn tree_has_unit_fanout() {
        let net = random_tree(9, 3);
        let fo = crate::aig::compute_fanout(&net);
        assert!(fo[1..].iter().all(|&f| f == 1));
        assert_eq!(net.and_count(), 8);
    }

    #[test]
    fn random_network_is_deterministic() {
        let a = random_network(8, 60, 4, 11);
        let b = random_network(8, 60, 4, 11);
        assert!(a.structurally_equal(&b));
        assert_eq!(a.and_count(), 60);
        let (p, w) = exhaustive_patterns(8);
        assert!(simulate(&a, &p, w).is_ok());
    }

    #[test]
    fn synthetic_reaches_target() {
        let net = synthetic(32, 2000, 1);
        assert!(net.and_count() >= 2000);
        assert!(net.num_outputs() > 0);
    }
}
