//! Priority k-feasible cut enumeration over the quotient of a choice
//! network.

use std::cmp::Ordering;

use crate::choice::ChoiceNetwork;
use crate::Mode;

/// Largest supported cut size; functions fit in 256 bits.
pub const MAX_CUT_SIZE: usize = 8;

pub type CutFunction = [u64; 4];

#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    /// Sorted leaf node indices.
    pub leaves: Vec<u32>,
    /// Function of the owner over the leaves; bit `m` is the value under the
    /// assignment where leaf `i` takes bit `i` of `m`.
    pub function: CutFunction,
    pub depth: u32,
    pub area_flow: f64,
}

impl Cut {
    pub fn function_bit(&self, m: usize) -> bool {
        (self.function[m / 64] >> (m % 64)) & 1 == 1
    }
}

fn mask_function(f: &mut CutFunction, n: usize) {
    let bits = 1usize << n;
    for (w, word) in f.iter_mut().enumerate() {
        let lo = w * 64;
        if lo >= bits {
            *word = 0;
        } else if bits - lo < 64 {
            *word &= (1u64 << (bits - lo)) - 1;
        }
    }
}

fn complement(f: &CutFunction, n: usize) -> CutFunction {
    let mut g = [!f[0], !f[1], !f[2], !f[3]];
    mask_function(&mut g, n);
    g
}

/// Re-expresses `f` over `from` as a function over the superset `to`.
fn expand(f: &CutFunction, from: &[u32], to: &[u32]) -> CutFunction {
    let pos: Vec<usize> = from.iter().map(|l| to.binary_search(l).expect("leaf subset")).collect();
    let mut g = [0u64; 4];
    for m in 0..1usize << to.len() {
        let sub = pos.iter().enumerate().fold(0usize, |acc, (i, &p)| acc | (((m >> p) & 1) << i));
        if (f[sub / 64] >> (sub % 64)) & 1 == 1 {
            g[m / 64] |= 1 << (m % 64);
        }
    }
    g
}

fn merge_leaves(a: &[u32], b: &[u32], k: usize) -> Option<Vec<u32>> {
    let mut out = Vec::with_capacity(k);
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if out.len() == k {
            return None;
        }
        out.push(next);
    }
    Some(out)
}

fn is_subset(small: &[u32], big: &[u32]) -> bool {
    let mut j = 0;
    for &x in small {
        while j < big.len() && big[j] < x {
            j += 1;
        }
        if j == big.len() || big[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

/// Cut sets for every quotient node, best first.
pub struct CutSets {
    pub(crate) sets: Vec<Vec<Cut>>,
    pub(crate) depth: Vec<u32>,
    pub(crate) order: Vec<u32>,
}

impl CutSets {
    /// All cuts of `node`, best first, with the trivial cut last. Inputs
    /// have only the trivial cut and the constant only the empty cut.
    pub fn cuts(&self, node: u32) -> &[Cut] {
        &self.sets[node as usize]
    }

    /// Cuts usable to implement `node` as a LUT (the trivial cut excluded).
    pub fn implementable(&self, node: u32) -> &[Cut] {
        let s = &self.sets[node as usize];
        match s.last() {
            Some(c) if c.leaves == [node] => &s[..s.len() - 1],
            _ => s,
        }
    }

    /// Quotient nodes in the topological order used for enumeration.
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn best_depth(&self, node: u32) -> u32 {
        self.depth[node as usize]
    }
}

struct Candidate {
    leaves: Vec<u32>,
    depth: u32,
    area_flow: f64,
    /// (member, phase, fanin cut indices) or a fixed function
    source: Source,
}

enum Source {
    Merge { member: u32, phase: bool, ia: usize, ib: usize },
    Fixed(CutFunction),
}

fn rank(mode: Mode, a: &Candidate, b: &Candidate) -> Ordering {
    let primary = match mode {
        Mode::Delay => a.depth.cmp(&b.depth).then(a.area_flow.total_cmp(&b.area_flow)),
        Mode::Area => a.area_flow.total_cmp(&b.area_flow).then(a.depth.cmp(&b.depth)),
    };
    primary.then(a.leaves.len().cmp(&b.leaves.len())).then_with(|| a.leaves.cmp(&b.leaves))
}

/// Fanout seen from the subject part of the network: references from AND
/// nodes reachable from the outputs without entering choice structures,
/// plus output references.
pub(crate) fn subject_fanout(cn: &ChoiceNetwork) -> Vec<u32> {
    let net = &cn.net;
    let mut live = vec![false; net.node_count()];
    let mut stack: Vec<u32> = net.outputs().iter().map(|o| o.index()).collect();
    while let Some(n) = stack.pop() {
        if std::mem::replace(&mut live[n as usize], true) {
            continue;
        }
        if let Some((a, b)) = net.fanins(n) {
            stack.push(a.index());
            stack.push(b.index());
        }
    }
    let mut fo = vec![0u32; net.node_count()];
    for idx in net.and_nodes() {
        if live[idx as usize] {
            let (a, b) = net.fanins(idx).unwrap();
            fo[a.index() as usize] += 1;
            fo[b.index() as usize] += 1;
        }
    }
    for o in net.outputs() {
        fo[o.index() as usize] += 1;
    }
    fo
}

/// Enumerates up to `limit` priority cuts of at most `k` leaves per
/// quotient node. A representative's cuts are drawn from all members of
/// its class. `floor`, when given, supplies one extra cut per node that is
/// always kept (used to carry the choice-free best cut).
///
/// Returns `None` if the quotient graph is cyclic.
pub fn enumerate_cuts(
    cn: &ChoiceNetwork,
    k: usize,
    limit: usize,
    mode: Mode,
    floor: Option<&[Option<Cut>]>,
) -> Option<CutSets> {
    assert!((2..=MAX_CUT_SIZE).contains(&k) && limit >= 1);
    let net = &cn.net;
    let order = cn.quotient_topo_order()?;
    let n = net.node_count();
    let fanout = subject_fanout(cn);
    let mut sets: Vec<Vec<Cut>> = vec![Vec::new(); n];
    let mut depth = vec![0u32; n];
    let mut area_flow = vec![0f64; n];

    let trivial = |x: u32| -> Cut {
        if x == 0 {
            Cut { leaves: Vec::new(), function: [0; 4], depth: 0, area_flow: 0.0 }
        } else {
            Cut { leaves: vec![x], function: [0b10, 0, 0, 0], depth: 0, area_flow: 0.0 }
        }
    };

    for &q in &order {
        if !net.is_and(q) {
            sets[q as usize] = vec![trivial(q)];
            continue;
        }
        let members: Vec<(u32, bool)> = match cn.class_of(q) {
            Some(c) => cn.classes[c].members().collect(),
            None => vec![(q, false)],
        };
        let est = fanout[q as usize].max(1) as f64;
        let cut_stats = |leaves: &[u32]| -> (u32, f64) {
            let d = 1 + leaves.iter().map(|&l| depth[l as usize]).max().unwrap_or(0);
            let af = (1.0 + leaves.iter().map(|&l| area_flow[l as usize]).sum::<f64>()) / est;
            (d, af)
        };
        let with_trivial = |x: u32| -> Vec<Cut> {
            if sets[x as usize].is_empty() {
                // a fanin outside the quotient order (not live) never happens
                // for validated networks; fall back to its trivial cut
                vec![trivial(x)]
            } else {
                sets[x as usize].clone()
            }
        };

        let mut cands: Vec<Candidate> = Vec::new();
        let mut fanin_cuts: Vec<(Vec<Cut>, Vec<Cut>, bool, bool)> = Vec::with_capacity(members.len());
        for (mi, &(m, phase)) in members.iter().enumerate() {
            let (a, b) = net.fanins(m).expect("class members are AND nodes");
            let (ca, cb) = (with_trivial(a.index()), with_trivial(b.index()));
            for (ia, x) in ca.iter().enumerate() {
                for (ib, y) in cb.iter().enumerate() {
                    if let Some(leaves) = merge_leaves(&x.leaves, &y.leaves, k) {
                        let (d, af) = cut_stats(&leaves);
                        cands.push(Candidate {
                            leaves,
                            depth: d,
                            area_flow: af,
                            source: Source::Merge { member: mi as u32, phase, ia, ib },
                        });
                    }
                }
            }
            fanin_cuts.push((ca, cb, a.is_complemented(), b.is_complemented()));
        }
        let floor_cut = floor.and_then(|f| f.get(q as usize).cloned().flatten());
        if let Some(fc) = &floor_cut {
            let (d, af) = cut_stats(&fc.leaves);
            cands.push(Candidate {
                leaves: fc.leaves.clone(),
                depth: d,
                area_flow: af,
                source: Source::Fixed(fc.function),
            });
        }

        cands.sort_by(|a, b| rank(mode, a, b));
        let mut kept: Vec<Candidate> = Vec::new();
        for c in cands {
            if kept.len() >= limit {
                break;
            }
            if kept.iter().any(|s| is_subset(&s.leaves, &c.leaves)) {
                continue;
            }
            kept.push(c);
        }
        // the floor cut survives truncation (possibly dominated by a kept cut,
        // which is then at least as good)
        if let Some(fc) = floor_cut {
            if !kept.iter().any(|s| is_subset(&s.leaves, &fc.leaves)) {
                let (d, af) = cut_stats(&fc.leaves);
                kept.push(Candidate { leaves: fc.leaves, depth: d, area_flow: af, source: Source::Fixed(fc.function) });
            }
        }

        let cuts: Vec<Cut> = kept
            .into_iter()
            .map(|c| {
                let function = match c.source {
                    Source::Fixed(f) => f,
                    Source::Merge { member, phase, ia, ib } => {
                        let (ca, cb, na, nb) = &fanin_cuts[member as usize];
                        let (x, y) = (&ca[ia], &cb[ib]);
                        let mut fx = expand(&x.function, &x.leaves, &c.leaves);
                        let mut fy = expand(&y.function, &y.leaves, &c.leaves);
                        if *na {
                            fx = complement(&fx, c.leaves.len());
                        }
                        if *nb {
                            fy = complement(&fy, c.leaves.len());
                        }
                        let mut f = [fx[0] & fy[0], fx[1] & fy[1], fx[2] & fy[2], fx[3] & fy[3]];
                        if phase {
                            f = complement(&f, c.leaves.len());
                        }
                        f
                    }
                };
                Cut { leaves: c.leaves, function, depth: c.depth, area_flow: c.area_flow }
            })
            .collect();
        // best cut under the mode's ranking sits first; a late floor cut may
        // beat it
        let best = (0..cuts.len())
            .min_by(|&i, &j| {
                let (a, b) = (&cuts[i], &cuts[j]);
                let key = match mode {
                    Mode::Delay => a.depth.cmp(&b.depth).then(a.area_flow.total_cmp(&b.area_flow)),
                    Mode::Area => a.area_flow.total_cmp(&b.area_flow).then(a.depth.cmp(&b.depth)),
                };
                key.then(i.cmp(&j))
            })
            .expect("an AND node always has a cut");
        let mut cuts = cuts;
        cuts.swap(0, best);
        depth[q as usize] = cuts[0].depth;
        area_flow[q as usize] = cuts[0].area_flow;
        cuts.push(trivial(q));
        sets[q as usize] = cuts;
    }
    Some(CutSets { sets, depth, order })
}
