//! Representative cone selection.
//!
//! Candidate roots are the critical-path AND nodes (delay mode) or all AND
//! nodes (area mode). Maximum fanout-free cones are tried first against a
//! descending cascade of size thresholds; when none qualifies anywhere, the
//! selection falls back to low-fanout cones.

use std::collections::HashMap;

use thiserror::Error;

use crate::aig::{compute_depth, compute_fanout, AigNetwork, NodeRef};
use crate::Mode;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConeError {
    #[error("node {node} of the cone has fanin {fanin} outside the cone and its support")]
    NotClosed { node: u32, fanin: u32 },
    #[error("invalid selection config: {0}")]
    Config(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConeKind {
    Mffc,
    LowFanout,
}

impl std::fmt::Display for ConeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConeKind::Mffc => "MFFC",
            ConeKind::LowFanout => "LowFanout",
        })
    }
}

/// A rooted sub-graph of a subject network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub root: u32,
    /// Cone body in ascending (topological) order; contains `root`.
    pub internal: Vec<u32>,
    /// Leaves in ascending order.
    pub support: Vec<u32>,
    pub kind: ConeKind,
    /// Size threshold at which the cone was selected.
    pub threshold: usize,
}

impl Cone {
    pub fn size(&self) -> usize {
        self.internal.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionConfig {
    pub mode: Mode,
    /// Minimum cone sizes, strictly descending.
    pub thresholds: Vec<usize>,
    /// Global fanout bound for low-fanout cones.
    pub fanout_limit: u32,
    pub per_threshold_cap: usize,
    /// The cap applies only when more candidates than this qualify.
    pub candidate_trigger: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            mode: Mode::Delay,
            thresholds: vec![800, 85, 30, 20, 15, 10],
            fanout_limit: 3,
            per_threshold_cap: 10,
            candidate_trigger: 100,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<(), ConeError> {
        if self.thresholds.is_empty() || self.thresholds.contains(&0) {
            return Err(ConeError::Config("thresholds must be positive"));
        }
        if self.thresholds.windows(2).any(|w| w[0] <= w[1]) {
            return Err(ConeError::Config("thresholds must be strictly descending"));
        }
        if self.fanout_limit == 0 {
            return Err(ConeError::Config("fanout limit must be at least 1"));
        }
        Ok(())
    }
}

/// Nodes on some maximum-depth input-to-output path, in ascending order.
///
/// `n` is critical iff `depth(n) + height(n)` equals the largest output
/// depth, where `height(n)` is the longest path from `n` to an output.
/// Inputs on such paths are included; the constant node never is.
pub fn mark_critical_path(net: &AigNetwork) -> Vec<u32> {
    let depth = compute_depth(net);
    let mut height = vec![-1i64; net.node_count()];
    for o in net.outputs() {
        height[o.index() as usize] = height[o.index() as usize].max(0);
    }
    for idx in (1..net.node_count() as u32).rev() {
        let h = height[idx as usize];
        if h < 0 {
            continue;
        }
        if let Some((a, b)) = net.fanins(idx) {
            for f in [a, b] {
                let slot = &mut height[f.index() as usize];
                *slot = (*slot).max(h + 1);
            }
        }
    }
    let max_depth = net.outputs().iter().map(|o| depth[o.index() as usize]).max();
    let Some(max_depth) = max_depth else { return Vec::new() };
    (1..net.node_count() as u32)
        .filter(|&i| height[i as usize] >= 0 && depth[i as usize] as i64 + height[i as usize] == max_depth as i64)
        .collect()
}

fn support_of(net: &AigNetwork, internal: &[u32], inside: impl Fn(u32) -> bool) -> Vec<u32> {
    let mut support: Vec<u32> = internal
        .iter()
        .flat_map(|&n| {
            let (a, b) = net.fanins(n).expect("cone nodes are ANDs");
            [a.index(), b.index()]
        })
        .filter(|&f| f != 0 && !inside(f))
        .collect();
    support.sort_unstable();
    support.dedup();
    support
}

/// Maximum fanout-free cone of `root` and its support, by reference-count
/// peeling. `fanout` must come from [`compute_fanout`] on `net`.
pub fn mffc_cone_supp(net: &AigNetwork, fanout: &[u32], root: u32) -> (Vec<u32>, Vec<u32>) {
    debug_assert!(net.is_and(root));
    let mut refs: HashMap<u32, u32> = HashMap::new();
    let mut internal = vec![root];
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        let (a, b) = net.fanins(n).unwrap();
        for f in [a.index(), b.index()] {
            if !net.is_and(f) {
                continue;
            }
            let r = refs.entry(f).or_insert(fanout[f as usize]);
            *r -= 1;
            if *r == 0 {
                internal.push(f);
                stack.push(f);
            }
        }
    }
    internal.sort_unstable();
    let support = support_of(net, &internal, |f| internal.binary_search(&f).is_ok());
    (internal, support)
}

/// Cone grown from `root` through AND fanins whose global fanout is at most
/// `limit`.
pub fn lowfanout_cone_supp(net: &AigNetwork, fanout: &[u32], root: u32, limit: u32) -> (Vec<u32>, Vec<u32>) {
    debug_assert!(net.is_and(root));
    let mut seen = std::collections::HashSet::new();
    seen.insert(root);
    let mut internal = vec![root];
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        let (a, b) = net.fanins(n).unwrap();
        for f in [a.index(), b.index()] {
            if net.is_and(f) && fanout[f as usize] <= limit && seen.insert(f) {
                internal.push(f);
                stack.push(f);
            }
        }
    }
    internal.sort_unstable();
    let support = support_of(net, &internal, |f| internal.binary_search(&f).is_ok());
    (internal, support)
}

/// Runs the threshold cascade and returns pairwise internal-disjoint cones in
/// selection order.
pub fn select_representative_cones(net: &AigNetwork, cfg: &SelectionConfig) -> Vec<Cone> {
    let fanout = compute_fanout(net);
    let roots: Vec<u32> = match cfg.mode {
        Mode::Delay => mark_critical_path(net).into_iter().filter(|&n| net.is_and(n)).collect(),
        Mode::Area => net.and_nodes().collect(),
    };

    let mffcs: Vec<(u32, Vec<u32>, Vec<u32>)> = roots
        .iter()
        .map(|&r| {
            let (i, s) = mffc_cone_supp(net, &fanout, r);
            (r, i, s)
        })
        .collect();
    let selected = cascade(net, cfg, &mffcs, ConeKind::Mffc);
    if !selected.is_empty() {
        return selected;
    }
    let low: Vec<(u32, Vec<u32>, Vec<u32>)> = roots
        .iter()
        .map(|&r| {
            let (i, s) = lowfanout_cone_supp(net, &fanout, r, cfg.fanout_limit);
            (r, i, s)
        })
        .collect();
    cascade(net, cfg, &low, ConeKind::LowFanout)
}

fn cascade(net: &AigNetwork, cfg: &SelectionConfig, cones: &[(u32, Vec<u32>, Vec<u32>)], kind: ConeKind) -> Vec<Cone> {
    let mut taken = vec![false; net.node_count()];
    let mut used_root = vec![false; net.node_count()];
    let mut selected = Vec::new();
    for &k in &cfg.thresholds {
        let mut qualifying: Vec<&(u32, Vec<u32>, Vec<u32>)> =
            cones.iter().filter(|(r, i, s)| !used_root[*r as usize] && s.len() >= 2 && i.len() >= k).collect();
        // largest first, smaller root index on ties
        qualifying.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
        if qualifying.len() > cfg.candidate_trigger {
            qualifying.truncate(cfg.per_threshold_cap);
        }
        for (root, internal, support) in qualifying {
            if internal.iter().any(|&n| taken[n as usize]) {
                continue;
            }
            for &n in internal {
                taken[n as usize] = true;
            }
            used_root[*root as usize] = true;
            selected.push(Cone {
                root: *root,
                internal: internal.clone(),
                support: support.clone(),
                kind,
                threshold: k,
            });
        }
    }
    selected
}

/// Standalone copy of a cone: one input per support node (in support
/// order) and a single output driven by the root.
pub fn extract_cone_aig(net: &AigNetwork, cone: &Cone) -> Result<AigNetwork, ConeError> {
    let mut out = AigNetwork::with_inputs(cone.support.len());
    let mut map: HashMap<u32, NodeRef> = HashMap::with_capacity(cone.internal.len() + cone.support.len() + 1);
    map.insert(0, NodeRef::FALSE);
    for (i, &s) in cone.support.iter().enumerate() {
        map.insert(s, out.input(i));
    }
    for &n in &cone.internal {
        let (a, b) = net.fanins(n).ok_or(ConeError::NotClosed { node: n, fanin: n })?;
        let edge = |f: NodeRef| -> Result<NodeRef, ConeError> {
            map.get(&f.index())
                .map(|r| r.complement_if(f.is_complemented()))
                .ok_or(ConeError::NotClosed { node: n, fanin: f.index() })
        };
        let (fa, fb) = (edge(a)?, edge(b)?);
        let r = out.and(fa, fb);
        map.insert(n, r);
    }
    let root = *map.get(&cone.root).ok_or(ConeError::NotClosed { node: cone.root, fanin: cone.root })?;
    out.add_output(root);
    Ok(out)
}
