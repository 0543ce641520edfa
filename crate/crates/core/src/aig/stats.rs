use super::{AigNetwork, Node};

/// Per-node AND level: inputs and the constant sit at 0.
pub fn compute_depth(net: &AigNetwork) -> Vec<u32> {
    let mut depth = vec![0u32; net.node_count()];
    for (i, node) in net.nodes().iter().enumerate() {
        if let Node::And(a, b) = *node {
            depth[i] = 1 + depth[a.index() as usize].max(depth[b.index() as usize]);
        }
    }
    depth
}

/// Per-node fanout: fanin references from AND nodes plus output references.
pub fn compute_fanout(net: &AigNetwork) -> Vec<u32> {
    let mut fanout = vec![0u32; net.node_count()];
    for node in net.nodes() {
        if let Node::And(a, b) = *node {
            fanout[a.index() as usize] += 1;
            fanout[b.index() as usize] += 1;
        }
    }
    for o in net.outputs() {
        fanout[o.index() as usize] += 1;
    }
    fanout
}
