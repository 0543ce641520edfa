//! A small e-graph over the Boolean language {AND, OR, NOT, variable, false}.
//!
//! Classes are kept in a union-find; congruence is restored by a rebuild
//! that re-canonicalizes every e-node and merges classes whose canonical
//! nodes collide, repeating until no merge happens.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Id(pub u32);

impl Id {
    fn ix(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ENode {
    False,
    Var(u32),
    Not(Id),
    And([Id; 2]),
    Or([Id; 2]),
}

impl ENode {
    pub fn children(&self) -> &[Id] {
        match self {
            ENode::False | ENode::Var(_) => &[],
            ENode::Not(a) => std::slice::from_ref(a),
            ENode::And(c) | ENode::Or(c) => c,
        }
    }

    pub fn map_children(&self, mut f: impl FnMut(Id) -> Id) -> ENode {
        match *self {
            ENode::False | ENode::Var(_) => *self,
            ENode::Not(a) => ENode::Not(f(a)),
            ENode::And([a, b]) => ENode::And([f(a), f(b)]),
            ENode::Or([a, b]) => ENode::Or([f(a), f(b)]),
        }
    }
}

/// A hash-consed term: nodes reference earlier positions; the last node is
/// the root.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Term {
    nodes: Vec<ENode>,
    memo: HashMap<ENode, Id>,
}

impl Term {
    pub fn new() -> Self {
        Term::default()
    }

    /// Adds a node (children must already be in the term) and returns its
    /// position; identical nodes are shared.
    pub fn add(&mut self, node: ENode) -> Id {
        if let Some(&id) = self.memo.get(&node) {
            return id;
        }
        let id = Id(self.nodes.len() as u32);
        self.nodes.push(node);
        self.memo.insert(node, id);
        id
    }

    pub fn nodes(&self) -> &[ENode] {
        &self.nodes
    }

    pub fn root(&self) -> Option<Id> {
        self.nodes.len().checked_sub(1).map(|i| Id(i as u32))
    }

    /// Evaluates the root on 64 assignments at once.
    pub fn eval(&self, vars: &[u64]) -> u64 {
        let mut val: Vec<u64> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let v = match *n {
                ENode::False => 0,
                ENode::Var(i) => vars[i as usize],
                ENode::Not(a) => !val[a.ix()],
                ENode::And([a, b]) => val[a.ix()] & val[b.ix()],
                ENode::Or([a, b]) => val[a.ix()] | val[b.ix()],
            };
            val.push(v);
        }
        val.last().copied().unwrap_or(0)
    }

    fn fmt_node(&self, id: Id, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.nodes[id.ix()] {
            ENode::False => f.write_str("0"),
            ENode::Var(i) => write!(f, "x{i}"),
            ENode::Not(a) => {
                f.write_str("(! ")?;
                self.fmt_node(a, f)?;
                f.write_str(")")
            }
            ENode::And([a, b]) | ENode::Or([a, b]) => {
                let op = if matches!(self.nodes[id.ix()], ENode::And(_)) { "&" } else { "|" };
                write!(f, "({op} ")?;
                self.fmt_node(a, f)?;
                f.write_str(" ")?;
                self.fmt_node(b, f)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.root() {
            Some(r) => self.fmt_node(r, f),
            None => f.write_str("<empty>"),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct EGraph {
    parent: Vec<Id>,
    /// Nodes per class; only meaningful at canonical ids.
    classes: Vec<Vec<ENode>>,
    memo: HashMap<ENode, Id>,
}

impl EGraph {
    pub fn new() -> Self {
        EGraph::default()
    }

    pub fn find(&self, mut id: Id) -> Id {
        while self.parent[id.ix()] != id {
            id = self.parent[id.ix()];
        }
        id
    }

    pub fn canonicalize(&self, node: &ENode) -> ENode {
        node.map_children(|c| self.find(c))
    }

    pub fn lookup(&self, node: &ENode) -> Option<Id> {
        self.memo.get(&self.canonicalize(node)).map(|&id| self.find(id))
    }

    pub fn add(&mut self, node: ENode) -> Id {
        let node = self.canonicalize(&node);
        if let Some(&id) = self.memo.get(&node) {
            return self.find(id);
        }
        let id = Id(self.parent.len() as u32);
        self.parent.push(id);
        self.classes.push(vec![node]);
        self.memo.insert(node, id);
        id
    }

    pub fn add_term(&mut self, term: &Term) -> Option<Id> {
        let mut ids = Vec::with_capacity(term.nodes.len());
        for n in &term.nodes {
            let id = self.add(n.map_children(|c| ids[c.ix()]));
            ids.push(id);
        }
        ids.last().copied()
    }

    /// Merges two classes; the smaller id becomes the representative.
    /// Returns whether anything changed.
    pub fn union(&mut self, a: Id, b: Id) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (root, other) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[other.ix()] = root;
        let moved = std::mem::take(&mut self.classes[other.ix()]);
        self.classes[root.ix()].extend(moved);
        true
    }

    /// Restores the congruence invariant and canonical node lists.
    pub fn rebuild(&mut self) {
        loop {
            self.flatten();
            let mut memo: HashMap<ENode, Id> = HashMap::with_capacity(self.memo.len());
            let mut merges = Vec::new();
            for c in self.class_ids() {
                for n in &self.classes[c.ix()] {
                    let canon = self.canonicalize(n);
                    match memo.entry(canon) {
                        Entry::Occupied(e) => {
                            if *e.get() != c {
                                merges.push((*e.get(), c));
                            }
                        }
                        Entry::Vacant(e) => {
                            e.insert(c);
                        }
                    }
                }
            }
            let mut changed = false;
            for (a, b) in merges {
                changed |= self.union(a, b);
            }
            if !changed {
                self.flatten();
                for c in self.class_ids() {
                    let mut nodes: Vec<ENode> =
                        self.classes[c.ix()].iter().map(|n| n.map_children(|x| self.parent[x.ix()])).collect();
                    nodes.sort_unstable();
                    nodes.dedup();
                    self.classes[c.ix()] = nodes;
                }
                self.memo = memo;
                return;
            }
        }
    }

    fn flatten(&mut self) {
        for i in 0..self.parent.len() {
            let r = self.find(Id(i as u32));
            self.parent[i] = r;
        }
    }

    /// Canonical class ids in ascending order.
    pub fn class_ids(&self) -> Vec<Id> {
        (0..self.parent.len() as u32).map(Id).filter(|&i| self.parent[i.ix()] == i).collect()
    }

    /// Nodes of a class (canonical after [`EGraph::rebuild`]).
    pub fn nodes(&self, id: Id) -> &[ENode] {
        &self.classes[self.find(id).ix()]
    }

    pub fn num_classes(&self) -> usize {
        self.class_ids().len()
    }

    /// Number of distinct e-nodes in the hash-cons table.
    pub fn num_nodes(&self) -> usize {
        self.memo.len()
    }

    /// Id slots allocated, including merged ones.
    pub fn id_bound(&self) -> usize {
        self.parent.len()
    }
}
