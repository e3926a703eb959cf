//! Markov action-observation context trees.
//!
//! Internal nodes at even depth branch on observations, internal nodes at
//! odd depth branch on actions, and every internal node carries the full set
//! of children. A leaf's root-to-leaf label path, read backwards, is the
//! suffix of the history that defines its state.
//!
//! Node ids are pre-order positions. Every edit rebuilds the arena, so two
//! trees with the same structure always number their nodes identically.

use std::fmt;
use std::io::{BufRead, Write};

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::history::History;

pub const DEFAULT_MAX_DEPTH: usize = 12;

/// Index of a node in pre-order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, PartialEq)]
struct Node {
    depth: usize,
    parent: Option<usize>,
    label: usize,
    children: Vec<usize>,
    mergeable: bool,
    splittable: bool,
}

impl Node {
    fn fresh(depth: usize, parent: Option<usize>, label: usize) -> Self {
        Self {
            depth,
            parent,
            label,
            children: Vec::new(),
            mergeable: true,
            splittable: true,
        }
    }

    fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Result of walking down the tree along a symbol sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Descent {
    /// A leaf was reached, possibly before the symbols ran out.
    Leaf(NodeId),
    /// The symbols ran out at an internal node.
    Internal(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Observation(usize),
    Action(usize),
}

/// A state of the tree: the label string of one leaf, oldest symbol first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSuffix {
    pub id: usize,
    pub node: NodeId,
    pub symbols: Vec<Symbol>,
}

impl StateSuffix {
    /// The observation labels only, oldest first, as digits. This is the
    /// natural rendering for observation-only trees.
    pub fn observation_string(&self) -> String {
        self.symbols
            .iter()
            .filter_map(|s| match s {
                Symbol::Observation(o) => Some(o.to_string()),
                Symbol::Action(_) => None,
            })
            .collect::<Vec<_>>()
            .join("")
    }
}

impl fmt::Display for StateSuffix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symbols.is_empty() {
            return write!(f, "ε");
        }
        for s in &self.symbols {
            match s {
                Symbol::Observation(o) => write!(f, "o{o}")?,
                Symbol::Action(a) => write!(f, "a{a}")?,
            }
        }
        Ok(())
    }
}

/// A state whose successor is not determined by the next action and
/// observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkovViolation {
    pub state: NodeId,
    pub action: usize,
    pub observation: usize,
}

#[derive(Debug, Clone)]
pub struct Aoct {
    nodes: Vec<Node>,
    num_actions: usize,
    num_observations: usize,
    max_depth: usize,
    /// State id per node, `usize::MAX` for internal nodes.
    state_of_node: Vec<usize>,
    leaves: Vec<usize>,
}

/// Structural equality: same node and edge sets. Labels are ignored.
impl PartialEq for Aoct {
    fn eq(&self, other: &Self) -> bool {
        self.num_actions == other.num_actions
            && self.num_observations == other.num_observations
            && self.nodes.len() == other.nodes.len()
            && self
                .nodes
                .iter()
                .zip(&other.nodes)
                .all(|(a, b)| a.depth == b.depth && a.label == b.label)
    }
}

impl Eq for Aoct {}

impl Aoct {
    pub fn root_only(num_actions: usize, num_observations: usize) -> Self {
        Self::with_max_depth(num_actions, num_observations, DEFAULT_MAX_DEPTH)
    }

    pub fn with_max_depth(num_actions: usize, num_observations: usize, max_depth: usize) -> Self {
        assert!(num_actions > 0 && num_observations > 0);
        let mut tree = Self {
            nodes: vec![Node::fresh(0, None, 0)],
            num_actions,
            num_observations,
            max_depth,
            state_of_node: Vec::new(),
            leaves: Vec::new(),
        };
        tree.reindex();
        tree
    }

    /// Builds a tree by plain-splitting the nodes at the given root-to-node
    /// label paths, in order. Each path must end exactly at a leaf.
    pub fn from_split_paths(
        num_actions: usize,
        num_observations: usize,
        paths: &[&[usize]],
    ) -> Result<Self> {
        let mut tree = Self::root_only(num_actions, num_observations);
        for path in paths {
            let node = tree.node_at(path).map_err(|leaf| {
                Error::Config(format!("path {path:?} passes through leaf {}", leaf.0))
            })?;
            tree = tree.split(node)?;
        }
        Ok(tree)
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_observations(&self) -> usize {
        self.num_observations
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn set_max_depth(&mut self, max_depth: usize) {
        self.max_depth = max_depth;
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_states(&self) -> usize {
        self.leaves.len()
    }

    /// Depth of the deepest leaf.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn node_depth(&self, node: NodeId) -> usize {
        self.nodes[node.0].depth
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        self.nodes[node.0].is_leaf()
    }

    pub fn children(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes[node.0].children.iter().map(|&c| NodeId(c))
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.nodes[node.0].parent.map(NodeId)
    }

    pub fn is_mergeable(&self, node: NodeId) -> bool {
        self.nodes[node.0].mergeable
    }

    pub fn is_splittable(&self, node: NodeId) -> bool {
        self.nodes[node.0].splittable
    }

    pub fn set_mergeable(&mut self, node: NodeId, mergeable: bool) {
        self.nodes[node.0].mergeable = mergeable;
    }

    pub fn set_splittable(&mut self, node: NodeId, splittable: bool) {
        self.nodes[node.0].splittable = splittable;
    }

    /// Leaves in pre-order; position in this slice is the state id.
    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.leaves.iter().map(|&l| NodeId(l))
    }

    pub fn leaf(&self, state: usize) -> NodeId {
        NodeId(self.leaves[state])
    }

    pub fn state_id(&self, node: NodeId) -> Option<usize> {
        match self.state_of_node[node.0] {
            usize::MAX => None,
            s => Some(s),
        }
    }

    fn arity(&self, depth: usize) -> usize {
        if depth % 2 == 0 {
            self.num_observations
        } else {
            self.num_actions
        }
    }

    /// Root-to-node edge labels.
    pub fn path(&self, node: NodeId) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.nodes[node.0].depth);
        let mut cur = node.0;
        while let Some(p) = self.nodes[cur].parent {
            path.push(self.nodes[cur].label);
            cur = p;
        }
        path.reverse();
        path
    }

    pub fn states(&self) -> Vec<StateSuffix> {
        self.leaves
            .iter()
            .enumerate()
            .map(|(id, &leaf)| {
                let path = self.path(NodeId(leaf));
                let symbols = path
                    .iter()
                    .enumerate()
                    .rev()
                    .map(|(depth, &label)| {
                        if depth % 2 == 0 {
                            Symbol::Observation(label)
                        } else {
                            Symbol::Action(label)
                        }
                    })
                    .collect();
                StateSuffix {
                    id,
                    node: NodeId(leaf),
                    symbols,
                }
            })
            .collect()
    }

    /// Walks down from the root, taking the child labelled by each symbol in
    /// turn, until a leaf is reached or the symbols run out.
    pub fn descend<I: IntoIterator<Item = usize>>(&self, symbols: I) -> Descent {
        let mut cur = 0;
        let mut symbols = symbols.into_iter();
        loop {
            let node = &self.nodes[cur];
            if node.is_leaf() {
                return Descent::Leaf(NodeId(cur));
            }
            match symbols.next() {
                Some(s) => cur = node.children[s],
                None => return Descent::Internal(NodeId(cur)),
            }
        }
    }

    /// The node at exactly `path`, or the leaf that cuts the path short.
    pub fn node_at(&self, path: &[usize]) -> std::result::Result<NodeId, NodeId> {
        let mut cur = 0;
        for &label in path {
            let node = &self.nodes[cur];
            if node.is_leaf() {
                return Err(NodeId(cur));
            }
            cur = node.children[label];
        }
        Ok(NodeId(cur))
    }

    /// Maps the history up to time `t` to a leaf. `None` is the boundary
    /// state: the history is too short to resolve the context.
    pub fn locate(&self, history: &History, t: usize) -> Option<NodeId> {
        match self.descend(history.context(t)) {
            Descent::Leaf(n) => Some(n),
            Descent::Internal(_) => None,
        }
    }

    /// State id of the history at time `t`, `None` for the boundary state.
    pub fn map_history(&self, history: &History, t: usize) -> Option<usize> {
        self.locate(history, t).map(|n| self.state_of_node[n.0])
    }

    /// Where the state at `leaf` goes after `action` then `observation`.
    pub fn next_state(&self, leaf: NodeId, action: usize, observation: usize) -> Descent {
        let path = self.path(leaf);
        self.descend([observation, action].into_iter().chain(path))
    }

    pub fn markov_violations(&self) -> Vec<MarkovViolation> {
        let mut out = Vec::new();
        for leaf in self.leaves() {
            for action in 0..self.num_actions {
                for observation in 0..self.num_observations {
                    if let Descent::Internal(_) = self.next_state(leaf, action, observation) {
                        out.push(MarkovViolation {
                            state: leaf,
                            action,
                            observation,
                        });
                    }
                }
            }
        }
        out
    }

    /// True iff every state has a unique successor for every action and
    /// observation.
    pub fn is_markov(&self) -> bool {
        self.markov_violations().is_empty()
    }

    /// Adds the full set of children to a leaf.
    pub fn split(&self, node: NodeId) -> Result<Aoct> {
        if !self.is_leaf(node) {
            return Err(Error::NotALeaf(node.0));
        }
        let mut tree = self.clone();
        tree.split_in_place(node.0);
        tree.reindex();
        Ok(tree)
    }

    fn split_in_place(&mut self, node: usize) {
        let depth = self.nodes[node].depth;
        let arity = self.arity(depth);
        let first = self.nodes.len();
        for label in 0..arity {
            self.nodes.push(Node::fresh(depth + 1, Some(node), label));
        }
        self.nodes[node].children = (first..first + arity).collect();
    }

    /// Leaves that a Markov-split of `leaf` splits, starting with `leaf`.
    ///
    /// In a Markov tree, splitting the node at path `p` can only break the
    /// state at `p[2..]`, and only when that node is a leaf; splitting it in
    /// turn can only break `p[4..]`, and so on.
    pub fn split_closure(&self, leaf: NodeId) -> Vec<NodeId> {
        let path = self.path(leaf);
        let mut chain = vec![leaf];
        let mut offset = 2;
        while offset <= path.len() {
            match self.node_at(&path[offset..]) {
                Ok(n) if self.is_leaf(n) => chain.push(n),
                Ok(_) => break,
                // Only possible when the tree is not Markov to begin with.
                Err(n) => {
                    chain.push(n);
                    break;
                }
            }
            offset += 2;
        }
        chain
    }

    fn has_plain_split_permit(&self, node: NodeId) -> bool {
        let n = &self.nodes[node.0];
        n.is_leaf() && n.splittable
    }

    pub fn has_split_permit(&self, node: NodeId) -> bool {
        self.has_plain_split_permit(node)
            && self.nodes[node.0].depth < self.max_depth
            && self
                .split_closure(node)
                .iter()
                .all(|&n| self.has_plain_split_permit(n))
    }

    /// Nodes holding a Markov-split permit, in id order.
    pub fn split_permits(&self) -> Vec<NodeId> {
        self.leaves().filter(|&l| self.has_split_permit(l)).collect()
    }

    /// Splits `leaf` and every leaf that must be split to keep the tree
    /// Markov. Returns the new tree and the ids, in the new tree, of the
    /// nodes that were split.
    pub fn markov_split(&self, leaf: NodeId) -> Result<(Aoct, Vec<NodeId>)> {
        if !self.is_leaf(leaf) {
            return Err(Error::NotALeaf(leaf.0));
        }
        if !self.has_split_permit(leaf) {
            return Err(Error::NoPermit(leaf.0, "Markov-split"));
        }
        Ok(self.markov_split_unchecked(leaf))
    }

    fn markov_split_unchecked(&self, leaf: NodeId) -> (Aoct, Vec<NodeId>) {
        let chain = self.split_closure(leaf);
        let mut tree = self.clone();
        for n in &chain {
            tree.split_in_place(n.0);
        }
        let remap = tree.reindex();
        let split = chain.iter().map(|n| NodeId(remap[n.0])).collect();
        (tree, split)
    }

    fn subtree_internal(&self, node: usize, out: &mut Vec<usize>) {
        if self.nodes[node].is_leaf() {
            return;
        }
        out.push(node);
        for &c in &self.nodes[node].children {
            self.subtree_internal(c, out);
        }
    }

    /// Internal nodes that a Markov-merge of `node` collapses into leaves,
    /// starting with `node` itself, in discovery order.
    ///
    /// Once `w` becomes a leaf its successor under `(a, o)` is the node at
    /// path `o, a, path(w)`; if that node is internal, its whole subtree must
    /// collapse too.
    pub fn merge_closure(&self, node: NodeId) -> Vec<NodeId> {
        let mut in_closure = vec![false; self.nodes.len()];
        let mut closure = Vec::new();
        let mut work = Vec::new();
        if self.is_leaf(node) {
            return closure;
        }
        let mut sub = Vec::new();
        self.subtree_internal(node.0, &mut sub);
        for n in sub {
            in_closure[n] = true;
            closure.push(NodeId(n));
        }
        work.push(node.0);
        while let Some(w) = work.pop() {
            let path = self.path(NodeId(w));
            for action in 0..self.num_actions {
                for observation in 0..self.num_observations {
                    let mut p = Vec::with_capacity(path.len() + 2);
                    p.push(observation);
                    p.push(action);
                    p.extend_from_slice(&path);
                    let z = match self.node_at(&p) {
                        Ok(z) => z.0,
                        Err(_) => continue,
                    };
                    if self.nodes[z].is_leaf() || in_closure[z] {
                        continue;
                    }
                    let mut sub = Vec::new();
                    self.subtree_internal(z, &mut sub);
                    for n in sub {
                        if !in_closure[n] {
                            in_closure[n] = true;
                            closure.push(NodeId(n));
                        }
                    }
                    work.push(z);
                }
            }
        }
        closure
    }

    fn has_plain_merge_permit(&self, node: NodeId) -> bool {
        let n = &self.nodes[node.0];
        !n.is_leaf() && n.mergeable && n.children.iter().all(|&c| self.nodes[c].is_leaf())
    }

    /// Markov-merge permit: `node` itself may be merged and every node in
    /// its merge closure is mergeable. Closure nodes with internal children
    /// are merged bottom-up, so each one holds a plain merge permit when its
    /// turn comes.
    pub fn has_merge_permit(&self, node: NodeId) -> bool {
        self.has_plain_merge_permit(node)
            && self
                .merge_closure(node)
                .iter()
                .all(|&n| self.nodes[n.0].mergeable)
    }

    pub fn merge_permits(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .map(NodeId)
            .filter(|&n| self.has_merge_permit(n))
            .collect()
    }

    /// Collapses `node` and its merge closure into leaves.
    pub fn markov_merge(&self, node: NodeId) -> Result<Aoct> {
        if !self.has_merge_permit(node) {
            return Err(Error::NoPermit(node.0, "Markov-merge"));
        }
        Ok(self.collapse(&self.merge_closure(node)))
    }

    fn collapse(&self, nodes: &[NodeId]) -> Aoct {
        let mut tree = self.clone();
        for n in nodes {
            tree.nodes[n.0].children.clear();
            tree.nodes[n.0].splittable = true;
        }
        tree.reindex();
        tree
    }

    /// Rebuilds the arena in pre-order, dropping unreachable nodes, and
    /// returns the old-to-new id map (`usize::MAX` for dropped nodes).
    fn reindex(&mut self) -> Vec<usize> {
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            remap[n] = order.len();
            order.push(n);
            stack.extend(self.nodes[n].children.iter().rev());
        }
        let mut nodes = Vec::with_capacity(order.len());
        for &old in &order {
            let mut node = self.nodes[old].clone();
            node.parent = node.parent.map(|p| remap[p]);
            for c in &mut node.children {
                *c = remap[*c];
            }
            nodes.push(node);
        }
        self.nodes = nodes;
        self.state_of_node = vec![usize::MAX; self.nodes.len()];
        self.leaves.clear();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.is_leaf() {
                self.state_of_node[i] = self.leaves.len();
                self.leaves.push(i);
            }
        }
        remap
    }

    /// Marks each leaf splittable iff its state occurs in the history.
    /// `occupancy[s]` counts the time steps mapped to state `s`.
    pub fn refresh_splittable(&mut self, occupancy: &[u64]) {
        debug_assert_eq!(occupancy.len(), self.leaves.len());
        for (s, &leaf) in self.leaves.iter().enumerate() {
            self.nodes[leaf].splittable = occupancy[s] > 0;
        }
    }

    /// Number of time steps of the history mapped to each state.
    pub fn occupancy(&self, history: &History) -> Vec<u64> {
        let mut counts = vec![0u64; self.num_states()];
        for t in 0..=history.len() {
            if let Some(s) = self.map_history(history, t) {
                counts[s] += 1;
            }
        }
        counts
    }

    /// Recomputes splittable labels from the history.
    pub fn relabel(&mut self, history: &History) {
        let occ = self.occupancy(history);
        self.refresh_splittable(&occ);
    }

    /// Writes the tree in pre-order, one `depth,edge_label,splittable,mergeable`
    /// line per node after a `#` header carrying the alphabet sizes. The root
    /// has edge label `-`.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# aoct actions={} observations={} max_depth={}",
            self.num_actions, self.num_observations, self.max_depth
        )?;
        for (i, node) in self.nodes.iter().enumerate() {
            let label = if i == 0 {
                "-".to_string()
            } else {
                node.label.to_string()
            };
            writeln!(
                out,
                "{},{},{},{}",
                node.depth,
                label,
                u8::from(node.splittable),
                u8::from(node.mergeable)
            )?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Aoct> {
        let err = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = input.lines().enumerate();
        let (num_actions, num_observations, max_depth) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(err(0, "missing header".into()));
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            break parse_header(&line).map_err(|m| err(i + 1, m))?;
        };

        let mut nodes: Vec<Node> = Vec::new();
        // Path of open internal nodes from the root down.
        let mut stack: Vec<usize> = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(err(line_no, format!("expected 4 fields, found {}", fields.len())));
            }
            let depth: usize = fields[0]
                .parse()
                .map_err(|e| err(line_no, format!("bad depth {:?}: {e}", fields[0])))?;
            let flag = |s: &str| match s {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(err(line_no, format!("bad flag {s:?}"))),
            };
            let splittable = flag(fields[2])?;
            let mergeable = flag(fields[3])?;
            if nodes.is_empty() {
                if depth != 0 || fields[1] != "-" {
                    return Err(err(line_no, "first node must be the root `0,-`".into()));
                }
                nodes.push(Node {
                    depth: 0,
                    parent: None,
                    label: 0,
                    children: Vec::new(),
                    mergeable,
                    splittable,
                });
                stack.push(0);
                continue;
            }
            let label: usize = fields[1]
                .parse()
                .map_err(|e| err(line_no, format!("bad edge label {:?}: {e}", fields[1])))?;
            if depth == 0 || depth > stack.len() {
                return Err(err(line_no, format!("depth {depth} does not follow the previous node")));
            }
            // Close finished subtrees until the parent sits at depth - 1.
            while stack.len() > depth {
                let done = stack.pop().expect("non-empty");
                let arity = if nodes[done].depth % 2 == 0 {
                    num_observations
                } else {
                    num_actions
                };
                let n = nodes[done].children.len();
                if n != 0 && n != arity {
                    return Err(err(line_no, format!("node at depth {} has {n} of {arity} children", nodes[done].depth)));
                }
            }
            let parent = *stack.last().expect("root stays open");
            let arity = if nodes[parent].depth % 2 == 0 {
                num_observations
            } else {
                num_actions
            };
            if label != nodes[parent].children.len() || label >= arity {
                return Err(err(line_no, format!("unexpected edge label {label}")));
            }
            let id = nodes.len();
            nodes.push(Node {
                depth,
                parent: Some(parent),
                label,
                children: Vec::new(),
                mergeable,
                splittable,
            });
            nodes[parent].children.push(id);
            stack.push(id);
        }
        if nodes.is_empty() {
            return Err(err(0, "no nodes".into()));
        }
        for (i, node) in nodes.iter().enumerate() {
            let arity = if node.depth % 2 == 0 {
                num_observations
            } else {
                num_actions
            };
            if !node.children.is_empty() && node.children.len() != arity {
                return Err(err(0, format!("node {i} has {} of {arity} children", node.children.len())));
            }
        }
        let mut tree = Aoct {
            nodes,
            num_actions,
            num_observations,
            max_depth,
            state_of_node: Vec::new(),
            leaves: Vec::new(),
        };
        tree.reindex();
        Ok(tree)
    }

    pub fn parse_text(text: &str) -> Result<Aoct> {
        Self::read_text(text.as_bytes())
    }
}

fn parse_header(line: &str) -> std::result::Result<(usize, usize, usize), String> {
    let rest = line
        .trim()
        .strip_prefix("# aoct")
        .ok_or_else(|| format!("expected `# aoct` header, found {line:?}"))?;
    let mut actions = None;
    let mut observations = None;
    let mut max_depth = DEFAULT_MAX_DEPTH;
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("bad header field {kv:?}"))?;
        let v: usize = v.parse().map_err(|e| format!("bad header value {kv:?}: {e}"))?;
        match k {
            "actions" => actions = Some(v),
            "observations" => observations = Some(v),
            "max_depth" => max_depth = v,
            _ => return Err(format!("unknown header field {k:?}")),
        }
    }
    match (actions, observations) {
        (Some(a), Some(o)) if a > 0 && o > 0 => Ok((a, o, max_depth)),
        _ => Err("header needs positive actions= and observations=".into()),
    }
}

/// Number of action-observation context trees of depth at most `depth`:
/// `K(0) = 1`, `K(1) = 2`, `K(d + 2) = (K(d)^|A| + 1)^|O| + 1`.
pub fn count_aocts(depth: usize, num_actions: usize, num_observations: usize) -> BigUint {
    let one = BigUint::from(1u32);
    let mut even = one.clone(); // K(d) for the current parity chain
    let start = depth % 2;
    if start == 1 {
        even = BigUint::from(2u32);
    }
    let mut d = start;
    while d < depth {
        let inner = even.pow(num_actions as u32) + &one;
        even = inner.pow(num_observations as u32) + &one;
        d += 2;
    }
    even
}
