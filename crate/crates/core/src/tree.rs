//! Rooted trees, tree expressions, labelings and graceful verification.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;

/// Trees larger than this are rejected so that edge-label arithmetic stays in `u32`.
pub const MAX_VERTICES: usize = 1 << 16;

/// Nested-tuple notation for rooted trees.
///
/// `LeafCount(n)` is a root with `n` leaf children (so `LeafCount(0)` is a
/// single vertex). `Node(children)` is a root whose root-deleted components are
/// `children`, in order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TreeExpr {
    LeafCount(u32),
    Node(Vec<TreeExpr>),
}

impl TreeExpr {
    /// Number of vertices of the tree this expression denotes.
    pub fn vertex_count(&self) -> usize {
        match self {
            TreeExpr::LeafCount(n) => 1 + *n as usize,
            TreeExpr::Node(children) => 1 + children.iter().map(TreeExpr::vertex_count).sum::<usize>(),
        }
    }
}

impl fmt::Display for TreeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeExpr::LeafCount(n) => write!(f, "{n}"),
            TreeExpr::Node(children) => {
                f.write_str("(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

struct ExprParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ExprParser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<TreeExpr, ParseError> {
        self.skip_ws();
        match self.bytes.get(self.pos) {
            None => self.error("unexpected end of input, expected integer or '('"),
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                if self.bytes.get(self.pos) == Some(&b')') {
                    return self.error("empty parentheses");
                }
                let mut children = vec![self.expr()?];
                loop {
                    self.skip_ws();
                    match self.bytes.get(self.pos) {
                        Some(b',') => {
                            self.pos += 1;
                            children.push(self.expr()?);
                        }
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(TreeExpr::Node(children));
                        }
                        None => return self.error("unexpected end of input, expected ',' or ')'"),
                        Some(&c) => return self.error(format!("unexpected '{}', expected ',' or ')'", c as char)),
                    }
                }
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
                match digits.parse::<u32>() {
                    Ok(n) if (n as usize) < MAX_VERTICES => Ok(TreeExpr::LeafCount(n)),
                    _ => Err(ParseError { offset: start, message: format!("leaf count {digits} too large") }),
                }
            }
            Some(&c) => self.error(format!("unexpected '{}', expected integer or '('", c as char)),
        }
    }
}

/// Parses `Expr := UINT | '(' Expr (',' Expr)* ')'`, ignoring whitespace.
pub fn parse_tree_expr(text: &str) -> Result<TreeExpr, ParseError> {
    let mut p = ExprParser { bytes: text.as_bytes(), pos: 0 };
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return p.error("trailing input");
    }
    if expr.vertex_count() > MAX_VERTICES {
        return Err(ParseError { offset: 0, message: format!("tree exceeds {MAX_VERTICES} vertices") });
    }
    Ok(expr)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("no vertices")]
    Empty,
    #[error("{0} roots found, expected exactly one")]
    RootCount(usize),
    #[error("vertex {vertex} has parent {parent} which does not exist")]
    DanglingParent { vertex: VertexId, parent: VertexId },
    #[error("parent map contains a cycle through vertex {0}")]
    Cycle(VertexId),
    #[error("tree exceeds {MAX_VERTICES} vertices")]
    TooLarge,
}

/// A rooted tree on dense vertex ids `0..n` with ordered child lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    root: VertexId,
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
}

impl RootedTree {
    pub fn single_vertex() -> Self {
        RootedTree { root: 0, parent: vec![None], children: vec![Vec::new()] }
    }

    /// Star `K_{1,n}` with center 0 and leaves `1..=n`.
    pub fn star(n: usize) -> Self {
        let mut t = RootedTree::single_vertex();
        for _ in 0..n {
            t.push_child(0);
        }
        t
    }

    /// Builds a tree from a parent map. Child lists are ordered by vertex id.
    pub fn from_parents(parents: &[Option<VertexId>]) -> Result<Self, TreeError> {
        let n = parents.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if n > MAX_VERTICES {
            return Err(TreeError::TooLarge);
        }
        let roots: Vec<_> = (0..n).filter(|&v| parents[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(TreeError::RootCount(roots.len()));
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(TreeError::DanglingParent { vertex: v, parent: p });
                }
                children[p].push(v);
            }
        }
        let tree = RootedTree { root: roots[0], parent: parents.to_vec(), children };
        let reached = tree.bfs_order().len();
        if reached != n {
            let stray = (0..n).find(|&v| !tree.reaches_root(v)).unwrap_or(0);
            return Err(TreeError::Cycle(stray));
        }
        Ok(tree)
    }

    fn reaches_root(&self, mut v: VertexId) -> bool {
        for _ in 0..=self.len() {
            match self.parent[v] {
                None => return v == self.root,
                Some(p) => v = p,
            }
        }
        false
    }

    pub(crate) fn push_child(&mut self, parent: VertexId) -> VertexId {
        let id = self.parent.len();
        self.parent.push(Some(parent));
        self.children.push(Vec::new());
        self.children[parent].push(id);
        id
    }

    /// Moves the subtree at `v` under `new_parent`, appending it to the child list.
    pub(crate) fn reparent(&mut self, v: VertexId, new_parent: VertexId) {
        if let Some(old) = self.parent[v] {
            self.children[old].retain(|&c| c != v);
        }
        self.parent[v] = Some(new_parent);
        self.children[new_parent].push(v);
    }

    /// Returns a copy with every child list reordered by `order`.
    pub fn with_child_order(&self, order: impl Fn(VertexId, &[VertexId]) -> Vec<VertexId>) -> Self {
        let mut t = self.clone();
        for v in 0..self.len() {
            let new = order(v, &self.children[v]);
            debug_assert_eq!(new.len(), self.children[v].len());
            t.children[v] = new;
        }
        t
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.children[v].is_empty()
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.len()
    }

    /// Edges as `(parent, child)` pairs.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices().filter_map(move |v| self.parent[v].map(|p| (p, v)))
    }

    /// Vertices in breadth-first order, honoring child order.
    pub fn bfs_order(&self) -> Vec<VertexId> {
        let mut order = Vec::with_capacity(self.len());
        let mut queue = VecDeque::from([self.root]);
        let mut seen = vec![false; self.len()];
        seen[self.root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &c in &self.children[v] {
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
        }
        order
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.len()];
        for v in self.bfs_order() {
            for &c in &self.children[v] {
                depth[c] = depth[v] + 1;
            }
        }
        depth
    }

    pub fn height(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Vertices grouped by depth, each level in breadth-first order.
    pub fn levels(&self) -> Vec<Vec<VertexId>> {
        let depth = self.depths();
        let mut levels: Vec<Vec<VertexId>> = Vec::new();
        for v in self.bfs_order() {
            let d = depth[v];
            if levels.len() <= d {
                levels.resize(d + 1, Vec::new());
            }
            levels[d].push(v);
        }
        levels
    }

    fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.parent[v].into_iter().chain(self.children[v].iter().copied())
    }

    fn eccentricity_from(&self, start: VertexId) -> (Vec<usize>, VertexId) {
        let mut dist = vec![usize::MAX; self.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        let mut far = start;
        while let Some(v) = queue.pop_front() {
            if dist[v] > dist[far] {
                far = v;
            }
            for w in self.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        (dist, far)
    }

    pub fn diameter(&self) -> usize {
        let (_, a) = self.eccentricity_from(self.root);
        let (dist, b) = self.eccentricity_from(a);
        dist[b]
    }

    /// The center vertices (one when the diameter is even, two when odd).
    pub fn centers(&self) -> Vec<VertexId> {
        let (_, a) = self.eccentricity_from(self.root);
        let (dist_a, b) = self.eccentricity_from(a);
        let (dist_b, _) = self.eccentricity_from(b);
        let diam = dist_a[b];
        let mut centers: Vec<_> = self
            .vertices()
            .filter(|&v| dist_a[v] + dist_b[v] == diam && (dist_a[v] == diam / 2 || dist_a[v] == diam.div_ceil(2)))
            .collect();
        centers.sort_unstable();
        centers
    }

    /// The same tree rooted at `new_root`. Vertex ids are preserved.
    pub fn rerooted(&self, new_root: VertexId) -> Self {
        let mut parent = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        seen[new_root] = true;
        let mut queue = VecDeque::from([new_root]);
        let mut children = vec![Vec::new(); self.len()];
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    children[v].push(w);
                    queue.push_back(w);
                }
            }
        }
        RootedTree { root: new_root, parent, children }
    }
}

/// Builds the tree an expression denotes. Ids are assigned in preorder.
pub fn expr_to_tree(expr: &TreeExpr) -> RootedTree {
    fn build(t: &mut RootedTree, at: VertexId, e: &TreeExpr) {
        match e {
            TreeExpr::LeafCount(n) => {
                for _ in 0..*n {
                    t.push_child(at);
                }
            }
            TreeExpr::Node(children) => {
                for c in children {
                    let id = t.push_child(at);
                    build(t, id, c);
                }
            }
        }
    }
    let mut t = RootedTree::single_vertex();
    build(&mut t, 0, expr);
    t
}

/// Inverse of [`expr_to_tree`] up to child order: depth-≤1 subtrees become leaf counts.
pub fn tree_to_expr(tree: &RootedTree) -> TreeExpr {
    fn go(t: &RootedTree, v: VertexId) -> TreeExpr {
        let ch = t.children(v);
        if ch.iter().all(|&c| t.is_leaf(c)) {
            TreeExpr::LeafCount(ch.len() as u32)
        } else {
            TreeExpr::Node(ch.iter().map(|&c| go(t, c)).collect())
        }
    }
    go(tree, tree.root())
}

/// Vertex-to-label assignment. Entries may be missing.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Labeling {
    labels: Vec<Option<u32>>,
}

impl Labeling {
    pub fn from_labels(labels: Vec<u32>) -> Self {
        Labeling { labels: labels.into_iter().map(Some).collect() }
    }

    pub fn from_partial(labels: Vec<Option<u32>>) -> Self {
        Labeling { labels }
    }

    pub fn get(&self, v: VertexId) -> Option<u32> {
        self.labels.get(v).copied().flatten()
    }

    pub fn set(&mut self, v: VertexId, label: u32) {
        if self.labels.len() <= v {
            self.labels.resize(v + 1, None);
        }
        self.labels[v] = Some(label);
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `label → vertex` for a complete injective labeling.
    pub fn inverse(&self) -> BTreeMap<u32, VertexId> {
        self.labels.iter().enumerate().filter_map(|(v, l)| l.map(|l| (l, v))).collect()
    }

    pub fn as_slice(&self) -> &[Option<u32>] {
        &self.labels
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    MissingLabel { vertex: VertexId },
    LabelOutOfRange { vertex: VertexId, label: u32 },
    DuplicateVertexLabel { vertices: (VertexId, VertexId), label: u32 },
    DuplicateEdgeLabel { edges: ((VertexId, VertexId), (VertexId, VertexId)), label: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingLabel { vertex } => write!(f, "vertex {vertex} has no label"),
            Violation::LabelOutOfRange { vertex, label } => write!(f, "vertex {vertex} has out-of-range label {label}"),
            Violation::DuplicateVertexLabel { vertices: (a, b), label } => {
                write!(f, "vertices {a} and {b} share label {label}")
            }
            Violation::DuplicateEdgeLabel { edges: ((a, b), (c, d)), label } => {
                write!(f, "edges {a}-{b} and {c}-{d} share induced label {label}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub graceful: bool,
    pub violations: Vec<Violation>,
}

pub fn verify_graceful(tree: &RootedTree, labeling: &Labeling) -> VerifyReport {
    let n = tree.len();
    let mut violations = Vec::new();
    let mut owner: HashMap<u32, VertexId> = HashMap::new();
    for v in tree.vertices() {
        match labeling.get(v) {
            None => violations.push(Violation::MissingLabel { vertex: v }),
            Some(l) => {
                if l as usize >= n {
                    violations.push(Violation::LabelOutOfRange { vertex: v, label: l });
                }
                if let Some(&u) = owner.get(&l) {
                    violations.push(Violation::DuplicateVertexLabel { vertices: (u, v), label: l });
                } else {
                    owner.insert(l, v);
                }
            }
        }
    }
    let mut edge_owner: HashMap<u32, (VertexId, VertexId)> = HashMap::new();
    for (p, c) in tree.edges() {
        if let (Some(a), Some(b)) = (labeling.get(p), labeling.get(c)) {
            let d = a.abs_diff(b);
            if let Some(&e) = edge_owner.get(&d) {
                violations.push(Violation::DuplicateEdgeLabel { edges: (e, (p, c)), label: d });
            } else {
                edge_owner.insert(d, (p, c));
            }
        }
    }
    VerifyReport { graceful: violations.is_empty(), violations }
}

/// AHU code of every subtree, indexed by vertex.
pub fn subtree_codes(tree: &RootedTree) -> Vec<String> {
    let mut codes = vec![String::new(); tree.len()];
    for &v in tree.bfs_order().iter().rev() {
        let mut kids: Vec<&str> = tree.children(v).iter().map(|&c| codes[c].as_str()).collect();
        kids.sort_unstable();
        let mut s = String::with_capacity(2 + kids.iter().map(|k| k.len()).sum::<usize>());
        s.push('(');
        for k in kids {
            s.push_str(k);
        }
        s.push(')');
        codes[v] = s;
    }
    codes
}

/// Equal iff the trees are isomorphic as rooted unordered trees.
pub fn canonical_code(tree: &RootedTree) -> String {
    subtree_codes(tree).swap_remove(tree.root())
}

/// A rooted isomorphism `a → b`, if one exists, as a vertex map indexed by `a`'s ids.
pub fn rooted_isomorphism(a: &RootedTree, b: &RootedTree) -> Option<Vec<VertexId>> {
    if a.len() != b.len() {
        return None;
    }
    let ca = subtree_codes(a);
    let cb = subtree_codes(b);
    if ca[a.root()] != cb[b.root()] {
        return None;
    }
    let mut map = vec![usize::MAX; a.len()];
    let mut stack = vec![(a.root(), b.root())];
    while let Some((u, w)) = stack.pop() {
        map[u] = w;
        let mut pool: HashMap<&str, Vec<VertexId>> = HashMap::new();
        for &c in b.children(w) {
            pool.entry(cb[c].as_str()).or_default().push(c);
        }
        for &c in a.children(u) {
            let m = pool.get_mut(ca[c].as_str()).and_then(Vec::pop)?;
            stack.push((c, m));
        }
    }
    Some(map)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonVertex {
    pub id: VertexId,
    pub label: u32,
    pub parent: Option<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonTree {
    pub vertices: Vec<JsonVertex>,
}

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("vertex ids must be exactly 0..{0} without repeats")]
    Ids(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// JSON export `{"vertices":[{"id":k,"label":l,"parent":p|null}]}`, ordered by id.
pub fn to_json(tree: &RootedTree, labeling: &Labeling) -> String {
    let doc = JsonTree {
        vertices: tree
            .vertices()
            .map(|v| JsonVertex { id: v, label: labeling.get(v).unwrap_or(u32::MAX), parent: tree.parent(v) })
            .collect(),
    };
    serde_json::to_string(&doc).expect("serializable")
}

pub fn from_json(text: &str) -> Result<(RootedTree, Labeling), ImportError> {
    let doc: JsonTree = serde_json::from_str(text)?;
    let n = doc.vertices.len();
    let mut parents = vec![None; n];
    let mut labels = vec![None; n];
    let mut seen = vec![false; n];
    for jv in &doc.vertices {
        if jv.id >= n || seen[jv.id] {
            return Err(ImportError::Ids(n));
        }
        seen[jv.id] = true;
        parents[jv.id] = jv.parent;
        labels[jv.id] = Some(jv.label);
    }
    let tree = RootedTree::from_parents(&parents)?;
    Ok((tree, Labeling::from_partial(labels)))
}

/// Graphviz export: vertex labels name the nodes, induced edge labels annotate edges.
pub fn to_dot(tree: &RootedTree, labeling: &Labeling) -> String {
    let name = |v: VertexId| labeling.get(v).map_or_else(|| format!("v{v}"), |l| l.to_string());
    let mut out = String::from("graph tree {\n");
    for v in tree.bfs_order() {
        out.push_str(&format!("  \"{}\";\n", name(v)));
    }
    for v in tree.bfs_order() {
        for &c in tree.children(v) {
            let label = match (labeling.get(v), labeling.get(c)) {
                (Some(a), Some(b)) => a.abs_diff(b).to_string(),
                _ => "?".to_string(),
            };
            out.push_str(&format!("  \"{}\" -- \"{}\" [label=\"{}\"];\n", name(v), name(c), label));
        }
    }
    out.push_str("}\n");
    out
}
