//! Finite multigraphs with loops, square-lattice builders, planar duals,
//! and connected-component counting.
//!
//! Edges are identified by index into a fixed edge list, never by endpoint
//! pair: duals of trees are single-vertex all-loop graphs and the dual of
//! the 2x2 lattice has four parallel edges, so endpoint pairs are ambiguous.

use crate::error::{Error, Result};
use crate::model::RcState;

/// Finite multigraph. Loops (`u == v`) and parallel edges are permitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    /// Incident edge indices per vertex; a loop index appears twice, so
    /// `adjacency[v].len()` is the degree of `v`.
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(u, v) in &edges {
            if u >= n_vertices || v >= n_vertices {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) out of range for {n_vertices} vertices"
                )));
            }
        }
        let mut adjacency = vec![Vec::new(); n_vertices];
        for (i, &(u, v)) in edges.iter().enumerate() {
            adjacency[u].push(i);
            adjacency[v].push(i);
        }
        Ok(Self {
            n_vertices,
            edges,
            adjacency,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Incident edge indices of `v`; a loop at `v` appears twice.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Degree of `v`; a loop contributes 2.
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Maximum degree, optionally skipping one vertex.
    pub fn max_degree(&self, exclude: Option<usize>) -> usize {
        (0..self.n_vertices)
            .filter(|&v| Some(v) != exclude)
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    /// Square lattice of side `side`: vertices on an `side x side` grid,
    /// edges between grid neighbors.
    ///
    /// Indexing: vertex `(r, c)` is `r*side + c` (row-major). Horizontal
    /// edge `h(r, c) = {(r,c),(r,c+1)}` has index `r*(side-1) + c`;
    /// vertical edge `v(r, c) = {(r,c),(r+1,c)}` has index
    /// `side*(side-1) + r*side + c`. Total edge count `2*side*(side-1)`.
    pub fn square_lattice(side: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::InvalidInput("lattice side must be >= 1".into()));
        }
        let mut edges = Vec::with_capacity(2 * side * (side - 1));
        for r in 0..side {
            for c in 0..side - 1 {
                edges.push((r * side + c, r * side + c + 1));
            }
        }
        for r in 0..side - 1 {
            for c in 0..side {
                edges.push((r * side + c, (r + 1) * side + c));
            }
        }
        Self::new(side * side, edges)
    }

    /// Path on `n` vertices (`n-1` edges). `path(2)` is a single edge.
    pub fn path(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("path needs >= 1 vertex".into()));
        }
        Self::new(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect())
    }

    /// Cycle on `n >= 3` vertices.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput("cycle needs >= 3 vertices".into()));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
    }

    /// Star with `leaves` leaves; vertex 0 is the center.
    pub fn star(leaves: usize) -> Result<Self> {
        Self::new(leaves + 1, (1..=leaves).map(|i| (0, i)).collect())
    }

    /// Spanning subgraph: same vertex set, only the edges in `keep`.
    pub fn spanning_subgraph(&self, keep: &RcState) -> Result<Self> {
        if keep.n_edges() != self.n_edges() {
            return Err(Error::InvalidInput(format!(
                "edge-set width {} does not match graph with {} edges",
                keep.n_edges(),
                self.n_edges()
            )));
        }
        let edges = keep.iter().map(|e| self.edges[e]).collect();
        Self::new(self.n_vertices, edges)
    }

    /// Serialize in the edge-list text format:
    /// first line `n_vertices m_edges`, then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n_vertices, self.edges.len());
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Parse the edge-list text format.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut next_usize = |what: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| Error::InvalidInput(format!("edge list truncated at {what}")))?
                .parse::<usize>()
                .map_err(|e| Error::InvalidInput(format!("bad {what}: {e}")))
        };
        let n = next_usize("vertex count")?;
        let m = next_usize("edge count")?;
        let mut edges = Vec::with_capacity(m);
        for i in 0..m {
            let u = next_usize(&format!("edge {i} endpoint"))?;
            let v = next_usize(&format!("edge {i} endpoint"))?;
            edges.push((u, v));
        }
        Self::new(n, edges)
    }
}

/// A planar graph together with its dual and the edge bijection
/// `e <-> e_D` (each dual edge crosses exactly one primal edge).
#[derive(Debug, Clone)]
pub struct DualMap {
    primal: Graph,
    dual: Graph,
    /// `edge_bijection[e]` is the index of the dual edge crossing primal
    /// edge `e`.
    edge_bijection: Vec<usize>,
    /// Inverse permutation: primal edge crossed by dual edge `e_D`.
    inverse: Vec<usize>,
}

impl DualMap {
    pub fn new(primal: Graph, dual: Graph, edge_bijection: Vec<usize>) -> Result<Self> {
        let m = primal.n_edges();
        if dual.n_edges() != m {
            return Err(Error::InvalidInput(format!(
                "dual has {} edges, primal has {m}",
                dual.n_edges()
            )));
        }
        if edge_bijection.len() != m {
            return Err(Error::InvalidInput(
                "edge bijection length does not match edge count".into(),
            ));
        }
        let mut inverse = vec![usize::MAX; m];
        for (e, &ed) in edge_bijection.iter().enumerate() {
            if ed >= m || inverse[ed] != usize::MAX {
                return Err(Error::InvalidInput(
                    "edge bijection is not a permutation".into(),
                ));
            }
            inverse[ed] = e;
        }
        Ok(Self {
            primal,
            dual,
            edge_bijection,
            inverse,
        })
    }

    pub fn primal(&self) -> &Graph {
        &self.primal
    }

    pub fn dual(&self) -> &Graph {
        &self.dual
    }

    /// Dual edge crossing primal edge `e`.
    pub fn dual_edge(&self, e: usize) -> usize {
        self.edge_bijection[e]
    }

    /// Primal edge crossed by dual edge `e_d`.
    pub fn primal_edge(&self, e_d: usize) -> usize {
        self.inverse[e_d]
    }

    pub fn edge_bijection(&self) -> &[usize] {
        &self.edge_bijection
    }

    /// Serialize as three sections: the primal edge list, the dual edge
    /// list (both in the [`Graph::to_edge_list`] format), then one
    /// `e e_D` bijection line per edge.
    pub fn to_text(&self) -> String {
        let mut out = self.primal.to_edge_list();
        out.push_str(&self.dual.to_edge_list());
        for (e, &ed) in self.edge_bijection.iter().enumerate() {
            out.push_str(&format!("{e} {ed}\n"));
        }
        out
    }

    /// Parse the [`DualMap::to_text`] format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut next_usize = |what: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| Error::InvalidInput(format!("dual map truncated at {what}")))?
                .parse::<usize>()
                .map_err(|e| Error::InvalidInput(format!("bad {what}: {e}")))
        };
        let read_graph = |which: &str,
                              next: &mut dyn FnMut(&str) -> Result<usize>|
         -> Result<Graph> {
            let n = next(&format!("{which} vertex count"))?;
            let m = next(&format!("{which} edge count"))?;
            let mut edges = Vec::with_capacity(m);
            for i in 0..m {
                let u = next(&format!("{which} edge {i}"))?;
                let v = next(&format!("{which} edge {i}"))?;
                edges.push((u, v));
            }
            Graph::new(n, edges)
        };
        let primal = read_graph("primal", &mut next_usize)?;
        let dual = read_graph("dual", &mut next_usize)?;
        let mut bijection = vec![usize::MAX; primal.n_edges()];
        for i in 0..primal.n_edges() {
            let e = next_usize(&format!("bijection line {i}"))?;
            let ed = next_usize(&format!("bijection line {i}"))?;
            if e >= bijection.len() {
                return Err(Error::InvalidInput(format!("bijection edge {e} out of range")));
            }
            bijection[e] = ed;
        }
        DualMap::new(primal, dual, bijection)
    }
}

/// Planar dual of the square lattice of side `side >= 2` in its grid
/// embedding.
///
/// The dual is the lattice of side `side-1` (one vertex per inner face,
/// same row-major indexing as [`Graph::square_lattice`]) plus one extra
/// vertex `v* = (side-1)^2` for the outer face, joined to the boundary by
/// one edge per primal boundary edge, so `deg(v*) = 4*(side-1)`.
///
/// Dual edge order: the `side-1` lattice edges first (its canonical
/// order), then one edge per primal boundary edge in primal edge order.
/// Bijection formulas, with `M = side-1` and inner face `F(i,j) = i*M+j`:
/// an interior horizontal primal edge `h(r,c)` (`0 < r < side-1`) crosses
/// the dual vertical edge `{F(r-1,c), F(r,c)}` at index `M*(M-1)+(r-1)*M+c`;
/// an interior vertical primal edge `v(r,c)` (`0 < c < side-1`) crosses
/// the dual horizontal edge `{F(r,c-1), F(r,c)}` at index `r*(M-1)+(c-1)`;
/// boundary primal edges cross edges to `v*` appended in primal order.
pub fn build_dual_square_lattice(side: usize) -> Result<DualMap> {
    if side < 2 {
        return Err(Error::InvalidInput(
            "dual square lattice needs side >= 2".into(),
        ));
    }
    let primal = Graph::square_lattice(side)?;
    let m_inner = side - 1;
    let inner = Graph::square_lattice(m_inner)?;
    let v_star = m_inner * m_inner;
    let n_inner_edges = inner.n_edges();

    let mut dual_edges: Vec<(usize, usize)> = inner.edges().to_vec();
    let mut bijection = vec![usize::MAX; primal.n_edges()];
    let face = |i: usize, j: usize| i * m_inner + j;

    // Horizontal primal edges h(r, c), index r*(side-1) + c.
    for r in 0..side {
        for c in 0..side - 1 {
            let e = r * (side - 1) + c;
            if r > 0 && r < side - 1 {
                // Crosses the dual vertical edge between faces F(r-1,c), F(r,c).
                bijection[e] = m_inner * (m_inner - 1) + (r - 1) * m_inner + c;
            } else {
                let inner_face = if r == 0 { face(0, c) } else { face(m_inner - 1, c) };
                bijection[e] = dual_edges.len();
                dual_edges.push((inner_face, v_star));
            }
        }
    }
    // Vertical primal edges v(r, c), index side*(side-1) + r*side + c.
    for r in 0..side - 1 {
        for c in 0..side {
            let e = side * (side - 1) + r * side + c;
            if c > 0 && c < side - 1 {
                // Crosses the dual horizontal edge between faces F(r,c-1), F(r,c).
                bijection[e] = r * (m_inner - 1) + (c - 1);
            } else {
                let inner_face = if c == 0 { face(r, 0) } else { face(r, m_inner - 1) };
                bijection[e] = dual_edges.len();
                dual_edges.push((inner_face, v_star));
            }
        }
    }
    debug_assert_eq!(dual_edges.len(), primal.n_edges());
    debug_assert_eq!(dual_edges.len() - n_inner_edges, 4 * (side - 1));

    let dual = Graph::new(v_star + 1, dual_edges)?;
    DualMap::new(primal, dual, bijection)
}

/// Planar dual of a tree: a single vertex (the unique face) carrying one
/// loop per tree edge, with the identity edge bijection.
pub fn build_tree_dual(tree: &Graph) -> Result<DualMap> {
    if tree.n_vertices() == 0 {
        return Err(Error::InvalidInput("tree must have >= 1 vertex".into()));
    }
    if tree.n_edges() + 1 != tree.n_vertices() {
        return Err(Error::InvalidInput(format!(
            "not a tree: {} vertices, {} edges",
            tree.n_vertices(),
            tree.n_edges()
        )));
    }
    // |E| = |V| - 1 plus acyclicity <=> connected; detect cycles with
    // union-find (a loop or parallel edge unions an already-joined pair).
    let mut uf = UnionFind::new(tree.n_vertices());
    for &(u, v) in tree.edges() {
        if !uf.union(u, v) {
            return Err(Error::InvalidInput("not a tree: cycle detected".into()));
        }
    }
    let m = tree.n_edges();
    let dual = Graph::new(1, vec![(0, 0); m])?;
    DualMap::new(tree.clone(), dual, (0..m).collect())
}

/// Dual map for a graph from one of the two supported embeddings: square
/// lattices (recognized by rebuilding one of the matching side) get the
/// grid dual, trees the one-face dual. Other planar graphs would need an
/// explicit embedding and are not supported.
pub fn dual_map_for(g: &Graph) -> Result<DualMap> {
    let n = g.n_vertices();
    let side = (n as f64).sqrt().round() as usize;
    if side >= 2 && side * side == n {
        let lattice = Graph::square_lattice(side)?;
        if lattice == *g {
            return build_dual_square_lattice(side);
        }
    }
    build_tree_dual(g).map_err(|_| {
        Error::InvalidInput(
            "dual construction supports square lattices and trees only".into(),
        )
    })
}

/// Dual configuration of a primal edge subset: `e_D` is occupied iff `e`
/// is not.
pub fn dual_rc_state(a: &RcState, map: &DualMap) -> RcState {
    let mut out = RcState::empty(map.dual().n_edges());
    for e in 0..map.primal().n_edges() {
        if !a.contains(e) {
            out.insert(map.dual_edge(e));
        }
    }
    out
}

/// Inverse of [`dual_rc_state`]: the primal subset whose dual
/// configuration is `a_dual`.
pub fn primal_rc_state(a_dual: &RcState, map: &DualMap) -> RcState {
    let mut out = RcState::empty(map.primal().n_edges());
    for e_d in 0..map.dual().n_edges() {
        if !a_dual.contains(e_d) {
            out.insert(map.primal_edge(e_d));
        }
    }
    out
}

/// Connected-component labeling of `(V, A)`. Isolated vertices count as
/// components. Labels are assigned in order of each component's smallest
/// vertex id, so the labeling is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    count: usize,
    label: Vec<usize>,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn label(&self, v: usize) -> usize {
        self.label[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.label
    }
}

/// Union-find with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `x` and `y` were already in the same set.
    pub fn union(&mut self, x: usize, y: usize) -> bool {
        let mut rx = self.find(x);
        let mut ry = self.find(y);
        if rx == ry {
            return false;
        }
        if self.size[rx] < self.size[ry] {
            std::mem::swap(&mut rx, &mut ry);
        }
        self.parent[ry] = rx;
        self.size[rx] += self.size[ry];
        true
    }
}

/// Components of the spanning subgraph `(V, A)`.
pub fn connected_components(g: &Graph, a: &RcState) -> ComponentLabeling {
    debug_assert_eq!(a.n_edges(), g.n_edges());
    let n = g.n_vertices();
    let mut uf = UnionFind::new(n);
    for e in a.iter() {
        let (u, v) = g.endpoints(e);
        uf.union(u, v);
    }
    let mut label = vec![usize::MAX; n];
    let mut root_label = vec![usize::MAX; n];
    let mut count = 0;
    for v in 0..n {
        let r = uf.find(v);
        if root_label[r] == usize::MAX {
            root_label[r] = count;
            count += 1;
        }
        label[v] = root_label[r];
    }
    ComponentLabeling { count, label }
}
