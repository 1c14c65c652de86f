//! Graph machinery: DAGs stored as parent sets, Markov-equivalence
//! fingerprints (skeleton plus v-structures), decomposable undirected graphs
//! with junction-tree cliques and separators, and the directed version of a
//! decomposable graph.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::subset::VertexSet;

/// Directed acyclic graph on `q` vertices, stored as one parent set per
/// vertex. Construction validates acyclicity and keeps a topological order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    q: usize,
    parents: Vec<VertexSet>,
    topo: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl Dag {
    /// Validates parent sets into a DAG, or reports one explicit cycle.
    pub fn validate(parents: Vec<VertexSet>) -> Result<Self> {
        let q = parents.len();
        if q == 0 {
            return Err(Error::Dimension("a DAG needs at least one vertex".into()));
        }
        for (j, pa) in parents.iter().enumerate() {
            if pa.universe() != q {
                return Err(Error::Dimension(format!(
                    "parent set of vertex {} lives in universe {}, expected {}",
                    j + 1,
                    pa.universe(),
                    q
                )));
            }
            if pa.contains(j) {
                return Err(Error::Cyclic { cycle: vec![j, j] });
            }
        }
        let topo = toposort(&parents)?;
        Ok(Dag {
            q,
            parents,
            topo,
            labels: None,
        })
    }

    pub fn empty(q: usize) -> Self {
        Dag {
            q,
            parents: vec![VertexSet::empty(q); q],
            topo: (0..q).collect(),
            labels: None,
        }
    }

    /// Attaches vertex names (one per vertex).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.q {
            return Err(Error::Dimension(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.q
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn parents(&self, j: usize) -> &VertexSet {
        &self.parents[j]
    }

    pub fn parent_sets(&self) -> &[VertexSet] {
        &self.parents
    }

    /// The family `fa(j) = pa(j) ∪ {j}`.
    pub fn family(&self, j: usize) -> VertexSet {
        self.parents[j].with(j)
    }

    /// A topological order (parents before children).
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(|p| p.len()).sum()
    }

    /// Directed edges as `(parent, child)` pairs, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for j in 0..self.q {
            for u in self.parents[j].iter() {
                out.push((u, j));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.parents[to].contains(from)
    }

    /// Whether `to` is reachable from `from` along directed edges. Costs
    /// O(edges) per call; used for incremental acyclicity checks in search.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        // walk child edges via a reversed index built on the fly
        let mut children = vec![Vec::new(); self.q];
        for j in 0..self.q {
            for u in self.parents[j].iter() {
                children[u].push(j);
            }
        }
        let mut seen = vec![false; self.q];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            for &c in &children[v] {
                if c == to {
                    return true;
                }
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        false
    }
}

fn toposort(parents: &[VertexSet]) -> Result<Vec<usize>> {
    let q = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(|p| p.len()).collect();
    let mut children = vec![Vec::new(); q];
    for j in 0..q {
        for u in parents[j].iter() {
            children[u].push(j);
        }
    }
    let mut ready: BTreeSet<usize> = (0..q).filter(|&j| indegree[j] == 0).collect();
    let mut order = Vec::with_capacity(q);
    while let Some(&v) = ready.iter().next() {
        ready.remove(&v);
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == q {
        return Ok(order);
    }
    // walk parent links among the stuck vertices until one repeats
    let processed: Vec<bool> = {
        let mut seen = vec![false; q];
        for &v in &order {
            seen[v] = true;
        }
        seen
    };
    let start = (0..q)
        .find(|&j| !processed[j])
        .expect("some vertex is stuck");
    let mut walk = vec![start];
    let mut pos = vec![usize::MAX; q];
    pos[start] = 0;
    let mut current = start;
    loop {
        let next = parents[current]
            .iter()
            .find(|&u| !processed[u])
            .expect("stuck vertices keep an unprocessed parent");
        if pos[next] != usize::MAX {
            let mut cycle: Vec<usize> = walk[pos[next]..].to_vec();
            cycle.reverse(); // parent links run against edge direction
            cycle.insert(0, next);
            return Err(Error::Cyclic { cycle });
        }
        pos[next] = walk.len();
        walk.push(next);
        current = next;
    }
}

/// Skeleton and v-structures; two DAGs are Markov equivalent exactly when
/// their fingerprints coincide.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EquivalenceFingerprint {
    /// Undirected edges as `(min, max)` pairs.
    pub skeleton: BTreeSet<(usize, usize)>,
    /// Colliders `x -> k <- y` with `x < y` and `x, y` non-adjacent.
    pub v_structures: BTreeSet<(usize, usize, usize)>,
}

/// Computes the Markov-equivalence fingerprint of a DAG.
pub fn fingerprint(dag: &Dag) -> EquivalenceFingerprint {
    let mut skeleton = BTreeSet::new();
    for (u, v) in dag.edges() {
        skeleton.insert((u.min(v), u.max(v)));
    }
    let adjacent = |a: usize, b: usize| skeleton.contains(&(a.min(b), a.max(b)));
    let mut v_structures = BTreeSet::new();
    for k in 0..dag.q() {
        let pa: Vec<usize> = dag.parents(k).to_vec();
        for (i, &x) in pa.iter().enumerate() {
            for &y in &pa[i + 1..] {
                if !adjacent(x, y) {
                    v_structures.insert((x, k, y));
                }
            }
        }
    }
    EquivalenceFingerprint {
        skeleton,
        v_structures,
    }
}

/// Chordal undirected graph with junction-tree cliques and separators.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposableGraph {
    q: usize,
    neighbors: Vec<VertexSet>,
    cliques: Vec<VertexSet>,
    /// Separator multiset from a maximum-weight junction forest.
    separators: Vec<VertexSet>,
    /// Perfect elimination ordering; every vertex's later neighbors form a
    /// clique. The reversed order is the maximum-cardinality search order.
    peo: Vec<usize>,
}

impl DecomposableGraph {
    /// Builds from an undirected edge list, checking chordality by maximum
    /// cardinality search. A non-chordal input is reported with one explicit
    /// chordless cycle.
    pub fn from_edges(q: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if q == 0 {
            return Err(Error::Dimension("a graph needs at least one vertex".into()));
        }
        let mut neighbors = vec![VertexSet::empty(q); q];
        for &(u, v) in edges {
            if u >= q || v >= q {
                return Err(Error::Invalid(format!(
                    "edge ({}, {}) out of range for {} vertices",
                    u + 1,
                    v + 1,
                    q
                )));
            }
            if u == v {
                return Err(Error::Invalid(format!("self-loop at vertex {}", u + 1)));
            }
            neighbors[u].insert(v);
            neighbors[v].insert(u);
        }
        Self::from_neighbors(neighbors)
    }

    /// Builds from a symmetric boolean adjacency matrix with zero diagonal.
    pub fn from_adjacency(adjacency: &[Vec<bool>]) -> Result<Self> {
        let q = adjacency.len();
        if q == 0 {
            return Err(Error::Dimension("a graph needs at least one vertex".into()));
        }
        let mut edges = Vec::new();
        for i in 0..q {
            if adjacency[i].len() != q {
                return Err(Error::Dimension("adjacency matrix must be square".into()));
            }
            if adjacency[i][i] {
                return Err(Error::Invalid(format!("self-loop at vertex {}", i + 1)));
            }
            for j in (i + 1)..q {
                if adjacency[i][j] != adjacency[j][i] {
                    return Err(Error::Invalid(format!(
                        "adjacency not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                if adjacency[i][j] {
                    edges.push((i, j));
                }
            }
        }
        Self::from_edges(q, &edges)
    }

    fn from_neighbors(neighbors: Vec<VertexSet>) -> Result<Self> {
        let q = neighbors.len();
        let mcs_order = mcs(&neighbors);
        // visit-time predecessors; chordality demands each forms a clique
        let mut visit_pos = vec![usize::MAX; q];
        for (k, &v) in mcs_order.iter().enumerate() {
            visit_pos[v] = k;
        }
        let mut candidates: Vec<VertexSet> = Vec::with_capacity(q);
        for (k, &v) in mcs_order.iter().enumerate() {
            let earlier: Vec<usize> = neighbors[v].iter().filter(|&u| visit_pos[u] < k).collect();
            for (a_i, &a) in earlier.iter().enumerate() {
                for &b in &earlier[a_i + 1..] {
                    if !neighbors[a].contains(b) {
                        let cycle = find_chordless_cycle(&neighbors)
                            .expect("a failed elimination check implies a chordless cycle");
                        return Err(Error::NotChordal { cycle });
                    }
                }
            }
            let mut m = VertexSet::empty(q);
            for &u in &earlier {
                m.insert(u);
            }
            m.insert(v);
            candidates.push(m);
        }
        // maximal cliques: candidates not contained in another candidate
        let mut cliques: Vec<VertexSet> = Vec::new();
        'cand: for (i, m) in candidates.iter().enumerate() {
            for (j, other) in candidates.iter().enumerate() {
                if i != j && m.is_subset_of(other) && (m != other || j < i) {
                    continue 'cand;
                }
            }
            cliques.push(m.clone());
        }
        cliques.sort_by_key(|c| c.to_vec());

        let separators = junction_forest_separators(q, &cliques);
        let peo: Vec<usize> = mcs_order.iter().rev().copied().collect();
        Ok(DecomposableGraph {
            q,
            neighbors,
            cliques,
            separators,
            peo,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.neighbors[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].contains(v)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.q {
            for v in self.neighbors[u].iter() {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn cliques(&self) -> &[VertexSet] {
        &self.cliques
    }

    /// Separators with multiplicity.
    pub fn separators(&self) -> &[VertexSet] {
        &self.separators
    }

    pub fn peo(&self) -> &[usize] {
        &self.peo
    }

    pub fn component_count(&self) -> usize {
        let mut dsu = Dsu::new(self.q);
        for (u, v) in self.edges() {
            dsu.union(u, v);
        }
        (0..self.q).filter(|&v| dsu.find(v) == v).count()
    }
}

/// Orients every edge of a decomposable graph from earlier to later in the
/// reversed perfect elimination ordering. The result is a DAG with the same
/// skeleton and no v-structures, hence Markov equivalent to the input.
pub fn directed_version(g: &DecomposableGraph) -> Dag {
    let q = g.q();
    let mut number = vec![0usize; q];
    for (k, &v) in g.peo().iter().rev().enumerate() {
        number[v] = k;
    }
    let mut parents = vec![VertexSet::empty(q); q];
    for (u, v) in g.edges() {
        if number[u] < number[v] {
            parents[v].insert(u);
        } else {
            parents[u].insert(v);
        }
    }
    Dag::validate(parents).expect("orientation along a linear order is acyclic")
}

/// Maximum cardinality search; ties break toward the lowest vertex index so
/// cliques and separators are deterministic across runs.
fn mcs(neighbors: &[VertexSet]) -> Vec<usize> {
    let q = neighbors.len();
    let mut weight = vec![0usize; q];
    let mut visited = vec![false; q];
    let mut order = Vec::with_capacity(q);
    for _ in 0..q {
        let mut best = usize::MAX;
        let mut best_w = 0;
        for v in 0..q {
            if !visited[v] && (best == usize::MAX || weight[v] > best_w) {
                best = v;
                best_w = weight[v];
            }
        }
        visited[best] = true;
        order.push(best);
        for u in neighbors[best].iter() {
            if !visited[u] {
                weight[u] += 1;
            }
        }
    }
    order
}

/// Finds one chordless cycle of length ≥ 4, if any. For every triple
/// `x - v - y` with `x, y` non-adjacent, a shortest `x`-`y` path avoiding `v`
/// and its other neighbors closes into a chordless cycle through `v`; some
/// triple succeeds whenever the graph is non-chordal.
fn find_chordless_cycle(neighbors: &[VertexSet]) -> Option<Vec<usize>> {
    let q = neighbors.len();
    for v in 0..q {
        let nb: Vec<usize> = neighbors[v].to_vec();
        for (i, &x) in nb.iter().enumerate() {
            for &y in &nb[i + 1..] {
                if neighbors[x].contains(y) {
                    continue;
                }
                let mut blocked = vec![false; q];
                blocked[v] = true;
                for u in neighbors[v].iter() {
                    if u != x && u != y {
                        blocked[u] = true;
                    }
                }
                if let Some(path) = bfs_path(neighbors, x, y, &blocked) {
                    let mut cycle = vec![v];
                    cycle.extend(path);
                    cycle.push(v);
                    return Some(cycle);
                }
            }
        }
    }
    None
}

fn bfs_path(
    neighbors: &[VertexSet],
    from: usize,
    to: usize,
    blocked: &[bool],
) -> Option<Vec<usize>> {
    let q = neighbors.len();
    let mut prev = vec![usize::MAX; q];
    let mut seen = vec![false; q];
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    seen[from] = true;
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![to];
            let mut cur = to;
            while prev[cur] != usize::MAX {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for u in neighbors[v].iter() {
            if !seen[u] && !blocked[u] {
                seen[u] = true;
                prev[u] = v;
                queue.push_back(u);
            }
        }
    }
    None
}

/// Builds a maximum-weight spanning forest over the clique intersection
/// graph (Kruskal, deterministic tie order) and collects the separator
/// multiset from its edges.
fn junction_forest_separators(q: usize, cliques: &[VertexSet]) -> Vec<VertexSet> {
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new(); // (weight, i, j)
    for i in 0..cliques.len() {
        for j in (i + 1)..cliques.len() {
            let w = cliques[i]
                .iter()
                .filter(|&v| cliques[j].contains(v))
                .count();
            if w > 0 {
                pairs.push((w, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut dsu = Dsu::new(cliques.len());
    let mut separators = Vec::new();
    for (_, i, j) in pairs {
        if dsu.union(i, j) {
            let mut s = VertexSet::empty(q);
            for v in cliques[i].iter() {
                if cliques[j].contains(v) {
                    s.insert(v);
                }
            }
            separators.push(s);
        }
    }
    separators.sort_by_key(|s| s.to_vec());
    separators
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, v: usize) -> usize {
        if self.parent[v] != v {
            let root = self.find(self.parent[v]);
            self.parent[v] = root;
        }
        self.parent[v]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// All DAGs on `q ≤ 5` labeled vertices, enumerated per vertex pair
/// (absent, forward, backward) and filtered for acyclicity.
pub fn enumerate_dags(q: usize) -> Result<Vec<Dag>> {
    if q == 0 || q > 5 {
        return Err(Error::Config(format!(
            "exhaustive DAG enumeration supports 1..=5 vertices, got {q}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..q)
        .flat_map(|i| ((i + 1)..q).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    let total = 3usize.pow(pairs.len() as u32);
    for code in 0..total {
        let mut parents = vec![VertexSet::empty(q); q];
        let mut c = code;
        for &(i, j) in &pairs {
            match c % 3 {
                1 => parents[j].insert(i),
                2 => parents[i].insert(j),
                _ => {}
            }
            c /= 3;
        }
        if let Ok(dag) = Dag::validate(parents) {
            out.push(dag);
        }
    }
    Ok(out)
}

/// All decomposable graphs on `q ≤ 5` labeled vertices.
pub fn enumerate_decomposable(q: usize) -> Result<Vec<DecomposableGraph>> {
    if q == 0 || q > 5 {
        return Err(Error::Config(format!(
            "exhaustive enumeration supports 1..=5 vertices, got {q}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..q)
        .flat_map(|i| ((i + 1)..q).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for code in 0u64..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| (code >> k) & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if let Ok(g) = DecomposableGraph::from_edges(q, &edges) {
            out.push(g);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Text formats. DAG files carry one line per vertex, `j: p1,p2,...` with
// 1-based indices; undirected files carry one edge per line, `j -- k`.
// Blank lines and `#` comments are ignored.

pub fn parse_dag_text(text: &str) -> Result<Dag> {
    let mut entries: Vec<(usize, Vec<usize>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, tail) = line.split_once(':').ok_or_else(|| {
            Error::Invalid(format!("line {}: expected `vertex: parents`", lineno + 1))
        })?;
        let vertex: usize = head.trim().parse().map_err(|_| {
            Error::Invalid(format!(
                "line {}: bad vertex index {:?}",
                lineno + 1,
                head.trim()
            ))
        })?;
        if vertex == 0 {
            return Err(Error::Invalid(format!(
                "line {}: vertex indices are 1-based",
                lineno + 1
            )));
        }
        let mut parents = Vec::new();
        for tok in tail.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            let p: usize = tok.parse().map_err(|_| {
                Error::Invalid(format!("line {}: bad parent index {tok:?}", lineno + 1))
            })?;
            if p == 0 {
                return Err(Error::Invalid(format!(
                    "line {}: vertex indices are 1-based",
                    lineno + 1
                )));
            }
            parents.push(p - 1);
        }
        entries.push((vertex - 1, parents));
    }
    if entries.is_empty() {
        return Err(Error::Invalid("graph file has no vertex lines".into()));
    }
    let q = entries.len();
    let mut seen = vec![false; q];
    let mut parent_sets = vec![VertexSet::empty(q); q];
    for (v, parents) in entries {
        if v >= q {
            return Err(Error::Invalid(format!(
                "vertex {} out of range: file defines {} vertices",
                v + 1,
                q
            )));
        }
        if seen[v] {
            return Err(Error::Invalid(format!("vertex {} defined twice", v + 1)));
        }
        seen[v] = true;
        parent_sets[v] = VertexSet::from_indices(q, &parents)?;
    }
    Dag::validate(parent_sets)
}

pub fn format_dag_text(dag: &Dag) -> String {
    let mut out = String::new();
    for j in 0..dag.q() {
        let parents: Vec<String> = dag.parents(j).iter().map(|p| (p + 1).to_string()).collect();
        out.push_str(&format!("{}: {}\n", j + 1, parents.join(",")));
    }
    out
}

pub fn parse_edge_list(text: &str, q: usize) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (a, b) = line
            .split_once("--")
            .ok_or_else(|| Error::Invalid(format!("line {}: expected `j -- k`", lineno + 1)))?;
        let parse = |tok: &str| -> Result<usize> {
            let v: usize = tok.trim().parse().map_err(|_| {
                Error::Invalid(format!(
                    "line {}: bad vertex index {:?}",
                    lineno + 1,
                    tok.trim()
                ))
            })?;
            if v == 0 || v > q {
                return Err(Error::Invalid(format!(
                    "line {}: vertex {} out of range 1..={}",
                    lineno + 1,
                    v,
                    q
                )));
            }
            Ok(v - 1)
        };
        edges.push((parse(a)?, parse(b)?));
    }
    Ok(edges)
}

pub fn format_edge_list(g: &DecomposableGraph) -> String {
    let mut out = String::new();
    for (u, v) in g.edges() {
        out.push_str(&format!("{} -- {}\n", u + 1, v + 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn dag(q: usize, parent_lists: &[&[usize]]) -> Dag {
        let parents: Vec<VertexSet> = parent_lists
            .iter()
            .map(|l| VertexSet::from_indices(q, l).unwrap())
            .collect();
        Dag::validate(parents).unwrap()
    }

    #[test]
    fn single_edge_is_valid() {
        let d = dag(2, &[&[], &[0]]);
        assert_eq!(d.topological_order(), &[0, 1]);
        assert_eq!(d.edges(), vec![(0, 1)]);
    }

    #[test]
    fn two_cycle_reports_sequence() {
        let parents = vec![
            VertexSet::from_indices(2, &[1]).unwrap(),
            VertexSet::from_indices(2, &[0]).unwrap(),
        ];
        match Dag::validate(parents) {
            Err(Error::Cyclic { cycle }) => {
                assert_eq!(cycle.first(), cycle.last());
                assert!(cycle.len() >= 3);
            }
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn complete_dag_is_well_numbered() {
        let d = dag(3, &[&[], &[0], &[0, 1]]);
        assert_eq!(d.topological_order(), &[0, 1, 2]);
        assert_eq!(d.family(2), VertexSet::full(3));
        assert_eq!(d.edge_count(), 3);
    }

    #[test]
    fn fingerprint_ignores_covered_reversal() {
        let a = dag(2, &[&[], &[0]]);
        let b = dag(2, &[&[1], &[]]);
        assert_eq!(fingerprint(&a), fingerprint(&b));
    }

    #[test]
    fn fingerprint_sees_collider() {
        let collider = dag(3, &[&[], &[], &[0, 1]]);
        let chain = dag(3, &[&[], &[2], &[0]]);
        assert_eq!(fingerprint(&collider).v_structures.len(), 1);
        assert_ne!(fingerprint(&collider), fingerprint(&chain));
        // same skeleton though
        assert_eq!(
            fingerprint(&collider).skeleton,
            fingerprint(&chain).skeleton
        );
    }

    #[test]
    fn three_vertex_enumeration_has_eleven_classes() {
        let dags = enumerate_dags(3).unwrap();
        assert_eq!(dags.len(), 25);
        let mut classes: HashMap<_, usize> = HashMap::new();
        for d in &dags {
            *classes.entry(fingerprint(d)).or_default() += 1;
        }
        assert_eq!(classes.len(), 11);
    }

    #[test]
    fn four_vertex_dag_count() {
        assert_eq!(enumerate_dags(4).unwrap().len(), 543);
    }

    #[test]
    fn equivalence_class_counts_match_known_values() {
        // classes per vertex count: 1, 2, 11, 185, 8782
        for (q, expected) in [(2usize, 2usize), (4, 185), (5, 8782)] {
            let mut classes = std::collections::HashSet::new();
            for d in enumerate_dags(q).unwrap() {
                classes.insert(fingerprint(&d));
            }
            assert_eq!(classes.len(), expected, "q = {q}");
        }
    }

    #[test]
    fn four_cycle_is_not_chordal() {
        let err = DecomposableGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        match err {
            Err(Error::NotChordal { cycle }) => {
                assert!(cycle.len() >= 5); // four distinct vertices plus the closing repeat
                assert_eq!(cycle.first(), cycle.last());
            }
            other => panic!("expected chordless cycle, got {other:?}"),
        }
    }

    #[test]
    fn chain_cliques_and_separators() {
        let g = DecomposableGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let cliques: Vec<Vec<usize>> = g.cliques().iter().map(|c| c.to_vec()).collect();
        assert_eq!(cliques, vec![vec![0, 1], vec![1, 2]]);
        let seps: Vec<Vec<usize>> = g.separators().iter().map(|s| s.to_vec()).collect();
        assert_eq!(seps, vec![vec![1]]);
    }

    #[test]
    fn complete_graph_single_clique() {
        let g = DecomposableGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
            .unwrap();
        assert_eq!(g.cliques().len(), 1);
        assert_eq!(g.cliques()[0], VertexSet::full(4));
        assert!(g.separators().is_empty());
    }

    #[test]
    fn empty_graph_has_singleton_cliques() {
        let g = DecomposableGraph::from_edges(3, &[]).unwrap();
        assert_eq!(g.cliques().len(), 3);
        assert!(g.separators().is_empty());
        assert_eq!(g.component_count(), 3);
    }

    #[test]
    fn repeated_separator_multiplicity() {
        // vertices 2, 3, 4 each adjacent to both 0 and 1; separator {0,1}
        // appears twice in the junction tree
        let g = DecomposableGraph::from_edges(
            5,
            &[(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (0, 4), (1, 4)],
        )
        .unwrap();
        assert_eq!(g.cliques().len(), 3);
        assert_eq!(g.separators().len(), 2);
        for s in g.separators() {
            assert_eq!(s.to_vec(), vec![0, 1]);
        }
    }

    #[test]
    fn junction_identity_on_connected_graphs() {
        let g =
            DecomposableGraph::from_edges(5, &[(0, 1), (1, 2), (1, 3), (3, 4), (1, 4)]).unwrap();
        let c: usize = g.cliques().iter().map(|c| c.len()).sum();
        let s: usize = g.separators().iter().map(|s| s.len()).sum();
        assert_eq!(c - s, 5);
    }

    #[test]
    fn directed_version_of_chain_has_no_collider() {
        let g = DecomposableGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let d = directed_version(&g);
        let fp = fingerprint(&d);
        assert!(fp.v_structures.is_empty());
        assert_eq!(fp.skeleton.len(), 2);
    }

    #[test]
    fn directed_version_of_complete_graph_is_complete_dag() {
        let g = DecomposableGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let d = directed_version(&g);
        assert_eq!(d.edge_count(), 3);
        assert!(fingerprint(&d).v_structures.is_empty());
    }

    #[test]
    fn decomposability_matches_brute_force_on_small_graphs() {
        // brute force: a graph is chordal iff no vertex subset of size ≥ 4
        // induces a cycle
        for q in 1..=5usize {
            let pairs: Vec<(usize, usize)> = (0..q)
                .flat_map(|i| ((i + 1)..q).map(move |j| (i, j)))
                .collect();
            for code in 0u64..(1 << pairs.len()) {
                let edges: Vec<(usize, usize)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| (code >> k) & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                let fast = DecomposableGraph::from_edges(q, &edges).is_ok();
                let slow = !has_induced_long_cycle(q, &edges);
                assert_eq!(fast, slow, "q={q} edges={edges:?}");
            }
        }
    }

    fn has_induced_long_cycle(q: usize, edges: &[(usize, usize)]) -> bool {
        let mut adj = vec![vec![false; q]; q];
        for &(u, v) in edges {
            adj[u][v] = true;
            adj[v][u] = true;
        }
        for subset in 0u64..(1 << q) {
            let members: Vec<usize> = (0..q).filter(|&v| (subset >> v) & 1 == 1).collect();
            if members.len() < 4 {
                continue;
            }
            let degrees: Vec<usize> = members
                .iter()
                .map(|&v| members.iter().filter(|&&u| adj[v][u]).count())
                .collect();
            if !degrees.iter().all(|&d| d == 2) {
                continue;
            }
            // all degree 2: a disjoint union of cycles; connected means one cycle
            let mut seen = vec![false; q];
            let mut stack = vec![members[0]];
            seen[members[0]] = true;
            let mut count = 0;
            while let Some(v) = stack.pop() {
                count += 1;
                for &u in &members {
                    if adj[v][u] && !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            if count == members.len() {
                return true;
            }
        }
        false
    }

    #[test]
    fn dag_text_roundtrip() {
        let d = dag(3, &[&[], &[0], &[0, 1]]);
        let text = format_dag_text(&d);
        assert_eq!(text, "1: \n2: 1\n3: 1,2\n");
        let parsed = parse_dag_text(&text).unwrap();
        assert_eq!(parsed, d);
    }

    #[test]
    fn edge_list_roundtrip() {
        let g = DecomposableGraph::from_edges(4, &[(0, 1), (1, 2)]).unwrap();
        let text = format_edge_list(&g);
        let edges = parse_edge_list(&text, 4).unwrap();
        let g2 = DecomposableGraph::from_edges(4, &edges).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn family_contains_vertex_and_edge_sum_matches() {
        let d = dag(4, &[&[], &[0], &[1], &[1, 2]]);
        let total: usize = (0..4).map(|j| d.parents(j).len()).sum();
        assert_eq!(total, d.edge_count());
        for j in 0..4 {
            assert!(d.family(j).contains(j));
        }
    }
}
