//! The weighted digraph of a technical-coefficient matrix, its strongly
//! connected components, the block triangular form and the structural
//! predicates (closures, sinks, sources) the classification theorems use.

use alloc::vec;
use alloc::vec::Vec;

use crate::classify::TechMatrix;
use crate::linalg::Permutation;

/// Weighted digraph with an edge `i -> j` for every `a_ij > 0`.
///
/// Vertices are the sectors `S_1..S_n` (0-indexed internally, 1-indexed in
/// reports).
#[derive(Debug, Clone)]
pub struct Digraph {
    n: usize,
    /// Successor lists: `succ[i]` holds `(j, a_ij)` for `a_ij > 0`.
    succ: Vec<Vec<(usize, f64)>>,
}

impl Digraph {
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn successors(&self, v: usize) -> &[(usize, f64)] {
        &self.succ[v]
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(|s| s.len()).sum()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.succ[from].iter().any(|&(j, _)| j == to)
    }
}

/// Builds the digraph whose adjacency matrix is `a`: the edge set is exactly
/// the support of `a` (strictly positive entries, no epsilon).
pub fn build_digraph(a: &TechMatrix) -> Digraph {
    let n = a.n();
    let mut succ = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            let w = a.entry(i, j);
            if w > 0.0 {
                succ[i].push((j, w));
            }
        }
    }
    Digraph { n, succ }
}

/// Partition of the vertices into strongly connected components plus the
/// acyclic condensation.
#[derive(Debug, Clone)]
pub struct SccDecomposition {
    /// Component id per vertex.
    pub component_of: Vec<usize>,
    /// Vertex sets, each sorted ascending. Component ids index this list.
    pub components: Vec<Vec<usize>>,
    /// Condensation successor lists (sorted, deduplicated).
    pub condensation: Vec<Vec<usize>>,
}

impl SccDecomposition {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }
}

/// Tarjan's algorithm, iterative so deep chains cannot overflow the stack.
pub fn scc(g: &Digraph) -> SccDecomposition {
    let n = g.vertex_count();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut component_of = vec![usize::MAX; n];
    let mut counter = 0usize;

    // explicit DFS frames: (vertex, next successor position)
    let mut frames: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        frames.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut next)) = frames.last_mut() {
            if let Some(&(w, _)) = g.successors(v).get(*next) {
                *next += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    let id = components.len();
                    for &w in &comp {
                        component_of[w] = id;
                    }
                    components.push(comp);
                }
            }
        }
    }

    let k = components.len();
    let mut condensation = vec![Vec::new(); k];
    for v in 0..n {
        let cv = component_of[v];
        for &(w, _) in g.successors(v) {
            let cw = component_of[w];
            if cv != cw {
                condensation[cv].push(cw);
            }
        }
    }
    for out in &mut condensation {
        out.sort_unstable();
        out.dedup();
    }

    SccDecomposition {
        component_of,
        components,
        condensation,
    }
}

/// Block triangular form: a permutation ordering the strongly connected
/// components so that, after similarity, every entry strictly below the
/// block diagonal is exactly zero and each diagonal block is irreducible.
#[derive(Debug, Clone)]
pub struct BlockTriangularForm {
    pub perm: Permutation,
    /// `k + 1` increasing offsets; block `b` occupies permuted rows
    /// `block_bounds[b]..block_bounds[b + 1]`.
    pub block_bounds: Vec<usize>,
    /// Block index per original vertex.
    pub block_of: Vec<usize>,
}

impl BlockTriangularForm {
    pub fn block_count(&self) -> usize {
        self.block_bounds.len() - 1
    }

    /// Permuted-row range of a block.
    pub fn block_range(&self, b: usize) -> core::ops::Range<usize> {
        self.block_bounds[b]..self.block_bounds[b + 1]
    }

    /// Original vertex ids of a block, in permuted order.
    pub fn block_vertices(&self, b: usize) -> &[usize] {
        &self.perm.image()[self.block_range(b)]
    }
}

/// Computes the block triangular form of a nonnegative square matrix.
///
/// The condensation is sorted topologically (edges run from earlier blocks
/// to later blocks); ties between incomparable components are broken by
/// their smallest original vertex index so the form is deterministic.
/// Within a block, vertices keep ascending original order.
pub fn block_triangular_form(a: &TechMatrix) -> BlockTriangularForm {
    let g = build_digraph(a);
    let dec = scc(&g);
    let k = dec.component_count();

    let mut indegree = vec![0usize; k];
    for succs in &dec.condensation {
        for &t in succs {
            indegree[t] += 1;
        }
    }
    // Kahn's algorithm with a smallest-vertex priority rule. k is small, so
    // a linear scan stands in for a heap.
    let key = |c: usize| dec.components[c][0];
    let mut ready: Vec<usize> = (0..k).filter(|&c| indegree[c] == 0).collect();
    let mut order: Vec<usize> = Vec::with_capacity(k);
    while !ready.is_empty() {
        let mut best = 0;
        for i in 1..ready.len() {
            if key(ready[i]) < key(ready[best]) {
                best = i;
            }
        }
        let c = ready.swap_remove(best);
        order.push(c);
        for &t in &dec.condensation[c] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.push(t);
            }
        }
    }
    debug_assert_eq!(order.len(), k, "condensation must be acyclic");

    let mut image = Vec::with_capacity(a.n());
    let mut block_bounds = Vec::with_capacity(k + 1);
    let mut block_of = vec![0usize; a.n()];
    block_bounds.push(0);
    for (b, &c) in order.iter().enumerate() {
        for &v in &dec.components[c] {
            block_of[v] = b;
            image.push(v);
        }
        block_bounds.push(image.len());
    }

    BlockTriangularForm {
        perm: Permutation::new(image).expect("scc output is a partition"),
        block_bounds,
        block_of,
    }
}

/// Structural predicates read off the condensation.
#[derive(Debug, Clone)]
pub struct GraphFacts {
    /// A component is a closure when it has no outgoing condensation edge:
    /// its sectors supply nobody outside the component.
    pub component_is_closure: Vec<bool>,
    pub component_contains_sink: Vec<bool>,
    /// A vertex is a sink when it supplies no other vertex (a self-loop
    /// does not count).
    pub vertex_is_sink: Vec<bool>,
    /// A vertex is a source when no other vertex supplies it.
    pub vertex_is_source: Vec<bool>,
    /// Direct predecessor components per component (sorted).
    pub component_predecessors: Vec<Vec<usize>>,
}

pub fn graph_facts(dec: &SccDecomposition, g: &Digraph) -> GraphFacts {
    let n = g.vertex_count();
    let k = dec.component_count();

    let mut vertex_is_sink = vec![true; n];
    let mut vertex_is_source = vec![true; n];
    for v in 0..n {
        for &(w, _) in g.successors(v) {
            if w != v {
                vertex_is_sink[v] = false;
                vertex_is_source[w] = false;
            }
        }
    }

    let component_is_closure: Vec<bool> = (0..k).map(|c| dec.condensation[c].is_empty()).collect();
    let component_contains_sink: Vec<bool> = (0..k)
        .map(|c| dec.components[c].iter().any(|&v| vertex_is_sink[v]))
        .collect();

    let mut component_predecessors = vec![Vec::new(); k];
    for (c, succs) in dec.condensation.iter().enumerate() {
        for &t in succs {
            component_predecessors[t].push(c);
        }
    }
    for preds in &mut component_predecessors {
        preds.sort_unstable();
        preds.dedup();
    }

    GraphFacts {
        component_is_closure,
        component_contains_sink,
        vertex_is_sink,
        vertex_is_source,
        component_predecessors,
    }
}
