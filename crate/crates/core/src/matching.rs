//! Minimum matchings on graphs with dangling edges.
//!
//! A matching here is an edge set with a prescribed boundary (the vertices
//! of odd degree in the set). Dangling edges have one real endpoint and can
//! absorb a single defect each.

use std::collections::VecDeque;

use mwmatching::{Matching, SENTINEL};

use crate::error::{Error, Result};
use crate::pauli::PauliOp;

#[derive(Clone, Debug)]
pub struct DefectGraph {
    n_vertices: usize,
    edges: Vec<(usize, Option<usize>)>,
    adj: Vec<Vec<(usize, Option<usize>)>>,
}

/// Shortest-path tree from one vertex.
struct Tree {
    dist: Vec<u32>,
    parent_edge: Vec<usize>,
    /// (distance, dangling edge id, vertex) of the closest dangling edge.
    exit: Option<(u32, usize, usize)>,
}

const UNREACHED: u32 = u32::MAX;

impl DefectGraph {
    pub fn new(n_vertices: usize) -> Self {
        DefectGraph { n_vertices, edges: Vec::new(), adj: vec![Vec::new(); n_vertices] }
    }

    /// Adds an edge and returns its id. `b = None` makes it dangling.
    pub fn add_edge(&mut self, a: usize, b: Option<usize>) -> Result<usize> {
        for v in std::iter::once(a).chain(b) {
            if v >= self.n_vertices {
                return Err(Error::UnknownVertex(v));
            }
        }
        let id = self.edges.len();
        self.edges.push((a, b));
        self.adj[a].push((id, b));
        if let Some(b) = b {
            self.adj[b].push((id, Some(a)));
        }
        Ok(id)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> Result<(usize, Option<usize>)> {
        self.edges.get(e).copied().ok_or(Error::UnknownEdge(e))
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Vertices with odd incidence in `f`, sorted.
    pub fn boundary(&self, f: &[usize]) -> Result<Vec<usize>> {
        let mut odd = vec![false; self.n_vertices];
        for &e in f {
            let (a, b) = self.edge(e)?;
            odd[a] ^= true;
            if let Some(b) = b {
                odd[b] ^= true;
            }
        }
        Ok((0..self.n_vertices).filter(|&v| odd[v]).collect())
    }

    fn bfs(&self, src: usize) -> Tree {
        let mut dist = vec![UNREACHED; self.n_vertices];
        let mut parent_edge = vec![usize::MAX; self.n_vertices];
        let mut exit: Option<(u32, usize, usize)> = None;
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            for &(e, other) in &self.adj[v] {
                match other {
                    None => {
                        let cand = (dist[v] + 1, e, v);
                        if exit.map_or(true, |x| (cand.0, cand.1) < (x.0, x.1)) {
                            exit = Some(cand);
                        }
                    }
                    Some(u) if dist[u] == UNREACHED => {
                        dist[u] = dist[v] + 1;
                        parent_edge[u] = e;
                        queue.push_back(u);
                    }
                    _ => {}
                }
            }
        }
        Tree { dist, parent_edge, exit }
    }

    fn walk_back(&self, tree: &Tree, mut v: usize, out: &mut [bool]) {
        while tree.dist[v] != 0 {
            let e = tree.parent_edge[v];
            out[e] ^= true;
            let (a, b) = self.edges[e];
            v = if a == v { b.expect("tree edges are internal") } else { a };
        }
    }

    /// A minimum-cardinality edge set whose boundary is `defects`.
    /// Returns sorted edge ids.
    pub fn min_weight_matching(&self, defects: &[usize]) -> Result<Vec<usize>> {
        let mut s: Vec<usize> = defects.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != defects.len() {
            return Err(Error::InvalidInput("repeated defect".into()));
        }
        for &v in &s {
            if v >= self.n_vertices {
                return Err(Error::UnknownVertex(v));
            }
        }
        let k = s.len();
        if k == 0 {
            return Ok(Vec::new());
        }
        let trees: Vec<Tree> = s.iter().map(|&v| self.bfs(v)).collect();
        // Defect i is node i, its private boundary copy is node k + i.
        let mut wedges: Vec<(usize, usize, u32)> = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                let dd = trees[i].dist[s[j]];
                if dd != UNREACHED {
                    wedges.push((i, j, dd));
                }
            }
            if let Some((db, _, _)) = trees[i].exit {
                wedges.push((i, k + i, db));
            }
            for j in i + 1..k {
                wedges.push((k + i, k + j, 0));
            }
        }
        let big = wedges.iter().map(|w| w.2).max().unwrap_or(0) as i64 + 1;
        if big * (k as i64) * 2 > i32::MAX as i64 {
            return Err(Error::InvalidInput("graph too large for 32-bit matching weights".into()));
        }
        let edges = wedges.iter().map(|&(a, b, w)| (a, b, (big - w as i64) as i32)).collect();
        let mate = Matching::new(edges).max_cardinality().solve();
        let mut chosen = vec![false; self.edges.len()];
        for i in 0..k {
            let m = mate.get(i).copied().unwrap_or(SENTINEL);
            if m == SENTINEL {
                return Err(Error::Infeasible(format!("defect {} cannot be paired", s[i])));
            }
            if m == k + i {
                let (_, e, v) = trees[i].exit.expect("boundary edge exists");
                chosen[e] ^= true;
                self.walk_back(&trees[i], v, &mut chosen);
            } else if m < k && i < m {
                self.walk_back(&trees[i], s[m], &mut chosen);
            } else if m >= k && m != k + i {
                return Err(Error::Infeasible("boundary copy matched to a foreign defect".into()));
            }
        }
        Ok((0..self.edges.len()).filter(|&e| chosen[e]).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliType {
    XOnly,
    ZOnly,
}

/// Minimum-weight Pauli of one type whose commutation pattern with
/// `generators` equals `target`. Uses matching when every single-qubit flip
/// violates at most two generators, otherwise exhaustive search by weight.
pub fn min_weight_pauli_for_syndrome(generators: &[PauliOp], target: &[bool], pauli_type: PauliType) -> Result<PauliOp> {
    if generators.len() != target.len() {
        return Err(Error::DimensionMismatch { expected: generators.len(), got: target.len() });
    }
    let n = match generators.first() {
        Some(g) => g.n(),
        None => return Err(Error::InvalidInput("no generators".into())),
    };
    let single = |q: usize| match pauli_type {
        PauliType::XOnly => PauliOp::x_on(n, [q]),
        PauliType::ZOnly => PauliOp::z_on(n, [q]),
    };
    let flips: Vec<Vec<usize>> = (0..n)
        .map(|q| {
            let p = single(q);
            (0..generators.len()).filter(|&g| generators[g].anticommutes(&p)).collect()
        })
        .collect();
    let build = |qs: &[usize]| match pauli_type {
        PauliType::XOnly => PauliOp::x_on(n, qs.iter().copied()),
        PauliType::ZOnly => PauliOp::z_on(n, qs.iter().copied()),
    };
    if flips.iter().all(|f| f.len() <= 2) {
        let mut g = DefectGraph::new(generators.len());
        let mut edge_qubit = Vec::new();
        for (q, f) in flips.iter().enumerate() {
            match f.as_slice() {
                [] => continue,
                [a] => g.add_edge(*a, None)?,
                [a, b] => g.add_edge(*a, Some(*b))?,
                _ => unreachable!(),
            };
            edge_qubit.push(q);
        }
        let defects: Vec<usize> = (0..target.len()).filter(|&i| target[i]).collect();
        let f = g.min_weight_matching(&defects)?;
        let qs: Vec<usize> = f.iter().map(|&e| edge_qubit[e]).collect();
        return Ok(build(&qs));
    }
    // Exhaustive search, increasing weight.
    let useful: Vec<usize> = (0..n).filter(|&q| !flips[q].is_empty()).collect();
    let want: Vec<usize> = (0..target.len()).filter(|&i| target[i]).collect();
    for w in 0..=useful.len() {
        let mut found = None;
        for_each_combination(useful.len(), w, &mut |idx| {
            if found.is_some() {
                return;
            }
            let mut syn = vec![false; target.len()];
            for &i in idx {
                for &g in &flips[useful[i]] {
                    syn[g] ^= true;
                }
            }
            if (0..target.len()).filter(|&i| syn[i]).eq(want.iter().copied()) {
                found = Some(idx.iter().map(|&i| useful[i]).collect::<Vec<_>>());
            }
        });
        if let Some(qs) = found {
            return Ok(build(&qs));
        }
    }
    Err(Error::Infeasible("syndrome outside the reachable space".into()))
}

/// Calls `f` on each `k`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> DefectGraph {
        let mut g = DefectGraph::new(3);
        g.add_edge(0, Some(1)).unwrap();
        g.add_edge(1, Some(2)).unwrap();
        g
    }

    #[test]
    fn boundaries() {
        let mut g = path3();
        let d = g.add_edge(2, None).unwrap();
        assert_eq!(g.boundary(&[]).unwrap(), Vec::<usize>::new());
        assert_eq!(g.boundary(&[0]).unwrap(), vec![0, 1]);
        assert_eq!(g.boundary(&[d]).unwrap(), vec![2]);
        assert_eq!(g.boundary(&[7]), Err(Error::UnknownEdge(7)));
    }

    #[test]
    fn path_matching() {
        let g = path3();
        assert!(g.min_weight_matching(&[]).unwrap().is_empty());
        assert_eq!(g.min_weight_matching(&[0, 2]).unwrap(), vec![0, 1]);
        assert!(matches!(g.min_weight_matching(&[0]), Err(Error::Infeasible(_))));
    }

    #[test]
    fn dangling_edge_absorbs_single_defect() {
        let mut g = path3();
        g.add_edge(0, None).unwrap();
        g.add_edge(2, None).unwrap();
        assert_eq!(g.min_weight_matching(&[0]).unwrap(), vec![2]);
        let mut long = DefectGraph::new(4);
        for v in 0..3 {
            long.add_edge(v, Some(v + 1)).unwrap();
        }
        let a = long.add_edge(0, None).unwrap();
        let b = long.add_edge(3, None).unwrap();
        assert_eq!(long.min_weight_matching(&[0, 3]).unwrap(), vec![a, b]);
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut count = 0;
        for_each_combination(5, 2, &mut |_| count += 1);
        assert_eq!(count, 10);
        let mut zero = 0;
        for_each_combination(3, 0, &mut |c| {
            assert!(c.is_empty());
            zero += 1;
        });
        assert_eq!(zero, 1);
    }

    #[test]
    fn single_generator_syndrome() {
        let g: PauliOp = "ZZ".parse().unwrap();
        let p = min_weight_pauli_for_syndrome(&[g.clone()], &[true], PauliType::XOnly).unwrap();
        assert_eq!(p.weight(), 1);
        assert!(p.anticommutes(&g));
        assert!(min_weight_pauli_for_syndrome(&[g], &[false], PauliType::XOnly).unwrap().is_identity());
    }
}
