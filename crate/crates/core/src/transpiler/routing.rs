//! Coupling graphs, greedy SWAP routing and layout restoration.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::circuit::{GateKind, Instruction};
use crate::error::{Error, Result};

/// Undirected, connected device connectivity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct CouplingGraph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraph> for CouplingGraph {
    type Error = Error;
    fn try_from(r: RawGraph) -> Result<Self> {
        Self::new(r.num_nodes, r.edges)
    }
}

impl From<CouplingGraph> for RawGraph {
    fn from(g: CouplingGraph) -> Self {
        RawGraph { num_nodes: g.num_nodes, edges: g.edges }
    }
}

impl CouplingGraph {
    pub fn new(num_nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::EmptyRegister);
        }
        let mut adjacency = vec![Vec::new(); num_nodes];
        for &(u, v) in &edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::QubitOutOfRange { index: u.max(v), width: num_nodes });
            }
            if u == v {
                return Err(Error::InvalidArgument(alloc::format!("self-loop on qubit {u}")));
            }
            if !adjacency[u].contains(&v) {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        adjacency.iter_mut().for_each(|a| a.sort_unstable());
        let g = Self { num_nodes, edges, adjacency };
        if g.bfs_parents(0).iter().any(Option::is_none) {
            return Err(Error::DisconnectedCoupling);
        }
        Ok(g)
    }

    /// Size inferred from the largest index in `edges`.
    pub fn from_edges(edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        Self::new(n, edges)
    }

    pub fn line(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)).collect())
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// BFS parent pointers; neighbors explored in ascending index order. The
    /// root's entry is `Some(root)`.
    fn bfs_parents(&self, root: usize) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.num_nodes];
        parent[root] = Some(root);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if parent[v].is_none() {
                    parent[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        parent
    }

    /// Shortest path `from → to`, inclusive, ties broken toward lower indices.
    pub fn shortest_path(&self, from: usize, to: usize) -> Vec<usize> {
        let parent = self.bfs_parents(to);
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            cur = parent[cur].expect("connected graph");
            path.push(cur);
        }
        path
    }
}

/// Token placement tracker: `token_at[p]` is the logical (or ancilla) token on
/// physical qubit `p`.
struct Placement {
    token_at: Vec<usize>,
    loc: Vec<usize>,
}

impl Placement {
    fn swap(&mut self, a: usize, b: usize, out: &mut Vec<Instruction>) {
        let (ta, tb) = (self.token_at[a], self.token_at[b]);
        self.token_at.swap(a, b);
        self.loc[ta] = b;
        self.loc[tb] = a;
        out.push(Instruction::gate(GateKind::SWAP, &[a, b]));
    }
}

/// Routes instructions written on tokens (logical qubits, then ancillas)
/// placed by `initial`, which maps token → physical for every device qubit.
/// Two-qubit
/// gates on non-adjacent qubits move their first operand along a shortest
/// path; the initial placement is restored at the end.
pub(crate) fn route(insts: &[Instruction], graph: &CouplingGraph, initial: &[usize]) -> Vec<Instruction> {
    let n = graph.num_nodes();
    let mut token_at = vec![0; n];
    for (t, &p) in initial.iter().enumerate() {
        token_at[p] = t;
    }
    let mut pl = Placement { token_at, loc: initial.to_vec() };
    let mut out = Vec::with_capacity(insts.len());
    for inst in insts {
        let mut cur: Vec<usize> = inst.qubits.iter().map(|&t| pl.loc[t]).collect();
        if cur.len() == 2 && !graph.adjacent(cur[0], cur[1]) {
            let path = graph.shortest_path(cur[0], cur[1]);
            for k in 0..path.len() - 2 {
                pl.swap(path[k], path[k + 1], &mut out);
            }
            cur[0] = path[path.len() - 2];
        }
        let mut moved = inst.clone();
        moved.qubits = cur;
        out.push(moved);
    }
    restore(&mut pl, graph, initial, &mut out);
    out
}

/// Tree-based token swapping: fix the deepest remaining node of a BFS
/// spanning tree, then drop it from the tree.
fn restore(pl: &mut Placement, graph: &CouplingGraph, initial: &[usize], out: &mut Vec<Instruction>) {
    let n = graph.num_nodes();
    let parent: Vec<usize> = graph.bfs_parents(0).into_iter().map(|p| p.expect("connected")).collect();
    let depth: Vec<usize> = (0..n)
        .map(|mut v| {
            let mut d = 0;
            while v != 0 {
                v = parent[v];
                d += 1;
            }
            d
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| depth[b].cmp(&depth[a]).then(b.cmp(&a)));
    let mut home_token = vec![0; n];
    for (t, &p) in initial.iter().enumerate() {
        home_token[p] = t;
    }
    for v in order {
        let token = home_token[v];
        let from = pl.loc[token];
        if from == v {
            continue;
        }
        for (a, b) in tree_path(from, v, &parent, &depth).windows(2).map(|w| (w[0], w[1])) {
            pl.swap(a, b, out);
        }
    }
}

fn tree_path(from: usize, to: usize, parent: &[usize], depth: &[usize]) -> Vec<usize> {
    let (mut a, mut b) = (from, to);
    let (mut up, mut down) = (vec![a], vec![b]);
    while a != b {
        if depth[a] >= depth[b] {
            a = parent[a];
            up.push(a);
        } else {
            b = parent[b];
            down.push(b);
        }
    }
    down.pop();
    up.extend(down.into_iter().rev());
    up
}
