//! Vertex-cover based dynamic policy.
//!
//! After the uncontrolled dynamics settle, the players still at 1 or
//! undecided span a residual graph. A minimum vertex cover of it, forced
//! to 0 from `t = n`, kills every remaining active edge. Players already at
//! 0 who would flip once the cover drops to 0 (the "rho" set) are held at 0
//! too.

use serde::Serialize;

use crate::game::{Action, ActionProfile, Game, Graph};
use crate::learning;
use crate::policy::{Control, DynamicPolicy};
use crate::sim::Sim;

/// Players at 1 or undecided after `n` uncontrolled steps, and the edges
/// among them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidualGraph {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub base: ActionProfile,
}

impl ResidualGraph {
    pub fn contains(&self, i: usize) -> bool {
        self.base[i].is_active()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexCoverSolution {
    pub residual: ResidualGraph,
    pub cover: Vec<usize>,
    pub rho_positive: Vec<usize>,
    pub policy: DynamicPolicy,
}

impl VertexCoverSolution {
    /// Players held at 0 once the policy reaches its steady state.
    pub fn controlled(&self) -> Control {
        Control::zeros(self.cover.iter().chain(&self.rho_positive).copied())
    }
}

pub fn build_residual(game: &Game) -> ResidualGraph {
    let base = learning::run_from_undecided(game).last().clone();
    residual_of(game.graph(), base)
}

pub(crate) fn residual_of(graph: &Graph, base: ActionProfile) -> ResidualGraph {
    let nodes = (0..graph.n()).filter(|&i| base[i].is_active()).collect();
    let edges = graph.active_edges(&base);
    ResidualGraph { nodes, edges, base }
}

/// Maximum matching by augmenting paths.
///
/// The left side is the type of the lowest-indexed endpoint among `edges`.
/// Left players are scanned in index order and try their neighbors in
/// index order, which fixes the matching and hence the cover below.
pub fn maximum_matching(graph: &Graph, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let Some(sides) = Sides::new(graph, edges) else {
        return Vec::new();
    };
    let n = graph.n();
    let mut mate: Vec<Option<usize>> = vec![None; n];
    for &u in &sides.left {
        let mut visited = vec![false; n];
        augment(u, &sides.adj, &mut mate, &mut visited);
    }
    let mut out: Vec<(usize, usize)> = sides
        .left
        .iter()
        .filter_map(|&u| mate[u].map(|v| (u, v)))
        .collect();
    out.sort_unstable();
    out
}

struct Sides {
    left: Vec<usize>,
    adj: Vec<Vec<usize>>,
    left_type: u8,
}

impl Sides {
    fn new(graph: &Graph, edges: &[(usize, usize)]) -> Option<Self> {
        let first = edges.iter().map(|&(i, j)| i.min(j)).min()?;
        let left_type = graph.player_type(first);
        let mut adj = vec![Vec::new(); graph.n()];
        for &(i, j) in edges {
            let (u, v) = if graph.player_type(i) == left_type {
                (i, j)
            } else {
                (j, i)
            };
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let left = (0..graph.n())
            .filter(|&i| graph.player_type(i) == left_type && !adj[i].is_empty())
            .collect();
        Some(Self {
            left,
            adj,
            left_type,
        })
    }
}

fn augment(u: usize, adj: &[Vec<usize>], mate: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for &v in &adj[u] {
        if visited[v] {
            continue;
        }
        visited[v] = true;
        let free = match mate[v] {
            None => true,
            Some(w) => augment(w, adj, mate, visited),
        };
        if free {
            mate[v] = Some(u);
            mate[u] = Some(v);
            return true;
        }
    }
    false
}

/// Minimum vertex cover of a bipartite edge set via König's theorem:
/// with `Z` the players reachable from unmatched left players along
/// alternating paths, the cover is `(L \ Z) ∪ (R ∩ Z)`.
pub fn min_vertex_cover(graph: &Graph, edges: &[(usize, usize)]) -> Vec<usize> {
    let Some(sides) = Sides::new(graph, edges) else {
        return Vec::new();
    };
    let n = graph.n();
    let matching = maximum_matching(graph, edges);
    let mut mate: Vec<Option<usize>> = vec![None; n];
    for &(u, v) in &matching {
        mate[u] = Some(v);
        mate[v] = Some(u);
    }
    let mut reached = vec![false; n];
    let mut stack: Vec<usize> = sides
        .left
        .iter()
        .copied()
        .filter(|&u| mate[u].is_none())
        .collect();
    for &u in &stack {
        reached[u] = true;
    }
    // Left to right along non-matching edges, right to left along matching ones.
    while let Some(u) = stack.pop() {
        for &v in &sides.adj[u] {
            if reached[v] || mate[u] == Some(v) {
                continue;
            }
            reached[v] = true;
            if let Some(w) = mate[v] {
                if !reached[w] {
                    reached[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    (0..n)
        .filter(|&i| !sides.adj[i].is_empty())
        .filter(|&i| (graph.player_type(i) == sides.left_type) != reached[i])
        .collect()
}

impl ResidualGraph {
    pub fn min_vertex_cover(&self, graph: &Graph) -> Vec<usize> {
        min_vertex_cover(graph, &self.edges)
    }
}

/// Players outside the residual graph that would leave 0 once the cover
/// plays 0: `c_k * sum_{j in N_k} (ceil(a_j) - x_j) < 1`.
pub fn compute_rho_positive(game: &Game, residual: &ResidualGraph, cover: &[usize]) -> Vec<usize> {
    let g = game.graph();
    let mut x = vec![0i64; game.n()];
    for &i in cover {
        x[i] = 1;
    }
    (0..game.n())
        .filter(|&k| !residual.contains(k))
        .filter(|&k| {
            let s: i64 = g
                .neighbors(k)
                .iter()
                .map(|&j| residual.base[j].ceil() as i64 - x[j])
                .sum();
            game.c(k) * (s as f64) < 1.0
        })
        .collect()
}

/// The cover policy: nothing before `t = n`; at `t = n` the cover plays 0
/// and undecided residual players outside it play 1; from `t = n + 1` the
/// cover and the rho set are held at 0, unless the profile at `n + 1` is
/// already a rest point, in which case control stops.
pub fn assemble_pi_v(
    game: &Game,
    residual: &ResidualGraph,
    cover: &[usize],
    rho_positive: &[usize],
) -> DynamicPolicy {
    let n = game.n();
    let in_cover = |i: usize| cover.contains(&i);
    let mut at_n = Control::zeros(cover.iter().copied());
    for &i in &residual.nodes {
        if !in_cover(i) && residual.base[i] == Action::Undecided {
            at_n.insert(i, Action::One).expect("decided action");
        }
    }
    let hold = Control::zeros(cover.iter().chain(rho_positive).copied());

    let mut head = vec![Control::default(); n];
    head.push(at_n);
    let mut policy = DynamicPolicy::new(head, hold.clone());
    if policy.is_empty() {
        return DynamicPolicy::empty();
    }
    if hold.is_empty() {
        return policy;
    }

    let mut sim = Sim::new(game, vec![Action::Undecided; n]);
    sim.impose(policy.at(0));
    for t in 1..=n + 1 {
        sim.step(policy.at(t));
    }
    if sim.is_stationary(&Control::default()) {
        policy.tail = Control::default();
    }
    policy
}

/// Residual graph, cover, rho set and policy in one go.
pub fn solve(game: &Game) -> VertexCoverSolution {
    let residual = build_residual(game);
    let cover = residual.min_vertex_cover(game.graph());
    let rho_positive = compute_rho_positive(game, &residual, &cover);
    let policy = assemble_pi_v(game, &residual, &cover, &rho_positive);
    VertexCoverSolution {
        residual,
        cover,
        rho_positive,
        policy,
    }
}
