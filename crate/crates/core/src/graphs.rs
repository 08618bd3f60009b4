//! Benchmark graphs and their uniform random walks.
//!
//! Random instances (geometric and small-world graphs) draw from
//! [`crate::rng::stream_rng`]; attempt `a` of a generator uses job index `a`,
//! so a rejected disconnected draw is replaced by a fresh, reproducible one.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng};
use crate::sparse::CsrMatrix;
use crate::spectral::MarkovChain;

/// Radius of the default random geometric graph (1000 nodes in the unit square).
pub const DEFAULT_RGG_RADIUS: f64 = 0.055;
/// Ring degree of the default Watts–Strogatz graph.
pub const DEFAULT_WS_K: usize = 30;
/// Rewiring probability of the default Watts–Strogatz graph.
pub const DEFAULT_WS_P: f64 = 0.1;
/// Self-loop weight used to make a bipartite walk aperiodic.
pub const DEFAULT_LAZINESS: f64 = 1e-6;
/// Draws attempted before a random generator reports [`Error::Disconnected`].
pub const MAX_ATTEMPTS: usize = 100;

/// A graph on nodes `0..m`. Undirected graphs store both orientations of
/// every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    directed: bool,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(m: usize, directed: bool) -> Self {
        Self {
            directed,
            adj: vec![Vec::new(); m],
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Adds `i → j` (and `j → i` when undirected). Duplicates are ignored.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        let m = self.num_nodes();
        if i >= m || j >= m {
            return Err(Error::StateOutOfRange { state: i.max(j), m });
        }
        insert_sorted(&mut self.adj[i], j);
        if !self.directed {
            insert_sorted(&mut self.adj[j], i);
        }
        Ok(())
    }

    fn remove_edge(&mut self, i: usize, j: usize) {
        self.adj[i].retain(|&x| x != j);
        if !self.directed {
            self.adj[j].retain(|&x| x != i);
        }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&j).is_ok()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Every stored directed edge record `(i, j)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().map(move |&j| (i, j)))
            .collect()
    }

    pub fn num_edge_records(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// Adds a self-loop at every node, letting the walk stay in place.
    pub fn with_self_loops(mut self) -> Self {
        for i in 0..self.num_nodes() {
            insert_sorted(&mut self.adj[i], i);
        }
        self
    }

    /// Strong connectivity (plain connectivity for undirected graphs).
    pub fn is_connected(&self) -> bool {
        let m = self.num_nodes();
        if m == 0 {
            return false;
        }
        let forward = reach(&self.adj, 0);
        if !self.directed {
            return forward;
        }
        let mut rev = vec![Vec::new(); m];
        for (i, j) in self.edges() {
            rev[j].push(i);
        }
        forward && reach(&rev, 0)
    }
}

fn insert_sorted(v: &mut Vec<usize>, x: usize) {
    if let Err(pos) = v.binary_search(&x) {
        v.insert(pos, x);
    }
}

fn reach(adj: &[Vec<usize>], from: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    seen[from] = true;
    let mut stack = vec![from];
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == adj.len()
}

/// Undirected cycle on `n ≥ 3` nodes.
pub fn gen_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::SizeTooSmall(format!("cycle needs n >= 3, got {n}")));
    }
    let mut g = Graph::new(n, false);
    for i in 0..n {
        g.add_edge(i, (i + 1) % n)?;
    }
    Ok(g)
}

/// `w × h` four-neighbour lattice; node `(x, y)` is `y·w + x`.
pub fn gen_grid(w: usize, h: usize) -> Result<Graph> {
    if w < 2 || h < 2 {
        return Err(Error::SizeTooSmall(format!(
            "grid needs w, h >= 2, got {w}x{h}"
        )));
    }
    let mut g = Graph::new(w * h, false);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                g.add_edge(i, i + 1)?;
            }
            if y + 1 < h {
                g.add_edge(i, i + w)?;
            }
        }
    }
    Ok(g)
}

/// Random geometric graph: `n` uniform points in the unit square, joined when
/// their distance is at most `radius` (clamped to 1). Redrawn until connected.
pub fn gen_rgg(n: usize, radius: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::SizeTooSmall(format!("rgg needs n >= 2, got {n}")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rgg radius must be positive, got {radius}"
        )));
    }
    let r2 = radius.min(1.0).powi(2);
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = stream_rng(seed, attempt as u64, stream::RGG);
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
        let mut g = Graph::new(n, false);
        for i in 0..n {
            for j in i + 1..n {
                let dx = pts[i].0 - pts[j].0;
                let dy = pts[i].1 - pts[j].1;
                if dx * dx + dy * dy <= r2 {
                    g.add_edge(i, j)?;
                }
            }
        }
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Disconnected {
        attempts: MAX_ATTEMPTS,
    })
}

/// Watts–Strogatz small-world graph: ring lattice where each node links to its
/// `k/2` nearest neighbours on each side, then every lattice edge `(u, u+j)` is
/// rewired to `(u, w)` with probability `p_rewire`, `w` uniform among nodes not
/// already adjacent to `u`. Redrawn until connected.
pub fn gen_watts_strogatz(n: usize, k: usize, p_rewire: f64, seed: u64) -> Result<Graph> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "k must be even and at least 2, got {k}"
        )));
    }
    if k >= n {
        return Err(Error::SizeTooSmall(format!("need k < n, got k={k}, n={n}")));
    }
    if !(0.0..=1.0).contains(&p_rewire) {
        return Err(Error::InvalidArgument(format!(
            "rewiring probability must lie in [0, 1], got {p_rewire}"
        )));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = stream_rng(seed, attempt as u64, stream::WATTS_STROGATZ);
        let mut g = Graph::new(n, false);
        for j in 1..=k / 2 {
            for u in 0..n {
                g.add_edge(u, (u + j) % n)?;
            }
        }
        for j in 1..=k / 2 {
            for u in 0..n {
                let v = (u + j) % n;
                if rng.random::<f64>() >= p_rewire || !g.has_edge(u, v) {
                    continue;
                }
                if g.out_degree(u) >= n - 1 {
                    continue;
                }
                let mut w = rng.random_range(0..n);
                while w == u || g.has_edge(u, w) {
                    w = rng.random_range(0..n);
                }
                g.remove_edge(u, v);
                g.add_edge(u, w)?;
            }
        }
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Disconnected {
        attempts: MAX_ATTEMPTS,
    })
}

/// Uniform random walk: `p_ij = 1/deg(i)` for each out-neighbour `j`.
pub fn uniform_walk_chain(g: &Graph) -> Result<MarkovChain> {
    lazy_walk_chain(g, 0.0)
}

/// `(1 - eps)·P + eps·I` for the uniform walk `P` on `g`.
pub fn lazy_walk_chain(g: &Graph, eps: f64) -> Result<MarkovChain> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!(
            "laziness must lie in [0, 1), got {eps}"
        )));
    }
    let mut rows = Vec::with_capacity(g.num_nodes());
    for i in 0..g.num_nodes() {
        let nb = g.neighbors(i);
        if nb.is_empty() {
            return Err(Error::NotIrreducible);
        }
        let p = (1.0 - eps) / nb.len() as f64;
        let mut row: Vec<(usize, f64)> = nb.iter().map(|&j| (j, p)).collect();
        if eps > 0.0 {
            match row.iter_mut().find(|(j, _)| *j == i) {
                Some(entry) => entry.1 += eps,
                None => row.push((i, eps)),
            }
        }
        rows.push(row);
    }
    MarkovChain::from_csr(CsrMatrix::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::entropy_rate;

    #[test]
    fn cycle_shapes() {
        let g = gen_cycle(3).unwrap();
        assert_eq!(g.num_edge_records(), 6);
        assert!(matches!(gen_cycle(2), Err(Error::SizeTooSmall(_))));
        let g = gen_cycle(101).unwrap();
        assert!((0..101).all(|i| g.out_degree(i) == 2));
        let h = entropy_rate(&uniform_walk_chain(&g).unwrap());
        assert!((h - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn even_cycle_is_periodic() {
        let g = gen_cycle(4).unwrap();
        assert!(matches!(
            uniform_walk_chain(&g),
            Err(Error::NotAperiodic { period: 2 })
        ));
        assert!(lazy_walk_chain(&g, DEFAULT_LAZINESS).is_ok());
    }

    #[test]
    fn grid_degrees() {
        let g = gen_grid(2, 2).unwrap();
        assert_eq!(g.num_nodes(), 4);
        assert!((0..4).all(|i| g.out_degree(i) == 2));
        let g = gen_grid(3, 3).unwrap();
        assert_eq!(g.out_degree(0), 2);
        assert_eq!(g.out_degree(1), 3);
        assert_eq!(g.out_degree(4), 4);
        assert!(matches!(gen_grid(1, 5), Err(Error::SizeTooSmall(_))));
    }

    #[test]
    fn triangle_walk() {
        let c = uniform_walk_chain(&gen_cycle(3).unwrap()).unwrap();
        let d = c.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d[i][j], if i == j { 0.0 } else { 0.5 });
            }
        }
        assert_eq!(c.uniform_regular_degree(), Some(2));
    }

    #[test]
    fn rgg_tiny_and_deterministic() {
        let g = gen_rgg(2, 1.5, 9).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 0)]);
        let a = gen_rgg(60, 0.3, 4).unwrap();
        let b = gen_rgg(60, 0.3, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.is_connected());
    }

    #[test]
    fn ws_ring_and_determinism() {
        let g = gen_watts_strogatz(20, 4, 0.0, 1).unwrap();
        assert!((0..20).all(|i| g.out_degree(i) == 4));
        let a = gen_watts_strogatz(100, 6, 0.2, 3).unwrap();
        let b = gen_watts_strogatz(100, 6, 0.2, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_edge_records(), 600);
        assert!(matches!(
            gen_watts_strogatz(10, 3, 0.1, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            gen_watts_strogatz(4, 4, 0.1, 0),
            Err(Error::SizeTooSmall(_))
        ));
    }

    #[test]
    fn regular_graph_entropy_is_log_k() {
        let g = gen_watts_strogatz(31, 6, 0.0, 0).unwrap();
        let c = uniform_walk_chain(&g).unwrap();
        assert!((entropy_rate(&c) - 6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn self_loops_make_grid_aperiodic() {
        let g = gen_grid(4, 4).unwrap();
        assert!(uniform_walk_chain(&g).is_err());
        let c = uniform_walk_chain(&g.with_self_loops()).unwrap();
        assert!((c.prob(0, 0) - 1.0 / 3.0).abs() < 1e-15);
    }
}
