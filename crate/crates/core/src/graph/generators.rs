//! Deterministic graph generators used by the examples, tests and CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::error::{Error, Result};

/// Default neighbour count of the random sensor graph.
pub const SENSOR_DEFAULT_K: usize = 6;

const SENSOR_MAX_ATTEMPTS: usize = 1000;

pub fn path(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::invalid("path graph needs at least 2 nodes"));
    }
    Graph::new(n, (0..n - 1).map(|i| (i, i + 1, 1.0)).collect())
}

/// Cycle `0, 1, …, n−1` closed back to `0`. For `n = 2` this is a single edge.
pub fn cycle(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::invalid("cycle graph needs at least 2 nodes"));
    }
    if n == 2 {
        return Graph::new(2, vec![(0, 1, 1.0)]);
    }
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect())
}

/// Möbius ladder: a cycle of `n` nodes plus rungs `i ↔ i + n/2`.
pub fn mobius_ladder(n: usize) -> Result<Graph> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "Möbius ladder needs an even node count >= 4, got {n}"
        )));
    }
    let mut edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    edges.extend((0..n / 2).map(|i| (i, i + n / 2, 1.0)));
    Graph::new(n, edges)
}

pub fn star(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::invalid("star graph needs at least 2 nodes"));
    }
    Graph::new(n, (1..n).map(|i| (0, i, 1.0)).collect())
}

pub fn complete(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::invalid("complete graph needs at least 2 nodes"));
    }
    let edges = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j, 1.0)))
        .collect();
    Graph::new(n, edges)
}

/// Random sensor graph.
///
/// Nodes are uniform points in the unit square; every node is linked to its
/// `k` nearest neighbours (symmetrized) with Gaussian-kernel weights
/// `exp(−d²/2σ²)`, σ being the mean k-NN distance. Draws are repeated from the
/// same seeded stream until the graph is connected.
pub fn sensor(n: usize, k: usize, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::invalid("sensor graph needs at least 2 nodes"));
    }
    if k == 0 {
        return Err(Error::invalid("sensor graph needs k >= 1"));
    }
    let k = k.min(n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SENSOR_MAX_ATTEMPTS {
        let points: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let g = knn_graph(&points, k)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Capability(format!(
        "no connected sensor graph with n={n}, k={k} after {SENSOR_MAX_ATTEMPTS} draws"
    )))
}

fn knn_graph(points: &[(f64, f64)], k: usize) -> Result<Graph> {
    let n = points.len();
    let dist = |a: usize, b: usize| {
        let (dx, dy) = (points[a].0 - points[b].0, points[a].1 - points[b].1);
        (dx * dx + dy * dy).sqrt()
    };
    let mut neighbours = Vec::with_capacity(n);
    let mut total = 0.0;
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (dist(i, j), j))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        others.truncate(k);
        total += others.iter().map(|p| p.0).sum::<f64>();
        neighbours.push(others);
    }
    let sigma = (total / (n * k) as f64).max(f64::MIN_POSITIVE);
    let mut pairs = std::collections::BTreeMap::new();
    for (i, list) in neighbours.iter().enumerate() {
        for &(d, j) in list {
            let w = (-d * d / (2.0 * sigma * sigma))
                .exp()
                .max(f64::MIN_POSITIVE);
            pairs.insert((i.min(j), i.max(j)), w);
        }
    }
    Graph::new(n, pairs.into_iter().map(|((i, j), w)| (i, j, w)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_and_mobius_edges() {
        let c = cycle(4).unwrap();
        assert_eq!(
            c.edges(),
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]
        );
        let m = mobius_ladder(6).unwrap();
        assert_eq!(m.edges().len(), 9);
        for rung in [(0, 3, 1.0), (1, 4, 1.0), (2, 5, 1.0)] {
            assert!(m.edges().contains(&rung));
        }
        assert!(mobius_ladder(7).is_err());
        assert!(cycle(1).is_err());
    }

    #[test]
    fn mobius_adjacency_is_circulant() {
        let m = mobius_ladder(10).unwrap();
        assert!(crate::graph::is_circulant(&m.adjacency()));
        assert!(m.degrees().iter().all(|&d| d == 3));
    }

    #[test]
    fn sensor_graph_is_deterministic_and_connected() {
        let a = sensor(30, SENSOR_DEFAULT_K, 7).unwrap();
        let b = sensor(30, SENSOR_DEFAULT_K, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.is_connected());
        assert!(a.degrees().iter().all(|&d| d >= SENSOR_DEFAULT_K));
        let c = sensor(30, SENSOR_DEFAULT_K, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn star_hub_degree() {
        let s = star(6).unwrap();
        assert_eq!(s.degrees()[0], 5);
    }
}
