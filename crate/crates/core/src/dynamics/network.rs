use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DynamicsError;

/// Undirected simple graph over agents `0..n`.
///
/// Adjacency lists are kept sorted so neighbor iteration order, and therefore
/// every floating point sum taken over neighbors, is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialNetwork {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl SocialNetwork {
    pub fn empty(n: usize) -> Result<Self, DynamicsError> {
        if n == 0 {
            return Err(DynamicsError::EmptyNetwork);
        }
        Ok(Self {
            adjacency: vec![Vec::new(); n],
            edge_count: 0,
        })
    }

    /// Builds a network from unordered pairs. Duplicate pairs (in either
    /// orientation) collapse into one edge; self-loops are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, DynamicsError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut net = Self::empty(n)?;
        for (i, j) in edges {
            if i == j || i >= n || j >= n {
                return Err(DynamicsError::InvalidEdge(i, j));
            }
            net.insert(i, j);
        }
        Ok(net)
    }

    pub fn complete(n: usize) -> Result<Self, DynamicsError> {
        let mut net = Self::empty(n)?;
        for i in 0..n {
            net.adjacency[i] = (0..n).filter(|&j| j != i).collect();
        }
        net.edge_count = n * (n - 1) / 2;
        Ok(net)
    }

    /// G(n, p): every unordered pair `(i, j)`, `i < j`, visited in
    /// lexicographic order and kept with probability `p`.
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Self, DynamicsError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::erdos_renyi_with(n, p, &mut rng)
    }

    pub fn erdos_renyi_with<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Self, DynamicsError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(DynamicsError::InvalidProbability(p));
        }
        let mut net = Self::empty(n)?;
        for i in 0..n {
            for j in (i + 1)..n {
                // random::<f64>() is in [0, 1), so p = 1 keeps every pair and p = 0 none.
                if rng.random::<f64>() < p {
                    net.adjacency[i].push(j);
                    net.adjacency[j].push(i);
                    net.edge_count += 1;
                }
            }
        }
        // pushes above happen in increasing order for both endpoints
        debug_assert!(net.adjacency.iter().all(|a| a.windows(2).all(|w| w[0] < w[1])));
        Ok(net)
    }

    fn insert(&mut self, i: usize, j: usize) {
        if let Err(pos) = self.adjacency[i].binary_search(&j) {
            self.adjacency[i].insert(pos, j);
            let pos_j = self.adjacency[j].binary_search(&i).unwrap_err();
            self.adjacency[j].insert(pos_j, i);
            self.edge_count += 1;
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n() && self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edge_count as f64 / self.n() as f64
    }
}
