//! Random bipartite instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::Graph;

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

fn cross_edges<R: Rng>(types: &[u8], p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let n = types.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if types[i] != types[j] && rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Players `0..n/2` have type 0, the rest type 1; each cross pair is
/// joined independently with probability `p`.
pub fn gen_random_bipartite_with<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if n % 2 == 1 {
        return Err(Error::OddPlayerCount(n));
    }
    check_probability(p)?;
    let types: Vec<u8> = (0..n).map(|i| u8::from(i >= n / 2)).collect();
    let edges = cross_edges(&types, p, rng);
    Graph::new(types, edges)
}

pub fn gen_random_bipartite(n: usize, p: f64, seed: u64) -> Result<Graph> {
    gen_random_bipartite_with(n, p, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Each player draws its type uniformly; each cross pair is joined
/// independently with probability `p`. Any `n` is allowed.
pub fn gen_random_typed_bipartite_with<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    check_probability(p)?;
    let types: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(0.5))).collect();
    let edges = cross_edges(&types, p, rng);
    Graph::new(types, edges)
}

pub fn gen_random_typed_bipartite(n: usize, p: f64, seed: u64) -> Result<Graph> {
    gen_random_typed_bipartite_with(n, p, &mut ChaCha8Rng::seed_from_u64(seed))
}
