#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use walkdet::spectral::{validate_chain, MarkovChain};

/// Random irreducible, aperiodic chain on `m` states with a sparse support.
/// The cycle `0 → 1 → … → 0` and a self-loop at 0 guarantee both properties.
pub fn random_chain(rng: &mut ChaCha8Rng, m: usize, density: f64) -> MarkovChain {
    let mut p = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            let forced = j == (i + 1) % m || (i == 0 && j == 0);
            if forced || rng.random::<f64>() < density {
                p[i][j] = rng.random_range(0.05..1.0);
            }
        }
        let s: f64 = p[i].iter().sum();
        p[i].iter_mut().for_each(|x| *x /= s);
    }
    validate_chain(&p).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn two_state() -> MarkovChain {
    validate_chain(&[vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap()
}

/// Non-uniform walk on the triangle.
pub fn triangle() -> MarkovChain {
    validate_chain(&[vec![0.0, 0.55, 0.45], vec![0.5, 0.0, 0.5], vec![0.5, 0.5, 0.0]]).unwrap()
}

pub fn cycle(n: usize) -> MarkovChain {
    walkdet::graphs::uniform_walk_chain(&walkdet::graphs::gen_cycle(n).unwrap()).unwrap()
}

/// Means of all simple cycles, each summed from its smallest vertex.
pub fn simple_cycle_means(chain: &MarkovChain) -> Vec<f64> {
    let m = chain.num_states();
    let mut out = Vec::new();
    for s in 0..m {
        let mut path = vec![s];
        let mut on_path = vec![false; m];
        on_path[s] = true;
        dfs(chain, s, s, 0.0, &mut path, &mut on_path, &mut out);
    }
    out
}

fn dfs(
    chain: &MarkovChain,
    start: usize,
    v: usize,
    sum: f64,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<f64>,
) {
    for (u, l) in chain.log_transitions().row(v) {
        if u == start {
            out.push((sum + l) / path.len() as f64);
        } else if u > start && !on_path[u] {
            on_path[u] = true;
            path.push(u);
            dfs(chain, start, u, sum + l, path, on_path, out);
            path.pop();
            on_path[u] = false;
        }
    }
}
