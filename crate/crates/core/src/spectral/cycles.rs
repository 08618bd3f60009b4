//! Extremal mean-weight cycles (Karp's dynamic program).

use crate::sparse::CsrMatrix;

/// Mean weight of a cycle given as a vertex list `c[0] → c[1] → … → c[0]`.
///
/// The cycle is rotated to start at its smallest vertex and the weights are
/// summed left to right from there, so every representation of the same cycle
/// yields the same floating-point value.
pub fn cycle_mean(cycle: &[usize], weights: &CsrMatrix) -> f64 {
    let len = cycle.len();
    let start = (0..len).min_by_key(|&i| cycle[i]).unwrap_or(0);
    let mut sum = 0.0;
    for step in 0..len {
        let u = cycle[(start + step) % len];
        let v = cycle[(start + step + 1) % len];
        sum += weights.get(u, v);
    }
    sum / len as f64
}

/// Simple cycle with the smallest mean weight in a strongly connected graph.
///
/// Karp's recurrence `D_k(v) = min_u D_{k-1}(u) + w(u,v)` identifies the
/// optimal mean; the minimizing length-`n` walk is then split into simple
/// cycles, one of which attains it. The returned mean is recomputed with
/// [`cycle_mean`].
pub fn min_mean_cycle(weights: &CsrMatrix) -> (f64, Vec<usize>) {
    extremal_cycle(weights, false)
}

/// Simple cycle with the largest mean weight.
pub fn max_mean_cycle(weights: &CsrMatrix) -> (f64, Vec<usize>) {
    extremal_cycle(weights, true)
}

fn extremal_cycle(weights: &CsrMatrix, maximize: bool) -> (f64, Vec<usize>) {
    let n = weights.dim();
    let sign = if maximize { -1.0 } else { 1.0 };
    let mut dist = vec![vec![f64::INFINITY; n]; n + 1];
    let mut parent = vec![vec![usize::MAX; n]; n + 1];
    dist[0][0] = 0.0;
    for k in 1..=n {
        let (prev, cur) = dist.split_at_mut(k);
        let (prev, cur) = (&prev[k - 1], &mut cur[0]);
        for u in 0..n {
            if prev[u].is_infinite() {
                continue;
            }
            for (v, w) in weights.row(u) {
                let cand = prev[u] + sign * w;
                if cand < cur[v] {
                    cur[v] = cand;
                    parent[k][v] = u;
                }
            }
        }
    }

    let mut best_v = usize::MAX;
    let mut best = f64::INFINITY;
    for v in 0..n {
        if dist[n][v].is_infinite() {
            continue;
        }
        let worst = (0..n)
            .filter(|&k| dist[k][v].is_finite())
            .map(|k| (dist[n][v] - dist[k][v]) / (n - k) as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        if worst < best {
            best = worst;
            best_v = v;
        }
    }

    // Walk of length n ending at best_v, in forward order.
    let mut walk = vec![best_v; n + 1];
    for k in (1..=n).rev() {
        walk[k - 1] = parent[k][walk[k]];
    }

    let mut chosen: Option<(f64, Vec<usize>)> = None;
    let mut stack: Vec<usize> = Vec::new();
    let mut position = vec![usize::MAX; n];
    for &v in &walk {
        if position[v] != usize::MAX {
            let cycle: Vec<usize> = stack[position[v]..].to_vec();
            for &c in &cycle {
                position[c] = usize::MAX;
            }
            stack.truncate(stack.len() - cycle.len());
            let mean = cycle_mean(&cycle, weights);
            let better = match &chosen {
                None => true,
                Some((m, _)) => sign * mean < sign * *m,
            };
            if better {
                chosen = Some((mean, cycle));
            }
        }
        position[v] = stack.len();
        stack.push(v);
    }
    chosen.expect("a walk of length n on n vertices repeats a vertex")
}
