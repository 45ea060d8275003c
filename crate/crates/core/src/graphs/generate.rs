//! Trivalent graphs without separating edges: exhaustive lists for small
//! rank and random instances from a configuration model.

use super::graph::Graph;
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;

/// Vertex relabelling-invariant key of a loop-free multigraph.
pub fn canonical_form(g: &Graph) -> Vec<(usize, usize)> {
    (0..g.vertices)
        .permutations(g.vertices)
        .map(|p| {
            let mut es: Vec<(usize, usize)> =
                g.edges.iter().map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b]))).collect();
            es.sort_unstable();
            es
        })
        .min()
        .unwrap_or_default()
}

fn is_reduced_trivalent(g: &Graph) -> bool {
    g.is_connected() && g.is_trivalent() && !g.has_separating_edge() && (0..g.num_edges()).all(|e| !g.is_loop_edge(e))
}

/// One representative per isomorphism type of reduced trivalent graph of
/// rank `r`; practical for `r ≤ 4`.
pub fn trivalent_types(r: usize) -> Vec<Graph> {
    let n = 2 * r - 2;
    let pairs: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for combo in pairs.iter().copied().combinations_with_replacement(3 * r - 3) {
        let mut deg = vec![0; n];
        for &(a, b) in &combo {
            deg[a] += 1;
            deg[b] += 1;
        }
        if deg.iter().any(|&d| d != 3) {
            continue;
        }
        let g = Graph { vertices: n, edges: combo };
        if !is_reduced_trivalent(&g) {
            continue;
        }
        let key = canonical_form(&g);
        if !seen.contains(&key) {
            seen.push(key);
            out.push(g);
        }
    }
    out
}

/// Uniform pairing of half-edge stubs, retried until the result is reduced.
pub fn random_trivalent<R: Rng + ?Sized>(r: usize, rng: &mut R) -> Graph {
    let n = 2 * r - 2;
    loop {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| [v, v, v]).collect();
        stubs.shuffle(rng);
        let edges: Vec<(usize, usize)> = stubs.chunks(2).map(|c| (c[0], c[1])).collect();
        let g = Graph { vertices: n, edges };
        if is_reduced_trivalent(&g) {
            return g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_type_counts() {
        assert_eq!(trivalent_types(2).len(), 1);
        assert_eq!(trivalent_types(3).len(), 2);
    }
}
