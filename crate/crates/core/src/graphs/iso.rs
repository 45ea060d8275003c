//! Graph isomorphisms: matching along corresponding paths, and the full
//! symmetry group of small graphs.

use super::graph::{edge_of, is_positive_half, pos, rev, Graph, HalfEdge, Path};

/// Edge correspondence `g1 → g2` read off paths that must correspond edge by
/// edge. Entry `e` is the image of the positive half-edge of `e`. `None` if
/// the paths do not define a graph isomorphism.
pub fn match_along_paths(g1: &Graph, paths1: &[Path], g2: &Graph, paths2: &[Path]) -> Option<Vec<HalfEdge>> {
    if g1.num_edges() != g2.num_edges() || g1.vertices != g2.vertices || paths1.len() != paths2.len() {
        return None;
    }
    let mut image: Vec<Option<HalfEdge>> = vec![None; g1.num_edges()];
    for (p, q) in paths1.iter().zip(paths2) {
        if p.len() != q.len() {
            return None;
        }
        for (&h, &k) in p.iter().zip(q) {
            let target = if is_positive_half(h) { k } else { rev(k) };
            match image[edge_of(h)] {
                None => image[edge_of(h)] = Some(target),
                Some(t) if t == target => {}
                Some(_) => return None,
            }
        }
    }
    let image: Vec<HalfEdge> = image.into_iter().collect::<Option<_>>()?;
    if is_isomorphism(g1, g2, &image) {
        Some(image)
    } else {
        None
    }
}

/// Checks that `image` is a bijection on edges inducing a bijection on vertices.
pub fn is_isomorphism(g1: &Graph, g2: &Graph, image: &[HalfEdge]) -> bool {
    let mut used = vec![false; g2.num_edges()];
    for &h in image {
        if edge_of(h) >= g2.num_edges() || std::mem::replace(&mut used[edge_of(h)], true) {
            return false;
        }
    }
    vertex_map(g1, g2, image).is_some()
}

pub fn vertex_map(g1: &Graph, g2: &Graph, image: &[HalfEdge]) -> Option<Vec<usize>> {
    let mut vmap: Vec<Option<usize>> = vec![None; g1.vertices];
    let mut set = |v: usize, w: usize| match vmap[v] {
        None => {
            vmap[v] = Some(w);
            true
        }
        Some(x) => x == w,
    };
    for (e, &h) in image.iter().enumerate() {
        let (a, b) = g1.edges[e];
        if !set(a, g2.origin(h)) || !set(b, g2.terminus(h)) {
            return None;
        }
    }
    let vmap: Vec<usize> = vmap.into_iter().collect::<Option<_>>()?;
    let mut seen = vec![false; g2.vertices];
    if vmap.iter().any(|&w| std::mem::replace(&mut seen[w], true)) {
        return None;
    }
    Some(vmap)
}

/// All isomorphisms `g1 → g2` as half-edge images of positive half-edges,
/// found by backtracking over edges in id order. Loop edges are matched in
/// one orientation only.
pub fn isomorphisms(g1: &Graph, g2: &Graph) -> Vec<Vec<HalfEdge>> {
    let mut out = Vec::new();
    if g1.num_edges() != g2.num_edges() || g1.vertices != g2.vertices {
        return out;
    }
    let mut image = Vec::with_capacity(g1.num_edges());
    let mut vmap = vec![None; g1.vertices];
    let mut vused = vec![false; g2.vertices];
    let mut eused = vec![false; g2.num_edges()];
    extend(g1, g2, &mut image, &mut vmap, &mut vused, &mut eused, &mut out);
    out
}

fn extend(
    g1: &Graph,
    g2: &Graph,
    image: &mut Vec<HalfEdge>,
    vmap: &mut Vec<Option<usize>>,
    vused: &mut Vec<bool>,
    eused: &mut Vec<bool>,
    out: &mut Vec<Vec<HalfEdge>>,
) {
    let e = image.len();
    if e == g1.num_edges() {
        if vmap.iter().all(Option::is_some) {
            out.push(image.clone());
        }
        return;
    }
    let (a, b) = g1.edges[e];
    for f in 0..g2.num_edges() {
        if eused[f] {
            continue;
        }
        for h in [pos(f), rev(pos(f))] {
            let (x, y) = (g2.origin(h), g2.terminus(h));
            if (a == b) != (x == y) {
                continue;
            }
            let mut assigned = Vec::new();
            let mut ok = true;
            for (v, w) in [(a, x), (b, y)] {
                match vmap[v] {
                    Some(m) if m != w => ok = false,
                    Some(_) => {}
                    None if vused[w] => ok = false,
                    None => {
                        vmap[v] = Some(w);
                        vused[w] = true;
                        assigned.push(v);
                    }
                }
                if !ok {
                    break;
                }
            }
            if ok && g1.valence(a) == g2.valence(x) && g1.valence(b) == g2.valence(y) {
                eused[f] = true;
                image.push(h);
                extend(g1, g2, image, vmap, vused, eused, out);
                image.pop();
                eused[f] = false;
            }
            for v in assigned {
                vused[vmap[v].unwrap()] = false;
                vmap[v] = None;
            }
            if a == b && x == y {
                // both orientations of a loop give the same assignment
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_symmetries() {
        let g = Graph::new(2, vec![(0, 1), (0, 1), (0, 1)]).unwrap();
        // S_3 on edges times the swap of the two vertices
        assert_eq!(isomorphisms(&g, &g).len(), 12);
    }

    #[test]
    fn rose_symmetries() {
        let g = Graph::rose(2);
        assert_eq!(isomorphisms(&g, &g).len(), 2);
    }

    #[test]
    fn matching_along_loops() {
        let g = Graph::new(2, vec![(0, 1), (0, 1), (0, 1)]).unwrap();
        let h = Graph::new(2, vec![(1, 0), (0, 1), (0, 1)]).unwrap();
        let m = match_along_paths(&g, &[vec![pos(0), rev(pos(1))]], &h, &[vec![rev(pos(0)), rev(pos(2))]]);
        assert!(m.is_none());
        let m = match_along_paths(
            &g,
            &[vec![pos(0), rev(pos(1))], vec![pos(0), rev(pos(2))]],
            &h,
            &[vec![rev(pos(0)), rev(pos(2))], vec![rev(pos(0)), rev(pos(1))]],
        )
        .unwrap();
        assert_eq!(m, vec![rev(pos(0)), pos(2), pos(1)]);
    }
}
