use osl::decompose::{bad_edge_count, good_spanning_tree, loop_decomposition, ordered_non_tree_edges, verify_decomposition};
use osl::graphs::generate::{random_trivalent, trivalent_types};
use osl::graphs::graph::{edge_of, Graph, Turn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn all_turns(g: &Graph) -> Vec<Turn> {
    let mut out = Vec::new();
    for v in 0..g.vertices {
        let hs = g.half_edges_at(v);
        for i in 0..hs.len() {
            for j in i + 1..hs.len() {
                if edge_of(hs[i]) != edge_of(hs[j]) {
                    out.push(Turn::new(hs[i], hs[j]));
                }
            }
        }
    }
    out
}

fn check_graph(g: &Graph, turns: &[Turn]) {
    for e in 0..g.num_edges() {
        for root in [g.edges[e].0, g.edges[e].1] {
            let t = good_spanning_tree(g, e, root).unwrap();
            assert_eq!(bad_edge_count(g, &t.tree), 0);
            assert_eq!(t.tree.root_degree(), 1);
            assert!(t.tree.contains_edge(e));
            assert!(t.descent.windows(2).all(|w| w[1] < w[0]));
            assert!(t.descent.len() <= g.num_edges() * g.vertices);
        }
    }
    for turn in turns {
        let d = loop_decomposition(g, turn).unwrap_or_else(|err| panic!("{g:?} {turn}: {err}"));
        assert!(verify_decomposition(&d));
        assert_eq!(d.loops.len(), g.rank());
    }
}

#[test]
fn exhaustive_small_rank() {
    for r in 2..=3 {
        for g in trivalent_types(r) {
            check_graph(&g, &all_turns(&g));
        }
    }
}

#[test]
fn rank_four_types() {
    let types = trivalent_types(4);
    assert_eq!(types.len(), 5);
    for g in types {
        check_graph(&g, &all_turns(&g));
    }
}

#[test]
fn random_rank_four_and_five() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..60 {
        let g = random_trivalent(4 + k % 2, &mut rng);
        let turns = all_turns(&g);
        check_graph(&g, &turns[..3.min(turns.len())]);
    }
}

#[test]
fn non_tree_edge_order_respects_depth() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let g = random_trivalent(4, &mut rng);
        let t = good_spanning_tree(&g, 0, g.edges[0].1).unwrap().tree;
        let order = ordered_non_tree_edges(&g, &t, usize::MAX);
        for (k, &a) in order.iter().enumerate() {
            for &b in &order[k + 1..] {
                let (la, lb) = (t.lower_upper(&g, a).0, t.lower_upper(&g, b).0);
                // v_-(e_k) is never strictly above v_-(e_j) for k < j
                assert!(!(la != lb && t.is_ancestor(lb, la)));
            }
        }
    }
}

#[test]
fn rejects_bad_input() {
    let barbell = Graph::new(2, vec![(0, 0), (0, 1), (1, 1)]).unwrap();
    assert!(loop_decomposition(&barbell, &Turn::parse("+0,-0").unwrap()).is_err());
    let square = Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
    assert!(loop_decomposition(&square, &Turn::parse("+0,-3").unwrap()).is_err());
}
