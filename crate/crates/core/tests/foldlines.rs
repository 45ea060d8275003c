use osl::decompose::loop_decomposition;
use osl::foldlines::{lengths_from_params, recover_rose, rose_to_graph, TypeForms};
use osl::foldlines::rose_graph::endpoint_equals;
use osl::graphs::automorphism::AutomorphismWord;
use osl::graphs::generate::random_trivalent;
use osl::graphs::graph::{Graph, Turn};
use osl::graphs::point::{Marking, Point};
use osl::numeric::{q, Q};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn some_turn<R: Rng>(g: &Graph, rng: &mut R) -> Turn {
    loop {
        let v = rng.random_range(0..g.vertices);
        let hs = g.half_edges_at(v);
        let a = rng.random_range(0..hs.len());
        let b = rng.random_range(0..hs.len());
        if hs[a] >> 1 != hs[b] >> 1 {
            return Turn::new(hs[a], hs[b]);
        }
    }
}

pub fn random_point<R: Rng>(r: usize, rng: &mut R) -> Point {
    let g = random_trivalent(r, rng);
    let lengths: Vec<Q> = (0..g.num_edges()).map(|_| q(rng.random_range(1..1000), rng.random_range(1..50))).collect();
    let base = rng.random_range(0..g.vertices);
    let mut marking = Marking::spanning_tree(&g, base);
    for _ in 0..rng.random_range(0..4) {
        let i = rng.random_range(0..r);
        let j = (i + rng.random_range(1..r)) % r;
        marking.word = marking.word.then(&AutomorphismWord::fold(r, i, j).unwrap());
    }
    Point::new(g, lengths, marking).unwrap()
}

#[test]
fn random_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 0..120 {
        let r = 2 + n % 3;
        let x = random_point(r, &mut rng);
        let t = some_turn(&x.graph, &mut rng);
        let d = loop_decomposition(&x.graph, &t).unwrap();
        let rec = recover_rose(&x, &d).unwrap();
        let line = rose_to_graph(&rec.x0, &rec.s).unwrap();
        assert!(endpoint_equals(&line, &rec.top), "round trip failed for {:?}", x.graph);
        let folded: Q = line.records.iter().map(|f| f.amount.clone()).sum();
        assert_eq!(line.endpoint.volume(), rec.x0.volume() - folded);
        assert!(line.extent() >= line.records.iter().map(|f| f.amount.clone()).sum::<Q>());
        assert_eq!(line.endpoint.marking.word.abelianization(), rec.top.marking.word.abelianization());

        let forms = TypeForms::new(&d).unwrap();
        let lengths = lengths_from_params(&forms, &rec.x0.lengths, &rec.s).unwrap();
        assert_eq!(lengths, rec.top.lengths);
        let scale = q(7, 3);
        let scaled: Vec<Q> = rec.x0.lengths.iter().map(|l| l * &scale).collect();
        let s2: Vec<Q> = rec.s.iter().map(|l| l * &scale).collect();
        let twice = lengths_from_params(&forms, &scaled, &s2).unwrap();
        assert!(twice.iter().zip(&lengths).all(|(a, b)| *a == b * &scale));
    }
}

#[test]
fn random_rose_to_rose_lines() {
    use osl::foldlines::graph_rose::Complexity;
    use osl::foldlines::{rationalize, retarget_lengths};
    use osl::graphs::graph::Turn;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut built = 0;
    for n in 0..60 {
        let r = 2 + n % 3;
        let x = random_point(r, &mut rng);
        let t = some_turn(&x.graph, &mut rng);
        let (_, line) = rationalize(&x, &t, &q(1, 10000)).unwrap();
        line.verify().unwrap();
        assert!(line.is_proper());
        let g = &line.graph_to_rose;
        for (p, f) in std::iter::once(&g.start).chain(&g.points).zip(&g.folds) {
            assert!(Turn::new(f.long, f.short).is_direction_matching());
            assert!(p.lengths.iter().all(|l| *l > Q::from_integer(0.into())));
        }
        assert!(g.points.iter().all(|p| p.graph.is_transitive()));
        for w in g.descent.windows(2) {
            if let (Complexity::Paths(a), Complexity::Paths(b)) = (w[0], w[1]) {
                assert!(b < a, "{:?}", g.descent);
            }
        }
        let gear: Vec<_> = g.descent.iter().filter(|c| matches!(c, Complexity::Gear(..))).collect();
        assert!(gear.windows(2).all(|w| w[1] < w[0]));

        let w: Vec<Q> = line.terminal.lengths.iter().map(|l| l * q(rng.random_range(50..150), 100)).collect();
        let moved = retarget_lengths(&line, &w).unwrap();
        assert_eq!(moved.terminal.lengths, w);
        assert_eq!(moved.graph_to_rose.folds, line.graph_to_rose.folds);
        assert_eq!(moved.top.graph, line.top.graph);
        built += 1;
    }
    assert_eq!(built, 60);
}
