use num::{BigInt, One, Zero};
use osl::brun::*;
use osl::graphs::automorphism::AutomorphismWord;
use osl::matrices::{is_positive, unfold_matrix, IntMatrix, PosVector};
use osl::numeric::{float_to_f64, q, rational_to_f64, Q};
use proptest::prelude::*;

fn pv(x: &[(i64, i64)]) -> PosVector {
    PosVector::from_ratios(x).unwrap()
}

fn ratios(dim: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = PosVector> {
    dim.prop_flat_map(|n| prop::collection::vec((1i64..1_000_000_007, 1i64..1_000_000_007), n))
        .prop_map(|v| PosVector::new(v.into_iter().map(|(a, b)| q(a, b)).collect()).unwrap())
}

#[test]
fn one_step_example() {
    let e = brun_expand(&pv(&[(5, 10), (3, 10), (2, 10)]), 1).unwrap();
    assert_eq!(e.symbols, vec![BrunSymbol::new(1, 2)]);
    assert_eq!(e.iterates[1].entries(), &[q(1, 5), q(3, 10), q(1, 5)]);
    assert_eq!(e.products[1], unfold_matrix(1, 2, 3).unwrap());
}

#[test]
fn automorphism_examples() {
    let empty = brun_automorphism(2, &[]);
    assert!(empty.is_empty());
    assert_eq!(empty.transition_matrix().unwrap(), IntMatrix::identity(2));
    let one = brun_automorphism(2, &[BrunSymbol::new(1, 2)]);
    assert_eq!(one, AutomorphismWord::fold(2, 0, 1).unwrap());
    assert_eq!(one.transition_matrix().unwrap(), unfold_matrix(1, 2, 2).unwrap());
    let two = [BrunSymbol::new(1, 2), BrunSymbol::new(2, 1)];
    assert_eq!(brun_automorphism(2, &two).transition_matrix().unwrap(), IntMatrix::from_i64(&[&[2, 1], &[1, 1]]));
    assert_eq!(symbols_product(2, &two), IntMatrix::from_i64(&[&[2, 1], &[1, 1]]));
}

#[test]
fn degenerate_input_stops_cleanly() {
    let e = brun_expand(&pv(&[(1, 2), (1, 2)]), 5).unwrap();
    assert_eq!(e.len(), 1);
    assert!(e.degenerate);
    assert!(PosVector::from_ratios(&[(0, 1), (1, 1)]).is_err());
}

#[test]
fn golden_ratio_onset_and_sample() {
    let v = pv(&[(618_033_988, 1_000_000_000), (381_966_012, 1_000_000_000)]);
    assert_eq!(positivity_onset(&v, 50).unwrap(), 2);
    let s = pf_sample(&pv(&[(1, 2), (1, 3), (1, 6)]), &q(1, 100), 500).unwrap();
    assert!(is_positive(&s.matrix));
    assert_eq!(symbols_product(3, &s.symbols), s.matrix);
}

#[test]
fn pf_sample_rejects_bad_eps() {
    assert!(pf_sample(&pv(&[(1, 2), (1, 2)]), &Q::zero(), 10).is_err());
}

#[test]
fn dither_is_small_and_deterministic() {
    let t = vec![q(1, 3), q(1, 3), q(1, 3)];
    let a = dither(&t, &q(1, 800), 1);
    assert_eq!(a, dither(&t, &q(1, 800), 1));
    assert_eq!(a.iter().sum::<Q>(), Q::one());
    let mass: Q = a.iter().zip(&t).map(|(x, y)| num::Signed::abs(&(x - y))).sum();
    assert!(mass <= q(2, 800));
    assert_ne!(a[0], a[1]);
}

/// Independent f64 PF vector by power iteration.
fn oracle_pf(m: &IntMatrix) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = m.rows().iter().map(|r| r.iter().map(|x| x.to_string().parse().unwrap()).collect()).collect();
    let n = rows.len();
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..2000 {
        let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| rows[i][j] * v[j]).sum()).collect();
        let s: f64 = w.iter().sum();
        v = w.into_iter().map(|x| x / s).collect();
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expansions_are_exact(v in ratios(2..=5), steps in 1usize..40) {
        let e = brun_expand(&v, steps).unwrap();
        for (a, x) in e.products.iter().zip(&e.iterates) {
            prop_assert_eq!(a.apply_rationals(x.entries()).unwrap(), v.entries());
            prop_assert!(a.determinant().is_one());
        }
        for w in e.products.windows(2) {
            prop_assert!(!is_positive(&w[0]) || is_positive(&w[1]));
        }
    }

    #[test]
    fn ordered_steps_stay_sorted(v in ratios(2..=5), steps in 1usize..40) {
        let (sorted, _) = ordering_map(&v);
        let e = brun_expand_ordered(&sorted, steps).unwrap();
        for x in &e.iterates {
            prop_assert!(x.entries().windows(2).all(|w| w[0] >= w[1]));
        }
        for (a, x) in e.products.iter().zip(&e.iterates) {
            prop_assert_eq!(a.apply_rationals(x.entries()).unwrap(), sorted.entries());
        }
    }

    #[test]
    fn homogeneous_step_commutes_with_projection(v in ratios(3..=5)) {
        let (sorted, _) = ordering_map(&v);
        let y = sorted.entries();
        let (_, next) = brun_step_ordered(&sorted).unwrap();
        prop_assume!(!next.entries()[0].is_zero());
        let lhs = brun_step_homogeneous(&project(y).unwrap()).unwrap();
        prop_assert_eq!(lhs, project(next.entries()).unwrap());
    }

    #[test]
    fn relation_between_variants(v in ratios(2..=4), m in 1usize..=10) {
        match relate_expansions(&v, m) {
            Ok((p1, p2)) => {
                let a = &brun_expand(&v, m).unwrap().products[m];
                let b = &brun_expand_ordered(&ordering_map(&v).0, m).unwrap().products[m];
                let rows: Vec<usize> = p1.iter().map(|k| k - 1).collect();
                let cols: Vec<usize> = p2.iter().map(|k| k - 1).collect();
                let rebuilt = IntMatrix::permutation(&rows).mul(b).unwrap().mul(&IntMatrix::permutation(&cols)).unwrap();
                prop_assert_eq!(&rebuilt, a);
            }
            Err(osl::OslError::Degenerate { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn pf_sample_is_reverified(a in 1i64..1000, b in 1i64..1000, c in 1i64..1000) {
        let t = PosVector::new(vec![q(a, 1), q(b, 1), q(c, 1)]).unwrap();
        let eps = q(1, 50);
        let s = pf_sample(&t, &eps, 2000).unwrap();
        prop_assert!(is_positive(&s.matrix));
        let total = (a + b + c) as f64;
        let target = [a as f64 / total, b as f64 / total, c as f64 / total];
        let oracle = oracle_pf(&s.matrix);
        let dist: f64 = oracle.iter().zip(&target).map(|(x, y)| (x - y).abs()).sum();
        prop_assert!(dist < rational_to_f64(&eps), "oracle distance {}", dist);
        prop_assert!(float_to_f64(&s.pf.residual) < 1e-20);
    }
}

#[test]
fn cone_curve_decays_for_generic_vector() {
    let big = |n: i64| Q::new(BigInt::from(n), BigInt::from(1_000_000_007i64));
    let v = PosVector::new(vec![big(612_345_678), big(287_654_321), big(100_000_008)]).unwrap();
    let curve = cone_diameter_curve(&v, 120).unwrap();
    assert!(curve.windows(2).all(|w| w[1] <= w[0]));
    assert!(curve.last().unwrap() < &q(1, 100));
}
