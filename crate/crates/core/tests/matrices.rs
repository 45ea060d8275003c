use num::{BigInt, One, Zero};
use osl::matrices::*;
use osl::numeric::{float_to_f64, q, rational_to_f64, Q};
use proptest::prelude::*;

fn from_u64(rows: &[Vec<u64>]) -> IntMatrix {
    IntMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()).unwrap()
}

fn to_f64(m: &IntMatrix) -> Vec<Vec<f64>> {
    m.rows().iter().map(|r| r.iter().map(|x| x.to_string().parse().unwrap()).collect()).collect()
}

/// Plain f64 power iteration, normalized in ℓ¹.
fn power_iteration(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..5000 {
        let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i][j] * v[j]).sum()).collect();
        let s: f64 = w.iter().sum();
        v = w.into_iter().map(|x| x / s).collect();
    }
    v
}

/// Largest ℓ¹ distance between normalized column corners, in f64.
fn corner_diameter(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let s: f64 = (0..n).map(|i| m[i][k]).sum();
            (0..n).map(|i| m[i][k] / s).collect()
        })
        .collect();
    let mut best = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            best = best.max(cols[a].iter().zip(&cols[b]).map(|(x, y)| (x - y).abs()).sum());
        }
    }
    best
}

#[test]
fn fold_and_unfold_are_inverse_unimodular() {
    for n in 2..=6 {
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                let t = fold_matrix(i, j, n).unwrap();
                let m = unfold_matrix(i, j, n).unwrap();
                assert_eq!(t.mul(&m).unwrap(), IntMatrix::identity(n));
                assert_eq!(m.mul(&t).unwrap(), IntMatrix::identity(n));
                assert!(t.determinant().is_one() && m.determinant().is_one());
                assert_eq!(t.unimodular_inverse().unwrap(), m);
            }
        }
    }
}

#[test]
fn fold_matrix_examples() {
    assert_eq!(fold_matrix(1, 2, 3).unwrap(), IntMatrix::from_i64(&[&[1, -1, 0], &[0, 1, 0], &[0, 0, 1]]));
    assert_eq!(unfold_matrix(2, 1, 2).unwrap(), IntMatrix::from_i64(&[&[1, 0], &[1, 1]]));
    assert!(fold_matrix(2, 2, 3).is_err());
    assert!(fold_matrix(0, 1, 3).is_err());
    assert!(unfold_matrix(1, 4, 3).is_err());
}

#[test]
fn apply_is_exact() {
    let v = PosVector::from_ratios(&[(1, 3), (1, 7), (2, 11)]).unwrap();
    let w = apply(&unfold_matrix(1, 3, 3).unwrap(), &v).unwrap();
    assert_eq!(w.entries(), &[q(1, 3) + q(2, 11), q(1, 7), q(2, 11)]);
    let back = apply(&fold_matrix(1, 3, 3).unwrap(), &w).unwrap();
    assert_eq!(back, v);
    assert_eq!(normalize(&w).unwrap().sum(), Q::one());
}

#[test]
fn pf_golden_matrix() {
    let pf = pf_eigen(&IntMatrix::from_i64(&[&[2, 1], &[1, 1]])).unwrap();
    let phi2 = (3.0 + 5f64.sqrt()) / 2.0;
    assert!((pf.eigenvalue_f64() - phi2).abs() < 1e-15);
    let v = pf.eigenvector_f64();
    assert!((v[0] / v[1] - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    assert!(float_to_f64(&pf.residual) < 1e-20);
}

#[test]
fn pf_rejects_non_positive() {
    assert!(pf_eigen(&IntMatrix::from_i64(&[&[1, 1], &[0, 1]])).is_err());
}

#[test]
fn cone_diameter_examples() {
    assert_eq!(cone_diameter(&IntMatrix::identity(2)).unwrap(), q(2, 1));
    assert!(cone_diameter(&IntMatrix::from_i64(&[&[1, 2], &[1, 2]])).unwrap().is_zero());
    assert!(cone_diameter(&IntMatrix::from_i64(&[&[1, -1], &[0, 1]])).is_err());
}

#[test]
fn powers_contract() {
    let m = IntMatrix::from_i64(&[&[3, 1, 1], &[1, 2, 1], &[1, 1, 4]]);
    let mut prev = cone_diameter(&m).unwrap();
    let mut p = m.clone();
    for _ in 0..30 {
        p = p.mul(&m).unwrap();
        let d = cone_diameter(&p).unwrap();
        assert!(d <= prev);
        prev = d;
    }
    assert!(prev < q(1, 1_000_000));
}

fn positive(n: usize, max: u64) -> impl Strategy<Value = Vec<Vec<u64>>> {
    prop::collection::vec(prop::collection::vec(1..=max, n), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pf_residual_and_oracle(rows in positive(3, 1_000_000)) {
        let m = from_u64(&rows);
        let pf = pf_eigen(&m).unwrap();
        prop_assert!(float_to_f64(&pf.residual) < 1e-20);
        let v = pf.eigenvector_f64();
        prop_assert!(v.iter().all(|&x| x > 0.0));
        prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let oracle = power_iteration(&to_f64(&m));
        for (a, b) in v.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn squaring_shrinks_cone(rows in positive(3, 20)) {
        let m = from_u64(&rows);
        let d1 = cone_diameter(&m).unwrap();
        let d2 = cone_diameter(&m.mul(&m).unwrap()).unwrap();
        prop_assert!(d2 <= d1);
        let f1 = corner_diameter(&to_f64(&m));
        prop_assert!((f1 - rational_to_f64(&d1)).abs() < 1e-12);
    }

    #[test]
    fn fold_words_keep_determinant(pairs in prop::collection::vec((1usize..=4, 1usize..=4), 0..12)) {
        let mut a = IntMatrix::identity(4);
        for (i, j) in pairs.into_iter().filter(|(i, j)| i != j) {
            a = a.mul(&unfold_matrix(i, j, 4).unwrap()).unwrap();
        }
        prop_assert!(a.determinant().is_one());
        prop_assert!(a.is_nonnegative());
        prop_assert_eq!(a.unimodular_inverse().unwrap().mul(&a).unwrap(), IntMatrix::identity(4));
    }
}
