mod common;

use common::{elementary_divisors, random_complex, random_matrix, random_unimodular, rational_rank};
use morsehb::complex::GradedComplex;
use morsehb::homology::homology;
use morsehb::smith::smith_normal_form;
use morsehb::IntMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix() -> impl Strategy<Value = IntMatrix> {
    (0usize..=5, 0usize..=5).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(-5i64..=5, c), r)
            .prop_map(move |body| IntMatrix::from_rows_shaped(r, c, &body).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn divisors_match_minors(a in matrix()) {
        let snf = smith_normal_form(&a).unwrap();
        prop_assert_eq!(&snf.diagonal, &elementary_divisors(&a));
        prop_assert!(snf.diagonal.windows(2).all(|w| w[1] % w[0] == 0));
        prop_assert!(snf.diagonal.iter().all(|&d| d > 0));
    }

    #[test]
    fn rank_matches_rational_rank(a in matrix()) {
        prop_assert_eq!(smith_normal_form(&a).unwrap().rank, rational_rank(&a));
    }

    #[test]
    fn transforms_diagonalise(a in matrix()) {
        let snf = smith_normal_form(&a).unwrap();
        let d = snf.left.checked_mul(&a).unwrap().checked_mul(&snf.right).unwrap();
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                let want = if i == j && i < snf.rank { snf.diagonal[i] } else { 0 };
                prop_assert_eq!(d.row(i)[j], want);
            }
        }
    }

    #[test]
    fn divisors_invariant_under_unimodular_change(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, 5, 5);
        let (u, _) = random_unimodular(&mut rng, a.nrows(), 6);
        let (_, v) = random_unimodular(&mut rng, a.ncols(), 6);
        let b = u.checked_mul(&a).unwrap().checked_mul(&v).unwrap();
        prop_assert_eq!(smith_normal_form(&a).unwrap().diagonal, smith_normal_form(&b).unwrap().diagonal);
    }

    #[test]
    fn homology_of_conjugated_complex(seed in any::<u64>(), dim in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (cx, expected) = random_complex(&mut rng, dim);
        prop_assert_eq!(homology(&cx, false).unwrap(), expected);
    }

    #[test]
    fn euler_identity(seed in any::<u64>(), dim in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (cx, _) = random_complex(&mut rng, dim);
        let h = homology(&cx, false).unwrap();
        let chain: i64 = (0..=dim).map(|k| sign(k) * cx.rank(k) as i64).sum();
        let homological: i64 = h.groups.iter().map(|g| sign(g.degree) * g.betti as i64).sum();
        prop_assert_eq!(chain, homological);
    }

    #[test]
    fn generator_permutation_leaves_homology(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (cx, expected) = random_complex(&mut rng, 2);
        let permuted = permute_top(&cx);
        prop_assert_eq!(homology(&permuted, false).unwrap(), expected);
    }
}

fn sign(k: usize) -> i64 {
    if k % 2 == 0 { 1 } else { -1 }
}

/// Reverses the order of the top-degree generators.
fn permute_top(cx: &GradedComplex) -> GradedComplex {
    let n = cx.dimension();
    let mut gens: Vec<Vec<String>> = (0..=n).map(|k| cx.generators(k).to_vec()).collect();
    gens[n].reverse();
    let mut maps: Vec<IntMatrix> = (1..=n).map(|k| cx.boundary(k)).collect();
    let top = maps[n - 1].to_rows();
    let cols = maps[n - 1].ncols();
    let body: Vec<Vec<i64>> = top.iter().map(|r| r.iter().rev().copied().collect()).collect();
    maps[n - 1] = IntMatrix::from_rows_shaped(maps[n - 1].nrows(), cols, &body).unwrap();
    GradedComplex::new(n, gens, maps).unwrap()
}

#[test]
fn known_divisors() {
    let a = IntMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]).unwrap();
    assert_eq!(elementary_divisors(&a), vec![2, 6, 12]);
    assert_eq!(smith_normal_form(&a).unwrap().diagonal, vec![2, 6, 12]);
}
