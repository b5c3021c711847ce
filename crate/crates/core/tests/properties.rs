mod common;

use proptest::prelude::*;

use twext::fp::{FpMatrix, Prime};

fn ok(c: common::Check) {
    match c {
        Ok(s) => println!("{s}"),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn rank_nullity_mod_2() {
    ok(common::rank_nullity(Prime::TWO, 10_000, 2));
}

#[test]
fn rank_nullity_mod_3() {
    ok(common::rank_nullity(Prime::THREE, 10_000, 3));
}

#[test]
fn associativity_sampling() {
    ok(common::associativity(7, 3000));
}

#[test]
fn resolution_audits() {
    ok(common::audits());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn product_rank_is_bounded(
        p in prop::sample::select(vec![2u32, 3]),
        a in prop::collection::vec(prop::collection::vec(0u8..3, 7), 5),
        b in prop::collection::vec(prop::collection::vec(0u8..3, 6), 7),
    ) {
        let p = Prime::new(p).unwrap();
        let red = |m: &Vec<Vec<u8>>| m.iter().map(|r| r.iter().map(|&x| x % p.value() as u8).collect()).collect::<Vec<Vec<u8>>>();
        let ma = FpMatrix::from_rows(p, 7, &red(&a)).unwrap();
        let mb = FpMatrix::from_rows(p, 6, &red(&b)).unwrap();
        let ab = ma.matmul(&mb);
        prop_assert!(ab.rank() <= ma.rank().min(mb.rank()));
        prop_assert_eq!(ab.rank(), common::naive_rank(p.value(), &ab.to_rows()));
    }

    #[test]
    fn solve_finds_preimages(
        rows in prop::collection::vec(prop::collection::vec(0u8..2, 9), 6),
        x in prop::collection::vec(0u8..2, 9),
    ) {
        let m = FpMatrix::from_rows(Prime::TWO, 9, &rows).unwrap();
        let b = m.mul_vec(&x);
        let y = m.solve(&b).unwrap().expect("b lies in the column space");
        prop_assert_eq!(m.mul_vec(&y), b);
    }
}
